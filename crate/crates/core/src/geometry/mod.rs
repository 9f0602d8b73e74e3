//! Point clouds, ball volumes, uniform sampling, and exact neighbourhood queries.

mod cloud;
mod neighbors;
mod sampling;
pub mod special;

pub use cloud::PointCloud;
pub use neighbors::{k_nearest, neighbors_within, Neighborhood, NeighborhoodQuery};
pub use sampling::{sample_uniform_ball, seeded_rng};
pub use special::{generalized_ball_volume, ln_gamma, sphere_surface, unit_ball_volume};

/// Squared Euclidean distance between two equal-length coordinate slices.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
