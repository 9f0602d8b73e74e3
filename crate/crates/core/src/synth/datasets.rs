//! Parametric 2-manifolds in 3-D.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::geometry::{seeded_rng, PointCloud};

fn manifold(count: usize, noise: f64, seed: u64, embed: impl Fn(f64, f64) -> [f64; 3], t_range: (f64, f64), y_max: f64) -> Result<PointCloud> {
    if count == 0 {
        return Err(invalid("count must be positive"));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(invalid(format!("noise must be nonnegative, got {noise}")));
    }
    let mut rng = seeded_rng(seed);
    let mut data = Vec::with_capacity(count * 3);
    for _ in 0..count {
        let t = t_range.0 + (t_range.1 - t_range.0) * rng.random::<f64>();
        let y = y_max * rng.random::<f64>();
        let mut p = embed(t, y);
        if noise > 0.0 {
            for v in &mut p {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += noise * z;
            }
        }
        data.extend_from_slice(&p);
    }
    PointCloud::from_flat(3, data)
}

/// `(sin t, y, sign(t)(cos t − 1))` with `t ∈ [−3π/2, 3π/2]`, `y ∈ [0, 2]`.
pub fn s_curve(count: usize, noise: f64, seed: u64) -> Result<PointCloud> {
    manifold(
        count,
        noise,
        seed,
        |t, y| [t.sin(), y, t.signum() * (t.cos() - 1.0)],
        (-1.5 * PI, 1.5 * PI),
        2.0,
    )
}

/// `(t cos t, y, t sin t)` with `t ∈ [1.5π, 4.5π]`, `y ∈ [0, 21]`.
pub fn swiss_roll(count: usize, noise: f64, seed: u64) -> Result<PointCloud> {
    manifold(count, noise, seed, |t, y| [t * t.cos(), y, t * t.sin()], (1.5 * PI, 4.5 * PI), 21.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_curve_lies_on_the_surface() {
        let c = s_curve(2000, 0.0, 1).unwrap();
        for p in c.points() {
            // sin t = x and cos t = 1 − |z|.
            assert!((p[0] * p[0] + (1.0 - p[2].abs()).powi(2) - 1.0).abs() < 1e-12);
            assert!((0.0..=2.0).contains(&p[1]));
            assert!(p[2].abs() <= 2.0);
        }
        assert_eq!(c, s_curve(2000, 0.0, 1).unwrap());
        assert_ne!(c, s_curve(2000, 0.0, 2).unwrap());
    }

    #[test]
    fn swiss_roll_radial_range() {
        let c = swiss_roll(5000, 0.0, 3).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for p in c.points() {
            let t = (p[0] * p[0] + p[2] * p[2]).sqrt();
            assert!((1.5 * PI - 1e-12..=4.5 * PI + 1e-12).contains(&t));
            // The angle of (x, z) agrees with the radius mod 2π.
            let wrapped = (p[2].atan2(p[0]) - t).rem_euclid(2.0 * PI);
            assert!(wrapped < 1e-9 || 2.0 * PI - wrapped < 1e-9);
            assert!((0.0..=21.0).contains(&p[1]));
            lo = lo.min(t);
            hi = hi.max(t);
        }
        assert!(lo < 1.5 * PI + 0.05 && hi > 4.5 * PI - 0.05);
    }

    #[test]
    fn noise_perturbs_and_rejects_bad_input() {
        let clean = swiss_roll(100, 0.0, 8).unwrap();
        let noisy = swiss_roll(100, 0.5, 8).unwrap();
        assert_ne!(clean, noisy);
        assert!(s_curve(0, 0.0, 0).is_err());
        assert!(s_curve(5, -1.0, 0).is_err());
    }
}
