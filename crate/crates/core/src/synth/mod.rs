//! Datasets and linear DR maps to audit.

mod calibrate;
mod datasets;
mod linear;

pub use calibrate::{calibrate_r_u, mean_neighbor_count};
pub use datasets::{s_curve, swiss_roll};
pub use linear::{
    coordinate_projection, gaussian_projection, lipschitz_of, pca, pca_projection, random_projection, LinearMap, Pca,
};
