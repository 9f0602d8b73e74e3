//! Audits of dimensionality-reduction maps used for neighbourhood retrieval.
//!
//! A DR map `f: R^n -> R^m` with `m < n` cannot preserve neighbourhoods both
//! ways. This crate quantifies that:
//!
//! - [`bounds`] evaluates closed-form limits: the worst-case and average-case
//!   precision ceilings, the Wasserstein lower bound, and the retrieval radius
//!   at which that bound starts to bite.
//! - [`measures`] computes empirical precision, recall, f-β, and the
//!   Wasserstein many-to-one / discontinuity diagnostics on an embedding pair.
//! - [`transport`] hosts the discrete optimal transport solvers behind the
//!   Wasserstein quantities (assignment, exact balanced and partial transport,
//!   entropic Sinkhorn, and the 1-D quantile formula).
//! - [`synth`] generates datasets and linear maps to audit.
//! - [`experiments`] drives desk-scale checks of the transport identities and the
//!   precision/recall tradeoff simulation, and renders SVG plots.
//!
//! ```
//! use dr_audit::bounds::{d_factor, BoundParams, precision_bound_worst};
//!
//! assert!((d_factor(10, 2).unwrap() - 0.2).abs() < 1e-12);
//! let p = BoundParams::new(3, 1, 1.0, 0.1, 0.2, 1.0).unwrap();
//! assert!((precision_bound_worst(&p) - 0.1 / 30.0).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod measures;
pub mod quadrature;
pub mod synth;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{Neighborhood, PointCloud};
pub use measures::{EmbeddingPair, MeasureReport};
pub use transport::{CostMatrix, TransportPlan};
