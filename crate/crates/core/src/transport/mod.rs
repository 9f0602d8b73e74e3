//! Discrete optimal transport.
//!
//! Costs default to squared Euclidean distance, so `√(total_cost)` of an
//! optimal plan between probability weights is the W2 distance.
//!
//! | Solver | Problem | Method |
//! |--------|---------|--------|
//! | [`solve_assignment`] | uniform, equal sizes | shortest augmenting path (Hungarian), O(n³) |
//! | [`solve_discrete_ot`] | arbitrary balanced weights | successive shortest paths with potentials |
//! | [`solve_partial_ot`] | dominated marginals, fixed mass | same, stopped at the requested mass |
//! | [`sinkhorn`] | balanced, large | entropic scaling, log-domain fallback |
//! | [`w2_1d`] | scalar supports | quantile merge, O(N + M) |

mod assignment;
mod exact;
mod one_dim;
mod sinkhorn;

use std::io::Write;

pub use assignment::{solve_assignment, Assignment};
pub use exact::{solve_discrete_ot, solve_partial_ot, PARTIAL_OT_MAX_ATOMS};
pub use one_dim::w2_1d;
pub use sinkhorn::{sinkhorn, SinkhornOutcome, SINKHORN_MARGINAL_TOL};

use crate::error::{invalid, Error, Result};
use crate::geometry::{sq_dist, PointCloud};

/// Tolerance for marginal and cost consistency of exact plans.
pub const PLAN_TOL: f64 = 1e-9;

/// Row-major matrix of nonnegative transport costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("cost matrix must have at least one row and column"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        if let Some(bad) = entries.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(invalid(format!("costs must be finite and nonnegative, got {bad}")));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> CostMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j));
            }
        }
        CostMatrix { rows: self.cols, cols: self.rows, entries }
    }

    pub fn scaled(&self, factor: f64) -> Result<CostMatrix> {
        Self::new(self.rows, self.cols, self.entries.iter().map(|c| c * factor).collect())
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Median over all entries.
    pub fn median(&self) -> f64 {
        median(self.entries.clone())
    }

    /// Median over strictly positive entries, or 0 if there are none.
    pub fn median_nonzero(&self) -> f64 {
        let pos: Vec<f64> = self.entries.iter().copied().filter(|&c| c > 0.0).collect();
        if pos.is_empty() {
            0.0
        } else {
            median(pos)
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Squared Euclidean costs `c_ij = ‖a_i − b_j‖²`.
pub fn cost_matrix(a: &PointCloud, b: &PointCloud) -> Result<CostMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    CostMatrix::from_fn(a.count(), b.count(), |i, j| sq_dist(a.point(i), b.point(j)))
}

/// A discrete coupling between two weighted supports.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
    /// Row weights the plan was asked to match (caps, for partial plans).
    pub source_marginal: Vec<f64>,
    /// Column weights the plan was asked to match (caps, for partial plans).
    pub target_marginal: Vec<f64>,
    /// `Σ mass_ij · cost_ij`.
    pub total_cost: f64,
    /// `Some(M)` for partial plans: total transported mass, marginals only dominated.
    pub transported_mass: Option<f64>,
}

impl TransportPlan {
    pub(crate) fn from_parts(
        cost: &CostMatrix,
        mass: Vec<f64>,
        source_marginal: Vec<f64>,
        target_marginal: Vec<f64>,
        transported_mass: Option<f64>,
    ) -> Self {
        let total_cost = mass.iter().zip(cost.entries()).map(|(x, c)| x * c).sum();
        Self { rows: cost.rows(), cols: cost.cols(), mass, source_marginal, target_marginal, total_cost, transported_mass }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mass.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.mass.chunks_exact(self.cols) {
            for (o, x) in out.iter_mut().zip(r) {
                *o += x;
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Root of the total cost; W2 when costs are squared distances.
    pub fn wasserstein(&self) -> f64 {
        self.total_cost.max(0.0).sqrt()
    }

    /// Nonzero cells `(i, j, mass)` in row-major order.
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(k, &x)| (k / self.cols, k % self.cols, x))
            .collect()
    }

    /// Largest violation of the marginal constraints (equalities for balanced
    /// plans, upper bounds for partial ones).
    pub fn marginal_violation(&self) -> f64 {
        let rows = self.row_sums();
        let cols = self.col_sums();
        let gap = |got: &[f64], want: &[f64]| -> f64 {
            got.iter()
                .zip(want)
                .map(|(g, w)| if self.transported_mass.is_some() { (g - w).max(0.0) } else { (g - w).abs() })
                .fold(0.0, f64::max)
        };
        let mut v = gap(&rows, &self.source_marginal).max(gap(&cols, &self.target_marginal));
        if let Some(m) = self.transported_mass {
            v = v.max((self.total_mass() - m).abs());
        }
        v
    }

    /// Checks nonnegativity, marginals, and cost consistency against `cost`.
    pub fn check(&self, cost: &CostMatrix, tol: f64) -> Result<()> {
        if cost.rows() != self.rows || cost.cols() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, got: cost.rows() * cost.cols() });
        }
        if let Some(neg) = self.mass.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::NumericFailure { message: format!("plan holds invalid mass {neg}"), achieved: *neg });
        }
        let v = self.marginal_violation();
        if v > tol {
            return Err(Error::NumericFailure { message: "plan violates its marginals".into(), achieved: v });
        }
        let recomputed: f64 = self.mass.iter().zip(cost.entries()).map(|(x, c)| x * c).sum();
        let drift = (recomputed - self.total_cost).abs();
        if drift > tol * recomputed.abs().max(1.0) {
            return Err(Error::NumericFailure { message: "plan cost is inconsistent".into(), achieved: drift });
        }
        Ok(())
    }

    /// Writes the nonzero cells as `i,j,mass` CSV triplets.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "j", "mass"])?;
        for (i, j, x) in self.support() {
            wtr.write_record([i.to_string(), j.to_string(), format!("{x:?}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn check_weights(name: &str, w: &[f64]) -> Result<f64> {
    if w.is_empty() {
        return Err(invalid(format!("{name} weights must be nonempty")));
    }
    if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(invalid(format!("{name} weights must be finite and nonnegative, got {bad}")));
    }
    Ok(w.iter().sum())
}

pub(crate) fn check_balanced(mu: &[f64], nu: &[f64]) -> Result<f64> {
    let sa = check_weights("source", mu)?;
    let sb = check_weights("target", nu)?;
    if (sa - sb).abs() > PLAN_TOL {
        return Err(invalid(format!("unbalanced masses: {sa} vs {sb}")));
    }
    Ok(sa)
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_matrix_basics() {
        let a = PointCloud::from_rows(&[[0.0], [3.0]]).unwrap();
        let b = PointCloud::from_rows(&[[1.0]]).unwrap();
        let c = cost_matrix(&a, &b).unwrap();
        assert_eq!((c.rows(), c.cols()), (2, 1));
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(1, 0), 4.0);
        let same = cost_matrix(&a, &a).unwrap();
        assert_eq!(same.get(0, 0), 0.0);
        assert_eq!(same.get(1, 1), 0.0);
        let wrong = PointCloud::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(cost_matrix(&a, &wrong).is_err());
    }

    #[test]
    fn cost_matrix_matches_double_loop() {
        let a = crate::geometry::sample_uniform_ball(3, 1.0, 17, 1).unwrap();
        let b = crate::geometry::sample_uniform_ball(3, 2.0, 9, 2).unwrap();
        let c = cost_matrix(&a, &b).unwrap();
        for i in 0..17 {
            for j in 0..9 {
                let mut s = 0.0;
                for k in 0..3 {
                    let d = a.point(i)[k] - b.point(j)[k];
                    s += d * d;
                }
                assert_eq!(c.get(i, j), s);
            }
        }
        assert_eq!(c.transpose().get(4, 11), c.get(11, 4));
    }

    #[test]
    fn rejects_bad_costs() {
        assert!(CostMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(CostMatrix::new(1, 1, vec![-1.0]).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(CostMatrix::new(0, 0, vec![]).is_err());
    }

    #[test]
    fn medians() {
        let c = CostMatrix::new(2, 2, vec![0.0, 4.0, 1.0, 3.0]).unwrap();
        assert_eq!(c.median(), 2.0);
        assert_eq!(c.median_nonzero(), 3.0);
    }
}
