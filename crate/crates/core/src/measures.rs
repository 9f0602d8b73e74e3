//! Empirical retrieval quality of an embedding pair.
//!
//! Precision and recall use fixed radii: the relevant set of query `i` is every
//! other point within `r_U` of `x_i` in the high-dimensional cloud, the
//! retrieved set is every other point within `r_V` of `y_i` in the embedding.
//! The Wasserstein diagnostics use fixed-size `k`-nearest neighbourhoods on
//! both sides, which reduces each W2 to an assignment problem.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{k_nearest, sq_dist, PointCloud};
use crate::transport::{cost_matrix, sinkhorn, solve_assignment, uniform_weights};

/// Neighbourhood size used by the Wasserstein measures unless overridden.
pub const DEFAULT_K: usize = 30;
/// Above this neighbourhood size the W2 measures switch to Sinkhorn.
pub const EXACT_W2_MAX_K: usize = 512;
/// Sinkhorn fallback regularization, as a multiple of the median nonzero cost.
pub const FALLBACK_EPSILON_FACTOR: f64 = 0.05;
const FALLBACK_MAX_ITER: usize = 5_000;

/// A high-dimensional cloud and its image under a DR map, aligned by index.
#[derive(Debug, Clone)]
pub struct EmbeddingPair {
    high: PointCloud,
    low: PointCloud,
}

impl EmbeddingPair {
    pub fn new(high: PointCloud, low: PointCloud) -> Result<Self> {
        if high.count() != low.count() {
            return Err(invalid(format!("clouds hold {} and {} points", high.count(), low.count())));
        }
        if low.dim() >= high.dim() {
            return Err(invalid(format!(
                "embedding dimension {} must be below input dimension {}",
                low.dim(),
                high.dim()
            )));
        }
        Ok(Self { high, low })
    }

    pub fn high(&self) -> &PointCloud {
        &self.high
    }

    pub fn low(&self) -> &PointCloud {
        &self.low
    }

    pub fn count(&self) -> usize {
        self.high.count()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.count() {
            return Err(Error::IndexOutOfRange { index: i, count: self.count() });
        }
        Ok(())
    }
}

/// Set sizes behind one query's precision and recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RetrievalCounts {
    pub relevant: usize,
    pub retrieved: usize,
    pub both: usize,
}

impl RetrievalCounts {
    pub fn precision(&self) -> Option<f64> {
        (self.retrieved > 0).then(|| self.both as f64 / self.retrieved as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.relevant > 0).then(|| self.both as f64 / self.relevant as f64)
    }
}

pub fn retrieval_counts(pair: &EmbeddingPair, i: usize, r_u: f64, r_v: f64) -> Result<RetrievalCounts> {
    pair.check_index(i)?;
    let (xu, yv) = (r_u * r_u, r_v * r_v);
    let (xi, yi) = (pair.high.point(i), pair.low.point(i));
    let mut c = RetrievalCounts { relevant: 0, retrieved: 0, both: 0 };
    for j in (0..pair.count()).filter(|&j| j != i) {
        let rel = sq_dist(pair.high.point(j), xi) < xu;
        let ret = sq_dist(pair.low.point(j), yi) < yv;
        c.relevant += rel as usize;
        c.retrieved += ret as usize;
        c.both += (rel && ret) as usize;
    }
    Ok(c)
}

/// Fraction of retrieved points that are relevant; `None` when nothing is retrieved.
pub fn discrete_precision(pair: &EmbeddingPair, i: usize, r_u: f64, r_v: f64) -> Result<Option<f64>> {
    Ok(retrieval_counts(pair, i, r_u, r_v)?.precision())
}

/// Fraction of relevant points that are retrieved; `None` when nothing is relevant.
pub fn discrete_recall(pair: &EmbeddingPair, i: usize, r_u: f64, r_v: f64) -> Result<Option<f64>> {
    Ok(retrieval_counts(pair, i, r_u, r_v)?.recall())
}

/// `(1+β²) P R / (β² P + R)`, with 0 when both are 0.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// Which side of the map a Wasserstein measure is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum W2Solver {
    Assignment,
    Sinkhorn { epsilon_factor: f64 },
}

fn check_k(pair: &EmbeddingPair, k: usize) -> Result<()> {
    if k == 0 || k >= pair.count() {
        return Err(invalid(format!("k must lie in 1..{}, got {k}", pair.count())));
    }
    Ok(())
}

/// The two neighbourhoods of query `i`: the `k` nearest in the input cloud
/// (relevant) and the `k` nearest in the embedding (retrieved).
fn knn_sets(pair: &EmbeddingPair, i: usize, k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let relevant = k_nearest(&pair.high, i, k)?.member_indices;
    let retrieved = k_nearest(&pair.low, i, k)?.member_indices;
    Ok((relevant, retrieved))
}

fn uniform_w2(cloud: &PointCloud, a: &[usize], b: &[usize]) -> Result<(f64, W2Solver)> {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa == sb {
        return Ok((0.0, W2Solver::Assignment));
    }
    let cost = cost_matrix(&cloud.select(a), &cloud.select(b))?;
    let k = a.len();
    if k <= EXACT_W2_MAX_K {
        let assign = solve_assignment(&cost)?;
        Ok(((assign.total_cost / k as f64).max(0.0).sqrt(), W2Solver::Assignment))
    } else {
        let w = uniform_weights(k);
        let eps = FALLBACK_EPSILON_FACTOR * cost.median_nonzero();
        let out = sinkhorn(&w, &w, &cost, eps, FALLBACK_MAX_ITER)?;
        Ok((out.plan.wasserstein(), W2Solver::Sinkhorn { epsilon_factor: FALLBACK_EPSILON_FACTOR }))
    }
}

fn w2_measure(pair: &EmbeddingPair, i: usize, k: usize, side: Side) -> Result<(f64, W2Solver)> {
    pair.check_index(i)?;
    check_k(pair, k)?;
    let (relevant, retrieved) = knn_sets(pair, i, k)?;
    let cloud = match side {
        Side::High => &pair.high,
        Side::Low => &pair.low,
    };
    uniform_w2(cloud, &relevant, &retrieved)
}

/// W2 in the input space between the `k` nearest input neighbours of `x_i` and
/// the input points whose images are the `k` nearest to `y_i`. Large values
/// mean the map folds distant inputs together.
pub fn w2_many_to_one(pair: &EmbeddingPair, i: usize, k: usize) -> Result<f64> {
    Ok(w2_measure(pair, i, k, Side::High)?.0)
}

/// W2 in the embedding between the images of the `k` nearest input neighbours
/// of `x_i` and the `k` nearest embedded neighbours of `y_i`. Large values
/// mean the map tears neighbourhoods apart.
pub fn w2_discontinuity(pair: &EmbeddingPair, i: usize, k: usize) -> Result<f64> {
    Ok(w2_measure(pair, i, k, Side::Low)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditConfig {
    pub k: usize,
    pub r_u: f64,
    pub r_v: f64,
    pub beta: f64,
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("r_U", self.r_u), ("r_V", self.r_v)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(invalid(format!("{name} must be nonnegative, got {x}")));
            }
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if self.k == 0 {
            return Err(invalid("k must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryMeasures {
    pub index: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_beta: Option<f64>,
    pub w2_many_to_one: Option<f64>,
    pub w2_discontinuity: Option<f64>,
    pub w2_cost: Option<f64>,
    pub retrieved_count: usize,
    pub relevant_count: usize,
}

/// Summary of one report column over the queries where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub defined: usize,
}

impl ColumnStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let h = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 { sorted[h] } else { 0.5 * (sorted[h - 1] + sorted[h]) };
        Some(Self { mean, median, stddev: var.sqrt(), defined: values.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub precision: Option<ColumnStats>,
    pub recall: Option<ColumnStats>,
    pub f_beta: Option<ColumnStats>,
    pub w2_many_to_one: Option<ColumnStats>,
    pub w2_discontinuity: Option<ColumnStats>,
    pub w2_cost: Option<ColumnStats>,
}

impl Aggregates {
    fn from_rows(rows: &[QueryMeasures]) -> Self {
        let col = |f: fn(&QueryMeasures) -> Option<f64>| {
            let v: Vec<f64> = rows.iter().filter_map(f).collect();
            ColumnStats::from_values(&v)
        };
        Self {
            precision: col(|q| q.precision),
            recall: col(|q| q.recall),
            f_beta: col(|q| q.f_beta),
            w2_many_to_one: col(|q| q.w2_many_to_one),
            w2_discontinuity: col(|q| q.w2_discontinuity),
            w2_cost: col(|q| q.w2_cost),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub config: AuditConfig,
    pub w2_solver: W2Solver,
    pub per_query: Vec<QueryMeasures>,
    pub aggregates: Aggregates,
    /// Queries with at least one undefined measure.
    pub skipped: Vec<usize>,
}

impl MeasureReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-query rows as CSV; undefined entries are left empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "index",
            "precision",
            "recall",
            "f_beta",
            "w2_many_to_one",
            "w2_discontinuity",
            "w2_cost",
            "retrieved_count",
            "relevant_count",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
        for q in &self.per_query {
            wtr.write_record([
                q.index.to_string(),
                opt(q.precision),
                opt(q.recall),
                opt(q.f_beta),
                opt(q.w2_many_to_one),
                opt(q.w2_discontinuity),
                opt(q.w2_cost),
                q.retrieved_count.to_string(),
                q.relevant_count.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn measure_query(pair: &EmbeddingPair, i: usize, cfg: &AuditConfig) -> Result<(QueryMeasures, W2Solver)> {
    let counts = retrieval_counts(pair, i, cfg.r_u, cfg.r_v)?;
    let (precision, recall) = (counts.precision(), counts.recall());
    let f = match (precision, recall) {
        (Some(p), Some(r)) => Some(f_beta(p, r, cfg.beta)),
        _ => None,
    };
    let (relevant, retrieved) = knn_sets(pair, i, cfg.k)?;
    let (m2o, solver) = uniform_w2(&pair.high, &relevant, &retrieved)?;
    let (disc, _) = uniform_w2(&pair.low, &relevant, &retrieved)?;
    Ok((
        QueryMeasures {
            index: i,
            precision,
            recall,
            f_beta: f,
            w2_many_to_one: Some(m2o),
            w2_discontinuity: Some(disc),
            w2_cost: Some((m2o + disc) / 2.0),
            retrieved_count: counts.retrieved,
            relevant_count: counts.relevant,
        },
        solver,
    ))
}

/// Every per-query measure plus aggregates, in index order.
pub fn audit(pair: &EmbeddingPair, config: &AuditConfig) -> Result<MeasureReport> {
    config.validate()?;
    let n = pair.count();
    let mut solver = if config.k <= EXACT_W2_MAX_K {
        W2Solver::Assignment
    } else {
        W2Solver::Sinkhorn { epsilon_factor: FALLBACK_EPSILON_FACTOR }
    };
    let mut per_query = Vec::with_capacity(n);
    if n == 1 {
        per_query.push(QueryMeasures {
            index: 0,
            precision: None,
            recall: None,
            f_beta: None,
            w2_many_to_one: None,
            w2_discontinuity: None,
            w2_cost: None,
            retrieved_count: 0,
            relevant_count: 0,
        });
    } else {
        check_k(pair, config.k)?;
        for i in 0..n {
            let (q, s) = measure_query(pair, i, config).map_err(|e| Error::AtQuery { index: i, source: Box::new(e) })?;
            if matches!(s, W2Solver::Sinkhorn { .. }) {
                solver = s;
            }
            per_query.push(q);
        }
    }
    let skipped = per_query
        .iter()
        .filter(|q| q.precision.is_none() || q.recall.is_none() || q.w2_cost.is_none())
        .map(|q| q.index)
        .collect();
    let aggregates = Aggregates::from_rows(&per_query);
    Ok(MeasureReport { config: *config, w2_solver: solver, per_query, aggregates, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_uniform_ball;
    use crate::transport::CostMatrix;

    /// Lifts a 2-D cloud isometrically into 3-D (rotation about the x axis).
    fn lifted(low: &PointCloud) -> PointCloud {
        let (s, c) = (0.6f64, 0.8f64);
        low.map_points(3, |p, out| {
            out[0] = p[0];
            out[1] = c * p[1];
            out[2] = s * p[1];
        })
    }

    fn identity_pair(n: usize, seed: u64) -> EmbeddingPair {
        let low = sample_uniform_ball(2, 1.0, n, seed).unwrap();
        EmbeddingPair::new(lifted(&low), low).unwrap()
    }

    #[test]
    fn pair_validation() {
        let a = sample_uniform_ball(3, 1.0, 10, 1).unwrap();
        let b = sample_uniform_ball(2, 1.0, 9, 1).unwrap();
        assert!(EmbeddingPair::new(a.clone(), b).is_err());
        assert!(EmbeddingPair::new(a.clone(), a).is_err());
    }

    #[test]
    fn f_beta_examples() {
        for p in [0.1, 0.5, 0.9] {
            for beta in [0.3, 1.0, 3.0] {
                assert!((f_beta(p, p, beta) - p).abs() < 1e-15);
            }
        }
        assert!((f_beta(0.5, 1.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((f_beta(0.4, 0.9, 1e-8) - 0.4).abs() < 1e-12);
        assert_eq!(f_beta(0.0, 0.0, 0.3), 0.0);
    }

    #[test]
    fn identity_embedding_precision_equals_recall() {
        let pair = identity_pair(60, 2);
        for i in 0..60 {
            let c = retrieval_counts(&pair, i, 0.4, 0.4).unwrap();
            if let Some(p) = c.precision() {
                assert_eq!(p, 1.0);
                assert_eq!(c.recall(), Some(1.0));
            }
        }
    }

    #[test]
    fn disjoint_sets_give_zero_precision() {
        // Embedding swaps two far-apart clusters' neighbours.
        let high = PointCloud::from_rows(&[[0.0, 0.0], [0.1, 0.0], [10.0, 0.0]]).unwrap();
        let low = PointCloud::from_rows(&[[0.0], [5.0], [0.05]]).unwrap();
        let pair = EmbeddingPair::new(high, low).unwrap();
        assert_eq!(discrete_precision(&pair, 0, 1.0, 1.0).unwrap(), Some(0.0));
        assert_eq!(discrete_recall(&pair, 0, 1.0, 1.0).unwrap(), Some(0.0));
        assert_eq!(discrete_recall(&pair, 0, 1.0, 0.0).unwrap(), Some(0.0));
        assert_eq!(discrete_precision(&pair, 0, 1.0, 0.0).unwrap(), None);
        assert!(discrete_precision(&pair, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn counts_match_set_oracle() {
        let high = sample_uniform_ball(4, 1.0, 20, 8).unwrap();
        let low = high.map_points(2, |p, o| {
            o[0] = p[0] + 0.3 * p[3];
            o[1] = p[1] - 0.2 * p[2];
        });
        let pair = EmbeddingPair::new(high.clone(), low.clone()).unwrap();
        let d = |c: &PointCloud, i: usize, j: usize| sq_dist(c.point(i), c.point(j)).sqrt();
        for i in 0..20 {
            let rel: Vec<usize> = (0..20).filter(|&j| j != i && d(&high, i, j) < 0.7).collect();
            let ret: Vec<usize> = (0..20).filter(|&j| j != i && d(&low, i, j) < 0.5).collect();
            let both = rel.iter().filter(|j| ret.contains(j)).count();
            let c = retrieval_counts(&pair, i, 0.7, 0.5).unwrap();
            assert_eq!(c, RetrievalCounts { relevant: rel.len(), retrieved: ret.len(), both });
        }
    }

    #[test]
    fn identity_map_has_zero_w2() {
        let pair = identity_pair(40, 3);
        for i in 0..40 {
            assert_eq!(w2_many_to_one(&pair, i, 5).unwrap(), 0.0);
            assert_eq!(w2_discontinuity(&pair, i, 5).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_map_is_many_to_one() {
        let high = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]]).unwrap();
        let low = PointCloud::from_rows(&[[0.0]; 5]).unwrap();
        let pair = EmbeddingPair::new(high.clone(), low).unwrap();
        // From query 4: relevant = {3, 2}; retrieved (all ties, by index) = {0, 1}.
        // Matchings {3->0, 2->1} and {3->1, 2->0} cost 9+1 and 4+4; the best is 8.
        let w = w2_many_to_one(&pair, 4, 2).unwrap();
        assert!((w - (8.0f64 / 2.0).sqrt()).abs() < 1e-15);
        let spread = EmbeddingPair::new(
            high.map_points(2, |p, o| {
                o[0] = 3.0 * p[0];
                o[1] = 0.0;
            }),
            PointCloud::from_rows(&[[0.0]; 5]).unwrap(),
        )
        .unwrap();
        assert!(w2_many_to_one(&spread, 4, 2).unwrap() > w);
        assert_eq!(w2_discontinuity(&pair, 4, 2).unwrap(), 0.0);
    }

    #[test]
    fn teleported_outlier_raises_discontinuity() {
        let high = sample_uniform_ball(3, 1.0, 30, 4).unwrap();
        let project = |p: &[f64], o: &mut [f64]| {
            o[0] = p[0];
            o[1] = p[1];
        };
        let base = EmbeddingPair::new(high.clone(), high.map_points(2, project)).unwrap();
        let mut torn = high.map_points(2, project).as_flat().to_vec();
        torn[0] += 5.0;
        let torn = EmbeddingPair::new(high, PointCloud::from_flat(2, torn).unwrap()).unwrap();
        let i = (1..30).min_by(|&a, &b| {
            sq_dist(base.high().point(a), base.high().point(0)).total_cmp(&sq_dist(base.high().point(b), base.high().point(0)))
        });
        let i = i.unwrap();
        assert!(w2_discontinuity(&torn, i, 5).unwrap() > w2_discontinuity(&base, i, 5).unwrap());
    }

    #[test]
    fn assignment_oracle_for_w2() {
        let pair = {
            let high = sample_uniform_ball(3, 1.0, 25, 12).unwrap();
            let low = high.map_points(2, |p, o| {
                o[0] = p[0] * p[2];
                o[1] = p[1];
            });
            EmbeddingPair::new(high, low).unwrap()
        };
        for i in [0, 7, 19] {
            let (rel, ret) = knn_sets(&pair, i, 4).unwrap();
            // Enumerate all 4! matchings.
            let c = CostMatrix::from_fn(4, 4, |a, b| sq_dist(pair.high().point(rel[a]), pair.high().point(ret[b]))).unwrap();
            let mut best = f64::INFINITY;
            let perms = [[0, 1, 2, 3]];
            let mut all = Vec::new();
            fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
                if k == v.len() {
                    out.push(v.clone());
                    return;
                }
                for s in k..v.len() {
                    v.swap(k, s);
                    permute(v, k + 1, out);
                    v.swap(k, s);
                }
            }
            permute(&mut perms[0].to_vec(), 0, &mut all);
            for p in &all {
                best = best.min((0..4).map(|a| c.get(a, p[a])).sum());
            }
            let w = w2_many_to_one(&pair, i, 4).unwrap();
            assert!((w - (best / 4.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn audit_identity_and_degenerate() {
        let pair = identity_pair(50, 6);
        let cfg = AuditConfig { k: 6, r_u: 0.5, r_v: 0.5, beta: 0.3 };
        let rep = audit(&pair, &cfg).unwrap();
        assert_eq!(rep.per_query.len(), 50);
        for q in &rep.per_query {
            assert_eq!(q.w2_cost, Some(0.0));
            assert_eq!(q.precision, q.recall);
        }
        assert_eq!(rep.aggregates.w2_cost.unwrap().mean, 0.0);

        let single = EmbeddingPair::new(
            PointCloud::from_rows(&[[1.0, 2.0]]).unwrap(),
            PointCloud::from_rows(&[[1.0]]).unwrap(),
        )
        .unwrap();
        let rep = audit(&single, &cfg).unwrap();
        assert_eq!(rep.skipped, vec![0]);
        assert!(rep.aggregates.precision.is_none());

        let bad = AuditConfig { k: 50, ..cfg };
        assert!(audit(&pair, &bad).is_err());
        assert!(audit(&pair, &AuditConfig { beta: 0.0, ..cfg }).is_err());
    }

    #[test]
    fn audit_csv_has_header_and_rows() {
        let pair = identity_pair(12, 1);
        let rep = audit(&pair, &AuditConfig { k: 3, r_u: 0.01, r_v: 0.01, beta: 1.0 }).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.starts_with("index,precision,recall"));
        assert_eq!(rep.skipped.len(), 12);
    }
}
