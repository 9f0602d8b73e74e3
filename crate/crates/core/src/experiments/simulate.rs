//! The precision/recall tradeoff sweep on a uniform ball.
//!
//! A uniform sample of the unit `n`-ball is projected to each `m` by an
//! orthonormal random projection. For every retrieval radius `r_V` on a grid
//! the mean discrete precision and recall over queries are recorded, and f-β
//! is taken of those two means. The grid always contains the radius `rv*`
//! where the worst-case precision bound reaches 1, so its f-β can be compared
//! with the best on the grid.

use std::io::Write;

use serde::Serialize;

use crate::bounds::optimal_rv;
use crate::error::{invalid, Result};
use crate::geometry::{sample_uniform_ball, sq_dist, PointCloud};
use crate::measures::{f_beta, w2_discontinuity, w2_many_to_one, EmbeddingPair};
use crate::synth::{calibrate_r_u, random_projection};

/// Retrieval radii to sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RvGrid {
    /// `points` log-spaced multiples of `rv*` spanning `[lo, hi]`.
    RelativeToRvStar { points: usize, lo: f64, hi: f64 },
    Explicit(Vec<f64>),
}

impl Default for RvGrid {
    fn default() -> Self {
        RvGrid::RelativeToRvStar { points: 40, lo: 0.05, hi: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    /// Mean neighbour count that fixes `r_U`.
    pub k_target: usize,
    pub m_list: Vec<usize>,
    pub rv_grid: RvGrid,
    pub beta: f64,
    /// Neighbourhood size for the Wasserstein diagnostics; `None` skips them.
    pub k: Option<usize>,
    /// Number of queries (the first indices) the Wasserstein diagnostics use.
    pub w2_queries: usize,
}

/// Neighbour target scaled from 500 neighbours at 10⁴ points.
pub fn desk_k_target(count: usize) -> usize {
    ((500 * count) as f64 / 10_000.0).round().max(1.0) as usize
}

impl SimulationConfig {
    /// The uniform-ball protocol at a given size: `m = 1..n−1`, β = 0.3.
    pub fn uniform_ball(n: usize, count: usize, seed: u64) -> Self {
        Self {
            n,
            count,
            seed,
            k_target: desk_k_target(count),
            m_list: (1..n).collect(),
            rv_grid: RvGrid::default(),
            beta: 0.3,
            k: None,
            w2_queries: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if self.m_list.is_empty() || self.m_list.iter().any(|&m| m == 0 || m >= self.n) {
            return Err(invalid(format!("every m must lie in 1..{}", self.n)));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta must be positive"));
        }
        match &self.rv_grid {
            RvGrid::RelativeToRvStar { points, lo, hi } => {
                if *points < 2 || !(*lo > 0.0) || !(hi > lo) {
                    return Err(invalid("relative grid needs points >= 2 and 0 < lo < hi"));
                }
            }
            RvGrid::Explicit(g) => {
                if g.is_empty() || !(g[0] > 0.0) || g.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("explicit r_V grid must be positive and strictly increasing"));
                }
            }
        }
        Ok(())
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub m: usize,
    pub r_v: f64,
    /// Mean over queries that retrieve at least one point.
    pub precision: Option<f64>,
    /// Mean over queries with at least one relevant point.
    pub recall: Option<f64>,
    pub f_beta: Option<f64>,
    /// Queries that retrieve at least one point at this radius.
    pub retrieving_queries: usize,
    pub is_rv_star: bool,
    pub is_fbeta_argmax: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffSummary {
    pub m: usize,
    pub rv_star: f64,
    pub f_at_rv_star: f64,
    pub argmax_r_v: f64,
    pub f_best: f64,
    /// Mean Wasserstein diagnostics over the sampled queries, when requested.
    pub w2_many_to_one: Option<f64>,
    pub w2_discontinuity: Option<f64>,
}

impl TradeoffSummary {
    /// `1 − f(rv*)/f_best`: the relative f-β shortfall of `rv*`.
    pub fn shortfall(&self) -> f64 {
        if self.f_best > 0.0 {
            1.0 - self.f_at_rv_star / self.f_best
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTable {
    pub r_u: f64,
    pub beta: f64,
    pub rows: Vec<TradeoffRow>,
    pub summaries: Vec<TradeoffSummary>,
}

pub(crate) const TRADEOFF_COLUMNS: [&str; 7] = ["m", "r_V", "precision", "recall", "f_beta", "is_rv_star", "is_fbeta_argmax"];

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn write_rows<W: Write>(wtr: &mut csv::Writer<W>, rows: &[TradeoffRow]) -> Result<()> {
    for r in rows {
        wtr.write_record([
            r.m.to_string(),
            format!("{:?}", r.r_v),
            opt(r.precision),
            opt(r.recall),
            opt(r.f_beta),
            (r.is_rv_star as u8).to_string(),
            (r.is_fbeta_argmax as u8).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

impl SimulationTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(TRADEOFF_COLUMNS)?;
        write_rows(&mut wtr, &self.rows)
    }

    pub fn rows_for(&self, m: usize) -> impl Iterator<Item = &TradeoffRow> {
        self.rows.iter().filter(move |r| r.m == m)
    }
}

/// Relevant neighbours (strictly within `r_u` in the input) of every point.
fn relevant_lists(x: &PointCloud, r_u: f64) -> Vec<Vec<u32>> {
    let n = x.count();
    let r2 = r_u * r_u;
    let mut lists = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..i {
            if sq_dist(x.point(i), x.point(j)) < r2 {
                lists[i].push(j as u32);
                lists[j].push(i as u32);
            }
        }
    }
    lists
}

/// Mean precision and recall at every grid radius, in one pass over pairs per query.
fn sweep(y: &PointCloud, relevant: &[Vec<u32>], grid: &[f64]) -> Vec<(Option<f64>, Option<f64>, usize)> {
    let n = y.count();
    let g = grid.len();
    let grid2: Vec<f64> = grid.iter().map(|r| r * r).collect();
    // bucket p collects distances with exactly p grid radii at or below them;
    // such a point is retrieved at radius index q iff q >= p.
    let bucket = |d2: f64| grid2.partition_point(|&r2| r2 <= d2);
    let mut p_sum = vec![0.0; g];
    let mut p_defined = vec![0usize; g];
    let mut r_sum = vec![0.0; g];
    let mut r_defined = 0usize;
    let mut all = vec![0usize; g + 1];
    let mut rel = vec![0usize; g + 1];
    for i in 0..n {
        all.iter_mut().for_each(|c| *c = 0);
        rel.iter_mut().for_each(|c| *c = 0);
        let yi = y.point(i);
        for j in (0..n).filter(|&j| j != i) {
            all[bucket(sq_dist(y.point(j), yi))] += 1;
        }
        for &j in &relevant[i] {
            rel[bucket(sq_dist(y.point(j as usize), yi))] += 1;
        }
        let relevant_count = relevant[i].len();
        if relevant_count > 0 {
            r_defined += 1;
        }
        let (mut ret, mut both) = (0usize, 0usize);
        for q in 0..g {
            ret += all[q];
            both += rel[q];
            if ret > 0 {
                p_sum[q] += both as f64 / ret as f64;
                p_defined[q] += 1;
            }
            if relevant_count > 0 {
                r_sum[q] += both as f64 / relevant_count as f64;
            }
        }
    }
    (0..g)
        .map(|q| {
            let p = (p_defined[q] > 0).then(|| p_sum[q] / p_defined[q] as f64);
            let r = (r_defined > 0).then(|| r_sum[q] / r_defined as f64);
            (p, r, p_defined[q])
        })
        .collect()
}

fn seed_for_m(seed: u64, m: usize) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(m as u64 + 1))
}

fn run(config: &SimulationConfig, mut sink: Option<&mut csv::Writer<Box<dyn Write + '_>>>) -> Result<SimulationTable> {
    config.validate()?;
    let x = sample_uniform_ball(config.n, 1.0, config.count, config.seed)?;
    let r_u = calibrate_r_u(&x, config.k_target)?;
    let relevant = relevant_lists(&x, r_u);
    let mut table = SimulationTable { r_u, beta: config.beta, rows: Vec::new(), summaries: Vec::new() };
    for &m in &config.m_list {
        let map = random_projection(config.n, m, seed_for_m(config.seed, m))?;
        let y = map.apply(&x)?;
        let rv_star = optimal_rv(config.n, m, 1.0, r_u, map.lipschitz())?;
        let mut grid = match &config.rv_grid {
            RvGrid::RelativeToRvStar { points, lo, hi } => log_grid(lo * rv_star, hi * rv_star, *points),
            RvGrid::Explicit(g) => g.clone(),
        };
        if !grid.contains(&rv_star) {
            let at = grid.partition_point(|&r| r < rv_star);
            grid.insert(at, rv_star);
        }
        let stats = sweep(&y, &relevant, &grid);
        let mut rows: Vec<TradeoffRow> = grid
            .iter()
            .zip(&stats)
            .map(|(&r_v, &(p, r, retrieving))| TradeoffRow {
                m,
                r_v,
                precision: p,
                recall: r,
                f_beta: p.zip(r).map(|(p, r)| f_beta(p, r, config.beta)),
                retrieving_queries: retrieving,
                is_rv_star: r_v == rv_star,
                is_fbeta_argmax: false,
            })
            .collect();
        let best = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.f_beta.map(|f| (i, f)))
            .fold(None, |acc: Option<(usize, f64)>, (i, f)| match acc {
                Some((_, bf)) if bf >= f => acc,
                _ => Some((i, f)),
            });
        if let Some((i, _)) = best {
            rows[i].is_fbeta_argmax = true;
        }
        let star = rows.iter().find(|r| r.is_rv_star).expect("rv* is on the grid");
        let (w2_m2o, w2_disc) = match config.k {
            Some(k) => w2_means(&x, &y, k, config.w2_queries)?,
            None => (None, None),
        };
        table.summaries.push(TradeoffSummary {
            m,
            rv_star,
            f_at_rv_star: star.f_beta.unwrap_or(0.0),
            argmax_r_v: best.map(|(i, _)| rows[i].r_v).unwrap_or(f64::NAN),
            f_best: best.map(|(_, f)| f).unwrap_or(0.0),
            w2_many_to_one: w2_m2o,
            w2_discontinuity: w2_disc,
        });
        if let Some(w) = sink.as_deref_mut() {
            write_rows(w, &rows)?;
        }
        table.rows.extend(rows);
    }
    Ok(table)
}

fn w2_means(x: &PointCloud, y: &PointCloud, k: usize, queries: usize) -> Result<(Option<f64>, Option<f64>)> {
    let q = queries.min(x.count());
    let pair = EmbeddingPair::new(x.clone(), y.clone())?;
    let mut m2o = Vec::with_capacity(q);
    let mut disc = Vec::with_capacity(q);
    for i in 0..q {
        m2o.push(w2_many_to_one(&pair, i, k)?);
        disc.push(w2_discontinuity(&pair, i, k)?);
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok((mean(&m2o), mean(&disc)))
}

/// Runs the sweep. With a writer, each `m`'s rows are written and flushed as
/// soon as they are complete, so an error leaves the finished rows on disk.
pub fn simulate_tradeoff(config: &SimulationConfig, out: Option<Box<dyn Write + '_>>) -> Result<SimulationTable> {
    match out {
        Some(w) => {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(TRADEOFF_COLUMNS)?;
            wtr.flush()?;
            run(config, Some(&mut wtr))
        }
        None => run(config, None),
    }
}
