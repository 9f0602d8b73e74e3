//! Brute-force checks of the transport and precision results.

use std::time::Instant;

use rand::seq::{index, SliceRandom};

use super::grid::DiscGrid;
use super::{ToleranceKind, VerificationResult};
use crate::bounds::{concentric_ball_w2, precision_bound_avg, precision_bound_worst, AvgCaseParams, BoundParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::{norm, sample_uniform_ball, seeded_rng, PointCloud};
use crate::measures::{retrieval_counts, EmbeddingPair};
use crate::synth::coordinate_projection;
use crate::transport::{cost_matrix, solve_assignment, solve_discrete_ot, solve_partial_ot, uniform_weights, CostMatrix};

/// Relative W2 tolerance of the concentric-ball check.
pub const CONCENTRIC_TOLERANCE: f64 = 0.05;
/// Largest mean relative deviation of the matching from the scaling map.
pub const DISPLACEMENT_TOLERANCE: f64 = 0.15;
/// Largest symmetric difference, as a fraction of the predicted support.
pub const PARTIAL_SUPPORT_TOLERANCE: f64 = 0.10;
const CONCENTRIC_MAX_POINTS: usize = 4000;
const BRUTE_FORCE_MAX_SUBSETS: u64 = 2_000_000;

fn second_seed(seed: u64) -> u64 {
    seed ^ 0xD1B5_4A32_D192_ED03
}

/// Typical empirical W2 between two independent `N`-samples of `B^n_r`, used
/// as the tolerance when the exact answer is 0.
pub fn concentric_noise_floor(n: usize, r: f64, count: usize) -> f64 {
    let c = count as f64;
    if n <= 2 {
        r * (c.ln().max(1.0) / c).sqrt()
    } else {
        r * c.powf(-1.0 / n as f64)
    }
}

/// Matches `N` uniform samples of `B^n_{r2}` to `N` of `B^n_{r1}` and compares
/// the empirical W2 with the closed form. Also reports how far the matching is
/// from the scaling map `x -> (r1/r2) x`: `Σ‖d − d*‖ / Σ‖d*‖` over matched
/// pairs, where `d` is the matched displacement and `d*` the scaling one.
pub fn verify_concentric_ball(n: usize, r1: f64, r2: f64, count: usize, seed: u64) -> Result<VerificationResult> {
    let start = Instant::now();
    let expected = concentric_ball_w2(n, r1, r2)?;
    if !(r2 > 0.0) || count == 0 {
        return Err(invalid("need r2 > 0 and a positive sample size"));
    }
    if count > CONCENTRIC_MAX_POINTS {
        return Err(Error::Capacity { size: count, limit: CONCENTRIC_MAX_POINTS, context: "concentric-ball matching".into() });
    }
    let inner = if r1 > 0.0 {
        sample_uniform_ball(n, r1, count, seed)?
    } else {
        PointCloud::from_flat(n, vec![0.0; n * count])?
    };
    let outer = sample_uniform_ball(n, r2, count, second_seed(seed))?;
    let cost = cost_matrix(&outer, &inner)?;
    let matching = solve_assignment(&cost)?;
    let observed = (matching.total_cost / count as f64).max(0.0).sqrt();

    let scale = r1 / r2;
    let (mut dev, mut ideal) = (0.0, 0.0);
    for (i, &j) in matching.permutation.iter().enumerate() {
        let (b, a) = (outer.point(i), inner.point(j));
        dev += a.iter().zip(b).map(|(a, b)| (a - scale * b).powi(2)).sum::<f64>().sqrt();
        ideal += (1.0 - scale) * norm(b);
    }
    let displacement = (ideal > 0.0).then(|| dev / ideal);

    let (tolerance, kind) = if expected > 0.0 {
        (CONCENTRIC_TOLERANCE, ToleranceKind::Relative)
    } else {
        (concentric_noise_floor(n, r2, count), ToleranceKind::Absolute)
    };
    let w2_ok = VerificationResult::within(observed, expected, tolerance, kind);
    let field_ok = displacement.is_none_or(|d| d <= DISPLACEMENT_TOLERANCE);
    let mut details = vec![("count".into(), count as f64)];
    if let Some(d) = displacement {
        details.push(("displacement_error".into(), d));
    }
    Ok(VerificationResult {
        name: "concentric".into(),
        pass: w2_ok && field_ok,
        observed,
        expected,
        tolerance,
        tolerance_kind: kind,
        runtime_seconds: start.elapsed().as_secs_f64(),
        details,
    })
}

fn cell_w2(grid: &DiscGrid, cells: &[usize], target: &[usize]) -> Result<f64> {
    let c = grid.centres();
    let cost = cost_matrix(&c.select(cells), &c.select(target))?;
    Ok(solve_discrete_ot(&uniform_weights(cells.len()), &uniform_weights(target.len()), &cost)?.wasserstein())
}

/// On the disc cells of a `grid_side × grid_side` grid, compares the W2 from
/// the `subset_cells` innermost cells to the inner ball against the W2 from
/// `trials` random subsets of the same size. Passes iff no random subset is
/// strictly closer.
pub fn verify_iso_wasserstein(
    grid_side: usize,
    inner_radius_cells: f64,
    subset_cells: usize,
    trials: usize,
    seed: u64,
) -> Result<VerificationResult> {
    let start = Instant::now();
    let grid = DiscGrid::new(grid_side)?;
    let total = grid.len();
    if subset_cells == 0 || subset_cells > total {
        return Err(invalid(format!("subset size must lie in 1..={total}, got {subset_cells}")));
    }
    let inner = grid.count_within(inner_radius_cells);
    if inner == 0 {
        return Err(invalid(format!("no cell centre lies within {inner_radius_cells} cells of the origin")));
    }
    let target: Vec<usize> = (0..inner).collect();
    let concentric: Vec<usize> = (0..subset_cells).collect();
    let w_conc = cell_w2(&grid, &concentric, &target)?;
    let mut rng = seeded_rng(seed);
    let mut wins = 0usize;
    let mut best_random = f64::INFINITY;
    for _ in 0..trials {
        let mut cells = index::sample(&mut rng, total, subset_cells).into_vec();
        cells.sort_unstable();
        let w = cell_w2(&grid, &cells, &target)?;
        best_random = best_random.min(w);
        if w_conc <= w * (1.0 + 1e-9) + 1e-12 {
            wins += 1;
        }
    }
    Ok(VerificationResult {
        name: "iso".into(),
        pass: wins == trials,
        observed: wins as f64,
        expected: trials as f64,
        tolerance: 0.0,
        tolerance_kind: ToleranceKind::Absolute,
        runtime_seconds: start.elapsed().as_secs_f64(),
        details: vec![
            ("concentric_w2".into(), w_conc),
            ("best_random_w2".into(), best_random),
            ("inner_cells".into(), inner as f64),
            ("subset_cells".into(), subset_cells as f64),
        ],
    })
}

fn check_partial_sizes(grid: &DiscGrid, ball_cells: usize, support_cells: usize) -> Result<()> {
    if ball_cells == 0 || ball_cells > support_cells || support_cells > grid.len() {
        return Err(invalid(format!(
            "need 1 <= ball_cells <= support_cells <= {}, got {ball_cells} and {support_cells}",
            grid.len()
        )));
    }
    Ok(())
}

/// Solves the partial problem on the disc cells: every cell may send at most
/// `1/support_cells`, the `ball_cells` innermost cells each receive exactly
/// `1/ball_cells`. Cells are handed to the solver in a seed-dependent order.
/// Returns the cells (radial indices, sorted) that send mass, and the cost.
pub fn partial_ot_active_support(grid: &DiscGrid, ball_cells: usize, support_cells: usize, seed: u64) -> Result<(Vec<usize>, f64)> {
    check_partial_sizes(grid, ball_cells, support_cells)?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(&mut seeded_rng(seed));
    let c = grid.centres();
    let target: Vec<usize> = (0..ball_cells).collect();
    let cost = cost_matrix(&c.select(&order), &c.select(&target))?;
    let f = vec![1.0 / support_cells as f64; order.len()];
    let g = uniform_weights(ball_cells);
    let mass: f64 = g.iter().sum::<f64>().min(f.iter().sum());
    let plan = solve_partial_ot(&f, &g, &cost, mass)?;
    let floor = 1e-7 / support_cells as f64;
    let mut active: Vec<usize> =
        plan.row_sums().iter().zip(&order).filter(|(s, _)| **s > floor).map(|(_, &cell)| cell).collect();
    active.sort_unstable();
    Ok((active, plan.total_cost))
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k.min(n - k)).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Exhaustive minimum over all `support_cells`-subsets of the balanced cost
/// from uniform-on-subset to uniform-on-ball. Returns the best subset (first
/// in lexicographic order among exact ties) and its cost.
pub fn brute_force_partial_support(grid: &DiscGrid, ball_cells: usize, support_cells: usize) -> Result<(Vec<usize>, f64)> {
    check_partial_sizes(grid, ball_cells, support_cells)?;
    let (n, k) = (grid.len(), support_cells);
    let subsets = binomial(n, k);
    if subsets > BRUTE_FORCE_MAX_SUBSETS {
        return Err(Error::Capacity {
            size: subsets.min(usize::MAX as u64) as usize,
            limit: BRUTE_FORCE_MAX_SUBSETS as usize,
            context: "support subsets to enumerate".into(),
        });
    }
    let c = grid.centres();
    let target: Vec<usize> = (0..ball_cells).collect();
    let full = cost_matrix(c, &c.select(&target))?;
    let (w, g) = (uniform_weights(k), uniform_weights(ball_cells));
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let cost = CostMatrix::from_fn(k, ball_cells, |a, b| full.get(subset[a], b))?;
        let value = solve_discrete_ot(&w, &g, &cost)?.total_cost;
        if best.as_ref().is_none_or(|(_, b)| value < *b - 1e-12) {
            best = Some((subset.clone(), value));
        }
        // Next combination in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&i| subset[i] < n - k + i) else { break };
        subset[pos] += 1;
        for i in pos + 1..k {
            subset[i] = subset[i - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Checks that the partial-transport source support is the concentric set of
/// `support_cells` innermost cells, up to [`PARTIAL_SUPPORT_TOLERANCE`].
pub fn verify_partial_ot_marginal(grid_side: usize, ball_cells: usize, support_cells: usize, seed: u64) -> Result<VerificationResult> {
    let start = Instant::now();
    let grid = DiscGrid::new(grid_side)?;
    let (active, cost) = partial_ot_active_support(&grid, ball_cells, support_cells, seed)?;
    let predicted = support_cells;
    let inside = active.iter().filter(|&&c| c < predicted).count();
    let symdiff = (active.len() - inside) + (predicted - inside);
    let observed = symdiff as f64 / predicted as f64;
    Ok(VerificationResult {
        name: "partial".into(),
        pass: observed <= PARTIAL_SUPPORT_TOLERANCE,
        observed,
        expected: 0.0,
        tolerance: PARTIAL_SUPPORT_TOLERANCE,
        tolerance_kind: ToleranceKind::AtMost,
        runtime_seconds: start.elapsed().as_secs_f64(),
        details: vec![
            ("active_cells".into(), active.len() as f64),
            ("symmetric_difference".into(), symdiff as f64),
            ("cost".into(), cost),
            ("grid_cells".into(), grid.len() as f64),
        ],
    })
}

/// `δ` with `δ² = (R² − r_U²)/2`, the midpoint of the admissible range.
pub fn default_delta(radius: f64, r_u: f64) -> f64 {
    ((radius * radius - r_u * r_u) / 2.0).sqrt()
}

/// Samples the unit `n`-ball, projects onto the first `m` coordinates, and
/// checks (a) the precision at the query whose image is nearest the origin
/// (where this map's fibres are largest) against the worst-case bound plus a
/// 3σ binomial margin, and (b) that the share of queries whose precision is
/// at most the average-case bound is at least `q₂ − 3σ`.
pub fn verify_precision_bound(n: usize, m: usize, count: usize, r_u: f64, r_v: f64, seed: u64) -> Result<VerificationResult> {
    let start = Instant::now();
    let base = BoundParams::new(n, m, 1.0, r_u, r_v, 1.0)?;
    let avg = precision_bound_avg(&AvgCaseParams::new(base, default_delta(1.0, r_u))?)?;
    let worst = precision_bound_worst(&base);
    let x = sample_uniform_ball(n, 1.0, count, seed)?;
    let y = coordinate_projection(n, m)?.apply(&x)?;
    let waist = (0..count)
        .min_by(|&a, &b| norm(y.point(a)).total_cmp(&norm(y.point(b))).then(a.cmp(&b)))
        .ok_or_else(|| invalid("empty sample"))?;
    let pair = EmbeddingPair::new(x, y)?;

    let counts = retrieval_counts(&pair, waist, r_u, r_v)?;
    let capped = worst.min(1.0);
    let waist_precision = counts.precision();
    let margin = if counts.retrieved > 0 { 3.0 * (capped * (1.0 - capped) / counts.retrieved as f64).sqrt() } else { 0.0 };
    let worst_ok = waist_precision.is_none_or(|p| p <= worst + margin);

    let (mut below, mut defined) = (0usize, 0usize);
    for i in 0..count {
        if let Some(p) = retrieval_counts(&pair, i, r_u, r_v)?.precision() {
            defined += 1;
            below += (p <= avg.bound) as usize;
        }
    }
    let fraction = if defined > 0 { below as f64 / defined as f64 } else { f64::NAN };
    let sigma = if defined > 0 { (avg.q * (1.0 - avg.q) / defined as f64).sqrt() } else { 0.0 };
    let avg_ok = defined == 0 || fraction >= avg.q - 3.0 * sigma;

    Ok(VerificationResult {
        name: "bound".into(),
        pass: worst_ok && avg_ok,
        observed: waist_precision.unwrap_or(f64::NAN),
        expected: worst,
        tolerance: margin,
        tolerance_kind: ToleranceKind::AtMost,
        runtime_seconds: start.elapsed().as_secs_f64(),
        details: vec![
            ("waist_retrieved".into(), counts.retrieved as f64),
            ("worst_case_ok".into(), worst_ok as u8 as f64),
            ("average_bound".into(), avg.bound),
            ("fraction_below_average_bound".into(), fraction),
            ("q2".into(), avg.q),
            ("q2_sigma".into(), sigma),
            ("average_case_ok".into(), avg_ok as u8 as f64),
        ],
    })
}
