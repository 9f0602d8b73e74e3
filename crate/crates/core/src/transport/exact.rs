//! Exact transport by successive shortest augmenting paths.
//!
//! The transportation problem is a min-cost flow on the bipartite network
//! `source -> rows -> cols -> sink`. Each round runs Dijkstra on reduced costs
//! `c_ij + π_i − π_j` from every row with spare supply, then pushes as much
//! mass as the path allows. The flow after each round is optimal among all
//! flows of its value, so stopping at mass `M` solves the partial problem.

use super::{check_balanced, check_weights, CostMatrix, TransportPlan, PLAN_TOL};
use crate::error::{invalid, Error, Result};

/// Largest support (per side) accepted by [`solve_partial_ot`].
pub const PARTIAL_OT_MAX_ATOMS: usize = 400;

/// Optimal balanced plan between weights `mu` (rows) and `nu` (columns).
pub fn solve_discrete_ot(mu: &[f64], nu: &[f64], cost: &CostMatrix) -> Result<TransportPlan> {
    let total = check_balanced(mu, nu)?;
    check_shape(mu, nu, cost)?;
    let flow = FlowSolver::new(mu, nu, cost).run(total)?;
    let plan = TransportPlan::from_parts(cost, flow.mass, mu.to_vec(), nu.to_vec(), None);
    plan.check(cost, PLAN_TOL)?;
    flow.duality.check(plan.total_cost)?;
    Ok(plan)
}

/// Optimal partial plan moving exactly `mass` with row sums `<= f` and column
/// sums `<= g`.
pub fn solve_partial_ot(f: &[f64], g: &[f64], cost: &CostMatrix, mass: f64) -> Result<TransportPlan> {
    let sf = check_weights("source", f)?;
    let sg = check_weights("target", g)?;
    check_shape(f, g, cost)?;
    let biggest = f.len().max(g.len());
    if biggest > PARTIAL_OT_MAX_ATOMS {
        return Err(Error::Capacity {
            size: biggest,
            limit: PARTIAL_OT_MAX_ATOMS,
            context: "partial transport support".into(),
        });
    }
    let cap = sf.min(sg);
    if !(mass >= 0.0) || mass > cap + PLAN_TOL {
        return Err(invalid(format!("transported mass must lie in [0, {cap}], got {mass}")));
    }
    let mass = mass.min(cap);
    let flow = FlowSolver::new(f, g, cost).run(mass)?;
    let plan = TransportPlan::from_parts(cost, flow.mass, f.to_vec(), g.to_vec(), Some(mass));
    plan.check(cost, PLAN_TOL)?;
    Ok(plan)
}

fn check_shape(mu: &[f64], nu: &[f64], cost: &CostMatrix) -> Result<()> {
    if cost.rows() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: cost.rows() });
    }
    if cost.cols() != nu.len() {
        return Err(Error::DimensionMismatch { expected: nu.len(), got: cost.cols() });
    }
    Ok(())
}

struct Duality {
    primal_from_dual: f64,
}

impl Duality {
    /// Relative gap between the plan cost and the dual objective built from the
    /// final potentials.
    fn check(&self, primal: f64) -> Result<()> {
        let gap = (primal - self.primal_from_dual).abs() / primal.abs().max(1.0);
        if gap > PLAN_TOL {
            return Err(Error::NumericFailure { message: "duality gap above tolerance".into(), achieved: gap });
        }
        Ok(())
    }
}

struct FlowResult {
    mass: Vec<f64>,
    duality: Duality,
}

struct FlowSolver<'a> {
    cost: &'a CostMatrix,
    supply: Vec<f64>,
    demand: Vec<f64>,
    caps_row: &'a [f64],
    caps_col: &'a [f64],
    n: usize,
    m: usize,
    mass: Vec<f64>,
    // Rows with positive flow into each column, for the backward residual arcs.
    col_support: Vec<Vec<usize>>,
    pot_row: Vec<f64>,
    pot_col: Vec<f64>,
    pot_sink: f64,
}

#[derive(Clone, Copy)]
enum Node {
    Row(usize),
    Col(usize),
}

impl<'a> FlowSolver<'a> {
    fn new(mu: &'a [f64], nu: &'a [f64], cost: &'a CostMatrix) -> Self {
        let (n, m) = (mu.len(), nu.len());
        Self {
            cost,
            supply: mu.to_vec(),
            demand: nu.to_vec(),
            caps_row: mu,
            caps_col: nu,
            n,
            m,
            mass: vec![0.0; n * m],
            col_support: vec![Vec::new(); m],
            pot_row: vec![0.0; n],
            pot_col: vec![0.0; m],
            pot_sink: 0.0,
        }
    }

    fn run(mut self, target: f64) -> Result<FlowResult> {
        let scale = self.caps_row.iter().sum::<f64>().max(self.caps_col.iter().sum::<f64>()).max(f64::MIN_POSITIVE);
        let negligible = 1e-15 * scale;
        let mut shipped = 0.0;
        let max_rounds = 64 * (self.n + self.m) + 1024;
        let mut rounds = 0;
        while target - shipped > negligible {
            rounds += 1;
            if rounds > max_rounds {
                return Err(Error::NumericFailure {
                    message: format!("no convergence after {max_rounds} augmentations"),
                    achieved: target - shipped,
                });
            }
            match self.augment(target - shipped, negligible) {
                Some(pushed) => shipped += pushed,
                None => break,
            }
        }
        let duality = self.dual_objective();
        Ok(FlowResult { mass: self.mass, duality })
    }

    /// One Dijkstra round plus augmentation. Returns the pushed amount, or
    /// `None` when no row with supply can reach a column with demand.
    fn augment(&mut self, limit: f64, negligible: f64) -> Option<f64> {
        let (n, m) = (self.n, self.m);
        let inf = f64::INFINITY;
        let mut dist_row = vec![inf; n];
        let mut dist_col = vec![inf; m];
        let mut done_row = vec![false; n];
        let mut done_col = vec![false; m];
        let mut parent_col = vec![usize::MAX; m]; // row preceding a column
        let mut parent_row = vec![usize::MAX; n]; // column preceding a row (backward arc)
        let mut sink_dist = inf;
        let mut sink_parent = usize::MAX;
        for i in 0..n {
            if self.supply[i] > negligible {
                dist_row[i] = 0.0;
            }
        }
        loop {
            // Dense selection of the closest unsettled node.
            let mut best = inf;
            let mut pick = None;
            for i in 0..n {
                if !done_row[i] && dist_row[i] < best {
                    best = dist_row[i];
                    pick = Some(Node::Row(i));
                }
            }
            for j in 0..m {
                if !done_col[j] && dist_col[j] < best {
                    best = dist_col[j];
                    pick = Some(Node::Col(j));
                }
            }
            if sink_dist <= best {
                break;
            }
            match pick? {
                Node::Row(i) => {
                    done_row[i] = true;
                    let row = self.cost.row(i);
                    let base = best + self.pot_row[i];
                    for j in 0..m {
                        if done_col[j] {
                            continue;
                        }
                        let d = base + row[j] - self.pot_col[j];
                        if d < dist_col[j] {
                            dist_col[j] = d;
                            parent_col[j] = i;
                        }
                    }
                }
                Node::Col(j) => {
                    done_col[j] = true;
                    if self.demand[j] > negligible {
                        let d = best + self.pot_col[j] - self.pot_sink;
                        if d < sink_dist {
                            sink_dist = d;
                            sink_parent = j;
                        }
                    }
                    for &i in &self.col_support[j] {
                        if done_row[i] {
                            continue;
                        }
                        let d = best - self.cost.get(i, j) + self.pot_col[j] - self.pot_row[i];
                        if d < dist_row[i] {
                            dist_row[i] = d;
                            parent_row[i] = j;
                        }
                    }
                }
            }
        }
        if !sink_dist.is_finite() {
            return None;
        }
        for i in 0..n {
            self.pot_row[i] += dist_row[i].min(sink_dist);
        }
        for j in 0..m {
            self.pot_col[j] += dist_col[j].min(sink_dist);
        }
        self.pot_sink += sink_dist;

        // Walk back from the sink: col <- row (forward arc) <- col (backward arc) ...
        let mut path = Vec::new();
        let mut j = sink_parent;
        let mut amount = self.demand[j].min(limit);
        let start_row = loop {
            let i = parent_col[j];
            path.push((i, j, true));
            let back = parent_row[i];
            if back == usize::MAX {
                break i;
            }
            path.push((i, back, false));
            amount = amount.min(self.mass[i * m + back]);
            j = back;
        };
        amount = amount.min(self.supply[start_row]);
        for &(i, j, forward) in &path {
            let k = i * m + j;
            if forward {
                if self.mass[k] == 0.0 {
                    self.col_support[j].push(i);
                }
                self.mass[k] += amount;
            } else {
                self.mass[k] -= amount;
                if self.mass[k] <= negligible * 1e-3 {
                    self.mass[k] = 0.0;
                    let s = &mut self.col_support[j];
                    if let Some(p) = s.iter().position(|&r| r == i) {
                        s.swap_remove(p);
                    }
                }
            }
        }
        self.supply[start_row] -= amount;
        self.demand[sink_parent] -= amount;
        Some(amount)
    }

    /// Objective of the dual solution `u_i = −π_i`, `v_j = π_j`, which is
    /// feasible because every reduced cost is nonnegative.
    fn dual_objective(&self) -> Duality {
        let rows: f64 = self.caps_row.iter().zip(&self.pot_row).map(|(a, p)| a * p).sum();
        let cols: f64 = self.caps_col.iter().zip(&self.pot_col).map(|(b, p)| b * p).sum();
        Duality { primal_from_dual: cols - rows }
    }
}
