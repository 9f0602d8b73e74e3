//! Entropic-regularized transport.
//!
//! The plain scaling iteration `u = a / Kv`, `v = b / Kᵀu` on `K = exp(−C/ε)`
//! is tried first. When the kernel underflows (small ε relative to the costs)
//! the solve restarts in the log domain on dual potentials, annealing ε down
//! from the cost scale so the small-ε iterations start warm.

use super::{check_balanced, CostMatrix, TransportPlan};
use crate::error::{invalid, Error, Result};

/// Target L1 marginal violation.
pub const SINKHORN_MARGINAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SinkhornOutcome {
    pub plan: TransportPlan,
    pub iterations: usize,
    /// L1 violation of the column marginal after the final row update.
    pub marginal_error: f64,
    pub converged: bool,
    pub log_domain: bool,
}

pub fn sinkhorn(mu: &[f64], nu: &[f64], cost: &CostMatrix, epsilon: f64, max_iter: usize) -> Result<SinkhornOutcome> {
    check_balanced(mu, nu)?;
    if cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len() * nu.len(), got: cost.rows() * cost.cols() });
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    match scaling(mu, nu, cost, epsilon, max_iter) {
        Some(out) => Ok(out),
        None => log_domain(mu, nu, cost, epsilon, max_iter),
    }
}

fn column_error(mass: &[f64], cols: usize, nu: &[f64]) -> f64 {
    let mut sums = vec![0.0; cols];
    for r in mass.chunks_exact(cols) {
        for (s, x) in sums.iter_mut().zip(r) {
            *s += x;
        }
    }
    sums.iter().zip(nu).map(|(s, b)| (s - b).abs()).sum()
}

/// Plain-domain iteration; `None` signals underflow or overflow.
fn scaling(mu: &[f64], nu: &[f64], cost: &CostMatrix, eps: f64, max_iter: usize) -> Option<SinkhornOutcome> {
    let (n, m) = (cost.rows(), cost.cols());
    let kernel: Vec<f64> = cost.entries().iter().map(|c| (-c / eps).exp()).collect();
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; m];
    let mut iterations = 0;
    let mut err = f64::INFINITY;
    let mut plan = vec![0.0; n * m];
    while iterations < max_iter {
        iterations += 1;
        for j in 0..m {
            let s: f64 = (0..n).map(|i| kernel[i * m + j] * u[i]).sum();
            v[j] = if nu[j] == 0.0 { 0.0 } else { nu[j] / s };
        }
        for i in 0..n {
            let row = &kernel[i * m..(i + 1) * m];
            let s: f64 = row.iter().zip(&v).map(|(k, x)| k * x).sum();
            u[i] = if mu[i] == 0.0 { 0.0 } else { mu[i] / s };
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return None;
        }
        if iterations % 10 == 0 || iterations == max_iter {
            fill_plan(&mut plan, &kernel, &u, &v, m);
            err = column_error(&plan, m, nu);
            if err <= SINKHORN_MARGINAL_TOL {
                break;
            }
        }
    }
    fill_plan(&mut plan, &kernel, &u, &v, m);
    err = err.min(column_error(&plan, m, nu));
    Some(SinkhornOutcome {
        plan: TransportPlan::from_parts(cost, plan, mu.to_vec(), nu.to_vec(), None),
        iterations,
        marginal_error: err,
        converged: err <= SINKHORN_MARGINAL_TOL,
        log_domain: false,
    })
}

fn fill_plan(plan: &mut [f64], kernel: &[f64], u: &[f64], v: &[f64], m: usize) {
    for (i, (p, k)) in plan.chunks_exact_mut(m).zip(kernel.chunks_exact(m)).enumerate() {
        for j in 0..m {
            p[j] = u[i] * k[j] * v[j];
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn log_domain(mu: &[f64], nu: &[f64], cost: &CostMatrix, eps: f64, max_iter: usize) -> Result<SinkhornOutcome> {
    let (n, m) = (cost.rows(), cost.cols());
    let ln_mu: Vec<f64> = mu.iter().map(|x| x.ln()).collect();
    let ln_nu: Vec<f64> = nu.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut stage_eps = cost.max().max(eps);
    let mut iterations = 0;
    let mut err = f64::INFINITY;
    let mut plan = vec![0.0; n * m];
    let fill = |plan: &mut [f64], f: &[f64], g: &[f64], e: f64| {
        for i in 0..n {
            let row = cost.row(i);
            for j in 0..m {
                plan[i * m + j] = ((f[i] + g[j] - row[j]) / e).exp();
            }
        }
    };
    loop {
        let at_target = stage_eps <= eps;
        let e = if at_target { eps } else { stage_eps };
        // A handful of sweeps per annealing stage, then iterate to convergence at ε.
        let sweeps = if at_target { max_iter.saturating_sub(iterations) } else { 10 };
        for s in 0..sweeps {
            iterations += 1;
            for j in 0..m {
                let lse = log_sum_exp((0..n).map(|i| (f[i] - cost.get(i, j)) / e));
                g[j] = if nu[j] == 0.0 { f64::NEG_INFINITY } else { e * (ln_nu[j] - lse) };
            }
            for i in 0..n {
                let row = cost.row(i);
                let lse = log_sum_exp((0..m).map(|j| (g[j] - row[j]) / e));
                f[i] = if mu[i] == 0.0 { f64::NEG_INFINITY } else { e * (ln_mu[i] - lse) };
            }
            if f.iter().chain(&g).any(|x| x.is_nan() || *x == f64::INFINITY) {
                return Err(Error::NumericFailure { message: "log-domain Sinkhorn diverged".into(), achieved: f64::NAN });
            }
            if at_target && (s % 10 == 9 || iterations >= max_iter) {
                fill(&mut plan, &f, &g, e);
                err = column_error(&plan, m, nu);
                if err <= SINKHORN_MARGINAL_TOL {
                    break;
                }
            }
            if iterations >= max_iter {
                break;
            }
        }
        if at_target || iterations >= max_iter {
            break;
        }
        stage_eps *= 0.5;
    }
    fill(&mut plan, &f, &g, eps);
    err = err.min(column_error(&plan, m, nu));
    Ok(SinkhornOutcome {
        plan: TransportPlan::from_parts(cost, plan, mu.to_vec(), nu.to_vec(), None),
        iterations,
        marginal_error: err,
        converged: err <= SINKHORN_MARGINAL_TOL,
        log_domain: true,
    })
}
