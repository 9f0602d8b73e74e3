//! The same transport problem through every solver.
//!
//! cargo run --example transport_solvers

use dr_audit::geometry::sample_uniform_ball;
use dr_audit::transport::{cost_matrix, sinkhorn, solve_assignment, solve_discrete_ot, solve_partial_ot, uniform_weights, w2_1d};

fn main() -> dr_audit::Result<()> {
    let a = sample_uniform_ball(2, 1.0, 80, 1)?;
    let b = sample_uniform_ball(2, 0.5, 80, 2)?;
    let cost = cost_matrix(&a, &b)?;
    let w = uniform_weights(80);

    let assign = solve_assignment(&cost)?;
    let exact = solve_discrete_ot(&w, &w, &cost)?;
    println!("assignment W2      {:.6}", (assign.total_cost / 80.0).sqrt());
    println!("exact OT W2        {:.6}", exact.wasserstein());
    for eps in [1e-1, 1e-2, 1e-3] {
        let s = sinkhorn(&w, &w, &cost, eps * cost.median(), 50_000)?;
        println!(
            "sinkhorn eps={eps:<5} {:.6}  ({} iterations, converged: {}, log domain: {})",
            s.plan.wasserstein(),
            s.iterations,
            s.converged,
            s.log_domain
        );
    }
    let half = solve_partial_ot(&w, &w, &cost, 0.5)?;
    println!("partial, mass 0.5  cost {:.6} over {} cells", half.total_cost, half.support().len());

    let xs: Vec<f64> = (0..5).map(|i| i as f64).collect();
    let ys: Vec<f64> = (0..5).map(|i| i as f64 + 0.25).collect();
    println!("1-D shift by 0.25  {:.6}", w2_1d(&xs, &ys, &uniform_weights(5), &uniform_weights(5))?);
    Ok(())
}
