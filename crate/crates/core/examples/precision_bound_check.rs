//! Empirical precision under a coordinate projection against the bounds.
//!
//! cargo run --release --example precision_bound_check

use dr_audit::bounds::optimal_rv;
use dr_audit::experiments::verify_precision_bound;
use dr_audit::geometry::sample_uniform_ball;
use dr_audit::synth::calibrate_r_u;

fn main() -> dr_audit::Result<()> {
    let (n, m, count, seed) = (6, 2, 4000, 3);
    let r_u = calibrate_r_u(&sample_uniform_ball(n, 1.0, count, seed)?, 200)?;
    let rv = optimal_rv(n, m, 1.0, r_u, 1.0)?;
    for scale in [0.5, 1.0, 2.0, 4.0] {
        let r = verify_precision_bound(n, m, count, r_u, scale * rv, seed)?;
        println!(
            "r_V = {:.2} rv*: waist precision {:.4}, worst-case bound {:.4}; {:.3} of queries under the average bound (q2 = {:.3}) -> {}",
            scale,
            r.observed,
            r.expected,
            r.detail("fraction_below_average_bound").unwrap_or(f64::NAN),
            r.detail("q2").unwrap_or(f64::NAN),
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
