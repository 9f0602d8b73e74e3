//! Closed-form bounds for a 10-dimensional unit ball across embedding dimensions.
//!
//! cargo run --example bounds_table

use dr_audit::bounds::{optimal_rv, summarize, AvgCaseParams, BoundParams};
use dr_audit::experiments::default_delta;

fn main() -> dr_audit::Result<()> {
    let (n, radius, r_u, lipschitz) = (10, 1.0, 0.6, 1.0);
    println!("{:>2} {:>10} {:>10} {:>12} {:>12} {:>8} {:>10}", "m", "D(n,m)", "rv*", "worst@2rv*", "avg@2rv*", "q2", "W2 lower");
    for m in 1..n {
        let rv = optimal_rv(n, m, radius, r_u, lipschitz)?;
        let p = BoundParams::new(n, m, radius, r_u, 2.0 * rv, lipschitz)?;
        let s = summarize(&AvgCaseParams::new(p, default_delta(radius, r_u))?)?;
        println!(
            "{m:>2} {:>10.3e} {:>10.4} {:>12.4} {:>12.4} {:>8.4} {:>10.3e}",
            s.d_factor, s.rv_star, s.precision_worst, s.precision_avg, s.q2, s.w2_lower
        );
    }
    Ok(())
}
