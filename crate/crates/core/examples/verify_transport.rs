//! Brute-force checks of the transport results at reduced size.
//!
//! cargo run --release --example verify_transport

use dr_audit::experiments::{
    full_ring_count, verify_concentric_ball, verify_iso_wasserstein, verify_partial_ot_marginal, DiscGrid,
    VerificationResult,
};

fn show(r: &VerificationResult) {
    let details: Vec<String> = r.details.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
    println!(
        "{:<10} {} observed {:.5} expected {:.5} ({:?} tol {:.3}) in {:.2}s  {}",
        r.name,
        if r.pass { "pass" } else { "FAIL" },
        r.observed,
        r.expected,
        r.tolerance_kind,
        r.tolerance,
        r.runtime_seconds,
        details.join(" ")
    );
}

fn main() -> dr_audit::Result<()> {
    show(&verify_concentric_ball(2, 0.5, 1.0, 600, 1)?);
    show(&verify_concentric_ball(3, 0.0, 1.0, 600, 1)?);
    show(&verify_iso_wasserstein(24, 3.0, 120, 50, 1)?);
    let grid = DiscGrid::new(14)?;
    let ball = full_ring_count(&grid, 12);
    show(&verify_partial_ot_marginal(14, ball, full_ring_count(&grid, 3 * ball), 1)?);
    Ok(())
}
