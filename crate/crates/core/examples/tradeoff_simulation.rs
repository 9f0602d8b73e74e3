//! Precision/recall tradeoff on a uniform 10-ball, with the CSV and plot.
//!
//! cargo run --release --example tradeoff_simulation

use std::fs::File;

use dr_audit::experiments::{emit_plot, simulate_tradeoff, PlotKind, SimulationConfig, Table};

fn main() -> dr_audit::Result<()> {
    let cfg = SimulationConfig::uniform_ball(10, 3000, 1);
    let dir = std::env::temp_dir();
    let csv = dir.join("tradeoff.csv");
    let table = simulate_tradeoff(&cfg, Some(Box::new(File::create(&csv)?)))?;
    println!("r_U = {:.4} for a mean of {} neighbours", table.r_u, cfg.k_target);
    for s in &table.summaries {
        println!(
            "m={} rv*={:.4} f(rv*)={:.3}  best f={:.3} at r_V={:.4}  shortfall {:.1}%",
            s.m,
            s.rv_star,
            s.f_at_rv_star,
            s.f_best,
            s.argmax_r_v,
            100.0 * s.shortfall()
        );
    }
    let svg = dir.join("tradeoff.svg");
    emit_plot(&Table::from(&table), PlotKind::PrCurve, &svg)?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
