//! Bound curves as an SVG plot.
//!
//! cargo run --example plotting

use dr_audit::experiments::{bound_curve, emit_plot, PlotKind};

fn main() -> dr_audit::Result<()> {
    let table = bound_curve(10, &[1, 3, 5, 7, 9], 1.0, 0.6, 1.0, 40)?;
    let path = std::env::temp_dir().join("bounds.svg");
    table.write_csv(std::io::stdout().lock())?;
    emit_plot(&table, PlotKind::BoundCurve, &path)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
