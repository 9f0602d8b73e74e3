//! Audit of PCA and a random projection on the Swiss roll.
//!
//! cargo run --release --example audit_embedding

use dr_audit::measures::{audit, AuditConfig, EmbeddingPair};
use dr_audit::synth::{calibrate_r_u, pca_projection, random_projection, swiss_roll};

fn main() -> dr_audit::Result<()> {
    let x = swiss_roll(1500, 0.05, 4)?;
    let r_u = calibrate_r_u(&x, 30)?;
    for (name, map) in [("pca", pca_projection(&x, 2)?), ("random", random_projection(3, 2, 4)?)] {
        let y = map.apply(&x)?;
        let r_v = calibrate_r_u(&y, 30)?;
        let report = audit(&EmbeddingPair::new(x.clone(), y)?, &AuditConfig { k: 30, r_u, r_v, beta: 0.3 })?;
        let a = &report.aggregates;
        let mean = |c: Option<dr_audit::measures::ColumnStats>| c.map(|s| s.mean).unwrap_or(f64::NAN);
        println!(
            "{name:>6}: precision {:.3} recall {:.3} f0.3 {:.3} | W2 many-to-one {:.3} discontinuity {:.3} ({} skipped)",
            mean(a.precision),
            mean(a.recall),
            mean(a.f_beta),
            mean(a.w2_many_to_one),
            mean(a.w2_discontinuity),
            report.skipped.len()
        );
    }
    Ok(())
}
