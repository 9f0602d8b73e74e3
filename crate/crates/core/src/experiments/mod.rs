//! Desk-scale drivers: the precision/recall tradeoff sweep, brute-force checks
//! of the transport results, and SVG rendering of their tables.

mod grid;
mod isotonic;
mod plot;
mod simulate;
mod table;
mod verify;

use serde::Serialize;

pub use grid::{full_ring_count, DiscGrid};
pub use isotonic::{isotonic_nondecreasing, isotonic_nonincreasing};
pub use plot::{emit_plot, render_svg, PlotKind};
pub use simulate::{
    desk_k_target, log_grid, simulate_tradeoff, RvGrid, SimulationConfig, SimulationTable, TradeoffRow, TradeoffSummary,
};
pub use table::{bound_curve, Table};
pub use verify::{
    brute_force_partial_support, concentric_noise_floor, default_delta, partial_ot_active_support,
    verify_concentric_ball, verify_iso_wasserstein, verify_partial_ot_marginal, verify_precision_bound,
    DISPLACEMENT_TOLERANCE, PARTIAL_SUPPORT_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    Absolute,
    Relative,
    /// One-sided: `observed ≤ expected + tolerance`.
    AtMost,
    /// One-sided: `observed ≥ expected − tolerance`.
    AtLeast,
}

/// Outcome of one check. `pass` is decided by the check itself; for checks
/// with more than one condition the extra quantities are listed in `details`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationResult {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    pub runtime_seconds: f64,
    pub details: Vec<(String, f64)>,
}

impl VerificationResult {
    /// Whether `observed` is within `tolerance` of `expected`.
    pub fn within(observed: f64, expected: f64, tolerance: f64, kind: ToleranceKind) -> bool {
        let err = (observed - expected).abs();
        match kind {
            ToleranceKind::Absolute => err <= tolerance,
            ToleranceKind::Relative => err <= tolerance * expected.abs(),
            ToleranceKind::AtMost => observed <= expected + tolerance,
            ToleranceKind::AtLeast => observed >= expected - tolerance,
        }
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}
