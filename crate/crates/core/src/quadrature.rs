//! Adaptive Simpson quadrature on a compact interval.

use crate::error::{Error, Result};

/// Maximum number of subintervals the adaptive refinement may produce.
pub const MAX_INTERVALS: usize = 1 << 20;

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the per-interval Richardson error estimates.
    pub error_estimate: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Uses an explicit stack so deep refinement near endpoint singularities of
/// the derivative cannot overflow the call stack.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, intervals: 1 });
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let mut stack = vec![Segment { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb), tol, depth: 0 }];
    let mut value = 0.0;
    let mut err = 0.0;
    let mut intervals = 1usize;
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let lm = 0.5 * (s.a + m);
        let rm = 0.5 * (m + s.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(s.a, m, s.fa, flm, s.fm);
        let right = simpson(m, s.b, s.fm, frm, s.fb);
        let delta = left + right - s.whole;
        if delta.abs() <= 15.0 * s.tol || s.depth >= 60 || m <= s.a || m >= s.b {
            value += left + right + delta / 15.0;
            err += delta.abs() / 15.0;
            continue;
        }
        intervals += 1;
        if intervals > MAX_INTERVALS {
            return Err(Error::NumericFailure {
                message: format!("adaptive Simpson exceeded {MAX_INTERVALS} intervals"),
                achieved: err + delta.abs() / 15.0,
            });
        }
        let tol = 0.5 * s.tol;
        stack.push(Segment { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right, tol, depth: s.depth + 1 });
        stack.push(Segment { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left, tol, depth: s.depth + 1 });
    }
    if !value.is_finite() {
        return Err(Error::NumericFailure { message: "integrand produced a non-finite value".into(), achieved: f64::INFINITY });
    }
    Ok(Quadrature { value, error_estimate: err, intervals })
}
