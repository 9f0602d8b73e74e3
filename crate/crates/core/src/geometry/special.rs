//! Log-gamma and the ball/sphere volume formulas built on it.
//!
//! Everything is evaluated in log space so that dimensions around 100 do not
//! overflow `Γ`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x)` for `x > 0`.
///
/// Shifts the argument above 15 with the recurrence `Γ(x+1) = xΓ(x)` and then
/// applies the Stirling series through the `x^-9` term, which keeps the
/// absolute error near machine precision.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    let mut z = x;
    let mut shift = 0.0;
    // Product of the shifted-out factors, folded into a log every few steps
    // so the product never overflows.
    let mut prod = 1.0;
    while z < 15.0 {
        prod *= z;
        z += 1.0;
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
    }
    shift += prod.ln();
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 / 1188.0))));
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - shift
}

/// Volume of the unit `n`-ball, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: i64) -> Result<f64> {
    if n < 1 {
        return Err(invalid(format!("ball dimension must be >= 1, got {n}")));
    }
    Ok(ln_unit_ball_volume(n as usize).exp())
}

pub(crate) fn ln_unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    half * PI.ln() - ln_gamma(half + 1.0)
}

/// Surface volume of the sphere `S^{n-1}_r` bounding the `n`-ball of radius `r`.
///
/// For `n = 1` this is the counting measure of the two endpoints.
pub fn sphere_surface(n: i64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("sphere radius must be positive, got {r}")));
    }
    let v = unit_ball_volume(n)?;
    Ok(n as f64 * v * r.powi(n as i32 - 1))
}

/// Volume of the generalized unit ball `{x : Σ |x_i|^{p_i} <= 1}`:
/// `2^n Π Γ(1 + 1/p_i) / Γ(1 + Σ 1/p_i)`.
pub fn generalized_ball_volume(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(invalid("exponent list must be nonempty"));
    }
    if let Some(bad) = p.iter().find(|&&pi| !(pi >= 1.0) || !pi.is_finite()) {
        return Err(invalid(format!("every exponent must be >= 1, got {bad}")));
    }
    let n = p.len() as f64;
    let sum_inv: f64 = p.iter().map(|pi| 1.0 / pi).sum();
    let ln_num: f64 = p.iter().map(|pi| ln_gamma(1.0 + 1.0 / pi)).sum();
    Ok((n * 2f64.ln() + ln_num - ln_gamma(1.0 + sum_inv)).exp())
}
