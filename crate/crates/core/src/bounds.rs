//! Closed-form limits on what any Lipschitz DR map from a ball can achieve.
//!
//! All quantities are parameterised by [`BoundParams`]: intrinsic dimension
//! `n`, embedding dimension `m < n`, domain radius `R`, relevant radius `r_U`,
//! retrieval radius `r_V`, and Lipschitz constant `L`. The small-neighbourhood
//! correction of the fibre volume is taken as exactly `ε^m`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::special::{ln_gamma, ln_unit_ball_volume};
use crate::quadrature::adaptive_simpson;

/// Absolute tolerance on `q1`/`q2`.
pub const Q_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub n: usize,
    pub m: usize,
    pub radius: f64,
    pub r_u: f64,
    pub r_v: f64,
    pub lipschitz: f64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if m == 0 || m >= n {
        return Err(invalid(format!("need 1 <= m < n, got n={n}, m={m}")));
    }
    Ok(())
}

fn check_geometry(n: usize, m: usize, radius: f64, r_u: f64, lipschitz: f64) -> Result<()> {
    check_dims(n, m)?;
    positive("R", radius)?;
    positive("r_U", r_u)?;
    positive("L", lipschitz)?;
    if r_u >= radius {
        return Err(invalid(format!("need r_U < R, got r_U={r_u}, R={radius}")));
    }
    Ok(())
}

impl BoundParams {
    pub fn new(n: usize, m: usize, radius: f64, r_u: f64, r_v: f64, lipschitz: f64) -> Result<Self> {
        check_geometry(n, m, radius, r_u, lipschitz)?;
        positive("r_V", r_v)?;
        Ok(Self { n, m, radius, r_u, r_v, lipschitz })
    }

    pub fn with_r_v(&self, r_v: f64) -> Result<Self> {
        Self::new(self.n, self.m, self.radius, self.r_u, r_v, self.lipschitz)
    }

    fn ln_d(&self) -> f64 {
        ln_d_factor(self.n, self.m)
    }

    /// `ln(r_V / L)`, the log-radius of the fibre thickening.
    fn ln_thickness(&self) -> f64 {
        (self.r_v / self.lipschitz).ln()
    }
}

/// Parameters of the average-case bound: a base parameter set plus the slack `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvgCaseParams {
    pub base: BoundParams,
    pub delta: f64,
}

impl AvgCaseParams {
    pub fn new(base: BoundParams, delta: f64) -> Result<Self> {
        positive("delta", delta)?;
        let slack = base.radius * base.radius - base.r_u * base.r_u;
        if delta * delta >= slack {
            return Err(invalid(format!("need delta^2 < R^2 - r_U^2 = {slack}, got delta={delta}")));
        }
        Ok(Self { base, delta })
    }

    /// `√(R² − r_U² − δ²)`, the radius of the set of typical fibres.
    pub fn typical_radius(&self) -> f64 {
        let b = &self.base;
        (b.radius * b.radius - b.r_u * b.r_u - self.delta * self.delta).max(0.0).sqrt()
    }
}

fn ln_d_factor(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ln_gamma((n - m) / 2.0 + 1.0) + ln_gamma(m / 2.0 + 1.0) - ln_gamma(n / 2.0 + 1.0)
}

/// `D(n, m) = Γ((n−m)/2 + 1) Γ(m/2 + 1) / Γ(n/2 + 1)`.
pub fn d_factor(n: usize, m: usize) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    if m > n {
        return Err(invalid(format!("need m <= n, got n={n}, m={m}")));
    }
    if m == n {
        return Ok(1.0);
    }
    Ok(ln_d_factor(n, m).exp())
}

/// Worst-case precision ceiling: some fibre's neighbourhood has precision at most
/// `D(n,m) (r_U/R)^{n−m} r_U^m / (r_V/L)^m`.
pub fn precision_bound_worst(p: &BoundParams) -> f64 {
    p.ln_d().exp() * precision_bound_pnorm(p)
}

/// The same ceiling for balls in arbitrary generalized norms, where the ball
/// volumes cancel: `(r_U/R)^{n−m} (r_U / (r_V/L))^m`.
pub fn precision_bound_pnorm(p: &BoundParams) -> f64 {
    let (n, m) = (p.n as f64, p.m as f64);
    ((n - m) * (p.r_u / p.radius).ln() + m * (p.r_u.ln() - p.ln_thickness())).exp()
}

/// Which family of linear fibres `q_linear` integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    /// Fibres of a linear map lifted to the sphere `S^{n+1}_R` (one-dimensional
    /// case of the average bound). Experimental: evaluated exactly as the
    /// closed form is stated, including the `1/(2πR)` lift factor.
    SphereLift,
    /// Fibres of a surjective linear map on the ball `B^n_R`.
    BallProjection,
}

/// Probability weight `q` attached to the average-case bound.
pub fn q_linear(p: &AvgCaseParams, kind: FiberKind) -> Result<f64> {
    q_linear_at(p.base.n, p.base.m, p.base.radius, p.typical_radius(), kind)
}

/// `q` for an explicit typical-fibre radius `inner` (`0 <= inner <= R`).
///
/// The m-dimensional integral over `B^m_inner` is reduced to a radial one and
/// written in the unit variable `u = |t|/R`:
///
/// - ball projection: `q2 = (m / D(n,m)) ∫_0^ρ u^{m−1} (1−u²)^{(n−m)/2} du`
/// - sphere lift: `q1 = m V_m (n−m+2) V_{n−m+2} / (2π V_n) ∫_0^ρ u^{m−1} (1−u²)^{(n−m+1)/2} du`
///
/// with `ρ = inner / R` and `V_k` the unit `k`-ball volume.
pub fn q_linear_at(n: usize, m: usize, radius: f64, inner: f64, kind: FiberKind) -> Result<f64> {
    check_dims(n, m)?;
    positive("R", radius)?;
    if !(0.0..=radius).contains(&inner) {
        return Err(invalid(format!("typical radius must lie in [0, R], got {inner}")));
    }
    let rho = inner / radius;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let (nf, mf) = (n as f64, m as f64);
    let (ln_const, exponent) = match kind {
        FiberKind::BallProjection => (mf.ln() - ln_d_factor(n, m), (nf - mf) / 2.0),
        FiberKind::SphereLift => (
            mf.ln() + ln_unit_ball_volume(m) + (nf - mf + 2.0).ln() + ln_unit_ball_volume(n - m + 2)
                - (2.0 * PI).ln()
                - ln_unit_ball_volume(n),
            (nf - mf + 1.0) / 2.0,
        ),
    };
    let scale = ln_const.exp();
    let integrand = |u: f64| u.powi(m as i32 - 1) * (1.0 - u * u).max(0.0).powf(exponent);
    let q = adaptive_simpson(integrand, 0.0, rho, Q_TOLERANCE / scale)?;
    Ok((scale * q.value).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvgCaseBound {
    pub bound: f64,
    /// Probability (under the uniform measure on the ball) that a query obeys `bound`.
    pub q: f64,
}

/// Average-case ceiling `D(n,m) (r_U/√(r_U²+δ²))^{n−m} r_U^m/(r_V/L)^m`,
/// holding with probability `q2`.
pub fn precision_bound_avg(p: &AvgCaseParams) -> Result<AvgCaseBound> {
    let b = &p.base;
    let (n, m) = (b.n as f64, b.m as f64);
    let spread = (b.r_u * b.r_u + p.delta * p.delta).sqrt();
    let bound = (b.ln_d() + (n - m) * (b.r_u / spread).ln() + m * (b.r_u.ln() - b.ln_thickness())).exp();
    let q = q_linear(p, FiberKind::BallProjection)?;
    Ok(AvgCaseBound { bound, q })
}

/// Radius of the ball whose volume matches the guaranteed retrieved-preimage volume:
/// `(1/D)^{1/n} R^{(n−m)/n} (r_V/L)^{m/n}`.
pub fn preimage_ball_radius(p: &BoundParams) -> f64 {
    let (n, m) = (p.n as f64, p.m as f64);
    ((-p.ln_d() + (n - m) * p.radius.ln() + m * p.ln_thickness()) / n).exp()
}

/// Lower bound on `W2²` between the relevant ball and the retrieved preimage.
///
/// Returns 0 when the preimage-ball radius falls below `r_U`, where the bound
/// does not apply.
pub fn w2_lower_bound(p: &BoundParams) -> f64 {
    let r = preimage_ball_radius(p);
    if r >= p.r_u {
        let n = p.n as f64;
        n / (n + 2.0) * (r - p.r_u).powi(2)
    } else {
        0.0
    }
}

/// Largest retrieval radius at which the Wasserstein lower bound is still zero:
/// `L (D(n,m) r_U^n / R^{n−m})^{1/m}`.
pub fn optimal_rv(n: usize, m: usize, radius: f64, r_u: f64, lipschitz: f64) -> Result<f64> {
    check_geometry(n, m, radius, r_u, lipschitz)?;
    let (nf, mf) = (n as f64, m as f64);
    Ok(lipschitz * ((ln_d_factor(n, m) + nf * r_u.ln() - (nf - mf) * radius.ln()) / mf).exp())
}

/// Grid version of [`optimal_rv`]: the grid point minimising the lower bound,
/// preferring the largest such point on ties. `None` for an empty grid.
pub fn optimal_rv_grid(base: &BoundParams, grid: &[f64]) -> Result<Option<f64>> {
    let mut best: Option<(f64, f64)> = None;
    for &r_v in grid {
        let w = w2_lower_bound(&base.with_r_v(r_v)?);
        best = match best {
            Some((bw, br)) if w > bw || (w == bw && r_v < br) => Some((bw, br)),
            _ => Some((w, r_v)),
        };
    }
    Ok(best.map(|(_, r)| r))
}

/// Exact W2 between uniform distributions on concentric balls of radii `r1 <= r2`.
///
/// The optimal map is the scaling `x -> (r1/r2) x`, which gives
/// `√(n/(n+2)) (r2 − r1)`.
pub fn concentric_ball_w2(n: usize, r1: f64, r2: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if !(r1 >= 0.0) || !r2.is_finite() {
        return Err(invalid(format!("radii must be nonnegative and finite, got {r1}, {r2}")));
    }
    if r1 > r2 {
        return Err(invalid(format!("need r1 <= r2, got r1={r1}, r2={r2}")));
    }
    let n = n as f64;
    Ok((n / (n + 2.0)).sqrt() * (r2 - r1))
}

/// Every bound for one parameter set, in the shape the CLI prints.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSummary {
    pub d_factor: f64,
    pub precision_worst: f64,
    pub precision_pnorm: f64,
    pub precision_avg: f64,
    pub q1: f64,
    pub q2: f64,
    pub w2_lower: f64,
    pub rv_star: f64,
}

pub fn summarize(p: &AvgCaseParams) -> Result<BoundSummary> {
    let b = &p.base;
    let avg = precision_bound_avg(p)?;
    Ok(BoundSummary {
        d_factor: d_factor(b.n, b.m)?,
        precision_worst: precision_bound_worst(b),
        precision_pnorm: precision_bound_pnorm(b),
        precision_avg: avg.bound,
        q1: q_linear(p, FiberKind::SphereLift)?,
        q2: avg.q,
        w2_lower: w2_lower_bound(b),
        rv_star: optimal_rv(b.n, b.m, b.radius, b.r_u, b.lipschitz)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn d_factor_examples() {
        for n in 1..30 {
            assert_eq!(d_factor(n, n).unwrap(), 1.0);
        }
        assert_relative_eq!(d_factor(2, 1).unwrap(), PI / 4.0, max_relative = 1e-12);
        assert_relative_eq!(d_factor(10, 2).unwrap(), 0.2, max_relative = 1e-12);
        assert_relative_eq!(d_factor(3, 1).unwrap(), 2.0 / 3.0, max_relative = 1e-12);
        assert!(d_factor(2, 3).is_err());
    }

    #[test]
    fn d_factor_decreasing_in_n() {
        for m in 1..=3 {
            let mut prev = d_factor(m, m).unwrap();
            for n in m + 1..=60 {
                let cur = d_factor(n, m).unwrap();
                assert!(cur < prev, "m={m}, n={n}");
                prev = cur;
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(BoundParams::new(3, 3, 1.0, 0.1, 0.1, 1.0).is_err());
        assert!(BoundParams::new(3, 1, 1.0, 1.0, 0.1, 1.0).is_err());
        assert!(BoundParams::new(3, 1, 1.0, 0.1, 0.0, 1.0).is_err());
        assert!(BoundParams::new(3, 1, 1.0, 0.1, 0.1, -1.0).is_err());
        let b = BoundParams::new(3, 1, 1.0, 0.6, 0.1, 1.0).unwrap();
        assert!(AvgCaseParams::new(b, 0.8).is_err());
        assert!(AvgCaseParams::new(b, 0.79).is_ok());
    }

    #[test]
    fn worst_case_examples() {
        let p = BoundParams::new(3, 1, 1.0, 0.1, 0.2, 1.0).unwrap();
        assert_relative_eq!(precision_bound_worst(&p), 2.0 / 3.0 * 0.01 * 0.5, max_relative = 1e-12);
        let p = BoundParams::new(10, 2, 1.0, 0.3, 0.3, 1.0).unwrap();
        assert_relative_eq!(precision_bound_worst(&p), 0.2 * 0.3f64.powi(8), max_relative = 1e-12);
    }

    #[test]
    fn pnorm_examples() {
        let p = BoundParams::new(3, 1, 1.0, 0.1, 0.2, 1.0).unwrap();
        assert_relative_eq!(precision_bound_pnorm(&p), 0.005, max_relative = 1e-12);
        let p = BoundParams::new(10, 2, 2.0, 0.2, 0.4, 2.0).unwrap();
        assert_relative_eq!(precision_bound_pnorm(&p), 1e-8, max_relative = 1e-12);
        // All ratios approach one.
        let p = BoundParams::new(5, 2, 1.0, 1.0 - 1e-12, 1.0, 1.0).unwrap();
        assert_relative_eq!(precision_bound_pnorm(&p), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn q2_closed_form_n2_m1() {
        let q = q_linear_at(2, 1, 1.0, 0.8, FiberKind::BallProjection).unwrap();
        let want = 2.0 * (0.8 * 0.6 + 0.8f64.asin()) / PI;
        assert!((q - want).abs() < 1e-8, "{q} vs {want}");
        assert_relative_eq!(want, 0.8959, epsilon = 1e-4);
    }

    #[test]
    fn q2_limits() {
        assert_eq!(q_linear_at(5, 2, 1.0, 0.0, FiberKind::BallProjection).unwrap(), 0.0);
        for (n, m) in [(2, 1), (5, 2), (10, 2), (10, 9), (30, 3)] {
            let q = q_linear_at(n, m, 2.0, 2.0, FiberKind::BallProjection).unwrap();
            assert!((q - 1.0).abs() < 1e-7, "n={n} m={m}: {q}");
        }
        let base = BoundParams::new(10, 2, 1.0, 1e-4, 0.3, 1.0).unwrap();
        let q = q_linear(&AvgCaseParams::new(base, 1e-4).unwrap(), FiberKind::BallProjection).unwrap();
        assert!((q - 1.0).abs() < 1e-6);
    }

    #[test]
    fn q2_monotone_and_bounded() {
        for (n, m) in [(3, 1), (10, 2), (10, 5)] {
            let mut prev = 0.0;
            for k in 1..=50 {
                let q = q_linear_at(n, m, 1.0, k as f64 / 50.0, FiberKind::BallProjection).unwrap();
                assert!((0.0..=1.0 + 1e-9).contains(&q));
                assert!(q > prev);
                prev = q;
            }
        }
    }

    #[test]
    fn q1_matches_direct_disc_integral() {
        // Direct Monte Carlo over t in the disc B^2_ρ for the sphere-lift integrand,
        // bypassing the radial reduction.
        use rand::{Rng, SeedableRng};
        let (n, m, radius, inner) = (6usize, 2usize, 1.5f64, 1.1f64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let samples = 400_000;
        let k = n - m + 1; // fibre sphere dimension
        let sphere_const = (k as f64 + 1.0) * crate::geometry::unit_ball_volume(k as i64 + 1).unwrap();
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..samples {
            let (x, y): (f64, f64) = (rng.random_range(-inner..inner), rng.random_range(-inner..inner));
            let t2 = x * x + y * y;
            let v = if t2 < inner * inner { sphere_const * (radius * radius - t2).powf(k as f64 / 2.0) } else { 0.0 };
            acc += v;
            acc2 += v * v;
        }
        let area = 4.0 * inner * inner;
        let mean = acc / samples as f64;
        let sd = ((acc2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        let norm = 2.0 * PI * radius * crate::geometry::unit_ball_volume(n as i64).unwrap() * radius.powi(n as i32);
        let mc = area * mean / norm;
        let mc_sd = area * sd / norm;
        let q1 = q_linear_at(n, m, radius, inner, FiberKind::SphereLift).unwrap();
        assert!((q1 - mc).abs() < 4.0 * mc_sd, "{q1} vs {mc} ± {mc_sd}");
    }

    #[test]
    fn avg_case_examples() {
        let base = BoundParams::new(10, 2, 1.0, 0.3, 0.3, 1.0).unwrap();
        let p = AvgCaseParams::new(base, 0.3).unwrap();
        let avg = precision_bound_avg(&p).unwrap();
        assert_relative_eq!(avg.bound, 0.0125, max_relative = 1e-12);
        assert!((0.0..=1.0).contains(&avg.q));
        let tiny = precision_bound_avg(&AvgCaseParams::new(base, 1e-9).unwrap()).unwrap();
        assert_relative_eq!(tiny.bound, 0.2, max_relative = 1e-9);
    }

    #[test]
    fn w2_lower_examples() {
        let p = BoundParams::new(10, 2, 1.0, 0.05, 0.1, 1.0).unwrap();
        let r = 5f64.powf(0.1) * 0.1f64.powf(0.2);
        assert_relative_eq!(preimage_ball_radius(&p), r, max_relative = 1e-12);
        assert_relative_eq!(w2_lower_bound(&p), 10.0 / 12.0 * (r - 0.05).powi(2), max_relative = 1e-12);
        assert_relative_eq!(w2_lower_bound(&p), 0.398, epsilon = 1e-3);

        let rv = optimal_rv(10, 2, 1.0, 0.05, 1.0).unwrap();
        let at = p.with_r_v(rv).unwrap();
        assert_relative_eq!(preimage_ball_radius(&at), 0.05, max_relative = 1e-12);
        assert!(w2_lower_bound(&at) < 1e-20);
    }

    #[test]
    fn w2_lower_high_dim_limit() {
        let p = BoundParams::new(100_000, 2, 1.0, 0.3, 0.1, 1.0).unwrap();
        assert!((w2_lower_bound(&p) / 0.49 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn optimal_rv_examples() {
        let rv = optimal_rv(2, 1, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(rv, PI / 16.0, max_relative = 1e-12);
        assert_relative_eq!(optimal_rv(2, 1, 1.0, 0.5, 2.0).unwrap(), 2.0 * rv, max_relative = 1e-12);
        for (n, m, r_u) in [(10, 2, 0.3), (10, 9, 0.6), (5, 1, 0.2)] {
            let rv = optimal_rv(n, m, 1.0, r_u, 1.0).unwrap();
            let p = BoundParams::new(n, m, 1.0, r_u, rv, 1.0).unwrap();
            assert!(w2_lower_bound(&p) < 1e-24);
            assert!(w2_lower_bound(&p.with_r_v(rv * (1.0 + 1e-6)).unwrap()) > 0.0);
        }
    }

    #[test]
    fn optimal_rv_grid_picks_boundary() {
        let rv = optimal_rv(10, 2, 1.0, 0.3, 1.0).unwrap();
        let base = BoundParams::new(10, 2, 1.0, 0.3, rv, 1.0).unwrap();
        let grid: Vec<f64> = (1..=20).map(|k| rv * k as f64 / 10.0).collect();
        // Grid points at or below rv* have zero bound; the largest such is rv* itself
        // up to roundoff in the grid construction.
        let expected = grid
            .iter()
            .copied()
            .filter(|&g| w2_lower_bound(&base.with_r_v(g).unwrap()) == 0.0)
            .fold(f64::NAN, f64::max);
        assert_eq!(optimal_rv_grid(&base, &grid).unwrap(), Some(expected));
        assert!((expected / rv - 1.0).abs() < 1e-12 || expected < rv);
        assert_eq!(optimal_rv_grid(&base, &[]).unwrap(), None);
    }

    #[test]
    fn concentric_examples() {
        assert_eq!(concentric_ball_w2(4, 0.7, 0.7).unwrap(), 0.0);
        assert_relative_eq!(concentric_ball_w2(2, 1.0, 2.0).unwrap(), 0.5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(concentric_ball_w2(10, 0.0, 1.0).unwrap(), (10.0f64 / 12.0).sqrt(), max_relative = 1e-12);
        assert!(concentric_ball_w2(2, 2.0, 1.0).is_err());
    }

    fn params() -> impl Strategy<Value = BoundParams> {
        (2usize..40, 0.5f64..5.0, 0.01f64..0.99, 0.01f64..3.0, 0.1f64..5.0).prop_flat_map(|(n, radius, fr, r_v, l)| {
            (1..n).prop_map(move |m| BoundParams::new(n, m, radius, fr * radius, r_v, l).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn worst_is_d_times_pnorm(p in params()) {
            let lhs = precision_bound_worst(&p);
            let rhs = d_factor(p.n, p.m).unwrap() * precision_bound_pnorm(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300));
        }

        #[test]
        fn w2_lower_monotone(p in params(), s in 1.0f64..3.0) {
            let bigger_rv = p.with_r_v(p.r_v * s).unwrap();
            prop_assert!(w2_lower_bound(&bigger_rv) >= w2_lower_bound(&p));
            let smaller_ru = BoundParams::new(p.n, p.m, p.radius, p.r_u / s, p.r_v, p.lipschitz).unwrap();
            prop_assert!(w2_lower_bound(&smaller_ru) >= w2_lower_bound(&p));
        }
    }
}
