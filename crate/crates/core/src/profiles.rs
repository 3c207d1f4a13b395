//! Warping profiles `ψ` satisfying `ψ ≤ α⁻¹ψ′` and the minimization kernel
//! `F(ρ) = ψ(ρ)·d − 2ρ`.
//!
//! Every closed-form quantity of the ℓ¹ warped product reduces to this
//! kernel: the distance between `(t₁, y₁)` and `(t₂, y₂)` is
//! `t₁ + t₂ + min F` over `ρ ∈ [0, min(t₁, t₂)]` with `d = d_Y(y₁, y₂)`, and
//! Gromov products and boundary products are `−min F` over the appropriate
//! range.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Resolution of the golden-section refinement, in `ρ`.
pub const KERNEL_XTOL: f64 = 1e-10;

// Uniform scan resolution for kernels that are not known to be unimodal.
const SCAN_POINTS: usize = 2048;
// First knot of the logarithmic scan near zero.
const SCAN_FIRST_KNOT: f64 = 1e-8;

#[derive(Clone)]
pub enum ProfileKind {
    /// `ψ(t) = e^{αt}`.
    Exp,
    /// `ψ(t) = sinh^α(t)`.
    SinhPow,
    /// Caller-supplied `ψ` and `ψ′`.
    Custom {
        label: String,
        psi: ScalarFn,
        dpsi: ScalarFn,
    },
}

/// A warping function together with its growth rate `α`.
#[derive(Clone)]
pub struct WarpProfile {
    kind: ProfileKind,
    alpha: f64,
}

impl fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WarpProfile({})", self.label())
    }
}

/// Largest minimizer of `F` and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FMinResult {
    pub tau: f64,
    pub fmin: f64,
    /// `tau > 0`: the horizontal level is off the bottom of the range.
    pub interior: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub profile: String,
    pub samples: usize,
    pub growth_condition: bool,
    pub non_decreasing: bool,
    pub exponential_lower_bound: bool,
    /// Smallest `ψ′/(αψ)` seen on the grid (1 means equality in the growth condition).
    pub min_growth_ratio: f64,
    pub violations: Vec<String>,
}

impl ProfileReport {
    pub fn pass(&self) -> bool {
        self.growth_condition && self.non_decreasing && self.exponential_lower_bound
    }
}

/// Sample points in `[0, t_max]`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileGrid {
    pub t_max: f64,
    pub points: usize,
}

impl ProfileGrid {
    pub fn new(t_max: f64, points: usize) -> Self {
        ProfileGrid { t_max, points }
    }

    fn samples(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|i| self.t_max * i as f64 / (n - 1) as f64).collect()
    }
}

/// Closed form and two-sided estimate for `sup_{ρ≥0} (2ρ − K·d·e^{αρ})`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupremizerBounds {
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
    pub constant: f64,
}

fn ln_sinh(t: f64) -> f64 {
    if t > 20.0 {
        t - std::f64::consts::LN_2 + (-(-2.0 * t).exp()).ln_1p()
    } else {
        t.sinh().ln()
    }
}

impl WarpProfile {
    pub fn exp(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WarpProfile {
            kind: ProfileKind::Exp,
            alpha,
        })
    }

    pub fn sinh_pow(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WarpProfile {
            kind: ProfileKind::SinhPow,
            alpha,
        })
    }

    /// A user profile. `dpsi` must be the exact derivative of `psi`; the
    /// kernel never differentiates numerically.
    pub fn custom<F, G>(label: impl Into<String>, alpha: f64, psi: F, dpsi: G) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_alpha(alpha)?;
        Ok(WarpProfile {
            kind: ProfileKind::Custom {
                label: label.into(),
                psi: Arc::new(psi),
                dpsi: Arc::new(dpsi),
            },
            alpha,
        })
    }

    /// Parses `"exp:<alpha>"` or `"sinh:<alpha>"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, value) = text
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("profile '{text}' must look like exp:<alpha> or sinh:<alpha>")))?;
        let alpha: f64 = value
            .parse()
            .map_err(|_| Error::domain(format!("bad alpha in profile '{text}'")))?;
        match kind.to_ascii_lowercase().as_str() {
            "exp" => WarpProfile::exp(alpha),
            "sinh" => WarpProfile::sinh_pow(alpha),
            other => Err(Error::domain(format!("unknown profile kind '{other}'"))),
        }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::Exp => format!("exp:{}", self.alpha),
            ProfileKind::SinhPow => format!("sinh:{}", self.alpha),
            ProfileKind::Custom { label, .. } => format!("custom:{label}:{}", self.alpha),
        }
    }

    pub fn psi(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Exp => (self.alpha * t).exp(),
            ProfileKind::SinhPow => {
                if t <= 0.0 {
                    0.0
                } else if self.alpha == 1.0 {
                    t.sinh()
                } else {
                    (self.alpha * ln_sinh(t)).exp()
                }
            }
            ProfileKind::Custom { psi, .. } => psi(t),
        }
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Exp => self.alpha * (self.alpha * t).exp(),
            ProfileKind::SinhPow => {
                let a = self.alpha;
                if t <= 0.0 {
                    return if a < 1.0 {
                        f64::INFINITY
                    } else if a == 1.0 {
                        1.0
                    } else {
                        0.0
                    };
                }
                if a == 1.0 {
                    t.cosh()
                } else {
                    a * ((a - 1.0) * ln_sinh(t)).exp() * t.cosh()
                }
            }
            ProfileKind::Custom { dpsi, .. } => dpsi(t),
        }
    }

    pub fn psi0(&self) -> f64 {
        self.psi(0.0)
    }

    /// `ψ(0) = 0`: the bottom slice `{0} × Y` collapses to one point.
    pub fn collapses_at_zero(&self) -> bool {
        self.psi0() == 0.0
    }

    /// `F(ρ) = ψ(ρ)·d − 2ρ`, with `ψ·0 = 0` even where `ψ` overflows.
    pub fn kernel(&self, d: f64, rho: f64) -> f64 {
        if d == 0.0 {
            -2.0 * rho
        } else {
            self.psi(rho) * d - 2.0 * rho
        }
    }

    fn unimodal_kernel(&self) -> bool {
        match self.kind {
            ProfileKind::Exp => true,
            // sinh^α is convex on [0, ∞) for α ≥ 1.
            ProfileKind::SinhPow => self.alpha >= 1.0,
            ProfileKind::Custom { .. } => false,
        }
    }

    /// Checks the growth condition `ψ ≤ α⁻¹ψ′`, monotonicity and the
    /// exponential lower bound `ψ(r) ≥ ψ(b)e^{α(r−b)}` on `grid`.
    pub fn validate(&self, grid: ProfileGrid) -> Result<ProfileReport> {
        if !(grid.t_max >= 0.0) || grid.points == 0 {
            return Err(Error::domain("profile grid must be nonempty and within [0, ∞)"));
        }
        let ts = grid.samples();
        let rel = 1e-9;
        let mut violations = Vec::new();
        let mut growth = true;
        let mut monotone = true;
        let mut lower = true;
        let mut min_ratio = f64::INFINITY;

        let values: Vec<f64> = ts.iter().map(|&t| self.psi(t)).collect();
        for (&t, &v) in ts.iter().zip(&values) {
            if v < 0.0 || !v.is_finite() {
                growth = false;
                violations.push(format!("ψ({t}) = {v} is not a finite nonnegative value"));
                continue;
            }
            let dv = self.dpsi(t);
            if dv.is_nan() {
                continue;
            }
            if v > 0.0 {
                min_ratio = min_ratio.min(dv / (self.alpha * v));
            }
            if v > dv / self.alpha * (1.0 + rel) + 1e-300 {
                if growth {
                    violations.push(format!(
                        "growth condition fails at t = {t}: ψ = {v}, ψ′/α = {}",
                        dv / self.alpha
                    ));
                }
                growth = false;
            }
        }
        for (w, vals) in ts.windows(2).zip(values.windows(2)) {
            let (b, r) = (w[0], w[1]);
            let (pb, pr) = (vals[0], vals[1]);
            if pr < pb * (1.0 - rel) {
                if monotone {
                    violations.push(format!("ψ decreases between t = {b} and t = {r}"));
                }
                monotone = false;
            }
            if pb > 0.0 && pr < pb * (self.alpha * (r - b)).exp() * (1.0 - rel) {
                if lower {
                    violations.push(format!(
                        "exponential lower bound fails between t = {b} and t = {r}"
                    ));
                }
                lower = false;
            }
        }
        let report = ProfileReport {
            profile: self.label(),
            samples: ts.len(),
            growth_condition: growth,
            non_decreasing: monotone,
            exponential_lower_bound: lower,
            min_growth_ratio: min_ratio,
            violations,
        };
        if report.pass() {
            Ok(report)
        } else {
            Err(Error::Validation(report.violations))
        }
    }

    /// Largest minimizer of `F(ρ) = ψ(ρ)d − 2ρ` over `[0, tmax]`;
    /// `tmax = ∞` is allowed when `d > 0`.
    pub fn minimize_f(&self, d: f64, tmax: f64) -> Result<FMinResult> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("kernel distance must be finite and ≥ 0, got {d}")));
        }
        if !(tmax >= 0.0) {
            return Err(Error::domain(format!("kernel range must be ≥ 0, got {tmax}")));
        }
        if tmax.is_infinite() {
            if d == 0.0 {
                return Err(Error::Unbounded(
                    "F(ρ) = −2ρ has no minimum on [0, ∞) when d = 0".into(),
                ));
            }
            let bracket = self.growth_bracket(d)?;
            return self.minimize_f(d, bracket);
        }
        if d == 0.0 {
            return Ok(result(tmax, -2.0 * tmax));
        }
        if let ProfileKind::Exp = self.kind {
            let a = self.alpha;
            let stationary = (2.0 / (a * d)).ln() / a;
            let tau = stationary.clamp(0.0, tmax);
            return Ok(result(tau, self.kernel(d, tau)));
        }
        if tmax == 0.0 {
            return Ok(result(0.0, self.kernel(d, 0.0)));
        }
        let f = |rho: f64| self.kernel(d, rho);
        if self.unimodal_kernel() {
            let (tau, fmin) = quad::golden_section(f, 0.0, tmax, KERNEL_XTOL);
            let polished = self.polish_stationary(d, tau, tmax);
            if polished == tau {
                return Ok(result(tau, fmin));
            }
            return Ok(result(polished, self.kernel(d, polished)));
        }
        Ok(self.scan_and_refine(d, tmax))
    }

    // Golden-section locates τ only to about √ε in ρ; bisecting the
    // stationarity condition d·ψ′(ρ) = 2 near τ recovers full precision.
    fn polish_stationary(&self, d: f64, tau: f64, tmax: f64) -> f64 {
        if tau <= 0.0 || tau >= tmax {
            return tau;
        }
        let h = |r: f64| d * self.dpsi(r) - 2.0;
        let width = 1e-6 * tau.max(1.0);
        let (mut lo, mut hi) = ((tau - width).max(0.0), (tau + width).min(tmax));
        if !(h(lo) < 0.0 && h(hi) > 0.0) {
            return tau;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    // Grid scan with logarithmic knots near zero, then golden-section
    // refinement of every discrete local minimum.
    fn scan_and_refine(&self, d: f64, tmax: f64) -> FMinResult {
        let step = tmax / SCAN_POINTS as f64;
        let mut knots = vec![0.0];
        let mut k = SCAN_FIRST_KNOT;
        while k < step && k < tmax {
            knots.push(k);
            k *= 2.0;
        }
        let start = knots.len();
        for i in 1..=SCAN_POINTS {
            let x = if i == SCAN_POINTS { tmax } else { i as f64 * step };
            if x > knots[start - 1] {
                knots.push(x);
            }
        }
        let vals: Vec<f64> = knots.iter().map(|&x| self.kernel(d, x)).collect();
        let n = knots.len();
        let mut best = (knots[0], vals[0]);
        let mut consider = |x: f64, fx: f64| {
            if fx < best.1 || (fx == best.1 && x > best.0) {
                best = (x, fx);
            }
        };
        for i in 0..n {
            let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < n { vals[i + 1] } else { f64::INFINITY };
            if vals[i] <= left && vals[i] <= right {
                consider(knots[i], vals[i]);
                let lo = knots[i.saturating_sub(1)];
                let hi = knots[(i + 1).min(n - 1)];
                if hi > lo {
                    let (x, fx) = quad::golden_section(|r| self.kernel(d, r), lo, hi, KERNEL_XTOL);
                    consider(x, fx);
                }
            }
        }
        result(best.0, best.1)
    }

    // A point past which F is non-decreasing: once α·d·ψ(ρ̄) ≥ 2 the growth
    // condition gives d·ψ′ ≥ α·d·ψ ≥ 2 for every ρ ≥ ρ̄.
    fn growth_bracket(&self, d: f64) -> Result<f64> {
        let mut bracket = 1.0;
        for _ in 0..64 {
            if self.alpha * d * self.psi(bracket) >= 2.0 {
                return Ok(bracket);
            }
            bracket *= 2.0;
        }
        Err(Error::Unbounded(format!(
            "no growth bracket found for d = {d} with profile {}",
            self.label()
        )))
    }

    /// `sup_{ρ ≥ 0} (2ρ − ψ(ρ)·d)` for `d > 0`.
    pub fn sup_g(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("sup_G needs finite d > 0, got {d}")));
        }
        if let ProfileKind::Exp = self.kind {
            let a = self.alpha;
            return Ok(if d < 2.0 / a {
                (2.0 / a) * ((2.0 / (a * d)).ln() - 1.0)
            } else {
                -d
            });
        }
        Ok(-self.minimize_f(d, f64::INFINITY)?.fmin)
    }
}

fn result(tau: f64, fmin: f64) -> FMinResult {
    FMinResult {
        tau,
        fmin,
        interior: tau > 0.0,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must be finite and > 0, got {alpha}")))
    }
}

/// Exact value of `sup_{ρ≥0}(2ρ − K d e^{αρ})` and the logarithmic bounds
/// `∓C − (2/α) ln d` with the explicit constant
/// `C = max((2/α)|ln(2/(Kα)) − 1|, KDe^α + (2/α)ln(Kα/2), (2/α)ln D)`.
pub fn exp_supremizer_bounds(k: f64, diam: f64, alpha: f64, d: f64) -> Result<SupremizerBounds> {
    for (name, v) in [("K", k), ("D", diam), ("alpha", alpha), ("d", d)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    if d > diam {
        return Err(Error::domain(format!("d = {d} exceeds D = {diam}")));
    }
    let two_a = 2.0 / alpha;
    let exact = if d < 2.0 / (k * alpha) {
        two_a * ((2.0 / (k * alpha * d)).ln() - 1.0)
    } else {
        -k * d
    };
    let constant = [
        two_a * ((2.0 / (k * alpha)).ln() - 1.0).abs(),
        k * diam * alpha.exp() + two_a * (k * alpha / 2.0).ln(),
        two_a * diam.ln(),
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    let center = -two_a * d.ln();
    Ok(SupremizerBounds {
        exact,
        lower: center - constant,
        upper: center + constant,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn exp_profile_validates_with_equality() {
        let p = WarpProfile::exp(1.0).unwrap();
        let r = p.validate(ProfileGrid::new(10.0, 1001)).unwrap();
        assert!(r.pass());
        assert!(close(r.min_growth_ratio, 1.0, 1e-12));
    }

    #[test]
    fn sinh_profile_validates() {
        for a in [0.5, 1.0, 2.0] {
            let p = WarpProfile::sinh_pow(a).unwrap();
            assert!(p.validate(ProfileGrid::new(10.0, 1001)).unwrap().pass(), "alpha {a}");
        }
    }

    #[test]
    fn affine_profile_fails_growth() {
        let p = WarpProfile::custom("t+1", 1.0, |t| t + 1.0, |_| 1.0).unwrap();
        match p.validate(ProfileGrid::new(10.0, 101)) {
            Err(Error::Validation(v)) => assert!(v[0].contains("growth")),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn parse_profiles() {
        assert_eq!(WarpProfile::parse("exp:1").unwrap().label(), "exp:1");
        assert_eq!(WarpProfile::parse("sinh:2.5").unwrap().alpha(), 2.5);
        assert!(WarpProfile::parse("sinh:0").is_err());
        assert!(WarpProfile::parse("cosh:1").is_err());
        assert!(WarpProfile::parse("exp").is_err());
    }

    #[test]
    fn sinh_pow_evaluation() {
        let p = WarpProfile::sinh_pow(2.0).unwrap();
        assert!(close(p.psi(1.0), 1f64.sinh().powi(2), 1e-14));
        assert!(close(p.dpsi(1.0), 2.0 * 1f64.sinh() * 1f64.cosh(), 1e-13));
        assert_eq!(p.psi(0.0), 0.0);
        let big = p.psi(30.0);
        assert!(close(big / 30f64.sinh().powi(2), 1.0, 1e-12));
        assert!(p.collapses_at_zero());
        assert!(!WarpProfile::exp(1.0).unwrap().collapses_at_zero());
    }

    #[test]
    fn exp_kernel_examples() {
        let p = WarpProfile::exp(1.0).unwrap();
        let r = p.minimize_f(2.0, 10.0).unwrap();
        assert_eq!(r.tau, 0.0);
        assert!(close(r.fmin, 2.0, 1e-15));
        assert!(!r.interior);

        let d = 2.0 * (-5f64).exp();
        let r = p.minimize_f(d, 10.0).unwrap();
        assert!(close(r.tau, 5.0, 1e-12));
        assert!(close(r.fmin, -8.0, 1e-12));
        assert!(r.interior);

        let r = p.minimize_f(d, 3.0).unwrap();
        assert_eq!(r.tau, 3.0);
        assert!(close(r.fmin, 2.0 * (-2f64).exp() - 6.0, 1e-12));
    }

    #[test]
    fn kernel_errors() {
        let p = WarpProfile::sinh_pow(1.0).unwrap();
        assert!(matches!(p.minimize_f(0.0, f64::INFINITY), Err(Error::Unbounded(_))));
        assert!(matches!(p.minimize_f(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(p.minimize_f(1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(p.sup_g(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_distance_takes_top_of_range() {
        for p in [WarpProfile::exp(1.0).unwrap(), WarpProfile::sinh_pow(0.5).unwrap()] {
            let r = p.minimize_f(0.0, 4.0).unwrap();
            assert_eq!(r.tau, 4.0);
            assert_eq!(r.fmin, -8.0);
        }
    }

    #[test]
    fn minimizer_respects_derivative_bound() {
        // ψ(τ)·d ≤ 2/α whenever τ > 0.
        for p in [
            WarpProfile::exp(0.7).unwrap(),
            WarpProfile::sinh_pow(0.4).unwrap(),
            WarpProfile::sinh_pow(1.0).unwrap(),
            WarpProfile::sinh_pow(3.0).unwrap(),
        ] {
            for &d in &[1e-4, 1e-2, 0.3, 1.0, 5.0] {
                for &tmax in &[0.5, 3.0, 12.0] {
                    let r = p.minimize_f(d, tmax).unwrap();
                    if r.tau > 0.0 {
                        assert!(p.psi(r.tau) * d <= 2.0 / p.alpha() + 1e-9, "{p:?} d={d} tmax={tmax}");
                    }
                    assert!(close(r.fmin, p.kernel(d, r.tau), 1e-12));
                }
            }
        }
    }

    #[test]
    fn sup_g_examples() {
        let p = WarpProfile::exp(1.0).unwrap();
        assert!(close(p.sup_g(2.0).unwrap(), -2.0, 1e-15));
        assert!(close(p.sup_g(2.0 * (-5f64).exp()).unwrap(), 8.0, 1e-12));

        // sinh: sup(2ρ − sinh ρ) at cosh ρ = 2.
        let s = WarpProfile::sinh_pow(1.0).unwrap();
        let rho = 2f64.acosh();
        let exact = 2.0 * rho - rho.sinh();
        assert!(close(s.sup_g(1.0).unwrap(), exact, 1e-9));
        // sinh ≤ e^ρ/2, so the K = 1/2 exponential bounds with D = π apply.
        let b = exp_supremizer_bounds(0.5, std::f64::consts::PI, 1.0, 1.0).unwrap();
        let v = s.sup_g(1.0).unwrap();
        assert!(b.lower <= v && v <= b.upper);
    }

    #[test]
    fn sup_g_generic_path_matches_closed_form() {
        let closed = WarpProfile::exp(1.3).unwrap();
        let generic = WarpProfile::custom("exp", 1.3, |t| (1.3 * t).exp(), |t| 1.3 * (1.3 * t).exp()).unwrap();
        for &d in &[1e-3, 0.1, 1.0, 1.5, 4.0] {
            let a = closed.sup_g(d).unwrap();
            let b = generic.sup_g(d).unwrap();
            assert!(close(a, b, 1e-9), "d={d}: {a} vs {b}");
        }
    }

    #[test]
    fn supremizer_examples() {
        let b = exp_supremizer_bounds(1.0, 1.0, 1.0, 0.1).unwrap();
        assert!(close(b.exact, 2.0 * (20f64.ln() - 1.0), 1e-12));
        assert!(close(b.exact, 3.9915, 1e-4));
        assert!(b.lower <= b.exact && b.exact <= b.upper);

        let b = exp_supremizer_bounds(1.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(b.exact, -1.0);
        assert!(b.lower <= b.exact && b.exact <= b.upper);

        assert!(exp_supremizer_bounds(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(exp_supremizer_bounds(0.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn tail_integral_bound() {
        // ∫_r^{r+50} ψ^{-s} ≤ (1/(sα)) ψ^{-s}(r)
        for p in [
            WarpProfile::exp(1.0).unwrap(),
            WarpProfile::exp(2.5).unwrap(),
            WarpProfile::sinh_pow(1.0).unwrap(),
            WarpProfile::sinh_pow(2.0).unwrap(),
            WarpProfile::sinh_pow(0.5).unwrap(),
        ] {
            for s in [1.0, 2.0, 1.5] {
                for r in [0.1, 0.5, 1.0, 3.0, 7.0] {
                    // Normalized by ψ^{-s}(r) so the quadrature tolerance is relative.
                    let lhs = quad::integrate(|t| (p.psi(r) / p.psi(t)).powf(s), r, r + 50.0, 1e-12);
                    let rhs = 1.0 / (s * p.alpha());
                    assert!(lhs <= rhs * (1.0 + 1e-9), "{p:?} s={s} r={r}: {lhs} > {rhs}");
                }
            }
        }
    }
}
