//! Coordinate-increasing unitary norms on the nonnegative quadrant.
//!
//! A warped product combines the radial speed and the carrier speed of a
//! path through a plane norm. Only norms that are unitary
//! (`‖(1,0)‖ = ‖(0,1)‖ = 1`) and coordinate-increasing produce product
//! metrics; any two such norms are within a factor 2 of each other on the
//! nonnegative quadrant.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of angular samples used by [`Norm2::validate`].
pub const DEFAULT_ANGULAR_SAMPLES: usize = 256;

const TABLE_TOL: f64 = 1e-12;

/// A norm on the plane, evaluated on the nonnegative quadrant.
#[derive(Debug, Clone, PartialEq)]
pub enum Norm2 {
    L1,
    L2,
    LInf,
    /// `ℓᵖ` with `p > 1`.
    Lp(f64),
    Table(NormTable),
}

/// A norm given by its values on unit directions `(cos θ, sin θ)` for
/// `θ ∈ [0, π/2]`, extended positive-homogeneously with linear interpolation
/// in the angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTable {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

impl NormTable {
    pub fn new(angles: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if angles.len() != values.len() || angles.len() < 2 {
            return Err(Error::domain(
                "norm table needs at least two (angle, value) samples of equal length",
            ));
        }
        if (angles[0]).abs() > TABLE_TOL || (angles[angles.len() - 1] - FRAC_PI_2).abs() > TABLE_TOL {
            return Err(Error::domain("norm table angles must span [0, π/2]"));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("norm table angles must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::domain("norm table values must be finite and positive"));
        }
        Ok(NormTable { angles, values })
    }

    /// Samples `f(cos θ, sin θ)` on `samples` equally spaced angles.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(samples: usize, f: F) -> Result<Self> {
        let n = samples.max(2);
        let angles: Vec<f64> = (0..n)
            .map(|k| FRAC_PI_2 * k as f64 / (n - 1) as f64)
            .collect();
        let values = angles.iter().map(|&t| f(t.cos(), t.sin())).collect();
        NormTable::new(angles, values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| Error::FileNotFound(path.display().to_string()))?;
        let table: NormTable = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("norm table {}: {e}", path.display())))?;
        NormTable::new(table.angles, table.values)
    }

    fn value_at_angle(&self, theta: f64) -> f64 {
        let k = self.angles.partition_point(|&a| a <= theta);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.angles.len() {
            return self.values[self.values.len() - 1];
        }
        let (a0, a1) = (self.angles[k - 1], self.angles[k]);
        let s = (theta - a0) / (a1 - a0);
        self.values[k - 1] * (1.0 - s) + self.values[k] * s
    }
}

/// Outcome of sampled norm validation.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub unitary: bool,
    pub coordinate_increasing: bool,
    pub homogeneous: bool,
    pub subadditive: bool,
    pub violations: Vec<String>,
}

impl NormReport {
    pub fn pass(&self) -> bool {
        self.unitary && self.coordinate_increasing && self.homogeneous && self.subadditive
    }
}

/// Result of comparing two norms on a sample grid.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub argmax: (f64, f64),
    pub pass: bool,
}

/// Square grid of nonnegative sample pairs `(a, b)`.
#[derive(Debug, Clone, Copy)]
pub struct SampleGrid {
    pub per_axis: usize,
    pub max: f64,
}

impl SampleGrid {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.per_axis.max(1);
        let step = if n > 1 { self.max / (n - 1) as f64 } else { 0.0 };
        (0..n).flat_map(move |i| (0..n).map(move |j| (i as f64 * step, j as f64 * step)))
    }
}

impl Norm2 {
    /// Parses `"l1" | "l2" | "linf" | "lp:<p>" | "table:<path>"`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text.to_ascii_lowercase().as_str() {
            "l1" => return Ok(Norm2::L1),
            "l2" => return Ok(Norm2::L2),
            "linf" => return Ok(Norm2::LInf),
            _ => {}
        }
        if let Some(p) = text.strip_prefix("lp:") {
            let p: f64 = p
                .parse()
                .map_err(|_| Error::domain(format!("bad exponent in norm '{text}'")))?;
            return Norm2::lp(p);
        }
        if let Some(path) = text.strip_prefix("table:") {
            return Ok(Norm2::Table(NormTable::load(Path::new(path))?));
        }
        Err(Error::domain(format!(
            "unknown norm '{text}' (expected l1, l2, linf, lp:<p> or table:<path>)"
        )))
    }

    pub fn lp(p: f64) -> Result<Self> {
        if !(p > 1.0) || p.is_nan() {
            return Err(Error::domain(format!("lp norm needs p > 1, got {p}")));
        }
        Ok(if p.is_infinite() { Norm2::LInf } else { Norm2::Lp(p) })
    }

    pub fn label(&self) -> String {
        match self {
            Norm2::L1 => "l1".into(),
            Norm2::L2 => "l2".into(),
            Norm2::LInf => "linf".into(),
            Norm2::Lp(p) => format!("lp:{p}"),
            Norm2::Table(t) => format!("table[{}]", t.angles.len()),
        }
    }

    /// `‖(a, b)‖` for `a, b ≥ 0`.
    pub fn eval(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!(
                "norm arguments must be finite and nonnegative, got ({a}, {b})"
            )));
        }
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: f64, b: f64) -> f64 {
        match self {
            Norm2::L1 => a + b,
            Norm2::L2 => a.hypot(b),
            Norm2::LInf => a.max(b),
            Norm2::Lp(p) => {
                let m = a.max(b);
                if m == 0.0 {
                    return 0.0;
                }
                m * ((a / m).powf(*p) + (b / m).powf(*p)).powf(1.0 / p)
            }
            Norm2::Table(t) => {
                let r = a.hypot(b);
                if r == 0.0 {
                    return 0.0;
                }
                r * t.value_at_angle(b.atan2(a))
            }
        }
    }

    /// Sampled check of unitarity, coordinate increase, homogeneity and
    /// subadditivity on the nonnegative quadrant.
    pub fn validate(&self, angular_samples: usize) -> NormReport {
        let n = angular_samples.max(4);
        let mut violations = Vec::new();
        let tol = TABLE_TOL;

        let e1 = self.eval_unchecked(1.0, 0.0);
        let e2 = self.eval_unchecked(0.0, 1.0);
        let unitary = (e1 - 1.0).abs() <= tol && (e2 - 1.0).abs() <= tol;
        if !unitary {
            violations.push(format!("not unitary: ‖(1,0)‖ = {e1}, ‖(0,1)‖ = {e2}"));
        }

        // Monotone chains along both axes on an n×n grid of [0,1]²; transitivity
        // along the chains covers every monotone pair of grid points.
        let h = 1.0 / (n - 1) as f64;
        let mut coordinate_increasing = true;
        'outer: for i in 0..n {
            for j in 0..n {
                let (a, c) = (i as f64 * h, j as f64 * h);
                let here = self.eval_unchecked(a, c);
                let right = self.eval_unchecked(a + h, c);
                let up = self.eval_unchecked(a, c + h);
                let slack = tol * (1.0 + here);
                if right < here - slack || up < here - slack {
                    coordinate_increasing = false;
                    violations.push(format!(
                        "not coordinate-increasing near ({a:.4}, {c:.4}): {here} vs ({right}, {up})"
                    ));
                    break 'outer;
                }
            }
        }

        let dirs: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = FRAC_PI_2 * k as f64 / (n - 1) as f64;
                (t.cos(), t.sin())
            })
            .collect();

        let mut homogeneous = true;
        for &(x, y) in &dirs {
            let base = self.eval_unchecked(x, y);
            for s in [0.25, 3.0, 17.5] {
                let scaled = self.eval_unchecked(s * x, s * y);
                if (scaled - s * base).abs() > 1e-10 * s * (1.0 + base) {
                    homogeneous = false;
                    violations.push(format!("not homogeneous at ({x:.4}, {y:.4}), scale {s}"));
                    break;
                }
            }
            if !homogeneous {
                break;
            }
        }

        let mut subadditive = true;
        let stride = (n / 64).max(1);
        'sub: for (i, &(x1, y1)) in dirs.iter().enumerate().step_by(stride) {
            for &(x2, y2) in dirs.iter().skip(i).step_by(stride) {
                for s in [0.5, 1.0, 2.0] {
                    let lhs = self.eval_unchecked(x1 + s * x2, y1 + s * y2);
                    let rhs = self.eval_unchecked(x1, y1) + self.eval_unchecked(s * x2, s * y2);
                    if lhs > rhs * (1.0 + 1e-10) {
                        subadditive = false;
                        violations.push(format!(
                            "not subadditive for ({x1:.4},{y1:.4}) + {s}·({x2:.4},{y2:.4})"
                        ));
                        break 'sub;
                    }
                }
            }
        }

        NormReport {
            unitary,
            coordinate_increasing,
            homogeneous,
            subadditive,
            violations,
        }
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        let report = self.validate(DEFAULT_ANGULAR_SAMPLES);
        if report.pass() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "norm {} is not a unitary coordinate-increasing norm: {}",
                self.label(),
                report.violations.join("; ")
            )))
        }
    }
}

/// Checks `½‖·‖′ ≤ ‖·‖ ≤ 2‖·‖′` for `‖·‖ = n1`, `‖·‖′ = n2` on a sample grid.
pub fn comparison_factor_check(n1: &Norm2, n2: &Norm2, grid: SampleGrid) -> Result<ComparisonReport> {
    n1.require_valid()?;
    n2.require_valid()?;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut argmax = (0.0, 0.0);
    let mut pass = true;
    for (a, b) in grid.points() {
        let v1 = n1.eval_unchecked(a, b);
        let v2 = n2.eval_unchecked(a, b);
        if v1 > 2.0 * v2 * (1.0 + 1e-12) || v1 < 0.5 * v2 * (1.0 - 1e-12) {
            pass = false;
        }
        if v2 == 0.0 {
            continue;
        }
        let r = v1 / v2;
        if r > max_ratio {
            max_ratio = r;
            argmax = (a, b);
        }
        min_ratio = min_ratio.min(r);
    }
    if !max_ratio.is_finite() {
        max_ratio = 1.0;
        min_ratio = 1.0;
    }
    Ok(ComparisonReport {
        max_ratio,
        min_ratio,
        argmax,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn not_coordinate_increasing() -> Norm2 {
        // ‖(a,b)‖ = ¼|a+b| + ¾|a−b|: unitary, but ‖(1,1)‖ = ½.
        Norm2::Table(
            NormTable::from_fn(257, |x, y| 0.25 * (x + y).abs() + 0.75 * (x - y).abs()).unwrap(),
        )
    }

    #[test]
    fn closed_forms() {
        assert_eq!(Norm2::L1.eval(3.0, 4.0).unwrap(), 7.0);
        assert_eq!(Norm2::L2.eval(3.0, 4.0).unwrap(), 5.0);
        assert_eq!(Norm2::LInf.eval(3.0, 4.0).unwrap(), 4.0);
        let l3 = Norm2::lp(3.0).unwrap();
        assert!((l3.eval(3.0, 4.0).unwrap() - 91f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn unit_axes_have_norm_one() {
        let table = Norm2::Table(NormTable::from_fn(64, |x, y| x.hypot(y)).unwrap());
        for n in [Norm2::L1, Norm2::L2, Norm2::LInf, Norm2::lp(1.5).unwrap(), table] {
            assert!((n.eval(1.0, 0.0).unwrap() - 1.0).abs() <= 1e-12, "{}", n.label());
            assert!((n.eval(0.0, 1.0).unwrap() - 1.0).abs() <= 1e-12, "{}", n.label());
        }
    }

    #[test]
    fn negative_input_is_domain_error() {
        assert!(matches!(Norm2::L1.eval(-1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(Norm2::L2.eval(0.0, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn builtins_validate() {
        for n in [Norm2::L1, Norm2::L2, Norm2::LInf, Norm2::lp(4.0).unwrap()] {
            let r = n.validate(DEFAULT_ANGULAR_SAMPLES);
            assert!(r.pass(), "{}: {:?}", n.label(), r.violations);
        }
    }

    #[test]
    fn counterexample_table_is_rejected() {
        let n = not_coordinate_increasing();
        assert!((n.eval(1.0, 1.0).unwrap() - 0.5).abs() < 1e-3);
        let r = n.validate(DEFAULT_ANGULAR_SAMPLES);
        assert!(r.unitary);
        assert!(!r.coordinate_increasing);
        assert!(matches!(
            comparison_factor_check(&n, &Norm2::L1, SampleGrid { per_axis: 5, max: 1.0 }),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn l1_vs_l2_grid() {
        let r = comparison_factor_check(&Norm2::L1, &Norm2::L2, SampleGrid { per_axis: 100, max: 10.0 })
            .unwrap();
        assert!(r.pass);
        assert!(r.max_ratio <= 2.0);
        assert!((r.max_ratio - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.min_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_comparison_is_exactly_one() {
        let r = comparison_factor_check(&Norm2::L1, &Norm2::L1, SampleGrid { per_axis: 20, max: 3.0 })
            .unwrap();
        assert_eq!(r.max_ratio, 1.0);
        assert_eq!(r.min_ratio, 1.0);
    }

    #[test]
    fn l1_vs_linf_attains_two_on_diagonal() {
        let r = comparison_factor_check(&Norm2::L1, &Norm2::LInf, SampleGrid { per_axis: 2, max: 1.0 })
            .unwrap();
        assert_eq!(r.max_ratio, 2.0);
        assert_eq!(r.argmax, (1.0, 1.0));
        assert!(r.pass);
    }

    #[test]
    fn parse_strings() {
        assert_eq!(Norm2::parse("l1").unwrap(), Norm2::L1);
        assert_eq!(Norm2::parse("LINF").unwrap(), Norm2::LInf);
        assert_eq!(Norm2::parse("lp:2.5").unwrap(), Norm2::Lp(2.5));
        assert!(Norm2::parse("lp:1").is_err());
        assert!(Norm2::parse("table:/nonexistent/x.json").is_err());
        assert!(Norm2::parse("l7").is_err());
    }
}
