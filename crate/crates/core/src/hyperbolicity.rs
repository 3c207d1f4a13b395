//! Gromov hyperbolicity of the filling and the visual metric on its boundary.
//!
//! Boundary points are carrier points: the boundary product of `ȳ₁, ȳ₂` is
//! `½(ψ(0)(d_Y(y₁,y₀) + d_Y(y₂,y₀)) + sup_ρ (2ρ − ψ(ρ)d_Y(y₁,y₂)))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::floyd_warshall;
use crate::norms::Norm2;
use crate::profiles::WarpProfile;
use crate::spaces::CarrierSpace;
use crate::warped::{distance, gromov_product, WarpedPoint};

/// Largest lattice for which the full four-point constant is computed.
pub const FULL_DELTA_MAX_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleSampler {
    pub t_max: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    /// Worst defect `min(⟨x,z⟩, ⟨y,z⟩) − ⟨x,y⟩` with `w = (0, y₀)`.
    pub delta_basepoint: f64,
    /// Four-point constant over every basepoint (exhaustive mode only).
    pub delta_full: Option<f64>,
    /// `2/α`, plus `3ψ(0)·diam(Y)` when `ψ(0) ≠ 0`.
    pub delta_bound_paper: f64,
    pub samples: usize,
    /// `(x, y, z, w)` attaining `delta_basepoint`.
    pub worst_witness: Option<[WarpedPoint; 4]>,
    pub norm: String,
    pub note: Option<String>,
}

impl DeltaReport {
    pub fn within_bound(&self, tol: f64) -> bool {
        self.delta_basepoint <= self.delta_bound_paper + tol
    }

    /// Annotates the report for a non-ℓ¹ combination norm.
    pub fn for_norm(mut self, norm: &Norm2) -> Self {
        self.norm = norm.label();
        if !matches!(norm, Norm2::L1) {
            self.note = Some(
                "bounded, no explicit constant known; values are for the l1 combination".into(),
            );
        }
        self
    }
}

/// `2/α + 3ψ(0)·diam(Y)` (the second term only when `ψ(0) ≠ 0`).
pub fn delta_bound(profile: &WarpProfile, space: &CarrierSpace) -> f64 {
    let base = 2.0 / profile.alpha();
    if profile.collapses_at_zero() {
        base
    } else {
        base + 3.0 * profile.psi0() * space.diameter()
    }
}

// Worst defect over the three labelings of a triple with products
// ab = ⟨a,b⟩, ac = ⟨a,c⟩, bc = ⟨b,c⟩; returns the defect and which pair is
// the "⟨x,y⟩" side (0 = ab, 1 = ac, 2 = bc).
fn triple_defect(ab: f64, ac: f64, bc: f64) -> (f64, usize) {
    let cands = [(ac.min(bc) - ab, 0), (ab.min(bc) - ac, 1), (ab.min(ac) - bc, 2)];
    cands
        .into_iter()
        .fold((f64::NEG_INFINITY, 0), |best, c| if c.0 > best.0 { c } else { best })
}

fn witness(a: WarpedPoint, b: WarpedPoint, c: WarpedPoint, w: WarpedPoint, which: usize) -> [WarpedPoint; 4] {
    match which {
        0 => [a, b, c, w],
        1 => [a, c, b, w],
        _ => [b, c, a, w],
    }
}

/// Sampled estimate of the fixed-basepoint four-point constant.
pub fn estimate_delta(
    profile: &WarpProfile,
    space: &CarrierSpace,
    sampler: TripleSampler,
    basepoint_y: usize,
) -> Result<DeltaReport> {
    if sampler.count == 0 {
        return Err(Error::domain("triple count must be ≥ 1"));
    }
    if !(sampler.t_max >= 0.0) || !sampler.t_max.is_finite() {
        return Err(Error::domain("t_max must be finite and ≥ 0"));
    }
    let w = WarpedPoint::new(0.0, basepoint_y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let n = space.len();
    let draw = |rng: &mut ChaCha8Rng| WarpedPoint {
        t: rng.gen::<f64>() * sampler.t_max,
        y: rng.gen_range(0..n),
    };
    let mut worst = 0.0f64;
    let mut witness_q = None;
    for _ in 0..sampler.count {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let ab = gromov_product(profile, space, basepoint_y, a, b)?;
        let ac = gromov_product(profile, space, basepoint_y, a, c)?;
        let bc = gromov_product(profile, space, basepoint_y, b, c)?;
        let (defect, which) = triple_defect(ab, ac, bc);
        if defect > worst || witness_q.is_none() {
            worst = worst.max(defect);
            witness_q = Some(witness(a, b, c, w, which));
        }
    }
    Ok(DeltaReport {
        delta_basepoint: worst,
        delta_full: None,
        delta_bound_paper: delta_bound(profile, space),
        samples: sampler.count,
        worst_witness: witness_q,
        norm: "l1".into(),
        note: None,
    })
}

/// Exhaustive scan over the lattice `levels × Y`. Every triple is examined
/// with basepoint `(0, y₀)`; when the lattice has at most
/// [`FULL_DELTA_MAX_POINTS`] points the full four-point constant over all
/// lattice basepoints is computed too.
pub fn exhaustive_delta(
    profile: &WarpProfile,
    space: &CarrierSpace,
    levels: &[f64],
    basepoint_y: usize,
) -> Result<DeltaReport> {
    let w = WarpedPoint::new(0.0, basepoint_y)?;
    let mut points = Vec::with_capacity(levels.len() * space.len());
    for &t in levels {
        for y in 0..space.len() {
            points.push(WarpedPoint::new(t, y)?);
        }
    }
    let m = points.len();
    if m == 0 {
        return Err(Error::domain("lattice is empty"));
    }
    let mut gp = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let g = gromov_product(profile, space, basepoint_y, points[i], points[j])?;
            gp[i * m + j] = g;
            gp[j * m + i] = g;
        }
    }
    let mut worst = 0.0f64;
    let mut witness_q = None;
    let mut samples = 0usize;
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                samples += 1;
                let (defect, which) = triple_defect(gp[i * m + j], gp[i * m + k], gp[j * m + k]);
                if defect > worst || witness_q.is_none() {
                    worst = worst.max(defect);
                    witness_q = Some(witness(points[i], points[j], points[k], w, which));
                }
            }
        }
    }
    let delta_full = if m <= FULL_DELTA_MAX_POINTS {
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let v = distance(profile, space, points[i], points[j])?;
                d[i * m + j] = v;
                d[j * m + i] = v;
            }
        }
        let mut full = 0.0f64;
        for b in 0..m {
            let prod = |i: usize, j: usize| 0.5 * (d[i * m + b] + d[j * m + b] - d[i * m + j]);
            for i in 0..m {
                for j in i..m {
                    for k in j..m {
                        full = full.max(triple_defect(prod(i, j), prod(i, k), prod(j, k)).0);
                    }
                }
            }
        }
        Some(full)
    } else {
        None
    };
    Ok(DeltaReport {
        delta_basepoint: worst,
        delta_full,
        delta_bound_paper: delta_bound(profile, space),
        samples,
        worst_witness: witness_q,
        norm: "l1".into(),
        note: None,
    })
}

/// Visual metric data on the boundary, indexed by carrier points.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryMetric {
    pub eps: f64,
    pub basepoint_y: usize,
    pub n: usize,
    /// `e^{−ε⟨·,·⟩}`, row-major.
    pub premetric: Vec<f64>,
    /// Chain closure of `premetric`, row-major.
    pub chained: Vec<f64>,
    pub delta_used: f64,
    /// Set when `eps > min(1, 1/(5δ))`: the comparison `½·premetric ≤ chained`
    /// is then not guaranteed.
    pub eps_warning: bool,
    /// Empirical `sup ψ(t)e^{−αt}` over the validation grid.
    pub growth_constant: f64,
}

impl BoundaryMetric {
    pub fn premetric_at(&self, i: usize, j: usize) -> f64 {
        self.premetric[i * self.n + j]
    }

    pub fn chained_at(&self, i: usize, j: usize) -> f64 {
        self.chained[i * self.n + j]
    }

    /// Largest and smallest `chained / premetric` over distinct pairs.
    pub fn comparison_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let r = self.chained_at(i, j) / self.premetric_at(i, j);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }

    /// `(ln d_Y, ln d_ε)` over distinct pairs, for plotting.
    pub fn plot_data(&self, space: &CarrierSpace) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n * (self.n.saturating_sub(1)) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out.push((space.dist(i, j).ln(), self.chained_at(i, j).ln()));
            }
        }
        out
    }
}

/// Default visual parameter `0.9·min(1, 1/(5δ))`.
pub fn default_eps(delta: f64) -> f64 {
    0.9 * eps_ceiling(delta)
}

fn eps_ceiling(delta: f64) -> f64 {
    if delta > 0.0 {
        (1.0f64).min(1.0 / (5.0 * delta))
    } else {
        1.0
    }
}

// Checks ψ(t) ≤ C e^{αt}. ψe^{−αt} is non-decreasing under the growth
// condition, so it is bounded iff it has levelled off by the end of the grid.
fn growth_constant(profile: &WarpProfile) -> Result<f64> {
    let a = profile.alpha();
    let ratio = |t: f64| (profile.psi(t).ln() - a * t).exp();
    let (half, end) = (20.0, 40.0);
    let c = ratio(end);
    if !c.is_finite() || c > ratio(half) * (1.0 + 1e-6) {
        return Err(Error::precondition(format!(
            "ψ(t)e^{{−αt}} is still growing at t = {end} for profile {}; no constant C with ψ ≤ Ce^{{αt}}",
            profile.label()
        )));
    }
    Ok(c.max(ratio(0.0)))
}

/// Boundary product `⟨ȳ_i, ȳ_j⟩`; `+∞` on the diagonal.
pub fn boundary_product(profile: &WarpProfile, space: &CarrierSpace, basepoint_y: usize, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Ok(f64::INFINITY);
    }
    let radial = profile.psi0() * (space.dist(i, basepoint_y) + space.dist(j, basepoint_y));
    Ok(0.5 * (radial + profile.sup_g(space.dist(i, j))?))
}

/// Premetric `e^{−ε⟨·,·⟩}` and its chain closure. `eps = None` picks
/// [`default_eps`] of the bound returned by [`delta_bound`].
pub fn boundary_metric(
    profile: &WarpProfile,
    space: &CarrierSpace,
    eps: Option<f64>,
    basepoint_y: usize,
) -> Result<BoundaryMetric> {
    if basepoint_y >= space.len() {
        return Err(Error::domain(format!("basepoint {basepoint_y} out of range")));
    }
    let delta = delta_bound(profile, space);
    let eps = eps.unwrap_or_else(|| default_eps(delta));
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!("eps must be finite and > 0, got {eps}")));
    }
    let growth = growth_constant(profile)?;
    let n = space.len();
    let mut premetric = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (-eps * boundary_product(profile, space, basepoint_y, i, j)?).exp();
            premetric[i * n + j] = v;
            premetric[j * n + i] = v;
        }
    }
    let mut chained = premetric.clone();
    floyd_warshall(n, &mut chained);
    Ok(BoundaryMetric {
        eps,
        basepoint_y,
        n,
        premetric,
        chained,
        delta_used: delta,
        eps_warning: eps > eps_ceiling(delta),
        growth_constant: growth,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SnowflakeReport {
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    pub relative_error: f64,
    #[serde(rename = "C0_empirical")]
    pub c0_empirical: f64,
    pub pairs: usize,
    pub pass: bool,
}

fn snowflake_constant(bm: &BoundaryMetric, space: &CarrierSpace, exponent: f64) -> f64 {
    let mut c0 = 1.0f64;
    for i in 0..bm.n {
        for j in (i + 1)..bm.n {
            let model = space.dist(i, j).powf(exponent);
            let v = bm.chained_at(i, j);
            c0 = c0.max(v / model).max(model / v);
        }
    }
    c0
}

/// Least-squares slope of `ln d_ε` against `ln d_Y`, compared with `ε/α`.
pub fn snowflake_check(bm: &BoundaryMetric, space: &CarrierSpace, alpha: f64) -> Result<SnowflakeReport> {
    if bm.n != space.len() {
        return Err(Error::domain("boundary metric and carrier sizes differ"));
    }
    if space.len() < 3 {
        return Err(Error::domain("snowflake fit needs at least 3 carrier points"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha must be > 0"));
    }
    let data = bm.plot_data(space);
    let k = data.len() as f64;
    let (mx, my) = data
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x / k, sy + y / k));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &data {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::domain("all carrier distances are equal; slope is undetermined"));
    }
    let slope = sxy / sxx;
    let expected = bm.eps / alpha;
    let c0 = snowflake_constant(bm, space, expected);
    let relative_error = (slope - expected).abs() / expected;
    Ok(SnowflakeReport {
        fitted_exponent: slope,
        expected_exponent: expected,
        relative_error,
        c0_empirical: c0,
        pairs: data.len(),
        pass: relative_error <= 0.02 && c0.is_finite(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasisymmetryReport {
    /// `(d_Y(x,y)/d_Y(x,z), d_ε(x,y)/d_ε(x,z))` per usable triple.
    pub eta_samples: Vec<(f64, f64)>,
    pub skipped: usize,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub exponent: f64,
    /// Samples with `ratio_out > C0²·ratio_in^{ε/α}`.
    pub bound_violations: usize,
}

/// Distortion of distance ratios by the identification `Y → ∂`.
pub fn quasisymmetry_modulus(
    bm: &BoundaryMetric,
    space: &CarrierSpace,
    alpha: f64,
    triples: &[(usize, usize, usize)],
) -> Result<QuasisymmetryReport> {
    if bm.n != space.len() {
        return Err(Error::domain("boundary metric and carrier sizes differ"));
    }
    let exponent = bm.eps / alpha;
    let c0 = snowflake_constant(bm, space, exponent);
    let mut eta_samples = Vec::with_capacity(triples.len());
    let mut skipped = 0;
    let mut violations = 0;
    for &(x, y, z) in triples {
        if x >= bm.n || y >= bm.n || z >= bm.n {
            return Err(Error::domain(format!("triple ({x},{y},{z}) out of range")));
        }
        if x == y || x == z || y == z {
            skipped += 1;
            continue;
        }
        let ratio_in = space.dist(x, y) / space.dist(x, z);
        let ratio_out = bm.chained_at(x, y) / bm.chained_at(x, z);
        if ratio_out > c0 * c0 * ratio_in.powf(exponent) * (1.0 + 1e-12) {
            violations += 1;
        }
        eta_samples.push((ratio_in, ratio_out));
    }
    Ok(QuasisymmetryReport {
        eta_samples,
        skipped,
        c0,
        exponent,
        bound_violations: violations,
    })
}

/// Seeded uniform triples of carrier indices (may contain repeats).
pub fn sample_triples(n: usize, count: usize, seed: u64) -> Vec<(usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect()
}
