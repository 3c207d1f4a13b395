//! The ℓ¹ warped product `[0, ∞) ×_ψ Y`.
//!
//! Distances, Gromov products and ⊔-curves all come from
//! [`WarpProfile::minimize_f`]. Other plane norms are only served by the
//! factor-2 enclosure [`distance_bounds_other_norm`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{Norm2, DEFAULT_ANGULAR_SAMPLES};
use crate::profiles::WarpProfile;
use crate::quad;
use crate::spaces::CarrierSpace;

/// A point `(t, y)` of the filling; `y` indexes the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedPoint {
    pub t: f64,
    pub y: usize,
}

impl WarpedPoint {
    pub fn new(t: f64, y: usize) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("radial coordinate must be finite and ≥ 0, got {t}")));
        }
        Ok(WarpedPoint { t, y })
    }

    /// Equality in the quotient: when `ψ(0) = 0` every point at `t = 0` is
    /// the apex.
    pub fn equivalent(&self, other: &WarpedPoint, profile: &WarpProfile) -> bool {
        if self.t == 0.0 && other.t == 0.0 && profile.collapses_at_zero() {
            return true;
        }
        self == other
    }

    fn check(&self, space: &CarrierSpace) -> Result<()> {
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::domain(format!("radial coordinate must be finite and ≥ 0, got {}", self.t)));
        }
        if self.y >= space.len() {
            return Err(Error::domain(format!(
                "carrier index {} out of range for {} points",
                self.y,
                space.len()
            )));
        }
        Ok(())
    }
}

/// A ⊔-curve: down from `p1` to level `τ`, across along a carrier trace of
/// length `horizontal_y_length`, up to `p2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UCurve {
    pub endpoints: (WarpedPoint, WarpedPoint),
    pub tau: f64,
    pub horizontal_y_length: f64,
    pub descending: f64,
    pub horizontal: f64,
    pub ascending: f64,
    pub total: f64,
}

/// Warped distance under the ℓ¹ combination.
pub fn distance(profile: &WarpProfile, space: &CarrierSpace, p1: WarpedPoint, p2: WarpedPoint) -> Result<f64> {
    p1.check(space)?;
    p2.check(space)?;
    let d = space.dist(p1.y, p2.y);
    let m = profile.minimize_f(d, p1.t.min(p2.t))?;
    Ok((p1.t + p2.t + m.fmin).max(0.0))
}

/// Distances for a batch of pairs, in input order.
pub fn distances(
    profile: &WarpProfile,
    space: &CarrierSpace,
    pairs: &[(WarpedPoint, WarpedPoint)],
) -> Result<Vec<f64>> {
    pairs.iter().map(|&(a, b)| distance(profile, space, a, b)).collect()
}

/// Gromov product of `p1`, `p2` based at the boundary-side point `(0, y₀)`.
pub fn gromov_product(
    profile: &WarpProfile,
    space: &CarrierSpace,
    basepoint_y: usize,
    p1: WarpedPoint,
    p2: WarpedPoint,
) -> Result<f64> {
    p1.check(space)?;
    p2.check(space)?;
    WarpedPoint::new(0.0, basepoint_y)?.check(space)?;
    let radial = profile.psi0() * (space.dist(p1.y, basepoint_y) + space.dist(p2.y, basepoint_y));
    let m = profile.minimize_f(space.dist(p1.y, p2.y), p1.t.min(p2.t))?;
    Ok((0.5 * (radial - m.fmin)).max(0.0))
}

/// Guaranteed enclosure of the warped distance under `norm` given the ℓ¹ value.
pub fn distance_bounds_other_norm(norm: &Norm2, d_l1: f64) -> Result<(f64, f64)> {
    if !(d_l1 >= 0.0) || !d_l1.is_finite() {
        return Err(Error::domain(format!("distance must be finite and ≥ 0, got {d_l1}")));
    }
    let report = norm.validate(DEFAULT_ANGULAR_SAMPLES);
    if !report.pass() {
        return Err(Error::precondition(format!(
            "norm {} is not a unitary coordinate-increasing norm: {}",
            norm.label(),
            report.violations.join("; ")
        )));
    }
    Ok(match norm {
        Norm2::L1 => (d_l1, d_l1),
        _ => (0.5 * d_l1, d_l1),
    })
}

pub fn build_ucurve(
    profile: &WarpProfile,
    space: &CarrierSpace,
    p1: WarpedPoint,
    p2: WarpedPoint,
    y_path_length: f64,
) -> Result<UCurve> {
    p1.check(space)?;
    p2.check(space)?;
    let dy = space.dist(p1.y, p2.y);
    if !(y_path_length >= dy - 1e-12 * dy.max(1.0)) || !y_path_length.is_finite() {
        return Err(Error::precondition(format!(
            "horizontal trace length {y_path_length} is shorter than d_Y = {dy}"
        )));
    }
    let m = profile.minimize_f(y_path_length, p1.t.min(p2.t))?;
    let tau = m.tau;
    let descending = p1.t - tau;
    let ascending = p2.t - tau;
    let horizontal = if y_path_length == 0.0 { 0.0 } else { profile.psi(tau) * y_path_length };
    Ok(UCurve {
        endpoints: (p1, p2),
        tau,
        horizontal_y_length: y_path_length,
        descending,
        horizontal,
        ascending,
        total: descending + horizontal + ascending,
    })
}

/// One row of a mixed-segment speed table, sampled at uniform parameter
/// values over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedRow {
    pub t: f64,
    /// Carrier point nearest the trace at this parameter.
    pub y: usize,
    /// `|t′(s)|`.
    pub t_speed: f64,
    /// Metric speed `|γ_Y′(s)|` of the carrier trace.
    pub y_speed: f64,
}

/// A path given by samples; segment `i` joins `points[i]` and `points[i + 1]`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SampledPath {
    pub points: Vec<WarpedPoint>,
    /// Optional speed table per segment; required when both coordinates move.
    pub tables: Vec<Option<Vec<SpeedRow>>>,
}

enum Segment<'a> {
    Still,
    Vertical,
    Horizontal,
    Mixed(&'a [SpeedRow]),
}

impl SampledPath {
    pub fn new(points: Vec<WarpedPoint>) -> Self {
        let tables = vec![None; points.len().saturating_sub(1)];
        SampledPath { points, tables }
    }

    /// The three-segment ⊔-curve through level `tau`.
    pub fn u_curve(p1: WarpedPoint, p2: WarpedPoint, tau: f64) -> Self {
        SampledPath::new(vec![
            p1,
            WarpedPoint { t: tau, y: p1.y },
            WarpedPoint { t: tau, y: p2.y },
            p2,
        ])
    }

    pub fn with_mixed(mut self, segment: usize, rows: Vec<SpeedRow>) -> Result<Self> {
        if segment >= self.tables.len() {
            return Err(Error::domain(format!("path has no segment {segment}")));
        }
        if rows.len() < 2 {
            return Err(Error::domain("a speed table needs at least two rows"));
        }
        let (a, b) = (self.points[segment], self.points[segment + 1]);
        let (first, last) = (rows[0], rows[rows.len() - 1]);
        if first.t != a.t || first.y != a.y || last.t != b.t || last.y != b.y {
            return Err(Error::domain(format!(
                "speed table for segment {segment} does not start and end at its sample points"
            )));
        }
        self.tables[segment] = Some(rows);
        Ok(self)
    }

    fn segment(&self, i: usize) -> Result<Segment<'_>> {
        if let Some(rows) = &self.tables[i] {
            return Ok(Segment::Mixed(rows));
        }
        let (a, b) = (self.points[i], self.points[i + 1]);
        Ok(match (a.t == b.t, a.y == b.y) {
            (true, true) => Segment::Still,
            (false, true) => Segment::Vertical,
            (true, false) => Segment::Horizontal,
            (false, false) => {
                return Err(Error::domain(format!(
                    "segment {i} moves in both coordinates but carries no speed table"
                )))
            }
        })
    }

    fn check(&self, space: &CarrierSpace) -> Result<()> {
        if self.tables.len() + 1 != self.points.len().max(1) {
            return Err(Error::domain("one table slot per segment is required"));
        }
        for p in &self.points {
            p.check(space)?;
        }
        for rows in self.tables.iter().flatten() {
            for r in rows {
                WarpedPoint { t: r.t, y: r.y }.check(space)?;
                if !(r.t_speed >= 0.0) || !(r.y_speed >= 0.0) {
                    return Err(Error::domain("speeds in a table must be ≥ 0"));
                }
            }
        }
        Ok(())
    }
}

fn interp(rows: &[SpeedRow], s: f64, field: impl Fn(&SpeedRow) -> f64) -> f64 {
    let x = s.clamp(0.0, 1.0) * (rows.len() - 1) as f64;
    let i = (x.floor() as usize).min(rows.len() - 2);
    let w = x - i as f64;
    (1.0 - w) * field(&rows[i]) + w * field(&rows[i + 1])
}

/// Warped length of a sampled path: vertical segments contribute `|Δt|`,
/// horizontal ones `ψ(t)·d_Y`, mixed ones `∫ |t′| + ψ(t)|γ_Y′|` by
/// composite Simpson with `quadrature_n` panels.
pub fn polyline_length(
    profile: &WarpProfile,
    space: &CarrierSpace,
    path: &SampledPath,
    quadrature_n: usize,
) -> Result<f64> {
    path.check(space)?;
    let mut total = 0.0;
    for i in 0..path.tables.len() {
        let (a, b) = (path.points[i], path.points[i + 1]);
        total += match path.segment(i)? {
            Segment::Still => 0.0,
            Segment::Vertical => (b.t - a.t).abs(),
            Segment::Horizontal => {
                let d = space.dist(a.y, b.y);
                if d == 0.0 {
                    0.0
                } else {
                    profile.psi(a.t) * d
                }
            }
            Segment::Mixed(rows) => quad::simpson(
                |s| {
                    let t = interp(rows, s, |r| r.t);
                    interp(rows, s, |r| r.t_speed) + profile.psi(t) * interp(rows, s, |r| r.y_speed)
                },
                0.0,
                1.0,
                quadrature_n,
            ),
        };
    }
    Ok(total)
}

/// Sum of warped distances over the `2^refinement`-fold dyadic refinement of
/// every segment. Partitions are nested, so the sum is non-decreasing in
/// `refinement`.
pub fn chordal_length(
    profile: &WarpProfile,
    space: &CarrierSpace,
    path: &SampledPath,
    refinement: u32,
) -> Result<f64> {
    path.check(space)?;
    let pieces = 1usize << refinement.min(30);
    let mut total = 0.0;
    for i in 0..path.tables.len() {
        let (a, b) = (path.points[i], path.points[i + 1]);
        let nodes: Vec<WarpedPoint> = match path.segment(i)? {
            Segment::Still => continue,
            Segment::Vertical => (0..=pieces)
                .map(|k| WarpedPoint {
                    t: a.t + (b.t - a.t) * k as f64 / pieces as f64,
                    y: a.y,
                })
                .collect(),
            Segment::Horizontal => {
                let chain = space.geodesic_chain(a.y, b.y);
                let mut arc = vec![0.0];
                for w in chain.windows(2) {
                    arc.push(arc[arc.len() - 1] + space.dist(w[0], w[1]));
                }
                let length = arc[arc.len() - 1];
                (0..=pieces)
                    .map(|k| {
                        let s = length * k as f64 / pieces as f64;
                        // Last chain vertex at or before arclength s.
                        let j = if k == pieces {
                            chain.len() - 1
                        } else {
                            arc.partition_point(|&x| x <= s * (1.0 + 1e-12)).saturating_sub(1)
                        };
                        WarpedPoint { t: a.t, y: chain[j] }
                    })
                    .collect()
            }
            Segment::Mixed(rows) => {
                let last = rows.len() - 1;
                (0..=pieces)
                    .map(|k| {
                        let j = (k * last) / pieces;
                        WarpedPoint { t: rows[j].t, y: rows[j].y }
                    })
                    .collect()
            }
        };
        for w in nodes.windows(2) {
            if w[0] != w[1] {
                total += distance(profile, space, w[0], w[1])?;
            }
        }
    }
    Ok(total)
}
