//! Discrete (p,p)-Sobolev–Poincaré verification.
//!
//! A [`FillingGraph`] discretizes `[0, t_max) × Y` into levels `t_i = i·dt`.
//! Radial edges have length `dt`, horizontal edges at level `t_i` have length
//! `ψ(t_i)·d_Y` along carrier adjacency, and node `(i, j)` carries the measure
//! `w̄_i·μ_Y(j)` where `w̄_i` is the weight integrated over `[t_i, t_i + dt)`.
//! Upper gradients are edge difference quotients aggregated to nodes by the
//! maximum over incident edges.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Csr;
use crate::profiles::WarpProfile;
use crate::quad;
use crate::spaces::CarrierSpace;

pub const DEFAULT_MAX_NODES: usize = 2_000_000;
pub const MAX_NODES_ENV: &str = "WARPFILL_MAX_NODES";
pub const HALFLINE_SLACK: f64 = 0.05;
pub const FILLING_SLACK: f64 = 0.1;

const WEIGHT_TOL: f64 = 1e-12;

/// Node cap from `WARPFILL_MAX_NODES`, or the default.
pub fn max_nodes_from_env() -> usize {
    std::env::var(MAX_NODES_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_NODES)
}

/// Radial density of the measure: `e^{βt}` or `sinh^β(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Exp,
    Sinh,
}

impl WeightKind {
    pub fn density(self, beta: f64, t: f64) -> f64 {
        match self {
            WeightKind::Exp => (beta * t).exp(),
            WeightKind::Sinh => t.sinh().powf(beta),
        }
    }

    /// `∫_a^b` of the density.
    pub fn integral(self, beta: f64, a: f64, b: f64) -> f64 {
        match self {
            WeightKind::Exp => ((beta * b).exp() - (beta * a).exp()) / beta,
            WeightKind::Sinh => quad::integrate(|t| self.density(beta, t), a, b, WEIGHT_TOL),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            WeightKind::Exp => "exp",
            WeightKind::Sinh => "sinh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Radial,
    Horizontal,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FillingEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub kind: EdgeKind,
    /// Level of the edge (lower level for radial edges).
    pub level: usize,
}

#[derive(Debug, Clone)]
pub struct FillingGraph {
    carrier: CarrierSpace,
    profile: WarpProfile,
    weight_kind: WeightKind,
    beta: f64,
    dt: f64,
    levels: usize,
    apex: bool,
    cell_weight: Vec<f64>,
    measure: Vec<f64>,
    edges: Vec<FillingEdge>,
    csr: Csr,
}

/// Builds the graph model of the filling, refusing to exceed `max_nodes`
/// from the environment.
pub fn build_filling_graph(
    carrier: &CarrierSpace,
    profile: &WarpProfile,
    weight_kind: WeightKind,
    beta: f64,
    t_max: f64,
    dt: f64,
) -> Result<FillingGraph> {
    FillingGraph::build(carrier, profile, weight_kind, beta, t_max, dt, max_nodes_from_env())
}

impl FillingGraph {
    pub fn build(
        carrier: &CarrierSpace,
        profile: &WarpProfile,
        weight_kind: WeightKind,
        beta: f64,
        t_max: f64,
        dt: f64,
        max_nodes: usize,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::domain(format!("dt must be finite and > 0, got {dt}")));
        }
        if !(t_max >= dt) || !t_max.is_finite() {
            return Err(Error::domain(format!("t_max must be finite and ≥ dt, got {t_max}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("beta must be finite and > 0, got {beta}")));
        }
        let levels = (t_max / dt).round().max(1.0) as usize;
        let n = carrier.len();
        let apex = profile.collapses_at_zero();
        let count = if apex { (levels - 1) * n + 1 } else { levels * n };
        if count > max_nodes {
            return Err(Error::ResourceCap {
                what: "filling graph nodes".into(),
                requested: count,
                cap: max_nodes,
            });
        }
        let cell_weight: Vec<f64> = (0..levels)
            .map(|i| weight_kind.integral(beta, i as f64 * dt, (i + 1) as f64 * dt))
            .collect();
        let mut g = FillingGraph {
            carrier: carrier.clone(),
            profile: profile.clone(),
            weight_kind,
            beta,
            dt,
            levels,
            apex,
            cell_weight,
            measure: vec![0.0; count],
            edges: Vec::new(),
            csr: Csr::from_edges(0, &[]),
        };
        let mu = carrier.measure();
        for i in 0..levels {
            for (j, &m) in mu.iter().enumerate() {
                let v = g.node(i, j);
                g.measure[v] += g.cell_weight[i] * m;
            }
        }
        let mut edges = Vec::with_capacity(count * 2);
        for i in 0..levels {
            if i + 1 < levels {
                for j in 0..n {
                    edges.push(FillingEdge {
                        a: g.node(i, j),
                        b: g.node(i + 1, j),
                        length: dt,
                        kind: EdgeKind::Radial,
                        level: i,
                    });
                }
            }
            let scale = profile.psi(i as f64 * dt);
            if scale > 0.0 && !(apex && i == 0) {
                for (j, k) in carrier.adjacent_pairs() {
                    edges.push(FillingEdge {
                        a: g.node(i, j),
                        b: g.node(i, k),
                        length: scale * carrier.dist(j, k),
                        kind: EdgeKind::Horizontal,
                        level: i,
                    });
                }
            }
        }
        let triples: Vec<(usize, usize, f64)> = edges.iter().map(|e| (e.a, e.b, e.length)).collect();
        g.csr = Csr::from_edges(count, &triples);
        g.edges = edges;
        Ok(g)
    }

    /// The weighted half-line `[0, t_max)` with density `weight_kind`.
    pub fn halfline(weight_kind: WeightKind, exponent: f64, t_max: f64, dt: f64) -> Result<Self> {
        let profile = WarpProfile::exp(1.0)?;
        FillingGraph::build(
            &CarrierSpace::point(),
            &profile,
            weight_kind,
            exponent,
            t_max,
            dt,
            max_nodes_from_env(),
        )
    }

    /// Node index of `(level, carrier point)`; all level-0 points share the
    /// apex when it is present.
    #[inline]
    pub fn node(&self, level: usize, j: usize) -> usize {
        let n = self.carrier.len();
        if self.apex {
            if level == 0 {
                0
            } else {
                1 + (level - 1) * n + j
            }
        } else {
            level * n + j
        }
    }

    /// `(level, carrier point)`; the apex reports carrier point 0.
    pub fn coords(&self, node: usize) -> (usize, usize) {
        let n = self.carrier.len();
        if self.apex {
            if node == 0 {
                (0, 0)
            } else {
                (1 + (node - 1) / n, (node - 1) % n)
            }
        } else {
            (node / n, node % n)
        }
    }

    pub fn node_count(&self) -> usize {
        self.measure.len()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn level_t(&self, level: usize) -> f64 {
        level as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn has_apex(&self) -> bool {
        self.apex
    }

    pub fn weight_kind(&self) -> WeightKind {
        self.weight_kind
    }

    pub fn profile(&self) -> &WarpProfile {
        &self.profile
    }

    pub fn carrier(&self) -> &CarrierSpace {
        &self.carrier
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weight
    }

    pub fn edges(&self) -> &[FillingEdge] {
        &self.edges
    }

    /// Shortest-path distance between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.csr.distance(a, b)
    }

    pub fn is_connected(&self) -> bool {
        self.csr.component_of(0).iter().all(|&r| r)
    }
}

/// Values per node of a [`FillingGraph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteFunction {
    pub name: String,
    pub values: Vec<f64>,
}

impl DiscreteFunction {
    /// Samples `f(t, y)` at every node; the apex is sampled at `(0, 0)`.
    pub fn from_fn<F: Fn(f64, usize) -> f64>(graph: &FillingGraph, name: impl Into<String>, f: F) -> Self {
        let values = (0..graph.node_count())
            .map(|v| {
                let (i, j) = graph.coords(v);
                f(graph.level_t(i), j)
            })
            .collect();
        DiscreteFunction {
            name: name.into(),
            values,
        }
    }

    fn check(&self, graph: &FillingGraph) -> Result<()> {
        if self.values.len() != graph.node_count() {
            return Err(Error::domain(format!(
                "function '{}' has {} values for {} nodes",
                self.name,
                self.values.len(),
                graph.node_count()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("function '{}' is not finite at node {i}", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct UpperGradient {
    /// `|u(a) − u(b)| / length` per edge, in [`FillingGraph::edges`] order.
    pub edge: Vec<f64>,
    /// Maximum over incident edges.
    pub node: Vec<f64>,
}

pub fn discrete_upper_gradient(graph: &FillingGraph, u: &DiscreteFunction) -> Result<UpperGradient> {
    u.check(graph)?;
    let mut node = vec![0.0f64; graph.node_count()];
    let edge = graph
        .edges
        .iter()
        .map(|e| {
            let q = (u.values[e.a] - u.values[e.b]).abs() / e.length;
            node[e.a] = node[e.a].max(q);
            node[e.b] = node[e.b].max(q);
            q
        })
        .collect();
    Ok(UpperGradient { edge, node })
}

#[derive(Debug, Clone, Serialize)]
pub struct SPReport {
    pub name: String,
    pub p: f64,
    pub c_star: f64,
    pub lp_u_minus_c: f64,
    pub lp_g: f64,
    pub ratio: f64,
    pub paper_constant: f64,
    pub constant_source: String,
    pub slack: f64,
    pub pass: bool,
    /// Set when `g` is not resolved in `L^p` at this truncation.
    pub flag: Option<String>,
}

/// `Σ m_v |x_v|^p`.
fn lp_pow(values: impl Iterator<Item = f64>, measure: &[f64], p: f64) -> f64 {
    values
        .zip(measure)
        .map(|(x, m)| {
            let a = x.abs();
            if a == 0.0 {
                0.0
            } else if p == 1.0 {
                a * m
            } else if p == 2.0 {
                a * a * m
            } else {
                a.powf(p) * m
            }
        })
        .sum()
}

// Order-preserving map from f64 to i64 (for bisection on representable values).
fn ordered_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        i64::MIN - bits
    } else {
        bits
    }
}

fn from_key(k: i64) -> f64 {
    let bits = if k < 0 { i64::MIN - k } else { k };
    f64::from_bits(bits as u64)
}

/// A minimizer of `c ↦ Σ m_v |u_v − c|^p`.
///
/// `p = 1` uses the weighted median and `p = 2` the weighted mean. Otherwise
/// the root of the increasing derivative is bisected over representable
/// doubles, which keeps full relative precision even when the mass is
/// concentrated where `u` is tiny.
pub fn optimal_constant(values: &[f64], measure: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if p == 1.0 {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let half = 0.5 * measure.iter().sum::<f64>();
        let mut acc = 0.0;
        for &i in &order {
            acc += measure[i];
            if acc >= half {
                return values[i];
            }
        }
        return values[order[order.len() - 1]];
    }
    if p == 2.0 {
        let total: f64 = measure.iter().sum();
        let weighted: f64 = values.iter().zip(measure).map(|(u, m)| u * m).sum();
        return weighted / total;
    }
    let slope = |c: f64| -> f64 {
        values
            .iter()
            .zip(measure)
            .map(|(&u, &m)| {
                let d = c - u;
                if d == 0.0 {
                    0.0
                } else {
                    d.signum() * d.abs().powf(p - 1.0) * m
                }
            })
            .sum()
    };
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut a, mut b) = (ordered_key(lo), ordered_key(hi));
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if slope(from_key(mid)) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (ca, cb) = (from_key(a), from_key(b));
    let obj = |c: f64| lp_pow(values.iter().map(|u| u - c), measure, p);
    if obj(ca) < obj(cb) {
        ca
    } else {
        cb
    }
}

/// `(c*, ‖u − c*‖_p)` for node values and measures.
pub fn optimal_deviation(values: &[f64], measure: &[f64], p: f64) -> (f64, f64) {
    let c = optimal_constant(values, measure, p);
    let dev = lp_pow(values.iter().map(|u| u - c), measure, p).powf(1.0 / p);
    (c, dev)
}

/// Poincaré ratio `inf_c ‖u − c‖_p / ‖g‖_p` against `paper_constant·(1 + slack)`.
pub fn optimal_constant_and_ratio(
    graph: &FillingGraph,
    u: &DiscreteFunction,
    p: f64,
    paper_constant: f64,
    slack: f64,
) -> Result<SPReport> {
    check_p(p)?;
    let g = discrete_upper_gradient(graph, u)?;
    let mut report = sp_report(&u.name, &u.values, &g.node, graph.measure(), p, paper_constant, slack);
    report.flag = truncation_flag(graph, &g.node, p);
    Ok(report)
}

fn sp_report(name: &str, u: &[f64], g: &[f64], measure: &[f64], p: f64, paper_constant: f64, slack: f64) -> SPReport {
    let (c_star, lp_u_minus_c) = optimal_deviation(u, measure, p);
    let lp_g = lp_pow(g.iter().copied(), measure, p).powf(1.0 / p);
    let ratio = if lp_g > 0.0 { lp_u_minus_c / lp_g } else { 0.0 };
    SPReport {
        name: name.to_string(),
        p,
        c_star,
        lp_u_minus_c,
        lp_g,
        ratio,
        paper_constant,
        constant_source: String::new(),
        slack,
        pass: ratio.is_finite() && ratio <= paper_constant * (1.0 + slack),
        flag: None,
    }
}

// Flags g whose L^p mass sits in the outermost tenth of the levels.
fn truncation_flag(graph: &FillingGraph, g: &[f64], p: f64) -> Option<String> {
    let cut = graph.levels() - graph.levels() / 10;
    let mut total = 0.0;
    let mut outer = 0.0;
    for (v, (&gv, &m)) in g.iter().zip(graph.measure()).enumerate() {
        let x = gv.powf(p) * m;
        total += x;
        if graph.coords(v).0 >= cut {
            outer += x;
        }
    }
    if !total.is_finite() {
        return Some("‖g‖_p is not finite on this grid".into());
    }
    (total > 0.0 && outer > 0.05 * total).then(|| {
        format!(
            "{:.1}% of ‖g‖_p^p lies in the outer tenth of the levels; g may not be in L^p",
            100.0 * outer / total
        )
    })
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("p must be finite and ≥ 1, got {p}")))
    }
}

/// `((p(p−1)^{p−1} + p^p)/α^p)^{1/p}`: the constant for the half-line with
/// density `ψ` satisfying `ψ ≤ α⁻¹ψ′`.
pub fn halfline_constant(alpha: f64, p: f64) -> f64 {
    ((p * (p - 1.0).powf(p - 1.0) + p.powf(p)) / alpha.powf(p)).powf(1.0 / p)
}

/// `((2/β)((p−1)/β)^{p−1})^{1/p}`: the sharper constant for density `e^{βt}`.
pub fn exp_weight_constant(beta: f64, p: f64) -> f64 {
    ((2.0 / beta) * ((p - 1.0) / beta).powf(p - 1.0)).powf(1.0 / p)
}

/// A function of `t` on the half-line.
#[derive(Clone)]
pub struct RadialFn {
    pub name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl RadialFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialFn {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl std::fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RadialFn({})", self.name)
    }
}

/// Twelve test functions whose `u − lim u` decays at rate ≥ 3 or has compact
/// support, so they lie in `D^{1,p}` for every shipped weight.
pub fn builtin_halfline_family() -> Vec<RadialFn> {
    vec![
        RadialFn::new("exp(-3t)", |t| (-3.0 * t).exp()),
        RadialFn::new("exp(-4t)cos(5t)", |t| (-4.0 * t).exp() * (5.0 * t).cos()),
        RadialFn::new("min(t,1)", |t| t.min(1.0)),
        RadialFn::new("ramp", |t| ((t - 1.0) / 2.0).clamp(0.0, 1.0)),
        RadialFn::new("tent", |t| (1.0 - (t - 2.0).abs()).max(0.0)),
        RadialFn::new("tanh(3t)", |t| (3.0 * t).tanh()),
        RadialFn::new("gaussian", |t| (-4.0 * (t - 1.5) * (t - 1.5)).exp()),
        RadialFn::new("t*exp(-3t)", |t| t * (-3.0 * t).exp()),
        RadialFn::new("logistic", |t| 1.0 / (1.0 + (4.0 * (t - 2.0)).exp())),
        RadialFn::new("sin(3t)exp(-3t)", |t| (3.0 * t).sin() * (-3.0 * t).exp()),
        RadialFn::new("two ramps", |t| t.clamp(0.0, 1.0) - 2.0 * (t - 2.0).clamp(0.0, 1.0)),
        RadialFn::new("exp(-5t)+exp(-3t)/2", |t| (-5.0 * t).exp() + 0.5 * (-3.0 * t).exp()),
    ]
}

/// Verifies the weighted half-line inequality for each function. The
/// constant is the sharp exponential-weight one for `WeightKind::Exp` and
/// the general one (with `α = exponent`) otherwise.
pub fn halfline_verifier(
    weight_kind: WeightKind,
    exponent: f64,
    p: f64,
    family: &[RadialFn],
    dt: f64,
    t_max: f64,
    slack: f64,
) -> Result<Vec<SPReport>> {
    check_p(p)?;
    if family.is_empty() {
        return Err(Error::domain("test family is empty"));
    }
    let graph = FillingGraph::halfline(weight_kind, exponent, t_max, dt)?;
    let (constant, source) = match weight_kind {
        WeightKind::Exp => (
            exp_weight_constant(exponent, p),
            format!("((2/β)((p−1)/β)^(p−1))^(1/p), β = {exponent}"),
        ),
        WeightKind::Sinh => (
            halfline_constant(exponent, p),
            format!("((p(p−1)^(p−1) + p^p)/α^p)^(1/p), α = {exponent}"),
        ),
    };
    family
        .iter()
        .map(|f| {
            let u = DiscreteFunction::from_fn(&graph, f.name.clone(), |t, _| f.eval(t));
            let mut r = optimal_constant_and_ratio(&graph, &u, p, constant, slack)?;
            r.constant_source = source.clone();
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// `((2/β)((p−1)/β)^{p−1})^{1/p}`.
    BetaP,
    /// `((p(p−1)^{p−1} + p^p)/β^p)^{1/p}`.
    HalfLine,
}

impl ConstantMode {
    pub fn constant(self, beta: f64, p: f64) -> (f64, String) {
        match self {
            ConstantMode::BetaP => (
                exp_weight_constant(beta, p),
                format!("((2/β)((p−1)/β)^(p−1))^(1/p), β = {beta}"),
            ),
            ConstantMode::HalfLine => (
                halfline_constant(beta, p),
                format!("((p(p−1)^(p−1) + p^p)/β^p)^(1/p), β = {beta}"),
            ),
        }
    }
}

/// Built-in test functions on a filling: radial, separable and oscillatory,
/// all decaying radially at rate `β/p + 1`.
pub fn builtin_filling_family(graph: &FillingGraph, p: f64) -> Vec<DiscreteFunction> {
    let y = graph.carrier();
    let rate = graph.beta() / p + 1.0;
    let diam = y.diameter();
    let bump = |j: usize| {
        if diam > 0.0 {
            (1.0 - 2.0 * y.dist(j, 0) / diam).max(0.0)
        } else {
            1.0
        }
    };
    let harmonic = |j: usize| {
        if diam > 0.0 {
            (std::f64::consts::PI * y.dist(j, 0) / diam).cos()
        } else {
            1.0
        }
    };
    vec![
        DiscreteFunction::from_fn(graph, "constant", |_, _| 1.0),
        DiscreteFunction::from_fn(graph, "radial exp", |t, _| (-rate * t).exp()),
        DiscreteFunction::from_fn(graph, "radial ramp", |t, _| ((t - 1.0) / 2.0).clamp(0.0, 1.0)),
        DiscreteFunction::from_fn(graph, "separable bump", |t, j| (-rate * t).exp() * bump(j)),
        DiscreteFunction::from_fn(graph, "oscillatory", |t, j| (-rate * t).exp() * harmonic(j)),
    ]
}

pub fn filling_verifier(
    graph: &FillingGraph,
    p: f64,
    family: &[DiscreteFunction],
    mode: ConstantMode,
    slack: f64,
) -> Result<Vec<SPReport>> {
    check_p(p)?;
    let (constant, source) = mode.constant(graph.beta(), p);
    family
        .iter()
        .map(|u| {
            let mut r = optimal_constant_and_ratio(graph, u, p, constant, slack)?;
            r.constant_source = source.clone();
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceReport {
    pub max_radial_violation: f64,
    pub max_horizontal_violation: f64,
    pub pass: bool,
}

/// Checks that fiber and level restrictions of `u` are controlled by the
/// node upper gradient of `u` (scaled by `ψ(t)` on levels).
pub fn slice_gradient_check(graph: &FillingGraph, u: &DiscreteFunction) -> Result<SliceReport> {
    let g = discrete_upper_gradient(graph, u)?;
    slice_gradient_check_with(graph, u, &g.node)
}

/// As [`slice_gradient_check`] with a caller-supplied node gradient.
pub fn slice_gradient_check_with(graph: &FillingGraph, u: &DiscreteFunction, g: &[f64]) -> Result<SliceReport> {
    u.check(graph)?;
    if graph.has_apex() {
        return Err(Error::precondition("slice check needs a product grid without apex merge"));
    }
    if g.len() != graph.node_count() {
        return Err(Error::domain("gradient has the wrong length"));
    }
    let mut radial = 0.0f64;
    let mut horizontal = 0.0f64;
    for e in graph.edges() {
        let du = (u.values[e.a] - u.values[e.b]).abs();
        let bound = g[e.a].min(g[e.b]);
        match e.kind {
            EdgeKind::Radial => radial = radial.max(du / e.length - bound),
            EdgeKind::Horizontal => {
                let (_, j) = graph.coords(e.a);
                let (_, k) = graph.coords(e.b);
                let psi = graph.profile().psi(graph.level_t(e.level));
                horizontal = horizontal.max(du / graph.carrier().dist(j, k) - psi * bound);
            }
        }
    }
    let tol = 1e-12;
    Ok(SliceReport {
        max_radial_violation: radial.max(0.0),
        max_horizontal_violation: horizontal.max(0.0),
        pass: radial <= tol && horizontal <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "no failure expected")]
    NoFailureExpected,
    #[serde(rename = "failure demonstrated")]
    FailureDemonstrated,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleConfig {
    pub y0: usize,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub t_max_schedule: Vec<f64>,
    /// Radial cell width of the evaluation grid.
    pub dt: f64,
}

impl CounterexampleConfig {
    pub fn new(y0: usize, r: f64, alpha: f64, beta: f64, p: f64, t_max_schedule: Vec<f64>) -> Self {
        CounterexampleConfig {
            y0,
            r,
            alpha,
            beta,
            p,
            t_max_schedule,
            dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleRow {
    pub t_max: f64,
    pub g_norm: f64,
    /// Radial quadrature of the same `‖g‖_p`.
    pub g_norm_quadrature: f64,
    pub u_deviation: f64,
    pub c_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub config: CounterexampleConfig,
    pub threshold: f64,
    pub rows: Vec<CounterexampleRow>,
    pub g_norm_tail: Vec<f64>,
    pub u_deviation: Vec<f64>,
    /// Relative change of `‖g‖_p` between successive truncations.
    pub g_changes: Vec<f64>,
    /// Relative growth of `inf_c ‖u − c‖_p` between successive truncations.
    pub u_growth: Vec<f64>,
    /// Largest relative gap between grid and quadrature `‖g‖_p`.
    pub g_quadrature_error: f64,
    /// `Σ_{t ≥ 1} w̄ ψ^{−p}` on the grid at the last truncation.
    pub tail_factor_grid: f64,
    /// `∫_1^∞ sinh^{β−pα}` (to the last truncation when divergent).
    pub tail_factor_quadrature: f64,
    pub tail_relative_error: f64,
    pub tail_converges: bool,
    /// `(r^p/2)sinh^β(2)μ(B) + 2^{p−1}μ(B̄)∫_1^∞ sinh^{β−pα}`, when finite.
    pub g_pow_upper_bound: Option<f64>,
    pub verdict: Verdict,
}

fn sinh_pow_tail(x: f64, from: f64, to: f64) -> f64 {
    quad::integrate(|t| t.sinh().powf(x), from, to, 1e-12)
}

/// Builds `u = u_R·u_Y` with `u_R(t) = min(1, max(0, t − 1))` and
/// `u_Y(y) = min(r/2, max(0, r − d_Y(y, y₀)))` on `H_{α,β}(Y)` and tracks
/// `‖g‖_p` and `inf_c ‖u − c‖_p` over growing truncations. Radial factors are
/// evaluated at cell midpoints against exact cell weights.
pub fn counterexample_suite(carrier: &CarrierSpace, cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    check_p(cfg.p)?;
    for (name, v) in [("alpha", cfg.alpha), ("beta", cfg.beta), ("r", cfg.r), ("dt", cfg.dt)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    if cfg.y0 >= carrier.len() {
        return Err(Error::domain(format!("y0 = {} out of range", cfg.y0)));
    }
    if cfg.t_max_schedule.is_empty()
        || cfg.t_max_schedule.windows(2).any(|w| !(w[1] > w[0]))
        || !(cfg.t_max_schedule[0] > 2.0)
    {
        return Err(Error::domain("t_max schedule must be increasing and start above 2"));
    }
    let mu = carrier.measure();
    let n = carrier.len();
    let (r, p, a, b) = (cfg.r, cfg.p, cfg.alpha, cfg.beta);
    if !(0..n).any(|j| carrier.dist(j, cfg.y0) >= r) {
        return Err(Error::precondition(format!(
            "Y \\ B(y0, {r}) is empty; the counterexample needs points outside the ball"
        )));
    }
    let uy: Vec<f64> = (0..n)
        .map(|j| (r - carrier.dist(j, cfg.y0)).clamp(0.0, r / 2.0))
        .collect();
    let lip_y: Vec<f64> = (0..n)
        .map(|j| {
            carrier
                .neighbors(j)
                .iter()
                .map(|&k| (uy[j] - uy[k]).abs() / carrier.dist(j, k))
                .fold(0.0, f64::max)
        })
        .collect();
    let u_r = |t: f64| (t - 1.0).clamp(0.0, 1.0);
    let lip_r = |t: f64| if t > 1.0 && t < 2.0 { 1.0 } else { 0.0 };
    let psi = |t: f64| t.sinh().powf(a);
    let weight = WeightKind::Sinh;

    let t_last = *cfg.t_max_schedule.last().unwrap();
    let cells = (t_last / cfg.dt).round() as usize;
    let mids: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * cfg.dt).collect();
    let wbar: Vec<f64> = (0..cells)
        .map(|i| weight.integral(b, i as f64 * cfg.dt, (i + 1) as f64 * cfg.dt))
        .collect();

    let g_at = |t: f64, j: usize| uy[j] * lip_r(t) + u_r(t) / psi(t) * lip_y[j];

    let mut rows = Vec::new();
    for &t_max in &cfg.t_max_schedule {
        let m = ((t_max / cfg.dt).round() as usize).min(cells);
        let mut g_pow = 0.0;
        for i in 0..m {
            let t = mids[i];
            for j in 0..n {
                let g = g_at(t, j);
                if g > 0.0 {
                    g_pow += g.powf(p) * wbar[i] * mu[j];
                }
            }
        }
        // Radial quadrature per carrier point; the integrand vanishes on [0, 1].
        let mut g_quad = 0.0;
        for j in 0..n {
            if uy[j] == 0.0 && lip_y[j] == 0.0 {
                continue;
            }
            let f = |t: f64| g_at(t, j).powf(p) * weight.density(b, t);
            g_quad += mu[j] * (quad::integrate(f, 1.0, 2.0, 1e-12) + quad::integrate(f, 2.0, t_max, 1e-12));
        }
        // Deviation: levels with u_R < 1 entry by entry, the rest aggregated per point.
        let mut values = Vec::new();
        let mut measure = Vec::new();
        let mut saturated = vec![0.0; n];
        for i in 0..m {
            let ur = u_r(mids[i]);
            if ur < 1.0 {
                for j in 0..n {
                    values.push(ur * uy[j]);
                    measure.push(wbar[i] * mu[j]);
                }
            } else {
                for j in 0..n {
                    saturated[j] += wbar[i] * mu[j];
                }
            }
        }
        for j in 0..n {
            if saturated[j] > 0.0 {
                values.push(uy[j]);
                measure.push(saturated[j]);
            }
        }
        let (c_star, dev) = optimal_deviation(&values, &measure, p);
        rows.push(CounterexampleRow {
            t_max,
            g_norm: g_pow.powf(1.0 / p),
            g_norm_quadrature: g_quad.powf(1.0 / p),
            u_deviation: dev,
            c_star,
        });
    }

    let x = b - p * a;
    let tail_converges = x < 0.0;
    let m_last = cells;
    let tail_factor_grid: f64 = (0..m_last)
        .filter(|&i| mids[i] >= 1.0)
        .map(|i| wbar[i] / psi(mids[i]).powf(p))
        .sum();
    let tail_factor_quadrature = if tail_converges {
        // Beyond t_last, sinh^x(t) = 2^{−x}e^{xt}(1 − e^{−2t})^x ≈ 2^{−x}e^{xt}.
        sinh_pow_tail(x, 1.0, t_last) + 2f64.powf(-x) * (x * t_last).exp() / (-x)
    } else {
        sinh_pow_tail(x, 1.0, t_last)
    };
    let tail_relative_error = (tail_factor_grid - tail_factor_quadrature).abs() / tail_factor_quadrature;

    let ball = |rad: f64| -> f64 { (0..n).filter(|&j| carrier.dist(j, cfg.y0) <= rad).map(|j| mu[j]).sum() };
    let g_pow_upper_bound = tail_converges.then(|| {
        let open: f64 = (0..n).filter(|&j| carrier.dist(j, cfg.y0) < r).map(|j| mu[j]).sum();
        r.powf(p) / 2.0 * 2f64.sinh().powf(b) * open + 2f64.powf(p - 1.0) * ball(r) * tail_factor_quadrature
    });

    let rel = |new: f64, old: f64| (new - old) / old;
    let g_norm_tail: Vec<f64> = rows.iter().map(|r| r.g_norm).collect();
    let u_deviation: Vec<f64> = rows.iter().map(|r| r.u_deviation).collect();
    let g_changes: Vec<f64> = g_norm_tail.windows(2).map(|w| rel(w[1], w[0]).abs()).collect();
    let u_growth: Vec<f64> = u_deviation.windows(2).map(|w| rel(w[1], w[0])).collect();
    let g_quadrature_error = rows
        .iter()
        .map(|r| (r.g_norm - r.g_norm_quadrature).abs() / r.g_norm_quadrature)
        .fold(0.0, f64::max);

    let threshold = b / a;
    let verdict = if p <= threshold {
        Verdict::NoFailureExpected
    } else if g_changes.iter().all(|&c| c < 0.01) && u_growth.iter().all(|&gr| gr >= 0.25) && rows.len() >= 2 {
        Verdict::FailureDemonstrated
    } else {
        Verdict::Inconclusive
    };

    Ok(CounterexampleReport {
        config: cfg.clone(),
        threshold,
        rows,
        g_norm_tail,
        u_deviation,
        g_changes,
        u_growth,
        g_quadrature_error,
        tail_factor_grid,
        tail_factor_quadrature,
        tail_relative_error,
        tail_converges,
        g_pow_upper_bound,
        verdict,
    })
}
