//! Command-line front end.
//!
//! Every subcommand shares one flag set ([`Params`]); a JSON config file with
//! the same keys may supply defaults, and flags win. Output is a single JSON
//! document on stdout (or `--out`) that echoes the resolved configuration.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hyperbolicity::{
    boundary_metric, estimate_delta, exhaustive_delta, quasisymmetry_modulus, sample_triples, snowflake_check,
    TripleSampler,
};
use crate::norms::{Norm2, DEFAULT_ANGULAR_SAMPLES};
use crate::poincare::{
    build_filling_graph, builtin_filling_family, builtin_halfline_family, counterexample_suite, filling_verifier,
    halfline_verifier, ConstantMode, CounterexampleConfig, DiscreteFunction, WeightKind, FILLING_SLACK,
    HALFLINE_SLACK,
};
use crate::profiles::{ProfileGrid, WarpProfile};
use crate::spaces::CarrierSpace;
use crate::warped::{distance, distance_bounds_other_norm, gromov_product, WarpedPoint};

#[derive(Debug, Parser)]
#[command(name = "warpfill", version, about = "Warped-product hyperbolic fillings: distances, hyperbolicity, boundary metrics and Poincaré checks")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    Validate,
    Dist,
    Delta,
    Boundary,
    Poincare,
    Counterexample,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a carrier space, profile and/or norm.
    Validate(Params),
    /// Warped distance, horizontal level and Gromov product between two points.
    Dist(Params),
    /// Sampled or exhaustive hyperbolicity constant.
    Delta(Params),
    /// Visual boundary metric with snowflake and quasisymmetry checks.
    Boundary(Params),
    /// Sobolev–Poincaré ratios on the half-line or on a filling graph.
    Poincare(Params),
    /// Failure of the inequality above the threshold p = β/α.
    Counterexample(Params),
}

impl Command {
    fn split(self) -> (&'static str, Params) {
        match self {
            Command::Validate(p) => ("validate", p),
            Command::Dist(p) => ("dist", p),
            Command::Delta(p) => ("delta", p),
            Command::Boundary(p) => ("boundary", p),
            Command::Poincare(p) => ("poincare", p),
            Command::Counterexample(p) => ("counterexample", p),
        }
    }
}

/// Flags shared by all subcommands; also the schema of `--config` files.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Carrier: a JSON/CSV file, `circle:N` or `circle:N:LENGTH`.
    #[arg(long)]
    pub space: Option<String>,
    /// `exp:ALPHA` or `sinh:ALPHA`.
    #[arg(long)]
    pub profile: Option<String>,
    /// `l1`, `l2`, `linf`, `lp:P` or `table:PATH`.
    #[arg(long)]
    pub norm: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Visual parameter, or `auto`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long = "tmax")]
    #[serde(rename = "tmax")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Point `T,Y`.
    #[arg(long)]
    pub from: Option<String>,
    /// Point `T,Y`.
    #[arg(long)]
    pub to: Option<String>,
    /// Carrier index of the basepoint `(0, y₀)`.
    #[arg(long)]
    pub basepoint: Option<usize>,
    #[arg(long)]
    pub y0: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Comma-separated truncation schedule.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Radial weight: `exp` or `sinh`.
    #[arg(long)]
    pub weight: Option<String>,
    /// `builtin` or a JSON file with a list of `{name, values}`.
    #[arg(long)]
    pub family: Option<String>,
    /// Filling constant: `beta_p` or `half_line`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub slack: Option<f64>,
    /// Comma-separated levels for an exhaustive lattice scan.
    #[arg(long)]
    pub levels: Option<String>,
    /// Run the approximate-midpoint length check with this tolerance.
    #[arg(long)]
    pub length_eps: Option<f64>,
    /// Write `(ln d_Y, ln d_ε)` pairs to this file.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// CSV output: matrix prefix for `boundary`, row file for `counterexample`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Export the resolved carrier as JSON.
    #[arg(long)]
    pub export_space: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($flags:expr, $file:expr, $($f:ident),*) => {
        Params { $($f: $flags.$f.or($file.$f),)* }
    };
}

impl Params {
    /// Field-wise `self.or(defaults)`.
    pub fn merged(self, defaults: Params) -> Params {
        merge_fields!(
            self, defaults, space, profile, norm, alpha, beta, p, eps, t_max, dt, seed, count, from, to, basepoint,
            y0, r, schedule, weight, family, mode, slack, levels, length_eps, plot_data, csv, export_space
        )
    }
}

/// Result of a run: the JSON document and the exit status to use.
#[derive(Debug)]
pub struct Outcome {
    pub document: Value,
    pub exit_code: i32,
}

/// Exit status for an error: 2 for invalid input or configuration, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Unbounded(_) => 1,
        _ => 2,
    }
}

fn load_config(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path).map_err(|_| Error::FileNotFound(path.display().to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("config {}: {e}", path.display())))
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let (name, flags) = cli.command.split();
    let params = match &cli.config {
        Some(path) => flags.merged(load_config(path)?),
        None => flags,
    };
    let seed = params.seed.unwrap_or(0);
    let (result, constants, ok) = match name {
        "validate" => cmd_validate(&params)?,
        "dist" => cmd_dist(&params)?,
        "delta" => cmd_delta(&params, seed)?,
        "boundary" => cmd_boundary(&params, seed)?,
        "poincare" => cmd_poincare(&params)?,
        _ => cmd_counterexample(&params)?,
    };
    if let (Some(path), Some(arg)) = (&params.export_space, &params.space) {
        load_space(arg)?.save(path)?;
    }
    let document = json!({
        "tool": "warpfill",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "config": params,
        "seed": seed,
        "constants": constants,
        "timestamp": timestamp(),
        "result": result,
    });
    Ok(Outcome {
        document,
        exit_code: if ok { 0 } else { 2 },
    })
}

/// Parses `args`, runs, writes the document and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.document).expect("document serializes");
            let written = match out {
                Some(path) => std::fs::write(&path, text + "\n"),
                None => writeln!(std::io::stdout(), "{text}"),
            };
            if let Err(e) = written {
                eprintln!("i/o error: {e}");
                return 1;
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Validation(vec![format!("missing required flag --{flag}")]))
}

pub fn load_space(arg: &str) -> Result<CarrierSpace> {
    if let Some(rest) = arg.strip_prefix("circle:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let n: usize = parts[0]
            .parse()
            .map_err(|_| Error::Validation(vec![format!("bad circle size in '{arg}'")]))?;
        let length = match parts.get(1) {
            Some(l) => l
                .parse()
                .map_err(|_| Error::Validation(vec![format!("bad circle length in '{arg}'")]))?,
            None => 2.0 * std::f64::consts::PI,
        };
        return CarrierSpace::circle(n, length);
    }
    CarrierSpace::load(Path::new(arg))
}

fn parse_point(s: &str, flag: &str) -> Result<WarpedPoint> {
    let bad = || Error::Validation(vec![format!("--{flag} must be T,Y, got '{s}'")]);
    let (t, y) = s.split_once(',').ok_or_else(bad)?;
    let t: f64 = t.trim().parse().map_err(|_| bad())?;
    let y: usize = y.trim().parse().map_err(|_| bad())?;
    WarpedPoint::new(t, y)
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(vec![format!("--{flag}: '{x}' is not a number")]))
        })
        .collect()
}

fn resolve_profile(params: &Params) -> Result<WarpProfile> {
    match (&params.profile, params.alpha) {
        (Some(arg), _) => WarpProfile::parse(arg),
        (None, Some(a)) => WarpProfile::sinh_pow(a),
        (None, None) => Err(Error::Validation(vec!["missing required flag --profile".into()])),
    }
}

fn check_index(y: usize, space: &CarrierSpace, flag: &str) -> Result<()> {
    if y < space.len() {
        Ok(())
    } else {
        Err(Error::Validation(vec![format!(
            "--{flag} index {y} out of range for {} points",
            space.len()
        )]))
    }
}

type CmdResult = Result<(Value, Vec<String>, bool)>;

fn cmd_validate(params: &Params) -> CmdResult {
    let mut out = serde_json::Map::new();
    let mut ok = true;
    if let Some(arg) = &params.space {
        let space = load_space(arg)?;
        let mut entry = json!({
            "points": space.len(),
            "diameter": space.diameter(),
            "total_measure": space.total_measure(),
            "valid": true,
        });
        if let Some(eps) = params.length_eps {
            entry["length_check"] = serde_json::to_value(space.approx_length_check(eps)).unwrap();
        }
        out.insert("space".into(), entry);
    }
    if let Some(arg) = &params.profile {
        let profile = WarpProfile::parse(arg)?;
        let grid = ProfileGrid::new(params.t_max.unwrap_or(20.0), params.count.unwrap_or(4001));
        let report = profile.validate(grid)?;
        out.insert("profile".into(), serde_json::to_value(report).unwrap());
    }
    if let Some(arg) = &params.norm {
        let norm = Norm2::parse(arg)?;
        let report = norm.validate(DEFAULT_ANGULAR_SAMPLES);
        ok &= report.pass();
        out.insert("norm".into(), serde_json::to_value(report).unwrap());
    }
    if out.is_empty() {
        return Err(Error::Validation(vec!["nothing to validate: pass --space, --profile or --norm".into()]));
    }
    Ok((Value::Object(out), vec![], ok))
}

fn cmd_dist(params: &Params) -> CmdResult {
    let space = load_space(&require(&params.space, "space")?)?;
    let profile = resolve_profile(params)?;
    let a = parse_point(&require(&params.from, "from")?, "from")?;
    let b = parse_point(&require(&params.to, "to")?, "to")?;
    check_index(a.y, &space, "from")?;
    check_index(b.y, &space, "to")?;
    let y0 = params.basepoint.unwrap_or(0);
    check_index(y0, &space, "basepoint")?;
    let d = distance(&profile, &space, a, b)?;
    let kernel = profile.minimize_f(space.dist(a.y, b.y), a.t.min(b.t))?;
    let g = gromov_product(&profile, &space, y0, a, b)?;
    let norm = Norm2::parse(params.norm.as_deref().unwrap_or("l1"))?;
    let mut result = json!({
        "profile": profile.label(),
        "norm": norm.label(),
        "tau": kernel.tau,
        "gromov_product_from_apex": g,
        "basepoint": y0,
    });
    if matches!(norm, Norm2::L1) {
        result["distance"] = json!(d);
    } else {
        let (lo, hi) = distance_bounds_other_norm(&norm, d)?;
        result["interval"] = json!([lo, hi]);
        result["l1_distance"] = json!(d);
    }
    let constants = vec!["l1 distance t1 + t2 + min over [0, min(t1,t2)] of psi(rho)·d_Y − 2 rho".to_string()];
    Ok((result, constants, true))
}

fn cmd_delta(params: &Params, seed: u64) -> CmdResult {
    let space = load_space(&require(&params.space, "space")?)?;
    let profile = resolve_profile(params)?;
    let y0 = params.basepoint.unwrap_or(0);
    check_index(y0, &space, "basepoint")?;
    let report = match &params.levels {
        Some(levels) => exhaustive_delta(&profile, &space, &parse_list(levels, "levels")?, y0)?,
        None => estimate_delta(
            &profile,
            &space,
            TripleSampler {
                t_max: params.t_max.unwrap_or(10.0),
                count: params.count.unwrap_or(10_000),
                seed,
            },
            y0,
        )?,
    };
    let report = match &params.norm {
        Some(arg) => report.for_norm(&Norm2::parse(arg)?),
        None => report,
    };
    let constants = vec![format!(
        "delta bound 2/alpha, plus 3·psi(0)·diam(Y) when psi(0) != 0: {}",
        report.delta_bound_paper
    )];
    Ok((serde_json::to_value(report).unwrap(), constants, true))
}

fn write_matrix(path: &Path, n: usize, m: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    for i in 0..n {
        w.write_record(m[i * n..(i + 1) * n].iter().map(|x| format!("{x:e}")))
            .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_boundary(params: &Params, seed: u64) -> CmdResult {
    let space = load_space(&require(&params.space, "space")?)?;
    let profile = resolve_profile(params)?;
    let y0 = params.basepoint.unwrap_or(0);
    check_index(y0, &space, "basepoint")?;
    let eps = match params.eps.as_deref() {
        None | Some("auto") => None,
        Some(x) => Some(
            x.parse::<f64>()
                .map_err(|_| Error::Validation(vec![format!("--eps must be a number or 'auto', got '{x}'")]))?,
        ),
    };
    let bm = boundary_metric(&profile, &space, eps, y0)?;
    let snow = snowflake_check(&bm, &space, profile.alpha())?;
    let triples = sample_triples(space.len(), params.count.unwrap_or(1000), seed);
    let qs = quasisymmetry_modulus(&bm, &space, profile.alpha(), &triples)?;
    let (lo, hi) = bm.comparison_range();
    if let Some(prefix) = &params.csv {
        let base = prefix.display().to_string();
        write_matrix(Path::new(&format!("{base}_premetric.csv")), bm.n, &bm.premetric)?;
        write_matrix(Path::new(&format!("{base}_chained.csv")), bm.n, &bm.chained)?;
    }
    if let Some(path) = &params.plot_data {
        let mut text = String::new();
        for (x, y) in bm.plot_data(&space) {
            text.push_str(&format!("{x:.17e} {y:.17e}\n"));
        }
        std::fs::write(path, text)?;
    }
    let result = json!({
        "eps": bm.eps,
        "eps_source": if eps.is_none() { "auto: 0.9·min(1, 1/(5·delta))" } else { "flag" },
        "delta_used": bm.delta_used,
        "eps_warning": bm.eps_warning,
        "growth_constant": bm.growth_constant,
        "chained_over_premetric": {"min": lo, "max": hi},
        "snowflake": snow,
        "quasisymmetry": {
            "samples": qs.eta_samples.len(),
            "skipped": qs.skipped,
            "C0": qs.c0,
            "exponent": qs.exponent,
            "bound_violations": qs.bound_violations,
            "max_ratio_out": qs.eta_samples.iter().map(|s| s.1).fold(0.0, f64::max),
        },
    });
    let constants = vec![
        "visual parameter ceiling min(1, 1/(5·delta)) for the premetric comparison".to_string(),
        "snowflake exponent eps/alpha".to_string(),
    ];
    Ok((result, constants, true))
}

fn parse_weight(params: &Params) -> Result<WeightKind> {
    match params.weight.as_deref().unwrap_or("exp") {
        "exp" => Ok(WeightKind::Exp),
        "sinh" => Ok(WeightKind::Sinh),
        other => Err(Error::Validation(vec![format!("--weight must be exp or sinh, got '{other}'")])),
    }
}

fn cmd_poincare(params: &Params) -> CmdResult {
    let weight = parse_weight(params)?;
    let p = params.p.unwrap_or(1.0);
    let alpha = params.alpha.unwrap_or(1.0);
    let beta = params.beta.unwrap_or(alpha);
    let dt = params.dt.unwrap_or(1e-3);
    let t_max = params.t_max.unwrap_or(40.0);
    let reports = match &params.space {
        None => {
            let slack = params.slack.unwrap_or(HALFLINE_SLACK);
            halfline_verifier(weight, beta, p, &builtin_halfline_family(), dt, t_max, slack)?
        }
        Some(arg) => {
            let space = load_space(arg)?;
            let profile = match weight {
                WeightKind::Exp => WarpProfile::exp(alpha)?,
                WeightKind::Sinh => WarpProfile::sinh_pow(alpha)?,
            };
            let graph = build_filling_graph(&space, &profile, weight, beta, t_max, dt)?;
            let family = match params.family.as_deref().unwrap_or("builtin") {
                "builtin" => builtin_filling_family(&graph, p),
                path => {
                    let text = std::fs::read_to_string(path).map_err(|_| Error::FileNotFound(path.to_string()))?;
                    let fam: Vec<DiscreteFunction> =
                        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("family {path}: {e}")))?;
                    fam
                }
            };
            let mode = match params.mode.as_deref() {
                Some("beta_p") => ConstantMode::BetaP,
                Some("half_line") => ConstantMode::HalfLine,
                None if weight == WeightKind::Exp => ConstantMode::BetaP,
                None => ConstantMode::HalfLine,
                Some(other) => {
                    return Err(Error::Validation(vec![format!(
                        "--mode must be beta_p or half_line, got '{other}'"
                    )]))
                }
            };
            filling_verifier(&graph, p, &family, mode, params.slack.unwrap_or(FILLING_SLACK))?
        }
    };
    let constants: Vec<String> = reports.first().map(|r| r.constant_source.clone()).into_iter().collect();
    Ok((serde_json::to_value(reports).unwrap(), constants, true))
}

fn cmd_counterexample(params: &Params) -> CmdResult {
    let space = load_space(&require(&params.space, "space")?)?;
    let schedule = parse_list(params.schedule.as_deref().unwrap_or("10,20,40"), "schedule")?;
    let mut cfg = CounterexampleConfig::new(
        params.y0.unwrap_or(0),
        params.r.unwrap_or(1.0),
        params.alpha.unwrap_or(1.0),
        params.beta.unwrap_or(1.0),
        params.p.unwrap_or(2.0),
        schedule,
    );
    if let Some(dt) = params.dt {
        cfg.dt = dt;
    }
    check_index(cfg.y0, &space, "y0")?;
    let report = counterexample_suite(&space, &cfg)?;
    if let Some(path) = &params.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
        w.write_record(["t_max", "g_norm", "u_deviation"]).map_err(|e| Error::Io(e.into()))?;
        for row in &report.rows {
            w.write_record([row.t_max.to_string(), row.g_norm.to_string(), row.u_deviation.to_string()])
                .map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
    }
    let constants = vec![
        "threshold p = beta/alpha".to_string(),
        "tail factor integral of sinh^(beta − p·alpha) over [1, ∞)".to_string(),
    ];
    Ok((serde_json::to_value(report).unwrap(), constants, true))
}
