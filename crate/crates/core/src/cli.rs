//! Command-line front end: configuration ingestion, orchestration of the
//! computational modules, and emission of CSV profiles and JSON reports.
//!
//! Five subcommands share one configuration schema (a flat JSON object;
//! unknown keys are rejected per command):
//!
//! - `radial` integrates the radial profile and fits its far field.
//! - `dirichlet` solves the boundary-value problem on a convex domain by
//!   the method of continuity and audits the converged field.
//! - `entire` runs the exhaustion construction between barrier envelopes
//!   and checks the prescribed far field along a ray.
//! - `oracle` cross-checks the closed-form Riccati solutions against an
//!   independent adaptive integrator on randomized parameter sets.
//! - `verify` runs the whole reduced-scale invariant suite and fails on
//!   any violation.
//!
//! Exit codes: `0` success, `1` solver or verification failure (with a
//! diagnostic JSON in the output directory when possible), `2`
//! configuration error. Outputs are deterministic: identical resolved
//! configuration and crate version yield bit-identical files. Reports
//! embed the resolved configuration and its FNV-1a hash; CSV numbers
//! carry 17 significant digits. The output directory is taken from
//! `--out`, else the `MINKSOL_OUT` environment variable, else the
//! config's `out` key, else the current directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::elliptic::{
    admissibility_audit, boundary_barrier_check, continuity_solve, estimate_monitors,
    nu_gradient_sup, BoundaryData, ContinuationSchedule, ContinuityRun, ConvexDomain,
    FieldSolution,
};
use crate::entire::{
    ball_lattice, exhaustion_solve, ray_asymptotics, reference_log_coefficient,
    uniqueness_probe, BarrierPair, BoundaryValueF, ExhaustOptions,
};
use crate::numerics::ivp::{sample_path, OdeOptions};
use crate::oracles::{
    linear_ode_bound, linear_ode_samples, riccati_closed_form, Approach, RiccatiParams,
};
use crate::radial::{
    asymptotic_fit, hyperboloid_profile, ode_residual_check, radial_profile, sigma_solution,
    u_from_y, HModel, RadialParams,
};
use crate::{Error, Result};

/// Successful run.
pub const EXIT_OK: i32 = 0;
/// Solver failure or verification violation.
pub const EXIT_SOLVER: i32 = 1;
/// Configuration error.
pub const EXIT_CONFIG: i32 = 2;

/// Environment variable overriding the output directory (weaker than the
/// `--out` flag, stronger than the config file).
pub const OUT_ENV: &str = "MINKSOL_OUT";

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

/// The five subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Radial profile integration and far-field fit.
    Radial,
    /// Dirichlet problem on a convex domain.
    Dirichlet,
    /// Entire solution by exhaustion between barriers.
    Entire,
    /// Closed-form vs numeric cross-checks.
    Oracle,
    /// Reduced-scale invariant suite.
    Verify,
}

impl Command {
    /// The subcommand name as written on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Radial => "radial",
            Command::Dirichlet => "dirichlet",
            Command::Entire => "entire",
            Command::Oracle => "oracle",
            Command::Verify => "verify",
        }
    }
}

/// Forcing-term model for the radial command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum HSpec {
    /// Constant forcing equal to `C`.
    #[serde(rename = "constant")]
    Constant,
    /// `C - k/(1+r^2)`: approaches `C` quadratically from below.
    #[serde(rename = "quadratic")]
    Quadratic {
        /// Depression at the origin, `0 < k < C - 1`.
        k: f64,
    },
}

impl HSpec {
    fn model(&self, c: f64) -> HModel {
        match *self {
            HSpec::Constant => HModel::Constant { c },
            HSpec::Quadratic { k } => HModel::QuadraticApproach { c, k },
        }
    }
}

/// Domain shape for the Dirichlet command.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape")]
pub enum DomainSpec {
    /// Round ball.
    #[serde(rename = "ball")]
    Ball {
        /// Center coordinates (length `n`).
        center: Vec<f64>,
        /// Radius, positive.
        radius: f64,
    },
    /// Axis-aligned ellipsoid.
    #[serde(rename = "ellipsoid")]
    Ellipsoid {
        /// Center coordinates (length `n`).
        center: Vec<f64>,
        /// Semi-axes, positive (length `n`).
        semi_axes: Vec<f64>,
    },
}

impl DomainSpec {
    fn build(&self) -> Result<ConvexDomain> {
        match self {
            DomainSpec::Ball { center, radius } => {
                ConvexDomain::ball(center.clone(), *radius)
            }
            DomainSpec::Ellipsoid { center, semi_axes } => {
                ConvexDomain::ellipsoid(center.clone(), semi_axes.clone())
            }
        }
    }
}

/// Prescribed values at infinity for the entire command.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum FSpec {
    /// Constant value in every direction.
    #[serde(rename = "constant")]
    Constant {
        /// The constant.
        value: f64,
    },
    /// `amplitude * cos(theta)` with `theta` the polar angle from `+e3`.
    #[serde(rename = "cosine-mode")]
    CosineMode {
        /// Mode amplitude.
        amplitude: f64,
    },
    /// Values interpolated from a CSV table `theta,phi,value`.
    #[serde(rename = "table")]
    Table {
        /// Path to the CSV file.
        path: String,
    },
}

impl FSpec {
    fn build(&self, c: f64) -> Result<BoundaryValueF> {
        match self {
            FSpec::Constant { value } => BoundaryValueF::constant(*value, c),
            FSpec::CosineMode { amplitude } => BoundaryValueF::cosine_mode(*amplitude, c),
            FSpec::Table { path } => {
                let text = fs::read_to_string(path)?;
                let rows = parse_sphere_table(&text)?;
                BoundaryValueF::from_rows(&rows, c)
            }
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            FSpec::Constant { .. } => "constant",
            FSpec::CosineMode { .. } => "cosine-mode",
            FSpec::Table { .. } => "table",
        }
    }
}

/// Parses a CSV table of spherical samples with header `theta,phi,value`.
fn parse_sphere_table(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 && line.eq_ignore_ascii_case("theta,phi,value") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::SchemaError(vec![format!(
                "f table line {} has {} columns, expected theta,phi,value",
                i + 1,
                cols.len()
            )]));
        }
        let mut vals = [0.0f64; 3];
        for (j, col) in cols.iter().enumerate() {
            vals[j] = col.trim().parse().map_err(|_| {
                Error::SchemaError(vec![format!(
                    "f table line {} column {} is not a number: `{}`",
                    i + 1,
                    j + 1,
                    col.trim()
                )])
            })?;
        }
        rows.push((vals[0], vals[1], vals[2]));
    }
    Ok(rows)
}

/// Fully resolved run configuration (defaults applied, overrides folded
/// in). Its canonical JSON serialization is what the config hash covers;
/// the output directory is excluded so that redirecting artifacts does
/// not change their content.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Subcommand name.
    pub command: String,
    /// Spatial dimension of the graph, `>= 3`.
    pub n: usize,
    /// Curvature constant, `> 1`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Final gradient weight of the continuity march, in `(0, 1]`.
    pub sigma: f64,
    /// Forcing model for the radial command.
    #[serde(rename = "H")]
    pub h_model: HSpec,
    /// Radial integration range.
    pub r_max: f64,
    /// Radial integrator tolerance.
    pub tol: f64,
    /// Domain for the Dirichlet command.
    pub domain: DomainSpec,
    /// Grid spacing for the field solvers.
    pub grid_h: f64,
    /// Constant Dirichlet datum (also the height at the origin for the
    /// radial profile).
    pub boundary_value: f64,
    /// Exhaustion ball radii, increasing.
    pub radii: Vec<f64>,
    /// Prescribed values at infinity.
    pub f: FSpec,
    /// Radius of the comparison lattice for the entire command.
    pub k_radius: f64,
    /// Spacing of the comparison lattice.
    pub k_spacing: f64,
    /// Randomized parameter sets for the oracle command.
    pub sets: usize,
    /// Seed for all randomized sampling.
    pub seed: u64,
    /// Output directory (not hashed).
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    fn defaults(command: Command) -> Self {
        RunConfig {
            command: command.as_str().to_string(),
            n: 3,
            c: 2.0,
            sigma: 1.0,
            h_model: HSpec::Constant,
            r_max: 1000.0,
            tol: 1e-10,
            domain: DomainSpec::Ball { center: vec![0.0; 3], radius: 1.0 },
            grid_h: match command {
                Command::Entire => 0.2,
                _ => 0.125,
            },
            boundary_value: 0.0,
            radii: vec![4.0, 8.0, 16.0],
            f: FSpec::Constant { value: 0.0 },
            k_radius: 2.0,
            k_spacing: 0.5,
            sets: 100,
            seed: 0,
            out: PathBuf::from("."),
        }
    }

    /// FNV-1a hash of the canonical JSON serialization, as fixed-width
    /// hex. Identical resolved configurations hash identically because
    /// JSON object keys are emitted sorted.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        format!("{:016x}", fnv1a64(value.to_string().as_bytes()))
    }
}

/// 64-bit FNV-1a.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Keys accepted per command (besides `command` itself).
fn allowed_keys(command: Command) -> &'static [&'static str] {
    match command {
        Command::Radial => &["n", "C", "H", "r_max", "tol", "boundary_value", "seed", "out"],
        Command::Dirichlet => {
            &["n", "C", "sigma", "domain", "grid_h", "boundary_value", "seed", "out"]
        }
        Command::Entire => {
            &["n", "C", "radii", "grid_h", "f", "k_radius", "k_spacing", "seed", "out"]
        }
        Command::Oracle => &["sets", "seed", "out"],
        Command::Verify => &["seed", "out"],
    }
}

/// Collects violations while pulling typed values out of the config map.
struct Checker<'a> {
    map: &'a Map<String, Value>,
    errs: Vec<String>,
}

impl<'a> Checker<'a> {
    fn new(map: &'a Map<String, Value>) -> Self {
        Checker { map, errs: Vec::new() }
    }

    fn bad(&mut self, msg: impl Into<String>) {
        self.errs.push(msg.into());
    }

    fn number(&mut self, key: &str, default: f64) -> f64 {
        match self.map.get(key) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => x,
                _ => {
                    self.bad(format!("{key} must be a finite number"));
                    default
                }
            },
        }
    }

    fn integer(&mut self, key: &str, default: u64) -> u64 {
        match self.map.get(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(x) => x,
                None => {
                    self.bad(format!("{key} must be a nonnegative integer"));
                    default
                }
            },
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.map.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.bad(format!("{key} must be a string"));
                None
            }
        }
    }

    fn number_list(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.map.get(key) {
            None => None,
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for v in items {
                    match v.as_f64() {
                        Some(x) if x.is_finite() => out.push(x),
                        _ => {
                            self.bad(format!("{key} must be an array of finite numbers"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.bad(format!("{key} must be an array of numbers"));
                None
            }
        }
    }

    fn object(&mut self, key: &str) -> Option<&'a Map<String, Value>> {
        match self.map.get(key) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.bad(format!("{key} must be an object"));
                None
            }
        }
    }
}

/// Checks an inner object for unknown keys.
fn reject_unknown(
    errs: &mut Vec<String>,
    map: &Map<String, Value>,
    parent: &str,
    allowed: &[&str],
) {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            errs.push(format!("unknown key `{parent}.{key}`"));
        }
    }
}

/// Parses and validates a configuration document for a subcommand.
///
/// All violations are collected and reported together; on success every
/// field of the returned [`RunConfig`] is resolved (defaults applied).
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::SchemaError(vec![format!("config is not valid JSON: {e}")]))?;
    let Value::Object(map) = root else {
        return Err(Error::SchemaError(vec![
            "config root must be a JSON object".to_string(),
        ]));
    };

    let mut cfg = RunConfig::defaults(command);
    let mut ck = Checker::new(&map);

    // Unknown keys.
    let allowed: BTreeSet<&str> = allowed_keys(command).iter().copied().collect();
    for key in map.keys() {
        if key != "command" && !allowed.contains(key.as_str()) {
            ck.bad(format!(
                "unknown key `{key}` for command `{}`",
                command.as_str()
            ));
        }
    }

    // The optional command field must agree with the subcommand.
    if let Some(cmd) = ck.string("command") {
        if cmd != command.as_str() {
            ck.bad(format!(
                "config command `{cmd}` does not match subcommand `{}`",
                command.as_str()
            ));
        }
    }

    if allowed.contains("n") {
        let n = ck.integer("n", cfg.n as u64);
        if n < 3 {
            ck.bad("n must be ≥ 3");
        } else {
            cfg.n = n as usize;
        }
        if command == Command::Entire && cfg.n != 3 && n >= 3 {
            ck.bad("n must be 3 for the entire command (spherical sampling is 3-dimensional)");
        }
    }
    if allowed.contains("C") {
        let c = ck.number("C", cfg.c);
        if c <= 1.0 {
            ck.bad("C must exceed 1");
        } else {
            cfg.c = c;
        }
    }
    if allowed.contains("sigma") {
        let sigma = ck.number("sigma", cfg.sigma);
        if !(sigma > 0.0 && sigma <= 1.0) {
            ck.bad("sigma must lie in (0, 1]");
        } else {
            cfg.sigma = sigma;
        }
    }
    if allowed.contains("H") {
        if let Some(h) = ck.object("H") {
            let mut errs = Vec::new();
            reject_unknown(&mut errs, h, "H", &["kind", "k"]);
            match h.get("kind").and_then(Value::as_str) {
                Some("constant") => {
                    if h.contains_key("k") {
                        errs.push("H.k is only valid for kind `quadratic`".to_string());
                    }
                    cfg.h_model = HSpec::Constant;
                }
                Some("quadratic") => {
                    let k = h.get("k").and_then(Value::as_f64).unwrap_or(0.3);
                    if !(k > 0.0) || k >= cfg.c - 1.0 {
                        errs.push("H.k must satisfy 0 < k < C - 1".to_string());
                    } else {
                        cfg.h_model = HSpec::Quadratic { k };
                    }
                }
                _ => errs.push("H.kind must be `constant` or `quadratic`".to_string()),
            }
            for e in errs {
                ck.bad(e);
            }
        }
    }
    if allowed.contains("r_max") {
        let r_max = ck.number("r_max", cfg.r_max);
        if !(r_max > 1.0) {
            ck.bad("r_max must exceed 1");
        } else {
            cfg.r_max = r_max;
        }
    }
    if allowed.contains("tol") {
        let tol = ck.number("tol", cfg.tol);
        if !(tol > 0.0 && tol <= 1e-4) {
            ck.bad("tol must lie in (0, 1e-4]");
        } else {
            cfg.tol = tol;
        }
    }
    if allowed.contains("domain") {
        if let Some(d) = ck.object("domain") {
            let mut errs = Vec::new();
            let spec = parse_domain(d, cfg.n, &mut errs);
            if let Some(spec) = spec {
                cfg.domain = spec;
            }
            for e in errs {
                ck.bad(e);
            }
        } else if ck.map.get("domain").is_none() {
            cfg.domain = DomainSpec::Ball { center: vec![0.0; cfg.n], radius: 1.0 };
        }
    }
    if allowed.contains("grid_h") {
        let h = ck.number("grid_h", cfg.grid_h);
        if !(h > 0.0) {
            ck.bad("grid_h must be positive");
        } else {
            cfg.grid_h = h;
        }
    }
    if allowed.contains("boundary_value") {
        cfg.boundary_value = ck.number("boundary_value", cfg.boundary_value);
    }
    if allowed.contains("radii") {
        if let Some(radii) = ck.number_list("radii") {
            if radii.is_empty()
                || radii[0] <= 0.0
                || radii.windows(2).any(|w| w[1] <= w[0])
            {
                ck.bad("radii must be positive and strictly increasing");
            } else {
                cfg.radii = radii;
            }
        }
    }
    if allowed.contains("f") {
        if let Some(f) = ck.object("f") {
            let mut errs = Vec::new();
            if let Some(spec) = parse_fspec(f, &mut errs) {
                cfg.f = spec;
            }
            for e in errs {
                ck.bad(e);
            }
        }
    }
    if allowed.contains("k_radius") {
        let v = ck.number("k_radius", cfg.k_radius);
        if !(v > 0.0) {
            ck.bad("k_radius must be positive");
        } else {
            cfg.k_radius = v;
        }
    }
    if allowed.contains("k_spacing") {
        let v = ck.number("k_spacing", cfg.k_spacing);
        if !(v > 0.0) {
            ck.bad("k_spacing must be positive");
        } else {
            cfg.k_spacing = v;
        }
    }
    if allowed.contains("sets") {
        let v = ck.integer("sets", cfg.sets as u64);
        if v == 0 {
            ck.bad("sets must be at least 1");
        } else {
            cfg.sets = v as usize;
        }
    }
    cfg.seed = ck.integer("seed", cfg.seed);
    if let Some(out) = ck.string("out") {
        cfg.out = PathBuf::from(out);
    }

    // Cross-field checks that only make sense once fields are resolved.
    if command == Command::Entire && cfg.k_radius >= cfg.radii[0] {
        ck.bad("k_radius must be smaller than the first exhaustion radius");
    }

    if ck.errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::SchemaError(ck.errs))
    }
}

fn parse_domain(
    map: &Map<String, Value>,
    n: usize,
    errs: &mut Vec<String>,
) -> Option<DomainSpec> {
    let center = match map.get("center") {
        None => vec![0.0; n],
        Some(Value::Array(items)) => {
            let mut c = Vec::with_capacity(items.len());
            for v in items {
                match v.as_f64() {
                    Some(x) if x.is_finite() => c.push(x),
                    _ => {
                        errs.push("domain.center must be an array of finite numbers".into());
                        return None;
                    }
                }
            }
            c
        }
        Some(_) => {
            errs.push("domain.center must be an array of numbers".into());
            return None;
        }
    };
    if center.len() != n {
        errs.push(format!("domain.center must have n = {n} coordinates"));
        return None;
    }
    match map.get("shape").and_then(Value::as_str) {
        Some("ball") => {
            reject_unknown(errs, map, "domain", &["shape", "center", "radius"]);
            match map.get("radius").and_then(Value::as_f64) {
                Some(r) if r > 0.0 && r.is_finite() => {
                    Some(DomainSpec::Ball { center, radius: r })
                }
                _ => {
                    errs.push("domain.radius must be a positive number".into());
                    None
                }
            }
        }
        Some("ellipsoid") => {
            reject_unknown(errs, map, "domain", &["shape", "center", "semi_axes"]);
            match map.get("semi_axes") {
                Some(Value::Array(items)) => {
                    let mut axes = Vec::with_capacity(items.len());
                    for v in items {
                        match v.as_f64() {
                            Some(a) if a > 0.0 && a.is_finite() => axes.push(a),
                            _ => {
                                errs.push(
                                    "domain.semi_axes must be positive numbers".into(),
                                );
                                return None;
                            }
                        }
                    }
                    if axes.len() != n {
                        errs.push(format!("domain.semi_axes must have n = {n} entries"));
                        return None;
                    }
                    Some(DomainSpec::Ellipsoid { center, semi_axes: axes })
                }
                _ => {
                    errs.push("domain.semi_axes must be an array of positive numbers".into());
                    None
                }
            }
        }
        _ => {
            errs.push("domain.shape must be `ball` or `ellipsoid`".into());
            None
        }
    }
}

fn parse_fspec(map: &Map<String, Value>, errs: &mut Vec<String>) -> Option<FSpec> {
    match map.get("kind").and_then(Value::as_str) {
        Some("constant") => {
            reject_unknown(errs, map, "f", &["kind", "value"]);
            let value = match map.get("value") {
                None => 0.0,
                Some(v) => match v.as_f64() {
                    Some(x) if x.is_finite() => x,
                    _ => {
                        errs.push("f.value must be a finite number".into());
                        return None;
                    }
                },
            };
            Some(FSpec::Constant { value })
        }
        Some("cosine-mode") => {
            reject_unknown(errs, map, "f", &["kind", "amplitude"]);
            let amplitude = match map.get("amplitude") {
                None => 0.1,
                Some(v) => match v.as_f64() {
                    Some(x) if x.is_finite() => x,
                    _ => {
                        errs.push("f.amplitude must be a finite number".into());
                        return None;
                    }
                },
            };
            Some(FSpec::CosineMode { amplitude })
        }
        Some("table") => {
            reject_unknown(errs, map, "f", &["kind", "path"]);
            match map.get("path").and_then(Value::as_str) {
                Some(p) if !p.is_empty() => Some(FSpec::Table { path: p.to_string() }),
                _ => {
                    errs.push("f.path must be a nonempty string".into());
                    None
                }
            }
        }
        _ => {
            errs.push("f.kind must be `constant`, `cosine-mode`, or `table`".into());
            None
        }
    }
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

/// Common report head: version, command, resolved config, its hash, seed.
fn report_head(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(cfg.command));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m.insert("config_hash".into(), json!(cfg.hash()));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

/// Writes a JSON value with a trailing newline.
fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// File tag for a radius: `4` for whole numbers, `2p5` for fractions.
fn radius_tag(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r}").replace('.', "p")
    }
}

// ---------------------------------------------------------------------------
// Subcommand runners
// ---------------------------------------------------------------------------

/// Integrates the radial profile, fits the far field, writes the CSV
/// profile and a report with measured-vs-expected quantities.
fn run_radial(cfg: &RunConfig) -> Result<()> {
    let params = RadialParams::new(cfg.n, cfg.c, 1.0)?;
    let model = cfg.h_model.model(cfg.c);
    model.validate()?;
    let mut sol = radial_profile(&params, &model, cfg.r_max, cfg.tol)?;
    u_from_y(&mut sol, cfg.boundary_value);
    sol.check_invariants()?;
    let fit = asymptotic_fit(&sol)?;
    let residual = ode_residual_check(&sol)?;

    let mut csv = Vec::new();
    sol.write_csv(&mut csv)?;
    fs::write(cfg.out.join("radial_profile.csv"), csv)?;

    let c_tilde = (1.0 - 1.0 / (cfg.c * cfg.c)).sqrt();
    let r_probe = sol.r_max();
    let mut report = report_head(cfg);
    report.insert("fit".into(), serde_json::to_value(&fit)?);
    report.insert(
        "expected".into(),
        json!({
            "y_limit": c_tilde,
            "log_coeff": reference_log_coefficient(cfg.n, cfg.c),
            "slope_at_origin": model.value(0.0) - 1.0,
        }),
    );
    report.insert(
        "measured".into(),
        json!({
            "y_at_r_max": sol.y_at(r_probe),
            "slope_at_origin": sol.slope_at_origin()?,
            "ode_residual_sup": residual,
            "r_max": r_probe,
        }),
    );
    write_json(&cfg.out.join("radial_report.json"), &Value::Object(report))?;
    Ok(())
}

/// Solves the Dirichlet problem by continuity, saves the field, and
/// reports the per-step trace plus the converged-field audits.
fn run_dirichlet(cfg: &RunConfig) -> Result<()> {
    let domain = cfg.domain.build()?;
    let schedule = ContinuationSchedule::up_to(cfg.sigma)?;
    let run = continuity_solve(
        &domain,
        cfg.grid_h,
        cfg.c,
        BoundaryData::Constant(cfg.boundary_value),
        &schedule,
    )?;
    run.solution.save(&cfg.out.join("field.txt"))?;

    let mut report = report_head(cfg);
    report.insert("steps".into(), steps_json(&run)?);
    report.insert("audit".into(), serde_json::to_value(admissibility_audit(&run.solution)?)?);
    report.insert("nu_principle".into(), nu_principle_json(&run.solution)?);
    let barrier = match &cfg.domain {
        DomainSpec::Ball { .. } => serde_json::to_value(boundary_barrier_check(&run.solution)?)?,
        DomainSpec::Ellipsoid { .. } => Value::Null,
    };
    report.insert("boundary_barrier".into(), barrier);
    write_json(&cfg.out.join("dirichlet_report.json"), &Value::Object(report))?;
    Ok(())
}

/// Serializes the continuity trace.
fn steps_json(run: &ContinuityRun) -> Result<Value> {
    let steps: Vec<Value> = run
        .steps
        .iter()
        .map(|s| {
            Ok(json!({
                "sigma": s.sigma,
                "preconditioned": s.preconditioned,
                "newton": serde_json::to_value(s.newton)?,
                "monitor": serde_json::to_value(s.monitor)?,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(Value::Array(steps))
}

/// Interior-vs-boundary gradient-factor comparison with an `O(h)` slack
/// estimated from the field itself (`2h * sup |grad of the factor|`).
fn nu_principle_json(field: &FieldSolution) -> Result<Value> {
    let monitor = estimate_monitors(field)?;
    let slack = 2.0 * field.grid.h * nu_gradient_sup(field)?;
    Ok(json!({
        "max_nu_interior": monitor.max_nu_interior,
        "max_nu_boundary": monitor.max_nu_boundary,
        "slack": slack,
        "holds": monitor.max_nu_interior <= monitor.max_nu_boundary + slack,
    }))
}

/// Runs the exhaustion construction, saves every ball field, and reports
/// envelope, convergence, and far-field diagnostics.
fn run_entire(cfg: &RunConfig) -> Result<()> {
    let f = cfg.f.build(cfg.c)?;
    let last = *cfg.radii.last().expect("validated nonempty");
    let ray_radii: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .copied()
        .filter(|&r| r >= cfg.k_radius)
        .collect();
    let reach = 1.05 * ray_radii.last().copied().unwrap_or(10.0).max(60.0 * last);
    let pair = Arc::new(BarrierPair::build(f, cfg.c, cfg.n, reach)?);
    let k_points = ball_lattice(cfg.k_radius, cfg.k_spacing)?;
    let opts = ExhaustOptions::default();
    let res = exhaustion_solve(&pair, &cfg.radii, &k_points, cfg.grid_h, &opts)?;

    for (radius, field) in res.radii.iter().zip(&res.fields) {
        field.save(&cfg.out.join(format!("field_r{}.txt", radius_tag(*radius))))?;
    }

    // For constant data the envelopes collapse onto a single shifted
    // radial profile, so the exhaustion limit can be compared to it.
    let k_diff_vs_radial = match cfg.f {
        FSpec::Constant { value } => {
            let mut worst: f64 = 0.0;
            for (p, u) in res.k_points.iter().zip(&res.limit_on_k) {
                let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                worst = worst.max((u - (pair.psi.eval(r)? + value)).abs());
            }
            Some(worst)
        }
        _ => None,
    };

    let ray = ray_asymptotics(&pair, &[0.0, 0.0, 1.0], &ray_radii)?;

    let mut report = report_head(cfg);
    report.insert(
        "barrier".into(),
        json!({
            "kind": cfg.f.kind(),
            "m": pair.m,
            "m_raw": pair.m_raw,
            "retries": pair.retries,
            "log_coeff": reference_log_coefficient(cfg.n, cfg.c),
        }),
    );
    report.insert(
        "exhaustion".into(),
        json!({
            "radii": res.radii,
            "cauchy_gaps": res.cauchy_gaps,
            "sandwich_margin": res.sandwich_margin,
            "monotone_excess": res.monotone_excess,
            "rescued": res.rescued,
            "newton": serde_json::to_value(&res.newton)?,
            "monitors": serde_json::to_value(&res.monitors)?,
        }),
    );
    report.insert(
        "k_lattice".into(),
        json!({
            "radius": cfg.k_radius,
            "spacing": cfg.k_spacing,
            "points": res.k_points.len(),
            "limit_max_abs": res
                .limit_on_k
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs())),
            "max_diff_vs_radial": k_diff_vs_radial,
        }),
    );
    report.insert("ray_check".into(), serde_json::to_value(&ray)?);
    write_json(&cfg.out.join("entire_report.json"), &Value::Object(report))?;
    Ok(())
}

/// One row of the oracle comparison table.
struct OracleRow {
    set: usize,
    a0: f64,
    b0: f64,
    r0: f64,
    z0: f64,
    limit: f64,
    max_abs_diff: f64,
}

/// Cross-checks closed-form solutions against an independent adaptive
/// integrator on seeded random parameter sets; writes a CSV table and a
/// summary report.
fn run_oracle(cfg: &RunConfig) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.sets);
    let mut max_diff: f64 = 0.0;
    let mut limit_identity_max: f64 = 0.0;
    let mut branch_mismatches = 0usize;
    let mut bound_violations = 0usize;

    for set in 0..cfg.sets {
        let a0 = rng.random_range(-10.0..=-0.1);
        let b0 = rng.random_range(0.1..=10.0);
        let r0 = rng.random_range(0.5..=5.0);
        let z0 = rng.random_range(0.0..=5.0);
        let p = RiccatiParams::new(a0, b0, r0, z0)?;

        let targets: Vec<f64> = (0..=10).map(|k| r0 + k as f64).collect();
        let numeric = sample_path(
            |_, z| a0 * z * z + b0,
            r0,
            z0,
            &targets,
            OdeOptions::with_tol(1e-12),
        )?;
        let mut worst: f64 = 0.0;
        for (&r, &num) in targets.iter().zip(&numeric) {
            let closed = riccati_closed_form(&p, r)?;
            worst = worst.max((closed - num).abs());
        }
        max_diff = max_diff.max(worst);

        let limit = p.limit();
        limit_identity_max = limit_identity_max.max((limit - (-b0 / a0).sqrt()).abs());
        let expected = if z0 > limit {
            Approach::Decreasing
        } else if z0 < limit {
            Approach::Increasing
        } else {
            Approach::Stationary
        };
        if p.approach() != expected {
            branch_mismatches += 1;
        }

        // Companion linear problem: |y| stays under the closed bound.
        let a_lin = rng.random_range(0.1..=10.0);
        let b_base = rng.random_range(-5.0..=5.0);
        let b_osc = rng.random_range(0.0..=2.0);
        let y0 = rng.random_range(-3.0..=3.0);
        let b_sup = b_base.abs() + b_osc;
        let samples = linear_ode_samples(
            |_| a_lin,
            move |r| b_base + b_osc * r.sin(),
            r0,
            y0,
            &targets,
        )?;
        let bound = linear_ode_bound(y0, a_lin, b_sup)?;
        if samples.iter().any(|y| y.abs() > bound + 1e-9) {
            bound_violations += 1;
        }

        rows.push(OracleRow { set, a0, b0, r0, z0, limit, max_abs_diff: worst });
    }

    let mut csv = String::from("set,a0,b0,r0,z0,limit,max_abs_diff\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.set, row.a0, row.b0, row.r0, row.z0, row.limit, row.max_abs_diff
        ));
    }
    fs::write(cfg.out.join("oracle_table.csv"), csv)?;

    let mut report = report_head(cfg);
    report.insert(
        "summary".into(),
        json!({
            "sets": cfg.sets,
            "max_closed_vs_numeric": max_diff,
            "limit_identity_max_err": limit_identity_max,
            "branch_mismatches": branch_mismatches,
            "linear_bound_violations": bound_violations,
        }),
    );
    write_json(&cfg.out.join("oracle_report.json"), &Value::Object(report))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Verify: reduced-scale invariant suite
// ---------------------------------------------------------------------------

/// One verification item.
#[derive(Debug, Serialize)]
struct CheckItem {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(items: &mut Vec<CheckItem>, name: &'static str, outcome: Result<(bool, String)>) {
    let (passed, detail) = match outcome {
        Ok((p, d)) => (p, d),
        Err(e) => (false, format!("error: {e}")),
    };
    items.push(CheckItem { name, passed, detail });
}

/// Runs the reduced-scale invariant suite and writes `verify_report.json`.
///
/// Returns whether every check passed. The suite mirrors the acceptance
/// gates at a scale that completes in a few minutes: radial limits,
/// slopes and far-field coefficients, the closed-form identities and
/// Riccati cross-checks, a Dirichlet solve against the shifted radial
/// profile with its maximum-principle audits, a small exhaustion run
/// with sandwich/Cauchy/far-field checks, and the uniqueness probe.
fn run_verify(cfg: &RunConfig) -> Result<bool> {
    let mut items: Vec<CheckItem> = Vec::new();
    let c = 2.0f64;
    let n = 3usize;
    let c_tilde = (1.0 - 1.0 / (c * c)).sqrt();

    // Radial profile, reused by several checks below.
    let params = RadialParams::new(n, c, 1.0)?;
    let model = HModel::Constant { c };
    let profile = radial_profile(&params, &model, 1000.0, 1e-10)?;

    check(&mut items, "radial_limit", {
        let err = (profile.y_at(1000.0) - c_tilde).abs();
        Ok((err < 1e-3, format!("|y(1000) - {c_tilde:.7}| = {err:.3e}")))
    });

    check(&mut items, "radial_slope_at_origin", (|| {
        let mut worst: f64 = 0.0;
        for (nn, cc) in [(3usize, 2.0f64), (4, 2.0), (3, 1.5)] {
            let p = RadialParams::new(nn, cc, 1.0)?;
            let m = HModel::Constant { c: cc };
            let sol = radial_profile(&p, &m, 50.0, 1e-10)?;
            worst = worst.max((sol.slope_at_origin()? - (cc - 1.0)).abs());
        }
        Ok((worst < 1e-3, format!("max |y'(0) - (C-1)| = {worst:.3e}")))
    })());

    check(&mut items, "radial_log_coefficient", (|| {
        let fit = asymptotic_fit(&profile)?;
        let expect = reference_log_coefficient(n, c);
        let rel = (fit.log_coeff - expect).abs() / expect;
        let qp = RadialParams::new(n, c, 1.0)?;
        let qm = HModel::QuadraticApproach { c, k: 0.3 };
        let qsol = radial_profile(&qp, &qm, 1000.0, 1e-10)?;
        let qfit = asymptotic_fit(&qsol)?;
        let qrel = (qfit.log_coeff - expect).abs() / expect;
        Ok((
            rel < 0.01 && qrel < 0.01,
            format!("constant-H rel err {rel:.3e}, quadratic-H rel err {qrel:.3e}"),
        ))
    })());

    check(&mut items, "limit_identity", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1d);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let nn = rng.random_range(3..=8usize);
            let cc = rng.random_range(1.1..=6.0f64);
            let p = RiccatiParams::soliton_tail(nn, cc, 1.0, 0.0)?;
            let closed = reference_log_coefficient(nn, cc);
            worst = worst.max((p.limit() - closed).abs());
        }
        Ok((worst <= 1e-14, format!("max |sqrt(-B0/A0) - closed form| = {worst:.3e}")))
    })());

    check(&mut items, "regularization_robustness", (|| {
        let ladders: [&[f64]; 3] =
            [&[1e-1, 1e-2], &[1e-1, 1e-2, 1e-3], &[1e-1, 1e-2, 1e-3, 1e-4]];
        let mut sols = Vec::new();
        for ladder in ladders {
            sols.push(crate::radial::radial_profile_with_ladder(
                &params, &model, 100.0, 1e-10, ladder,
            )?);
        }
        let rs: Vec<f64> = (1..=100).map(|i| 0.1 + 0.999 * i as f64).collect();
        let mut worst: f64 = 0.0;
        for a in 0..sols.len() {
            for b in a + 1..sols.len() {
                for &r in &rs {
                    worst = worst.max((sols[a].y_at(r) - sols[b].y_at(r)).abs());
                }
            }
        }
        Ok((worst < 1e-6, format!("max pairwise |y_eps - y_eps'| = {worst:.3e}")))
    })());

    check(&mut items, "sigma_family", (|| {
        let mut residual_worst: f64 = 0.0;
        let mut sols = Vec::new();
        for sigma in [0.25, 0.5, 0.75, 1.0] {
            let p = RadialParams::new(n, c, sigma)?;
            let sol = sigma_solution(&p, 50.0, 1e-10)?;
            residual_worst = residual_worst.max(ode_residual_check(&sol)?);
            sols.push((sigma, sol));
        }
        let mut ordered = true;
        for w in sols.windows(2) {
            for &r in &[0.5, 1.0, 5.0, 20.0, 40.0] {
                if w[0].1.y_at(r) <= w[1].1.y_at(r) {
                    ordered = false;
                }
            }
        }
        let hyper_err = {
            let p = RadialParams::new(n, c, 0.0)?;
            let sol = sigma_solution(&p, 50.0, 1e-10)?;
            let mut worst: f64 = 0.0;
            for &r in &[0.5, 1.0, 5.0, 20.0] {
                worst = worst.max((sol.u_at(r) - hyperboloid_profile(c, r)).abs());
            }
            worst
        };
        Ok((
            residual_worst < 1e-7 && ordered && hyper_err < 1e-8,
            format!(
                "residual {residual_worst:.3e}, ordered {ordered}, hyperboloid err {hyper_err:.3e}"
            ),
        ))
    })());

    check(&mut items, "riccati_oracle", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x2e);
        let mut worst: f64 = 0.0;
        let mut bound_ok = true;
        for _ in 0..20 {
            let a0 = rng.random_range(-10.0..=-0.1);
            let b0 = rng.random_range(0.1..=10.0);
            let r0 = rng.random_range(0.5..=5.0);
            let z0 = rng.random_range(0.0..=5.0);
            let p = RiccatiParams::new(a0, b0, r0, z0)?;
            let targets: Vec<f64> = (0..=10).map(|k| r0 + k as f64).collect();
            let numeric = sample_path(
                |_, z| a0 * z * z + b0,
                r0,
                z0,
                &targets,
                OdeOptions::with_tol(1e-12),
            )?;
            for (&r, &num) in targets.iter().zip(&numeric) {
                worst = worst.max((riccati_closed_form(&p, r)? - num).abs());
            }
            let a_lin = rng.random_range(0.1..=10.0);
            let y0 = rng.random_range(-3.0..=3.0);
            let b_const = rng.random_range(-5.0..=5.0);
            let samples = linear_ode_samples(|_| a_lin, move |_| b_const, r0, y0, &targets)?;
            let bound = linear_ode_bound(y0, a_lin, b_const.abs())?;
            if samples.iter().any(|y| y.abs() > bound + 1e-9) {
                bound_ok = false;
            }
        }
        Ok((
            worst < 1e-8 && bound_ok,
            format!("max closed-vs-numeric {worst:.3e}, linear bound ok {bound_ok}"),
        ))
    })());

    // Dirichlet block: sigma = 1 ball solve, compared against the shifted
    // radial profile, plus the converged-field audits.
    let ball = ConvexDomain::ball(vec![0.0; 3], 1.0)?;
    let schedule = ContinuationSchedule::up_to(1.0)?;
    let run_coarse = continuity_solve(&ball, 0.25, c, BoundaryData::Constant(0.0), &schedule)?;
    let run_fine = continuity_solve(&ball, 0.125, c, BoundaryData::Constant(0.0), &schedule)?;

    let radial_sup_err = |run: &ContinuityRun| -> Result<f64> {
        let sigma_params = RadialParams::new(n, c, 1.0)?;
        let radial = sigma_solution(&sigma_params, 4.0, 1e-11)?;
        let shift = radial.u_at(1.0);
        let field = &run.solution;
        let mask = crate::elliptic::grid::classify(&field.grid, &field.domain)?;
        let mut worst: f64 = 0.0;
        for &lin in &mask.interior {
            let x = field.grid.point(&field.grid.to_multi(lin));
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let expect = radial.u_at(r) - shift;
            worst = worst.max((field.u[lin] - expect).abs());
        }
        Ok(worst)
    };

    check(&mut items, "dirichlet_matches_radial", (|| {
        let coarse = radial_sup_err(&run_coarse)?;
        let fine = radial_sup_err(&run_fine)?;
        let ratio = coarse / fine;
        Ok((
            fine <= 5e-3 && (3.0..=5.0).contains(&ratio),
            format!("sup err {fine:.3e} at h=0.125, halving ratio {ratio:.2}"),
        ))
    })());

    check(&mut items, "gradient_factor_principle", (|| {
        let mut holds = true;
        let mut detail = String::new();
        for run in [&run_coarse, &run_fine] {
            let field = &run.solution;
            let slack = 2.0 * field.grid.h * nu_gradient_sup(field)?;
            for step in &run.steps {
                if step.monitor.max_nu_interior > step.monitor.max_nu_boundary + slack {
                    holds = false;
                    detail = format!(
                        "violated at sigma={}: interior {} > boundary {} + {slack:.3e}",
                        step.sigma, step.monitor.max_nu_interior, step.monitor.max_nu_boundary
                    );
                }
            }
        }
        if holds {
            detail = "interior max never exceeds boundary max plus 2h-slack".into();
        }
        Ok((holds, detail))
    })());

    check(&mut items, "admissibility_audit", (|| {
        let mut total_bad = 0usize;
        let mut nodes = 0usize;
        for run in [&run_coarse, &run_fine] {
            let audit = admissibility_audit(&run.solution)?;
            total_bad += audit.spacelike_violations
                + audit.h1_violations
                + audit.h2_violations
                + audit.maclaurin_violations;
            nodes += audit.nodes;
        }
        Ok((total_bad == 0, format!("{total_bad} violations over {nodes} nodes")))
    })());

    check(&mut items, "boundary_barrier", (|| {
        let mut ok = true;
        let mut worst = String::new();
        for run in [&run_coarse, &run_fine] {
            let rep = boundary_barrier_check(&run.solution)?;
            if rep.min_normal < -rep.slope_bound || rep.max_normal > 0.0 {
                ok = false;
                worst = format!(
                    "normal slope range [{:.4}, {:.4}] leaves [-{:.4}, 0]",
                    rep.min_normal, rep.max_normal, rep.slope_bound
                );
            }
        }
        if ok {
            worst = "normal slopes stay within the radial corridor".into();
        }
        Ok((ok, worst))
    })());

    // Entire block at reduced scale.
    let k_points = ball_lattice(1.5, 0.5)?;
    let radii = [2.5, 4.0, 6.0];
    let opts = ExhaustOptions::default();

    let constant_pair = Arc::new(BarrierPair::build(
        BoundaryValueF::constant(0.0, c)?,
        c,
        n,
        1.05e3,
    )?);
    let cosine_pair = Arc::new(BarrierPair::build(
        BoundaryValueF::cosine_mode(0.1, c)?,
        c,
        n,
        1.05e3,
    )?);

    let constant_res = exhaustion_solve(&constant_pair, &radii, &k_points, 0.25, &opts)?;
    let cosine_res = exhaustion_solve(&cosine_pair, &radii, &k_points, 0.25, &opts)?;

    check(&mut items, "entire_constant_data", (|| {
        let mut worst: f64 = 0.0;
        for (p, u) in constant_res.k_points.iter().zip(&constant_res.limit_on_k) {
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max((u - constant_pair.psi.eval(r)?).abs());
        }
        let collapsed = constant_pair.m == 0.0;
        Ok((
            worst < 2e-2 && collapsed,
            format!("max diff vs radial {worst:.3e}, envelopes collapsed {collapsed}"),
        ))
    })());

    check(&mut items, "entire_cosine_sandwich", (|| {
        let gaps = &cosine_res.cauchy_gaps;
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        Ok((
            cosine_res.sandwich_margin >= 0.0 && decreasing,
            format!(
                "sandwich margin {:.3e}, cauchy gaps {:?} decreasing {decreasing}",
                cosine_res.sandwich_margin, gaps
            ),
        ))
    })());

    check(&mut items, "entire_far_field", (|| {
        let ray = ray_asymptotics(&cosine_pair, &[0.0, 0.0, 1.0], &[10.0, 100.0, 1000.0])?;
        let lower_dec = ray.err_lower.windows(2).all(|w| w[1] < w[0]);
        let upper_dec = ray.err_upper.windows(2).all(|w| w[1] < w[0]);
        let last = ray.err_lower.last().copied().unwrap_or(f64::INFINITY);
        Ok((
            lower_dec && upper_dec && last < 0.05,
            format!(
                "ray errors lower {:?} upper {:?}",
                ray.err_lower, ray.err_upper
            ),
        ))
    })());

    check(&mut items, "uniqueness_and_comparison", (|| {
        let u1 = &cosine_res.fields[0];
        // Same data, different initial guesses: the exhaustion solved
        // this ball starting at the lower envelope; re-solving from the
        // upper envelope must land on the same field.
        let ball_dom = ConvexDomain::ball(vec![0.0; 3], radii[0])?;
        let grid = crate::elliptic::GridSpec::cover(&ball_dom, 0.25)?;
        let pair_b = cosine_pair.clone();
        let boundary = BoundaryData::Func(Box::new(move |x: &[f64]| {
            pair_b.upper_sampled(x).expect("barrier covers the ball")
        }));
        let problem = crate::elliptic::Problem::new(ball_dom, grid, c, boundary)?;
        let pair_i = cosine_pair.clone();
        let mut u_alt =
            problem.init_field(|x| pair_i.upper_sampled(x).expect("barrier covers the ball"));
        let newton = crate::elliptic::NewtonOptions::default();
        crate::elliptic::newton_solve(&problem, 1.0, &mut u_alt, &newton)?;
        let u2 = problem.solution(1.0, &u_alt);
        let probe = uniqueness_probe(u1, &u2, 1e-6)?;
        let same = probe.sup_diff <= 1e-8;

        // Ordered data: raising the datum by a constant must give back
        // the field raised by that constant (order preserved; the
        // translate is an exact discrete solution).
        let lift = 0.25;
        let ball_dom2 = ConvexDomain::ball(vec![0.0; 3], radii[0])?;
        let grid2 = crate::elliptic::GridSpec::cover(&ball_dom2, 0.25)?;
        let pair_s = cosine_pair.clone();
        let boundary2 = BoundaryData::Func(Box::new(move |x: &[f64]| {
            pair_s.upper_sampled(x).expect("barrier covers the ball") + lift
        }));
        let problem2 = crate::elliptic::Problem::new(ball_dom2, grid2, c, boundary2)?;
        let pair_j = cosine_pair.clone();
        let mut u_lift = problem2
            .init_field(|x| pair_j.lower_sampled(x).expect("barrier covers the ball") + lift);
        crate::elliptic::newton_solve(&problem2, 1.0, &mut u_lift, &newton)?;
        let mut min_gap = f64::INFINITY;
        let mut lift_err: f64 = 0.0;
        for &lin in &problem2.mask.interior {
            min_gap = min_gap.min(u_lift[lin] - u1.u[lin]);
            lift_err = lift_err.max((u_lift[lin] - u1.u[lin] - lift).abs());
        }
        let ordered = min_gap > 0.0 && lift_err <= 1e-7;
        Ok((
            same && ordered,
            format!(
                "two-init sup diff {:.3e}, lifted-data order gap {min_gap:.3e}, lift err {lift_err:.3e}",
                probe.sup_diff
            ),
        ))
    })());

    let passed = items.iter().all(|i| i.passed);
    let mut report = report_head(cfg);
    report.insert("passed".into(), json!(passed));
    report.insert("checks".into(), serde_json::to_value(&items)?);
    write_json(&cfg.out.join("verify_report.json"), &Value::Object(report))?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// Argument parsing and entry point
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "minksol",
    version,
    about = "Translating-soliton solver: radial profiles, Dirichlet problems, entire solutions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: CliCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a JSON configuration file (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides MINKSOL_OUT and the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for randomized sampling.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Integrate the radial profile and fit its far field.
    Radial(CommonArgs),
    /// Solve the Dirichlet problem on a convex domain.
    Dirichlet(CommonArgs),
    /// Construct an entire solution by exhaustion between barriers.
    Entire(CommonArgs),
    /// Cross-check closed forms against an independent integrator.
    Oracle(CommonArgs),
    /// Run the reduced-scale invariant suite.
    Verify(CommonArgs),
}

impl CliCommand {
    fn split(&self) -> (Command, &CommonArgs) {
        match self {
            CliCommand::Radial(a) => (Command::Radial, a),
            CliCommand::Dirichlet(a) => (Command::Dirichlet, a),
            CliCommand::Entire(a) => (Command::Entire, a),
            CliCommand::Oracle(a) => (Command::Oracle, a),
            CliCommand::Verify(a) => (Command::Verify, a),
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version exit cleanly; real parse errors are
            // configuration errors.
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_CONFIG };
            let _ = e.print();
            return code;
        }
    };
    let (command, common) = cli.cmd.split();

    let text = match &common.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read config {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => "{}".to_string(),
    };
    let mut cfg = match parse_config(&text, command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    } else if let Ok(env_out) = std::env::var(OUT_ENV) {
        if !env_out.is_empty() {
            cfg.out = PathBuf::from(env_out);
        }
    }
    if let Err(e) = fs::create_dir_all(&cfg.out) {
        eprintln!("cannot create output directory {}: {e}", cfg.out.display());
        return EXIT_SOLVER;
    }

    let outcome = match command {
        Command::Radial => run_radial(&cfg).map(|()| true),
        Command::Dirichlet => run_dirichlet(&cfg).map(|()| true),
        Command::Entire => run_entire(&cfg).map(|()| true),
        Command::Oracle => run_oracle(&cfg).map(|()| true),
        Command::Verify => run_verify(&cfg),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("verification failed; see verify_report.json");
            EXIT_SOLVER
        }
        Err(e) => {
            let diag = json!({
                "command": cfg.command,
                "config_hash": cfg.hash(),
                "error": e.to_string(),
            });
            let _ = write_json(&cfg.out.join("diagnostic.json"), &diag);
            eprintln!("{e}");
            EXIT_SOLVER
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_violations_accumulate() {
        let cfg = parse_config("{}", Command::Radial).unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.c, 2.0);
        assert_eq!(cfg.command, "radial");

        let spec_example = r#"{"command":"radial","n":3,"C":2.0,"H":{"kind":"constant"},"r_max":1000}"#;
        assert!(parse_config(spec_example, Command::Radial).is_ok());

        let err = parse_config(r#"{"C":1.0,"n":2,"bogus":5}"#, Command::Radial).unwrap_err();
        let Error::SchemaError(violations) = err else {
            panic!("expected schema error")
        };
        assert!(violations.iter().any(|v| v == "C must exceed 1"));
        assert!(violations.iter().any(|v| v == "n must be ≥ 3"));
        assert!(violations.iter().any(|v| v.contains("unknown key `bogus`")));
        assert_eq!(violations.len(), 3);
    }

    #[test]
    fn command_mismatch_and_bad_json_are_schema_errors() {
        let err = parse_config(r#"{"command":"radial"}"#, Command::Oracle).unwrap_err();
        assert!(matches!(err, Error::SchemaError(_)));
        let err = parse_config("not json", Command::Radial).unwrap_err();
        let Error::SchemaError(v) = err else { panic!() };
        assert!(v[0].contains("not valid JSON"));
    }

    #[test]
    fn domain_and_f_validation() {
        let text = r#"{"domain":{"shape":"ball","center":[0,0],"radius":1.0}}"#;
        let err = parse_config(text, Command::Dirichlet).unwrap_err();
        let Error::SchemaError(v) = err else { panic!() };
        assert!(v.iter().any(|e| e.contains("n = 3 coordinates")));

        let text = r#"{"domain":{"shape":"ellipsoid","center":[0,0,0],"semi_axes":[1.0,2.0,-1.0]}}"#;
        assert!(parse_config(text, Command::Dirichlet).is_err());

        let text = r#"{"f":{"kind":"cosine-mode","amplitude":0.1}}"#;
        let cfg = parse_config(text, Command::Entire).unwrap();
        assert_eq!(cfg.f, FSpec::CosineMode { amplitude: 0.1 });

        let text = r#"{"f":{"kind":"mystery"}}"#;
        assert!(parse_config(text, Command::Entire).is_err());

        let text = r#"{"radii":[4.0,4.0]}"#;
        assert!(parse_config(text, Command::Entire).is_err());

        let text = r#"{"k_radius":5.0}"#;
        let err = parse_config(text, Command::Entire).unwrap_err();
        let Error::SchemaError(v) = err else { panic!() };
        assert!(v.iter().any(|e| e.contains("k_radius")));
    }

    #[test]
    fn hash_is_stable_and_seed_sensitive() {
        let a = parse_config("{}", Command::Radial).unwrap();
        let b = parse_config("{}", Command::Radial).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = parse_config("{}", Command::Radial).unwrap();
        c.seed = 7;
        assert_ne!(a.hash(), c.hash());
        // The output directory is not part of the hash.
        let mut d = parse_config("{}", Command::Radial).unwrap();
        d.out = PathBuf::from("/tmp/elsewhere");
        assert_eq!(a.hash(), d.hash());
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn radius_tags() {
        assert_eq!(radius_tag(4.0), "4");
        assert_eq!(radius_tag(16.0), "16");
        assert_eq!(radius_tag(2.5), "2p5");
    }

    #[test]
    fn sphere_table_parsing() {
        let rows =
            parse_sphere_table("theta,phi,value\n0.1,0.2,0.3\n1.0, 2.0 ,3.0\n").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1], (1.0, 2.0, 3.0));
        assert!(parse_sphere_table("0.1,0.2\n").is_err());
        assert!(parse_sphere_table("a,b,c\nx,y,z\n").is_err());
    }
}
