//! Run configuration: a flat `key = value` document, flag overrides, and
//! validation.
//!
//! ```text
//! # comment
//! command = constraint-experiment
//! grid.n = 33
//! zeta = critical
//! experiment.N_list = 1,2,4,8,16
//! ```
//!
//! Keys are dotted paths; every key has a default except `command`. A
//! `manifest.json` written by a previous run is accepted in place of a text
//! file and reproduces that run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::boundary::{Family, RandomBoundaryModel};
use crate::constraints::{ConstraintKind, ConstraintMap};
use crate::error::{Error, Result};
use crate::experiments::Threshold;
use crate::expr::{split_top_level, Expr};
use crate::grid::{Grid2D, Point, SubdomainMask};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "RANDBC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sample,
    ConstraintExperiment,
    VarianceCheck,
    TailCheck,
    Runge,
    Qpat,
    Conductivity,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Solve,
        Command::Sample,
        Command::ConstraintExperiment,
        Command::VarianceCheck,
        Command::TailCheck,
        Command::Runge,
        Command::Qpat,
        Command::Conductivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sample => "sample",
            Command::ConstraintExperiment => "constraint-experiment",
            Command::VarianceCheck => "variance-check",
            Command::TailCheck => "tail-check",
            Command::Runge => "runge",
            Command::Qpat => "qpat",
            Command::Conductivity => "conductivity",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Uint,
    OptUint,
    Float,
    OptFloat,
    Text,
    Choice(&'static [&'static str]),
    /// Comma-separated floats; may be empty.
    Floats,
    /// Comma-separated positive integers.
    Uints,
    /// `x,y`.
    Point,
    /// `x,y; x,y; …`
    Points,
    Expr,
    /// Comma-separated expressions.
    Exprs,
}

impl Kind {
    fn describe(self) -> String {
        match self {
            Kind::Uint => "a non-negative integer".into(),
            Kind::OptUint => "a non-negative integer or empty".into(),
            Kind::Float => "a number".into(),
            Kind::OptFloat => "a number or empty".into(),
            Kind::Text => "text".into(),
            Kind::Choice(c) => format!("one of {}", c.join(", ")),
            Kind::Floats => "a comma-separated list of numbers".into(),
            Kind::Uints => "a comma-separated list of positive integers".into(),
            Kind::Point => "a point `x,y`".into(),
            Kind::Points => "points `x,y; x,y; ...`".into(),
            Kind::Expr => "an expression in x and y".into(),
            Kind::Exprs => "comma-separated expressions in x and y".into(),
        }
    }
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind,
        default,
    }
}

const COMMANDS: &[&str] = &[
    "solve",
    "sample",
    "constraint-experiment",
    "variance-check",
    "tail-check",
    "runge",
    "qpat",
    "conductivity",
];

const KEYS: &[KeySpec] = &[
    key("command", Kind::Choice(COMMANDS), ""),
    key("seed", Kind::Uint, "0"),
    key("out_dir", Kind::Text, "out"),
    key("threads", Kind::OptUint, ""),
    key("grid.n", Kind::Uint, "65"),
    key("omega_prime.lo", Kind::Point, "0.25,0.25"),
    key("omega_prime.hi", Kind::Point, "0.75,0.75"),
    key("coeff.a", Kind::Text, "1"),
    key("coeff.q", Kind::Expr, "0"),
    key("coeff.lambda", Kind::OptFloat, ""),
    key("solver.rtol", Kind::Float, "1e-10"),
    key("solver.maxiter", Kind::OptUint, ""),
    key(
        "bc.family",
        Kind::Choice(&["gaussian", "rademacher", "uniform"]),
        "gaussian",
    ),
    key("bc.K", Kind::Uint, "33"),
    key("bc.sigma.c", Kind::Float, "1"),
    key("bc.sigma.s", Kind::Float, "1.5"),
    key(
        "zeta",
        Kind::Choice(&["nodal", "critical", "jacobian", "augmented"]),
        "critical",
    ),
    key("zeta.direction", Kind::Point, "1,0"),
    key("solve.bc", Kind::Expr, "x^2 - y^2"),
    key("sample.count", Kind::Uint, "10"),
    key("experiment.N_list", Kind::Uints, "1,2,4,8,16"),
    key("experiment.M", Kind::Uint, "200"),
    key("experiment.tau", Kind::Text, "auto"),
    key(
        "experiment.source",
        Kind::Choice(&["dictionary", "solve"]),
        "dictionary",
    ),
    key(
        "variance.points",
        Kind::Points,
        "0.3,0.3; 0.5,0.3; 0.7,0.3; 0.3,0.5; 0.5,0.5; 0.7,0.5; 0.3,0.7; 0.5,0.7; 0.7,0.7",
    ),
    key("variance.M", Kind::Uint, "10000"),
    key("tail.M", Kind::Uint, "10000"),
    key("tail.t", Kind::Floats, ""),
    key(
        "runge.target",
        Kind::Choice(&["fundamental_solution", "harmonic_poly", "dictionary_member"]),
        "fundamental_solution",
    ),
    key("runge.pole", Kind::Point, "0.9,0.9"),
    key("runge.degree", Kind::Uint, "2"),
    key("runge.member", Kind::Uint, "5"),
    key("runge.disk.center", Kind::Point, "0.5,0.5"),
    key("runge.disk.radius", Kind::Float, "0.2"),
    key(
        "runge.lambdas",
        Kind::Floats,
        "1e-2,1e-4,1e-6,1e-8,1e-10,1e-12",
    ),
    key(
        "qpat.mu",
        Kind::Text,
        "1 + 0.5*exp(-50*((x-0.5)^2 + (y-0.5)^2))",
    ),
    key("qpat.bc", Kind::Text, "const:1"),
    key("qpat.N", Kind::Uint, "1"),
    key("qpat.tau", Kind::Float, "0.05"),
    key("conductivity.a", Kind::Expr, "exp(x)"),
    key("conductivity.bc", Kind::Exprs, "x1,x2"),
    key("conductivity.tau", Kind::Float, "0.1"),
    key("conductivity.anchor", Kind::Point, "0.5,0.5"),
];

/// All accepted keys, in documentation order.
pub fn valid_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|k| k.name)
}

fn spec(name: &str) -> Result<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name).ok_or_else(|| {
        Error::Config(format!(
            "unknown key `{name}`; valid keys are: {}",
            valid_keys().collect::<Vec<_>>().join(", ")
        ))
    })
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, ()> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or(())
        })
        .collect()
}

fn parse_point(s: &str) -> std::result::Result<Point, ()> {
    match parse_floats(s)?.as_slice() {
        [x, y] => Ok([*x, *y]),
        _ => Err(()),
    }
}

fn check_kind(spec: &KeySpec, value: &str) -> Result<()> {
    let v = value.trim();
    let ok = match spec.kind {
        Kind::Uint => v.parse::<u64>().is_ok(),
        Kind::OptUint => v.is_empty() || v.parse::<u64>().is_ok(),
        Kind::Float => v.parse::<f64>().is_ok_and(f64::is_finite),
        Kind::OptFloat => v.is_empty() || v.parse::<f64>().is_ok_and(f64::is_finite),
        Kind::Text => true,
        Kind::Choice(c) => c.contains(&v),
        Kind::Floats => parse_floats(v).is_ok(),
        Kind::Uints => {
            !v.is_empty()
                && v.split(',')
                    .all(|t| t.trim().parse::<usize>().is_ok_and(|n| n > 0))
        }
        Kind::Point => parse_point(v).is_ok(),
        Kind::Points => !v.is_empty() && v.split(';').all(|p| parse_point(p).is_ok()),
        Kind::Expr => {
            return Expr::parse(v)
                .map(|_| ())
                .map_err(|e| Error::Config(format!("key `{}`: {e}", spec.name)))
        }
        Kind::Exprs => {
            for part in split_top_level(v, ',') {
                Expr::parse(part)
                    .map_err(|e| Error::Config(format!("key `{}`: {e}", spec.name)))?;
            }
            true
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "key `{}`: expected {}, got `{value}`",
            spec.name,
            spec.kind.describe()
        )))
    }
}

/// Parses the text format into `(key, value)` pairs.
pub fn parse_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            ))
        })?;
        let k = k.trim();
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{k}`",
                lineno + 1
            )));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Reads the `config` object of a manifest.
pub fn parse_manifest(text: &str) -> Result<Vec<(String, String)>> {
    let doc: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("manifest is not valid JSON: {e}")))?;
    let cfg = doc
        .get("config")
        .and_then(|c| c.as_object())
        .ok_or_else(|| Error::Config("manifest has no `config` object".into()))?;
    cfg.iter()
        .map(|(k, v)| match v.as_str() {
            Some(s) => Ok((k.clone(), s.to_string())),
            None => Err(Error::Config(format!(
                "manifest key `{k}`: expected a string"
            ))),
        })
        .collect()
}

/// Reads a config file; `.json` files are treated as manifests.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        parse_manifest(&text)
    } else {
        parse_text(&text)
    }
}

/// A validated configuration with every key resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    command: Command,
    values: BTreeMap<String, String>,
}

/// Merges defaults, file values and overrides (in increasing precedence) and
/// validates the result.
pub fn parse_config(
    file: &[(String, String)],
    overrides: &[(String, String)],
) -> Result<RunConfig> {
    let mut values: BTreeMap<String, String> = KEYS
        .iter()
        .map(|k| (k.name.to_string(), k.default.to_string()))
        .collect();
    for (k, v) in file.iter().chain(overrides) {
        let s = spec(k)?;
        check_kind(s, v)?;
        values.insert(k.clone(), v.trim().to_string());
    }
    let command: Command = match values["command"].as_str() {
        "" => return Err(Error::Config("no command given".into())),
        c => c.parse()?,
    };
    if values["threads"].is_empty() {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{THREADS_ENV} must be a positive integer, got `{v}`"
                    ))
                })?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        values.insert("threads".into(), threads.to_string());
    }
    let cfg = RunConfig { command, values };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn command(&self) -> Command {
        self.command
    }

    /// Every key with its resolved value.
    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        &self.values[key]
    }

    fn bad(&self, key: &str) -> Error {
        Error::Config(format!("key `{key}`: invalid value `{}`", self.values[key]))
    }

    pub fn uint(&self, key: &str) -> Result<usize> {
        self.raw(key).parse().map_err(|_| self.bad(key))
    }

    pub fn opt_uint(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            "" => Ok(None),
            v => v.parse().map(Some).map_err(|_| self.bad(key)),
        }
    }

    pub fn float(&self, key: &str) -> Result<f64> {
        self.raw(key).parse().map_err(|_| self.bad(key))
    }

    pub fn opt_float(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            "" => Ok(None),
            v => v.parse().map(Some).map_err(|_| self.bad(key)),
        }
    }

    pub fn floats(&self, key: &str) -> Result<Vec<f64>> {
        parse_floats(self.raw(key)).map_err(|_| self.bad(key))
    }

    pub fn uints(&self, key: &str) -> Result<Vec<usize>> {
        self.raw(key)
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| self.bad(key)))
            .collect()
    }

    pub fn point(&self, key: &str) -> Result<Point> {
        parse_point(self.raw(key)).map_err(|_| self.bad(key))
    }

    pub fn points(&self, key: &str) -> Result<Vec<Point>> {
        self.raw(key)
            .split(';')
            .map(|p| parse_point(p).map_err(|_| self.bad(key)))
            .collect()
    }

    pub fn expr(&self, key: &str) -> Result<Expr> {
        Expr::parse(self.raw(key)).map_err(|e| Error::Config(format!("key `{key}`: {e}")))
    }

    pub fn exprs(&self, key: &str) -> Result<Vec<Expr>> {
        split_top_level(self.raw(key), ',')
            .into_iter()
            .map(|s| Expr::parse(s).map_err(|e| Error::Config(format!("key `{key}`: {e}"))))
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.raw("seed").parse().expect("validated")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out_dir"))
    }

    pub fn threads(&self) -> usize {
        self.raw("threads").parse().expect("resolved at parse time")
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.uint("grid.n")?)
    }

    pub fn omega_prime(&self, grid: &Grid2D) -> Result<SubdomainMask> {
        SubdomainMask::rect(
            grid,
            self.point("omega_prime.lo")?,
            self.point("omega_prime.hi")?,
        )
    }

    pub fn model(&self) -> Result<RandomBoundaryModel> {
        RandomBoundaryModel::new(
            self.uint("bc.K")?,
            self.float("bc.sigma.c")?,
            self.float("bc.sigma.s")?,
            self.raw("bc.family").parse::<Family>()?,
        )
    }

    pub fn constraint_map(&self) -> Result<ConstraintMap> {
        match self.raw("zeta").parse::<ConstraintKind>()? {
            ConstraintKind::Critical => {
                ConstraintMap::critical_along(self.point("zeta.direction")?)
            }
            kind => Ok(ConstraintMap::new(kind)),
        }
    }

    pub fn threshold(&self) -> Result<Threshold> {
        self.raw("experiment.tau")
            .parse()
            .map_err(|e| Error::Config(format!("key `experiment.tau`: {e}")))
    }

    /// Checks everything that can be checked without solving.
    fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.omega_prime(&grid)?;
        self.model()?;
        self.constraint_map()?;
        self.threshold()?;
        if self.threads() == 0 {
            return Err(Error::Config("key `threads`: must be positive".into()));
        }
        let rtol = self.float("solver.rtol")?;
        if !(rtol > 0.0 && rtol < 1.0) {
            return Err(Error::Config(format!(
                "key `solver.rtol`: must lie in (0, 1), got {rtol}"
            )));
        }
        let parts = split_top_level(self.raw("coeff.a"), ';');
        if !(parts.len() == 1 || parts.len() == 3) {
            return Err(Error::Config(
                "key `coeff.a`: expected one expression or three separated by `;` (a11; a12; a22)"
                    .into(),
            ));
        }
        for p in parts {
            Expr::parse(p).map_err(|e| Error::Config(format!("key `coeff.a`: {e}")))?;
        }
        match self.command {
            Command::Runge => {
                SubdomainMask::disk(
                    &grid,
                    self.point("runge.disk.center")?,
                    self.float("runge.disk.radius")?,
                )?;
                let l = self.floats("runge.lambdas")?;
                if l.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::Config(
                        "key `runge.lambdas`: weights must be positive".into(),
                    ));
                }
            }
            Command::Conductivity => {
                if self.exprs("conductivity.bc")?.len() != 2 {
                    return Err(Error::Config(
                        "key `conductivity.bc`: exactly two boundary expressions are required"
                            .into(),
                    ));
                }
            }
            Command::Qpat => {
                let bc = self.raw("qpat.bc");
                let ok = bc == "random"
                    || bc
                        .strip_prefix("const:")
                        .is_some_and(|v| v.trim().parse::<f64>().is_ok_and(f64::is_finite));
                if !ok {
                    return Err(Error::Config(format!(
                        "key `qpat.bc`: expected `random` or `const:<value>`, got `{bc}`"
                    )));
                }
                if self.uint("qpat.N")? == 0 {
                    return Err(Error::Config("key `qpat.N`: must be at least 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
