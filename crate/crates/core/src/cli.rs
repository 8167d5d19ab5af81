//! The `randbc` command line: argument parsing, orchestration and artifact
//! output.
//!
//! Every run writes its tables as CSV plus a `manifest.json` that records the
//! resolved configuration and the SHA-256 of each output. Passing that
//! manifest back (`randbc replay manifest.json`) reproduces the tables byte for
//! byte, whatever the worker count.
//!
//! Exit status: 0 on success, 1 on a numerical or domain failure, 2 on a
//! configuration or I/O problem.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::boundary::CoefficientSampler;
use crate::config::{parse_config, read_config_file, Command, RunConfig};
use crate::constraints::{extract_cover, max_abs};
use crate::error::{Error, Result};
use crate::experiments::{
    success_curve, tail_check, trial_fields, variance_identity_check, FieldSource, TrialConfig,
};
use crate::expr::{split_top_level, Expr};
use crate::field::ScalarField;
use crate::grid::{Grid2D, SubdomainMask};
use crate::inverse::{
    conductivity_forward, conductivity_reconstruct, qpat_forward, qpat_reconstruct_multi,
    relative_l2_error,
};
use crate::rng::{stream, Purpose};
use crate::runge::{build_dictionary_with, make_target, tradeoff_curve, TargetKind};
use crate::solver::{assemble_with, CoefficientField, SolveMethod, SolverOptions};

#[derive(Debug, Parser)]
#[command(
    name = "randbc",
    version,
    about = "Random boundary data, non-zero constraints and hybrid-imaging reconstructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file (`key = value` lines) or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: $RANDBC_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Solve the Dirichlet problem for `solve.bc`.
    Solve(Common),
    /// Draw boundary functions from the random model.
    Sample(Common),
    /// Success probability of the constraint event versus N.
    ConstraintExperiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        zeta: Option<String>,
        #[arg(long = "N-list")]
        n_list: Option<String>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long)]
        tau: Option<String>,
    },
    /// Monte-Carlo versus series for E ζ(u)².
    VarianceCheck(Common),
    /// Sub-Gaussian tail of the boundary norm.
    TailCheck(Common),
    /// Regularized Runge approximation tradeoff curve.
    Runge {
        #[command(flatten)]
        common: Common,
        /// Pole `X,Y` of the fundamental solution.
        #[arg(long)]
        pole: Option<String>,
        /// Disk `CX,CY,R`.
        #[arg(long)]
        disk: Option<String>,
        #[arg(long = "K")]
        k: Option<usize>,
        /// Comma-separated positive weights.
        #[arg(long)]
        lambdas: Option<String>,
    },
    /// Absorption recovery from internal energy.
    Qpat {
        #[command(flatten)]
        common: Common,
        /// Expression in x, y or a .csv/.bin field file.
        #[arg(long)]
        mu: Option<String>,
        /// `random` or `const:<value>`.
        #[arg(long)]
        bc: Option<String>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Conductivity recovery from two solutions.
    Conductivity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<String>,
        /// Two comma-separated boundary expressions.
        #[arg(long)]
        bc: Option<String>,
    },
    /// Rerun the experiment recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io { .. } => 2,
        _ => 1,
    }
}

fn push(out: &mut Vec<(String, String)>, key: &str, v: Option<impl ToString>) {
    if let Some(v) = v {
        out.push((key.to_string(), v.to_string()));
    }
}

/// Resolves the command line into a validated configuration.
fn resolve(cli: Cli) -> Result<RunConfig> {
    let mut file = Vec::new();
    let mut over = Vec::new();
    let (command, common) = match cli.command {
        Sub::Replay {
            manifest,
            out_dir,
            threads,
        } => {
            let file = read_config_file(&manifest)?;
            push(
                &mut over,
                "out_dir",
                out_dir.map(|p| p.display().to_string()),
            );
            push(&mut over, "threads", threads);
            return parse_config(&file, &over);
        }
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Sample(c) => (Command::Sample, c),
        Sub::VarianceCheck(c) => (Command::VarianceCheck, c),
        Sub::TailCheck(c) => (Command::TailCheck, c),
        Sub::ConstraintExperiment {
            common,
            zeta,
            n_list,
            m,
            tau,
        } => {
            push(&mut over, "zeta", zeta);
            push(&mut over, "experiment.N_list", n_list);
            push(&mut over, "experiment.M", m);
            push(&mut over, "experiment.tau", tau);
            (Command::ConstraintExperiment, common)
        }
        Sub::Runge {
            common,
            pole,
            disk,
            k,
            lambdas,
        } => {
            push(&mut over, "runge.pole", pole);
            if let Some(d) = disk {
                let parts: Vec<&str> = d.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::Config(format!("--disk expects CX,CY,R, got `{d}`")));
                }
                push(
                    &mut over,
                    "runge.disk.center",
                    Some(format!("{},{}", parts[0], parts[1])),
                );
                push(&mut over, "runge.disk.radius", Some(parts[2]));
            }
            push(&mut over, "bc.K", k);
            push(&mut over, "runge.lambdas", lambdas);
            (Command::Runge, common)
        }
        Sub::Qpat {
            common,
            mu,
            bc,
            n,
            tau,
        } => {
            push(&mut over, "qpat.mu", mu);
            push(&mut over, "qpat.bc", bc);
            push(&mut over, "qpat.N", n);
            push(&mut over, "qpat.tau", tau);
            (Command::Qpat, common)
        }
        Sub::Conductivity { common, a, bc } => {
            push(&mut over, "conductivity.a", a);
            push(&mut over, "conductivity.bc", bc);
            (Command::Conductivity, common)
        }
    };
    if let Some(path) = &common.config {
        file = read_config_file(path)?;
    }
    if let Some((_, c)) = file.iter().find(|(k, _)| k == "command") {
        if c.trim() != command.name() {
            return Err(Error::Config(format!(
                "config file is for `{}`, not `{command}`",
                c.trim()
            )));
        }
    }
    let mut head = vec![("command".to_string(), command.name().to_string())];
    push(&mut head, "seed", common.seed);
    push(
        &mut head,
        "out_dir",
        common.out_dir.map(|p| p.display().to_string()),
    );
    push(&mut head, "threads", common.threads);
    for s in &common.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
        head.push((k.trim().to_string(), v.trim().to_string()));
    }
    // subcommand flags take precedence over --set
    head.extend(over);
    parse_config(&file, &head)
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = resolve(cli).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads())
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.threads())))?;
        let artifacts = pool.install(|| execute(&cfg))?;
        write_outputs(&cfg, &artifacts)
    });
    match outcome {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("randbc: {e}");
            exit_code(&e)
        }
    }
}

/// A named output file and its contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents,
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Writes the artifacts and `manifest.json` into `out_dir`. On failure every
/// file written by this call is removed again.
pub fn write_outputs(cfg: &RunConfig, artifacts: &[Artifact]) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(&dir).map_err(io(&dir))?;
    let manifest = Manifest {
        tool: "randbc",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command().name(),
        seed: cfg.seed(),
        config: cfg.values(),
        outputs: artifacts
            .iter()
            .map(|a| (a.name.clone(), sha256_hex(a.contents.as_bytes())))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let all = artifacts
        .iter()
        .map(|a| (a.name.as_str(), a.contents.as_str()))
        .chain([("manifest.json", text.as_str())]);
    let mut written = Vec::new();
    for (name, contents) in all {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents).map_err(io(&path)) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(dir.join("manifest.json"))
}

fn coefficients(cfg: &RunConfig, grid: &Grid2D) -> Result<CoefficientField> {
    let parts = split_top_level(cfg.raw("coeff.a"), ';');
    let sampled = parts
        .iter()
        .map(|p| Expr::parse(p).and_then(|e| e.sample(grid)))
        .collect::<Result<Vec<_>>>()?;
    let q = cfg.expr("coeff.q")?.sample(grid)?;
    let mut it = sampled.into_iter();
    let coeff = match (it.next(), it.next(), it.next()) {
        (Some(a), None, None) => CoefficientField::scalar(a, q),
        (Some(a11), Some(a12), Some(a22)) => CoefficientField::matrix(a11, a12, a22, q),
        _ => {
            return Err(Error::Config(
                "key `coeff.a`: expected 1 or 3 expressions".into(),
            ))
        }
    };
    Ok(match cfg.opt_float("coeff.lambda")? {
        Some(l) => coeff.with_lambda(l),
        None => coeff,
    })
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions> {
    Ok(SolverOptions {
        rtol: cfg.float("solver.rtol")?,
        max_iter: cfg.opt_uint("solver.maxiter")?,
    })
}

fn metrics(rows: &[(&str, String)]) -> String {
    let mut out = String::from("metric,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

/// Runs the configured command and returns its tables.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    match cfg.command() {
        Command::Solve => run_solve(cfg),
        Command::Sample => run_sample(cfg),
        Command::ConstraintExperiment => run_constraint_experiment(cfg),
        Command::VarianceCheck => run_variance_check(cfg),
        Command::TailCheck => run_tail_check(cfg),
        Command::Runge => run_runge(cfg),
        Command::Qpat => run_qpat(cfg),
        Command::Conductivity => run_conductivity(cfg),
    }
}

fn run_solve(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let coeff = coefficients(cfg, &grid)?;
    let op = assemble_with(&grid, &coeff, solver_options(cfg)?)?;
    let g = cfg.expr("solve.bc")?.sample_boundary(&grid)?;
    let (u, report) = op.solve_with_source(None, &g)?;
    let method = match report.method {
        SolveMethod::Trivial => "trivial",
        SolveMethod::ConjugateGradient => "cg",
        SolveMethod::BandedLu => "banded_lu",
    };
    let (lo, hi) = u
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    Ok(vec![
        Artifact::new("u.csv", u.to_csv(&grid)),
        Artifact::new(
            "solve_report.csv",
            metrics(&[
                ("method", method.to_string()),
                ("iterations", report.iterations.to_string()),
                ("residual", report.residual.to_string()),
                ("lambda", coeff.lambda_bound().to_string()),
                ("min", lo.to_string()),
                ("max", hi.to_string()),
            ]),
        ),
    ])
}

fn run_sample(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let count = cfg.uint("sample.count")?;
    let k = model.dimension();
    let mut coeffs = String::from("sample,sigma_norm,h12_norm");
    for i in 1..=k {
        let _ = write!(coeffs, ",a{i}");
    }
    coeffs.push('\n');
    let mut traces = String::from("sample,s,x,y,value\n");
    for i in 0..count {
        let bf = model.draw(&mut stream(cfg.seed(), Purpose::Sample, i as u64));
        let _ = write!(
            coeffs,
            "{i},{},{}",
            model.sigma_norm(&bf),
            bf.surrogate_h12_norm()
        );
        for a in &bf.coeffs {
            let _ = write!(coeffs, ",{a}");
        }
        coeffs.push('\n');
        for (p, v) in bf.evaluate(&grid).iter().enumerate() {
            let [x, y] = grid.point(grid.boundary_order()[p]);
            let _ = writeln!(traces, "{i},{},{x},{y},{v}", grid.arclength(p));
        }
    }
    Ok(vec![
        Artifact::new("samples.csv", coeffs),
        Artifact::new("boundary_samples.csv", traces),
    ])
}

fn run_constraint_experiment(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let mask = cfg.omega_prime(&grid)?;
    let model = cfg.model()?;
    let dict = build_dictionary_with(
        &grid,
        &coefficients(cfg, &grid)?,
        &model.basis(),
        solver_options(cfg)?,
    )?;
    let n_values = cfg.uints("experiment.N_list")?;
    let source = match cfg.raw("experiment.source") {
        "solve" => FieldSource::DirectSolve,
        _ => FieldSource::Dictionary,
    };
    let trial = TrialConfig {
        dict: &dict,
        sampler: &model,
        map: cfg.constraint_map()?,
        measurements: 1,
        mask: &mask,
        source,
    };
    let m = cfg.uint("experiment.M")?;
    let curve = success_curve(&trial, &n_values, m, cfg.threshold()?, cfg.seed())?;

    let mut table = String::from("N,successes,M,rate,lo95,hi95,tau\n");
    for r in &curve.rows {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{}",
            r.n, r.successes, r.m, r.rate, r.lo95, r.hi95, curve.tau
        );
    }
    let mut trials = String::from("trial,N,min_max\n");
    for (rep, row) in curve.min_max.iter().enumerate() {
        for (n, v) in n_values.iter().zip(row) {
            let _ = writeln!(trials, "{rep},{n},{v}");
        }
    }
    // first trial at the largest N, with its cover
    let largest = *n_values.iter().max().expect("validated non-empty");
    let first = TrialConfig {
        measurements: largest,
        ..trial
    };
    let field = constraint_field_csv(&first, &grid, &mask, cfg.seed(), curve.tau)?;
    Ok(vec![
        Artifact::new("success_curve.csv", table),
        Artifact::new("trials.csv", trials),
        Artifact::new("constraint_field.csv", field),
    ])
}

fn constraint_field_csv<S: CoefficientSampler>(
    trial: &TrialConfig<'_, S>,
    grid: &Grid2D,
    mask: &SubdomainMask,
    seed: u64,
    tau: f64,
) -> Result<String> {
    let fields = trial_fields(trial, seed, 0)?;
    let max = max_abs(&fields)?;
    let cover = extract_cover(&fields, tau.max(f64::MIN_POSITIVE))?;
    let mut out = String::from("x,y,value,label\n");
    for (p, &id) in mask.nodes().iter().enumerate() {
        let [x, y] = grid.point(id);
        let _ = writeln!(out, "{x},{y},{},{}", max.values[p], cover.labels[p]);
    }
    Ok(out)
}

fn run_variance_check(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let dict = build_dictionary_with(
        &grid,
        &coefficients(cfg, &grid)?,
        &model.basis(),
        solver_options(cfg)?,
    )?;
    let rows = variance_identity_check(
        &dict,
        &model,
        &cfg.constraint_map()?,
        &cfg.points("variance.points")?,
        cfg.uint("variance.M")?,
        cfg.seed(),
    )?;
    let mut out = String::from("x,y,mc,series,z\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.x, r.y, r.mc, r.series, r.z);
    }
    Ok(vec![Artifact::new("variance_check.csv", out)])
}

fn run_tail_check(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let model = cfg.model()?;
    let m = cfg.uint("tail.M")?;
    let rep = tail_check(&model, m, &cfg.floats("tail.t")?, cfg.seed())?;
    let mut out = String::from("t,survival,bound\n");
    for r in &rep.rows {
        let _ = writeln!(out, "{},{},{}", r.t, r.survival, r.bound);
    }
    let summary = metrics(&[
        ("c_hat", rep.c_hat.to_string()),
        ("dominated", rep.dominated.to_string()),
        ("M", m.to_string()),
    ]);
    Ok(vec![
        Artifact::new("tail_check.csv", out),
        Artifact::new("tail_summary.csv", summary),
    ])
}

fn run_runge(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let dict = build_dictionary_with(
        &grid,
        &coefficients(cfg, &grid)?,
        &model.basis(),
        solver_options(cfg)?,
    )?;
    let kind = match cfg.raw("runge.target") {
        "harmonic_poly" => TargetKind::HarmonicPoly {
            degree: cfg.uint("runge.degree")? as u32,
            imaginary: false,
        },
        "dictionary_member" => TargetKind::DictionaryMember {
            k: cfg.uint("runge.member")?,
        },
        _ => TargetKind::FundamentalSolution {
            pole: cfg.point("runge.pole")?,
        },
    };
    let target = make_target(
        &dict,
        cfg.point("runge.disk.center")?,
        cfg.float("runge.disk.radius")?,
        kind,
    )?;
    let curve = tradeoff_curve(
        &target,
        &dict,
        &model.sigmas(),
        &cfg.floats("runge.lambdas")?,
    )?;
    let mut out = String::from("lambda,eps,boundary_cost\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", p.lambda, p.eps_achieved, p.boundary_cost);
    }
    Ok(vec![Artifact::new("runge.csv", out)])
}

/// `qpat.mu` is a field file when it names one, an expression otherwise.
fn absorption(cfg: &RunConfig, grid: &Grid2D) -> Result<ScalarField> {
    let raw = cfg.raw("qpat.mu");
    let path = Path::new(raw);
    let looks_like_file = [".csv", ".bin"].iter().any(|ext| raw.ends_with(ext));
    if looks_like_file || path.is_file() {
        return ScalarField::read(grid, path).map_err(|e| match e {
            Error::InvalidInput(m) => Error::Config(format!("key `qpat.mu`: {m}")),
            other => other,
        });
    }
    let e = Expr::parse(raw).map_err(|e| Error::Config(format!("key `qpat.mu`: {e}")))?;
    ScalarField::from_values(grid, e.sample(grid)?)
}

fn run_qpat(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let mask = cfg.omega_prime(&grid)?;
    let mu = absorption(cfg, &grid)?;
    let n = cfg.uint("qpat.N")?;
    let bcs: Vec<Vec<f64>> = match cfg.raw("qpat.bc").strip_prefix("const:") {
        Some(v) => {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config("key `qpat.bc`".into()))?;
            vec![vec![v; grid.num_boundary()]; n]
        }
        None => {
            let model = cfg.model()?;
            (0..n)
                .map(|l| {
                    model
                        .draw(&mut stream(cfg.seed(), Purpose::Sample, l as u64))
                        .evaluate(&grid)
                })
                .collect()
        }
    };
    let data = bcs
        .iter()
        .map(|g| qpat_forward(&grid, &mu, g))
        .collect::<Result<Vec<_>>>()?;
    let tau = cfg.float("qpat.tau")?;
    let rec = qpat_reconstruct_multi(&grid, &data, tau)?;
    let nodes: Vec<usize> = mask
        .nodes()
        .iter()
        .copied()
        .filter(|&id| rec.valid[id])
        .collect();
    let err = if nodes.is_empty() {
        f64::NAN
    } else {
        relative_l2_error(&rec.mu_hat, &mu, &nodes)
    };
    let report = metrics(&[
        ("rel_l2", err.to_string()),
        ("coverage", rec.coverage(&mask).to_string()),
        ("complete", rec.complete(&mask).to_string()),
        ("tau", tau.to_string()),
        ("N", n.to_string()),
    ]);
    Ok(vec![
        Artifact::new("mu_hat.csv", rec.mu_hat.to_csv(&grid)),
        Artifact::new("qpat_errors.csv", report),
    ])
}

fn run_conductivity(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let mask = cfg.omega_prime(&grid)?;
    let a_expr = cfg.expr("conductivity.a")?;
    let a = ScalarField::from_values(&grid, a_expr.sample(&grid)?)?;
    let bcs = cfg
        .exprs("conductivity.bc")?
        .iter()
        .map(|e| e.sample_boundary(&grid))
        .collect::<Result<Vec<_>>>()?;
    let data = conductivity_forward(&grid, &a, &bcs)?;
    let rec = conductivity_reconstruct(
        &grid,
        &data,
        cfg.float("conductivity.tau")?,
        cfg.point("conductivity.anchor")?,
        &mask,
    )?;
    if let Some(w) = &rec.warning {
        eprintln!("randbc: warning: {w}");
    }
    let anchor_log = a.get(rec.anchor).ln();
    let truth = ScalarField::from_values(
        &grid,
        a.values().iter().map(|v| v.ln() - anchor_log).collect(),
    )?;
    let nodes: Vec<usize> = (0..grid.num_nodes())
        .filter(|&id| rec.recovered[id])
        .collect();
    let err = if nodes.is_empty() {
        f64::NAN
    } else {
        relative_l2_error(&rec.log_a_hat, &truth, &nodes)
    };
    let report = metrics(&[
        ("rel_l2", err.to_string()),
        ("coverage", rec.coverage.to_string()),
        ("warning", rec.warning.is_some().to_string()),
        ("anchor_x", grid.point(rec.anchor)[0].to_string()),
        ("anchor_y", grid.point(rec.anchor)[1].to_string()),
    ]);
    Ok(vec![
        Artifact::new("log_a_hat.csv", rec.log_a_hat.to_csv(&grid)),
        Artifact::new("conductivity_errors.csv", report),
    ])
}
