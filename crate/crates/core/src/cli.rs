//! Command-line runner: configuration, the five commands, and exit codes.
//!
//! Every command takes a [`RunConfig`], which can come from a JSON file
//! (`--config`), command-line flags, or both (flags win). Solver limits can
//! also be overridden through `VAROPT_TIME_LIMIT`, `VAROPT_MIP_GAP` and
//! `VAROPT_DUAL_TOL`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify, CertifyOptions, Certificate, CutoffBase, Reason, Verdict};
use crate::error::{Error, Result};
use crate::frontier::{
    alpha_curve, beta_curve, duality_check, linspace, plateau_instance, CurveKind, CvarFrontier, DualityReport,
    FrontierCurve, HuberDemo, RiskReward, VarFrontier, VarOracleFrontier, PLATEAU_TOL,
};
use crate::io::{
    emit_results, factor_scenarios, mu0_grid, parse_ff_daily, BenchRecord, ColumnRef, FfOptions, Format, Instance,
    InstanceFile, RowRange, Tables, Timed,
};
use crate::lower::{default_initial_set, lower_bound, LowerBoundOptions, LowerBoundResult};
use crate::model::{build_cvar_lp, build_full_milp};
use crate::problem::{portfolio_quantile, Portfolio, ProblemSpec, ScenarioSet};
use crate::solve::oracle::oracle_var;
use crate::solve::{backend_by_name, Backend, Limits, SolveStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_VERIFIED: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Solve the full MILP directly.
    #[default]
    Solve,
    /// Lower bound followed by a near-optimality certificate.
    Certify,
    /// Sweep sizes and return floors, writing the summary tables.
    Bench,
    /// Trace a risk/reward frontier.
    Frontier,
    /// Exact optimum by subset enumeration (small instances).
    Oracle,
}

/// How the lower-bound loop picks its starting scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitialSet {
    /// The first `ceil(2 alpha m)` scenarios.
    #[default]
    First,
    /// Every scenario; the loop then solves the full problem.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    #[default]
    Milp,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FrontierRisk {
    #[default]
    Var,
    VarOracle,
    Cvar,
    Huber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Instance JSON file.
    pub instance: Option<PathBuf>,
    /// Fama-French daily file, used when no instance file is given.
    pub ff: Option<PathBuf>,
    /// Section of the Fama-French file.
    pub ff_section: usize,
    /// Data rows to skip before the first scenario.
    pub skip: usize,
    /// Built-in instance: `plateau` (the two-asset frontier demo).
    pub builtin: Option<String>,
    /// Overrides for the instance's alpha; 0.01 when nothing sets it.
    pub alpha: Option<f64>,
    pub mu0: Option<f64>,
    /// Return floors per bench size: explicit list, else an evenly spaced grid.
    pub mu0s: Vec<f64>,
    pub grid_k: usize,
    pub initial_set: InitialSet,
    pub beta: f64,
    /// Absolute enclosure width; default is `delta_fraction * |lower bound|`.
    pub delta: Option<f64>,
    pub delta_fraction: f64,
    /// Seconds per solve, and per phase budget.
    pub time_limit: f64,
    pub lower_max_iter: usize,
    pub certify_iter_max: usize,
    pub cutoff_base: CutoffBase,
    pub backend: String,
    /// Bench worker threads; 0 uses one per available core.
    pub threads: usize,
    /// Bench sizes: asset counts and scenario counts.
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub exact: ExactMethod,
    /// Include the CVaR LP comparison in bench runs.
    pub baseline: bool,
    pub risk: FrontierRisk,
    pub curve: CurveKind,
    pub kappa: f64,
    pub grid_lo: Option<f64>,
    pub grid_hi: Option<f64>,
    pub grid_step: Option<f64>,
    pub grid_points: usize,
    pub check_duality: bool,
    /// Output directory; nothing is written when unset.
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Seed for synthetic bench data.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Solve,
            instance: None,
            ff: None,
            ff_section: 0,
            skip: 0,
            builtin: None,
            alpha: None,
            mu0: None,
            mu0s: Vec::new(),
            grid_k: 6,
            initial_set: InitialSet::First,
            beta: 0.1,
            delta: None,
            delta_fraction: 0.01,
            time_limit: 3600.0,
            lower_max_iter: 50,
            certify_iter_max: 200,
            cutoff_base: CutoffBase::Initial,
            backend: default_backend_name().to_string(),
            threads: 0,
            ns: Vec::new(),
            ms: Vec::new(),
            exact: ExactMethod::Milp,
            baseline: true,
            risk: FrontierRisk::Var,
            curve: CurveKind::Beta,
            kappa: 2.0,
            grid_lo: None,
            grid_hi: None,
            grid_step: None,
            grid_points: 21,
            check_duality: false,
            out: None,
            format: Format::Csv,
            seed: 0,
        }
    }
}

fn default_backend_name() -> &'static str {
    if cfg!(feature = "highs") {
        "highs"
    } else {
        "builtin"
    }
}

pub const DEFAULT_ALPHA: f64 = 0.01;

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Per-solve limits after environment overrides.
    pub fn limits(&self) -> Result<Limits> {
        Limits::default().with_time_limit(self.time_limit).from_env()
    }

    pub fn backend(&self) -> Result<Box<dyn Backend>> {
        backend_by_name(&self.backend)
    }

    /// Delta for a given lower bound.
    pub fn delta_for(&self, lower: f64) -> f64 {
        self.delta.unwrap_or(if lower == 0.0 { 1e-4 } else { self.delta_fraction * lower.abs() })
    }

    /// Loads the configured instance and applies alpha and floor overrides.
    pub fn load_instance(&self) -> Result<Instance> {
        let mut inst = if let Some(p) = &self.instance {
            InstanceFile::open(p)?
        } else if let Some(p) = &self.ff {
            let opts = FfOptions {
                section: self.ff_section,
                rows: RowRange { skip: self.skip, take: self.ms.first().copied(), ..Default::default() },
                columns: self.ns.first().map(|&n| (0..n).map(ColumnRef::Index).collect()),
                ..Default::default()
            };
            let data = parse_ff_daily(p, &opts)?;
            Instance {
                scenarios: data.scenarios.clone(),
                spec: ProblemSpec::new(DEFAULT_ALPHA, f64::NEG_INFINITY),
                data: Some(data),
            }
        } else if let Some(name) = &self.builtin {
            match name.as_str() {
                "plateau" => {
                    let (scenarios, spec) = plateau_instance();
                    Instance { scenarios, spec, data: None }
                }
                other => return Err(Error::Config(format!("unknown built-in instance {other:?}"))),
            }
        } else {
            return Err(Error::Config("no instance: set instance, ff or builtin".into()));
        };
        if let Some(a) = self.alpha {
            inst.spec.alpha = a;
        }
        if let Some(mu0) = self.mu0 {
            inst.spec.mu0 = mu0;
        }
        let issues = inst.spec.violations(inst.scenarios.n());
        if !issues.is_empty() {
            return Err(Error::InvalidInput(issues.join("; ")));
        }
        Ok(inst)
    }
}

/// Command-line flags; each overrides the matching [`RunConfig`] field.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration to start from.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub ff: Option<PathBuf>,
    #[arg(long)]
    pub ff_section: Option<usize>,
    #[arg(long)]
    pub skip: Option<usize>,
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu0: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu0s: Option<Vec<f64>>,
    #[arg(long)]
    pub grid_k: Option<usize>,
    #[arg(long, value_enum)]
    pub initial_set: Option<InitialSet>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub delta_fraction: Option<f64>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub lower_max_iter: Option<usize>,
    #[arg(long)]
    pub certify_iter_max: Option<usize>,
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub exact: Option<ExactMethod>,
    #[arg(long)]
    pub no_baseline: bool,
    #[arg(long, value_enum)]
    pub risk: Option<FrontierRisk>,
    #[arg(long, value_parser = parse_curve)]
    pub curve: Option<CurveKind>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_hi: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub check_duality: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_curve(s: &str) -> std::result::Result<CurveKind, String> {
    match s {
        "beta" => Ok(CurveKind::Beta),
        "alpha" => Ok(CurveKind::Alpha),
        _ => Err(format!("expected beta or alpha, got {s:?}")),
    }
}

impl RunArgs {
    pub fn into_config(self, command: Command) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        c.command = command;
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { c.$f = v; } )*};
        }
        macro_rules! set_opt {
            ($($f:ident),*) => {$( if self.$f.is_some() { c.$f = self.$f; } )*};
        }
        set!(ff_section, skip, mu0s, grid_k, initial_set, beta, delta_fraction, time_limit, lower_max_iter);
        set!(certify_iter_max, backend, threads, ns, ms, exact, risk, curve, kappa, grid_points, format, seed);
        set_opt!(instance, ff, builtin, alpha, mu0, delta, grid_lo, grid_hi, grid_step, out);
        if self.no_baseline {
            c.baseline = false;
        }
        if self.check_duality {
            c.check_duality = true;
        }
        Ok(c)
    }
}

#[derive(Debug, Parser)]
#[command(name = "varopt", version, about = "Sampled value-at-risk portfolio optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Solve the full MILP directly.
    Solve(RunArgs),
    /// Lower bound, then a near-optimality certificate.
    Certify(RunArgs),
    /// Benchmark sweep writing the two summary tables.
    Bench(RunArgs),
    /// Trace a risk/reward frontier.
    Frontier(RunArgs),
    /// Exact optimum by enumeration.
    Oracle(RunArgs),
}

impl CliCommand {
    pub fn into_config(self) -> Result<RunConfig> {
        match self {
            CliCommand::Solve(a) => a.into_config(Command::Solve),
            CliCommand::Certify(a) => a.into_config(Command::Certify),
            CliCommand::Bench(a) => a.into_config(Command::Bench),
            CliCommand::Frontier(a) => a.into_config(Command::Frontier),
            CliCommand::Oracle(a) => a.into_config(Command::Oracle),
        }
    }
}

/// What a command produced: exit code, a JSON summary for stdout, and any
/// files written.
#[derive(Debug, Clone)]
pub struct Report {
    pub exit_code: i32,
    pub summary: serde_json::Value,
    pub text: Option<String>,
    pub files: Vec<PathBuf>,
}

/// Exit code for an error.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::LimitReached(_) => EXIT_LIMIT,
        _ => EXIT_ERROR,
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::Solve => cmd_solve(cfg).map(|r| r.report()),
        Command::Certify => cmd_certified(cfg).map(|r| r.report()),
        Command::Bench => cmd_bench(cfg).map(|r| r.report()),
        Command::Frontier => cmd_frontier(cfg).map(|r| r.report()),
        Command::Oracle => cmd_oracle(cfg).map(|r| r.report()),
    }
}

/// Parses arguments, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let run = cli.command.into_config().and_then(|cfg| execute(&cfg));
    match run {
        Ok(r) => {
            if let Some(t) = &r.text {
                eprint!("{t}");
            }
            let json = serde_json::to_string_pretty(&r.summary).unwrap_or_default();
            // A closed pipe on stdout is not a failure of the run.
            let _ = writeln!(std::io::stdout(), "{json}");
            r.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn write_out(cfg: &RunConfig, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let p = dir.join(name);
        std::fs::write(&p, contents)?;
        files.push(p);
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Optimal (or best found) sampled quantile.
    pub nu: Option<f64>,
    pub portfolio: Option<Vec<f64>>,
    /// Best proven upper bound on the quantile.
    pub best_bound: Option<f64>,
    pub binaries: usize,
    pub seconds: f64,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl SolveResult {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            SolveStatus::Optimal => EXIT_OK,
            SolveStatus::Infeasible => EXIT_INFEASIBLE,
            s if s.hit_limit() => EXIT_LIMIT,
            _ => EXIT_ERROR,
        }
    }

    fn report(self) -> Report {
        Report {
            exit_code: self.exit_code(),
            summary: serde_json::to_value(&self).unwrap_or_default(),
            text: None,
            files: self.files,
        }
    }
}

/// Full MILP solve (an LP when no scenario may exceed).
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveResult> {
    let inst = cfg.load_instance()?;
    let backend = cfg.backend()?;
    let limits = cfg.limits()?;
    let model = build_full_milp(&inst.scenarios, &inst.spec)?;
    let out = backend.solve(&model, &limits)?;
    let portfolio = out.portfolio(&model);
    let mut r = SolveResult {
        status: out.status,
        nu: out.objective.filter(|_| portfolio.is_some()),
        portfolio,
        best_bound: out.best_bound,
        binaries: model.num_binaries(),
        seconds: out.wall_time,
        files: Vec::new(),
    };
    let mut files = Vec::new();
    write_out(cfg, "solve.json", &to_json(&r)?, &mut files)?;
    r.files = files;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedResult {
    pub lower: LowerBoundResult,
    pub certificate: Certificate,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl CertifiedResult {
    pub fn exit_code(&self) -> i32 {
        match (self.certificate.verdict, self.certificate.reason) {
            (Verdict::Proven, _) => EXIT_OK,
            (Verdict::NotVerified, Some(Reason::TimeLimit)) => EXIT_LIMIT,
            (Verdict::NotVerified, _) => EXIT_NOT_VERIFIED,
        }
    }

    fn report(self) -> Report {
        let c = &self.certificate;
        let summary = serde_json::json!({
            "verdict": c.verdict,
            "reason": c.reason,
            "lower": c.lower,
            "upper": c.upper,
            "delta": c.delta,
            "portfolio": self.lower.portfolio,
            "lower_termination": self.lower.termination,
            "lower_iterations": self.lower.trace.len(),
            "certify_iterations": c.iterations,
            "final_set_size": c.final_set_size,
            "lower_seconds": self.lower.seconds,
            "certify_seconds": c.seconds,
        });
        Report { exit_code: self.exit_code(), summary, text: None, files: self.files }
    }
}

fn initial_set(cfg: &RunConfig, s: &ScenarioSet, spec: &ProblemSpec) -> Result<Vec<usize>> {
    match cfg.initial_set {
        InitialSet::First => default_initial_set(s, spec),
        InitialSet::All => Ok((0..s.m()).collect()),
    }
}

fn run_pipeline(
    cfg: &RunConfig,
    s: &ScenarioSet,
    spec: &ProblemSpec,
    backend: &dyn Backend,
    limits: Limits,
) -> Result<(LowerBoundResult, Certificate)> {
    let j0 = initial_set(cfg, s, spec)?;
    let lopts = LowerBoundOptions {
        max_iter: cfg.lower_max_iter,
        time_limit: Some(cfg.time_limit),
        last_iterate: false,
        limits,
    };
    let lb = lower_bound(s, spec, &j0, backend, &lopts)?;
    let copts = CertifyOptions {
        beta: cfg.beta,
        delta: Some(cfg.delta_for(lb.quantile)),
        iter_max: cfg.certify_iter_max,
        time_limit: Some((cfg.time_limit - lb.seconds).max(0.0)),
        cutoff_base: cfg.cutoff_base,
        limits,
        ..Default::default()
    };
    let cert = certify(s, spec, &lb, backend, &copts)?;
    Ok((lb, cert))
}

/// Lower bound followed by the certificate.
pub fn cmd_certified(cfg: &RunConfig) -> Result<CertifiedResult> {
    let inst = cfg.load_instance()?;
    let backend = cfg.backend()?;
    let (lower, certificate) = run_pipeline(cfg, &inst.scenarios, &inst.spec, backend.as_ref(), cfg.limits()?)?;
    let mut files = Vec::new();
    let mut r = CertifiedResult { lower, certificate, files: Vec::new() };
    write_out(cfg, "certified.json", &to_json(&r)?, &mut files)?;
    write_out(cfg, "lower_trace.csv", &r.lower.trace_csv()?, &mut files)?;
    write_out(cfg, "certify_trace.csv", &r.certificate.trace_csv()?, &mut files)?;
    r.files = files;
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub tables: Tables,
    pub files: Vec<PathBuf>,
}

impl BenchResult {
    /// 4 if any cell hit a limit, else 2 if any certificate failed, else 0.
    pub fn exit_code(&self) -> i32 {
        let recs = &self.tables.records;
        let limited = recs.iter().any(|r| r.exact.value.is_none() || r.pipeline().value.is_none());
        if limited {
            EXIT_LIMIT
        } else if recs.iter().any(|r| r.proven == Some(false)) {
            EXIT_NOT_VERIFIED
        } else {
            EXIT_OK
        }
    }

    fn report(self) -> Report {
        let summary = serde_json::json!({
            "cells": self.tables.records.len(),
            "average_speed_up": self.tables.average_speed_up,
            "table1": self.tables.table1,
            "table2": self.tables.table2,
        });
        Report { exit_code: self.exit_code(), summary, text: Some(self.tables.render_text()), files: self.files }
    }
}

/// One bench cell: instance plus return floor.
#[derive(Debug, Clone)]
pub struct BenchCell {
    pub scenarios: ScenarioSet,
    pub spec: ProblemSpec,
}

/// Cells in sweep order: sizes `ns x ms` (row-major), then return floors.
pub fn bench_cells(cfg: &RunConfig) -> Result<Vec<BenchCell>> {
    let mut sets: Vec<(ScenarioSet, ProblemSpec)> = Vec::new();
    if cfg.instance.is_some() || cfg.builtin.is_some() {
        let inst = cfg.load_instance()?;
        sets.push((inst.scenarios, inst.spec));
    } else {
        if cfg.ns.is_empty() || cfg.ms.is_empty() {
            return Err(Error::Config("bench needs an instance or both ns and ms".into()));
        }
        let alpha = cfg.alpha.unwrap_or(DEFAULT_ALPHA);
        for &n in &cfg.ns {
            for &m in &cfg.ms {
                let s = match &cfg.ff {
                    Some(p) => {
                        let opts = FfOptions {
                            section: cfg.ff_section,
                            rows: RowRange { skip: cfg.skip, take: Some(m), ..Default::default() },
                            columns: Some((0..n).map(ColumnRef::Index).collect()),
                            ..Default::default()
                        };
                        parse_ff_daily(p, &opts)?.scenarios
                    }
                    None => factor_scenarios(n, m, cfg.seed)?,
                };
                sets.push((s, ProblemSpec::new(alpha, f64::NEG_INFINITY)));
            }
        }
    }
    let mut cells = Vec::new();
    for (s, spec) in sets {
        let floors = if !cfg.mu0s.is_empty() {
            cfg.mu0s.clone()
        } else if cfg.instance.is_some() && spec.has_return_floor() && cfg.mu0.is_none() {
            vec![spec.mu0]
        } else if let Some(mu0) = cfg.mu0 {
            vec![mu0]
        } else {
            mu0_grid(&s, cfg.grid_k)
        };
        for mu0 in floors {
            cells.push(BenchCell { scenarios: s.clone(), spec: spec.with_mu0(mu0) });
        }
    }
    Ok(cells)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

/// Runs the exact solve, the lower-bound-plus-certificate pipeline, and the
/// CVaR baseline on one cell.
pub fn run_cell(cfg: &RunConfig, cell: &BenchCell, backend: &dyn Backend, limits: Limits) -> Result<BenchRecord> {
    let (s, spec) = (&cell.scenarios, &cell.spec);
    let (exact, exact_secs) = timed(|| -> Result<Option<f64>> {
        match cfg.exact {
            ExactMethod::Milp => {
                let model = build_full_milp(s, spec)?;
                let out = backend.solve(&model, &limits)?;
                Ok(match out.status {
                    SolveStatus::Optimal => out.objective,
                    SolveStatus::Infeasible => {
                        return Err(Error::Infeasible(format!("return floor {} is unattainable", spec.mu0)))
                    }
                    _ => None,
                })
            }
            ExactMethod::Oracle => {
                let o = oracle_var(s, spec)?;
                if o.value == f64::NEG_INFINITY {
                    return Err(Error::Infeasible(format!("return floor {} is unattainable", spec.mu0)));
                }
                Ok(Some(o.value))
            }
        }
    });
    let exact = Timed { value: exact?, seconds: exact_secs };

    let (lower, certify_seconds, proven) = match run_pipeline(cfg, s, spec, backend, limits) {
        Ok((lb, cert)) => {
            let finished = cert.reason != Some(Reason::TimeLimit);
            (Timed::solved(lb.quantile, lb.seconds), finished.then_some(cert.seconds), Some(cert.is_proven()))
        }
        Err(Error::LimitReached(_)) => (Timed::unsolved(cfg.time_limit), None, None),
        Err(e) => return Err(e),
    };

    let baseline = if cfg.baseline {
        let (v, secs) = timed(|| -> Result<Option<f64>> {
            let model = build_cvar_lp(s, spec)?;
            let out = backend.solve_lp(&model, &limits)?;
            match (out.status, out.portfolio(&model)) {
                (SolveStatus::Optimal, Some(x)) => Ok(Some(portfolio_quantile(&Portfolio(x), s, spec.alpha)?)),
                _ => Ok(None),
            }
        });
        Some(Timed { value: v?, seconds: secs })
    } else {
        None
    };

    Ok(BenchRecord { n: s.n(), m: s.m(), mu0: spec.mu0, exact, lower, certify_seconds, proven, baseline })
}

/// Benchmark sweep. Cells run on a worker pool; records keep sweep order.
pub fn cmd_bench(cfg: &RunConfig) -> Result<BenchResult> {
    let cells = bench_cells(cfg)?;
    let backend = cfg.backend()?;
    let limits = cfg.limits()?;
    let threads = if cfg.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cfg.threads
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let records: Vec<BenchRecord> = pool.install(|| {
        cells.par_iter().map(|c| run_cell(cfg, c, backend.as_ref(), limits)).collect::<Result<Vec<_>>>()
    })?;
    let mut files = Vec::new();
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        files = emit_results(&records, cfg.format, &dir.join("bench"))?;
    }
    Ok(BenchResult { tables: Tables::build(&records), files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierResult {
    pub curve: FrontierCurve,
    pub duality: Option<DualityReport>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl FrontierResult {
    fn report(self) -> Report {
        let summary = serde_json::json!({
            "risk": self.curve.risk,
            "curve": self.curve.kind,
            "points": self.curve.points.len(),
            "levels": self.curve.points.iter().map(|p| p.level).collect::<Vec<_>>(),
            "values": self.curve.values(),
            "plateaus": self.curve.plateaus,
            "duality_consistent": self.duality.as_ref().map(|d| d.consistent),
        });
        Report { exit_code: EXIT_OK, summary, text: None, files: self.files }
    }
}

fn frontier_grid(cfg: &RunConfig, rr: &dyn RiskReward) -> Result<Vec<f64>> {
    match (cfg.grid_lo, cfg.grid_hi) {
        (Some(lo), Some(hi)) => {
            let points = match cfg.grid_step {
                Some(step) if step > 0.0 => ((hi - lo) / step).round() as usize + 1,
                Some(step) => return Err(Error::Config(format!("grid step {step} must be positive"))),
                None => cfg.grid_points,
            };
            Ok(linspace(lo, hi, points))
        }
        (None, None) => match cfg.curve {
            CurveKind::Beta => Ok(rr.reward_grid(cfg.grid_points)),
            CurveKind::Alpha => Ok(linspace(rr.min_risk(), rr.beta(rr.max_reward()).value, cfg.grid_points)),
        },
        _ => Err(Error::Config("set both grid_lo and grid_hi, or neither".into())),
    }
}

/// Frontier curve on a grid, optionally with the duality check.
pub fn cmd_frontier(cfg: &RunConfig) -> Result<FrontierResult> {
    let backend = cfg.backend()?;
    let limits = cfg.limits()?;
    let inst = match cfg.risk {
        FrontierRisk::Huber => None,
        _ => Some(cfg.load_instance()?),
    };
    let rr: Box<dyn RiskReward + '_> = match (&cfg.risk, &inst) {
        (FrontierRisk::Huber, _) => Box::new(HuberDemo { kappa: cfg.kappa }),
        (FrontierRisk::Var, Some(i)) => {
            Box::new(VarFrontier { scenarios: &i.scenarios, spec: i.spec.clone(), backend: backend.as_ref(), limits })
        }
        (FrontierRisk::VarOracle, Some(i)) => Box::new(VarOracleFrontier { scenarios: &i.scenarios, spec: i.spec.clone() }),
        (FrontierRisk::Cvar, Some(i)) => {
            Box::new(CvarFrontier { scenarios: &i.scenarios, spec: i.spec.clone(), backend: backend.as_ref(), limits })
        }
        _ => unreachable!("instance loaded for every data-backed risk"),
    };
    let grid = frontier_grid(cfg, rr.as_ref())?;
    let curve = match cfg.curve {
        CurveKind::Beta => beta_curve(rr.as_ref(), &grid),
        CurveKind::Alpha => alpha_curve(rr.as_ref(), &grid),
    };
    let duality = (cfg.check_duality && cfg.curve == CurveKind::Beta).then(|| duality_check(rr.as_ref(), &curve, PLATEAU_TOL));
    let mut files = Vec::new();
    write_out(cfg, "frontier.csv", &curve.to_csv()?, &mut files)?;
    if let Some(d) = &duality {
        write_out(cfg, "duality.json", &to_json(d)?, &mut files)?;
    }
    Ok(FrontierResult { curve, duality, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub nu: f64,
    pub portfolio: Option<Vec<f64>>,
    pub exceedance: Vec<usize>,
    pub subsets: u128,
    pub seconds: f64,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl OracleResult {
    fn report(self) -> Report {
        let code = if self.nu == f64::NEG_INFINITY { EXIT_INFEASIBLE } else { EXIT_OK };
        Report { exit_code: code, summary: serde_json::to_value(&self).unwrap_or_default(), text: None, files: self.files }
    }
}

/// Exact optimum by enumerating exceedance sets.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<OracleResult> {
    let inst = cfg.load_instance()?;
    let (o, seconds) = timed(|| oracle_var(&inst.scenarios, &inst.spec));
    let o = o?;
    let mut r =
        OracleResult { nu: o.value, portfolio: o.weights, exceedance: o.exceedance, subsets: o.subsets, seconds, files: Vec::new() };
    let mut files = Vec::new();
    write_out(cfg, "oracle.json", &to_json(&r)?, &mut files)?;
    r.files = files;
    Ok(r)
}
