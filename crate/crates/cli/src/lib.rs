//! Command-line driver: reads a run configuration, runs one stage and writes
//! CSV data plus a JSON manifest into the output directory.

pub mod manifest;
pub mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use segregate::analysis::{
    default_delta, extract_supports_and_interfaces, jump_condition_check, laplacian_measure, lp_distance,
    rate_study, segregation_residual, geometric_ladder, InterfaceSet, JumpSettings,
};
use segregate::{parse_config, solve_epsilon_observed, solve_limit, Error, LimitResult, SolveResult, SystemConfig};

use manifest::{OutputDir, RunManifest, StageStats};

#[derive(Debug, Parser)]
#[command(name = "segregate", version, about = "Segregating elliptic systems: ε-solves, explicit limit, interfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file, or the name of a shipped configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overrides `system.epsilon`.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    /// One-based pivot component of the explicit limit.
    #[arg(long, global = true, default_value_t = 1)]
    pub pivot: usize,

    /// Zero-set threshold; defaults to max(10 tol M, h M).
    #[arg(long, global = true)]
    pub delta: Option<f64>,

    /// Worker threads for the rate study.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Configuration file or shipped name (alternative to --config).
    #[arg(id = "config_path", value_name = "CONFIG")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, default_value_t = 1e-2)]
    pub start: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub stop: f64,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the boundary data and coupling weights.
    Validate(Target),
    /// Solve the ε-system by the averaged fixed-point iteration.
    Solve(Target),
    /// Build the explicit segregated limit and its interfaces.
    Limit(Target),
    /// Solve and build the limit, then tabulate their distances.
    Compare(Target),
    /// Convergence study over a geometric ε ladder.
    Rate(RateArgs),
    /// Supports, interfaces, scaled Laplacians and jump residuals of the limit.
    Interfaces(Target),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Solve(_) => "solve",
            Command::Limit(_) => "limit",
            Command::Compare(_) => "compare",
            Command::Rate(_) => "rate",
            Command::Interfaces(_) => "interfaces",
        }
    }

    fn target(&self) -> &Target {
        match self {
            Command::Validate(t) | Command::Solve(t) | Command::Limit(t) | Command::Compare(t) | Command::Interfaces(t) => t,
            Command::Rate(r) => &r.target,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver { stage: &'static str, message: String },
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn from_core(stage: &'static str, e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Expression(_) | Error::InvalidDomain(_) | Error::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
            Error::NotConverged { .. } | Error::LinearSolve { .. } | Error::NegativeCoefficient { .. } => {
                CliError::Solver { stage, message: e.to_string() }
            }
            Error::GridMismatch => CliError::Internal(anyhow::Error::new(e).context(stage)),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver { stage, message } => write!(f, "{stage} failed: {message}"),
            CliError::Internal(e) => write!(f, "internal error: {e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.into())
    }
}

/// What a successful run wrote and reports.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Finds a configuration: the path itself, the path with `.toml`, then
/// `configs/<file name>.toml` next to the working directory.
pub fn resolve_config(p: &Path) -> Option<PathBuf> {
    if p.is_file() {
        return Some(p.to_path_buf());
    }
    let with_ext = p.with_extension("toml");
    if with_ext.is_file() {
        return Some(with_ext);
    }
    let stem = p.file_stem()?;
    let shipped = Path::new("configs").join(stem).with_extension("toml");
    shipped.is_file().then_some(shipped)
}

struct Context<'a> {
    cli: &'a Cli,
    config: SystemConfig,
    config_path: PathBuf,
    epsilon: f64,
    pivot: usize,
    out: OutputDir,
    stages: Vec<StageStats>,
    notes: Vec<String>,
    lines: Vec<String>,
    started: String,
}

fn label(config: &SystemConfig) -> &'static str {
    if config.problem().coupling().all_equal() {
        "limit"
    } else {
        "candidate"
    }
}

impl Context<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        self.out.write(name, contents).map_err(CliError::from)
    }

    fn solve(&mut self) -> Result<SolveResult, CliError> {
        let mut history = String::from("sweep,gap\n");
        let problem = self.config.problem();
        let settings = self.config.fixed_point_settings();
        let result = solve_epsilon_observed(problem, self.epsilon, &settings, None, |s| {
            if s.k > 0 {
                let _ = writeln!(history, "{},{}", s.k, output::num(s.gap));
            }
        })
        .map_err(|e| CliError::from_core("solve", e))?;
        self.stages.push(StageStats {
            name: "solve".into(),
            linear_solves: result.linear_solves(),
            linear_iterations: result.linear_iterations(),
            sweeps: result.sweeps,
            wall_time_s: result.wall_time.as_secs_f64(),
        });
        self.write("solve_fields.csv", &output::fields_csv(&result.fields, "u"))?;
        self.write("solve_history.csv", &history)?;
        let res = segregation_residual(&result.fields, self.config.problem());
        self.lines.push(format!(
            "solve: epsilon={:e} sweeps={} gap={:e} max_product={:e}",
            self.epsilon, result.sweeps, result.gap, res.max_product
        ));
        Ok(result)
    }

    fn limit(&mut self) -> Result<LimitResult, CliError> {
        let t = Instant::now();
        let linear = self.config.linear_settings();
        let limit = solve_limit(self.config.problem(), self.pivot, &linear).map_err(|e| CliError::from_core("limit", e))?;
        self.stages.push(StageStats {
            name: "limit".into(),
            linear_solves: limit.differences.len(),
            wall_time_s: t.elapsed().as_secs_f64(),
            ..Default::default()
        });
        let label = label(&self.config);
        if label == "candidate" {
            self.notes.push("coupling weights differ; the explicit construction is reported as a candidate".into());
        }
        self.write(&format!("{label}_fields.csv"), &output::fields_csv(&limit.fields, "u"))?;
        let max_product = (0..limit.grid().len())
            .map(|n| limit.fields.iter().map(|f| f.get(n)).product::<f64>())
            .fold(0.0, f64::max);
        self.lines.push(format!("{label}: pivot={} max_product={:e}", self.pivot + 1, max_product));
        Ok(limit)
    }

    fn interfaces(&mut self, limit: &LimitResult, prefix: &str) -> Result<InterfaceSet, CliError> {
        let problem = self.config.problem();
        let delta = match self.cli.delta {
            Some(d) => d,
            None => default_delta(problem.grid(), self.config.solver.tol_linear, problem.max_boundary().max(f64::MIN_POSITIVE)),
        };
        let set = extract_supports_and_interfaces(&limit.fields, delta);
        self.write(&format!("{prefix}interfaces.csv"), &output::interfaces_csv(&set))?;
        let counts: Vec<String> =
            set.pairs.iter().map(|p| format!("{}-{}:{}", p.i + 1, p.j + 1, p.elements.len())).collect();
        self.lines.push(format!("interfaces: delta={delta:e} elements {}", counts.join(" ")));
        Ok(set)
    }
}

fn check_flags(cli: &Cli, config: &SystemConfig) -> Result<(), CliError> {
    let mut problems = Vec::new();
    if let Some(e) = cli.epsilon {
        if !(e > 0.0 && e.is_finite()) {
            problems.push(format!("--epsilon must be positive, got {e}"));
        }
    }
    if cli.pivot == 0 || cli.pivot > config.m() {
        problems.push(format!("--pivot must be between 1 and {}, got {}", config.m(), cli.pivot));
    }
    if let Some(d) = cli.delta {
        if !(d > 0.0 && d.is_finite()) {
            problems.push(format!("--delta must be positive, got {d}"));
        }
    }
    if cli.threads == 0 {
        problems.push("--threads must be at least 1".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(problems.join("; ")))
    }
}

fn validation_report(config: &SystemConfig) -> String {
    let problem = config.problem();
    let g = problem.grid();
    let mut s = String::new();
    let _ = writeln!(s, "domain: {:?}", config.domain);
    let _ = writeln!(
        s,
        "grid: {} nodes per axis, {} interior, {} boundary, h = {:e}",
        config.n,
        g.interior_nodes().len(),
        g.boundary_points().len(),
        g.h()
    );
    let _ = writeln!(s, "components: {}", config.m());
    let _ = writeln!(s, "max boundary value M: {}", problem.max_boundary());
    let seg = problem.segregation_report(None);
    let _ = writeln!(s, "partial segregation: ok (boundary product <= {:e} at every boundary node)", seg.tol);
    let _ = writeln!(s, "coupling: ok (0 < A_i <= sum of the other weights at every interior node)");
    let _ = writeln!(s, "exponents: {:?}", config.alpha);
    let scope = if problem.coupling().all_equal() {
        "equal weights, explicit limit applies"
    } else {
        "unequal weights, explicit construction reported as candidate"
    };
    let _ = writeln!(s, "limit scope: {scope}");
    s
}

/// Runs one subcommand. Files go to `cli.out`; the manifest is written last.
pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let started = chrono::Utc::now().to_rfc3339();
    let given = cli
        .command
        .target()
        .path
        .as_ref()
        .or(cli.config.as_ref())
        .ok_or_else(|| CliError::Config("no configuration given (pass a path or --config)".into()))?;
    let config_path = resolve_config(given)
        .ok_or_else(|| CliError::Config(format!("configuration `{}` not found", given.display())))?;
    let config = parse_config(&config_path).map_err(|e| CliError::from_core("config", e))?;
    check_flags(cli, &config)?;

    let out = OutputDir::create(&cli.out)?;
    let epsilon = cli.epsilon.unwrap_or(config.epsilon);
    let pivot = cli.pivot - 1;
    let mut cx = Context {
        cli,
        config,
        config_path,
        epsilon,
        pivot,
        out,
        stages: Vec::new(),
        notes: Vec::new(),
        lines: Vec::new(),
        started,
    };
    let canonical = cx.config.canonical().to_string();
    cx.write("config.toml", &canonical)?;
    cx.write("grid.txt", &cx.config.grid().export_mask())?;

    let mut deferred: Option<CliError> = None;
    match &cli.command {
        Command::Validate(_) => {
            let report = validation_report(&cx.config);
            cx.write("validation.txt", &report)?;
            cx.lines.push("validate: ok".into());
        }
        Command::Solve(_) => {
            cx.solve()?;
        }
        Command::Limit(_) => {
            let limit = cx.limit()?;
            cx.interfaces(&limit, "")?;
        }
        Command::Compare(_) => {
            let result = cx.solve()?;
            let limit = cx.limit()?;
            let p = (cx.config.m() + 1) as f64;
            let mut table = String::from("comp,sup_dist,lmp1_dist\n");
            for (i, (a, b)) in result.fields.iter().zip(&limit.fields).enumerate() {
                let _ = writeln!(table, "{},{},{}", i + 1, output::num(a.sup_distance(b)), output::num(lp_distance(a, b, p)));
            }
            let worst = result.fields.iter().zip(&limit.fields).map(|(a, b)| a.sup_distance(b)).fold(0.0, f64::max);
            cx.write("compare.csv", &table)?;
            cx.lines.push(format!("compare: max sup distance {worst:e}"));
        }
        Command::Rate(args) => {
            let eps = geometric_ladder(args.start, args.stop, args.count).map_err(|e| CliError::from_core("rate", e))?;
            let limit = cx.limit()?;
            let t = Instant::now();
            let table = rate_study(cx.config.problem(), &eps, &limit, &cx.config.fixed_point_settings(), cli.threads)
                .map_err(|e| CliError::from_core("rate", e))?;
            cx.stages.push(StageStats {
                name: "rate".into(),
                sweeps: table.entries.iter().map(|e| e.sweeps).sum(),
                wall_time_s: t.elapsed().as_secs_f64(),
                ..Default::default()
            });
            cx.write("rate.csv", &table.to_csv())?;
            let slope = table.slope.map_or("undefined".to_string(), |s| format!("{s:.4}"));
            cx.lines.push(format!("rate: slope={slope} for component {}", table.pivot + 1));
            let failed: Vec<String> = table
                .entries
                .iter()
                .filter_map(|e| e.failure.as_ref().map(|f| format!("epsilon={:e}: {f}", e.epsilon)))
                .collect();
            if !failed.is_empty() {
                deferred = Some(CliError::Solver { stage: "rate", message: failed.join("; ") });
            }
        }
        Command::Interfaces(_) => {
            let limit = cx.limit()?;
            let set = cx.interfaces(&limit, "")?;
            cx.write("supports.csv", &output::supports_csv(&set))?;
            let measures: Vec<_> = limit.fields.iter().map(laplacian_measure).collect();
            cx.write("laplacian_measure.csv", &output::fields_csv(&measures, "mu"))?;
            let stats = jump_condition_check(&limit.fields, &set, &JumpSettings::default());
            cx.write("jumps.csv", &output::jumps_csv(&stats))?;
            if !cx.config.problem().coupling().all_one() {
                cx.notes.push("jump identities are stated for unit coupling weights".into());
            }
        }
    }

    let flags = match &cli.command {
        Command::Rate(a) => json!({
            "epsilon": cli.epsilon, "pivot": cli.pivot, "delta": cli.delta, "threads": cli.threads,
            "start": a.start, "stop": a.stop, "count": a.count,
        }),
        _ => json!({ "epsilon": cli.epsilon, "pivot": cli.pivot, "delta": cli.delta, "threads": cli.threads }),
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().into(),
        config: cx.config_path.display().to_string(),
        config_hash: manifest::sha256_hex(canonical.as_bytes()),
        flags,
        started: cx.started.clone(),
        finished: chrono::Utc::now().to_rfc3339(),
        stages: cx.stages.clone(),
        files: Vec::new(),
        notes: cx.notes.clone(),
    };
    let files = cx.out.finish(manifest)?;
    match deferred {
        Some(e) => Err(e),
        None => Ok(RunSummary { files, lines: cx.lines }),
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
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            for l in &summary.lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
