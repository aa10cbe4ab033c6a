mod job;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nishimori::estimators::ReconstructConfig;
use nishimori::gibbs::{ExperimentConfig, OutputFormat};
use nishimori::harness::{Check, SuiteConfig};
use nishimori::model::ModelKind;
use nishimori::paths::PathMeasure;
use nishimori::Error;

use job::{Job, ReportFormat, SUITE_CORE};
use manifest::Manifest;

/// Disordered lattice spin models on the Nishimori line.
#[derive(Debug, Parser)]
#[command(name = "nishimori", version)]
struct Cli {
    /// Directory receiving result files and the manifest.
    #[arg(long, global = true, env = "NISHIMORI_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Worker threads; overrides the config file.
    #[arg(long, global = true, env = "NISHIMORI_WORKERS")]
    workers: Option<usize>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a quenched experiment from a TOML config, or replay a manifest.
    Run(RunArgs),
    /// Run the identity-check suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Estimate intersection tails of two independent bridged paths.
    Eit(EitArgs),
    /// Tabulate the disorder mean lambda(beta).
    Lambda(LambdaArgs),
    /// Recover planted relative orientations from path products.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Replay the job recorded in a manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    format: Option<Format>,
    /// Result file name, relative to the output directory.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = SUITE_CORE, value_parser = [SUITE_CORE])]
    suite: String,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    burnin: Option<u64>,
    #[arg(long)]
    measure: Option<u64>,
    /// Subset of checks, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_check)]
    checks: Vec<Check>,
    #[arg(long, default_value = "jsonl")]
    format: Format,
}

#[derive(Debug, Args)]
struct EitArgs {
    #[arg(long, value_enum, default_value = "uniform-iid")]
    measure: MeasureArg,
    /// Repeat probability of the markov-mixing measure.
    #[arg(long, default_value_t = 0.6)]
    persistence: f64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Paths run from the origin to (n, ..., n).
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 20_000)]
    pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    UniformIid,
    MarkovMixing,
}

impl MeasureArg {
    fn resolve(self, persistence: f64) -> PathMeasure {
        match self {
            MeasureArg::UniformIid => PathMeasure::UniformIid,
            MeasureArg::MarkovMixing => PathMeasure::MarkovMixing { persistence },
        }
    }
}

#[derive(Debug, Args)]
struct LambdaArgs {
    #[arg(long, value_parser = parse_model, default_value = "xy")]
    model: ModelKind,
    /// Explicit beta values, comma separated or repeated.
    #[arg(long, value_delimiter = ',', conflicts_with = "range")]
    beta: Vec<f64>,
    /// `min,max,points` for an evenly spaced grid.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    range: Vec<f64>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long, value_parser = parse_model, default_value = "su2")]
    model: ModelKind,
    #[arg(long, default_value_t = 16.0)]
    beta: f64,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, value_enum, default_value = "markov-mixing")]
    measure: MeasureArg,
    #[arg(long, default_value_t = 0.6)]
    persistence: f64,
    #[arg(long, default_value_t = 512)]
    paths: usize,
    #[arg(long, default_value_t = 64)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    ModelKind::parse(s).map_err(|e| e.to_string())
}

fn parse_check(s: &str) -> Result<Check, String> {
    Check::parse(s).map_err(|e| e.to_string())
}

/// Each failure class maps to its own exit code.
#[derive(Debug)]
enum Failure {
    ChecksFailed,
    Unreadable(String),
    Invalid(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::ChecksFailed => 1,
            Failure::Unreadable(_) => 3,
            Failure::Invalid(_) => 4,
            Failure::Runtime(_) => 5,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse(_)
            | Error::InvalidArgument(_)
            | Error::InvalidLattice(_)
            | Error::OffNishimori { .. }
            | Error::Geometry(_) => Failure::Invalid(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Unreadable(format!("cannot read {}: {e}", path.display())))
}

fn run_job(cli: &Cli) -> Result<Job, Failure> {
    Ok(match &cli.command {
        Command::Run(a) => {
            if let Some(m) = &a.manifest {
                let text = read_text(m)?;
                return Manifest::parse(&text).map(|m| m.job).map_err(Failure::from);
            }
            let text = read_text(a.config.as_deref().expect("clap requires --config"))?;
            let mut config = ExperimentConfig::from_toml(&text)?;
            if let Some(s) = a.seed {
                config.master_seed = s;
            }
            if let Some(b) = a.beta {
                config.beta = b;
            }
            if let Some(r) = a.replicas {
                config.replicas = r;
            }
            if let Some(f) = a.format {
                config.format = match f {
                    Format::Csv => OutputFormat::Csv,
                    Format::Jsonl => OutputFormat::Jsonl,
                };
            }
            if let Some(o) = &a.output {
                config.output = Some(o.clone());
            }
            config.validate()?;
            Job::Run { config }
        }
        Command::Verify(a) => {
            let mut config = SuiteConfig::quick(a.beta, a.seed);
            let b = &mut config.budget;
            b.replicas = a.replicas.unwrap_or(b.replicas);
            b.burnin = a.burnin.unwrap_or(b.burnin);
            b.measure = a.measure.unwrap_or(b.measure);
            if !a.checks.is_empty() {
                config.checks = a.checks.clone();
            }
            let format = match a.format {
                Format::Csv => ReportFormat::Csv,
                Format::Jsonl => ReportFormat::Jsonl,
            };
            Job::Verify { suite: a.suite.clone(), config, format }
        }
        Command::Eit(a) => Job::Eit {
            measure: a.measure.resolve(a.persistence),
            dim: a.dim,
            n: a.n,
            pairs: a.pairs,
            seed: a.seed,
        },
        Command::Lambda(a) => {
            let betas = if !a.range.is_empty() {
                let [lo, hi, k] = a.range[..] else {
                    return Err(Failure::Invalid("--range takes min,max,points".into()));
                };
                if !(k >= 1.0 && k.fract() == 0.0) {
                    return Err(Failure::Invalid("--range points must be a positive integer".into()));
                }
                let k = k as usize;
                (0..k).map(|i| if k == 1 { lo } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect()
            } else if !a.beta.is_empty() {
                a.beta.clone()
            } else {
                return Err(Failure::Invalid("lambda needs --beta or --range".into()));
            };
            Job::Lambda { model: a.model, betas }
        }
        Command::Reconstruct(a) => Job::Reconstruct {
            config: ReconstructConfig {
                model: a.model,
                beta: a.beta,
                n: a.n,
                measure: a.measure.resolve(a.persistence),
                num_paths: a.paths,
                instances: a.instances,
                seed: a.seed,
            },
        },
    })
}

fn workers(cli: &Cli, job: &mut Job) -> Option<usize> {
    // The worker count never changes results, so it stays out of the hashed job.
    let from_config = match job {
        Job::Run { config } => config.workers.take(),
        _ => None,
    };
    cli.workers.or(from_config)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let mut job = run_job(cli)?;
    let threads = workers(cli, &mut job);
    if threads == Some(0) {
        return Err(Failure::Invalid("workers must be at least 1".into()));
    }
    let dir = cli.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    if cli.verbose > 0 {
        eprintln!("{}: writing to {}", job.name(), dir.display());
    }
    let outcome = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?
            .install(|| job.execute()),
        None => job.execute(),
    }?;
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, bytes) in &outcome.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
        written.push((name.clone(), bytes.as_slice()));
    }
    let manifest = Manifest::new(job, &written)?;
    let mpath = dir.join(format!("{}.manifest.json", manifest.job.name()));
    std::fs::write(&mpath, manifest.to_bytes()?)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", mpath.display())))?;
    println!("{}", outcome.summary);
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::ChecksFailed => eprintln!("error: one or more checks failed"),
                Failure::Unreadable(m) | Failure::Invalid(m) | Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
