use nishimori::estimators::{self, ReconstructConfig};
use nishimori::gibbs::{self, ExperimentConfig, OutputFormat};
use nishimori::harness::{self, SuiteConfig};
use nishimori::model::ModelKind;
use nishimori::paths::{self, BridgeSampler, PathMeasure};
use nishimori::rng::{self, Purpose};
use nishimori::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SUITE_CORE: &str = "nishimori-core";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Jsonl,
    Csv,
}

/// A fully resolved command. Its JSON form is what the manifest hashes and replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Run { config: ExperimentConfig },
    Verify { suite: String, config: SuiteConfig, format: ReportFormat },
    Eit { measure: PathMeasure, dim: usize, n: usize, pairs: usize, seed: u64 },
    Lambda { model: ModelKind, betas: Vec<f64> },
    Reconstruct { config: ReconstructConfig },
}

pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    pub passed: bool,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Run { .. } => "run",
            Job::Verify { .. } => "verify",
            Job::Eit { .. } => "eit",
            Job::Lambda { .. } => "lambda",
            Job::Reconstruct { .. } => "reconstruct",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Run { config } => Some(config.master_seed),
            Job::Verify { config, .. } => Some(config.budget.seed),
            Job::Eit { seed, .. } => Some(*seed),
            Job::Lambda { .. } => None,
            Job::Reconstruct { config } => Some(config.seed),
        }
    }

    pub fn execute(&self) -> Result<Outcome> {
        match self {
            Job::Run { config } => run(config),
            Job::Verify { suite, config, format } => verify(suite, config, *format),
            Job::Eit { measure, dim, n, pairs, seed } => eit(*measure, *dim, *n, *pairs, *seed),
            Job::Lambda { model, betas } => lambda(*model, betas),
            Job::Reconstruct { config } => reconstruct(config),
        }
    }
}

fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let result = gibbs::run_quenched_experiment(cfg)?;
    let mut bytes = Vec::new();
    gibbs::write_records(&result.records, cfg.format, &mut bytes)?;
    let name = cfg.output.clone().unwrap_or_else(|| match cfg.format {
        OutputFormat::Csv => "results.csv".into(),
        OutputFormat::Jsonl => "results.jsonl".into(),
    });
    let summary = result
        .records
        .iter()
        .filter(|r| r.replica.is_none())
        .map(|r| format!("{} = {} +/- {}", r.name, r.mean, r.stderr))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome { files: vec![(name, bytes)], summary, passed: true })
}

fn verify(suite: &str, cfg: &SuiteConfig, format: ReportFormat) -> Result<Outcome> {
    if suite != SUITE_CORE {
        return Err(Error::Config(format!("unknown suite `{suite}`")));
    }
    let report = harness::run_suite(cfg)?;
    let mut bytes = Vec::new();
    let name = match format {
        ReportFormat::Jsonl => {
            report.write_jsonl(&mut bytes)?;
            "verify.jsonl"
        }
        ReportFormat::Csv => {
            report.write_csv(&mut bytes)?;
            "verify.csv"
        }
    };
    let mut lines: Vec<String> = report
        .records
        .iter()
        .map(|r| {
            let v = if r.passed() { "PASS" } else { "FAIL" };
            format!("{v} {} [{} beta={} {}] {}", r.check, r.model, r.beta, r.lattice, r.case)
        })
        .collect();
    let failed = report.failures().count();
    lines.push(format!("{} of {} checks passed", report.records.len() - failed, report.records.len()));
    Ok(Outcome { files: vec![(name.into(), bytes)], summary: lines.join("\n"), passed: report.passed() })
}

fn eit(measure: PathMeasure, dim: usize, n: usize, pairs: usize, seed: u64) -> Result<Outcome> {
    if dim < 2 || n == 0 {
        return Err(Error::Config("eit needs dim >= 2 and n >= 1".into()));
    }
    let b = BridgeSampler::new(measure, &vec![0; dim], &vec![n as i64; dim])?;
    let mut r = rng::stream(seed, 0, Purpose::Paths);
    let curve = paths::estimate_eit_tail(|r| b.sample(r), pairs, &mut r)?;
    let mut bytes = Vec::new();
    curve.write_csv(&mut bytes)?;
    let summary = match curve.fit {
        Some(f) => format!(
            "alpha = {:.4} +/- {:.4}, C = {:.4}, R^2 = {:.4}, k in [{}, {}]",
            f.alpha, f.alpha_stderr, f.c, f.r_squared, f.k_min, f.k_max
        ),
        None => "no pair intersected: alpha = inf".into(),
    };
    Ok(Outcome { files: vec![("eit.csv".into(), bytes)], summary, passed: true })
}

fn lambda(model: ModelKind, betas: &[f64]) -> Result<Outcome> {
    if betas.is_empty() {
        return Err(Error::Config("lambda needs at least one beta".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for &b in betas {
        let v = estimators::lambda(model, b).map_err(|e| Error::Config(e.to_string()))?;
        w.serialize(v).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let summary = String::from_utf8_lossy(&bytes).trim_end().to_string();
    Ok(Outcome { files: vec![("lambda.csv".into(), bytes)], summary, passed: true })
}

fn reconstruct(cfg: &ReconstructConfig) -> Result<Outcome> {
    let report = estimators::run_reconstruction(cfg)?;
    let mut bytes = serde_json::to_vec_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    bytes.push(b'\n');
    let summary = format!(
        "mean alignment = {:.4} +/- {:.4} over {} instances (lambda = {:.4}{})",
        report.mean.mean,
        report.mean.stderr,
        report.alignments.len(),
        report.lambda,
        if report.informative { "" } else { ", non-informative" }
    );
    Ok(Outcome { files: vec![("reconstruct.json".into(), bytes)], summary, passed: true })
}
