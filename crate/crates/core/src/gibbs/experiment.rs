use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{self, Estimate};
use super::{QuenchedState, UpdateMethod};
use crate::disorder::{sample_disorder, sample_field_phases};
use crate::error::{Error, Result};
use crate::lattice::{BoundarySpec, CouplingEntry, Lattice};
use crate::model::{Model, ModelKind};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    #[default]
    Free,
    Dirichlet,
}

/// Clamped set: a named set or explicit coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirichletSet {
    /// Only `"interior_boundary"` is recognized.
    Named(String),
    Vertices(Vec<Vec<i64>>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// Strength at every vertex not listed in `sites`.
    #[serde(default)]
    pub uniform: f64,
    #[serde(default)]
    pub sites: Vec<FieldSite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSite {
    pub vertex: Vec<i64>,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub burnin: u64,
    pub measure: u64,
    #[serde(default = "one_u64")]
    pub thin: u64,
}

fn one_u64() -> u64 {
    1
}

fn one_usize() -> usize {
    1
}

fn default_j_min() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// Internal energy per edge.
    Energy {
        #[serde(default)]
        name: Option<String>,
    },
    TwoPoint {
        #[serde(default)]
        name: Option<String>,
        x: Vec<i64>,
        y: Vec<i64>,
    },
    Magnetization {
        #[serde(default)]
        name: Option<String>,
        x: Vec<i64>,
    },
}

impl ObservableSpec {
    pub fn name(&self) -> String {
        let coords = |v: &[i64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        match self {
            ObservableSpec::Energy { name } => name.clone().unwrap_or_else(|| "energy_per_edge".into()),
            ObservableSpec::TwoPoint { name, x, y } => {
                name.clone().unwrap_or_else(|| format!("two_point({};{})", coords(x), coords(y)))
            }
            ObservableSpec::Magnetization { name, x } => {
                name.clone().unwrap_or_else(|| format!("magnetization({})", coords(x)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    #[default]
    Hot,
    Cold,
}

/// Full description of one quenched experiment, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub dims: Vec<i64>,
    #[serde(default)]
    pub origin: Option<Vec<i64>>,
    pub beta: f64,
    /// Disorder concentration; defaults to `beta`.
    #[serde(default)]
    pub u: Option<f64>,
    #[serde(default)]
    pub allow_off_nishimori: bool,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default)]
    pub dirichlet_set: Option<DirichletSet>,
    #[serde(default)]
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
    #[serde(default = "default_j_min")]
    pub j_min: f64,
    pub sweeps: SweepConfig,
    #[serde(default = "one_usize")]
    pub replicas: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub method: Option<UpdateMethod>,
    #[serde(default)]
    pub start: Start,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub verbosity: u8,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn u(&self) -> f64 {
        self.u.unwrap_or(self.beta)
    }

    pub fn off_nishimori(&self) -> bool {
        self.u() != self.beta
    }

    pub fn method(&self) -> UpdateMethod {
        self.method.unwrap_or_else(|| UpdateMethod::preferred(self.model))
    }

    pub fn dims_label(&self) -> String {
        self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        let origin = self.origin.clone().unwrap_or_default();
        let lat = Lattice::build_box(&self.dims, &origin).map_err(|e| Error::Config(e.to_string()))?;
        if self.couplings.is_empty() {
            return Ok(lat);
        }
        let table: Vec<_> = self.couplings.iter().map(|c| (c.a.clone(), c.b.clone(), c.j)).collect();
        lat.with_couplings(&table, self.j_min).map_err(|e| Error::Config(e.to_string()))
    }

    fn vertex(lat: &Lattice, x: &[i64]) -> Result<usize> {
        lat.index_of(x).ok_or_else(|| Error::Config(format!("vertex {x:?} is outside the lattice")))
    }

    pub fn boundary_spec(&self, lat: &Lattice) -> Result<BoundarySpec> {
        match (self.boundary, &self.dirichlet_set) {
            (BoundaryMode::Free, None) => Ok(BoundarySpec::Free),
            (BoundaryMode::Free, Some(_)) => Err(Error::Config("dirichlet_set given with free boundary".into())),
            (BoundaryMode::Dirichlet, None) => BoundarySpec::dirichlet(lat.interior_boundary()),
            (BoundaryMode::Dirichlet, Some(DirichletSet::Named(n))) if n == "interior_boundary" => {
                BoundarySpec::dirichlet(lat.interior_boundary())
            }
            (BoundaryMode::Dirichlet, Some(DirichletSet::Named(n))) => {
                Err(Error::Config(format!("unknown dirichlet set `{n}`")))
            }
            (BoundaryMode::Dirichlet, Some(DirichletSet::Vertices(vs))) => {
                let set = vs.iter().map(|x| Self::vertex(lat, x)).collect::<Result<Vec<_>>>()?;
                BoundarySpec::dirichlet(set)
            }
        }
        .map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })
    }

    pub fn field_strengths(&self, lat: &Lattice) -> Result<Option<Vec<f64>>> {
        let Some(f) = &self.field else { return Ok(None) };
        let mut h = vec![f.uniform; lat.num_vertices()];
        for site in &f.sites {
            h[Self::vertex(lat, &site.vertex)?] = site.h;
        }
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("field strengths must be finite".into()));
        }
        Ok(Some(h))
    }

    /// Check every field combination; returns the lattice it describes.
    pub fn validate(&self) -> Result<Lattice> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta = {} must be positive and finite", self.beta)));
        }
        let u = self.u();
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::Config(format!("u = {u} must be nonnegative and finite")));
        }
        if self.off_nishimori() && !self.allow_off_nishimori {
            return Err(Error::Config(format!(
                "u = {u} differs from beta = {}; set allow_off_nishimori = true to run off the line",
                self.beta
            )));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.sweeps.thin == 0 {
            return Err(Error::Config("sweeps.thin must be at least 1".into()));
        }
        if self.sweeps.measure == 0 {
            return Err(Error::Config("sweeps.measure = 0 yields no records".into()));
        }
        if self.sweeps.measure / self.sweeps.thin < stats::MIN_BATCHES as u64 {
            return Err(Error::Config(format!(
                "need at least {} measurements after thinning",
                stats::MIN_BATCHES
            )));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("no observables requested".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let has_hb = crate::with_model!(self.model, M => <M as Model>::HEAT_BATH);
        if self.method == Some(UpdateMethod::HeatBath) && !has_hb {
            return Err(Error::Config(format!("{} has no heat-bath update", self.model)));
        }
        let lat = self.build_lattice()?;
        self.boundary_spec(&lat)?;
        if let Some(h) = self.field_strengths(&lat)? {
            if self.model != ModelKind::Xy && h.iter().any(|&x| x != 0.0) {
                return Err(Error::Config(format!("random field is not defined for {}", self.model)));
            }
        }
        for o in &self.observables {
            match o {
                ObservableSpec::Energy { .. } => {}
                ObservableSpec::TwoPoint { x, y, .. } => {
                    Self::vertex(&lat, x)?;
                    Self::vertex(&lat, y)?;
                }
                ObservableSpec::Magnetization { x, .. } => {
                    Self::vertex(&lat, x)?;
                }
            }
        }
        Ok(lat)
    }
}

/// One named estimate; `replica = None` marks the aggregate over replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub name: String,
    pub model: ModelKind,
    pub beta: f64,
    pub u: f64,
    pub dims: String,
    pub replica: Option<u64>,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
    pub off_nishimori: bool,
}

impl ObservableRecord {
    pub fn estimate(&self) -> Estimate {
        Estimate { n: self.n, mean: self.mean, stderr: self.stderr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<ObservableRecord>,
}

impl ExperimentResult {
    /// Aggregate record of the named observable.
    pub fn aggregate(&self, name: &str) -> Option<&ObservableRecord> {
        self.records.iter().find(|r| r.name == name && r.replica.is_none())
    }
}

enum Probe {
    Energy,
    TwoPoint(usize, usize),
    Magnetization(usize),
}

/// Run every replica, measure, and return per-replica plus aggregate records.
///
/// Output is a function of the config alone: each replica draws from streams keyed
/// by `(master_seed, replica)`.
pub fn run_quenched_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let lat = Arc::new(cfg.validate()?);
    let run = || crate::with_model!(cfg.model, M => run_typed::<M>(cfg, &lat));
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn run_typed<M: Model>(cfg: &ExperimentConfig, lat: &Arc<Lattice>) -> Result<ExperimentResult> {
    let boundary = cfg.boundary_spec(lat)?;
    let h = cfg.field_strengths(lat)?;
    let probes: Vec<Probe> = cfg
        .observables
        .iter()
        .map(|o| match o {
            ObservableSpec::Energy { .. } => Probe::Energy,
            ObservableSpec::TwoPoint { x, y, .. } => {
                Probe::TwoPoint(lat.index_of(x).unwrap(), lat.index_of(y).unwrap())
            }
            ObservableSpec::Magnetization { x, .. } => Probe::Magnetization(lat.index_of(x).unwrap()),
        })
        .collect();
    let method = cfg.method();
    let seed = cfg.master_seed;

    let per_replica: Vec<Vec<Estimate>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<Estimate>> {
            let disorder = Arc::new(sample_disorder::<M>(lat, cfg.u(), seed, r)?);
            let mut state =
                QuenchedState::new(lat.clone(), disorder, cfg.beta, &boundary, rng::stream(seed, r, Purpose::Mcmc))?;
            if let Some(h) = &h {
                let mut prng = rng::stream(seed, r, Purpose::FieldPhases);
                state = state.with_phases(Arc::new(sample_field_phases(h, &mut prng)))?;
            }
            if cfg.start == Start::Cold {
                state.cold_start();
            }
            state.burn_in(cfg.sweeps.burnin, method)?;
            let mut series: Vec<Vec<f64>> = vec![Vec::new(); probes.len()];
            for k in 0..cfg.sweeps.measure {
                state.sweep(method)?;
                if (k + 1) % cfg.sweeps.thin == 0 {
                    for (p, s) in probes.iter().zip(series.iter_mut()) {
                        s.push(match *p {
                            Probe::Energy => state.measure_internal_energy_per_edge(),
                            Probe::TwoPoint(x, y) => state.measure_two_point(x, y),
                            Probe::Magnetization(x) => state.measure_magnetization(x),
                        });
                    }
                }
            }
            series.iter().map(|s| stats::batch_means(s, stats::DEFAULT_BATCHES)).collect()
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (k, o) in cfg.observables.iter().enumerate() {
        let name = o.name();
        let record = |replica: Option<u64>, e: &Estimate| ObservableRecord {
            name: name.clone(),
            model: M::KIND,
            beta: cfg.beta,
            u: cfg.u(),
            dims: cfg.dims_label(),
            replica,
            n: e.n,
            mean: e.mean,
            stderr: e.stderr,
            seed,
            off_nishimori: cfg.off_nishimori(),
        };
        let column: Vec<Estimate> = per_replica.iter().map(|v| v[k]).collect();
        for (r, e) in column.iter().enumerate() {
            records.push(record(Some(r as u64), e));
        }
        records.push(record(None, &stats::combine_replicas(&column)));
    }
    Ok(ExperimentResult { records })
}

/// CSV columns `name, model, beta, u, dims, replica, n, mean, stderr, seed`; JSON lines
/// carry the same fields plus the off-line flag.
pub fn write_records<W: Write>(records: &[ObservableRecord], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(["name", "model", "beta", "u", "dims", "replica", "n", "mean", "stderr", "seed"])
                .map_err(io)?;
            for r in records {
                let replica = r.replica.map_or_else(|| "all".to_string(), |x| x.to_string());
                w.write_record([
                    r.name.clone(),
                    r.model.to_string(),
                    r.beta.to_string(),
                    r.u.to_string(),
                    r.dims.clone(),
                    replica,
                    r.n.to_string(),
                    r.mean.to_string(),
                    r.stderr.to_string(),
                    r.seed.to_string(),
                ])
                .map_err(io)?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.to_string()))?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
