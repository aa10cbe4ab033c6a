//! Identity checks on the Nishimori line. Each check pairs a Monte Carlo estimate
//! with an exact oracle value or closed form and records a verdict with the full
//! numbers.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{sample_disorder, DisorderField};
use crate::error::{Error, Result};
use crate::estimators::{lambda, nishimori_edge_interaction};
use crate::gibbs::stats::{self, Estimate};
use crate::gibbs::{QuenchedState, Start, UpdateMethod};
use crate::lattice::{BoundarySpec, Lattice};
use crate::model::{Model, ModelKind, Su2Model, Xy};
use crate::oracle::{self, ChainBoundary, Observable, OracleProblem};
use crate::quad;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Factorization,
    InternalEnergy,
    SpinGlass,
    Mmsp,
    TwoPointLower,
}

impl Check {
    pub const ALL: [Check; 5] =
        [Check::Factorization, Check::InternalEnergy, Check::SpinGlass, Check::Mmsp, Check::TwoPointLower];

    pub fn name(self) -> &'static str {
        match self {
            Check::Factorization => "factorization",
            Check::InternalEnergy => "internal_energy",
            Check::SpinGlass => "spin_glass",
            Check::Mmsp => "mmsp",
            Check::TwoPointLower => "two_point_lower",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check `{s}`")))
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One line of a harness report.
///
/// `deviation` is the effect size: an absolute difference for exact cases, a
/// distance in standard errors for Monte Carlo cases, and the margin above the
/// threshold for one-sided cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: Check,
    pub case: String,
    pub model: ModelKind,
    pub beta: f64,
    pub u: f64,
    pub lattice: String,
    pub mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub oracle: Option<f64>,
    pub expected: Option<f64>,
    pub deviation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckRecord {
    fn new(check: Check, case: impl Into<String>, model: ModelKind, beta: f64, lattice: impl Into<String>) -> Self {
        Self {
            check,
            case: case.into(),
            model,
            beta,
            u: beta,
            lattice: lattice.into(),
            mc: None,
            mc_stderr: None,
            oracle: None,
            expected: None,
            deviation: 0.0,
            tolerance: 0.0,
            verdict: Verdict::Fail,
        }
    }

    fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    fn with_oracle(mut self, value: f64) -> Self {
        self.oracle = Some(value);
        self
    }

    fn judge(mut self, ok: bool) -> Self {
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }

    /// Exact value against a closed form or second exact route.
    fn exact(mut self, value: f64, expected: f64, tol: f64) -> Self {
        self.oracle = Some(value);
        self.expected = Some(expected);
        self.deviation = (value - expected).abs();
        self.tolerance = tol;
        let ok = self.deviation <= tol;
        self.judge(ok)
    }

    /// Monte Carlo estimate within `sigmas` standard errors of `expected`.
    fn mc(mut self, est: Estimate, expected: f64, sigmas: f64) -> Self {
        self.mc = Some(est.mean);
        self.mc_stderr = Some(est.stderr);
        self.expected = Some(expected);
        self.deviation = est.sigmas_from(expected);
        self.tolerance = sigmas;
        let ok = self.deviation <= sigmas;
        self.judge(ok)
    }

    /// One-sided: `value >= threshold`.
    fn at_least(mut self, value: f64, threshold: f64) -> Self {
        self.deviation = value - threshold;
        self.tolerance = threshold;
        let ok = value >= threshold;
        self.judge(ok)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn of(&self, check: Check) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(move |r| r.check == check)
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Size of a Monte Carlo leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McBudget {
    pub replicas: usize,
    pub burnin: u64,
    pub measure: u64,
    pub seed: u64,
}

impl McBudget {
    fn validate(&self) -> Result<()> {
        if self.replicas < 2 {
            return Err(Error::InvalidArgument("harness runs need at least two disorder replicas".into()));
        }
        if (self.measure as usize) < stats::MIN_BATCHES {
            return Err(Error::InvalidArgument(format!("need at least {} measured sweeps", stats::MIN_BATCHES)));
        }
        Ok(())
    }
}

fn cube(side: i64) -> Result<Arc<Lattice>> {
    Ok(Arc::new(Lattice::build_box(&[side, side, side], &[])?))
}

fn cube_label(side: i64) -> String {
    format!("{side}x{side}x{side}")
}

fn vertex(lat: &Lattice, x: &[i64]) -> Result<usize> {
    lat.index_of(x).ok_or_else(|| Error::InvalidArgument(format!("vertex {x:?} is outside the lattice")))
}

/// Run `chains` independent chains on one disorder replica and return, per chain,
/// the time series of each observable.
fn sample_chains<M, O>(
    lat: &Arc<Lattice>,
    disorder: &Arc<DisorderField<M>>,
    beta: f64,
    boundary: &BoundarySpec,
    budget: &McBudget,
    replica: u64,
    chains: usize,
    start: Start,
    observe: &O,
) -> Result<Vec<Vec<Vec<f64>>>>
where
    M: Model,
    O: Fn(&QuenchedState<M>) -> Vec<f64>,
{
    let method = UpdateMethod::preferred(M::KIND);
    (0..chains as u64)
        .map(|c| {
            let stream = rng::stream_tagged(budget.seed, &[replica, Purpose::Harness as u64, c]);
            let mut s = QuenchedState::new(lat.clone(), disorder.clone(), beta, boundary, stream)?;
            if start == Start::Cold {
                s.cold_start();
            }
            s.burn_in(budget.burnin, method)?;
            let mut series: Vec<Vec<f64>> = Vec::new();
            for _ in 0..budget.measure {
                s.sweep(method)?;
                let v = observe(&s);
                if series.is_empty() {
                    series = vec![Vec::with_capacity(budget.measure as usize); v.len()];
                }
                for (s, x) in series.iter_mut().zip(v) {
                    s.push(x);
                }
            }
            Ok(series)
        })
        .collect()
}

/// Replica-combined estimates of every observable from one chain per replica.
fn quenched_estimates<M, O>(
    lat: &Arc<Lattice>,
    beta: f64,
    boundary: &BoundarySpec,
    budget: &McBudget,
    start: Start,
    observe: O,
) -> Result<Vec<Estimate>>
where
    M: Model,
    O: Fn(&QuenchedState<M>) -> Vec<f64> + Sync,
{
    budget.validate()?;
    let per: Vec<Vec<Estimate>> = (0..budget.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let d = Arc::new(sample_disorder::<M>(lat, beta, budget.seed, r)?);
            let mut chains = sample_chains(lat, &d, beta, boundary, budget, r, 1, start, &observe)?;
            chains.pop().unwrap().iter().map(|s| stats::batch_means(s, stats::DEFAULT_BATCHES)).collect()
        })
        .collect::<Result<_>>()?;
    let k = per[0].len();
    Ok((0..k).map(|j| stats::combine_replicas(&per.iter().map(|v| v[j]).collect::<Vec<_>>())).collect())
}

/// `E_{ρ_β}[f(ω)]` on the circle, by quadrature.
pub fn circle_moment<F: Fn(f64) -> f64>(beta: f64, f: F) -> f64 {
    let num = quad::integrate(|t| f(t) * (beta * (t.cos() - 1.0)).exp(), -PI, PI, 1e-13).value;
    let den = quad::integrate(|t| (beta * (t.cos() - 1.0)).exp(), -PI, PI, 1e-13).value;
    num / den
}

/// `E[a^k]` for the real part `a` of an SU(2) disorder, by quadrature of its marginal.
pub fn su2_moment(beta: f64, k: i32) -> f64 {
    let w = |a: f64| (1.0 - a * a).max(0.0).sqrt() * (2.0 * beta * (a - 1.0)).exp();
    let num = quad::integrate(|a| a.powi(k) * w(a), -1.0, 1.0, 1e-13).value;
    let den = quad::integrate(w, -1.0, 1.0, 1e-13).value;
    num / den
}

/// Test functions of a circle variable with their Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFn {
    Cos,
    Sin,
    Cos2,
}

impl TestFn {
    pub const ALL: [TestFn; 3] = [TestFn::Cos, TestFn::Sin, TestFn::Cos2];

    pub fn name(self) -> &'static str {
        match self {
            TestFn::Cos => "cos",
            TestFn::Sin => "sin",
            TestFn::Cos2 => "cos2",
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            TestFn::Cos => t.cos(),
            TestFn::Sin => t.sin(),
            TestFn::Cos2 => (2.0 * t).cos(),
        }
    }

    fn fourier(self) -> [(i32, Complex64); 2] {
        let half = Complex64::new(0.5, 0.0);
        match self {
            TestFn::Cos => [(1, half), (-1, half)],
            TestFn::Sin => [(1, Complex64::new(0.0, -0.5)), (-1, Complex64::new(0.0, 0.5))],
            TestFn::Cos2 => [(2, half), (-2, half)],
        }
    }

    /// `E_{ρ_β}[f]`.
    pub fn mean(self, beta: f64) -> f64 {
        circle_moment(beta, |t| self.eval(t))
    }
}

/// `E_u[⟨∏_k f_k(θ_i - θ_j + ω_e)⟩]` over the listed edges of a small graph,
/// by expanding each `f_k` into characters.
pub fn oracle_edge_moment(
    num_vertices: usize,
    edges: &[(usize, usize)],
    beta: f64,
    u: f64,
    factors: &[(usize, TestFn)],
) -> Result<f64> {
    let mut terms: Vec<(Complex64, Vec<i32>, Vec<i32>)> = vec![(Complex64::new(1.0, 0.0), vec![0; num_vertices], vec![0; edges.len()])];
    for &(e, f) in factors {
        let (i, j) = *edges.get(e).ok_or_else(|| Error::InvalidArgument(format!("no edge {e}")))?;
        let mut next = Vec::new();
        for (c, charges, winding) in &terms {
            for (k, ck) in f.fourier() {
                let mut ch = charges.clone();
                let mut wd = winding.clone();
                ch[i] += k;
                ch[j] -= k;
                wd[e] += k;
                next.push((c * ck, ch, wd));
            }
        }
        terms = next;
    }
    let mut problem = OracleProblem::new(num_vertices, edges.to_vec(), beta);
    for (_, ch, _) in &terms {
        problem = problem.observe(Observable::character(ch.clone()));
    }
    let (v, _) = oracle::exact_disorder_average(&problem, u, |omega, values| {
        terms
            .iter()
            .zip(values)
            .map(|((c, _, wd), x)| {
                let phase: f64 = wd.iter().zip(omega).map(|(&k, w)| k as f64 * w).sum();
                c * x * Complex64::from_polar(1.0, phase)
            })
            .sum()
    })?;
    Ok(v.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationParams {
    pub beta: f64,
    /// Disorder concentration for the off-line counterexample.
    pub u_off: f64,
    pub side: i64,
    pub budget: McBudget,
    pub sigmas: f64,
    pub oracle_tolerance: f64,
    /// Smallest gap the off-line counterexample must show.
    pub min_gap: f64,
}

impl FactorizationParams {
    pub fn new(beta: f64, budget: McBudget) -> Self {
        Self { beta, u_off: 0.5, side: 4, budget, sigmas: 3.0, oracle_tolerance: 1e-8, min_gap: 1e-3 }
    }
}

const TRIANGLE: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];
const CHAIN3: [(usize, usize); 2] = [(0, 1), (1, 2)];

/// Joint edge moments factor into disorder moments on the Nishimori line, and
/// fail to off it.
pub fn check_factorization(p: &FactorizationParams) -> Result<Report> {
    let beta = p.beta;
    let mut out = Report::default();
    let means: Vec<f64> = TestFn::ALL.iter().map(|f| f.mean(beta)).collect();
    let mean_of = |f: TestFn| means[TestFn::ALL.iter().position(|&g| g == f).unwrap()];

    for f in TestFn::ALL {
        for g in TestFn::ALL {
            let v = oracle_edge_moment(3, &CHAIN3, beta, beta, &[(0, f), (1, g)])?;
            out.records.push(
                CheckRecord::new(Check::Factorization, format!("oracle {}x{}", f.name(), g.name()), ModelKind::Xy, beta, "chain3")
                    .exact(v, mean_of(f) * mean_of(g), p.oracle_tolerance),
            );
        }
    }
    for (f, g) in [(TestFn::Cos, TestFn::Cos), (TestFn::Sin, TestFn::Sin), (TestFn::Cos2, TestFn::Cos)] {
        let v = oracle_edge_moment(3, &TRIANGLE, beta, beta, &[(0, f), (1, g)])?;
        out.records.push(
            CheckRecord::new(Check::Factorization, format!("oracle {}x{}", f.name(), g.name()), ModelKind::Xy, beta, "triangle")
                .exact(v, mean_of(f) * mean_of(g), p.oracle_tolerance),
        );
    }
    let triple = [(0, TestFn::Cos), (1, TestFn::Cos), (2, TestFn::Cos)];
    let v = oracle_edge_moment(3, &TRIANGLE, beta, beta, &triple)?;
    out.records.push(
        CheckRecord::new(Check::Factorization, "oracle cos^3", ModelKind::Xy, beta, "triangle")
            .exact(v, mean_of(TestFn::Cos).powi(3), p.oracle_tolerance),
    );

    // Off the line the triangle's flux correlates its edges.
    let u = p.u_off;
    let cos = |e| (e, TestFn::Cos);
    let joint = oracle_edge_moment(3, &TRIANGLE, beta, u, &[cos(0), cos(1)])?;
    let m0 = oracle_edge_moment(3, &TRIANGLE, beta, u, &[cos(0)])?;
    let m1 = oracle_edge_moment(3, &TRIANGLE, beta, u, &[cos(1)])?;
    let gap = (joint - m0 * m1).abs();
    let mut r = CheckRecord::new(Check::Factorization, "off-line gap cos x cos", ModelKind::Xy, beta, "triangle")
        .with_u(u)
        .with_oracle(joint)
        .at_least(gap, p.min_gap);
    r.expected = Some(m0 * m1);
    out.records.push(r);

    out.extend(factorization_mc_xy(p, &mean_of)?);
    out.extend(factorization_mc_su2(p)?);
    Ok(out)
}

/// Three pairwise disjoint edges in the middle of a cube of side at least 4.
fn disjoint_edges(lat: &Lattice, side: i64) -> Result<Vec<(usize, usize)>> {
    if side < 4 {
        return Err(Error::InvalidArgument("factorization needs a box of side at least 4".into()));
    }
    let pairs = [([0, 0, 0], [1, 0, 0]), ([2, 2, 2], [2, 3, 2]), ([1, 3, 1], [1, 3, 2])];
    pairs.iter().map(|(a, b)| Ok((vertex(lat, a)?, vertex(lat, b)?))).collect()
}

fn factorization_mc_xy(p: &FactorizationParams, mean_of: &dyn Fn(TestFn) -> f64) -> Result<Report> {
    let lat = cube(p.side)?;
    let edges = disjoint_edges(&lat, p.side)?;
    let beta = p.beta;
    let est = quenched_estimates::<Xy, _>(&lat, beta, &BoundarySpec::Free, &p.budget, Start::Hot, |s| {
        let y: Vec<f64> = edges
            .iter()
            .map(|&(i, j)| {
                let w = s.disorder().read(s.lattice(), i, j).unwrap();
                (s.spins()[i] * s.spins()[j].conj() * w).arg()
            })
            .collect();
        let mut v = Vec::with_capacity(12);
        for f in TestFn::ALL {
            let fy: Vec<f64> = y.iter().map(|&t| f.eval(t)).collect();
            v.extend_from_slice(&fy);
            v.push(fy.iter().product());
        }
        v
    })?;
    let mut out = Report::default();
    let label = cube_label(p.side);
    for (k, f) in TestFn::ALL.into_iter().enumerate() {
        let m = mean_of(f);
        for e in 0..3 {
            out.records.push(
                CheckRecord::new(Check::Factorization, format!("mc {} edge {e}", f.name()), ModelKind::Xy, beta, &label)
                    .mc(est[4 * k + e], m, p.sigmas),
            );
        }
        out.records.push(
            CheckRecord::new(Check::Factorization, format!("mc {}^3 disjoint", f.name()), ModelKind::Xy, beta, &label)
                .mc(est[4 * k + 3], m.powi(3), p.sigmas),
        );
    }
    Ok(out)
}

/// `U_i* Ω U_j` is distributed as the disorder: moment tests of its quaternion.
fn factorization_mc_su2(p: &FactorizationParams) -> Result<Report> {
    let lat = cube(p.side)?;
    let edges = disjoint_edges(&lat, p.side)?;
    let beta = p.beta;
    let est = quenched_estimates::<Su2Model, _>(&lat, beta, &BoundarySpec::Free, &p.budget, Start::Hot, |s| {
        let q: Vec<[f64; 4]> = edges
            .iter()
            .map(|&(i, j)| {
                let w = s.disorder().read(s.lattice(), i, j).unwrap();
                s.spins()[i].adjoint().mul(w.mul(s.spins()[j])).to_array()
            })
            .collect();
        vec![q[0][0], q[0][0] * q[0][0], q[0][1], q[0][3], q[0][0] * q[1][0], q[0][0] * q[1][0] * q[2][0]]
    })?;
    let lam = su2_moment(beta, 1);
    let cases = [
        ("mc E[a]", lam),
        ("mc E[a^2]", su2_moment(beta, 2)),
        ("mc E[b]", 0.0),
        ("mc E[d]", 0.0),
        ("mc E[a a']", lam * lam),
        ("mc E[a a' a'']", lam.powi(3)),
    ];
    let label = cube_label(p.side);
    let mut out = Report::default();
    for ((case, expected), e) in cases.into_iter().zip(est) {
        out.records.push(CheckRecord::new(Check::Factorization, case, ModelKind::Su2, beta, &label).mc(e, expected, p.sigmas));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub models: Vec<ModelKind>,
    pub beta: f64,
    pub side: i64,
    pub budget: McBudget,
    pub sigmas: f64,
    pub oracle_tolerance: f64,
}

impl EnergyParams {
    pub fn new(beta: f64, budget: McBudget) -> Self {
        Self {
            models: vec![ModelKind::Xy, ModelKind::Su2, ModelKind::So3],
            beta,
            side: 6,
            budget,
            sigmas: 3.0,
            oracle_tolerance: 1e-8,
        }
    }
}

/// Resolution at which the circle oracle converges for a given `β`.
fn oracle_resolution(beta: f64) -> Option<usize> {
    if beta <= 2.0 {
        Some(32)
    } else if beta <= 4.0 {
        Some(64)
    } else {
        None
    }
}

/// Averaged quenched energy per edge equals minus the mean disorder interaction.
pub fn check_internal_energy(p: &EnergyParams) -> Result<Report> {
    let lat = cube(p.side)?;
    let label = cube_label(p.side);
    let mut out = Report::default();
    let oracle = match oracle_resolution(p.beta) {
        Some(q) => {
            let problem = OracleProblem::chain(3, p.beta).with_resolution(q).observe(Observable::relative(3, 0, 1));
            let (v, _) = oracle::exact_disorder_average(&problem, p.beta, |omega, values| {
                values[0] * Complex64::from_polar(1.0, omega[0])
            })?;
            Some(-v.re)
        }
        None => None,
    };
    for &model in &p.models {
        let Some(edge) = nishimori_edge_interaction(model, p.beta)? else {
            return Err(Error::InvalidArgument(format!("{model} has no closed-form edge interaction")));
        };
        let est = crate::with_model!(model, M => quenched_estimates::<M, _>(
            &lat,
            p.beta,
            &BoundarySpec::Free,
            &p.budget,
            Start::Hot,
            |s| vec![s.measure_internal_energy_per_edge()],
        ))?;
        let mut r = CheckRecord::new(Check::InternalEnergy, "energy per edge", model, p.beta, &label).mc(est[0], -edge, p.sigmas);
        if model == ModelKind::Xy {
            if let Some(o) = oracle {
                r.oracle = Some(o);
            }
        }
        out.records.push(r);
    }
    if let Some(o) = oracle {
        let lam = lambda(ModelKind::Xy, p.beta)?.lambda;
        out.records.push(
            CheckRecord::new(Check::InternalEnergy, "oracle energy per edge", ModelKind::Xy, p.beta, "chain3")
                .exact(o, -lam, p.oracle_tolerance),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassParams {
    pub betas: Vec<f64>,
    pub side: i64,
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub budget: McBudget,
    pub sigmas: f64,
    pub oracle_tolerance: f64,
}

impl SpinGlassParams {
    pub fn new(betas: Vec<f64>, budget: McBudget) -> Self {
        Self {
            betas,
            side: 4,
            x: vec![1, 1, 1],
            y: vec![2, 2, 1],
            budget,
            sigmas: 3.0,
            oracle_tolerance: 1e-8,
        }
    }
}

/// `E⟨e^{i(θx - θy)}⟩ = E|⟨e^{i(θx - θy)}⟩|²`, by two independent chains per
/// disorder replica and by the oracle on a two-edge chain.
pub fn check_spin_glass(p: &SpinGlassParams) -> Result<Report> {
    p.budget.validate()?;
    let lat = cube(p.side)?;
    let label = cube_label(p.side);
    let (x, y) = (vertex(&lat, &p.x)?, vertex(&lat, &p.y)?);
    let mut out = Report::default();
    for &beta in &p.betas {
        let pairs: Vec<(f64, f64)> = (0..p.budget.replicas as u64)
            .into_par_iter()
            .map(|r| {
                let d = Arc::new(sample_disorder::<Xy>(&lat, beta, p.budget.seed, r)?);
                let chains = sample_chains(&lat, &d, beta, &BoundarySpec::Free, &p.budget, r, 2, Start::Hot, &|s: &QuenchedState<Xy>| {
                    let z = s.spins()[x] * s.spins()[y].conj();
                    vec![z.re, z.im]
                })?;
                let m: Vec<Complex64> =
                    chains.iter().map(|c| Complex64::new(stats::mean(&c[0]), stats::mean(&c[1]))).collect();
                Ok((0.5 * (m[0].re + m[1].re), (m[0] * m[1].conj()).re))
            })
            .collect::<Result<_>>()?;
        let lhs = stats::iid(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let rhs = stats::iid(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        let combined = Estimate { n: lhs.n, mean: lhs.mean - rhs.mean, stderr: lhs.stderr.hypot(rhs.stderr) };
        let mut r = CheckRecord::new(Check::SpinGlass, "mc E<z> - E|<z>|^2", ModelKind::Xy, beta, &label).mc(combined, 0.0, p.sigmas);
        r.expected = Some(rhs.mean);
        r.mc = Some(lhs.mean);
        out.records.push(r);
        for (case, e) in [("mc E<z> >= 0", lhs), ("mc E|<z>|^2 >= 0", rhs)] {
            let mut r = CheckRecord::new(Check::SpinGlass, case, ModelKind::Xy, beta, &label).at_least(e.mean + p.sigmas * e.stderr, 0.0);
            r.mc = Some(e.mean);
            r.mc_stderr = Some(e.stderr);
            out.records.push(r);
        }

        if let Some(q) = oracle_resolution(beta) {
            let problem = OracleProblem::chain(3, beta).with_resolution(q).observe(Observable::relative(3, 0, 2));
            let (first, _) = oracle::exact_disorder_average(&problem, beta, |_, v| v[0])?;
            let (second, _) = oracle::exact_disorder_average(&problem, beta, |_, v| Complex64::new(v[0].norm_sqr(), 0.0))?;
            out.records.push(
                CheckRecord::new(Check::SpinGlass, "oracle E<z> vs E|<z>|^2", ModelKind::Xy, beta, "chain3")
                    .exact(first.re, second.re, p.oracle_tolerance),
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmspParams {
    pub beta: f64,
    pub fields: usize,
    pub identity_points: usize,
    pub seed: u64,
    pub violation_tolerance: f64,
    pub identity_tolerance: f64,
}

impl MmspParams {
    pub fn new(beta: f64, seed: u64) -> Self {
        Self { beta, fields: 50, identity_points: 10_000, seed, violation_tolerance: 1e-8, identity_tolerance: 1e-12 }
    }
}

/// Five-vertex test graphs; vertex 0 is clamped, the observable sits on 1 and 3.
pub fn mmsp_graphs() -> Vec<(&'static str, Vec<(usize, usize)>)> {
    vec![
        ("cycle5+chord", vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]),
        ("bowtie", vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]),
        ("path5", vec![(0, 1), (1, 2), (2, 3), (3, 4)]),
    ]
}

/// Random disorder never raises `⟨cos θ_a cos θ_b⟩` above its value at `ω ≡ 0`.
pub fn check_mmsp(p: &MmspParams) -> Result<Report> {
    let mut out = Report::default();
    let mut rng = rng::stream(p.seed, 0, Purpose::Harness);
    let q = oracle_resolution(p.beta).ok_or_else(|| {
        Error::InvalidArgument(format!("mmsp oracle needs beta <= 4, got {}", p.beta))
    })?;
    for (name, edges) in mmsp_graphs() {
        let m = edges.len();
        let obs = Observable::cos_site(5, 1, 1).product(&Observable::cos_site(5, 3, 1));
        let problem = OracleProblem::new(5, edges, p.beta).with_clamped(vec![0]).with_resolution(q).observe(obs);
        let clean = oracle::exact_quenched(&problem, &vec![0.0; m])?.values[0].re;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..p.fields {
            let omega: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
            let v = oracle::exact_quenched(&problem, &omega)?.values[0].re;
            worst = worst.max(v - clean);
        }
        let mut r = CheckRecord::new(Check::Mmsp, format!("max excess over {} fields", p.fields), ModelKind::Xy, p.beta, name)
            .with_oracle(clean);
        r.deviation = worst;
        r.tolerance = p.violation_tolerance;
        r = r.judge(worst <= p.violation_tolerance);
        out.records.push(r);

        let same = oracle::exact_quenched(&problem, &vec![0.0; m])?.values[0].re;
        out.records.push(
            CheckRecord::new(Check::Mmsp, "zero field equality", ModelKind::Xy, p.beta, name).exact(same, clean, 0.0),
        );
    }
    let mut worst: f64 = 0.0;
    for _ in 0..p.identity_points {
        let t = rng.random_range(-PI..PI);
        let t2 = rng.random_range(-PI..PI);
        let w = rng.random_range(-PI..PI);
        let (l, r) = oracle::duplicate_variable_sides(t, t2, w);
        worst = worst.max((l - r).abs());
    }
    let mut r = CheckRecord::new(Check::Mmsp, format!("duplicate identity at {} points", p.identity_points), ModelKind::Xy, p.beta, "pointwise");
    r.deviation = worst;
    r.tolerance = p.identity_tolerance;
    r = r.judge(worst <= p.identity_tolerance);
    out.records.push(r);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointParams {
    pub models: Vec<ModelKind>,
    pub betas: Vec<f64>,
    pub side: i64,
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    /// Required gain of the largest `β` over the smallest.
    pub margin: f64,
    pub budget: McBudget,
    pub chain_beta: f64,
    pub chain_lengths: Vec<usize>,
    pub chain_tolerance: f64,
}

impl TwoPointParams {
    pub fn new(budget: McBudget) -> Self {
        Self {
            models: vec![ModelKind::Xy, ModelKind::Su2],
            betas: vec![0.5, 3.0, 6.0, 12.0],
            side: 10,
            x: vec![2, 5, 5],
            y: vec![6, 5, 5],
            margin: 0.5,
            budget,
            chain_beta: 0.5,
            chain_lengths: vec![1, 2, 3, 4, 6, 8, 12, 16],
            chain_tolerance: 1e-8,
        }
    }
}

/// The averaged two-point function grows with `β` and clears a margin over the
/// high-temperature value; on chains it decays exactly as `λ^L` for any disorder.
pub fn check_two_point_lower(p: &TwoPointParams) -> Result<Report> {
    if p.betas.len() < 2 {
        return Err(Error::InvalidArgument("two_point_lower needs at least two temperatures".into()));
    }
    let lat = cube(p.side)?;
    let label = cube_label(p.side);
    let (x, y) = (vertex(&lat, &p.x)?, vertex(&lat, &p.y)?);
    let mut out = Report::default();
    for &model in &p.models {
        let norm = model.spin_space().trace_dim() as f64;
        let mut curve: Vec<(f64, Estimate)> = Vec::new();
        for &beta in &p.betas {
            let e = crate::with_model!(model, M => quenched_estimates::<M, _>(
                &lat,
                beta,
                &BoundarySpec::Free,
                &p.budget,
                Start::Cold,
                |s| vec![s.measure_two_point(x, y) / norm],
            ))?[0];
            curve.push((beta, e));
        }
        for w in curve.windows(2) {
            let (b0, e0) = w[0];
            let (b1, e1) = w[1];
            let mut r = CheckRecord::new(Check::TwoPointLower, format!("increase {b0} -> {b1}"), model, b1, &label)
                .at_least(e1.mean - e0.mean, 0.0);
            r.mc = Some(e1.mean);
            r.mc_stderr = Some(e1.stderr);
            r.expected = Some(e0.mean);
            out.records.push(r);
        }
        let (b_lo, lo) = curve[0];
        let (b_hi, hi) = *curve.last().unwrap();
        let mut r = CheckRecord::new(Check::TwoPointLower, format!("gain {b_lo} -> {b_hi} >= {}", p.margin), model, b_hi, &label)
            .at_least(hi.mean - lo.mean, p.margin);
        r.mc = Some(hi.mean);
        r.mc_stderr = Some(hi.stderr);
        r.expected = Some(lo.mean);
        out.records.push(r);
    }

    let lam = lambda(ModelKind::Xy, p.chain_beta)?.lambda;
    let mut rng = rng::stream(p.budget.seed, 1, Purpose::Harness);
    for &len in &p.chain_lengths {
        let omega: Vec<f64> = (0..len).map(|_| rng.random_range(-PI..PI)).collect();
        let (v, _) = oracle::transfer_chain(len, p.chain_beta, &omega, ChainBoundary::Open, 0, len, 64)?;
        let exact = lam.powi(len as i32);
        out.records.push(
            CheckRecord::new(Check::TwoPointLower, format!("chain |<z>| vs lambda^{len}"), ModelKind::Xy, p.chain_beta, format!("chain{len}"))
                .exact(v.norm(), exact, p.chain_tolerance),
        );
    }
    Ok(out)
}

/// Inputs of the `nishimori-core` suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub beta: f64,
    pub checks: Vec<Check>,
    pub budget: McBudget,
}

impl SuiteConfig {
    /// Desk-scale defaults: a few seconds per check on one core.
    pub fn quick(beta: f64, seed: u64) -> Self {
        Self {
            beta,
            checks: Check::ALL.to_vec(),
            budget: McBudget { replicas: 16, burnin: 200, measure: 800, seed },
        }
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {} must be positive and finite", cfg.beta)));
    }
    let mut out = Report::default();
    for &check in &cfg.checks {
        let r = match check {
            Check::Factorization => check_factorization(&FactorizationParams::new(cfg.beta, cfg.budget))?,
            Check::InternalEnergy => check_internal_energy(&EnergyParams { side: 4, ..EnergyParams::new(cfg.beta, cfg.budget) })?,
            Check::SpinGlass => check_spin_glass(&SpinGlassParams::new(vec![cfg.beta], cfg.budget))?,
            Check::Mmsp => check_mmsp(&MmspParams::new(cfg.beta, cfg.budget.seed))?,
            Check::TwoPointLower => {
                let budget = McBudget { replicas: cfg.budget.replicas.min(8), ..cfg.budget };
                check_two_point_lower(&TwoPointParams { side: 8, x: vec![1, 4, 4], y: vec![5, 4, 4], ..TwoPointParams::new(budget) })?
            }
        };
        out.extend(r);
    }
    Ok(out)
}
