//! Normalizers of the disorder law, the path-averaged estimator `R` and the planted
//! synchronization pipeline.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::disorder::{sample_disorder, DisorderField};
use crate::error::{Error, Result};
use crate::gibbs::stats::{self, Estimate};
use crate::lattice::Lattice;
use crate::model::{Model, ModelKind};
use crate::paths::{intersection_count, BridgeSampler, LatticePath, PathMeasure, PathSampler};
use crate::quad::integrate;
use crate::rng::{self, Purpose};

const QUAD_TOL: f64 = 1e-13;

/// `λ(β)`: the scalar in the mean of the disorder law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaValue {
    pub model: ModelKind,
    pub beta: f64,
    pub lambda: f64,
    /// Quadrature error bound.
    pub error: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || beta.is_infinite() {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be finite and nonnegative")));
    }
    Ok(())
}

/// Weighted mean `∫ f w / ∫ w` over `[a, b]` with the error of the ratio.
fn ratio(f: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let num = integrate(|x| f(x) * w(x), a, b, QUAD_TOL);
    let den = integrate(&w, a, b, QUAD_TOL);
    let v = num.value / den.value;
    let err = (num.error / den.value).abs() + (v * den.error / den.value).abs();
    (v, err)
}

/// `E[cos ω]` for `ω ∝ e^{β cos ω}`, i.e. `I₁(β)/I₀(β)`.
pub fn lambda_xy(beta: f64) -> Result<LambdaValue> {
    check_beta(beta)?;
    let (lambda, error) = ratio(|w| w.cos(), |w| (beta * (w.cos() - 1.0)).exp(), 0.0, std::f64::consts::PI);
    Ok(LambdaValue { model: ModelKind::Xy, beta, lambda, error })
}

/// `λ` for the matrix-valued disorder laws.
///
/// SU(2) (and the isoclinic model, which shares its disorder): `E[a]` under the density
/// `sqrt(1-a²) e^{2βa}`. SO(3): `(1 + 2 E[cos α]) / 3` with the angle density
/// `(1 - cos α) e^{2β cos α}`. Heisenberg: the tilted axis law has mean
/// `diag(0, 0, E[t])` with `t ∝ e^{βt}` on `[-1, 1]`, and `λ = E[t] = coth β - 1/β`.
pub fn lambda_group(model: ModelKind, beta: f64) -> Result<LambdaValue> {
    check_beta(beta)?;
    let (lambda, error) = match model {
        ModelKind::Su2 | ModelKind::Isoclinic => {
            // Substitute a = cos t to remove the square-root endpoint singularity.
            ratio(
                |t| t.cos(),
                |t| t.sin().powi(2) * (2.0 * beta * (t.cos() - 1.0)).exp(),
                0.0,
                std::f64::consts::PI,
            )
        }
        ModelKind::So3 => {
            let (c, e) = ratio(
                |a| a.cos(),
                |a| (1.0 - a.cos()) * (2.0 * beta * (a.cos() - 1.0)).exp(),
                0.0,
                std::f64::consts::PI,
            );
            ((1.0 + 2.0 * c) / 3.0, 2.0 * e / 3.0)
        }
        ModelKind::Heisenberg | ModelKind::HeisenbergLift => {
            ratio(|t| t, |t| (beta * (t - 1.0)).exp(), -1.0, 1.0)
        }
        ModelKind::Xy => return lambda_xy(beta),
    };
    Ok(LambdaValue { model, beta, lambda, error })
}

pub fn lambda(model: ModelKind, beta: f64) -> Result<LambdaValue> {
    if beta == 0.0 {
        // Haar mean.
        return Ok(LambdaValue { model, beta, lambda: 0.0, error: 0.0 });
    }
    match model {
        ModelKind::Xy => lambda_xy(beta),
        _ => lambda_group(model, beta),
    }
}

/// The matrix `E[Ω] / λ`: the identity, except for the axis-tilted Heisenberg law
/// whose mean only has a `zz` entry.
pub fn normalized_link_mean(model: ModelKind) -> DMatrix<Complex64> {
    match model {
        ModelKind::Heisenberg | ModelKind::HeisenbergLift => {
            let mut m = DMatrix::zeros(3, 3);
            m[(2, 2)] = Complex64::new(1.0, 0.0);
            m
        }
        ModelKind::Xy => DMatrix::identity(1, 1),
        ModelKind::Su2 | ModelKind::Isoclinic => DMatrix::identity(2, 2),
        ModelKind::So3 => DMatrix::identity(3, 3),
    }
}

/// Disorder-averaged quenched energy per unit coupling on the Nishimori line,
/// `E_ρ[I(1, Ω, 1)]`. `None` for the sphere model, which has no gauge group.
pub fn nishimori_edge_interaction(model: ModelKind, beta: f64) -> Result<Option<f64>> {
    let l = lambda(model, beta)?.lambda;
    Ok(match model {
        ModelKind::Xy | ModelKind::HeisenbergLift => Some(l),
        ModelKind::Su2 | ModelKind::Isoclinic => Some(2.0 * l),
        ModelKind::So3 => Some(3.0 * l),
        ModelKind::Heisenberg => None,
    })
}

/// Monte-Carlo mean of the disorder law, as a second route to `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaCrossCheck {
    pub samples: usize,
    pub lambda: f64,
    pub stderr: f64,
    /// Largest entry of `|E[Ω] - λ P|` where `P` is `normalized_link_mean`.
    pub off_target_max: f64,
    /// The same entry in units of its standard error.
    pub off_target_sigmas: f64,
}

pub fn lambda_monte_carlo<M: Model, R: Rng + ?Sized>(beta: f64, samples: usize, rng: &mut R) -> Result<LambdaCrossCheck> {
    check_beta(beta)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let target = normalized_link_mean(M::KIND);
    let m = target.nrows();
    let mut sum = DMatrix::<Complex64>::zeros(m, m);
    let mut sq = DMatrix::<f64>::zeros(m, m);
    for _ in 0..samples {
        let x = M::link_matrix(M::sample_link(rng, beta));
        sq += x.map(|z| z.norm_sqr());
        sum += x;
    }
    let n = samples as f64;
    let mean = sum / Complex64::new(n, 0.0);
    let se = DMatrix::from_fn(m, m, |r, c| ((sq[(r, c)] / n - mean[(r, c)].norm_sqr()).max(0.0) / (n - 1.0)).sqrt());
    let weight: f64 = target.iter().map(|z| z.re).sum();
    let lambda = (0..m).map(|k| target[(k, k)].re * mean[(k, k)].re).sum::<f64>() / weight;
    let stderr = ((0..m).map(|k| target[(k, k)].re * se[(k, k)].powi(2)).sum::<f64>()).sqrt() / weight;
    let (mut worst, mut worst_sigma) = (0.0f64, 0.0f64);
    for r in 0..m {
        for c in 0..m {
            if target[(r, c)].re != 0.0 {
                continue;
            }
            let d = mean[(r, c)].norm();
            worst = worst.max(d);
            if se[(r, c)] > 0.0 {
                worst_sigma = worst_sigma.max(d / se[(r, c)]);
            }
        }
    }
    Ok(LambdaCrossCheck { samples, lambda, stderr, off_target_max: worst, off_target_sigmas: worst_sigma })
}

/// Paths resolved to oriented lattice edges.
#[derive(Debug, Clone)]
pub struct PreparedPaths {
    paths: Vec<LatticePath>,
    edges: Vec<Vec<(usize, bool)>>,
    label: String,
}

impl PreparedPaths {
    pub fn new(lat: &Lattice, paths: Vec<LatticePath>, label: impl Into<String>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidArgument("need at least one path".into()));
        }
        let edges = paths
            .iter()
            .map(|p| {
                let idx = p.vertex_indices(lat)?;
                idx.windows(2)
                    .enumerate()
                    .map(|(k, w)| {
                        lat.edge_between(w[0], w[1])
                            .ok_or_else(|| Error::PathOutsideLattice(p.vertex(k + 1).to_vec()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { paths, edges, label: label.into() })
    }

    /// `num_paths` draws from `sampler`.
    pub fn sample<R: Rng + ?Sized>(lat: &Lattice, sampler: &PathSampler, num_paths: usize, rng: &mut R) -> Result<Self> {
        let paths = (0..num_paths).map(|_| sampler.sample(rng)).collect::<Result<Vec<_>>>()?;
        Self::new(lat, paths, sampler.label())
    }

    pub fn paths(&self) -> &[LatticePath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Ordered product of the disorder along path `k`.
    pub fn product<M: Model>(&self, disorder: &DisorderField<M>, k: usize) -> M::Link {
        self.edges[k]
            .iter()
            .fold(M::link_identity(), |acc, &(e, fwd)| M::link_mul(acc, disorder.oriented(e, fwd)))
    }
}

/// Path average of `λ^{-|p|} ∏_{e ∈ p} Ω_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct REstimate {
    pub value: DMatrix<Complex64>,
    pub num_paths: usize,
    pub lambda: f64,
    pub from: Vec<i64>,
    pub to: Vec<i64>,
    pub sampler: String,
}

impl REstimate {
    pub fn dim(&self) -> usize {
        self.value.nrows()
    }

    /// `Tr(R R*) / m`; `|R|²` in the scalar case.
    pub fn second_moment(&self) -> f64 {
        self.value.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.dim() as f64
    }
}

pub fn r_estimator<M: Model>(disorder: &DisorderField<M>, paths: &PreparedPaths, lambda: &LambdaValue) -> Result<REstimate> {
    if !(lambda.lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda = {} must be positive", lambda.lambda)));
    }
    let m = M::MATRIX_DIM;
    let mut acc = DMatrix::<Complex64>::zeros(m, m);
    for k in 0..paths.len() {
        let scale = lambda.lambda.powi(-(paths.edges[k].len() as i32));
        acc += M::link_matrix(paths.product(disorder, k)) * Complex64::new(scale, 0.0);
    }
    acc /= Complex64::new(paths.len() as f64, 0.0);
    let first = &paths.paths[0];
    Ok(REstimate {
        value: acc,
        num_paths: paths.len(),
        lambda: lambda.lambda,
        from: first.start().to_vec(),
        to: first.end().to_vec(),
        sampler: paths.label.clone(),
    })
}

/// Sample `num_paths` paths and evaluate `R` on one disorder field.
pub fn r_estimator_sampled<M: Model, R: Rng + ?Sized>(
    lat: &Lattice,
    disorder: &DisorderField<M>,
    sampler: &PathSampler,
    lambda: &LambdaValue,
    num_paths: usize,
    rng: &mut R,
) -> Result<REstimate> {
    let paths = PreparedPaths::sample(lat, sampler, num_paths, rng)?;
    r_estimator(disorder, &paths, lambda)
}

/// Entrywise mean of matrices with the Frobenius norm of the entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMean {
    pub n: usize,
    pub mean: DMatrix<Complex64>,
    pub stderr_frobenius: f64,
}

impl MatrixMean {
    pub fn from_samples(xs: &[DMatrix<Complex64>]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        let (r, c) = xs[0].shape();
        let mut mean = DMatrix::<Complex64>::zeros(r, c);
        for x in xs {
            mean += x;
        }
        mean /= Complex64::new(n as f64, 0.0);
        let var: f64 = xs.iter().map(|x| (x - &mean).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>()
            / (n - 1) as f64;
        Ok(Self { n, mean, stderr_frobenius: (var / n as f64).sqrt() })
    }

    /// `‖mean - target‖_F / sqrt(m)` and its error bar on the same scale.
    pub fn distance(&self, target: &DMatrix<Complex64>) -> (f64, f64) {
        let m = (self.mean.nrows() as f64).sqrt();
        ((&self.mean - target).norm() / m, self.stderr_frobenius / m)
    }
}

/// `E[R]` over fresh Nishimori disorders with one common path set.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationCheck {
    pub model: ModelKind,
    pub beta: f64,
    pub mean: MatrixMean,
    pub distance: f64,
    pub sigma: f64,
}

impl NormalizationCheck {
    pub fn within(&self, sigmas: f64) -> bool {
        self.distance < sigmas * self.sigma
    }
}

pub fn normalization_check<M: Model>(
    lat: &Lattice,
    paths: &PreparedPaths,
    beta: f64,
    num_disorders: usize,
    seed: u64,
) -> Result<NormalizationCheck> {
    let lambda = lambda(M::KIND, beta)?;
    let rs = (0..num_disorders as u64)
        .map(|r| {
            let d = sample_disorder::<M>(lat, beta, seed, r)?;
            Ok(r_estimator(&d, paths, &lambda)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = MatrixMean::from_samples(&rs)?;
    let target = normalized_link_mean(M::KIND);
    let (distance, sigma) = mean.distance(&target);
    Ok(NormalizationCheck { model: M::KIND, beta, mean, distance, sigma })
}

/// One row of the second-moment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub beta: f64,
    pub lambda: f64,
    pub moment: Estimate,
    /// `mean_{p,q} λ^{-2|p ∩ q|}`: the exact disorder average for the circle model
    /// given the path set.
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProbe {
    pub model: ModelKind,
    pub betas: Vec<f64>,
    /// Disorder concentrations; `None` means `u = β`.
    pub u: Option<Vec<f64>>,
    pub n: usize,
    pub measure: PathMeasure,
    pub num_disorders: usize,
    pub num_paths: usize,
    pub seed: u64,
}

/// `mean_{p,q} λ^{-2|p ∩ q|}` over ordered pairs of a path set.
pub fn pair_moment(paths: &[LatticePath], lambda: f64) -> f64 {
    let n = paths.len();
    let mut s = 0.0;
    for p in paths {
        for q in paths {
            s += lambda.powi(-2 * intersection_count(p, q) as i32);
        }
    }
    s / (n * n) as f64
}

impl MomentProbe {
    /// Second moments of `R` for bridged paths `0 -> (n, n, n)`, one common path set
    /// for every `β`.
    pub fn run(&self) -> Result<Vec<MomentRow>> {
        if let Some(u) = &self.u {
            if u.len() != self.betas.len() {
                return Err(Error::InvalidArgument("one u per beta".into()));
            }
            if let Some((&u, &beta)) = u.iter().zip(&self.betas).find(|(u, b)| (*u - *b).abs() > 1e-12 * b.abs().max(1.0)) {
                return Err(Error::OffNishimori { u, beta });
            }
        }
        if self.num_disorders < 2 {
            return Err(Error::InvalidArgument("need at least two disorders".into()));
        }
        let n = self.n as i64;
        let lat = Lattice::build_box(&[n + 1; 3], &[0; 3])?;
        let sampler = PathSampler::Bridge(BridgeSampler::new(self.measure, &[0; 3], &[n; 3])?);
        let mut prng = rng::stream(self.seed, 0, Purpose::Paths);
        let paths = PreparedPaths::sample(&lat, &sampler, self.num_paths, &mut prng)?;
        crate::with_model!(self.model, M => self.rows::<M>(&lat, &paths))
    }

    fn rows<M: Model>(&self, lat: &Lattice, paths: &PreparedPaths) -> Result<Vec<MomentRow>> {
        self.betas
            .iter()
            .map(|&beta| {
                let l = lambda(M::KIND, beta)?;
                let xs = (0..self.num_disorders as u64)
                    .map(|r| Ok(r_estimator(&sample_disorder::<M>(lat, beta, self.seed, r)?, paths, &l)?.second_moment()))
                    .collect::<Result<Vec<_>>>()?;
                let exact = (M::KIND == ModelKind::Xy).then(|| pair_moment(paths.paths(), l.lambda));
                Ok(MomentRow { beta, lambda: l.lambda, moment: stats::iid(&xs), exact })
            })
            .collect()
    }
}

/// Every moment is at least `1 - 3σ`, and the point estimates decrease with `β`.
pub fn moment_trend_holds(rows: &[MomentRow]) -> bool {
    let jensen = rows.iter().all(|r| r.moment.mean >= 1.0 - 3.0 * r.moment.stderr);
    let decreasing = rows.windows(2).all(|w| w[1].beta > w[0].beta && w[1].moment.mean < w[0].moment.mean);
    jensen && decreasing
}

/// Nearest unitary by Newton iteration `X <- (X + X^{-*}) / 2`.
pub fn polar_unitary(x: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let mut cur = x.clone();
    for _ in 0..100 {
        let inv = cur
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular estimate has no polar factor".into()))?;
        let next = (&cur + inv.adjoint()) * Complex64::new(0.5, 0.0);
        let delta = (&next - &cur).norm();
        cur = next;
        if delta < 1e-12 {
            return Ok(cur);
        }
    }
    Err(Error::InvalidArgument("polar iteration did not converge".into()))
}

/// `Re Tr(a* b) / m`.
pub fn alignment(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a.adjoint() * b).trace().re / a.nrows() as f64
}

/// Estimate of the hidden relative orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub raw: REstimate,
    pub estimate: DMatrix<Complex64>,
    pub truth: DMatrix<Complex64>,
    pub alignment: f64,
    /// False when `λ^{|p|}` is so small that the estimate carries no signal.
    pub informative: bool,
}

/// Below this value of `λ^{|p|}` a reconstruction is flagged as non-informative.
pub const INFORMATIVE_FLOOR: f64 = 1e-6;

/// A hidden configuration and the planted disorder it generates.
#[derive(Debug, Clone)]
pub struct PlantedInstance<M: Model> {
    pub spins: Vec<M::Spin>,
    pub disorder: DisorderField<M>,
}

/// Hidden Haar spins `U` and links `U_i N_ij U_j*` with `N_ij` from the disorder law.
pub fn planted_instance<M: Model, R: Rng + ?Sized>(lat: &Lattice, beta: f64, rng: &mut R) -> Result<PlantedInstance<M>> {
    let spins: Vec<M::Spin> = (0..lat.num_vertices()).map(|_| M::random_spin(rng)).collect();
    let links = lat
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let n = M::sample_link(rng, beta * lat.coupling(e));
            M::planted_link(spins[i], n, spins[j])
                .ok_or_else(|| Error::InvalidArgument(format!("{} has no planted model", M::KIND)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlantedInstance { disorder: DisorderField::from_links(lat, links)?, spins })
}

/// Polar projection of `R` between the endpoints of the path set, scored against the
/// planted relative orientation.
pub fn reconstruct_relative<M: Model>(
    lat: &Lattice,
    instance: &PlantedInstance<M>,
    paths: &PreparedPaths,
    lambda: &LambdaValue,
) -> Result<Reconstruction> {
    if !(lambda.lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda = {} carries no signal", lambda.lambda)));
    }
    let raw = r_estimator(&instance.disorder, paths, lambda)?;
    let x = lat.index_of(&raw.from).ok_or_else(|| Error::PathOutsideLattice(raw.from.clone()))?;
    let y = lat.index_of(&raw.to).ok_or_else(|| Error::PathOutsideLattice(raw.to.clone()))?;
    if paths.paths().iter().any(|p| p.start() != raw.from.as_slice() || p.end() != raw.to.as_slice()) {
        return Err(Error::InvalidArgument("all paths must share their endpoints".into()));
    }
    let truth = M::planted_relative(instance.spins[x], instance.spins[y])
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no planted model", M::KIND)))?;
    let longest = paths.edges.iter().map(Vec::len).max().unwrap_or(0);
    let informative = lambda.lambda.powi(longest as i32) >= INFORMATIVE_FLOOR;
    let estimate = match polar_unitary(&raw.value) {
        Ok(u) => u,
        Err(_) => DMatrix::identity(raw.dim(), raw.dim()),
    };
    let estimate = fix_orientation(estimate);
    let alignment = alignment(&estimate, &truth);
    Ok(Reconstruction { raw, estimate, truth, alignment, informative })
}

/// Real 3×3 polar factors with determinant -1 are reflected back into SO(3).
fn fix_orientation(mut u: DMatrix<Complex64>) -> DMatrix<Complex64> {
    if u.nrows() == 3 && u.determinant().re < 0.0 {
        let svd = u.clone().svd(true, true);
        if let (Some(mut a), Some(b)) = (svd.u, svd.v_t) {
            let k = (0..3).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j])).unwrap_or(2);
            for r in 0..3 {
                a[(r, k)] = -a[(r, k)];
            }
            u = a * b;
        }
    }
    u
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructConfig {
    pub model: ModelKind,
    pub beta: f64,
    /// Paths run from `0` to `(n, n, n)`.
    pub n: usize,
    pub measure: PathMeasure,
    pub num_paths: usize,
    pub instances: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub model: ModelKind,
    pub beta: f64,
    pub n: usize,
    pub lambda: f64,
    pub alignments: Vec<f64>,
    pub mean: Estimate,
    pub informative: bool,
}

/// Independent planted instances, each with its own path set.
pub fn run_reconstruction(cfg: &ReconstructConfig) -> Result<ReconstructReport> {
    if cfg.instances < 2 || cfg.num_paths == 0 {
        return Err(Error::InvalidArgument("need at least two instances and one path".into()));
    }
    crate::with_model!(cfg.model, M => reconstruction_runs::<M>(cfg))
}

fn reconstruction_runs<M: Model>(cfg: &ReconstructConfig) -> Result<ReconstructReport> {
    let n = cfg.n as i64;
    let lat = Lattice::build_box(&[n + 1; 3], &[0; 3])?;
    let sampler = PathSampler::Bridge(BridgeSampler::new(cfg.measure, &[0; 3], &[n; 3])?);
    let l = lambda(M::KIND, cfg.beta)?;
    let mut informative = true;
    let alignments = (0..cfg.instances as u64)
        .map(|r| {
            let mut prng = rng::stream(cfg.seed, r, Purpose::Planted);
            let inst = planted_instance::<M, _>(&lat, cfg.beta, &mut prng)?;
            let mut path_rng = rng::stream(cfg.seed, r, Purpose::Paths);
            let paths = PreparedPaths::sample(&lat, &sampler, cfg.num_paths, &mut path_rng)?;
            let rec = reconstruct_relative(&lat, &inst, &paths, &l)?;
            informative &= rec.informative;
            Ok(rec.alignment)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReconstructReport {
        model: cfg.model,
        beta: cfg.beta,
        n: cfg.n,
        lambda: l.lambda,
        mean: stats::iid(&alignments),
        alignments,
        informative,
    })
}
