//! Directed lattice paths: increasing-path measures, endpoint bridges, the
//! four-cone route between arbitrary points, and intersection-tail statistics.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{cone_decomposition, ConeDecomposition, ConePiece, Lattice};

/// A walk on `Z^d` stored by its vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath {
    dim: usize,
    coords: Vec<i64>,
}

impl LatticePath {
    pub fn single(start: &[i64]) -> Self {
        Self { dim: start.len(), coords: start.to_vec() }
    }

    /// Build from vertices; consecutive vertices must be nearest neighbors.
    pub fn from_vertices(vertices: &[Vec<i64>]) -> Result<Self> {
        let dim = vertices.first().map_or(0, |v| v.len());
        if dim == 0 {
            return Err(Error::InvalidArgument("a path needs at least one vertex".into()));
        }
        let mut p = Self::single(&vertices[0]);
        for w in vertices.windows(2) {
            if w[1].len() != dim {
                return Err(Error::InvalidArgument("mixed dimensions in path".into()));
            }
            let l1: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
            if l1 != 1 {
                return Err(Error::InvalidArgument(format!("{:?} and {:?} are not adjacent", w[0], w[1])));
            }
            p.coords.extend_from_slice(&w[1]);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertex(&self, k: usize) -> &[i64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[i64]> {
        self.coords.chunks(self.dim)
    }

    pub fn start(&self) -> &[i64] {
        self.vertex(0)
    }

    pub fn end(&self) -> &[i64] {
        self.vertex(self.len())
    }

    fn push_step(&mut self, axis: usize, sign: i64) {
        let last = self.coords.len() - self.dim;
        for k in 0..self.dim {
            let c = self.coords[last + k] + if k == axis { sign } else { 0 };
            self.coords.push(c);
        }
    }

    /// `(axis, sign)` of step `k`.
    pub fn step(&self, k: usize) -> (usize, i64) {
        let (a, b) = (self.vertex(k), self.vertex(k + 1));
        let axis = (0..self.dim).find(|&i| a[i] != b[i]).expect("steps are unit moves");
        (axis, b[axis] - a[axis])
    }

    /// Every step is `+e_k` for some `k`.
    pub fn is_increasing(&self) -> bool {
        (0..self.len()).all(|k| self.step(k).1 > 0)
    }

    /// Unoriented edge key: lower endpoint and axis.
    fn edge_key(&self, k: usize) -> (Vec<i64>, usize) {
        let (axis, sign) = self.step(k);
        let low = if sign > 0 { self.vertex(k) } else { self.vertex(k + 1) };
        (low.to_vec(), axis)
    }

    /// No unoriented edge is used twice.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.len());
        (0..self.len()).all(|k| seen.insert(self.edge_key(k)))
    }

    /// Lattice vertex indices along the path.
    pub fn vertex_indices(&self, lat: &Lattice) -> Result<Vec<usize>> {
        self.vertices()
            .map(|v| lat.index_of(v).ok_or_else(|| Error::PathOutsideLattice(v.to_vec())))
            .collect()
    }
}

/// Number of unoriented edges shared by two paths.
pub fn intersection_count(p1: &LatticePath, p2: &LatticePath) -> usize {
    if p1.dim == p2.dim && p1.start() == p2.start() && p1.is_increasing() && p2.is_increasing() {
        // Both paths sit at l1 distance t from the start after t steps, so a shared
        // edge must be traversed at the same time index.
        let n = p1.len().min(p2.len());
        return (0..n).filter(|&k| p1.vertex(k) == p2.vertex(k) && p1.vertex(k + 1) == p2.vertex(k + 1)).count();
    }
    let (small, large) = if p1.len() <= p2.len() { (p1, p2) } else { (p2, p1) };
    let keys: HashSet<_> = (0..small.len()).map(|k| small.edge_key(k)).collect();
    let mut seen = HashSet::new();
    (0..large.len())
        .map(|k| large.edge_key(k))
        .filter(|key| keys.contains(key) && seen.insert(key.clone()))
        .count()
}

/// Law of the step directions of an increasing path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathMeasure {
    /// Independent uniform directions.
    UniformIid,
    /// Repeat the previous direction with probability `persistence`, otherwise
    /// pick uniformly; `persistence = 0` is `UniformIid`.
    MarkovMixing { persistence: f64 },
}

impl PathMeasure {
    pub fn validate(&self) -> Result<()> {
        if let PathMeasure::MarkovMixing { persistence } = *self {
            if !(0.0..1.0).contains(&persistence) {
                return Err(Error::InvalidArgument(format!("persistence {persistence} must lie in [0, 1)")));
            }
        }
        Ok(())
    }

    /// Probability of direction `dir` given the previous direction.
    pub fn step_probability(&self, d: usize, prev: Option<usize>, dir: usize) -> f64 {
        match *self {
            PathMeasure::UniformIid => 1.0 / d as f64,
            PathMeasure::MarkovMixing { persistence } => {
                let base = (1.0 - persistence) / d as f64;
                match prev {
                    None => 1.0 / d as f64,
                    Some(p) if p == dir => persistence + base,
                    Some(_) => base,
                }
            }
        }
    }

    /// Probability of a whole direction sequence.
    pub fn path_probability(&self, d: usize, dirs: &[usize]) -> f64 {
        let mut prev = None;
        let mut p = 1.0;
        for &k in dirs {
            p *= self.step_probability(d, prev, k);
            prev = Some(k);
        }
        p
    }

    fn next_dir<R: Rng + ?Sized>(&self, rng: &mut R, d: usize, prev: Option<usize>) -> usize {
        match (*self, prev) {
            (PathMeasure::MarkovMixing { persistence }, Some(p)) if rng.random::<f64>() < persistence => p,
            _ => rng.random_range(0..d),
        }
    }

    /// `len` step directions in `0..d`.
    pub fn sample_dirs<R: Rng + ?Sized>(&self, rng: &mut R, d: usize, len: usize) -> Vec<usize> {
        let mut prev = None;
        (0..len)
            .map(|_| {
                let k = self.next_dir(rng, d, prev);
                prev = Some(k);
                k
            })
            .collect()
    }
}

/// Increasing path of exactly `length` steps from `start`.
pub fn sample_increasing<R: Rng + ?Sized>(
    measure: &PathMeasure,
    start: &[i64],
    length: usize,
    rng: &mut R,
) -> LatticePath {
    let mut p = LatticePath::single(start);
    for k in measure.sample_dirs(rng, start.len(), length) {
        p.push_step(k, 1);
    }
    p
}

/// Attempts before the forward/backward bridge gives up.
pub const BRIDGE_RETRY_CAP: usize = 100_000;

/// Directions of an increasing path with `counts[k]` steps along axis `k`.
///
/// The uniform measure conditioned on its endpoint is uniform over orderings of the
/// step multiset, which is sampled exactly. Other measures join a forward half of
/// `⌊s/2⌋` steps and a reversed backward half, retrying until the halves meet.
pub fn bridge_dirs<R: Rng + ?Sized>(measure: &PathMeasure, counts: &[usize], rng: &mut R) -> Result<Vec<usize>> {
    let d = counts.len();
    let s: usize = counts.iter().sum();
    match measure {
        PathMeasure::UniformIid => {
            let mut dirs: Vec<usize> = counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect();
            dirs.shuffle(rng);
            Ok(dirs)
        }
        PathMeasure::MarkovMixing { .. } => {
            let h1 = s / 2;
            let h2 = s - h1;
            'attempt: for _ in 0..BRIDGE_RETRY_CAP {
                let mut left = counts.to_vec();
                let fwd = measure.sample_dirs(rng, d, h1);
                for &k in &fwd {
                    if left[k] == 0 {
                        continue 'attempt;
                    }
                    left[k] -= 1;
                }
                let bwd = measure.sample_dirs(rng, d, h2);
                for &k in &bwd {
                    if left[k] == 0 {
                        continue 'attempt;
                    }
                    left[k] -= 1;
                }
                let mut dirs = fwd;
                dirs.extend(bwd.into_iter().rev());
                return Ok(dirs);
            }
            Err(Error::BridgeExhausted(BRIDGE_RETRY_CAP))
        }
    }
}

/// Sampler of increasing paths from `x` to `y`.
#[derive(Debug, Clone)]
pub struct BridgeSampler {
    measure: PathMeasure,
    start: Vec<i64>,
    counts: Vec<usize>,
}

impl BridgeSampler {
    pub fn new(measure: PathMeasure, x: &[i64], y: &[i64]) -> Result<Self> {
        measure.validate()?;
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::InvalidArgument("endpoints must share a positive dimension".into()));
        }
        let counts = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                usize::try_from(b - a)
                    .map_err(|_| Error::Geometry(format!("displacement from {x:?} to {y:?} is not monotone")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { measure, start: x.to_vec(), counts })
    }

    pub fn path_length(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LatticePath> {
        let mut p = LatticePath::single(&self.start);
        for k in bridge_dirs(&self.measure, &self.counts, rng)? {
            p.push_step(k, 1);
        }
        Ok(p)
    }
}

/// Sampler of simple paths from `x` to `y` in `Z^3` through the four-cone route,
/// with a bridge of the base measure inside every cone.
#[derive(Debug, Clone)]
pub struct ConeSampler {
    measure: PathMeasure,
    route: ConeDecomposition,
}

impl ConeSampler {
    /// Requires the ball `B((x+y)/2, 2|x-y|_2)` to lie in the lattice.
    pub fn new(measure: PathMeasure, lat: &Lattice, x: &[i64], y: &[i64]) -> Result<Self> {
        measure.validate()?;
        if lat.dim() != 3 {
            return Err(Error::Geometry(format!("cone routes need dimension 3, lattice has {}", lat.dim())));
        }
        let route = cone_decomposition(x, y)?;
        let center: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b) as f64).collect();
        let r = 2.0 * x.iter().zip(y).map(|(a, b)| ((a - b) as f64).powi(2)).sum::<f64>().sqrt();
        if !lat.contains_ball(&center, r) {
            return Err(Error::Geometry(format!("ball of radius {r:.3} around {center:?} leaves the lattice")));
        }
        Ok(Self { measure, route })
    }

    /// Sampler without a lattice check.
    pub fn unchecked(measure: PathMeasure, x: &[i64], y: &[i64]) -> Result<Self> {
        measure.validate()?;
        Ok(Self { measure, route: cone_decomposition(x, y)? })
    }

    pub fn route(&self) -> &ConeDecomposition {
        &self.route
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LatticePath> {
        let mut p = LatticePath::single(&self.route.from);
        for piece in &self.route.pieces {
            match piece {
                ConePiece::Steps(steps) => {
                    for u in steps {
                        let axis = (0..3).find(|&k| u[k] != 0).expect("unit step");
                        p.push_step(axis, u[axis]);
                    }
                }
                ConePiece::Cone(seg) => {
                    for l in bridge_dirs(&self.measure, &[seg.time; 3], rng)? {
                        p.push_step(seg.frame.axes[l], seg.frame.signs[l]);
                    }
                }
            }
        }
        Ok(p)
    }
}

/// Any of the path samplers, behind one interface.
#[derive(Debug, Clone)]
pub enum PathSampler {
    /// Increasing paths of a fixed length from a start point.
    Increasing { measure: PathMeasure, start: Vec<i64>, length: usize },
    Bridge(BridgeSampler),
    Cone(ConeSampler),
    /// Always the same path.
    Fixed(LatticePath),
}

impl PathSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LatticePath> {
        match self {
            PathSampler::Increasing { measure, start, length } => Ok(sample_increasing(measure, start, *length, rng)),
            PathSampler::Bridge(b) => b.sample(rng),
            PathSampler::Cone(c) => c.sample(rng),
            PathSampler::Fixed(p) => Ok(p.clone()),
        }
    }

    pub fn label(&self) -> String {
        let m = |m: &PathMeasure| match m {
            PathMeasure::UniformIid => "uniform_iid".to_string(),
            PathMeasure::MarkovMixing { persistence } => format!("markov_mixing({persistence})"),
        };
        match self {
            PathSampler::Increasing { measure, length, .. } => format!("increasing[{}; {length}]", m(measure)),
            PathSampler::Bridge(b) => format!("bridge[{}]", m(&b.measure)),
            PathSampler::Cone(c) => format!("cone[{}]", m(&c.measure)),
            PathSampler::Fixed(p) => format!("fixed[{}]", p.len()),
        }
    }
}

/// Least-squares fit of `ln P[|p1 ∩ p2| >= k] ≈ ln C - α k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c: f64,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub r_squared: f64,
    /// Fitted range of `k`.
    pub k_min: usize,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EitCurve {
    pub pairs: usize,
    /// `counts[k]` = number of pairs with at least `k` shared edges.
    pub counts: Vec<usize>,
    /// `None` when no pair shares an edge (the tail is zero: `α = ∞`).
    pub fit: Option<TailFit>,
}

/// Minimum count for a tail point to enter the fit.
pub const EIT_MIN_COUNT: usize = 25;
/// Minimum number of pairs for a tail estimate.
pub const EIT_MIN_PAIRS: usize = 10_000;

impl EitCurve {
    pub fn probability(&self, k: usize) -> f64 {
        self.counts.get(k).map_or(0.0, |&c| c as f64 / self.pairs as f64)
    }

    pub fn alpha_is_infinite(&self) -> bool {
        self.fit.is_none()
    }

    /// Rows `k, count, probability, fitted C, fitted α`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["k", "count", "probability", "fit_c", "fit_alpha"]).map_err(io)?;
        let (c, a) = self.fit.map_or(("".into(), "inf".into()), |f| (f.c.to_string(), f.alpha.to_string()));
        for (k, &n) in self.counts.iter().enumerate() {
            w.write_record([k.to_string(), n.to_string(), self.probability(k).to_string(), c.clone(), a.clone()])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Empirical tail of the shared-edge count of independent path pairs.
pub fn estimate_eit_tail<R, F>(mut sample: F, num_pairs: usize, rng: &mut R) -> Result<EitCurve>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<LatticePath>,
{
    if num_pairs < EIT_MIN_PAIRS {
        return Err(Error::InvalidArgument(format!("need at least {EIT_MIN_PAIRS} pairs, got {num_pairs}")));
    }
    let mut hist: Vec<usize> = Vec::new();
    for _ in 0..num_pairs {
        let p1 = sample(rng)?;
        let p2 = sample(rng)?;
        let k = intersection_count(&p1, &p2);
        if hist.len() <= k {
            hist.resize(k + 1, 0);
        }
        hist[k] += 1;
    }
    // Tail counts: pairs with at least k shared edges.
    let mut counts = vec![0; hist.len()];
    let mut acc = 0;
    for k in (0..hist.len()).rev() {
        acc += hist[k];
        counts[k] = acc;
    }
    let fit = fit_tail(&counts, num_pairs);
    Ok(EitCurve { pairs: num_pairs, counts, fit })
}

/// Fit over `k >= 1` while the tail count stays above `EIT_MIN_COUNT`.
pub fn fit_tail(counts: &[usize], pairs: usize) -> Option<TailFit> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|(_, &c)| c >= EIT_MIN_COUNT)
        .map(|(k, &c)| (k as f64, (c as f64 / pairs as f64).ln()))
        .collect();
    if pts.len() < 2 {
        // With a single usable point the slope is unidentified; report it through k=0.
        if counts.len() > 1 && counts[1] > 0 {
            let p1 = counts[1] as f64 / pairs as f64;
            return Some(TailFit { c: 1.0, alpha: -p1.ln(), alpha_stderr: f64::NAN, r_squared: 1.0, k_min: 0, k_max: 1 });
        }
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let alpha_stderr = if pts.len() > 2 { (ss_res / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Some(TailFit {
        c: intercept.exp(),
        alpha: -slope,
        alpha_stderr,
        r_squared,
        k_min: pts[0].0 as usize,
        k_max: pts[pts.len() - 1].0 as usize,
    })
}

/// Outcome of the empirical EIT certification of a path measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EitGate {
    pub measure: PathMeasure,
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub curves: Vec<EitCurve>,
    pub passed: bool,
}

/// Minimum `R²` of every fit in the gate.
pub const GATE_MIN_R2: f64 = 0.95;
/// Largest allowed `max α / min α` across sizes.
pub const GATE_MAX_ALPHA_RATIO: f64 = 1.3;

/// Certify exponential tails for bridged paths `0 -> (n, ..., n)` at each `n`:
/// every fit has `R² >= GATE_MIN_R2` and the fitted `α` varies by at most
/// `GATE_MAX_ALPHA_RATIO` across sizes.
pub fn eit_gate<R: Rng + ?Sized>(
    measure: PathMeasure,
    dim: usize,
    sizes: &[usize],
    num_pairs: usize,
    rng: &mut R,
) -> Result<EitGate> {
    let mut curves = Vec::new();
    for &n in sizes {
        let b = BridgeSampler::new(measure, &vec![0; dim], &vec![n as i64; dim])?;
        curves.push(estimate_eit_tail(|r| b.sample(r), num_pairs, rng)?);
    }
    let fits: Option<Vec<TailFit>> = curves.iter().map(|c| c.fit).collect();
    let passed = match fits {
        Some(f) if !f.is_empty() => {
            let lo = f.iter().map(|t| t.alpha).fold(f64::INFINITY, f64::min);
            let hi = f.iter().map(|t| t.alpha).fold(0.0, f64::max);
            f.iter().all(|t| t.r_squared >= GATE_MIN_R2) && lo > 0.0 && hi / lo <= GATE_MAX_ALPHA_RATIO
        }
        _ => false,
    };
    Ok(EitGate { measure, dim, sizes: sizes.to_vec(), curves, passed })
}
