//! Exact circle-model expectations on small graphs by periodic quadrature, and
//! transfer operators for chains and cycles.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of angle plus disorder variables integrated directly.
pub const MAX_DIRECT_VARIABLES: usize = 7;
pub const DEFAULT_RESOLUTION: usize = 32;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// `Σ_t c_t exp(i Σ_v n_{t,v} θ_v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub terms: Vec<(Complex64, Vec<i32>)>,
}

impl Observable {
    pub fn character(charges: Vec<i32>) -> Self {
        Self { terms: vec![(Complex64::new(1.0, 0.0), charges)] }
    }

    /// `e^{i(θ_a - θ_b)}` on `n` vertices.
    pub fn relative(n: usize, a: usize, b: usize) -> Self {
        let mut c = vec![0; n];
        c[a] += 1;
        c[b] -= 1;
        Self::character(c)
    }

    /// `cos(k θ_v)`.
    pub fn cos_site(n: usize, v: usize, k: i32) -> Self {
        let mut p = vec![0; n];
        let mut m = vec![0; n];
        p[v] = k;
        m[v] = -k;
        Self { terms: vec![(Complex64::new(0.5, 0.0), p), (Complex64::new(0.5, 0.0), m)] }
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for (ca, na) in &self.terms {
            for (cb, nb) in &other.terms {
                terms.push((ca * cb, na.iter().zip(nb).map(|(a, b)| a + b).collect()));
            }
        }
        Self { terms }
    }
}

/// Circle model on a small graph: weight `exp(β Σ_e J_e cos(θ_i - θ_j + ω_e))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleProblem {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub couplings: Vec<f64>,
    pub beta: f64,
    /// Vertices held at angle 0.
    pub clamped: Vec<usize>,
    pub observables: Vec<Observable>,
    pub resolution: usize,
    pub tolerance: f64,
}

impl OracleProblem {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>, beta: f64) -> Self {
        let couplings = vec![1.0; edges.len()];
        Self {
            num_vertices,
            edges,
            couplings,
            beta,
            clamped: Vec::new(),
            observables: Vec::new(),
            resolution: DEFAULT_RESOLUTION,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn observe(mut self, obs: Observable) -> Self {
        self.observables.push(obs);
        self
    }

    pub fn with_clamped(mut self, clamped: Vec<usize>) -> Self {
        self.clamped = clamped;
        self
    }

    pub fn with_resolution(mut self, q: usize) -> Self {
        self.resolution = q;
        self
    }

    /// Path graph on `n` vertices.
    pub fn chain(n: usize, beta: f64) -> Self {
        Self::new(n, (0..n.saturating_sub(1)).map(|k| (k, k + 1)).collect(), beta)
    }

    /// Fixing one angle is valid without clamped vertices: the weight is invariant
    /// under a global rotation, so charged characters vanish and neutral ones may be
    /// evaluated at `θ_0 = 0`.
    fn gauge_fixed(&self) -> bool {
        self.clamped.is_empty() && self.num_vertices > 0
    }

    fn free_vertices(&self) -> Vec<usize> {
        let fixed = self.gauge_fixed();
        (0..self.num_vertices).filter(|&v| !self.clamped.contains(&v) && !(fixed && v == 0)).collect()
    }

    pub fn angle_variables(&self) -> usize {
        self.free_vertices().len()
    }

    fn validate(&self, disorder_variables: usize) -> Result<()> {
        let q = self.resolution;
        if !q.is_power_of_two() || !(32..=512).contains(&q) {
            return Err(Error::InvalidArgument(format!("resolution {q} must be a power of two in [32, 512]")));
        }
        if self.couplings.len() != self.edges.len() {
            return Err(Error::InvalidArgument("one coupling per edge".into()));
        }
        if let Some(&(i, j)) = self.edges.iter().find(|&&(i, j)| i >= self.num_vertices || j >= self.num_vertices || i == j) {
            return Err(Error::InvalidArgument(format!("bad edge ({i}, {j})")));
        }
        if let Some(o) = self.observables.iter().flat_map(|o| &o.terms).find(|t| t.1.len() != self.num_vertices) {
            return Err(Error::InvalidArgument(format!("observable has {} charges for {} vertices", o.1.len(), self.num_vertices)));
        }
        let total = self.angle_variables() + disorder_variables;
        if total > MAX_DIRECT_VARIABLES {
            return Err(Error::OracleTooLarge(format!("{total} variables exceed {MAX_DIRECT_VARIABLES}")));
        }
        Ok(())
    }

    /// Quenched expectations at grid resolution `q`.
    fn quenched_at(&self, omega: &[f64], q: usize) -> Vec<Complex64> {
        let free = self.free_vertices();
        let n = self.num_vertices;
        // Per-edge weight tables indexed by (k_i - k_j) mod q, shifted by -βJ.
        let tables: Vec<Vec<f64>> = self
            .edges
            .iter()
            .zip(&self.couplings)
            .zip(omega)
            .map(|((_, &j), &w)| {
                (0..q).map(|d| (self.beta * j * ((TAU * d as f64 / q as f64 + w).cos() - 1.0)).exp()).collect()
            })
            .collect();
        // Edges become active once both endpoints are assigned; fixed vertices sit at index 0.
        let mut position = vec![usize::MAX; n];
        for (k, &v) in free.iter().enumerate() {
            position[v] = k;
        }
        let mut at_depth: Vec<Vec<usize>> = vec![Vec::new(); free.len() + 1];
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            let depth = match (position[i], position[j]) {
                (usize::MAX, usize::MAX) => 0,
                (a, usize::MAX) | (usize::MAX, a) => a + 1,
                (a, b) => a.max(b) + 1,
            };
            at_depth[depth].push(e);
        }
        let terms: Vec<(usize, Complex64, &Vec<i32>)> = self
            .observables
            .iter()
            .enumerate()
            .flat_map(|(o, obs)| obs.terms.iter().map(move |(c, ch)| (o, *c, ch)))
            .filter(|(_, _, ch)| !self.gauge_fixed() || ch.iter().sum::<i32>() == 0)
            .collect();
        let phase: Vec<Complex64> = (0..q).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64)).collect();

        let mut idx = vec![0usize; n];
        let mut partial = vec![1.0; free.len() + 1];
        let base: f64 = at_depth[0].iter().map(|&e| tables[e][0]).product();
        partial[0] = base;
        let mut z = 0.0;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.observables.len()];
        let depth_total = free.len();

        // Odometer over the free angles; `level` is the first digit that changed.
        let mut level = 0;
        loop {
            for d in level..depth_total {
                let mut w = partial[d];
                for &e in &at_depth[d + 1] {
                    let (i, j) = self.edges[e];
                    w *= tables[e][(idx[i] + q - idx[j]) % q];
                }
                partial[d + 1] = w;
            }
            let w = partial[depth_total];
            z += w;
            for &(o, c, ch) in &terms {
                let k = ch.iter().zip(&idx).fold(0i64, |s, (&c, &i)| s + c as i64 * i as i64).rem_euclid(q as i64);
                acc[o] += c * phase[k as usize] * w;
            }
            // Advance.
            let mut d = depth_total;
            loop {
                if d == 0 {
                    return acc.into_iter().map(|a| a / z).collect();
                }
                d -= 1;
                let v = free[d];
                idx[v] += 1;
                if idx[v] < q {
                    level = d;
                    break;
                }
                idx[v] = 0;
            }
        }
    }
}

/// Oracle value with its grid-halving error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub values: Vec<Complex64>,
    pub error: f64,
}

fn converged(fine: Vec<Complex64>, coarse: Vec<Complex64>, tol: f64) -> Result<OracleValue> {
    let error = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if !(error <= tol) {
        return Err(Error::OracleNotConverged(error));
    }
    Ok(OracleValue { values: fine, error })
}

/// Quenched expectations of every observable at fixed disorder angles `omega`.
pub fn exact_quenched(problem: &OracleProblem, omega: &[f64]) -> Result<OracleValue> {
    problem.validate(0)?;
    if omega.len() != problem.edges.len() {
        return Err(Error::InvalidArgument("one disorder angle per edge".into()));
    }
    let q = problem.resolution;
    converged(problem.quenched_at(omega, q), problem.quenched_at(omega, q / 2), problem.tolerance)
}

/// `E_u[F(ω, ⟨obs⟩_ω)]` with independent `ω_e ∝ e^{u J_e cos ω_e}`, by nested
/// quadrature over the disorder angles.
pub fn exact_disorder_average<F>(problem: &OracleProblem, u: f64, functional: F) -> Result<(Complex64, f64)>
where
    F: Fn(&[f64], &[Complex64]) -> Complex64,
{
    let m = problem.edges.len();
    problem.validate(m)?;
    if !(u >= 0.0) {
        return Err(Error::InvalidArgument(format!("u = {u} must be nonnegative")));
    }
    let at = |q: usize| {
        let grid: Vec<f64> = (0..q).map(|k| TAU * k as f64 / q as f64).collect();
        let mut omega = vec![0.0; m];
        let mut idx = vec![0usize; m];
        let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
        loop {
            for e in 0..m {
                omega[e] = grid[idx[e]];
            }
            let w: f64 = omega.iter().zip(&problem.couplings).map(|(o, j)| (u * j * (o.cos() - 1.0)).exp()).product();
            let inner = problem.quenched_at(&omega, q);
            num += functional(&omega, &inner) * w;
            den += w;
            let mut e = 0;
            loop {
                if e == m {
                    return num / den;
                }
                idx[e] += 1;
                if idx[e] < q {
                    break;
                }
                idx[e] = 0;
                e += 1;
            }
        }
    };
    let q = problem.resolution;
    let fine = at(q);
    let coarse = at(q / 2);
    let error = (fine - coarse).norm();
    if !(error <= problem.tolerance) {
        return Err(Error::OracleNotConverged(error));
    }
    Ok((fine, error))
}

/// A chain `0 - 1 - ... - L` or a cycle on `L` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainBoundary {
    Open,
    Periodic,
}

/// `⟨e^{i(θ_x - θ_y)}⟩` on a chain or cycle by transfer operators on a `q`-point grid,
/// in `O(L q²)`; the returned error is the change under grid halving.
pub fn transfer_chain(
    length: usize,
    beta: f64,
    omega: &[f64],
    boundary: ChainBoundary,
    x: usize,
    y: usize,
    q: usize,
) -> Result<(Complex64, f64)> {
    if length == 0 {
        return Err(Error::InvalidArgument("chains need at least one edge".into()));
    }
    if omega.len() != length {
        return Err(Error::InvalidArgument(format!("{length} edges need {length} disorder angles")));
    }
    let vertices = match boundary {
        ChainBoundary::Open => length + 1,
        ChainBoundary::Periodic => length,
    };
    if boundary == ChainBoundary::Periodic && length < 3 {
        return Err(Error::InvalidArgument("cycles need at least three edges".into()));
    }
    if x >= vertices || y >= vertices {
        return Err(Error::InvalidArgument(format!("vertices {x}, {y} outside 0..{vertices}")));
    }
    if !q.is_power_of_two() || !(32..=16384).contains(&q) {
        return Err(Error::InvalidArgument(format!("resolution {q} must be a power of two >= 32")));
    }
    let run = |q: usize| {
        let table = |w: f64| -> Vec<f64> {
            (0..q).map(|d| (beta * ((TAU * d as f64 / q as f64 + w).cos() - 1.0)).exp()).collect()
        };
        let phase: Vec<Complex64> = (0..q).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64)).collect();
        // Vertex 0 is fixed at angle 0; `v[b]` carries the weight of θ_current = b.
        let mut with = vec![Complex64::new(0.0, 0.0); q];
        let mut without = vec![0.0; q];
        with[0] = Complex64::new(1.0, 0.0);
        without[0] = 1.0;
        let insert = |vec: &mut Vec<Complex64>, v: usize| {
            if v == x {
                for (k, c) in vec.iter_mut().enumerate() {
                    *c *= phase[k];
                }
            }
            if v == y {
                for (k, c) in vec.iter_mut().enumerate() {
                    *c *= phase[k].conj();
                }
            }
        };
        insert(&mut with, 0);
        let steps = vertices - 1;
        for e in 0..steps {
            let t = table(omega[e]);
            let mut nw = vec![Complex64::new(0.0, 0.0); q];
            let mut nz = vec![0.0; q];
            for a in 0..q {
                if without[a] == 0.0 && with[a] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..q {
                    let w = t[(a + q - b) % q];
                    nw[b] += with[a] * w;
                    nz[b] += without[a] * w;
                }
            }
            // Rescale to avoid underflow on long chains.
            let s = nz.iter().cloned().fold(0.0, f64::max);
            with = nw.into_iter().map(|c| c / s).collect();
            without = nz.into_iter().map(|c| c / s).collect();
            insert(&mut with, e + 1);
        }
        if boundary == ChainBoundary::Periodic {
            // Close the last edge back onto vertex 0 at angle index 0.
            let t = table(omega[length - 1]);
            let num: Complex64 = (0..q).map(|a| with[a] * t[a]).sum();
            let den: f64 = (0..q).map(|a| without[a] * t[a]).sum();
            num / den
        } else {
            with.iter().sum::<Complex64>() / without.iter().sum::<f64>()
        }
    };
    let fine = run(q);
    let error = (fine - run(q / 2)).norm();
    Ok((fine, error))
}

/// `cos θ + cos(θ' - ω)` written as `2 cos(φ - ω/2) cos(φ' - ω/2)` with
/// `φ = (θ + θ')/2`, `φ' = (θ' - θ)/2`. Returns both sides.
pub fn duplicate_variable_sides(theta: f64, theta_dup: f64, omega: f64) -> (f64, f64) {
    let lhs = theta.cos() + (theta_dup - omega).cos();
    let phi = 0.5 * (theta + theta_dup);
    let phi_dup = 0.5 * (theta_dup - theta);
    let rhs = 2.0 * (phi - 0.5 * omega).cos() * (phi_dup - 0.5 * omega).cos();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::lambda_xy;

    #[test]
    fn single_free_spin_averages_to_zero() {
        let p = OracleProblem::new(1, vec![], 1.0).observe(Observable::cos_site(1, 0, 1));
        let v = exact_quenched(&p, &[]).unwrap();
        assert!(v.values[0].norm() < 1e-15);
    }

    #[test]
    fn one_edge_gives_lambda() {
        let p = OracleProblem::chain(2, 1.0).observe(Observable::relative(2, 0, 1));
        let v = exact_quenched(&p, &[0.0]).unwrap();
        assert!((v.values[0].re - lambda_xy(1.0).unwrap().lambda).abs() < 1e-9);
        assert!(v.values[0].im.abs() < 1e-14);
    }

    #[test]
    fn two_edge_chain_factorizes() {
        let p = OracleProblem::chain(3, 1.0).observe(Observable::relative(3, 0, 2));
        let v = exact_quenched(&p, &[0.0, 0.0]).unwrap();
        assert!((v.values[0].re - lambda_xy(1.0).unwrap().lambda.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn clamped_vertices_break_the_symmetry() {
        let p = OracleProblem::chain(2, 2.0).with_clamped(vec![0]).observe(Observable::cos_site(2, 1, 1));
        let v = exact_quenched(&p, &[0.0]).unwrap();
        assert!((v.values[0].re - lambda_xy(2.0).unwrap().lambda).abs() < 1e-9);
    }

    #[test]
    fn size_limits() {
        let p = OracleProblem::chain(9, 1.0);
        assert!(matches!(exact_quenched(&p, &[0.0; 8]), Err(Error::OracleTooLarge(_))));
        let p = OracleProblem::chain(2, 1.0).with_resolution(48);
        assert!(exact_quenched(&p, &[0.0]).is_err());
    }

    #[test]
    fn transfer_matches_direct_route() {
        let l = lambda_xy(0.5).unwrap().lambda;
        for len in [1, 5, 40] {
            let (v, err) = transfer_chain(len, 0.5, &vec![0.0; len], ChainBoundary::Open, 0, len, 32).unwrap();
            assert!((v.re - l.powi(len as i32)).abs() < 1e-12, "{len}");
            assert!(err < 1e-12);
        }
        let omega = [0.3, -1.2, 2.0, 0.7];
        let (v, _) = transfer_chain(4, 0.5, &omega, ChainBoundary::Open, 0, 4, 64).unwrap();
        assert!((v.norm() - l.powi(4)).abs() < 1e-12);
        let p = OracleProblem::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], 0.8).observe(Observable::relative(4, 0, 2));
        let direct = exact_quenched(&p, &omega).unwrap().values[0];
        let (t, _) = transfer_chain(4, 0.8, &omega, ChainBoundary::Periodic, 0, 2, 32).unwrap();
        assert!((direct - t).norm() < 1e-10);
    }

    #[test]
    fn duplicate_identity() {
        let (l, r) = duplicate_variable_sides(0.4, -2.1, 1.3);
        assert!((l - r).abs() < 1e-14);
    }
}
