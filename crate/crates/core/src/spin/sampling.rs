//! Exact samplers for the uniform and tilted laws on the spin spaces.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::so3::{rot_y, rot_z, rotation_from_quaternion};
use super::su2::Su2;

/// `e^{i delta}` with `delta` von Mises distributed around 0 with concentration `kappa >= 0`.
///
/// Best-Fisher rejection from a wrapped Cauchy envelope.
pub fn von_mises_phase<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> Complex64 {
    if kappa < 1e-12 {
        return Complex64::from_polar(1.0, rng.random::<f64>() * TAU);
    }
    let s = (1.0 + 4.0 * kappa * kappa).sqrt();
    let tau = 1.0 + s;
    let sq = (2.0 * tau).sqrt();
    // rho = (tau - sqrt(2 tau)) / (2 kappa), rearranged to avoid cancellation.
    let rho = 2.0 * kappa * tau / ((s + 1.0) * (tau + sq));
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let f = f.clamp(-1.0, 1.0);
            let sin = (1.0 - f * f).sqrt();
            let sin = if rng.random::<bool>() { sin } else { -sin };
            return Complex64::new(f, sin);
        }
    }
}

/// Von Mises angle in `(-π, π]` around 0; negative `kappa` centers the law at `π`.
pub fn von_mises_angle<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> f64 {
    let p = von_mises_phase(rng, kappa.abs());
    let p = if kappa < 0.0 { -p } else { p };
    p.arg()
}

pub fn uniform_s2<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

pub fn uniform_s3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

pub fn haar_su2<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
    Su2::from_array(uniform_s3(rng))
}

/// Chi-square with three degrees of freedom.
fn chi2_3<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (0..3).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum()
}

/// Unit quaternion with scalar part `a` and uniformly oriented vector part.
fn with_scalar<R: Rng + ?Sized>(rng: &mut R, a: f64) -> [f64; 4] {
    let r = (1.0 - a * a).max(0.0).sqrt();
    let v = uniform_s2(rng) * r;
    [a, v.x, v.y, v.z]
}

/// SU(2) element with law `∝ exp(u Re Tr Ω) dHaar`, `u >= 0`.
///
/// The first coordinate has density `∝ sqrt(1-a²) e^{2ua}`. For `u < 1` it is drawn by
/// rejection from the Haar marginal; otherwise `t = 1 - a` is proposed from
/// `Gamma(3/2, rate 2u)` and accepted with probability `sqrt((2-t)/2)`.
pub fn tilted_su2<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Su2 {
    if u < 1.0 {
        loop {
            let q = haar_su2(rng);
            if rng.random::<f64>() < (2.0 * u * (q.a - 1.0)).exp() {
                return q;
            }
        }
    }
    loop {
        let t = chi2_3(rng) / (4.0 * u);
        if t > 2.0 {
            continue;
        }
        if rng.random::<f64>() < ((2.0 - t) / 2.0).sqrt() {
            return Su2::from_array(with_scalar(rng, 1.0 - t));
        }
    }
}

pub fn haar_so3<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let q = uniform_s3(rng);
    rotation_from_quaternion(q[0], q[1], q[2], q[3])
}

/// SO(3) element with law `∝ exp(u Tr Ω) dHaar`, `u >= 0`.
///
/// Through the double cover `Tr Ω = 4w² - 1` for the quaternion scalar `w`, whose
/// modulus has density `∝ sqrt(1-w²) e^{4uw²}` on `[0, 1]`. Small `u` uses
/// rejection from Haar; otherwise `t = 1 - |w|` is proposed from `Gamma(3/2, rate 4u)`
/// and accepted with probability `sqrt((2-t)/2) e^{-4ut(1-t)}`.
pub fn tilted_so3<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Matrix3<f64> {
    if u < 0.5 {
        loop {
            let q = uniform_s3(rng);
            if rng.random::<f64>() < (4.0 * u * (q[0] * q[0] - 1.0)).exp() {
                return rotation_from_quaternion(q[0], q[1], q[2], q[3]);
            }
        }
    }
    loop {
        let t = chi2_3(rng) / (8.0 * u);
        if t > 1.0 {
            continue;
        }
        let accept = ((2.0 - t) / 2.0).sqrt() * (-4.0 * u * t * (1.0 - t)).exp();
        if rng.random::<f64>() < accept {
            let q = with_scalar(rng, 1.0 - t);
            return rotation_from_quaternion(q[0], q[1], q[2], q[3]);
        }
    }
}

/// `cos` of the polar angle for the density `∝ e^{kappa z}` on `[-1, 1]`.
pub fn tilted_cosine<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    if kappa.abs() < 1e-10 {
        return 2.0 * u - 1.0;
    }
    if kappa > 0.0 {
        (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0)
    } else {
        -tilted_cosine(rng, -kappa)
    }
}

/// Von Mises-Fisher on `S^2`: density `∝ exp(kappa <mean, s>)`, `mean` a unit vector.
pub fn vmf_s2<R: Rng + ?Sized>(rng: &mut R, kappa: f64, mean: Vector3<f64>) -> Vector3<f64> {
    let z = tilted_cosine(rng, kappa);
    let phi = rng.random::<f64>() * TAU;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let local = Vector3::new(r * phi.cos(), r * phi.sin(), z);
    // Rotate e_z onto `mean`.
    let cos_t = mean.z.clamp(-1.0, 1.0);
    let az = mean.y.atan2(mean.x);
    rot_z(az) * rot_y(cos_t.acos()) * local
}

/// SO(3) element with law `∝ exp(beta <e_z, Ω e_z>) dHaar`.
///
/// Writes `Ω = R_z(φ) R_y(ϑ) R_z(ψ)`: Haar has `φ, ψ` uniform and `cos ϑ = Ω_zz`
/// uniform, so the tilt only reweights `cos ϑ`.
pub fn tilted_axis_so3<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> Matrix3<f64> {
    let z = tilted_cosine(rng, beta);
    let phi = rng.random::<f64>() * TAU;
    let psi = rng.random::<f64>() * TAU;
    rot_z(phi) * rot_y(z.acos()) * rot_z(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    // Reference moments by brute-force midpoint sums over the 1-d marginal densities.
    fn midpoint_mean(f: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            let x = lo + (k as f64 + 0.5) * h;
            num += f(x) * w(x);
            den += w(x);
        }
        num / den
    }

    #[test]
    fn von_mises_first_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &kappa in &[0.3, 2.0, 4.0, 40.0] {
            let xs: Vec<f64> = (0..200_000).map(|_| von_mises_phase(&mut rng, kappa).re).collect();
            let (m, se) = mean_sd(&xs);
            let exact = midpoint_mean(f64::cos, |t| (kappa * (t.cos() - 1.0)).exp(), -PI, PI);
            assert!((m - exact).abs() < 4.0 * se, "kappa {kappa}: {m} vs {exact}");
        }
    }

    #[test]
    fn su2_tilted_scalar_moment_both_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &u in &[0.0, 0.5, 1.0, 3.0, 50.0] {
            let xs: Vec<f64> = (0..100_000).map(|_| tilted_su2(&mut rng, u).a).collect();
            let (m, se) = mean_sd(&xs);
            let exact = midpoint_mean(|a| a, |a| (1.0 - a * a).sqrt() * (2.0 * u * (a - 1.0)).exp(), -1.0, 1.0);
            assert!((m - exact).abs() < 4.0 * se + 1e-6, "u {u}: {m} vs {exact}");
        }
    }

    #[test]
    fn so3_tilted_trace_moment_both_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &u in &[0.0, 0.3, 0.5, 2.0, 20.0] {
            let xs: Vec<f64> = (0..100_000).map(|_| tilted_so3(&mut rng, u).trace()).collect();
            let (m, se) = mean_sd(&xs);
            // Angle law (1 - cos α) e^{u(1 + 2 cos α)} on [0, π].
            let exact = midpoint_mean(
                |al| 1.0 + 2.0 * al.cos(),
                |al| (1.0 - al.cos()) * (2.0 * u * (al.cos() - 1.0)).exp(),
                0.0,
                PI,
            );
            assert!((m - exact).abs() < 4.0 * se + 1e-6, "u {u}: {m} vs {exact}");
        }
    }

    #[test]
    fn tilted_axis_concentrates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<f64> = (0..50_000).map(|_| tilted_axis_so3(&mut rng, 50.0)[(2, 2)]).collect();
        let (m, _) = mean_sd(&xs);
        let langevin = 1.0 / 50f64.tanh() - 1.0 / 50.0;
        assert!((m - langevin).abs() < 0.01);
        assert!((m - 1.0).abs() < 0.1);
    }

    #[test]
    fn vmf_mean_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mean = Vector3::new(1.0, -2.0, 0.5).normalize();
        let n = 50_000;
        let s: Vector3<f64> = (0..n).map(|_| vmf_s2(&mut rng, 3.0, mean)).sum::<Vector3<f64>>() / n as f64;
        let langevin = 1.0 / 3f64.tanh() - 1.0 / 3.0;
        assert!((s - mean * langevin).norm() < 0.01);
    }
}
