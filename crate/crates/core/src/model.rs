//! The model families: spin type, disorder type, interaction and gauge action.
//!
//! Every interaction `I(s_i, Ω_ij, s_j)` is linear in `s_i`, so the sum of the
//! terms touching a vertex is captured by a local field `F` with
//! `Σ I(s, Ω, s_j) = <s, F>`. Metropolis and heat-bath updates both work off it.

use std::f64::consts::PI;
use std::fmt::Debug;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::sampling;
use crate::spin::so3::{self, rotation_about};
use crate::spin::{SpinSpace, Su2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Xy,
    Su2,
    So3,
    Heisenberg,
    Isoclinic,
    HeisenbergLift,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Xy,
        ModelKind::Su2,
        ModelKind::So3,
        ModelKind::Heisenberg,
        ModelKind::Isoclinic,
        ModelKind::HeisenbergLift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Xy => "xy",
            ModelKind::Su2 => "su2",
            ModelKind::So3 => "so3",
            ModelKind::Heisenberg => "heisenberg",
            ModelKind::Isoclinic => "isoclinic",
            ModelKind::HeisenbergLift => "heisenberg_lift",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown model `{s}`")))
    }

    pub fn spin_space(self) -> SpinSpace {
        match self {
            ModelKind::Xy => SpinSpace::Circle,
            ModelKind::Su2 => SpinSpace::GroupSu2,
            ModelKind::So3 | ModelKind::HeisenbergLift => SpinSpace::GroupSo3,
            ModelKind::Heisenberg => SpinSpace::Sphere2,
            ModelKind::Isoclinic => SpinSpace::Sphere3Isoclinic,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Calls `$body` with `$m` bound to the model type selected by `$kind`.
#[macro_export]
macro_rules! with_model {
    ($kind:expr, $m:ident => $body:expr) => {
        match $kind {
            $crate::model::ModelKind::Xy => {
                type $m = $crate::model::Xy;
                $body
            }
            $crate::model::ModelKind::Su2 => {
                type $m = $crate::model::Su2Model;
                $body
            }
            $crate::model::ModelKind::So3 => {
                type $m = $crate::model::So3Model;
                $body
            }
            $crate::model::ModelKind::Heisenberg => {
                type $m = $crate::model::Heisenberg;
                $body
            }
            $crate::model::ModelKind::Isoclinic => {
                type $m = $crate::model::Isoclinic;
                $body
            }
            $crate::model::ModelKind::HeisenbergLift => {
                type $m = $crate::model::HeisenbergLift;
                $body
            }
        }
    };
}

pub trait Model: Send + Sync + 'static {
    type Spin: Copy + Send + Sync + Debug + PartialEq;
    type Link: Copy + Send + Sync + Debug + PartialEq;
    type Gauge: Copy + Send + Sync + Debug;
    type Field: Copy + Send + Sync + Debug;

    const KIND: ModelKind;
    const HEAT_BATH: bool;
    /// Largest meaningful Metropolis step.
    const MAX_WIDTH: f64 = PI;
    /// Side of the square matrix representing a disorder value.
    const MATRIX_DIM: usize;

    /// Value held by Dirichlet vertices.
    fn clamp_value() -> Self::Spin;
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> Self::Spin;
    fn renormalize(s: Self::Spin) -> Self::Spin;

    /// One draw from the disorder law at concentration `u`.
    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Self::Link;
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Self::Link;
    fn link_identity() -> Self::Link;
    /// Value read on the reverse orientation.
    fn link_reverse(l: Self::Link) -> Self::Link;
    fn link_mul(a: Self::Link, b: Self::Link) -> Self::Link;
    fn link_matrix(l: Self::Link) -> DMatrix<Complex64>;
    fn link_to_flat(l: Self::Link) -> Vec<f64>;
    fn link_from_flat(v: &[f64]) -> Result<Self::Link>;

    /// Edge term for the oriented edge `i -> j`; symmetric under reversing the edge.
    fn interaction(si: Self::Spin, l: Self::Link, sj: Self::Spin) -> f64;
    /// `cos(θx - θy)`, `Re Tr(U_x* U_y)` or `<S_x, S_y>`.
    fn two_point(sx: Self::Spin, sy: Self::Spin) -> f64;
    fn magnetization(s: Self::Spin) -> f64 {
        Self::two_point(Self::clamp_value(), s)
    }
    fn spin_to_flat(s: Self::Spin) -> Vec<f64>;

    fn zero_field() -> Self::Field;
    /// `F += w * ∇_s I(s, l, sj)`.
    fn add_to_field(f: &mut Self::Field, w: f64, l: Self::Link, sj: Self::Spin);
    fn field_value(f: &Self::Field, s: Self::Spin) -> f64;
    /// Exact draw from `∝ exp(<s, F>)`; only called when `HEAT_BATH` holds.
    fn heat_bath<R: Rng + ?Sized>(_rng: &mut R, _f: &Self::Field) -> Self::Spin {
        unreachable!("{} has no heat-bath update", Self::KIND)
    }
    /// Symmetric random-walk proposal of step size `width`.
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: Self::Spin, width: f64) -> Self::Spin;

    /// Site term `h Re(z e^{iψ})` of the random field; zero outside the circle model.
    fn field_term(_s: Self::Spin, _h: f64, _phase: Complex64) -> f64 {
        0.0
    }
    fn add_field_term(_f: &mut Self::Field, _h: f64, _phase: Complex64) {}

    fn gauge_identity() -> Self::Gauge;
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Self::Gauge;
    fn gauge_inverse(g: Self::Gauge) -> Self::Gauge;
    fn gauge_spin(g: Self::Gauge, s: Self::Spin) -> Self::Spin;
    fn gauge_link(gi: Self::Gauge, l: Self::Link, gj: Self::Gauge) -> Self::Link;
    fn gauge_phase(_g: Self::Gauge, p: Complex64) -> Complex64 {
        p
    }

    /// Planted disorder `U_i N U_j*` (and its circle analogue) for a hidden configuration.
    fn planted_link(_si: Self::Spin, _n: Self::Link, _sj: Self::Spin) -> Option<Self::Link> {
        None
    }
    /// The relative orientation that the path product of planted links tracks.
    fn planted_relative(_sx: Self::Spin, _sy: Self::Spin) -> Option<DMatrix<Complex64>> {
        None
    }
}

fn uniform_step<R: Rng + ?Sized>(rng: &mut R, width: f64) -> f64 {
    width * (2.0 * rng.random::<f64>() - 1.0)
}

/// Random unit quaternion at geodesic angle at most `width` from the identity;
/// its law is invariant under inversion.
fn small_su2<R: Rng + ?Sized>(rng: &mut R, width: f64) -> Su2 {
    let r = uniform_step(rng, width) / 2.0;
    let n = sampling::uniform_s2(rng);
    let s = r.sin();
    Su2::new(r.cos(), s * n.x, s * n.y, s * n.z)
}

fn small_rotation<R: Rng + ?Sized>(rng: &mut R, width: f64) -> Matrix3<f64> {
    rotation_about(sampling::uniform_s2(rng), uniform_step(rng, width))
}

fn real_matrix(m: &Matrix3<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(3, 3, |r, c| Complex64::new(m[(r, c)], 0.0))
}

fn su2_matrix(q: Su2) -> DMatrix<Complex64> {
    let m = q.to_matrix();
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

fn flat_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Parse(format!("expected {n} reals, found {}", v.len())));
    }
    Ok(())
}

fn renormalize_vec3(v: Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        v / n
    } else {
        v
    }
}

fn renormalize_unit(z: Complex64) -> Complex64 {
    let n = z.norm();
    if (n - 1.0).abs() > 1e-9 {
        z / n
    } else {
        z
    }
}

const E_Z: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Circle spins `z = e^{iθ}` with disorder `w = e^{iω}`; `I = cos(θ_i - θ_j + ω_ij)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Xy;

impl Model for Xy {
    type Spin = Complex64;
    type Link = Complex64;
    type Gauge = Complex64;
    type Field = Complex64;

    const KIND: ModelKind = ModelKind::Xy;
    const HEAT_BATH: bool = true;
    const MATRIX_DIM: usize = 1;

    fn clamp_value() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
    }
    fn renormalize(s: Complex64) -> Complex64 {
        renormalize_unit(s)
    }

    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Complex64 {
        sampling::von_mises_phase(rng, u)
    }
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        Self::random_spin(rng)
    }
    fn link_identity() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn link_reverse(l: Complex64) -> Complex64 {
        l.conj()
    }
    fn link_mul(a: Complex64, b: Complex64) -> Complex64 {
        a * b
    }
    fn link_matrix(l: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, l)
    }
    fn link_to_flat(l: Complex64) -> Vec<f64> {
        vec![l.arg()]
    }
    fn link_from_flat(v: &[f64]) -> Result<Complex64> {
        flat_len(v, 1)?;
        Ok(Complex64::from_polar(1.0, v[0]))
    }

    fn interaction(si: Complex64, l: Complex64, sj: Complex64) -> f64 {
        (si * sj.conj() * l).re
    }
    fn two_point(sx: Complex64, sy: Complex64) -> f64 {
        (sx * sy.conj()).re
    }
    fn spin_to_flat(s: Complex64) -> Vec<f64> {
        vec![s.arg().rem_euclid(2.0 * PI)]
    }

    fn zero_field() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn add_to_field(f: &mut Complex64, w: f64, l: Complex64, sj: Complex64) {
        *f += w * sj.conj() * l;
    }
    fn field_value(f: &Complex64, s: Complex64) -> f64 {
        (s * f).re
    }
    fn heat_bath<R: Rng + ?Sized>(rng: &mut R, f: &Complex64) -> Complex64 {
        let k = f.norm();
        if k < 1e-300 {
            return Self::random_spin(rng);
        }
        // Re(z F) = k cos(θ + arg F), so θ + arg F is von Mises around 0.
        (f.conj() / k) * sampling::von_mises_phase(rng, k)
    }
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: Complex64, width: f64) -> Complex64 {
        s * Complex64::from_polar(1.0, uniform_step(rng, width))
    }

    fn field_term(s: Complex64, h: f64, phase: Complex64) -> f64 {
        h * (s * phase).re
    }
    fn add_field_term(f: &mut Complex64, h: f64, phase: Complex64) {
        *f += h * phase;
    }

    fn gauge_identity() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        Self::random_spin(rng)
    }
    fn gauge_inverse(g: Complex64) -> Complex64 {
        g.conj()
    }
    /// `θ -> θ - φ`.
    fn gauge_spin(g: Complex64, s: Complex64) -> Complex64 {
        s * g.conj()
    }
    /// `ω_ij -> ω_ij + φ_i - φ_j`.
    fn gauge_link(gi: Complex64, l: Complex64, gj: Complex64) -> Complex64 {
        l * gi * gj.conj()
    }
    /// `ψ -> ψ + φ`.
    fn gauge_phase(g: Complex64, p: Complex64) -> Complex64 {
        p * g
    }

    fn planted_link(si: Complex64, n: Complex64, sj: Complex64) -> Option<Complex64> {
        Some(n * si.conj() * sj)
    }
    fn planted_relative(sx: Complex64, sy: Complex64) -> Option<DMatrix<Complex64>> {
        Some(DMatrix::from_element(1, 1, sx.conj() * sy))
    }
}

/// SU(2) spins and disorder; `I = Re Tr(U_i* Ω_ij U_j)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Su2Model;

impl Model for Su2Model {
    type Spin = Su2;
    type Link = Su2;
    type Gauge = Su2;
    type Field = Su2;

    const KIND: ModelKind = ModelKind::Su2;
    const HEAT_BATH: bool = true;
    const MATRIX_DIM: usize = 2;

    fn clamp_value() -> Su2 {
        Su2::IDENTITY
    }
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
        sampling::haar_su2(rng)
    }
    fn renormalize(s: Su2) -> Su2 {
        s.renormalized()
    }

    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Su2 {
        sampling::tilted_su2(rng, u)
    }
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
        sampling::haar_su2(rng)
    }
    fn link_identity() -> Su2 {
        Su2::IDENTITY
    }
    fn link_reverse(l: Su2) -> Su2 {
        l.adjoint()
    }
    fn link_mul(a: Su2, b: Su2) -> Su2 {
        a.mul(b)
    }
    fn link_matrix(l: Su2) -> DMatrix<Complex64> {
        su2_matrix(l)
    }
    fn link_to_flat(l: Su2) -> Vec<f64> {
        l.to_array().to_vec()
    }
    fn link_from_flat(v: &[f64]) -> Result<Su2> {
        flat_len(v, 4)?;
        Ok(Su2::new(v[0], v[1], v[2], v[3]))
    }

    fn interaction(si: Su2, l: Su2, sj: Su2) -> f64 {
        2.0 * si.dot(l.mul(sj))
    }
    fn two_point(sx: Su2, sy: Su2) -> f64 {
        2.0 * sx.dot(sy)
    }
    fn spin_to_flat(s: Su2) -> Vec<f64> {
        s.to_array().to_vec()
    }

    fn zero_field() -> Su2 {
        Su2::new(0.0, 0.0, 0.0, 0.0)
    }
    fn add_to_field(f: &mut Su2, w: f64, l: Su2, sj: Su2) {
        *f = f.add(l.mul(sj).scale(2.0 * w));
    }
    fn field_value(f: &Su2, s: Su2) -> f64 {
        s.dot(*f)
    }
    fn heat_bath<R: Rng + ?Sized>(rng: &mut R, f: &Su2) -> Su2 {
        quaternion_heat_bath(rng, *f)
    }
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: Su2, width: f64) -> Su2 {
        small_su2(rng, width).mul(s)
    }

    fn gauge_identity() -> Su2 {
        Su2::IDENTITY
    }
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
        sampling::haar_su2(rng)
    }
    fn gauge_inverse(g: Su2) -> Su2 {
        g.adjoint()
    }
    /// `U -> S* U`.
    fn gauge_spin(g: Su2, s: Su2) -> Su2 {
        g.adjoint().mul(s)
    }
    /// `Ω_ij -> S_i* Ω_ij S_j`.
    fn gauge_link(gi: Su2, l: Su2, gj: Su2) -> Su2 {
        gi.adjoint().mul(l).mul(gj)
    }

    fn planted_link(si: Su2, n: Su2, sj: Su2) -> Option<Su2> {
        Some(si.mul(n).mul(sj.adjoint()))
    }
    fn planted_relative(sx: Su2, sy: Su2) -> Option<DMatrix<Complex64>> {
        Some(su2_matrix(sx.mul(sy.adjoint())))
    }
}

/// Draw `q ∈ S^3` with density `∝ exp(<q, F>)`.
///
/// Left multiplication by `F/|F|` is an isometry of `S^3` taking `1` to `F/|F|`,
/// so `q = (F/|F|) X` with `X` tilted towards `1` with weight `e^{|F| a}`.
fn quaternion_heat_bath<R: Rng + ?Sized>(rng: &mut R, f: Su2) -> Su2 {
    let k = f.norm_sqr().sqrt();
    if k < 1e-300 {
        return sampling::haar_su2(rng);
    }
    f.scale(1.0 / k).mul(sampling::tilted_su2(rng, k / 2.0))
}

/// SO(3) spins and disorder; `I = Tr(U_i^T Ω_ij U_j)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct So3Model;

impl Model for So3Model {
    type Spin = Matrix3<f64>;
    type Link = Matrix3<f64>;
    type Gauge = Matrix3<f64>;
    type Field = Matrix3<f64>;

    const KIND: ModelKind = ModelKind::So3;
    const HEAT_BATH: bool = false;
    const MATRIX_DIM: usize = 3;

    fn clamp_value() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn renormalize(s: Matrix3<f64>) -> Matrix3<f64> {
        so3::renormalize(s)
    }

    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Matrix3<f64> {
        sampling::tilted_so3(rng, u)
    }
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn link_identity() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn link_reverse(l: Matrix3<f64>) -> Matrix3<f64> {
        l.transpose()
    }
    fn link_mul(a: Matrix3<f64>, b: Matrix3<f64>) -> Matrix3<f64> {
        a * b
    }
    fn link_matrix(l: Matrix3<f64>) -> DMatrix<Complex64> {
        real_matrix(&l)
    }
    fn link_to_flat(l: Matrix3<f64>) -> Vec<f64> {
        l.iter().copied().collect()
    }
    fn link_from_flat(v: &[f64]) -> Result<Matrix3<f64>> {
        flat_len(v, 9)?;
        Ok(Matrix3::from_column_slice(v))
    }

    fn interaction(si: Matrix3<f64>, l: Matrix3<f64>, sj: Matrix3<f64>) -> f64 {
        si.dot(&(l * sj))
    }
    fn two_point(sx: Matrix3<f64>, sy: Matrix3<f64>) -> f64 {
        sx.dot(&sy)
    }
    fn spin_to_flat(s: Matrix3<f64>) -> Vec<f64> {
        s.iter().copied().collect()
    }

    fn zero_field() -> Matrix3<f64> {
        Matrix3::zeros()
    }
    fn add_to_field(f: &mut Matrix3<f64>, w: f64, l: Matrix3<f64>, sj: Matrix3<f64>) {
        *f += (l * sj) * w;
    }
    fn field_value(f: &Matrix3<f64>, s: Matrix3<f64>) -> f64 {
        s.dot(f)
    }
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: Matrix3<f64>, width: f64) -> Matrix3<f64> {
        small_rotation(rng, width) * s
    }

    fn gauge_identity() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn gauge_inverse(g: Matrix3<f64>) -> Matrix3<f64> {
        g.transpose()
    }
    fn gauge_spin(g: Matrix3<f64>, s: Matrix3<f64>) -> Matrix3<f64> {
        g.transpose() * s
    }
    fn gauge_link(gi: Matrix3<f64>, l: Matrix3<f64>, gj: Matrix3<f64>) -> Matrix3<f64> {
        gi.transpose() * l * gj
    }

    fn planted_link(si: Matrix3<f64>, n: Matrix3<f64>, sj: Matrix3<f64>) -> Option<Matrix3<f64>> {
        Some(si * n * sj.transpose())
    }
    fn planted_relative(sx: Matrix3<f64>, sy: Matrix3<f64>) -> Option<DMatrix<Complex64>> {
        Some(real_matrix(&(sx * sy.transpose())))
    }
}

/// `S^2` spins with SO(3) disorder tilted by `<e_z, Ω e_z>`; `I = <S_i, Ω_ij S_j>`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Heisenberg;

impl Model for Heisenberg {
    type Spin = Vector3<f64>;
    type Link = Matrix3<f64>;
    type Gauge = Matrix3<f64>;
    type Field = Vector3<f64>;

    const KIND: ModelKind = ModelKind::Heisenberg;
    const HEAT_BATH: bool = true;
    const MATRIX_DIM: usize = 3;

    fn clamp_value() -> Vector3<f64> {
        E_Z
    }
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
        sampling::uniform_s2(rng)
    }
    fn renormalize(s: Vector3<f64>) -> Vector3<f64> {
        renormalize_vec3(s)
    }

    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Matrix3<f64> {
        sampling::tilted_axis_so3(rng, u)
    }
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn link_identity() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn link_reverse(l: Matrix3<f64>) -> Matrix3<f64> {
        l.transpose()
    }
    fn link_mul(a: Matrix3<f64>, b: Matrix3<f64>) -> Matrix3<f64> {
        a * b
    }
    fn link_matrix(l: Matrix3<f64>) -> DMatrix<Complex64> {
        real_matrix(&l)
    }
    fn link_to_flat(l: Matrix3<f64>) -> Vec<f64> {
        l.iter().copied().collect()
    }
    fn link_from_flat(v: &[f64]) -> Result<Matrix3<f64>> {
        flat_len(v, 9)?;
        Ok(Matrix3::from_column_slice(v))
    }

    fn interaction(si: Vector3<f64>, l: Matrix3<f64>, sj: Vector3<f64>) -> f64 {
        si.dot(&(l * sj))
    }
    fn two_point(sx: Vector3<f64>, sy: Vector3<f64>) -> f64 {
        sx.dot(&sy)
    }
    fn spin_to_flat(s: Vector3<f64>) -> Vec<f64> {
        s.iter().copied().collect()
    }

    fn zero_field() -> Vector3<f64> {
        Vector3::zeros()
    }
    fn add_to_field(f: &mut Vector3<f64>, w: f64, l: Matrix3<f64>, sj: Vector3<f64>) {
        *f += (l * sj) * w;
    }
    fn field_value(f: &Vector3<f64>, s: Vector3<f64>) -> f64 {
        s.dot(f)
    }
    fn heat_bath<R: Rng + ?Sized>(rng: &mut R, f: &Vector3<f64>) -> Vector3<f64> {
        let k = f.norm();
        if k < 1e-300 {
            return sampling::uniform_s2(rng);
        }
        sampling::vmf_s2(rng, k, f / k)
    }
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: Vector3<f64>, width: f64) -> Vector3<f64> {
        small_rotation(rng, width) * s
    }

    fn gauge_identity() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn gauge_inverse(g: Matrix3<f64>) -> Matrix3<f64> {
        g.transpose()
    }
    fn gauge_spin(g: Matrix3<f64>, s: Vector3<f64>) -> Vector3<f64> {
        g.transpose() * s
    }
    fn gauge_link(gi: Matrix3<f64>, l: Matrix3<f64>, gj: Matrix3<f64>) -> Matrix3<f64> {
        gi.transpose() * l * gj
    }
}

/// `S^3` spins acted on by SU(2) disorder from the left; `I = Re Tr(φ(S_i)* Ω_ij φ(S_j))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Isoclinic;

impl Model for Isoclinic {
    type Spin = [f64; 4];
    type Link = Su2;
    type Gauge = Su2;
    type Field = Su2;

    const KIND: ModelKind = ModelKind::Isoclinic;
    const HEAT_BATH: bool = true;
    const MATRIX_DIM: usize = 2;

    fn clamp_value() -> [f64; 4] {
        [1.0, 0.0, 0.0, 0.0]
    }
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
        sampling::uniform_s3(rng)
    }
    fn renormalize(s: [f64; 4]) -> [f64; 4] {
        Su2::from_array(s).renormalized().to_array()
    }

    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Su2 {
        sampling::tilted_su2(rng, u)
    }
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
        sampling::haar_su2(rng)
    }
    fn link_identity() -> Su2 {
        Su2::IDENTITY
    }
    fn link_reverse(l: Su2) -> Su2 {
        l.adjoint()
    }
    fn link_mul(a: Su2, b: Su2) -> Su2 {
        a.mul(b)
    }
    fn link_matrix(l: Su2) -> DMatrix<Complex64> {
        su2_matrix(l)
    }
    fn link_to_flat(l: Su2) -> Vec<f64> {
        l.to_array().to_vec()
    }
    fn link_from_flat(v: &[f64]) -> Result<Su2> {
        flat_len(v, 4)?;
        Ok(Su2::new(v[0], v[1], v[2], v[3]))
    }

    fn interaction(si: [f64; 4], l: Su2, sj: [f64; 4]) -> f64 {
        Su2::from_array(si).adjoint().mul(l).mul(Su2::from_array(sj)).re_trace()
    }
    /// The Euclidean product `<v, w>` on `R^4`.
    fn two_point(sx: [f64; 4], sy: [f64; 4]) -> f64 {
        Su2::from_array(sx).dot(Su2::from_array(sy))
    }
    fn spin_to_flat(s: [f64; 4]) -> Vec<f64> {
        s.to_vec()
    }

    fn zero_field() -> Su2 {
        Su2::new(0.0, 0.0, 0.0, 0.0)
    }
    fn add_to_field(f: &mut Su2, w: f64, l: Su2, sj: [f64; 4]) {
        *f = f.add(l.mul(Su2::from_array(sj)).scale(2.0 * w));
    }
    fn field_value(f: &Su2, s: [f64; 4]) -> f64 {
        Su2::from_array(s).dot(*f)
    }
    fn heat_bath<R: Rng + ?Sized>(rng: &mut R, f: &Su2) -> [f64; 4] {
        quaternion_heat_bath(rng, *f).to_array()
    }
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: [f64; 4], width: f64) -> [f64; 4] {
        small_su2(rng, width).mul(Su2::from_array(s)).to_array()
    }

    fn gauge_identity() -> Su2 {
        Su2::IDENTITY
    }
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
        sampling::haar_su2(rng)
    }
    fn gauge_inverse(g: Su2) -> Su2 {
        g.adjoint()
    }
    fn gauge_spin(g: Su2, s: [f64; 4]) -> [f64; 4] {
        g.adjoint().mul(Su2::from_array(s)).to_array()
    }
    fn gauge_link(gi: Su2, l: Su2, gj: Su2) -> Su2 {
        gi.adjoint().mul(l).mul(gj)
    }
}

/// SO(3) frames `O_i` carrying the Heisenberg spin `O_i e_z`, with the Heisenberg
/// disorder; `I = <O_i e_z, Ω_ij O_j e_z>`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeisenbergLift;

impl HeisenbergLift {
    pub fn project(o: &Matrix3<f64>) -> Vector3<f64> {
        o.column(2).into_owned()
    }
}

impl Model for HeisenbergLift {
    type Spin = Matrix3<f64>;
    type Link = Matrix3<f64>;
    type Gauge = Matrix3<f64>;
    type Field = Vector3<f64>;

    const KIND: ModelKind = ModelKind::HeisenbergLift;
    const HEAT_BATH: bool = false;
    const MATRIX_DIM: usize = 3;

    fn clamp_value() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn random_spin<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn renormalize(s: Matrix3<f64>) -> Matrix3<f64> {
        so3::renormalize(s)
    }

    fn sample_link<R: Rng + ?Sized>(rng: &mut R, u: f64) -> Matrix3<f64> {
        Heisenberg::sample_link(rng, u)
    }
    fn haar_link<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn link_identity() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn link_reverse(l: Matrix3<f64>) -> Matrix3<f64> {
        l.transpose()
    }
    fn link_mul(a: Matrix3<f64>, b: Matrix3<f64>) -> Matrix3<f64> {
        a * b
    }
    fn link_matrix(l: Matrix3<f64>) -> DMatrix<Complex64> {
        real_matrix(&l)
    }
    fn link_to_flat(l: Matrix3<f64>) -> Vec<f64> {
        l.iter().copied().collect()
    }
    fn link_from_flat(v: &[f64]) -> Result<Matrix3<f64>> {
        Heisenberg::link_from_flat(v)
    }

    fn interaction(si: Matrix3<f64>, l: Matrix3<f64>, sj: Matrix3<f64>) -> f64 {
        Self::project(&si).dot(&(l * Self::project(&sj)))
    }
    fn two_point(sx: Matrix3<f64>, sy: Matrix3<f64>) -> f64 {
        Self::project(&sx).dot(&Self::project(&sy))
    }
    fn spin_to_flat(s: Matrix3<f64>) -> Vec<f64> {
        s.iter().copied().collect()
    }

    fn zero_field() -> Vector3<f64> {
        Vector3::zeros()
    }
    fn add_to_field(f: &mut Vector3<f64>, w: f64, l: Matrix3<f64>, sj: Matrix3<f64>) {
        *f += (l * Self::project(&sj)) * w;
    }
    fn field_value(f: &Vector3<f64>, s: Matrix3<f64>) -> f64 {
        Self::project(&s).dot(f)
    }
    fn propose<R: Rng + ?Sized>(rng: &mut R, s: Matrix3<f64>, width: f64) -> Matrix3<f64> {
        small_rotation(rng, width) * s
    }

    fn gauge_identity() -> Matrix3<f64> {
        Matrix3::identity()
    }
    fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
        sampling::haar_so3(rng)
    }
    fn gauge_inverse(g: Matrix3<f64>) -> Matrix3<f64> {
        g.transpose()
    }
    fn gauge_spin(g: Matrix3<f64>, s: Matrix3<f64>) -> Matrix3<f64> {
        g.transpose() * s
    }
    fn gauge_link(gi: Matrix3<f64>, l: Matrix3<f64>, gj: Matrix3<f64>) -> Matrix3<f64> {
        gi.transpose() * l * gj
    }
}
