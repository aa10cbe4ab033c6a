//! Tagged spin spaces and values, for callers that pick the space at run time.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling;
use super::so3;
use super::su2::Su2;
use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinSpace {
    Circle,
    GroupSu2,
    GroupSo3,
    Sphere2,
    Sphere3Isoclinic,
}

impl SpinSpace {
    /// `Tr Id` for the groups; 1 for the circle and the spheres.
    pub fn trace_dim(self) -> usize {
        match self {
            SpinSpace::GroupSu2 => 2,
            SpinSpace::GroupSo3 => 3,
            _ => 1,
        }
    }

    pub fn is_group(self) -> bool {
        matches!(self, SpinSpace::Circle | SpinSpace::GroupSu2 | SpinSpace::GroupSo3)
    }

    pub fn haar_sample<R: Rng + ?Sized>(self, rng: &mut R) -> SpinValue {
        match self {
            SpinSpace::Circle => SpinValue::Angle(rng.random::<f64>() * TAU),
            SpinSpace::GroupSu2 => SpinValue::Quaternion(sampling::haar_su2(rng)),
            SpinSpace::GroupSo3 => SpinValue::Rotation(sampling::haar_so3(rng)),
            SpinSpace::Sphere2 => SpinValue::Vector3(sampling::uniform_s2(rng)),
            SpinSpace::Sphere3Isoclinic => SpinValue::Vector4(sampling::uniform_s3(rng)),
        }
    }

    /// Draw from `ρ_u`: von Mises on the circle, `∝ e^{u Re Tr}` on the groups.
    pub fn tilted_sample<R: Rng + ?Sized>(self, u: f64, rng: &mut R) -> Result<SpinValue> {
        if !(u >= 0.0) {
            return Err(Error::InvalidArgument(format!("concentration u = {u} must be nonnegative")));
        }
        Ok(match self {
            SpinSpace::Circle => SpinValue::Angle(sampling::von_mises_angle(rng, u).rem_euclid(TAU)),
            SpinSpace::GroupSu2 => SpinValue::Quaternion(sampling::tilted_su2(rng, u)),
            SpinSpace::GroupSo3 => SpinValue::Rotation(sampling::tilted_so3(rng, u)),
            SpinSpace::Sphere2 | SpinSpace::Sphere3Isoclinic => {
                return Err(Error::SpaceMismatch(format!("{self:?} carries no group tilt")))
            }
        })
    }

    pub fn identity(self) -> Result<SpinValue> {
        match self {
            SpinSpace::Circle => Ok(SpinValue::Angle(0.0)),
            SpinSpace::GroupSu2 => Ok(SpinValue::Quaternion(Su2::IDENTITY)),
            SpinSpace::GroupSo3 => Ok(SpinValue::Rotation(Matrix3::identity())),
            _ => Err(Error::SpaceMismatch(format!("{self:?} is not a group"))),
        }
    }

    pub fn compose(self, x: &SpinValue, y: &SpinValue) -> Result<SpinValue> {
        match (self, x, y) {
            (SpinSpace::Circle, SpinValue::Angle(a), SpinValue::Angle(b)) => {
                Ok(SpinValue::Angle((a + b).rem_euclid(TAU)))
            }
            (SpinSpace::GroupSu2, SpinValue::Quaternion(a), SpinValue::Quaternion(b)) => {
                Ok(SpinValue::Quaternion(a.mul(*b).renormalized()))
            }
            (SpinSpace::GroupSo3, SpinValue::Rotation(a), SpinValue::Rotation(b)) => {
                Ok(SpinValue::Rotation(so3::renormalize(a * b)))
            }
            _ => Err(mismatch(self, x, y)),
        }
    }

    pub fn invert(self, x: &SpinValue) -> Result<SpinValue> {
        match (self, x) {
            (SpinSpace::Circle, SpinValue::Angle(a)) => Ok(SpinValue::Angle((-a).rem_euclid(TAU))),
            (SpinSpace::GroupSu2, SpinValue::Quaternion(a)) => Ok(SpinValue::Quaternion(a.adjoint())),
            (SpinSpace::GroupSo3, SpinValue::Rotation(a)) => Ok(SpinValue::Rotation(a.transpose())),
            _ => Err(mismatch(self, x, x)),
        }
    }

    /// `Re Tr(x* y)` on the groups, `cos(x - y)` on the circle, `<x, y>` on the spheres.
    pub fn re_trace_pair(self, x: &SpinValue, y: &SpinValue) -> Result<f64> {
        match (self, x, y) {
            (SpinSpace::Circle, SpinValue::Angle(a), SpinValue::Angle(b)) => Ok((a - b).cos()),
            (SpinSpace::GroupSu2, SpinValue::Quaternion(a), SpinValue::Quaternion(b)) => {
                Ok(a.adjoint().mul(*b).re_trace())
            }
            (SpinSpace::GroupSo3, SpinValue::Rotation(a), SpinValue::Rotation(b)) => {
                Ok((a.transpose() * b).trace())
            }
            (SpinSpace::Sphere2, SpinValue::Vector3(a), SpinValue::Vector3(b)) => Ok(a.dot(b)),
            (SpinSpace::Sphere3Isoclinic, SpinValue::Vector4(a), SpinValue::Vector4(b)) => {
                Ok(phi_map(*a)?.adjoint().mul(phi_map(*b)?).re_trace() / 2.0)
            }
            _ => Err(mismatch(self, x, y)),
        }
    }

    /// Check the value belongs to this space up to the unit tolerance.
    pub fn validate(self, x: &SpinValue) -> Result<()> {
        let err = match (self, x) {
            (SpinSpace::Circle, SpinValue::Angle(a)) if a.is_finite() => 0.0,
            (SpinSpace::GroupSu2, SpinValue::Quaternion(q)) => (q.norm_sqr() - 1.0).abs(),
            (SpinSpace::GroupSo3, SpinValue::Rotation(r)) => {
                so3::orthogonality_error(r).max((r.determinant() - 1.0).abs())
            }
            (SpinSpace::Sphere2, SpinValue::Vector3(v)) => (v.norm_squared() - 1.0).abs(),
            (SpinSpace::Sphere3Isoclinic, SpinValue::Vector4(v)) => (norm4(v) - 1.0).abs(),
            _ => return Err(mismatch(self, x, x)),
        };
        if err > UNIT_TOL {
            return Err(Error::OffManifold(err));
        }
        Ok(())
    }
}

fn mismatch(space: SpinSpace, x: &SpinValue, y: &SpinValue) -> Error {
    Error::SpaceMismatch(format!("{space:?} got {} and {}", x.kind(), y.kind()))
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpinValue {
    Angle(f64),
    Quaternion(Su2),
    Rotation(Matrix3<f64>),
    Vector3(Vector3<f64>),
    Vector4([f64; 4]),
}

impl SpinValue {
    pub fn kind(&self) -> &'static str {
        match self {
            SpinValue::Angle(_) => "angle",
            SpinValue::Quaternion(_) => "quaternion",
            SpinValue::Rotation(_) => "rotation",
            SpinValue::Vector3(_) => "vector3",
            SpinValue::Vector4(_) => "vector4",
        }
    }

    /// Flat real coordinates, as written to output records.
    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            SpinValue::Angle(a) => vec![*a],
            SpinValue::Quaternion(q) => q.to_array().to_vec(),
            SpinValue::Rotation(r) => r.iter().copied().collect(),
            SpinValue::Vector3(v) => v.iter().copied().collect(),
            SpinValue::Vector4(v) => v.to_vec(),
        }
    }
}

/// `S^3 -> SU(2)`, `(a, b, c, d) -> [[a + ib, c - id], [-c - id, a - ib]]`.
pub fn phi_map(v: [f64; 4]) -> Result<Su2> {
    let err = (norm4(&v) - 1.0).abs();
    if err > UNIT_TOL {
        return Err(Error::OffManifold(err));
    }
    Ok(Su2::from_array(v))
}

pub fn phi_inverse(u: Su2) -> [f64; 4] {
    u.to_array()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Isoclinic rotation of `S^3`: `φ^{-1}(U φ(v))` or `φ^{-1}(φ(v) U)`.
pub fn isoclinic_act(side: Side, u: Su2, v: [f64; 4]) -> Result<[f64; 4]> {
    let p = phi_map(v)?;
    Ok(match side {
        Side::Left => u.mul(p),
        Side::Right => p.mul(u),
    }
    .to_array())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ALL: [SpinSpace; 5] = [
        SpinSpace::Circle,
        SpinSpace::GroupSu2,
        SpinSpace::GroupSo3,
        SpinSpace::Sphere2,
        SpinSpace::Sphere3Isoclinic,
    ];

    #[test]
    fn self_pairing_is_trace_of_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in ALL {
            let x = s.haar_sample(&mut rng);
            s.validate(&x).unwrap();
            let expect = match s {
                SpinSpace::GroupSu2 => 2.0,
                SpinSpace::GroupSo3 => 3.0,
                _ => 1.0,
            };
            assert!((s.re_trace_pair(&x, &x).unwrap() - expect).abs() < 1e-12, "{s:?}");
        }
        let c = SpinSpace::Circle;
        let v = c.re_trace_pair(&SpinValue::Angle(0.4), &SpinValue::Angle(0.4 + std::f64::consts::PI)).unwrap();
        assert!((v + 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_of_product_reverses_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in [SpinSpace::Circle, SpinSpace::GroupSu2, SpinSpace::GroupSo3] {
            for _ in 0..10_000 {
                let x = s.haar_sample(&mut rng);
                let y = s.haar_sample(&mut rng);
                let lhs = s.invert(&s.compose(&x, &y).unwrap()).unwrap();
                let rhs = s.compose(&s.invert(&y).unwrap(), &s.invert(&x).unwrap()).unwrap();
                // Compare through the pairing, which is insensitive to angle wrap-around.
                let m = s.trace_dim() as f64;
                assert!((s.re_trace_pair(&lhs, &rhs).unwrap() - m).abs() < 1e-10, "{s:?}");
            }
        }
    }

    #[test]
    fn tilt_rejects_negative_and_spheres() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(SpinSpace::Circle.tilted_sample(-1.0, &mut rng).is_err());
        assert!(SpinSpace::Sphere2.tilted_sample(1.0, &mut rng).is_err());
    }

    #[test]
    fn mismatch_is_an_error() {
        let r = SpinSpace::GroupSu2.re_trace_pair(&SpinValue::Angle(0.0), &SpinValue::Angle(0.0));
        assert!(matches!(r, Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn phi_rejects_non_unit() {
        assert!(phi_map([1.0, 1.0, 0.0, 0.0]).is_err());
        assert_eq!(phi_map([1.0, 0.0, 0.0, 0.0]).unwrap(), Su2::IDENTITY);
    }
}
