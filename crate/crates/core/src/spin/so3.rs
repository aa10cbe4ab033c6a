use nalgebra::{Matrix3, Vector3};

/// Rotation matrix of the unit quaternion `w + x i + y j + z k`.
pub fn rotation_from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Matrix3<f64> {
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Rotation by `angle` about the unit `axis` (Rodrigues).
pub fn rotation_about(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    let k = Matrix3::new(0.0, -axis.z, axis.y, axis.z, 0.0, -axis.x, -axis.y, axis.x, 0.0);
    Matrix3::identity() + k * s + k * k * (1.0 - c)
}

pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Deviation from orthogonality, `|R^T R - I|_max`.
pub fn orthogonality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).abs().max()
}

/// Nearest rotation by Gram-Schmidt on the columns; applied only when drift exceeds `1e-9`.
pub fn renormalize(r: Matrix3<f64>) -> Matrix3<f64> {
    if orthogonality_error(&r) <= 1e-9 {
        return r;
    }
    let c0 = r.column(0).normalize();
    let c1 = (r.column(1) - c0 * c0.dot(&r.column(1))).normalize();
    let c2 = c0.cross(&c1);
    Matrix3::from_columns(&[c0, c1, c2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_rotation_is_orthogonal_with_trace_formula() {
        let (w, x, y, z) = (0.3f64, -0.5, 0.7, 0.1);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        let r = rotation_from_quaternion(w, x, y, z);
        assert!(orthogonality_error(&r) < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
        assert!((r.trace() - (4.0 * w * w - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn rodrigues_matches_axis_rotations() {
        let a = 0.83;
        assert!((rotation_about(Vector3::z(), a) - rot_z(a)).abs().max() < 1e-15);
        assert!((rotation_about(Vector3::y(), a) - rot_y(a)).abs().max() < 1e-15);
    }

    #[test]
    fn renormalize_restores_orthogonality() {
        let r = rot_z(0.4) * rot_y(1.1) + Matrix3::repeat(1e-6);
        let fixed = renormalize(r);
        assert!(orthogonality_error(&fixed) < 1e-14);
        assert!((fixed.determinant() - 1.0).abs() < 1e-14);
    }
}
