use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// An element of SU(2) stored by the coordinates `(a, b, c, d)` of the matrix
///
/// ```text
/// [  a + ib   c - id ]
/// [ -c - id   a - ib ]
/// ```
///
/// The same four numbers are the point of `S^3` the matrix is identified with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for Su2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Su2 {
    pub const IDENTITY: Su2 = Su2 { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Top row `(alpha, beta)` of the matrix.
    #[inline]
    fn rows(self) -> (Complex64, Complex64) {
        (Complex64::new(self.a, self.b), Complex64::new(self.c, -self.d))
    }

    #[inline]
    fn from_rows(alpha: Complex64, beta: Complex64) -> Self {
        Self { a: alpha.re, b: alpha.im, c: beta.re, d: -beta.im }
    }

    /// Matrix product `self * rhs`.
    #[inline]
    pub fn mul(self, rhs: Su2) -> Su2 {
        let (a1, b1) = self.rows();
        let (a2, b2) = rhs.rows();
        Self::from_rows(a1 * a2 - b1 * b2.conj(), a1 * b2 + b1 * a2.conj())
    }

    /// Adjoint, which is also the inverse.
    #[inline]
    pub fn adjoint(self) -> Su2 {
        Su2 { a: self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    #[inline]
    pub fn re_trace(self) -> f64 {
        2.0 * self.a
    }

    /// Euclidean inner product of the coordinate vectors; `Re Tr(x* y) = 2 <x, y>`.
    #[inline]
    pub fn dot(self, o: Su2) -> f64 {
        self.a * o.a + self.b * o.b + self.c * o.c + self.d * o.d
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn scale(self, s: f64) -> Su2 {
        Su2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn add(self, o: Su2) -> Su2 {
        Su2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }

    pub fn normalized(self) -> Su2 {
        self.scale(1.0 / self.norm_sqr().sqrt())
    }

    /// Renormalize only if the norm drifted by more than `1e-9`.
    pub fn renormalized(self) -> Su2 {
        if (self.norm_sqr() - 1.0).abs() > 1e-9 {
            self.normalized()
        } else {
            self
        }
    }

    pub fn to_matrix(self) -> Matrix2<Complex64> {
        let (alpha, beta) = self.rows();
        Matrix2::new(alpha, beta, -beta.conj(), alpha.conj())
    }

    /// Reads the coordinates from the top row of a matrix of the SU(2) form.
    pub fn from_matrix(m: &Matrix2<Complex64>) -> Su2 {
        Self::from_rows(m[(0, 0)], m[(0, 1)])
    }
}
