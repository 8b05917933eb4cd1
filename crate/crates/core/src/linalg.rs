//! Complex scalars and 2x2 complex matrices.
//!
//! Every matrix quantity in the pipeline (connection matrices, RH solutions,
//! ODE coefficients, eigenvector frames) is a [`Mat2`]. Values are `Copy`
//! and all operations return fresh values.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Cx = Complex64;

/// Relative singularity threshold used by [`Mat2::inverse`].
pub const SINGULAR_TOL: f64 = 1e-13;

#[inline]
pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

pub const I: Cx = Cx::new(0.0, 1.0);
pub const ONE: Cx = Cx::new(1.0, 0.0);
pub const ZERO: Cx = Cx::new(0.0, 0.0);

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: Cx,
    pub a12: Cx,
    pub a21: Cx,
    pub a22: Cx,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a11, self.a12, self.a21, self.a22)
    }
}

impl Mat2 {
    pub const fn new(a11: Cx, a12: Cx, a21: Cx, a22: Cx) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(d1: Cx, d2: Cx) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    /// Interchange the rows, then the columns: `result[i][j] = m[3-i][3-j]`.
    pub fn star(&self) -> Self {
        Self::new(self.a22, self.a21, self.a12, self.a11)
    }

    pub fn determinant(&self) -> Cx {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Cx {
        self.a11 + self.a22
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (self.a11.norm() + self.a12.norm()).max(self.a21.norm() + self.a22.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        let scale = self.norm_inf();
        let tol = SINGULAR_TOL * scale * scale;
        if !(det.norm() > tol) || !self.is_finite() {
            return Err(Error::SingularMatrix { det: det.norm(), tol });
        }
        let inv = det.inv();
        Ok(Self::new(
            self.a22 * inv,
            -self.a12 * inv,
            -self.a21 * inv,
            self.a11 * inv,
        ))
    }

    pub fn scale(&self, s: Cx) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: [Cx; 2]) -> [Cx; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// Sum of the two columns, i.e. `self * (1, 1)^T`.
    pub fn row_sums(&self) -> [Cx; 2] {
        [self.a11 + self.a12, self.a21 + self.a22]
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl Mul<Cx> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Cx) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(Cx::new(s, 0.0))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        Mat2::new(self.a11 + b.a11, self.a12 + b.a12, self.a21 + b.a21, self.a22 + b.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(self.a11 - b.a11, self.a12 - b.a12, self.a21 - b.a21, self.a22 - b.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}
