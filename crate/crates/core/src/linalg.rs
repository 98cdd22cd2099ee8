//! Fixed-size 2x2 complex linear algebra used by the Lax-pair kernels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// A column vector in C^2.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2(pub [C64; 2]);

impl Vec2 {
    pub fn new(a: C64, b: C64) -> Self {
        Vec2([a, b])
    }

    pub fn scale(self, c: C64) -> Self {
        Vec2([self.0[0] * c, self.0[1] * c])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn max_abs_diff(&self, other: &Vec2) -> f64 {
        (self.0[0] - other.0[0])
            .norm()
            .max((self.0[1] - other.0[1]).norm())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

/// det(u, v) for two column vectors.
pub fn wronskian(u: Vec2, v: Vec2) -> C64 {
    u.0[0] * v.0[1] - u.0[1] * v.0[0]
}

/// Row-major 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn zero() -> Self {
        Mat2::default()
    }

    pub fn from_cols(c1: Vec2, c2: Vec2) -> Self {
        Mat2::new(c1.0[0], c2.0[0], c1.0[1], c2.0[1])
    }

    pub fn col(&self, j: usize) -> Vec2 {
        Vec2([self.0[0][j], self.0[1][j]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(self, c: C64) -> Self {
        let m = self.0;
        Mat2::new(m[0][0] * c, m[0][1] * c, m[1][0] * c, m[1][1] * c)
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = self.0;
        Some(Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(d.inv()))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// exp of a traceless matrix: cosh(w) I + sinh(w)/w A with w^2 = -det A.
    pub fn exp_traceless(&self) -> Mat2 {
        let w2 = -self.det();
        let w = w2.sqrt();
        let (ch, shc) = if w.norm() < 1e-4 {
            // Taylor: cosh w = 1 + w^2/2 + w^4/24, sinh(w)/w = 1 + w^2/6 + w^4/120
            (
                ONE + w2 * (0.5 + w2 / 24.0),
                ONE + w2 * (1.0 / 6.0 + w2 / 120.0),
            )
        } else {
            (w.cosh(), w.sinh() / w)
        };
        Mat2::identity().scale(ch) + self.scale(shc)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Pauli matrices.
pub fn sigma1() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma2() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma3() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_traceless_matches_series() {
        let a = Mat2::new(C64::new(0.3, 0.1), C64::new(0.2, -0.4), C64::new(-0.7, 0.2), C64::new(-0.3, -0.1));
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for n in 1..30 {
            term = (term * a).scale(C64::new(1.0 / n as f64, 0.0));
            sum = sum + term;
        }
        assert!((a.exp_traceless() - sum).max_abs() < 1e-14);
        let tiny = a.scale(C64::new(1e-6, 0.0));
        assert!((tiny.exp_traceless().det() - ONE).norm() < 1e-15);
    }

    #[test]
    fn pauli_algebra() {
        let s1 = sigma1();
        let s2 = sigma2();
        let s3 = sigma3();
        assert_eq!(s1 * s2, s3.scale(I));
        assert_eq!(s2 * s2, Mat2::identity());
        assert!((s3.inverse().unwrap() - s3).max_abs() == 0.0);
    }
}
