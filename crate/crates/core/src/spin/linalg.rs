//! Fixed-dimension complex linear algebra on C³: vectors, 3×3 matrices,
//! and eigenvalues of Hermitian matrices via the closed-form cubic with a
//! Newton polish. Eigenvalues of trace-scale matrices are accurate to about
//! 1e-10, which is the tolerance the callers quote.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex;

use crate::scalar::Real;

/// A vector in C³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec3<R: Real>(pub [Complex<R>; 3]);

impl<R: Real> CVec3<R> {
    pub fn from_reals(x: R, y: R, z: R) -> Self {
        CVec3([
            Complex::new(x, R::zero()),
            Complex::new(y, R::zero()),
            Complex::new(z, R::zero()),
        ])
    }

    pub fn basis(k: usize) -> Self {
        let mut v = [Complex::new(R::zero(), R::zero()); 3];
        v[k] = Complex::new(R::one(), R::zero());
        CVec3(v)
    }

    /// ⟨self | other⟩, conjugate-linear in `self`.
    pub fn dot(&self, other: &CVec3<R>) -> Complex<R> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(R::zero(), R::zero()), |acc, t| acc + t)
    }

    pub fn norm_sqr(&self) -> R {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn sub(&self, other: &CVec3<R>) -> Self {
        CVec3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= R::zero() || !n.is_finite() {
            return None;
        }
        Some(self.scale(Complex::new(n.recip(), R::zero())))
    }

    /// Outer product v v† (the rank-1 projection when v is a unit vector).
    pub fn outer(&self) -> Mat3<R> {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i] * self.0[j].conj();
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// A 3×3 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<R: Real>(pub [[Complex<R>; 3]; 3]);

impl<R: Real> Mat3<R> {
    pub fn zero() -> Self {
        Mat3([[Complex::new(R::zero(), R::zero()); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Mat3::zero();
        for (k, row) in m.0.iter_mut().enumerate() {
            row[k] = Complex::new(R::one(), R::zero());
        }
        m
    }

    pub fn diagonal(d: [R; 3]) -> Self {
        let mut m = Mat3::zero();
        for k in 0..3 {
            m.0[k][k] = Complex::new(d[k], R::zero());
        }
        m
    }

    pub fn add(&self, other: &Mat3<R>) -> Self {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j] + other.0[i][j];
            }
        }
        m
    }

    pub fn sub(&self, other: &Mat3<R>) -> Self {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: R) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for c in row.iter_mut() {
                *c *= s;
            }
        }
        m
    }

    pub fn matmul(&self, other: &Mat3<R>) -> Self {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex::new(R::zero(), R::zero());
                for k in 0..3 {
                    acc += self.0[i][k] * other.0[k][j];
                }
                m.0[i][j] = acc;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex<R> {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> Complex<R> {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn column(&self, j: usize) -> CVec3<R> {
        CVec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Mat3<R>) -> R {
        let mut worst = R::zero();
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> R {
        self.max_abs_diff(&Mat3::zero())
    }

    pub fn is_hermitian(&self, tol: R) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn apply(&self, v: &CVec3<R>) -> CVec3<R> {
        let mut out = [Complex::new(R::zero(), R::zero()); 3];
        for (i, slot) in out.iter_mut().enumerate() {
            for j in 0..3 {
                *slot += self.0[i][j] * v.0[j];
            }
        }
        CVec3(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .all(|row| row.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}

/// Re Tr(AB), the real trace pairing of two matrices.
pub fn re_trace_product<R: Real>(a: &Mat3<R>, b: &Mat3<R>) -> R {
    a.matmul(b).trace().re
}

/// Eigenvalues of a Hermitian 3×3 matrix, ascending.
///
/// Closed-form solution of the characteristic cubic (the trigonometric
/// method for the shifted, scaled matrix), then up to three Newton steps on
/// the characteristic polynomial per root.
pub fn hermitian_eigenvalues<R: Real>(m: &Mat3<R>) -> [R; 3] {
    let a = &m.0;
    let two = R::of(2.0);
    let p1 = a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr();
    let d = [a[0][0].re, a[1][1].re, a[2][2].re];

    let mut eigs = if p1 <= R::zero() {
        let mut e = d;
        e.sort_by(|x, y| x.partial_cmp(y).expect("finite diagonal"));
        e
    } else {
        let q = (d[0] + d[1] + d[2]) / R::of(3.0);
        let p2 = (d[0] - q).powi(2) + (d[1] - q).powi(2) + (d[2] - q).powi(2) + two * p1;
        let p = (p2 / R::of(6.0)).sqrt();
        let shifted = m.sub(&Mat3::diagonal([q, q, q])).scale(p.recip());
        let r = (shifted.det().re / two).max(-R::one()).min(R::one());
        let phi = r.acos() / R::of(3.0);
        let e1 = q + two * p * phi.cos();
        let e3 = q + two * p * (phi + R::of(2.0 * std::f64::consts::FRAC_PI_3)).cos();
        let e2 = R::of(3.0) * q - e1 - e3;
        let mut e = [e3, e2, e1];
        e.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        e
    };

    // Characteristic polynomial c(λ) = λ³ − c2 λ² + c1 λ − c0, with real
    // coefficients for Hermitian input.
    let c2 = m.trace().re;
    let minor = |i: usize, j: usize, k: usize, l: usize| (a[i][j] * a[k][l] - a[i][l] * a[k][j]).re;
    let c1 = minor(0, 0, 1, 1) + minor(0, 0, 2, 2) + minor(1, 1, 2, 2);
    let c0 = m.det().re;
    for e in eigs.iter_mut() {
        for _ in 0..3 {
            let f = ((*e - c2) * *e + c1) * *e - c0;
            let df = (R::of(3.0) * *e - two * c2) * *e + c1;
            if df.abs() <= R::of(1e-30) {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *e -= step;
        }
    }
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}
