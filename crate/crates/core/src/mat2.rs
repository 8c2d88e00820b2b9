//! Complex 2×2 matrices.
//!
//! Everything downstream works with `sl2(C)`-valued Laurent polynomials and
//! `SL2(C)`/`SU(2)` frames, so this stays deliberately small: a dense 2×2
//! complex matrix with the handful of decompositions the loop-group algebra
//! needs (QR/RQ with the positive-diagonal normalization, traceless
//! exponential, operator norm).

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

/// Dense complex 2×2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub fn zero() -> Self {
        Mat2([[C64::ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2::new(C64::ONE, C64::ZERO, C64::ZERO, C64::ONE)
    }

    /// σ₃ = diag(i, −i), the base point of S² ⊂ su(2).
    pub fn sigma3() -> Self {
        Mat2::new(C64::I, C64::ZERO, C64::ZERO, -C64::I)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, C64::ZERO, C64::ZERO, d)
    }

    /// Traceless matrix [[a, b], [c, -a]].
    pub fn traceless(a: C64, b: C64, c: C64) -> Self {
        Mat2::new(a, b, c, -a)
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn conj_transpose(&self) -> Self {
        Mat2::new(
            self.0[0][0].conj(),
            self.0[1][0].conj(),
            self.0[0][1].conj(),
            self.0[1][1].conj(),
        )
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn conj(&self) -> Self {
        Mat2::new(
            self.0[0][0].conj(),
            self.0[0][1].conj(),
            self.0[1][0].conj(),
            self.0[1][1].conj(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(
            self.0[0][0] * s,
            self.0[0][1] * s,
            self.0[1][0] * s,
            self.0[1][1] * s,
        )
    }

    pub fn inv(&self) -> Self {
        let d = self.det();
        Mat2::new(
            self.0[1][1] / d,
            -self.0[0][1] / d,
            -self.0[1][0] / d,
            self.0[0][0] / d,
        )
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                s += self.0[r][c].norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Operator (spectral) norm: largest singular value.
    pub fn op_norm(&self) -> f64 {
        // Eigenvalues of the 2x2 Hermitian M* M.
        let m = *self;
        let a = m.0[0][0].norm_sqr() + m.0[1][0].norm_sqr();
        let d = m.0[0][1].norm_sqr() + m.0[1][1].norm_sqr();
        let b = m.0[0][0].conj() * m.0[0][1] + m.0[1][0].conj() * m.0[1][1];
        let tr = a + d;
        let disc = ((a - d) * (a - d) / 4.0 + b.norm_sqr()).max(0.0).sqrt();
        (tr / 2.0 + disc).max(0.0).sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut s = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                s = s.max(self.0[r][c].norm());
            }
        }
        s
    }

    /// Exponential of a traceless matrix in closed form.
    ///
    /// For traceless M one has M² = −det(M)·1, so exp(M) = cosh(s)·1 +
    /// (sinh(s)/s)·M with s² = −det M (any branch of s).
    pub fn exp_traceless(&self) -> Self {
        debug_assert!(self.trace().norm() < 1e-9 * (1.0 + self.norm()));
        let s2 = -self.det();
        let s = s2.sqrt();
        let (ch, shs) = if s.norm() < 1e-8 {
            // sinh(s)/s = 1 + s²/6 + s⁴/120 + …
            (
                C64::ONE + s2 / 2.0 + s2 * s2 / 24.0,
                C64::ONE + s2 / 6.0 + s2 * s2 / 120.0,
            )
        } else {
            (s.cosh(), s.sinh() / s)
        };
        Mat2::identity().scale(ch) + self.scale(shs)
    }

    /// Distance to the nearest of ±identity.
    pub fn dist_to_pm_identity(&self) -> f64 {
        let p = (*self - Mat2::identity()).norm();
        let m = (*self + Mat2::identity()).norm();
        p.min(m)
    }

    /// ‖M·σ₃ − σ₃·M‖, the defect of commuting with σ₃.
    pub fn sigma3_commutator_defect(&self) -> f64 {
        self.commutator(&Mat2::sigma3()).norm()
    }

    /// Defect from being unitary: ‖M*M − 1‖.
    pub fn unitary_defect(&self) -> f64 {
        (self.conj_transpose() * *self - Mat2::identity()).norm()
    }

    /// QR decomposition M = Q·R with Q ∈ SU(2) and R upper triangular with
    /// positive real diagonal. Requires det M = 1.
    pub fn qr_su2(&self) -> (Mat2, Mat2) {
        let m1 = [self.0[0][0], self.0[1][0]];
        let n1 = (m1[0].norm_sqr() + m1[1].norm_sqr()).sqrt();
        let q1 = [m1[0] / n1, m1[1] / n1];
        // Orthonormal completion with det = +1: second column (-conj(q1[1]), conj(q1[0])).
        let q2 = [-q1[1].conj(), q1[0].conj()];
        let q = Mat2::new(q1[0], q2[0], q1[1], q2[1]);
        let r = q.conj_transpose() * *self;
        (q, r)
    }

    /// RQ decomposition M = R·Q with Q ∈ SU(2), R upper triangular with
    /// positive real diagonal. Requires det M = 1.
    pub fn rq_su2(&self) -> (Mat2, Mat2) {
        let row2 = [self.0[1][0], self.0[1][1]];
        let n2 = (row2[0].norm_sqr() + row2[1].norm_sqr()).sqrt();
        let rho = 1.0 / n2;
        // Bottom row of Q is rho * row2; complete to SU(2).
        let b = [row2[0] * rho, row2[1] * rho];
        let q = Mat2::new(b[1].conj(), -b[0].conj(), b[0], b[1]);
        let r = *self * q.conj_transpose();
        (r, q)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c] + rhs.0[r][c];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c] - rhs.0[r][c];
            }
        }
        out
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-C64::ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Zero for Mat2 {
    fn zero() -> Self {
        Mat2::zero()
    }
    fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }
}

/// The U(1) gauge g(δ) = diag(δ^{1/2}, δ^{−1/2}) for unimodular δ.
pub fn gauge_delta(delta: C64) -> Mat2 {
    let s = delta.sqrt();
    Mat2::diag(s, C64::ONE / s)
}
