//! Simple-factor machinery: root removal, factorization of potentials with
//! double spectral roots into (line, reduced potential), dressing and
//! undressing, the one-parameter bubbleton action, and the Terng–Uhlenbeck
//! frame formula.
//!
//! The elementary loops are built from π_{α₀}(λ) = diag(w, 1/w) with
//! w² = (λ−α₀)/(1−ᾱ₀λ); the branch of w is cut along the segment
//! [α₀, 1/ᾱ₀], so products of the two simple-factor sides are single-valued
//! off the cut. A left factor is g_{L,α₀} = π_L^{-1} Q_{0,L}, a right factor
//! h_{L,α₀} = Q_{1,L} π_L^{-1}, where π_L(0) = Q_{0,L}R_{0,L} = R_{1,L}Q_{1,L}
//! are the QR/RQ normalizations with positive real diagonal.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::flow::{self, FlowError, FrameGrid, GridSpec};
use crate::loop_algebra::{MatrixLaurent, ValidationError};
use crate::mat2::{gauge_delta, Mat2};
use crate::poly::Poly;

/// Nilpotency gate: |det ξ(α₀)| ≤ NILPOTENT_DET_TOL·‖ξ(α₀)‖².
pub const NILPOTENT_DET_TOL: f64 = 1e-9;
/// Nilpotency gate: ‖ξ(α₀)²‖ ≤ NILPOTENT_SQ_TOL·‖ξ(α₀)‖.
pub const NILPOTENT_SQ_TOL: f64 = 1e-8;
/// ‖ξ(α₀)‖ ≤ ZERO_TOL·‖ξ‖ counts as a zero of the potential.
pub const ZERO_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum DressError {
    /// ξ(α₀) is not (numerically) zero, so the root cannot be removed.
    NotAZero { relative_norm: f64 },
    /// ξ(α₀) is zero; factorization needs a nonzero nilpotent value.
    IsAZero,
    /// ξ(α₀) fails the nilpotency gates (α₀ not a double root of a).
    NotNilpotent { det_ratio: f64, sq_ratio: f64 },
    /// α₀ may not sit on the unit circle (two-sided factors) or at 0.
    BadAlpha,
    /// Polynomial division left a remainder beyond tolerance.
    DivisionRemainder { residual: f64 },
    /// The dressed line hit the eigenline locus at a grid point.
    DegenerateLine { at: C64 },
    /// Output failed potential validation (engine fault).
    Validation(ValidationError),
    /// Frame integration failed.
    Flow(FlowError),
}

impl core::fmt::Display for DressError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DressError::NotAZero { relative_norm } => {
                write!(
                    f,
                    "xi(alpha0) is not zero (relative norm {relative_norm:.3e})"
                )
            }
            DressError::IsAZero => write!(f, "xi(alpha0) = 0; use root removal instead"),
            DressError::NotNilpotent {
                det_ratio,
                sq_ratio,
            } => write!(
                f,
                "xi(alpha0) not nilpotent (det ratio {det_ratio:.3e}, square ratio {sq_ratio:.3e})"
            ),
            DressError::BadAlpha => write!(f, "alpha0 must lie off the unit circle and off 0"),
            DressError::DivisionRemainder { residual } => {
                write!(f, "polynomial division remainder {residual:.3e}")
            }
            DressError::DegenerateLine { at } => {
                write!(f, "dressed line degenerates at z = {at}")
            }
            DressError::Validation(e) => write!(f, "potential validation failed: {e}"),
            DressError::Flow(e) => write!(f, "frame integration failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DressError {}

// ---------------------------------------------------------------------------
// Lines in CP¹.

/// Point of CP¹ as a unit 2-vector with canonical phase (first component of
/// largest modulus made real positive).
#[derive(Clone, Copy, Debug)]
pub struct Cp1 {
    pub v: [C64; 2],
}

impl Cp1 {
    pub fn new(v0: C64, v1: C64) -> Self {
        let n = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let mut v = [v0 / n, v1 / n];
        let anchor = if v[0].norm() >= v[1].norm() {
            v[0]
        } else {
            v[1]
        };
        let phase = anchor / anchor.norm();
        v = [v[0] / phase, v[1] / phase];
        Cp1 { v }
    }

    /// Orthogonal complement line.
    pub fn perp(&self) -> Cp1 {
        Cp1::new(-self.v[1].conj(), self.v[0].conj())
    }

    /// Image line under an invertible matrix.
    pub fn apply(&self, m: &Mat2) -> Cp1 {
        let w = m.mul_vec(self.v);
        Cp1::new(w[0], w[1])
    }

    /// Sine of the Fubini–Study angle between the lines: |v₀w₁ − v₁w₀| for
    /// unit representatives. Exact near zero, unlike acos of the overlap.
    pub fn distance(&self, other: &Cp1) -> f64 {
        (self.v[0] * other.v[1] - self.v[1] * other.v[0]).norm()
    }

    /// SU(2) matrix whose first column spans the line.
    pub fn su2_frame(&self) -> Mat2 {
        Mat2::new(self.v[0], -self.v[1].conj(), self.v[1], self.v[0].conj())
    }
}

// ---------------------------------------------------------------------------
// Simple factors.

/// p(λ) = (λ − α₀)(1 − ᾱ₀λ) as a polynomial.
pub fn p_poly(alpha0: C64) -> Poly {
    Poly::new(vec![
        -alpha0,
        C64::ONE + alpha0.norm_sqr() * C64::ONE,
        -alpha0.conj(),
    ])
}

/// w(λ) with w² = (λ−α₀)/(1−ᾱ₀λ), branch cut on the segment [α₀, 1/ᾱ₀].
pub fn simple_factor_w(alpha0: C64, lambda: C64) -> C64 {
    let mu = (lambda - alpha0) / (C64::ONE - alpha0.conj() * lambda);
    let phase = C64::from_polar(1.0, alpha0.arg());
    // −e^{-iφ}μ maps the cut to ℝ⁻’s complement: principal √ is cut exactly
    // on [α₀, 1/ᾱ₀].
    C64::I * phase.sqrt() * (-mu / phase).sqrt()
}

/// π_{α₀}(λ) = diag(w, 1/w).
pub fn pi_alpha(alpha0: C64, lambda: C64) -> Mat2 {
    let w = simple_factor_w(alpha0, lambda);
    Mat2::diag(w, C64::ONE / w)
}

/// π_L = Q_L π_{α₀} Q_L^{-1}.
pub fn pi_line(line: &Cp1, alpha0: C64, lambda: C64) -> Mat2 {
    let q = line.su2_frame();
    q * pi_alpha(alpha0, lambda) * q.conj_transpose()
}

/// Which side of the group the elementary factor lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorSide {
    Left,
    Right,
}

/// An elementary simple factor: pole pair (α₀, 1/ᾱ₀) and a line in CP¹.
#[derive(Clone, Copy, Debug)]
pub struct SimpleFactorSpec {
    pub alpha0: C64,
    pub line: Cp1,
    pub side: FactorSide,
}

impl SimpleFactorSpec {
    pub fn new(alpha0: C64, line: Cp1, side: FactorSide) -> Result<Self, DressError> {
        if alpha0.norm() < 1e-12 || (alpha0.norm() - 1.0).abs() < 1e-9 {
            return Err(DressError::BadAlpha);
        }
        Ok(SimpleFactorSpec { alpha0, line, side })
    }

    /// QR data at λ = 0: (Q_{0,L}, R_{0,L}) and (R_{1,L}, Q_{1,L}).
    pub fn zero_decompositions(&self) -> (Mat2, Mat2, Mat2, Mat2) {
        let p0 = pi_line(&self.line, self.alpha0, C64::ZERO);
        let (q0, r0) = p0.qr_su2();
        let (r1, q1) = p0.rq_su2();
        (q0, r0, r1, q1)
    }

    /// Value of the factor at λ: g_{L,α₀} = π_L^{-1} Q₀ or h_{L,α₀} = Q₁ π_L^{-1}.
    pub fn eval(&self, lambda: C64) -> Mat2 {
        let (q0, _, _, q1) = self.zero_decompositions();
        let pinv = pi_line(&self.line, self.alpha0, lambda).inv();
        match self.side {
            FactorSide::Left => pinv * q0,
            FactorSide::Right => q1 * pinv,
        }
    }

    /// Duality partner: a left factor over L equals the right factor over
    /// L′ = Q₀^{-1}L (and conversely L = Q₁ L′).
    pub fn dual(&self) -> SimpleFactorSpec {
        let (q0, _, _, q1) = self.zero_decompositions();
        match self.side {
            FactorSide::Left => SimpleFactorSpec {
                alpha0: self.alpha0,
                line: self.line.apply(&q0.conj_transpose()),
                side: FactorSide::Right,
            },
            FactorSide::Right => SimpleFactorSpec {
                alpha0: self.alpha0,
                line: self.line.apply(&q1),
                side: FactorSide::Left,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Entry-wise division helpers.

/// Divides every entry of the λ-shifted coefficient polynomials of `x` by
/// `divisor`, producing a window −1…(g − deg divisor) Laurent polynomial.
fn divide_entries(
    x: &MatrixLaurent,
    divisor: &Poly,
    delta_out: C64,
) -> Result<MatrixLaurent, DressError> {
    let deg = divisor.degree().unwrap();
    let g_out = x.g() - deg;
    let mut entry_quots: [[Poly; 2]; 2] =
        [[Poly::zero(), Poly::zero()], [Poly::zero(), Poly::zero()]];
    let scale = x.max_coeff_norm().max(1e-300);
    for r in 0..2 {
        for c in 0..2 {
            let p = x.entry_poly_times_lambda(r, c);
            let (q, rem) = p.div_rem(divisor);
            if rem.max_coeff_norm() > 1e-7 * scale {
                return Err(DressError::DivisionRemainder {
                    residual: rem.max_coeff_norm() / scale,
                });
            }
            entry_quots[r][c] = q;
        }
    }
    let mut coeffs = vec![Mat2::zero(); g_out + 2];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        *slot = Mat2::new(
            entry_quots[0][0].coeff(k),
            entry_quots[0][1].coeff(k),
            entry_quots[1][0].coeff(k),
            entry_quots[1][1].coeff(k),
        );
    }
    MatrixLaurent::new_unchecked(g_out, delta_out, coeffs).map_err(DressError::Validation)
}

fn conjugate_potential(x: &MatrixLaurent, s: &Mat2, delta_out: C64) -> MatrixLaurent {
    let sinv = s.inv();
    let mut out = x.map_coeffs(|m| *s * *m * sinv);
    out.set_delta(delta_out);
    out
}

// ---------------------------------------------------------------------------
// Root removal (degree reduction of potentials that vanish at α₀).

/// Gauge record of a root removal: the divisor p(λ) and the δ used in the
/// g(δ) conjugation.
#[derive(Clone, Debug)]
pub struct GaugeRecord {
    pub p: Poly,
    pub delta: C64,
}

/// Removes a zero of the potential at α₀: divides by the scalar polynomial
/// (unimodular case: √(−α₀)‾·λ + √(−α₀); otherwise (λ−α₀)(1−ᾱ₀λ)) and
/// conjugates by g(δ). Requires ξ(α₀) ≈ 0.
pub fn remove_root(
    xi: &MatrixLaurent,
    alpha0: C64,
) -> Result<(MatrixLaurent, GaugeRecord), DressError> {
    let e = xi.eval(alpha0);
    let rel = e.norm() / xi.max_coeff_norm().max(1e-300);
    if rel > ZERO_TOL {
        return Err(DressError::NotAZero { relative_norm: rel });
    }
    let unimodular = (alpha0.norm() - 1.0).abs() < 1e-9;
    let (p, delta) = if unimodular {
        let s = (-alpha0).sqrt();
        (Poly::new(vec![s, s.conj()]), s.conj())
    } else {
        (p_poly(alpha0), -alpha0.conj() / alpha0.norm())
    };
    let quotient = divide_entries(xi, &p, xi.delta())?;
    let g = gauge_delta(delta);
    let out = conjugate_potential(&quotient, &g.inv(), xi.delta());
    out.validate().map_err(DressError::Validation)?;
    Ok((out, GaugeRecord { p, delta }))
}

// ---------------------------------------------------------------------------
// Factorization at a nilpotent value (bubbleton splitting).

/// Result of splitting ξ at a double root α₀ of a with ξ(α₀) ≠ 0.
#[derive(Clone, Debug)]
pub struct FactorizationResult {
    /// The right-factor line L′.
    pub line_prime: Cp1,
    /// Reduced potential ξ̆ ∈ P_{g−2}(δ·(−ᾱ₀/|α₀|)).
    pub reduced: MatrixLaurent,
    /// p(λ) = (λ−α₀)(1−ᾱ₀λ).
    pub p: Poly,
    pub alpha0: C64,
    /// The kernel line L = ker ξ(α₀).
    pub line: Cp1,
}

/// Factorizes ξ = p(λ)·h_{L′,α₀}·ξ̆·h_{L′,α₀}^{-1} with L = ker ξ(α₀) and
/// L′ = Q_{0,L}^{-1}L.
pub fn factorize(xi: &MatrixLaurent, alpha0: C64) -> Result<FactorizationResult, DressError> {
    if alpha0.norm() < 1e-12 || (alpha0.norm() - 1.0).abs() < 1e-9 {
        return Err(DressError::BadAlpha);
    }
    let e = xi.eval(alpha0);
    let scale = e.norm();
    if scale < ZERO_TOL * xi.max_coeff_norm() {
        return Err(DressError::IsAZero);
    }
    let det_ratio = e.det().norm() / (scale * scale);
    let sq_ratio = (e * e).norm() / scale;
    if det_ratio > NILPOTENT_DET_TOL || sq_ratio > NILPOTENT_SQ_TOL {
        return Err(DressError::NotNilpotent {
            det_ratio,
            sq_ratio,
        });
    }
    // Kernel line from the adjugate columns (both lie in ker E).
    let a = e.0[0][0];
    let b = e.0[0][1];
    let c = e.0[1][0];
    let (v0, v1) = if b.norm() + a.norm() >= a.norm() + c.norm() {
        (-b, a)
    } else {
        (-a, -c)
    };
    let line = Cp1::new(v0, v1);
    let q_l = line.su2_frame();
    // Entries in the kernel basis: M = Q_L^{-1} ξ Q_L.
    let m = conjugate_potential(xi, &q_l.conj_transpose(), xi.delta());
    // ã = M₁₁/p, b̃ = M₁₂/(1−ᾱ₀λ)², c̃ = M₂₁/(λ−α₀)².
    let p = p_poly(alpha0);
    let up2 = Poly::from_roots(
        alpha0.conj() * alpha0.conj(),
        &[C64::ONE / alpha0.conj(), C64::ONE / alpha0.conj()],
    );
    let lo2 = Poly::from_roots(C64::ONE, &[alpha0, alpha0]);
    let scale_m = m.max_coeff_norm().max(1e-300);
    let div_entry = |poly: Poly, divisor: &Poly| -> Result<Poly, DressError> {
        let (q, rem) = poly.div_rem(divisor);
        if rem.max_coeff_norm() > 1e-7 * scale_m {
            return Err(DressError::DivisionRemainder {
                residual: rem.max_coeff_norm() / scale_m,
            });
        }
        Ok(q)
    };
    let qa = div_entry(m.entry_poly_times_lambda(0, 0), &p)?;
    let qb = div_entry(m.entry_poly_times_lambda(0, 1), &up2)?;
    let qc = div_entry(m.entry_poly_times_lambda(1, 0), &lo2)?;
    let g_out = xi.g() - 2;
    let mut coeffs = vec![Mat2::zero(); g_out + 2];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        *slot = Mat2::new(qa.coeff(k), qb.coeff(k), qc.coeff(k), -qa.coeff(k));
    }
    let delta_out = xi.delta() * (-alpha0.conj() / alpha0.norm());
    let core =
        MatrixLaurent::new_unchecked(g_out, delta_out, coeffs).map_err(DressError::Validation)?;
    // ξ̆ = Q₀^{-1} Q_L [core] Q_L^{-1} Q₀.
    let spec = SimpleFactorSpec::new(alpha0, line, FactorSide::Left)?;
    let (q0, _, _, _) = spec.zero_decompositions();
    let reduced = conjugate_potential(&core, &(q0.conj_transpose() * q_l), delta_out);
    reduced.validate().map_err(DressError::Validation)?;
    let line_prime = line.apply(&q0.conj_transpose());
    Ok(FactorizationResult {
        line_prime,
        reduced,
        p,
        alpha0,
        line,
    })
}

/// Inverse of `factorize`: ξ = p(λ)·h_{L′,α₀}·ξ̆·h_{L′,α₀}^{-1}, computed by
/// polynomial conjugation (no square roots), validated as a potential.
pub fn dress(
    line_prime: &Cp1,
    reduced: &MatrixLaurent,
    alpha0: C64,
) -> Result<MatrixLaurent, DressError> {
    if alpha0.norm() < 1e-12 || (alpha0.norm() - 1.0).abs() < 1e-9 {
        return Err(DressError::BadAlpha);
    }
    let spec = SimpleFactorSpec::new(alpha0, *line_prime, FactorSide::Right)?;
    let (_, _, _, q1) = spec.zero_decompositions();
    let q_lp = line_prime.su2_frame();
    // M̃ = Q_{L′}^{-1} ξ̆ Q_{L′}; conjugate by diag(1/w, w) and multiply by p:
    // the (1,1) entry picks up p, (1,2) picks (1−ᾱ₀λ)², (2,1) picks (λ−α₀)².
    let mt = conjugate_potential(reduced, &q_lp.conj_transpose(), reduced.delta());
    let p = p_poly(alpha0);
    let up2 = Poly::new(vec![
        C64::ONE,
        -2.0 * alpha0.conj(),
        alpha0.conj() * alpha0.conj(),
    ]);
    let lo2 = Poly::new(vec![alpha0 * alpha0, -2.0 * alpha0, C64::ONE]);
    let pa = mt.entry_poly_times_lambda(0, 0).mul(&p);
    let pb = mt.entry_poly_times_lambda(0, 1).mul(&up2);
    let pc = mt.entry_poly_times_lambda(1, 0).mul(&lo2);
    let g_out = reduced.g() + 2;
    let mut coeffs = vec![Mat2::zero(); g_out + 2];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        *slot = Mat2::new(pa.coeff(k), pb.coeff(k), pc.coeff(k), -pa.coeff(k));
    }
    let delta_out = reduced.delta() * (-alpha0 / alpha0.norm());
    let inner =
        MatrixLaurent::new_unchecked(g_out, delta_out, coeffs).map_err(DressError::Validation)?;
    let out = conjugate_potential(&inner, &(q1 * q_lp), delta_out);
    out.validate().map_err(DressError::Validation)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Terng–Uhlenbeck frames and the bubbleton action.

/// Dressed frame by the Terng–Uhlenbeck formula: the reduced frame F̆ of the
/// rescaled potential p(λ)ξ̆ is integrated (including at λ = α₀), the line is
/// transported by L′(z) = conj(F̆_{α₀}(z))ᵗ L′, and
/// F_λ(z) = h_{L′,α₀} F̆_λ(z) h_{L′(z),α₀}^{-1}.
pub fn terng_uhlenbeck_frame(
    reduced: &MatrixLaurent,
    line_prime: &Cp1,
    alpha0: C64,
    grid: GridSpec,
    lambdas: &[C64],
) -> Result<FrameGrid, DressError> {
    if (alpha0.norm() - 1.0).abs() < 1e-9 {
        return Err(DressError::BadAlpha);
    }
    // X = p(λ)·ξ̆ is itself a valid potential of genus g̃+2 with a double
    // zero at α₀; its unitary frame is the reduced frame of the formula.
    let x = dressed_scalar_potential(reduced, alpha0)?;
    let mut lams = lambdas.to_vec();
    let alpha_idx = match lams.iter().position(|&l| (l - alpha0).norm() < 1e-12) {
        Some(i) => i,
        None => {
            lams.push(alpha0);
            lams.len() - 1
        }
    };
    let fg = flow::integrate(&x, grid, &lams).map_err(DressError::Flow)?;
    let h_out = SimpleFactorSpec::new(alpha0, *line_prime, FactorSide::Right)?;
    let n_nodes = fg.zeta.len();
    let mut frame = Vec::with_capacity(n_nodes);
    let mut zeta = Vec::with_capacity(n_nodes);
    let mut omega = Vec::with_capacity(n_nodes);
    for node in 0..n_nodes {
        let f_alpha = fg.frame[node][alpha_idx];
        let lz = line_prime.apply(&f_alpha.conj().transpose());
        // Eigenline degeneracy check on the reduced Killing field at α₀:
        // ζ̆(z) = ζ_X(z)/p has the same eigenlines as ζ_X(α₀)... p(α₀) = 0,
        // so test against the reduced field transported by the frame instead.
        let zeta_reduced_alpha = f_alpha.inv() * reduced.eval(alpha0) * f_alpha;
        let (_, evec_res) = eigen_line_distance(&zeta_reduced_alpha, &lz.perp());
        if evec_res < 1e-10 {
            return Err(DressError::DegenerateLine {
                at: fg.node_z(node % fg.grid.nx(), node / fg.grid.nx()),
            });
        }
        let h_z = SimpleFactorSpec::new(alpha0, lz, FactorSide::Right)?;
        let mut node_frames = Vec::with_capacity(lambdas.len());
        for &lam in lambdas.iter() {
            let k = fg.lambda_index(lam).map_err(DressError::Flow)?;
            let f = h_out.eval(lam) * fg.frame[node][k] * h_z.eval(lam).inv();
            node_frames.push(f);
        }
        // Dressed Killing field ζ(z) = p·h_{L′(z)} ζ̆(z) h_{L′(z)}^{-1}.
        let zeta_reduced = divide_entries(&fg.zeta[node], &p_poly(alpha0), reduced.delta())?;
        let dressed = dress(&lz, &zeta_reduced, alpha0)?;
        let val = dressed.coeff(-1).0[0][1] * C64::new(4.0, 0.0) * (-C64::I);
        omega.push(if val.re > 0.0 { val.re.ln() } else { f64::NAN });
        zeta.push(dressed);
        frame.push(node_frames);
    }
    Ok(FrameGrid {
        grid: fg.grid,
        lambdas: lambdas.to_vec(),
        zeta,
        frame,
        omega,
        max_local_err: fg.max_local_err,
    })
}

/// p(λ)·ξ̆ as a valid potential of genus g̃ + 2 (the loop whose unitary
/// factor is the reduced frame of the Terng–Uhlenbeck formula).
pub fn dressed_scalar_potential(
    reduced: &MatrixLaurent,
    alpha0: C64,
) -> Result<MatrixLaurent, DressError> {
    let p = p_poly(alpha0);
    let g_out = reduced.g() + 2;
    let mut coeffs = vec![Mat2::zero(); g_out + 2];
    for d in 0..coeffs.len() {
        let mut acc = Mat2::zero();
        for (k, pk) in p.coeffs.iter().enumerate() {
            let src = d as i32 - 1 - k as i32;
            if src >= -1 && src <= reduced.g() as i32 {
                acc = acc + reduced.coeff(src).scale(*pk);
            }
        }
        coeffs[d] = acc;
    }
    let delta_out = reduced.delta() * (-alpha0 / alpha0.norm());
    let x =
        MatrixLaurent::new_unchecked(g_out, delta_out, coeffs).map_err(DressError::Validation)?;
    x.validate().map_err(DressError::Validation)?;
    Ok(x)
}

/// Angle of `line` to the nearest eigenline of `m`, and the smaller of the
/// two "is an eigenvector" residuals (0 means exactly an eigenline).
fn eigen_line_distance(m: &Mat2, line: &Cp1) -> (f64, f64) {
    let w = m.mul_vec(line.v);
    let wn = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    if wn == 0.0 {
        return (0.0, 0.0);
    }
    let img = Cp1::new(w[0], w[1]);
    let d = img.distance(line);
    (d, d)
}

/// One-parameter bubbleton action: factorizes ξ at α₀, moves the line by
/// L′(β) = exp(−ψ(1/ᾱ₀, β))·L′ with ψ the Terng–Uhlenbeck generator, and
/// re-dresses. β = 0 is the identity; the reduced potential is preserved by
/// construction of the action.
pub fn bubbleton_flow(
    xi: &MatrixLaurent,
    alpha0: C64,
    beta: C64,
) -> Result<MatrixLaurent, DressError> {
    let fac = factorize(xi, alpha0)?;
    let g = xi.g() as i32;
    let lam = C64::ONE / alpha0.conj();
    // ψ(λ) = [β(1−ᾱ₀λ) + β̄λ(λ−α₀)]·parity(λ)·ξ̆(λ); at λ = 1/ᾱ₀ only the
    // second summand survives.
    let scalar = beta.conj() * lam * (lam - alpha0);
    let parity = if g % 2 != 0 {
        lam.powi((1 - g) / 2)
    } else {
        lam.powi(-g / 2) + lam.powi(1 - g / 2)
    };
    let psi = fac.reduced.eval(lam).scale(scalar * parity);
    let moved = fac.line_prime.apply(&(-psi).exp_traceless());
    dress(&moved, &fac.reduced, alpha0)
}
