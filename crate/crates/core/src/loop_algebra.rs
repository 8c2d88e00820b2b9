//! Matrix Laurent polynomials, the potential class P_g(δ) and the spectral
//! polynomial a(λ) = −λ det ξ_λ.
//!
//! A potential is a Laurent polynomial ξ_λ = Σ_{d=-1}^{g} ξ̂_d λ^d with
//! traceless 2×2 coefficients satisfying
//!   * star-reality ξ̂_d = −(ξ̂_{g−1−d})*ᵗ,
//!   * residue ray: ξ̂_{−1} strictly upper triangular with top-right entry in
//!     i·δ·ℝ⁺,
//!   * nondegeneracy tr(ξ̂_{−1} ξ̂_0) ≠ 0.
//! The induced a(λ) satisfies the reality condition λ^{2g}·conj(a(1/λ̄)) = a(λ),
//! is ≤ 0 as λ^{−g} a(λ) on the unit circle, and a(0) ≠ 0.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::mat2::Mat2;
use crate::poly::Poly;
use crate::rng::Rng;

/// Number of unit-circle samples for the sign condition on λ^{-g} a(λ).
pub const CIRCLE_SAMPLES: usize = 720;
/// Root pairing tolerance under inversion λ ↦ 1/λ̄.
pub const PAIRING_TOL: f64 = 1e-8;
const SIGN_TOL: f64 = 1e-10;

/// Traceless 2×2 matrix; stores (a, b, c) of [[a, b], [c, −a]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Traceless {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl Traceless {
    pub fn new(a: C64, b: C64, c: C64) -> Self {
        Traceless { a, b, c }
    }

    pub fn mat(&self) -> Mat2 {
        Mat2::traceless(self.a, self.b, self.c)
    }

    /// Projects a numerically traceless matrix; the trace must vanish within
    /// tolerance relative to the entries.
    pub fn from_mat(m: &Mat2, tol: f64) -> Result<Self, ValidationError> {
        let tr = m.trace().norm();
        if tr > tol * (1.0 + m.norm()) {
            return Err(ValidationError::TraceZero { defect: tr });
        }
        let a = (m.0[0][0] - m.0[1][1]) / 2.0;
        Ok(Traceless::new(a, m.0[0][1], m.0[1][0]))
    }
}

/// Violated-invariant report for potential validation.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationError {
    CoefficientCount { expected: usize, got: usize },
    TraceZero { defect: f64 },
    StarReality { defect: f64 },
    ResidueRay { defect: f64 },
    Nondegeneracy { trace_norm: f64 },
    DeltaNotUnimodular { modulus: f64 },
}

impl ValidationError {
    /// Stable name of the violated invariant, used in machine reports.
    pub fn invariant_name(&self) -> &'static str {
        match self {
            ValidationError::CoefficientCount { .. } => "coefficient_count",
            ValidationError::TraceZero { .. } => "trace_zero",
            ValidationError::StarReality { .. } => "star_reality",
            ValidationError::ResidueRay { .. } => "residue_ray",
            ValidationError::Nondegeneracy { .. } => "nondegeneracy",
            ValidationError::DeltaNotUnimodular { .. } => "delta_unimodular",
        }
    }
}

impl core::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ValidationError::CoefficientCount { expected, got } => {
                write!(
                    f,
                    "coefficient_count: expected {expected} coefficients, got {got}"
                )
            }
            ValidationError::TraceZero { defect } => {
                write!(f, "trace_zero: trace defect {defect:.3e}")
            }
            ValidationError::StarReality { defect } => {
                write!(f, "star_reality: coefficient defect {defect:.3e}")
            }
            ValidationError::ResidueRay { defect } => {
                write!(f, "residue_ray: defect {defect:.3e}")
            }
            ValidationError::Nondegeneracy { trace_norm } => {
                write!(f, "nondegeneracy: |tr(xi_-1 xi_0)| = {trace_norm:.3e}")
            }
            ValidationError::DeltaNotUnimodular { modulus } => {
                write!(f, "delta_unimodular: |delta| = {modulus:.6}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ValidationError {}

/// Matrix Laurent polynomial with coefficient window d = −1 … g.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLaurent {
    g: usize,
    delta: C64,
    /// coeffs[i] is the coefficient of λ^{i-1}.
    coeffs: Vec<Mat2>,
}

impl MatrixLaurent {
    /// Validating constructor for potentials in P_g(δ).
    pub fn new(g: usize, delta: C64, coeffs: Vec<Mat2>) -> Result<Self, ValidationError> {
        let x = MatrixLaurent::new_unchecked(g, delta, coeffs)?;
        x.validate()?;
        Ok(x)
    }

    /// Constructor that only enforces shape and tracelessness; reality and the
    /// residue ray are not checked. Used for intermediate loops (tangent
    /// vectors, products p(λ)·ξ̆ and the like).
    pub fn new_unchecked(g: usize, delta: C64, coeffs: Vec<Mat2>) -> Result<Self, ValidationError> {
        if coeffs.len() != g + 2 {
            return Err(ValidationError::CoefficientCount {
                expected: g + 2,
                got: coeffs.len(),
            });
        }
        if (delta.norm() - 1.0).abs() > 1e-8 {
            return Err(ValidationError::DeltaNotUnimodular {
                modulus: delta.norm(),
            });
        }
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for m in &coeffs {
            let tr = m.trace().norm();
            if tr > 1e-10 * (1.0 + scale) {
                return Err(ValidationError::TraceZero { defect: tr });
            }
        }
        Ok(MatrixLaurent { g, delta, coeffs })
    }

    pub fn zero(g: usize) -> Self {
        MatrixLaurent {
            g,
            delta: C64::ONE,
            coeffs: vec![Mat2::zero(); g + 2],
        }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn delta(&self) -> C64 {
        self.delta
    }

    pub fn set_delta(&mut self, delta: C64) {
        self.delta = delta;
    }

    /// Coefficient of λ^d for d in −1 … g.
    pub fn coeff(&self, d: i32) -> Mat2 {
        let idx = (d + 1) as usize;
        self.coeffs[idx]
    }

    pub fn coeff_mut(&mut self, d: i32) -> &mut Mat2 {
        let idx = (d + 1) as usize;
        &mut self.coeffs[idx]
    }

    pub fn coeffs(&self) -> &[Mat2] {
        &self.coeffs
    }

    pub fn eval(&self, lambda: C64) -> Mat2 {
        // Horner on the polynomial part, then the λ^{-1} term.
        let mut acc = Mat2::zero();
        for m in self.coeffs.iter().skip(1).rev() {
            acc = acc.scale(lambda) + *m;
        }
        acc + self.coeffs[0].scale(C64::ONE / lambda)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Mat2) -> Mat2) -> Self {
        MatrixLaurent {
            g: self.g,
            delta: self.delta,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &MatrixLaurent) -> Self {
        assert_eq!(self.g, other.g);
        MatrixLaurent {
            g: self.g,
            delta: self.delta,
            coeffs: self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &MatrixLaurent) -> Self {
        self.add(&other.scale(-C64::ONE))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_coeffs(|m| m.scale(s))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn dist(&self, other: &MatrixLaurent) -> f64 {
        self.sub(other).max_coeff_norm()
    }

    /// Entry (r, c) as a polynomial in λ after multiplying by λ (so that the
    /// λ^{-1} coefficient lands at degree 0).
    pub fn entry_poly_times_lambda(&self, r: usize, c: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|m| m.0[r][c]).collect())
    }

    /// Full validation of P_g(δ) membership.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let scale = self.max_coeff_norm().max(1e-300);
        // Star-reality.
        let star = self.star();
        let defect = star.add(self).max_coeff_norm() / scale;
        if defect > 1e-8 {
            return Err(ValidationError::StarReality { defect });
        }
        // Residue ray.
        let res = self.coeff(-1);
        let ray = res.0[0][1] * (C64::I * self.delta).conj();
        let off = res.0[0][0].norm() + res.0[1][0].norm() + res.0[1][1].norm();
        let defect = (off + ray.im.abs() + (-ray.re).max(0.0)) / scale;
        if defect > 1e-8 || ray.re <= 0.0 {
            return Err(ValidationError::ResidueRay { defect });
        }
        // Nondegeneracy.
        let t = (self.coeff(-1) * self.coeff(0)).trace().norm();
        if t < 1e-12 * scale * scale {
            return Err(ValidationError::Nondegeneracy { trace_norm: t });
        }
        Ok(())
    }

    /// The star involution: λ^{g−1} · conj-transpose( x(1/λ̄) ), expanded in
    /// the same degree window. Coefficient-wise star(x)_d = (x_{g−1−d})*ᵗ.
    pub fn star(&self) -> Self {
        let g = self.g as i32;
        let coeffs = (-1..=g)
            .map(|d| self.coeff(g - 1 - d).conj_transpose())
            .collect();
        MatrixLaurent {
            g: self.g,
            delta: self.delta,
            coeffs,
        }
    }

    /// Defect of the membership identity star(x) = −x.
    pub fn reality_defect(&self) -> f64 {
        self.star().add(self).max_coeff_norm() / self.max_coeff_norm().max(1e-300)
    }

    /// Deviation of the residue from the ray i·δ·ℝ⁺ (plus any spill outside
    /// the strictly-upper slot), relative to the coefficient scale.
    pub fn residue_ray_defect(&self) -> f64 {
        let r = self.coeff(-1);
        let ray = r.0[0][1] * (C64::I * self.delta).conj();
        let off = r.0[0][0].norm() + r.0[1][0].norm() + r.0[1][1].norm();
        (off + ray.im.abs() + (-ray.re).max(0.0)) / self.max_coeff_norm().max(1e-300)
    }

    /// a(λ) = −λ det x(λ) as an exact polynomial of degree ≤ 2g, with class
    /// tags from the invariant checks.
    pub fn det_poly(&self) -> Result<SpectralPolynomial, ValidationError> {
        self.validate()?;
        Ok(self.det_poly_unchecked())
    }

    /// a(λ) = −λ det x(λ) without potential validation.
    pub fn det_poly_unchecked(&self) -> SpectralPolynomial {
        // x = [[α, β], [γ, −α]] entrywise in λ; −λ det = λ(α² + βγ).
        // With p_e(λ) = λ·entry(λ) a polynomial, λ(α²+βγ) = (p_α² + p_β p_γ)/λ.
        let pa = self.entry_poly_times_lambda(0, 0);
        let pb = self.entry_poly_times_lambda(0, 1);
        let pc = self.entry_poly_times_lambda(1, 0);
        let num = pa.mul(&pa).add(&pb.mul(&pc));
        // num is divisible by λ: its constant term is (ξ̂_{-1})₁₁² + β₋₁·(ξ̂_{-1})₂₁ = 0
        // structurally for strictly-upper residues; drop it.
        let mut coeffs = num.coeffs.clone();
        if !coeffs.is_empty() {
            coeffs.remove(0);
        }
        let poly = Poly::new(coeffs);
        SpectralPolynomial::classify(self.g, poly)
    }
}

/// Class tags for spectral polynomials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassTags {
    /// Reality + circle sign + a(0) ≠ 0.
    pub mg: bool,
    /// Strict negativity of λ^{-g} a on the unit circle.
    pub mg0: bool,
    /// Pairwise distinct roots.
    pub mg1: bool,
}

/// Spectral polynomial a ∈ `C^{2g}[λ]` with its genus bound and class tags.
#[derive(Clone, Debug)]
pub struct SpectralPolynomial {
    pub g: usize,
    pub poly: Poly,
    pub tags: ClassTags,
}

impl SpectralPolynomial {
    pub fn classify(g: usize, poly: Poly) -> Self {
        let mut sp = SpectralPolynomial {
            g,
            poly,
            tags: ClassTags::default(),
        };
        sp.tags = sp.compute_tags();
        sp
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.poly.eval(z)
    }

    /// Coefficient-wise defect of λ^{2g} conj(a(1/λ̄)) = a(λ), relative.
    pub fn reality_defect(&self) -> f64 {
        let n = 2 * self.g;
        let scale = self.poly.max_coeff_norm().max(1e-300);
        let mut worst = 0.0f64;
        for k in 0..=n {
            let d = (self.poly.coeff(n - k).conj() - self.poly.coeff(k)).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    /// max over circle samples of Re(λ^{-g} a) above 0 and |Im(λ^{-g} a)|.
    pub fn circle_sign_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let scale = self.poly.max_coeff_norm().max(1e-300);
        for k in 0..CIRCLE_SAMPLES {
            let th = 2.0 * core::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64;
            let lam = C64::from_polar(1.0, th);
            let v = self.eval(lam) * lam.powi(-(self.g as i32));
            worst = worst.max(v.re.max(0.0)).max(v.im.abs());
        }
        worst / scale
    }

    fn compute_tags(&self) -> ClassTags {
        let mut tags = ClassTags::default();
        let scale = self.poly.max_coeff_norm().max(1e-300);
        let a0_ok = self.poly.coeff(0).norm() > 1e-12 * scale;
        tags.mg = a0_ok && self.reality_defect() <= 1e-8 && self.circle_sign_defect() <= SIGN_TOL;
        if !tags.mg {
            return tags;
        }
        // Strict negativity on the circle.
        let mut strict = true;
        for k in 0..CIRCLE_SAMPLES {
            let th = 2.0 * core::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64;
            let lam = C64::from_polar(1.0, th);
            let v = self.eval(lam) * lam.powi(-(self.g as i32));
            if v.re > -SIGN_TOL * scale {
                strict = false;
                break;
            }
        }
        tags.mg0 = strict;
        if tags.mg0 {
            let roots = self.poly.roots();
            let sep = min_pairwise_distance(&roots);
            tags.mg1 = roots.len() < 2 || sep > PAIRING_TOL;
        }
        tags
    }

    /// Roots grouped into inversion pairs (α, 1/ᾱ) or unit-circle fixed
    /// points, with multiplicities. Errors if the pairing residual exceeds
    /// tolerance.
    pub fn paired_roots(&self) -> Result<Vec<PairedRoot>, PairingError> {
        let roots = self.poly.roots();
        if roots.is_empty() {
            return Ok(vec![]);
        }
        // Cluster equal roots.
        let mut clusters: Vec<(C64, usize)> = Vec::new();
        for r in roots {
            if let Some((c, m)) = clusters
                .iter_mut()
                .find(|(c, _)| (*c - r).norm() < PAIRING_TOL * (1.0 + c.norm()))
            {
                let mm = *m as f64;
                *c = (*c * mm + r) / (mm + 1.0);
                *m += 1;
            } else {
                clusters.push((r, 1));
            }
        }
        let mut out = Vec::new();
        let mut used = vec![false; clusters.len()];
        for i in 0..clusters.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let (r, m) = clusters[i];
            let mirror = C64::ONE / r.conj();
            if (r - mirror).norm() <= PAIRING_TOL * (1.0 + r.norm()) {
                out.push(PairedRoot {
                    root: r,
                    partner: None,
                    multiplicity: m,
                });
                continue;
            }
            // Nearest unused cluster to the mirror.
            let mut best: Option<(usize, f64)> = None;
            for (j, (c, _)) in clusters.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let d = (*c - mirror).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            match best {
                Some((j, d)) if d <= PAIRING_TOL * (1.0 + mirror.norm()) => {
                    used[j] = true;
                    if clusters[j].1 != m {
                        return Err(PairingError {
                            residual: d,
                            detail: "multiplicity mismatch within an inversion pair",
                        });
                    }
                    out.push(PairedRoot {
                        root: r,
                        partner: Some(clusters[j].0),
                        multiplicity: m,
                    });
                }
                best => {
                    return Err(PairingError {
                        residual: best.map_or(f64::INFINITY, |(_, d)| d),
                        detail: "no inversion partner within tolerance",
                    })
                }
            }
        }
        Ok(out)
    }
}

/// One inversion-symmetric root group of a(λ).
#[derive(Clone, Copy, Debug)]
pub struct PairedRoot {
    pub root: C64,
    /// None for a unit-circle fixed point of λ ↦ 1/λ̄.
    pub partner: Option<C64>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct PairingError {
    pub residual: f64,
    pub detail: &'static str,
}

impl core::fmt::Display for PairingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "root pairing failed ({}, residual {:.3e})",
            self.detail, self.residual
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PairingError {}

fn min_pairwise_distance(zs: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..zs.len() {
        for j in (i + 1)..zs.len() {
            m = m.min((zs[i] - zs[j]).norm());
        }
    }
    m
}

/// The flat annulus potential ξ = (i/4)·(λ^{-1} E₁₂ + E₂₁) ∈ P₀.
pub fn flat_potential() -> MatrixLaurent {
    let i4 = C64::new(0.0, 0.25);
    MatrixLaurent::new(
        0,
        C64::ONE,
        vec![
            Mat2::new(C64::ZERO, i4, C64::ZERO, C64::ZERO),
            Mat2::new(C64::ZERO, C64::ZERO, i4, C64::ZERO),
        ],
    )
    .expect("flat potential is a valid P_0 element")
}

/// Uniformly sampled valid potential in P_g (δ = 1).
///
/// Free data per Def. of P_g: residue scale b > 0, the coefficients ξ̂_d for
/// d < (g−1)/2, and a su(2)-valued middle coefficient when g is odd; the rest
/// is forced by star-reality.
pub fn random_potential(g: usize, rng: &mut Rng) -> MatrixLaurent {
    loop {
        let b = rng.range(0.2, 1.0);
        let mut coeffs = vec![Mat2::zero(); g + 2];
        coeffs[0] = Mat2::new(C64::ZERO, C64::new(0.0, b), C64::ZERO, C64::ZERO);
        let gi = g as i32;
        for d in -1..=gi {
            let mirror = gi - 1 - d;
            if d == -1 || d > mirror {
                continue;
            }
            let idx = (d + 1) as usize;
            if d < mirror {
                let m = Mat2::traceless(rng.next_c64(1.0), rng.next_c64(1.0), rng.next_c64(1.0));
                coeffs[idx] = m;
                coeffs[(mirror + 1) as usize] = -m.conj_transpose();
            } else {
                // Middle coefficient: traceless skew-hermitian.
                let w = rng.range(-1.0, 1.0);
                let u = rng.range(-1.0, 1.0);
                let v = rng.range(-1.0, 1.0);
                coeffs[idx] = Mat2::new(
                    C64::new(0.0, w),
                    C64::new(u, v),
                    C64::new(-u, v),
                    C64::new(0.0, -w),
                );
            }
        }
        // Mirror of the residue.
        coeffs[g + 1] = -coeffs[0].conj_transpose();
        if let Ok(x) = MatrixLaurent::new(g, C64::ONE, coeffs) {
            return x;
        }
        // Retry on the measure-zero degenerate draws (tr(ξ̂_{-1} ξ̂_0) ≈ 0).
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn star_is_minus_identity_on_flat() {
        // Direct symbolic evaluation: star(ξ_flat) has coefficients
        // (ξ̂_{g-1-d})*ᵗ = (ξ̂_{-d-1})*ᵗ for g = 0.
        let xi = flat_potential();
        let star = xi.star();
        assert!(star.add(&xi).max_coeff_norm() < 1e-15);
        assert!(xi.reality_defect() < 1e-15);
    }

    #[test]
    fn star_is_an_involution() {
        let mut rng = Rng::new(7);
        for g in 0..=3 {
            // Arbitrary coefficient arrays, not necessarily potentials.
            let coeffs = (0..g + 2)
                .map(|_| Mat2::traceless(rng.next_c64(1.0), rng.next_c64(1.0), rng.next_c64(1.0)))
                .collect::<Vec<_>>();
            let x = MatrixLaurent::new_unchecked(g, C64::ONE, coeffs).unwrap();
            let ss = x.star().star();
            assert!(ss.sub(&x).max_coeff_norm() < 1e-15);
        }
    }

    #[test]
    fn star_matches_pointwise_definition() {
        let mut rng = Rng::new(3);
        let x = random_potential(2, &mut rng);
        let star = x.star();
        for k in 0..8 {
            let lam = C64::from_polar(rng.range(0.5, 1.8), rng.range(0.0, 6.28));
            let lhs = star.eval(lam);
            let rhs = x
                .eval(C64::ONE / lam.conj())
                .conj_transpose()
                .scale(lam.powi(x.g() as i32 - 1));
            assert!((lhs - rhs).norm() < 1e-10, "sample {k}");
        }
    }

    #[test]
    fn flat_det_poly_is_minus_one_sixteenth() {
        let a = flat_potential().det_poly().unwrap();
        assert_eq!(a.poly.degree(), Some(0));
        assert!((a.poly.coeff(0) - c(-1.0 / 16.0, 0.0)).norm() < 1e-15);
        assert!(a.tags.mg && a.tags.mg0 && a.tags.mg1);
        assert!(a.paired_roots().unwrap().is_empty());
    }

    /// Genus-1 field of the circle-foliated family: ζ = (i/4)[[−2ω_y, e^ω λ^{-1} + γ̄ e^{-ω}], [γ e^{-ω} + e^ω λ, 2ω_y]].
    fn genus1_zeta(omega: f64, omega_y: f64, gamma: C64) -> MatrixLaurent {
        let i4 = c(0.0, 0.25);
        let ew = omega.exp();
        let emw = (-omega).exp();
        let c_m1 = Mat2::new(C64::ZERO, i4 * ew, C64::ZERO, C64::ZERO);
        let c_0 = Mat2::new(
            i4 * (-2.0 * omega_y),
            i4 * gamma.conj() * emw,
            i4 * gamma * emw,
            i4 * (2.0 * omega_y),
        );
        let c_1 = Mat2::new(C64::ZERO, C64::ZERO, i4 * ew, C64::ZERO);
        MatrixLaurent::new(1, C64::ONE, vec![c_m1, c_0, c_1]).unwrap()
    }

    #[test]
    fn genus1_det_poly_matches_closed_form() {
        // a(λ) = −(1/16)(γ + 2(1−2d)λ + γ̄λ²) on the level set 2ω_y² + cosh 2ω = 1−2d.
        let d = -1.0f64;
        let omega = 0.0;
        let omega_y = 1.0; // 2·1 + 1 = 3 = 1 − 2d ✓
        let a = genus1_zeta(omega, omega_y, C64::ONE).det_poly().unwrap();
        let want = [-1.0 / 16.0, -2.0 * (1.0 - 2.0 * d) / 16.0, -1.0 / 16.0];
        for (k, w) in want.iter().enumerate() {
            assert!((a.poly.coeff(k) - c(*w, 0.0)).norm() < 1e-14, "coeff {k}");
        }
        // Roots −3 ± 2√2, i.e. (2d−1 ± 2√(d²−d))γ at d = −1.
        let pairs = a.paired_roots().unwrap();
        assert_eq!(pairs.len(), 1);
        let s = 2.0 * 2.0f64.sqrt();
        let (r, p) = (pairs[0].root, pairs[0].partner.unwrap());
        let (lo, hi) = if r.re < p.re { (r, p) } else { (p, r) };
        assert!((lo - c(-3.0 - s, 0.0)).norm() < 1e-12);
        assert!((hi - c(-3.0 + s, 0.0)).norm() < 1e-12);
        // Product of the pair is 1 (inversion symmetry with real roots).
        assert!((r * p - C64::ONE).norm() < 1e-12);
    }

    #[test]
    fn genus2_preset_roots_pair_by_inversion() {
        // a = (1/16)(λ⁴ − 34λ² + 1): roots −3±2√2 and 3±2√2 in two pairs.
        let poly = Poly::new(vec![
            c(1.0 / 16.0, 0.0),
            C64::ZERO,
            c(-34.0 / 16.0, 0.0),
            C64::ZERO,
            c(1.0 / 16.0, 0.0),
        ]);
        let a = SpectralPolynomial::classify(2, poly);
        assert!(a.tags.mg && a.tags.mg0 && a.tags.mg1);
        let pairs = a.paired_roots().unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            let q = p.partner.unwrap();
            assert!((p.root * q - C64::ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_broken_residue_ray() {
        // Rotate the residue off the i·ℝ⁺ ray while keeping star-reality
        // intact (the mirror coefficient is adjusted consistently).
        let mut xi = flat_potential();
        xi.coeff_mut(-1).0[0][1] = c(0.25, 0.0);
        *xi.coeff_mut(0) = -xi.coeff(-1).conj_transpose();
        let err = xi.validate().unwrap_err();
        assert_eq!(err.invariant_name(), "residue_ray");
    }

    #[test]
    fn validation_rejects_broken_reality() {
        let mut rng = Rng::new(11);
        let mut xi = random_potential(1, &mut rng);
        xi.coeff_mut(1).0[1][0] += c(0.1, 0.0);
        let err = xi.validate().unwrap_err();
        assert_eq!(err.invariant_name(), "star_reality");
    }

    #[test]
    fn class_tags_are_monotone() {
        let mut rng = Rng::new(5);
        for g in 0..=2usize {
            for _ in 0..40 {
                let xi = random_potential(g, &mut rng);
                let a = xi.det_poly().unwrap();
                if a.tags.mg1 {
                    assert!(a.tags.mg0);
                }
                if a.tags.mg0 {
                    assert!(a.tags.mg);
                }
                assert!(a.tags.mg, "random potentials always satisfy M_g");
                // det_poly output satisfies the reality condition essentially
                // exactly, well inside the 1e−12 budget.
                assert!(a.reality_defect() <= 1e-12, "{}", a.reality_defect());
            }
        }
    }

    #[test]
    fn pairing_rejects_asymmetric_roots() {
        // Roots at 0.5 and 3 are not inversion partners (1/0.5 = 2 ≠ 3).
        let p = Poly::from_roots(C64::ONE, &[c(0.5, 0.0), c(3.0, 0.0)]);
        let a = SpectralPolynomial::classify(1, p);
        let err = a.paired_roots().unwrap_err();
        assert!(err.residual > 0.1);
    }

    #[test]
    fn coefficient_bound_holds_for_random_potentials() {
        // Properness bound: ‖ξ̂_i‖_op ≤ sup_{|λ|=1} √(−λ^{-g} a(λ)).
        let mut rng = Rng::new(2024);
        for g in 0..=2usize {
            for _ in 0..25 {
                let xi = random_potential(g, &mut rng);
                let a = xi.det_poly().unwrap();
                let mut sup = 0.0f64;
                for k in 0..CIRCLE_SAMPLES {
                    let th = 2.0 * core::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64;
                    let lam = C64::from_polar(1.0, th);
                    sup = sup.max(a.eval(lam).norm().sqrt());
                }
                for (i, m) in xi.coeffs().iter().enumerate() {
                    assert!(
                        m.op_norm() <= sup + 1e-8,
                        "g={g} coeff {i}: {} > {}",
                        m.op_norm(),
                        sup
                    );
                }
            }
        }
    }
}
