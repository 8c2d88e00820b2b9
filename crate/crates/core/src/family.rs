//! Built-in presets and oracles: the explicit genus-0/1/2 spectral data of
//! the circle-foliated annulus family, the flat-annulus closed-form frame,
//! the genus-1 polynomial Killing field, and the elliptic ODE system
//!
//! ```text
//!   −f_x² = f⁴ + (1+c−d)f² + c,    −f_xx = 2f³ + (1+c−d)f
//!   −g_y² = g⁴ + (1+d−c)g² + d,    −g_yy = 2g³ + (1+d−c)g
//!   sinh ω = (f_x + g_y) / (1 + f² + g²)
//! ```
//!
//! whose solutions ω feed the symbolic hierarchy through finite-difference
//! jets (∂_z = (∂_x − i∂_y)/2 on a 9-point stencil, order-2 accurate).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{solve_closing, ClosingData, ClosingError};
use crate::hierarchy::Deriv;
use crate::loop_algebra::{flat_potential, MatrixLaurent, SpectralPolynomial};
use crate::mat2::Mat2;
use crate::poly::Poly;

/// Parameters of the elliptic reduction; both must be negative.
#[derive(Clone, Copy, Debug)]
pub struct AbreschParameters {
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Debug)]
pub enum FamilyError {
    ParameterRange(&'static str),
    Closing(ClosingError),
}

impl core::fmt::Display for FamilyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FamilyError::ParameterRange(s) => write!(f, "parameter out of range: {s}"),
            FamilyError::Closing(e) => write!(f, "closing solve failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FamilyError {}

impl AbreschParameters {
    pub fn new(c: f64, d: f64) -> Result<Self, FamilyError> {
        if !(c < 0.0 && d < 0.0) {
            return Err(FamilyError::ParameterRange("need c < 0 and d < 0"));
        }
        Ok(AbreschParameters { c, d })
    }

    /// Discriminant (1+c−d)² − 4c = (1+d−c)² − 4d.
    pub fn disc(&self) -> f64 {
        let t = 1.0 + self.c - self.d;
        t * t - 4.0 * self.c
    }

    /// Squared critical-point values: f₀² = (−1+d−c+√Δ)/2 and
    /// g₀² = (−1+c−d+√Δ)/2. These are the positive turning points of the two
    /// quartics, i.e. f₀² solves f⁴ + (1+c−d)f² + c = 0, which is what makes
    /// the first integrals vanish identically along the flow.
    pub fn critical_squares(&self) -> (f64, f64) {
        let s = self.disc().sqrt();
        (
            0.5 * (-1.0 + self.d - self.c + s),
            0.5 * (-1.0 + self.c - self.d + s),
        )
    }

    /// Critical-point values f₀ = f(x₀) = −∂_xω(x₀) and g₀ = g(y₀).
    pub fn critical_values(&self) -> (f64, f64) {
        let (fs, gs) = self.critical_squares();
        (fs.sqrt(), gs.sqrt())
    }
}

/// Closed-form extended frame of the flat annulus: entries in
/// cos/sin of (1/4)(z λ^{-1/2} + z̄ λ^{1/2}).
pub fn flat_frame(z: C64, lambda: C64) -> Mat2 {
    let sq = lambda.sqrt();
    let th = (z / sq + z.conj() * sq) / 4.0;
    let (s, c) = (th.sin(), th.cos());
    Mat2::new(c, C64::I * s / sq, C64::I * sq * s, c)
}

/// The genus-1 polynomial Killing field
/// ζ = (i/4)[[−2ω_y, e^ω λ^{-1} + γ̄ e^{-ω}], [γ e^{-ω} + e^ω λ, 2ω_y]].
pub fn genus1_killing_field(omega: f64, omega_y: f64, gamma: C64) -> MatrixLaurent {
    let i4 = C64::new(0.0, 0.25);
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
    MatrixLaurent::new(1, C64::ONE, vec![c_m1, c_0, c_1])
        .expect("printed genus-1 field is a valid potential")
}

/// Genus-2 Killing field from the elliptic-reduction entries, evaluated at
/// the critical point ω = ∂_x f = ∂_y g = 0 (where ω_zz = ω_z̄z̄ = 0 and the
/// entries close in terms of f₀, g₀ alone).
pub fn genus2_killing_field(p: &AbreschParameters) -> MatrixLaurent {
    let (f0, g0) = p.critical_values();
    let i = C64::I;
    let i4 = C64::new(0.0, 0.25);
    let wz = C64::new(-f0 / 2.0, g0 / 2.0); // ω_z = −(f₀ − i g₀)/2
    let wzb = wz.conj();
    // B₀ = ω_z̄² − ω_z², C₁ = ω_z² − ω_z̄² at the critical point (e^{±ω} = 1).
    let b0 = wzb * wzb - wz * wz;
    let c1 = -b0;
    let xm1 = Mat2::new(C64::ZERO, i4, C64::ZERO, C64::ZERO);
    let x0 = Mat2::new(wz, i * b0, -i4, -wz);
    let x1 = Mat2::new(-wzb, -i4, i * c1, wzb);
    let x2 = Mat2::new(C64::ZERO, C64::ZERO, i4, C64::ZERO);
    MatrixLaurent::new(2, C64::ONE, vec![xm1, x0, x1, x2])
        .expect("critical-point genus-2 field is a valid potential")
}

/// Spectral coefficients of the genus-2 family:
/// a₀ = a₄ = 1/16, a₁ = a₃ = (f₀² − g₀²)/4, a₂ = −1/8 − g₀²/2 − f₀²/2 − f₀²g₀².
pub fn genus2_coefficients(c: f64, d: f64) -> Result<SpectralPolynomial, FamilyError> {
    let p = AbreschParameters::new(c, d)?;
    if p.disc() < 0.0 {
        return Err(FamilyError::ParameterRange("discriminant negative"));
    }
    let (f0sq, g0sq) = p.critical_squares();
    let a0 = 1.0 / 16.0;
    let a1 = (f0sq - g0sq) / 4.0;
    let a2 = -0.125 - 0.5 * g0sq - 0.5 * f0sq - f0sq * g0sq;
    let poly = Poly::new(vec![
        C64::new(a0, 0.0),
        C64::new(a1, 0.0),
        C64::new(a2, 0.0),
        C64::new(a1, 0.0),
        C64::new(a0, 0.0),
    ]);
    Ok(SpectralPolynomial::classify(2, poly))
}

/// Roots of the genus-2 family in closed form:
/// −1 − 2f₀² ± 2√(f₀²+f₀⁴) and 1 + 2g₀² ± 2√(g₀²+g₀⁴).
pub fn genus2_roots(c: f64, d: f64) -> Result<[f64; 4], FamilyError> {
    let p = AbreschParameters::new(c, d)?;
    let (f0sq, g0sq) = p.critical_squares();
    let rf = (f0sq + f0sq * f0sq).sqrt();
    let rg = (g0sq + g0sq * g0sq).sqrt();
    Ok([
        -1.0 - 2.0 * f0sq - 2.0 * rf,
        -1.0 - 2.0 * f0sq + 2.0 * rf,
        1.0 + 2.0 * g0sq - 2.0 * rg,
        1.0 + 2.0 * g0sq + 2.0 * rg,
    ])
}

// ---------------------------------------------------------------------------
// Elliptic ODE tracks and jets.

/// Samples of a scalar ODE solution on [−L, L] with uniform step.
#[derive(Clone, Debug)]
pub struct Track {
    pub h: f64,
    pub n_half: usize,
    /// (value, derivative) at node k − n_half.
    pub samples: Vec<(f64, f64)>,
}

impl Track {
    pub fn at(&self, k: i64) -> (f64, f64) {
        self.samples[(k + self.n_half as i64) as usize]
    }

    pub fn coord(&self, k: i64) -> f64 {
        k as f64 * self.h
    }

    pub fn range(&self) -> i64 {
        self.n_half as i64
    }
}

/// RK4 both ways from (v0, dv0) at 0 for v'' = rhs(v).
fn integrate_track(rhs: impl Fn(f64) -> f64, v0: f64, dv0: f64, half_extent: f64, h: f64) -> Track {
    let n_half = (half_extent / h).ceil() as usize;
    let mut samples = vec![(0.0, 0.0); 2 * n_half + 1];
    samples[n_half] = (v0, dv0);
    let step = |state: (f64, f64), dt: f64| -> (f64, f64) {
        let f = |s: (f64, f64)| (s.1, rhs(s.0));
        let k1 = f(state);
        let k2 = f((state.0 + dt / 2.0 * k1.0, state.1 + dt / 2.0 * k1.1));
        let k3 = f((state.0 + dt / 2.0 * k2.0, state.1 + dt / 2.0 * k2.1));
        let k4 = f((state.0 + dt * k3.0, state.1 + dt * k3.1));
        (
            state.0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            state.1 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    };
    // Substep for accuracy independent of the sampling step.
    let substeps = (h / 1e-3).ceil().max(1.0) as usize;
    let dt = h / substeps as f64;
    let mut s = samples[n_half];
    for k in 1..=n_half {
        for _ in 0..substeps {
            s = step(s, dt);
        }
        samples[n_half + k] = s;
    }
    s = samples[n_half];
    for k in 1..=n_half {
        for _ in 0..substeps {
            s = step(s, -dt);
        }
        samples[n_half - k] = s;
    }
    Track { h, n_half, samples }
}

/// Sampled solution of the elliptic system with critical-point initial data
/// f(0) = f₀, f'(0) = 0, g(0) = g₀, g'(0) = 0.
#[derive(Clone, Debug)]
pub struct AbreschSolution {
    pub params: AbreschParameters,
    pub f: Track,
    pub g: Track,
}

/// Integrates the two decoupled second-order ODEs; the second-order form
/// passes turning points smoothly. First integrals serve as drift monitors.
pub fn abresch_solve(
    params: AbreschParameters,
    half_extent: f64,
    h: f64,
) -> Result<AbreschSolution, FamilyError> {
    if h <= 0.0 || half_extent <= 0.0 {
        return Err(FamilyError::ParameterRange("grid steps must be positive"));
    }
    let (f0, g0) = params.critical_values();
    let kf = 1.0 + params.c - params.d;
    let kg = 1.0 + params.d - params.c;
    let f = integrate_track(move |v| -2.0 * v * v * v - kf * v, f0, 0.0, half_extent, h);
    let g = integrate_track(move |v| -2.0 * v * v * v - kg * v, g0, 0.0, half_extent, h);
    Ok(AbreschSolution { params, f, g })
}

impl AbreschSolution {
    /// sinh ω = (f_x + g_y)/(1 + f² + g²) at node (kx, ky).
    pub fn omega(&self, kx: i64, ky: i64) -> f64 {
        let (fv, fp) = self.f.at(kx);
        let (gv, gp) = self.g.at(ky);
        ((fp + gp) / (1.0 + fv * fv + gv * gv)).asinh()
    }

    /// Largest first-integral drift along both tracks.
    pub fn first_integral_defect(&self) -> f64 {
        let kf = 1.0 + self.params.c - self.params.d;
        let kg = 1.0 + self.params.d - self.params.c;
        let mut worst = 0.0f64;
        for (v, dv) in &self.f.samples {
            worst = worst.max((dv * dv + v.powi(4) + kf * v * v + self.params.c).abs());
        }
        for (v, dv) in &self.g.samples {
            worst = worst.max((dv * dv + v.powi(4) + kg * v * v + self.params.d).abs());
        }
        worst
    }

    /// Mixed partial ∂_x^a ∂_y^b ω at node (kx, ky) by 9-point tensor
    /// finite differences.
    pub fn xy_partial(&self, kx: i64, ky: i64, a: usize, b: usize) -> f64 {
        let r = 4i64;
        debug_assert!(a <= 8 && b <= 8);
        let offsets: Vec<f64> = (-r..=r).map(|k| k as f64).collect();
        let wx = fornberg_weights(a, &offsets);
        let wy = fornberg_weights(b, &offsets);
        let mut acc = 0.0;
        for (ix, wxi) in wx.iter().enumerate() {
            if *wxi == 0.0 {
                continue;
            }
            for (iy, wyj) in wy.iter().enumerate() {
                if *wyj == 0.0 {
                    continue;
                }
                acc += wxi * wyj * self.omega(kx + ix as i64 - r, ky + iy as i64 - r);
            }
        }
        acc / self.f.h.powi(a as i32) / self.g.h.powi(b as i32)
    }

    /// Pure ∂_z^m and ∂_z̄^m jets up to `max_order`, via
    /// ∂_z = (∂_x − i∂_y)/2 and the binomial expansion.
    pub fn z_jets(&self, kx: i64, ky: i64, max_order: usize) -> BTreeMap<Deriv, C64> {
        let mut xy = BTreeMap::new();
        for total in 1..=max_order {
            for a in 0..=total {
                let b = total - a;
                xy.insert((a, b), self.xy_partial(kx, ky, a, b));
            }
        }
        let mut out = BTreeMap::new();
        for m in 1..=max_order {
            let mut dz = C64::ZERO;
            let mut dzb = C64::ZERO;
            for k in 0..=m {
                let binom = binomial(m, k) as f64;
                let part = xy[&(m - k, k)];
                dz += C64::new(binom * part, 0.0) * (-C64::I).powi(k as i32);
                dzb += C64::new(binom * part, 0.0) * C64::I.powi(k as i32);
            }
            let scale = 0.5f64.powi(m as i32);
            out.insert(Deriv::dz(m as u32), dz * scale);
            out.insert(Deriv::dzb(m as u32), dzb * scale);
        }
        out
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Fornberg weights for the m-th derivative at 0 on the given node offsets
/// (in step units; divide by h^m for physical grids).
pub fn fornberg_weights(m: usize, offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0f64; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0f64;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0f64;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

// ---------------------------------------------------------------------------
// Genus-1 profile (one-variable reduction).

/// ω(t) of the genus-1 family from −b_t² = (b²+1)(b²+d), sinh ω = b_t/(1+b²),
/// started at b(0) = 0, b_t(0) = √(−d) (the symmetric point ω(0) = ω_max).
pub fn genus1_profile(d: f64, half_extent: f64, h: f64) -> Result<Track, FamilyError> {
    if !(d < 0.0) {
        return Err(FamilyError::ParameterRange("need d < 0"));
    }
    // b'' = −b(2b² + 1 + d); store (b, b').
    Ok(integrate_track(
        move |v| -v * (2.0 * v * v + 1.0 + d),
        0.0,
        (-d).sqrt(),
        half_extent,
        h,
    ))
}

/// ω value along the genus-1 profile.
pub fn genus1_omega(track: &Track, k: i64) -> f64 {
    let (b, bp) = track.at(k);
    (bp / (1.0 + b * b)).asinh()
}

// ---------------------------------------------------------------------------
// Presets.

/// Selector for the built-in spectral data.
#[derive(Clone, Copy, Debug)]
pub enum PresetSpec {
    Genus0,
    /// Positive-root genus-1 annulus (a-roots α, 1/α), foliated by geodesics.
    Genus1Helicoidal {
        alpha: f64,
    },
    /// Negative-root genus-1 annulus (a-roots −β, −1/β), rotational.
    Genus1Rotational {
        beta: f64,
    },
    /// Genus-2 annulus by root parameters α, β ∈ (0,1).
    Genus2Roots {
        alpha: f64,
        beta: f64,
    },
    /// Genus-2 annulus by elliptic parameters c, d < 0.
    Genus2Abresch {
        c: f64,
        d: f64,
    },
}

/// A built-in family member: spectral polynomial, closing data and (when the
/// printed Killing fields provide one) a potential.
#[derive(Clone, Debug)]
pub struct FamilyPreset {
    pub genus: usize,
    pub a: SpectralPolynomial,
    pub closing: ClosingData,
    pub potential: Option<MatrixLaurent>,
    /// Defect of the additional symmetry λ^{2g} a(1/λ) = a(λ).
    pub additional_symmetry_defect: f64,
}

/// d < 0 of the genus-1 level set for root parameter r ∈ (0,1):
/// r + 1/r = 2(1−2d).
pub fn genus1_d_of_root(r: f64) -> f64 {
    -(1.0 - r) * (1.0 - r) / (4.0 * r)
}

/// ω at the symmetric point of the genus-1 level set: cosh 2ω₀ = 1 − 2d.
pub fn genus1_omega_max(d: f64) -> f64 {
    0.5 * (1.0 - 2.0 * d).acosh()
}

fn real_poly(coeffs: &[f64]) -> Poly {
    Poly::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
}

/// Builds a preset: a from the printed product formulas, b and τ from the
/// closing solver, the potential from the printed Killing fields.
pub fn preset(spec: PresetSpec) -> Result<FamilyPreset, FamilyError> {
    let in_unit = |v: f64| v > 0.0 && v < 1.0;
    let (genus, a, potential): (usize, SpectralPolynomial, Option<MatrixLaurent>) = match spec {
        PresetSpec::Genus0 => (
            0,
            SpectralPolynomial::classify(0, real_poly(&[-1.0 / 16.0])),
            Some(flat_potential()),
        ),
        PresetSpec::Genus1Helicoidal { alpha } => {
            if !in_unit(alpha) {
                return Err(FamilyError::ParameterRange("alpha must lie in (0,1)"));
            }
            let d = genus1_d_of_root(alpha);
            let w0 = genus1_omega_max(d);
            let a = SpectralPolynomial::classify(
                1,
                real_poly(&[
                    1.0 / 16.0,
                    -(1.0 + alpha * alpha) / (16.0 * alpha),
                    1.0 / 16.0,
                ]),
            );
            (1, a, Some(genus1_killing_field(w0, 0.0, -C64::ONE)))
        }
        PresetSpec::Genus1Rotational { beta } => {
            if !in_unit(beta) {
                return Err(FamilyError::ParameterRange("beta must lie in (0,1)"));
            }
            let d = genus1_d_of_root(beta);
            let w0 = genus1_omega_max(d);
            let a = SpectralPolynomial::classify(
                1,
                real_poly(&[
                    -1.0 / 16.0,
                    -(1.0 + beta * beta) / (16.0 * beta),
                    -1.0 / 16.0,
                ]),
            );
            (1, a, Some(genus1_killing_field(w0, 0.0, C64::ONE)))
        }
        PresetSpec::Genus2Roots { alpha, beta } => {
            if !in_unit(alpha) || !in_unit(beta) {
                return Err(FamilyError::ParameterRange("alpha, beta must lie in (0,1)"));
            }
            // Root parameters back to critical squares: g₀² = (1−α)²/4α,
            // f₀² = (1−β)²/4β, then c = −f₀²(1+g₀²), d = −g₀²(1+f₀²).
            let g0sq = (1.0 - alpha) * (1.0 - alpha) / (4.0 * alpha);
            let f0sq = (1.0 - beta) * (1.0 - beta) / (4.0 * beta);
            let c = -f0sq * (1.0 + g0sq);
            let d = -g0sq * (1.0 + f0sq);
            let params = AbreschParameters::new(c, d)?;
            let a = genus2_coefficients(c, d)?;
            (2, a, Some(genus2_killing_field(&params)))
        }
        PresetSpec::Genus2Abresch { c, d } => {
            let params = AbreschParameters::new(c, d)?;
            let a = genus2_coefficients(c, d)?;
            (2, a, Some(genus2_killing_field(&params)))
        }
    };
    let mut symdef = 0.0f64;
    let n = 2 * genus;
    for k in 0..=n {
        symdef = symdef.max((a.poly.coeff(k) - a.poly.coeff(n - k)).norm());
    }
    let closing = solve_closing(&a, None).map_err(FamilyError::Closing)?;
    Ok(FamilyPreset {
        genus,
        a,
        closing,
        potential,
        additional_symmetry_defect: symdef,
    })
}
