//! Spectral curves ν² = λ^{-1}a(λ), the monodromy differential and the
//! period-closing machinery.
//!
//! For a(λ) with pairwise distinct roots the closing differential is the
//! Ansatz φ = b dλ/(νλ²): reality pins b_{g+1-k} = −conj(b_k), the pole
//! asymptotics at λ = 0 pin b(0) = τe^{iΘ}/32, and the g real conditions
//! Re ∫_{[α_i, 1/ᾱ_i]} φ = 0 determine the rest through a real linear solve.
//! The scale of τ is then fixed by the quantization h(1) ∈ iπZ (smallest
//! |τ| > 0). The antiderivative h (with σ*h = −h) is computed by adaptive
//! branch-tracked contour integration: Gauss–Legendre panels on piecewise
//! linear paths, square-root substitutions at branch-point endpoints, and a
//! regularized first leg from λ = 0 where h ~ (iτ/4)e^{iΘ/2}λ^{-1/2}.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::loop_algebra::{MatrixLaurent, PairedRoot, SpectralPolynomial};
use crate::poly::Poly;

/// Tolerance for membership of h-values in iπZ.
pub const QUANTIZATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum ClosingError {
    /// Root pairing under inversion failed.
    Pairing(f64),
    /// A root lies on (or a double root off) the unit circle: singular curve.
    SingularCurve,
    /// |a(0)| must equal 1/16 for spectral data.
    A0Normalization { modulus: f64 },
    /// The real linear system for b is singular.
    SingularSystem,
    /// A path leg crosses a branch cut.
    PathCrossesCut,
    /// Branch continuation failed to stabilize under refinement.
    NonConvergent,
    /// h(1) came out with a non-imaginary part beyond tolerance.
    QuantizationUnreachable { re_part: f64 },
}

impl core::fmt::Display for ClosingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ClosingError::Pairing(r) => write!(f, "inversion pairing failed (residual {r:.3e})"),
            ClosingError::SingularCurve => write!(f, "singular spectral curve (repeated root)"),
            ClosingError::A0Normalization { modulus } => {
                write!(f, "|a(0)| = {modulus:.6e}, expected 1/16")
            }
            ClosingError::SingularSystem => write!(f, "closing linear system is singular"),
            ClosingError::PathCrossesCut => write!(f, "integration path crosses a branch cut"),
            ClosingError::NonConvergent => write!(f, "branch continuation did not converge"),
            ClosingError::QuantizationUnreachable { re_part } => {
                write!(
                    f,
                    "h(1) has real part {re_part:.3e}; cannot quantize by rescaling tau"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ClosingError {}

/// Branch cut of the curve: the segment [inner, outer] with outer = 1/conj(inner).
#[derive(Clone, Copy, Debug)]
pub struct Cut {
    pub inner: C64,
    pub outer: C64,
}

/// The hyperelliptic curve ν² = λ^{-1} a(λ) with its branch data.
#[derive(Clone, Debug)]
pub struct SpectralCurve {
    pub a: SpectralPolynomial,
    /// Finite branch points grouped by inversion.
    pub pairs: Vec<PairedRoot>,
    /// Genus by Riemann–Hurwitz: (#branch points − 2)/2 with the two points
    /// over λ = 0, ∞ included.
    pub genus: usize,
    /// |a(1)| must be negative real for the involution η to act freely.
    pub eta_free_defect: f64,
}

/// Builds the curve: paired branch points plus the two points over 0, ∞.
pub fn build_curve(a: &SpectralPolynomial) -> Result<SpectralCurve, ClosingError> {
    let pairs = a
        .paired_roots()
        .map_err(|e| ClosingError::Pairing(e.residual))?;
    let n_finite: usize = pairs
        .iter()
        .map(|p| p.multiplicity * if p.partner.is_some() { 2 } else { 1 })
        .sum();
    let genus = (n_finite + 2) / 2 - 1;
    let a1 = a.eval(C64::ONE);
    let eta_free_defect = a1.im.abs() + a1.re.max(0.0);
    Ok(SpectralCurve {
        a: a.clone(),
        pairs,
        genus,
        eta_free_defect,
    })
}

/// Closing data (a, b) with period τ, phase Θ and quantization diagnostics.
#[derive(Clone, Debug)]
pub struct ClosingData {
    pub a: SpectralPolynomial,
    pub b: Poly,
    pub tau: C64,
    /// Phase of a(0) = −(1/16)e^{iΘ}.
    pub theta: f64,
    /// |h − iπZ| at λ = 1 and at every finite branch point.
    pub quantization_defects: Vec<(C64, f64)>,
    /// |∫_{cut} φ| after the solve, one per cut.
    pub cut_integral_defects: Vec<f64>,
    /// ∞-norm condition estimate of the real closing system.
    pub condition: f64,
}

impl ClosingData {
    /// b-reality defect: max_k |b_{g+1-k} + conj(b_k)|.
    pub fn b_reality_defect(&self) -> f64 {
        let m = self.a.g + 1;
        let mut worst = 0.0f64;
        for k in 0..=m {
            worst = worst.max((self.b.coeff(m - k) + self.b.coeff(k).conj()).norm());
        }
        worst
    }

    /// |b(0) − τ e^{iΘ}/32| and the deviation of b(0) from the e^{iΘ/2}·ℝ ray.
    pub fn b0_defect(&self) -> (f64, f64) {
        let want = self.tau * C64::from_polar(1.0 / 32.0, self.theta);
        let ray = (self.b.coeff(0) * C64::from_polar(1.0, -self.theta / 2.0))
            .im
            .abs();
        ((self.b.coeff(0) - want).norm(), ray)
    }

    pub fn cuts(&self) -> Vec<Cut> {
        cuts_of(&self.a)
    }
}

fn cuts_of(a: &SpectralPolynomial) -> Vec<Cut> {
    let mut cuts = Vec::new();
    if let Ok(pairs) = a.paired_roots() {
        for p in pairs {
            if let Some(partner) = p.partner {
                let (inner, outer) = if p.root.norm() <= partner.norm() {
                    (p.root, partner)
                } else {
                    (partner, p.root)
                };
                cuts.push(Cut { inner, outer });
            }
        }
    }
    cuts
}

// ---------------------------------------------------------------------------
// Quadrature and branch continuation.

/// 32-point Gauss–Legendre nodes/weights on [-1, 1] (positive half; mirror).
const GL32_X: [f64; 16] = [
    0.048307665687738316,
    0.144471961582796493,
    0.239287362252137075,
    0.331868602282127650,
    0.421351276130635345,
    0.506899908932229390,
    0.587715757240762329,
    0.663044266930215201,
    0.732182118740289680,
    0.794483795967942407,
    0.849367613732569970,
    0.896321155766052124,
    0.934906075937739689,
    0.964762255587506430,
    0.985611511545268335,
    0.997263861849481564,
];
const GL32_W: [f64; 16] = [
    0.096540088514727801,
    0.095638720079274859,
    0.093844399080804566,
    0.091173878695763885,
    0.087652093004403811,
    0.083311924226946755,
    0.078193895787070306,
    0.072345794108848506,
    0.065822222776361847,
    0.058684093478535547,
    0.050998059262376176,
    0.042835898022226681,
    0.034273862913021433,
    0.025392065309262059,
    0.016274394730905671,
    0.007018610009470097,
];

/// ∫₀¹ f(t) dt by composite 32-point Gauss–Legendre on `panels` subintervals.
fn gl_integrate(mut f: impl FnMut(f64) -> C64, panels: usize) -> C64 {
    let mut acc = C64::ZERO;
    for p in 0..panels {
        let a = p as f64 / panels as f64;
        let b = (p + 1) as f64 / panels as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for k in 0..16 {
            let xp = mid + half * GL32_X[k];
            let xm = mid - half * GL32_X[k];
            acc += (f(xp) + f(xm)) * C64::new(GL32_W[k] * half, 0.0);
        }
    }
    acc
}

/// Branch director for √(w(t)) along t ∈ [0, 1]: the continued values are
/// stored on a fine grid and the branch at arbitrary t is the square root
/// closest to the nearest stored value, which keeps the selection exact even
/// where the principal branch jumps between grid nodes. `w` must be
/// nonvanishing on the sampled set.
struct BranchDirector {
    values: Vec<C64>,
}

impl BranchDirector {
    /// `start`: desired branch value at t = 0 (up to accuracy of the scale);
    /// used to seed the continuation.
    fn build(
        w: &dyn Fn(f64) -> C64,
        start: Option<C64>,
        mut n: usize,
    ) -> Result<BranchDirector, ClosingError> {
        loop {
            let mut values = Vec::with_capacity(n + 1);
            let mut ok = true;
            let mut prev: Option<C64> = None;
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let p = w(t).sqrt();
                let chosen = match prev {
                    None => match start {
                        Some(s) => {
                            if (p - s).norm() <= (p + s).norm() {
                                p
                            } else {
                                -p
                            }
                        }
                        None => p,
                    },
                    Some(pv) => {
                        if (p - pv).norm() <= (p + pv).norm() {
                            p
                        } else {
                            -p
                        }
                    }
                };
                if let Some(pv) = prev {
                    let step = (chosen - pv).norm();
                    if step > 0.5 * (chosen.norm() + pv.norm()) {
                        ok = false;
                        break;
                    }
                }
                values.push(chosen);
                prev = Some(chosen);
            }
            if ok {
                return Ok(BranchDirector { values });
            }
            n *= 2;
            if n > 1 << 16 {
                return Err(ClosingError::NonConvergent);
            }
        }
    }

    fn value(&self, w: C64, t: f64) -> C64 {
        let n = self.values.len() - 1;
        let idx = ((t * n as f64).round() as usize).min(n);
        let p = w.sqrt();
        let anchor = self.values[idx];
        if (p - anchor).norm() <= (p + anchor).norm() {
            p
        } else {
            -p
        }
    }
}

/// ∫_{cut} λ^k/(ν λ²) dλ for k = 0..=kmax along the straight segment, with
/// the sin-substitution absorbing both endpoint singularities. The overall
/// branch sign of ν is arbitrary but consistent across k.
fn cut_monomial_integrals(
    a: &SpectralPolynomial,
    cut: &Cut,
    kmax: usize,
) -> Result<Vec<C64>, ClosingError> {
    // q = a / ((λ-inner)(λ-outer)), exact division.
    let div = Poly::from_roots(C64::ONE, &[cut.inner, cut.outer]);
    let (q, rem) = a.poly.div_rem(&div);
    if rem.max_coeff_norm() > 1e-9 * a.poly.max_coeff_norm() {
        return Err(ClosingError::SingularCurve);
    }
    let mid = (cut.inner + cut.outer) / 2.0;
    let rad = (cut.outer - cut.inner) / 2.0;
    let lam_of = move |t: f64| -> C64 {
        // t ∈ [0,1] ↦ u ∈ (−π/2, π/2)
        let u = core::f64::consts::PI * (t - 0.5);
        mid + rad * C64::new(u.sin(), 0.0)
    };
    // ν = rad · cos(u) · S, S = √(−q(λ)/λ); nonvanishing on the open cut.
    let s_fun = move |t: f64| -> C64 {
        let lam = lam_of(t);
        -q.eval(lam) / lam
    };
    let director = BranchDirector::build(&s_fun, None, 256)?;
    let mut out = vec![C64::ZERO; kmax + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = gl_integrate(
            |t| {
                let lam = lam_of(t);
                let s = director.value(s_fun(t), t);
                // dλ = rad cos(u) π dt cancels the cos in ν.
                lam.powi(k as i32 - 2) / s * C64::new(core::f64::consts::PI, 0.0)
            },
            4,
        );
    }
    Ok(out)
}

/// Segment intersection test; touching at the far endpoint of a leg is
/// allowed (boundary values on cuts are legitimate targets).
fn leg_crosses_cut(p: C64, q: C64, cut: &Cut) -> bool {
    let cross =
        |o: C64, u: C64, v: C64| (u.re - o.re) * (v.im - o.im) - (u.im - o.im) * (v.re - o.re);
    let d1 = cross(cut.inner, cut.outer, p);
    let d2 = cross(cut.inner, cut.outer, q);
    let d3 = cross(p, q, cut.inner);
    let d4 = cross(p, q, cut.outer);
    if (d1 > 0.0) == (d2 > 0.0) || (d3 > 0.0) == (d4 > 0.0) {
        return false;
    }
    // Proper crossing of the supporting lines within both segments; allow a
    // touch at the final endpoint q (leg parameter 1).
    let denom = d1 - d2;
    if denom != 0.0 {
        let t = d1 / denom; // parameter along [p, q]
        if t > 1.0 - 1e-9 {
            return false;
        }
    }
    true
}

/// Path specification for h-integration: the regularized start leaves λ = 0
/// along direction e^{i·start_arg}; `via` are intermediate waypoints.
#[derive(Clone, Debug)]
pub struct PathSpec {
    pub start_arg: f64,
    pub via: Vec<C64>,
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec {
            start_arg: core::f64::consts::FRAC_PI_2,
            via: Vec::new(),
        }
    }
}

impl PathSpec {
    pub fn via(points: &[C64]) -> Self {
        PathSpec {
            start_arg: core::f64::consts::FRAC_PI_2,
            via: points.to_vec(),
        }
    }
}

/// Default upper-half-plane detour toward the target.
fn auto_via(target: C64) -> Vec<C64> {
    let r = target.norm().max(0.4);
    vec![C64::new(0.0, 0.8 * r), target + C64::new(0.0, 0.55 * r)]
}

struct HIntegrator<'a> {
    a: &'a SpectralPolynomial,
    b: &'a Poly,
    tau: C64,
    theta: f64,
    cuts: Vec<Cut>,
}

impl<'a> HIntegrator<'a> {
    /// h at the end of the regularized first leg to p1, plus the continued ν
    /// value there.
    fn first_leg(&self, p1: C64) -> Result<(C64, C64), ClosingError> {
        let sqrt_p1 = p1.sqrt();
        let phase = C64::from_polar(1.0, self.theta / 2.0);
        let e_th = C64::from_polar(1.0, self.theta);
        // ν_asym(t) = (i/4) e^{iΘ/2} / (√p1 t); σ = ν/ν_asym → 1.
        let nu2 = |t: f64| -> C64 {
            let lam = p1 * t * t;
            self.a.eval(lam) / lam
        };
        // Branch director seeded by the asymptote at small t.
        let t0 = 1e-3;
        let seed = C64::I * phase / (4.0 * sqrt_p1 * t0);
        let shifted = move |t: f64| nu2(t0 + (1.0 - t0) * t);
        let director = BranchDirector::build(&shifted, Some(seed), 512)?;
        let nu_at = |t: f64| -> Result<C64, ClosingError> {
            if t < t0 {
                return Err(ClosingError::NonConvergent);
            }
            let s = (t - t0) / (1.0 - t0);
            Ok(director.value(nu2(t), s))
        };
        // b with the constant term dropped: b(λ) − b(0) = λ·bt(λ).
        let bt = Poly::new(self.b.coeffs.iter().skip(1).copied().collect());
        // Regularized integrand: B(t)·[τe^{iΘ}(σ−1) − 32λ·bt(λ)]/(σ τ e^{iΘ}),
        // B = (iτ/4)e^{iΘ/2}/(√p1 t²).
        let integrand = |t: f64| -> C64 {
            let t = t.max(t0);
            let lam = p1 * t * t;
            let nu = match nu_at(t) {
                Ok(v) => v,
                Err(_) => return C64::ZERO,
            };
            let sigma = nu * sqrt_p1 * t * 4.0 / (C64::I * phase);
            let bfac = self.tau * e_th * (sigma - C64::ONE) - lam * bt.eval(lam) * 32.0;
            let big_b = C64::I * self.tau * phase / (4.0 * sqrt_p1 * t * t);
            big_b * bfac / (sigma * self.tau * e_th)
        };
        let integral = gl_integrate(integrand, 6);
        let h_p1 = C64::I * self.tau * phase / (4.0 * sqrt_p1) + integral;
        let nu_p1 = nu_at(1.0)?;
        Ok((h_p1, nu_p1))
    }

    /// Appends ∫ φ along the straight leg from p to q given ν(p); returns
    /// (integral, ν(q)). If `q_is_root`, the endpoint square-root
    /// singularity is absorbed by the quadratic substitution.
    fn leg(&self, p: C64, q: C64, nu_p: C64, q_is_root: bool) -> Result<(C64, C64), ClosingError> {
        for cut in &self.cuts {
            if leg_crosses_cut(p, q, cut) {
                return Err(ClosingError::PathCrossesCut);
            }
        }
        if q_is_root {
            // λ(t) = q + (p−q)(1−t)², ν = (1−t)·w with w² = (p−q)·aq(λ)/λ.
            let div = Poly::from_roots(C64::ONE, &[q]);
            let (aq, rem) = self.a.poly.div_rem(&div);
            if rem.max_coeff_norm() > 1e-9 * self.a.poly.max_coeff_norm() {
                return Err(ClosingError::SingularCurve);
            }
            let w2 = move |t: f64| -> C64 {
                let lam = q + (p - q) * (1.0 - t) * (1.0 - t);
                (p - q) * aq.eval(lam) / lam
            };
            let director = BranchDirector::build(&w2, Some(nu_p), 512)?;
            let integral = gl_integrate(
                |t| {
                    let lam = q + (p - q) * (1.0 - t) * (1.0 - t);
                    let w = director.value(w2(t), t);
                    // dλ = −2(p−q)(1−t) dt; ν = (1−t)w.
                    -self.b.eval(lam) * 2.0 * (p - q) / (w * lam * lam)
                },
                4,
            );
            // ν(q) = 0 at the branch point.
            Ok((integral, C64::ZERO))
        } else {
            let nu2 = move |t: f64| -> C64 {
                let lam = p + (q - p) * t;
                self.a.eval(lam) / lam
            };
            let director = BranchDirector::build(&nu2, Some(nu_p), 512)?;
            let integral = gl_integrate(
                |t| {
                    let lam = p + (q - p) * t;
                    let nu = director.value(nu2(t), t);
                    self.b.eval(lam) * (q - p) / (nu * lam * lam)
                },
                4,
            );
            Ok((integral, director.value(nu2(1.0), 1.0)))
        }
    }

    fn h_at(&self, target: C64, path: &PathSpec) -> Result<C64, ClosingError> {
        let scale = self
            .cuts
            .iter()
            .fold(0.35f64, |m, c| m.min(0.35 * c.inner.norm()));
        let p1 = C64::from_polar(scale.max(1e-3), path.start_arg);
        let (mut h, mut nu) = self.first_leg(p1)?;
        let mut pos = p1;
        let via: Vec<C64> = if path.via.is_empty() {
            auto_via(target)
        } else {
            path.via.clone()
        };
        for &w in &via {
            let (dh, nu_next) = self.leg(pos, w, nu, false)?;
            h += dh;
            nu = nu_next;
            pos = w;
        }
        let is_root = self
            .a
            .poly
            .roots()
            .iter()
            .any(|r| (r - target).norm() < 1e-9 * (1.0 + target.norm()));
        let (dh, _) = self.leg(pos, target, nu, is_root)?;
        Ok(h + dh)
    }
}

/// Value of the antiderivative h (dh = b dλ/(νλ²), σ*h = −h) at `target`,
/// following the given path from the regularized start at λ = 0.
pub fn integrate_h(cd: &ClosingData, target: C64, path: &PathSpec) -> Result<C64, ClosingError> {
    let integ = HIntegrator {
        a: &cd.a,
        b: &cd.b,
        tau: cd.tau,
        theta: cd.theta,
        cuts: cd.cuts(),
    };
    integ.h_at(target, path)
}

/// ∮ dh around the cut: twice the segment integral (should vanish).
pub fn cut_cycle_integral(cd: &ClosingData, cut_index: usize) -> Result<C64, ClosingError> {
    let cuts = cd.cuts();
    let cut = cuts.get(cut_index).ok_or(ClosingError::SingularCurve)?;
    let js = cut_monomial_integrals(&cd.a, cut, cd.a.g + 1)?;
    let mut acc = C64::ZERO;
    for (k, j) in js.iter().enumerate() {
        acc += cd.b.coeff(k) * j;
    }
    Ok(acc * 2.0)
}

fn dist_to_i_pi_z(h: C64) -> f64 {
    let k = (h.im / core::f64::consts::PI).round();
    (h - C64::new(0.0, k * core::f64::consts::PI)).norm()
}

/// Solves the closing conditions for b and τ. `tau_hint` selects the
/// quantization branch nearest the hint instead of the smallest |τ|.
pub fn solve_closing(
    a: &SpectralPolynomial,
    tau_hint: Option<C64>,
) -> Result<ClosingData, ClosingError> {
    let a0 = a.poly.coeff(0);
    if (a0.norm() - 1.0 / 16.0).abs() > 1e-8 {
        return Err(ClosingError::A0Normalization { modulus: a0.norm() });
    }
    let theta = (-a0 * 16.0).arg();
    let g = a.g;
    let m = g + 1;
    let pairs = a
        .paired_roots()
        .map_err(|e| ClosingError::Pairing(e.residual))?;
    let mut cuts = Vec::new();
    for p in &pairs {
        if p.multiplicity > 1 {
            return Err(ClosingError::SingularCurve);
        }
        match p.partner {
            None => return Err(ClosingError::SingularCurve),
            Some(partner) => {
                let (inner, outer) = if p.root.norm() <= partner.norm() {
                    (p.root, partner)
                } else {
                    (partner, p.root)
                };
                cuts.push(Cut { inner, outer });
            }
        }
    }
    debug_assert_eq!(cuts.len(), g);

    // Real parametrization of b under b_{m-k} = −conj(b_k) with b_0 fixed.
    // params: for k < m−k: (Re b_k, Im b_k); for k = m/2: Im b_k.
    struct ParamMap {
        m: usize,
    }
    impl ParamMap {
        fn n_params(&self) -> usize {
            // 2·#{1 ≤ k < m−k} + (m even ? 1 : 0) = m − 1 = g.
            self.m - 1
        }
        fn coeffs(&self, b0: C64, params: &[f64]) -> Vec<C64> {
            let mut b = vec![C64::ZERO; self.m + 1];
            b[0] = b0;
            b[self.m] = -b0.conj();
            let mut idx = 0;
            let mut k = 1;
            while 2 * k < self.m {
                b[k] = C64::new(params[idx], params[idx + 1]);
                b[self.m - k] = -b[k].conj();
                idx += 2;
                k += 1;
            }
            if self.m % 2 == 0 {
                b[self.m / 2] = C64::new(0.0, params[idx]);
            }
            b
        }
    }
    let pm = ParamMap { m };
    let nu = pm.n_params();
    debug_assert_eq!(nu, g);

    // Monomial cut integrals J_{i,k}.
    let mut js = Vec::with_capacity(g);
    for cut in &cuts {
        js.push(cut_monomial_integrals(a, cut, m)?);
    }

    // Solve with ρ = 1: b0 = e^{iΘ/2}/32.
    let b0 = C64::from_polar(1.0 / 32.0, theta / 2.0);
    let row_value = |coeffs: &[C64], i: usize| -> f64 {
        let mut acc = C64::ZERO;
        for (k, c) in coeffs.iter().enumerate() {
            acc += c * js[i][k];
        }
        acc.re
    };
    // Assemble A·x = rhs by evaluating the affine rows on basis vectors.
    let zero = vec![0.0; nu];
    let base: Vec<f64> = (0..g)
        .map(|i| row_value(&pm.coeffs(b0, &zero), i))
        .collect();
    let mut a_mat = vec![vec![0.0f64; nu]; g];
    for j in 0..nu {
        let mut e = zero.clone();
        e[j] = 1.0;
        let col = pm.coeffs(C64::ZERO, &e);
        for i in 0..g {
            a_mat[i][j] = row_value(&col, i);
        }
    }
    let rhs: Vec<f64> = base.iter().map(|v| -v).collect();
    let (solution, condition) = solve_real_system(&a_mat, &rhs)?;
    let b_unit = Poly::new(pm.coeffs(b0, &solution));

    // Quantize: h(1) is ρ-linear; pick ρ with h(1) ∈ iπZ, smallest |τ| or
    // nearest the hint.
    let tau_unit = C64::from_polar(1.0, -theta / 2.0);
    let probe = ClosingData {
        a: a.clone(),
        b: b_unit.clone(),
        tau: tau_unit,
        theta,
        quantization_defects: vec![],
        cut_integral_defects: vec![],
        condition,
    };
    let h1 = integrate_h(&probe, C64::ONE, &PathSpec::default())?;
    if h1.re.abs() > 1e-6 {
        return Err(ClosingError::QuantizationUnreachable { re_part: h1.re });
    }
    let y = h1.im;
    if y.abs() < 1e-12 {
        return Err(ClosingError::QuantizationUnreachable { re_part: y });
    }
    let rho = match tau_hint {
        None => core::f64::consts::PI / y,
        Some(hint) => {
            let target = (hint / tau_unit).re;
            let k = (target * y / core::f64::consts::PI).round();
            let k = if k == 0.0 { 1.0 } else { k };
            k * core::f64::consts::PI / y
        }
    };
    let b = b_unit.scale(C64::new(rho, 0.0));
    let tau = tau_unit * rho;

    let mut cd = ClosingData {
        a: a.clone(),
        b,
        tau,
        theta,
        quantization_defects: vec![],
        cut_integral_defects: vec![],
        condition,
    };
    // Diagnostics: residual cut integrals and quantization defects.
    for (i, j) in js.iter().enumerate() {
        let mut acc = C64::ZERO;
        for (k, jk) in j.iter().enumerate() {
            acc += cd.b.coeff(k) * jk;
        }
        let _ = i;
        cd.cut_integral_defects.push(acc.norm());
    }
    let mut targets = vec![C64::ONE];
    for cut in &cuts {
        targets.push(cut.inner);
        targets.push(cut.outer);
    }
    for t in targets {
        let h = integrate_h(&cd, t, &PathSpec::default())?;
        cd.quantization_defects.push((t, dist_to_i_pi_z(h)));
    }
    Ok(cd)
}

/// Gaussian elimination with partial pivoting plus an ∞-norm condition
/// estimate from the explicit inverse (the systems here are g×g with g ≤ 2
/// in the presets, so this is cheap and exact enough).
fn solve_real_system(a: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64), ClosingError> {
    let n = rhs.len();
    if n == 0 {
        return Ok((vec![], 1.0));
    }
    let solve_one = |b: &[f64]| -> Result<Vec<f64>, ClosingError> {
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut v = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
                .unwrap();
            if m[piv][col].abs() < 1e-14 {
                return Err(ClosingError::SingularSystem);
            }
            m.swap(col, piv);
            v.swap(col, piv);
            for r in (col + 1)..n {
                let f = m[r][col] / m[col][col];
                for c in col..n {
                    let delta = f * m[col][c];
                    m[r][c] -= delta;
                }
                v[r] -= f * v[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let mut acc = v[r];
            for c in (r + 1)..n {
                acc -= m[r][c] * x[c];
            }
            x[r] = acc / m[r][r];
        }
        Ok(x)
    };
    let x = solve_one(rhs)?;
    // Condition estimate: ‖A‖∞ · ‖A⁻¹‖∞ via solves on basis vectors.
    let norm_a = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut norm_ainv = 0.0f64;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve_one(&e)?;
        // Column-sum of |A⁻¹| accumulated into row sums below.
        norm_ainv = norm_ainv.max(col.iter().map(|v| v.abs()).sum::<f64>());
    }
    Ok((x, norm_a * norm_ainv))
}

/// Checklist report for the spectral-data conditions.
#[derive(Clone, Debug)]
pub struct SpectralDataReport {
    pub a_reality: f64,
    pub a_circle_sign: f64,
    pub a0_modulus: f64,
    pub b_reality: f64,
    pub b0_relation: f64,
    pub b0_ray: f64,
    pub cut_integrals: f64,
    pub quantization: f64,
    pub pass: bool,
}

/// Runs the spectral-data checklist (reality and negativity of a, b-reality,
/// the b(0)–τ relation, vanishing cut integrals, iπZ-quantization of h).
pub fn verify_spectral_data(cd: &ClosingData) -> SpectralDataReport {
    let a_reality = cd.a.reality_defect();
    let a_circle_sign = cd.a.circle_sign_defect();
    let a0_modulus = (cd.a.poly.coeff(0).norm() - 1.0 / 16.0).abs();
    let b_reality = cd.b_reality_defect();
    let (b0_relation, b0_ray) = cd.b0_defect();
    let cut_integrals = cd
        .cut_integral_defects
        .iter()
        .fold(0.0f64, |m, v| m.max(*v));
    let quantization = cd
        .quantization_defects
        .iter()
        .fold(0.0f64, |m, (_, v)| m.max(*v));
    let pass = a_reality <= 1e-8
        && a_circle_sign <= 1e-8
        && a0_modulus <= 1e-8
        && b_reality <= 1e-8
        && b0_relation <= 1e-8
        && b0_ray <= 1e-8
        && cut_integrals <= 1e-7
        && quantization <= QUANTIZATION_TOL;
    SpectralDataReport {
        a_reality,
        a_circle_sign,
        a0_modulus,
        b_reality,
        b0_relation,
        b0_ray,
        cut_integrals,
        quantization,
        pass,
    }
}

/// Eigenvector of ξ(λ) for the eigenvalue branch ±ν with ν = √(−det ξ(λ)):
/// ψ₊ = (1, (ν−α)/β) in the β-chart or (1, γ/(ν+α)) in the γ-chart when β
/// degenerates. Returns the vector and the residual ‖ξψ − νψ‖.
pub fn eigenvector_at(
    xi: &MatrixLaurent,
    lambda: C64,
    plus_branch: bool,
) -> Result<([C64; 2], f64), ClosingError> {
    let e = xi.eval(lambda);
    let nu2 = -e.det();
    // Flush −0.0 components so the principal branch is stable on the axes.
    let mut nu = C64::new(nu2.re + 0.0, nu2.im + 0.0).sqrt();
    if !plus_branch {
        nu = -nu;
    }
    let alpha = e.0[0][0];
    let beta = e.0[0][1];
    let gamma = e.0[1][0];
    let scale = e.norm();
    let psi = if beta.norm() > 1e-12 * scale {
        [C64::ONE, (nu - alpha) / beta]
    } else if (nu + alpha).norm() > 1e-12 * scale {
        [C64::ONE, gamma / (nu + alpha)]
    } else {
        return Err(ClosingError::SingularCurve);
    };
    let img = e.mul_vec(psi);
    let res = ((img[0] - nu * psi[0]).norm_sqr() + (img[1] - nu * psi[1]).norm_sqr()).sqrt();
    Ok((psi, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loop_algebra::flat_potential;

    fn genus0_a() -> SpectralPolynomial {
        SpectralPolynomial::classify(0, Poly::constant(C64::new(-1.0 / 16.0, 0.0)))
    }

    /// Closed-form eigenvalue of the flat monodromy: ln μ = (iπ/2)(λ^{-1/2}+λ^{1/2}).
    fn genus0_log_mu(lam: C64) -> C64 {
        let s = lam.sqrt();
        C64::new(0.0, core::f64::consts::FRAC_PI_2) * (C64::ONE / s + s)
    }

    #[test]
    fn genus0_closing_gives_printed_b_and_tau() {
        let cd = solve_closing(&genus0_a(), None).unwrap();
        let tau = 2.0 * core::f64::consts::PI;
        assert!(
            (cd.tau - C64::new(tau, 0.0)).norm() < 1e-10,
            "tau = {}",
            cd.tau
        );
        // b = (π/16)(1 − λ).
        assert!((cd.b.coeff(0) - C64::new(core::f64::consts::PI / 16.0, 0.0)).norm() < 1e-10);
        assert!((cd.b.coeff(1) + C64::new(core::f64::consts::PI / 16.0, 0.0)).norm() < 1e-10);
        assert_eq!(cd.b.degree(), Some(1));
        // Θ = 0 and the b(0) relation.
        assert!(cd.theta.abs() < 1e-12);
        let (rel, ray) = cd.b0_defect();
        assert!(rel < 1e-12 && ray < 1e-12);
        // h(1) lands on iπZ.
        assert!(cd.quantization_defects.iter().all(|(_, d)| *d < 1e-8));
    }

    #[test]
    fn genus0_h_matches_log_mu_oracle() {
        let cd = solve_closing(&genus0_a(), None).unwrap();
        for lam in [
            C64::new(0.5, 0.0),
            C64::new(2.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.3, 0.4),
            C64::new(1.0, 0.0),
        ] {
            let h = integrate_h(&cd, lam, &PathSpec::default()).unwrap();
            let want = genus0_log_mu(lam);
            assert!(
                (h - want).norm() < 1e-8,
                "λ = {lam}: h = {h}, ln μ = {want}"
            );
        }
    }

    #[test]
    fn genus0_path_independence() {
        let cd = solve_closing(&genus0_a(), None).unwrap();
        let target = C64::new(1.3, 0.2);
        let h1 = integrate_h(&cd, target, &PathSpec::default()).unwrap();
        let h2 = integrate_h(
            &cd,
            target,
            &PathSpec::via(&[C64::new(0.0, 0.3), C64::new(-0.6, 0.9), C64::new(0.8, 1.4)]),
        )
        .unwrap();
        assert!((h1 - h2).norm() < 1e-9, "defect {}", (h1 - h2).norm());
    }

    #[test]
    fn eigenvectors_of_flat_potential() {
        // At λ = 1: ν = ±i/4, ψ₊ = (1, 1).
        let xi = flat_potential();
        let (psi, res) = eigenvector_at(&xi, C64::ONE, true).unwrap();
        assert!(res < 1e-14);
        assert!((psi[1] - C64::ONE).norm() < 1e-12);
        // Generic λ: residual vanishes analytically.
        let (_, res2) = eigenvector_at(&xi, C64::new(0.7, -0.3), false).unwrap();
        assert!(res2 < 1e-14);
    }

    #[test]
    fn build_curve_counts_branch_points() {
        let c = build_curve(&genus0_a()).unwrap();
        assert_eq!(c.genus, 0);
        assert!(c.pairs.is_empty());
        assert!(c.eta_free_defect == 0.0);
        // Genus 1 (d = −1): four branch points (two finite plus 0, ∞).
        let a1 = SpectralPolynomial::classify(
            1,
            Poly::new(vec![
                C64::new(-1.0 / 16.0, 0.0),
                C64::new(-6.0 / 16.0, 0.0),
                C64::new(-1.0 / 16.0, 0.0),
            ]),
        );
        let c1 = build_curve(&a1).unwrap();
        assert_eq!(c1.genus, 1);
        assert_eq!(c1.pairs.len(), 1);
        assert!(c1.eta_free_defect == 0.0);
    }

    #[test]
    fn genus1_h_properties_from_the_closing_construction() {
        // Rotational preset (d = −1 ⇒ β = 3 − 2√2): a = −(1/16)(1+6λ+λ²).
        let a = SpectralPolynomial::classify(
            1,
            Poly::new(vec![
                C64::new(-1.0 / 16.0, 0.0),
                C64::new(-6.0 / 16.0, 0.0),
                C64::new(-1.0 / 16.0, 0.0),
            ]),
        );
        let cd = solve_closing(&a, None).unwrap();
        // ∮ dh around the cut vanishes.
        let cyc = cut_cycle_integral(&cd, 0).unwrap();
        assert!(cyc.norm() < 1e-9, "cycle integral {cyc}");
        // h is purely imaginary on the unit circle.
        for th in [0.4, 1.1, 2.0, 2.8] {
            let lam = C64::from_polar(1.0, th);
            let h = integrate_h(&cd, lam, &PathSpec::default()).unwrap();
            assert!(h.re.abs() < 1e-8, "Re h({lam}) = {}", h.re);
        }
        // h(−β) = 0 at the inner negative branch point.
        let beta = 3.0 - 2.0 * 2.0f64.sqrt();
        let h = integrate_h(&cd, C64::new(-beta, 0.0), &PathSpec::default()).unwrap();
        assert!(h.norm() < 1e-6, "h(−β) = {h}");
    }

    #[test]
    fn closing_rejects_singular_curves() {
        // Double root at λ = −1 (the d = 0 boundary of the genus-1 family).
        let a = SpectralPolynomial::classify(
            1,
            Poly::new(vec![
                C64::new(-1.0 / 16.0, 0.0),
                C64::new(-2.0 / 16.0, 0.0),
                C64::new(-1.0 / 16.0, 0.0),
            ]),
        );
        match solve_closing(&a, None) {
            Err(ClosingError::SingularCurve) => {}
            other => panic!("expected SingularCurve, got {other:?}"),
        }
        // A wrong a(0) modulus is rejected up front.
        let bad = SpectralPolynomial::classify(0, Poly::constant(C64::new(-0.5, 0.0)));
        match solve_closing(&bad, None) {
            Err(ClosingError::A0Normalization { .. }) => {}
            other => panic!("expected A0Normalization, got {other:?}"),
        }
    }

    #[test]
    fn perturbed_b_fails_quantization() {
        // Quantization is τ-linear: scaling b by 1.1 breaks h(1) ∈ iπZ.
        let cd = solve_closing(&genus0_a(), None).unwrap();
        let mut bad = cd.clone();
        bad.b = bad.b.scale(C64::new(1.1, 0.0));
        bad.tau *= 1.1;
        let h1 = integrate_h(&bad, C64::ONE, &PathSpec::default()).unwrap();
        let k = (h1.im / core::f64::consts::PI).round();
        let defect = (h1 - C64::new(0.0, k * core::f64::consts::PI)).norm();
        assert!(
            defect > 0.1,
            "expected a visible quantization defect, got {defect}"
        );
        bad.quantization_defects = vec![(C64::ONE, defect)];
        let report = verify_spectral_data(&bad);
        assert!(!report.pass);
        assert!(report.quantization > QUANTIZATION_TOL);
    }

    #[test]
    fn eigenvector_at_the_sym_point_of_genus1() {
        use crate::family::{genus1_killing_field, genus1_omega_max};
        let xi = genus1_killing_field(genus1_omega_max(-1.0), 0.0, C64::ONE);
        let (_, res) = eigenvector_at(&xi, -C64::ONE, true).unwrap();
        assert!(res < 1e-10, "residual {res}");
    }
}
