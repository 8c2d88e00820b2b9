//! The commuting isospectral action on I(a).
//!
//! The action of t ∈ C^g is realized through its infinitesimal fields
//!
//! ```text
//!     ξ̇ = [ (Σ_i λ^{-i} t_i · ξ)⁺ , ξ ]
//! ```
//!
//! where (·)⁺ is the plus factor of the finite Lie-algebra Iwasawa splitting:
//! negative λ-powers go to the unitary side together with their completion
//! −(A_k)*ᵗ λ^{-k}, and the λ⁰ coefficient splits into skew-hermitian plus
//! upper-triangular-real-diagonal. Integrating the field from s = 0 to 1
//! realizes π(t) (one-parameter-subgroup uniqueness); no loop-group
//! factorization is performed anywhere.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::loop_algebra::MatrixLaurent;
use crate::mat2::Mat2;

/// Tolerance for the bracket closing inside the −1…g window.
pub const TRUNCATION_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum IsoError {
    /// Flow parameter length must equal g.
    ParameterLength { expected: usize, got: usize },
    /// The bracket left the potential window beyond tolerance.
    TruncationResidual { residual: f64 },
    /// The flow broke a potential invariant beyond repair.
    InvariantBreach { defect: f64 },
}

impl core::fmt::Display for IsoError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            IsoError::ParameterLength { expected, got } => {
                write!(
                    f,
                    "flow parameter must have length g = {expected}, got {got}"
                )
            }
            IsoError::TruncationResidual { residual } => {
                write!(
                    f,
                    "bracket fails to close in the Laurent window (residual {residual:.3e})"
                )
            }
            IsoError::InvariantBreach { defect } => {
                write!(
                    f,
                    "flow output violates potential invariants (defect {defect:.3e})"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for IsoError {}

/// Flow parameter t = (t₀, …, t_{g−1}) ∈ C^g.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowParameter(pub Vec<C64>);

impl FlowParameter {
    pub fn zero(g: usize) -> Self {
        FlowParameter(vec![C64::ZERO; g])
    }

    /// t = (τ, 0, …, 0): the slice carrying the z-translation period.
    pub fn period(g: usize, tau: C64) -> Self {
        let mut v = vec![C64::ZERO; g];
        if g > 0 {
            v[0] = tau;
        }
        FlowParameter(v)
    }
}

/// Matrix Laurent polynomial on an arbitrary window (intermediate loops).
#[derive(Clone, Debug)]
pub struct Loop2 {
    pub dmin: i32,
    pub coeffs: Vec<Mat2>,
}

impl Loop2 {
    pub fn zero_window(dmin: i32, dmax: i32) -> Self {
        Loop2 {
            dmin,
            coeffs: vec![Mat2::zero(); (dmax - dmin + 1) as usize],
        }
    }

    pub fn dmax(&self) -> i32 {
        self.dmin + self.coeffs.len() as i32 - 1
    }

    pub fn coeff(&self, d: i32) -> Mat2 {
        if d < self.dmin || d > self.dmax() {
            Mat2::zero()
        } else {
            self.coeffs[(d - self.dmin) as usize]
        }
    }

    pub fn add_to(&mut self, d: i32, m: Mat2) {
        debug_assert!(d >= self.dmin && d <= self.dmax());
        let idx = (d - self.dmin) as usize;
        self.coeffs[idx] = self.coeffs[idx] + m;
    }

    pub fn from_potential(x: &MatrixLaurent) -> Self {
        Loop2 {
            dmin: -1,
            coeffs: x.coeffs().to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Defect of the loop-algebra reality condition (X_d)*ᵗ = −X_{−d}.
    pub fn su_reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for d in self.dmin..=self.dmax() {
            worst = worst.max((self.coeff(-d).conj_transpose() + self.coeff(d)).norm());
        }
        worst / self.norm().max(1e-300)
    }

    /// Commutator [self, other] on the combined window.
    pub fn bracket(&self, other: &Loop2) -> Loop2 {
        let dmin = self.dmin + other.dmin;
        let dmax = self.dmax() + other.dmax();
        let mut out = Loop2::zero_window(dmin, dmax);
        for d1 in self.dmin..=self.dmax() {
            let a = self.coeff(d1);
            if a.norm() == 0.0 {
                continue;
            }
            for d2 in other.dmin..=other.dmax() {
                let b = other.coeff(d2);
                if b.norm() == 0.0 {
                    continue;
                }
                out.add_to(d1 + d2, a.commutator(&b));
            }
        }
        out
    }
}

/// Iwasawa-type Lie-algebra splitting X = su_part + plus_part.
#[derive(Clone, Debug)]
pub struct SplitLoop {
    pub su_part: Loop2,
    pub plus_part: Loop2,
}

/// Splits a loop: each negative power A_k λ^k (k < 0) contributes
/// A_k λ^k − (A_k)*ᵗ λ^{-k} to the unitary side, the λ⁰ coefficient splits
/// into skew-hermitian plus upper-triangular with real diagonal, and the
/// plus part absorbs the remaining non-negative powers.
pub fn lie_split(x: &Loop2) -> SplitLoop {
    let reach = (-x.dmin).max(x.dmax()).max(0);
    let mut su = Loop2::zero_window(-reach, reach);
    for d in x.dmin..=-1 {
        let a = x.coeff(d);
        if a.norm() == 0.0 {
            continue;
        }
        su.add_to(d, a);
        su.add_to(-d, -a.conj_transpose());
    }
    // λ⁰: M = A + B, A ∈ su(2), B upper triangular with real diagonal.
    let m0 = x.coeff(0);
    let w = m0.0[0][0].im;
    let a21 = m0.0[1][0];
    let a0 = Mat2::new(C64::new(0.0, w), -a21.conj(), a21, C64::new(0.0, -w));
    su.add_to(0, a0);
    // plus = X − su (window 0…max).
    let mut plus = Loop2::zero_window(0, x.dmax().max(reach).max(0));
    for d in 0..=plus.dmax() {
        plus.add_to(d, x.coeff(d) - su.coeff(d));
    }
    SplitLoop {
        su_part: su,
        plus_part: plus,
    }
}

/// The infinitesimal isospectral field [ (Σ λ^{-i} t_i ξ)⁺, ξ ], truncated to
/// the −1…g window; the out-of-window residual is checked against tolerance.
pub fn flow_field(xi: &MatrixLaurent, t: &FlowParameter) -> Result<MatrixLaurent, IsoError> {
    flow_field_with_residual(xi, t).map(|(f, _)| f)
}

/// Same as `flow_field` but also returns the truncation residual.
pub fn flow_field_with_residual(
    xi: &MatrixLaurent,
    t: &FlowParameter,
) -> Result<(MatrixLaurent, f64), IsoError> {
    let g = xi.g();
    if t.0.len() != g {
        return Err(IsoError::ParameterLength {
            expected: g,
            got: t.0.len(),
        });
    }
    let gi = g as i32;
    let mut out = MatrixLaurent::zero(g);
    out.set_delta(xi.delta());
    if g == 0 {
        // Empty parameter: the action is zero-dimensional.
        return Ok((out, 0.0));
    }
    // X = (Σ_i λ^{-i} t_i) ξ on the window −g … g.
    let mut x = Loop2::zero_window(-gi, gi);
    for (i, ti) in t.0.iter().enumerate() {
        if ti.norm() == 0.0 {
            continue;
        }
        for d in -1..=gi {
            x.add_to(d - i as i32, xi.coeff(d).scale(*ti));
        }
    }
    let split = lie_split(&x);
    let bracket = split.plus_part.bracket(&Loop2::from_potential(xi));
    // Structural cancellation outside −1…g; report the numerical residual.
    let mut residual = 0.0f64;
    for d in bracket.dmin..=bracket.dmax() {
        if d < -1 || d > gi {
            residual = residual.max(bracket.coeff(d).norm());
        }
    }
    let scale = xi.max_coeff_norm() * x.norm();
    if residual > TRUNCATION_TOL * scale.max(1.0) {
        return Err(IsoError::TruncationResidual { residual });
    }
    for d in -1..=gi {
        *out.coeff_mut(d) = bracket.coeff(d);
    }
    Ok((out, residual))
}

/// Diagnostics accumulated along a flow.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlowDiagnostics {
    /// Largest reality re-symmetrization correction applied after a step.
    pub max_resym_correction: f64,
    /// Largest bracket truncation residual seen.
    pub max_truncation: f64,
}

/// Integrates dξ/ds = flow_field(ξ, t) from s = 0 to 1 with RK4 in `steps`
/// steps, re-imposing the exact reality symmetrization after each step.
pub fn flow(
    xi: &MatrixLaurent,
    t: &FlowParameter,
    steps: usize,
) -> Result<(MatrixLaurent, FlowDiagnostics), IsoError> {
    let mut cur = xi.clone();
    let mut diag = FlowDiagnostics::default();
    let h = 1.0 / steps.max(1) as f64;
    for _ in 0..steps.max(1) {
        let (k1, r1) = flow_field_with_residual(&cur, t)?;
        let (k2, r2) = flow_field_with_residual(&cur.add(&k1.scale(C64::new(h / 2.0, 0.0))), t)?;
        let (k3, r3) = flow_field_with_residual(&cur.add(&k2.scale(C64::new(h / 2.0, 0.0))), t)?;
        let (k4, r4) = flow_field_with_residual(&cur.add(&k3.scale(C64::new(h, 0.0))), t)?;
        diag.max_truncation = diag.max_truncation.max(r1).max(r2).max(r3).max(r4);
        let mut next = cur.add(&k1.scale(C64::new(h / 6.0, 0.0)));
        next = next.add(&k2.scale(C64::new(h / 3.0, 0.0)));
        next = next.add(&k3.scale(C64::new(h / 3.0, 0.0)));
        next = next.add(&k4.scale(C64::new(h / 6.0, 0.0)));
        // Exact reality symmetrization: average ξ and −star(ξ).
        let symmetrized = next.sub(&next.star()).scale(C64::new(0.5, 0.0));
        diag.max_resym_correction = diag.max_resym_correction.max(symmetrized.dist(&next));
        cur = symmetrized;
    }
    if let Err(e) = cur.validate() {
        let _ = e;
        return Err(IsoError::InvariantBreach {
            defect: cur.reality_defect(),
        });
    }
    Ok((cur, diag))
}

/// ‖flow(ξ, t) − ξ‖ in the max coefficient norm; a period candidate τ maps
/// to t = (τ, 0, …, 0).
pub fn stabilizer_defect(
    xi: &MatrixLaurent,
    t: &FlowParameter,
    steps: usize,
) -> Result<f64, IsoError> {
    let (moved, _) = flow(xi, t, steps)?;
    Ok(moved.dist(xi))
}

/// Real rank and nullity of the linearized field map C^g ≅ R^{2g} → T P_g.
pub fn field_kernel(xi: &MatrixLaurent) -> Result<(usize, usize), IsoError> {
    let g = xi.g();
    if g == 0 {
        return Ok((0, 0));
    }
    // Columns: fields for t = e_i and t = i·e_i, flattened to reals.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(2 * g);
    for i in 0..g {
        for im in [false, true] {
            let mut t = FlowParameter::zero(g);
            t.0[i] = if im { C64::I } else { C64::ONE };
            let f = flow_field(xi, &t)?;
            let mut col = Vec::with_capacity(8 * (g + 2));
            for m in f.coeffs() {
                for r in 0..2 {
                    for c in 0..2 {
                        col.push(m.0[r][c].re);
                        col.push(m.0[r][c].im);
                    }
                }
            }
            cols.push(col);
        }
    }
    let scale = cols
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    // Column-wise Gaussian elimination for the rank.
    let nrows = cols[0].len();
    let mut rank = 0usize;
    let mut reduced = cols.clone();
    let mut used_row = vec![false; nrows];
    for c in 0..reduced.len() {
        // Find pivot row.
        let mut piv = None;
        let mut best = 0.0;
        for r in 0..nrows {
            if !used_row[r] && reduced[c][r].abs() > best {
                best = reduced[c][r].abs();
                piv = Some(r);
            }
        }
        let Some(p) = piv else { continue };
        if best < 1e-7 * scale {
            continue;
        }
        used_row[p] = true;
        rank += 1;
        let pivot_col = reduced[c].clone();
        for other in (c + 1)..reduced.len() {
            let f = reduced[other][p] / pivot_col[p];
            for r in 0..nrows {
                reduced[other][r] -= f * pivot_col[r];
            }
        }
    }
    Ok((rank, 2 * g - rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{genus1_killing_field, genus1_omega_max};
    use crate::loop_algebra::{flat_potential, random_potential, CIRCLE_SAMPLES};
    use crate::rng::Rng;

    fn genus1_preset() -> MatrixLaurent {
        // Rotational level set with d = −1.
        genus1_killing_field(genus1_omega_max(-1.0), 0.0, C64::ONE)
    }

    #[test]
    fn lie_split_reproduces_and_normalizes() {
        let mut rng = Rng::new(17);
        for _ in 0..20 {
            let mut x = Loop2::zero_window(-2, 3);
            for d in -2..=3 {
                x.add_to(
                    d,
                    Mat2::traceless(rng.next_c64(1.0), rng.next_c64(1.0), rng.next_c64(1.0)),
                );
            }
            let s = lie_split(&x);
            // Exactness.
            let mut worst = 0.0f64;
            for d in -4..=4 {
                let back = s.su_part.coeff(d) + s.plus_part.coeff(d);
                worst = worst.max((back - x.coeff(d)).norm());
            }
            assert!(worst < 1e-13);
            // Membership.
            assert!(s.su_part.su_reality_defect() < 1e-13);
            assert!(s.plus_part.dmin >= 0);
            let b0 = s.plus_part.coeff(0);
            assert!(b0.0[1][0].norm() < 1e-14);
            assert!(b0.0[0][0].im.abs() < 1e-14);
        }
    }

    #[test]
    fn lie_split_fixed_points() {
        // Loop-unitary input → (X, 0).
        let a = Mat2::traceless(C64::new(0.1, 0.2), C64::new(-0.4, 0.3), C64::new(0.7, 0.1));
        let mut x = Loop2::zero_window(-2, 2);
        x.add_to(-2, a);
        x.add_to(2, -a.conj_transpose());
        x.add_to(
            0,
            Mat2::new(
                C64::new(0.0, 0.5),
                C64::new(0.2, 0.1),
                C64::new(-0.2, 0.1),
                C64::new(0.0, -0.5),
            ),
        );
        let s = lie_split(&x);
        assert!(s.plus_part.norm() < 1e-14);
        // Polynomial with upper-triangular real-diagonal λ⁰ → (0, X).
        let mut y = Loop2::zero_window(0, 2);
        y.add_to(
            0,
            Mat2::new(
                C64::new(0.3, 0.0),
                C64::new(0.1, -0.2),
                C64::ZERO,
                C64::new(-0.3, 0.0),
            ),
        );
        y.add_to(
            1,
            Mat2::traceless(C64::new(0.5, 0.1), C64::new(0.2, 0.0), C64::new(0.0, 0.7)),
        );
        let s = lie_split(&y);
        assert!(s.su_part.norm() < 1e-14);
    }

    #[test]
    fn lie_split_completion_example() {
        // X = [[0,0],[1,0]]λ^{-1} → su = X − [[0,1],[0,0]]λ, plus = [[0,1],[0,0]]λ.
        let e21 = Mat2::new(C64::ZERO, C64::ZERO, C64::ONE, C64::ZERO);
        let e12 = Mat2::new(C64::ZERO, C64::ONE, C64::ZERO, C64::ZERO);
        let mut x = Loop2::zero_window(-1, 0);
        x.add_to(-1, e21);
        let s = lie_split(&x);
        assert!((s.su_part.coeff(-1) - e21).norm() < 1e-15);
        assert!((s.su_part.coeff(1) + e12).norm() < 1e-15);
        assert!((s.plus_part.coeff(1) - e12).norm() < 1e-15);
        assert!(s.plus_part.coeff(0).norm() < 1e-15);
    }

    #[test]
    fn zero_parameter_is_identity() {
        let xi = genus1_preset();
        let t = FlowParameter::zero(1);
        let f = flow_field(&xi, &t).unwrap();
        assert!(f.max_coeff_norm() == 0.0);
        let (out, _) = flow(&xi, &t, 8).unwrap();
        assert!(out.dist(&xi) < 1e-15);
        // Flat potential: g = 0, empty parameter, no flow.
        let flat = flat_potential();
        let f0 = flow_field(&flat, &FlowParameter::zero(0)).unwrap();
        assert!(f0.max_coeff_norm() == 0.0);
    }

    #[test]
    fn real_parameters_are_stabilizer_directions_for_g1() {
        // Kernel slice: t_{g−1−i} = conj(t_i); for g = 1 this is
        // t₀ ∈ ℝ, so real t₀ generates no motion.
        let xi = genus1_preset();
        let f = flow_field(&xi, &FlowParameter(vec![C64::new(0.37, 0.0)])).unwrap();
        assert!(
            f.max_coeff_norm() < 1e-14,
            "field norm {}",
            f.max_coeff_norm()
        );
        // And an imaginary parameter does move.
        let fi = flow_field(&xi, &FlowParameter(vec![C64::new(0.0, 0.37)])).unwrap();
        assert!(fi.max_coeff_norm() > 1e-3);
    }

    #[test]
    fn kernel_dimension_is_g() {
        let xi = genus1_preset();
        let (rank, nullity) = field_kernel(&xi).unwrap();
        assert_eq!(rank, 1);
        assert_eq!(nullity, 1);
        // Root-free random genus-2 potential.
        let mut rng = Rng::new(5151);
        loop {
            let xi2 = random_potential(2, &mut rng);
            let a = xi2.det_poly().unwrap();
            if !a.tags.mg1 {
                continue;
            }
            let (rank2, nullity2) = field_kernel(&xi2).unwrap();
            assert_eq!(rank2, 2, "rank {rank2}");
            assert_eq!(nullity2, 2);
            break;
        }
    }

    #[test]
    fn flow_preserves_spectral_data() {
        let xi = genus1_preset();
        let a0 = xi.det_poly().unwrap();
        let t = FlowParameter(vec![C64::new(0.4, 0.8)]);
        let (moved, diag) = flow(&xi, &t, 200).unwrap();
        assert!(diag.max_truncation < 1e-12);
        moved.validate().unwrap();
        // a(λ) preserved on circle samples.
        let a1 = moved.det_poly().unwrap();
        let mut worst = 0.0f64;
        for k in 0..64 {
            let lam = C64::from_polar(1.0, 0.02 + 0.1 * k as f64);
            let d = (a1.eval(lam) - a0.eval(lam)).norm() / a0.eval(lam).norm();
            worst = worst.max(d);
        }
        assert!(worst < 1e-8, "a-drift {worst}");
        // β₋₁γ₀ = a(0) preserved.
        let p0 = xi.coeff(-1).0[0][1] * xi.coeff(0).0[1][0];
        let p1 = moved.coeff(-1).0[0][1] * moved.coeff(0).0[1][0];
        assert!((p0 - p1).norm() < 1e-10);
        // Coefficient bound along the flow (properness proxy).
        let mut sup = 0.0f64;
        for k in 0..CIRCLE_SAMPLES {
            let th = 2.0 * core::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64;
            sup = sup.max(a0.eval(C64::from_polar(1.0, th)).norm().sqrt());
        }
        for m in moved.coeffs() {
            assert!(m.op_norm() <= sup + 1e-8);
        }
    }

    #[test]
    fn flows_commute() {
        let xi = genus1_preset();
        let t1 = FlowParameter(vec![C64::new(0.3, 0.5)]);
        let t2 = FlowParameter(vec![C64::new(-0.6, 0.2)]);
        let (a, _) = flow(&flow(&xi, &t1, 200).unwrap().0, &t2, 200).unwrap();
        let (b, _) = flow(&flow(&xi, &t2, 200).unwrap().0, &t1, 200).unwrap();
        assert!(a.dist(&b) < 1e-7, "commutator defect {}", a.dist(&b));
    }

    #[test]
    fn stabilizer_examples() {
        let xi = genus1_preset();
        assert!(stabilizer_defect(&xi, &FlowParameter::zero(1), 4).unwrap() == 0.0);
        // A random non-lattice parameter stays bounded away from zero
        // (regression value with fixed seed).
        let t = FlowParameter(vec![C64::new(0.31, 0.77)]);
        let d = stabilizer_defect(&xi, &t, 200).unwrap();
        assert!(d > 1e-2, "defect {d}");
    }

    #[test]
    fn genus2_period_is_a_stabilizer_of_the_action() {
        // For the circle-foliated genus-2 potential the closing period is
        // imaginary; t = (τ, 0) generates a genuinely moving flow that
        // returns to the start after unit time — the z-translation picture
        // of the action meeting the closing solver's quantization.
        use crate::family::{preset, PresetSpec};
        let pre = preset(PresetSpec::Genus2Abresch { c: -2.0, d: -2.0 }).unwrap();
        let xi = pre.potential.unwrap();
        let tau = pre.closing.tau;
        assert!(tau.re.abs() < 1e-9 && tau.im.abs() > 1.0);
        // Half the period moves the potential visibly…
        let half = FlowParameter::period(2, tau / 2.0);
        let d_half = stabilizer_defect(&xi, &half, 400).unwrap();
        assert!(d_half > 1e-2, "half-period defect {d_half}");
        // …while the full period is a stabilizer direction.
        let full = FlowParameter::period(2, tau);
        let d_full = stabilizer_defect(&xi, &full, 800).unwrap();
        assert!(d_full <= 1e-6, "period stabilizer defect {d_full}");
    }

    #[test]
    fn closing_tau_is_a_stabilizer_direction() {
        // The period from the closing solver maps to t = (τ, 0, …, 0); for
        // the rotational preset τ is real, which lies on the R-slice kernel,
        // so the potential is fixed.
        use crate::family::{preset, PresetSpec};
        let beta = 3.0 - 2.0 * 2.0f64.sqrt();
        let pre = preset(PresetSpec::Genus1Rotational { beta }).unwrap();
        let xi = pre.potential.unwrap();
        let t = FlowParameter::period(1, pre.closing.tau);
        let d = stabilizer_defect(&xi, &t, 100).unwrap();
        assert!(
            d <= 1e-6,
            "stabilizer defect {d} at tau = {}",
            pre.closing.tau
        );
    }
}
