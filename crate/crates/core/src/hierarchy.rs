//! Exact symbolic engine for the Pinkall–Sterling iteration.
//!
//! Elements are formal differential polynomials in a real solution ω of the
//! sinh-Gordon equation: finite sums of terms
//!
//! ```text
//!     coeff · γ^k · e^{mω} · ∏ ∂_z^{a_i} ∂_z̄^{b_i} ω
//! ```
//!
//! with exact rational-complex coefficients and a formal unimodular constant
//! γ (γ̄ = γ^{-1}). The normal form contains no mixed derivative: every
//! ∂_z∂_z̄ω is rewritten through the sinh-Gordon reduction
//!
//! ```text
//!     ω_{zz̄} = (e^{-2ω} − e^{2ω})/16
//! ```
//!
//! so equality of normal forms is decidable and canonical. On top of the
//! algebra sits the hierarchy step: given u_n solving the linearized
//! sinh-Gordon equation, the auxiliary potential φ_n with φ_{n;z} = 4ω_z u_{n;z}
//! and φ_{n;z̄} = −u_n sinh ω cosh ω is found by an exact linear solve over the
//! graded monomial basis, and
//!
//! ```text
//!     τ_n     = 2iγ̄(φ_n/2 − u_{n;z}) + c_{n+1}
//!     u_{n+1} = (u_n)_{zz} − ω_z φ_n − 4i c_{n+1} ω_z
//!     σ_{n+1} = γ e^{2ω} τ_n + 4iγ (u_{n+1})_{z̄}
//! ```
//!
//! which reproduces the classical ladder u₁ = ω_z, u₂ = ω_{zzz} − 2ω_z³, …
//! exactly. The integration constant c_{n+1} is free; it shifts u_{n+1} by
//! −4i c_{n+1} ω_z.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rng::Rng;

/// Exact rational complex number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q {
    pub re: BigRational,
    pub im: BigRational,
}

impl Q {
    pub fn zero() -> Self {
        Q {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Q {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    /// re_n/re_d + (im_n/im_d)·i
    pub fn new(re_n: i64, re_d: i64, im_n: i64, im_d: i64) -> Self {
        Q {
            re: BigRational::new(BigInt::from(re_n), BigInt::from(re_d)),
            im: BigRational::new(BigInt::from(im_n), BigInt::from(im_d)),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Q::new(n, 1, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Q) -> Q {
        Q {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &Q) -> Q {
        Q {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn mul(&self, o: &Q) -> Q {
        Q {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn neg(&self) -> Q {
        Q {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inv(&self) -> Q {
        let n = &self.re * &self.re + &self.im * &self.im;
        Q {
            re: &self.re / &n,
            im: -&self.im / &n,
        }
    }

    pub fn mul_int(&self, n: i64) -> Q {
        let k = BigRational::from(BigInt::from(n));
        Q {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// A pure derivative ∂_z^z ∂_z̄^zb ω; normal form forbids both orders positive
/// at once, and (0, 0) never occurs (bare ω enters only through e^{mω}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Deriv {
    pub z: u32,
    pub zb: u32,
}

impl Deriv {
    pub fn dz(order: u32) -> Self {
        Deriv { z: order, zb: 0 }
    }

    pub fn dzb(order: u32) -> Self {
        Deriv { z: 0, zb: order }
    }
}

/// Multiset of derivatives, sorted.
pub type Monomial = Vec<(Deriv, u32)>;

/// Term key: (γ power, e^{mω} weight, monomial).
type Key = (i32, i32, Monomial);

/// Differential polynomial in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffPoly {
    terms: BTreeMap<Key, Q>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut map: BTreeMap<Deriv, u32> = BTreeMap::new();
    for (d, e) in a.iter().chain(b.iter()) {
        *map.entry(*d).or_insert(0) += e;
    }
    map.into_iter().collect()
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Q) -> Self {
        let mut p = DiffPoly::zero();
        p.push(0, 0, vec![], c);
        p
    }

    /// A single term coeff·γ^gamma·e^{weight·ω}·mono.
    pub fn term(gamma: i32, weight: i32, mono: Monomial, coeff: Q) -> Self {
        let mut p = DiffPoly::zero();
        p.push(gamma, weight, mono, coeff);
        p
    }

    /// ∂_z^k ω.
    pub fn dz_omega(order: u32) -> Self {
        DiffPoly::term(0, 0, vec![(Deriv::dz(order), 1)], Q::one())
    }

    /// ∂_z̄^k ω.
    pub fn dzb_omega(order: u32) -> Self {
        DiffPoly::term(0, 0, vec![(Deriv::dzb(order), 1)], Q::one())
    }

    /// e^{mω}.
    pub fn exp_omega(m: i32) -> Self {
        DiffPoly::term(0, m, vec![], Q::one())
    }

    fn push(&mut self, gamma: i32, weight: i32, mono: Monomial, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        let key = (gamma, weight, mono);
        match self.terms.get_mut(&key) {
            Some(entry) => {
                *entry = entry.add(&coeff);
                if entry.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, coeff);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for ((g, w, m), c) in &o.terms {
            out.push(*g, *w, m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &DiffPoly) -> DiffPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> DiffPoly {
        if s.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.mul(s)))
                .collect(),
        }
    }

    pub fn mul(&self, o: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for ((g1, w1, m1), c1) in &self.terms {
            for ((g2, w2, m2), c2) in &o.terms {
                out.push(g1 + g2, w1 + w2, mono_mul(m1, m2), c1.mul(c2));
            }
        }
        out
    }

    /// Formal z-derivative, reduced to normal form.
    pub fn d_z(&self) -> DiffPoly {
        self.derive(true)
    }

    /// Formal z̄-derivative, reduced to normal form.
    pub fn d_zbar(&self) -> DiffPoly {
        self.derive(false)
    }

    fn derive(&self, by_z: bool) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for ((g, w, mono), coeff) in &self.terms {
            // Weight factor: ∂(e^{mω}) = m·ω_• e^{mω}.
            if *w != 0 {
                let omega1 = if by_z {
                    DiffPoly::dz_omega(1)
                } else {
                    DiffPoly::dzb_omega(1)
                };
                let rest = DiffPoly::term(*g, *w, mono.clone(), coeff.mul_int(*w as i64));
                out = out.add(&rest.mul(&omega1));
            }
            // Product rule over the derivative factors.
            for (i, (d, e)) in mono.iter().enumerate() {
                let mut rest: Monomial = mono.clone();
                if *e == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 -= 1;
                }
                let head = DiffPoly::term(*g, *w, rest, coeff.mul_int(*e as i64));
                out = out.add(&head.mul(&derive_single(*d, by_z)));
            }
        }
        out
    }

    /// Numeric evaluation. `jet` must supply every derivative appearing in
    /// the polynomial; ω enters through e^{mω} and γ through its power.
    pub fn eval_jet(
        &self,
        jet: &BTreeMap<Deriv, C64>,
        omega: f64,
        gamma: C64,
    ) -> Result<C64, EvalError> {
        #[allow(unused_imports)]
        use num_traits::Float;
        let mut acc = C64::ZERO;
        for ((g, w, mono), coeff) in &self.terms {
            let mut v = coeff.to_c64() * gamma.powi(*g) * C64::new((*w as f64 * omega).exp(), 0.0);
            for (d, e) in mono {
                let val = jet.get(d).ok_or(EvalError::MissingJet(*d))?;
                v *= val.powi(*e as i32);
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Stable text rendering for golden tests: `w_z`, `w_zz`, … are pure
    /// z-derivatives, `w_b`, `w_bb`, … pure z̄-derivatives, `e{m w}` the
    /// exponential weight and `g^k` the formal unimodular constant.
    pub fn render(&self) -> String {
        use core::fmt::Write;
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut s = String::new();
        for (idx, ((g, w, mono), coeff)) in self.terms.iter().enumerate() {
            let (sign, mag) = coeff_sign_mag(coeff);
            if idx == 0 {
                if sign < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(if sign < 0 { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let mag_str = render_mag(&mag);
            if mag_str != "1" || (mono.is_empty() && *g == 0 && *w == 0) {
                factors.push(mag_str);
            }
            if *g != 0 {
                let mut f = String::new();
                let _ = write!(f, "g^{g}");
                factors.push(f);
            }
            if *w != 0 {
                let mut f = String::new();
                let _ = write!(f, "e{{{w}w}}");
                factors.push(f);
            }
            for (d, e) in mono {
                let mut f = String::from("w_");
                for _ in 0..d.z {
                    f.push('z');
                }
                for _ in 0..d.zb {
                    f.push('b');
                }
                if *e > 1 {
                    let _ = write!(f, "^{e}");
                }
                factors.push(f);
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

fn coeff_sign_mag(c: &Q) -> (i32, Q) {
    let neg = if !c.re.is_zero() {
        c.re.is_negative()
    } else {
        c.im.is_negative()
    };
    if neg {
        (-1, c.neg())
    } else {
        (1, c.clone())
    }
}

fn render_mag(c: &Q) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    if c.im.is_zero() {
        let _ = write!(s, "{}", rat_str(&c.re));
    } else if c.re.is_zero() {
        let im = rat_str(&c.im);
        if im == "1" {
            s.push('i');
        } else {
            let _ = write!(s, "({im})i");
        }
    } else {
        let _ = write!(
            s,
            "({}{}{}i)",
            rat_str(&c.re),
            if c.im.is_negative() { "" } else { "+" },
            rat_str(&c.im)
        );
    }
    s
}

fn rat_str(r: &BigRational) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    if r.denom().is_one() {
        let _ = write!(s, "{}", r.numer());
    } else {
        let _ = write!(s, "{}/{}", r.numer(), r.denom());
    }
    s
}

/// ω_{zz̄} reduction target: (e^{-2ω} − e^{2ω})/16.
fn reduction() -> DiffPoly {
    DiffPoly::term(0, -2, vec![], Q::new(1, 16, 0, 1)).add(&DiffPoly::term(
        0,
        2,
        vec![],
        Q::new(-1, 16, 0, 1),
    ))
}

/// sinh ω cosh ω = (e^{2ω} − e^{-2ω})/4.
fn sinh_cosh() -> DiffPoly {
    DiffPoly::term(0, 2, vec![], Q::new(1, 4, 0, 1)).add(&DiffPoly::term(
        0,
        -2,
        vec![],
        Q::new(-1, 4, 0, 1),
    ))
}

/// Derivative of a single ∂_z^a∂_z̄^b ω factor, reduced.
fn derive_single(d: Deriv, by_z: bool) -> DiffPoly {
    if by_z {
        if d.zb == 0 {
            DiffPoly::dz_omega(d.z + 1)
        } else {
            // ∂_z ∂_z̄^b ω = ∂_z̄^{b−1}(ω_{zz̄})
            let mut r = reduction();
            for _ in 0..(d.zb - 1) {
                r = r.d_zbar();
            }
            r
        }
    } else if d.z == 0 {
        DiffPoly::dzb_omega(d.zb + 1)
    } else {
        let mut r = reduction();
        for _ in 0..(d.z - 1) {
            r = r.d_z();
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalError {
    MissingJet(Deriv),
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::MissingJet(d) => {
                write!(f, "missing jet entry for d_z^{} d_zbar^{} omega", d.z, d.zb)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// Errors of the hierarchy step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepError {
    /// The input u does not solve the linearized sinh-Gordon equation.
    NotLinearizedSolution,
    /// The antiderivative system for φ is inconsistent (engine fault).
    PhiInconsistent,
}

impl core::fmt::Display for StepError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StepError::NotLinearizedSolution => {
                write!(f, "input u is not a linearized sinh-Gordon solution")
            }
            StepError::PhiInconsistent => write!(f, "phi antiderivative system inconsistent"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StepError {}

/// One level of the hierarchy.
#[derive(Clone, Debug)]
pub struct HierarchyLevel {
    pub n: usize,
    pub u: DiffPoly,
    pub sigma: DiffPoly,
    pub tau: DiffPoly,
    /// Integration constant chosen when producing this level.
    pub c: Q,
}

impl HierarchyLevel {
    /// Level 0: u ≡ 0.
    pub fn start() -> Self {
        HierarchyLevel {
            n: 0,
            u: DiffPoly::zero(),
            sigma: DiffPoly::zero(),
            tau: DiffPoly::zero(),
            c: Q::zero(),
        }
    }
}

/// Normal form of the linearized sinh-Gordon operator applied to u:
/// 4 u_{zz̄} + u (e^{2ω} + e^{-2ω})/2, the expansion of Δu + u cosh 2ω.
pub fn linearized_residual(u: &DiffPoly) -> DiffPoly {
    let uzzb = u.d_z().d_zbar();
    let cosh2 = DiffPoly::term(0, 2, vec![], Q::new(1, 2, 0, 1)).add(&DiffPoly::term(
        0,
        -2,
        vec![],
        Q::new(1, 2, 0, 1),
    ));
    uzzb.scale(&Q::from_int(4)).add(&u.mul(&cosh2))
}

/// All monomials in pure z-derivatives of total order `order` (integer
/// partitions).
fn z_pure_monomials(order: u32) -> Vec<Monomial> {
    fn rec(remaining: u32, max_part: u32, acc: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if remaining == 0 {
            let mut map: BTreeMap<Deriv, u32> = BTreeMap::new();
            for p in acc.iter() {
                *map.entry(Deriv::dz(*p)).or_insert(0) += 1;
            }
            out.push(map.into_iter().collect());
            return;
        }
        let top = max_part.min(remaining);
        for p in (1..=top).rev() {
            acc.push(p);
            rec(remaining - p, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if order > 0 {
        rec(order, order, &mut vec![], &mut out);
    }
    out
}

/// Solve ∂_z φ = rhs for a z-pure, weight-free, γ-free φ over the graded
/// monomial basis, exactly. The additive constant is fixed to zero.
fn solve_phi(rhs: &DiffPoly) -> Result<DiffPoly, StepError> {
    if rhs.is_zero() {
        return Ok(DiffPoly::zero());
    }
    // The right-hand side must be z-pure with no weights or γ's.
    let mut orders: Vec<u32> = Vec::new();
    for ((g, w, mono), _) in &rhs.terms {
        if *g != 0 || *w != 0 {
            return Err(StepError::PhiInconsistent);
        }
        let mut total = 0u32;
        for (d, e) in mono {
            if d.zb != 0 {
                return Err(StepError::PhiInconsistent);
            }
            total += d.z * e;
        }
        if total == 0 {
            return Err(StepError::PhiInconsistent);
        }
        if !orders.contains(&(total - 1)) {
            orders.push(total - 1);
        }
    }
    // Candidate monomials of each needed total order.
    let mut candidates: Vec<Monomial> = Vec::new();
    for w in orders {
        candidates.extend(z_pure_monomials(w));
    }
    // Columns: ∂_z of each candidate. Rows: all monomials encountered.
    let images: Vec<DiffPoly> = candidates
        .iter()
        .map(|m| DiffPoly::term(0, 0, m.clone(), Q::one()).d_z())
        .collect();
    let mut row_keys: Vec<Key> = Vec::new();
    for img in images.iter().chain(core::iter::once(rhs)) {
        for k in img.terms.keys() {
            if !row_keys.contains(k) {
                row_keys.push(k.clone());
            }
        }
    }
    let nrows = row_keys.len();
    let ncols = candidates.len();
    let mut a: Vec<Vec<Q>> = vec![vec![Q::zero(); ncols + 1]; nrows];
    for (j, img) in images.iter().enumerate() {
        for (k, v) in &img.terms {
            let i = row_keys.iter().position(|rk| rk == k).unwrap();
            a[i][j] = v.clone();
        }
    }
    for (k, v) in &rhs.terms {
        let i = row_keys.iter().position(|rk| rk == k).unwrap();
        a[i][ncols] = v.clone();
    }
    // Exact Gaussian elimination.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut row = 0usize;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].inv();
        for j in col..=ncols {
            a[row][j] = a[row][j].mul(&inv);
        }
        for r in 0..nrows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=ncols {
                    let delta = a[row][j].mul(&f);
                    a[r][j] = a[r][j].sub(&delta);
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == nrows {
            break;
        }
    }
    for r in row..nrows {
        if !a[r][ncols].is_zero() {
            return Err(StepError::PhiInconsistent);
        }
    }
    let mut phi = DiffPoly::zero();
    for (col, mono) in candidates.iter().enumerate() {
        if let Some(r) = pivot_of_col[col] {
            let v = a[r][ncols].clone();
            if !v.is_zero() {
                phi = phi.add(&DiffPoly::term(0, 0, mono.clone(), v));
            }
        }
    }
    Ok(phi)
}

/// The auxiliary potential φ for u: ∂_z φ = 4ω_z u_z and ∂_z̄ φ = −u sinhω coshω,
/// normalized to zero constant term.
pub fn phi_for(u: &DiffPoly) -> Result<DiffPoly, StepError> {
    let rhs_z = DiffPoly::dz_omega(1).mul(&u.d_z()).scale(&Q::from_int(4));
    let phi = solve_phi(&rhs_z)?;
    // Cross-check the z̄ equation exactly; failure is an engine fault.
    let want = u.mul(&sinh_cosh()).neg();
    if !phi.d_zbar().sub(&want).is_zero() {
        return Err(StepError::PhiInconsistent);
    }
    Ok(phi)
}

/// One Pinkall–Sterling step with integration constant `c_next`.
pub fn ps_step(level: &HierarchyLevel, c_next: Q) -> Result<HierarchyLevel, StepError> {
    if !linearized_residual(&level.u).is_zero() {
        return Err(StepError::NotLinearizedSolution);
    }
    let u = &level.u;
    let phi = phi_for(u)?;
    // τ_n = 2iγ̄(φ/2 − u_z) + c_next
    let two_i_gbar = DiffPoly::term(-1, 0, vec![], Q::new(0, 1, 2, 1));
    let tau = two_i_gbar
        .mul(&phi.scale(&Q::new(1, 2, 0, 1)).sub(&u.d_z()))
        .add(&DiffPoly::constant(c_next.clone()));
    // u_{n+1} = u_zz − ω_z φ − 4i c_next ω_z
    let u_next = u
        .d_z()
        .d_z()
        .sub(&DiffPoly::dz_omega(1).mul(&phi))
        .sub(&DiffPoly::dz_omega(1).scale(&c_next.mul(&Q::new(0, 1, 4, 1))));
    // σ_{n+1} = γ e^{2ω} τ_n + 4iγ (u_{n+1})_{z̄}
    let sigma_next = DiffPoly::term(1, 2, vec![], Q::one())
        .mul(&tau)
        .add(&DiffPoly::term(1, 0, vec![], Q::new(0, 1, 4, 1)).mul(&u_next.d_zbar()));
    Ok(HierarchyLevel {
        n: level.n + 1,
        u: u_next,
        sigma: sigma_next,
        tau,
        c: c_next,
    })
}

/// The canonical ladder: constants c₁ = i/4 and c_{n>1} = 0, from u₀ = 0.
pub fn canonical_levels(n_max: usize) -> Vec<HierarchyLevel> {
    let mut levels = vec![HierarchyLevel::start()];
    for n in 0..n_max {
        let c = if n == 0 {
            Q::new(0, 1, 1, 4)
        } else {
            Q::zero()
        };
        let next = ps_step(levels.last().unwrap(), c).expect("canonical ladder step");
        levels.push(next);
    }
    levels
}

/// Random normal-form polynomial for property tests.
pub fn random_diffpoly(rng: &mut Rng, max_terms: usize) -> DiffPoly {
    let mut p = DiffPoly::zero();
    let nterms = 1 + (rng.next_u64() as usize) % max_terms;
    for _ in 0..nterms {
        let g = (rng.next_u64() % 3) as i32 - 1;
        let w = 2 * ((rng.next_u64() % 3) as i32 - 1);
        let nfac = (rng.next_u64() % 3) as usize;
        let mut mono: BTreeMap<Deriv, u32> = BTreeMap::new();
        for _ in 0..nfac {
            let ord = 1 + (rng.next_u64() % 3) as u32;
            let d = if rng.next_u64() % 2 == 0 {
                Deriv::dz(ord)
            } else {
                Deriv::dzb(ord)
            };
            *mono.entry(d).or_insert(0) += 1;
        }
        let num = (rng.next_u64() % 9) as i64 - 4;
        let den = 1 + (rng.next_u64() % 4) as i64;
        let inum = (rng.next_u64() % 9) as i64 - 4;
        p = p.add(&DiffPoly::term(
            g,
            w,
            mono.into_iter().collect(),
            Q::new(num, den, inum, den),
        ));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_zbar_of_omega_z_is_reduction() {
        let got = DiffPoly::dz_omega(1).d_zbar();
        assert_eq!(got, reduction());
        assert_eq!(got.render(), "1/16*e{-2w} - 1/16*e{2w}");
    }

    #[test]
    fn d_z_of_constant_is_zero() {
        assert!(DiffPoly::constant(Q::new(3, 7, -1, 2)).d_z().is_zero());
    }

    #[test]
    fn mixed_partials_commute_on_exp() {
        let p = DiffPoly::exp_omega(2);
        let a = p.d_z().d_zbar();
        let b = p.d_zbar().d_z();
        assert_eq!(a, b);
    }

    #[test]
    fn mixed_partials_commute_on_random_corpus() {
        let mut rng = Rng::new(42);
        for k in 0..100 {
            let p = random_diffpoly(&mut rng, 4);
            let a = p.d_z().d_zbar();
            let b = p.d_zbar().d_z();
            assert_eq!(a, b, "corpus item {k}: {}", p.render());
        }
    }

    #[test]
    fn ladder_start_gives_omega_z() {
        // From u₀ = 0 with τ-constant i/4: u₁ = ω_z.
        let l0 = HierarchyLevel::start();
        let l1 = ps_step(&l0, Q::new(0, 1, 1, 4)).unwrap();
        assert_eq!(l1.u, DiffPoly::dz_omega(1));
        assert_eq!(l1.u.render(), "w_z");
        // τ₀ = i/4 and σ₁ = (i/4)γe^{-2ω}.
        assert_eq!(l1.tau, DiffPoly::constant(Q::new(0, 1, 1, 4)));
        assert_eq!(l1.sigma, DiffPoly::term(1, -2, vec![], Q::new(0, 1, 1, 4)));
    }

    #[test]
    fn ladder_reproduces_printed_u2() {
        let levels = canonical_levels(2);
        let want = DiffPoly::dz_omega(3).sub(&DiffPoly::term(
            0,
            0,
            vec![(Deriv::dz(1), 3)],
            Q::from_int(2),
        ));
        assert_eq!(levels[2].u, want);
        assert_eq!(levels[2].u.render(), "-2*w_z^3 + w_zzz");
    }

    #[test]
    fn ladder_u3_and_the_printed_power() {
        // The iteration yields ω_{zzzzz} − 10 ω_{zzz} ω_z² − 10 ω_{zz}² ω_z + 6 ω_z⁵;
        // the ω_{zzz} term carries ω_z squared, not cubed.
        let levels = canonical_levels(3);
        let u3 = &levels[3].u;
        let want = DiffPoly::dz_omega(5)
            .sub(&DiffPoly::term(
                0,
                0,
                vec![(Deriv::dz(1), 2), (Deriv::dz(3), 1)],
                Q::from_int(10),
            ))
            .sub(&DiffPoly::term(
                0,
                0,
                vec![(Deriv::dz(1), 1), (Deriv::dz(2), 2)],
                Q::from_int(10),
            ))
            .add(&DiffPoly::term(
                0,
                0,
                vec![(Deriv::dz(1), 5)],
                Q::from_int(6),
            ));
        assert_eq!(u3, &want);
        // Computed normal form, recorded as the golden text.
        assert_eq!(
            u3.render(),
            "-10*w_z*w_zz^2 - 10*w_z^2*w_zzz + 6*w_z^5 + w_zzzzz"
        );
        // The variant with ω_{zzz}ω_z³ is not what the iteration produces.
        let printed_variant = DiffPoly::dz_omega(5)
            .sub(&DiffPoly::term(
                0,
                0,
                vec![(Deriv::dz(1), 3), (Deriv::dz(3), 1)],
                Q::from_int(10),
            ))
            .sub(&DiffPoly::term(
                0,
                0,
                vec![(Deriv::dz(1), 1), (Deriv::dz(2), 2)],
                Q::from_int(10),
            ))
            .add(&DiffPoly::term(
                0,
                0,
                vec![(Deriv::dz(1), 5)],
                Q::from_int(6),
            ));
        assert_ne!(u3, &printed_variant);
    }

    #[test]
    fn linearized_residual_vanishes_along_ladder() {
        let levels = canonical_levels(5);
        for l in &levels {
            assert!(
                linearized_residual(&l.u).is_zero(),
                "level {} residual {}",
                l.n,
                linearized_residual(&l.u).render()
            );
        }
        // Each u_n carries the leading term ∂_z^{2n−1}ω with coefficient 1:
        // with every jet entry zero except ∂_z^{2n−1}ω = 1, all nonlinear
        // monomials vanish and only the leading one survives.
        for (n, l) in levels.iter().enumerate().skip(1) {
            let mut jet = BTreeMap::new();
            for k in 1..=(2 * n as u32) {
                jet.insert(Deriv::dz(k), C64::ZERO);
                jet.insert(Deriv::dzb(k), C64::ZERO);
            }
            jet.insert(Deriv::dz(2 * n as u32 - 1), C64::ONE);
            let lead = l.u.eval_jet(&jet, 0.0, C64::ONE).unwrap();
            assert!((lead - C64::ONE).norm() < 1e-15, "level {n} leading {lead}");
        }
        let u5 = &levels[5].u;
        assert!(u5.num_terms() >= 10, "u5 has {} terms", u5.num_terms());
    }

    #[test]
    fn residual_examples() {
        assert!(linearized_residual(&DiffPoly::dz_omega(1)).is_zero());
        assert!(linearized_residual(&DiffPoly::zero()).is_zero());
        let u2 = DiffPoly::dz_omega(3).sub(&DiffPoly::term(
            0,
            0,
            vec![(Deriv::dz(1), 3)],
            Q::from_int(2),
        ));
        assert!(linearized_residual(&u2).is_zero());
    }

    #[test]
    fn constant_freedom_shifts_by_omega_z() {
        let levels = canonical_levels(1);
        let c = Q::new(1, 3, -2, 5);
        let cp = Q::new(-1, 7, 1, 2);
        let a = ps_step(&levels[1], c.clone()).unwrap();
        let b = ps_step(&levels[1], cp.clone()).unwrap();
        // u_{n+1} differs by −4i(c−c′)ω_z.
        let diff = a.u.sub(&b.u);
        let want = DiffPoly::dz_omega(1).scale(&c.sub(&cp).mul(&Q::new(0, 1, -4, 1)));
        assert_eq!(diff, want);
    }

    #[test]
    fn eval_jet_examples() {
        let mut jet = BTreeMap::new();
        jet.insert(Deriv::dz(1), C64::new(2.0, 1.0));
        let p = DiffPoly::dz_omega(1);
        assert_eq!(p.eval_jet(&jet, 0.0, C64::ONE).unwrap(), C64::new(2.0, 1.0));

        let e2w = DiffPoly::exp_omega(2);
        assert!((e2w.eval_jet(&jet, 0.0, C64::ONE).unwrap() - C64::ONE).norm() < 1e-15);

        // u₂ with jet {ω_z: 1, ω_zzz: 5} → 5 − 2 = 3.
        let mut jet2 = BTreeMap::new();
        jet2.insert(Deriv::dz(1), C64::ONE);
        jet2.insert(Deriv::dz(3), C64::new(5.0, 0.0));
        let u2 = canonical_levels(2)[2].u.clone();
        assert!((u2.eval_jet(&jet2, 0.0, C64::ONE).unwrap() - C64::new(3.0, 0.0)).norm() < 1e-15);

        // Missing entry errors out.
        let err = u2.eval_jet(&jet, 0.0, C64::ONE).unwrap_err();
        assert_eq!(err, EvalError::MissingJet(Deriv::dz(3)));

        // Formal γ evaluates through its power: τ₁ = 2iγ̄(ω_z² − ω_zz) + 0.
        let tau1 = canonical_levels(2)[2].tau.clone();
        let mut jet3 = BTreeMap::new();
        jet3.insert(Deriv::dz(1), C64::new(2.0, 0.0));
        jet3.insert(Deriv::dz(2), C64::new(1.0, 0.0));
        let gamma = C64::I;
        // 2i·γ^{-1}·(4 − 1) = 6i/i = 6.
        let got = tau1.eval_jet(&jet3, 0.0, gamma).unwrap();
        assert!((got - C64::new(6.0, 0.0)).norm() < 1e-14, "{got}");
    }

    #[test]
    fn phi_matches_derivative_system() {
        // φ = 2ω_z² for u = ω_z.
        let phi = phi_for(&DiffPoly::dz_omega(1)).unwrap();
        assert_eq!(
            phi,
            DiffPoly::term(0, 0, vec![(Deriv::dz(1), 2)], Q::from_int(2))
        );
    }

    #[test]
    fn ps_step_rejects_non_solutions() {
        let bad = DiffPoly::term(0, 0, vec![(Deriv::dz(2), 1)], Q::one());
        let lvl = HierarchyLevel {
            n: 0,
            u: bad,
            sigma: DiffPoly::zero(),
            tau: DiffPoly::zero(),
            c: Q::zero(),
        };
        assert_eq!(
            ps_step(&lvl, Q::zero()).unwrap_err(),
            StepError::NotLinearizedSolution
        );
    }
}
