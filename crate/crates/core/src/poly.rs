//! Dense complex polynomials.
//!
//! Coefficients ascending in the variable. Root finding is Aberth–Ehrlich
//! simultaneous iteration followed by a Newton polish step per root; for the
//! degrees that occur here (≤ 2g+2 with g ≤ 2 in the presets) this is exact
//! to near machine precision.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    /// `coeffs[k]` multiplies λ^k.
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// Monic product Π (λ − r_i) scaled by `lead`.
    pub fn from_roots(lead: C64, roots: &[C64]) -> Self {
        let mut p = Poly::constant(lead);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, C64::ONE]));
        }
        p
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if last.norm() == 0.0 && self.coeffs.len() > 1 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0 {
            self.coeffs.clear();
        }
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::ZERO)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * C64::new(k as f64, 0.0))
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![C64::ZERO; n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(k) + other.coeff(k);
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-C64::ONE))
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![C64::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Euclidean division, returning (quotient, remainder).
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![C64::ZERO; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let q = rem[k] / lead;
            quot[k - dd] = q;
            for j in 0..=dd {
                let val = divisor.coeff(j) * q;
                rem[k - dd + j] -= val;
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// All roots (with multiplicity unfolded) via Aberth–Ehrlich plus one
    /// Newton polish step per root.
    pub fn roots(&self) -> Vec<C64> {
        let deg = match self.degree() {
            None | Some(0) => return vec![],
            Some(d) => d,
        };
        let lead = self.coeffs[deg];
        let monic: Vec<C64> = self.coeffs.iter().map(|c| c / lead).collect();
        let p = Poly { coeffs: monic };
        let dp = p.derivative();

        // Initial guesses on a circle of the root-magnitude scale.
        let scale = p
            .coeffs
            .iter()
            .take(deg)
            .enumerate()
            .fold(0.0f64, |m, (k, c)| {
                m.max(c.norm().powf(1.0 / (deg - k) as f64))
            })
            .max(1e-30);
        let mut zs: Vec<C64> = (0..deg)
            .map(|k| {
                let ang = 2.0 * core::f64::consts::PI * (k as f64 + 0.35) / deg as f64 + 0.42;
                C64::from_polar(scale * 1.2, ang)
            })
            .collect();

        for _ in 0..300 {
            let mut delta_max = 0.0f64;
            let snapshot = zs.clone();
            for i in 0..deg {
                let z = snapshot[i];
                let pv = p.eval(z);
                let dv = dp.eval(z);
                if pv.norm() == 0.0 {
                    continue;
                }
                let newton = pv / dv;
                let mut sum = C64::ZERO;
                for (j, &w) in snapshot.iter().enumerate() {
                    if j != i {
                        sum += C64::ONE / (z - w);
                    }
                }
                let denom = C64::ONE - newton * sum;
                let step = newton / denom;
                zs[i] = z - step;
                delta_max = delta_max.max(step.norm());
            }
            if delta_max < 1e-14 * scale.max(1.0) {
                break;
            }
        }
        // Newton polish.
        for z in zs.iter_mut() {
            for _ in 0..2 {
                let pv = p.eval(*z);
                let dv = dp.eval(*z);
                if dv.norm() > 0.0 {
                    let step = pv / dv;
                    if step.norm() < 1.0 {
                        *z -= step;
                    }
                }
            }
        }
        zs
    }
}
