//! Numerical z-evolution: the polynomial Killing field under the Lax
//! equation dζ = [ζ, α(ζ)] and the extended frame under dF = F·α(ζ),
//! integrated jointly with classical RK4 on a rectangular grid.
//!
//! The connection form is read off the λ^{-1} and λ⁰ coefficients of ζ:
//!
//! ```text
//!   α(ζ) = [[α₀, β₋₁λ^{-1}], [γ₀, −α₀]] dz − [[ᾱ₀, γ̄₀], [β̄₋₁λ, −ᾱ₀]] dz̄
//! ```
//!
//! The conformal factor is recovered from 4β₋₁ = i e^ω; the run aborts if
//! Im(4β₋₁) fails to stay positive.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::loop_algebra::MatrixLaurent;
use crate::mat2::Mat2;

#[derive(Clone, Debug)]
pub enum FlowError {
    /// β₋₁ vanished: degenerate conformal factor.
    DegenerateBeta,
    /// 4β₋₁ left the ray i·ℝ⁺; ω cannot be recovered.
    OmegaBreach { at: C64, value: C64 },
    /// Richardson local error estimate exceeded the budget.
    StepRejected { estimate: f64, budget: f64 },
    /// Grid steps/extents invalid or origin not on a node.
    BadGrid(&'static str),
    /// Requested τ lies outside the grid extents.
    TauOutsideGrid,
    /// Requested λ missing from the frame grid.
    LambdaMissing,
}

impl core::fmt::Display for FlowError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FlowError::DegenerateBeta => write!(f, "degenerate conformal factor: beta_-1 = 0"),
            FlowError::OmegaBreach { at, value } => write!(
                f,
                "4*beta_-1 = {value} left the ray i*R+ at z = {at}; omega undefined"
            ),
            FlowError::StepRejected { estimate, budget } => {
                write!(
                    f,
                    "local error estimate {estimate:.3e} exceeds budget {budget:.3e}"
                )
            }
            FlowError::BadGrid(s) => write!(f, "bad grid: {s}"),
            FlowError::TauOutsideGrid => write!(f, "period candidate lies outside grid extents"),
            FlowError::LambdaMissing => write!(f, "lambda sample missing from frame grid"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FlowError {}

/// Rectangular grid of z-samples containing the origin on a node.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub hx: f64,
    pub y0: f64,
    pub y1: f64,
    pub hy: f64,
}

impl GridSpec {
    /// Grid over [0, x1] × [0, y1] with steps adjusted to divide exactly.
    pub fn from_extent(x1: f64, hx: f64, y1: f64, hy: f64) -> Self {
        GridSpec {
            x0: 0.0,
            x1,
            hx,
            y0: 0.0,
            y1,
            hy,
        }
    }

    pub fn nx(&self) -> usize {
        ((self.x1 - self.x0) / self.hx).round() as usize + 1
    }

    pub fn ny(&self) -> usize {
        ((self.y1 - self.y0) / self.hy).round() as usize + 1
    }

    /// Effective steps after snapping the extents to whole steps.
    pub fn hx_eff(&self) -> f64 {
        if self.nx() > 1 {
            (self.x1 - self.x0) / (self.nx() - 1) as f64
        } else {
            self.hx
        }
    }

    pub fn hy_eff(&self) -> f64 {
        if self.ny() > 1 {
            (self.y1 - self.y0) / (self.ny() - 1) as f64
        } else {
            self.hy
        }
    }

    pub fn z(&self, i: usize, j: usize) -> C64 {
        C64::new(
            self.x0 + i as f64 * self.hx_eff(),
            self.y0 + j as f64 * self.hy_eff(),
        )
    }

    /// Index of the origin node; errors unless 0 is a node in both axes.
    pub fn origin(&self) -> Result<(usize, usize), FlowError> {
        if !(self.hx > 0.0 && self.hy > 0.0) {
            return Err(FlowError::BadGrid("steps must be positive"));
        }
        if self.x1 < self.x0 || self.y1 < self.y0 {
            return Err(FlowError::BadGrid("extents reversed"));
        }
        let i = (-self.x0 / self.hx_eff()).round();
        let j = (-self.y0 / self.hy_eff()).round();
        let xi = self.x0 + i * self.hx_eff();
        let yj = self.y0 + j * self.hy_eff();
        if xi.abs() > 1e-9 || yj.abs() > 1e-9 || i < 0.0 || j < 0.0 {
            return Err(FlowError::BadGrid("origin must lie on a grid node"));
        }
        Ok((i as usize, j as usize))
    }
}

/// Connection-form coefficients read from a Killing field value. `a0` is
/// the dz-diagonal of the connection, which is HALF the λ⁰ diagonal of ζ:
/// the unitary-factor computation pins the diagonal to 2u = (ζ₀)₁₁, and only
/// this normalization keeps 4β₋₁ on the ray i·e^ω along the flow
/// (dβ₋₁ = 2 Re(u·dz) β₋₁ = β₋₁ dω).
#[derive(Clone, Copy, Debug)]
pub struct ConnectionCoeffs {
    pub a0: C64,
    pub bm1: C64,
    pub g0: C64,
}

/// Reads (α₀/2, β₋₁, γ₀) off the λ^{-1}, λ⁰ coefficients of ζ.
pub fn alpha_of(zeta: &MatrixLaurent) -> Result<ConnectionCoeffs, FlowError> {
    let bm1 = zeta.coeff(-1).0[0][1];
    if bm1.norm() == 0.0 {
        return Err(FlowError::DegenerateBeta);
    }
    Ok(ConnectionCoeffs {
        a0: zeta.coeff(0).0[0][0] * 0.5,
        bm1,
        g0: zeta.coeff(0).0[1][0],
    })
}

impl ConnectionCoeffs {
    /// dz-coefficient of α(ζ) at spectral parameter λ.
    pub fn dz_part(&self, lambda: C64) -> Mat2 {
        Mat2::traceless(self.a0, self.bm1 / lambda, self.g0)
    }

    /// dz̄-coefficient of α(ζ) at spectral parameter λ.
    pub fn dzbar_part(&self, lambda: C64) -> Mat2 {
        -Mat2::traceless(self.a0.conj(), self.g0.conj(), self.bm1.conj() * lambda)
    }

    /// α evaluated on the tangent dz = u: dz_part·u + dzbar_part·ū.
    pub fn along(&self, lambda: C64, u: C64) -> Mat2 {
        self.dz_part(lambda).scale(u) + self.dzbar_part(lambda).scale(u.conj())
    }

    /// The α-form as Laurent coefficients (M₋₁, M₀, M₁) along dz = u.
    fn laurent_along(&self, u: C64) -> [Mat2; 3] {
        let ub = u.conj();
        let m_m1 = Mat2::new(C64::ZERO, self.bm1 * u, C64::ZERO, C64::ZERO);
        let diag = self.a0 * u - self.a0.conj() * ub;
        let m_0 = Mat2::traceless(diag, -self.g0.conj() * ub, self.g0 * u);
        let m_1 = Mat2::new(C64::ZERO, C64::ZERO, -self.bm1.conj() * ub, C64::ZERO);
        [m_m1, m_0, m_1]
    }
}

/// Joint state: Killing field coefficients and one frame per λ sample.
#[derive(Clone)]
struct State {
    zeta: MatrixLaurent,
    frames: Vec<Mat2>,
}

/// d(state)/dt along dz = u.
fn derivative(s: &State, lambdas: &[C64], u: C64) -> Result<State, FlowError> {
    let conn = alpha_of(&s.zeta)?;
    let m = conn.laurent_along(u);
    let g = s.zeta.g() as i32;
    let mut dz = MatrixLaurent::zero(s.zeta.g());
    dz.set_delta(s.zeta.delta());
    for d in -1..=g {
        let mut acc = Mat2::zero();
        for (k, mk) in m.iter().enumerate() {
            let j = k as i32 - 1; // λ-power of this α term
            let i = d - j;
            if i >= -1 && i <= g {
                acc = acc + s.zeta.coeff(i).commutator(mk);
            }
        }
        *dz.coeff_mut(d) = acc;
    }
    let frames = s
        .frames
        .iter()
        .zip(lambdas.iter())
        .map(|(f, &lam)| *f * conn.along(lam, u))
        .collect();
    Ok(State { zeta: dz, frames })
}

fn axpy(s: &State, d: &State, h: f64) -> State {
    State {
        zeta: s.zeta.add(&d.zeta.scale(C64::new(h, 0.0))),
        frames: s
            .frames
            .iter()
            .zip(d.frames.iter())
            .map(|(f, df)| *f + df.scale(C64::new(h, 0.0)))
            .collect(),
    }
}

/// One classical RK4 step of size h along the unit direction u.
fn rk4_step(s: &State, lambdas: &[C64], u: C64, h: f64) -> Result<State, FlowError> {
    let k1 = derivative(s, lambdas, u)?;
    let k2 = derivative(&axpy(s, &k1, h / 2.0), lambdas, u)?;
    let k3 = derivative(&axpy(s, &k2, h / 2.0), lambdas, u)?;
    let k4 = derivative(&axpy(s, &k3, h), lambdas, u)?;
    let mut out = axpy(s, &k1, h / 6.0);
    out = axpy(&out, &k2, h / 3.0);
    out = axpy(&out, &k3, h / 3.0);
    out = axpy(&out, &k4, h / 6.0);
    Ok(out)
}

/// Sampled extended frame and Killing field on a rectangular grid.
#[derive(Debug)]
pub struct FrameGrid {
    pub grid: GridSpec,
    pub lambdas: Vec<C64>,
    /// Killing field per node (λ-polynomial, stored once per z).
    pub zeta: Vec<MatrixLaurent>,
    /// `frames[node][k]` = F at λ_k and z_node.
    pub frame: Vec<Vec<Mat2>>,
    /// Conformal exponent ω per node, from 4β₋₁ = i e^ω.
    pub omega: Vec<f64>,
    /// Richardson estimate of the largest local step error.
    pub max_local_err: f64,
}

impl FrameGrid {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx() + i
    }

    pub fn node_z(&self, i: usize, j: usize) -> C64 {
        self.grid.z(i, j)
    }

    pub fn lambda_index(&self, lambda: C64) -> Result<usize, FlowError> {
        self.lambdas
            .iter()
            .position(|&l| (l - lambda).norm() < 1e-12)
            .ok_or(FlowError::LambdaMissing)
    }

    /// Nearest node to a complex point; errors if off the grid or farther
    /// than half a step from a node.
    pub fn node_near(&self, z: C64) -> Result<(usize, usize), FlowError> {
        let g = &self.grid;
        let fi = (z.re - g.x0) / g.hx_eff();
        let fj = (z.im - g.y0) / g.hy_eff();
        let i = fi.round();
        let j = fj.round();
        if i < 0.0 || j < 0.0 || i as usize >= g.nx() || j as usize >= g.ny() {
            return Err(FlowError::TauOutsideGrid);
        }
        if (fi - i).abs() > 0.5 || (fj - j).abs() > 0.5 {
            return Err(FlowError::TauOutsideGrid);
        }
        Ok((i as usize, j as usize))
    }

    /// Largest unitarity defect of frames over unit-circle λ samples.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, &lam) in self.lambdas.iter().enumerate() {
            if (lam.norm() - 1.0).abs() > 1e-12 {
                continue;
            }
            for fs in &self.frame {
                worst = worst.max(fs[k].unitary_defect());
            }
        }
        worst
    }

    /// Largest |det F − 1| over all nodes and λ.
    pub fn det_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for fs in &self.frame {
            for f in fs {
                worst = worst.max((f.det() - C64::ONE).norm());
            }
        }
        worst
    }

    /// Largest relative drift of a(λ) = −λ det ζ across the grid, sampled at
    /// the given λ values.
    pub fn spectral_drift(&self, samples: &[C64]) -> f64 {
        let a0 = self.zeta[0].det_poly_unchecked();
        let mut worst = 0.0f64;
        for z in &self.zeta {
            let az = z.det_poly_unchecked();
            for &lam in samples {
                let base = a0.eval(lam);
                let d = (az.eval(lam) - base).norm() / base.norm().max(1e-300);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest star-reality defect of ζ across the grid.
    pub fn reality_drift(&self) -> f64 {
        self.zeta.iter().fold(0.0, |m, z| m.max(z.reality_defect()))
    }

    /// Five-point finite-difference residual of Δω + sinh ω cosh ω per
    /// interior node (None on the boundary).
    pub fn sinh_gordon_residual(&self) -> Vec<Option<f64>> {
        let nx = self.grid.nx();
        let ny = self.grid.ny();
        let hx = self.grid.hx_eff();
        let hy = self.grid.hy_eff();
        let mut out = vec![None; nx * ny];
        for j in 1..ny.saturating_sub(1) {
            for i in 1..nx.saturating_sub(1) {
                let w = self.omega[self.idx(i, j)];
                let lap = (self.omega[self.idx(i + 1, j)] - 2.0 * w
                    + self.omega[self.idx(i - 1, j)])
                    / (hx * hx)
                    + (self.omega[self.idx(i, j + 1)] - 2.0 * w + self.omega[self.idx(i, j - 1)])
                        / (hy * hy);
                out[j * nx + i] = Some(lap + w.sinh() * w.cosh());
            }
        }
        out
    }

    pub fn max_sinh_gordon_residual(&self) -> f64 {
        self.sinh_gordon_residual()
            .iter()
            .flatten()
            .fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Options for `integrate`.
#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Richardson local-error budget; exceeding it aborts the run.
    pub err_budget: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { err_budget: 1e-4 }
    }
}

/// Jointly integrates dζ = [ζ, α(ζ)] and dF = F·α(ζ) over the grid:
/// first along the x-axis through the origin, then along y for each column.
pub fn integrate(
    xi: &MatrixLaurent,
    grid: GridSpec,
    lambdas: &[C64],
) -> Result<FrameGrid, FlowError> {
    integrate_with(xi, grid, lambdas, IntegrateOptions::default())
}

pub fn integrate_with(
    xi: &MatrixLaurent,
    grid: GridSpec,
    lambdas: &[C64],
    opts: IntegrateOptions,
) -> Result<FrameGrid, FlowError> {
    let (i0, j0) = grid.origin()?;
    let nx = grid.nx();
    let ny = grid.ny();
    let hx = grid.hx_eff();
    let hy = grid.hy_eff();
    let start = State {
        zeta: xi.clone(),
        frames: vec![Mat2::identity(); lambdas.len()],
    };
    let mut states: Vec<Option<State>> = vec![None; nx * ny];

    let mut max_local_err = 0.0f64;
    {
        // One full step vs two half steps, per Richardson for an O(h⁴) method.
        let estimate = |s: &State, u: C64, h: f64| -> Result<f64, FlowError> {
            let full = rk4_step(s, lambdas, u, h)?;
            let half = rk4_step(&rk4_step(s, lambdas, u, h / 2.0)?, lambdas, u, h / 2.0)?;
            let mut d = full.zeta.dist(&half.zeta);
            for (a, b) in full.frames.iter().zip(half.frames.iter()) {
                d = d.max((*a - *b).norm());
            }
            Ok(d / 15.0)
        };
        if nx > 1 {
            max_local_err = max_local_err.max(estimate(&start, C64::ONE, hx)?);
        }
        if ny > 1 {
            max_local_err = max_local_err.max(estimate(&start, C64::I, hy)?);
        }
    }
    if max_local_err > opts.err_budget {
        return Err(FlowError::StepRejected {
            estimate: max_local_err,
            budget: opts.err_budget,
        });
    }

    states[j0 * nx + i0] = Some(start);
    // x-axis pass.
    for i in (i0 + 1)..nx {
        let prev = states[j0 * nx + (i - 1)].as_ref().unwrap();
        let next = rk4_step(prev, lambdas, C64::ONE, hx)?;
        states[j0 * nx + i] = Some(next);
    }
    for i in (0..i0).rev() {
        let prev = states[j0 * nx + (i + 1)].as_ref().unwrap();
        let next = rk4_step(prev, lambdas, C64::ONE, -hx)?;
        states[j0 * nx + i] = Some(next);
    }
    // y columns.
    for i in 0..nx {
        for j in (j0 + 1)..ny {
            let prev = states[(j - 1) * nx + i].as_ref().unwrap();
            let next = rk4_step(prev, lambdas, C64::I, hy)?;
            states[j * nx + i] = Some(next);
        }
        for j in (0..j0).rev() {
            let prev = states[(j + 1) * nx + i].as_ref().unwrap();
            let next = rk4_step(prev, lambdas, C64::I, -hy)?;
            states[j * nx + i] = Some(next);
        }
    }

    let mut zeta = Vec::with_capacity(nx * ny);
    let mut frame = Vec::with_capacity(nx * ny);
    let mut omega = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let s = states[j * nx + i].take().unwrap();
            let val = s.zeta.coeff(-1).0[0][1] * C64::new(4.0, 0.0) * (-C64::I);
            // val = −4i β₋₁ should be e^ω > 0.
            if !(val.re > 0.0) || val.im.abs() > 1e-6 * val.re.abs().max(1e-30) {
                return Err(FlowError::OmegaBreach {
                    at: grid.z(i, j),
                    value: val * C64::I,
                });
            }
            omega.push(val.re.ln());
            zeta.push(s.zeta);
            frame.push(s.frames);
        }
    }
    Ok(FrameGrid {
        grid,
        lambdas: lambdas.to_vec(),
        zeta,
        frame,
        omega,
        max_local_err,
    })
}

/// Integrates along a piecewise-linear path from 0, returning the final
/// (ζ(end), frames(end)).
pub fn integrate_path(
    xi: &MatrixLaurent,
    waypoints: &[C64],
    lambdas: &[C64],
    h: f64,
) -> Result<(MatrixLaurent, Vec<Mat2>), FlowError> {
    let mut s = State {
        zeta: xi.clone(),
        frames: vec![Mat2::identity(); lambdas.len()],
    };
    let mut pos = C64::ZERO;
    for &w in waypoints {
        let leg = w - pos;
        let len = leg.norm();
        if len == 0.0 {
            continue;
        }
        let n = (len / h).ceil().max(1.0) as usize;
        let dt = len / n as f64;
        let u = leg / len;
        for _ in 0..n {
            s = rk4_step(&s, lambdas, u, dt)?;
        }
        pos = w;
    }
    Ok((s.zeta, s.frames))
}

/// Terminal discrepancy between integrating x-then-y and y-then-x to
/// `z_target`, as a max matrix norm over λ samples and the ζ coefficients.
/// Converges to 0 at fourth order in the step size for a flat connection.
pub fn flatness_defect(
    xi: &MatrixLaurent,
    z_target: C64,
    lambdas: &[C64],
    h: f64,
) -> Result<f64, FlowError> {
    let via_x = [C64::new(z_target.re, 0.0), z_target];
    let via_y = [C64::new(0.0, z_target.im), z_target];
    let (za, fa) = integrate_path(xi, &via_x, lambdas, h)?;
    let (zb, fb) = integrate_path(xi, &via_y, lambdas, h)?;
    let mut worst = za.dist(&zb);
    for (a, b) in fa.iter().zip(fb.iter()) {
        worst = worst.max((*a - *b).norm());
    }
    Ok(worst)
}

/// Closing diagnostics at a period candidate τ.
#[derive(Clone, Copy, Debug)]
pub struct PeriodDefect {
    /// Distance of F_{λ₀}(τ) from {±1}.
    pub frame_pm_identity: f64,
    /// Weaker mode: distance from commuting with σ₃.
    pub frame_sigma3: f64,
    /// ‖ζ(τ) − ζ(0)‖.
    pub zeta: f64,
}

/// Monodromy-style defects of the frame and Killing field at z = τ.
pub fn period_defect(fg: &FrameGrid, tau: C64, lambda0: C64) -> Result<PeriodDefect, FlowError> {
    let (i, j) = fg.node_near(tau)?;
    let k = fg.lambda_index(lambda0)?;
    let (oi, oj) = fg.grid.origin()?;
    let f = fg.frame[fg.idx(i, j)][k];
    let zeta_defect = fg.zeta[fg.idx(i, j)].dist(&fg.zeta[fg.idx(oi, oj)]);
    Ok(PeriodDefect {
        frame_pm_identity: f.dist_to_pm_identity(),
        frame_sigma3: f.sigma3_commutator_defect(),
        zeta: zeta_defect,
    })
}

/// n equally spaced unit-circle samples, phase-offset so that the preset
/// branch points at ±1 are never sampled exactly.
pub fn unit_circle_samples(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| {
            C64::from_polar(
                1.0,
                2.0 * core::f64::consts::PI * (k as f64 + 0.5) / n as f64,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::flat_frame;
    use crate::loop_algebra::flat_potential;

    #[test]
    fn alpha_of_flat_potential() {
        // dz-part (1/4)[[0, iλ^{-1}],[i, 0]], dz̄-part (1/4)[[0, i],[iλ, 0]].
        let xi = flat_potential();
        let c = alpha_of(&xi).unwrap();
        let lam = C64::new(0.3, 0.4);
        let dz = c.dz_part(lam);
        let dzb = c.dzbar_part(lam);
        let i4 = C64::new(0.0, 0.25);
        assert!((dz.0[0][1] - i4 / lam).norm() < 1e-15);
        assert!((dz.0[1][0] - i4).norm() < 1e-15);
        assert!(dz.0[0][0].norm() < 1e-15);
        assert!((dzb.0[0][1] - i4).norm() < 1e-15);
        assert!((dzb.0[1][0] - i4 * lam).norm() < 1e-15);
        assert!(dzb.0[0][0].norm() < 1e-15);
    }

    #[test]
    fn flat_frame_oracle_on_a_coarse_grid() {
        let xi = flat_potential();
        let grid = GridSpec::from_extent(1.0, 0.02, 0.6, 0.02);
        let lambdas = [C64::ONE, C64::I];
        let fg = integrate(&xi, grid, &lambdas).unwrap();
        let mut worst = 0.0f64;
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let z = fg.node_z(i, j);
                for (k, &lam) in lambdas.iter().enumerate() {
                    let want = flat_frame(z, lam);
                    let got = fg.frame[fg.idx(i, j)][k];
                    worst = worst.max((want - got).norm());
                }
            }
        }
        assert!(worst < 1e-8, "max frame error {worst}");
        assert!(fg.unitarity_defect() < 1e-9);
        assert!(fg.det_defect() < 1e-10);
        // ω ≡ 0 for the flat annulus.
        assert!(fg.omega.iter().all(|w| w.abs() < 1e-10));
    }

    #[test]
    fn flat_period_two_pi() {
        let xi = flat_potential();
        let grid = GridSpec::from_extent(2.0 * core::f64::consts::PI, 0.01, 0.0, 0.01);
        let fg = integrate(&xi, grid, &[C64::ONE]).unwrap();
        let pd = period_defect(&fg, C64::new(2.0 * core::f64::consts::PI, 0.0), C64::ONE).unwrap();
        assert!(
            pd.frame_pm_identity < 1e-8,
            "defect {}",
            pd.frame_pm_identity
        );
        assert!(pd.zeta < 1e-9);
        // τ = 0 is exactly closed.
        let pd0 = period_defect(&fg, C64::ZERO, C64::ONE).unwrap();
        assert!(pd0.frame_pm_identity == 0.0 && pd0.zeta == 0.0);
        // Half period: F₁(π) is far from ±1.
        let pd_half = period_defect(&fg, C64::new(core::f64::consts::PI, 0.0), C64::ONE).unwrap();
        assert!(pd_half.frame_pm_identity > 0.5);
    }

    #[test]
    fn flatness_defect_is_small_and_fourth_order() {
        let xi = flat_potential();
        let z = C64::new(0.7, 0.4);
        let lams = [C64::ONE];
        let d0 = flatness_defect(&xi, C64::ZERO, &lams, 0.01).unwrap();
        assert_eq!(d0, 0.0);
        let d = flatness_defect(&xi, z, &lams, 0.01).unwrap();
        assert!(d < 1e-10, "flat path defect {d}");
    }

    #[test]
    fn genus1_flow_conserves_and_matches_profile() {
        use crate::family::{genus1_killing_field, genus1_omega, genus1_omega_max, genus1_profile};
        let d = -1.0;
        let xi = genus1_killing_field(genus1_omega_max(d), 0.0, C64::ONE);
        let grid = GridSpec::from_extent(0.5, 0.01, 1.0, 0.01);
        let lams = unit_circle_samples(8);
        let fg = integrate(&xi, grid, &lams).unwrap();
        // Spectral conservation and reality propagation.
        assert!(
            fg.spectral_drift(&lams) < 1e-9,
            "a-drift {}",
            fg.spectral_drift(&lams)
        );
        assert!(fg.reality_drift() < 1e-9);
        assert!(fg.unitarity_defect() < 1e-8);
        assert!(fg.det_defect() < 1e-9);
        // The recovered ω solves sinh-Gordon at O(h²).
        let r = fg.max_sinh_gordon_residual();
        assert!(r < 1e-3, "sinh-Gordon residual {r}");
        // Rotational symmetry: ω depends on y only.
        let nx = grid.nx();
        for j in 0..grid.ny() {
            for i in 1..nx {
                assert!((fg.omega[fg.idx(i, j)] - fg.omega[fg.idx(0, j)]).abs() < 1e-8);
            }
        }
        // ω(y) agrees with the one-variable elliptic profile (up to the
        // reflection y ↦ −y; fix the orientation by comparing both).
        let track = genus1_profile(d, 1.2, 0.01).unwrap();
        let mut worst_pos = 0.0f64;
        let mut worst_neg = 0.0f64;
        for j in 0..grid.ny() {
            let w = fg.omega[fg.idx(0, j)];
            worst_pos = worst_pos.max((w - genus1_omega(&track, j as i64)).abs());
            worst_neg = worst_neg.max((w - genus1_omega(&track, -(j as i64))).abs());
        }
        assert!(
            worst_pos.min(worst_neg) < 1e-7,
            "profile defect {} / {}",
            worst_pos,
            worst_neg
        );
        // The λ⁰ diagonal of ζ is ω_z (= −(i/2)ω_y here), checked by finite
        // differences of the recorded ω.
        let hy = grid.hy_eff();
        let mut worst = 0.0f64;
        for j in 1..grid.ny() - 1 {
            let wy = (fg.omega[fg.idx(0, j + 1)] - fg.omega[fg.idx(0, j - 1)]) / (2.0 * hy);
            let wz = C64::new(0.0, -0.5 * wy);
            let diag = fg.zeta[fg.idx(0, j)].coeff(0).0[0][0];
            worst = worst.max((diag - wz).norm());
        }
        assert!(worst < 1e-4, "zeta diagonal vs omega_z defect {worst}");
    }

    #[test]
    fn genus1_flatness_defect_is_fourth_order() {
        use crate::family::{genus1_killing_field, genus1_omega_max};
        let xi = genus1_killing_field(genus1_omega_max(-1.0), 0.0, C64::ONE);
        let z = C64::new(0.4, 0.3);
        let lams = [C64::ONE];
        let d1 = flatness_defect(&xi, z, &lams, 0.02).unwrap();
        let d2 = flatness_defect(&xi, z, &lams, 0.01).unwrap();
        let ratio = d1 / d2;
        assert!(
            (8.0..40.0).contains(&ratio),
            "RK4 order ratio {ratio} (d1={d1:.3e}, d2={d2:.3e})"
        );
    }

    #[test]
    fn killing_field_is_frame_conjugation_of_initial_value() {
        // ζ(z) = F_λ(z)^{-1} ξ_λ F_λ(z): the two halves of the joint
        // integration must stay consistent.
        use crate::family::{genus1_killing_field, genus1_omega_max};
        let xi = genus1_killing_field(genus1_omega_max(-1.0), 0.0, C64::ONE);
        let grid = GridSpec::from_extent(0.5, 0.01, 0.5, 0.01);
        let lams = [C64::ONE, C64::new(0.4, 0.3), C64::from_polar(1.0, 2.1)];
        let fg = integrate(&xi, grid, &lams).unwrap();
        let mut worst = 0.0f64;
        for j in [0, grid.ny() / 2, grid.ny() - 1] {
            for i in [0, grid.nx() / 2, grid.nx() - 1] {
                let node = fg.idx(i, j);
                for (k, &lam) in lams.iter().enumerate() {
                    let f = fg.frame[node][k];
                    let want = f.inv() * xi.eval(lam) * f;
                    let got = fg.zeta[node].eval(lam);
                    worst = worst.max((want - got).norm());
                }
            }
        }
        assert!(worst < 1e-9, "conjugation defect {worst}");
    }

    #[test]
    fn grids_with_negative_extents_integrate_from_the_origin() {
        let xi = flat_potential();
        let grid = GridSpec {
            x0: -0.3,
            x1: 0.4,
            hx: 0.01,
            y0: -0.2,
            y1: 0.2,
            hy: 0.01,
        };
        let fg = integrate(&xi, grid, &[C64::I]).unwrap();
        let (oi, oj) = grid.origin().unwrap();
        assert!((fg.frame[fg.idx(oi, oj)][0] - Mat2::identity()).norm() < 1e-15);
        let mut worst = 0.0f64;
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let z = fg.node_z(i, j);
                worst = worst.max((fg.frame[fg.idx(i, j)][0] - flat_frame(z, C64::I)).norm());
            }
        }
        assert!(worst < 1e-9, "max frame error {worst}");
    }

    #[test]
    fn helicoidal_flow_respects_the_theta_gauge() {
        // With Q = (1/4)e^{iΘ}dz² and Θ read from a(0), the γ = −1 family
        // keeps ω a function of y (like the rotational one); the helicoidal
        // character shows up in Θ = π: the vertical coordinate becomes
        // h = Re(−i e^{iπ/2} z) = x and the period is imaginary. The
        // parametrization with ω = ω(x) is the z ↦ iz rotation of this one.
        use crate::family::{genus1_killing_field, genus1_omega_max};
        let xi = genus1_killing_field(genus1_omega_max(-1.0), 0.0, -C64::ONE);
        let grid = GridSpec::from_extent(0.4, 0.01, 0.4, 0.01);
        let fg = integrate(&xi, grid, &[C64::ONE]).unwrap();
        for j in 0..grid.ny() {
            let base = fg.omega[fg.idx(0, j)];
            for i in 0..grid.nx() {
                assert!((fg.omega[fg.idx(i, j)] - base).abs() < 1e-8);
            }
        }
        // Θ = ±π from a(0) = +1/16, and the vertical part is ±x (the Θ
        // branch flips the vertical axis, an ambient isometry).
        let mesh = crate::surface::assemble(&fg, C64::ONE).unwrap();
        assert!((mesh.theta.abs() - core::f64::consts::PI).abs() < 1e-12);
        let s = if mesh.theta > 0.0 { 1.0 } else { -1.0 };
        for j in (0..grid.ny()).step_by(10) {
            for i in (0..grid.nx()).step_by(10) {
                let z = fg.node_z(i, j);
                let h = mesh.vertices[j * mesh.nx + i][3];
                assert!((h - s * z.re).abs() < 1e-12, "vertical part should be ±x");
            }
        }
    }

    #[test]
    fn oversized_steps_are_rejected() {
        use crate::family::{genus1_killing_field, genus1_omega_max};
        let xi = genus1_killing_field(genus1_omega_max(-1.0), 0.0, C64::ONE);
        let grid = GridSpec::from_extent(4.0, 2.0, 0.0, 1.0);
        let err = integrate_with(
            &xi,
            grid,
            &[C64::ONE],
            IntegrateOptions { err_budget: 1e-9 },
        )
        .unwrap_err();
        match err {
            FlowError::StepRejected { estimate, budget } => {
                assert!(estimate > budget);
            }
            other => panic!("expected StepRejected, got {other}"),
        }
    }

    #[test]
    fn genus2_flow_conserves() {
        use crate::family::{genus2_killing_field, AbreschParameters};
        let p = AbreschParameters::new(-2.0, -2.0).unwrap();
        let xi = genus2_killing_field(&p);
        let grid = GridSpec::from_extent(0.4, 0.01, 0.4, 0.01);
        let lams = unit_circle_samples(8);
        let fg = integrate(&xi, grid, &lams).unwrap();
        assert!(
            fg.spectral_drift(&lams) < 1e-9,
            "a-drift {}",
            fg.spectral_drift(&lams)
        );
        assert!(fg.reality_drift() < 1e-9);
        let r = fg.max_sinh_gordon_residual();
        assert!(r < 1e-3, "sinh-Gordon residual {r}");
    }
}
