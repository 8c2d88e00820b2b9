//! File formats: the potential JSON schema, spectral-polynomial inputs,
//! mesh export (OBJ / JSON) and CSV writers.
//!
//! Potential schema (coefficients listed d = −1 … g, row-major 2×2):
//!
//! ```json
//! { "g": 1, "delta": [1.0, 0.0],
//!   "coeffs": [ [[re,im],[re,im],[re,im],[re,im]], ... ] }
//! ```

use annuli_core::loop_algebra::{MatrixLaurent, SpectralPolynomial};
use annuli_core::mat2::Mat2;
use annuli_core::poly::Poly;
use annuli_core::surface::SurfaceMesh;
use annuli_core::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Serialize, Deserialize)]
pub struct PotentialFile {
    pub g: usize,
    pub delta: [f64; 2],
    pub coeffs: Vec<[[f64; 2]; 4]>,
}

impl PotentialFile {
    pub fn from_potential(x: &MatrixLaurent) -> Self {
        let coeffs = x
            .coeffs()
            .iter()
            .map(|m| {
                [
                    [m.0[0][0].re, m.0[0][0].im],
                    [m.0[0][1].re, m.0[0][1].im],
                    [m.0[1][0].re, m.0[1][0].im],
                    [m.0[1][1].re, m.0[1][1].im],
                ]
            })
            .collect();
        PotentialFile {
            g: x.g(),
            delta: [x.delta().re, x.delta().im],
            coeffs,
        }
    }

    /// Validating parse: reports the violated invariant by name.
    pub fn into_potential(self) -> Result<MatrixLaurent, CliError> {
        let coeffs: Vec<Mat2> = self
            .coeffs
            .iter()
            .map(|e| {
                Mat2::new(
                    C64::new(e[0][0], e[0][1]),
                    C64::new(e[1][0], e[1][1]),
                    C64::new(e[2][0], e[2][1]),
                    C64::new(e[3][0], e[3][1]),
                )
            })
            .collect();
        MatrixLaurent::new(self.g, C64::new(self.delta[0], self.delta[1]), coeffs).map_err(|e| {
            CliError::CheckFailed(format!(
                "potential violates invariant `{}`: {e}",
                e.invariant_name()
            ))
        })
    }
}

/// Input for the closing subcommand: either explicit coefficients of a(λ)
/// (ascending) or roots with a leading coefficient.
#[derive(Serialize, Deserialize)]
pub struct SpectralInput {
    pub g: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leading: Option<[f64; 2]>,
}

impl SpectralInput {
    pub fn into_spectral(self) -> Result<SpectralPolynomial, CliError> {
        let poly = match (self.coefficients, self.roots) {
            (Some(cs), _) => Poly::new(cs.iter().map(|c| C64::new(c[0], c[1])).collect()),
            (None, Some(rs)) => {
                let lead = self
                    .leading
                    .map(|l| C64::new(l[0], l[1]))
                    .unwrap_or(C64::ONE);
                let roots: Vec<C64> = rs.iter().map(|r| C64::new(r[0], r[1])).collect();
                Poly::from_roots(lead, &roots)
            }
            (None, None) => {
                return Err(CliError::BadConfig(
                    "spectral input needs `coefficients` or `roots`".into(),
                ))
            }
        };
        Ok(SpectralPolynomial::classify(self.g, poly))
    }
}

fn fmt9(v: f64) -> String {
    // Fixed 9-significant-digit scientific notation for byte-stable output.
    format!("{v:.8e}")
}

/// OBJ export: `ambient4` records the height as a comment-free 4th vertex
/// component via two vertices is not valid OBJ, so ambient4 uses JSON; the
/// OBJ path takes the stereographic projection S² → ℝ² (from the pole
/// (0,1,0)) times the height.
pub fn mesh_to_obj_stereo(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    out.push_str("# minimal annulus mesh, stereo3 projection\n");
    for v in &mesh.vertices {
        let denom = 1.0 - v[1];
        let (a, b) = if denom.abs() < 1e-12 {
            (f64::INFINITY, f64::INFINITY)
        } else {
            (v[0] / denom, v[2] / denom)
        };
        out.push_str(&format!("v {} {} {}\n", fmt9(a), fmt9(b), fmt9(v[3])));
    }
    for f in &mesh.faces {
        out.push_str(&format!(
            "f {} {} {} {}\n",
            f[0] + 1,
            f[1] + 1,
            f[2] + 1,
            f[3] + 1
        ));
    }
    out
}

#[derive(Serialize)]
pub struct MeshJson {
    pub nx: usize,
    pub ny: usize,
    pub lambda0: [f64; 2],
    pub theta: f64,
    /// Ambient coordinates (S² ⊂ ℝ³) × ℝ.
    pub vertices: Vec<[f64; 4]>,
    pub faces: Vec<[u32; 4]>,
}

pub fn mesh_to_json(mesh: &SurfaceMesh) -> MeshJson {
    MeshJson {
        nx: mesh.nx,
        ny: mesh.ny,
        lambda0: [mesh.lambda0.re, mesh.lambda0.im],
        theta: mesh.theta,
        vertices: mesh.vertices.clone(),
        faces: mesh.faces.clone(),
    }
}

pub fn poly_json(p: &Poly) -> Vec<[f64; 2]> {
    p.coeffs.iter().map(|c| [c.re, c.im]).collect()
}
