//! Subcommand implementations. Reports always go to stdout; `--output`
//! receives the command's artifact (potential file, mesh, CSV, text).

use annuli_core::curve::{integrate_h, solve_closing, verify_spectral_data, PathSpec};
use annuli_core::dressing::{bubbleton_flow, dress as dress_line, factorize, Cp1};
use annuli_core::family::{preset, PresetSpec};
use annuli_core::flow::{integrate, unit_circle_samples};
use annuli_core::hierarchy::{canonical_levels, linearized_residual};
use annuli_core::isospectral::{flow as isospectral_flow, FlowParameter};
use annuli_core::surface::{assemble, diagnostics};
use annuli_core::C64;
use serde_json::json;

use crate::formats::{mesh_to_json, mesh_to_obj_stereo, poly_json, PotentialFile, SpectralInput};
use crate::report::{read_file, write_file, Report};
use crate::{parse_c64, CliError, CommonOpts, Format, GridOpt, Projection};

fn require_input(common: &CommonOpts) -> Result<String, CliError> {
    common
        .input
        .clone()
        .ok_or_else(|| CliError::BadConfig("--input is required".into()))
}

fn load_potential(
    common: &CommonOpts,
) -> Result<annuli_core::loop_algebra::MatrixLaurent, CliError> {
    let text = read_file(&require_input(common)?)?;
    let file: PotentialFile =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("potential parse: {e}")))?;
    file.into_potential()
}

fn parse_lambdas(specs: &[String]) -> Result<Vec<C64>, CliError> {
    if specs.is_empty() {
        return Ok(vec![C64::ONE]);
    }
    specs.iter().map(|s| parse_c64(s)).collect()
}

pub fn validate(common: &CommonOpts) -> Result<(), CliError> {
    let text = read_file(&require_input(common)?)?;
    let file: PotentialFile =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("potential parse: {e}")))?;
    let mut rep = Report::new("validate", common, json!({ "input": common.input }));
    match file.into_potential() {
        Ok(x) => {
            rep.defect("reality", x.reality_defect(), common.tol_alg);
            rep.defect("residue_ray", x.residue_ray_defect(), common.tol_alg);
            let a = x.det_poly_unchecked();
            rep.defect("a_reality", a.reality_defect(), common.tol_alg);
            rep.info("a_circle_sign", a.circle_sign_defect());
            rep.values = json!({
                "g": x.g(),
                "delta": [x.delta().re, x.delta().im],
                "class_tags": { "mg": a.tags.mg, "mg0": a.tags.mg0, "mg1": a.tags.mg1 },
                "a_coefficients": poly_json(&a.poly),
            });
            rep.finish()
        }
        Err(e) => {
            rep.pass = false;
            rep.values = json!({ "error": e.to_string() });
            let _ = rep.finish();
            Err(e)
        }
    }
}

pub fn hierarchy(common: &CommonOpts, levels: usize) -> Result<(), CliError> {
    let ladder = canonical_levels(levels);
    let mut text = String::new();
    let mut values = Vec::new();
    for l in &ladder {
        let residual_zero = linearized_residual(&l.u).is_zero();
        text.push_str(&format!(
            "u_{} = {}\ntau_{} = {}\nsigma_{} = {}\n",
            l.n,
            l.u.render(),
            l.n,
            l.tau.render(),
            l.n,
            l.sigma.render()
        ));
        values.push(json!({
            "n": l.n,
            "u": l.u.render(),
            "tau": l.tau.render(),
            "sigma": l.sigma.render(),
            "linearized_residual_zero": residual_zero,
        }));
    }
    if let Some(path) = &common.output {
        write_file(path, &text)?;
    }
    let mut rep = Report::new("hierarchy", common, json!({ "levels": levels }));
    let all_zero = ladder.iter().all(|l| linearized_residual(&l.u).is_zero());
    rep.defect("linearized_residual", if all_zero { 0.0 } else { 1.0 }, 0.5);
    rep.values = json!({ "levels": values });
    rep.finish()
}

pub fn frame(common: &CommonOpts, grid: &GridOpt, lambdas: &[String]) -> Result<(), CliError> {
    let xi = load_potential(common)?;
    let spec = grid.parse()?;
    let lams = parse_lambdas(lambdas)?;
    let fg = integrate(&xi, spec, &lams).map_err(|e| CliError::CheckFailed(e.to_string()))?;
    let drift_samples = unit_circle_samples(32);
    let mut rep = Report::new(
        "frame",
        common,
        json!({ "input": common.input, "grid": grid.grid, "lambdas": lams.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>() }),
    );
    rep.defect("det", fg.det_defect(), 1e-9_f64.max(common.tol_alg));
    rep.defect("unitarity", fg.unitarity_defect(), common.tol_alg);
    rep.defect("a_drift", fg.spectral_drift(&drift_samples), common.tol_alg);
    rep.defect("reality_drift", fg.reality_drift(), common.tol_alg);
    rep.defect(
        "sinh_gordon_residual",
        fg.max_sinh_gordon_residual(),
        common.tol_pde.max(1e-2),
    );
    rep.info("rk4_local_error", fg.max_local_err);
    if let Some(path) = &common.output {
        if common.format == Format::Csv {
            let mut csv = String::from("x,y,omega,sinh_residual,a_drift,unitarity\n");
            let res = fg.sinh_gordon_residual();
            for j in 0..fg.grid.ny() {
                for i in 0..fg.grid.nx() {
                    let node = fg.idx(i, j);
                    let z = fg.node_z(i, j);
                    let a0 = fg.zeta[0].det_poly_unchecked();
                    let az = fg.zeta[node].det_poly_unchecked();
                    let mut drift = 0.0f64;
                    for &lam in drift_samples.iter().take(8) {
                        drift =
                            drift.max((az.eval(lam) - a0.eval(lam)).norm() / a0.eval(lam).norm());
                    }
                    let unit = fg.frame[node]
                        .iter()
                        .fold(0.0f64, |m, f| m.max(f.unitary_defect()));
                    csv.push_str(&format!(
                        "{},{},{:.12e},{},{:.6e},{:.6e}\n",
                        z.re,
                        z.im,
                        fg.omega[node],
                        res[node].map_or(String::new(), |r| format!("{r:.6e}")),
                        drift,
                        unit
                    ));
                }
            }
            write_file(path, &csv)?;
        } else {
            return Err(CliError::BadConfig(
                "frame writes artifacts only as --format csv".into(),
            ));
        }
    }
    rep.values = json!({
        "nx": fg.grid.nx(),
        "ny": fg.grid.ny(),
        "omega_origin": fg.omega[0],
    });
    rep.finish()
}

pub fn surface(
    common: &CommonOpts,
    grid: &GridOpt,
    lambda0: &str,
    projection: Projection,
) -> Result<(), CliError> {
    let xi = load_potential(common)?;
    let spec = grid.parse()?;
    let lam0 = parse_c64(lambda0)?;
    let fg = integrate(&xi, spec, &[lam0]).map_err(|e| CliError::CheckFailed(e.to_string()))?;
    let mesh = assemble(&fg, lam0).map_err(|e| CliError::CheckFailed(e.to_string()))?;
    let rep_diag = diagnostics(&mesh);
    let mut rep = Report::new(
        "surface",
        common,
        json!({ "input": common.input, "grid": grid.grid, "lambda0": [lam0.re, lam0.im] }),
    );
    rep.defect(
        "conformality",
        rep_diag.max_conformality_defect,
        common.tol_pde,
    );
    rep.defect(
        "metric_vs_cosh2",
        rep_diag.max_metric_defect,
        common.tol_pde,
    );
    rep.defect("n3_vs_tanh", rep_diag.max_n3_defect, common.tol_pde);
    rep.defect("s2_membership", rep_diag.max_s2_defect, common.tol_alg);
    rep.defect("hopf_spread", rep_diag.hopf_spread, common.tol_pde);
    if let Some(path) = &common.output {
        match (common.format, projection) {
            (Format::Obj, Projection::Stereo3) => write_file(path, &mesh_to_obj_stereo(&mesh))?,
            (Format::Json, _) | (Format::Obj, Projection::Ambient4) => {
                if common.format == Format::Obj {
                    return Err(CliError::BadConfig(
                        "ambient4 is recorded as JSON; use --format json".into(),
                    ));
                }
                let mj = mesh_to_json(&mesh);
                let text =
                    serde_json::to_string_pretty(&mj).map_err(|e| CliError::Io(e.to_string()))?;
                write_file(path, &text)?;
            }
            (Format::Csv, _) => {
                return Err(CliError::BadConfig("surface export is obj or json".into()))
            }
        }
    }
    rep.values = json!({ "theta": mesh.theta, "nx": mesh.nx, "ny": mesh.ny });
    rep.finish()
}

pub fn closing(common: &CommonOpts) -> Result<(), CliError> {
    let text = read_file(&require_input(common)?)?;
    let input: SpectralInput =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("spectral parse: {e}")))?;
    let a = input.into_spectral()?;
    let cd = solve_closing(&a, None).map_err(|e| CliError::CheckFailed(e.to_string()))?;
    let checklist = verify_spectral_data(&cd);
    let mut rep = Report::new("closing", common, json!({ "input": common.input }));
    rep.defect("a_reality", checklist.a_reality, common.tol_alg);
    rep.defect("a_circle_sign", checklist.a_circle_sign, common.tol_alg);
    rep.defect("a0_modulus", checklist.a0_modulus, common.tol_alg);
    rep.defect("b_reality", checklist.b_reality, common.tol_alg);
    rep.defect("b0_relation", checklist.b0_relation, common.tol_alg);
    rep.defect("b0_ray", checklist.b0_ray, common.tol_alg);
    rep.defect("cut_integrals", checklist.cut_integrals, common.tol_pde);
    rep.defect(
        "quantization",
        checklist.quantization,
        common.tol_pde.max(1e-6),
    );
    rep.info("condition", cd.condition);
    rep.values = json!({
        "b_coefficients": poly_json(&cd.b),
        "tau": [cd.tau.re, cd.tau.im],
        "theta": cd.theta,
        "quantization_defects": cd
            .quantization_defects
            .iter()
            .map(|(at, d)| json!({ "at": [at.re, at.im], "defect": d }))
            .collect::<Vec<_>>(),
    });
    if let Some(path) = &common.output {
        let mut csv = String::from("at_re,at_im,defect\n");
        for (at, d) in &cd.quantization_defects {
            csv.push_str(&format!("{},{},{:.12e}\n", at.re, at.im, d));
        }
        write_file(&format!("{path}.quantization.csv"), &csv)?;
        let mut hcsv = String::from("theta,h_re,h_im\n");
        for k in 0..64 {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 64.0;
            let lam = C64::from_polar(1.0, th);
            let h = integrate_h(&cd, lam, &PathSpec::default())
                .map_err(|e| CliError::CheckFailed(e.to_string()))?;
            hcsv.push_str(&format!("{th},{:.12e},{:.12e}\n", h.re, h.im));
        }
        write_file(&format!("{path}.hcircle.csv"), &hcsv)?;
    }
    rep.finish()
}

pub fn iso_flow(common: &CommonOpts, t_specs: &[String], steps: usize) -> Result<(), CliError> {
    let xi = load_potential(common)?;
    let t: Vec<C64> = t_specs
        .iter()
        .map(|s| parse_c64(s))
        .collect::<Result<_, _>>()?;
    if t.len() != xi.g() {
        return Err(CliError::BadConfig(format!(
            "flow parameter needs g = {} components, got {}",
            xi.g(),
            t.len()
        )));
    }
    let a0 = xi.det_poly_unchecked();
    let (out, diag) = isospectral_flow(&xi, &FlowParameter(t.clone()), steps)
        .map_err(|e| CliError::CheckFailed(e.to_string()))?;
    let a1 = out.det_poly_unchecked();
    let mut drift = 0.0f64;
    for k in 0..32 {
        let lam = C64::from_polar(1.0, 0.1 + 0.19 * k as f64);
        drift = drift.max((a1.eval(lam) - a0.eval(lam)).norm() / a0.eval(lam).norm());
    }
    let mut rep = Report::new(
        "flow",
        common,
        json!({ "input": common.input, "t": t.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(), "steps": steps }),
    );
    rep.defect("a_drift", drift, common.tol_alg);
    rep.defect("reality", out.reality_defect(), common.tol_alg);
    rep.defect("residue_ray", out.residue_ray_defect(), common.tol_alg);
    rep.info("resym_correction", diag.max_resym_correction);
    rep.info("truncation_residual", diag.max_truncation);
    rep.info("displacement", out.dist(&xi));
    if let Some(path) = &common.output {
        let file = PotentialFile::from_potential(&out);
        let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(path, &text)?;
    }
    rep.finish()
}

pub fn dress(
    common: &CommonOpts,
    alpha0: &str,
    line: Option<&str>,
    beta: Option<&str>,
) -> Result<(), CliError> {
    let a0 = parse_c64(alpha0)?;
    let xi = load_potential(common)?;
    let mut rep = Report::new(
        "dress",
        common,
        json!({ "input": common.input, "alpha0": [a0.re, a0.im], "line": line, "beta": beta }),
    );
    let out = match line {
        Some(spec) => {
            let parts: Vec<f64> = spec
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::BadConfig(format!("bad line `{spec}`")))?;
            if parts.len() != 4 {
                return Err(CliError::BadConfig(
                    "line must be `v0re,v0im,v1re,v1im`".into(),
                ));
            }
            let lp = Cp1::new(C64::new(parts[0], parts[1]), C64::new(parts[2], parts[3]));
            let dressed =
                dress_line(&lp, &xi, a0).map_err(|e| CliError::CheckFailed(e.to_string()))?;
            // Round trip as self-check.
            let fac = factorize(&dressed, a0).map_err(|e| CliError::CheckFailed(e.to_string()))?;
            rep.defect(
                "line_round_trip",
                fac.line_prime.distance(&lp),
                common.tol_alg,
            );
            rep.defect("reduced_round_trip", fac.reduced.dist(&xi), common.tol_alg);
            match beta {
                Some(b) => {
                    let beta_c = parse_c64(b)?;
                    bubbleton_flow(&dressed, a0, beta_c)
                        .map_err(|e| CliError::CheckFailed(e.to_string()))?
                }
                None => dressed,
            }
        }
        None => {
            let beta_c = parse_c64(beta.ok_or_else(|| {
                CliError::BadConfig("dress needs --line (dress) and/or --beta (move)".into())
            })?)?;
            let before = factorize(&xi, a0).map_err(|e| CliError::CheckFailed(e.to_string()))?;
            let moved = bubbleton_flow(&xi, a0, beta_c)
                .map_err(|e| CliError::CheckFailed(e.to_string()))?;
            let after = factorize(&moved, a0).map_err(|e| CliError::CheckFailed(e.to_string()))?;
            rep.defect(
                "reduced_invariance",
                after.reduced.dist(&before.reduced),
                1e-7_f64.max(common.tol_alg),
            );
            moved
        }
    };
    rep.defect("output_reality", out.reality_defect(), common.tol_alg);
    rep.defect(
        "output_residue_ray",
        out.residue_ray_defect(),
        common.tol_alg,
    );
    rep.values = json!({ "g": out.g(), "delta": [out.delta().re, out.delta().im] });
    if let Some(path) = &common.output {
        let file = PotentialFile::from_potential(&out);
        let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(path, &text)?;
    }
    rep.finish()
}

pub fn family(
    common: &CommonOpts,
    genus: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
) -> Result<(), CliError> {
    let spec = match (genus, alpha, beta, c, d) {
        (0, None, None, None, None) => PresetSpec::Genus0,
        (1, Some(a), None, None, None) => PresetSpec::Genus1Helicoidal { alpha: a },
        (1, None, Some(b), None, None) => PresetSpec::Genus1Rotational { beta: b },
        (2, Some(a), Some(b), None, None) => PresetSpec::Genus2Roots { alpha: a, beta: b },
        (2, None, None, Some(cc), Some(dd)) => PresetSpec::Genus2Abresch { c: cc, d: dd },
        _ => {
            return Err(CliError::BadConfig(
                "family: use --genus 0 | --genus 1 (--alpha XOR --beta) | --genus 2 (--alpha --beta | --c --d)"
                    .into(),
            ))
        }
    };
    let pre = preset(spec).map_err(|e| match e {
        annuli_core::family::FamilyError::ParameterRange(_) => CliError::BadConfig(e.to_string()),
        other => CliError::CheckFailed(other.to_string()),
    })?;
    let mut rep = Report::new(
        "family",
        common,
        json!({ "genus": genus, "alpha": alpha, "beta": beta, "c": c, "d": d }),
    );
    rep.defect(
        "additional_symmetry",
        pre.additional_symmetry_defect,
        common.tol_alg,
    );
    let quant = pre
        .closing
        .quantization_defects
        .iter()
        .fold(0.0f64, |m, (_, v)| m.max(*v));
    rep.defect("quantization", quant, common.tol_pde.max(1e-6));
    if let Some(xi) = &pre.potential {
        rep.defect("potential_reality", xi.reality_defect(), common.tol_alg);
        let ax = xi.det_poly_unchecked();
        let mut worst = 0.0f64;
        for k in 0..=2 * pre.genus {
            worst = worst.max((ax.poly.coeff(k) - pre.a.poly.coeff(k)).norm());
        }
        rep.defect("potential_matches_a", worst, common.tol_alg);
    }
    rep.values = json!({
        "a_coefficients": poly_json(&pre.a.poly),
        "b_coefficients": poly_json(&pre.closing.b),
        "tau": [pre.closing.tau.re, pre.closing.tau.im],
        "theta": pre.closing.theta,
    });
    if let Some(path) = &common.output {
        if let Some(xi) = &pre.potential {
            let file = PotentialFile::from_potential(xi);
            let text =
                serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
            write_file(path, &text)?;
        }
    }
    rep.finish()
}
