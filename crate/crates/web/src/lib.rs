//! WebAssembly bindings for the demo page in `www/`. Every export returns a
//! JSON string so the page stays plain JavaScript.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use isospec_core::framework::{identity_suite, make_perturbed, random_admissible_model, spectra_match, RandomModelSpec};
use isospec_core::laplace2d::{
    admissibility_2d, closed_form_spectrum_check, greens_split_check, laplace_pair, solve_poisson_log_f,
    HarmonicWeight, RectGrid, TestField, ZeroSet,
};
use isospec_core::numcore::{c, eig_general, norm_2};
use isospec_core::tolerances::MATCH_TOL;
use isospec_core::volterra1d::{volterra_certificate, Grid1D, Scheme, SigmaFamily, SigmaKind, SigmaSpec};

// sizes the page can afford on the main thread
const MAX_RANDOM_N: usize = 120;
const MAX_VOLTERRA_N: usize = 160;
const MAX_LAPLACE_N: usize = 16;

fn finite(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => json!({ "ok": true, "result": v }).to_string(),
        Err(e) => json!({ "ok": false, "error": e }).to_string(),
    }
}

fn check_size(n: usize, lo: usize, hi: usize) -> Result<(), String> {
    if (lo..=hi).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must lie in {lo}..={hi}, got {n}"))
    }
}

/// Random model with a rank-one `K`: spectra of `L` and `B_K` side by side.
pub fn random_model_report(n: usize, seed: u64) -> Result<Value, String> {
    check_size(n, 2, MAX_RANDOM_N)?;
    let model = random_admissible_model(&RandomModelSpec::new(n, seed)).map_err(|e| e.to_string())?;
    let pair = make_perturbed(&model).map_err(|e| e.to_string())?;
    let reference = pair.reference_l.as_ref().ok_or("missing L")?;
    let bk = pair.bk.as_ref().ok_or("missing B_K")?;
    let report = spectra_match(reference, bk, MATCH_TOL).map_err(|e| e.to_string())?;
    let identities: Vec<Value> = identity_suite(&model)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| json!({ "name": r.name, "residual": finite(r.residual) }))
        .collect();
    let points: Vec<Value> = report
        .pairs
        .iter()
        .map(|p| json!([p.lambda_ref.re, p.lambda_ref.im, p.lambda_pert.re, p.lambda_pert.im]))
        .collect();
    Ok(json!({
        "n": n,
        "seed": seed,
        "passed": report.passed,
        "max_abs_diff": finite(report.max_abs_diff),
        "relative_diff": finite(report.max_abs_diff / norm_2(reference).map_err(|e| e.to_string())?),
        "non_normality": finite(bk.max_abs_diff(&bk.adjoint()) / bk.max_abs()),
        "pairs": points,
        "identities": identities,
    }))
}

/// Cauchy problem with `σ` from a family string such as `affine(1,-1)`.
pub fn volterra_report(n: usize, sigma: &str) -> Result<Value, String> {
    check_size(n, 4, MAX_VOLTERRA_N)?;
    let family: SigmaFamily = sigma.parse().map_err(|e: isospec_core::volterra1d::VolterraError| e.to_string())?;
    let grid = Grid1D::new(n, Scheme::LeftRectangle).map_err(|e| e.to_string())?;
    let spec = SigmaSpec::from_family(&grid, &family, SigmaKind::Cauchy).map_err(|e| e.to_string())?;
    let cert = volterra_certificate(&grid, &spec).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "sigma0": finite(spec.sigma0().re),
        "certified": cert.certified(),
        "certified_max_modulus": finite(cert.certified_max_modulus),
        "similarity_residual": finite(cert.similarity_residual),
        "first_zero_step": cert.first_zero_step,
        "dense_max_modulus": finite(cert.dense_max_modulus),
        "dense_power_norms": cert.dense_power_norms.iter().map(|x| finite(*x)).collect::<Vec<_>>(),
        "factored_power_norms": cert.factored_power_norms.iter().map(|x| finite(*x)).collect::<Vec<_>>(),
    }))
}

/// Dirichlet Laplacian perturbed through one zero of `F` at `(x, y)`.
pub fn laplace_report(n: usize, x: f64, y: f64) -> Result<Value, String> {
    check_size(n, 4, MAX_LAPLACE_N)?;
    let grid = RectGrid::new(n).map_err(|e| e.to_string())?;
    let zeros = ZeroSet::new(vec![(c(x, y), 1)]).map_err(|e| e.to_string())?;
    zeros.validate(&grid).map_err(|e| e.to_string())?;
    let omega = HarmonicWeight::constant(&grid);
    let kernel = solve_poisson_log_f(&grid, &zeros).map_err(|e| e.to_string())?;
    let adm = admissibility_2d(&grid, &omega, &kernel, Some(&zeros)).map_err(|e| e.to_string())?;
    let split = greens_split_check(&grid, &zeros, TestField::SineProduct { p: 1, q: 1 }).map_err(|e| e.to_string())?;
    let mut out = json!({
        "n": n,
        "s_delta": finite(adm.s_delta.re),
        "density_sigma_min": finite(adm.density.sigma_min),
        "admissible": adm.admissible,
        "greens_discrepancy": finite(split.discrepancy),
        "kernel": kernel.values.iter().map(|v| finite(v.re)).collect::<Vec<_>>(),
    });
    if adm.admissible {
        let (_, pair) = laplace_pair(&grid, &omega, &kernel).map_err(|e| e.to_string())?;
        let bk = pair.bk.as_ref().ok_or("missing B_K")?;
        let report = closed_form_spectrum_check(bk, &grid, MATCH_TOL).map_err(|e| e.to_string())?;
        let e = eig_general(bk).map_err(|e| e.to_string())?;
        let cond = isospec_core::framework::eigenvector_condition(&e).map_err(|e| e.to_string())?;
        out["spectrum_passed"] = json!(report.passed);
        out["max_abs_diff"] = finite(report.max_abs_diff);
        out["riesz_condition"] = finite(cond);
        out["eigenvalues"] = json!(report.pairs.iter().map(|p| p.lambda_pert.re).collect::<Vec<_>>());
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn random_model(n: usize, seed: u32) -> String {
    respond(random_model_report(n, seed as u64))
}

#[wasm_bindgen]
pub fn volterra(n: usize, sigma: &str) -> String {
    respond(volterra_report(n, sigma))
}

#[wasm_bindgen]
pub fn laplace(n: usize, x: f64, y: f64) -> String {
    respond(laplace_report(n, x, y))
}
