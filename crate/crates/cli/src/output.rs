use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use isospec_core::framework::SpectralPair;

use crate::config::{ExperimentConfig, Format};
use crate::pipelines::{num, verdict, EntryResult};

pub const SPECTRAL_COLUMNS: [&str; 7] =
    ["index", "lambda_ref_re", "lambda_ref_im", "lambda_pert_re", "lambda_pert_im", "abs_diff", "vec_residual"];
pub const CONVERGENCE_COLUMNS: [&str; 5] = ["n", "max_abs_diff", "riesz_condition", "greens_discrepancy", "verdict"];

/// Seventeen significant digits, lowercase scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(contents.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn spectral_csv(pairs: &[SpectralPair]) -> String {
    let mut s = SPECTRAL_COLUMNS.join(",");
    s.push('\n');
    for (i, p) in pairs.iter().enumerate() {
        let fields = [p.lambda_ref.re, p.lambda_ref.im, p.lambda_pert.re, p.lambda_pert.im, p.abs_diff, p.vec_residual];
        s.push_str(&i.to_string());
        for v in fields {
            s.push(',');
            s.push_str(&fmt_f64(v));
        }
        s.push('\n');
    }
    s
}

pub fn spectral_json(pairs: &[SpectralPair]) -> String {
    let rows: Vec<Value> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "index": i,
                "lambda_ref_re": num(p.lambda_ref.re),
                "lambda_ref_im": num(p.lambda_ref.im),
                "lambda_pert_re": num(p.lambda_pert.re),
                "lambda_pert_im": num(p.lambda_pert.im),
                "abs_diff": num(p.abs_diff),
                "vec_residual": num(p.vec_residual),
            })
        })
        .collect();
    pretty(&Value::Array(rows))
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_spectral_report(dir: &Path, stem: &str, format: Format, pairs: &[SpectralPair]) -> Result<PathBuf> {
    let (ext, body) = match format {
        Format::Csv => ("csv", spectral_csv(pairs)),
        Format::Json => ("json", spectral_json(pairs)),
    };
    let path = dir.join(format!("{stem}.{ext}"));
    write_file(&path, &body)?;
    Ok(path)
}

/// A refinement verdict over the whole sweep.
#[derive(Clone, Debug, Serialize)]
pub struct Trend {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn convergence_csv(entries: &[EntryResult], trends: &[Trend]) -> String {
    let mut s = CONVERGENCE_COLUMNS.join(",");
    s.push('\n');
    for e in entries {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            e.n,
            fmt_opt(e.max_abs_diff),
            fmt_opt(e.riesz_condition),
            fmt_opt(e.greens_discrepancy),
            verdict(e.passed())
        ));
    }
    for t in trends {
        s.push_str(&format!("trend:{},,,,{}\n", t.name, verdict(t.passed)));
    }
    s
}

pub fn convergence_json(entries: &[EntryResult], trends: &[Trend]) -> String {
    let rows: Vec<Value> = entries
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "max_abs_diff": e.max_abs_diff.map(num),
                "riesz_condition": e.riesz_condition.map(num),
                "greens_discrepancy": e.greens_discrepancy.map(num),
                "verdict": verdict(e.passed()),
            })
        })
        .collect();
    pretty(&json!({ "rows": rows, "trends": trends }))
}

pub fn write_convergence(dir: &Path, format: Format, entries: &[EntryResult], trends: &[Trend]) -> Result<PathBuf> {
    let (name, body) = match format {
        Format::Csv => ("convergence.csv", convergence_csv(entries, trends)),
        Format::Json => ("convergence.json", convergence_json(entries, trends)),
    };
    let path = dir.join(name);
    write_file(&path, &body)?;
    Ok(path)
}

/// Everything needed to reproduce and audit a run; written even when the
/// run fails.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub verb: &'static str,
    pub config: Option<ExperimentConfig>,
    pub passed: bool,
    pub exit_code: i32,
    pub error: Option<String>,
    pub entries: Vec<EntryResult>,
    pub trends: Vec<Trend>,
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(verb: &'static str, config: Option<ExperimentConfig>) -> Self {
        Self {
            artifact: "isospec",
            version: env!("CARGO_PKG_VERSION"),
            verb,
            config,
            passed: false,
            exit_code: 2,
            error: None,
            entries: Vec::new(),
            trends: Vec::new(),
            files: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("manifest.json");
        write_file(&path, &pretty(self))?;
        Ok(path)
    }
}
