//! Configuration, orchestration and reporting for the `isospec` command.

pub mod config;
pub mod output;
pub mod pipelines;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use log::{error, info, warn};

use config::{plan, Experiment, ExperimentConfig, Plan, Setup, Verb};
use output::{write_convergence, write_spectral_report, RunManifest, Trend};
use pipelines::{run_entry, EntryResult};

/// Input rejected before or during a run; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InvalidInput>().is_some() {
        EXIT_INVALID
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Refinement verdicts for a finished sweep.
pub fn trends(plan: &Plan, entries: &[EntryResult]) -> Vec<Trend> {
    let mut out = vec![Trend {
        name: "all_entries_pass".into(),
        passed: entries.iter().all(EntryResult::passed),
        detail: format!("{} entries", entries.len()),
    }];
    match &plan.setup {
        Setup::Laplace2d { zeros, .. } if !zeros.is_empty() => {
            let d: Vec<f64> = entries.iter().filter_map(|e| e.greens_discrepancy).collect();
            let ratios: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
            out.push(Trend {
                name: "greens_discrepancy_decreasing".into(),
                passed: ratios.iter().all(|r| *r <= GREENS_RATIO),
                detail: format!("ratios {ratios:?}, limit {GREENS_RATIO}"),
            });
            let r: Vec<f64> = entries.iter().filter_map(|e| e.riesz_condition).collect();
            if r.len() >= 2 {
                let ratios: Vec<f64> = r.windows(2).map(|w| w[1] / w[0]).collect();
                out.push(Trend {
                    name: "riesz_condition_bounded".into(),
                    passed: ratios.iter().all(|q| *q <= RIESZ_RATIO),
                    detail: format!("ratios {ratios:?}, limit {RIESZ_RATIO}"),
                });
            }
        }
        Setup::D1Antiperiodic { .. } => {
            let pts: Vec<(f64, f64)> = entries
                .iter()
                .filter_map(|e| e.metric("top_eigenvalue_error").map(|err| (1.0 / (e.n - 1) as f64, err)))
                .collect();
            let orders: Vec<f64> = pts.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect();
            out.push(Trend {
                name: "top_eigenvalue_second_order".into(),
                passed: orders.iter().all(|p| *p >= MIN_TRAPEZOID_ORDER),
                detail: format!("observed orders {orders:?}, minimum {MIN_TRAPEZOID_ORDER}"),
            });
        }
        _ => {}
    }
    out
}

/// Largest accepted ratio of successive Green-split discrepancies.
pub const GREENS_RATIO: f64 = 0.67;
/// Largest accepted ratio of successive eigenvector condition numbers.
pub const RIESZ_RATIO: f64 = 1.2;
/// Smallest observed convergence order of the leading anti-periodic eigenvalues.
pub const MIN_TRAPEZOID_ORDER: f64 = 1.5;

/// Runs a validated plan, writing reports into `plan.out_dir`.
pub fn execute_plan(plan: &Plan, manifest: &mut RunManifest) -> Result<()> {
    std::fs::create_dir_all(&plan.out_dir)?;
    let entries: Vec<Result<EntryResult>> = match plan.verb {
        Verb::Run => vec![run_entry(plan, plan.sizes[0])],
        Verb::Sweep => std::thread::scope(|s| {
            let handles: Vec<_> = plan.sizes.iter().map(|&n| s.spawn(move || run_entry(plan, n))).collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        }),
    };
    for entry in entries {
        let entry = entry?;
        let stem = match plan.verb {
            Verb::Run => "spectral_report".to_string(),
            Verb::Sweep => format!("spectral_report_n{}", entry.n),
        };
        if !entry.pairs.is_empty() || plan.experiment != Experiment::Laplace2d {
            let path = write_spectral_report(&plan.out_dir, &stem, plan.format, &entry.pairs)?;
            manifest.files.push(path.display().to_string());
        }
        manifest.entries.push(entry);
    }
    if plan.verb == Verb::Sweep {
        manifest.trends = trends(plan, &manifest.entries);
        let path = write_convergence(&plan.out_dir, plan.format, &manifest.entries, &manifest.trends)?;
        manifest.files.push(path.display().to_string());
    }
    manifest.passed =
        manifest.entries.iter().all(EntryResult::passed) && manifest.trends.iter().all(|t| t.passed);
    Ok(())
}

/// Loads, validates and runs a configuration; returns the process exit code.
pub fn execute(verb: Verb, config_path: &Path, out_override: Option<PathBuf>) -> i32 {
    let start = Instant::now();
    let verb_name = match verb {
        Verb::Run => "run",
        Verb::Sweep => "sweep",
    };
    let cfg = ExperimentConfig::load(config_path);
    let fallback_dir = out_override.clone().or_else(|| {
        cfg.as_ref().ok().and_then(|c| c.output.as_ref()).and_then(|o| o.dir.clone())
    });
    let mut manifest = RunManifest::new(verb_name, cfg.as_ref().ok().cloned());
    let result = cfg.map_err(anyhow::Error::from).and_then(|cfg| {
        let plan = plan(cfg, verb, out_override.clone())?;
        manifest.config = Some(plan.config.clone());
        info!("{verb_name} {} over n = {:?}, output in {}", plan.experiment, plan.sizes, plan.out_dir.display());
        execute_plan(&plan, &mut manifest).map(|()| plan.out_dir.clone())
    });
    let out_dir = match &result {
        Ok(dir) => Some(dir.clone()),
        Err(_) => manifest
            .config
            .as_ref()
            .and_then(|c| c.output.as_ref())
            .and_then(|o| o.dir.clone())
            .or(fallback_dir),
    };
    manifest.exit_code = match &result {
        Ok(_) if manifest.passed => EXIT_PASS,
        Ok(_) => EXIT_CHECK_FAILED,
        Err(e) => {
            error!("{e:#}");
            manifest.error = Some(format!("{e:#}"));
            exit_code_for(e)
        }
    };
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    match out_dir {
        Some(dir) => {
            if let Err(e) = manifest.write(&dir) {
                error!("could not write manifest: {e:#}");
            }
        }
        None => warn!("no output directory known; manifest not written"),
    }
    for e in &manifest.entries {
        for c in e.checks.iter().filter(|c| !c.passed) {
            warn!("n={} check {} failed (value {}, threshold {})", e.n, c.name, c.value, c.threshold);
        }
    }
    for t in manifest.trends.iter().filter(|t| !t.passed) {
        warn!("trend {} failed: {}", t.name, t.detail);
    }
    info!("exit code {}", manifest.exit_code);
    manifest.exit_code
}
