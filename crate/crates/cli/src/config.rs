use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::{Deserialize, Serialize};

use isospec_core::laplace2d::{HarmonicKind, KernelSource, RectGrid, ZeroSet};
use isospec_core::numcore::c;
use isospec_core::tolerances::Tolerances;
use isospec_core::volterra1d::{Grid1D, Scheme, SigmaFamily, SigmaKind, SigmaSpec};

use crate::InvalidInput;

/// Largest 2D grid assembled densely (`n² = 1600` unknowns).
pub const LAPLACE_DENSE_MAX_N: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    FrameworkRandom,
    D1Cauchy,
    D1Antiperiodic,
    Laplace2d,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::FrameworkRandom => "framework_random",
            Self::D1Cauchy => "d1_cauchy",
            Self::D1Antiperiodic => "d1_antiperiodic",
            Self::Laplace2d => "laplace2d",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSourceConfig {
    #[serde(rename = "explicit")]
    Explicit,
    #[serde(rename = "poisson_logF")]
    PoissonLogF,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaConfig {
    pub kind: String,
    pub degree: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub match_tol: Option<f64>,
    pub transfer_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// The configuration file as written by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub seed: Option<u64>,
    /// Number of random models per grid size (framework_random only).
    pub count: Option<usize>,
    pub sigma: Option<String>,
    pub omega: Option<OmegaConfig>,
    /// `[re, im, multiplicity]` triples.
    pub zeros: Option<Vec<(f64, f64, u32)>>,
    pub kernel_source: Option<KernelSourceConfig>,
    /// Amplitude of the explicit kernel `g = a·sin(πx)·sin(πy)`.
    pub kernel_amplitude: Option<f64>,
    pub tolerances: Option<ToleranceConfig>,
    pub output: Option<OutputConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, InvalidInput> {
        toml::from_str(text).map_err(|e| InvalidInput(format!("config: {}", e.to_string().trim_end())))
    }

    pub fn load(path: &Path) -> Result<Self, InvalidInput> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Run,
    Sweep,
}

/// Experiment-specific inputs, fully validated.
#[derive(Clone, Debug)]
pub enum Setup {
    FrameworkRandom { seed: u64, count: usize },
    D1Cauchy { family: SigmaFamily },
    D1Antiperiodic { family: SigmaFamily },
    Laplace2d { omega: HarmonicKind, zeros: ZeroSet, source: KernelSource, amplitude: f64 },
}

/// Everything a run needs; built only after every key has been checked.
#[derive(Clone, Debug)]
pub struct Plan {
    pub verb: Verb,
    pub experiment: Experiment,
    pub sizes: Vec<usize>,
    pub setup: Setup,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
    pub format: Format,
    pub config: ExperimentConfig,
}

fn bad(key: &str, msg: impl fmt::Display) -> InvalidInput {
    InvalidInput(format!("{key}: {msg}"))
}

fn reject_unused(cfg: &ExperimentConfig) -> Result<(), InvalidInput> {
    let e = cfg.experiment;
    let used = |keys: &[&str], key: &str| keys.contains(&key);
    let keys: &[&str] = match e {
        Experiment::FrameworkRandom => &["seed", "count"],
        Experiment::D1Cauchy | Experiment::D1Antiperiodic => &["sigma"],
        Experiment::Laplace2d => &["omega", "zeros", "kernel_source", "kernel_amplitude"],
    };
    let present = [
        ("seed", cfg.seed.is_some()),
        ("count", cfg.count.is_some()),
        ("sigma", cfg.sigma.is_some()),
        ("omega", cfg.omega.is_some()),
        ("zeros", cfg.zeros.is_some()),
        ("kernel_source", cfg.kernel_source.is_some()),
        ("kernel_amplitude", cfg.kernel_amplitude.is_some()),
    ];
    for (key, set) in present {
        if set && !used(keys, key) {
            return Err(bad(key, format!("not used by experiment {e}")));
        }
    }
    Ok(())
}

fn sizes(cfg: &ExperimentConfig, verb: Verb) -> Result<Vec<usize>, InvalidInput> {
    match (verb, cfg.n, &cfg.n_list) {
        (_, Some(_), Some(_)) => Err(bad("n_list", "give either n or n_list, not both")),
        (Verb::Run, Some(n), None) => Ok(vec![n]),
        (Verb::Run, None, _) => Err(bad("n", "run needs a single grid size n")),
        (Verb::Sweep, None, Some(list)) => {
            if list.len() < 2 {
                return Err(bad("n_list", format!("a sweep needs at least two sizes, got {}", list.len())));
            }
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(bad("n_list", "sizes must be strictly ascending"));
            }
            Ok(list.clone())
        }
        (Verb::Sweep, _, None) => Err(bad("n_list", "sweep needs n_list")),
    }
}

fn parse_omega(cfg: &Option<OmegaConfig>) -> Result<HarmonicKind, InvalidInput> {
    let Some(o) = cfg else { return Ok(HarmonicKind::Constant) };
    match (o.kind.as_str(), o.degree) {
        ("constant", None) => Ok(HarmonicKind::Constant),
        ("constant", Some(_)) => Err(bad("omega.degree", "not used by kind constant")),
        ("re_power" | "im_power", None) => Err(bad("omega.degree", format!("required for kind {}", o.kind))),
        (_, Some(0)) => Err(bad("omega.degree", "must be at least 1")),
        ("re_power", Some(p)) => Ok(HarmonicKind::RePower(p)),
        ("im_power", Some(p)) => Ok(HarmonicKind::ImPower(p)),
        (other, _) => Err(bad("omega.kind", format!("{other:?}: expected constant, re_power or im_power"))),
    }
}

fn sigma_family(cfg: &ExperimentConfig, default: &str) -> Result<SigmaFamily, InvalidInput> {
    cfg.sigma
        .as_deref()
        .unwrap_or(default)
        .parse()
        .map_err(|e| bad("sigma", e))
}

/// Validates every field and resolves defaults. `out_override` is the
/// command-line `--out`.
pub fn plan(cfg: ExperimentConfig, verb: Verb, out_override: Option<PathBuf>) -> Result<Plan, InvalidInput> {
    reject_unused(&cfg)?;
    let sizes = sizes(&cfg, verb)?;
    let mut tolerances = Tolerances::default();
    if let Some(t) = &cfg.tolerances {
        for (key, value, slot) in [
            ("tolerances.match_tol", t.match_tol, &mut tolerances.match_tol),
            ("tolerances.transfer_tol", t.transfer_tol, &mut tolerances.transfer_tol),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad(key, format!("must be positive and finite, got {v}")));
                }
                *slot = v;
            }
        }
    }
    let setup = match cfg.experiment {
        Experiment::FrameworkRandom => {
            let count = cfg.count.unwrap_or(1);
            if count == 0 {
                return Err(bad("count", "must be at least 1"));
            }
            for &n in &sizes {
                if n == 0 || n > 400 {
                    return Err(bad("n", format!("random models need 1 ≤ n ≤ 400, got {n}")));
                }
            }
            Setup::FrameworkRandom { seed: cfg.seed.unwrap_or(0), count }
        }
        Experiment::D1Cauchy => {
            let family = sigma_family(&cfg, "affine(1,-1)")?;
            for &n in &sizes {
                let grid = Grid1D::new(n, Scheme::LeftRectangle).map_err(|e| bad("n", e))?;
                if n > 2048 {
                    return Err(bad("n", format!("dense Cauchy grids are limited to 2048 nodes, got {n}")));
                }
                SigmaSpec::from_family(&grid, &family, SigmaKind::Cauchy).map_err(|e| bad("sigma", e))?;
            }
            Setup::D1Cauchy { family }
        }
        Experiment::D1Antiperiodic => {
            let family = sigma_family(&cfg, "cosine(1,0.25)")?;
            for &n in &sizes {
                if n % 2 == 0 {
                    return Err(bad("n", format!("the anti-periodic scheme needs an odd node count, got {n}")));
                }
                if n > 2049 {
                    return Err(bad("n", format!("dense anti-periodic grids are limited to 2049 nodes, got {n}")));
                }
                let grid = Grid1D::new(n, Scheme::Trapezoid).map_err(|e| bad("n", e))?;
                SigmaSpec::from_family(&grid, &family, SigmaKind::Antiperiodic).map_err(|e| bad("sigma", e))?;
            }
            Setup::D1Antiperiodic { family }
        }
        Experiment::Laplace2d => {
            let omega = parse_omega(&cfg.omega)?;
            let source = match cfg.kernel_source.unwrap_or(KernelSourceConfig::PoissonLogF) {
                KernelSourceConfig::Explicit => KernelSource::Explicit,
                KernelSourceConfig::PoissonLogF => KernelSource::PoissonLogF,
            };
            let amplitude = match (source, cfg.kernel_amplitude) {
                (KernelSource::PoissonLogF, Some(_)) => {
                    return Err(bad("kernel_amplitude", "only used with kernel_source = \"explicit\""))
                }
                (_, Some(a)) if !a.is_finite() => return Err(bad("kernel_amplitude", "must be finite")),
                (_, a) => a.unwrap_or(0.25),
            };
            let triples = cfg.zeros.clone().unwrap_or_default();
            let zeros =
                ZeroSet::new(triples.iter().map(|&(x, y, m)| (c(x, y), m)).collect()).map_err(|e| bad("zeros", e))?;
            for &n in &sizes {
                if n < 4 {
                    return Err(bad("n", format!("need at least 4 interior nodes per axis, got {n}")));
                }
                if verb == Verb::Run && n > LAPLACE_DENSE_MAX_N {
                    return Err(bad("n", format!("dense runs are limited to n ≤ {LAPLACE_DENSE_MAX_N}, got {n}")));
                }
                let grid = RectGrid::new(n).map_err(|e| bad("n", e))?;
                zeros.validate(&grid).map_err(|e| bad("zeros", format!("{e} (n = {n})")))?;
            }
            Setup::Laplace2d { omega, zeros, source, amplitude }
        }
    };
    let output = cfg.output.clone().unwrap_or_default();
    let out_dir = out_override.or(output.dir).unwrap_or_else(|| PathBuf::from("isospec_out"));
    let mut config = cfg;
    config.output = Some(OutputConfig { dir: Some(out_dir.clone()), format: output.format });
    Ok(Plan {
        verb,
        experiment: config.experiment,
        sizes,
        setup,
        tolerances,
        out_dir,
        format: output.format.unwrap_or_default(),
        config,
    })
}
