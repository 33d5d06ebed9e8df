//! Experiment manifest parsing and validation.
//!
//! Manifests are strict JSON: unknown keys are rejected so typos surface as
//! parse errors, and every semantic rule failure names the offending
//! experiment and key. The full schema is documented in the repository
//! README.

use anyhow::{anyhow, bail, Context, Result};
use nnlms_core::{AlgorithmKind, Ar1Process, ExperimentConfig, SystemModel};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// How the mean steady-state weights fed to the predictors are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanWeightsMode {
    /// Constrained minimizer from the active-set solver (default).
    Nnls,
    /// Ensemble-averaged final weights from the simulation.
    Empirical,
}

impl MeanWeightsMode {
    pub fn label(self) -> &'static str {
        match self {
            MeanWeightsMode::Nnls => "nnls",
            MeanWeightsMode::Empirical => "empirical",
        }
    }
}

/// Which artifacts `run` writes per experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitSet {
    pub trajectory_csv: bool,
    pub report_json: bool,
}

/// One resolved experiment: a named, validated configuration.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub name: String,
    pub config: ExperimentConfig,
}

/// A parsed and validated manifest.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub emit: EmitSet,
    pub mean_weights: MeanWeightsMode,
    pub entries: Vec<ManifestEntry>,
}

fn default_window_fraction() -> f64 {
    0.2
}

fn default_lookahead_fraction() -> f64 {
    nnlms_core::ensemble::DEFAULT_LOOKAHEAD_FRACTION
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    #[allow(dead_code)]
    comment: Option<String>,
    base_seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    emit: Option<Vec<String>>,
    #[serde(default = "default_window_fraction")]
    steady_window_fraction: f64,
    #[serde(default = "default_lookahead_fraction")]
    divergence_lookahead_fraction: f64,
    #[serde(default)]
    mean_weights: Option<String>,
    system: SystemSection,
    input: InputSection,
    experiments: Vec<ExperimentSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    true_weights: Vec<f64>,
    noise_variance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSection {
    pole: f64,
    innovation_variance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: String,
    algorithm: String,
    step_size: f64,
    #[serde(default)]
    exponent: Option<f64>,
    #[serde(default)]
    regularizer: Option<f64>,
    initial_weights: InitialWeights,
    iterations: usize,
    runs: usize,
    #[serde(default)]
    #[allow(dead_code)]
    comment: Option<String>,
}

/// Either one value broadcast to every tap or a full vector.
#[derive(Deserialize)]
#[serde(untagged)]
enum InitialWeights {
    Uniform(f64),
    Vector(Vec<f64>),
}

const ALGORITHMS: &[&str] = &[
    "nnlms",
    "normalized-nnlms",
    "exponential-nnlms",
    "sign-sign-nnlms",
];

fn resolve_algorithm(entry: &ExperimentSection) -> Result<AlgorithmKind> {
    let name = &entry.name;
    let kind = match entry.algorithm.as_str() {
        "nnlms" => AlgorithmKind::Nnlms {
            step_size: entry.step_size,
        },
        "normalized-nnlms" => AlgorithmKind::NormalizedNnlms {
            step_size: entry.step_size,
            regularizer: entry.regularizer.unwrap_or(0.0),
        },
        "exponential-nnlms" => AlgorithmKind::ExponentialNnlms {
            step_size: entry.step_size,
            exponent: entry.exponent.ok_or_else(|| {
                anyhow!(
                    "experiment \"{name}\": exponential-nnlms requires an explicit \"exponent\""
                )
            })?,
        },
        "sign-sign-nnlms" => AlgorithmKind::SignSignNnlms {
            step_size: entry.step_size,
        },
        other => bail!(
            "experiment \"{name}\": unknown algorithm \"{other}\" (expected one of {})",
            ALGORITHMS.join(", ")
        ),
    };
    if entry.exponent.is_some() && !matches!(kind, AlgorithmKind::ExponentialNnlms { .. }) {
        bail!("experiment \"{name}\": \"exponent\" is only valid for exponential-nnlms");
    }
    if entry.regularizer.is_some() && !matches!(kind, AlgorithmKind::NormalizedNnlms { .. }) {
        bail!("experiment \"{name}\": \"regularizer\" is only valid for normalized-nnlms");
    }
    Ok(kind)
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        bail!("experiment names must be non-empty");
    }
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
    {
        bail!(
            "experiment name \"{name}\" may only contain ASCII letters, digits, '-', '_', '.' \
             (it becomes a file name)"
        );
    }
    Ok(())
}

fn resolve_emit(raw: Option<Vec<String>>) -> Result<EmitSet> {
    let Some(values) = raw else {
        return Ok(EmitSet {
            trajectory_csv: true,
            report_json: true,
        });
    };
    let mut emit = EmitSet {
        trajectory_csv: false,
        report_json: false,
    };
    for value in &values {
        match value.as_str() {
            "trajectory-csv" => emit.trajectory_csv = true,
            "report-json" => emit.report_json = true,
            other => bail!(
                "\"emit\" entries must be \"trajectory-csv\" or \"report-json\", got \"{other}\""
            ),
        }
    }
    if !emit.trajectory_csv && !emit.report_json {
        bail!("\"emit\" must request at least one artifact");
    }
    Ok(emit)
}

/// Parses and validates a manifest file. Optional overrides replace the
/// manifest's base seed and output directory.
pub fn parse_config(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let file: ManifestFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse manifest {}", path.display()))?;

    if file.experiments.is_empty() {
        bail!("manifest needs at least one experiment entry");
    }
    let mean_weights = match file.mean_weights.as_deref() {
        None | Some("nnls") => MeanWeightsMode::Nnls,
        Some("empirical") => MeanWeightsMode::Empirical,
        Some(other) => bail!("\"mean_weights\" must be \"nnls\" or \"empirical\", got \"{other}\""),
    };
    let emit = resolve_emit(file.emit)?;

    let system = SystemModel::new(file.system.true_weights, file.system.noise_variance)
        .map_err(|e| anyhow!("system section: {e}"))?;
    let process = Ar1Process::new(file.input.pole, file.input.innovation_variance, 0)
        .map_err(|e| anyhow!("input section: {e}"))?;

    let mut entries = Vec::with_capacity(file.experiments.len());
    for section in &file.experiments {
        validate_name(&section.name)?;
        if entries
            .iter()
            .any(|e: &ManifestEntry| e.name == section.name)
        {
            bail!("duplicate experiment name \"{}\"", section.name);
        }
        let algorithm = resolve_algorithm(section)?;
        let initial_weights = match &section.initial_weights {
            InitialWeights::Uniform(v) => vec![*v; system.order()],
            InitialWeights::Vector(v) => v.clone(),
        };
        let config = ExperimentConfig {
            system: system.clone(),
            process,
            algorithm,
            initial_weights,
            iterations: section.iterations,
            runs: section.runs,
            base_seed: file.base_seed,
            steady_window_fraction: file.steady_window_fraction,
            divergence_lookahead_fraction: file.divergence_lookahead_fraction,
        };
        config
            .validate()
            .map_err(|e| anyhow!("experiment \"{}\": {e}", section.name))?;
        entries.push(ManifestEntry {
            name: section.name.clone(),
            config,
        });
    }

    Ok(RunManifest {
        base_seed: file.base_seed,
        output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        emit,
        mean_weights,
        entries,
    })
}

impl RunManifest {
    /// Re-seeds every entry, as requested by `--seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.base_seed = seed;
        for entry in &mut self.entries {
            entry.config.base_seed = seed;
        }
    }
}
