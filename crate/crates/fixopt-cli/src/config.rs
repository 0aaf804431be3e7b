//! Run configuration: a single flat JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::presets::{self, AlgorithmSpec};
use crate::CliError;
use fixopt::{BetaSchedule, RateKind, Schedule};

/// Which constraint sampler the experiment uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Per factor, balls sharing a common interior point.
    Consistent,
    /// Per factor, two disjoint balls with a certified gap.
    Inconsistent,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Consistent => "consistent",
            Case::Inconsistent => "inconsistent",
        }
    }
}

/// An algorithm entry: either a preset name or a full custom description.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum AlgorithmChoice {
    Preset(String),
    Custom(CustomAlgorithm),
}

/// Step-size schedule in configuration form.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    /// `{"constant": 0.01}`
    Constant(f64),
    /// `{"power": {"base": 0.1, "exponent": 0.5}}` meaning `base / n^exponent`.
    Power { base: f64, exponent: f64 },
}

/// Momentum-weight schedule in configuration form.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSpec {
    /// `{"constant": 0.9}`
    Constant(f64),
    /// `{"geometric": 0.9}` meaning `0.9^n`.
    Geometric(f64),
}

/// A fully spelled-out algorithm configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomAlgorithm {
    pub name: String,
    /// One of `sgd`, `adagrad`, `adam`, `amsgrad`.
    pub engine: String,
    pub alpha: AlphaSpec,
    pub beta: BetaSpec,
    pub beta_hat: f64,
    pub bar_beta: f64,
    /// Relaxation weight of the constraint maps; defaults to 0.5.
    #[serde(default = "default_alpha_relax")]
    pub alpha_relax: f64,
}

fn default_alpha_relax() -> f64 {
    0.5
}

fn default_samplings() -> usize {
    10
}

/// The raw configuration document as read from disk.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    /// Disk dimension per factor.
    pub m: usize,
    /// Number of product factors.
    #[serde(rename = "I")]
    pub factor_count: usize,
    /// Balls per factor; defaults to 5 for the consistent case and is
    /// fixed at 2 for the inconsistent one.
    #[serde(rename = "J", default)]
    pub balls_per_factor: Option<usize>,
    /// Iteration budget; defaults to 500 (m < 10), 1000 (m < 100) or
    /// 1500 otherwise.
    #[serde(default)]
    pub iterations: Option<u64>,
    /// Independent samplings to average over.
    #[serde(default = "default_samplings")]
    pub samplings: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub algorithms: Vec<AlgorithmChoice>,
    #[serde(default)]
    pub emit_svg: bool,
    #[serde(default)]
    pub bound_diagnostics: bool,
    /// Output directory; the `--out-dir` flag overrides it.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Validates the document and resolves every default, producing the
    /// plan the runner executes.
    pub fn resolve(&self) -> Result<ExperimentPlan, CliError> {
        if self.m == 0 {
            return Err(CliError::Config("disk dimension m must be positive".into()));
        }
        if self.factor_count < 2 {
            return Err(CliError::Config(
                "factor count I must be at least 2 (the objective couples neighbouring factors)"
                    .into(),
            ));
        }
        let balls_per_factor = match (self.case, self.balls_per_factor) {
            (Case::Inconsistent, Some(j)) if j != 2 => {
                return Err(CliError::Config(format!(
                    "the inconsistent case uses exactly 2 balls per factor, got J = {j}"
                )));
            }
            (Case::Inconsistent, _) => 2,
            (Case::Consistent, Some(0)) => {
                return Err(CliError::Config("J must be positive".into()));
            }
            (Case::Consistent, Some(j)) => j,
            (Case::Consistent, None) => 5,
        };
        let iterations = match self.iterations {
            Some(0) => return Err(CliError::Config("iterations must be at least 1".into())),
            Some(n) => n,
            None if self.m < 10 => 500,
            None if self.m < 100 => 1000,
            None => 1500,
        };
        if self.samplings == 0 {
            return Err(CliError::Config("samplings must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::Config("algorithms list must not be empty".into()));
        }
        let mut algorithms = Vec::with_capacity(self.algorithms.len());
        for choice in &self.algorithms {
            algorithms.push(resolve_choice(choice)?);
        }
        for (i, a) in algorithms.iter().enumerate() {
            if algorithms[..i].iter().any(|b| b.name == a.name) {
                return Err(CliError::Config(format!(
                    "duplicate algorithm name '{}'",
                    a.name
                )));
            }
        }
        Ok(ExperimentPlan {
            case: self.case,
            dim: self.m,
            factor_count: self.factor_count,
            balls_per_factor,
            iterations,
            samplings: self.samplings,
            master_seed: self.master_seed,
            algorithms,
            emit_svg: self.emit_svg,
            bound_diagnostics: self.bound_diagnostics,
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

fn resolve_choice(choice: &AlgorithmChoice) -> Result<AlgorithmSpec, CliError> {
    match choice {
        AlgorithmChoice::Preset(name) => presets::resolve(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}'; valid presets: {}",
                presets::PRESET_NAMES.join(", ")
            ))
        }),
        AlgorithmChoice::Custom(c) => resolve_custom(c),
    }
}

fn resolve_custom(c: &CustomAlgorithm) -> Result<AlgorithmSpec, CliError> {
    if c.name.is_empty() {
        return Err(CliError::Config("custom algorithm name must not be empty".into()));
    }
    let engine = match c.engine.as_str() {
        "sgd" => RateKind::Sgd,
        "adagrad" => RateKind::Adagrad,
        "adam" => RateKind::Adam,
        "amsgrad" => RateKind::Amsgrad,
        other => {
            return Err(CliError::Config(format!(
                "unknown engine '{other}'; valid engines: sgd, adagrad, adam, amsgrad"
            )));
        }
    };
    let alpha = match c.alpha {
        AlphaSpec::Constant(v) => {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Config(format!(
                    "constant step size must lie in (0, 1), got {v}"
                )));
            }
            Schedule::constant(v)
        }
        AlphaSpec::Power { base, exponent } => {
            if !(base > 0.0 && base < 1.0) {
                return Err(CliError::Config(format!(
                    "step-size base must lie in (0, 1), got {base}"
                )));
            }
            if !(0.0..=1.0).contains(&exponent) {
                return Err(CliError::Config(format!(
                    "step-size exponent must lie in [0, 1], got {exponent}"
                )));
            }
            Schedule::power(base, exponent)
        }
    };
    let beta = match c.beta {
        BetaSpec::Constant(v) => {
            if !(0.0..1.0).contains(&v) {
                return Err(CliError::Config(format!(
                    "constant momentum weight must lie in [0, 1), got {v}"
                )));
            }
            BetaSchedule::constant(v)
        }
        BetaSpec::Geometric(r) => {
            if !(0.0..1.0).contains(&r) {
                return Err(CliError::Config(format!(
                    "geometric momentum ratio must lie in [0, 1), got {r}"
                )));
            }
            BetaSchedule::geometric(r)
        }
    };
    if !(0.0..1.0).contains(&c.beta_hat) {
        return Err(CliError::Config(format!(
            "beta_hat must lie in [0, 1), got {}",
            c.beta_hat
        )));
    }
    if !(0.0..1.0).contains(&c.bar_beta) {
        return Err(CliError::Config(format!(
            "bar_beta must lie in [0, 1), got {}",
            c.bar_beta
        )));
    }
    if !(c.alpha_relax > 0.0 && c.alpha_relax < 1.0) {
        return Err(CliError::Config(format!(
            "alpha_relax must lie in (0, 1), got {}",
            c.alpha_relax
        )));
    }
    Ok(AlgorithmSpec {
        name: c.name.clone(),
        engine,
        alpha,
        beta,
        beta_hat: c.beta_hat,
        bar_beta: c.bar_beta,
        alpha_relax: c.alpha_relax,
    })
}

/// A validated, fully resolved experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub case: Case,
    pub dim: usize,
    pub factor_count: usize,
    pub balls_per_factor: usize,
    pub iterations: u64,
    pub samplings: usize,
    pub master_seed: u64,
    pub algorithms: Vec<AlgorithmSpec>,
    pub emit_svg: bool,
    pub bound_diagnostics: bool,
    pub out_dir: PathBuf,
}
