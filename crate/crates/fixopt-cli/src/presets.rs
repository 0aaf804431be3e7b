//! The twelve benchmark presets: constant-step (C...) and diminishing-step
//! (D...) variants of plain stochastic descent, the accumulating-rate
//! engine, and the two exponential-moving-average engines.

use fixopt::{BetaSchedule, RateKind, Schedule};

/// A fully specified algorithm: rate engine, schedules, and weights.
#[derive(Clone, Debug)]
pub struct AlgorithmSpec {
    pub name: String,
    pub engine: RateKind,
    pub alpha: Schedule,
    pub beta: BetaSchedule,
    /// Bias-correction weight for the momentum direction.
    pub beta_hat: f64,
    /// Second-moment averaging weight of the rate engine.
    pub bar_beta: f64,
    /// Relaxation weight of the constraint maps.
    pub alpha_relax: f64,
}

pub const PRESET_NAMES: [&str; 12] = [
    "CSD", "CAG", "CAM1", "CAM2", "CAD1", "CAD2", "DSD", "DAG", "DAM1", "DAM2", "DAD1", "DAD2",
];

const CONSTANT_ALPHA: f64 = 1e-2;
const DIMINISHING_BASE: f64 = 1e-1;
const BAR_BETA: f64 = 0.999;
const ALPHA_RELAX: f64 = 0.5;

fn spec(
    name: &str,
    engine: RateKind,
    alpha: Schedule,
    beta: BetaSchedule,
    beta_hat: f64,
) -> AlgorithmSpec {
    AlgorithmSpec {
        name: name.to_string(),
        engine,
        alpha,
        beta,
        beta_hat,
        bar_beta: BAR_BETA,
        alpha_relax: ALPHA_RELAX,
    }
}

/// Resolves a preset by name.
pub fn resolve(name: &str) -> Option<AlgorithmSpec> {
    let ca = || Schedule::constant(CONSTANT_ALPHA);
    // Diminishing step 0.1 / sqrt(n).
    let da = || Schedule::power(DIMINISHING_BASE, 0.5);
    let b0 = || BetaSchedule::constant(0.0);
    Some(match name {
        "CSD" => spec(name, RateKind::Sgd, ca(), b0(), 0.0),
        "CAG" => spec(name, RateKind::Adagrad, ca(), b0(), 0.0),
        "CAM1" => spec(name, RateKind::Amsgrad, ca(), BetaSchedule::constant(0.9), 0.0),
        "CAM2" => spec(name, RateKind::Amsgrad, ca(), BetaSchedule::constant(1e-3), 0.0),
        "CAD1" => spec(name, RateKind::Adam, ca(), BetaSchedule::constant(0.9), 0.9),
        "CAD2" => spec(name, RateKind::Adam, ca(), BetaSchedule::constant(1e-3), 0.9),
        "DSD" => spec(name, RateKind::Sgd, da(), b0(), 0.0),
        "DAG" => spec(name, RateKind::Adagrad, da(), b0(), 0.0),
        "DAM1" => spec(name, RateKind::Amsgrad, da(), BetaSchedule::geometric(0.5), 0.0),
        "DAM2" => spec(name, RateKind::Amsgrad, da(), BetaSchedule::geometric(0.9), 0.0),
        "DAD1" => spec(name, RateKind::Adam, da(), BetaSchedule::geometric(0.5), 0.9),
        "DAD2" => spec(name, RateKind::Adam, da(), BetaSchedule::geometric(0.9), 0.9),
        _ => return None,
    })
}

/// All presets in their canonical order.
pub fn all() -> Vec<AlgorithmSpec> {
    PRESET_NAMES
        .iter()
        .map(|n| resolve(n).expect("every listed preset resolves"))
        .collect()
}

impl AlgorithmSpec {
    /// One-line human-readable parameter summary.
    pub fn describe(&self) -> String {
        let alpha = match self.alpha {
            Schedule::Constant { value } => format!("alpha = {value}"),
            Schedule::Power { base, exponent } => {
                format!("alpha_n = {base}/n^{exponent}")
            }
        };
        let beta = match self.beta {
            BetaSchedule::Constant { value } => format!("beta = {value}"),
            BetaSchedule::Geometric { ratio } => format!("beta_n = {ratio}^n"),
        };
        format!(
            "{:<5} engine = {:<8} {:<22} {:<18} beta_hat = {:<4} bar_beta = {}",
            self.name,
            self.engine.name(),
            alpha,
            beta,
            self.beta_hat,
            self.bar_beta
        )
    }
}
