//! Convergence-bound diagnostics: empirical averaged residuals compared
//! against the proven right-hand sides with conservatively estimated
//! constants. A violation means an implementation bug, not bad luck.

use std::fmt::Write as _;

use crate::config::ExperimentPlan;
use crate::runner::RunRecord;
use crate::CliError;
use fixopt::{theorem_bound_rhs, working_region, zeta, BoundInputs, BoundKind, PoincareDisk};

/// Safety factor on the observed gradient-norm maximum.
const GRAD_BOUND_MARGIN: f64 = 1.5;
/// Relative slack for the comparison itself, covering float noise only.
const COMPARISON_SLACK: f64 = 1e-9;

/// Outcome of checking one algorithm against one bound family.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub algorithm: String,
    /// Which residual the bound controls.
    pub kind: &'static str,
    /// Largest empirical/bound ratio over all n, and where it occurred.
    pub worst_ratio: f64,
    pub worst_n: u64,
    pub violated: bool,
}

/// Evaluates both residual bounds for every algorithm and renders a text
/// report. Requires runs recorded with diagnostics enabled.
pub fn bound_report(
    plan: &ExperimentPlan,
    records: &[RunRecord],
) -> Result<(String, Vec<BoundCheck>), CliError> {
    if records.iter().any(|r| r.diagnostics.is_none()) {
        return Err(CliError::Config(
            "bound diagnostics need runs recorded with bound_diagnostics enabled".into(),
        ));
    }

    // The constraint maps keep every iterate inside the shared working
    // region, whose diameter bounds all distances entering the proofs.
    // The derivations use the constant both as a distance bound and as a
    // squared-distance bound, so the larger of the two is the sound choice.
    let region = working_region(PoincareDisk::new(plan.dim));
    let diam = 2.0 * region.radius();
    let diameter = diam.max(diam * diam);
    let zeta_value = zeta(fixopt::KAPPA, diam);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "bound diagnostics: region diameter {diam:.3}, zeta {zeta_value:.3}, \
         gradient margin {GRAD_BOUND_MARGIN}"
    );
    let mut checks = Vec::new();
    for (a, spec) in plan.algorithms.iter().enumerate() {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm_index == a).collect();
        assert!(!runs.is_empty(), "every algorithm has runs");

        // Conservative constants: the largest observed gradient norm with
        // margin, the smallest observed first denominator.
        let factors = plan.factor_count;
        let mut grad_bound = vec![0.0f64; factors];
        let mut h0 = vec![f64::INFINITY; factors];
        for r in &runs {
            let d = r.diagnostics.as_ref().unwrap();
            for i in 0..factors {
                grad_bound[i] = grad_bound[i].max(GRAD_BOUND_MARGIN * d.grad_norm_max[i]);
                h0[i] = h0[i].min(d.h0[i]);
            }
        }
        let inputs: Vec<BoundInputs> = (0..factors)
            .map(|i| BoundInputs {
                zeta: zeta_value,
                diameter,
                grad_bound: grad_bound[i],
                h0: h0[i],
                alpha_relax: spec.alpha_relax,
                beta_hat: spec.beta_hat,
            })
            .collect();

        // Empirical running averages over steps k = 1..N, averaged over
        // samplings: residuals at the pre-projection points y_k and at
        // the iterates x_k.
        let n_steps = plan.iterations as usize;
        let mean_y: Vec<f64> = (0..n_steps)
            .map(|k| {
                runs.iter()
                    .map(|r| r.diagnostics.as_ref().unwrap().y_residual_sq[k])
                    .sum::<f64>()
                    / runs.len() as f64
            })
            .collect();
        let mean_x: Vec<f64> = (0..n_steps)
            .map(|k| {
                runs.iter()
                    .map(|r| {
                        let d = r.rows[k + 1].d_contrib;
                        d * d
                    })
                    .sum::<f64>()
                    / runs.len() as f64
            })
            .collect();

        for (kind_name, series) in [("pre-projection", &mean_y), ("iterate", &mean_x)] {
            let check = check_series(spec, &inputs, series, kind_name);
            let _ = writeln!(
                text,
                "{:<5} {:<15} worst empirical/bound ratio {:.3e} at n = {}{}",
                spec.name,
                kind_name,
                check.worst_ratio,
                check.worst_n,
                if check.violated { "  VIOLATED" } else { "" }
            );
            checks.push(check);
        }
    }
    Ok((text, checks))
}

fn check_series(
    spec: &crate::presets::AlgorithmSpec,
    inputs: &[BoundInputs],
    series: &[f64],
    kind_name: &'static str,
) -> BoundCheck {
    let mut running = 0.0f64;
    let mut alpha_sum = 0.0f64;
    let mut alpha_sq_sum = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut worst_n = 1u64;
    let mut violated = false;
    for (k, r) in series.iter().enumerate() {
        let n = (k + 1) as u64;
        // The step size the run actually used at this step.
        let alpha = spec.alpha.value(k as u64);
        alpha_sum += alpha;
        alpha_sq_sum += alpha * alpha;
        running += r;
        let empirical = running / n as f64;
        let (alpha_mean, alpha_sq_mean) = (alpha_sum / n as f64, alpha_sq_sum / n as f64);
        let kind = match kind_name {
            "pre-projection" => BoundKind::ResidualAtPreProjection {
                alpha_mean,
                alpha_sq_mean,
            },
            _ => BoundKind::ResidualAtIterate {
                alpha_mean,
                alpha_sq_mean,
            },
        };
        let rhs: f64 = inputs
            .iter()
            .map(|inp| theorem_bound_rhs(inp, n, &kind))
            .sum();
        let ratio = empirical / rhs;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_n = n;
        }
        if empirical > rhs * (1.0 + COMPARISON_SLACK) {
            violated = true;
        }
    }
    BoundCheck {
        algorithm: spec.name.clone(),
        kind: kind_name,
        worst_ratio,
        worst_n,
        violated,
    }
}
