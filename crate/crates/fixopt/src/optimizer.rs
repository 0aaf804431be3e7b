//! Adaptive stochastic iteration constrained by quasinonexpansive maps.
//!
//! Each step combines an exponentially weighted momentum of stochastic
//! gradients, a per-factor learning-rate denominator produced by a pluggable
//! engine (constant, accumulated, or RMS-style with a running maximum), a
//! geodesic gradient step, and the projected relaxation of the factor's
//! constraint map. Momentum is carried between iterates by parallel
//! transport. A geodesic running average of the iterates and closed-form
//! diagnostic bounds on the averaged residuals round out the module.

use crate::fixmaps::{FixedPointMap, GeodesicBall};
use crate::manifold::{ProductManifold, ProductPoint, ProductTangent};

/// Guard added to the rate-engine accumulator so denominators stay
/// positive: engines start from `ENGINE_EPS^2`, hence `h >= 1e-8` even for
/// an all-zero gradient stream.
pub const ENGINE_EPS: f64 = 1e-8;

/// Step-size sequence `alpha_n`.
///
/// The power kind evaluates `base / n^exponent` for `n >= 1`; the value at
/// `n = 0` repeats the `n = 1` value so the sequence is defined and
/// nonincreasing from the first iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Constant { value: f64 },
    Power { base: f64, exponent: f64 },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        assert!(
            value > 0.0 && value < 1.0,
            "constant step size must lie in (0, 1), got {value}"
        );
        Schedule::Constant { value }
    }

    pub fn power(base: f64, exponent: f64) -> Self {
        assert!(
            base > 0.0 && base.is_finite(),
            "power schedule base must be positive, got {base}"
        );
        assert!(
            (0.0..=1.0).contains(&exponent),
            "power schedule exponent must lie in [0, 1], got {exponent}"
        );
        Schedule::Power { base, exponent }
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            Schedule::Constant { value } => *value,
            Schedule::Power { base, exponent } => base / (n.max(1) as f64).powf(*exponent),
        }
    }
}

/// Momentum-weight sequence `beta_n`, valued in `[0, 1)`.
///
/// The geometric kind evaluates `ratio^n` for `n >= 1`, with the `n = 0`
/// value repeating `n = 1` so the sequence stays below one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaSchedule {
    Constant { value: f64 },
    Geometric { ratio: f64 },
}

impl BetaSchedule {
    pub fn constant(value: f64) -> Self {
        assert!(
            (0.0..1.0).contains(&value),
            "constant momentum weight must lie in [0, 1), got {value}"
        );
        BetaSchedule::Constant { value }
    }

    pub fn geometric(ratio: f64) -> Self {
        assert!(
            ratio > 0.0 && ratio < 1.0,
            "geometric momentum ratio must lie in (0, 1), got {ratio}"
        );
        BetaSchedule::Geometric { ratio }
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            BetaSchedule::Constant { value } => *value,
            BetaSchedule::Geometric { ratio } => {
                let k = n.max(1);
                assert!(k <= i32::MAX as u64, "iteration index too large");
                ratio.powi(k as i32)
            }
        }
    }
}

/// Which learning-rate denominator the engine produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateKind {
    /// `h = 1` always.
    Sgd,
    /// `h = sqrt` of the running sum of squared gradient norms.
    Adagrad,
    /// RMS average with bias correction and a running maximum.
    Adam,
    /// RMS average with a running maximum, no bias correction.
    Amsgrad,
}

impl RateKind {
    pub fn name(&self) -> &'static str {
        match self {
            RateKind::Sgd => "sgd",
            RateKind::Adagrad => "adagrad",
            RateKind::Adam => "adam",
            RateKind::Amsgrad => "amsgrad",
        }
    }
}

/// Per-factor learning-rate state. `update` consumes the squared
/// Riemannian norm of the fresh stochastic gradient and returns the
/// denominator `h_n`; for every kind the returned sequence is
/// nondecreasing in `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateEngine {
    kind: RateKind,
    bar_beta: f64,
    v: f64,
    v_hat: f64,
    v_init: f64,
}

impl RateEngine {
    /// Engine seeded with the default `ENGINE_EPS^2` accumulator.
    pub fn new(kind: RateKind, bar_beta: f64) -> Self {
        Self::with_v_init(kind, bar_beta, ENGINE_EPS * ENGINE_EPS)
    }

    /// Engine with an explicit initial accumulator (tests use zero to
    /// recover the textbook recursions exactly).
    pub fn with_v_init(kind: RateKind, bar_beta: f64, v_init: f64) -> Self {
        assert!(
            (0.0..1.0).contains(&bar_beta),
            "rate smoothing weight must lie in [0, 1), got {bar_beta}"
        );
        assert!(
            v_init >= 0.0 && v_init.is_finite(),
            "initial accumulator must be nonnegative, got {v_init}"
        );
        Self {
            kind,
            bar_beta,
            v: v_init,
            v_hat: v_init,
            v_init,
        }
    }

    pub fn kind(&self) -> RateKind {
        self.kind
    }

    /// Advances the state with `grad_sq = |G_n|^2` at iteration `n` and
    /// returns `h_n`.
    pub fn update(&mut self, grad_sq: f64, n: u64) -> f64 {
        assert!(
            grad_sq >= 0.0 && grad_sq.is_finite(),
            "squared gradient norm must be nonnegative and finite, got {grad_sq}"
        );
        match self.kind {
            RateKind::Sgd => 1.0,
            RateKind::Adagrad => {
                self.v += grad_sq;
                self.v.sqrt()
            }
            RateKind::Adam => {
                assert!(n < i32::MAX as u64, "iteration index too large");
                self.v = self.bar_beta * self.v + (1.0 - self.bar_beta) * grad_sq;
                let corrected = self.v / (1.0 - self.bar_beta.powi(n as i32 + 1));
                self.v_hat = self.v_hat.max(corrected);
                self.v_hat.sqrt()
            }
            RateKind::Amsgrad => {
                self.v = self.bar_beta * self.v + (1.0 - self.bar_beta) * grad_sq;
                self.v_hat = self.v_hat.max(self.v);
                self.v_hat.sqrt()
            }
        }
    }
}

/// One factor's constraint data: the target map `T`, the relaxation
/// weight, and a ball known to contain the fixed-point set of `T`.
/// The containment is the caller's analytic responsibility.
#[derive(Clone, Debug)]
pub struct FactorConstraint {
    map: FixedPointMap,
    alpha_relax: f64,
    region: GeodesicBall,
}

impl FactorConstraint {
    pub fn new(map: FixedPointMap, alpha_relax: f64, region: GeodesicBall) -> Self {
        assert!(
            alpha_relax > 0.0 && alpha_relax < 1.0,
            "relaxation weight must lie in (0, 1), got {alpha_relax}"
        );
        assert_eq!(
            map.disk(),
            region.disk(),
            "constraint map and region must live on the same disk"
        );
        Self {
            map,
            alpha_relax,
            region,
        }
    }

    pub fn map(&self) -> &FixedPointMap {
        &self.map
    }

    pub fn alpha_relax(&self) -> f64 {
        self.alpha_relax
    }

    pub fn region(&self) -> &GeodesicBall {
        &self.region
    }
}

/// What one step produced, reported per factor. `y` is the iterate after
/// the gradient move and before the constraint map; the residual
/// diagnostics are evaluated there because the averaged-residual bounds
/// in [`theorem_bound_rhs`] refer to that point.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub y: ProductPoint,
    /// `d(y^i, x^i)` per factor.
    pub dist_y_x: Vec<f64>,
    /// Denominator `h_n^i` per factor.
    pub h: Vec<f64>,
    /// Riemannian norm of the momentum `m_n^i` per factor.
    pub momentum_norm: Vec<f64>,
    /// `d(T^i(y^i), y^i)` per factor.
    pub residual_y: Vec<f64>,
    /// Boundary clamps encountered during this step.
    pub clamps: u32,
}

/// Iteration state: current iterate, transported momentum, per-factor
/// rate engines, and the geodesic running average of the iterates.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    product: ProductManifold,
    constraints: Vec<FactorConstraint>,
    q_maps: Vec<FixedPointMap>,
    engines: Vec<RateEngine>,
    beta_hat: f64,
    x: ProductPoint,
    tau: ProductTangent,
    avg: ProductPoint,
    n: u64,
    clamp_total: u64,
    h0: Option<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(
        product: ProductManifold,
        constraints: Vec<FactorConstraint>,
        engine: RateEngine,
        beta_hat: f64,
        x0: ProductPoint,
    ) -> Self {
        assert_eq!(
            constraints.len(),
            product.factor_count(),
            "one constraint per factor is required"
        );
        assert!(
            (0.0..1.0).contains(&beta_hat),
            "bias-correction weight must lie in [0, 1), got {beta_hat}"
        );
        product
            .point(x0.parts().to_vec())
            .expect("initial point does not match the product manifold");
        let q_maps = constraints
            .iter()
            .map(|c| {
                FixedPointMap::projected_relax(c.map.clone(), c.alpha_relax, c.region.clone())
            })
            .collect();
        let engines = vec![engine; product.factor_count()];
        let tau = product.zero_tangent(&x0);
        Self {
            product,
            constraints,
            q_maps,
            engines,
            beta_hat,
            avg: x0.clone(),
            x: x0,
            tau,
            n: 0,
            clamp_total: 0,
            h0: None,
        }
    }

    pub fn x(&self) -> &ProductPoint {
        &self.x
    }

    /// Geodesic running average of the iterates, starting at `x_0`.
    pub fn average(&self) -> &ProductPoint {
        &self.avg
    }

    /// Number of completed steps.
    pub fn iteration(&self) -> u64 {
        self.n
    }

    pub fn clamp_total(&self) -> u64 {
        self.clamp_total
    }

    /// Denominators produced at the first step, once it has run.
    pub fn h0(&self) -> Option<&[f64]> {
        self.h0.as_deref()
    }

    pub fn constraints(&self) -> &[FactorConstraint] {
        &self.constraints
    }

    pub fn product(&self) -> &ProductManifold {
        &self.product
    }

    /// `d(x^i, T^i(x^i))` at the current iterate, per factor.
    pub fn residuals(&self) -> Vec<f64> {
        self.constraints
            .iter()
            .zip(self.x.parts())
            .map(|(c, p)| c.map.residual(p))
            .collect()
    }

    /// One iteration: momentum update, bias correction, per-factor rate
    /// denominators, geodesic gradient step, constraint map, momentum
    /// transport, and the running-average move.
    ///
    /// `grad` must be anchored at the current iterate.
    pub fn step(&mut self, grad: &ProductTangent, alpha_n: f64, beta_n: f64) -> StepReport {
        assert!(
            alpha_n > 0.0 && alpha_n < 1.0,
            "step size must lie in (0, 1), got {alpha_n}"
        );
        assert!(
            (0.0..1.0).contains(&beta_n),
            "momentum weight must lie in [0, 1), got {beta_n}"
        );
        assert_eq!(
            grad.parts().len(),
            self.product.factor_count(),
            "gradient factor count mismatch"
        );
        assert!(self.n < i32::MAX as u64, "iteration index too large");

        let factors = self.product.factor_count();
        let bias = 1.0 - self.beta_hat.powi(self.n as i32 + 1);

        let mut y_parts = Vec::with_capacity(factors);
        let mut new_x_parts = Vec::with_capacity(factors);
        let mut momentum_parts = Vec::with_capacity(factors);
        let mut dist_y_x = Vec::with_capacity(factors);
        let mut h_values = Vec::with_capacity(factors);
        let mut momentum_norm = Vec::with_capacity(factors);
        let mut residual_y = Vec::with_capacity(factors);
        let mut clamps = 0u32;

        for i in 0..factors {
            let disk = self.product.factor(i);
            let x_i = self.x.part(i);
            let g_i = grad.part(i);
            assert_eq!(
                g_i.base(),
                x_i,
                "gradient part {i} is not anchored at the current iterate"
            );

            let m_i = crate::manifold::Tangent::combine(beta_n, self.tau.part(i), 1.0 - beta_n, g_i);
            let g_norm = disk.norm(g_i);
            let h_i = self.engines[i].update(g_norm * g_norm, self.n);

            // Direction -m_hat / h scaled by the step size.
            let step_tangent = m_i.scale(-alpha_n / (bias * h_i));
            let moved = disk.exp(x_i, &step_tangent);
            clamps += u32::from(moved.clamped);
            let y_i = moved.point;

            let applied = self.q_maps[i].apply(&y_i);
            clamps += applied.clamps;

            dist_y_x.push(disk.dist(&y_i, x_i));
            h_values.push(h_i);
            momentum_norm.push(disk.norm(&m_i));
            residual_y.push(self.constraints[i].map.residual(&y_i));
            momentum_parts.push(m_i);
            y_parts.push(y_i);
            new_x_parts.push(applied.point);
        }

        let new_x = ProductPoint::from_parts(new_x_parts);
        let moved_momentum = ProductTangent::from_parts(
            momentum_parts
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    self.product
                        .factor(i)
                        .transport(self.x.part(i), new_x.part(i), m)
                })
                .collect(),
        );

        self.x = new_x;
        self.tau = moved_momentum;
        self.n += 1;
        if self.h0.is_none() {
            self.h0 = Some(h_values.clone());
        }
        self.clamp_total += u64::from(clamps);
        self.avg = average_update(&self.product, &self.avg, &self.x, self.n);

        StepReport {
            y: ProductPoint::from_parts(y_parts),
            dist_y_x,
            h: h_values,
            momentum_norm,
            residual_y,
            clamps,
        }
    }
}

/// Incremental geodesic average: moves the previous average the fraction
/// `1/n` of the way toward the `n`-th iterate. With `avg_0 = x_0` this
/// reproduces the arithmetic running mean in geodesic normal coordinates
/// along a fixed geodesic.
pub fn average_update(
    product: &ProductManifold,
    avg: &ProductPoint,
    x: &ProductPoint,
    n: u64,
) -> ProductPoint {
    assert!(n >= 1, "running average needs n >= 1");
    let toward = product.log(avg, x);
    product.exp(avg, &toward.scale(1.0 / n as f64)).point
}

/// Per-factor constants entering the diagnostic bounds.
#[derive(Clone, Copy, Debug)]
pub struct BoundInputs {
    /// Curvature coefficient `zeta(kappa, D)` for the working region.
    pub zeta: f64,
    /// Diameter bound `D` on the region containing the fixed-point set.
    pub diameter: f64,
    /// Bound on the momentum norms (the larger of the initial momentum
    /// norm and the stochastic-gradient norm bound).
    pub grad_bound: f64,
    /// Denominator produced at the first iteration.
    pub h0: f64,
    /// Relaxation weight of the factor's constraint map.
    pub alpha_relax: f64,
    /// Bias-correction weight.
    pub beta_hat: f64,
}

/// Which averaged quantity the bound controls. Constant-step runs pass
/// `alpha_mean = alpha` and `alpha_sq_mean = alpha^2`; diminishing-step
/// runs pass the running means `(1/n) sum alpha_k` and `(1/n) sum alpha_k^2`
/// over `k = 1..n`.
#[derive(Clone, Copy, Debug)]
pub enum BoundKind {
    /// Mean squared residual `d(T(y_k), y_k)^2` at the pre-projection
    /// iterates, for quasinonexpansive targets.
    ResidualAtPreProjection { alpha_mean: f64, alpha_sq_mean: f64 },
    /// Mean squared residual `d(T(x_k), x_k)^2` at the iterates
    /// themselves; valid when the target map is nonexpansive.
    ResidualAtIterate { alpha_mean: f64, alpha_sq_mean: f64 },
    /// Averaged objective gap along the geodesic mean of the iterates.
    /// `h_bound` bounds the denominators, `beta_first` is the first
    /// momentum weight, `alpha_at_n` the step size at iteration `n`, and
    /// `beta_mean` the running mean `(1/n) sum beta_k`.
    ObjectiveGap {
        alpha_at_n: f64,
        alpha_mean: f64,
        beta_mean: f64,
        beta_first: f64,
        h_bound: f64,
    },
}

/// Closed-form right-hand side of the averaged diagnostic bound after `n`
/// steps for one factor. The objective-gap kind returns this factor's
/// additive contribution; summing over factors gives the full bound.
pub fn theorem_bound_rhs(inputs: &BoundInputs, n: u64, kind: &BoundKind) -> f64 {
    assert!(n >= 1, "bounds are stated for n >= 1");
    assert!(inputs.zeta >= 1.0, "zeta is always at least one");
    assert!(inputs.diameter > 0.0 && inputs.grad_bound >= 0.0 && inputs.h0 > 0.0);
    assert!(inputs.alpha_relax > 0.0 && inputs.alpha_relax < 1.0);
    assert!((0.0..1.0).contains(&inputs.beta_hat));

    let nf = n as f64;
    let alpha_hat = inputs.alpha_relax * (1.0 - inputs.alpha_relax);
    let h0_hat = (1.0 - inputs.beta_hat) * inputs.h0;
    let b = inputs.grad_bound;
    let d = inputs.diameter;

    match *kind {
        BoundKind::ResidualAtPreProjection {
            alpha_mean,
            alpha_sq_mean,
        } => {
            (d / nf + 2.0 * b * d / h0_hat * alpha_mean
                + inputs.zeta * b * b / (h0_hat * h0_hat) * alpha_sq_mean)
                / alpha_hat
        }
        BoundKind::ResidualAtIterate {
            alpha_mean,
            alpha_sq_mean,
        } => {
            let tail = 1.0 - inputs.beta_hat;
            2.0 * d / (alpha_hat * nf)
                + 4.0 * b * d / (alpha_hat * h0_hat) * alpha_mean
                + 2.0 * b * b / (h0_hat * h0_hat)
                    * (inputs.zeta / alpha_hat + 4.0 / (tail * tail))
                    * alpha_sq_mean
        }
        BoundKind::ObjectiveGap {
            alpha_at_n,
            alpha_mean,
            beta_mean,
            beta_first,
            h_bound,
        } => {
            assert!((0.0..1.0).contains(&beta_first));
            assert!(h_bound > 0.0 && alpha_at_n > 0.0);
            h_bound * d * d / (2.0 * (1.0 - beta_first)) / (nf * alpha_at_n)
                + inputs.zeta * b * b / inputs.h0
                    / (2.0 * (1.0 - inputs.beta_hat) * (1.0 - beta_first))
                    * alpha_mean
                + b * d / (1.0 - beta_first) * beta_mean
        }
    }
}
