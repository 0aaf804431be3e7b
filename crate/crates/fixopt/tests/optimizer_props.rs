//! Invariants of the optimization step on sampled benchmark problems.

mod common;

use fixopt::{
    average_update, residual_norm, BallSystem, BetaSchedule, CouplingObjective, OptimizerState,
    PoincareDisk, ProductManifold, RateEngine, RateKind, Schedule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP_IDENTITY_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-12;
const REDUCTION_MIN: f64 = 1e-12;
const AVERAGE_TOL: f64 = 1e-12;

struct Harness {
    state: OptimizerState,
    objective: CouplingObjective,
    rng: ChaCha8Rng,
}

/// A consistent five-factor instance driven by single-sample gradients.
fn harness(kind: RateKind, beta_hat: f64, seed: u64) -> Harness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = BallSystem::sample_consistent(&mut rng, 5, 2, 5);
    let constraints = sys.constraint_maps(0.5);
    let x0 = sys.sample_initial(&mut rng);
    let objective = CouplingObjective::new(sys.product());
    let state = OptimizerState::new(
        sys.product().clone(),
        constraints,
        RateEngine::new(kind, 0.999),
        beta_hat,
        x0,
    );
    Harness {
        state,
        objective,
        rng,
    }
}

impl Harness {
    fn step(&mut self, alpha: f64, beta: f64) -> fixopt::StepReport {
        let xi = self
            .rng
            .random_range(0..self.state.product().factor_count());
        let grad = self.objective.stochastic_gradient(self.state.x(), xi);
        self.state.step(&grad, alpha, beta)
    }
}

#[test]
fn step_distance_matches_the_bias_corrected_formula() {
    // d(y_n, x_n) = alpha_n |m_n| / ((1 - beta_hat^(n+1)) h_n) per factor,
    // since exp moves exactly the norm of its argument.
    for (kind, beta_hat) in [
        (RateKind::Sgd, 0.0),
        (RateKind::Adagrad, 0.0),
        (RateKind::Adam, 0.9),
        (RateKind::Amsgrad, 0.0),
    ] {
        let mut h = harness(kind, beta_hat, 301);
        let alpha = Schedule::power(0.1, 0.5);
        let beta = BetaSchedule::geometric(0.9);
        for n in 0..50u64 {
            let a = alpha.value(n);
            let report = h.step(a, beta.value(n));
            assert_eq!(report.clamps, 0, "clamping would invalidate the identity");
            let bias = 1.0 - beta_hat.powi(n as i32 + 1);
            for i in 0..5 {
                let predicted = a * report.momentum_norm[i] / (bias * report.h[i]);
                assert!(
                    (report.dist_y_x[i] - predicted).abs() <= STEP_IDENTITY_TOL,
                    "factor {i}, step {n}: moved {} predicted {predicted}",
                    report.dist_y_x[i]
                );
            }
        }
    }
}

#[test]
fn accumulating_denominators_never_decrease() {
    for kind in [RateKind::Adagrad, RateKind::Amsgrad] {
        let mut h = harness(kind, 0.0, 302);
        let mut last = [0.0f64; 5];
        for n in 0..200u64 {
            let report = h.step(0.01, if n.is_multiple_of(2) { 0.9 } else { 0.0 });
            for (now, floor) in report.h.iter().zip(last.iter_mut()) {
                assert!(
                    now >= floor,
                    "{:?} denominator decreased at step {n}",
                    kind
                );
                *floor = *now;
            }
        }
    }
}

#[test]
fn iterates_stay_inside_the_working_regions() {
    let mut h = harness(RateKind::Adam, 0.9, 303);
    for n in 0..200u64 {
        h.step(0.01, if n < 100 { 0.9 } else { 0.001 });
        for (c, part) in h.state.constraints().iter().zip(h.state.x().parts()) {
            let d = c.region().disk().dist(c.region().center(), part);
            assert!(
                d <= c.region().radius() + FEASIBILITY_TOL,
                "iterate escaped the working region at step {n}"
            );
        }
    }
}

#[test]
fn momentum_norms_are_bounded_by_the_gradient_history() {
    // |m_n| <= max_k |G_k| because transport is isometric and the update
    // is a convex combination.
    let mut h = harness(RateKind::Amsgrad, 0.0, 304);
    let mut grad_max = [0.0f64; 5];
    for _ in 0..100 {
        let xi = h.rng.random_range(0..5);
        let grad = h.objective.stochastic_gradient(h.state.x(), xi);
        for (i, cap) in grad_max.iter_mut().enumerate() {
            let disk = h.state.product().factor(i);
            *cap = cap.max(disk.norm(grad.part(i)));
        }
        let report = h.state.step(&grad, 0.01, 0.9);
        for (norm, cap) in report.momentum_norm.iter().zip(&grad_max) {
            assert!(norm <= &(cap + 1e-9));
        }
    }
}

#[test]
fn plain_stochastic_steps_shrink_the_residual() {
    // The no-momentum configuration must make visible progress toward the
    // fixed-point sets and not lose it again.
    let mut h = harness(RateKind::Sgd, 0.0, 305);
    let initial = residual_norm(h.state.constraints(), h.state.x());
    for _ in 0..100 {
        h.step(0.01, 0.0);
    }
    let after = residual_norm(h.state.constraints(), h.state.x());
    assert!(
        after <= initial - REDUCTION_MIN,
        "residual failed to shrink: {initial} -> {after}"
    );
}

#[test]
fn running_average_is_the_arithmetic_mean_in_radial_coordinates() {
    // Iterates on a common radius: the geodesic running average must agree
    // with the running arithmetic mean of the artanh coordinates.
    let product = ProductManifold::uniform(1, 2);
    let disk = *product.factor(0);
    let mut rng = ChaCha8Rng::seed_from_u64(306);
    let coords: Vec<f64> = (0..30).map(|_| rng.random_range(-1.5..1.5)).collect();
    let to_point = |a: f64| {
        product
            .point(vec![disk.point(vec![a.tanh(), 0.0]).unwrap()])
            .unwrap()
    };
    let mut avg = to_point(coords[0]);
    let mut mean = coords[0];
    // avg_0 = x_0 and x_1 = x_0 keeps the indexing aligned with a run
    // whose first step happens to stay put.
    for (k, &a) in coords.iter().enumerate().skip(1) {
        avg = average_update(&product, &avg, &to_point(a), k as u64);
        mean += (a - mean) / k as f64;
    }
    let got = avg.part(0).coords()[0];
    assert!(
        (got - mean.tanh()).abs() <= AVERAGE_TOL,
        "average {got} vs arithmetic mean image {}",
        mean.tanh()
    );
}

#[test]
fn bias_correction_shortens_early_steps_only() {
    // With beta_hat > 0 the corrected denominator is largest at n = 0, so
    // two otherwise identical runs differ most at the start.
    let mut with = harness(RateKind::Sgd, 0.9, 307);
    let mut without = harness(RateKind::Sgd, 0.0, 307);
    let r_with = with.step(0.01, 0.0);
    let r_without = without.step(0.01, 0.0);
    // Only the two factors the sampled term touches receive a gradient.
    let mut checked = 0;
    for i in 0..5 {
        if r_without.dist_y_x[i] == 0.0 {
            assert_eq!(r_with.dist_y_x[i], 0.0);
            continue;
        }
        // First-step correction divides by 1 - 0.9 = 0.1, a 10x move.
        let ratio = r_with.dist_y_x[i] / r_without.dist_y_x[i];
        assert!((ratio - 10.0).abs() <= 1e-6, "ratio {ratio}");
        checked += 1;
    }
    assert_eq!(checked, 2);
}

#[test]
fn identity_constraints_leave_fixed_points_alone() {
    // If the iterate already satisfies every constraint and the gradient
    // vanishes, the step keeps it exactly in place.
    let product = ProductManifold::uniform(2, 2);
    let disk = *product.factor(0);
    let region = fixopt::working_region(disk);
    let constraints = (0..2)
        .map(|_| {
            fixopt::FactorConstraint::new(
                fixopt::FixedPointMap::identity(disk),
                0.5,
                region.clone(),
            )
        })
        .collect();
    let x0 = product
        .point(vec![
            disk.point(vec![0.3, 0.1]).unwrap(),
            disk.point(vec![-0.2, 0.4]).unwrap(),
        ])
        .unwrap();
    let mut state = OptimizerState::new(
        product.clone(),
        constraints,
        RateEngine::new(RateKind::Sgd, 0.999),
        0.0,
        x0.clone(),
    );
    let zero = product.zero_tangent(&x0);
    for _ in 0..10 {
        let report = state.step(&zero, 0.5, 0.5);
        assert_eq!(report.clamps, 0);
    }
    for (part, want) in state.x().parts().iter().zip(x0.parts()) {
        assert_eq!(part.coords(), want.coords());
    }
}

#[test]
fn diagnostic_bounds_shrink_with_n_and_stay_positive() {
    let inputs = fixopt::BoundInputs {
        zeta: fixopt::zeta(fixopt::KAPPA, 2.0),
        diameter: 2.0,
        grad_bound: 1.5,
        h0: 0.4,
        alpha_relax: 0.5,
        beta_hat: 0.9,
    };
    let kind = |n: u64| fixopt::BoundKind::ResidualAtPreProjection {
        // Diminishing steps 0.1 / sqrt(k) averaged over k = 1..n.
        alpha_mean: (1..=n).map(|k| 0.1 / (k as f64).sqrt()).sum::<f64>() / n as f64,
        alpha_sq_mean: (1..=n).map(|k| 0.01 / k as f64).sum::<f64>() / n as f64,
    };
    let mut last = f64::INFINITY;
    for n in [1u64, 10, 100, 1000, 10_000] {
        let rhs = fixopt::theorem_bound_rhs(&inputs, n, &kind(n));
        assert!(rhs > 0.0 && rhs < last, "bound not decreasing at n = {n}");
        last = rhs;
    }
}

#[test]
fn clamped_steps_are_counted() {
    // A huge gradient from near the boundary forces the safeguard.
    let product = ProductManifold::uniform(1, 2);
    let disk = *product.factor(0);
    let huge = GeodesicBallFixture::huge_region(disk);
    let constraints = vec![fixopt::FactorConstraint::new(
        fixopt::FixedPointMap::identity(disk),
        0.5,
        huge,
    )];
    let x0 = product.point(vec![disk.point(vec![0.0, 0.0]).unwrap()]).unwrap();
    let mut state = OptimizerState::new(
        product.clone(),
        constraints,
        RateEngine::new(RateKind::Sgd, 0.999),
        0.0,
        x0.clone(),
    );
    let spike = product
        .log(
            &x0,
            &product
                .point(vec![disk.point(vec![0.9, 0.0]).unwrap()])
                .unwrap(),
        )
        .scale(1e6);
    let report = state.step(&spike, 0.99, 0.0);
    assert!(report.clamps > 0);
    assert_eq!(state.clamp_total(), u64::from(report.clamps));
    // The safeguarded iterate is still a valid point of the disk.
    let norm = common::euclid_dot(
        state.x().part(0).coords(),
        state.x().part(0).coords(),
    )
    .sqrt();
    assert!(norm < 1.0);
}

struct GeodesicBallFixture;

impl GeodesicBallFixture {
    fn huge_region(disk: PoincareDisk) -> fixopt::GeodesicBall {
        fixopt::GeodesicBall::new(disk, disk.origin(), 50.0).unwrap()
    }
}
