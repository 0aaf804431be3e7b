//! Deterministic fixtures for the criterion benches. Setup lives here so
//! the bench files time only the kernels.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fixopt::{
    BallSystem, CouplingObjective, OptimizerState, PoincareDisk, Point, ProductTangent,
    RateEngine, RateKind, Tangent,
};

fn rand_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            return v.iter().map(|c| c * radius).collect();
        }
    }
}

/// Pregenerated point pairs and anchored tangents on one disk.
pub struct GeometryInputs {
    pub disk: PoincareDisk,
    pub pairs: Vec<(Point, Point)>,
    /// Tangent `k` is anchored at the first point of pair `k`.
    pub tangents: Vec<Tangent>,
}

impl GeometryInputs {
    pub fn generate(dim: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let disk = PoincareDisk::new(dim);
        let mut pairs = Vec::with_capacity(count);
        let mut tangents = Vec::with_capacity(count);
        for _ in 0..count {
            let x = disk.point(rand_in_ball(&mut rng, dim, 0.9)).unwrap();
            let y = disk.point(rand_in_ball(&mut rng, dim, 0.9)).unwrap();
            tangents.push(disk.tangent(&x, rand_in_ball(&mut rng, dim, 1.0)).unwrap());
            pairs.push((x, y));
        }
        Self {
            disk,
            pairs,
            tangents,
        }
    }
}

/// A warmed-up optimizer over a five-factor consistent system, plus one
/// gradient ready to apply at its current iterate.
pub struct StepScenario {
    pub state: OptimizerState,
    pub objective: CouplingObjective,
    pub grad: ProductTangent,
    pub rng: ChaCha8Rng,
}

pub fn step_scenario(kind: RateKind) -> StepScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sys = BallSystem::sample_consistent(&mut rng, 5, 2, 5);
    let objective = CouplingObjective::new(sys.product());
    let x0 = sys.sample_initial(&mut rng);
    let mut state = OptimizerState::new(
        sys.product().clone(),
        sys.constraint_maps(0.5),
        RateEngine::new(kind, 0.999),
        0.9,
        x0,
    );
    // A few steps so momentum and the rate engines carry real state.
    for _ in 0..10 {
        let xi = rng.random_range(0..5);
        let g = objective.stochastic_gradient(state.x(), xi);
        state.step(&g, 0.01, 0.9);
    }
    let xi = rng.random_range(0..5);
    let grad = objective.stochastic_gradient(state.x(), xi);
    StepScenario {
        state,
        objective,
        grad,
        rng,
    }
}
