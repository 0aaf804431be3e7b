//! Shared numerical oracles for the integration tests.
//!
//! Everything here works directly on the conformal metric
//! `g = lambda(x)^2 I` with `lambda(x) = 1/(1 - |x|^2)` and never calls
//! the closed-form geometry under test, so agreement between the two is
//! evidence rather than tautology.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;

/// Joint state of a geodesic and a vector field carried along it.
#[derive(Clone, Debug)]
pub struct GeodesicState {
    /// Position in disk coordinates.
    pub pos: Vec<f64>,
    /// Coordinate velocity.
    pub vel: Vec<f64>,
    /// Vector transported parallel along the curve.
    pub par: Vec<f64>,
}

/// Result of integrating the geodesic system over the unit interval.
pub struct GeodesicIntegration {
    pub end: GeodesicState,
    /// Riemannian arc length of the integrated curve.
    pub arc_length: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conformal(pos: &[f64]) -> f64 {
    1.0 / (1.0 - dot(pos, pos))
}

/// Right-hand side of the geodesic and parallel-transport equations for a
/// conformal metric `exp(2 phi) I` with `phi = -ln(1 - |x|^2)`:
/// `grad phi = 2 x / (1 - |x|^2)`,
/// `x'' = -2 <grad phi, x'> x' + |x'|^2 grad phi`,
/// `w'  = -(<grad phi, x'> w + <grad phi, w> x' - <x', w> grad phi)`.
fn derivs(s: &GeodesicState) -> GeodesicState {
    let r2 = dot(&s.pos, &s.pos);
    let scale = 2.0 / (1.0 - r2);
    let grad_phi: Vec<f64> = s.pos.iter().map(|c| c * scale).collect();
    let gv = dot(&grad_phi, &s.vel);
    let gw = dot(&grad_phi, &s.par);
    let vv = dot(&s.vel, &s.vel);
    let vw = dot(&s.vel, &s.par);
    let dvel: Vec<f64> = s
        .vel
        .iter()
        .zip(&grad_phi)
        .map(|(v, g)| -2.0 * gv * v + vv * g)
        .collect();
    let dpar: Vec<f64> = (0..s.pos.len())
        .map(|k| -(gv * s.par[k] + gw * s.vel[k] - vw * grad_phi[k]))
        .collect();
    GeodesicState {
        pos: s.vel.clone(),
        vel: dvel,
        par: dpar,
    }
}

fn axpy(state: &GeodesicState, h: f64, d: &GeodesicState) -> GeodesicState {
    let comb = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + h * y).collect()
    };
    GeodesicState {
        pos: comb(&state.pos, &d.pos),
        vel: comb(&state.vel, &d.vel),
        par: comb(&state.par, &d.par),
    }
}

/// Classical RK4 over `t` in `[0, 1]` with composite Simpson for the arc
/// length. `steps` must be even; 2000 leaves integration error orders of
/// magnitude below the tolerances used by the callers.
pub fn integrate_geodesic(
    x0: &[f64],
    v0: &[f64],
    w0: &[f64],
    steps: usize,
) -> GeodesicIntegration {
    assert!(
        steps >= 2 && steps.is_multiple_of(2),
        "Simpson needs an even step count"
    );
    let h = 1.0 / steps as f64;
    let mut state = GeodesicState {
        pos: x0.to_vec(),
        vel: v0.to_vec(),
        par: w0.to_vec(),
    };
    let speed = |s: &GeodesicState| conformal(&s.pos) * dot(&s.vel, &s.vel).sqrt();
    let mut integrand = Vec::with_capacity(steps + 1);
    integrand.push(speed(&state));
    for _ in 0..steps {
        let k1 = derivs(&state);
        let k2 = derivs(&axpy(&state, h / 2.0, &k1));
        let k3 = derivs(&axpy(&state, h / 2.0, &k2));
        let k4 = derivs(&axpy(&state, h, &k3));
        let comb = |a: &[f64], b: &[f64], c: &[f64], d: &[f64], base: &[f64]| -> Vec<f64> {
            (0..base.len())
                .map(|i| base[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        state = GeodesicState {
            pos: comb(&k1.pos, &k2.pos, &k3.pos, &k4.pos, &state.pos),
            vel: comb(&k1.vel, &k2.vel, &k3.vel, &k4.vel, &state.vel),
            par: comb(&k1.par, &k2.par, &k3.par, &k4.par, &state.par),
        };
        integrand.push(speed(&state));
    }
    GeodesicIntegration {
        end: state,
        arc_length: simpson_sum(&integrand, h),
    }
}

/// Composite Simpson over equally spaced samples (even interval count).
pub fn simpson_sum(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n.is_multiple_of(2));
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Simpson quadrature of `f` over `[a, b]`.
pub fn simpson_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let values: Vec<f64> = (0..=intervals).map(|i| f(a + i as f64 * h)).collect();
    simpson_sum(&values, h)
}

/// Uniform draw from the Euclidean ball of the given radius.
pub fn rand_in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    let dir = rand_direction(rng, dim);
    let u: f64 = rng.random_range(0.0..1.0);
    let r = radius * u.powf(1.0 / dim as f64);
    dir.into_iter().map(|c| c * r).collect()
}

/// Uniform direction on the unit sphere.
pub fn rand_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

pub fn euclid_dot(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b)
}

pub fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
