//! Benchmark problem generators and performance measures.
//!
//! A problem instance couples two ingredients on a product of disks:
//! per-factor families of geodesic balls whose projections build the
//! constraint maps, and a smooth objective that couples neighbouring
//! factors through `exp(<x_i, x_j>) + <x_i, x_j>`. Ball families come in a
//! consistent flavour (all balls of a factor share a common interior point,
//! kept as a witness) and an inconsistent flavour (two disjoint balls with
//! a certified gap, so the constraint target is the fixed-point set of the
//! composed projection rather than an intersection).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::fixmaps::{FixedPointMap, GeodesicBall};
use crate::manifold::{PoincareDisk, Point, ProductManifold, ProductPoint, ProductTangent};
use crate::optimizer::FactorConstraint;

/// Euclidean radius of the witness-sampling ball.
const WITNESS_RADIUS: f64 = 0.5;
/// Largest geodesic distance from the witness to a ball center.
const CENTER_SPREAD: f64 = 0.4;
/// Ball radii exceed the center distance by at least this slack.
const RADIUS_SLACK_MIN: f64 = 0.05;
/// ... and at most this slack.
const RADIUS_SLACK_MAX: f64 = 0.5;
/// Center distance range for the inconsistent pair.
const DISJOINT_DIST_MIN: f64 = 1.0;
const DISJOINT_DIST_MAX: f64 = 1.5;
/// Inconsistent radii start here and leave a gap of at least 0.1.
const DISJOINT_RADIUS_MIN: f64 = 0.1;
const DISJOINT_GAP: f64 = 0.1;
/// Euclidean radius of the initial-iterate ball.
const INITIAL_RADIUS: f64 = 0.8;

/// Proof that a factor's ball family is feasible or certifiably not.
#[derive(Clone, Debug)]
pub enum FeasibilityCertificate {
    /// Every ball of the factor contains this point with at least
    /// `min_slack` of room, so the intersection is nonempty.
    CommonPoint { point: Point, min_slack: f64 },
    /// The two balls are disjoint: the center distance exceeds the radius
    /// sum by `gap`, so the intersection is empty.
    DisjointPair { gap: f64 },
}

/// One factor's ball family plus its feasibility evidence.
#[derive(Clone, Debug)]
pub struct FactorBalls {
    balls: Vec<GeodesicBall>,
    certificate: FeasibilityCertificate,
}

impl FactorBalls {
    pub fn balls(&self) -> &[GeodesicBall] {
        &self.balls
    }

    pub fn certificate(&self) -> &FeasibilityCertificate {
        &self.certificate
    }
}

/// A sampled constraint system over a product of identical disk factors.
#[derive(Clone, Debug)]
pub struct BallSystem {
    product: ProductManifold,
    factors: Vec<FactorBalls>,
}

impl BallSystem {
    /// Samples a consistent system: per factor, a witness point drawn in
    /// the Euclidean ball of radius 0.5, centers within geodesic distance
    /// 0.4 of the witness, and radii exceeding those distances by a slack
    /// in `[0.05, 0.5]`.
    pub fn sample_consistent(
        rng: &mut impl Rng,
        factor_count: usize,
        dim: usize,
        balls_per_factor: usize,
    ) -> Self {
        assert!(factor_count > 0 && balls_per_factor > 0);
        let product = ProductManifold::uniform(factor_count, dim);
        let disk = *product.factor(0);
        let factors = (0..factor_count)
            .map(|_| {
                let witness = disk
                    .point(sample_in_euclidean_ball(rng, dim, WITNESS_RADIUS))
                    .expect("witness sample stays inside the disk");
                let mut balls = Vec::with_capacity(balls_per_factor);
                let mut min_slack = f64::INFINITY;
                for _ in 0..balls_per_factor {
                    let dir = unit_tangent(&disk, rng, &witness);
                    let t = rng.random_range(0.0..CENTER_SPREAD);
                    let center = disk.exp(&witness, &dir.scale(t)).point;
                    let d = disk.dist(&center, &witness);
                    let radius =
                        rng.random_range(d + RADIUS_SLACK_MIN..d + RADIUS_SLACK_MAX);
                    min_slack = min_slack.min(radius - d);
                    balls.push(GeodesicBall::new(disk, center, radius).unwrap());
                }
                FactorBalls {
                    balls,
                    certificate: FeasibilityCertificate::CommonPoint {
                        point: witness,
                        min_slack,
                    },
                }
            })
            .collect();
        Self { product, factors }
    }

    /// Samples an inconsistent system: per factor, two balls whose center
    /// distance lies in `[1.0, 1.5]` while the radii leave a certified gap
    /// of at least 0.1 between the balls.
    pub fn sample_inconsistent(rng: &mut impl Rng, factor_count: usize, dim: usize) -> Self {
        assert!(factor_count > 0);
        let product = ProductManifold::uniform(factor_count, dim);
        let disk = *product.factor(0);
        let factors = (0..factor_count)
            .map(|_| {
                let c1 = disk
                    .point(sample_in_euclidean_ball(rng, dim, WITNESS_RADIUS))
                    .expect("center sample stays inside the disk");
                let dir = unit_tangent(&disk, rng, &c1);
                let t = rng.random_range(DISJOINT_DIST_MIN..DISJOINT_DIST_MAX);
                let c2 = disk.exp(&c1, &dir.scale(t)).point;
                let d = disk.dist(&c1, &c2);
                let radius_cap = (d - DISJOINT_GAP) / 2.0;
                let r1 = rng.random_range(DISJOINT_RADIUS_MIN..radius_cap);
                let r2 = rng.random_range(DISJOINT_RADIUS_MIN..radius_cap);
                let gap = d - r1 - r2;
                FactorBalls {
                    balls: vec![
                        GeodesicBall::new(disk, c1, r1).unwrap(),
                        GeodesicBall::new(disk, c2, r2).unwrap(),
                    ],
                    certificate: FeasibilityCertificate::DisjointPair { gap },
                }
            })
            .collect();
        Self { product, factors }
    }

    pub fn product(&self) -> &ProductManifold {
        &self.product
    }

    pub fn factor_balls(&self) -> &[FactorBalls] {
        &self.factors
    }

    /// Builds the per-factor constraints: the target map is the
    /// composition of the ball projections (last ball applied first), the
    /// working region is a large origin ball that contains every
    /// fixed-point set arising from these samples by a wide margin.
    pub fn constraint_maps(&self, alpha_relax: f64) -> Vec<FactorConstraint> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let disk = *self.product.factor(i);
                let maps = f
                    .balls
                    .iter()
                    .map(|b| FixedPointMap::ball_projection(b.clone()))
                    .collect();
                FactorConstraint::new(
                    FixedPointMap::compose(maps),
                    alpha_relax,
                    working_region(disk),
                )
            })
            .collect()
    }

    /// Initial iterate: per factor, uniform in the Euclidean ball of
    /// radius 0.8.
    pub fn sample_initial(&self, rng: &mut impl Rng) -> ProductPoint {
        let parts = self
            .product
            .factors()
            .iter()
            .map(|disk| {
                disk.point(sample_in_euclidean_ball(rng, disk.dim(), INITIAL_RADIUS))
                    .expect("initial sample stays inside the disk")
            })
            .collect();
        self.product.point(parts).unwrap()
    }

    /// Stable fingerprint of the sampled geometry, for regression locks.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.product.factor_count() as u64);
        h.write_u64(self.product.factor(0).dim() as u64);
        for f in &self.factors {
            h.write_u64(f.balls.len() as u64);
            for b in &f.balls {
                for c in b.center().coords() {
                    h.write_f64(*c);
                }
                h.write_f64(b.radius());
            }
            match &f.certificate {
                FeasibilityCertificate::CommonPoint { point, min_slack } => {
                    h.write_u64(1);
                    for c in point.coords() {
                        h.write_f64(*c);
                    }
                    h.write_f64(*min_slack);
                }
                FeasibilityCertificate::DisjointPair { gap } => {
                    h.write_u64(2);
                    h.write_f64(*gap);
                }
            }
        }
        h.finish()
    }
}

/// The shared working region: an origin ball big enough to contain every
/// sampled constraint's fixed-point set while staying well clear of the
/// ideal boundary.
pub fn working_region(disk: PoincareDisk) -> GeodesicBall {
    let r: f64 = 1.0 - 1e-5;
    let radius = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    GeodesicBall::new(disk, disk.origin(), radius).unwrap()
}

/// The coupled objective `f(x) = (1/I) sum_i [exp(<x_i, x_j>) + <x_i, x_j>]`
/// with `j` the cyclic successor of `i`. Needs at least two factors of
/// equal dimension so every term couples two distinct factors.
#[derive(Clone, Debug)]
pub struct CouplingObjective {
    product: ProductManifold,
}

impl CouplingObjective {
    pub fn new(product: &ProductManifold) -> Self {
        assert!(
            product.factor_count() >= 2,
            "the coupling objective needs at least two factors"
        );
        let dim = product.factor(0).dim();
        assert!(
            product.factors().iter().all(|d| d.dim() == dim),
            "the coupling objective needs factors of equal dimension"
        );
        Self {
            product: product.clone(),
        }
    }

    /// Cyclic successor index.
    pub fn partner(&self, i: usize) -> usize {
        (i + 1) % self.product.factor_count()
    }

    /// Full objective value.
    pub fn value(&self, x: &ProductPoint) -> f64 {
        let count = self.product.factor_count();
        (0..count).map(|i| self.sampled_value(x, i)).sum::<f64>() / count as f64
    }

    /// The single coupling term selected by the factor index `xi`.
    pub fn sampled_value(&self, x: &ProductPoint, xi: usize) -> f64 {
        let count = self.product.factor_count();
        assert!(xi < count, "factor index {xi} out of range (I = {count})");
        let j = self.partner(xi);
        let dot = euclid_dot(x.part(xi).coords(), x.part(j).coords());
        dot.exp() + dot
    }

    /// Riemannian gradient of the sampled term: supported on factors `xi`
    /// and its partner, zero elsewhere. Picking `xi` uniformly makes this
    /// an unbiased estimate of the full gradient.
    pub fn stochastic_gradient(&self, x: &ProductPoint, xi: usize) -> ProductTangent {
        let count = self.product.factor_count();
        assert!(xi < count, "factor index {xi} out of range (I = {count})");
        let j = self.partner(xi);
        let xi_coords = x.part(xi).coords();
        let j_coords = x.part(j).coords();
        let c = euclid_dot(xi_coords, j_coords).exp() + 1.0;

        let parts = (0..count)
            .map(|k| {
                let disk = self.product.factor(k);
                if k == xi {
                    let egrad: Vec<f64> = j_coords.iter().map(|v| c * v).collect();
                    disk.egrad_to_rgrad(x.part(k), &egrad)
                } else if k == j {
                    let egrad: Vec<f64> = xi_coords.iter().map(|v| c * v).collect();
                    disk.egrad_to_rgrad(x.part(k), &egrad)
                } else {
                    disk.zero_tangent(x.part(k))
                }
            })
            .collect();
        ProductTangent::from_parts(parts)
    }

    /// Exact Riemannian gradient of the full objective.
    pub fn full_gradient(&self, x: &ProductPoint) -> ProductTangent {
        let count = self.product.factor_count();
        let dim = self.product.factor(0).dim();
        let mut egrads = vec![vec![0.0; dim]; count];
        for i in 0..count {
            let j = self.partner(i);
            let c = euclid_dot(x.part(i).coords(), x.part(j).coords()).exp() + 1.0;
            for (slot, v) in egrads[i].iter_mut().zip(x.part(j).coords()) {
                *slot += c * v;
            }
            for (slot, v) in egrads[j].iter_mut().zip(x.part(i).coords()) {
                *slot += c * v;
            }
        }
        let scale = 1.0 / count as f64;
        let parts = (0..count)
            .map(|k| {
                let scaled: Vec<f64> = egrads[k].iter().map(|v| v * scale).collect();
                self.product.factor(k).egrad_to_rgrad(x.part(k), &scaled)
            })
            .collect();
        ProductTangent::from_parts(parts)
    }
}

/// Residual size of a product iterate against its constraints: the l2 norm
/// over factors of `d(x_i, T_i(x_i))`. One sampling's contribution to the
/// first performance measure.
pub fn residual_norm(constraints: &[FactorConstraint], x: &ProductPoint) -> f64 {
    assert_eq!(
        constraints.len(),
        x.parts().len(),
        "one constraint per factor is required"
    );
    constraints
        .iter()
        .zip(x.parts())
        .map(|(c, p)| {
            let r = c.map().residual(p);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Aggregates per-sampling contributions into the reported measures:
/// the residual measure is the mean contribution, the objective measure is
/// the factor count times the mean sampled value.
pub fn measures_from_contribs(
    residual_contribs: &[f64],
    objective_values: &[f64],
    factor_count: usize,
) -> (f64, f64) {
    assert!(!residual_contribs.is_empty());
    assert_eq!(residual_contribs.len(), objective_values.len());
    let s = residual_contribs.len() as f64;
    let d = residual_contribs.iter().sum::<f64>() / s;
    let f = factor_count as f64 * objective_values.iter().sum::<f64>() / s;
    (d, f)
}

/// Uniform draw from the Euclidean ball of the given radius, via a
/// normal direction and a radius with the `U^(1/dim)` law.
fn sample_in_euclidean_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    let dir = unit_direction(rng, dim);
    let u: f64 = rng.random_range(0.0..1.0);
    let r = radius * u.powf(1.0 / dim as f64);
    dir.into_iter().map(|c| c * r).collect()
}

/// Uniform direction on the Euclidean unit sphere.
fn unit_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Unit-speed tangent at `base` in a uniformly random direction.
fn unit_tangent(
    disk: &PoincareDisk,
    rng: &mut impl Rng,
    base: &Point,
) -> crate::manifold::Tangent {
    let dir = unit_direction(rng, disk.dim());
    // Euclidean length 1/lambda gives Riemannian length one.
    let scale = 1.0 / disk.conformal_factor(base);
    disk.tangent(base, dir.into_iter().map(|c| c * scale).collect())
        .unwrap()
}

fn euclid_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// FNV-1a over the little-endian bytes of the written values.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }

    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
