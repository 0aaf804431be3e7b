//! Geometry properties checked against independent numerical oracles.
//!
//! The oracles in `common` integrate the geodesic and parallel-transport
//! equations of the conformal metric directly, so the closed forms under
//! test are compared against the defining differential equations rather
//! than against themselves.

mod common;

use fixopt::{zeta, PoincareDisk, ProductManifold};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROUND_TRIP_TOL: f64 = 1e-9;
const QUADRATURE_TOL: f64 = 1e-6;
const ISOMETRY_TOL: f64 = 1e-9;
const TRIANGLE_TOL: f64 = 1e-12;
/// RK4 with 2000 steps resolves these short geodesics far below 1e-9.
const ODE_TOL: f64 = 1e-9;
const ODE_STEPS: usize = 2000;

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn exp_log_round_trips_between_random_points() {
    let mut rng = seeded(101);
    for dim in [1usize, 2, 3, 5] {
        let disk = PoincareDisk::new(dim);
        for _ in 0..50 {
            let x = disk.point(common::rand_in_ball(&mut rng, dim, 0.9)).unwrap();
            let y = disk.point(common::rand_in_ball(&mut rng, dim, 0.9)).unwrap();
            let v = disk.log(&x, &y);
            let back = disk.exp(&x, &v);
            assert!(!back.clamped);
            let err = common::euclid_dist(back.point.coords(), y.coords());
            assert!(err <= ROUND_TRIP_TOL, "exp(log) drift {err} at dim {dim}");

            // The reverse composition, starting from a tangent vector.
            let dir = common::rand_direction(&mut rng, dim);
            let len: f64 = rng.random_range(0.0..3.0);
            let scale = len / disk.conformal_factor(&x);
            let w = disk
                .tangent(&x, dir.iter().map(|c| c * scale).collect())
                .unwrap();
            let z = disk.exp(&x, &w).point;
            let w_back = disk.log(&x, &z);
            let err = common::euclid_dist(w_back.vec(), w.vec());
            assert!(err <= ROUND_TRIP_TOL, "log(exp) drift {err} at dim {dim}");
        }
    }
}

#[test]
fn exp_follows_the_geodesic_equation() {
    let mut rng = seeded(102);
    let disk = PoincareDisk::new(3);
    for _ in 0..25 {
        let x = disk.point(common::rand_in_ball(&mut rng, 3, 0.8)).unwrap();
        let y = disk.point(common::rand_in_ball(&mut rng, 3, 0.8)).unwrap();
        let v = disk.log(&x, &y);
        let ode = common::integrate_geodesic(x.coords(), v.vec(), v.vec(), ODE_STEPS);
        let err = common::euclid_dist(&ode.end.pos, y.coords());
        assert!(err <= ODE_TOL, "geodesic endpoint drift {err}");
    }
}

#[test]
fn distance_matches_arc_length_quadrature() {
    let mut rng = seeded(103);
    let disk = PoincareDisk::new(2);
    for _ in 0..25 {
        let x = disk.point(common::rand_in_ball(&mut rng, 2, 0.85)).unwrap();
        let y = disk.point(common::rand_in_ball(&mut rng, 2, 0.85)).unwrap();
        let v = disk.log(&x, &y);
        let ode = common::integrate_geodesic(x.coords(), v.vec(), v.vec(), ODE_STEPS);
        let d = disk.dist(&x, &y);
        assert!(
            (d - ode.arc_length).abs() <= QUADRATURE_TOL,
            "distance {d} vs arc length {}",
            ode.arc_length
        );
        // The tangent returned by log carries the distance as its norm.
        assert!((disk.norm(&v) - d).abs() <= 1e-10);
    }
}

#[test]
fn radial_distance_matches_direct_quadrature() {
    // Along a radius the metric integrand is 1/(1 - t^2), so the distance
    // from the origin to radius r is the integral of that up to r.
    let disk = PoincareDisk::new(2);
    for r in [0.1, 0.3, 0.6, 0.9, 0.99] {
        let p = disk.point(vec![r, 0.0]).unwrap();
        let quad = common::simpson_integral(|t| 1.0 / (1.0 - t * t), 0.0, r, 20_000);
        assert!(
            (disk.dist(&disk.origin(), &p) - quad).abs() <= 1e-9,
            "radial distance mismatch at r = {r}"
        );
    }
}

#[test]
fn transport_matches_the_parallel_transport_equation() {
    let mut rng = seeded(104);
    let disk = PoincareDisk::new(3);
    for _ in 0..25 {
        let x = disk.point(common::rand_in_ball(&mut rng, 3, 0.8)).unwrap();
        let y = disk.point(common::rand_in_ball(&mut rng, 3, 0.8)).unwrap();
        let w = disk
            .tangent(&x, common::rand_in_ball(&mut rng, 3, 1.0))
            .unwrap();
        let v = disk.log(&x, &y);
        let ode = common::integrate_geodesic(x.coords(), v.vec(), w.vec(), ODE_STEPS);
        let moved = disk.transport(&x, &y, &w);
        let err = common::euclid_dist(moved.vec(), &ode.end.par);
        assert!(err <= ODE_TOL, "transport drift {err}");
    }
}

#[test]
fn transport_is_an_isometry() {
    let mut rng = seeded(105);
    for dim in [2usize, 4] {
        let disk = PoincareDisk::new(dim);
        for _ in 0..100 {
            let x = disk.point(common::rand_in_ball(&mut rng, dim, 0.9)).unwrap();
            let y = disk.point(common::rand_in_ball(&mut rng, dim, 0.9)).unwrap();
            let u = disk
                .tangent(&x, common::rand_in_ball(&mut rng, dim, 2.0))
                .unwrap();
            let v = disk
                .tangent(&x, common::rand_in_ball(&mut rng, dim, 2.0))
                .unwrap();
            let (tu, tv) = (disk.transport(&x, &y, &u), disk.transport(&x, &y, &v));
            // Inner products, not just norms, survive the move.
            let before = disk.inner(&u, &v);
            let after = disk.inner(&tu, &tv);
            assert!(
                (before - after).abs() <= ISOMETRY_TOL * before.abs().max(1.0),
                "inner product drift {before} -> {after}"
            );
            assert!((disk.norm(&u) - disk.norm(&tu)).abs() <= ISOMETRY_TOL);
        }
    }
}

#[test]
fn transport_round_trip_restores_the_vector() {
    let mut rng = seeded(106);
    let disk = PoincareDisk::new(2);
    for _ in 0..100 {
        let x = disk.point(common::rand_in_ball(&mut rng, 2, 0.9)).unwrap();
        let y = disk.point(common::rand_in_ball(&mut rng, 2, 0.9)).unwrap();
        let u = disk
            .tangent(&x, common::rand_in_ball(&mut rng, 2, 2.0))
            .unwrap();
        let back = disk.transport(&y, &x, &disk.transport(&x, &y, &u));
        let err = common::euclid_dist(back.vec(), u.vec());
        assert!(err <= ROUND_TRIP_TOL, "transport round trip drift {err}");
    }
}

#[test]
fn distance_is_a_metric() {
    let mut rng = seeded(107);
    let disk = PoincareDisk::new(3);
    for _ in 0..500 {
        let x = disk.point(common::rand_in_ball(&mut rng, 3, 0.95)).unwrap();
        let y = disk.point(common::rand_in_ball(&mut rng, 3, 0.95)).unwrap();
        let z = disk.point(common::rand_in_ball(&mut rng, 3, 0.95)).unwrap();
        let (xy, yx) = (disk.dist(&x, &y), disk.dist(&y, &x));
        assert!((xy - yx).abs() <= TRIANGLE_TOL);
        assert!(disk.dist(&x, &x) == 0.0);
        assert!(
            disk.dist(&x, &z) <= xy + disk.dist(&y, &z) + TRIANGLE_TOL,
            "triangle inequality violated"
        );
    }
}

#[test]
fn curvature_comparison_bounds_the_law_of_cosines() {
    // In a space of curvature >= -4, squared distances obey
    // d(z,y)^2 <= zeta * d(z,x)^2 + d(x,y)^2 - 2 <log_x z, log_x y>
    // with zeta evaluated at a diameter bound for the three points.
    let mut rng = seeded(108);
    let disk = PoincareDisk::new(2);
    for _ in 0..300 {
        let x = disk.point(common::rand_in_ball(&mut rng, 2, 0.9)).unwrap();
        let y = disk.point(common::rand_in_ball(&mut rng, 2, 0.9)).unwrap();
        let z = disk.point(common::rand_in_ball(&mut rng, 2, 0.9)).unwrap();
        let (dxy, dxz, dzy) = (disk.dist(&x, &y), disk.dist(&x, &z), disk.dist(&z, &y));
        let diameter = dxy.max(dxz).max(dzy).max(1e-6);
        let z_factor = zeta(fixopt::KAPPA, diameter);
        let cross = disk.inner(&disk.log(&x, &z), &disk.log(&x, &y));
        let rhs = z_factor * dxz * dxz + dxy * dxy - 2.0 * cross;
        assert!(
            dzy * dzy <= rhs + 1e-10,
            "comparison inequality violated: lhs {} rhs {rhs}",
            dzy * dzy
        );
    }
}

#[test]
fn product_operations_decompose_factor_wise() {
    let mut rng = seeded(109);
    let product = ProductManifold::uniform(3, 2);
    let disk = *product.factor(0);
    let parts_a: Vec<_> = (0..3)
        .map(|_| disk.point(common::rand_in_ball(&mut rng, 2, 0.8)).unwrap())
        .collect();
    let parts_b: Vec<_> = (0..3)
        .map(|_| disk.point(common::rand_in_ball(&mut rng, 2, 0.8)).unwrap())
        .collect();
    let a = product.point(parts_a.clone()).unwrap();
    let b = product.point(parts_b.clone()).unwrap();

    let sq_sum: f64 = parts_a
        .iter()
        .zip(&parts_b)
        .map(|(p, q)| disk.dist(p, q).powi(2))
        .sum();
    assert!((product.dist(&a, &b) - sq_sum.sqrt()).abs() <= 1e-12);

    let v = product.log(&a, &b);
    let reached = product.exp(&a, &v);
    assert!(reached.clamped_parts == 0);
    for (part, want) in reached.point.parts().iter().zip(&parts_b) {
        assert!(common::euclid_dist(part.coords(), want.coords()) <= ROUND_TRIP_TOL);
    }

    let w = product.transport(&a, &b, &v);
    assert!((product.norm(&w) - product.norm(&v)).abs() <= ISOMETRY_TOL);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Round trip under proptest shrinking, coordinates well inside the disk.
    #[test]
    fn prop_exp_log_round_trip(
        xa in -0.6f64..0.6, xb in -0.6f64..0.6,
        ya in -0.6f64..0.6, yb in -0.6f64..0.6,
    ) {
        prop_assume!(xa * xa + xb * xb < 0.8);
        prop_assume!(ya * ya + yb * yb < 0.8);
        let disk = PoincareDisk::new(2);
        let x = disk.point(vec![xa, xb]).unwrap();
        let y = disk.point(vec![ya, yb]).unwrap();
        let back = disk.exp(&x, &disk.log(&x, &y)).point;
        prop_assert!(common::euclid_dist(back.coords(), y.coords()) <= ROUND_TRIP_TOL);
    }

    /// Distances shrink toward the origin compared to their hyperbolic size.
    #[test]
    fn prop_distance_dominates_euclidean(
        xa in -0.9f64..0.9, ya in -0.9f64..0.9,
    ) {
        let disk = PoincareDisk::new(1);
        let x = disk.point(vec![xa]).unwrap();
        let y = disk.point(vec![ya]).unwrap();
        // artanh stretches: the hyperbolic distance is never smaller than
        // the Euclidean gap between the artanh images' preimages.
        prop_assert!(disk.dist(&x, &y) + 1e-12 >= (xa - ya).abs());
    }
}
