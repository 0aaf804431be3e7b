//! Quasinonexpansive self-maps of a disk factor.
//!
//! The building blocks are metric projections onto geodesic balls,
//! compositions, relaxations along geodesics, subgradient projections onto
//! sublevel sets, and resolvents of squared-distance terms. Every
//! construction here is quasinonexpansive with respect to its fixed-point
//! set; the integration tests exercise those inequalities case by case.

use std::fmt;
use std::sync::Arc;

use crate::error::GeometryError;
use crate::manifold::{PoincareDisk, Point, Tangent};

/// A closed geodesic ball `{ x : d(x, center) <= radius }`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicBall {
    disk: PoincareDisk,
    center: Point,
    radius: f64,
}

impl GeodesicBall {
    pub fn new(disk: PoincareDisk, center: Point, radius: f64) -> Result<Self, GeometryError> {
        if center.coords().len() != disk.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: disk.dim(),
                got: center.coords().len(),
            });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        Ok(Self {
            disk,
            center,
            radius,
        })
    }

    pub fn disk(&self) -> &PoincareDisk {
        &self.disk
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.disk.dist(&self.center, x) <= self.radius
    }

    /// Metric projection: identity inside, otherwise the point of the
    /// bounding sphere on the geodesic from the center to `x`.
    pub fn project(&self, x: &Point) -> MapEval {
        let d = self.disk.dist(&self.center, x);
        if d <= self.radius {
            return MapEval {
                point: x.clone(),
                clamps: 0,
            };
        }
        let toward = self.disk.log(&self.center, x);
        let out = self.disk.exp(&self.center, &toward.scale(self.radius / d));
        MapEval {
            point: out.point,
            clamps: u32::from(out.clamped),
        }
    }
}

/// A convex function given by a value oracle and a subgradient oracle.
///
/// The subgradient must be an element of the subdifferential at the query
/// point; where the function is differentiable that is the Riemannian
/// gradient.
#[derive(Clone)]
pub struct ConvexFunctionOracle {
    eval: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    subgrad: Arc<dyn Fn(&Point) -> Tangent + Send + Sync>,
}

impl ConvexFunctionOracle {
    pub fn new(
        eval: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        subgrad: impl Fn(&Point) -> Tangent + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            subgrad: Arc::new(subgrad),
        }
    }

    /// The oracle for `g(x) = d(x, center) - radius`, whose sublevel set
    /// `{ g <= 0 }` is the given ball. At the center every vector of the
    /// unit ball is a subgradient; the zero vector is returned there.
    pub fn ball_distance(ball: &GeodesicBall) -> Self {
        let disk = *ball.disk();
        let center = ball.center().clone();
        let radius = ball.radius();
        let eval_center = center.clone();
        let eval_disk = disk;
        Self {
            eval: Arc::new(move |x: &Point| eval_disk.dist(&eval_center, x) - radius),
            subgrad: Arc::new(move |x: &Point| {
                let d = disk.dist(&center, x);
                if d == 0.0 {
                    disk.zero_tangent(x)
                } else {
                    // Unit outward direction: -log_x(center) / d.
                    disk.log(x, &center).scale(-1.0 / d)
                }
            }),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn subgradient(&self, x: &Point) -> Tangent {
        (self.subgrad)(x)
    }
}

impl fmt::Debug for ConvexFunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ConvexFunctionOracle")
    }
}

/// Step scaling of the subgradient projection.
///
/// `SquaredNorm` divides the function value by the squared subgradient
/// norm (the Polyak-style step used throughout this crate by default);
/// `Norm` divides by the plain norm, giving a step of length
/// `lambda * g(x)` instead of `lambda * g(x) / |u|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SubgradientScaling {
    #[default]
    SquaredNorm,
    Norm,
}

/// Result of applying a map: the image point plus how many boundary
/// clamps occurred in the evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct MapEval {
    pub point: Point,
    pub clamps: u32,
}

/// A quasinonexpansive self-map of one disk factor.
#[derive(Clone, Debug)]
pub enum FixedPointMap {
    /// The identity; fixes everything.
    Identity { disk: PoincareDisk },
    /// Metric projection onto a geodesic ball.
    BallProjection { ball: GeodesicBall },
    /// Composition; `maps` are applied right to left, so the written
    /// order `[m1, m2, m3]` evaluates `m1(m2(m3(x)))`.
    Composition { maps: Vec<FixedPointMap> },
    /// Geodesic relaxation: move the fraction `1 - alpha` of the way from
    /// `x` toward `inner(x)`.
    Relaxation {
        inner: Box<FixedPointMap>,
        alpha: f64,
    },
    /// Relaxation followed by projection onto a region containing the
    /// fixed-point set of `inner`. The caller is responsible for that
    /// containment; it is not checked at runtime.
    ProjectedRelaxation {
        inner: Box<FixedPointMap>,
        alpha: f64,
        region: GeodesicBall,
    },
    /// Subgradient projection toward the sublevel set `{ g <= 0 }`.
    /// Quasinonexpansive for `lambda` in `(0, 2 / zeta(kappa, D))` where
    /// `D` bounds the diameter of the working region.
    SubgradientProjection {
        disk: PoincareDisk,
        oracle: ConvexFunctionOracle,
        lambda: f64,
        scaling: SubgradientScaling,
    },
    /// Resolvent of the squared-distance term `d(., anchor)^2 / 2`: the
    /// point a fraction `lambda / (1 + lambda)` of the way toward the
    /// anchor.
    Resolvent {
        disk: PoincareDisk,
        anchor: Point,
        lambda: f64,
    },
}

impl FixedPointMap {
    pub fn identity(disk: PoincareDisk) -> Self {
        FixedPointMap::Identity { disk }
    }

    pub fn ball_projection(ball: GeodesicBall) -> Self {
        FixedPointMap::BallProjection { ball }
    }

    /// Composition in written order: the last map acts first.
    pub fn compose(maps: Vec<FixedPointMap>) -> Self {
        assert!(!maps.is_empty(), "composition needs at least one map");
        let disk = *maps[0].disk();
        assert!(
            maps.iter().all(|m| *m.disk() == disk),
            "composition requires maps over the same disk"
        );
        FixedPointMap::Composition { maps }
    }

    pub fn relax(inner: FixedPointMap, alpha: f64) -> Self {
        assert!(
            alpha > 0.0 && alpha < 1.0,
            "relaxation weight must lie in (0, 1), got {alpha}"
        );
        FixedPointMap::Relaxation {
            inner: Box::new(inner),
            alpha,
        }
    }

    pub fn projected_relax(inner: FixedPointMap, alpha: f64, region: GeodesicBall) -> Self {
        assert!(
            alpha > 0.0 && alpha < 1.0,
            "relaxation weight must lie in (0, 1), got {alpha}"
        );
        assert_eq!(
            inner.disk(),
            region.disk(),
            "region must live on the same disk as the relaxed map"
        );
        FixedPointMap::ProjectedRelaxation {
            inner: Box::new(inner),
            alpha,
            region,
        }
    }

    pub fn subgradient_projection(
        disk: PoincareDisk,
        oracle: ConvexFunctionOracle,
        lambda: f64,
        scaling: SubgradientScaling,
    ) -> Self {
        assert!(
            lambda > 0.0 && lambda.is_finite(),
            "subgradient step size must be positive, got {lambda}"
        );
        FixedPointMap::SubgradientProjection {
            disk,
            oracle,
            lambda,
            scaling,
        }
    }

    pub fn resolvent(disk: PoincareDisk, anchor: Point, lambda: f64) -> Self {
        assert!(
            lambda > 0.0 && lambda.is_finite(),
            "resolvent step size must be positive, got {lambda}"
        );
        assert_eq!(
            anchor.coords().len(),
            disk.dim(),
            "anchor dimension does not match the disk"
        );
        FixedPointMap::Resolvent {
            disk,
            anchor,
            lambda,
        }
    }

    /// The disk this map acts on.
    pub fn disk(&self) -> &PoincareDisk {
        match self {
            FixedPointMap::Identity { disk } => disk,
            FixedPointMap::BallProjection { ball } => ball.disk(),
            FixedPointMap::Composition { maps } => maps[0].disk(),
            FixedPointMap::Relaxation { inner, .. } => inner.disk(),
            FixedPointMap::ProjectedRelaxation { inner, .. } => inner.disk(),
            FixedPointMap::SubgradientProjection { disk, .. } => disk,
            FixedPointMap::Resolvent { disk, .. } => disk,
        }
    }

    /// Short tag naming the construction, for reports and errors.
    pub fn kind(&self) -> &'static str {
        match self {
            FixedPointMap::Identity { .. } => "identity",
            FixedPointMap::BallProjection { .. } => "ball-projection",
            FixedPointMap::Composition { .. } => "composition",
            FixedPointMap::Relaxation { .. } => "relaxation",
            FixedPointMap::ProjectedRelaxation { .. } => "projected-relaxation",
            FixedPointMap::SubgradientProjection { .. } => "subgradient-projection",
            FixedPointMap::Resolvent { .. } => "resolvent",
        }
    }

    /// Applies the map, accumulating boundary clamps across the parts of
    /// the evaluation.
    pub fn apply(&self, x: &Point) -> MapEval {
        match self {
            FixedPointMap::Identity { .. } => MapEval {
                point: x.clone(),
                clamps: 0,
            },
            FixedPointMap::BallProjection { ball } => ball.project(x),
            FixedPointMap::Composition { maps } => {
                let mut clamps = 0u32;
                let mut cur = x.clone();
                for m in maps.iter().rev() {
                    let out = m.apply(&cur);
                    clamps += out.clamps;
                    cur = out.point;
                }
                MapEval { point: cur, clamps }
            }
            FixedPointMap::Relaxation { inner, alpha } => {
                let disk = inner.disk();
                let t = inner.apply(x);
                let toward = disk.log(x, &t.point);
                let out = disk.exp(x, &toward.scale(1.0 - alpha));
                MapEval {
                    point: out.point,
                    clamps: t.clamps + u32::from(out.clamped),
                }
            }
            FixedPointMap::ProjectedRelaxation {
                inner,
                alpha,
                region,
            } => {
                let disk = inner.disk();
                let t = inner.apply(x);
                let toward = disk.log(x, &t.point);
                let relaxed = disk.exp(x, &toward.scale(1.0 - alpha));
                let projected = region.project(&relaxed.point);
                MapEval {
                    point: projected.point,
                    clamps: t.clamps + u32::from(relaxed.clamped) + projected.clamps,
                }
            }
            FixedPointMap::SubgradientProjection {
                disk,
                oracle,
                lambda,
                scaling,
            } => {
                let g = oracle.value(x);
                if g <= 0.0 {
                    return MapEval {
                        point: x.clone(),
                        clamps: 0,
                    };
                }
                let u = oracle.subgradient(x);
                let norm = disk.norm(&u);
                assert!(
                    norm > 0.0,
                    "subgradient oracle returned zero at a point with positive value; \
                     the sublevel set would be empty"
                );
                let factor = match scaling {
                    SubgradientScaling::SquaredNorm => -lambda * g / (norm * norm),
                    SubgradientScaling::Norm => -lambda * g / norm,
                };
                let out = disk.exp(x, &u.scale(factor));
                MapEval {
                    point: out.point,
                    clamps: u32::from(out.clamped),
                }
            }
            FixedPointMap::Resolvent {
                disk,
                anchor,
                lambda,
            } => {
                let toward = disk.log(x, anchor);
                let out = disk.exp(x, &toward.scale(lambda / (1.0 + lambda)));
                MapEval {
                    point: out.point,
                    clamps: u32::from(out.clamped),
                }
            }
        }
    }

    /// Convenience for call sites that do not track clamps.
    pub fn apply_point(&self, x: &Point) -> Point {
        self.apply(x).point
    }

    /// Displacement `d(x, T(x))`; zero exactly on the fixed-point set.
    pub fn residual(&self, x: &Point) -> f64 {
        self.disk().dist(x, &self.apply_point(x))
    }
}
