//! Stochastic fixed-point optimization on products of hyperbolic disks.
//!
//! The crate implements a constrained optimization scheme where the
//! constraint set is given implicitly as the common fixed points of
//! quasinonexpansive maps, one family per factor of a product manifold.
//! Iterates move by an adaptive momentum step along the factor geodesics
//! followed by a relaxed application of the fixed-point maps, so the
//! scheme never needs a projection onto the (possibly inconsistent)
//! intersection itself.
//!
//! Modules:
//! - [`manifold`]: the disk geometry (curvature -4 convention) and its
//!   product, with exponential and logarithm maps, parallel transport and
//!   gradient conversion.
//! - [`fixmaps`]: quasinonexpansive building blocks (ball projections,
//!   subgradient projections, resolvents) and their relaxed compositions.
//! - [`optimizer`]: step-size and momentum schedules, adaptive rate
//!   engines, the iteration itself, and evaluable convergence bounds.
//! - [`problems`]: sampled benchmark instances with feasibility
//!   certificates, the coupling objective, and performance measures.

pub mod error;
pub mod fixmaps;
pub mod manifold;
pub mod optimizer;
pub mod problems;

pub use error::GeometryError;
pub use fixmaps::{
    ConvexFunctionOracle, FixedPointMap, GeodesicBall, MapEval, SubgradientScaling,
};
pub use manifold::{
    zeta, ExpOutcome, PoincareDisk, Point, ProductExpOutcome, ProductManifold, ProductPoint,
    ProductTangent, Tangent, DEFAULT_BOUNDARY_EPS, KAPPA,
};
pub use optimizer::{
    average_update, theorem_bound_rhs, BetaSchedule, BoundInputs, BoundKind, FactorConstraint,
    OptimizerState, RateEngine, RateKind, Schedule, StepReport, ENGINE_EPS,
};
pub use problems::{
    measures_from_contribs, residual_norm, working_region, BallSystem, CouplingObjective,
    FactorBalls, FeasibilityCertificate,
};
