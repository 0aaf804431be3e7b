use thiserror::Error;

/// Construction-time failures for geometric objects.
///
/// Operations on already-constructed objects treat malformed input
/// (mismatched base points, wrong dimensions) as caller bugs and panic;
/// only constructors that ingest external data return these errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Coordinates reach or leave the open unit ball.
    #[error("point norm {norm} is outside the open unit ball (limit {limit})")]
    OutsideDisk { norm: f64, limit: f64 },

    /// Coordinate vector length does not match the manifold dimension.
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A coordinate is NaN or infinite.
    #[error("coordinates must be finite")]
    NonFinite,

    /// Boundary guard outside the supported range.
    #[error("boundary_eps must lie in (0, 1e-6], got {0}")]
    InvalidBoundaryEps(f64),

    /// Ball radius must be strictly positive and finite.
    #[error("ball radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    /// Product point/tangent with the wrong number of parts.
    #[error("expected {expected} factors, got {got}")]
    FactorCountMismatch { expected: usize, got: usize },
}
