//! Product Poincaré-disk geometry.
//!
//! Each factor is the open unit ball in `R^m` equipped with the conformal
//! metric whose scale factor is `1/(1 - |x|^2)`. This is half the more
//! common `2/(1 - |x|^2)` scale, so the sectional curvature is `-4` and all
//! distances are half the textbook Poincaré-ball values; geodesic paths are
//! unchanged. Closed forms for distance, exponential/logarithm maps and
//! parallel transport come from Möbius gyrovector calculus and are
//! cross-checked in the test suite against quadrature and ODE oracles.
//!
//! Operations that can push a point toward the ideal boundary clamp the
//! result back to Euclidean norm `1 - boundary_eps` and report that they
//! did so; nothing in this module silently produces NaN from in-contract
//! inputs.

use crate::error::GeometryError;

/// Sectional curvature of every disk factor under the metric used here.
pub const KAPPA: f64 = -4.0;

/// Default width of the guard band kept free inside the unit ball.
pub const DEFAULT_BOUNDARY_EPS: f64 = 1e-10;

/// Curvature-dependent distortion coefficient `sqrt(|k|) D / tanh(sqrt(|k|) D)`.
///
/// For `kappa = -4` and diameter `1` this evaluates to `2 / tanh(2)`,
/// roughly `2.07463`. The coefficient is `>= 1`, increasing in the
/// diameter, and tends to `1` as `kappa -> 0`.
pub fn zeta(kappa: f64, diameter: f64) -> f64 {
    assert!(kappa < 0.0, "zeta expects negative curvature, got {kappa}");
    assert!(
        diameter > 0.0 && diameter.is_finite(),
        "zeta expects a positive finite diameter, got {diameter}"
    );
    let s = kappa.abs().sqrt() * diameter;
    s / s.tanh()
}

/// Inverse hyperbolic tangent written out so the same expression is used
/// everywhere; callers clamp the argument strictly below 1 first.
fn artanh(r: f64) -> f64 {
    0.5 * ((1.0 + r) / (1.0 - r)).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// The Möbius denominator `1 + 2<u,v> + |u|^2 |v|^2` is mathematically at
/// least `(1 - |u||v|)^2 > 0` inside the ball, but for two guarded points
/// hugging the boundary that bound sits below the rounding error of the
/// expression, so the computed value can reach zero or flip sign. Flooring
/// here keeps results finite; callers cap norms afterwards, which bounds
/// the (already meaningless) values such extreme inputs produce.
const DENOM_FLOOR: f64 = 1e-15;

/// Möbius addition of two vectors in the open unit ball.
fn mobius_add(u: &[f64], v: &[f64]) -> Vec<f64> {
    let uv = dot(u, v);
    let u2 = norm_sq(u);
    let v2 = norm_sq(v);
    let den = (1.0 + 2.0 * uv + u2 * v2).max(DENOM_FLOOR);
    let cu = (1.0 + 2.0 * uv + v2) / den;
    let cv = (1.0 - u2) / den;
    u.iter().zip(v).map(|(a, b)| cu * a + cv * b).collect()
}

/// Gyration operator `gyr[u, v]w`, the rotation correcting the
/// non-associativity of Möbius addition. Its defining form is
/// `-(u + v) + (u + (v + w))` in Möbius arithmetic; the closed form below
/// avoids the intermediate additions. It is a Euclidean isometry.
fn gyration(u: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
    let u2 = norm_sq(u);
    let v2 = norm_sq(v);
    let uv = dot(u, v);
    let uw = dot(u, w);
    let vw = dot(v, w);
    let den = (1.0 + 2.0 * uv + u2 * v2).max(DENOM_FLOOR);
    let a = 2.0 * (-uw * v2 + vw + 2.0 * uv * vw) / den;
    let b = 2.0 * (-vw * u2 - uw) / den;
    w.iter()
        .zip(u.iter().zip(v))
        .map(|(wi, (ui, vi))| wi + a * ui + b * vi)
        .collect()
}

/// One disk factor: dimension plus the boundary guard width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareDisk {
    dim: usize,
    boundary_eps: f64,
}

impl PoincareDisk {
    /// A disk of the given dimension with the default boundary guard.
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "disk dimension must be positive");
        Self {
            dim,
            boundary_eps: DEFAULT_BOUNDARY_EPS,
        }
    }

    /// A disk with an explicit boundary guard in `(0, 1e-6]`.
    pub fn with_boundary_eps(dim: usize, boundary_eps: f64) -> Result<Self, GeometryError> {
        assert!(dim > 0, "disk dimension must be positive");
        if !(boundary_eps > 0.0 && boundary_eps <= 1e-6) {
            return Err(GeometryError::InvalidBoundaryEps(boundary_eps));
        }
        Ok(Self { dim, boundary_eps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary_eps(&self) -> f64 {
        self.boundary_eps
    }

    /// Largest Euclidean norm a point may carry.
    fn norm_cap(&self) -> f64 {
        1.0 - self.boundary_eps
    }

    /// Validates coordinates into a point of this disk.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point, GeometryError> {
        if coords.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let norm = norm_sq(&coords).sqrt();
        if norm > self.norm_cap() {
            return Err(GeometryError::OutsideDisk {
                norm,
                limit: self.norm_cap(),
            });
        }
        Ok(Point { coords })
    }

    pub fn origin(&self) -> Point {
        Point {
            coords: vec![0.0; self.dim],
        }
    }

    /// Validates a coordinate vector into a tangent at `base`.
    pub fn tangent(&self, base: &Point, vec: Vec<f64>) -> Result<Tangent, GeometryError> {
        self.check_point(base);
        if vec.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: vec.len(),
            });
        }
        if vec.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Tangent {
            base: base.clone(),
            vec,
        })
    }

    pub fn zero_tangent(&self, base: &Point) -> Tangent {
        self.check_point(base);
        Tangent {
            base: base.clone(),
            vec: vec![0.0; self.dim],
        }
    }

    fn check_point(&self, p: &Point) {
        assert_eq!(
            p.coords.len(),
            self.dim,
            "point dimension {} does not match disk dimension {}",
            p.coords.len(),
            self.dim
        );
    }

    /// Conformal scale `1/(1 - |x|^2)` of the metric at `x`.
    pub fn conformal_factor(&self, x: &Point) -> f64 {
        self.check_point(x);
        1.0 / (1.0 - norm_sq(&x.coords))
    }

    /// Riemannian inner product of two tangents at the same base point.
    pub fn inner(&self, u: &Tangent, v: &Tangent) -> f64 {
        assert_eq!(
            u.base, v.base,
            "inner product requires tangents at the same base point"
        );
        let lambda = self.conformal_factor(&u.base);
        lambda * lambda * dot(&u.vec, &v.vec)
    }

    /// Riemannian norm of a tangent.
    pub fn norm(&self, u: &Tangent) -> f64 {
        let lambda = self.conformal_factor(&u.base);
        lambda * norm_sq(&u.vec).sqrt()
    }

    /// Geodesic distance `artanh(|(-x) + y|)` in Möbius arithmetic.
    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        self.check_point(x);
        self.check_point(y);
        if x == y {
            // Exact zero; the Möbius form would leave rounding residue.
            return 0.0;
        }
        let neg_x: Vec<f64> = x.coords.iter().map(|c| -c).collect();
        let w = mobius_add(&neg_x, &y.coords);
        let r = norm_sq(&w).sqrt().min(self.norm_cap());
        artanh(r)
    }

    /// Exponential map. The result is clamped back into the guarded ball
    /// when the geodesic lands within `boundary_eps` of the boundary, and
    /// the flag records that this happened.
    pub fn exp(&self, x: &Point, v: &Tangent) -> ExpOutcome {
        self.check_point(x);
        assert_eq!(v.base, *x, "tangent is not anchored at the base point");
        let speed = norm_sq(&v.vec).sqrt();
        if speed == 0.0 {
            return ExpOutcome {
                point: x.clone(),
                clamped: false,
            };
        }
        // Arc length of the geodesic equals the Riemannian norm of v.
        let s = self.conformal_factor(x) * speed;
        let t = s.tanh();
        let step: Vec<f64> = v.vec.iter().map(|c| c * t / speed).collect();
        let raw = mobius_add(&x.coords, &step);
        self.clamp_coords(raw)
    }

    /// Logarithm map, inverse of `exp` for points inside the guarded ball.
    pub fn log(&self, x: &Point, y: &Point) -> Tangent {
        self.check_point(x);
        self.check_point(y);
        if x == y {
            // Exact zero; the Möbius form would leave rounding residue.
            return self.zero_tangent(x);
        }
        let neg_x: Vec<f64> = x.coords.iter().map(|c| -c).collect();
        let w = mobius_add(&neg_x, &y.coords);
        let r = norm_sq(&w).sqrt();
        if r == 0.0 {
            return self.zero_tangent(x);
        }
        let scale = artanh(r.min(self.norm_cap())) / (self.conformal_factor(x) * r);
        Tangent {
            base: x.clone(),
            vec: w.iter().map(|c| c * scale).collect(),
        }
    }

    /// Parallel transport along the geodesic from `x` to `y`:
    /// a gyration followed by the conformal rescaling `lambda_x / lambda_y`.
    pub fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Tangent {
        self.check_point(x);
        self.check_point(y);
        assert_eq!(v.base, *x, "tangent is not anchored at the source point");
        if x == y {
            return Tangent {
                base: y.clone(),
                vec: v.vec.clone(),
            };
        }
        let neg_x: Vec<f64> = x.coords.iter().map(|c| -c).collect();
        let rotated = gyration(&y.coords, &neg_x, &v.vec);
        let ratio = self.conformal_factor(x) / self.conformal_factor(y);
        Tangent {
            base: y.clone(),
            vec: rotated.iter().map(|c| c * ratio).collect(),
        }
    }

    /// Converts a Euclidean gradient at `x` into the Riemannian gradient:
    /// multiplication by the inverse metric, `(1 - |x|^2)^2`.
    pub fn egrad_to_rgrad(&self, x: &Point, egrad: &[f64]) -> Tangent {
        self.check_point(x);
        assert_eq!(
            egrad.len(),
            self.dim,
            "gradient dimension {} does not match disk dimension {}",
            egrad.len(),
            self.dim
        );
        assert!(
            egrad.iter().all(|c| c.is_finite()),
            "gradient must be finite"
        );
        let inv_metric = {
            let f = 1.0 - norm_sq(&x.coords);
            f * f
        };
        Tangent {
            base: x.clone(),
            vec: egrad.iter().map(|c| c * inv_metric).collect(),
        }
    }

    fn clamp_coords(&self, coords: Vec<f64>) -> ExpOutcome {
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "geometry produced a non-finite coordinate"
        );
        let norm = norm_sq(&coords).sqrt();
        let cap = self.norm_cap();
        if norm > cap {
            let scale = cap / norm;
            ExpOutcome {
                point: Point {
                    coords: coords.iter().map(|c| c * scale).collect(),
                },
                clamped: true,
            }
        } else {
            ExpOutcome {
                point: Point { coords },
                clamped: false,
            }
        }
    }
}

/// A point of one disk factor. Coordinates always satisfy
/// `|coords| <= 1 - boundary_eps` of the disk that built them.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// A tangent vector anchored at a base point, stored in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: Point,
    vec: Vec<f64>,
}

impl Tangent {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    /// Scales the coordinate vector, keeping the base.
    pub fn scale(&self, a: f64) -> Tangent {
        assert!(a.is_finite(), "scale factor must be finite");
        Tangent {
            base: self.base.clone(),
            vec: self.vec.iter().map(|c| c * a).collect(),
        }
    }

    /// Linear combination `a*u + b*v` of two tangents at the same base.
    pub fn combine(a: f64, u: &Tangent, b: f64, v: &Tangent) -> Tangent {
        assert_eq!(u.base, v.base, "combining tangents at different bases");
        assert!(
            a.is_finite() && b.is_finite(),
            "combination weights must be finite"
        );
        Tangent {
            base: u.base.clone(),
            vec: u
                .vec
                .iter()
                .zip(&v.vec)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Result of an exponential-map evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpOutcome {
    pub point: Point,
    pub clamped: bool,
}

/// A finite product of disk factors with the product (l2) structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductManifold {
    factors: Vec<PoincareDisk>,
}

impl ProductManifold {
    pub fn new(factors: Vec<PoincareDisk>) -> Self {
        assert!(!factors.is_empty(), "a product needs at least one factor");
        Self { factors }
    }

    /// `count` identical factors of dimension `dim`.
    pub fn uniform(count: usize, dim: usize) -> Self {
        assert!(count > 0, "a product needs at least one factor");
        Self {
            factors: vec![PoincareDisk::new(dim); count],
        }
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[PoincareDisk] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &PoincareDisk {
        &self.factors[i]
    }

    /// Validates a list of per-factor points into a product point.
    pub fn point(&self, parts: Vec<Point>) -> Result<ProductPoint, GeometryError> {
        if parts.len() != self.factors.len() {
            return Err(GeometryError::FactorCountMismatch {
                expected: self.factors.len(),
                got: parts.len(),
            });
        }
        for (disk, p) in self.factors.iter().zip(&parts) {
            if p.coords.len() != disk.dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: disk.dim,
                    got: p.coords.len(),
                });
            }
        }
        Ok(ProductPoint { parts })
    }

    pub fn origin(&self) -> ProductPoint {
        ProductPoint {
            parts: self.factors.iter().map(|d| d.origin()).collect(),
        }
    }

    fn check_parts(&self, n: usize) {
        assert_eq!(
            n,
            self.factors.len(),
            "product object has {} parts, manifold has {} factors",
            n,
            self.factors.len()
        );
    }

    /// Product distance: the l2 norm of the per-factor distances.
    pub fn dist(&self, x: &ProductPoint, y: &ProductPoint) -> f64 {
        self.check_parts(x.parts.len());
        self.check_parts(y.parts.len());
        self.factors
            .iter()
            .zip(x.parts.iter().zip(&y.parts))
            .map(|(d, (a, b))| {
                let s = d.dist(a, b);
                s * s
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of the per-factor inner products.
    pub fn inner(&self, u: &ProductTangent, v: &ProductTangent) -> f64 {
        self.check_parts(u.parts.len());
        self.check_parts(v.parts.len());
        self.factors
            .iter()
            .zip(u.parts.iter().zip(&v.parts))
            .map(|(d, (a, b))| d.inner(a, b))
            .sum()
    }

    pub fn norm(&self, u: &ProductTangent) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Factor-wise exponential map; counts how many factors clamped.
    pub fn exp(&self, x: &ProductPoint, v: &ProductTangent) -> ProductExpOutcome {
        self.check_parts(x.parts.len());
        self.check_parts(v.parts.len());
        let mut clamped_parts = 0u32;
        let parts = self
            .factors
            .iter()
            .zip(x.parts.iter().zip(&v.parts))
            .map(|(d, (p, t))| {
                let out = d.exp(p, t);
                if out.clamped {
                    clamped_parts += 1;
                }
                out.point
            })
            .collect();
        ProductExpOutcome {
            point: ProductPoint { parts },
            clamped_parts,
        }
    }

    pub fn log(&self, x: &ProductPoint, y: &ProductPoint) -> ProductTangent {
        self.check_parts(x.parts.len());
        self.check_parts(y.parts.len());
        ProductTangent {
            parts: self
                .factors
                .iter()
                .zip(x.parts.iter().zip(&y.parts))
                .map(|(d, (a, b))| d.log(a, b))
                .collect(),
        }
    }

    pub fn transport(
        &self,
        x: &ProductPoint,
        y: &ProductPoint,
        v: &ProductTangent,
    ) -> ProductTangent {
        self.check_parts(x.parts.len());
        self.check_parts(y.parts.len());
        self.check_parts(v.parts.len());
        ProductTangent {
            parts: self
                .factors
                .iter()
                .zip(v.parts.iter().zip(x.parts.iter().zip(&y.parts)))
                .map(|(d, (t, (a, b)))| d.transport(a, b, t))
                .collect(),
        }
    }

    pub fn zero_tangent(&self, x: &ProductPoint) -> ProductTangent {
        self.check_parts(x.parts.len());
        ProductTangent {
            parts: self
                .factors
                .iter()
                .zip(&x.parts)
                .map(|(d, p)| d.zero_tangent(p))
                .collect(),
        }
    }
}

/// A point of the product manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    parts: Vec<Point>,
}

impl ProductPoint {
    pub fn parts(&self) -> &[Point] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &Point {
        &self.parts[i]
    }

    pub fn into_parts(self) -> Vec<Point> {
        self.parts
    }

    /// Builds a product point from per-factor parts without a manifold
    /// handle; intended for reassembling parts that came out of one.
    pub fn from_parts(parts: Vec<Point>) -> Self {
        assert!(!parts.is_empty(), "a product point needs at least one part");
        Self { parts }
    }
}

/// A tangent of the product manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTangent {
    parts: Vec<Tangent>,
}

impl ProductTangent {
    pub fn parts(&self) -> &[Tangent] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &Tangent {
        &self.parts[i]
    }

    pub fn from_parts(parts: Vec<Tangent>) -> Self {
        assert!(
            !parts.is_empty(),
            "a product tangent needs at least one part"
        );
        Self { parts }
    }

    pub fn scale(&self, a: f64) -> ProductTangent {
        ProductTangent {
            parts: self.parts.iter().map(|t| t.scale(a)).collect(),
        }
    }

    /// Factor-wise linear combination at a shared base.
    pub fn combine(a: f64, u: &ProductTangent, b: f64, v: &ProductTangent) -> ProductTangent {
        assert_eq!(
            u.parts.len(),
            v.parts.len(),
            "combining product tangents with different factor counts"
        );
        ProductTangent {
            parts: u
                .parts
                .iter()
                .zip(&v.parts)
                .map(|(x, y)| Tangent::combine(a, x, b, y))
                .collect(),
        }
    }
}

/// Result of a product exponential map.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductExpOutcome {
    pub point: ProductPoint,
    pub clamped_parts: u32,
}
