//! Reference numerics kept deliberately separate from the library code.

/// Composite Simpson quadrature of `f` over `[a, b]`.
///
/// `intervals` must be even. The error falls like the fourth power of the
/// interval width, so a few thousand intervals give far more accuracy
/// than the tolerances that ride on this.
pub fn simpson_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(
        intervals >= 2 && intervals.is_multiple_of(2),
        "even interval count"
    );
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 0 { 2.0 } else { 4.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}
