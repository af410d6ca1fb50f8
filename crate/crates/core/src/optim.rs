//! One-dimensional search routines.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Outcome of a bounded one-dimensional maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    /// The maximiser sits on the upper end of the interval, so the true
    /// supremum may lie beyond it.
    pub at_upper_bound: bool,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// run until the bracket is narrower than `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    // Endpoints are candidates too: boundary maxima are common here.
    [(x1, f1), (x2, f2), (a, f(a)), (b, f(b))].into_iter().fold((x1, f1), |best, c| if c.1 > best.1 { c } else { best })
}

/// Scans `f` on `grid + 1` equispaced points of `[a, b]`, then polishes the
/// best point with golden-section search inside its neighbouring cells.
///
/// The scan guards against mild non-unimodality; the returned value never
/// falls below the best grid value.
pub fn grid_then_golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, grid: usize, tol: f64) -> Maximum {
    assert!(b > a && grid >= 2);
    let step = (b - a) / grid as f64;
    let point = |i: usize| if i == grid { b } else { a + step * i as f64 };
    let (best_i, best_v) =
        (0..=grid)
            .map(|i| (i, f(point(i))))
            .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    let lo = point(best_i.saturating_sub(1));
    let hi = point((best_i + 1).min(grid));
    let (x, v) = golden_section_max(&f, lo, hi, tol);
    let (argmax, value) = if v >= best_v { (x, v) } else { (point(best_i), best_v) };
    Maximum { argmax, value, at_upper_bound: b - argmax <= 2.0 * tol }
}

/// Bisection for a root of `f` on `[lo, hi]`, which must bracket a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::InvalidConfig(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
