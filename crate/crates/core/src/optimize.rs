//! Scalar maximization: coarse log-grid scan followed by golden-section
//! refinement. Used for locating the best moment exponent of the
//! lower-bound family.

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximize `f` on `[lo, hi]`: scan a log-spaced grid, then refine around
/// the grid maximum by golden section to absolute tolerance `tol` in the
/// argument. Returns `(argmax, max)`.
pub(crate) fn maximize_log_grid(
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let grid = crate::dgsm::log_spaced(lo, hi, grid_points.max(2));
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &m) in grid.iter().enumerate() {
        let v = f(m);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    let left = if best_idx == 0 {
        lo
    } else {
        grid[best_idx - 1]
    };
    let right = if best_idx + 1 == grid.len() {
        hi
    } else {
        grid[best_idx + 1]
    };
    golden_max(left, right, tol, f)
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max(lo: f64, hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}
