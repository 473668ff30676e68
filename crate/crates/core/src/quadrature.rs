//! Gauss–Legendre quadrature on the unit interval and tensor grids over the
//! unit cube. Backs the brute-force verification oracle in [`crate::variance`].

/// Nodes and weights of the `n`-point Gauss–Legendre rule mapped to `[0, 1]`.
///
/// Nodes are found by Newton iteration on the Legendre polynomial from the
/// usual Chebyshev initial guesses; accuracy is at the few-ulp level for the
/// node counts used here (n <= 128).
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // exploit symmetry: compute the lower half on [-1, 1] and mirror
    for i in 0..n.div_ceil(2) {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (x + 1.0);
        nodes[n - 1 - i] = 0.5 * (1.0 - x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Odometer over a `d`-dimensional tensor grid with `n` nodes per axis.
///
/// Visits all `n^d` multi-indices in row-major order.
pub struct TensorGrid {
    nodes_per_axis: usize,
    index: Vec<usize>,
    done: bool,
}

impl TensorGrid {
    pub fn new(dimension: usize, nodes_per_axis: usize) -> Self {
        TensorGrid {
            nodes_per_axis,
            index: vec![0; dimension],
            done: dimension == 0 || nodes_per_axis == 0,
        }
    }
}

impl Iterator for TensorGrid {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.index.clone();
        for axis in (0..self.index.len()).rev() {
            self.index[axis] += 1;
            if self.index[axis] < self.nodes_per_axis {
                return Some(current);
            }
            self.index[axis] = 0;
        }
        self.done = true;
        Some(current)
    }
}
