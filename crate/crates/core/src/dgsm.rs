//! Derivative-based global sensitivity measures.
//!
//! All measures are weighted reductions of one shared set of gradient
//! samples: the absolute-derivative mean, the mean squared derivative, the
//! `x(1-x)/2`-weighted squared derivative, and the whole moment-weighted
//! curve `m -> w^(m)` reuse the same derivative values, so sweeping the
//! moment exponent costs no extra model evaluations.
//!
//! For models with normal inputs the cube points are mapped through the
//! inverse normal CDF before evaluation; derivatives are taken with respect
//! to the physical variables and no Jacobian factor of that map is applied.

use serde::{Deserialize, Serialize};

use crate::accum::KahanSum;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::qmc::{PointSet, SamplePlan};
use crate::variance::gradient_samples;

/// Moment-weighted derivative means on a grid of exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WCurve {
    /// Exponent grid, strictly positive.
    pub m_grid: Vec<f64>,
    /// `values[i][k]` is the weighted mean for variable `i` at `m_grid[k]`.
    pub values: Vec<Vec<f64>>,
}

/// Per-variable derivative-based measures from one sampling pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgsmSet {
    /// Mean absolute derivative (the integral generalization of the Morris
    /// elementary-effect measure). Named `morris_mu` to keep it apart from a
    /// normal input's mean.
    pub morris_mu: Vec<f64>,
    /// Mean squared derivative.
    pub nu: Vec<f64>,
    /// `x(1-x)/2`-weighted mean squared derivative; unit-cube models only.
    pub zeta: Option<Vec<f64>>,
    /// Moment-weighted derivative means; unit-cube models only.
    pub w_curve: Option<WCurve>,
    /// Plain derivative mean under the product normal measure; present only
    /// when every input is normal.
    pub w_normal: Option<Vec<f64>>,
    /// Number of gradient sample points.
    pub count: usize,
    /// Function-evaluation cost in the standard numerical-differentiation
    /// accounting, `N(d+1)`, regardless of whether the model supplied an
    /// analytic gradient.
    pub evaluations_used: usize,
}

/// Default exponent grid: 64 points log-spaced on [0.1, 100].
pub fn default_m_grid() -> Vec<f64> {
    log_spaced(0.1, 100.0, 64)
}

pub(crate) fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Estimate all derivative-based measures from one set of gradient samples.
///
/// `m_grid` exponents must be positive; an empty grid only disables the
/// `w`-curve. Plans wider than the model use their first `d` columns.
pub fn estimate_dgsm(model: &ModelSpec, plan: &SamplePlan, m_grid: &[f64]) -> Result<DgsmSet> {
    if let Some(bad) = m_grid.iter().find(|&&m| m.is_nan() || m <= 0.0) {
        return Err(Error::invalid(
            "m_grid",
            format!("exponents must be positive, got {bad}"),
        ));
    }
    let (block, grads) = gradient_samples(model, plan)?;
    dgsm_from_samples(model, &block, &grads, m_grid)
}

pub(crate) fn dgsm_from_samples(
    model: &ModelSpec,
    block: &PointSet,
    grads: &[f64],
    m_grid: &[f64],
) -> Result<DgsmSet> {
    let d = model.dimension();
    let n = block.len();
    debug_assert_eq!(grads.len(), n * d);
    let inv_n = 1.0 / n as f64;

    let uniform = model.is_uniform();
    let normal = model.is_normal();

    let mut morris_mu = vec![KahanSum::new(); d];
    let mut nu = vec![KahanSum::new(); d];
    let mut zeta = vec![KahanSum::new(); d];
    let mut w_plain = vec![KahanSum::new(); d];
    for (row, unit) in grads.chunks_exact(d).zip(block.rows()) {
        for i in 0..d {
            let g = row[i];
            morris_mu[i].add(g.abs());
            nu[i].add(g * g);
            if uniform {
                let x = unit[i];
                zeta[i].add(0.5 * x * (1.0 - x) * g * g);
            }
            w_plain[i].add(g);
        }
    }

    let w_curve = if uniform && !m_grid.is_empty() {
        let mut values = vec![vec![0.0; m_grid.len()]; d];
        for i in 0..d {
            let xs = block.column(i);
            let gs: Vec<f64> = grads.iter().skip(i).step_by(d).copied().collect();
            for (k, &m) in m_grid.iter().enumerate() {
                values[i][k] = weighted_derivative_mean(&xs, &gs, m);
            }
        }
        Some(WCurve {
            m_grid: m_grid.to_vec(),
            values,
        })
    } else {
        None
    };

    Ok(DgsmSet {
        morris_mu: morris_mu.iter().map(|a| a.value() * inv_n).collect(),
        nu: nu.iter().map(|a| a.value() * inv_n).collect(),
        zeta: uniform.then(|| zeta.iter().map(|a| a.value() * inv_n).collect()),
        w_curve,
        w_normal: normal.then(|| w_plain.iter().map(|a| a.value() * inv_n).collect()),
        count: n,
        evaluations_used: n * (d + 1),
    })
}

/// Mean of `x^m * g` over paired samples; `0^m` is taken as 0 for `m > 0`.
pub(crate) fn weighted_derivative_mean(xs: &[f64], gs: &[f64], m: f64) -> f64 {
    let mut acc = KahanSum::new();
    for (&x, &g) in xs.iter().zip(gs) {
        let w = if x > 0.0 { (m * x.ln()).exp() } else { 0.0 };
        acc.add(w * g);
    }
    acc.value() / xs.len() as f64
}
