//! Replicated RMSE convergence measurement and power-law trend fitting.
//!
//! Each row of a [`ConvergenceTable`] is the relative root-mean-square error
//! of one estimated quantity against its closed-form reference, averaged
//! over `K` randomized-shift replicates at one point count.

use serde::{Deserialize, Serialize};

pub use crate::bounds::Quantity;
use crate::bounds::{single_quantity, ReportOptions};
use crate::error::{Error, Result};
use crate::qmc::replicate_plans;
use crate::testfns::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub rmse: f64,
}

/// Least-squares power-law fit `rmse ~ coefficient * N^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
    /// Number of leading (smallest-N) rows dropped for fit quality.
    pub excluded_smallest: usize,
    /// Number of zero-error rows that had to be left out of the log fit.
    pub excluded_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub quantity: Quantity,
    /// Zero-based variable index.
    pub variable: usize,
    pub rows: Vec<ConvergenceRow>,
    pub replicates: usize,
    pub seed: u64,
    /// The closed-form reference the errors are measured against.
    pub reference: f64,
    /// True when the reference is zero and errors are absolute instead of
    /// relative.
    pub absolute_errors: bool,
    pub fit: Option<TrendFit>,
}

/// Measure the relative RMSE of one quantity against the function's
/// closed-form reference over a grid of point counts.
///
/// Replicate `k` uses the shift derived from `(seed, k)`, identical across
/// all point counts, so the whole table is deterministic given the seed.
/// A zero reference value switches the table to absolute errors.
pub fn rmse_convergence(
    function: &TestFunction,
    quantity: Quantity,
    variable: usize,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    if replicates < 2 {
        return Err(Error::invalid(
            "k",
            format!("need at least 2 replicates, got {replicates}"),
        ));
    }
    let d = function.dimension();
    if variable >= d {
        return Err(Error::invalid(
            "variable",
            format!("index {variable} out of range for dimension {d}"),
        ));
    }
    if n_grid.is_empty() {
        return Err(Error::invalid("n_grid", "need at least one point count"));
    }
    let forms = function
        .analytic
        .as_ref()
        .ok_or_else(|| Error::MissingReference {
            function: function.name.clone(),
            quantity: quantity.label().into(),
        })?;
    let reference = match quantity {
        Quantity::FirstOrder => forms.first_order()[variable],
        Quantity::Total => forms.total()[variable],
        Quantity::Lb1 => forms.lb1()[variable],
        Quantity::Lb2 => forms.lb2(variable),
        Quantity::Ub1 => forms.ub1()[variable],
        Quantity::Ub2 => forms.ub2()[variable],
    };
    let absolute_errors = reference == 0.0;
    let m_range = ReportOptions::default().m_range;

    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();

    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        let plans = replicate_plans(2 * d, n, replicates, seed)?;
        let mut sq_sum = 0.0;
        for plan in &plans {
            let estimate = single_quantity(&function.model, plan, quantity, variable, m_range)?;
            let err = if absolute_errors {
                estimate - reference
            } else {
                (estimate - reference) / reference
            };
            sq_sum += err * err;
        }
        rows.push(ConvergenceRow {
            n,
            rmse: (sq_sum / replicates as f64).sqrt(),
        });
    }

    let fit = if rows.len() >= 3 {
        fit_trend(&rows).ok()
    } else {
        None
    };
    Ok(ConvergenceTable {
        quantity,
        variable,
        rows,
        replicates,
        seed,
        reference,
        absolute_errors,
        fit,
    })
}

/// Fit `rmse = c * N^(-alpha)` by least squares on `(log N, log rmse)`.
///
/// Zero-error rows cannot enter the log fit and are skipped (counted in the
/// result). When the fit quality is poor (`R^2 < 0.9`) the smallest-N row is
/// dropped once, mirroring the usual treatment of preasymptotic points.
pub fn fit_trend(rows: &[ConvergenceRow]) -> Result<TrendFit> {
    let usable: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.rmse > 0.0).collect();
    let excluded_zero = rows.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::invalid(
            "rows",
            format!("need at least 3 nonzero rows, got {}", usable.len()),
        ));
    }
    let (fit, r_sq) = least_squares_loglog(&usable);
    if r_sq < 0.9 && usable.len() > 3 {
        let (refit, r_sq2) = least_squares_loglog(&usable[1..]);
        return Ok(TrendFit {
            coefficient: refit.0,
            exponent: refit.1,
            r_squared: r_sq2,
            excluded_smallest: 1,
            excluded_zero,
        });
    }
    Ok(TrendFit {
        coefficient: fit.0,
        exponent: fit.1,
        r_squared: r_sq,
        excluded_smallest: 0,
        excluded_zero,
    })
}

fn least_squares_loglog(rows: &[&ConvergenceRow]) -> ((f64, f64), f64) {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.rmse.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    // rmse = exp(intercept) * N^slope, so the decay exponent is -slope
    ((intercept.exp(), -slope), r_squared)
}
