//! Total variance and Sobol' sensitivity indices.
//!
//! The pick-freeze estimators consume a `2d`-column point set split into two
//! `d`-column blocks A and B: totals use Jansen's squared-difference form,
//! first-order indices the B-pivot form. A tensor-product Gauss–Legendre
//! oracle provides brute-force reference values for small dimensions.

use serde::{Deserialize, Serialize};

use crate::accum::{mean, KahanSum};
use crate::error::{Error, Result};
use crate::model::{
    evaluate_batch, evaluate_batch_substituted, gradient_batch, ModelSpec, Substitute,
};
use crate::qmc::{sobol_points, PointSet, SamplePlan};
use crate::quadrature::{gauss_legendre_unit, TensorGrid};

/// Relative threshold below which an estimated variance is treated as zero.
const CONSTANT_MODEL_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// Estimated mean of the model output.
    pub mean: f64,
    /// Estimated total variance `D`.
    pub variance: f64,
    /// Number of sample points.
    pub count: usize,
    /// Model evaluations spent.
    pub evaluations_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    /// First-order indices `S_i`.
    pub first_order: Vec<f64>,
    /// Total indices `S_i^tot`.
    pub total: Vec<f64>,
    /// Shared variance `D` used as the denominator.
    pub variance: f64,
    /// Estimated mean.
    pub mean: f64,
    /// Number of sample points per block.
    pub count: usize,
    /// Model evaluations spent: `N(d+1)` for the totals path plus the extra
    /// `N`-evaluation pivot block for the first-order indices.
    pub evaluations_used: usize,
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let f0 = mean(values);
    let mut acc = KahanSum::new();
    for &v in values {
        let d = v - f0;
        acc.add(d * d);
    }
    (f0, acc.value() / values.len() as f64)
}

fn check_variance(f0: f64, variance: f64) -> Result<()> {
    let scale = (f0 * f0).max(variance.abs()).max(1e-300);
    if variance <= scale * CONSTANT_MODEL_REL_TOL {
        return Err(Error::ConstantModel { variance });
    }
    Ok(())
}

/// Estimate the output mean and total variance from one point set.
///
/// Both moments come from the same points. A plan wider than the model (for
/// example the `2d`-column analysis plan) is allowed; only the first `d`
/// columns are used.
pub fn estimate_variance(model: &ModelSpec, plan: &SamplePlan) -> Result<VarianceEstimate> {
    let d = model.dimension();
    if plan.dimension() < d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: plan.dimension(),
        });
    }
    let points = sobol_points(plan)?;
    let block = if points.dimension() == d {
        points
    } else {
        points.columns(0, d)
    };
    let values = evaluate_batch(model, &block)?;
    let (f0, variance) = mean_and_variance(&values);
    check_variance(f0, variance)?;
    Ok(VarianceEstimate {
        mean: f0,
        variance,
        count: values.len(),
        evaluations_used: values.len(),
    })
}

/// Blocks and function values shared by the index estimators.
pub(crate) struct PickFreezeSamples {
    pub a: PointSet,
    pub b: PointSet,
    pub f_a: Vec<f64>,
    pub f_b: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl PickFreezeSamples {
    pub fn build(model: &ModelSpec, plan: &SamplePlan) -> Result<Self> {
        let d = model.dimension();
        if plan.dimension() != 2 * d {
            return Err(Error::DimensionMismatch {
                expected: 2 * d,
                actual: plan.dimension(),
            });
        }
        let joint = sobol_points(plan)?;
        let a = joint.columns(0, d);
        let b = joint.columns(d, d);
        let f_a = evaluate_batch(model, &a)?;
        let f_b = evaluate_batch(model, &b)?;
        let (mean, variance) = mean_and_variance(&f_a);
        check_variance(mean, variance)?;
        Ok(PickFreezeSamples {
            a,
            b,
            f_a,
            f_b,
            mean,
            variance,
        })
    }
}

/// Estimate first-order and total sensitivity indices.
///
/// The plan must carry `2d` columns; the first `d` form block A, the rest
/// block B. For each variable the model is re-evaluated on A with that
/// coordinate taken from B, giving the `N(d+1)` totals cost plus one extra
/// `N`-evaluation block for the first-order pivot.
pub fn estimate_indices(model: &ModelSpec, plan: &SamplePlan) -> Result<IndexEstimate> {
    let samples = PickFreezeSamples::build(model, plan)?;
    estimate_indices_from(model, &samples)
}

pub(crate) fn estimate_indices_from(
    model: &ModelSpec,
    samples: &PickFreezeSamples,
) -> Result<IndexEstimate> {
    let d = model.dimension();
    let n = samples.f_a.len();
    let inv_n = 1.0 / n as f64;
    let mut first_order = Vec::with_capacity(d);
    let mut total = Vec::with_capacity(d);
    for i in 0..d {
        let f_mixed = evaluate_batch_substituted(
            model,
            &samples.a,
            Some((i, Substitute::Column(&samples.b))),
        )?;
        let mut jansen = KahanSum::new();
        let mut pivot = KahanSum::new();
        for k in 0..n {
            let diff = samples.f_a[k] - f_mixed[k];
            jansen.add(diff * diff);
            pivot.add(samples.f_b[k] * (f_mixed[k] - samples.f_a[k]));
        }
        total.push(jansen.value() * inv_n / (2.0 * samples.variance));
        first_order.push(pivot.value() * inv_n / samples.variance);
    }
    Ok(IndexEstimate {
        first_order,
        total,
        variance: samples.variance,
        mean: samples.mean,
        count: n,
        evaluations_used: n * (d + 1) + n,
    })
}

/// Brute-force reference values from tensor-product Gauss–Legendre
/// quadrature of the defining integrals. Limited to `d <= 4`.
///
/// The oracle runs twice, at `nodes_per_axis` and at half that count, and
/// refuses to answer when the two runs disagree, which catches models that
/// are not smooth enough for the rule.
pub fn oracle_indices(model: &ModelSpec, nodes_per_axis: usize) -> Result<IndexEstimate> {
    let d = model.dimension();
    if d > 4 {
        return Err(Error::OracleDimension {
            requested: d,
            max: 4,
        });
    }
    if nodes_per_axis < 8 {
        return Err(Error::invalid("nodes_per_axis", "need at least 8 nodes"));
    }
    let coarse = oracle_indices_single(model, nodes_per_axis / 2)?;
    let fine = oracle_indices_single(model, nodes_per_axis)?;
    let d_delta = (fine.variance - coarse.variance).abs() / fine.variance.abs().max(1e-300);
    if d_delta > 1e-6 {
        return Err(Error::OracleAccuracy {
            quantity: "variance",
            delta: d_delta,
        });
    }
    for i in 0..d {
        let delta = (fine.total[i] - coarse.total[i])
            .abs()
            .max((fine.first_order[i] - coarse.first_order[i]).abs());
        if delta > 1e-6 {
            return Err(Error::OracleAccuracy {
                quantity: "sensitivity index",
                delta,
            });
        }
    }
    Ok(IndexEstimate {
        evaluations_used: fine.evaluations_used + coarse.evaluations_used,
        ..fine
    })
}

fn grid_size_guard(d: usize, n: usize) -> Result<usize> {
    let total = n.checked_pow(d as u32).filter(|&t| t <= 20_000_000);
    total.ok_or_else(|| Error::invalid("nodes_per_axis", format!("{n}^{d} grid is too large")))
}

fn oracle_indices_single(model: &ModelSpec, n: usize) -> Result<IndexEstimate> {
    let d = model.dimension();
    let total_cells = grid_size_guard(d, n)?;
    let (nodes, weights) = gauss_legendre_unit(n);

    // evaluate f on the full grid (row-major, last axis fastest)
    let mut f = Vec::with_capacity(total_cells);
    let mut point = vec![0.0; d];
    for idx in TensorGrid::new(d, n) {
        for (j, &k) in idx.iter().enumerate() {
            point[j] = nodes[k];
        }
        f.push(model.evaluate(&point)?);
    }

    let weight_of = |idx: &[usize]| -> f64 { idx.iter().map(|&k| weights[k]).product() };

    let mut f0_acc = KahanSum::new();
    let mut sq_acc = KahanSum::new();
    for (idx, &fv) in TensorGrid::new(d, n).zip(&f) {
        let w = weight_of(&idx);
        f0_acc.add(w * fv);
        sq_acc.add(w * fv * fv);
    }
    let f0 = f0_acc.value();
    let variance = sq_acc.value() - f0 * f0;
    check_variance(f0, variance)?;

    let mut first_order = Vec::with_capacity(d);
    let mut total = Vec::with_capacity(d);
    for i in 0..d {
        // stride of axis i in the row-major layout
        let stride_i = n.pow((d - 1 - i) as u32);
        let cells_rest = total_cells / n;

        // conditional mean over x_i (a function of the remaining axes) and
        // marginal mean over everything but x_i
        let mut cond = vec![0.0; cells_rest];
        let mut marginal = vec![KahanSum::new(); n];
        for (flat, idx) in TensorGrid::new(d, n).enumerate() {
            let ki = idx[i];
            let rest = flat / (stride_i * n) * stride_i + flat % stride_i;
            cond[rest] += weights[ki] * f[flat];
            let w_rest: f64 = idx
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &k)| weights[k])
                .product();
            marginal[ki].add(w_rest * f[flat]);
        }

        let mut tot_acc = KahanSum::new();
        for (flat, idx) in TensorGrid::new(d, n).enumerate() {
            let rest = flat / (stride_i * n) * stride_i + flat % stride_i;
            let u = f[flat] - cond[rest];
            tot_acc.add(weight_of(&idx) * u * u);
        }
        total.push(tot_acc.value() / variance);

        let mut first_acc = KahanSum::new();
        for k in 0..n {
            let dev = marginal[k].value() - f0;
            first_acc.add(weights[k] * dev * dev);
        }
        first_order.push(first_acc.value() / variance);
    }

    Ok(IndexEstimate {
        first_order,
        total,
        variance,
        mean: f0,
        count: total_cells,
        evaluations_used: total_cells,
    })
}

/// Derivative-based reference values by the same tensor rule: mean square
/// derivative and its `x(1-x)/2`-weighted variant per variable.
pub struct OracleDgsm {
    pub nu: Vec<f64>,
    pub zeta: Vec<f64>,
    pub evaluations_used: usize,
}

pub fn oracle_dgsm(model: &ModelSpec, nodes_per_axis: usize) -> Result<OracleDgsm> {
    let d = model.dimension();
    if d > 4 {
        return Err(Error::OracleDimension {
            requested: d,
            max: 4,
        });
    }
    let coarse = oracle_dgsm_single(model, nodes_per_axis / 2)?;
    let fine = oracle_dgsm_single(model, nodes_per_axis)?;
    for i in 0..d {
        let delta = (fine.nu[i] - coarse.nu[i]).abs() / fine.nu[i].abs().max(1.0);
        if delta > 1e-6 {
            return Err(Error::OracleAccuracy {
                quantity: "mean squared derivative",
                delta,
            });
        }
    }
    Ok(OracleDgsm {
        evaluations_used: fine.evaluations_used + coarse.evaluations_used,
        ..fine
    })
}

fn oracle_dgsm_single(model: &ModelSpec, n: usize) -> Result<OracleDgsm> {
    let d = model.dimension();
    let total_cells = grid_size_guard(d, n)?;
    let (nodes, weights) = gauss_legendre_unit(n);
    let mut nu = vec![KahanSum::new(); d];
    let mut zeta = vec![KahanSum::new(); d];
    let mut point = vec![0.0; d];
    for idx in TensorGrid::new(d, n) {
        for (j, &k) in idx.iter().enumerate() {
            point[j] = nodes[k];
        }
        let w: f64 = idx.iter().map(|&k| weights[k]).product();
        let grad = model.gradient(&point)?;
        for i in 0..d {
            let g2 = grad[i] * grad[i];
            nu[i].add(w * g2);
            zeta[i].add(w * 0.5 * point[i] * (1.0 - point[i]) * g2);
        }
    }
    Ok(OracleDgsm {
        nu: nu.iter().map(KahanSum::value).collect(),
        zeta: zeta.iter().map(KahanSum::value).collect(),
        evaluations_used: total_cells,
    })
}

/// Gradient samples drawn on the A block of an analysis plan; shared by the
/// derivative-based measures and the lower-bound integrals.
pub(crate) fn gradient_samples(
    model: &ModelSpec,
    plan: &SamplePlan,
) -> Result<(PointSet, Vec<f64>)> {
    let d = model.dimension();
    if plan.dimension() < d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: plan.dimension(),
        });
    }
    let points = sobol_points(plan)?;
    let block = if points.dimension() == d {
        points
    } else {
        points.columns(0, d)
    };
    let grads = gradient_batch(model, &block)?;
    Ok((block, grads))
}
