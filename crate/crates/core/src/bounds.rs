//! Lower and upper bounds on total sensitivity indices assembled from
//! derivative-based measures, plus the report orchestration that keeps every
//! bound on one shared variance denominator.

use serde::{Deserialize, Serialize};

use crate::accum::{mean, KahanSum};
use crate::dgsm::{dgsm_from_samples, log_spaced, DgsmSet};
use crate::error::{Error, Result};
use crate::model::{evaluate_batch_substituted, gradient_batch, ModelSpec, Substitute};
use crate::optimize::maximize_log_grid;
use crate::qmc::{PointSet, SamplePlan, DEFAULT_SEED};
use crate::variance::{estimate_indices_from, PickFreezeSamples};

/// A variable whose mean squared derivative falls below `INERT_REL_TOL * D`
/// is reported inert; ratios with its measures are defined as their 0/0
/// limits instead of being divided out.
const INERT_REL_TOL: f64 = 1e-14;

/// Absolute tolerance for the moment-exponent search.
const M_STAR_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform01,
    Normal,
}

/// Everything the pipeline knows about one input variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBounds {
    /// First-order index estimate.
    pub s: f64,
    /// Total index estimate.
    pub s_tot: f64,
    /// Boundary-difference lower bound (unit-cube models).
    pub lb1: Option<f64>,
    /// Best moment-family lower bound (unit-cube models).
    pub lb2: Option<f64>,
    /// Maximizing moment exponent; absent when the family is flat zero.
    pub m_star: Option<f64>,
    /// max(LB1, LB2).
    pub lb_star: Option<f64>,
    /// Mean-squared-derivative upper bound (unit-cube models).
    pub ub1: Option<f64>,
    /// Weighted-derivative upper bound (unit-cube models).
    pub ub2: Option<f64>,
    /// Derivative-mean lower bound (normal models).
    pub lb_normal: Option<f64>,
    /// Mean-squared-derivative upper bound (normal models).
    pub ub_normal: Option<f64>,
    /// Derivative-range bounds when requested; heuristic when the range was
    /// taken from sample extremes.
    pub range_lower: Option<f64>,
    pub range_upper: Option<f64>,
    /// Mean squared derivative was numerically zero relative to `D`.
    pub inert: bool,
}

/// Function-evaluation ledger in the standard cost accounting: derivative
/// sets are priced at `N(d+1)` evaluations whether or not the model supplied
/// an analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationLedger {
    /// Lower-bound path: `N(3d+1)` (derivative set plus both boundary
    /// substitutions per variable).
    pub lower_bound_evals: usize,
    /// Upper-bound path: `N(d+1)` (the shared derivative set).
    pub upper_bound_evals: usize,
    /// Total-index path: `N(d+1)`.
    pub total_index_evals: usize,
    /// Extra pivot block used only by the first-order estimator: `N`.
    pub first_order_extra_evals: usize,
}

/// Full per-variable bound and index report on one shared denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub distribution: DistributionKind,
    pub variables: Vec<VariableBounds>,
    /// Shared total variance used in every ratio above.
    pub variance: f64,
    pub mean: f64,
    /// Points per block.
    pub count: usize,
    pub seed: u64,
    pub ledger: EvaluationLedger,
    /// True when `range_lower`/`range_upper` were derived from sample
    /// min/max of the derivative instead of user-supplied constants.
    pub range_is_empirical: bool,
}

/// Options for [`assemble_report`].
#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Points per block.
    pub count: usize,
    /// Seed recorded in the report and used to derive replicate shifts.
    pub seed: u64,
    /// Optional Cranley–Patterson rotation over all `2d` columns.
    pub shift: Option<Vec<f64>>,
    /// Search range for the moment exponent.
    pub m_range: (f64, f64),
    /// Coarse-grid resolution for the exponent search.
    pub m_grid_points: usize,
    /// Also report derivative-range bounds from the sample min/max of
    /// `|df/dx_i|`. The sample extremes under-cover the true range, so these
    /// are labelled heuristic in the report.
    pub empirical_range: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            count: 1 << 14,
            seed: DEFAULT_SEED,
            shift: None,
            m_range: (0.1, 100.0),
            m_grid_points: 64,
            empirical_range: false,
        }
    }
}

fn require_unit_cube(model: &ModelSpec) -> Result<()> {
    if !model.is_uniform() {
        return Err(Error::DistributionMismatch {
            required: "uniform01",
            actual: format!("{:?}", model.domain()),
        });
    }
    Ok(())
}

/// Samples shared by the lower-bound integrals of one plan.
struct LowerBoundSamples {
    block: PointSet,
    f_block: Vec<f64>,
    variance: f64,
    grads: Vec<f64>,
}

impl LowerBoundSamples {
    fn build(model: &ModelSpec, plan: &SamplePlan) -> Result<Self> {
        let d = model.dimension();
        if plan.dimension() < d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: plan.dimension(),
            });
        }
        let points = crate::qmc::sobol_points(plan)?;
        let block = if points.dimension() == d {
            points
        } else {
            points.columns(0, d)
        };
        let f_block = crate::model::evaluate_batch(model, &block)?;
        let f0 = mean(&f_block);
        let mut var_acc = KahanSum::new();
        for &v in &f_block {
            let dev = v - f0;
            var_acc.add(dev * dev);
        }
        let variance = var_acc.value() / f_block.len() as f64;
        if variance <= (f0 * f0).max(variance.abs()).max(1e-300) * 1e-13 {
            return Err(Error::ConstantModel { variance });
        }
        let grads = gradient_batch(model, &block)?;
        Ok(LowerBoundSamples {
            block,
            f_block,
            variance,
            grads,
        })
    }

    fn nu(&self, variable: usize) -> f64 {
        let d = self.block.dimension();
        let mut acc = KahanSum::new();
        for row in self.grads.chunks_exact(d) {
            acc.add(row[variable] * row[variable]);
        }
        acc.value() / self.f_block.len() as f64
    }

    fn boundary_values(&self, model: &ModelSpec, variable: usize, value: f64) -> Result<Vec<f64>> {
        evaluate_batch_substituted(
            model,
            &self.block,
            Some((variable, Substitute::Constant(value))),
        )
    }
}

fn lb1_from_integral(integral: f64, nu: f64, variance: f64) -> (f64, bool) {
    if nu < INERT_REL_TOL * variance {
        // 0/0 limit for a variable the model does not respond to
        return (0.0, true);
    }
    (integral * integral / (4.0 * nu * variance), false)
}

/// Boundary-difference lower bound per variable.
///
/// For each point the model is evaluated as-is and with coordinate `i`
/// pinned to 1 and to 0; together with the derivative set this is the
/// `N(3d+1)`-evaluation path. `variance` must come from the same pipeline
/// run that produces the other bounds.
pub fn lower_bound_one(model: &ModelSpec, plan: &SamplePlan, variance: f64) -> Result<Vec<f64>> {
    require_unit_cube(model)?;
    check_variance_arg(variance)?;
    let samples = LowerBoundSamples::build(model, plan)?;
    let d = model.dimension();
    let n = samples.f_block.len();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let f_hi = samples.boundary_values(model, i, 1.0)?;
        let f_lo = samples.boundary_values(model, i, 0.0)?;
        let mut acc = KahanSum::new();
        for k in 0..n {
            acc.add((f_hi[k] - f_lo[k]) * (f_hi[k] + f_lo[k] - 2.0 * samples.f_block[k]));
        }
        let integral = acc.value() / n as f64;
        out.push(lb1_from_integral(integral, samples.nu(i), variance).0);
    }
    Ok(out)
}

fn check_variance_arg(variance: f64) -> Result<()> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::ConstantModel { variance });
    }
    Ok(())
}

fn gamma_value(two_term_numerator: f64, m: f64, variance: f64) -> f64 {
    (2.0 * m + 1.0) * two_term_numerator * two_term_numerator / ((m + 1.0) * (m + 1.0) * variance)
}

/// The moment-family lower bound at one exponent, per variable.
pub fn gamma(model: &ModelSpec, plan: &SamplePlan, m: f64) -> Result<Vec<f64>> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::invalid("m", format!("must be positive, got {m}")));
    }
    require_unit_cube(model)?;
    let samples = LowerBoundSamples::build(model, plan)?;
    let d = model.dimension();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let eval = GammaEvaluator::build(model, &samples, i)?;
        out.push(eval.gamma(m));
    }
    Ok(out)
}

/// Result of the per-variable exponent search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaMaximum {
    /// Maximizing exponent; `None` when the whole family is zero.
    pub m_star: Option<f64>,
    /// The lower bound at the maximizer.
    pub lb2: f64,
}

/// Everything needed to evaluate `gamma(m)` for one variable from cached
/// samples; sweeping `m` costs no model evaluations.
struct GammaEvaluator {
    boundary_mean: f64,
    /// `ln x` per sample; `-inf` for `x = 0`, which makes `x^m = 0` fall out
    /// of the exponential naturally.
    ln_xs: Vec<f64>,
    gs: Vec<f64>,
    variance: f64,
}

impl GammaEvaluator {
    fn new(boundary_mean: f64, xs: &[f64], gs: Vec<f64>, variance: f64) -> Self {
        GammaEvaluator {
            boundary_mean,
            ln_xs: xs.iter().map(|&x| x.ln()).collect(),
            gs,
            variance,
        }
    }

    fn build(model: &ModelSpec, samples: &LowerBoundSamples, variable: usize) -> Result<Self> {
        let d = model.dimension();
        let f_hi = samples.boundary_values(model, variable, 1.0)?;
        let mut acc = KahanSum::new();
        for (hi, f) in f_hi.iter().zip(&samples.f_block) {
            acc.add(hi - f);
        }
        Ok(GammaEvaluator::new(
            acc.value() / samples.f_block.len() as f64,
            &samples.block.column(variable),
            samples
                .grads
                .iter()
                .skip(variable)
                .step_by(d)
                .copied()
                .collect(),
            samples.variance,
        ))
    }

    fn gamma(&self, m: f64) -> f64 {
        let mut acc = KahanSum::new();
        for (&ln_x, &g) in self.ln_xs.iter().zip(&self.gs) {
            acc.add(((m + 1.0) * ln_x).exp() * g);
        }
        let w = acc.value() / self.gs.len() as f64;
        gamma_value(self.boundary_mean - w, m, self.variance)
    }

    fn maximize(&self, m_range: (f64, f64), grid_points: usize) -> GammaMaximum {
        let (m_star, value) =
            maximize_log_grid(m_range.0, m_range.1, grid_points, M_STAR_TOL, |m| {
                self.gamma(m)
            });
        if value <= f64::MIN_POSITIVE {
            GammaMaximum {
                m_star: None,
                lb2: 0.0,
            }
        } else {
            GammaMaximum {
                m_star: Some(m_star),
                lb2: value,
            }
        }
    }
}

/// Locate the best exponent per variable by a coarse log-grid scan refined
/// with golden section; reuses cached samples, so the search itself performs
/// no model evaluations.
pub fn maximize_gamma(
    model: &ModelSpec,
    plan: &SamplePlan,
    m_range: (f64, f64),
) -> Result<Vec<GammaMaximum>> {
    validate_m_range(m_range)?;
    require_unit_cube(model)?;
    let samples = LowerBoundSamples::build(model, plan)?;
    let d = model.dimension();
    (0..d)
        .map(|i| Ok(GammaEvaluator::build(model, &samples, i)?.maximize(m_range, 64)))
        .collect()
}

fn validate_m_range(m_range: (f64, f64)) -> Result<()> {
    if !(m_range.0 > 0.0 && m_range.1 > m_range.0) {
        return Err(Error::invalid(
            "m_range",
            format!("need 0 < lo < hi, got {m_range:?}"),
        ));
    }
    Ok(())
}

/// Componentwise maximum of the two lower bounds.
pub fn lb_star(lb1: &[f64], lb2: &[f64]) -> Result<Vec<f64>> {
    if lb1.len() != lb2.len() {
        return Err(Error::DimensionMismatch {
            expected: lb1.len(),
            actual: lb2.len(),
        });
    }
    Ok(lb1.iter().zip(lb2).map(|(&a, &b)| a.max(b)).collect())
}

/// The two derivative-based upper bounds per variable:
/// `nu / (pi^2 D)` and `zeta / D`.
pub fn upper_bounds(dgsm: &DgsmSet, variance: f64) -> Result<Vec<(f64, f64)>> {
    check_variance_arg(variance)?;
    let zeta = dgsm.zeta.as_ref().ok_or(Error::DistributionMismatch {
        required: "uniform01",
        actual: "measures were sampled under a non-uniform domain".into(),
    })?;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(dgsm
        .nu
        .iter()
        .zip(zeta)
        .map(|(&nu, &zeta)| (nu / (pi2 * variance), zeta / variance))
        .collect())
}

/// Distribution context for the derivative-range bounds.
pub enum RangeDistribution {
    Uniform01,
    Normal { sigmas: Vec<f64> },
}

/// Bounds from a known derivative range `c <= |df/dx_i| <= C`:
/// `(c^2/(12D), C^2/(12D))` on the unit cube, `(sigma_i^2 c^2/D,
/// sigma_i^2 C^2/D)` for normal inputs.
pub fn range_bounds(
    lower: &[f64],
    upper: &[f64],
    variance: f64,
    distribution: &RangeDistribution,
) -> Result<Vec<(f64, f64)>> {
    check_variance_arg(variance)?;
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            actual: upper.len(),
        });
    }
    for (i, (&c, &big_c)) in lower.iter().zip(upper).enumerate() {
        if !(0.0 <= c && c <= big_c) {
            return Err(Error::invalid(
                "range",
                format!("need 0 <= c <= C, variable {i} has c={c}, C={big_c}"),
            ));
        }
    }
    let scale = |i: usize| -> f64 {
        match distribution {
            RangeDistribution::Uniform01 => 1.0 / (12.0 * variance),
            RangeDistribution::Normal { sigmas } => sigmas[i] * sigmas[i] / variance,
        }
    };
    if let RangeDistribution::Normal { sigmas } = distribution {
        if sigmas.len() != lower.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: sigmas.len(),
            });
        }
    }
    Ok(lower
        .iter()
        .zip(upper)
        .enumerate()
        .map(|(i, (&c, &big_c))| (c * c * scale(i), big_c * big_c * scale(i)))
        .collect())
}

/// Lower and upper bounds for fully normal inputs:
/// `sigma_i^2 w_i^2 / D <= S_i^tot <= sigma_i^2 nu_i / D`.
pub fn normal_bounds(dgsm: &DgsmSet, sigmas: &[f64], variance: f64) -> Result<Vec<(f64, f64)>> {
    check_variance_arg(variance)?;
    let w = dgsm.w_normal.as_ref().ok_or(Error::DistributionMismatch {
        required: "normal",
        actual: "measures were sampled under a non-normal domain".into(),
    })?;
    if sigmas.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: sigmas.len(),
        });
    }
    Ok(w.iter()
        .zip(&dgsm.nu)
        .zip(sigmas)
        .map(|((&w, &nu), &sigma)| {
            let s2 = sigma * sigma;
            (s2 * w * w / variance, s2 * nu / variance)
        })
        .collect())
}

/// Run the whole pipeline on coordinated point sets.
///
/// One `2d`-column sequence supplies the primary block A (first `d` columns)
/// and pivot block B. The variance estimated from `f(A)` is the denominator
/// of every index and bound in the report, and the gradient set sampled at A
/// feeds all derivative-based measures.
pub fn assemble_report(model: &ModelSpec, options: &ReportOptions) -> Result<BoundsReport> {
    validate_m_range(options.m_range)?;
    let d = model.dimension();
    let normal = model.is_normal();
    if !model.is_uniform() && !normal {
        return Err(Error::DistributionMismatch {
            required: "uniform01 or normal (all coordinates alike)",
            actual: format!("{:?}", model.domain()),
        });
    }
    let mut plan = SamplePlan::new(2 * d, options.count)?.with_seed(options.seed);
    if let Some(shift) = &options.shift {
        plan = plan.with_shift(shift.clone())?;
    }

    let samples = PickFreezeSamples::build(model, &plan)?;
    let indices = estimate_indices_from(model, &samples)?;
    let n = samples.f_a.len();
    let variance = samples.variance;

    let grads = gradient_batch(model, &samples.a)?;
    let m_grid = log_spaced(options.m_range.0, options.m_range.1, options.m_grid_points);
    let dgsm = dgsm_from_samples(model, &samples.a, &grads, &m_grid)?;

    let empirical = options.empirical_range.then(|| {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![0.0f64; d];
        for row in grads.chunks_exact(d) {
            for i in 0..d {
                let g = row[i].abs();
                lo[i] = lo[i].min(g);
                hi[i] = hi[i].max(g);
            }
        }
        (lo, hi)
    });

    let mut variables = Vec::with_capacity(d);
    if normal {
        let sigmas = model.sigmas()?;
        let nb = normal_bounds(&dgsm, &sigmas, variance)?;
        for i in 0..d {
            let inert = dgsm.nu[i] < INERT_REL_TOL * variance;
            let (range_lower, range_upper) = match &empirical {
                Some((lo, hi)) => {
                    let r = range_bounds(
                        &lo[i..=i],
                        &hi[i..=i],
                        variance,
                        &RangeDistribution::Normal {
                            sigmas: sigmas[i..=i].to_vec(),
                        },
                    )?[0];
                    (Some(r.0), Some(r.1))
                }
                None => (None, None),
            };
            variables.push(VariableBounds {
                s: indices.first_order[i],
                s_tot: indices.total[i],
                lb1: None,
                lb2: None,
                m_star: None,
                lb_star: None,
                ub1: None,
                ub2: None,
                lb_normal: Some(nb[i].0),
                ub_normal: Some(nb[i].1),
                range_lower,
                range_upper,
                inert,
            });
        }
    } else {
        let ub = upper_bounds(&dgsm, variance)?;
        let lb_samples = LowerBoundSamples {
            block: samples.a.clone(),
            f_block: samples.f_a.clone(),
            variance,
            grads,
        };
        for i in 0..d {
            let f_hi = lb_samples.boundary_values(model, i, 1.0)?;
            let f_lo = lb_samples.boundary_values(model, i, 0.0)?;
            let mut lb1_acc = KahanSum::new();
            let mut boundary_acc = KahanSum::new();
            for k in 0..n {
                lb1_acc
                    .add((f_hi[k] - f_lo[k]) * (f_hi[k] + f_lo[k] - 2.0 * lb_samples.f_block[k]));
                boundary_acc.add(f_hi[k] - lb_samples.f_block[k]);
            }
            let (lb1, inert) = lb1_from_integral(lb1_acc.value() / n as f64, dgsm.nu[i], variance);
            let evaluator = GammaEvaluator::new(
                boundary_acc.value() / n as f64,
                &lb_samples.block.column(i),
                lb_samples
                    .grads
                    .iter()
                    .skip(i)
                    .step_by(d)
                    .copied()
                    .collect(),
                variance,
            );
            let best = evaluator.maximize(options.m_range, options.m_grid_points);
            let (range_lower, range_upper) = match &empirical {
                Some((lo, hi)) => {
                    let r = range_bounds(
                        &lo[i..=i],
                        &hi[i..=i],
                        variance,
                        &RangeDistribution::Uniform01,
                    )?[0];
                    (Some(r.0), Some(r.1))
                }
                None => (None, None),
            };
            variables.push(VariableBounds {
                s: indices.first_order[i],
                s_tot: indices.total[i],
                lb1: Some(lb1),
                lb2: Some(best.lb2),
                m_star: best.m_star,
                lb_star: Some(lb1.max(best.lb2)),
                ub1: Some(ub[i].0),
                ub2: Some(ub[i].1),
                lb_normal: None,
                ub_normal: None,
                range_lower,
                range_upper,
                inert,
            });
        }
    }

    let derivative_set = n * (d + 1);
    Ok(BoundsReport {
        distribution: if normal {
            DistributionKind::Normal
        } else {
            DistributionKind::Uniform01
        },
        variables,
        variance,
        mean: samples.mean,
        count: n,
        seed: options.seed,
        ledger: EvaluationLedger {
            lower_bound_evals: if normal {
                derivative_set
            } else {
                derivative_set + 2 * n * d
            },
            upper_bound_evals: derivative_set,
            total_index_evals: derivative_set,
            first_order_extra_evals: n,
        },
        range_is_empirical: options.empirical_range,
    })
}

/// Quantities the convergence benchmark can track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    FirstOrder,
    Total,
    Lb1,
    Lb2,
    Ub1,
    Ub2,
}

impl Quantity {
    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "s" | "first-order" | "first_order" => Ok(Quantity::FirstOrder),
            "s-tot" | "stot" | "s_tot" | "total" => Ok(Quantity::Total),
            "lb1" => Ok(Quantity::Lb1),
            "lb2" => Ok(Quantity::Lb2),
            "ub1" => Ok(Quantity::Ub1),
            "ub2" => Ok(Quantity::Ub2),
            other => Err(Error::invalid(
                "quantity",
                format!("unknown quantity {other:?} (expected s, s-tot, lb1, lb2, ub1 or ub2)"),
            )),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Quantity::FirstOrder => "s",
            Quantity::Total => "s_tot",
            Quantity::Lb1 => "lb1",
            Quantity::Lb2 => "lb2",
            Quantity::Ub1 => "ub1",
            Quantity::Ub2 => "ub2",
        }
    }
}

/// One quantity for one variable from one plan, evaluating only the blocks
/// that quantity needs. Used by the convergence benchmark where a full
/// report per replicate would be wasted work.
pub(crate) fn single_quantity(
    model: &ModelSpec,
    plan: &SamplePlan,
    quantity: Quantity,
    variable: usize,
    m_range: (f64, f64),
) -> Result<f64> {
    let d = model.dimension();
    if variable >= d {
        return Err(Error::invalid(
            "variable",
            format!("index {variable} out of range for dimension {d}"),
        ));
    }
    let samples = PickFreezeSamples::build(model, plan)?;
    let n = samples.f_a.len();
    let inv_n = 1.0 / n as f64;
    let variance = samples.variance;
    match quantity {
        Quantity::FirstOrder | Quantity::Total => {
            let f_mixed = evaluate_batch_substituted(
                model,
                &samples.a,
                Some((variable, Substitute::Column(&samples.b))),
            )?;
            let mut acc = KahanSum::new();
            if quantity == Quantity::Total {
                for k in 0..n {
                    let diff = samples.f_a[k] - f_mixed[k];
                    acc.add(diff * diff);
                }
                Ok(acc.value() * inv_n / (2.0 * variance))
            } else {
                for k in 0..n {
                    acc.add(samples.f_b[k] * (f_mixed[k] - samples.f_a[k]));
                }
                Ok(acc.value() * inv_n / variance)
            }
        }
        Quantity::Ub1 | Quantity::Ub2 => {
            let grads = gradient_batch(model, &samples.a)?;
            let mut acc = KahanSum::new();
            for (row, unit) in grads.chunks_exact(d).zip(samples.a.rows()) {
                let g2 = row[variable] * row[variable];
                match quantity {
                    Quantity::Ub1 => acc.add(g2),
                    _ => acc.add(0.5 * unit[variable] * (1.0 - unit[variable]) * g2),
                }
            }
            let measure = acc.value() * inv_n;
            match quantity {
                Quantity::Ub1 => Ok(measure / (std::f64::consts::PI.powi(2) * variance)),
                _ => Ok(measure / variance),
            }
        }
        Quantity::Lb1 | Quantity::Lb2 => {
            require_unit_cube(model)?;
            let grads = gradient_batch(model, &samples.a)?;
            let lb = LowerBoundSamples {
                block: samples.a.clone(),
                f_block: samples.f_a.clone(),
                variance,
                grads,
            };
            let f_hi = lb.boundary_values(model, variable, 1.0)?;
            if quantity == Quantity::Lb1 {
                let f_lo = lb.boundary_values(model, variable, 0.0)?;
                let mut acc = KahanSum::new();
                for k in 0..n {
                    acc.add((f_hi[k] - f_lo[k]) * (f_hi[k] + f_lo[k] - 2.0 * lb.f_block[k]));
                }
                Ok(lb1_from_integral(acc.value() * inv_n, lb.nu(variable), variance).0)
            } else {
                let mut acc = KahanSum::new();
                for k in 0..n {
                    acc.add(f_hi[k] - lb.f_block[k]);
                }
                let evaluator = GammaEvaluator::new(
                    acc.value() * inv_n,
                    &lb.block.column(variable),
                    lb.grads.iter().skip(variable).step_by(d).copied().collect(),
                    variance,
                );
                Ok(evaluator.maximize(m_range, 64).lb2)
            }
        }
    }
}
