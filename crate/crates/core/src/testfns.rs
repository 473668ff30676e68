//! Benchmark function registry: the multiplicative g-function, a
//! linear-in-one-variable family, and the six-dimensional Hartmann function,
//! each with analytic gradients and (where they exist) closed-form reference
//! values for the whole bound pipeline.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::optimize::maximize_log_grid;

const PI_SQ: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Closed-form reference values for a registry function.
///
/// `gamma` and `w` take the variable index and the moment exponent; the
/// provided methods derive the remaining bound quantities from the same
/// closed forms, so every derived value is internally consistent with
/// `variance()` by construction.
pub trait ClosedForms: Send + Sync {
    fn variance(&self) -> f64;
    fn first_order(&self) -> Vec<f64>;
    fn total(&self) -> Vec<f64>;
    /// Mean squared derivative per variable.
    fn nu(&self) -> Vec<f64>;
    /// `x(1-x)/2`-weighted mean squared derivative per variable.
    fn zeta(&self) -> Vec<f64>;
    /// Boundary-difference lower bound per variable.
    fn lb1(&self) -> Vec<f64>;
    /// Moment-family lower bound at exponent `m`.
    fn gamma(&self, variable: usize, m: f64) -> f64;
    /// Moment-weighted derivative mean at exponent `m`.
    fn w(&self, variable: usize, m: f64) -> f64;

    /// Exponent maximizing `gamma`; `None` when the family is identically 0.
    fn m_star(&self, variable: usize) -> Option<f64> {
        let (m, value) = maximize_log_grid(0.1, 100.0, 256, 1e-6, |m| self.gamma(variable, m));
        (value > f64::MIN_POSITIVE).then_some(m)
    }

    fn lb2(&self, variable: usize) -> f64 {
        match self.m_star(variable) {
            Some(m) => self.gamma(variable, m),
            None => 0.0,
        }
    }

    fn lb_star(&self) -> Vec<f64> {
        self.lb1()
            .iter()
            .enumerate()
            .map(|(i, &lb1)| lb1.max(self.lb2(i)))
            .collect()
    }

    fn ub1(&self) -> Vec<f64> {
        let d = self.variance();
        self.nu().iter().map(|nu| nu / (PI_SQ * d)).collect()
    }

    fn ub2(&self) -> Vec<f64> {
        let d = self.variance();
        self.zeta().iter().map(|zeta| zeta / d).collect()
    }
}

/// A named model with parameters and optional closed-form references.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub model: ModelSpec,
    pub params: Value,
    pub analytic: Option<Arc<dyn ClosedForms>>,
}

impl TestFunction {
    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }
}

// ---------------------------------------------------------------------------
// g-function
// ---------------------------------------------------------------------------

struct GFunctionForms {
    a: Vec<f64>,
}

impl GFunctionForms {
    /// `1 + (1/3) / (1 + a_j)^2`, which is both `E[g_j^2]` and the per-factor
    /// variance contribution.
    fn factor(&self, j: usize) -> f64 {
        1.0 + (1.0 / 3.0) / (1.0 + self.a[j]).powi(2)
    }

    fn product_except(&self, i: usize) -> f64 {
        (0..self.a.len())
            .filter(|&j| j != i)
            .map(|j| self.factor(j))
            .product()
    }
}

impl ClosedForms for GFunctionForms {
    fn variance(&self) -> f64 {
        (0..self.a.len()).map(|j| self.factor(j)).product::<f64>() - 1.0
    }

    fn first_order(&self) -> Vec<f64> {
        let d = self.variance();
        self.a
            .iter()
            .map(|a| (1.0 / 3.0) / ((1.0 + a).powi(2) * d))
            .collect()
    }

    fn total(&self) -> Vec<f64> {
        let d = self.variance();
        (0..self.a.len())
            .map(|i| (1.0 / 3.0) / (1.0 + self.a[i]).powi(2) * self.product_except(i) / d)
            .collect()
    }

    fn nu(&self) -> Vec<f64> {
        (0..self.a.len())
            .map(|i| 16.0 / (1.0 + self.a[i]).powi(2) * self.product_except(i))
            .collect()
    }

    fn zeta(&self) -> Vec<f64> {
        // the squared derivative does not depend on x_i, so the weight
        // integrates to 1/12 and zeta_i = nu_i / 12... with the 1/2 already
        // inside: (1/2)(1/6) * 16 = 4/3 per unit product
        (0..self.a.len())
            .map(|i| (4.0 / 3.0) / (1.0 + self.a[i]).powi(2) * self.product_except(i))
            .collect()
    }

    fn lb1(&self) -> Vec<f64> {
        // g_i(0) = g_i(1), so the boundary difference vanishes identically
        vec![0.0; self.a.len()]
    }

    fn gamma(&self, variable: usize, m: f64) -> f64 {
        let shape = 1.0 - 4.0 * (1.0 - 0.5f64.powf(m + 1.0)) / (m + 2.0);
        (2.0 * m + 1.0) * shape * shape
            / ((1.0 + self.a[variable]).powi(2) * (m + 1.0).powi(2) * self.variance())
    }

    fn w(&self, variable: usize, m: f64) -> f64 {
        4.0 * (1.0 - 0.5f64.powf(m)) / ((1.0 + self.a[variable]) * (m + 1.0))
    }
}

/// The multiplicative benchmark `prod_i (|4 x_i - 2| + a_i) / (1 + a_i)`.
///
/// The derivative sign at the kink `x_i = 1/2` is fixed to `+1`; the kink is
/// a measure-zero set, but deterministic point sets can land on it.
pub fn make_g_function(a: &[f64]) -> Result<TestFunction> {
    if a.is_empty() {
        return Err(Error::invalid("a", "need at least one coefficient"));
    }
    if let Some(bad) = a.iter().find(|&&ai| ai.is_nan() || ai < 0.0) {
        return Err(Error::invalid(
            "a",
            format!("coefficients must be nonnegative, got {bad}"),
        ));
    }
    let coeffs = a.to_vec();
    let eval_coeffs = coeffs.clone();
    let grad_coeffs = coeffs.clone();
    let d = coeffs.len();
    let model = ModelSpec::new(d, move |x: &[f64]| {
        x.iter()
            .zip(&eval_coeffs)
            .map(|(&xi, &ai)| ((4.0 * xi - 2.0).abs() + ai) / (1.0 + ai))
            .product()
    })?
    .with_gradient(move |x: &[f64]| {
        let g: Vec<f64> = x
            .iter()
            .zip(&grad_coeffs)
            .map(|(&xi, &ai)| ((4.0 * xi - 2.0).abs() + ai) / (1.0 + ai))
            .collect();
        (0..x.len())
            .map(|i| {
                let sign = if 4.0 * x[i] - 2.0 >= 0.0 { 1.0 } else { -1.0 };
                let others: f64 = (0..x.len()).filter(|&j| j != i).map(|j| g[j]).product();
                4.0 * sign / (1.0 + grad_coeffs[i]) * others
            })
            .collect()
    });
    Ok(TestFunction {
        name: "g-function".into(),
        model,
        params: json!({ "a": coeffs }),
        analytic: Some(Arc::new(GFunctionForms { a: coeffs })),
    })
}

// ---------------------------------------------------------------------------
// linear-in-one-variable family
// ---------------------------------------------------------------------------

struct LinearForms {
    /// `alpha_bar[i]` is the mean of `df/dx_i` over the other variables.
    alpha_bar: Vec<f64>,
    /// `nu[i]` is the mean square of `df/dx_i`.
    nu: Vec<f64>,
    variance: f64,
    first: Vec<f64>,
    total: Vec<f64>,
}

impl ClosedForms for LinearForms {
    fn variance(&self) -> f64 {
        self.variance
    }

    fn first_order(&self) -> Vec<f64> {
        self.first.clone()
    }

    fn total(&self) -> Vec<f64> {
        self.total.clone()
    }

    fn nu(&self) -> Vec<f64> {
        self.nu.clone()
    }

    fn zeta(&self) -> Vec<f64> {
        // each derivative is independent of its own variable
        self.nu.iter().map(|nu| nu / 12.0).collect()
    }

    fn lb1(&self) -> Vec<f64> {
        vec![0.0; self.nu.len()]
    }

    fn gamma(&self, variable: usize, m: f64) -> f64 {
        let alpha = self.alpha_bar[variable];
        (2.0 * m + 1.0) * m * m * alpha * alpha
            / (4.0 * (m + 2.0).powi(2) * (m + 1.0).powi(2) * self.variance)
    }

    fn w(&self, variable: usize, m: f64) -> f64 {
        self.alpha_bar[variable] / (m + 1.0)
    }
}

/// The family `f(x) = a(z) x_1 + b(z)` with `a`, `b` affine in the remaining
/// variables: `a(z) = a_0 + sum_k a_k x_(k+1)` and likewise for `b`.
///
/// The function is linear in every single coordinate, so the weighted
/// upper bound is tight (`UB2 = S_i^tot`) and the boundary-difference lower
/// bound vanishes for every variable.
pub fn make_linear(a_coeffs: &[f64], b_coeffs: &[f64]) -> Result<TestFunction> {
    if a_coeffs.is_empty() && b_coeffs.is_empty() {
        return Err(Error::invalid("a", "need at least one coefficient"));
    }
    let terms = a_coeffs.len().max(b_coeffs.len()).max(1);
    let dim = terms; // x_1 plus (terms - 1) z-variables
    let mut a = a_coeffs.to_vec();
    let mut b = b_coeffs.to_vec();
    a.resize(terms, 0.0);
    b.resize(terms, 0.0);

    let (a_eval, b_eval) = (a.clone(), b.clone());
    let model = ModelSpec::new(dim, move |x: &[f64]| {
        let mut az = a_eval[0];
        let mut bz = b_eval[0];
        for k in 1..a_eval.len() {
            az += a_eval[k] * x[k];
            bz += b_eval[k] * x[k];
        }
        az * x[0] + bz
    })?;
    let (a_grad, b_grad) = (a.clone(), b.clone());
    let model = model.with_gradient(move |x: &[f64]| {
        let mut az = a_grad[0];
        for k in 1..a_grad.len() {
            az += a_grad[k] * x[k];
        }
        let mut grad = vec![0.0; x.len()];
        grad[0] = az;
        for k in 1..a_grad.len() {
            grad[k] = a_grad[k] * x[0] + b_grad[k];
        }
        grad
    });

    // closed-form moments of the multilinear expansion
    let alpha1: f64 = a[0] + a[1..].iter().sum::<f64>() / 2.0;
    let sum_a_sq: f64 = a[1..].iter().map(|ak| ak * ak).sum();
    let mut alpha_bar = vec![0.0; dim];
    let mut nu = vec![0.0; dim];
    alpha_bar[0] = alpha1;
    nu[0] = alpha1 * alpha1 + sum_a_sq / 12.0;
    for k in 1..dim {
        alpha_bar[k] = a[k] / 2.0 + b[k];
        nu[k] = a[k] * a[k] / 3.0 + a[k] * b[k] + b[k] * b[k];
    }
    // centered expansion: D = var(x_1 term) + sum var(z_k terms) + interactions
    let mut first_var = vec![0.0; dim];
    first_var[0] = alpha1 * alpha1 / 12.0;
    for k in 1..dim {
        first_var[k] = alpha_bar[k] * alpha_bar[k] / 12.0;
    }
    let interaction: f64 = sum_a_sq / 144.0;
    let variance = first_var.iter().sum::<f64>() + interaction;
    // zero-variance coefficient sets stay constructible so the pipeline can
    // report the constant model itself; they just carry no closed forms
    let analytic: Option<Arc<dyn ClosedForms>> = (variance > 0.0).then(|| {
        let mut total_var = vec![0.0; dim];
        total_var[0] = first_var[0] + interaction;
        for k in 1..dim {
            total_var[k] = first_var[k] + a[k] * a[k] / 144.0;
        }
        Arc::new(LinearForms {
            alpha_bar,
            nu,
            variance,
            first: first_var.iter().map(|v| v / variance).collect(),
            total: total_var.iter().map(|v| v / variance).collect(),
        }) as Arc<dyn ClosedForms>
    });

    Ok(TestFunction {
        name: "linear".into(),
        model,
        params: json!({ "a": a, "b": b }),
        analytic,
    })
}

// ---------------------------------------------------------------------------
// Hartmann-6
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct HartmannData {
    #[allow(dead_code)]
    provenance: String,
    c: Vec<f64>,
    alpha: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
}

/// The vendored standard Hartmann-6 constants `(c, alpha, p)`.
pub fn hartmann6_constants() -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let data: HartmannData = serde_json::from_str(include_str!("../data/hartmann6.json"))
        .expect("vendored Hartmann data is well-formed");
    (data.c, data.alpha, data.p)
}

/// The six-dimensional Hartmann sum-of-Gaussians benchmark with its analytic
/// gradient. No closed-form sensitivity provider exists for it.
pub fn make_hartmann6() -> TestFunction {
    let (c, alpha, p) = hartmann6_constants();
    let (c_eval, alpha_eval, p_eval) = (c.clone(), alpha.clone(), p.clone());
    let model = ModelSpec::new(6, move |x: &[f64]| {
        -(0..4)
            .map(|i| {
                let expo: f64 = (0..6)
                    .map(|j| alpha_eval[i][j] * (x[j] - p_eval[i][j]).powi(2))
                    .sum();
                c_eval[i] * (-expo).exp()
            })
            .sum::<f64>()
    })
    .expect("dimension is positive")
    .with_gradient(move |x: &[f64]| {
        let terms: Vec<f64> = (0..4)
            .map(|i| {
                let expo: f64 = (0..6).map(|j| alpha[i][j] * (x[j] - p[i][j]).powi(2)).sum();
                c[i] * (-expo).exp()
            })
            .collect();
        (0..6)
            .map(|j| {
                (0..4)
                    .map(|i| terms[i] * 2.0 * alpha[i][j] * (x[j] - p[i][j]))
                    .sum()
            })
            .collect()
    });
    TestFunction {
        name: "hartmann6".into(),
        model,
        params: json!({}),
        analytic: None,
    }
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

/// Named collection of test functions, addressable from the CLI.
pub struct Registry {
    entries: Vec<TestFunction>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            entries: Vec::new(),
        }
    }

    /// The three standard entries with their default parameters.
    pub fn standard() -> Self {
        let mut registry = Registry::empty();
        registry.register(
            make_g_function(&[0.0, 1.0, 4.5, 9.0, 99.0, 99.0, 99.0, 99.0])
                .expect("default g-function parameters are valid"),
        );
        registry
            .register(make_linear(&[1.0], &[0.0]).expect("default linear parameters are valid"));
        registry.register(make_hartmann6());
        registry
    }

    pub fn register(&mut self, function: TestFunction) {
        self.entries.retain(|f| f.name != function.name);
        self.entries.push(function);
    }

    pub fn get(&self, name: &str) -> Option<&TestFunction> {
        self.entries.iter().find(|f| f.name == name)
    }

    pub fn entries(&self) -> &[TestFunction] {
        &self.entries
    }

    /// Build a registry function with explicit parameters.
    pub fn build(name: &str, params: &Value) -> Result<TestFunction> {
        let vector = |key: &str, default: Option<Vec<f64>>| -> Result<Vec<f64>> {
            match params.get(key) {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| Error::invalid("params", format!("field {key}: {e}"))),
                None => default.ok_or_else(|| {
                    Error::invalid("params", format!("missing required field {key}"))
                }),
            }
        };
        match name {
            "g-function" => {
                let a = vector("a", Some(vec![0.0, 1.0, 4.5, 9.0, 99.0, 99.0, 99.0, 99.0]))?;
                make_g_function(&a)
            }
            "linear" => {
                let a = vector("a", Some(vec![1.0]))?;
                let b = vector("b", Some(vec![0.0]))?;
                make_linear(&a, &b)
            }
            "hartmann6" => Ok(make_hartmann6()),
            other => Err(Error::invalid(
                "function",
                format!("unknown function {other:?}"),
            )),
        }
    }

    /// One-line parameter description per function, for listings.
    pub fn parameter_schema(name: &str) -> &'static str {
        match name {
            "g-function" => "{\"a\": [nonnegative reals]} (dimension = len(a))",
            "linear" => {
                "{\"a\": [reals], \"b\": [reals]} (f = a(z) x1 + b(z), affine coefficients)"
            }
            "hartmann6" => "no parameters",
            _ => "unknown",
        }
    }
}
