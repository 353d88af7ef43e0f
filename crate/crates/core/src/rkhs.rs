//! Kernel logistic regression over functional inputs.
//!
//! The decision function is a finite kernel expansion over the training
//! inputs, `f(x) = Σ_j w_j k(x, X_j)` with the Gaussian kernel
//! `k(x, x') = exp(-‖x − x'‖² / h)`. Weights minimise
//!
//! ```text
//! (1/n) Σ_i log(1 + exp(-y_i (G w)_i)) + penalty(w)
//! ```
//!
//! where the penalty is either `λ Σ w_j²` ([`PenaltyMode::PaperSumSquares`],
//! the default) or the RKHS norm `λ wᵀ G w` ([`PenaltyMode::RkhsQuadratic`]).
//! Both objectives are convex; the first is strictly convex.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{evaluate_on_grid, l2_distance_sq, BasisId, FuncObs, IpMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub bandwidth: f64,
    #[serde(default)]
    pub ip_mode: IpMode,
}

impl KernelSpec {
    pub fn new(bandwidth: f64, ip_mode: IpMode) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::invalid(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        Ok(Self { bandwidth, ip_mode })
    }

    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        Self::new(bandwidth, IpMode::Coefficient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    #[default]
    PaperSumSquares,
    RkhsQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub status: FitStatus,
    pub iterations: usize,
    pub final_objective: f64,
    pub grad_sup_norm: f64,
    /// Objective after every accepted step, starting at `w = 0`.
    #[serde(skip)]
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkhsModel {
    pub kernel: KernelSpec,
    pub penalty_mode: PenaltyMode,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub train_inputs: Vec<FuncObs>,
    pub fit_report: FitReport,
}

// ---------------------------------------------------------------------------
// Loss

/// `log(1 + e^{-t})` without overflow.
#[inline]
pub fn logit_loss(t: f64) -> f64 {
    let z = -t;
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Derivative of [`logit_loss`]: `-1 / (1 + e^{t})`.
#[inline]
pub fn logit_loss_deriv(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + t.exp())
    }
}

// ---------------------------------------------------------------------------
// Kernel evaluation

pub fn kernel_eval(kernel: &KernelSpec, a: &FuncObs, b: &FuncObs) -> Result<f64> {
    Ok((-l2_distance_sq(a, b, kernel.ip_mode)? / kernel.bandwidth).exp())
}

/// Inputs prepared for repeated distance evaluation: rows of values and the
/// quadrature weights that turn squared differences into `‖a − b‖²`.
pub(crate) struct Embedded {
    rows: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

fn common_basis(inputs: &[&FuncObs]) -> Result<Option<BasisId>> {
    let Some(first) = inputs.first() else {
        return Ok(None);
    };
    let b = first.basis();
    if let Some(o) = inputs.iter().find(|o| o.basis() != b) {
        return Err(Error::BasisMismatch(b.to_string(), o.basis().to_string()));
    }
    Ok(Some(b))
}

pub(crate) fn embed(inputs: &[&FuncObs], mode: IpMode) -> Result<Embedded> {
    match mode {
        IpMode::Coefficient => {
            common_basis(inputs)?;
            Ok(Embedded {
                rows: inputs.iter().map(|o| o.coeffs().to_vec()).collect(),
                weights: None,
            })
        }
        IpMode::Grid(m) => {
            let rows = inputs
                .iter()
                .map(|o| evaluate_on_grid(o, m))
                .collect::<Result<Vec<_>>>()?;
            let step = 1.0 / (m - 1) as f64;
            let mut w = vec![step; m];
            w[0] *= 0.5;
            w[m - 1] *= 0.5;
            Ok(Embedded { rows, weights: Some(w) })
        }
    }
}

impl Embedded {
    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    fn dist(&self, i: usize, other: &Embedded, j: usize) -> f64 {
        let (a, b) = (&self.rows[i], &other.rows[j]);
        match &self.weights {
            None => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Some(w) => a.iter().zip(b).zip(w).map(|((x, y), q)| q * (x - y) * (x - y)).sum(),
        }
    }
}

/// Squared distances among one set of inputs (symmetric, zero diagonal).
pub(crate) fn self_distances(e: &Embedded) -> DMatrix<f64> {
    let n = e.len();
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = e.dist(i, e, j);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Squared distances with rows over `a` and columns over `b`.
pub(crate) fn cross_distances(a: &Embedded, b: &Embedded) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| a.dist(i, b, j))
}

fn check_cross(a: &[&FuncObs], b: &[&FuncObs], mode: IpMode) -> Result<()> {
    if mode == IpMode::Coefficient {
        if let (Some(x), Some(y)) = (a.first(), b.first()) {
            if x.basis() != y.basis() {
                return Err(Error::BasisMismatch(x.basis().to_string(), y.basis().to_string()));
            }
        }
    }
    Ok(())
}

pub(crate) fn distance_matrices(
    train: &[&FuncObs],
    queries: &[&FuncObs],
    mode: IpMode,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_cross(queries, train, mode)?;
    let et = embed(train, mode)?;
    let eq = embed(queries, mode)?;
    Ok((self_distances(&et), cross_distances(&eq, &et)))
}

pub fn kernel_from_distances(d: &DMatrix<f64>, bandwidth: f64) -> DMatrix<f64> {
    d.map(|v| (-v / bandwidth).exp())
}

/// Gram matrix `G_ij = k(x_i, x_j)`.
pub fn gram(inputs: &[FuncObs], kernel: &KernelSpec) -> Result<DMatrix<f64>> {
    if inputs.is_empty() {
        return Err(Error::invalid("gram needs at least one input"));
    }
    let refs: Vec<&FuncObs> = inputs.iter().collect();
    let e = embed(&refs, kernel.ip_mode)?;
    Ok(kernel_from_distances(&self_distances(&e), kernel.bandwidth))
}

/// Kernel values with rows over `queries` and columns over `train`.
pub fn cross_gram(queries: &[FuncObs], train: &[FuncObs], kernel: &KernelSpec) -> Result<DMatrix<f64>> {
    let q: Vec<&FuncObs> = queries.iter().collect();
    let t: Vec<&FuncObs> = train.iter().collect();
    check_cross(&q, &t, kernel.ip_mode)?;
    let eq = embed(&q, kernel.ip_mode)?;
    let et = embed(&t, kernel.ip_mode)?;
    Ok(kernel_from_distances(&cross_distances(&eq, &et), kernel.bandwidth))
}

// ---------------------------------------------------------------------------
// Objective

fn check_dims(w: &[f64], g: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<()> {
    let n = y.len();
    if g.nrows() != n || g.ncols() != n || w.len() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: w {}, G {}x{}, y {}",
            w.len(),
            g.nrows(),
            g.ncols(),
            n
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

fn mean_loss(y: &[f64], f: &DVector<f64>) -> f64 {
    y.iter().zip(f.iter()).map(|(yi, fi)| logit_loss(yi * fi)).sum::<f64>() / y.len() as f64
}

pub fn objective(w: &[f64], g: &DMatrix<f64>, y: &[f64], lambda: f64, penalty: PenaltyMode) -> Result<f64> {
    check_dims(w, g, y, lambda)?;
    let wv = DVector::from_column_slice(w);
    let f = g * &wv;
    let pen = match penalty {
        PenaltyMode::PaperSumSquares => wv.norm_squared(),
        PenaltyMode::RkhsQuadratic => wv.dot(&f),
    };
    Ok(mean_loss(y, &f) + lambda * pen)
}

/// Gradient given `f = G w`; `G` is symmetric.
fn gradient_at(
    w: &DVector<f64>,
    f: &DVector<f64>,
    g: &DMatrix<f64>,
    y: &[f64],
    lambda: f64,
    penalty: PenaltyMode,
) -> DVector<f64> {
    let n = y.len() as f64;
    let r = DVector::from_iterator(
        y.len(),
        y.iter()
            .zip(f.iter())
            .map(|(yi, fi)| yi * logit_loss_deriv(yi * fi) / n),
    );
    let mut grad = g * r;
    match penalty {
        PenaltyMode::PaperSumSquares => grad.axpy(2.0 * lambda, w, 1.0),
        PenaltyMode::RkhsQuadratic => grad.axpy(2.0 * lambda, f, 1.0),
    }
    grad
}

pub fn gradient(w: &[f64], g: &DMatrix<f64>, y: &[f64], lambda: f64, penalty: PenaltyMode) -> Result<Vec<f64>> {
    check_dims(w, g, y, lambda)?;
    let wv = DVector::from_column_slice(w);
    let f = g * &wv;
    Ok(gradient_at(&wv, &f, g, y, lambda, penalty).as_slice().to_vec())
}

// ---------------------------------------------------------------------------
// Solver

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACK: usize = 60;

/// Minimise the objective for a precomputed Gram matrix, starting at `w = 0`.
///
/// Gradient descent with Armijo backtracking. The first trial step is 1;
/// later iterations open with the Barzilai–Borwein step of the previous
/// move, then halve until sufficient decrease. Accepted objectives never
/// increase.
pub fn fit_gram(
    g: &DMatrix<f64>,
    y: &[f64],
    lambda: f64,
    penalty: PenaltyMode,
    options: &FitOptions,
) -> Result<(Vec<f64>, FitReport)> {
    let n = y.len();
    check_dims(&vec![0.0; n], g, y, lambda)?;
    if n < 2 {
        return Err(Error::invalid("fit needs at least two observations"));
    }
    if y.iter().any(|v| *v != 1.0 && *v != -1.0) {
        return Err(Error::invalid("labels must be -1 or +1"));
    }

    let mut w = DVector::zeros(n);
    let mut f = DVector::zeros(n);
    // wᵀGw, tracked so the quadratic penalty costs O(n) per trial.
    let mut wgw = 0.0;
    let pen_of = |w2: f64, wgw: f64| match penalty {
        PenaltyMode::PaperSumSquares => lambda * w2,
        PenaltyMode::RkhsQuadratic => lambda * wgw,
    };
    let mut obj = mean_loss(y, &f);
    let mut grad = gradient_at(&w, &f, g, y, lambda, penalty);
    let mut history = vec![obj];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut status = FitStatus::NotConverged;
    let mut trial_f = DVector::zeros(n);

    while iterations < options.max_iter {
        let gsup = grad.amax();
        if gsup <= options.grad_tol {
            status = FitStatus::Converged;
            break;
        }
        let gg = grad.norm_squared();
        let gd = g * &grad; // G·(-d) with d = -grad
        let w_dot_g = w.dot(&grad);
        let w2 = w.norm_squared();
        let f_dot_g = f.dot(&grad);
        let g_gd = grad.dot(&gd);

        let mut t = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            trial_f.copy_from(&f);
            trial_f.axpy(-t, &gd, 1.0);
            let tw2 = w2 - 2.0 * t * w_dot_g + t * t * gg;
            let twgw = wgw - 2.0 * t * f_dot_g + t * t * g_gd;
            let trial = mean_loss(y, &trial_f) + pen_of(tw2, twgw);
            if trial <= obj - ARMIJO * t * gg {
                accepted = Some((trial, twgw));
                break;
            }
            t *= SHRINK;
        }
        let Some((new_obj, new_wgw)) = accepted else {
            // No decrease representable at this precision.
            break;
        };

        w.axpy(-t, &grad, 1.0);
        std::mem::swap(&mut f, &mut trial_f);
        wgw = new_wgw;
        obj = new_obj;
        history.push(obj);
        iterations += 1;

        let new_grad = gradient_at(&w, &f, g, y, lambda, penalty);
        // Barzilai–Borwein: s = -t·grad, Δg = new_grad − grad.
        let dg = &new_grad - &grad;
        let s_dot_dg = -t * grad.dot(&dg);
        step = if s_dot_dg > 0.0 {
            (t * t * gg / s_dot_dg).clamp(1e-10, 1e10)
        } else {
            1.0
        };
        grad = new_grad;
    }
    if status == FitStatus::NotConverged && grad.amax() <= options.grad_tol {
        status = FitStatus::Converged;
    }

    let report = FitReport {
        status,
        iterations,
        final_objective: obj,
        grad_sup_norm: grad.amax(),
        history,
    };
    Ok((w.as_slice().to_vec(), report))
}

pub(crate) fn label_vector(labels: &[i8]) -> Result<Vec<f64>> {
    labels
        .iter()
        .map(|&l| match l {
            1 => Ok(1.0),
            -1 => Ok(-1.0),
            other => Err(Error::invalid(format!("labels must be -1 or +1, got {other}"))),
        })
        .collect()
}

pub fn fit(
    inputs: &[FuncObs],
    labels: &[i8],
    kernel: KernelSpec,
    lambda: f64,
    penalty: PenaltyMode,
    options: &FitOptions,
) -> Result<RkhsModel> {
    if inputs.len() != labels.len() {
        return Err(Error::invalid("inputs and labels differ in length"));
    }
    let y = label_vector(labels)?;
    if inputs.len() < 2 {
        return Err(Error::invalid("fit needs at least two observations"));
    }
    let g = gram(inputs, &kernel)?;
    let (weights, fit_report) = fit_gram(&g, &y, lambda, penalty, options)?;
    Ok(RkhsModel {
        kernel,
        penalty_mode: penalty,
        lambda,
        weights,
        train_inputs: inputs.to_vec(),
        fit_report,
    })
}

/// `+1` when `value ≥ 0`, else `-1`.
#[inline]
pub fn sign_label(value: f64) -> i8 {
    if value >= 0.0 {
        1
    } else {
        -1
    }
}

impl RkhsModel {
    pub fn decision_value(&self, x: &FuncObs) -> Result<f64> {
        Ok(self.decision_values(std::slice::from_ref(x))?[0])
    }

    pub fn decision_values(&self, xs: &[FuncObs]) -> Result<Vec<f64>> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let k = cross_gram(xs, &self.train_inputs, &self.kernel)?;
        let w = DVector::from_column_slice(&self.weights);
        Ok((k * w).as_slice().to_vec())
    }

    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        Ok(sign_label(self.decision_value(x)?))
    }

    pub fn predict_many(&self, xs: &[FuncObs]) -> Result<Vec<i8>> {
        Ok(self.decision_values(xs)?.into_iter().map(sign_label).collect())
    }

    pub fn converged(&self) -> bool {
        self.fit_report.status == FitStatus::Converged
    }
}
