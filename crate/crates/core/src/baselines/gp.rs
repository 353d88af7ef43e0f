use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::FuncObs;
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::rkhs::{cross_gram, gram, sign_label, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpOptions {
    pub max_iter: usize,
    /// Target for `‖f̂ − K ∇log p(y|f̂)‖_∞`.
    pub tol: f64,
    pub jitter: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-9,
            jitter: 1e-8,
        }
    }
}

/// Laplace-approximated GP classifier with logistic likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub kernel: KernelSpec,
    pub train_inputs: Vec<FuncObs>,
    /// `∇log p(y | f̂)`; the predictive latent mean is `k(x)ᵀ` times this.
    pub alpha: Vec<f64>,
    /// Posterior mode of the latent values at the training inputs.
    pub latent_mode: Vec<f64>,
    pub iterations: usize,
    /// `‖f̂ − K ∇log p(y|f̂)‖_∞` at the returned iterate.
    pub stationarity: f64,
    pub converged: bool,
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `∇log p(y|f)` for the logistic likelihood: `y σ(−y f)`.
fn grad_log_lik(y: &[f64], f: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(y.len(), y.iter().zip(f.iter()).map(|(yi, fi)| yi * sigmoid(-yi * fi)))
}

fn log_lik(y: &[f64], f: &DVector<f64>) -> f64 {
    -y.iter()
        .zip(f.iter())
        .map(|(yi, fi)| crate::rkhs::logit_loss(yi * fi))
        .sum::<f64>()
}

/// Posterior mode `f`, its `α = ∇ log p(y|f)` and solver diagnostics.
pub(crate) struct LaplaceMode {
    pub f: DVector<f64>,
    pub alpha: DVector<f64>,
    pub iterations: usize,
    pub stationarity: f64,
    pub converged: bool,
}

/// Newton iterations for the posterior mode on a precomputed (jittered) `K`.
pub(crate) fn laplace_mode(k: &DMatrix<f64>, y: &[f64], opts: &GpOptions) -> Result<LaplaceMode> {
    let n = y.len();
    let mut f = DVector::zeros(n);
    let mut best = (f64::INFINITY, f.clone());
    let mut iterations = 0;
    let residual = |f: &DVector<f64>| -> (DVector<f64>, f64) {
        let a = grad_log_lik(y, f);
        let r = (f - k * &a).amax();
        (a, r)
    };
    let (mut a, mut res) = residual(&f);
    let mut psi_old = f64::INFINITY;
    while iterations < opts.max_iter {
        if res < best.0 {
            best = (res, f.clone());
        }
        if res <= opts.tol {
            break;
        }
        let w = DVector::from_iterator(
            n,
            f.iter().map(|fi| {
                let p = sigmoid(*fi);
                p * (1.0 - p)
            }),
        );
        let sw = w.map(f64::sqrt);
        let mut b_mat = k.clone();
        for r in 0..n {
            for c in 0..n {
                b_mat[(r, c)] *= sw[r] * sw[c];
            }
            b_mat[(r, r)] += 1.0;
        }
        let chol = b_mat
            .cholesky()
            .ok_or_else(|| Error::InsufficientData("GP Newton system not positive definite".into()))?;
        let b = w.component_mul(&f) + &a;
        let kb = k * &b;
        let inner = chol.solve(&sw.component_mul(&kb));
        let step_a = &b - sw.component_mul(&inner);
        let mut f_new = k * &step_a;
        // Guard against overshoot on the Newton path: halve towards f while
        // the Laplace objective −½ aᵀf + log p(y|f) gets worse.
        let psi = |f: &DVector<f64>, a_: &DVector<f64>| -0.5 * a_.dot(f) + log_lik(y, f);
        let mut a_dir = step_a.clone();
        let mut psi_new = psi(&f_new, &a_dir);
        let mut halvings = 0;
        while psi_old.is_finite() && psi_new < psi_old - 1e-12 && halvings < 30 {
            let a_old = grad_log_lik(y, &f);
            a_dir = (&a_dir + &a_old) * 0.5;
            f_new = k * &a_dir;
            psi_new = psi(&f_new, &a_dir);
            halvings += 1;
        }
        psi_old = psi_new;
        f = f_new;
        iterations += 1;
        let (na, nr) = residual(&f);
        a = na;
        res = nr;
    }
    if res < best.0 {
        best = (res, f.clone());
    }
    let converged = best.0 <= opts.tol.max(1e-6);
    let f = best.1;
    let alpha = grad_log_lik(y, &f);
    Ok(LaplaceMode {
        f,
        alpha,
        iterations,
        stationarity: best.0,
        converged,
    })
}

pub fn fit_gp_laplace(data: &Dataset, kernel: KernelSpec) -> Result<GpModel> {
    fit_gp_laplace_with(data, kernel, &GpOptions::default())
}

pub fn fit_gp_laplace_with(data: &Dataset, kernel: KernelSpec, opts: &GpOptions) -> Result<GpModel> {
    if data.len() < 2 {
        return Err(Error::InsufficientData("GP needs at least two observations".into()));
    }
    let y: Vec<f64> = data.labels().iter().map(|&l| l as f64).collect();
    let mut k = gram(&data.items, &kernel)?;
    for i in 0..k.nrows() {
        k[(i, i)] += opts.jitter;
    }
    let LaplaceMode {
        f,
        alpha: a,
        iterations,
        stationarity,
        converged,
    } = laplace_mode(&k, &y, opts)?;
    Ok(GpModel {
        kernel,
        train_inputs: data.items.clone(),
        alpha: a.as_slice().to_vec(),
        latent_mode: f.as_slice().to_vec(),
        iterations,
        stationarity,
        converged,
    })
}

impl GpModel {
    pub fn latent_means(&self, xs: &[FuncObs]) -> Result<Vec<f64>> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let kx = cross_gram(xs, &self.train_inputs, &self.kernel)?;
        Ok((kx * DVector::from_column_slice(&self.alpha)).as_slice().to_vec())
    }

    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        Ok(sign_label(self.latent_means(std::slice::from_ref(x))?[0]))
    }
}
