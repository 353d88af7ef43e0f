//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use fdlab::basis::{BasisId, FuncObs};
use fdlab::datagen::{sample_balanced, scenario1, Dataset};
use fdlab::rkhs::{objective, PenaltyMode, RkhsModel};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst relative deviation between `analytic` and a central finite
/// difference of the objective with step `1e-5 (1 + |w_j|)`, measured
/// against the sup-norm of the analytic gradient.
pub fn fd_gradient_error(
    w: &[f64],
    g: &DMatrix<f64>,
    y: &[f64],
    lambda: f64,
    mode: PenaltyMode,
    analytic: &[f64],
) -> f64 {
    let mut fd = vec![0.0; w.len()];
    for j in 0..w.len() {
        let h = 1e-5 * (1.0 + w[j].abs());
        let mut wp = w.to_vec();
        let mut wm = w.to_vec();
        wp[j] += h;
        wm[j] -= h;
        fd[j] = (objective(&wp, g, y, lambda, mode).unwrap() - objective(&wm, g, y, lambda, mode).unwrap()) / (2.0 * h);
    }
    let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    fd.iter().zip(analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// `Σ_j w_j exp(−Σ_k (x_k − X_jk)² / h)` by explicit loops over coefficients.
pub fn naive_decision(model: &RkhsModel, x: &FuncObs) -> f64 {
    let mut total = 0.0;
    for (w, xj) in model.weights.iter().zip(&model.train_inputs) {
        let mut d = 0.0;
        for k in 0..x.coeffs().len() {
            let diff = x.coeffs()[k] - xj.coeffs()[k];
            d += diff * diff;
        }
        total += w * (-d / model.kernel.bandwidth).exp();
    }
    total
}

pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(g.clone()).eigenvalues.min()
}

/// Small random problem: scenario-1 inputs with random bandwidth and `λ`.
pub fn random_problem(seed: u64, n_per_class: usize) -> (Dataset, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = rng.random_range(1.1..2.0);
    let data = sample_balanced(&scenario1(gamma).unwrap(), n_per_class, seed).unwrap();
    let h = 2f64.powi(rng.random_range(-3..=4));
    let lambda = 2f64.powi(rng.random_range(-5..=2));
    (data, h, lambda)
}

pub fn random_weights(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// `count` unlabeled draws from the scenario-1 mixture with a random `γ`.
pub fn mixture_points(seed: u64, count: usize) -> Vec<FuncObs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = scenario1(rng.random_range(1.1..2.0)).unwrap();
    fdlab::datagen::sample_total(&spec, count, seed)
        .unwrap()
        .items
        .into_iter()
        .map(|x| x.with_label(None).unwrap())
        .collect()
}

pub fn random_points(seed: u64, count: usize, j: usize) -> Vec<FuncObs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c = (0..j).map(|_| rng.random_range(-1.5..1.5)).collect();
            FuncObs::unlabeled(BasisId::sine(j), c).unwrap()
        })
        .collect()
}

/// `P(Z ≤ z)` for a standard normal, by Simpson integration of the density.
pub fn normal_cdf(z: f64) -> f64 {
    let lo = -12.0;
    if z <= lo {
        return 0.0;
    }
    let n = 20_000;
    let h = (z - lo) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(lo) + pdf(z);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(lo + k as f64 * h);
    }
    s * h / 3.0
}
