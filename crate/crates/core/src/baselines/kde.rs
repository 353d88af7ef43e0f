use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{dataset_parts, fpca_total, FpcaBasis};
use crate::basis::FuncObs;
use crate::datagen::Dataset;
use crate::error::{Error, Result};

const DENSITY_FLOOR: f64 = 1e-300;

/// Rule-of-thumb Gaussian KDE bandwidth `1.06 σ̂ n^{-1/5}`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let bw = 1.06 * var.sqrt() * n.powf(-0.2);
    if bw > 0.0 {
        bw
    } else {
        1e-6
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde1d {
    pub points: Vec<f64>,
    pub bandwidth: f64,
}

impl Kde1d {
    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / ((2.0 * PI).sqrt() * h * self.points.len() as f64);
        self.points
            .iter()
            .map(|p| {
                let z = (x - p) / h;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * norm
    }
}

/// Product-form naive Bayes over principal scores with one Gaussian KDE per
/// class and component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeModel {
    pub components: FpcaBasis,
    pub bandwidth_scale: f64,
    pub plus: Vec<Kde1d>,
    pub minus: Vec<Kde1d>,
    pub log_prior_plus: f64,
    pub log_prior_minus: f64,
}

/// `bandwidth_scale` multiplies each per-class, per-component rule-of-thumb
/// bandwidth.
pub fn fit_kde_bayes(data: &Dataset, p: usize, bandwidth_scale: f64) -> Result<KdeModel> {
    if !(bandwidth_scale > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be > 0, got {bandwidth_scale}")));
    }
    let (_, _, labels) = dataset_parts(data)?;
    let components = fpca_total(data, p)?;
    let scores = components.score_matrix(&data.items)?;
    let build = |label: i8| -> Vec<Kde1d> {
        (0..scores.ncols())
            .map(|k| {
                let points: Vec<f64> = labels
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| **l == label)
                    .map(|(r, _)| scores[(r, k)])
                    .collect();
                let bandwidth = bandwidth_scale * silverman_bandwidth(&points);
                Kde1d { points, bandwidth }
            })
            .collect()
    };
    let np = labels.iter().filter(|l| **l > 0).count();
    let nm = labels.len() - np;
    if np == 0 || nm == 0 {
        return Err(Error::InsufficientData("both classes must be present".into()));
    }
    let n = labels.len() as f64;
    Ok(KdeModel {
        plus: build(1),
        minus: build(-1),
        log_prior_plus: (np as f64 / n).ln(),
        log_prior_minus: (nm as f64 / n).ln(),
        components,
        bandwidth_scale,
    })
}

impl KdeModel {
    /// `(log score for +1, log score for −1)`.
    pub fn log_scores(&self, x: &FuncObs) -> Result<(f64, f64)> {
        let s = self.components.scores(x)?;
        let mut lp = self.log_prior_plus;
        let mut lm = self.log_prior_minus;
        for (k, v) in s.iter().enumerate() {
            lp += self.plus[k].density(*v).max(DENSITY_FLOOR).ln();
            lm += self.minus[k].density(*v).max(DENSITY_FLOOR).ln();
        }
        Ok((lp, lm))
    }

    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        let (lp, lm) = self.log_scores(x)?;
        Ok(if lp >= lm { 1 } else { -1 })
    }
}
