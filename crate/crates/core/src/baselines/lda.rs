use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{class_means, dataset_parts, fpca_total, FpcaBasis};
use crate::basis::FuncObs;
use crate::datagen::Dataset;
use crate::error::{Error, Result};

const RIDGE: f64 = 1e-8;

/// Fisher discriminant on the leading principal scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub components: FpcaBasis,
    /// Discriminant direction in score coordinates.
    pub direction: Vec<f64>,
    pub midpoint: Vec<f64>,
    /// `ln(π₊ / π₋)`.
    pub log_prior_ratio: f64,
    pub degenerate: bool,
}

pub fn fit_lda(data: &Dataset, p: usize) -> Result<LdaModel> {
    let (_, _, labels) = dataset_parts(data)?;
    let components = fpca_total(data, p)?;
    let scores = components.score_matrix(&data.items)?;
    let (mp, mm, np, nm) = class_means(&scores, &labels)?;
    let k = scores.ncols();
    let mut within = DMatrix::zeros(k, k);
    for (r, &l) in labels.iter().enumerate() {
        let m = if l > 0 { &mp } else { &mm };
        let c = scores.row(r).transpose() - m;
        within += &c * c.transpose();
    }
    within /= (labels.len().saturating_sub(2)).max(1) as f64;
    let ridge = RIDGE * within.trace() / k as f64;
    for i in 0..k {
        within[(i, i)] += ridge;
    }
    let diff = &mp - &mm;
    let direction = within
        .clone()
        .cholesky()
        .map(|c| c.solve(&diff))
        .or_else(|| within.try_inverse().map(|inv| inv * &diff))
        .ok_or_else(|| Error::InsufficientData("within-class covariance is singular".into()))?;
    let midpoint: DVector<f64> = (&mp + &mm) / 2.0;
    Ok(LdaModel {
        components,
        degenerate: diff.iter().all(|d| *d == 0.0),
        direction: direction.as_slice().to_vec(),
        midpoint: midpoint.as_slice().to_vec(),
        log_prior_ratio: (np as f64 / nm as f64).ln(),
    })
}

impl LdaModel {
    pub fn discriminant(&self, x: &FuncObs) -> Result<f64> {
        let s = self.components.scores(x)?;
        let lin: f64 = s
            .iter()
            .zip(&self.midpoint)
            .zip(&self.direction)
            .map(|((v, m), d)| (v - m) * d)
            .sum();
        Ok(lin + self.log_prior_ratio)
    }

    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        if self.degenerate {
            return Ok(1);
        }
        Ok(crate::rkhs::sign_label(self.discriminant(x)?))
    }

    /// Discriminant direction mapped back to coefficient coordinates.
    pub fn coefficient_direction(&self) -> Vec<f64> {
        let d = DVector::from_column_slice(&self.direction);
        (&self.components.vectors * d).as_slice().to_vec()
    }
}
