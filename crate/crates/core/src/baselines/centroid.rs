use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{check_basis, class_means, dataset_parts, fpca, nearer, FpcaBasis};
use crate::basis::{BasisId, FuncObs};
use crate::datagen::Dataset;
use crate::error::Result;

/// Eigenvalues below this fraction of the leading one are floored to it.
const EIGEN_FLOOR: f64 = 1e-8;

/// Projection classifier: project on the empirical weighted mean-difference
/// direction `ψ̂_p = Σ_{k≤p} θ̂_k⁻¹ <μ̂₊ − μ̂₋, φ̂_k> φ̂_k` and assign the label
/// of the nearer projected class mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub basis: BasisId,
    pub p: usize,
    pub mean: Vec<f64>,
    /// `ψ̂_p` in coefficient coordinates.
    pub direction: Vec<f64>,
    pub centroid_plus: f64,
    pub centroid_minus: f64,
    pub degenerate: bool,
}

pub fn fit_centroid(data: &Dataset, p: usize) -> Result<CentroidModel> {
    let (x, basis, labels) = dataset_parts(data)?;
    let (mp, mm, _, _) = class_means(&x, &labels)?;
    let comps: FpcaBasis = fpca(data, p)?;
    let diff = &mp - &mm;
    let floor = EIGEN_FLOOR * comps.values[0];
    let mut direction = DVector::zeros(x.ncols());
    for (k, theta) in comps.values.iter().enumerate() {
        let v = comps.vectors.column(k);
        let d = v.dot(&diff);
        direction.axpy(d / theta.max(floor), &v, 1.0);
    }
    let mean = DVector::from_column_slice(&comps.mean);
    let centroid_plus = direction.dot(&(&mp - &mean));
    let centroid_minus = direction.dot(&(&mm - &mean));
    Ok(CentroidModel {
        basis,
        p: comps.rank(),
        mean: comps.mean.clone(),
        direction: direction.as_slice().to_vec(),
        degenerate: centroid_plus == centroid_minus,
        centroid_plus,
        centroid_minus,
    })
}

impl CentroidModel {
    pub fn project(&self, x: &FuncObs) -> Result<f64> {
        check_basis(x, self.basis)?;
        Ok(x.coeffs()
            .iter()
            .zip(&self.mean)
            .zip(&self.direction)
            .map(|((c, m), d)| (c - m) * d)
            .sum())
    }

    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        let s = self.project(x)?;
        if self.degenerate {
            return Ok(1);
        }
        Ok(nearer((s - self.centroid_plus).abs(), (s - self.centroid_minus).abs()))
    }
}
