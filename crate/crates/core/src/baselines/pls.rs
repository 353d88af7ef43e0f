use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_basis, dataset_parts, nearer};
use crate::basis::{BasisId, FuncObs};
use crate::datagen::Dataset;
use crate::error::{Error, Result};

const ZERO_COV: f64 = 1e-12;

/// PLS1 components (NIPALS deflation against the ±1 labels) followed by a
/// nearest-centroid rule in score space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    pub basis: BasisId,
    pub requested: usize,
    pub mean: Vec<f64>,
    /// Unit weight vectors, one column per extracted component.
    pub weights: DMatrix<f64>,
    /// Maps centred coefficients to scores: `t = Rᵀ (x − mean)`.
    pub rotation: DMatrix<f64>,
    pub centroid_plus: Vec<f64>,
    pub centroid_minus: Vec<f64>,
}

pub fn fit_pls_centroid(data: &Dataset, p: usize) -> Result<PlsModel> {
    let (x, basis, labels) = dataset_parts(data)?;
    let (n, j) = x.shape();
    if p == 0 || p > j {
        return Err(Error::invalid(format!("p={p} outside 1..={j}")));
    }
    if n < 2 {
        return Err(Error::InsufficientData("pls needs at least two observations".into()));
    }
    let mean = x.row_mean();
    let mut xr = x.clone();
    for mut row in xr.row_iter_mut() {
        row -= &mean;
    }
    let y0 = DVector::from_iterator(n, labels.iter().map(|&l| l as f64));
    let mut yr = y0.add_scalar(-y0.mean());

    let mut ws: Vec<DVector<f64>> = Vec::new();
    let mut ps: Vec<DVector<f64>> = Vec::new();
    for _ in 0..p {
        let mut w = xr.tr_mul(&yr);
        let norm = w.norm();
        if norm < ZERO_COV {
            break;
        }
        w /= norm;
        let t = &xr * &w;
        let tt = t.norm_squared();
        if tt < ZERO_COV {
            break;
        }
        let load = xr.tr_mul(&t) / tt;
        let q = yr.dot(&t) / tt;
        xr -= &t * load.transpose();
        yr.axpy(-q, &t, 1.0);
        ws.push(w);
        ps.push(load);
    }
    if ws.is_empty() {
        return Err(Error::InsufficientData(
            "coefficients carry no covariance with the labels".into(),
        ));
    }
    let wm = DMatrix::from_columns(&ws);
    let pm = DMatrix::from_columns(&ps);
    let inner = pm.tr_mul(&wm);
    let inv = inner
        .try_inverse()
        .ok_or_else(|| Error::InsufficientData("singular PLS loading system".into()))?;
    let rotation = &wm * inv;

    let k = ws.len();
    let mut cp = DVector::zeros(k);
    let mut cm = DVector::zeros(k);
    let (mut np, mut nm) = (0.0, 0.0);
    for (r, &l) in labels.iter().enumerate() {
        let centred = x.row(r) - &mean;
        let s = rotation.tr_mul(&centred.transpose());
        if l > 0 {
            cp += s;
            np += 1.0;
        } else {
            cm += s;
            nm += 1.0;
        }
    }
    if np == 0.0 || nm == 0.0 {
        return Err(Error::InsufficientData("both classes must be present".into()));
    }
    Ok(PlsModel {
        basis,
        requested: p,
        mean: mean.iter().copied().collect(),
        weights: wm,
        rotation,
        centroid_plus: (cp / np).as_slice().to_vec(),
        centroid_minus: (cm / nm).as_slice().to_vec(),
    })
}

impl PlsModel {
    pub fn components(&self) -> usize {
        self.weights.ncols()
    }

    pub fn scores(&self, x: &FuncObs) -> Result<DVector<f64>> {
        check_basis(x, self.basis)?;
        let c = DVector::from_iterator(x.coeffs().len(), x.coeffs().iter().zip(&self.mean).map(|(a, m)| a - m));
        Ok(self.rotation.tr_mul(&c))
    }

    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        let s = self.scores(x)?;
        let dist = |c: &[f64]| s.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        Ok(nearer(dist(&self.centroid_plus), dist(&self.centroid_minus)))
    }
}
