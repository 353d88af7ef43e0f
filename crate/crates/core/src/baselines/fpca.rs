use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{check_basis, class_means, dataset_parts};
use crate::basis::{BasisId, FuncObs};
use crate::datagen::Dataset;
use crate::error::{Error, Result};

/// Which covariance the components diagonalise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// Each class centred at its own mean, pooled with `n − 2` degrees of freedom.
    WithinClass,
    /// Ordinary sample covariance, labels ignored.
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaBasis {
    pub kind: CovarianceKind,
    pub basis: BasisId,
    /// Grand mean of the coefficients.
    pub mean: Vec<f64>,
    /// Columns are orthonormal eigenvectors, sorted by eigenvalue.
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
    /// Fewer than the requested components had positive variance.
    pub rank_deficient: bool,
}

const REL_EIGEN_FLOOR: f64 = 1e-12;

fn covariance(x: &DMatrix<f64>, labels: &[i8], kind: CovarianceKind) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let mut centred = x.clone();
    let dof = match kind {
        CovarianceKind::Total => {
            let mean = x.row_mean();
            for mut row in centred.row_iter_mut() {
                row -= &mean;
            }
            n - 1
        }
        CovarianceKind::WithinClass => {
            let (mp, mm, _, _) = class_means(x, labels)?;
            for (r, mut row) in centred.row_iter_mut().enumerate() {
                let m = if labels[r] > 0 { &mp } else { &mm };
                row -= m.transpose();
            }
            n.saturating_sub(2).max(1)
        }
    };
    Ok(centred.tr_mul(&centred) / dof as f64)
}

fn decompose(data: &Dataset, p: usize, kind: CovarianceKind) -> Result<FpcaBasis> {
    let (x, basis, labels) = dataset_parts(data)?;
    let n = x.nrows();
    let j = x.ncols();
    if n < 2 {
        return Err(Error::InsufficientData("fpca needs at least two observations".into()));
    }
    if p == 0 || p > j.min(n - 1) {
        return Err(Error::invalid(format!("p={p} outside 1..={}", j.min(n - 1))));
    }
    let cov = covariance(&x, &labels, kind)?;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let keep: Vec<usize> = order
        .into_iter()
        .take(p)
        .filter(|&k| top > 0.0 && eig.eigenvalues[k] > REL_EIGEN_FLOOR * top)
        .collect();
    if keep.is_empty() {
        return Err(Error::InsufficientData("coefficients have no variance".into()));
    }
    let mut vectors = DMatrix::zeros(j, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        // Deterministic orientation: largest-magnitude entry positive.
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v = -v;
        }
        vectors.set_column(c, &v);
    }
    Ok(FpcaBasis {
        kind,
        basis,
        mean: x.row_mean().iter().copied().collect(),
        values: keep.iter().map(|&k| eig.eigenvalues[k]).collect(),
        rank_deficient: keep.len() < p,
        vectors,
    })
}

/// Top-`p` eigenpairs of the pooled within-class coefficient covariance.
pub fn fpca(data: &Dataset, p: usize) -> Result<FpcaBasis> {
    decompose(data, p, CovarianceKind::WithinClass)
}

/// Top-`p` eigenpairs of the total (label-free) coefficient covariance.
pub fn fpca_total(data: &Dataset, p: usize) -> Result<FpcaBasis> {
    decompose(data, p, CovarianceKind::Total)
}

impl FpcaBasis {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn scores_of(&self, coeffs: &[f64]) -> DVector<f64> {
        let c = DVector::from_iterator(coeffs.len(), coeffs.iter().zip(&self.mean).map(|(a, m)| a - m));
        self.vectors.tr_mul(&c)
    }

    pub fn scores(&self, x: &FuncObs) -> Result<DVector<f64>> {
        check_basis(x, self.basis)?;
        Ok(self.scores_of(x.coeffs()))
    }

    /// Score matrix, one row per item.
    pub fn score_matrix(&self, items: &[FuncObs]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(items.len(), self.rank());
        for (r, x) in items.iter().enumerate() {
            out.set_row(r, &self.scores(x)?.transpose());
        }
        Ok(out)
    }

    /// Coefficients rebuilt from the retained components.
    pub fn reconstruct(&self, x: &FuncObs) -> Result<Vec<f64>> {
        let s = self.scores(x)?;
        let back = &self.vectors * s;
        Ok(back.iter().zip(&self.mean).map(|(b, m)| b + m).collect())
    }
}
