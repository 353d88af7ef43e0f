//! Comparison classifiers operating on coefficient vectors.
//!
//! All of them break exact ties towards `+1`.

mod centroid;
mod fpca;
pub(crate) mod gp;
mod kde;
mod lda;
mod pls;

pub use centroid::{fit_centroid, CentroidModel};
pub use fpca::{fpca, fpca_total, CovarianceKind, FpcaBasis};
pub use gp::{fit_gp_laplace, fit_gp_laplace_with, GpModel, GpOptions};
pub use kde::{fit_kde_bayes, silverman_bandwidth, KdeModel};
pub use lda::{fit_lda, LdaModel};
pub use pls::{fit_pls_centroid, PlsModel};

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisId, FuncObs};
use crate::datagen::Dataset;
use crate::error::{Error, Result};

/// Stack coefficients row-wise; every item must share one basis.
pub(crate) fn design_matrix(items: &[FuncObs]) -> Result<(DMatrix<f64>, BasisId)> {
    let first = items
        .first()
        .ok_or_else(|| Error::InsufficientData("empty dataset".into()))?;
    let basis = first.basis();
    if let Some(o) = items.iter().find(|o| o.basis() != basis) {
        return Err(Error::BasisMismatch(basis.to_string(), o.basis().to_string()));
    }
    let j = basis.truncation;
    Ok((DMatrix::from_fn(items.len(), j, |r, c| items[r].coeffs()[c]), basis))
}

pub(crate) fn check_basis(x: &FuncObs, basis: BasisId) -> Result<()> {
    if x.basis() != basis {
        return Err(Error::BasisMismatch(x.basis().to_string(), basis.to_string()));
    }
    Ok(())
}

/// Per-class means and counts (`+1` first).
pub(crate) fn class_means(x: &DMatrix<f64>, labels: &[i8]) -> Result<(DVector<f64>, DVector<f64>, usize, usize)> {
    let j = x.ncols();
    let mut plus = DVector::zeros(j);
    let mut minus = DVector::zeros(j);
    let (mut np, mut nm) = (0usize, 0usize);
    for (r, &l) in labels.iter().enumerate() {
        if l > 0 {
            plus += x.row(r).transpose();
            np += 1;
        } else {
            minus += x.row(r).transpose();
            nm += 1;
        }
    }
    if np == 0 || nm == 0 {
        return Err(Error::InsufficientData("both classes must be present".into()));
    }
    Ok((plus / np as f64, minus / nm as f64, np, nm))
}

/// Nearest of two centroids; ties go to `+1`.
#[inline]
pub(crate) fn nearer(d_plus: f64, d_minus: f64) -> i8 {
    if d_plus <= d_minus {
        1
    } else {
        -1
    }
}

pub(crate) fn dataset_parts(data: &Dataset) -> Result<(DMatrix<f64>, BasisId, Vec<i8>)> {
    let (x, basis) = design_matrix(&data.items)?;
    Ok((x, basis, data.labels()))
}
