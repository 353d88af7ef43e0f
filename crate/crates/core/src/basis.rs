//! Functional observations stored as coefficient vectors over a named basis.
//!
//! Two families are supported on `[0, 1]`, both with a constant first
//! element: `SineOne` is `{1, √2 sin(π t), √2 sin(2π t), ...}` and
//! `CosineOne` is `{1, √2 cos(π t), √2 cos(2π t), ...}`. Indices are
//! 1-based in the mathematical sense: slot 1 is the constant, slot `j`
//! carries frequency `j - 1`.
//!
//! Inner products come in two flavours. [`IpMode::Coefficient`] treats the
//! coefficients as an ℓ² sequence (`Σ ξ_j ξ'_j`), which is what the
//! classifiers use. [`IpMode::Grid`] evaluates both functions on a uniform
//! grid and integrates with the composite trapezoid rule; it is the only
//! meaningful choice when the two inputs live on different families, since
//! the sine and cosine systems are not mutually orthogonal.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of quadrature points for grid-mode integrals.
pub const DEFAULT_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    SineOne,
    CosineOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisId {
    pub family: BasisFamily,
    pub truncation: usize,
}

impl BasisId {
    pub fn new(family: BasisFamily, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::invalid("basis truncation must be at least 1"));
        }
        Ok(Self { family, truncation })
    }

    pub fn sine(truncation: usize) -> Self {
        Self::new(BasisFamily::SineOne, truncation).expect("truncation >= 1")
    }

    pub fn cosine(truncation: usize) -> Self {
        Self::new(BasisFamily::CosineOne, truncation).expect("truncation >= 1")
    }

    /// Value of basis function `j` (1-based) at `t`.
    pub fn eval(&self, j: usize, t: f64) -> f64 {
        debug_assert!(j >= 1 && j <= self.truncation);
        if j == 1 {
            return 1.0;
        }
        let arg = PI * (j - 1) as f64 * t;
        match self.family {
            BasisFamily::SineOne => SQRT_2 * arg.sin(),
            BasisFamily::CosineOne => SQRT_2 * arg.cos(),
        }
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.family {
            BasisFamily::SineOne => "sine_one",
            BasisFamily::CosineOne => "cosine_one",
        };
        write!(f, "{tag}({})", self.truncation)
    }
}

/// Inner-product mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IpMode {
    #[default]
    Coefficient,
    /// Trapezoid rule on `m` uniform points over `[0, 1]`.
    Grid(usize),
}

/// A functional observation: coefficients `ξ_j = <x, φ_j>` plus an optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FuncObsRecord", into = "FuncObsRecord")]
pub struct FuncObs {
    basis: BasisId,
    coeffs: Vec<f64>,
    label: Option<i8>,
}

impl FuncObs {
    pub fn new(basis: BasisId, coeffs: Vec<f64>, label: Option<i8>) -> Result<Self> {
        if coeffs.len() != basis.truncation {
            return Err(Error::invalid(format!(
                "coefficient length {} does not match basis truncation {}",
                coeffs.len(),
                basis.truncation
            )));
        }
        if let Some(bad) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coefficient {} is not finite", bad + 1)));
        }
        if let Some(l) = label {
            if l != 1 && l != -1 {
                return Err(Error::invalid(format!("label must be -1 or +1, got {l}")));
            }
        }
        Ok(Self { basis, coeffs, label })
    }

    pub fn unlabeled(basis: BasisId, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(basis, coeffs, None)
    }

    pub fn basis(&self) -> BasisId {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn label(&self) -> Option<i8> {
        self.label
    }

    pub fn with_label(mut self, label: Option<i8>) -> Result<Self> {
        if let Some(l) = label {
            if l != 1 && l != -1 {
                return Err(Error::invalid(format!("label must be -1 or +1, got {l}")));
            }
        }
        self.label = label;
        Ok(self)
    }

    /// Value of the represented function at `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.basis.eval(i + 1, t))
            .sum()
    }
}

/// Flat on-disk record: family tag, truncation, coefficients, optional label.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FuncObsRecord {
    family: BasisFamily,
    j: usize,
    coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<i8>,
}

impl TryFrom<FuncObsRecord> for FuncObs {
    type Error = Error;

    fn try_from(r: FuncObsRecord) -> Result<Self> {
        FuncObs::new(BasisId::new(r.family, r.j)?, r.coeffs, r.label)
    }
}

impl From<FuncObs> for FuncObsRecord {
    fn from(o: FuncObs) -> Self {
        FuncObsRecord {
            family: o.basis.family,
            j: o.basis.truncation,
            coeffs: o.coeffs,
            label: o.label,
        }
    }
}

fn check_grid(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidQuadrature(m));
    }
    Ok(())
}

fn check_same_basis(a: &FuncObs, b: &FuncObs) -> Result<()> {
    if a.basis != b.basis {
        return Err(Error::BasisMismatch(a.basis.to_string(), b.basis.to_string()));
    }
    Ok(())
}

/// Values at `t_k = k / (m - 1)`, `k = 0..m`.
pub fn evaluate_on_grid(f: &FuncObs, m: usize) -> Result<Vec<f64>> {
    check_grid(m)?;
    let step = 1.0 / (m - 1) as f64;
    Ok((0..m).map(|k| f.value_at(k as f64 * step)).collect())
}

/// Composite trapezoid rule for samples on a uniform grid over `[0, 1]`.
pub fn trapezoid(values: &[f64]) -> f64 {
    let m = values.len();
    debug_assert!(m >= 2);
    let inner: f64 = values[1..m - 1].iter().sum();
    (inner + 0.5 * (values[0] + values[m - 1])) / (m - 1) as f64
}

pub fn inner_product(a: &FuncObs, b: &FuncObs, mode: IpMode) -> Result<f64> {
    match mode {
        IpMode::Coefficient => {
            check_same_basis(a, b)?;
            Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum())
        }
        IpMode::Grid(m) => {
            let va = evaluate_on_grid(a, m)?;
            let vb = evaluate_on_grid(b, m)?;
            let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
            Ok(trapezoid(&prod))
        }
    }
}

pub fn l2_distance_sq(a: &FuncObs, b: &FuncObs, mode: IpMode) -> Result<f64> {
    match mode {
        IpMode::Coefficient => {
            check_same_basis(a, b)?;
            Ok(coeff_distance_sq(&a.coeffs, &b.coeffs))
        }
        IpMode::Grid(m) => {
            let va = evaluate_on_grid(a, m)?;
            let vb = evaluate_on_grid(b, m)?;
            let sq: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| (x - y) * (x - y)).collect();
            Ok(trapezoid(&sq))
        }
    }
}

#[inline]
pub(crate) fn coeff_distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Matrix of grid-mode inner products `<φ_i, φ'_j>` between two bases
/// (rows index `a`, columns index `b`).
pub fn overlap_matrix(a: BasisId, b: BasisId, m: usize) -> Result<Vec<Vec<f64>>> {
    check_grid(m)?;
    let step = 1.0 / (m - 1) as f64;
    let ts: Vec<f64> = (0..m).map(|k| k as f64 * step).collect();
    let table = |basis: BasisId| -> Vec<Vec<f64>> {
        (1..=basis.truncation)
            .map(|j| ts.iter().map(|&t| basis.eval(j, t)).collect())
            .collect()
    };
    let ta = table(a);
    let tb = table(b);
    Ok(ta
        .iter()
        .map(|row_a| {
            tb.iter()
                .map(|row_b| {
                    let prod: Vec<f64> = row_a.iter().zip(row_b).map(|(x, y)| x * y).collect();
                    trapezoid(&prod)
                })
                .collect()
        })
        .collect())
}
