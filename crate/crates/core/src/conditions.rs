//! Perfect-classification diagnostics.
//!
//! * The series form of the Delaigle–Hall condition, `Σ θ_j⁻¹ μ_j² = ∞`,
//!   decided by the power-law exponent of the tail terms rather than by the
//!   magnitude of a partial sum.
//! * The general ratio form at a finite truncation, for bases that differ
//!   between labels.
//! * The weighted direction `ψ_M`, the quadratic discriminant `f*_M`, and an
//!   empirical estimate of the hard margin `inf |f*_M|` over the support.
//! * Closed-form Bayes risk of the uniform location model.
//!
//! Sign convention: `f*_M(x) > 0` means `x` is closer to `μ₋`, so the induced
//! label is `sign(-f*_M(x))`.

use serde::{Deserialize, Serialize};

use crate::basis::{overlap_matrix, FuncObs, DEFAULT_GRID};
use crate::datagen::{sample_total, NoiseLaw, SpectralSpec};
use crate::error::{Error, Result};

/// Half-width of the inconclusive band around exponent −1.
pub const EXPONENT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    /// `(M, S_M)` at `M = 10, 100, ...` and at `M_max`.
    pub partial_sums: Vec<(usize, f64)>,
    /// Log-log slope of the terms over the last decade; `None` when every
    /// tail term is zero.
    pub tail_exponent: Option<f64>,
    pub verdict: Verdict,
}

impl SeriesVerdict {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().map(|p| p.1).unwrap_or(0.0)
    }
}

pub fn classify_exponent(p: Option<f64>) -> Verdict {
    match p {
        None => Verdict::Convergent,
        Some(p) if p >= -1.0 + EXPONENT_TOL => Verdict::Divergent,
        Some(p) if p <= -1.0 - EXPONENT_TOL => Verdict::Convergent,
        Some(_) => Verdict::Inconclusive,
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Partial sums of `θ_j⁻¹ μ_j²` (1-based `j`) and the divergence verdict.
pub fn dh_series<T, D>(theta: T, mu_diff: D, m_max: usize) -> Result<SeriesVerdict>
where
    T: Fn(usize) -> f64,
    D: Fn(usize) -> f64,
{
    if m_max < 100 {
        return Err(Error::invalid(format!("M_max must be at least 100, got {m_max}")));
    }
    let tail_start = m_max / 10 + 1;
    let mut acc = CompensatedSum::default();
    let mut checkpoint = 10;
    let mut partial_sums = Vec::new();
    // Simple regression accumulators for ln(term) on ln(j) over the tail.
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);

    for j in 1..=m_max {
        let t = theta(j);
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("theta_{j} must be positive, got {t}")));
        }
        let m = mu_diff(j);
        let term = m * m / t;
        acc.add(term);
        if j >= tail_start && term > 0.0 {
            let x = (j as f64).ln();
            let y = term.ln();
            n += 1.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        if j == checkpoint {
            partial_sums.push((j, acc.value()));
            checkpoint = checkpoint.saturating_mul(10);
        }
    }
    if partial_sums.last().map(|p| p.0) != Some(m_max) {
        partial_sums.push((m_max, acc.value()));
    }

    let tail_exponent = if n >= 2.0 {
        let denom = n * sxx - sx * sx;
        Some((n * sxy - sx * sy) / denom)
    } else {
        None
    };
    Ok(SeriesVerdict {
        partial_sums,
        tail_exponent,
        verdict: classify_exponent(tail_exponent),
    })
}

/// Power-law rule for `θ_j ≍ j^{-α}`, `μ_j ≍ j^{-β}`.
pub fn dh_power_law(alpha: f64, beta: f64) -> bool {
    2.0 * beta - alpha <= 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRatio {
    /// Ratio at the requested truncation; `+∞` when the denominator vanishes.
    pub value: f64,
    pub zero_denominator: bool,
}

/// Finite-truncation Delaigle–Hall ratio.
///
/// `overlap[i][j] = <φ_i, φ_{ℓj}>` with rows over the common basis and
/// columns over the basis of the label under test; the inner sum over `j`
/// stops at the truncation.
pub fn dh_ratio(spec: &SpectralSpec, overlap: &[Vec<f64>], m: usize) -> Result<DhRatio> {
    let jn = spec.truncation();
    if m == 0 || m > jn {
        return Err(Error::invalid(format!("truncation M={m} outside 1..={jn}")));
    }
    if overlap.len() < m || overlap.iter().any(|row| row.len() != jn) {
        return Err(Error::invalid("overlap matrix dimensions inconsistent with the spec"));
    }
    let diff = spec.mean_difference();
    let weights: Vec<f64> = (0..m).map(|i| diff[i] / spec.theta[i]).collect();
    let numer: f64 = (0..m).map(|i| weights[i] * diff[i]).sum::<f64>().powi(2);
    let denom: f64 = (0..jn)
        .map(|j| {
            let inner: f64 = (0..m).map(|i| weights[i] * overlap[i][j]).sum();
            spec.theta[j] * inner * inner
        })
        .sum();
    if denom == 0.0 {
        return Ok(DhRatio {
            value: f64::INFINITY,
            zero_denominator: true,
        });
    }
    Ok(DhRatio {
        value: numer / denom,
        zero_denominator: false,
    })
}

pub fn identity_overlap(j: usize) -> Vec<Vec<f64>> {
    (0..j)
        .map(|r| (0..j).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// The overlap a generated spec implies for label `ell`: identity when the
/// label shares the reference (class +1) basis, grid quadrature otherwise.
pub fn spec_overlap(spec: &SpectralSpec, ell: i8) -> Result<Vec<Vec<f64>>> {
    let target = spec.basis(ell);
    if target == spec.basis_plus {
        Ok(identity_overlap(spec.truncation()))
    } else {
        overlap_matrix(spec.basis_plus, target, DEFAULT_GRID)
    }
}

/// [`dh_ratio`] with the overlap implied by the spec for label `ell`.
pub fn dh_ratio_for_label(spec: &SpectralSpec, m: usize, ell: i8) -> Result<DhRatio> {
    dh_ratio(spec, &spec_overlap(spec, ell)?, m)
}

/// `ψ_M = Σ_{j≤M} θ_j⁻¹ (μ₊,j − μ₋,j) φ_j` on the class +1 basis.
pub fn psi_m(spec: &SpectralSpec, m: usize) -> Result<FuncObs> {
    let jn = spec.truncation();
    if m == 0 || m > jn {
        return Err(Error::invalid(format!("truncation M={m} outside 1..={jn}")));
    }
    let diff = spec.mean_difference();
    let coeffs = (0..jn)
        .map(|j| if j < m { diff[j] / spec.theta[j] } else { 0.0 })
        .collect();
    FuncObs::unlabeled(spec.basis_plus, coeffs)
}

fn f_star_with(x: &[f64], spec: &SpectralSpec, psi: &[f64]) -> f64 {
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..psi.len() {
        a += (x[j] - spec.mu_plus[j]) * psi[j];
        b += (x[j] - spec.mu_minus[j]) * psi[j];
    }
    a * a - b * b
}

/// `f*_M(x) = <x − μ₊, ψ_M>² − <x − μ₋, ψ_M>²`.
pub fn f_star(x: &FuncObs, spec: &SpectralSpec, m: usize) -> Result<f64> {
    let psi = psi_m(spec, m)?;
    if x.basis() != psi.basis() {
        return Err(Error::BasisMismatch(x.basis().to_string(), psi.basis().to_string()));
    }
    Ok(f_star_with(x.coeffs(), spec, psi.coeffs()))
}

/// Label induced by `f*`: −1 when `f* > 0`, +1 otherwise.
pub fn f_star_label(value: f64) -> i8 {
    if value > 0.0 {
        -1
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    #[serde(rename = "M")]
    pub m: usize,
    pub n_probe: usize,
    pub empirical_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_margin: Option<f64>,
}

/// Shift `μ` if `spec` is the uniform location model on the constant slot.
pub fn scenario2_shift(spec: &SpectralSpec) -> Option<f64> {
    let uniform = spec.noise == NoiseLaw::UniformHalf;
    let flat_rest = spec.mu_plus[1..].iter().all(|m| *m == 0.0);
    let zero_minus = spec.mu_minus.iter().all(|m| *m == 0.0);
    (uniform && flat_rest && zero_minus && spec.shares_basis() && spec.theta[0] == 1.0).then_some(spec.mu_plus[0])
}

/// Minimum `|f*_M|` over `n_probe` draws from the balanced mixture.
pub fn empirical_margin(spec: &SpectralSpec, m: usize, n_probe: usize, seed: u64) -> Result<MarginReport> {
    if n_probe == 0 {
        return Err(Error::invalid("n_probe must be at least 1"));
    }
    let psi = psi_m(spec, m)?;
    let probes = sample_total(spec, n_probe, seed)?;
    let mut margin = f64::INFINITY;
    for x in &probes.items {
        if x.basis() != psi.basis() {
            return Err(Error::BasisMismatch(x.basis().to_string(), psi.basis().to_string()));
        }
        margin = margin.min(f_star_with(x.coeffs(), spec, psi.coeffs()).abs());
    }
    let analytic_margin = scenario2_shift(spec)
        .filter(|mu| *mu > 1.0)
        .map(|mu| mu.powi(3) * (mu - 1.0));
    Ok(MarginReport {
        m,
        n_probe,
        empirical_margin: margin,
        analytic_margin,
    })
}

/// Bayes risk of the balanced uniform location model: `max(0, (1 − μ)/2)`.
pub fn bayes_risk_scenario2(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
    }
    Ok((0.5 * (1.0 - mu)).max(0.0))
}
