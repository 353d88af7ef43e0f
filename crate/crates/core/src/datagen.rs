//! Class-conditional generators of random functions.
//!
//! An observation of class `ℓ` has coefficients
//! `ξ_j = θ_j^{1/2} Z_j + μ_{ℓ,j}` on the class basis, with `Z_j` i.i.d.
//! from the spec's noise law. Sequences are 1-based: slot 1 is the constant
//! basis function, so the default truncation of 51 covers frequencies 0..50.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::{BasisId, FuncObs};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};

pub const DEFAULT_TRUNCATION: usize = 51;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    /// `N(0, 1)`.
    StdNormal,
    /// Uniform on `[-1/2, 1/2]`, deliberately not rescaled (variance 1/12).
    UniformHalf,
}

impl NoiseLaw {
    pub fn variance(self) -> f64 {
        match self {
            NoiseLaw::StdNormal => 1.0,
            NoiseLaw::UniformHalf => 1.0 / 12.0,
        }
    }

    /// Closed support of the unit noise, if bounded.
    pub fn support(self) -> Option<(f64, f64)> {
        match self {
            NoiseLaw::StdNormal => None,
            NoiseLaw::UniformHalf => Some((-0.5, 0.5)),
        }
    }

    fn draw(self, rng: &mut Rng) -> f64 {
        match self {
            NoiseLaw::StdNormal => StandardNormal.sample(rng),
            NoiseLaw::UniformHalf => rng.random_range(-0.5..=0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSpec {
    pub theta: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub mu_minus: Vec<f64>,
    pub noise: NoiseLaw,
    pub basis_plus: BasisId,
    pub basis_minus: BasisId,
}

impl SpectralSpec {
    pub fn new(
        theta: Vec<f64>,
        mu_plus: Vec<f64>,
        mu_minus: Vec<f64>,
        noise: NoiseLaw,
        basis_plus: BasisId,
        basis_minus: BasisId,
    ) -> Result<Self> {
        let spec = Self {
            theta,
            mu_plus,
            mu_minus,
            noise,
            basis_plus,
            basis_minus,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.theta.len();
        if j == 0 {
            return Err(Error::invalid("empty spectral sequence"));
        }
        if self.mu_plus.len() != j
            || self.mu_minus.len() != j
            || self.basis_plus.truncation != j
            || self.basis_minus.truncation != j
        {
            return Err(Error::invalid(
                "spectral spec vectors and bases must share one truncation",
            ));
        }
        if let Some(k) = self.theta.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::invalid(format!("theta_{} must be positive and finite", k + 1)));
        }
        if self.mu_plus.iter().chain(&self.mu_minus).any(|m| !m.is_finite()) {
            return Err(Error::invalid("mean coefficients must be finite"));
        }
        Ok(())
    }

    pub fn truncation(&self) -> usize {
        self.theta.len()
    }

    pub fn mean(&self, label: i8) -> &[f64] {
        if label > 0 {
            &self.mu_plus
        } else {
            &self.mu_minus
        }
    }

    pub fn basis(&self, label: i8) -> BasisId {
        if label > 0 {
            self.basis_plus
        } else {
            self.basis_minus
        }
    }

    /// `μ₊ − μ₋` coefficientwise.
    pub fn mean_difference(&self) -> Vec<f64> {
        self.mu_plus.iter().zip(&self.mu_minus).map(|(p, m)| p - m).collect()
    }

    pub fn shares_basis(&self) -> bool {
        self.basis_plus == self.basis_minus
    }

    /// One draw of class `label`.
    pub fn draw(&self, label: i8, rng: &mut Rng) -> FuncObs {
        let mean = self.mean(label);
        let coeffs = self
            .theta
            .iter()
            .zip(mean)
            .map(|(t, m)| t.sqrt() * self.noise.draw(rng) + m)
            .collect();
        FuncObs::new(self.basis(label), coeffs, Some(label)).expect("spec validated")
    }
}

fn power_theta(j: usize) -> Vec<f64> {
    (1..=j).map(|k| (k as f64).powi(-2)).collect()
}

/// Gaussian scenario: `θ_j = j⁻²`, `μ₊,j = j^{-γ}`, `μ₋ = 0`.
pub fn scenario1(gamma: f64) -> Result<SpectralSpec> {
    scenario1_with(gamma, DEFAULT_TRUNCATION)
}

pub fn scenario1_with(gamma: f64, truncation: usize) -> Result<SpectralSpec> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
    }
    let basis = BasisId::new(crate::basis::BasisFamily::SineOne, truncation)?;
    SpectralSpec::new(
        power_theta(truncation),
        (1..=truncation).map(|k| (k as f64).powf(-gamma)).collect(),
        vec![0.0; truncation],
        NoiseLaw::StdNormal,
        basis,
        basis,
    )
}

/// Uniform location scenario: only the constant slot is shifted, by `mu`.
pub fn scenario2(mu: f64) -> Result<SpectralSpec> {
    scenario2_with(mu, DEFAULT_TRUNCATION)
}

pub fn scenario2_with(mu: f64, truncation: usize) -> Result<SpectralSpec> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
    }
    let basis = BasisId::new(crate::basis::BasisFamily::SineOne, truncation)?;
    let mut mu_plus = vec![0.0; truncation];
    mu_plus[0] = mu;
    SpectralSpec::new(
        power_theta(truncation),
        mu_plus,
        vec![0.0; truncation],
        NoiseLaw::UniformHalf,
        basis,
        basis,
    )
}

/// Same law with class −1 expanded on the cosine family.
pub fn cross_basis(spec: &SpectralSpec) -> SpectralSpec {
    let mut out = spec.clone();
    out.basis_minus = BasisId::cosine(spec.truncation());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub n_plus: usize,
    pub n_minus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub items: Vec<FuncObs>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(items: Vec<FuncObs>) -> Result<Self> {
        if let Some(k) = items.iter().position(|o| o.label().is_none()) {
            return Err(Error::invalid(format!("dataset item {k} has no label")));
        }
        Ok(Self {
            items,
            provenance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<i8> {
        self.items.iter().map(|o| o.label().expect("labeled")).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let plus = self.items.iter().filter(|o| o.label() == Some(1)).count();
        (plus, self.items.len() - plus)
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            items: idx.iter().map(|&i| self.items[i].clone()).collect(),
            provenance: None,
        }
    }

    pub fn with_flipped_labels(&self) -> Dataset {
        Dataset {
            items: self
                .items
                .iter()
                .map(|o| o.clone().with_label(o.label().map(|l| -l)).expect("valid label"))
                .collect(),
            provenance: None,
        }
    }

    /// One JSON record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&serde_json::to_string(item).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let items = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(k, l)| serde_json::from_str::<FuncObs>(l).map_err(|e| Error::Format(format!("line {}: {e}", k + 1))))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(items)
    }
}

/// `n_plus` class +1 items followed by `n_minus` class −1 items, each class
/// on its own stream derived from `seed`.
pub fn sample_counts(spec: &SpectralSpec, n_plus: usize, n_minus: usize, seed: u64) -> Dataset {
    let mut items = Vec::with_capacity(n_plus + n_minus);
    for (tag, label, count) in [(0u64, 1i8, n_plus), (1, -1, n_minus)] {
        let mut rng = rng_from_seed(derive_seed(seed, &[tag]));
        items.extend((0..count).map(|_| spec.draw(label, &mut rng)));
    }
    Dataset {
        items,
        provenance: Some(Provenance { seed, n_plus, n_minus }),
    }
}

pub fn sample_balanced(spec: &SpectralSpec, n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::invalid("n_per_class must be at least 1"));
    }
    Ok(sample_counts(spec, n_per_class, n_per_class, seed))
}

/// `m` items split as evenly as possible (class +1 takes the extra one).
pub fn sample_total(spec: &SpectralSpec, m: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    Ok(sample_counts(spec, m.div_ceil(2), m / 2, seed))
}
