use serde::{Deserialize, Serialize};

use super::ErrorCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Exponential,
    Polynomial,
    Flat,
    Undetermined,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Exponential => "exponential",
            Self::Polynomial => "polynomial",
            Self::Flat => "flat",
            Self::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exponential" => Self::Exponential,
            "polynomial" => Self::Polynomial,
            "flat" => Self::Flat,
            "undetermined" => Self::Undetermined,
            other => return Err(Error::Format(format!("unknown regime '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Required lead in `r²` for the exponential or polynomial verdict.
    pub r2_gap: f64,
    /// Both slopes within this of zero count as flat.
    pub flat_slope: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            r2_gap: 0.05,
            flat_slope: 1e-3,
        }
    }
}

impl RegimeThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.r2_gap >= 0.0) || !(self.flat_slope >= 0.0) {
            return Err(Error::invalid("regime thresholds must be non-negative"));
        }
        Ok(())
    }
}

/// Decay-rate summary of an error curve. `b_exp` is minus the slope of
/// `ln ē` against `n`; `b_poly` minus the slope against `ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub b_exp: f64,
    pub r2_exp: f64,
    pub b_poly: f64,
    pub r2_poly: f64,
    pub regime: Regime,
}

/// Ordinary least squares `(slope, r²)`; `r²` is 0 when `y` is constant.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        (slope * sxy / syy).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (slope, r2)
}

/// Mean error at each `n`, floored at half a test count.
pub fn clamped_means(curve: &ErrorCurve) -> Vec<(usize, f64)> {
    let floor = 1.0 / (2.0 * curve.m_test as f64);
    curve.points.iter().map(|p| (p.n, p.mean.max(floor))).collect()
}

pub fn rate_fit(curve: &ErrorCurve, thresholds: &RegimeThresholds) -> Result<RateFit> {
    let pts = clamped_means(curve);
    let mut ns: Vec<usize> = pts.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs 3 distinct n, got {}",
            ns.len()
        )));
    }
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let xn: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let xl: Vec<f64> = xn.iter().map(|v| v.ln()).collect();
    let (se, r2_exp) = ols(&xn, &y);
    let (sp, r2_poly) = ols(&xl, &y);
    let (b_exp, b_poly) = (-se, -sp);
    let gap = thresholds.r2_gap;
    let regime = if r2_exp >= r2_poly + gap && b_exp > 0.0 {
        Regime::Exponential
    } else if r2_poly >= r2_exp + gap && b_poly > 0.0 {
        Regime::Polynomial
    } else if se.abs() <= thresholds.flat_slope && sp.abs() <= thresholds.flat_slope {
        Regime::Flat
    } else {
        Regime::Undetermined
    };
    Ok(RateFit {
        b_exp,
        r2_exp,
        b_poly,
        r2_poly,
        regime,
    })
}
