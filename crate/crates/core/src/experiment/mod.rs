//! Seeded Monte-Carlo error-rate studies.
//!
//! A [`Plan`] crosses methods, scenarios and per-class training sizes. Each
//! `(method, scenario, n, repetition)` cell draws its own training, test and
//! validation samples from seeds that depend only on those four indices, so
//! adding repetitions never changes existing ones.

mod export;
mod rate;
mod svg;

pub use export::{export_csv, parse_long_csv, write_outputs, LongRow, Manifest, SummaryRow};
pub use rate::{clamped_means, rate_fit, RateFit, Regime, RegimeThresholds};
pub use svg::{export_svg, plot_coordinates, render_svg, PlotAxes};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::IpMode;
use crate::classifier::{Method, MethodFitEval};
use crate::datagen::{
    cross_basis, sample_balanced, sample_total, scenario1_with, scenario2_with, SpectralSpec, DEFAULT_TRUNCATION,
};
use crate::error::{Error, Result};
use crate::modelsel::{select, Grid, SelectionReport, ValidationMode, FAILURE_ERROR};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Gaussian law, `param` is the mean-decay exponent `γ`.
    Scenario1,
    /// Uniform location law, `param` is the shift `μ`.
    Scenario2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub param: f64,
    #[serde(default)]
    pub cross_basis: bool,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

impl ScenarioConfig {
    pub fn scenario1(gamma: f64) -> Self {
        Self {
            kind: ScenarioKind::Scenario1,
            param: gamma,
            cross_basis: false,
            truncation: DEFAULT_TRUNCATION,
        }
    }

    pub fn scenario2(mu: f64) -> Self {
        Self {
            kind: ScenarioKind::Scenario2,
            param: mu,
            ..Self::scenario1(0.0)
        }
    }

    pub fn spec(&self) -> Result<SpectralSpec> {
        let base = match self.kind {
            ScenarioKind::Scenario1 => scenario1_with(self.param, self.truncation)?,
            ScenarioKind::Scenario2 => scenario2_with(self.param, self.truncation)?,
        };
        Ok(if self.cross_basis { cross_basis(&base) } else { base })
    }

    /// `scenario1`, `scenario2`, with a `_cross` suffix for cross-basis data.
    pub fn tag(&self) -> String {
        let base = match self.kind {
            ScenarioKind::Scenario1 => "scenario1",
            ScenarioKind::Scenario2 => "scenario2",
        };
        if self.cross_basis {
            format!("{base}_cross")
        } else {
            base.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    /// Label used in outputs; defaults to the method tag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub method: Method,
    /// Defaults to the method's standard grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        Self {
            name: None,
            method,
            grid: None,
        }
    }

    pub fn named(name: impl Into<String>, method: Method, grid: Grid) -> Self {
        Self {
            name: Some(name.into()),
            method,
            grid: Some(grid),
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.method.tag().to_string())
    }

    pub fn resolved_grid(&self) -> Grid {
        self.grid.clone().unwrap_or_else(|| self.method.default_grid())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValidationConfig {
    /// Fresh simulated validation sample of `m_val` items.
    #[default]
    Fresh,
    KFold {
        k: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub scenarios: Vec<ScenarioConfig>,
    /// Strictly increasing per-class training sizes.
    pub n_grid: Vec<usize>,
    pub repetitions: usize,
    pub m_test: usize,
    #[serde(default = "default_m_val")]
    pub m_val: usize,
    #[serde(default)]
    pub validation: ValidationConfig,
    pub methods: Vec<MethodConfig>,
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub regime: RegimeThresholds,
}

fn default_m_val() -> usize {
    1000
}

fn default_output_dir() -> String {
    "out".into()
}

impl Default for Plan {
    /// Desk-scale RKHS study on both scenarios.
    fn default() -> Self {
        Self {
            scenarios: vec![
                ScenarioConfig::scenario1(1.3),
                ScenarioConfig::scenario1(1.7),
                ScenarioConfig::scenario2(1.2),
                ScenarioConfig::scenario2(0.8),
            ],
            n_grid: vec![25, 50, 100, 200, 400],
            repetitions: 20,
            m_test: 500,
            m_val: default_m_val(),
            validation: ValidationConfig::Fresh,
            methods: vec![MethodConfig::new(Method::rkhs())],
            master_seed: 0,
            output_dir: default_output_dir(),
            regime: RegimeThresholds::default(),
        }
    }
}

impl Plan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Plan = serde_json::from_str(text).map_err(|e| Error::invalid(format!("plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid("plan needs at least one scenario and one method"));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "n_grid must be non-empty, positive and strictly increasing",
            ));
        }
        if self.repetitions == 0 || self.m_test == 0 || self.m_val == 0 {
            return Err(Error::invalid("repetitions, m_test and m_val must be at least 1"));
        }
        if let ValidationConfig::KFold { k } = self.validation {
            if k < 2 || k > 2 * self.n_grid[0] {
                return Err(Error::invalid(format!("k={k} outside 2..={}", 2 * self.n_grid[0])));
            }
        }
        let mut labels: Vec<String> = Vec::new();
        for m in &self.methods {
            m.method.check_grid(&m.resolved_grid())?;
            let label = m.label();
            if labels.contains(&label) || label.contains(',') || label.is_empty() {
                return Err(Error::invalid(format!(
                    "method name '{label}' is empty, repeated or contains a comma"
                )));
            }
            labels.push(label);
        }
        for s in &self.scenarios {
            s.spec()?;
            if s.cross_basis {
                if let Some(m) = self
                    .methods
                    .iter()
                    .find(|m| !matches!(m.method.ip_mode(), Some(IpMode::Grid(_))) && m.method != Method::ConstantPlus)
                {
                    return Err(Error::invalid(format!(
                        "cross-basis scenarios need a grid inner product; '{}' cannot use one",
                        m.label()
                    )));
                }
            }
        }
        self.regime.validate()
    }
}

/// Errors at one training size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub errors: Vec<f64>,
    pub failed: Vec<bool>,
    pub mean: f64,
    pub std: f64,
}

impl CurvePoint {
    pub fn new(n: usize, errors: Vec<f64>, failed: Vec<bool>) -> Self {
        let (mean, std) = mean_std(&errors);
        Self {
            n,
            errors,
            failed,
            mean,
            std,
        }
    }

    pub fn failures(&self) -> usize {
        self.failed.iter().filter(|f| **f).count()
    }

    pub fn median(&self) -> f64 {
        let mut v = self.errors.clone();
        v.sort_by(f64::total_cmp);
        let k = v.len();
        if k == 0 {
            return f64::NAN;
        }
        if k % 2 == 1 {
            v[k / 2]
        } else {
            0.5 * (v[k / 2 - 1] + v[k / 2])
        }
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub method: String,
    pub scenario: String,
    pub param: f64,
    pub m_test: usize,
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn point(&self, n: usize) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.n == n)
    }
}

/// Outcome of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    pub method: String,
    pub scenario: String,
    pub param: f64,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub error: f64,
    pub failed: bool,
    pub selection: Option<SelectionReport>,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curves: Vec<ErrorCurve>,
    pub repetitions: Vec<Repetition>,
}

/// Seed for cell `(method, scenario, n, repetition)`; the training sample
/// uses sub-seed 0, the test sample 1 and the validation sample 2.
pub fn cell_seed(master: u64, method: usize, scenario: usize, n: usize, rep: usize) -> u64 {
    derive_seed(master, &[method as u64, scenario as u64, n as u64, rep as u64])
}

struct Cell {
    mi: usize,
    si: usize,
    ni: usize,
    rep: usize,
}

fn run_cell(plan: &Plan, specs: &[SpectralSpec], c: &Cell) -> Repetition {
    let start = Instant::now();
    let mcfg = &plan.methods[c.mi];
    let scfg = &plan.scenarios[c.si];
    let spec = &specs[c.si];
    let n = plan.n_grid[c.ni];
    let seed = cell_seed(plan.master_seed, c.mi, c.si, c.ni, c.rep);
    let outcome = (|| -> Result<(f64, SelectionReport)> {
        let train = sample_balanced(spec, n, derive_seed(seed, &[0]))?;
        let test = sample_total(spec, plan.m_test, derive_seed(seed, &[1]))?;
        let mode = match plan.validation {
            ValidationConfig::Fresh => ValidationMode::FreshValidation {
                spec: spec.clone(),
                m_val: plan.m_val,
                seed: derive_seed(seed, &[2]),
            },
            ValidationConfig::KFold { k } => ValidationMode::KFold {
                k,
                seed: derive_seed(seed, &[2]),
            },
        };
        let grid = mcfg.resolved_grid();
        let report = select(&train, &MethodFitEval::new(mcfg.method), &grid, &mode)?;
        let model = mcfg.method.fit(&train, &report.chosen)?;
        Ok((model.error_rate(&test)?, report))
    })();
    let (error, failed, selection) = match outcome {
        Ok((e, r)) => (e, false, Some(r)),
        Err(_) => (FAILURE_ERROR, true, None),
    };
    Repetition {
        method: mcfg.label(),
        scenario: scfg.tag(),
        param: scfg.param,
        n,
        rep: c.rep,
        seed,
        error,
        failed,
        selection,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every cell of `plan` on the current rayon pool.
pub fn run(plan: &Plan) -> Result<RunOutput> {
    plan.validate()?;
    let specs: Vec<SpectralSpec> = plan.scenarios.iter().map(|s| s.spec()).collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for mi in 0..plan.methods.len() {
        for si in 0..plan.scenarios.len() {
            for ni in 0..plan.n_grid.len() {
                for rep in 0..plan.repetitions {
                    cells.push(Cell { mi, si, ni, rep });
                }
            }
        }
    }
    let reps: Vec<Repetition> = cells.par_iter().map(|c| run_cell(plan, &specs, c)).collect();

    let mut curves = Vec::new();
    for chunk in reps.chunks(plan.repetitions * plan.n_grid.len()) {
        let first = &chunk[0];
        let points = chunk
            .chunks(plan.repetitions)
            .map(|cell| {
                CurvePoint::new(
                    cell[0].n,
                    cell.iter().map(|r| r.error).collect(),
                    cell.iter().map(|r| r.failed).collect(),
                )
            })
            .collect();
        curves.push(ErrorCurve {
            method: first.method.clone(),
            scenario: first.scenario.clone(),
            param: first.param,
            m_test: plan.m_test,
            points,
        });
    }
    Ok(RunOutput {
        curves,
        repetitions: reps,
    })
}
