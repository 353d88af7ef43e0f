//! Grid-search hyperparameter selection.
//!
//! A [`FitEval`] prepares whatever it can reuse from a train/validation split
//! (distance matrices, for instance) and then scores single grid points.
//! [`select`] evaluates every point once per split and keeps the smallest
//! error, breaking ties towards smaller values in axis order.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::datagen::{sample_total, Dataset, SpectralSpec};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Error recorded for a grid point whose fit failed.
pub const FAILURE_ERROR: f64 = 1.0;

/// `{2⁻⁵, 2⁻⁴, …, 2⁴}`.
pub fn default_grid_values() -> Vec<f64> {
    (-5..=4).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    pub fn integers(name: impl Into<String>, range: std::ops::RangeInclusive<usize>) -> Self {
        Self::new(name, range.map(|v| v as f64).collect())
    }
}

/// Named axes; the grid is their Cartesian product with the first axis
/// varying slowest. Zero axes give a single empty point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Axis>", into = "Vec<Axis>")]
pub struct Grid {
    axes: Vec<Axis>,
}

impl TryFrom<Vec<Axis>> for Grid {
    type Error = Error;
    fn try_from(axes: Vec<Axis>) -> Result<Self> {
        Grid::new(axes)
    }
}

impl From<Grid> for Vec<Axis> {
    fn from(g: Grid) -> Self {
        g.axes
    }
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        for (i, a) in axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(Error::invalid(format!("grid axis '{}' is empty", a.name)));
            }
            if a.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("grid axis '{}' has a non-finite value", a.name)));
            }
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(format!("duplicate grid axis '{}'", a.name)));
            }
        }
        Ok(Self { axes })
    }

    pub fn empty() -> Self {
        Self { axes: Vec::new() }
    }

    /// Joint `(h, λ)` grid over [`default_grid_values`] on both axes.
    pub fn default_rkhs() -> Self {
        Self {
            axes: vec![
                Axis::new("h", default_grid_values()),
                Axis::new("lambda", default_grid_values()),
            ],
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = vec![GridPoint::default()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.0.push((axis.name.clone(), *v));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// One grid point: `(axis name, value)` in axis order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridPoint(pub Vec<(String, f64)>);

impl GridPoint {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::invalid(format!("grid point lacks axis '{name}'")))
    }

    /// Integer-valued axis such as a component count.
    pub fn require_count(&self, name: &str) -> Result<usize> {
        let v = self.require(name)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::invalid(format!(
                "axis '{name}' must be a positive integer, got {v}"
            )));
        }
        Ok(v as usize)
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|(_, v)| *v).collect()
    }
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(n, v)| format!("{n}={v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A fit-and-score procedure.
pub trait FitEval: Sync {
    type Context;
    fn prepare(&self, train: &Dataset, val: &Dataset) -> Result<Self::Context>;
    /// Validation misclassification rate at `point`.
    fn evaluate(&self, ctx: &Self::Context, point: &GridPoint) -> Result<f64>;
}

/// Adapts a closure `(train, val, point) -> error` to [`FitEval`].
pub struct FnFitEval<F>(pub F);

impl<F> FitEval for FnFitEval<F>
where
    F: Fn(&Dataset, &Dataset, &GridPoint) -> Result<f64> + Sync,
{
    type Context = (Dataset, Dataset);

    fn prepare(&self, train: &Dataset, val: &Dataset) -> Result<Self::Context> {
        Ok((train.clone(), val.clone()))
    }

    fn evaluate(&self, ctx: &Self::Context, point: &GridPoint) -> Result<f64> {
        (self.0)(&ctx.0, &ctx.1, point)
    }
}

#[derive(Debug, Clone)]
pub enum ValidationMode {
    /// One fresh validation sample of `m_val` items (balanced) from `spec`,
    /// shared by all grid points.
    FreshValidation {
        spec: SpectralSpec,
        m_val: usize,
        seed: u64,
    },
    KFold {
        k: usize,
        seed: u64,
    },
}

impl ValidationMode {
    pub fn seed(&self) -> u64 {
        match self {
            Self::FreshValidation { seed, .. } | Self::KFold { seed, .. } => *seed,
        }
    }

    pub fn record(&self) -> ModeRecord {
        match self {
            Self::FreshValidation { m_val, seed, .. } => ModeRecord::FreshValidation {
                m_val: *m_val,
                seed: *seed,
            },
            Self::KFold { k, seed } => ModeRecord::KFold { k: *k, seed: *seed },
        }
    }
}

/// Serializable summary of a [`ValidationMode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeRecord {
    FreshValidation { m_val: usize, seed: u64 },
    KFold { k: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub point: GridPoint,
    pub error: f64,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub table: Vec<TableEntry>,
    pub chosen: GridPoint,
    pub chosen_error: f64,
    pub mode: ModeRecord,
    pub seed: u64,
}

impl SelectionReport {
    pub fn failures(&self) -> usize {
        self.table.iter().filter(|e| e.failed).count()
    }
}

fn tie_order(a: &TableEntry, b: &TableEntry) -> Ordering {
    a.error.total_cmp(&b.error).then_with(|| {
        a.point
            .values()
            .iter()
            .zip(b.point.values().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// Scores for every point on one split; failures become [`FAILURE_ERROR`].
fn score_split<E: FitEval>(fe: &E, train: &Dataset, val: &Dataset, points: &[GridPoint]) -> Vec<(f64, bool)> {
    match fe.prepare(train, val) {
        Err(_) => vec![(FAILURE_ERROR, true); points.len()],
        Ok(ctx) => points
            .iter()
            .map(|p| match fe.evaluate(&ctx, p) {
                Ok(e) if e.is_finite() => (e, false),
                _ => (FAILURE_ERROR, true),
            })
            .collect(),
    }
}

fn fold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

pub fn select<E: FitEval>(
    train: &Dataset,
    fit_eval: &E,
    grid: &Grid,
    mode: &ValidationMode,
) -> Result<SelectionReport> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let scores: Vec<(f64, bool)> = match mode {
        ValidationMode::FreshValidation { spec, m_val, seed } => {
            if *m_val == 0 {
                return Err(Error::invalid("m_val must be at least 1"));
            }
            let val = sample_total(spec, *m_val, *seed)?;
            score_split(fit_eval, train, &val, &points)
        }
        ValidationMode::KFold { k, seed } => {
            let n = train.len();
            if *k < 2 || *k > n {
                return Err(Error::invalid(format!("k={k} outside 2..={n}")));
            }
            let mut wrong = vec![0.0; points.len()];
            let mut failed = vec![false; points.len()];
            for fold in fold_indices(n, *k, *seed) {
                let rest: Vec<usize> = (0..n).filter(|i| fold.binary_search(i).is_err()).collect();
                let s = score_split(fit_eval, &train.subset(&rest), &train.subset(&fold), &points);
                for (i, (e, f)) in s.into_iter().enumerate() {
                    wrong[i] += e * fold.len() as f64;
                    failed[i] |= f;
                }
            }
            wrong.into_iter().zip(failed).map(|(w, f)| (w / n as f64, f)).collect()
        }
    };
    let table: Vec<TableEntry> = points
        .into_iter()
        .zip(scores)
        .map(|(point, (error, failed))| TableEntry { point, error, failed })
        .collect();
    let best = table
        .iter()
        .min_by(|a, b| tie_order(a, b))
        .expect("non-empty table")
        .clone();
    Ok(SelectionReport {
        chosen: best.point,
        chosen_error: best.error,
        mode: mode.record(),
        seed: mode.seed(),
        table,
    })
}

/// Misclassification rate of `predicted` against the labels of `data`.
pub fn error_rate(predicted: &[i8], data: &Dataset) -> f64 {
    let wrong = predicted
        .iter()
        .zip(&data.items)
        .filter(|(p, x)| Some(**p) != x.label())
        .count();
    wrong as f64 / data.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_order_first_axis_slowest() {
        let g = Grid::new(vec![
            Axis::new("a", vec![1.0, 2.0]),
            Axis::new("b", vec![3.0, 4.0, 5.0]),
        ])
        .unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].values(), vec![1.0, 3.0]);
        assert_eq!(pts[1].values(), vec![1.0, 4.0]);
        assert_eq!(pts[3].values(), vec![2.0, 3.0]);
        assert_eq!(Grid::empty().points(), vec![GridPoint::default()]);
    }

    #[test]
    fn default_rkhs_grid_spans_powers_of_two() {
        let g = Grid::default_rkhs();
        assert_eq!(g.len(), 100);
        assert_eq!(g.axes()[0].values[0], 1.0 / 32.0);
        assert_eq!(g.axes()[1].values[9], 16.0);
    }

    #[test]
    fn rejects_empty_axis() {
        assert!(Grid::new(vec![Axis::new("h", vec![])]).is_err());
        let json = r#"[{"name":"h","values":[]}]"#;
        assert!(serde_json::from_str::<Grid>(json).is_err());
    }

    #[test]
    fn ties_prefer_smaller_values() {
        let mk = |v: Vec<f64>, e| TableEntry {
            point: GridPoint(v.into_iter().enumerate().map(|(i, x)| (i.to_string(), x)).collect()),
            error: e,
            failed: false,
        };
        let a = mk(vec![2.0, 1.0], 0.1);
        let b = mk(vec![1.0, 5.0], 0.1);
        assert_eq!(tie_order(&a, &b), Ordering::Greater);
    }

    #[test]
    fn folds_partition() {
        let folds = fold_indices(23, 5, 9);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(folds.iter().all(|f| f.len() == 4 || f.len() == 5));
    }
}
