use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{rate_fit, CurvePoint, ErrorCurve, Plan, RegimeThresholds, RunOutput};
use crate::error::{Error, Result};

pub const LONG_CSV: &str = "errors_long.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SELECTIONS: &str = "selections.jsonl";
pub const RESOLVED_PLAN: &str = "plan.resolved.json";
pub const MANIFEST: &str = "manifest.json";

/// One repetition in the long-form CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub method: String,
    pub scenario: String,
    pub param: f64,
    pub n: usize,
    pub rep: usize,
    pub error: f64,
    pub m_test: usize,
    pub failed: u8,
}

/// One `(curve, n)` row of the summary CSV; the rate columns repeat the
/// curve-level fit and are empty when it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub scenario: String,
    pub param: f64,
    pub n: usize,
    pub m_test: usize,
    pub reps: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub failures: usize,
    pub b_exp: Option<f64>,
    pub r2_exp: Option<f64>,
    pub b_poly: Option<f64>,
    pub r2_poly: Option<f64>,
    pub regime: Option<String>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

/// Writes the long-form and summary CSVs into `dir`; returns their paths.
pub fn export_csv(curves: &[ErrorCurve], dir: &Path, thresholds: &RegimeThresholds) -> Result<(PathBuf, PathBuf)> {
    if curves.is_empty() {
        return Err(Error::invalid("no curves to export"));
    }
    ensure_dir(dir)?;
    let long_path = dir.join(LONG_CSV);
    let mut w = csv_writer(&long_path)?;
    for c in curves {
        for p in &c.points {
            for (rep, (e, f)) in p.errors.iter().zip(&p.failed).enumerate() {
                w.serialize(LongRow {
                    method: c.method.clone(),
                    scenario: c.scenario.clone(),
                    param: c.param,
                    n: p.n,
                    rep,
                    error: *e,
                    m_test: c.m_test,
                    failed: u8::from(*f),
                })?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&long_path, e))?;

    let summary_path = dir.join(SUMMARY_CSV);
    let mut w = csv_writer(&summary_path)?;
    for c in curves {
        let fit = rate_fit(c, thresholds).ok();
        for p in &c.points {
            w.serialize(SummaryRow {
                method: c.method.clone(),
                scenario: c.scenario.clone(),
                param: c.param,
                n: p.n,
                m_test: c.m_test,
                reps: p.errors.len(),
                mean: p.mean,
                std: p.std,
                median: p.median(),
                failures: p.failures(),
                b_exp: fit.map(|f| f.b_exp),
                r2_exp: fit.map(|f| f.r2_exp),
                b_poly: fit.map(|f| f.b_poly),
                r2_poly: fit.map(|f| f.r2_poly),
                regime: fit.map(|f| f.regime.to_string()),
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(&summary_path, e))?;
    Ok((long_path, summary_path))
}

/// `(rep, error, failed)` rows of one `n`.
type RepRows = Vec<(usize, f64, bool)>;

/// Rebuilds curves from a long-form CSV, keeping first-appearance order.
pub fn parse_long_csv(path: &Path) -> Result<Vec<ErrorCurve>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<LongRow> = Vec::new();
    for r in csv::Reader::from_reader(f).deserialize() {
        let row: LongRow = r?;
        if !(0.0..=1.0).contains(&row.error) {
            return Err(Error::Format(format!("error {} outside [0, 1]", row.error)));
        }
        rows.push(row);
    }
    let mut curves: Vec<(ErrorCurve, Vec<(usize, RepRows)>)> = Vec::new();
    for row in rows {
        let idx = match curves.iter().position(|(c, _)| {
            c.method == row.method && c.scenario == row.scenario && c.param.to_bits() == row.param.to_bits()
        }) {
            Some(i) => i,
            None => {
                curves.push((
                    ErrorCurve {
                        method: row.method.clone(),
                        scenario: row.scenario.clone(),
                        param: row.param,
                        m_test: row.m_test,
                        points: Vec::new(),
                    },
                    Vec::new(),
                ));
                curves.len() - 1
            }
        };
        let (curve, cells) = &mut curves[idx];
        if curve.m_test != row.m_test {
            return Err(Error::Format(format!("inconsistent m_test in curve {}", curve.method)));
        }
        let cell = match cells.iter().position(|(n, _)| *n == row.n) {
            Some(i) => i,
            None => {
                cells.push((row.n, Vec::new()));
                cells.len() - 1
            }
        };
        cells[cell].1.push((row.rep, row.error, row.failed != 0));
    }
    curves
        .into_iter()
        .map(|(mut curve, cells)| {
            for (n, mut reps) in cells {
                reps.sort_by_key(|r| r.0);
                if reps.iter().enumerate().any(|(i, r)| r.0 != i) {
                    return Err(Error::Format(format!("repetitions for n={n} are not 0..R")));
                }
                curve.points.push(CurvePoint::new(
                    n,
                    reps.iter().map(|r| r.1).collect(),
                    reps.iter().map(|r| r.2).collect(),
                ));
            }
            Ok(curve)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub method: String,
    pub scenario: String,
    pub param: f64,
    pub n: usize,
    pub seconds: f64,
}

/// Provenance for one run; wall times vary between runs, the rest does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    /// SHA-256 of the resolved plan JSON.
    pub config_hash: String,
    pub master_seed: u64,
    pub files: Vec<String>,
    pub cells: Vec<CellTiming>,
    pub total_seconds: f64,
}

pub fn config_hash(plan: &Plan) -> String {
    hex::encode(Sha256::digest(plan.to_json().as_bytes()))
}

/// Writes CSVs, per-repetition selection reports, the resolved plan and a
/// manifest into `dir`.
pub fn write_outputs(out: &RunOutput, plan: &Plan, dir: &Path) -> Result<Manifest> {
    export_csv(&out.curves, dir, &plan.regime)?;
    let write = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    let mut lines = String::new();
    for r in &out.repetitions {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    write(SELECTIONS, lines)?;
    write(RESOLVED_PLAN, plan.to_json() + "\n")?;

    let mut cells: Vec<CellTiming> = Vec::new();
    for r in &out.repetitions {
        match cells.last_mut() {
            Some(c) if c.method == r.method && c.scenario == r.scenario && c.param == r.param && c.n == r.n => {
                c.seconds += r.seconds
            }
            _ => cells.push(CellTiming {
                method: r.method.clone(),
                scenario: r.scenario.clone(),
                param: r.param,
                n: r.n,
                seconds: r.seconds,
            }),
        }
    }
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash(plan),
        master_seed: plan.master_seed,
        files: [LONG_CSV, SUMMARY_CSV, SELECTIONS, RESOLVED_PLAN]
            .map(String::from)
            .to_vec(),
        total_seconds: cells.iter().map(|c| c.seconds).sum(),
        cells,
    };
    write(MANIFEST, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}
