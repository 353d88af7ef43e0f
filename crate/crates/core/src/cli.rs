//! Command-line front end: `gen`, `conditions`, `fit`, `eval`, `sweep`, `plot`.
//!
//! Each subcommand reads an optional JSON config (`--config`), applies flat
//! `--set key=value` overrides (dotted paths, values parsed as JSON when
//! possible) and rejects unknown keys. Exit codes: 0 success, 1 usage,
//! 2 config validation, 3 runtime failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifier::{Method, MethodFitEval, Model};
use crate::conditions::{bayes_risk_scenario2, dh_power_law, dh_series, empirical_margin, MarginReport, SeriesVerdict};
use crate::datagen::{sample_balanced, Dataset, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::experiment::{export_svg, parse_long_csv, run, write_outputs, Plan, PlotAxes, ScenarioConfig, ScenarioKind};
use crate::modelsel::{select, Grid, GridPoint, ValidationMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fdlab", version, about = "Functional-data classification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set n_per_class=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct ScenarioFlags {
    /// 1 (Gaussian, decaying mean) or 2 (uniform location).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    scenario: Option<u8>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    cross_basis: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a labelled dataset as JSON lines.
    Gen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioFlags,
    },
    /// Report the Delaigle–Hall series, margin and Bayes risk of a scenario.
    Conditions {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioFlags,
    },
    /// Fit one classifier, tuning it first if no parameters are given.
    Fit {
        #[command(flatten)]
        common: Common,
    },
    /// Misclassification rate of a saved model on a dataset.
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment plan and write CSV outputs.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Plot error curves from a long-form CSV as SVG.
    Plot {
        #[command(flatten)]
        common: Common,
    },
}

/// Flat scenario fields shared by `gen` and `conditions`.
trait ScenarioFields {
    fn fields(&mut self) -> (&mut u8, &mut Option<f64>, &mut Option<f64>, &mut bool, usize);
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenConfig {
    /// 1 or 2.
    scenario: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    cross_basis: bool,
    truncation: usize,
    n_per_class: usize,
    seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            scenario: 1,
            gamma: None,
            mu: None,
            cross_basis: false,
            truncation: DEFAULT_TRUNCATION,
            n_per_class: 50,
            seed: 0,
        }
    }
}

impl ScenarioFields for GenConfig {
    fn fields(&mut self) -> (&mut u8, &mut Option<f64>, &mut Option<f64>, &mut bool, usize) {
        (
            &mut self.scenario,
            &mut self.gamma,
            &mut self.mu,
            &mut self.cross_basis,
            self.truncation,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionsConfig {
    scenario: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    cross_basis: bool,
    truncation: usize,
    m_max: usize,
    /// Truncation of `ψ_M` for the margin; defaults to `truncation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    n_probe: usize,
    seed: u64,
}

impl Default for ConditionsConfig {
    fn default() -> Self {
        Self {
            scenario: 1,
            gamma: None,
            mu: None,
            cross_basis: false,
            truncation: DEFAULT_TRUNCATION,
            m_max: 1_000_000,
            m: None,
            n_probe: 10_000,
            seed: 0,
        }
    }
}

impl ScenarioFields for ConditionsConfig {
    fn fields(&mut self) -> (&mut u8, &mut Option<f64>, &mut Option<f64>, &mut bool, usize) {
        (
            &mut self.scenario,
            &mut self.gamma,
            &mut self.mu,
            &mut self.cross_basis,
            self.truncation,
        )
    }
}

const DEFAULT_GAMMA: f64 = 1.3;
const DEFAULT_MU: f64 = 1.2;

/// Applies command-line scenario flags to `cfg` (filling in the default
/// parameter) and builds the scenario.
fn resolve_scenario<C: ScenarioFields>(cfg: &mut C, flags: &ScenarioFlags) -> CliResult<ScenarioConfig> {
    let (scenario, gamma, mu, cross, truncation) = cfg.fields();
    if let Some(s) = flags.scenario {
        *scenario = s;
    }
    if flags.gamma.is_some() {
        *gamma = flags.gamma;
    }
    if flags.mu.is_some() {
        *mu = flags.mu;
    }
    *cross |= flags.cross_basis;
    let mut out = match *scenario {
        1 => {
            if mu.is_some() {
                return Err(config_err("'mu' applies to scenario 2"));
            }
            ScenarioConfig::scenario1(*gamma.get_or_insert(DEFAULT_GAMMA))
        }
        2 => {
            if gamma.is_some() {
                return Err(config_err("'gamma' applies to scenario 1"));
            }
            ScenarioConfig::scenario2(*mu.get_or_insert(DEFAULT_MU))
        }
        other => return Err(config_err(format!("scenario must be 1 or 2, got {other}"))),
    };
    out.cross_basis = *cross;
    out.truncation = truncation;
    out.spec().map_err(config_err)?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ConditionsReport {
    scenario: ScenarioConfig,
    series: SeriesVerdict,
    power_law: Option<bool>,
    margin: MarginReport,
    bayes_risk: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    /// Training data (JSON lines).
    data: PathBuf,
    method: Method,
    /// Fixed hyperparameters; when absent they are tuned over `grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<std::collections::BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<Grid>,
    /// Folds for tuning on the training data.
    folds: usize,
    seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::new(),
            method: Method::rkhs(),
            params: None,
            grid: None,
            folds: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalConfig {
    model: PathBuf,
    data: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlotConfig {
    input: PathBuf,
    axes: PlotAxes,
    /// Restrict to these methods (all when empty).
    #[serde(default)]
    methods: Vec<String>,
}

/// Config or usage problems (exit 2) versus failures while running (exit 3).
enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Sets `path` (dot-separated; numeric segments index arrays) to `raw`.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::invalid(format!("malformed key '{path}'")));
    }
    let mut cur = root;
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| Error::invalid(format!("'{key}' in '{path}' must index an array")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::invalid(format!("index {idx} out of range ({len}) in '{path}'")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::invalid(format!("'{path}' does not name a config key"))),
        };
    }
    unreachable!("loop returns on the last key")
}

fn load_config<T: Serialize + DeserializeOwned + Default>(common: &Common) -> CliResult<T> {
    let mut value = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => serde_json::to_value(T::default()).map_err(config_err)?,
    };
    if common.config.is_some() {
        // Fill absent keys from defaults so partial configs work.
        let defaults = serde_json::to_value(T::default()).map_err(config_err)?;
        if let (Value::Object(v), Value::Object(d)) = (&mut value, defaults) {
            for (k, dv) in d {
                v.entry(k).or_insert(dv);
            }
        }
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| config_err(format!("override '{kv}' is not KEY=VALUE")))?;
        apply_override(&mut value, k.trim(), v.trim()).map_err(config_err)?;
    }
    serde_json::from_value(value).map_err(config_err)
}

fn write_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
            }
            fs::write(path, text).map_err(|e| runtime_err(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(runtime_err),
    }
}

/// Resolved config saved as `<out>.config.json` next to a file output.
fn write_resolved<T: Serialize>(out: Option<&Path>, cfg: &T) -> CliResult<()> {
    if let Some(path) = out {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".config.json");
        let text = serde_json::to_string_pretty(cfg).map_err(runtime_err)? + "\n";
        write_text(Some(&path.with_file_name(name)), &text)?;
    }
    Ok(())
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
    Dataset::from_jsonl(&text).map_err(runtime_err)
}

fn cmd_gen(common: &Common, flags: &ScenarioFlags) -> CliResult<()> {
    let mut cfg: GenConfig = load_config(common)?;
    let scenario = resolve_scenario(&mut cfg, flags)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if cfg.n_per_class == 0 {
        return Err(config_err("n_per_class must be at least 1"));
    }
    let spec = scenario.spec().map_err(config_err)?;
    let data = sample_balanced(&spec, cfg.n_per_class, cfg.seed).map_err(runtime_err)?;
    write_text(common.out.as_deref(), &data.to_jsonl())?;
    write_resolved(common.out.as_deref(), &cfg)
}

fn cmd_conditions(common: &Common, flags: &ScenarioFlags) -> CliResult<()> {
    let mut cfg: ConditionsConfig = load_config(common)?;
    let scenario = resolve_scenario(&mut cfg, flags)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let spec = scenario.spec().map_err(config_err)?;
    let p = scenario.param;
    let (series, power_law, bayes_risk) = match scenario.kind {
        ScenarioKind::Scenario1 => (
            dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-p), cfg.m_max),
            Some(dh_power_law(2.0, p)),
            None,
        ),
        ScenarioKind::Scenario2 => (
            dh_series(|j| (j as f64).powi(-2), |j| if j == 1 { p } else { 0.0 }, cfg.m_max),
            None,
            Some(bayes_risk_scenario2(p).map_err(config_err)?),
        ),
    };
    let series = series.map_err(config_err)?;
    let m = cfg.m.unwrap_or(spec.truncation());
    let margin = empirical_margin(&spec, m, cfg.n_probe, cfg.seed).map_err(runtime_err)?;
    let report = ConditionsReport {
        scenario,
        series,
        power_law,
        margin,
        bayes_risk,
    };
    let text = serde_json::to_string_pretty(&report).map_err(runtime_err)? + "\n";
    write_text(common.out.as_deref(), &text)?;
    write_resolved(common.out.as_deref(), &cfg)
}

fn cmd_fit(common: &Common) -> CliResult<()> {
    let mut cfg: FitConfig = load_config(common)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if cfg.data.as_os_str().is_empty() {
        return Err(config_err("fit needs 'data' (a JSON-lines dataset)"));
    }
    let grid = cfg.grid.clone().unwrap_or_else(|| cfg.method.default_grid());
    cfg.method.check_grid(&grid).map_err(config_err)?;
    let train = read_dataset(&cfg.data)?;
    let point = match &cfg.params {
        Some(params) => {
            let mut pts = Vec::new();
            for axis in cfg.method.required_axes() {
                let v = params
                    .get(*axis)
                    .ok_or_else(|| config_err(format!("params lacks '{axis}'")))?;
                pts.push((axis.to_string(), *v));
            }
            if let Some(k) = params
                .keys()
                .find(|k| !cfg.method.required_axes().contains(&k.as_str()))
            {
                return Err(config_err(format!("unknown parameter '{k}'")));
            }
            GridPoint(pts)
        }
        None => {
            let mode = ValidationMode::KFold {
                k: cfg.folds,
                seed: cfg.seed,
            };
            let report = select(&train, &MethodFitEval::new(cfg.method), &grid, &mode).map_err(runtime_err)?;
            eprintln!(
                "selected {} (validation error {:.4})",
                report.chosen, report.chosen_error
            );
            report.chosen
        }
    };
    let model = cfg.method.fit(&train, &point).map_err(runtime_err)?;
    let text = serde_json::to_string(&model).map_err(runtime_err)? + "\n";
    write_text(common.out.as_deref(), &text)?;
    write_resolved(common.out.as_deref(), &cfg)
}

fn cmd_eval(common: &Common) -> CliResult<()> {
    let cfg: EvalConfig = load_config(common)?;
    if cfg.model.as_os_str().is_empty() || cfg.data.as_os_str().is_empty() {
        return Err(config_err("eval needs 'model' and 'data'"));
    }
    let text = fs::read_to_string(&cfg.model).map_err(|e| runtime_err(format!("{}: {e}", cfg.model.display())))?;
    let model: Model = serde_json::from_str(&text).map_err(runtime_err)?;
    let data = read_dataset(&cfg.data)?;
    let predictions = model.predict_many(&data.items).map_err(runtime_err)?;
    let error = crate::modelsel::error_rate(&predictions, &data);
    let report = serde_json::json!({ "n": data.len(), "error": error, "predictions": predictions });
    write_text(common.out.as_deref(), &(report.to_string() + "\n"))?;
    write_resolved(common.out.as_deref(), &cfg)
}

fn cmd_sweep(common: &Common) -> CliResult<()> {
    let mut plan: Plan = load_config(common)?;
    if let Some(s) = common.seed {
        plan.master_seed = s;
    }
    if let Some(out) = &common.out {
        plan.output_dir = out.display().to_string();
    }
    plan.validate().map_err(config_err)?;
    let output = run(&plan).map_err(runtime_err)?;
    let dir = PathBuf::from(&plan.output_dir);
    let manifest = write_outputs(&output, &plan, &dir).map_err(runtime_err)?;
    eprintln!(
        "wrote {} curves to {} in {:.1}s",
        output.curves.len(),
        dir.display(),
        manifest.total_seconds
    );
    Ok(())
}

fn cmd_plot(common: &Common) -> CliResult<()> {
    let cfg: PlotConfig = load_config(common)?;
    if cfg.input.as_os_str().is_empty() {
        return Err(config_err("plot needs 'input' (a long-form CSV)"));
    }
    let out = common
        .out
        .clone()
        .ok_or_else(|| config_err("plot needs --out <file.svg>"))?;
    let mut curves = parse_long_csv(&cfg.input).map_err(runtime_err)?;
    if !cfg.methods.is_empty() {
        curves.retain(|c| cfg.methods.contains(&c.method));
    }
    export_svg(&curves, &out, cfg.axes).map_err(runtime_err)?;
    write_resolved(Some(&out), &cfg)
}

fn execute(cli: Cli) -> CliResult<()> {
    let common = match &cli.command {
        Command::Gen { common, .. }
        | Command::Conditions { common, .. }
        | Command::Fit { common }
        | Command::Eval { common }
        | Command::Sweep { common }
        | Command::Plot { common } => common.clone(),
    };
    let work = || match &cli.command {
        Command::Gen { common, scenario } => cmd_gen(common, scenario),
        Command::Conditions { common, scenario } => cmd_conditions(common, scenario),
        Command::Fit { common } => cmd_fit(common),
        Command::Eval { common } => cmd_eval(common),
        Command::Sweep { common } => cmd_sweep(common),
        Command::Plot { common } => cmd_plot(common),
    };
    match common.threads {
        Some(0) => Err(config_err("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(runtime_err)?
            .install(work),
        None => work(),
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}
