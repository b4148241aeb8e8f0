//! Batch comparison runs: objectives × dimensions × controllers × seeds.
//!
//! Each run writes one CSV trace with the columns
//! `generation,evals,best_f,sigma,alpha_s,axis_ratio,trace_C`; a
//! `summary.csv` aggregates evaluations-to-target per
//! (objective, n, controller), counting unsuccessful runs at the budget.
//!
//! Configuration comes from `key=value` pairs, either from a file or from
//! command-line flags of the same names; flags win.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{
    run_with_restarts, RestartPolicy, RunConfig, RunResult, StepSizeMode, TerminationCriteria,
};
use crate::objectives::{ObjectiveKind, ObjectiveSpec};
use crate::params::{ParamOverrides, StrategyParams};
use crate::stepsize::salomon_legacy_params;

/// Column order of the per-run trace files.
pub const TRACE_COLUMNS: [&str; 7] = [
    "generation",
    "evals",
    "best_f",
    "sigma",
    "alpha_s",
    "axis_ratio",
    "trace_C",
];

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "objective",
    "n",
    "controller",
    "runs",
    "successes",
    "errors",
    "median_evals",
    "q25_evals",
    "q75_evals",
    "median_best_f",
    "median_final_sigma",
];

/// Recognized configuration keys.
pub const KEYS: [&str; 18] = [
    "objective",
    "n",
    "controller",
    "lambda",
    "beta",
    "c-alpha",
    "seeds",
    "seed",
    "budget",
    "target-f",
    "restarts",
    "out",
    "workers",
    "no-timestamp",
    "sigma0",
    "x0",
    "noise-level",
    "condition",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Controller {
    Tpa,
    /// Two-point adaptation with β = 0.1.
    TpaNoise,
    TpaLegacy,
    Csa,
}

impl Controller {
    pub const ALL: [Controller; 4] = [
        Controller::Tpa,
        Controller::TpaNoise,
        Controller::TpaLegacy,
        Controller::Csa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Controller::Tpa => "tpa",
            Controller::TpaNoise => "tpa_noise",
            Controller::TpaLegacy => "tpa_legacy",
            Controller::Csa => "csa",
        }
    }

    pub fn mode(self) -> StepSizeMode {
        match self {
            Controller::Tpa | Controller::TpaNoise => StepSizeMode::Tpa,
            Controller::TpaLegacy => StepSizeMode::TpaLegacy,
            Controller::Csa => StepSizeMode::Csa,
        }
    }

    fn default_beta(self) -> Option<f64> {
        match self {
            Controller::TpaNoise => Some(0.1),
            _ => None,
        }
    }
}

impl fmt::Display for Controller {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Controller {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Controller::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown controller `{s}` (expected tpa, tpa_noise, tpa_legacy or csa)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub objectives: Vec<ObjectiveKind>,
    pub dims: Vec<usize>,
    pub controllers: Vec<Controller>,
    pub seeds: Vec<u64>,
    pub lambda: Option<usize>,
    pub beta: Option<f64>,
    pub c_alpha: Option<f64>,
    pub budget: u64,
    /// Applies to every objective; otherwise each objective's default target.
    pub target_f: Option<f64>,
    pub restarts: usize,
    /// Every coordinate of the initial mean.
    pub x0: f64,
    pub sigma0: f64,
    pub noise_level: f64,
    pub condition: f64,
    pub out: PathBuf,
    pub workers: usize,
    pub timestamp: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            objectives: vec![ObjectiveKind::Sphere],
            dims: vec![10],
            controllers: vec![Controller::Tpa, Controller::Csa],
            seeds: (1..=11).collect(),
            lambda: None,
            beta: None,
            c_alpha: None,
            budget: 100_000,
            target_f: None,
            restarts: 0,
            x0: 3.0,
            sigma0: 2.0,
            noise_level: 1.0,
            condition: 1e6,
            out: PathBuf::from("results"),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            timestamp: true,
        }
    }
}

/// All problems found in a configuration, reported together.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration:\n  {}", .problems.join("\n  "))]
pub struct ConfigError {
    pub problems: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write to {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output failed for {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads `key=value` lines. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_pairs(&text).map_err(ExperimentError::Config)
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    let mut problems = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => problems.push(format!("line {}: expected key=value, got `{line}`", lineno + 1)),
        }
    }
    if problems.is_empty() {
        Ok(pairs)
    } else {
        Err(ConfigError { problems })
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str, problems: &mut Vec<String>) -> Option<Vec<T>>
where
    T::Err: fmt::Display,
{
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.parse::<T>() {
            Ok(v) => out.push(v),
            Err(e) => {
                problems.push(format!("{key}: `{item}`: {e}"));
                return None;
            }
        }
    }
    Some(out)
}

fn parse_one<T: FromStr>(key: &str, value: &str, problems: &mut Vec<String>) -> Option<T>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| problems.push(format!("{key}: `{value}`: {e}")))
        .ok()
}

/// `1,2,5`, `1..11` (exclusive) or `1..=11`.
fn parse_seeds(key: &str, value: &str, problems: &mut Vec<String>) -> Option<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let (b, inclusive) = match b.strip_prefix('=') {
            Some(rest) => (rest, true),
            None => (b, false),
        };
        let lo = parse_one::<u64>(key, a.trim(), problems)?;
        let hi = parse_one::<u64>(key, b.trim(), problems)?;
        return Some(if inclusive { (lo..=hi).collect() } else { (lo..hi).collect() });
    }
    parse_list(key, value, problems)
}

fn parse_bool(key: &str, value: &str, problems: &mut Vec<String>) -> Option<bool> {
    match value {
        "" | "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => {
            problems.push(format!("{key}: `{value}` is not a boolean"));
            None
        }
    }
}

impl ExperimentConfig {
    /// Builds a configuration from pairs applied in order, later pairs
    /// overriding earlier ones. Returns warnings alongside.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<(Self, Vec<String>), ConfigError> {
        let mut merged: BTreeMap<&str, &str> = BTreeMap::new();
        let mut problems = Vec::new();
        for (k, v) in pairs {
            if KEYS.contains(&k.as_str()) {
                merged.insert(k.as_str(), v.as_str());
            } else {
                problems.push(format!("unknown key `{k}`"));
            }
        }
        let mut cfg = ExperimentConfig::default();
        let p = &mut problems;
        for (&key, &value) in &merged {
            match key {
                "objective" => {
                    if let Some(v) = parse_list(key, value, p) {
                        cfg.objectives = v;
                    }
                }
                "n" => {
                    if let Some(v) = parse_list(key, value, p) {
                        cfg.dims = v;
                    }
                }
                "controller" => {
                    if let Some(v) = parse_list(key, value, p) {
                        cfg.controllers = v;
                    }
                }
                "seeds" | "seed" => {
                    if let Some(v) = parse_seeds(key, value, p) {
                        cfg.seeds = v;
                    }
                }
                "lambda" => cfg.lambda = parse_one(key, value, p).or(cfg.lambda),
                "beta" => cfg.beta = parse_one(key, value, p).or(cfg.beta),
                "c-alpha" => cfg.c_alpha = parse_one(key, value, p).or(cfg.c_alpha),
                "budget" => cfg.budget = parse_one(key, value, p).unwrap_or(cfg.budget),
                "target-f" => cfg.target_f = parse_one(key, value, p).or(cfg.target_f),
                "restarts" => cfg.restarts = parse_one(key, value, p).unwrap_or(cfg.restarts),
                "out" => cfg.out = PathBuf::from(value),
                "workers" => cfg.workers = parse_one(key, value, p).unwrap_or(cfg.workers),
                "no-timestamp" => {
                    if let Some(b) = parse_bool(key, value, p) {
                        cfg.timestamp = !b;
                    }
                }
                "sigma0" => cfg.sigma0 = parse_one(key, value, p).unwrap_or(cfg.sigma0),
                "x0" => cfg.x0 = parse_one(key, value, p).unwrap_or(cfg.x0),
                "noise-level" => cfg.noise_level = parse_one(key, value, p).unwrap_or(cfg.noise_level),
                "condition" => cfg.condition = parse_one(key, value, p).unwrap_or(cfg.condition),
                _ => unreachable!("key list and match arms out of sync"),
            }
        }
        let warnings = cfg.check(&mut problems);
        if problems.is_empty() {
            Ok((cfg, warnings))
        } else {
            Err(ConfigError { problems })
        }
    }

    /// Validates the grid, pushing errors and returning warnings.
    fn check(&self, problems: &mut Vec<String>) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.objectives.is_empty() {
            problems.push("objective list is empty".into());
        }
        if self.dims.is_empty() {
            problems.push("dimension list is empty".into());
        }
        if self.dims.contains(&0) {
            problems.push("dimensions must be positive".into());
        }
        if self.controllers.is_empty() {
            problems.push("controller list is empty".into());
        }
        if self.seeds.is_empty() {
            problems.push("seed list is empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            problems.push("seeds must be distinct".into());
        }
        if self.workers == 0 {
            problems.push("workers must be at least 1".into());
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            problems.push(format!("sigma0 = {} must be positive", self.sigma0));
        }
        if !self.x0.is_finite() {
            problems.push("x0 must be finite".into());
        }
        if !(self.noise_level >= 0.0) {
            problems.push("noise-level must be non-negative".into());
        }
        if !(self.condition >= 1.0) {
            problems.push("condition must be at least 1".into());
        }
        if problems.is_empty() {
            for &n in &self.dims {
                for &c in &self.controllers {
                    if let Err(e) = StrategyParams::with_overrides(n, &self.overrides(c)) {
                        problems.push(format!("n = {n}, controller {c}: {e}"));
                    }
                }
            }
        }
        let has = |c: Controller| self.controllers.contains(&c);
        for (name, given) in [("beta", self.beta.is_some()), ("c-alpha", self.c_alpha.is_some())] {
            if given && has(Controller::Csa) {
                warnings.push(format!("{name} is unused by the csa controller"));
            }
            if given && has(Controller::TpaLegacy) {
                warnings.push(format!("{name} is fixed by the tpa_legacy controller and ignored there"));
            }
        }
        warnings
    }

    fn overrides(&self, controller: Controller) -> ParamOverrides {
        ParamOverrides {
            lambda: self.lambda,
            beta_bias: self.beta.or(controller.default_beta()),
            c_alpha: self.c_alpha,
            ..ParamOverrides::default()
        }
    }

    fn target_for(&self, kind: ObjectiveKind) -> Option<f64> {
        self.target_f.or(kind.default_target())
    }

    /// Every run of the grid, in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &objective in &self.objectives {
            for &n in &self.dims {
                for &controller in &self.controllers {
                    for &seed in &self.seeds {
                        cells.push(Cell {
                            objective,
                            n,
                            controller,
                            seed,
                        });
                    }
                }
            }
        }
        cells
    }

    pub fn run_config(&self, cell: &Cell) -> RunConfig {
        RunConfig {
            initial_mean: vec![self.x0; cell.n],
            sigma0: self.sigma0,
            mode: cell.controller.mode(),
            overrides: self.overrides(cell.controller),
            csa_overrides: Default::default(),
            termination: TerminationCriteria {
                max_evals: self.budget,
                ..TerminationCriteria::default()
            }
            .with_target(self.target_for(cell.objective)),
            seed: cell.seed,
            keep_trace: true,
        }
    }

    pub fn objective(&self, cell: &Cell) -> ObjectiveSpec {
        ObjectiveSpec::new(cell.objective, cell.n)
            .with_noise(self.noise_level)
            .with_condition(self.condition)
    }
}

/// Parses a configuration file (if any) overlaid with flag pairs.
pub fn parse_config(
    file: Option<&Path>,
    flags: &[(String, String)],
) -> Result<(ExperimentConfig, Vec<String>), ExperimentError> {
    let mut pairs = match file {
        Some(p) => read_config_file(p)?,
        None => Vec::new(),
    };
    pairs.extend(flags.iter().cloned());
    Ok(ExperimentConfig::from_pairs(&pairs)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub objective: ObjectiveKind,
    pub n: usize,
    pub controller: Controller,
    pub seed: u64,
}

impl Cell {
    pub fn file_name(&self) -> String {
        format!("{}_n{}_{}_seed{}.csv", self.objective, self.n, self.controller, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub cell: Cell,
    pub result: Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub evals: u64,
    pub evals_to_target: Option<u64>,
    pub best_f: f64,
    pub final_sigma: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub objective: ObjectiveKind,
    pub n: usize,
    pub controller: Controller,
    pub runs: usize,
    pub successes: usize,
    pub errors: usize,
    pub median_evals: f64,
    pub q25_evals: f64,
    pub q75_evals: f64,
    pub median_best_f: f64,
    pub median_final_sigma: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub rows: Vec<SummaryRow>,
    pub outcomes: Vec<RunOutcome>,
}

impl ExperimentSummary {
    pub fn row(&self, objective: ObjectiveKind, n: usize, controller: Controller) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.objective == objective && r.n == n && r.controller == controller)
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn header_line(cfg: &ExperimentConfig, cell: &Cell, run: &RunConfig) -> String {
    let mut parts = vec![
        format!("objective={}", cell.objective),
        format!("controller={}", cell.controller),
        format!("seed={}", cell.seed),
        format!("sigma0={}", cfg.sigma0),
        format!("x0={}", cfg.x0),
        format!("budget={}", cfg.budget),
        format!("target_f={}", fmt_opt(run.termination.target_f)),
        format!("restarts={}", cfg.restarts),
    ];
    if let Ok(mut p) = StrategyParams::with_overrides(cell.n, &run.overrides) {
        if cell.controller == Controller::TpaLegacy {
            p = salomon_legacy_params(&p).0;
        }
        parts.extend(p.describe().into_iter().map(|(k, v)| format!("{k}={v}")));
    }
    format!("# {}", parts.join(" "))
}

/// Writes one trace file.
pub fn write_trace(
    path: &Path,
    header: &[String],
    result: &RunResult,
) -> Result<(), ExperimentError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for line in header {
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
    for r in &result.trace {
        w.write_record([
            r.generation.to_string(),
            r.evals.to_string(),
            r.best_f.to_string(),
            r.sigma.to_string(),
            fmt_opt(r.alpha_s),
            r.axis_ratio.to_string(),
            r.trace_c.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<RunOutcome, ExperimentError> {
    let run_cfg = cfg.run_config(cell);
    let policy = RestartPolicy {
        lambda_multiplier: 2,
        max_restarts: cfg.restarts,
        bounds: None,
    };
    let objective = cfg.objective(cell);
    let result = match run_with_restarts(&run_cfg, &policy, &objective) {
        Ok(result) => {
            let mut header = Vec::new();
            if cfg.timestamp {
                let secs = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs());
                header.push(format!("# timestamp={secs}"));
            }
            header.push(header_line(cfg, cell, &run_cfg));
            write_trace(&cfg.out.join(cell.file_name()), &header, &result)?;
            Ok(RunSummary {
                evals: result.evals,
                evals_to_target: result.evals_to_target,
                best_f: result.best_f,
                final_sigma: result.final_sigma,
                reason: result.reason.to_string(),
            })
        }
        Err(e) => {
            log::error!("{}: {e}", cell.file_name());
            Err(e.to_string())
        }
    };
    Ok(RunOutcome { cell: *cell, result })
}

/// Aggregates outcomes per (objective, n, controller) in grid order.
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[RunOutcome]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &objective in &cfg.objectives {
        for &n in &cfg.dims {
            for &controller in &cfg.controllers {
                let group: Vec<&RunOutcome> = outcomes
                    .iter()
                    .filter(|o| o.cell.objective == objective && o.cell.n == n && o.cell.controller == controller)
                    .collect();
                let ok: Vec<&RunSummary> = group.iter().filter_map(|o| o.result.as_ref().ok()).collect();
                let penalized = sorted(
                    group
                        .iter()
                        .map(|o| match &o.result {
                            Ok(s) => s.evals_to_target.map_or(cfg.budget as f64, |e| e as f64),
                            Err(_) => cfg.budget as f64,
                        })
                        .collect(),
                );
                let best = sorted(ok.iter().map(|s| s.best_f).collect());
                let sig = sorted(ok.iter().map(|s| s.final_sigma).collect());
                rows.push(SummaryRow {
                    objective,
                    n,
                    controller,
                    runs: group.len(),
                    successes: ok.iter().filter(|s| s.evals_to_target.is_some()).count(),
                    errors: group.len() - ok.len(),
                    median_evals: quantile(&penalized, 0.5),
                    q25_evals: quantile(&penalized, 0.25),
                    q75_evals: quantile(&penalized, 0.75),
                    median_best_f: quantile(&best, 0.5),
                    median_final_sigma: quantile(&sig, 0.5),
                });
            }
        }
    }
    rows
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.objective.to_string(),
            r.n.to_string(),
            r.controller.to_string(),
            r.runs.to_string(),
            r.successes.to_string(),
            r.errors.to_string(),
            r.median_evals.to_string(),
            r.q25_evals.to_string(),
            r.q75_evals.to_string(),
            r.median_best_f.to_string(),
            r.median_final_sigma.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Runs the full grid, writing traces and `summary.csv` under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    let mut problems = Vec::new();
    cfg.check(&mut problems);
    if !problems.is_empty() {
        return Err(ConfigError { problems }.into());
    }
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let cells = cfg.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let outcomes = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(cfg, cell))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows = summarize(cfg, &outcomes);
    write_summary(&cfg.out.join("summary.csv"), &rows)?;
    Ok(ExperimentSummary { rows, outcomes })
}

/// Plain-text table of the summary rows.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<15} {:>4} {:<11} {:>5} {:>7} {:>12} {:>12} {:>12} {:>12}\n",
        "objective", "n", "controller", "runs", "success", "median", "q25", "q75", "best_f"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<15} {:>4} {:<11} {:>5} {:>7} {:>12.0} {:>12.0} {:>12.0} {:>12.3e}\n",
            r.objective.name(),
            r.n,
            r.controller.name(),
            r.runs,
            r.successes,
            r.median_evals,
            r.q25_evals,
            r.q75_evals,
            r.median_best_f
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn single_cell_from_flags() {
        let (cfg, warnings) = ExperimentConfig::from_pairs(&pairs(&[
            ("objective", "sphere"),
            ("n", "10"),
            ("controller", "tpa"),
            ("seed", "1"),
        ]))
        .unwrap();
        assert!(warnings.is_empty());
        assert_eq!(cfg.cells().len(), 1);
        assert_eq!(cfg.seeds, vec![1]);
    }

    #[test]
    fn beta_reaches_every_tpa_cell() {
        let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[("controller", "tpa,tpa_noise"), ("beta", "0.1")])).unwrap();
        for c in [Controller::Tpa, Controller::TpaNoise] {
            assert_eq!(cfg.overrides(c).beta_bias, Some(0.1));
        }
        let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[("controller", "tpa_noise")])).unwrap();
        assert_eq!(cfg.overrides(Controller::TpaNoise).beta_bias, Some(0.1));
        assert_eq!(cfg.overrides(Controller::Tpa).beta_bias, None);
    }

    #[test]
    fn csa_with_beta_warns() {
        let (_, warnings) = ExperimentConfig::from_pairs(&pairs(&[("controller", "csa"), ("beta", "0.1")])).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("csa"));
    }

    #[test]
    fn all_problems_reported_together() {
        let err = ExperimentConfig::from_pairs(&pairs(&[
            ("objective", "sphear"),
            ("n", "ten"),
            ("colour", "blue"),
            ("budget", "-3"),
        ]))
        .unwrap_err();
        assert_eq!(err.problems.len(), 4, "{:?}", err.problems);
    }

    #[test]
    fn empty_and_duplicate_seeds_rejected() {
        assert!(ExperimentConfig::from_pairs(&pairs(&[("seeds", "")])).is_err());
        assert!(ExperimentConfig::from_pairs(&pairs(&[("seeds", "1,2,1")])).is_err());
        let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[("seeds", "3..=5")])).unwrap();
        assert_eq!(cfg.seeds, vec![3, 4, 5]);
        let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[("seeds", "0..3")])).unwrap();
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
    }

    #[test]
    fn later_pairs_override() {
        let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[("budget", "10"), ("budget", "20")])).unwrap();
        assert_eq!(cfg.budget, 20);
        let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[("no-timestamp", "true")])).unwrap();
        assert!(!cfg.timestamp);
    }

    #[test]
    fn file_syntax() {
        let p = parse_pairs("# comment\n\nobjective = sphere,rosenbrock\nn=2\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0], ("objective".to_string(), "sphere,rosenbrock".to_string()));
        assert!(parse_pairs("just words").is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert!(quantile(&[], 0.5).is_nan());
    }
}
