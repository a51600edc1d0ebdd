//! Experiment grids: configuration, Monte-Carlo execution, CSV and JSON
//! output, and summary tables.
//!
//! Trial `i` of every grid point uses `trials::trial_seed(seed, i)`, so a
//! single trial can be rerun on its own.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::Ratio;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apps::{run_app, AppKind, Execution};
use crate::collision::{
    choose_cd_params, choose_delta, expected_outcomes, run_collision_detection, CdError, CdParams,
};
use crate::congest::{run_builtin, two_hop_colors, CongestKind, RobustLayer, TdmaConfig};
use crate::seed::{self, Stream};
use crate::stats::{linear_fit, wilson_interval, Z95};
use crate::topology::{Topology, TopologyError, TopologySpec};
use crate::trials::run_trials;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Cd,
    BeepSim,
    App,
    Congest,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Cd => "cd",
            ExperimentKind::BeepSim => "beep-sim",
            ExperimentKind::App => "app",
            ExperimentKind::Congest => "congest",
        })
    }
}

fn default_trials() -> usize {
    100
}

fn default_target() -> f64 {
    0.01
}

fn default_scenarios() -> Vec<usize> {
    vec![0, 1, 2]
}

fn default_k() -> usize {
    4
}

fn default_robust() -> RobustLayer {
    RobustLayer::Identity
}

/// One experiment grid, stored as TOML:
///
/// ```toml
/// kind = "cd"
/// topologies = ["clique:16", "gnp:32:0.2:7"]
/// epsilons = [0.0, 0.05]
/// trials = 1000
/// seed = 42
/// target_failure = 0.001
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub topologies: Vec<TopologySpec>,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_target")]
    pub target_failure: f64,
    /// `cd`: explicit code lengths; empty means chosen from the target.
    /// `congest`: neighborhood code lengths; empty means the default.
    #[serde(default)]
    pub code_lengths: Vec<usize>,
    /// `cd`: numbers of active nodes.
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<usize>,
    /// Application (`app`, `beep-sim`) or built-in (`congest`) name.
    #[serde(default)]
    pub protocol: Option<String>,
    /// String length of message exchange.
    #[serde(default = "default_k")]
    pub message_bits: usize,
    #[serde(default = "default_robust")]
    pub robust: RobustLayer,
    /// CSV destination; the JSON summary goes next to it.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("topology {spec}: {source}")]
    Topology { spec: String, source: TopologyError },
    #[error(transparent)]
    Cd(#[from] CdError),
    #[error("{0}")]
    Run(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    TomlRead(#[from] toml::de::Error),
    #[error("toml: {0}")]
    TomlWrite(#[from] toml::ser::Error),
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, topologies: Vec<TopologySpec>, epsilons: Vec<f64>) -> Self {
        ExperimentConfig {
            kind,
            topologies,
            epsilons,
            trials: default_trials(),
            seed: 0,
            target_failure: default_target(),
            code_lengths: Vec::new(),
            scenarios: default_scenarios(),
            protocol: None,
            message_bits: default_k(),
            robust: default_robust(),
            out: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String, ExperimentError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.topologies.is_empty() {
            return bad("no topologies");
        }
        if self.epsilons.is_empty() {
            return bad("no epsilons");
        }
        if self.epsilons.iter().any(|e| !(0.0..0.5).contains(e)) {
            return bad("epsilons must lie in [0, 0.5)");
        }
        if !(self.target_failure > 0.0) {
            return bad("target_failure must be positive");
        }
        if self.kind == ExperimentKind::Cd && self.scenarios.is_empty() {
            return bad("no scenarios");
        }
        self.app_kind()?;
        self.congest_kind()?;
        Ok(())
    }

    fn app_kind(&self) -> Result<AppKind, ExperimentError> {
        self.protocol
            .as_deref()
            .unwrap_or("mis")
            .parse()
            .map_err(ExperimentError::Config)
            .or_else(|e| {
                if matches!(self.kind, ExperimentKind::App | ExperimentKind::BeepSim) {
                    Err(e)
                } else {
                    Ok(AppKind::Mis)
                }
            })
    }

    fn congest_kind(&self) -> Result<CongestKind, ExperimentError> {
        let name = self.protocol.as_deref().unwrap_or("message-exchange");
        match name.parse() {
            Ok(k) => Ok(k),
            Err(e) if self.kind == ExperimentKind::Congest => Err(ExperimentError::Config(e)),
            Err(_) => Ok(CongestKind::MessageExchange),
        }
    }
}

/// Extra columns of CONGEST grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestPoint {
    pub message_bits: usize,
    pub colors: usize,
    pub max_degree: usize,
    pub robust: RobustLayer,
    pub pi_rounds: usize,
    pub slots: usize,
    pub overhead_ratio: f64,
}

/// Aggregate of all trials at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub topology: String,
    pub n: usize,
    pub epsilon: f64,
    pub protocol: String,
    pub scenario: Option<usize>,
    pub delta: Option<f64>,
    /// Detection code length (`cd`, `beep-sim`, noisy `app`), neighborhood
    /// code length (`congest`), 1 for direct runs.
    pub n_c: usize,
    /// Protocol rounds simulated per trial (1 for `cd`).
    pub rounds: f64,
    pub trials: usize,
    /// Failures per category; categories with no failures are absent.
    pub failures: BTreeMap<String, usize>,
    pub mean_slots: f64,
    pub congest: Option<CongestPoint>,
    pub wall_ms: f64,
}

impl PointResult {
    pub fn total_failures(&self) -> usize {
        self.failures.values().sum()
    }

    pub fn failure_rate(&self) -> f64 {
        self.total_failures() as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub points: Vec<PointResult>,
}

/// Outcome of one trial: failure category (if failed), slots, rounds.
type TrialOutcome = (Option<String>, usize, usize);

fn aggregate(outcomes: &[TrialOutcome]) -> (BTreeMap<String, usize>, f64, f64) {
    let mut failures = BTreeMap::new();
    for (cat, _, _) in outcomes {
        if let Some(c) = cat {
            *failures.entry(c.clone()).or_insert(0) += 1;
        }
    }
    let t = outcomes.len().max(1) as f64;
    let slots = outcomes.iter().map(|o| o.1 as f64).sum::<f64>() / t;
    let rounds = outcomes.iter().map(|o| o.2 as f64).sum::<f64>() / t;
    (failures, slots, rounds)
}

/// Detection parameters for a fixed code length: the largest dimension up
/// to 10 for which a code meeting the target distance exists.
pub fn fixed_length_params(n_c: usize, epsilon: f64) -> Result<CdParams, CdError> {
    let delta = choose_delta(epsilon)?;
    let top = (n_c / 8).clamp(1, 10);
    let mut last = CdError::NoCode { k: 1, len: n_c / 2 };
    for k in (1..=top).rev() {
        match CdParams::for_length(n_c, k, delta, epsilon) {
            Ok(p) => return Ok(p),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn build(spec: &TopologySpec) -> Result<Topology, ExperimentError> {
    spec.build().map_err(|source| ExperimentError::Topology {
        spec: spec.to_string(),
        source,
    })
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Runs every grid point. Writes the CSV and JSON summary when `out` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    let mut points = Vec::new();
    for spec in &config.topologies {
        let topology = build(spec)?;
        for &eps in &config.epsilons {
            match config.kind {
                ExperimentKind::Cd => cd_points(config, spec, &topology, eps, &mut points)?,
                ExperimentKind::App | ExperimentKind::BeepSim => {
                    points.push(app_point(config, spec, &topology, eps)?)
                }
                ExperimentKind::Congest => {
                    congest_points(config, spec, &topology, eps, &mut points)?
                }
            }
        }
    }
    let result = ExperimentResult {
        kind: config.kind,
        seed: config.seed,
        points,
    };
    if let Some(out) = &config.out {
        write_outputs(&result, out)?;
    }
    Ok(result)
}

fn cd_points(
    config: &ExperimentConfig,
    spec: &TopologySpec,
    topology: &Topology,
    eps: f64,
    points: &mut Vec<PointResult>,
) -> Result<(), ExperimentError> {
    let n = topology.node_count();
    let params: Vec<CdParams> = if config.code_lengths.is_empty() {
        vec![choose_cd_params(n, 1, eps, config.target_failure)?]
    } else {
        config
            .code_lengths
            .iter()
            .map(|&l| fixed_length_params(l, eps))
            .collect::<Result<_, _>>()?
    };
    for p in &params {
        for &s in &config.scenarios {
            if s > n {
                return Err(ExperimentError::Config(format!(
                    "scenario {s} exceeds {n} nodes"
                )));
            }
            let start = Instant::now();
            let outcomes = run_trials(config.seed, config.trials, |_, seed| {
                let mut rng = seed::rng(seed, Stream::Input, 0);
                let mut active = vec![false; n];
                for v in sample(&mut rng, n, s) {
                    active[v] = true;
                }
                let cat = match run_collision_detection(topology, &active, p, seed) {
                    Err(e) => Some(format!("error: {e}")),
                    Ok(r) if r.outcomes != expected_outcomes(topology, &active) => Some(
                        if r.codeword_clash {
                            "codeword_clash"
                        } else {
                            "misclassification"
                        }
                        .to_string(),
                    ),
                    Ok(_) => None,
                };
                (cat, p.n_c(), 1)
            });
            let (failures, mean_slots, rounds) = aggregate(&outcomes);
            points.push(PointResult {
                topology: spec.to_string(),
                n,
                epsilon: eps,
                protocol: "cd".into(),
                scenario: Some(s),
                delta: Some(ratio_f64(p.delta())),
                n_c: p.n_c(),
                rounds,
                trials: config.trials,
                failures,
                mean_slots,
                congest: None,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(())
}

fn app_point(
    config: &ExperimentConfig,
    spec: &TopologySpec,
    topology: &Topology,
    eps: f64,
) -> Result<PointResult, ExperimentError> {
    let kind = config.app_kind()?;
    let noisy = Execution::Noisy {
        epsilon: eps,
        target_failure: config.target_failure,
    };
    let start = Instant::now();
    let outcomes: Vec<(TrialOutcome, usize)> = run_trials(config.seed, config.trials, |_, seed| {
        let exec = if eps == 0.0 && config.kind == ExperimentKind::App {
            Execution::Direct
        } else {
            noisy
        };
        let run = match run_app(kind, topology, seed, exec) {
            Ok(r) => r,
            Err(e) => return ((Some(format!("error: {e}")), 0, 0), 1),
        };
        let cat = if config.kind == ExperimentKind::App {
            (!run.verified).then(|| "verifier".to_string())
        } else {
            match run_app(kind, topology, seed, Execution::Direct) {
                Err(e) => Some(format!("error: {e}")),
                Ok(d) if !d.verified => Some("verifier".into()),
                Ok(d) if d.outputs != run.outputs => Some(
                    if run.codeword_clashes > 0 {
                        "codeword_clash"
                    } else if run.faults > 0 {
                        "fault"
                    } else {
                        "mismatch"
                    }
                    .into(),
                ),
                Ok(_) => None,
            }
        };
        ((cat, run.slots, run.rounds), run.n_c)
    });
    let n_c = outcomes.iter().map(|o| o.1).max().unwrap_or(1);
    let trial: Vec<TrialOutcome> = outcomes.into_iter().map(|o| o.0).collect();
    let (failures, mean_slots, rounds) = aggregate(&trial);
    Ok(PointResult {
        topology: spec.to_string(),
        n: topology.node_count(),
        epsilon: eps,
        protocol: kind.to_string(),
        scenario: None,
        delta: None,
        n_c,
        rounds,
        trials: config.trials,
        failures,
        mean_slots,
        congest: None,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn congest_points(
    config: &ExperimentConfig,
    spec: &TopologySpec,
    topology: &Topology,
    eps: f64,
    points: &mut Vec<PointResult>,
) -> Result<(), ExperimentError> {
    let kind = config.congest_kind()?;
    let colors = two_hop_colors(topology, config.seed);
    let lengths: Vec<Option<usize>> = if config.code_lengths.is_empty() {
        vec![None]
    } else {
        config.code_lengths.iter().map(|&l| Some(l)).collect()
    };
    for code_len in lengths {
        let start = Instant::now();
        let runs = run_trials(config.seed, config.trials, |_, seed| {
            let tdma = TdmaConfig {
                robust: config.robust,
                epsilon: eps,
                seed,
                target_failure: config.target_failure,
                code_len,
            };
            run_builtin(kind, topology, &colors, config.message_bits, &tdma)
        });
        let mut outcomes = Vec::with_capacity(runs.len());
        let mut meta = None;
        for r in runs {
            let r = r.map_err(|e| ExperimentError::Run(e.to_string()))?;
            let cat = if r.report.collision_violations > 0 {
                Some("collision")
            } else if !r.equals_direct {
                Some("mismatch")
            } else if !r.verified {
                Some("verifier")
            } else {
                None
            };
            outcomes.push((
                cat.map(String::from),
                r.report.slots,
                r.report.big_pi_rounds,
            ));
            meta.get_or_insert(r.report);
        }
        let meta = meta.expect("at least one trial");
        let (failures, mean_slots, rounds) = aggregate(&outcomes);
        points.push(PointResult {
            topology: spec.to_string(),
            n: topology.node_count(),
            epsilon: eps,
            protocol: kind.to_string(),
            scenario: None,
            delta: None,
            n_c: meta.n_c,
            rounds,
            trials: config.trials,
            failures,
            mean_slots,
            congest: Some(CongestPoint {
                message_bits: meta.message_bits,
                colors: meta.colors,
                max_degree: meta.max_degree,
                robust: config.robust,
                pi_rounds: meta.pi_rounds,
                slots: meta.slots,
                overhead_ratio: meta.overhead_ratio(),
            }),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct CdRow<'a> {
    n: usize,
    topology: &'a str,
    epsilon: f64,
    delta: f64,
    n_c: usize,
    scenario: usize,
    trials: usize,
    failures: usize,
    failure_category: &'a str,
}

#[derive(Serialize)]
struct AppRow<'a> {
    n: usize,
    topology: &'a str,
    protocol: &'a str,
    epsilon: f64,
    n_c: usize,
    trials: usize,
    failures: usize,
    failure_category: &'a str,
    mean_rounds: f64,
    mean_slots: f64,
}

#[derive(Serialize)]
struct CongestRow<'a> {
    n: usize,
    topology: &'a str,
    #[serde(rename = "B")]
    b: usize,
    c: usize,
    #[serde(rename = "Delta")]
    delta: usize,
    epsilon: f64,
    robust: String,
    #[serde(rename = "n_C")]
    n_c: usize,
    slots: usize,
    pi_rounds: usize,
    overhead_ratio: f64,
    verified: usize,
    trials: usize,
}

/// One row per nonempty failure category, or a single `none` row.
fn category_rows(p: &PointResult) -> Vec<(&str, usize)> {
    if p.failures.is_empty() {
        vec![("none", 0)]
    } else {
        p.failures.iter().map(|(c, &k)| (c.as_str(), k)).collect()
    }
}

/// Writes the result CSV. Wall times are left out so equal inputs give
/// byte-identical files.
pub fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for p in &result.points {
        match result.kind {
            ExperimentKind::Cd => {
                for (cat, k) in category_rows(p) {
                    w.serialize(CdRow {
                        n: p.n,
                        topology: &p.topology,
                        epsilon: p.epsilon,
                        delta: p.delta.unwrap_or(0.0),
                        n_c: p.n_c,
                        scenario: p.scenario.unwrap_or(0),
                        trials: p.trials,
                        failures: k,
                        failure_category: cat,
                    })?;
                }
            }
            ExperimentKind::App | ExperimentKind::BeepSim => {
                for (cat, k) in category_rows(p) {
                    w.serialize(AppRow {
                        n: p.n,
                        topology: &p.topology,
                        protocol: &p.protocol,
                        epsilon: p.epsilon,
                        n_c: p.n_c,
                        trials: p.trials,
                        failures: k,
                        failure_category: cat,
                        mean_rounds: p.rounds,
                        mean_slots: p.mean_slots,
                    })?;
                }
            }
            ExperimentKind::Congest => {
                let c = p.congest.as_ref().expect("congest columns");
                w.serialize(CongestRow {
                    n: p.n,
                    topology: &p.topology,
                    b: c.message_bits,
                    c: c.colors,
                    delta: c.max_degree,
                    epsilon: p.epsilon,
                    robust: c.robust.to_string(),
                    n_c: p.n_c,
                    slots: c.slots,
                    pi_rounds: c.pi_rounds,
                    overhead_ratio: c.overhead_ratio,
                    verified: p.trials - p.total_failures(),
                    trials: p.trials,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Path of the JSON summary belonging to the CSV at `csv_path`.
pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV to `csv_path` and the JSON summary next to it.
pub fn write_outputs(result: &ExperimentResult, csv_path: &Path) -> Result<(), ExperimentError> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(result, std::fs::File::create(csv_path)?)?;
    let summary = serde_json::json!({
        "result": result,
        "report": sweep_report(&result.points),
    });
    std::fs::write(
        summary_path(csv_path),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<ExperimentResult, ExperimentError> {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok(serde_json::from_value(
        v.get("result").cloned().unwrap_or(v),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub topology: String,
    pub n: usize,
    pub protocol: String,
    pub scenario: Option<usize>,
    pub epsilon: f64,
    pub n_c: usize,
    pub trials: usize,
    pub failures: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Nonempty categories only.
    pub categories: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of the detection code length against
    /// `log₂(n·R)`, when the grid has at least two distinct `n·R`.
    pub n_c_log_slope: Option<f64>,
}

/// Per-point failure rates with 95% Wilson intervals.
pub fn sweep_report(points: &[PointResult]) -> SweepReport {
    let rows = points
        .iter()
        .map(|p| {
            let f = p.total_failures();
            let (lo, hi) = wilson_interval(f, p.trials, Z95);
            SweepRow {
                topology: p.topology.clone(),
                n: p.n,
                protocol: p.protocol.clone(),
                scenario: p.scenario,
                epsilon: p.epsilon,
                n_c: p.n_c,
                trials: p.trials,
                failures: f,
                rate: p.failure_rate(),
                ci_low: lo,
                ci_high: hi,
                categories: p
                    .failures
                    .iter()
                    .filter(|e| *e.1 > 0)
                    .map(|(c, &k)| (c.clone(), k))
                    .collect(),
            }
        })
        .collect();
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.n_c > 1 && p.congest.is_none())
        .map(|p| ((p.n as f64 * p.rounds.max(1.0)).log2(), p.n_c as f64))
        .collect();
    SweepReport {
        rows,
        n_c_log_slope: linear_fit(&fit).map(|f| f.0),
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>5} {:<18} {:>4} {:>7} {:>5} {:>7} {:>6} {:>9} {:>21}  categories",
            "topology",
            "n",
            "protocol",
            "scen",
            "eps",
            "n_c",
            "trials",
            "fails",
            "rate",
            "95% wilson"
        )?;
        for r in &self.rows {
            let cats: Vec<String> = r
                .categories
                .iter()
                .map(|(c, k)| format!("{c}={k}"))
                .collect();
            writeln!(
                f,
                "{:<18} {:>5} {:<18} {:>4} {:>7.4} {:>5} {:>7} {:>6} {:>9.3e} [{:>9.3e}, {:>9.3e}]  {}",
                r.topology,
                r.n,
                r.protocol,
                r.scenario.map_or("-".to_string(), |s| s.to_string()),
                r.epsilon,
                r.n_c,
                r.trials,
                r.failures,
                r.rate,
                r.ci_low,
                r.ci_high,
                cats.join(" ")
            )?;
        }
        match self.n_c_log_slope {
            Some(s) => writeln!(f, "n_c vs log2(n*R) slope: {s:.3}"),
            None => writeln!(f, "n_c vs log2(n*R) slope: n/a"),
        }
    }
}
