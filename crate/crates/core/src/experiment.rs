//! Seeded Monte-Carlo sweeps and their on-disk result tables.
//!
//! Every instance is addressed by `(master seed, instance index, attempt)`
//! only, so the same geometry is reused at every point of a sweep and each
//! curve is a paired comparison. Results do not depend on thread scheduling.
//!
//! Solvers see Eve's *estimated* channel; the reported secrecy rate is
//! re-scored against her *true* channel.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    channel_gain_strategy, eve_aware_strategy, global_search, random_strategy, StrategyKind, DEFAULT_ENUMERATION_BUDGET,
};
use crate::channel::{build_channel_table, build_evaluation_table};
use crate::error::{Error, Result};
use crate::rate::{sum_secrecy_rate, Assignment};
use crate::scenario::{sample_instance, Scenario, ScenarioConfig};
use crate::seed::derive_seed;
use crate::tabu::{run_tabu_search, NeighborhoodKind, TraceRecord, TsConfig};

/// Give up on an instance slot after this many infeasible draws.
pub const MAX_RESAMPLE_ATTEMPTS: u64 = 1000;

/// Header of the results table. Downstream plotting depends on it.
pub const RESULTS_HEADER: [&str; 7] = ["experiment_id", "sweep_value", "solver", "mean", "stderr", "n", "seed"];
pub const TRACE_HEADER: [&str; 6] = [
    "run",
    "sweep_value",
    "iteration",
    "evaluations",
    "current_value",
    "best_value",
];
pub const CONVERGENCE_HEADER: [&str; 7] = [
    "run",
    "sweep_value",
    "oracle_value",
    "oracle_evaluations",
    "ts_value",
    "ts_evaluations",
    "ts_evaluations_to_optimum",
];
pub const LAYOUT_HEADER: [&str; 7] = ["kind", "index", "x", "y", "z", "fov_deg", "coverage_radius_m"];

/// Relative tolerance for "TS reached the oracle optimum".
pub const OPTIMUM_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Convergence,
    PowerSweep,
    UeCountSweep,
    EveFovSweep,
    UeFovSweep,
    LocalizationErrorSweep,
    LayoutDump,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::Convergence,
        ExperimentId::PowerSweep,
        ExperimentId::UeCountSweep,
        ExperimentId::EveFovSweep,
        ExperimentId::UeFovSweep,
        ExperimentId::LocalizationErrorSweep,
        ExperimentId::LayoutDump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Convergence => "convergence",
            ExperimentId::PowerSweep => "power_sweep",
            ExperimentId::UeCountSweep => "ue_count_sweep",
            ExperimentId::EveFovSweep => "eve_fov_sweep",
            ExperimentId::UeFovSweep => "ue_fov_sweep",
            ExperimentId::LocalizationErrorSweep => "localization_error_sweep",
            ExperimentId::LayoutDump => "layout_dump",
        }
    }

    /// Default abscissa grid.
    pub fn default_sweep(self, base: &ScenarioConfig) -> Vec<f64> {
        let range = |start: f64, stop: f64, step: f64| {
            let n = ((stop - start) / step).round() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect::<Vec<_>>()
        };
        match self {
            ExperimentId::PowerSweep => range(10.0, 30.0, 2.0),
            ExperimentId::UeCountSweep => range(1.0, 8.0, 1.0),
            ExperimentId::EveFovSweep | ExperimentId::UeFovSweep => range(30.0, 90.0, 10.0),
            ExperimentId::LocalizationErrorSweep => range(0.0, 3.0, 0.5),
            ExperimentId::Convergence => vec![base.num_ues as f64],
            ExperimentId::LayoutDump => vec![0.0],
        }
    }

    pub fn default_solvers(self) -> Vec<StrategyKind> {
        match self {
            ExperimentId::Convergence => vec![StrategyKind::TabuSearch, StrategyKind::GlobalSearch],
            ExperimentId::LayoutDump => Vec::new(),
            _ => vec![
                StrategyKind::Random,
                StrategyKind::ChannelGain,
                StrategyKind::EveAwareChannelGain,
                StrategyKind::TabuSearch,
            ],
        }
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut config = base.clone();
        match self {
            ExperimentId::PowerSweep => config.led_power_dbm = value,
            ExperimentId::UeCountSweep | ExperimentId::Convergence => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidExperiment(format!(
                        "UE count must be a positive integer, got {value}"
                    )));
                }
                config.num_ues = value as usize;
            }
            ExperimentId::EveFovSweep => config.eve_fov_deg = value,
            ExperimentId::UeFovSweep => config.ue_fov_deg = value,
            ExperimentId::LocalizationErrorSweep => config.eve_localization_error_m = value,
            ExperimentId::LayoutDump => {}
        }
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == normalized)
            .ok_or_else(|| Error::InvalidExperiment(format!("unknown experiment `{s}`")))
    }
}

/// Optional overrides of the tabu-search defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TabuOverrides {
    pub neighborhood: Option<NeighborhoodKind>,
    pub max_iterations: Option<usize>,
    pub repetition_threshold: Option<usize>,
}

/// A complete experiment description. Also the schema of the TOML config
/// file; every field is optional there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentId,
    pub scenario: ScenarioConfig,
    /// `None` selects the experiment's default grid.
    pub sweep: Option<Vec<f64>>,
    pub num_instances: usize,
    /// `None` selects the experiment's default solver set.
    pub solvers: Option<Vec<StrategyKind>>,
    pub seed: u64,
    pub force_oracle: bool,
    pub enumeration_budget: u64,
    pub tabu: TabuOverrides,
    /// Run instances on the rayon pool. Output is identical either way.
    pub parallel: bool,
    /// `layout_dump` only: draw the worked-example layout instead of a
    /// random instance.
    pub reference_layout: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            experiment: ExperimentId::PowerSweep,
            scenario: ScenarioConfig::default(),
            sweep: None,
            num_instances: 500,
            solvers: None,
            seed: 0,
            force_oracle: false,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            tabu: TabuOverrides::default(),
            parallel: true,
            reference_layout: true,
        }
    }
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentSpec {
            experiment,
            ..Default::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        self.sweep
            .clone()
            .unwrap_or_else(|| self.experiment.default_sweep(&self.scenario))
    }

    pub fn solver_list(&self) -> Vec<StrategyKind> {
        self.solvers
            .clone()
            .unwrap_or_else(|| self.experiment.default_solvers())
    }

    pub fn validate(&self) -> Result<()> {
        let sweep = self.sweep_values();
        if sweep.is_empty() {
            return Err(Error::InvalidExperiment("sweep values must not be empty".into()));
        }
        if let Some(bad) = sweep.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidExperiment(format!("non-finite sweep value {bad}")));
        }
        if self.num_instances == 0 {
            return Err(Error::InvalidExperiment("num_instances must be at least 1".into()));
        }
        let configs = sweep
            .iter()
            .map(|&v| self.experiment.apply(&self.scenario, v))
            .collect::<Result<Vec<_>>>()?;
        if self.experiment == ExperimentId::LayoutDump {
            return Ok(());
        }

        let solvers = self.solver_list();
        if solvers.is_empty() {
            return Err(Error::InvalidExperiment("the solver list is empty".into()));
        }
        for (i, s) in solvers.iter().enumerate() {
            if solvers[..i].contains(s) {
                return Err(Error::InvalidExperiment(format!("solver `{s}` listed twice")));
            }
        }
        if self.experiment == ExperimentId::Convergence {
            for needed in [StrategyKind::TabuSearch, StrategyKind::GlobalSearch] {
                if !solvers.contains(&needed) {
                    return Err(Error::InvalidExperiment(format!(
                        "the convergence experiment needs `{needed}`"
                    )));
                }
            }
        } else if solvers.contains(&StrategyKind::GlobalSearch) && !self.force_oracle {
            if let Some(c) = configs.iter().find(|c| c.num_ues > 4 && c.led_grid.len() >= 25) {
                return Err(Error::InvalidExperiment(format!(
                    "global_search is disabled for {} UEs over {} LEDs; pass --force-oracle to run it anyway",
                    c.num_ues,
                    c.led_grid.len()
                )));
            }
        }
        Ok(())
    }

    fn ts_config(&self, num_ues: usize, seed: u64) -> TsConfig {
        let mut config = TsConfig::for_ues(num_ues, seed);
        if let Some(kind) = self.tabu.neighborhood {
            config.neighborhood = kind;
        }
        if let Some(n) = self.tabu.max_iterations {
            config.max_iterations = n;
        }
        if let Some(n) = self.tabu.repetition_threshold {
            config.repetition_threshold = n;
        }
        config
    }
}

/// One solver's outcome on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub solver: StrategyKind,
    pub assignment: Assignment,
    /// Sum secrecy rate against Eve's true position.
    pub value: f64,
    /// Sum secrecy rate against the estimate the solver optimized.
    pub planned_value: f64,
}

/// Convergence bookkeeping for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub oracle_value: f64,
    pub oracle_evaluations: u64,
    pub ts_value: f64,
    pub ts_evaluations: u64,
    pub ts_evaluations_to_optimum: Option<u64>,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub sweep_value: f64,
    pub instance: usize,
    /// Draws needed to find a servable instance (1 = first draw).
    pub attempts: u64,
    pub solvers: Vec<SolverRecord>,
    pub convergence: Option<ConvergenceRun>,
}

impl InstanceRecord {
    pub fn record(&self, solver: StrategyKind) -> Option<&SolverRecord> {
        self.solvers.iter().find(|r| r.solver == solver)
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: ExperimentId,
    pub sweep_value: f64,
    pub solver: StrategyKind,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub instances: Vec<InstanceRecord>,
    /// Infeasible draws that were thrown away and resampled.
    pub resampled: u64,
    /// Set by `layout_dump`.
    pub layout: Option<Scenario>,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
}

impl ExperimentResult {
    pub fn row(&self, sweep_value: f64, solver: StrategyKind) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.solver == solver)
    }

    /// Means of `solver` in sweep order.
    pub fn series(&self, solver: StrategyKind) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.solver == solver).collect()
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn solver_tag(solver: StrategyKind) -> u64 {
    solver as u64 + 1
}

/// Samples and solves one instance slot, resampling infeasible draws.
pub fn run_instance(
    spec: &ExperimentSpec,
    config: &ScenarioConfig,
    sweep_value: f64,
    instance: usize,
) -> Result<InstanceRecord> {
    let solvers = spec.solver_list();
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let seed = derive_seed(spec.seed, &[instance as u64, attempt]);
        let scenario = sample_instance(config, &mut ChaCha8Rng::seed_from_u64(seed))?;
        match solve_instance(spec, &scenario, &solvers, seed) {
            Ok((records, convergence)) => {
                return Ok(InstanceRecord {
                    sweep_value,
                    instance,
                    attempts: attempt + 1,
                    solvers: records,
                    convergence,
                })
            }
            Err(e) if e.is_infeasibility() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InfeasibleInstance(format!(
        "instance {instance} at sweep value {sweep_value}: no servable draw in {MAX_RESAMPLE_ATTEMPTS} attempts"
    )))
}

fn solve_instance(
    spec: &ExperimentSpec,
    scenario: &Scenario,
    solvers: &[StrategyKind],
    seed: u64,
) -> Result<(Vec<SolverRecord>, Option<ConvergenceRun>)> {
    let table = build_channel_table(scenario)?;
    table.find_matching()?;
    let truth = build_evaluation_table(scenario)?;
    let noise = &scenario.noise;

    let mut records = Vec::with_capacity(solvers.len());
    let mut ts_outcome = None;
    let mut oracle = None;
    for &solver in solvers {
        let solver_seed = derive_seed(seed, &[solver_tag(solver)]);
        let assignment = match solver {
            StrategyKind::Random => random_strategy(&table, &mut ChaCha8Rng::seed_from_u64(solver_seed))?,
            StrategyKind::ChannelGain => channel_gain_strategy(&table)?,
            StrategyKind::EveAwareChannelGain => eve_aware_strategy(&table)?,
            StrategyKind::GlobalSearch => {
                let out = global_search(&table, noise, spec.enumeration_budget)?;
                let assignment = out.assignment.clone();
                oracle = Some(out);
                assignment
            }
            StrategyKind::TabuSearch => {
                let out = run_tabu_search(&table, noise, &spec.ts_config(table.num_ues(), solver_seed))?;
                let assignment = out.assignment.clone();
                ts_outcome = Some(out);
                assignment
            }
        };
        records.push(SolverRecord {
            solver,
            planned_value: sum_secrecy_rate(&table, &assignment, noise)?,
            value: sum_secrecy_rate(&truth, &assignment, noise)?,
            assignment,
        });
    }

    let convergence = match (spec.experiment, ts_outcome, oracle) {
        (ExperimentId::Convergence, Some(ts), Some(oracle)) => Some(ConvergenceRun {
            oracle_value: oracle.value,
            oracle_evaluations: oracle.evaluations,
            ts_value: ts.value,
            ts_evaluations: ts.evaluations(),
            ts_evaluations_to_optimum: ts.evaluations_to_reach(oracle.value, OPTIMUM_REL_TOL),
            trace: ts.trace,
        }),
        _ => None,
    };
    Ok((records, convergence))
}

/// Runs the whole sweep.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let started_unix_s = unix_now();

    if spec.experiment == ExperimentId::LayoutDump {
        let layout = if spec.reference_layout {
            Scenario::reference_layout(&spec.scenario)?
        } else {
            sample_instance(
                &spec.scenario,
                &mut ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[0, 0])),
            )?
        };
        return Ok(ExperimentResult {
            spec: spec.clone(),
            rows: Vec::new(),
            instances: Vec::new(),
            resampled: 0,
            layout: Some(layout),
            started_unix_s,
            finished_unix_s: unix_now(),
        });
    }

    let sweep = spec.sweep_values();
    let configs = sweep
        .iter()
        .map(|&v| spec.experiment.apply(&spec.scenario, v))
        .collect::<Result<Vec<_>>>()?;
    let units: Vec<(usize, usize)> = (0..sweep.len())
        .flat_map(|s| (0..spec.num_instances).map(move |i| (s, i)))
        .collect();
    let work = |&(s, i): &(usize, usize)| run_instance(spec, &configs[s], sweep[s], i);
    let instances: Vec<InstanceRecord> = if spec.parallel {
        units.par_iter().map(work).collect::<Result<_>>()?
    } else {
        units.iter().map(work).collect::<Result<_>>()?
    };

    let solvers = spec.solver_list();
    let mut rows = Vec::with_capacity(sweep.len() * solvers.len());
    for (s, &value) in sweep.iter().enumerate() {
        let slice = &instances[s * spec.num_instances..(s + 1) * spec.num_instances];
        for &solver in &solvers {
            let values: Vec<f64> = slice
                .iter()
                .map(|inst| inst.record(solver).expect("every solver runs on every instance").value)
                .collect();
            let (mean, stderr) = mean_and_stderr(&values);
            rows.push(ResultRow {
                experiment_id: spec.experiment,
                sweep_value: value,
                solver,
                mean,
                stderr,
                n: values.len(),
                seed: spec.seed,
            });
        }
    }
    let resampled = instances.iter().map(|i| i.attempts - 1).sum();
    Ok(ExperimentResult {
        spec: spec.clone(),
        rows,
        instances,
        resampled,
        layout: None,
        started_unix_s,
        finished_unix_s: unix_now(),
    })
}

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Files produced by [`write_results`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WrittenFiles {
    pub results_csv: Option<PathBuf>,
    pub trace_csv: Option<PathBuf>,
    pub convergence_csv: Option<PathBuf>,
    pub layout_csv: Option<PathBuf>,
    pub scenario_toml: Option<PathBuf>,
    pub manifest_json: PathBuf,
}

pub fn write_results_csv<W: std::io::Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for row in &result.rows {
        w.write_record([
            row.experiment_id.name().to_string(),
            format_float(row.sweep_value),
            row.solver.name().to_string(),
            format_float(row.mean),
            format_float(row.stderr),
            row.n.to_string(),
            row.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_convergence<W: std::io::Write>(result: &ExperimentResult, trace: W, summary: W) -> Result<()> {
    let mut t = csv::Writer::from_writer(trace);
    let mut s = csv::Writer::from_writer(summary);
    t.write_record(TRACE_HEADER)?;
    s.write_record(CONVERGENCE_HEADER)?;
    for (run, inst) in result.instances.iter().enumerate() {
        let Some(conv) = &inst.convergence else { continue };
        for r in &conv.trace {
            t.write_record([
                run.to_string(),
                format_float(inst.sweep_value),
                r.iteration.to_string(),
                r.evaluations.to_string(),
                format_float(r.current_value),
                format_float(r.best_value),
            ])?;
        }
        s.write_record([
            run.to_string(),
            format_float(inst.sweep_value),
            format_float(conv.oracle_value),
            conv.oracle_evaluations.to_string(),
            format_float(conv.ts_value),
            conv.ts_evaluations.to_string(),
            conv.ts_evaluations_to_optimum
                .map(|e| e.to_string())
                .unwrap_or_default(),
        ])?;
    }
    t.flush()?;
    s.flush()?;
    Ok(())
}

/// LEDs, UEs and both Eve positions with the radius of each receiver's
/// floor-level coverage circle (ceiling-to-receiver drop × tan FoV).
pub fn write_layout_csv<W: std::io::Write>(scenario: &Scenario, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LAYOUT_HEADER)?;
    let ceiling = scenario.room.height;
    for (k, led) in scenario.leds.iter().enumerate() {
        let p = led.position;
        w.write_record([
            "led".to_string(),
            k.to_string(),
            format_float(p.x),
            format_float(p.y),
            format_float(p.z),
            String::new(),
            String::new(),
        ])?;
    }
    let receivers = scenario.ues.iter().enumerate().map(|(m, rx)| ("ue", m, rx)).chain([
        ("eve", 0, &scenario.eve_true),
        ("eve_estimated", 0, &scenario.eve_estimated),
    ]);
    for (kind, index, rx) in receivers {
        let p = rx.position;
        w.write_record([
            kind.to_string(),
            index.to_string(),
            format_float(p.x),
            format_float(p.y),
            format_float(p.z),
            format_float(rx.fov.to_degrees()),
            format_float((ceiling - p.z) * rx.fov.tan()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: ExperimentId,
    code_version: &'static str,
    started_unix_s: f64,
    finished_unix_s: f64,
    resampled_instances: u64,
    spec: &'a ExperimentSpec,
    sweep: Vec<f64>,
    solvers: Vec<StrategyKind>,
    files: &'a WrittenFiles,
}

/// Writes every table for `result` into `dir` (created if missing) plus a
/// JSON manifest echoing the full configuration.
pub fn write_results(result: &ExperimentResult, dir: &Path) -> Result<WrittenFiles> {
    fs::create_dir_all(dir)?;
    let stem = result.spec.experiment.name();
    let mut files = WrittenFiles {
        manifest_json: dir.join(format!("{stem}_manifest.json")),
        ..Default::default()
    };

    if let Some(layout) = &result.layout {
        let csv_path = dir.join(format!("{stem}_layout.csv"));
        write_layout_csv(layout, fs::File::create(&csv_path)?)?;
        let toml_path = dir.join(format!("{stem}_scenario.toml"));
        fs::write(&toml_path, layout.to_toml()?)?;
        files.layout_csv = Some(csv_path);
        files.scenario_toml = Some(toml_path);
    } else {
        if result.rows.is_empty() {
            return Err(Error::InvalidExperiment("refusing to write an empty result".into()));
        }
        let path = dir.join(format!("{stem}.csv"));
        write_results_csv(result, fs::File::create(&path)?)?;
        files.results_csv = Some(path);
        if result.instances.iter().any(|i| i.convergence.is_some()) {
            let trace = dir.join(format!("{stem}_trace.csv"));
            let summary = dir.join(format!("{stem}_summary.csv"));
            write_convergence(result, fs::File::create(&trace)?, fs::File::create(&summary)?)?;
            files.trace_csv = Some(trace);
            files.convergence_csv = Some(summary);
        }
    }

    let manifest = Manifest {
        experiment: result.spec.experiment,
        code_version: env!("CARGO_PKG_VERSION"),
        started_unix_s: result.started_unix_s,
        finished_unix_s: result.finished_unix_s,
        resampled_instances: result.resampled,
        spec: &result.spec,
        sweep: result.spec.sweep_values(),
        solvers: result.spec.solver_list(),
        files: &files,
    };
    fs::write(&files.manifest_json, serde_json::to_string_pretty(&manifest)?)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: ExperimentId) -> ExperimentSpec {
        ExperimentSpec {
            experiment,
            num_instances: 4,
            ..ExperimentSpec::new(experiment)
        }
    }

    #[test]
    fn default_grids() {
        let base = ScenarioConfig::default();
        assert_eq!(ExperimentId::PowerSweep.default_sweep(&base).len(), 11);
        assert_eq!(
            ExperimentId::UeCountSweep.default_sweep(&base),
            (1..=8).map(f64::from).collect::<Vec<_>>()
        );
        assert_eq!(
            ExperimentId::EveFovSweep.default_sweep(&base),
            vec![30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0]
        );
        assert_eq!(
            ExperimentId::LocalizationErrorSweep.default_sweep(&base).last(),
            Some(&3.0)
        );
    }

    #[test]
    fn experiment_names_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("fig9".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn empty_solver_list_is_refused() {
        let spec = ExperimentSpec {
            solvers: Some(vec![]),
            ..small(ExperimentId::PowerSweep)
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidExperiment(_))));
    }

    #[test]
    fn empty_sweep_is_refused() {
        let spec = ExperimentSpec {
            sweep: Some(vec![]),
            ..small(ExperimentId::PowerSweep)
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn oracle_guard_on_large_instances() {
        let mut spec = ExperimentSpec {
            solvers: Some(vec![StrategyKind::GlobalSearch]),
            ..small(ExperimentId::PowerSweep)
        };
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("--force-oracle"), "{err}");
        spec.force_oracle = true;
        spec.validate().unwrap();
        spec.force_oracle = false;
        spec.scenario.num_ues = 4;
        spec.validate().unwrap();
    }

    #[test]
    fn convergence_needs_both_solvers() {
        let spec = ExperimentSpec {
            solvers: Some(vec![StrategyKind::TabuSearch]),
            ..small(ExperimentId::Convergence)
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn ue_count_must_be_integral() {
        let spec = ExperimentSpec {
            sweep: Some(vec![2.5]),
            ..small(ExperimentId::UeCountSweep)
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn stderr_of_known_sample() {
        let (mean, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        // sd = √(5/3), se = sd / 2
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn float_format_is_fixed_width_precision() {
        assert_eq!(format_float(2.18), "2.1800000000000002e0");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn spec_from_partial_toml() {
        let spec = ExperimentSpec::from_toml(
            "experiment = \"ue_fov_sweep\"\nnum_instances = 10\nsweep = [40.0, 60.0]\n[scenario]\nnum_ues = 3\n[tabu]\nmax_iterations = 20\n",
        )
        .unwrap();
        assert_eq!(spec.experiment, ExperimentId::UeFovSweep);
        assert_eq!(spec.scenario.num_ues, 3);
        assert_eq!(spec.tabu.max_iterations, Some(20));
        assert_eq!(spec.solver_list().len(), 4);
        assert!(ExperimentSpec::from_toml("bogus = 1").is_err());
    }
}
