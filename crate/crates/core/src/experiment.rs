//! Batch experiment runner: sweeps request or service counts, composes every
//! generated instance with each selected mode, and aggregates the metrics.
//!
//! Each `(sweep value, repetition)` cell gets its own seed, independent of the
//! mode list, so all modes score identical instances. Repetitions run in
//! parallel but are aggregated in repetition order, so the output does not
//! depend on the thread count.
//!
//! By default all modes of an instance are scored over one shared set of
//! serviceable entities (see [`Scoring`]), so their metrics are comparable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{compose_with, graph_for_mode, tolerance, verify_result, ComposeOptions};
use crate::graph::build_partial_bipartite;
use crate::metrics::{evaluate, evaluate_in, summary_stats, MetricsConfig, Scope};
use crate::model::Mode;
use crate::workload::{generate, WorkloadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Requests,
    Services,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Requests => "requests",
            SweepAxis::Services => "services",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "requests" | "request" => Ok(SweepAxis::Requests),
            "services" | "service" => Ok(SweepAxis::Services),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Which entities the per-instance metrics are computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// Every mode is scored over the entities serviceable in the partial
    /// graph, the widest graph any mode uses. All modes of an instance then
    /// share one denominator.
    #[default]
    Shared,
    /// Each mode is scored over the entities serviceable in its own graph.
    PerMode,
}

impl Scoring {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scoring::Shared => "shared",
            Scoring::PerMode => "per_mode",
        }
    }
}

impl std::str::FromStr for Scoring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shared" => Ok(Scoring::Shared),
            "per-mode" | "per_mode" | "permode" => Ok(Scoring::PerMode),
            other => Err(Error::Config(format!("unknown scoring `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<usize>,
    /// Count of the non-swept population.
    pub fixed_count: usize,
    pub repetitions: usize,
    pub base_seed: u64,
    pub modes: Vec<Mode>,
    /// Template; counts and seed are overwritten per cell.
    pub workload: WorkloadSpec,
    pub metrics: MetricsConfig,
    pub scoring: Scoring,
    pub compose: ComposeOptions,
    pub output_path: Option<PathBuf>,
    /// Verify feasibility and cross-mode dominance on every instance.
    pub check: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_axis(SweepAxis::Requests)
    }
}

impl ExperimentConfig {
    /// Desk-scale defaults: 20 fixed services when sweeping requests,
    /// 50 fixed requests when sweeping services.
    pub fn for_axis(axis: SweepAxis) -> Self {
        Self {
            sweep_axis: axis,
            sweep_values: vec![10, 20, 30, 40, 50],
            fixed_count: match axis {
                SweepAxis::Requests => 20,
                SweepAxis::Services => 50,
            },
            repetitions: 100,
            base_seed: 42,
            modes: Mode::ALL.to_vec(),
            workload: WorkloadSpec::default(),
            metrics: MetricsConfig::default(),
            scoring: Scoring::default(),
            compose: ComposeOptions::default(),
            output_path: None,
            check: false,
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            _ => toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep_values.is_empty() {
            return Err(Error::Config("sweep_values must not be empty".into()));
        }
        if self.sweep_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep_values must be strictly increasing".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        let mut modes = self.modes.clone();
        modes.sort();
        modes.dedup();
        if modes.len() != self.modes.len() {
            return Err(Error::Config("modes must not repeat".into()));
        }
        MetricsConfig::new(self.metrics.sf())?;
        self.workload.validate()
    }

    fn cell_spec(&self, value: usize, rep: usize) -> WorkloadSpec {
        let mut spec = self.workload.clone();
        let (services, requests) = match self.sweep_axis {
            SweepAxis::Requests => (self.fixed_count, value),
            SweepAxis::Services => (value, self.fixed_count),
        };
        spec.n_providers = services;
        spec.n_requests = requests;
        spec.seed = cell_seed(self.base_seed, self.sweep_axis, value, rep);
        spec
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for one sweep cell; a pure function of its coordinates.
pub fn cell_seed(base: u64, axis: SweepAxis, value: usize, rep: usize) -> u64 {
    let axis_tag = match axis {
        SweepAxis::Requests => 1,
        SweepAxis::Services => 2,
    };
    [axis_tag, value as u64, rep as u64]
        .into_iter()
        .fold(splitmix64(base), |h, v| splitmix64(h ^ v))
}

/// Per-instance quantities aggregated by the harness, in CSV column order.
pub const METRIC_NAMES: [&str; 9] = [
    "total_allocated",
    "eu",
    "fr",
    "cs_mean",
    "cs_std",
    "ps_mean",
    "ps_std",
    "cs_entropy",
    "ps_entropy",
];

#[derive(Debug, Clone, Copy, PartialEq)]
struct InstanceOutcome {
    values: [f64; METRIC_NAMES.len()],
    elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_axis: SweepAxis,
    pub sweep_value: usize,
    pub mode: Mode,
    pub repetitions: usize,
    /// `(mean, std)` per entry of [`METRIC_NAMES`].
    pub stats: Vec<(f64, f64)>,
    pub elapsed_ms_mean: f64,
    pub elapsed_ms_std: f64,
}

impl ResultRow {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        METRIC_NAMES.iter().position(|m| *m == metric).map(|i| self.stats[i].0)
    }

    pub fn std(&self, metric: &str) -> Option<f64> {
        METRIC_NAMES.iter().position(|m| *m == metric).map(|i| self.stats[i].1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, sweep_value: usize, mode: Mode) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value && r.mode == mode)
    }

    /// Deterministic metrics table (no timing).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "sweep_axis,sweep_value,mode,repetitions")?;
        for m in METRIC_NAMES {
            write!(w, ",{m}_mean,{m}_std")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(w, "{},{},{},{}", r.sweep_axis.as_str(), r.sweep_value, r.mode, r.repetitions)?;
            for (mean, std) in &r.stats {
                write!(w, ",{mean},{std}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Wall-clock composition time per row.
    pub fn write_timing_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sweep_axis,sweep_value,mode,repetitions,elapsed_ms_mean,elapsed_ms_std")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.sweep_axis.as_str(),
                r.sweep_value,
                r.mode,
                r.repetitions,
                r.elapsed_ms_mean,
                r.elapsed_ms_std
            )?;
        }
        Ok(())
    }
}

/// Path of the timing sidecar written next to `out`.
pub fn timing_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}.timing.csv"))
}

fn run_instance(config: &ExperimentConfig, value: usize, rep: usize) -> Result<Vec<InstanceOutcome>> {
    let pop = generate(&config.cell_spec(value, rep))?;
    let window = config.workload.window;
    let reference = match config.scoring {
        Scoring::Shared => {
            let g = build_partial_bipartite(&pop.services, &pop.requests, window);
            Some((g.serviceable_services(), g.serviceable_requests()))
        }
        Scoring::PerMode => None,
    };
    let mut totals = Vec::with_capacity(config.modes.len());
    let mut outcomes = Vec::with_capacity(config.modes.len());
    for &mode in &config.modes {
        let result = compose_with(&pop.services, &pop.requests, window, mode, config.compose)?;
        if config.check {
            let graph = graph_for_mode(&pop.services, &pop.requests, window, mode);
            verify_result(&result, &graph)
                .map_err(|e| Error::CheckFailed(format!("{mode} at {value} rep {rep}: {e}")))?;
        }
        let report = match &reference {
            Some((services, requests)) => evaluate_in(&result, &config.metrics, Scope { services, requests })?,
            None => evaluate(&result, &config.metrics)?,
        };
        let total = result.total_allocated();
        totals.push((mode, total));
        outcomes.push(InstanceOutcome {
            values: [
                total,
                report.eu,
                report.fr,
                report.cs_mean,
                report.cs_std,
                report.ps_mean,
                report.ps_std,
                report.cs_entropy,
                report.ps_entropy,
            ],
            elapsed_ms: result.elapsed().as_secs_f64() * 1e3,
        });
    }
    if config.check {
        let supply: f64 = pop.services.iter().map(|s| s.ae()).sum();
        check_dominance(&totals, tolerance(supply))
            .map_err(|e| Error::CheckFailed(format!("at {value} rep {rep}: {e}")))?;
    }
    Ok(outcomes)
}

/// `PartialFlow ≥ Flow ≥ Baseline, Priority` on total allocated energy, among
/// the modes present.
pub fn check_dominance(totals: &[(Mode, f64)], tol: f64) -> std::result::Result<(), String> {
    let get = |m: Mode| totals.iter().find(|(mode, _)| *mode == m).map(|&(_, t)| t);
    let pairs = [
        (Mode::Flow, Mode::Baseline),
        (Mode::Flow, Mode::Priority),
        (Mode::PartialFlow, Mode::Flow),
    ];
    for (hi, lo) in pairs {
        if let (Some(a), Some(b)) = (get(hi), get(lo)) {
            if a + tol < b {
                return Err(format!("{hi} allocated {a} < {lo} allocated {b}"));
            }
        }
    }
    Ok(())
}

fn stats_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    summary_stats(values).expect("repetitions >= 1")
}

pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.sweep_values.len() * config.modes.len());
    for &value in &config.sweep_values {
        let per_rep: Vec<Vec<InstanceOutcome>> = (0..config.repetitions)
            .into_par_iter()
            .map(|rep| run_instance(config, value, rep))
            .collect::<Result<_>>()?;
        for (k, &mode) in config.modes.iter().enumerate() {
            let stats = (0..METRIC_NAMES.len())
                .map(|i| stats_of(per_rep.iter().map(|o| o[k].values[i])))
                .collect();
            let (elapsed_ms_mean, elapsed_ms_std) = stats_of(per_rep.iter().map(|o| o[k].elapsed_ms));
            rows.push(ResultRow {
                sweep_axis: config.sweep_axis,
                sweep_value: value,
                mode,
                repetitions: config.repetitions,
                stats,
                elapsed_ms_mean,
                elapsed_ms_std,
            });
        }
    }
    Ok(ResultTable { rows })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Runs the sweep and writes the metrics CSV to `out` plus the timing
/// sidecar. Both files are created before any composition runs.
pub fn run_to_file(config: &ExperimentConfig, out: &Path) -> Result<ResultTable> {
    config.validate()?;
    let timing = timing_path(out);
    let mut main = create(out)?;
    let mut side = create(&timing)?;
    let table = run(config)?;
    table
        .write_csv(&mut main)
        .and_then(|_| main.flush())
        .map_err(|e| Error::io(out, e))?;
    table
        .write_timing_csv(&mut side)
        .and_then(|_| side.flush())
        .map_err(|e| Error::io(&timing, e))?;
    Ok(table)
}
