//! Load sweeps: one simulation per (variant, load, scheduler, seed), run in
//! parallel, written in a fixed order.
//!
//! A sweep file is an ordinary config file plus keys under `sweep.`:
//!
//! ```text
//! sweep.loads = 0.1, 0.3, 0.5        # strictly increasing total loads
//! sweep.load_scale = capacity        # loads are fractions of predicted capacity
//! sweep.schedulers = gate_single, report_driven
//! sweep.replications = 2             # seeds per point
//! sweep.seed = 1                     # first seed
//! sweep.duration = 2s                # optional fixed run length
//! sweep.vary.d_max = 16000; 32000    # one variant per value, `;`-separated
//! ```
//!
//! Several `sweep.vary.*` keys combine as a cartesian product.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics;
use crate::config::{parse_entries, read_file, validate_config, Entry, NetworkConfig, SchedulerMode, ValidConfig};
use crate::error::{AnalyticsError, ConfigError, MetricsError, SimError};
use crate::metrics::{ResultRow, RESULT_HEADER};
use crate::sim::{simulate, RunOptions};
use crate::time::SimTime;
use crate::traffic::ProfileKind;

/// Shipped figure presets, by name.
pub const PRESETS: [(&str, &str); 8] = [
    ("fig5", include_str!("../presets/fig5.conf")),
    ("fig6", include_str!("../presets/fig6.conf")),
    ("fig7", include_str!("../presets/fig7.conf")),
    ("fig8", include_str!("../presets/fig8.conf")),
    ("fig9", include_str!("../presets/fig9.conf")),
    ("fig10", include_str!("../presets/fig10.conf")),
    ("fig11", include_str!("../presets/fig11.conf")),
    ("fig12", include_str!("../presets/fig12.conf")),
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Output(#[from] MetricsError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("no preset named {0:?} (known: {1})")]
    UnknownPreset(String, String),
    #[error("{scenario}: no predicted capacity to scale loads by")]
    NoCapacity { scenario: String },
}

impl From<std::io::Error> for SweepError {
    fn from(e: std::io::Error) -> Self {
        SweepError::Output(MetricsError::Io(e))
    }
}

impl From<csv::Error> for SweepError {
    fn from(e: csv::Error) -> Self {
        SweepError::Output(MetricsError::Csv(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadScale {
    /// Loads are total offered loads in wavelength units.
    Absolute,
    /// Loads are fractions of the variant's predicted capacity.
    Capacity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub scenario: String,
    pub config_path: Option<PathBuf>,
    /// Config entries shared by every point.
    pub base: Vec<Entry>,
    /// Varied keys and their values.
    pub vary: Vec<(String, Vec<String>)>,
    pub loads: Vec<f64>,
    pub load_scale: LoadScale,
    pub schedulers: Vec<SchedulerMode>,
    pub replications: u64,
    pub first_seed: u64,
    pub duration: Option<SimTime>,
    pub out: Option<PathBuf>,
}

/// One fully resolved simulation of a sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    /// Scenario label, including the variant values.
    pub label: String,
    pub load: f64,
    pub scheduler: SchedulerMode,
    pub seed: u64,
    pub config: ValidConfig,
}

fn spec_err(msg: impl Into<String>) -> SweepError {
    SweepError::Spec(msg.into())
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, SweepError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| spec_err(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

impl SweepSpec {
    pub fn from_text(text: &str) -> Result<Self, SweepError> {
        let entries = parse_entries(text)?;
        let (sweep, base): (Vec<Entry>, Vec<Entry>) = entries.into_iter().partition(|e| e.key.starts_with("sweep."));
        let mut spec = SweepSpec {
            scenario: base
                .iter()
                .find(|e| e.key == "scenario")
                .map_or_else(|| "sweep".to_string(), |e| e.value.clone()),
            config_path: None,
            base,
            vary: Vec::new(),
            loads: Vec::new(),
            load_scale: LoadScale::Absolute,
            schedulers: Vec::new(),
            replications: 1,
            first_seed: 1,
            duration: None,
            out: None,
        };
        for e in sweep {
            let key = &e.key["sweep.".len()..];
            match key {
                "loads" => spec.loads = parse_list(&e.key, &e.value)?,
                "schedulers" => spec.schedulers = parse_list(&e.key, &e.value)?,
                "replications" => {
                    spec.replications = e.value.parse().map_err(|_| spec_err("sweep.replications must be an integer"))?
                }
                "seed" => spec.first_seed = e.value.parse().map_err(|_| spec_err("sweep.seed must be an integer"))?,
                "duration" => spec.duration = Some(e.value.parse()?),
                "load_scale" => {
                    spec.load_scale = match e.value.as_str() {
                        "absolute" => LoadScale::Absolute,
                        "capacity" => LoadScale::Capacity,
                        other => return Err(spec_err(format!("sweep.load_scale: unknown scale {other:?}"))),
                    }
                }
                _ => match key.strip_prefix("vary.") {
                    Some(field) => spec.vary.push((
                        field.to_string(),
                        e.value.split(';').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect(),
                    )),
                    None => return Err(ConfigError::UnknownKey(e.key.clone()).into()),
                },
            }
        }
        if spec.schedulers.is_empty() {
            let mode = spec
                .base
                .iter()
                .find(|e| e.key == "scheduler_mode")
                .map(|e| e.value.parse())
                .transpose()?
                .unwrap_or(SchedulerMode::GateSingle);
            spec.schedulers.push(mode);
        }
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SweepError> {
        let mut spec = Self::from_text(&read_file(path.as_ref())?)?;
        spec.config_path = Some(path.as_ref().to_path_buf());
        Ok(spec)
    }

    pub fn preset(name: &str) -> Result<Self, SweepError> {
        let text = PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| {
            SweepError::UnknownPreset(name.to_string(), PRESETS.map(|(n, _)| n).join(", "))
        })?;
        Self::from_text(text)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.loads.is_empty() {
            return Err(spec_err("load grid is empty"));
        }
        if let Some(w) = self.loads.windows(2).find(|w| w[0] >= w[1]) {
            return Err(spec_err(format!("load grid must be strictly increasing ({} then {})", w[0], w[1])));
        }
        if self.loads.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(spec_err("loads must be finite and non-negative"));
        }
        if self.replications == 0 {
            return Err(spec_err("replications must be at least 1"));
        }
        if let Some((k, _)) = self.vary.iter().find(|(_, v)| v.is_empty()) {
            return Err(spec_err(format!("sweep.vary.{k} has no values")));
        }
        Ok(())
    }

    // Every combination of varied values, in file order.
    fn variants(&self) -> Vec<Vec<(&str, &str)>> {
        let mut out: Vec<Vec<(&str, &str)>> = vec![Vec::new()];
        for (key, values) in &self.vary {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push((key.as_str(), v.as_str()));
                        next
                    })
                })
                .collect();
        }
        out
    }

    fn variant_config(&self, assignment: &[(&str, &str)], mode: SchedulerMode) -> Result<NetworkConfig, SweepError> {
        let mut entries: Vec<Entry> = self
            .base
            .iter()
            .filter(|e| e.key != "total_load" && !assignment.iter().any(|(k, _)| *k == e.key))
            .cloned()
            .collect();
        for (k, v) in assignment {
            entries.push(Entry {
                line: 0,
                key: k.to_string(),
                value: v.to_string(),
            });
        }
        let mut cfg = NetworkConfig::from_entries(&entries)?;
        cfg.scheduler_mode = mode;
        Ok(cfg)
    }

    /// Resolves every point, ordered by variant, load, scheduler and seed.
    pub fn points(&self) -> Result<Vec<SweepPoint>, SweepError> {
        self.validate()?;
        let mut points = Vec::new();
        for assignment in self.variants() {
            let label = if assignment.is_empty() {
                self.scenario.clone()
            } else {
                let tags: Vec<String> = assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{}[{}]", self.scenario, tags.join(";"))
            };
            let scale = match self.load_scale {
                LoadScale::Absolute => 1.0,
                LoadScale::Capacity => self.reference_capacity(&assignment, &label)?,
            };
            for &load in &self.loads {
                for &mode in &self.schedulers {
                    let template = self.variant_config(&assignment, mode)?;
                    let kind = template.profile.unwrap_or(ProfileKind::Symmetric);
                    let config = validate_config(template.with_profile(kind, load * scale)?)?;
                    for k in 0..self.replications {
                        points.push(SweepPoint {
                            label: label.clone(),
                            load: load * scale,
                            scheduler: mode,
                            seed: self.first_seed + k,
                            config: config.clone(),
                        });
                    }
                }
            }
        }
        Ok(points)
    }

    // Capacity of the GATE-driven scheduler for this variant; REPORT-driven
    // points share it so that all schedulers see the same load grid.
    fn reference_capacity(&self, assignment: &[(&str, &str)], label: &str) -> Result<f64, SweepError> {
        let probe = self.variant_config(assignment, SchedulerMode::GateSingle)?;
        let mode = match self.schedulers.iter().find(|m| m.is_gate_driven()) {
            Some(&m) => m,
            None if probe.wavelengths == 1 => SchedulerMode::GateSingle,
            None => SchedulerMode::GateSingleCycle,
        };
        let mut probe = probe;
        probe.scheduler_mode = mode;
        let cfg = validate_config(probe)?;
        analytics::predicted_capacity(&cfg).ok_or_else(|| SweepError::NoCapacity {
            scenario: label.to_string(),
        })
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            duration: self.duration,
            auto_extend: true,
        }
    }
}

fn row_for(point: &SweepPoint, opts: RunOptions) -> Result<ResultRow, SimError> {
    let report = simulate(&point.config, point.seed, opts)?;
    let mut row = report.to_row();
    row.scenario = point.label.clone();
    Ok(row)
}

/// Runs every point of `spec` on the rayon pool and streams CSV rows to
/// `sink` in point order, flushing after each, so an interrupted sweep
/// leaves a valid prefix behind. Returns all rows.
pub fn run_sweep<W: Write>(spec: &SweepSpec, sink: W) -> Result<Vec<ResultRow>, SweepError> {
    let points = spec.points()?;
    let opts = spec.options();
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(RESULT_HEADER)?;
    writer.flush()?;

    let (tx, rx) = mpsc::channel();
    let mut rows = Vec::with_capacity(points.len());
    let mut first_err: Option<SweepError> = None;
    std::thread::scope(|scope| -> Result<(), SweepError> {
        let points = &points;
        scope.spawn(move || {
            points
                .par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (i, p)| {
                    // the receiver only goes away after a failure
                    let _ = tx.send((i, row_for(p, opts)));
                });
        });
        let mut pending = BTreeMap::new();
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(result) = pending.remove(&rows.len()) {
                match result {
                    Ok(row) => {
                        writer.write_record(row.fields())?;
                        writer.flush()?;
                        rows.push(row);
                    }
                    Err(e) => {
                        first_err.get_or_insert(e.into());
                        return Ok(());
                    }
                }
            }
        }
        Ok(())
    })?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

/// Like [`run_sweep`], writing to `path` (or to the spec's `out`).
pub fn run_sweep_to_file(spec: &SweepSpec, path: Option<&Path>) -> Result<Vec<ResultRow>, SweepError> {
    let path = path
        .map(Path::to_path_buf)
        .or_else(|| spec.out.clone())
        .ok_or_else(|| spec_err("no output path"))?;
    let file = std::fs::File::create(&path)?;
    run_sweep(spec, std::io::BufWriter::new(file))
}
