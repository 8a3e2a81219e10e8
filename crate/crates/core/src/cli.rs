//! Command-line front end: `analyze`, `simulate`, `sweep` and `validate`.
//!
//! Exit codes: 0 success (or stable), 1 usage or configuration error,
//! 2 unstable load under `analyze`, 3 failed validation.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};

use crate::acceptance::{run_criterion, AcceptanceOptions, CRITERIA};
use crate::analytics::{self, local_stability_partition, stability_for};
use crate::config::{validate_config, Entry, NetworkConfig, SchedulerMode, ValidConfig};
use crate::error::SimError;
use crate::metrics::{format_table, write_results_to};
use crate::sim::{run_to_verdict, RunOptions, RunReport, Simulation};
use crate::sweep::{run_sweep, SweepError, SweepSpec};
use crate::time::SimTime;
use crate::traffic::ProfileKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wdm-epon", version, about = "EPON upstream scheduling: capacity analysis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form stability, cycle time, capacity and partition.
    Analyze(NetworkArgs),
    /// One simulation: CSV row plus a summary table.
    Simulate(SimulateArgs),
    /// Simulations over a load grid, one CSV row per point.
    Sweep(SweepArgs),
    /// Run the simulator-versus-analysis acceptance checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Config file (`key = value` lines).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Shipped figure preset; varied keys take their first value.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override the scheduler mode.
    #[arg(long)]
    pub scheduler: Option<SchedulerMode>,
    /// Total offered loads (comma-separated), split by the config's profile.
    #[arg(long, value_delimiter = ',')]
    pub loads: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulated seconds; default is the longer of 2 s and 200 predicted cycles.
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write every dispatched event to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep file: a config with `sweep.*` keys.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Shipped figure preset (fig5 to fig12).
    #[arg(long)]
    pub preset: Option<String>,
    /// Schedulers to compare (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub scheduler: Vec<SchedulerMode>,
    /// Load grid (comma-separated, strictly increasing).
    #[arg(long, value_delimiter = ',')]
    pub loads: Vec<f64>,
    /// Seeds per point.
    #[arg(long)]
    pub replications: Option<u64>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated seconds per point.
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, &mut out),
        Command::Simulate(a) => cmd_simulate(&a, &mut out),
        Command::Sweep(a) => cmd_sweep(&a, &mut out),
        Command::Validate(a) => Ok(cmd_validate(&a, &mut out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn seconds(s: f64) -> Result<SimTime, SweepError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(SweepError::Spec(format!("duration must be positive, got {s}")));
    }
    Ok(SimTime::from_nanos((s * 1e9).round() as u64))
}

/// Reads the network part of a config file or preset. Sweep keys are
/// dropped and varied keys take their first value.
fn load_spec(config: Option<&Path>, preset: Option<&str>) -> Result<SweepSpec, SweepError> {
    match (config, preset) {
        (Some(p), _) => SweepSpec::from_file(p),
        (None, Some(name)) => SweepSpec::preset(name),
        (None, None) => Err(SweepError::Spec("give --config or --preset".into())),
    }
}

pub fn load_network(config: Option<&Path>, preset: Option<&str>) -> Result<NetworkConfig, SweepError> {
    let spec = load_spec(config, preset)?;
    let mut entries: Vec<Entry> = spec
        .base
        .iter()
        .filter(|e| !spec.vary.iter().any(|(k, _)| *k == e.key))
        .cloned()
        .collect();
    for (key, values) in &spec.vary {
        entries.push(Entry {
            line: 0,
            key: key.clone(),
            value: values[0].clone(),
        });
    }
    Ok(NetworkConfig::from_entries(&entries)?)
}

// Without --loads, a file that carries a sweep grid is analysed over that
// grid (first variant, first scheduler); otherwise at its own total load.
fn configs_for(args: &NetworkArgs) -> Result<Vec<ValidConfig>, SweepError> {
    if args.loads.is_empty() {
        let mut spec = load_spec(args.config.as_deref(), args.preset.as_deref())?;
        if !spec.loads.is_empty() {
            if let Some(mode) = args.scheduler {
                spec.schedulers = vec![mode];
            }
            spec.schedulers.truncate(1);
            spec.replications = 1;
            let points = spec.points()?;
            let first = points[0].label.clone();
            return Ok(points.into_iter().filter(|p| p.label == first).map(|p| p.config).collect());
        }
    }
    let mut nc = load_network(args.config.as_deref(), args.preset.as_deref())?;
    if let Some(mode) = args.scheduler {
        nc.scheduler_mode = mode;
    }
    if args.loads.is_empty() {
        return Ok(vec![validate_config(nc)?]);
    }
    let kind = nc.profile.unwrap_or(ProfileKind::Symmetric);
    args.loads
        .iter()
        .map(|&x| Ok(validate_config(nc.clone().with_profile(kind, x)?)?))
        .collect()
}

fn us(ns: f64) -> String {
    format!("{:.3}", ns / 1e3)
}

/// Prints the closed-form view of each requested load.
pub fn cmd_analyze(args: &NetworkArgs, out: &mut dyn Write) -> Result<i32, SweepError> {
    let cfgs = configs_for(args)?;
    let mut code = EXIT_OK;
    let first = &cfgs[0];
    writeln!(
        out,
        "scenario {}  scheduler {}  N {}  L {}  switchover {} us  offset {} us",
        first.scenario,
        first.scheduler_mode,
        first.n(),
        first.wavelengths,
        analytics::cycle_switchover(first).as_micros_f64(),
        first.delta_o().as_micros_f64()
    )?;
    match analytics::predicted_capacity(first) {
        Some(c) => writeln!(out, "predicted capacity {c:.4} (total load, this load shape)")?,
        None => writeln!(out, "predicted capacity: no closed form for this scheduler")?,
    }
    let header = ["load", "stable", "margin", "binding", "condition", "cycle_us", "partition"];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for cfg in &cfgs {
        let loads = cfg.loads();
        let load = format!("{:.4}", cfg.total_load());
        let Some(report) = stability_for(cfg, &loads) else {
            rows.push(vec![load, "n/a".into(), "".into(), "".into(), "REPORT-driven: simulate instead".into(), "".into(), "".into()]);
            continue;
        };
        let report = report?;
        if !report.stable {
            code = EXIT_UNSTABLE;
        }
        let binding = match (&report.binding_subset, report.binding_onu) {
            (Some(set), _) => format!("ONUs {set:?}"),
            (None, Some(onu)) => format!("ONU {onu}"),
            (None, None) => "total load".into(),
        };
        let cycle = analytics::predicted_cycle(cfg).map_or_else(|| "-".into(), us);
        let caps: Vec<_> = cfg.onus.iter().map(|o| o.d_max).collect();
        let partition = if cfg.wavelengths == 1 {
            match local_stability_partition(&loads, &caps, cfg.delta_r) {
                Ok(p) => format!("{} of {} stable", p.k, cfg.n()),
                Err(e) => e.to_string(),
            }
        } else {
            "-".into()
        };
        rows.push(vec![
            load,
            report.stable.to_string(),
            format!("{:+.5}", report.margin),
            binding,
            report.formula.to_string(),
            cycle,
            partition,
        ]);
    }
    write!(out, "{}", align(&rows))?;
    Ok(code)
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, v)| format!("{v:<w$}", w = widths[c]))
            .collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

/// Everything one simulation writes.
pub struct SimOutputs {
    pub report: RunReport,
    pub csv: Vec<u8>,
    pub trace: Vec<u8>,
}

#[derive(Clone, Default)]
struct SharedBuf(Arc<Mutex<Vec<u8>>>);

impl Write for SharedBuf {
    fn write(&mut self, b: &[u8]) -> io::Result<usize> {
        self.0.lock().expect("trace buffer").extend_from_slice(b);
        Ok(b.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn simulate_with(
    cfg: &ValidConfig,
    seed: u64,
    duration: Option<SimTime>,
    trace: Option<Box<dyn Write + Send>>,
) -> Result<RunReport, SimError> {
    let mut sim = Simulation::new(cfg.clone(), seed)?;
    if let Some(sink) = trace {
        sim.set_trace(sink);
    }
    let report = run_to_verdict(
        &mut sim,
        RunOptions {
            duration,
            auto_extend: duration.is_none(),
        },
    )?;
    if let Some(mut sink) = sim.take_trace() {
        sink.flush().map_err(crate::error::MetricsError::from)?;
    }
    Ok(report)
}

/// Runs one simulation and renders its CSV and, if asked, its event trace
/// in memory.
pub fn simulate_outputs(
    cfg: &ValidConfig,
    seed: u64,
    duration: Option<SimTime>,
    trace: bool,
) -> Result<SimOutputs, SimError> {
    let buf = SharedBuf::default();
    let sink: Option<Box<dyn Write + Send>> = trace.then(|| Box::new(buf.clone()) as Box<dyn Write + Send>);
    let report = simulate_with(cfg, seed, duration, sink)?;
    let mut csv = Vec::new();
    write_results_to(&mut csv, &[report.to_row()])?;
    let trace = std::mem::take(&mut *buf.0.lock().expect("trace buffer"));
    Ok(SimOutputs { report, csv, trace })
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32, SweepError> {
    let cfgs = configs_for(&args.network)?;
    if cfgs.len() != 1 {
        return Err(SweepError::Spec("simulate takes a single total load; use sweep for a grid".into()));
    }
    let cfg = &cfgs[0];
    let duration = args.duration_s.map(seconds).transpose()?;
    let trace: Option<Box<dyn Write + Send>> = match &args.trace {
        Some(p) => Some(Box::new(io::BufWriter::new(std::fs::File::create(p)?))),
        None => None,
    };
    let report = simulate_with(cfg, args.seed, duration, trace)?;
    let rows = [report.to_row()];
    match &args.out {
        Some(p) => {
            write_results_to(io::BufWriter::new(std::fs::File::create(p)?), &rows)?;
            write!(out, "{}", format_table(&rows))?;
            writeln!(
                out,
                "simulated {:.3} s (warm-up {:.3} s), {} events, {} delay samples",
                report.duration.as_secs_f64(),
                report.warmup.as_secs_f64(),
                report.events,
                report.delay.count
            )?;
            for (w, u) in report.utilization.iter().enumerate() {
                writeln!(
                    out,
                    "wavelength {}: data {:.4}  report/guard {:.4}  idle {:.4}",
                    w + 1,
                    u.data,
                    u.report_guard,
                    u.idle
                )?;
            }
            writeln!(
                out,
                "verdict {}: backlog slope {:.5}, offered {:.4}, carried {:.4}",
                report.verdict.verdict, report.verdict.backlog_slope, report.verdict.offered, report.verdict.carried
            )?;
        }
        None => write_results_to(&mut *out, &rows)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, SweepError> {
    let mut spec = match (&args.config, &args.preset) {
        (Some(p), _) => SweepSpec::from_file(p)?,
        (None, Some(name)) => SweepSpec::preset(name)?,
        (None, None) => return Err(SweepError::Spec("give --config or --preset".into())),
    };
    if !args.scheduler.is_empty() {
        spec.schedulers = args.scheduler.clone();
    }
    if !args.loads.is_empty() {
        spec.loads = args.loads.clone();
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    if let Some(s) = args.seed {
        spec.first_seed = s;
    }
    if let Some(d) = args.duration_s {
        spec.duration = Some(seconds(d)?);
    }
    let rows = match &args.out {
        Some(p) => {
            let rows = run_sweep(&spec, io::BufWriter::new(std::fs::File::create(p)?))?;
            writeln!(out, "{} rows written to {}", rows.len(), p.display())?;
            rows
        }
        None => run_sweep(&spec, &mut *out)?,
    };
    if rows.is_empty() {
        return Err(SweepError::Spec("sweep produced no rows".into()));
    }
    Ok(EXIT_OK)
}

/// Runs every acceptance check and prints one block per check. Exit 3 if
/// any fails.
pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> i32 {
    let opts = AcceptanceOptions {
        seed: args.seed,
        ..AcceptanceOptions::default()
    };
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let outcome = run_criterion(id, &opts);
        failed += usize::from(!outcome.passed);
        let _ = writeln!(out, "{outcome}");
        let _ = out.flush();
    }
    let _ = writeln!(out, "{} of {} checks passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}
