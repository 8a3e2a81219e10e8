//! Delay, cycle and utilization measurement, backlog-based stability
//! detection and result output.
//!
//! Samples are binned on a fixed time grid as they arrive. At the end of a
//! run the bins of the measurement window are folded into
//! [`BATCHES`] equal batches whose means give the confidence interval.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::config::{OnuId, WavelengthId};
use crate::error::{MetricsError, SimError};
use crate::model::Packet;
use crate::time::SimTime;

/// Number of batches for batch-means confidence intervals.
pub const BATCHES: usize = 20;

/// Two-sided 95% Student t quantiles for 1..=30 degrees of freedom.
const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
    2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

/// 97.5% quantile of Student's t with `df` degrees of freedom.
pub fn t_quantile_975(df: usize) -> f64 {
    match df {
        0 => f64::NAN,
        1..=30 => T_975[df - 1],
        // Cornish-Fisher expansion around the normal quantile
        _ => {
            let z: f64 = 1.959_964;
            let d = df as f64;
            z + (z.powi(3) + z) / (4.0 * d) + (5.0 * z.powi(5) + 16.0 * z.powi(3) + 3.0 * z) / (96.0 * d * d)
        }
    }
}

/// Count, mean, variance and a batch-means 95% confidence half-width.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SummaryStats {
    pub count: u64,
    pub mean: f64,
    /// Sample variance of the individual observations.
    pub variance: f64,
    pub ci_half_width: f64,
    pub min: f64,
    pub max: f64,
    /// Per-batch (count, mean); nonempty batches only.
    pub batches: Vec<(u64, f64)>,
}

impl SummaryStats {
    /// Builds statistics from batches of (count, sum, sum of squares, min, max).
    fn from_parts(parts: &[Moments]) -> Self {
        let mut total = Moments::default();
        let mut batches = Vec::new();
        for p in parts.iter().filter(|p| p.count > 0) {
            total.merge(p);
            batches.push((p.count, p.sum / p.count as f64));
        }
        let mut s = SummaryStats {
            count: total.count,
            mean: if total.count > 0 { total.sum / total.count as f64 } else { f64::NAN },
            variance: total.variance(),
            ci_half_width: f64::NAN,
            min: total.min,
            max: total.max,
            batches,
        };
        s.ci_half_width = s.batch_half_width();
        s
    }

    fn batch_half_width(&self) -> f64 {
        let b = self.batches.len();
        if b < 2 {
            return f64::NAN;
        }
        let m = self.batches.iter().map(|x| x.1).sum::<f64>() / b as f64;
        let var = self.batches.iter().map(|x| (x.1 - m).powi(2)).sum::<f64>() / (b - 1) as f64;
        t_quantile_975(b - 1) * (var / b as f64).sqrt()
    }

    /// Pools two sets of statistics, e.g. independent replications. The
    /// merged mean is the count-weighted mean and the batches are pooled,
    /// so the result does not depend on merge order.
    pub fn merge(&self, other: &SummaryStats) -> SummaryStats {
        if self.count == 0 {
            return other.clone();
        }
        if other.count == 0 {
            return self.clone();
        }
        let (n1, n2) = (self.count as f64, other.count as f64);
        let n = n1 + n2;
        let mean = (n1 * self.mean + n2 * other.mean) / n;
        let delta = other.mean - self.mean;
        let m2 = self.variance * (n1 - 1.0) + other.variance * (n2 - 1.0) + delta * delta * n1 * n2 / n;
        let mut batches = [self.batches.clone(), other.batches.clone()].concat();
        batches.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut s = SummaryStats {
            count: self.count + other.count,
            mean,
            variance: if n > 1.0 { m2 / (n - 1.0) } else { 0.0 },
            ci_half_width: f64::NAN,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
            batches,
        };
        s.ci_half_width = s.batch_half_width();
        s
    }
}

#[derive(Clone, Copy, Debug)]
struct Moments {
    count: u64,
    sum: f64,
    sumsq: f64,
    min: f64,
    max: f64,
}

impl Default for Moments {
    fn default() -> Self {
        Moments {
            count: 0,
            sum: 0.0,
            sumsq: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sumsq += x * x;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
        self.min = self.min.min(o.min);
        self.max = self.max.max(o.max);
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }
}

/// Observations binned by the time they were made.
#[derive(Clone, Debug)]
pub struct TimeBinned {
    origin: SimTime,
    bin: SimTime,
    bins: Vec<Moments>,
}

impl TimeBinned {
    pub fn new(origin: SimTime, bin: SimTime) -> Self {
        TimeBinned {
            origin,
            bin,
            bins: Vec::new(),
        }
    }

    /// Adds `x` observed at `at`; observations before the origin are dropped.
    pub fn add(&mut self, at: SimTime, x: f64) {
        let Some(off) = at.checked_sub(self.origin) else {
            return;
        };
        let k = (off.as_nanos() / self.bin.as_nanos()) as usize;
        if k >= self.bins.len() {
            self.bins.resize(k + 1, Moments::default());
        }
        self.bins[k].add(x);
    }

    /// Statistics over `[origin, end)` with the bins folded into [`BATCHES`] batches.
    pub fn summarize(&self, end: SimTime) -> SummaryStats {
        let span = end.saturating_sub(self.origin).as_nanos();
        let nbins = span.div_ceil(self.bin.as_nanos()).max(1) as usize;
        let batches = BATCHES.min(nbins);
        let mut parts = vec![Moments::default(); batches];
        for (k, m) in self.bins.iter().enumerate().take(nbins) {
            parts[k * batches / nbins].merge(m);
        }
        SummaryStats::from_parts(&parts)
    }
}

/// Time-weighted occupancy of each wavelength at the OLT.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Utilization {
    pub data: f64,
    pub report_guard: f64,
    pub idle: f64,
}

#[derive(Clone, Debug, Default)]
struct WavelengthLog {
    // open occupancy intervals at the OLT: start -> (data end, slot end)
    open: BTreeMap<SimTime, (SimTime, SimTime)>,
    last_closed_end: SimTime,
    data: SimTime,
    overhead: SimTime,
    carried_total: SimTime,
}

/// One row of the backlog time series sampled every millisecond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BacklogSample {
    pub at: SimTime,
    /// Queued work at all ONUs.
    pub backlog: SimTime,
    /// Work that has arrived since the start.
    pub arrived: SimTime,
    /// Data received at the OLT since the start.
    pub carried: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    /// Least-squares backlog growth, seconds of work per second.
    pub backlog_slope: f64,
    /// Offered minus carried load over the same window.
    pub offered_minus_carried: f64,
    pub offered: f64,
    pub carried: f64,
}

/// Fewest backlog samples [`stability_verdict`] accepts.
pub const MIN_VERDICT_SAMPLES: usize = 10;

/// Judges stability from the second half of a backlog series: unstable when
/// the backlog grows faster than 1% of the offered rate while under 99% of
/// the offered load is carried; stable when the slope is within 0.1% of the
/// offered rate and at least 99.5% is carried.
pub fn stability_verdict(samples: &[BacklogSample]) -> Result<StabilityVerdict, MetricsError> {
    if samples.len() < MIN_VERDICT_SAMPLES {
        return Err(MetricsError::TooFewSamples {
            got: samples.len(),
            need: MIN_VERDICT_SAMPLES,
        });
    }
    let half = &samples[samples.len() / 2..];
    let (first, last) = (half[0], half[half.len() - 1]);
    let span = (last.at - first.at).as_secs_f64();
    let offered = (last.arrived - first.arrived).as_secs_f64() / span;
    let carried = (last.carried - first.carried).as_secs_f64() / span;

    let n = half.len() as f64;
    let xm = half.iter().map(|s| s.at.as_secs_f64()).sum::<f64>() / n;
    let ym = half.iter().map(|s| s.backlog.as_secs_f64()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in half {
        let dx = s.at.as_secs_f64() - xm;
        sxy += dx * (s.backlog.as_secs_f64() - ym);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;

    let verdict = if offered == 0.0 {
        if slope.abs() < 1e-12 {
            Verdict::Stable
        } else {
            Verdict::Inconclusive
        }
    } else if slope > 0.01 * offered && carried < 0.99 * offered {
        Verdict::Unstable
    } else if slope.abs() <= 0.001 * offered && carried >= 0.995 * offered {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    };
    Ok(StabilityVerdict {
        verdict,
        backlog_slope: slope,
        offered_minus_carried: offered - carried,
        offered,
        carried,
    })
}

/// Everything measured during one run.
#[derive(Clone, Debug)]
pub struct MetricsCollector {
    warmup: SimTime,
    delays: TimeBinned,
    cycles: TimeBinned,
    last_visit: HashMap<(usize, OnuId), SimTime>,
    max_cycle: SimTime,
    min_delay: Option<SimTime>,
    wavelengths: Vec<WavelengthLog>,
    samples: Vec<BacklogSample>,
}

/// Bin width for delay and cycle samples.
const BIN: SimTime = SimTime::from_millis(1);

impl MetricsCollector {
    pub fn new(wavelengths: usize, warmup: SimTime) -> Self {
        MetricsCollector {
            warmup,
            delays: TimeBinned::new(warmup, BIN),
            cycles: TimeBinned::new(warmup, BIN),
            last_visit: HashMap::new(),
            max_cycle: SimTime::ZERO,
            min_delay: None,
            wavelengths: vec![WavelengthLog::default(); wavelengths],
            samples: Vec::new(),
        }
    }

    pub fn warmup(&self) -> SimTime {
        self.warmup
    }

    /// Records a delivered packet's delay if it departed after warm-up.
    pub fn record_delay(&mut self, packet: &Packet) -> Result<(), SimError> {
        let dep = packet.departure_time.expect("departed packet");
        let Some(delay) = dep.checked_sub(packet.arrival_time) else {
            return Err(SimError::NegativeDelay {
                arrival: packet.arrival_time,
                departure: dep,
            });
        };
        if dep >= self.warmup {
            self.delays.add(dep, delay.as_nanos() as f64);
            self.min_delay = Some(self.min_delay.map_or(delay, |m| m.min(delay)));
        }
        Ok(())
    }

    /// Records a GATE epoch of `onu` in cycle `instance`; the gap since its
    /// previous epoch in that cycle is one cycle-time sample.
    pub fn record_cycle(&mut self, instance: usize, onu: OnuId, epoch: SimTime) {
        if let Some(prev) = self.last_visit.insert((instance, onu), epoch) {
            if epoch >= self.warmup && prev >= self.warmup {
                let gap = epoch - prev;
                self.cycles.add(epoch, gap.as_nanos() as f64);
                self.max_cycle = self.max_cycle.max(gap);
            }
        }
    }

    /// A transmission begins occupying `wavelength` at the OLT at `start`:
    /// `grant` of data, then the REPORT slot.
    pub fn open_interval(&mut self, wavelength: WavelengthId, start: SimTime, grant: SimTime, slot: SimTime) {
        self.wavelengths[wavelength - 1]
            .open
            .insert(start, (start + grant, start + grant + slot));
    }

    /// The transmission that began at `start` has fully arrived; checks it
    /// against the previous one on the wavelength.
    pub fn close_interval(&mut self, wavelength: WavelengthId, start: SimTime) -> Result<(), SimError> {
        let warmup = self.warmup;
        let log = &mut self.wavelengths[wavelength - 1];
        let (data_end, end) = log.open.remove(&start).expect("interval was opened");
        if start < log.last_closed_end {
            return Err(SimError::Collision {
                wavelength,
                start,
                prev_end: log.last_closed_end,
            });
        }
        log.last_closed_end = end;
        log.carried_total += data_end - start;
        log.data += clip(start, data_end, warmup, SimTime::MAX);
        log.overhead += clip(data_end, end, warmup, SimTime::MAX);
        Ok(())
    }

    /// Data received at the OLT so far (closed intervals only).
    pub fn carried_total(&self) -> SimTime {
        self.wavelengths.iter().map(|w| w.carried_total).sum()
    }

    pub fn sample_backlog(&mut self, sample: BacklogSample) {
        self.samples.push(sample);
    }

    pub fn backlog_samples(&self) -> &[BacklogSample] {
        &self.samples
    }

    /// Per-wavelength utilization over `[warmup, end)`.
    pub fn utilization(&self, end: SimTime) -> Vec<Utilization> {
        let span = end.saturating_sub(self.warmup);
        let window = span.as_nanos() as f64;
        self.wavelengths
            .iter()
            .map(|log| {
                let mut data = log.data;
                let mut overhead = log.overhead;
                // closed intervals all ended by `end`; open ones count up to it
                for (&s, &(de, e)) in &log.open {
                    data += clip(s, de, self.warmup, end);
                    overhead += clip(de, e, self.warmup, end);
                }
                let idle = span.saturating_sub(data + overhead);
                Utilization {
                    data: data.as_nanos() as f64 / window,
                    report_guard: overhead.as_nanos() as f64 / window,
                    idle: idle.as_nanos() as f64 / window,
                }
            })
            .collect()
    }

    pub fn delay_stats(&self, end: SimTime) -> SummaryStats {
        self.delays.summarize(end)
    }

    pub fn cycle_stats(&self, end: SimTime) -> SummaryStats {
        self.cycles.summarize(end)
    }

    pub fn max_cycle(&self) -> SimTime {
        self.max_cycle
    }

    pub fn min_delay(&self) -> Option<SimTime> {
        self.min_delay
    }
}

fn clip(a: SimTime, b: SimTime, lo: SimTime, hi: SimTime) -> SimTime {
    let a = a.max(lo);
    let b = b.min(hi);
    b.saturating_sub(a)
}

/// Column names of the results CSV, in order.
pub const RESULT_HEADER: [&str; 14] = [
    "scenario",
    "scheduler",
    "L",
    "seed",
    "total_load",
    "mean_delay_us",
    "delay_ci_us",
    "mean_cycle_us",
    "cycle_ci_us",
    "utilization",
    "carried_load",
    "stable",
    "predicted_cycle_us",
    "predicted_capacity",
];

/// One simulated point with its analytic prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub scheduler: String,
    pub wavelengths: usize,
    pub seed: u64,
    pub total_load: f64,
    pub mean_delay_us: f64,
    pub delay_ci_us: f64,
    pub mean_cycle_us: f64,
    pub cycle_ci_us: f64,
    /// Mean data fraction over the wavelengths, in [0, 1].
    pub utilization: f64,
    /// Carried data rate in wavelength units.
    pub carried_load: f64,
    pub verdict: Verdict,
    pub predicted_cycle_us: Option<f64>,
    pub predicted_capacity: Option<f64>,
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        String::new()
    }
}

impl ResultRow {
    pub fn fields(&self) -> [String; 14] {
        [
            self.scenario.clone(),
            self.scheduler.clone(),
            self.wavelengths.to_string(),
            self.seed.to_string(),
            format!("{:.6}", self.total_load),
            num(self.mean_delay_us),
            num(self.delay_ci_us),
            num(self.mean_cycle_us),
            num(self.cycle_ci_us),
            format!("{:.6}", self.utilization.clamp(0.0, 1.0)),
            format!("{:.6}", self.carried_load),
            match self.verdict {
                Verdict::Stable => "true".into(),
                Verdict::Unstable => "false".into(),
                Verdict::Inconclusive => "inconclusive".into(),
            },
            self.predicted_cycle_us.map_or(String::new(), num),
            self.predicted_capacity.map_or(String::new(), |c| format!("{c:.6}")),
        ]
    }
}

/// Writes the header and rows as CSV to any sink.
pub fn write_results_to<W: Write>(sink: W, rows: &[ResultRow]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<(), MetricsError> {
    let file = std::fs::File::create(path)?;
    write_results_to(std::io::BufWriter::new(file), rows)
}

/// Rows as an aligned plain-text table.
pub fn format_table(rows: &[ResultRow]) -> String {
    let mut cells: Vec<Vec<String>> = vec![RESULT_HEADER.iter().map(|s| s.to_string()).collect()];
    cells.extend(rows.iter().map(|r| r.fields().to_vec()));
    let widths: Vec<usize> = (0..RESULT_HEADER.len())
        .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  "));
    }
    out
}
