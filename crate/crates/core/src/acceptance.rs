//! Cross-checks between the simulator and the closed-form analysis.
//!
//! Each check runs a handful of simulations, compares the measurements
//! with their predicted values at a fixed tolerance, and returns a
//! [`Outcome`] with one line per comparison. The `validate` subcommand
//! and the `acceptance` integration test both run this suite.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::{
    self, local_stability_partition, mean_cycle_single, mean_cycle_squared_form_us, mean_cycle_wdm,
    partial_sharing_stable, stability_single, toy_example_conditions, CycleMode,
};
use crate::config::{
    validate_config, AvailabilityMap, GateJitter, GrantCap, GrantMode, NetworkConfig, SchedulerMode, ValidConfig,
};
use crate::error::SimError;
use crate::metrics::Verdict;
use crate::sim::{simulate, RunOptions, RunReport};
use crate::time::SimTime;
use crate::traffic::ProfileKind;

/// REPORT slot of the reference network, ns.
pub const REFERENCE_REPORT_SLOT: u64 = 2120;
const ONUS: usize = 20;

/// Titles of the checks, by number.
pub const CRITERIA: [(u8, &str); 13] = [
    (1, "mean cycle, one wavelength"),
    (2, "stability boundary, limited gated"),
    (3, "mean cycle, one cycle per wavelength"),
    (4, "mean cycle, one cycle over all wavelengths"),
    (5, "no idle time when saturated"),
    (6, "REPORT-driven cycle floor"),
    (7, "GATE-driven cycle ceiling"),
    (8, "REPORT-driven vs GATE-driven delay"),
    (9, "capacity with one tunable transmitter per ONU"),
    (10, "two-ONU partial sharing boundary"),
    (11, "three ONUs, one transmitter each"),
    (12, "subset and partition oracles"),
    (13, "replay determinism"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AcceptanceOptions {
    pub seed: u64,
    /// Replaces the REPORT slot (and caps the GATE slot) of every simulated
    /// network while the expected values keep the reference slot. Used to
    /// show that the checks notice a wrong overhead.
    pub report_slot: Option<SimTime>,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            seed: 1,
            report_slot: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Measured against expected, one comparison per line.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{mark}] {:>2} {} ({:.1} s)",
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        )?;
        for d in &self.details {
            write!(f, "\n       {d}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Tally {
    passed: bool,
    details: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }

    fn within(&mut self, what: &str, measured: f64, expected: f64, rel: f64, unit: &str) {
        let err = (measured - expected).abs() / expected.abs();
        self.check(
            err <= rel,
            format!(
                "{what}: measured {measured:.4}{unit}, expected {expected:.4}{unit} ± {:.1}% (off by {:.2}%)",
                rel * 100.0,
                err * 100.0
            ),
        );
    }
}

/// Propagation delays of the reference network: `n` values evenly spread
/// over 10..500 us, so the longest round trip is exactly 1 ms.
pub fn reference_delays(n: usize) -> Vec<SimTime> {
    let (lo, hi) = (10_000u64, 500_000u64);
    if n == 1 {
        return vec![SimTime::from_nanos(hi)];
    }
    (0..n as u64)
        .map(|k| SimTime::from_nanos(lo + k * (hi - lo) / (n as u64 - 1)))
        .collect()
}

/// Twenty ONUs at 1 Gb/s with 1000-byte packets and 2.12 us control slots.
pub fn reference_network(wavelengths: usize, opts: &AcceptanceOptions) -> NetworkConfig {
    let mut nc = NetworkConfig::new(&reference_delays(ONUS), wavelengths);
    nc.scenario = "acceptance".into();
    nc.gate_jitter = GateJitter::Uniform;
    if let Some(slot) = opts.report_slot {
        nc.delta_r = slot;
        nc.delta_g = nc.delta_g.min(slot);
    }
    nc
}

fn reference_switchover() -> SimTime {
    SimTime::from_nanos(REFERENCE_REPORT_SLOT * ONUS as u64)
}

fn symmetric(nc: NetworkConfig, total: f64) -> Result<ValidConfig, SimError> {
    Ok(validate_config(nc.with_profile(ProfileKind::Symmetric, total)?)?)
}

fn run(cfg: &ValidConfig, seed: u64, duration: Option<SimTime>) -> Result<RunReport, SimError> {
    simulate(
        cfg,
        seed,
        RunOptions {
            duration,
            auto_extend: true,
        },
    )
}

// Runs every config in parallel, keeping input order.
fn run_all(cfgs: &[ValidConfig], seed: u64, duration: Option<SimTime>) -> Result<Vec<RunReport>, SimError> {
    cfgs.par_iter().map(|c| run(c, seed, duration)).collect()
}

fn cycle_law(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let loads = [0.3, 0.5, 0.8];
    let cfgs = loads
        .iter()
        .map(|&rho| symmetric(reference_network(1, opts), rho))
        .collect::<Result<Vec<_>, _>>()?;
    for (rho, r) in loads.iter().zip(run_all(&cfgs, opts.seed, None)?) {
        let expected = mean_cycle_single(*rho, reference_switchover()).expect("stable load") / 1e3;
        t.within(&format!("rho {rho}"), r.cycle.mean / 1e3, expected, 0.03, " us");
    }
    Ok(t)
}

fn stability_boundary(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let mut cfgs = Vec::new();
    let mut labels = Vec::new();
    for (cap, listed) in [(16_000u64, 0.883), (32_000, 0.938), (48_000, 0.958)] {
        let nc = reference_network(1, opts).with_d_max(GrantCap::Bounded(SimTime::from_nanos(cap)));
        let probe = symmetric(nc.clone(), 0.5)?;
        let boundary = analytics::predicted_capacity(&probe).expect("GATE-driven capacity");
        t.check(
            (boundary - listed).abs() < 5e-4,
            format!("grant cap {cap} ns: predicted capacity {boundary:.4}, expected {listed}"),
        );
        for (factor, want) in [(0.95, Verdict::Stable), (1.05, Verdict::Unstable)] {
            cfgs.push(symmetric(nc.clone(), factor * boundary)?);
            labels.push((cap, factor, want));
        }
    }
    for ((cap, factor, want), r) in labels.into_iter().zip(run_all(&cfgs, opts.seed, None)?) {
        t.check(
            r.verdict.verdict == want,
            format!(
                "grant cap {cap} ns at {factor} x capacity: verdict {} (backlog slope {:.4}, carried/offered {:.4}), expected {want}",
                r.verdict.verdict,
                r.verdict.backlog_slope,
                r.verdict.carried / r.verdict.offered.max(f64::MIN_POSITIVE)
            ),
        );
    }
    Ok(t)
}

fn per_wavelength_cycle(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let s = reference_switchover();
    let two = symmetric(reference_network(2, opts).with_mode(SchedulerMode::GatePerWavelength), 1.2)?;
    let one = symmetric(reference_network(1, opts).with_mode(SchedulerMode::GatePerWavelength), 0.5)?;
    let runs = run_all(&[two, one], opts.seed, None)?;
    let expected = mean_cycle_wdm(1.2, s, 2, CycleMode::PerWavelength).expect("stable") / 1e3;
    t.within("L 2, rho 1.2", runs[0].cycle.mean / 1e3, expected, 0.03, " us");
    let single = mean_cycle_single(0.5, s).expect("stable") / 1e3;
    t.within("L 1, rho 0.5 against the one-wavelength law", runs[1].cycle.mean / 1e3, single, 0.03, " us");
    let agree = [0.3, 0.5, 0.8].iter().all(|&rho| {
        mean_cycle_wdm(rho, s, 1, CycleMode::PerWavelength).ok() == mean_cycle_single(rho, s).ok()
    });
    t.check(agree, "per-wavelength formula at L 1 equals the one-wavelength formula".into());
    Ok(t)
}

fn single_cycle(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let s = reference_switchover();
    let cfg = symmetric(reference_network(2, opts).with_mode(SchedulerMode::GateSingleCycle), 1.2)?;
    let r = run(&cfg, opts.seed, None)?;
    let measured = r.cycle.mean / 1e3;
    let linear = mean_cycle_wdm(1.2, s, 2, CycleMode::SingleCycle).expect("stable") / 1e3;
    let squared = mean_cycle_squared_form_us(1.2, s, 2);
    t.within("L 2, rho 1.2, S/(L - rho)", measured, linear, 0.03, " us");
    t.note(format!(
        "squared-switchover form gives {squared:.1} us; measured/linear {:.4}, measured/squared {:.6}",
        measured / linear,
        measured / squared
    ));
    Ok(t)
}

fn saturated(nc: NetworkConfig, total: f64) -> Result<ValidConfig, SimError> {
    symmetric(nc.with_d_max(GrantCap::Bounded(SimTime::from_nanos(16_000))), total)
}

const SATURATED_RUN: Option<SimTime> = Some(SimTime::from_secs(1));

fn full_utilization(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let cfgs = [
        saturated(reference_network(1, opts), 1.3)?,
        saturated(reference_network(3, opts).with_mode(SchedulerMode::GateSingleCycle), 3.5)?,
    ];
    for (cfg, r) in cfgs.iter().zip(run_all(&cfgs, opts.seed, SATURATED_RUN)?) {
        let worst = r.utilization.iter().map(|u| u.idle).fold(0.0, f64::max);
        t.check(
            worst <= 1e-3,
            format!(
                "{} with L {}: worst idle fraction {:.6}, expected at most 0.001",
                cfg.scheduler_mode, cfg.wavelengths, worst
            ),
        );
    }
    Ok(t)
}

fn report_driven_floor(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let loads = [0.1, 0.3, 0.5, 0.7, 0.9];
    let cfgs = loads
        .iter()
        .map(|&rho| symmetric(reference_network(1, opts).with_mode(SchedulerMode::ReportDriven), rho))
        .collect::<Result<Vec<_>, _>>()?;
    for (rho, r) in loads.iter().zip(run_all(&cfgs, opts.seed, None)?) {
        let c = r.cycle.mean / 1e3;
        t.check(c >= 1000.0, format!("rho {rho}: mean cycle {c:.1} us, expected at least 1000 us"));
    }
    Ok(t)
}

fn gate_driven_ceiling(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let cfg = saturated(reference_network(1, opts), 1.2)?;
    let r = run(&cfg, opts.seed, SATURATED_RUN)?;
    let ceiling = (cfg.delta_r + SimTime::from_nanos(16_000)) * ONUS as u64;
    let reference = (REFERENCE_REPORT_SLOT + 16_000) as f64 * ONUS as f64 / 1e3;
    t.check(
        r.max_cycle.as_micros_f64() <= reference + 1e-9,
        format!(
            "longest cycle {:.3} us, expected at most {reference:.1} us",
            r.max_cycle.as_micros_f64()
        ),
    );
    t.within("mean cycle", r.cycle.mean / 1e3, reference, 0.02, " us");
    t.note(format!("ceiling of the simulated network: {:.3} us", ceiling.as_micros_f64()));
    Ok(t)
}

fn delay_ratio(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let loads = [0.3, 0.45, 0.6];
    let mut cfgs = Vec::new();
    for &rho in &loads {
        for mode in [SchedulerMode::GateSingle, SchedulerMode::ReportDriven] {
            cfgs.push(symmetric(reference_network(1, opts).with_mode(mode), rho)?);
        }
    }
    let runs = run_all(&cfgs, opts.seed, None)?;
    for (rho, pair) in loads.iter().zip(runs.chunks(2)) {
        let (gate, report) = (pair[0].delay.mean / 1e3, pair[1].delay.mean / 1e3);
        let ratio = report / gate;
        t.check(
            (ratio - 1.5).abs() <= 0.15,
            format!("rho {rho}: REPORT-driven {report:.1} us / GATE-driven {gate:.1} us = {ratio:.3}, expected 1.5 ± 0.15"),
        );
    }
    Ok(t)
}

/// Largest stable total load between `lo` and `hi`, found by bisection on
/// simulated stability verdicts. An inconclusive verdict counts as stable.
/// Returns the bracket midpoint and the verdict log.
pub fn simulated_capacity(
    build: impl Fn(f64) -> Result<ValidConfig, SimError>,
    mut lo: f64,
    mut hi: f64,
    steps: usize,
    seed: u64,
) -> Result<(f64, Vec<(f64, Verdict)>), SimError> {
    let mut log = Vec::new();
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        let r = run(&build(mid)?, seed, None)?;
        log.push((mid, r.verdict.verdict));
        if r.verdict.verdict == Verdict::Unstable {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi), log))
}

fn tunable(n: usize, opts: &AcceptanceOptions) -> NetworkConfig {
    let mut nc = NetworkConfig::new(&reference_delays(n), 3)
        .with_mode(SchedulerMode::GateSingleCycle)
        .with_d_max(GrantCap::Bounded(SimTime::from_nanos(64_000)))
        .with_transmitters(1);
    nc.scenario = "acceptance".into();
    nc.gate_jitter = GateJitter::Uniform;
    if let Some(slot) = opts.report_slot {
        nc.delta_r = slot;
        nc.delta_g = nc.delta_g.min(slot);
    }
    nc
}

fn tunable_capacity(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let shape = ProfileKind::Asymmetric {
        heavy_fraction: 0.25,
        heavy_factor: 5.0,
    };
    let cases: [(usize, f64, &[f64]); 2] = [(20, 2.770, &[2.770]), (4, 1.549, &[1.549, 1.58])];
    let found: Vec<_> = cases
        .par_iter()
        .map(|&(n, centre, _)| {
            let build = |x: f64| -> Result<ValidConfig, SimError> {
                Ok(validate_config(tunable(n, opts).with_profile(shape, x)?)?)
            };
            simulated_capacity(build, 0.8 * centre, 1.2 * centre, 7, opts.seed)
        })
        .collect::<Result<_, _>>()?;
    for ((n, _, targets), (cap, log)) in cases.iter().zip(found) {
        let probe = validate_config(tunable(*n, opts).with_profile(shape, 1.0)?)?;
        let predicted = analytics::predicted_capacity(&probe).unwrap_or(f64::NAN);
        let best = targets
            .iter()
            .map(|&x| ((cap - x).abs() / x, x))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        let listed: Vec<String> = targets.iter().map(|x| format!("{x}")).collect();
        t.check(
            best.0 <= 0.05,
            format!(
                "{n} ONUs: simulated capacity {cap:.4}, expected within 5% of {} (off by {:.2}% from {})",
                listed.join(" or "),
                best.0 * 100.0,
                best.1
            ),
        );
        t.note(format!("{n} ONUs: analytic prediction {predicted:.4}"));
        let steps: Vec<String> = log.iter().map(|(x, v)| format!("{x:.3}:{v}")).collect();
        t.note(format!("{n} ONUs: bisection {}", steps.join(" ")));
    }
    Ok(t)
}

/// Two or three ONUs one microsecond away, 20 ns control slots, no GATE
/// jitter, one-packet grants.
pub fn tiny_network(onus: usize, wavelengths: usize) -> NetworkConfig {
    let mut nc = NetworkConfig::new(&vec![SimTime::from_nanos(1000); onus], wavelengths)
        .with_d_max(GrantCap::Bounded(SimTime::from_nanos(8000)));
    nc.scenario = "acceptance".into();
    nc.delta_r = SimTime::from_nanos(20);
    nc.delta_g = SimTime::from_nanos(20);
    nc.tau = SimTime::ZERO;
    nc.gate_jitter = GateJitter::None;
    nc.grant_mode = GrantMode::Packet;
    nc
}

/// ONU 1 reaches both wavelengths, ONU 2 only the second.
pub fn example_one(loads: [f64; 2]) -> Result<ValidConfig, SimError> {
    let mut nc = tiny_network(2, 2).with_mode(SchedulerMode::GatePartialSharing);
    nc.onus[1].allowed_wavelengths = [2].into_iter().collect();
    nc.onus[1].transmitter_count = 1;
    Ok(validate_config(nc.with_loads(&loads)?)?)
}

/// Three ONUs with one tunable transmitter each over two wavelengths.
pub fn example_two(loads: [f64; 3]) -> Result<ValidConfig, SimError> {
    let nc = tiny_network(3, 2)
        .with_mode(SchedulerMode::GateSingleCycle)
        .with_transmitters(1);
    Ok(validate_config(nc.with_loads(&loads)?)?)
}

fn toy_runs(
    t: &mut Tally,
    example: u8,
    cases: Vec<(Vec<f64>, ValidConfig, Verdict)>,
    seed: u64,
) -> Result<(), SimError> {
    let cfgs: Vec<ValidConfig> = cases.iter().map(|c| c.1.clone()).collect();
    for ((loads, _, want), r) in cases.iter().zip(run_all(&cfgs, seed, None)?) {
        let analytic = match toy_example_conditions(example, loads) {
            Ok(v) => format!("necessary {}, sufficient {}", v.necessary, v.refined_or_sufficient),
            Err(e) => format!("unavailable ({e})"),
        };
        t.check(
            r.verdict.verdict == *want,
            format!(
                "loads {loads:?}: verdict {} (backlog slope {:.4}, carried/offered {:.4}), expected {want}; analytic: {analytic}",
                r.verdict.verdict,
                r.verdict.backlog_slope,
                r.verdict.carried / r.verdict.offered.max(f64::MIN_POSITIVE),
            ),
        );
    }
    Ok(())
}

fn example_one_boundary(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let cases = vec![
        (vec![1.35, 0.5], example_one([1.35, 0.5])?, Verdict::Stable),
        (vec![1.35, 0.6], example_one([1.35, 0.6])?, Verdict::Unstable),
    ];
    toy_runs(&mut t, 1, cases, opts.seed)?;
    Ok(t)
}

fn example_two_conditions(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let cases = vec![
        (vec![0.9, 0.1, 0.1], example_two([0.9, 0.1, 0.1])?, Verdict::Stable),
        (vec![1.01, 0.3, 0.3], example_two([1.01, 0.3, 0.3])?, Verdict::Unstable),
    ];
    toy_runs(&mut t, 2, cases, opts.seed)?;
    Ok(t)
}

/// Subset condition evaluated by walking the subset tree recursively and
/// collecting reachable wavelengths in a plain vector.
pub fn brute_force_subsets(loads: &[f64], reach: &[Vec<usize>]) -> (bool, f64) {
    fn walk(i: usize, loads: &[f64], reach: &[Vec<usize>], load: f64, seen: &mut Vec<usize>, picked: usize, worst: &mut f64) {
        if i == loads.len() {
            if picked > 0 {
                *worst = worst.max(load - seen.len() as f64);
            }
            return;
        }
        walk(i + 1, loads, reach, load, seen, picked, worst);
        let before = seen.len();
        for &w in &reach[i] {
            if !seen.contains(&w) {
                seen.push(w);
            }
        }
        walk(i + 1, loads, reach, load + loads[i], seen, picked + 1, worst);
        seen.truncate(before);
    }
    let mut worst = f64::NEG_INFINITY;
    walk(0, loads, reach, 0.0, &mut Vec::new(), 0, &mut worst);
    (worst < 0.0, worst)
}

fn oracles(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let l = rng.random_range(1..=4usize);
        let reach: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut set: Vec<usize> = (1..=l).filter(|_| rng.random_bool(0.5)).collect();
                if set.is_empty() {
                    set.push(rng.random_range(1..=l));
                }
                set
            })
            .collect();
        let loads: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.2 * l as f64 / n as f64 * 2.0)).collect();
        let mut map = AvailabilityMap::new();
        for (i, r) in reach.iter().enumerate() {
            map.insert(i + 1, r.iter().copied());
        }
        let fast = partial_sharing_stable(&loads, &map).expect("n is small");
        let (stable, margin) = brute_force_subsets(&loads, &reach);
        if fast.stable != stable || (fast.margin - margin).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    t.check(
        mismatches == 0,
        format!("subset condition vs recursive enumeration: {mismatches} mismatches in 1000 instances"),
    );

    let mut mismatches = 0;
    let mut stable_seen = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let slot = SimTime::from_nanos(rng.random_range(100..=5000));
        let caps: Vec<GrantCap> = (0..n)
            .map(|_| GrantCap::Bounded(SimTime::from_nanos(rng.random_range(1000..=100_000))))
            .collect();
        let loads: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.6 / n as f64)).collect();
        let single = stability_single(&loads, &caps, slot).stable;
        let part = local_stability_partition(&loads, &caps, slot).expect("bounded caps");
        stable_seen += usize::from(single);
        if (part.k == n) != single {
            mismatches += 1;
        }
    }
    t.check(
        mismatches == 0,
        format!("partition keeps every ONU exactly when the network is stable: {mismatches} mismatches in 1000 instances ({stable_seen} stable)"),
    );
    Ok(t)
}

fn determinism(opts: &AcceptanceOptions) -> Result<Tally, SimError> {
    let mut t = Tally::new();
    let cfg = symmetric(
        reference_network(2, opts)
            .with_mode(SchedulerMode::GateSingleCycle)
            .with_d_max(GrantCap::Bounded(SimTime::from_nanos(16_000))),
        1.0,
    )?;
    let duration = Some(SimTime::from_millis(20));
    let a = crate::cli::simulate_outputs(&cfg, opts.seed, duration, true)?;
    let b = crate::cli::simulate_outputs(&cfg, opts.seed, duration, true)?;
    t.check(a.csv == b.csv, format!("CSV identical ({} bytes)", a.csv.len()));
    t.check(
        a.trace == b.trace && !a.trace.is_empty(),
        format!("event trace identical ({} bytes)", a.trace.len()),
    );
    Ok(t)
}

/// Runs check `id` (1 to 13). Simulation errors turn into a failed outcome.
pub fn run_criterion(id: u8, opts: &AcceptanceOptions) -> Outcome {
    let title = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| *t)
        .unwrap_or("unknown");
    let began = Instant::now();
    let result = match id {
        1 => cycle_law(opts),
        2 => stability_boundary(opts),
        3 => per_wavelength_cycle(opts),
        4 => single_cycle(opts),
        5 => full_utilization(opts),
        6 => report_driven_floor(opts),
        7 => gate_driven_ceiling(opts),
        8 => delay_ratio(opts),
        9 => tunable_capacity(opts),
        10 => example_one_boundary(opts),
        11 => example_two_conditions(opts),
        12 => oracles(opts),
        13 => determinism(opts),
        _ => Ok(Tally {
            passed: false,
            details: vec![format!("no check numbered {id}")],
        }),
    };
    let tally = result.unwrap_or_else(|e| Tally {
        passed: false,
        details: vec![format!("error: {e}")],
    });
    Outcome {
        id,
        title,
        passed: tally.passed,
        details: tally.details,
        elapsed: began.elapsed(),
    }
}

/// Runs every check, in order.
pub fn run_suite(opts: &AcceptanceOptions) -> Vec<Outcome> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, opts)).collect()
}
