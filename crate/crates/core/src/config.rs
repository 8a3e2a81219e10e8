//! Network configuration, validation and the flat `key = value` config format.
//!
//! A config file holds one `key = value` entry per line; `#` starts a
//! comment. Global keys set network parameters and per-ONU defaults, and
//! `onu.<id>.<field>` overrides a single ONU. Times accept `ns`, `us`, `ms`
//! and `s` suffixes and must resolve to whole nanoseconds.
//!
//! ```text
//! N = 20
//! L = 1
//! delta_R = 2.12us
//! d_max = 16000          # 2 Kbyte at 1 Gb/s
//! total_load = 0.8
//! load_profile = symmetric
//! delay_range = 10us..500us
//! onu.3.d_max = unbounded
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ConfigError, Violation};
use crate::time::SimTime;
use crate::traffic::{self, ProfileKind};

pub type OnuId = usize;
pub type WavelengthId = usize;

/// Per-ONU grant cap `d_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrantCap {
    Bounded(SimTime),
    Unbounded,
}

impl GrantCap {
    pub fn limit(self, residual: SimTime) -> SimTime {
        match self {
            GrantCap::Bounded(cap) => residual.min(cap),
            GrantCap::Unbounded => residual,
        }
    }

    /// Cap in nanoseconds, `f64::INFINITY` when unbounded.
    pub fn as_nanos_f64(self) -> f64 {
        match self {
            GrantCap::Bounded(cap) => cap.as_nanos() as f64,
            GrantCap::Unbounded => f64::INFINITY,
        }
    }

    pub fn bounded(self) -> Option<SimTime> {
        match self {
            GrantCap::Bounded(cap) => Some(cap),
            GrantCap::Unbounded => None,
        }
    }
}

impl fmt::Display for GrantCap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrantCap::Bounded(cap) => write!(f, "{}", cap.as_nanos()),
            GrantCap::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl FromStr for GrantCap {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "unbounded" | "inf" | "infinity" => Ok(GrantCap::Unbounded),
            other => Ok(GrantCap::Bounded(other.parse()?)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulerMode {
    /// One wavelength, one periodic GATE cycle.
    GateSingle,
    /// An identical round-robin cycle on every wavelength.
    GatePerWavelength,
    /// One global round-robin cycle, each visit on the next available wavelength.
    GateSingleCycle,
    /// One cycle per wavelength over only the ONUs that wavelength can serve.
    GatePartialSharing,
    /// A GATE in direct response to every REPORT, polling-table order.
    ReportDriven,
}

impl SchedulerMode {
    pub const ALL: [SchedulerMode; 5] = [
        SchedulerMode::GateSingle,
        SchedulerMode::GatePerWavelength,
        SchedulerMode::GateSingleCycle,
        SchedulerMode::GatePartialSharing,
        SchedulerMode::ReportDriven,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerMode::GateSingle => "gate_single",
            SchedulerMode::GatePerWavelength => "gate_per_wavelength",
            SchedulerMode::GateSingleCycle => "gate_single_cycle",
            SchedulerMode::GatePartialSharing => "gate_partial_sharing",
            SchedulerMode::ReportDriven => "report_driven",
        }
    }

    pub fn is_gate_driven(self) -> bool {
        self != SchedulerMode::ReportDriven
    }
}

impl fmt::Display for SchedulerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerMode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchedulerMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| ConfigError::Parse {
                what: "scheduler_mode".into(),
                value: s.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrantMode {
    /// Grants drain exactly their length of head-of-line work; packets may split.
    Fluid,
    /// Grants drain whole packets only.
    Packet,
}

impl FromStr for GrantMode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "fluid" => Ok(GrantMode::Fluid),
            "packet" => Ok(GrantMode::Packet),
            _ => Err(ConfigError::Parse {
                what: "grant_mode".into(),
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for GrantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrantMode::Fluid => "fluid",
            GrantMode::Packet => "packet",
        })
    }
}

/// Downstream GATE emission delay caused by in-progress data frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateJitter {
    None,
    /// Uniform on `[0, tau]`.
    Uniform,
}

impl FromStr for GateJitter {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" => Ok(GateJitter::None),
            "uniform" | "uniform(0,tau)" => Ok(GateJitter::Uniform),
            _ => Err(ConfigError::Parse {
                what: "gate_jitter".into(),
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for GateJitter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateJitter::None => "none",
            GateJitter::Uniform => "uniform",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnuProfile {
    pub id: OnuId,
    /// One-way propagation delay.
    pub delta: SimTime,
    pub d_max: GrantCap,
    pub allowed_wavelengths: BTreeSet<WavelengthId>,
    pub transmitter_count: usize,
    /// Packets per second.
    pub arrival_rate: f64,
}

impl OnuProfile {
    pub fn new(id: OnuId, delta: SimTime, d_max: GrantCap, wavelengths: usize) -> Self {
        OnuProfile {
            id,
            delta,
            d_max,
            allowed_wavelengths: (1..=wavelengths).collect(),
            transmitter_count: wavelengths,
            arrival_rate: 0.0,
        }
    }

    /// Offered load as a fraction of one wavelength, given the packet wire time.
    pub fn load(&self, packet_wire_time: SimTime) -> f64 {
        self.arrival_rate * packet_wire_time.as_secs_f64()
    }

    /// A tunable ONU cannot transmit on all of its wavelengths at once.
    pub fn is_transmitter_limited(&self) -> bool {
        self.transmitter_count < self.allowed_wavelengths.len()
    }
}

/// Which wavelengths each ONU can transmit on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AvailabilityMap(BTreeMap<OnuId, BTreeSet<WavelengthId>>);

impl AvailabilityMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn full(onus: usize, wavelengths: usize) -> Self {
        AvailabilityMap(
            (1..=onus)
                .map(|i| (i, (1..=wavelengths).collect()))
                .collect(),
        )
    }

    pub fn insert(&mut self, onu: OnuId, wavelengths: impl IntoIterator<Item = WavelengthId>) {
        self.0.insert(onu, wavelengths.into_iter().collect());
    }

    pub fn get(&self, onu: OnuId) -> Option<&BTreeSet<WavelengthId>> {
        self.0.get(&onu)
    }

    pub fn onus(&self) -> impl Iterator<Item = OnuId> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Wavelengths that can serve at least one member of `subset`.
    pub fn reachable<'a>(&self, subset: impl IntoIterator<Item = &'a OnuId>) -> BTreeSet<WavelengthId> {
        subset
            .into_iter()
            .filter_map(|i| self.0.get(i))
            .flatten()
            .copied()
            .collect()
    }
}

impl FromIterator<(OnuId, BTreeSet<WavelengthId>)> for AvailabilityMap {
    fn from_iter<T: IntoIterator<Item = (OnuId, BTreeSet<WavelengthId>)>>(iter: T) -> Self {
        AvailabilityMap(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub scenario: String,
    pub wavelengths: usize,
    /// Bits per second, per wavelength.
    pub line_rate: u64,
    /// Bytes.
    pub packet_size: u64,
    pub delta_r: SimTime,
    pub delta_g: SimTime,
    pub tau: SimTime,
    /// Filled in by validation when absent.
    pub delta_o: Option<SimTime>,
    pub gate_jitter: GateJitter,
    pub scheduler_mode: SchedulerMode,
    pub grant_mode: GrantMode,
    /// Adaptive skipping of persistently idle ONUs (GATE-driven modes).
    pub skipping: bool,
    /// Periodic visit order; round robin over 1..N when absent.
    pub cycle_order: Option<Vec<OnuId>>,
    /// Load shape used when sweeps rescale the total load.
    pub profile: Option<ProfileKind>,
    pub onus: Vec<OnuProfile>,
}

impl NetworkConfig {
    /// N ONUs, L wavelengths, 1 Gb/s, 1000-byte packets, 2.12 us REPORT and
    /// GATE slots, 12 us downstream jitter bound, unbounded grants.
    pub fn new(delays: &[SimTime], wavelengths: usize) -> Self {
        NetworkConfig {
            scenario: "custom".into(),
            wavelengths,
            line_rate: 1_000_000_000,
            packet_size: 1000,
            delta_r: SimTime::from_nanos(2120),
            delta_g: SimTime::from_nanos(2120),
            tau: SimTime::from_nanos(12_000),
            delta_o: None,
            gate_jitter: GateJitter::None,
            scheduler_mode: SchedulerMode::GateSingle,
            grant_mode: GrantMode::Fluid,
            skipping: false,
            cycle_order: None,
            profile: None,
            onus: delays
                .iter()
                .enumerate()
                .map(|(k, &d)| OnuProfile::new(k + 1, d, GrantCap::Unbounded, wavelengths))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.onus.len()
    }

    pub fn onu(&self, id: OnuId) -> &OnuProfile {
        &self.onus[id - 1]
    }

    pub fn with_mode(mut self, mode: SchedulerMode) -> Self {
        self.scheduler_mode = mode;
        self
    }

    pub fn with_d_max(mut self, cap: GrantCap) -> Self {
        for onu in &mut self.onus {
            onu.d_max = cap;
        }
        self
    }

    pub fn with_transmitters(mut self, count: usize) -> Self {
        for onu in &mut self.onus {
            onu.transmitter_count = count;
        }
        self
    }

    /// Sets per-ONU arrival rates from loads (fractions of one wavelength).
    pub fn with_loads(mut self, loads: &[f64]) -> Result<Self, ConfigError> {
        let wire = wire_time(self.packet_size, self.line_rate)?;
        assert_eq!(loads.len(), self.onus.len(), "one load per ONU");
        for (onu, &rho) in self.onus.iter_mut().zip(loads) {
            onu.arrival_rate = rho / wire.as_secs_f64();
        }
        Ok(self)
    }

    /// Applies a load profile at the given total load and remembers the shape.
    pub fn with_profile(mut self, kind: ProfileKind, total_load: f64) -> Result<Self, ConfigError> {
        let profile = traffic::build_profile(kind, total_load, self.n())
            .map_err(|e| ConfigError::Invalid(vec![Violation {
                field: "load_profile".into(),
                constraint: e.to_string(),
            }]))?;
        self.profile = Some(kind);
        self.with_loads(&profile.per_onu_loads)
    }

    pub fn availability(&self) -> AvailabilityMap {
        self.onus
            .iter()
            .map(|o| (o.id, o.allowed_wavelengths.clone()))
            .collect()
    }

    pub fn max_delta(&self) -> SimTime {
        self.onus.iter().map(|o| o.delta).max().unwrap_or(SimTime::ZERO)
    }

    /// The smallest offset that makes every GATE feasible: `2 max(delta) + tau`.
    pub fn min_offset(&self) -> SimTime {
        self.max_delta() + self.max_delta() + self.tau
    }

    pub fn cycle_order(&self) -> Vec<OnuId> {
        self.cycle_order
            .clone()
            .unwrap_or_else(|| (1..=self.n()).collect())
    }
}

/// A configuration that has passed [`validate_config`]. `delta_o` is always
/// set and the packet wire time is known to be integral.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidConfig {
    inner: NetworkConfig,
    packet_wire_time: SimTime,
}

impl ValidConfig {
    pub fn delta_o(&self) -> SimTime {
        self.inner.delta_o.expect("validated config has an offset")
    }

    pub fn packet_wire_time(&self) -> SimTime {
        self.packet_wire_time
    }

    pub fn loads(&self) -> Vec<f64> {
        self.inner
            .onus
            .iter()
            .map(|o| o.load(self.packet_wire_time))
            .collect()
    }

    pub fn total_load(&self) -> f64 {
        self.loads().iter().sum()
    }

    pub fn into_inner(self) -> NetworkConfig {
        self.inner
    }
}

impl Deref for ValidConfig {
    type Target = NetworkConfig;
    fn deref(&self) -> &NetworkConfig {
        &self.inner
    }
}

/// Transmission time of `size_bytes` at `line_rate` bits per second.
pub fn wire_time(size_bytes: u64, line_rate: u64) -> Result<SimTime, ConfigError> {
    let bits = u128::from(size_bytes) * 8 * 1_000_000_000;
    if size_bytes == 0 || line_rate == 0 || bits % u128::from(line_rate) != 0 {
        return Err(ConfigError::NonIntegralWireTime {
            size_bytes,
            line_rate,
        });
    }
    let ns = bits / u128::from(line_rate);
    u64::try_from(ns)
        .map(SimTime::from_nanos)
        .map_err(|_| ConfigError::NonIntegralWireTime {
            size_bytes,
            line_rate,
        })
}

/// Checks every configuration invariant and fills in the default offset.
/// All violations are reported together.
pub fn validate_config(config: NetworkConfig) -> Result<ValidConfig, ConfigError> {
    let mut errs = Vec::new();
    let mut bad = |field: &str, constraint: String| {
        errs.push(Violation {
            field: field.to_string(),
            constraint,
        })
    };

    let n = config.onus.len();
    let l = config.wavelengths;
    if n == 0 {
        bad("N", "at least one ONU is required".into());
    }
    if l == 0 {
        bad("L", "at least one wavelength is required".into());
    }
    let wire = match wire_time(config.packet_size, config.line_rate) {
        Ok(w) => Some(w),
        Err(e) => {
            bad("packet_size", e.to_string());
            None
        }
    };
    if config.delta_r.is_zero() {
        bad("delta_R", "must be positive".into());
    }
    if config.delta_g > config.delta_r {
        bad(
            "delta_G",
            format!(
                "Δ_G ≤ Δ_R violated ({} > {})",
                config.delta_g, config.delta_r
            ),
        );
    }

    for (k, onu) in config.onus.iter().enumerate() {
        let f = |name: &str| format!("onu.{}.{}", onu.id, name);
        if onu.id != k + 1 {
            bad(&f("id"), format!("ONU ids must be 1..N in order, found {} at position {}", onu.id, k + 1));
        }
        if onu.delta.is_zero() {
            bad(&f("delta"), "must be positive".into());
        }
        if onu.d_max == GrantCap::Bounded(SimTime::ZERO) {
            bad(&f("d_max"), "must be positive or unbounded".into());
        }
        if onu.allowed_wavelengths.is_empty() {
            bad(&f("allowed_wavelengths"), "must be nonempty".into());
        }
        if let Some(&w) = onu.allowed_wavelengths.iter().find(|&&w| w == 0 || w > l) {
            bad(&f("allowed_wavelengths"), format!("wavelength {w} is outside 1..={l}"));
        }
        if onu.transmitter_count == 0 || onu.transmitter_count > onu.allowed_wavelengths.len() {
            bad(
                &f("transmitter_count"),
                format!(
                    "must lie in 1..={} (allowed wavelengths), got {}",
                    onu.allowed_wavelengths.len(),
                    onu.transmitter_count
                ),
            );
        }
        if !(onu.arrival_rate.is_finite() && onu.arrival_rate >= 0.0) {
            bad(&f("arrival_rate"), format!("must be finite and ≥ 0, got {}", onu.arrival_rate));
        }
        if config.grant_mode == GrantMode::Packet {
            if let (GrantCap::Bounded(cap), Some(w)) = (onu.d_max, wire) {
                if cap.as_nanos() % w.as_nanos() != 0 {
                    bad(
                        &f("d_max"),
                        format!("{cap} is not a multiple of the packet wire time {w}"),
                    );
                }
            }
        }
        if config.scheduler_mode == SchedulerMode::GatePerWavelength
            && onu.allowed_wavelengths.len() != l
        {
            bad(
                &f("allowed_wavelengths"),
                "gate_per_wavelength requires full availability".into(),
            );
        }
    }

    let min_offset = config.min_offset();
    let delta_o = match config.delta_o {
        Some(o) if o < min_offset => {
            bad(
                "delta_O",
                format!("must be ≥ 2·max δ + τ = {min_offset}, got {o}"),
            );
            o
        }
        Some(o) => o,
        None => min_offset,
    };

    if let Some(order) = &config.cycle_order {
        if order.is_empty() {
            bad("cycle_order", "must be nonempty".into());
        }
        if let Some(&bad_id) = order.iter().find(|&&i| i == 0 || i > n) {
            bad("cycle_order", format!("ONU {bad_id} is outside 1..={n}"));
        }
        if let Some(missing) = (1..=n).find(|i| !order.contains(i)) {
            bad("cycle_order", format!("ONU {missing} is never visited"));
        }
    }
    if config.skipping && config.scheduler_mode == SchedulerMode::ReportDriven {
        bad("skipping", "adaptive skipping applies to GATE-driven modes only".into());
    }
    if config.scheduler_mode == SchedulerMode::GateSingle && l != 1 {
        bad("L", format!("gate_single needs exactly one wavelength, got {l}"));
    }

    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs));
    }
    let mut inner = config;
    inner.delta_o = Some(delta_o);
    Ok(ValidConfig {
        inner,
        packet_wire_time: wire.expect("checked above"),
    })
}

/// One `key = value` line of a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got {body:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "empty key".into(),
            });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key {key:?}"),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn parse_list<T: FromStr>(what: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| ConfigError::Parse {
                what: what.into(),
                value: s.into(),
            })
        })
        .collect()
}

fn parse_num<T: FromStr>(what: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Parse {
        what: what.into(),
        value: value.into(),
    })
}

fn parse_bool(what: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Parse {
            what: what.into(),
            value: value.into(),
        }),
    }
}

/// Parses `lo..hi` into a pair of times.
fn parse_range(value: &str) -> Result<(SimTime, SimTime), ConfigError> {
    let (lo, hi) = value.split_once("..").ok_or_else(|| ConfigError::Parse {
        what: "delay_range".into(),
        value: value.into(),
    })?;
    Ok((lo.parse()?, hi.parse()?))
}

const ONU_FIELDS: [&str; 5] = [
    "delta",
    "d_max",
    "allowed_wavelengths",
    "transmitter_count",
    "arrival_rate",
];

impl NetworkConfig {
    /// Reads a config file. Keys under `sweep.` are rejected here; sweeps
    /// parse the same file with [`NetworkConfig::from_entries`] and take
    /// their own keys first.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = read_file(path.as_ref())?;
        Self::from_entries(&parse_entries(&text)?)
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        Self::from_entries(&parse_entries(text)?)
    }

    pub fn from_entries(entries: &[Entry]) -> Result<Self, ConfigError> {
        let get = |k: &str| entries.iter().find(|e| e.key == k).map(|e| e.value.as_str());

        for e in entries {
            let known_global = matches!(
                e.key.as_str(),
                "scenario"
                    | "N"
                    | "L"
                    | "line_rate"
                    | "packet_size"
                    | "delta_R"
                    | "delta_G"
                    | "tau"
                    | "delta_O"
                    | "gate_jitter"
                    | "scheduler_mode"
                    | "grant_mode"
                    | "skipping"
                    | "cycle_order"
                    | "total_load"
                    | "load_profile"
                    | "onu_delays"
                    | "delay_range"
                    | "delay_seed"
            ) || ONU_FIELDS.contains(&e.key.as_str());
            let known_onu = e
                .key
                .strip_prefix("onu.")
                .and_then(|rest| rest.split_once('.'))
                .is_some_and(|(id, field)| id.parse::<usize>().is_ok() && ONU_FIELDS.contains(&field));
            if !known_global && !known_onu {
                return Err(ConfigError::UnknownKey(e.key.clone()));
            }
        }

        let wavelengths: usize = get("L").map(|v| parse_num("L", v)).transpose()?.unwrap_or(1);
        let explicit_delays: Option<Vec<SimTime>> =
            get("onu_delays").map(|v| parse_list("onu_delays", v)).transpose()?;
        let n: usize = match (get("N"), &explicit_delays) {
            (Some(v), _) => parse_num("N", v)?,
            (None, Some(d)) => d.len(),
            (None, None) => {
                return Err(ConfigError::Invalid(vec![Violation {
                    field: "N".into(),
                    constraint: "missing (set N or onu_delays)".into(),
                }]))
            }
        };

        let delays = match explicit_delays {
            Some(d) if d.len() != n => {
                return Err(ConfigError::Invalid(vec![Violation {
                    field: "onu_delays".into(),
                    constraint: format!("has {} entries for N = {n}", d.len()),
                }]))
            }
            Some(d) => d,
            None => {
                let (lo, hi) = get("delay_range")
                    .map(parse_range)
                    .transpose()?
                    .unwrap_or((SimTime::from_micros(10), SimTime::from_micros(500)));
                let seed: u64 = get("delay_seed")
                    .map(|v| parse_num("delay_seed", v))
                    .transpose()?
                    .unwrap_or(1);
                if lo >= hi {
                    return Err(ConfigError::Invalid(vec![Violation {
                        field: "delay_range".into(),
                        constraint: format!("lower bound {lo} must be below upper bound {hi}"),
                    }]));
                }
                traffic::onu_delays(n, seed, lo, hi)
            }
        };

        let mut cfg = NetworkConfig::new(&delays, wavelengths);
        if let Some(v) = get("scenario") {
            cfg.scenario = v.to_string();
        }
        if let Some(v) = get("line_rate") {
            cfg.line_rate = parse_num("line_rate", v)?;
        }
        if let Some(v) = get("packet_size") {
            cfg.packet_size = parse_num("packet_size", v)?;
        }
        if let Some(v) = get("delta_R") {
            cfg.delta_r = v.parse()?;
        }
        if let Some(v) = get("delta_G") {
            cfg.delta_g = v.parse()?;
        }
        if let Some(v) = get("tau") {
            cfg.tau = v.parse()?;
        }
        if let Some(v) = get("delta_O") {
            cfg.delta_o = Some(v.parse()?);
        }
        if let Some(v) = get("gate_jitter") {
            cfg.gate_jitter = v.parse()?;
        }
        if let Some(v) = get("scheduler_mode") {
            cfg.scheduler_mode = v.parse()?;
        }
        if let Some(v) = get("grant_mode") {
            cfg.grant_mode = v.parse()?;
        }
        if let Some(v) = get("skipping") {
            cfg.skipping = parse_bool("skipping", v)?;
        }
        if let Some(v) = get("cycle_order") {
            cfg.cycle_order = Some(parse_list("cycle_order", v)?);
        }

        // Global per-ONU defaults, then per-ONU overrides.
        for onu in &mut cfg.onus {
            for field in ONU_FIELDS {
                let specific = format!("onu.{}.{}", onu.id, field);
                let value = get(&specific).or_else(|| get(field));
                if let Some(v) = value {
                    apply_onu_field(onu, field, v)?;
                }
            }
            if get(&format!("onu.{}.transmitter_count", onu.id)).is_none()
                && get("transmitter_count").is_none()
            {
                onu.transmitter_count = onu.allowed_wavelengths.len();
            }
        }
        if let Some(e) = entries.iter().find(|e| {
            e.key
                .strip_prefix("onu.")
                .and_then(|r| r.split_once('.'))
                .and_then(|(id, _)| id.parse::<usize>().ok())
                .is_some_and(|id| id == 0 || id > n)
        }) {
            return Err(ConfigError::Invalid(vec![Violation {
                field: e.key.clone(),
                constraint: format!("ONU id outside 1..={n}"),
            }]));
        }

        if let Some(v) = get("total_load") {
            let total: f64 = parse_num("total_load", v)?;
            let kind: ProfileKind = get("load_profile")
                .map(str::parse)
                .transpose()?
                .unwrap_or(ProfileKind::Symmetric);
            cfg = cfg.with_profile(kind, total)?;
        } else if let Some(v) = get("load_profile") {
            cfg.profile = Some(v.parse()?);
        }
        Ok(cfg)
    }

    /// Renders the config back into the flat key format, one ONU override
    /// block per ONU. Parsing the output reproduces the config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("scenario", self.scenario.clone());
        kv("N", self.n().to_string());
        kv("L", self.wavelengths.to_string());
        kv("line_rate", self.line_rate.to_string());
        kv("packet_size", self.packet_size.to_string());
        kv("delta_R", self.delta_r.as_nanos().to_string());
        kv("delta_G", self.delta_g.as_nanos().to_string());
        kv("tau", self.tau.as_nanos().to_string());
        if let Some(o) = self.delta_o {
            kv("delta_O", o.as_nanos().to_string());
        }
        kv("gate_jitter", self.gate_jitter.to_string());
        kv("scheduler_mode", self.scheduler_mode.to_string());
        kv("grant_mode", self.grant_mode.to_string());
        kv("skipping", self.skipping.to_string());
        if let Some(order) = &self.cycle_order {
            kv("cycle_order", join(order.iter()));
        }
        kv(
            "onu_delays",
            join(self.onus.iter().map(|o| o.delta.as_nanos())),
        );
        for o in &self.onus {
            kv(&format!("onu.{}.d_max", o.id), o.d_max.to_string());
            kv(
                &format!("onu.{}.allowed_wavelengths", o.id),
                join(o.allowed_wavelengths.iter()),
            );
            kv(&format!("onu.{}.transmitter_count", o.id), o.transmitter_count.to_string());
            kv(&format!("onu.{}.arrival_rate", o.id), format!("{:?}", o.arrival_rate));
        }
        if let Some(p) = self.profile {
            kv("load_profile", p.to_string());
        }
        s
    }
}

fn join<T: ToString>(it: impl Iterator<Item = T>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn apply_onu_field(onu: &mut OnuProfile, field: &str, value: &str) -> Result<(), ConfigError> {
    match field {
        "delta" => onu.delta = value.parse()?,
        "d_max" => onu.d_max = value.parse()?,
        "allowed_wavelengths" => {
            onu.allowed_wavelengths = parse_list::<usize>("allowed_wavelengths", value)?
                .into_iter()
                .collect()
        }
        "transmitter_count" => onu.transmitter_count = parse_num("transmitter_count", value)?,
        "arrival_rate" => onu.arrival_rate = parse_num("arrival_rate", value)?,
        _ => unreachable!("field list is fixed"),
    }
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn us(x: u64) -> SimTime {
        SimTime::from_micros(x)
    }

    fn base() -> NetworkConfig {
        NetworkConfig::new(&[us(100), us(500), us(250)], 1)
    }

    #[test]
    fn wire_time_examples() {
        let gbps = 1_000_000_000;
        assert_eq!(wire_time(1000, gbps).unwrap(), SimTime::from_nanos(8000));
        assert_eq!(wire_time(1500, gbps).unwrap(), SimTime::from_nanos(12_000));
        assert_eq!(wire_time(125, gbps).unwrap(), SimTime::from_nanos(1000));
    }

    #[test]
    fn wire_time_rejects_fractional_ns() {
        assert!(matches!(
            wire_time(1, 3_000_000_000),
            Err(ConfigError::NonIntegralWireTime { .. })
        ));
        assert!(wire_time(0, 1_000_000_000).is_err());
    }

    #[test]
    fn delta_g_above_delta_r_is_rejected() {
        let mut cfg = base();
        cfg.delta_g = us(3);
        cfg.delta_r = us(2);
        let err = validate_config(cfg).unwrap_err();
        assert!(err
            .violations()
            .iter()
            .any(|v| v.field == "delta_G" && v.constraint.contains("Δ_G ≤ Δ_R violated")));
    }

    #[test]
    fn offset_defaults_to_round_trip_plus_tau() {
        let cfg = validate_config(base()).unwrap();
        // 2 * 500 us + 12 us
        assert_eq!(cfg.delta_o(), us(1012));
        for onu in &cfg.onus {
            assert!(onu.delta + onu.delta + cfg.tau <= cfg.delta_o());
        }
    }

    #[test]
    fn too_small_offset_is_rejected() {
        let mut cfg = base();
        cfg.delta_o = Some(us(1000));
        let err = validate_config(cfg).unwrap_err();
        assert_eq!(err.violations()[0].field, "delta_O");
    }

    #[test]
    fn packet_mode_cap_must_be_packet_multiple() {
        let mut cfg = base().with_d_max(GrantCap::Bounded(SimTime::from_nanos(12_000)));
        cfg.grant_mode = GrantMode::Packet;
        let err = validate_config(cfg).unwrap_err();
        assert!(err
            .violations()
            .iter()
            .all(|v| v.field.ends_with("d_max") && v.constraint.contains("not a multiple")));
        assert_eq!(err.violations().len(), 3);
    }

    #[test]
    fn reports_every_violation() {
        let mut cfg = base();
        cfg.delta_g = us(3);
        cfg.delta_r = us(2);
        cfg.onus[1].transmitter_count = 0;
        cfg.onus[2].allowed_wavelengths = [2].into();
        let err = validate_config(cfg).unwrap_err();
        let fields: Vec<_> = err.violations().iter().map(|v| v.field.as_str()).collect();
        assert!(fields.contains(&"delta_G"));
        assert!(fields.contains(&"onu.2.transmitter_count"));
        assert!(fields.contains(&"onu.3.allowed_wavelengths"));
    }

    #[test]
    fn per_wavelength_mode_needs_full_availability() {
        let mut cfg = NetworkConfig::new(&[us(10), us(20)], 2).with_mode(SchedulerMode::GatePerWavelength);
        cfg.onus[1].allowed_wavelengths = [2].into();
        cfg.onus[1].transmitter_count = 1;
        assert!(validate_config(cfg.clone()).is_err());
        cfg.scheduler_mode = SchedulerMode::GatePartialSharing;
        assert!(validate_config(cfg).is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let once = validate_config(base()).unwrap();
        let twice = validate_config(once.clone().into_inner()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn load_is_rate_times_wire_time() {
        let cfg = base().with_loads(&[0.1, 0.2, 0.3]).unwrap();
        let cfg = validate_config(cfg).unwrap();
        let loads = cfg.loads();
        assert!((loads[0] - 0.1).abs() < 1e-12);
        assert!((loads[2] - 0.3).abs() < 1e-12);
        // 0.1 of 1 Gb/s with 8000 ns packets is 12500 packets/s
        assert!((cfg.onus[0].arrival_rate - 12_500.0).abs() < 1e-6);
    }

    #[test]
    fn parses_flat_config_with_overrides() {
        let text = "\
# test
N = 3
L = 2
scheduler_mode = gate_single_cycle
onu_delays = 10us, 20us, 30us
d_max = 16000
onu.2.d_max = unbounded
onu.3.allowed_wavelengths = 2
total_load = 0.6
";
        let cfg = NetworkConfig::from_text(text).unwrap();
        assert_eq!(cfg.n(), 3);
        assert_eq!(cfg.onus[0].d_max, GrantCap::Bounded(SimTime::from_nanos(16_000)));
        assert_eq!(cfg.onus[1].d_max, GrantCap::Unbounded);
        assert_eq!(cfg.onus[2].allowed_wavelengths, [2].into());
        assert_eq!(cfg.onus[2].transmitter_count, 1);
        assert_eq!(cfg.onus[0].transmitter_count, 2);
        let v = validate_config(cfg).unwrap();
        assert!((v.total_load() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(matches!(
            NetworkConfig::from_text("N = 2\nfoo = 1\n"),
            Err(ConfigError::UnknownKey(k)) if k == "foo"
        ));
        assert!(matches!(
            NetworkConfig::from_text("N = 2\nonu.1.speed = 1\n"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(NetworkConfig::from_text("N = 2\nonu.7.delta = 1us\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = base().with_loads(&[0.1, 0.25, 0.05]).unwrap();
        cfg.onus[1].d_max = GrantCap::Bounded(SimTime::from_nanos(16_000));
        cfg.scenario = "rt".into();
        let back = NetworkConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }
}
