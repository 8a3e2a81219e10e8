use std::fmt;

use thiserror::Error;

use crate::time::SimTime;

/// A single violated configuration constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse {what} from {value:?}")]
    Parse { what: String, value: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("{size_bytes} bytes at {line_rate} b/s is not a whole number of nanoseconds")]
    NonIntegralWireTime { size_bytes: u64, line_rate: u64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("event scheduled at {at} is in the past (clock {clock})")]
    Causality { at: SimTime, clock: SimTime },
    #[error("handler failed on event `{event}`: {source}")]
    Handler {
        event: String,
        #[source]
        source: Box<SimError>,
    },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("GATE for ONU {onu} arrives at {arrival} after its start time {start}")]
    Infeasible {
        onu: usize,
        arrival: SimTime,
        start: SimTime,
    },
    #[error("collision on wavelength {wavelength}: transmission at {start} overlaps the previous one ending at {prev_end}")]
    Collision {
        wavelength: usize,
        start: SimTime,
        prev_end: SimTime,
    },
    #[error("ONU {onu}: grant {grant} exceeds drainable work {available}")]
    GrantExceedsQueue {
        onu: usize,
        grant: SimTime,
        available: SimTime,
    },
    #[error("ONU {onu}: packet-mode grant {grant} does not end on a packet boundary")]
    GrantSplitsPacket { onu: usize, grant: SimTime },
    #[error("negative delay sample (arrival {arrival}, departure {departure})")]
    NegativeDelay { arrival: SimTime, departure: SimTime },
}

#[derive(Debug, Error, PartialEq)]
pub enum SchedulerError {
    #[error("scheduler mode {mode} cannot issue this kind of GATE")]
    WrongMode { mode: String },
    #[error("ONU {onu} lacks full wavelength availability, required by per-wavelength scheduling")]
    NotFullAvailability { onu: usize },
    #[error("wavelength {0} is out of range")]
    NoSuchWavelength(usize),
    #[error("wavelength {0} serves no ONU")]
    IdleWavelength(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("total load {rho} is not below the {limit} wavelength(s) available; the mean cycle is undefined")]
    Overloaded { rho: f64, limit: f64 },
    #[error("local stability partition needs S_j for ONU {onu}, whose grant cap is unbounded")]
    UnboundedSwitchover { onu: usize },
    #[error("{n} ONUs is too many for subset enumeration (limit {limit})")]
    TooManyOnus { n: usize, limit: usize },
    #[error("example 2 expects non-increasing loads, got {0:?}")]
    UnsortedLoads(Vec<f64>),
    #[error("example {0} takes {1} loads")]
    WrongArity(u8, usize),
    #[error("no such toy example {0}")]
    NoSuchExample(u8),
    #[error("capacity search could not bracket the stability boundary: {0}")]
    NoBracket(String),
    #[error("load vectors have mismatched lengths")]
    LengthMismatch,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("too few backlog samples for a verdict: {got} (need at least {need})")]
    TooFewSamples { got: usize, need: usize },
    #[error("negative delay sample (arrival {arrival}, departure {departure})")]
    NegativeDelay { arrival: SimTime, departure: SimTime },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
