//! Upstream scheduling for single-wavelength and WDM Ethernet passive
//! optical networks.
//!
//! The crate has two halves that check each other:
//!
//! * [`analytics`] evaluates closed-form stability conditions, mean cycle
//!   times and capacities for GATE-driven limited-gated polling.
//! * [`sim`] is a deterministic discrete-event simulator of the OLT, the
//!   ONUs and their GATE/REPORT exchange, driven by seeded Poisson traffic.
//!
//! [`sweep`] runs grids of simulations with the matching predictions,
//! [`cli`] backs the `wdm-epon` binary, and
//! [`acceptance`] bundles the cross-checks between the two halves.

pub mod time;
pub mod error;
pub mod config;
pub mod model;
pub mod traffic;
pub mod engine;
pub mod scheduler;
pub mod analytics;
pub mod metrics;
pub mod sim;
pub mod sweep;
pub mod acceptance;
pub mod cli;

pub use config::{
    validate_config, wire_time, AvailabilityMap, GateJitter, GrantCap, GrantMode, NetworkConfig, OnuId,
    OnuProfile, SchedulerMode, ValidConfig, WavelengthId,
};
pub use error::{AnalyticsError, ConfigError, EngineError, MetricsError, SchedulerError, SimError};
pub use model::{GateMessage, Packet, ReportMessage};
pub use time::SimTime;
