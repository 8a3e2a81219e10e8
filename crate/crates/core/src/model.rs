//! Control-plane records exchanged between the OLT and the ONUs.

use std::fmt;

use crate::config::{OnuId, WavelengthId};
use crate::time::SimTime;

/// A grant: ONU `onu` transmits for `grant` starting at `start` on
/// `wavelength`, then piggybacks a REPORT. `epoch` is the nominal GATE
/// emission time at the OLT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateMessage {
    pub onu: OnuId,
    pub epoch: SimTime,
    pub start: SimTime,
    pub grant: SimTime,
    pub wavelength: WavelengthId,
    /// Visit number of this ONU in its cycle instance, from 1.
    pub cycle_index: u64,
}

impl GateMessage {
    /// When the REPORT leaves the ONU: after the data, or at `start` for a lone REPORT.
    pub fn report_emission(&self) -> SimTime {
        self.start + self.grant
    }
}

impl fmt::Display for GateMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "onu={} n={} g={} s={} d={} wl={}",
            self.onu,
            self.cycle_index,
            self.epoch.as_nanos(),
            self.start.as_nanos(),
            self.grant.as_nanos(),
            self.wavelength
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReportMessage {
    pub onu: OnuId,
    pub emission_time: SimTime,
    /// Transmission time of the arrivals since the previous REPORT.
    pub reported_work: SimTime,
    /// False for a lone REPORT answering a zero grant.
    pub piggybacked: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packet {
    pub onu: OnuId,
    pub arrival_time: SimTime,
    pub wire_time: SimTime,
    /// Last bit received at the OLT.
    pub departure_time: Option<SimTime>,
}

impl Packet {
    pub fn new(onu: OnuId, arrival_time: SimTime, wire_time: SimTime) -> Self {
        Packet {
            onu,
            arrival_time,
            wire_time,
            departure_time: None,
        }
    }

    pub fn delay(&self) -> Option<SimTime> {
        self.departure_time.map(|d| d - self.arrival_time)
    }
}
