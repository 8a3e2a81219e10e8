use std::collections::VecDeque;

use crate::config::{GrantMode, OnuId, WavelengthId};
use crate::error::SimError;
use crate::model::{GateMessage, Packet, ReportMessage};
use crate::time::SimTime;

#[derive(Clone, Debug)]
struct Queued {
    packet: Packet,
    remaining: SimTime,
    first_start: Option<SimTime>,
    last_end: SimTime,
}

/// One ONU's upstream FIFO and its REPORT bookkeeping.
#[derive(Clone, Debug)]
pub struct OnuQueueState {
    pub onu: OnuId,
    fifo: VecDeque<Queued>,
    workload: SimTime,
    // arrivals not yet covered by an emitted REPORT, in arrival order
    unreported: VecDeque<(SimTime, SimTime)>,
    unreported_work: SimTime,
    last_report: SimTime,
}

/// What one grant put on the fibre.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    pub onu: OnuId,
    pub wavelength: WavelengthId,
    pub start: SimTime,
    pub grant: SimTime,
    /// Packets whose last bit left in this grant, with departure set.
    pub departures: Vec<Packet>,
}

impl OnuQueueState {
    pub fn new(onu: OnuId) -> Self {
        OnuQueueState {
            onu,
            fifo: VecDeque::new(),
            workload: SimTime::ZERO,
            unreported: VecDeque::new(),
            unreported_work: SimTime::ZERO,
            last_report: SimTime::ZERO,
        }
    }

    /// Queued transmission time, including partly sent packets.
    pub fn workload(&self) -> SimTime {
        self.workload
    }

    pub fn unreported(&self) -> SimTime {
        self.unreported_work
    }

    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn push(&mut self, packet: Packet) {
        debug_assert!(self.unreported.back().is_none_or(|&(t, _)| t <= packet.arrival_time));
        self.workload += packet.wire_time;
        self.unreported.push_back((packet.arrival_time, packet.wire_time));
        self.unreported_work += packet.wire_time;
        self.fifo.push_back(Queued {
            remaining: packet.wire_time,
            packet,
            first_start: None,
            last_end: SimTime::ZERO,
        });
    }

    /// Sends exactly `gate.grant` of head-of-line work starting at
    /// `gate.start`. A packet's departure is the arrival of its last bit at
    /// the OLT, `delta` after it leaves the ONU.
    pub fn drain(&mut self, gate: &GateMessage, delta: SimTime, mode: GrantMode) -> Result<Transmission, SimError> {
        if gate.grant > self.workload {
            return Err(SimError::GrantExceedsQueue {
                onu: self.onu,
                grant: gate.grant,
                available: self.workload,
            });
        }
        let mut cursor = gate.start;
        let mut left = gate.grant;
        let mut departures = Vec::new();
        while !left.is_zero() {
            let head = self.fifo.front_mut().expect("workload covers the grant");
            let take = head.remaining.min(left);
            if mode == GrantMode::Packet && take < head.remaining {
                return Err(SimError::GrantSplitsPacket {
                    onu: self.onu,
                    grant: gate.grant,
                });
            }
            let first = *head.first_start.get_or_insert(cursor);
            cursor += take;
            left -= take;
            head.remaining -= take;
            head.last_end = head.last_end.max(cursor);
            if head.remaining.is_zero() {
                let q = self.fifo.pop_front().expect("head exists");
                // fragments sent in parallel on two wavelengths still need a
                // full wire time between first and last bit
                let leave = q.last_end.max(first + q.packet.wire_time);
                departures.push(Packet {
                    departure_time: Some(leave + delta),
                    ..q.packet
                });
            }
        }
        self.workload -= gate.grant;
        Ok(Transmission {
            onu: self.onu,
            wavelength: gate.wavelength,
            start: gate.start,
            grant: gate.grant,
            departures,
        })
    }

    /// REPORT leaving the ONU at `emission`: all arrivals strictly before
    /// that instant that no earlier REPORT covered.
    pub fn emit_report(&mut self, emission: SimTime, piggybacked: bool) -> ReportMessage {
        debug_assert!(emission >= self.last_report);
        self.last_report = emission;
        let mut work = SimTime::ZERO;
        while let Some(&(t, w)) = self.unreported.front() {
            if t >= emission {
                break;
            }
            work += w;
            self.unreported.pop_front();
        }
        self.unreported_work -= work;
        ReportMessage {
            onu: self.onu,
            emission_time: emission,
            reported_work: work,
            piggybacked,
        }
    }
}

/// Serves a GATE and builds the REPORT sent at `start + grant`. The queue
/// must already hold every arrival up to the REPORT emission.
pub fn onu_serve_grant(
    queue: &mut OnuQueueState,
    gate: &GateMessage,
    delta: SimTime,
    mode: GrantMode,
) -> Result<(Transmission, ReportMessage), SimError> {
    let tx = queue.drain(gate, delta, mode)?;
    let report = queue.emit_report(gate.report_emission(), !gate.grant.is_zero());
    Ok((tx, report))
}
