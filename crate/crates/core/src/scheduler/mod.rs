//! OLT-side dynamic bandwidth allocation and ONU-side grant compliance.
//!
//! GATE-driven modes run one or more periodic polling cycles. Each visit's
//! GATE epoch and transmission start follow
//!
//! ```text
//! g_i = g_prev + d_prev + Δ_R
//! s_i = g_i + Δ_G + Δ_O − δ_i
//! ```
//!
//! so that the next transmission reaches the OLT exactly one REPORT slot
//! after the previous one ends: the wavelength never idles while ONUs are
//! backlogged. With several wavelengths the same recursion runs either once
//! per wavelength or in one global cycle that places each visit on the
//! wavelength that frees up first.
//!
//! The REPORT-driven baseline instead answers each REPORT with one GATE,
//! in polling-table order, and fits the start time behind the current
//! uplink horizon.

mod olt;
mod onu;

pub use olt::{CycleCursor, OltSchedulerState, SkipState, WavelengthRecord};
pub use onu::{onu_serve_grant, OnuQueueState, Transmission};

use std::collections::BTreeSet;

use crate::config::{GrantCap, GrantMode, WavelengthId};
use crate::time::SimTime;

/// Longest skip run after repeated void REPORTs, in cycles.
pub const MAX_SKIP_CYCLES: u32 = 8;
/// A skipped ONU is visited at least once in every window of this many cycles.
pub const MIN_VISIT_WINDOW: u32 = 16;

/// Limited-gated grant: `min(residual, d_max)`, rounded down to whole
/// packets in packet mode.
pub fn grant_size(residual: SimTime, d_max: GrantCap, mode: GrantMode, packet_wire_time: SimTime) -> SimTime {
    let grant = d_max.limit(residual);
    match mode {
        GrantMode::Fluid => grant,
        GrantMode::Packet => grant.floor_to(packet_wire_time),
    }
}

/// GATE epoch of the visit following one at `prev_epoch` with grant `prev_grant`.
pub fn epoch_after(prev_epoch: SimTime, prev_grant: SimTime, delta_r: SimTime) -> SimTime {
    prev_epoch + prev_grant + delta_r
}

/// Transmission start at the ONU for a GATE with the given epoch.
pub fn start_time(epoch: SimTime, delta_g: SimTime, delta_o: SimTime, delta_i: SimTime) -> SimTime {
    epoch + delta_g + delta_o - delta_i
}

/// Feasibility: the GATE, emitted up to `max_gate_delay` late, reaches the
/// ONU before its start time.
pub fn is_feasible(epoch: SimTime, start: SimTime, delta_g: SimTime, max_gate_delay: SimTime, delta_i: SimTime) -> bool {
    start
        .checked_sub(delta_i)
        .is_some_and(|s| epoch + delta_g + max_gate_delay <= s)
}

/// The allowed wavelength whose last transmission finishes first at the
/// OLT; ties go to the lowest wavelength id. `finish[k]` belongs to
/// wavelength `k + 1`.
pub fn next_available_wavelength(finish: &[SimTime], allowed: &BTreeSet<WavelengthId>) -> WavelengthId {
    allowed
        .iter()
        .copied()
        .min_by_key(|&w| (finish[w - 1], w))
        .expect("allowed wavelength set is nonempty")
}

/// Cycles to skip after `consecutive_void` void REPORTs in a row.
pub fn skip_cycles(consecutive_void: u32) -> u32 {
    if consecutive_void == 0 {
        0
    } else {
        1u32.checked_shl(consecutive_void - 1)
            .unwrap_or(u32::MAX)
            .min(MAX_SKIP_CYCLES)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns(x: u64) -> SimTime {
        SimTime::from_nanos(x)
    }

    fn us(x: u64) -> SimTime {
        SimTime::from_micros(x)
    }

    #[test]
    fn grant_is_min_of_residual_and_cap() {
        let cap = GrantCap::Bounded(ns(16_000));
        let w = ns(8000);
        assert_eq!(grant_size(ns(5000), cap, GrantMode::Fluid, w), ns(5000));
        assert_eq!(grant_size(ns(20_000), cap, GrantMode::Fluid, w), ns(16_000));
        assert_eq!(grant_size(ns(0), cap, GrantMode::Fluid, w), ns(0));
        assert_eq!(grant_size(ns(20_000), GrantCap::Unbounded, GrantMode::Fluid, w), ns(20_000));
    }

    #[test]
    fn packet_mode_rounds_down_to_whole_packets() {
        let cap = GrantCap::Bounded(ns(24_000));
        assert_eq!(grant_size(ns(20_000), cap, GrantMode::Packet, ns(8000)), ns(16_000));
        assert_eq!(grant_size(ns(40_000), cap, GrantMode::Packet, ns(8000)), ns(24_000));
    }

    #[test]
    fn epoch_recursion_example() {
        // 100 us + 16 us + 2.12 us
        assert_eq!(epoch_after(us(100), us(16), ns(2120)), ns(118_120));
        // next-available variant: 100 us + 30 us + 2.12 us
        assert_eq!(epoch_after(us(100), us(30), ns(2120)), ns(132_120));
    }

    #[test]
    fn start_time_example_is_feasible() {
        let g = ns(118_120);
        let s = start_time(g, ns(2120), us(1012), us(300));
        assert_eq!(s, ns(832_240));
        // s − δ = 532.24 us ≥ g + Δ_G + τ = 132.24 us
        assert!(is_feasible(g, s, ns(2120), us(12), us(300)));
        assert!(!is_feasible(g, s, ns(2120), us(500), us(300)));
    }

    #[test]
    fn next_available_picks_earliest_finish() {
        let f = [us(220), us(180), us(200)];
        assert_eq!(next_available_wavelength(&f, &[1, 2, 3].into()), 2);
        assert_eq!(next_available_wavelength(&f, &[1, 3].into()), 3);
        let tie = [us(5), us(5)];
        assert_eq!(next_available_wavelength(&tie, &[1, 2].into()), 1);
    }

    #[test]
    fn skip_lengths_double_up_to_cap() {
        assert_eq!(skip_cycles(0), 0);
        assert_eq!(skip_cycles(1), 1);
        assert_eq!(skip_cycles(2), 2);
        assert_eq!(skip_cycles(3), 4);
        assert_eq!(skip_cycles(4), 8);
        assert_eq!(skip_cycles(40), 8);
        const { assert!(MAX_SKIP_CYCLES < MIN_VISIT_WINDOW) };
    }
}
