use std::collections::BTreeSet;

use crate::config::{GrantCap, GrantMode, OnuId, SchedulerMode, ValidConfig, WavelengthId};
use crate::error::SchedulerError;
use crate::model::{GateMessage, ReportMessage};
use crate::time::SimTime;

use super::{grant_size, next_available_wavelength, skip_cycles, start_time};

/// Last grant placed on a wavelength. `f_lambda` is when that
/// transmission and its REPORT slot finish at the OLT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WavelengthRecord {
    pub g_lambda: SimTime,
    pub d_lambda: SimTime,
    pub f_lambda: SimTime,
    pub onu: Option<OnuId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SkipState {
    pub consecutive_void: u32,
    pub remaining_skips: u32,
}

/// One periodic polling cycle. Per-wavelength and partial-sharing modes
/// run one per wavelength, pinned to it; the other GATE-driven modes run a
/// single cycle that picks a wavelength per visit.
#[derive(Clone, Debug)]
pub struct CycleCursor {
    pub order: Vec<OnuId>,
    pub pos: usize,
    pub wavelength: Option<WavelengthId>,
    pub last_epoch: SimTime,
    /// Completed passes over `order`.
    pub rotations: u64,
    visits: Vec<u64>,
    planned: Option<Planned>,
}

#[derive(Clone, Copy, Debug)]
struct Planned {
    onu: OnuId,
    epoch: SimTime,
    wavelength: WavelengthId,
}

#[derive(Clone, Debug)]
struct OnuParams {
    delta: SimTime,
    d_max: GrantCap,
    allowed: BTreeSet<WavelengthId>,
    limited: bool,
}

/// Everything the OLT knows and decides.
#[derive(Clone, Debug)]
pub struct OltSchedulerState {
    mode: SchedulerMode,
    grant_mode: GrantMode,
    wire: SimTime,
    delta_r: SimTime,
    delta_g: SimTime,
    delta_o: SimTime,
    skipping: bool,
    onus: Vec<OnuParams>,
    residual: Vec<SimTime>,
    wavelength_last: Vec<WavelengthRecord>,
    cycles: Vec<CycleCursor>,
    onu_free: Vec<Vec<SimTime>>,
    skip: Vec<SkipState>,
    uplink_horizon: Vec<SimTime>,
    rd_order: Vec<OnuId>,
    rd_pos: usize,
    rd_ready: Vec<bool>,
    rd_visits: Vec<u64>,
    reported_total: Vec<SimTime>,
    granted_total: Vec<SimTime>,
    deferrals: u64,
    deferred_time: SimTime,
}

impl OltSchedulerState {
    /// Cold state: nothing reported, every cycle about to start at time 0,
    /// and (REPORT-driven) every ONU owed an initial zero grant.
    pub fn new(cfg: &ValidConfig) -> Self {
        let n = cfg.n();
        let l = cfg.wavelengths;
        let order = cfg.cycle_order();
        let cursor = |order: Vec<OnuId>, wavelength| CycleCursor {
            order,
            pos: 0,
            wavelength,
            last_epoch: SimTime::ZERO,
            rotations: 0,
            visits: vec![0; n + 1],
            planned: None,
        };
        let cycles = match cfg.scheduler_mode {
            SchedulerMode::GateSingle | SchedulerMode::GateSingleCycle => vec![cursor(order.clone(), None)],
            SchedulerMode::GatePerWavelength => (1..=l).map(|w| cursor(order.clone(), Some(w))).collect(),
            SchedulerMode::GatePartialSharing => (1..=l)
                .map(|w| {
                    let sub = order
                        .iter()
                        .copied()
                        .filter(|&i| cfg.onu(i).allowed_wavelengths.contains(&w))
                        .collect();
                    cursor(sub, Some(w))
                })
                .filter(|c| !c.order.is_empty())
                .collect(),
            SchedulerMode::ReportDriven => Vec::new(),
        };
        let first_free = cfg.delta_g + cfg.delta_o();
        OltSchedulerState {
            mode: cfg.scheduler_mode,
            grant_mode: cfg.grant_mode,
            wire: cfg.packet_wire_time(),
            delta_r: cfg.delta_r,
            delta_g: cfg.delta_g,
            delta_o: cfg.delta_o(),
            skipping: cfg.skipping,
            onus: cfg
                .onus
                .iter()
                .map(|o| OnuParams {
                    delta: o.delta,
                    d_max: o.d_max,
                    allowed: o.allowed_wavelengths.clone(),
                    limited: o.is_transmitter_limited(),
                })
                .collect(),
            residual: vec![SimTime::ZERO; n],
            wavelength_last: vec![
                WavelengthRecord {
                    g_lambda: SimTime::ZERO,
                    d_lambda: SimTime::ZERO,
                    f_lambda: first_free,
                    onu: None,
                };
                l
            ],
            cycles,
            onu_free: cfg
                .onus
                .iter()
                .map(|o| vec![SimTime::ZERO; o.transmitter_count])
                .collect(),
            skip: vec![SkipState::default(); n],
            uplink_horizon: vec![SimTime::ZERO; l],
            rd_order: order,
            rd_pos: 0,
            rd_ready: vec![cfg.scheduler_mode == SchedulerMode::ReportDriven; n],
            rd_visits: vec![0; n],
            reported_total: vec![SimTime::ZERO; n],
            granted_total: vec![SimTime::ZERO; n],
            deferrals: 0,
            deferred_time: SimTime::ZERO,
        }
    }

    pub fn mode(&self) -> SchedulerMode {
        self.mode
    }

    /// Number of independent polling cycles (0 for REPORT-driven).
    pub fn instances(&self) -> usize {
        self.cycles.len()
    }

    pub fn cursor(&self, instance: usize) -> &CycleCursor {
        &self.cycles[instance]
    }

    pub fn residual(&self, onu: OnuId) -> SimTime {
        self.residual[onu - 1]
    }

    pub fn wavelength_last(&self, wavelength: WavelengthId) -> &WavelengthRecord {
        &self.wavelength_last[wavelength - 1]
    }

    pub fn uplink_horizon(&self, wavelength: WavelengthId) -> SimTime {
        self.uplink_horizon[wavelength - 1]
    }

    pub fn skip_state(&self, onu: OnuId) -> SkipState {
        self.skip[onu - 1]
    }

    pub fn reported_total(&self, onu: OnuId) -> SimTime {
        self.reported_total[onu - 1]
    }

    pub fn granted_total(&self, onu: OnuId) -> SimTime {
        self.granted_total[onu - 1]
    }

    /// Visits whose start was pushed back by a busy transmitter, and the
    /// total time lost that way.
    pub fn deferrals(&self) -> (u64, SimTime) {
        (self.deferrals, self.deferred_time)
    }

    /// Credits a REPORT that has just reached the OLT.
    pub fn apply_report(&mut self, report: &ReportMessage) {
        let k = report.onu - 1;
        self.residual[k] += report.reported_work;
        self.reported_total[k] += report.reported_work;
        if self.skipping {
            let s = &mut self.skip[k];
            if report.reported_work.is_zero() {
                s.consecutive_void = s.consecutive_void.saturating_add(1);
            } else {
                *s = SkipState::default();
            }
        }
    }

    /// Cycles ONU `onu` sits out after its next visit.
    pub fn maybe_skip(&self, onu: OnuId) -> u32 {
        if self.skipping {
            skip_cycles(self.skip[onu - 1].consecutive_void)
        } else {
            0
        }
    }

    /// Chooses the next visit of cycle `instance`: the ONU, its wavelength
    /// and GATE epoch. The grant is fixed later by [`issue`](Self::issue),
    /// at the epoch, from the backlog known then.
    pub fn plan(&mut self, instance: usize) -> SimTime {
        let onu = self.advance(instance);
        let cur = &self.cycles[instance];
        let wavelength = match cur.wavelength {
            Some(w) => w,
            None => {
                let finish: Vec<SimTime> = self.wavelength_last.iter().map(|r| r.f_lambda).collect();
                next_available_wavelength(&finish, &self.onus[onu - 1].allowed)
            }
        };
        let lead = self.delta_g + self.delta_o;
        // the wavelength is free for this visit's first bit at f_λ; the
        // clamp keeps epochs of one cycle non-decreasing
        let epoch = self.wavelength_last[wavelength - 1]
            .f_lambda
            .saturating_sub(lead)
            .max(cur.last_epoch);
        self.cycles[instance].planned = Some(Planned {
            onu,
            epoch,
            wavelength,
        });
        epoch
    }

    /// Epoch of the visit planned for `instance`, if any.
    pub fn planned_epoch(&self, instance: usize) -> Option<SimTime> {
        self.cycles[instance].planned.map(|p| p.epoch)
    }

    /// Turns the planned visit into a GATE and debits the grant.
    pub fn issue(&mut self, instance: usize) -> GateMessage {
        let Planned {
            onu,
            epoch,
            wavelength,
        } = self.cycles[instance]
            .planned
            .take()
            .expect("plan() precedes issue()");
        let k = onu - 1;
        let p = &self.onus[k];
        let grant = grant_size(self.residual[k], p.d_max, self.grant_mode, self.wire);
        self.residual[k] -= grant;
        self.granted_total[k] += grant;
        let mut start = start_time(epoch, self.delta_g, self.delta_o, p.delta);
        if p.limited {
            let slots = &mut self.onu_free[k];
            let slot = (0..slots.len()).min_by_key(|&j| (slots[j], j)).expect("t ≥ 1");
            if slots[slot] > start {
                self.deferrals += 1;
                self.deferred_time += slots[slot] - start;
                start = slots[slot];
            }
            slots[slot] = start + grant + self.delta_r;
        }
        self.wavelength_last[wavelength - 1] = WavelengthRecord {
            g_lambda: epoch,
            d_lambda: grant,
            f_lambda: start + p.delta + grant + self.delta_r,
            onu: Some(onu),
        };
        let cur = &mut self.cycles[instance];
        cur.last_epoch = epoch;
        cur.visits[onu] += 1;
        if self.skipping && !self.residual[k].is_zero() {
            self.skip[k].remaining_skips = 0;
        } else if self.skipping {
            self.skip[k].remaining_skips = skip_cycles(self.skip[k].consecutive_void);
        }
        GateMessage {
            onu,
            epoch,
            start,
            grant,
            wavelength,
            cycle_index: cur.visits[onu],
        }
    }

    // Moves the cycle pointer to the next ONU to visit, passing over ONUs
    // in a skip run. Each pass-over consumes one skip cycle, so the loop
    // terminates after at most MAX_SKIP_CYCLES rotations.
    fn advance(&mut self, instance: usize) -> OnuId {
        loop {
            let cur = &mut self.cycles[instance];
            let onu = cur.order[cur.pos];
            cur.pos += 1;
            if cur.pos == cur.order.len() {
                cur.pos = 0;
                cur.rotations += 1;
            }
            let s = &mut self.skip[onu - 1];
            if self.skipping && s.remaining_skips > 0 && self.residual[onu - 1].is_zero() {
                s.remaining_skips -= 1;
                continue;
            }
            return onu;
        }
    }

    fn require(&self, ok: bool) -> Result<(), SchedulerError> {
        if ok {
            Ok(())
        } else {
            Err(SchedulerError::WrongMode {
                mode: self.mode.to_string(),
            })
        }
    }

    /// Next GATE of the single-wavelength cycle.
    pub fn next_gate_single(&mut self) -> Result<GateMessage, SchedulerError> {
        self.require(self.mode == SchedulerMode::GateSingle)?;
        self.plan(0);
        Ok(self.issue(0))
    }

    /// Next GATE of wavelength `wavelength`'s own cycle.
    pub fn next_gate_per_wavelength(&mut self, wavelength: WavelengthId) -> Result<GateMessage, SchedulerError> {
        self.require(self.mode == SchedulerMode::GatePerWavelength)?;
        let l = self.wavelength_last.len();
        if let Some(i) = self.onus.iter().position(|p| p.allowed.len() != l) {
            return Err(SchedulerError::NotFullAvailability { onu: i + 1 });
        }
        let inst = self.wavelength_instance(wavelength)?;
        self.plan(inst);
        Ok(self.issue(inst))
    }

    /// Next GATE of the global cycle, placed on the next available wavelength.
    pub fn next_gate_single_cycle(&mut self) -> Result<GateMessage, SchedulerError> {
        self.require(self.mode == SchedulerMode::GateSingleCycle)?;
        self.plan(0);
        Ok(self.issue(0))
    }

    /// Next GATE of wavelength `wavelength`'s cycle over the ONUs that can use it.
    pub fn next_gate_partial_sharing(&mut self, wavelength: WavelengthId) -> Result<GateMessage, SchedulerError> {
        self.require(self.mode == SchedulerMode::GatePartialSharing)?;
        let inst = self.wavelength_instance(wavelength)?;
        self.plan(inst);
        Ok(self.issue(inst))
    }

    fn wavelength_instance(&self, wavelength: WavelengthId) -> Result<usize, SchedulerError> {
        if wavelength == 0 || wavelength > self.wavelength_last.len() {
            return Err(SchedulerError::NoSuchWavelength(wavelength));
        }
        self.cycles
            .iter()
            .position(|c| c.wavelength == Some(wavelength))
            .ok_or(SchedulerError::IdleWavelength(wavelength))
    }

    /// REPORT-driven: marks `onu` as waiting for its next grant.
    pub fn mark_ready(&mut self, onu: OnuId) {
        self.rd_ready[onu - 1] = true;
    }

    /// REPORT-driven: the ONU whose turn it is in the polling table, if it
    /// is waiting; advances the table pointer.
    pub fn take_next_ready(&mut self) -> Option<OnuId> {
        let onu = self.rd_order[self.rd_pos];
        if !self.rd_ready[onu - 1] {
            return None;
        }
        self.rd_ready[onu - 1] = false;
        self.rd_pos = (self.rd_pos + 1) % self.rd_order.len();
        Some(onu)
    }

    /// REPORT-driven GATE for `onu`, emitted at `emission` and delayed
    /// `gate_delay` on the downlink. The transmission is fitted behind the
    /// uplink horizon of the allowed wavelength where it can start first.
    pub fn report_driven_grant(&mut self, onu: OnuId, emission: SimTime, gate_delay: SimTime) -> GateMessage {
        let k = onu - 1;
        let p = &self.onus[k];
        let grant = grant_size(self.residual[k], p.d_max, self.grant_mode, self.wire);
        self.residual[k] -= grant;
        self.granted_total[k] += grant;
        let earliest = emission + gate_delay + self.delta_g + p.delta;
        let (start, wavelength) = p
            .allowed
            .iter()
            .map(|&w| (self.uplink_horizon[w - 1].saturating_sub(p.delta).max(earliest), w))
            .min()
            .expect("allowed wavelength set is nonempty");
        let finish = start + p.delta + grant + self.delta_r;
        self.uplink_horizon[wavelength - 1] = finish;
        self.wavelength_last[wavelength - 1] = WavelengthRecord {
            g_lambda: emission,
            d_lambda: grant,
            f_lambda: finish,
            onu: Some(onu),
        };
        self.rd_visits[k] += 1;
        GateMessage {
            onu,
            epoch: emission,
            start,
            grant,
            wavelength,
            cycle_index: self.rd_visits[k],
        }
    }

    /// Test and scenario hook: pretend the uplink of `wavelength` is busy until `at`.
    pub fn set_uplink_horizon(&mut self, wavelength: WavelengthId, at: SimTime) {
        self.uplink_horizon[wavelength - 1] = at;
    }

    /// Test and scenario hook: overwrite the finish time of `wavelength`.
    pub fn set_finish(&mut self, wavelength: WavelengthId, at: SimTime) {
        self.wavelength_last[wavelength - 1].f_lambda = at;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, NetworkConfig};

    fn us(x: u64) -> SimTime {
        SimTime::from_micros(x)
    }

    fn ns(x: u64) -> SimTime {
        SimTime::from_nanos(x)
    }

    fn cfg(n: usize, l: usize, mode: SchedulerMode) -> ValidConfig {
        let delays = vec![us(300); n];
        validate_config(NetworkConfig::new(&delays, l).with_mode(mode)).unwrap()
    }

    fn report(onu: OnuId, work: u64) -> ReportMessage {
        ReportMessage {
            onu,
            emission_time: SimTime::ZERO,
            reported_work: ns(work),
            piggybacked: true,
        }
    }

    #[test]
    fn reports_accumulate_and_grants_debit() {
        let c = cfg(1, 1, SchedulerMode::GateSingle);
        let mut st = OltSchedulerState::new(&c);
        st.apply_report(&report(1, 8000));
        assert_eq!(st.residual(1), ns(8000));
        let g = st.next_gate_single().unwrap();
        assert_eq!(g.grant, ns(8000));
        assert_eq!(st.residual(1), SimTime::ZERO);
    }

    #[test]
    fn cold_start_chains_lone_reports() {
        let c = cfg(2, 1, SchedulerMode::GateSingle);
        let mut st = OltSchedulerState::new(&c);
        let g1 = st.next_gate_single().unwrap();
        let g2 = st.next_gate_single().unwrap();
        assert_eq!((g1.onu, g1.epoch, g1.grant), (1, SimTime::ZERO, SimTime::ZERO));
        assert_eq!((g2.onu, g2.epoch), (2, c.delta_r));
        // s = g + Δ_G + Δ_O − δ, with Δ_O = 2·300 + 12 us
        assert_eq!(g1.start, ns(2120) + us(612) - us(300));
    }

    #[test]
    fn epochs_follow_grant_recursion() {
        let c = cfg(3, 1, SchedulerMode::GateSingle);
        let mut st = OltSchedulerState::new(&c);
        for i in 1..=3 {
            st.apply_report(&report(i, 8000 * i as u64));
        }
        let mut prev: Option<GateMessage> = None;
        for _ in 0..3 {
            let g = st.next_gate_single().unwrap();
            if let Some(p) = prev {
                assert_eq!(g.epoch, p.epoch + p.grant + c.delta_r);
                // occupancy intervals tile the wavelength at the OLT
                assert_eq!(g.start + c.onu(g.onu).delta, p.start + c.onu(p.onu).delta + p.grant + c.delta_r);
            }
            prev = Some(g);
        }
    }

    #[test]
    fn shared_residual_across_wavelength_cycles() {
        let c = validate_config(
            NetworkConfig::new(&[us(100)], 2)
                .with_mode(SchedulerMode::GatePerWavelength)
                .with_d_max(GrantCap::Bounded(ns(16_000))),
        )
        .unwrap();
        let mut st = OltSchedulerState::new(&c);
        st.apply_report(&report(1, 20_000));
        assert_eq!(st.next_gate_per_wavelength(1).unwrap().grant, ns(16_000));
        assert_eq!(st.next_gate_per_wavelength(2).unwrap().grant, ns(4000));
    }

    #[test]
    fn per_wavelength_requires_full_availability() {
        let mut nc = NetworkConfig::new(&[us(100), us(100)], 2).with_mode(SchedulerMode::GateSingleCycle);
        nc.onus[1].allowed_wavelengths = [2].into();
        nc.onus[1].transmitter_count = 1;
        let c = validate_config(nc).unwrap();
        let mut st = OltSchedulerState::new(&c);
        st.mode = SchedulerMode::GatePerWavelength;
        assert_eq!(
            st.next_gate_per_wavelength(1),
            Err(SchedulerError::NotFullAvailability { onu: 2 })
        );
    }

    #[test]
    fn wrong_mode_is_rejected() {
        let c = cfg(2, 1, SchedulerMode::GateSingle);
        let mut st = OltSchedulerState::new(&c);
        assert!(matches!(st.next_gate_single_cycle(), Err(SchedulerError::WrongMode { .. })));
    }

    #[test]
    fn single_cycle_uses_next_available_wavelength() {
        let c = cfg(1, 3, SchedulerMode::GateSingleCycle);
        let mut st = OltSchedulerState::new(&c);
        let lead = c.delta_g + c.delta_o();
        for (w, f) in [(1, 220), (2, 180), (3, 200)] {
            st.set_finish(w, us(f) + lead);
        }
        let g = st.next_gate_single_cycle().unwrap();
        assert_eq!(g.wavelength, 2);
        assert_eq!(g.epoch, us(180));
    }

    #[test]
    fn restricted_availability_picks_allowed_wavelength() {
        let mut nc = NetworkConfig::new(&[us(100)], 3).with_mode(SchedulerMode::GateSingleCycle);
        nc.onus[0].allowed_wavelengths = [1, 3].into();
        nc.onus[0].transmitter_count = 2;
        let c = validate_config(nc).unwrap();
        let mut st = OltSchedulerState::new(&c);
        let lead = c.delta_g + c.delta_o();
        for (w, f) in [(1, 220), (2, 180), (3, 200)] {
            st.set_finish(w, us(f) + lead);
        }
        assert_eq!(st.next_gate_single_cycle().unwrap().wavelength, 3);
    }

    #[test]
    fn single_cycle_epoch_follows_wavelength_record() {
        // previous visit on the wavelength at 100 us with a 30 us grant
        let c = cfg(2, 1, SchedulerMode::GateSingleCycle);
        let mut st = OltSchedulerState::new(&c);
        st.apply_report(&report(1, 30_000));
        st.cycles[0].last_epoch = us(100);
        st.set_finish(1, us(100) + c.delta_g + c.delta_o());
        let first = st.next_gate_single_cycle().unwrap();
        assert_eq!((first.epoch, first.grant), (us(100), us(30)));
        let second = st.next_gate_single_cycle().unwrap();
        assert_eq!(second.epoch, ns(132_120));
    }

    #[test]
    fn transmitter_limit_defers_overlapping_visits() {
        let c = validate_config(
            NetworkConfig::new(&[us(100)], 2)
                .with_mode(SchedulerMode::GateSingleCycle)
                .with_transmitters(1),
        )
        .unwrap();
        let mut st = OltSchedulerState::new(&c);
        st.apply_report(&report(1, 80_000));
        let c1 = st.next_gate_single_cycle().unwrap();
        st.apply_report(&report(1, 80_000));
        let c2 = st.next_gate_single_cycle().unwrap();
        assert_ne!(c1.wavelength, c2.wavelength);
        assert_eq!(c2.start, c1.start + c1.grant + c.delta_r);
        assert_eq!(st.deferrals().0, 1);
    }

    #[test]
    fn report_driven_start_rule() {
        let c = validate_config(
            NetworkConfig::new(&[us(100)], 1).with_mode(SchedulerMode::ReportDriven),
        )
        .unwrap();
        let mut st = OltSchedulerState::new(&c);
        st.set_uplink_horizon(1, us(500));
        let g = st.report_driven_grant(1, us(300), SimTime::ZERO);
        assert_eq!(g.start, ns(402_120));
        // requested 0: lone REPORT, horizon moves by one REPORT slot past s + δ
        assert_eq!(g.grant, SimTime::ZERO);
        assert_eq!(st.uplink_horizon(1), ns(502_120) + c.delta_r);

        st.set_uplink_horizon(1, us(900));
        let g = st.report_driven_grant(1, us(300), SimTime::ZERO);
        assert_eq!(g.start, us(800));
    }

    #[test]
    fn report_driven_polls_in_table_order() {
        let c = validate_config(
            NetworkConfig::new(&[us(100), us(50)], 1).with_mode(SchedulerMode::ReportDriven),
        )
        .unwrap();
        let mut st = OltSchedulerState::new(&c);
        assert_eq!(st.take_next_ready(), Some(1));
        assert_eq!(st.take_next_ready(), Some(2));
        assert_eq!(st.take_next_ready(), None);
        st.mark_ready(2);
        assert_eq!(st.take_next_ready(), None);
        st.mark_ready(1);
        assert_eq!(st.take_next_ready(), Some(1));
        assert_eq!(st.take_next_ready(), Some(2));
    }

    fn skipping_cfg(n: usize) -> ValidConfig {
        let mut nc = NetworkConfig::new(&vec![us(100); n], 1);
        nc.skipping = true;
        validate_config(nc).unwrap()
    }

    #[test]
    fn void_reports_grow_skip_and_non_void_resets() {
        let c = skipping_cfg(2);
        let mut st = OltSchedulerState::new(&c);
        st.apply_report(&report(1, 0));
        assert_eq!(st.skip_state(1).consecutive_void, 1);
        assert_eq!(st.maybe_skip(1), 1);
        st.apply_report(&report(1, 0));
        assert_eq!(st.maybe_skip(1), 2);
        st.apply_report(&report(1, 0));
        st.apply_report(&report(1, 0));
        assert_eq!(st.maybe_skip(1), 8);
        st.apply_report(&report(1, 8000));
        assert_eq!(st.skip_state(1).consecutive_void, 0);
        assert_eq!(st.maybe_skip(1), 0);
    }

    #[test]
    fn idle_onu_still_visited_every_16_cycles() {
        let c = skipping_cfg(3);
        let mut st = OltSchedulerState::new(&c);
        let mut visits_of_1 = Vec::new();
        for _ in 0..400 {
            let g = st.next_gate_single().unwrap();
            // every visit answers with a void REPORT
            st.apply_report(&report(g.onu, 0));
            if g.onu == 1 {
                visits_of_1.push(st.cursor(0).rotations);
            }
        }
        assert!(visits_of_1.len() > 10);
        for w in visits_of_1.windows(2) {
            assert!(w[1] - w[0] <= 16, "gap of {} cycles", w[1] - w[0]);
        }
    }
}
