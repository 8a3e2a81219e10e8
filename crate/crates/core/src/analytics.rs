//! Closed-form stability conditions, mean cycle times and capacities.
//!
//! Loads are fractions of one wavelength's line rate. Times come in as
//! [`SimTime`] and go out as `f64` nanoseconds, since means need not be
//! integral. A grant cap of [`GrantCap::Unbounded`] makes the `ρ_i/d_i`
//! term vanish (pure gated service).

use std::fmt;

use crate::config::{AvailabilityMap, GrantCap, OnuId, SchedulerMode, ValidConfig};
use crate::error::AnalyticsError;
use crate::time::SimTime;
use crate::traffic::{build_profile, ProfileKind};

/// Which condition a [`StabilityReport`] evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    /// `ρ + max ρ_i/d_i · S < 1`
    SingleWavelength,
    /// `ρ + max ρ_i/d_i · S < L`
    WdmFull,
    /// `Σ_{i∈O} ρ_i < |reachable(O)|` for every ONU subset `O`
    PartialSharing,
    /// WDM condition plus `ρ_i < t_i d_i / (d_i + Δ_R)` per ONU; necessary only
    TunableNecessary,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formula::SingleWavelength => "single-wavelength: rho + max(rho_i/d_i)*S < 1",
            Formula::WdmFull => "wdm full availability: rho + max(rho_i/d_i)*S < L",
            Formula::PartialSharing => "partial sharing: sum over every ONU subset < reachable wavelengths",
            Formula::TunableNecessary => {
                "tunable transmitters: necessary conditions (capacity approximation)"
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    /// Left-hand minus right-hand side of the binding condition; negative when stable.
    pub margin: f64,
    pub binding_onu: Option<OnuId>,
    pub formula: Formula,
    /// For subset conditions: the smallest violating subset, or the
    /// tightest subset when none violates.
    pub binding_subset: Option<Vec<OnuId>>,
}

impl StabilityReport {
    fn new(margin: f64, binding_onu: Option<OnuId>, formula: Formula) -> Self {
        StabilityReport {
            stable: margin < 0.0,
            margin,
            binding_onu,
            formula,
            binding_subset: None,
        }
    }
}

fn cap_ratio(rho: f64, cap: GrantCap) -> f64 {
    match cap {
        GrantCap::Bounded(d) => rho / d.as_nanos() as f64,
        GrantCap::Unbounded => 0.0,
    }
}

/// `(max_i ρ_i/d_i, argmax)`, ties to the lowest id. Ratios within a
/// relative 1e-12 count as tied, so rounding in load splits does not move
/// the argmax.
fn max_ratio(loads: &[f64], d_max: &[GrantCap]) -> (f64, Option<OnuId>) {
    assert_eq!(loads.len(), d_max.len(), "one grant cap per ONU");
    let mut best = (0.0, None);
    for (k, (&rho, &cap)) in loads.iter().zip(d_max).enumerate() {
        let r = cap_ratio(rho, cap);
        if best.1.is_none() || r > best.0 * (1.0 + 1e-12) {
            best = (r, Some(k + 1));
        }
    }
    best
}

fn switchover(n: usize, delta_r: SimTime) -> f64 {
    n as f64 * delta_r.as_nanos() as f64
}

/// Stability of GATE-driven limited-gated polling on one wavelength.
pub fn stability_single(loads: &[f64], d_max: &[GrantCap], delta_r: SimTime) -> StabilityReport {
    let mut r = stability_wdm_full(loads, d_max, delta_r, 1);
    r.formula = Formula::SingleWavelength;
    r
}

/// Stability with `L` fully available wavelengths, for both per-wavelength
/// cycles and the single next-available-wavelength cycle.
pub fn stability_wdm_full(loads: &[f64], d_max: &[GrantCap], delta_r: SimTime, wavelengths: usize) -> StabilityReport {
    let rho: f64 = loads.iter().sum();
    let (ratio, onu) = max_ratio(loads, d_max);
    let margin = rho + ratio * switchover(loads.len(), delta_r) - wavelengths as f64;
    StabilityReport::new(margin, onu, Formula::WdmFull)
}

/// Mean cycle `S/(1 − ρ)` on one wavelength, in ns.
pub fn mean_cycle_single(rho: f64, s: SimTime) -> Result<f64, AnalyticsError> {
    mean_cycle_wdm(rho, s, 1, CycleMode::SingleCycle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleMode {
    /// One cycle per wavelength: `LS/(L − ρ)`.
    PerWavelength,
    /// One cycle over all wavelengths: `S/(L − ρ)`.
    SingleCycle,
}

/// Mean cycle time in ns.
pub fn mean_cycle_wdm(rho: f64, s: SimTime, wavelengths: usize, mode: CycleMode) -> Result<f64, AnalyticsError> {
    let l = wavelengths as f64;
    if rho >= l {
        return Err(AnalyticsError::Overloaded { rho, limit: l });
    }
    let s = s.as_nanos() as f64;
    Ok(match mode {
        CycleMode::PerWavelength => l * s / (l - rho),
        CycleMode::SingleCycle => s / (l - rho),
    })
}

/// The alternative single-cycle form `S²/(L − ρ)` with `S` in μs, in μs².
/// Only for comparison against measurements.
pub fn mean_cycle_squared_form_us(rho: f64, s: SimTime, wavelengths: usize) -> f64 {
    let s_us = s.as_micros_f64();
    s_us * s_us / (wavelengths as f64 - rho)
}

/// Mean grant per visit `ρ_i S/(L − ρ)`, in ns.
pub fn mean_grant_per_cycle(rho_i: f64, rho: f64, s: SimTime, wavelengths: usize) -> Result<f64, AnalyticsError> {
    let l = wavelengths as f64;
    if rho >= l {
        return Err(AnalyticsError::Overloaded { rho, limit: l });
    }
    Ok(rho_i * s.as_nanos() as f64 / (l - rho))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalStabilityPartition {
    pub k: usize,
    /// Original ids of the ONUs that stay stable.
    pub stable_set: Vec<OnuId>,
    /// Total load of the stable ONUs.
    pub effective_load: f64,
    /// Per-cycle overhead seen by the stable ONUs, ns: REPORT slots plus
    /// the full grants of the unstable ONUs.
    pub effective_switchover: f64,
}

/// Splits the ONUs into a stable group and an overloaded group whose
/// queues grow but whose grants are capped.
///
/// ONUs are ranked by `ρ_i/d_i` (equivalently by load when the caps are
/// equal), and `k` is the largest `j` with `ρ̂_j + (ρ_j/d_j) S_j < 1`, where
/// `ρ̂_j` sums the first `j` loads and `S_j = N Δ_R + Σ_{i>j} d_i`.
pub fn local_stability_partition(
    loads: &[f64],
    d_max: &[GrantCap],
    delta_r: SimTime,
) -> Result<LocalStabilityPartition, AnalyticsError> {
    if loads.len() != d_max.len() {
        return Err(AnalyticsError::LengthMismatch);
    }
    let n = loads.len();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.sort_by(|&a, &b| {
        cap_ratio(loads[a], d_max[a])
            .total_cmp(&cap_ratio(loads[b], d_max[b]))
            .then(loads[a].total_cmp(&loads[b]))
            .then(a.cmp(&b))
    });
    let base = switchover(n, delta_r);
    let mut prefix = vec![0.0; n + 1];
    for (j, &i) in rank.iter().enumerate() {
        prefix[j + 1] = prefix[j] + loads[i];
    }
    let mut tail = 0.0;
    for j in (1..=n).rev() {
        let i = rank[j - 1];
        let s_j = base + tail;
        if prefix[j] + cap_ratio(loads[i], d_max[i]) * s_j < 1.0 {
            let mut stable_set: Vec<OnuId> = rank[..j].iter().map(|&i| i + 1).collect();
            stable_set.sort_unstable();
            return Ok(LocalStabilityPartition {
                k: j,
                stable_set,
                effective_load: prefix[j],
                effective_switchover: s_j,
            });
        }
        match d_max[i] {
            GrantCap::Bounded(d) => tail += d.as_nanos() as f64,
            GrantCap::Unbounded => return Err(AnalyticsError::UnboundedSwitchover { onu: i + 1 }),
        }
    }
    Ok(LocalStabilityPartition {
        k: 0,
        stable_set: Vec::new(),
        effective_load: 0.0,
        effective_switchover: base + tail,
    })
}

/// Largest ONU count accepted by [`partial_sharing_stable`].
pub const MAX_SUBSET_ONUS: usize = 24;

/// Stability with partial wavelength availability and unlimited grants:
/// every ONU subset must load its reachable wavelengths below capacity.
pub fn partial_sharing_stable(
    loads: &[f64],
    availability: &AvailabilityMap,
) -> Result<StabilityReport, AnalyticsError> {
    let n = loads.len();
    if n > MAX_SUBSET_ONUS {
        return Err(AnalyticsError::TooManyOnus {
            n,
            limit: MAX_SUBSET_ONUS,
        });
    }
    if availability.len() != n {
        return Err(AnalyticsError::LengthMismatch);
    }
    let masks: Vec<u64> = (1..=n)
        .map(|i| {
            availability
                .get(i)
                .map_or(0, |ws| ws.iter().fold(0u64, |m, &w| m | 1 << (w - 1)))
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0u64);
    // smallest violating subset, the most violated among equals
    let mut violator: Option<(u32, f64, u64)> = None;
    for subset in 1u64..(1u64 << n) {
        let mut sum = 0.0;
        let mut reach = 0u64;
        let mut rest = subset;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            sum += loads[k];
            reach |= masks[k];
        }
        let margin = sum - reach.count_ones() as f64;
        if margin > best.0 {
            best = (margin, subset);
        }
        if margin >= 0.0 {
            let size = subset.count_ones();
            if violator.is_none_or(|(sz, m, _)| size < sz || (size == sz && margin > m)) {
                violator = Some((size, margin, subset));
            }
        }
    }
    let shown = violator.map_or(best.1, |v| v.2);
    let members: Vec<OnuId> = (0..n).filter(|&k| shown & (1 << k) != 0).map(|k| k + 1).collect();
    let mut report = StabilityReport::new(best.0, None, Formula::PartialSharing);
    if members.len() == 1 {
        report.binding_onu = Some(members[0]);
    }
    report.binding_subset = Some(members);
    Ok(report)
}

/// Necessary conditions with tunable transmitters: the full-availability
/// WDM condition, and each ONU's rate bound `ρ_i < t_i d_i/(d_i + Δ_R)`.
/// The margin is the worse of the two.
pub fn tunable_necessary(
    loads: &[f64],
    transmitters: &[usize],
    d_max: &[GrantCap],
    delta_r: SimTime,
    wavelengths: usize,
) -> StabilityReport {
    let wdm = stability_wdm_full(loads, d_max, delta_r, wavelengths);
    let dr = delta_r.as_nanos() as f64;
    let mut worst = (f64::NEG_INFINITY, None);
    for (k, ((&rho, &t), &cap)) in loads.iter().zip(transmitters).zip(d_max).enumerate() {
        let bound = match cap {
            GrantCap::Bounded(d) => {
                let d = d.as_nanos() as f64;
                t as f64 * d / (d + dr)
            }
            GrantCap::Unbounded => t as f64,
        };
        if rho - bound > worst.0 + 1e-12 {
            worst = (rho - bound, Some(k + 1));
        }
    }
    if worst.0 > wdm.margin {
        StabilityReport::new(worst.0, worst.1, Formula::TunableNecessary)
    } else {
        StabilityReport::new(wdm.margin, wdm.binding_onu, Formula::TunableNecessary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToyVerdict {
    pub necessary: bool,
    /// The exact condition for example 1, a sufficient one for example 2.
    pub refined_or_sufficient: bool,
}

/// Conditions for the two small zero-overhead WDM examples.
///
/// Example 1: ONU 1 may use both wavelengths, ONU 2 only the second.
/// Example 2: three single-transmitter ONUs share two wavelengths, loads
/// given in non-increasing order.
pub fn toy_example_conditions(example: u8, loads: &[f64]) -> Result<ToyVerdict, AnalyticsError> {
    match example {
        1 => {
            let &[r1, r2] = loads else {
                return Err(AnalyticsError::WrongArity(1, 2));
            };
            let necessary = r2 < 1.0 && r1 + r2 < 2.0;
            Ok(ToyVerdict {
                necessary,
                refined_or_sufficient: necessary && r1 + 3.0 * r2 < 3.0,
            })
        }
        2 => {
            let &[r1, r2, r3] = loads else {
                return Err(AnalyticsError::WrongArity(2, 3));
            };
            if !(r1 >= r2 && r2 >= r3) {
                return Err(AnalyticsError::UnsortedLoads(loads.to_vec()));
            }
            Ok(ToyVerdict {
                necessary: r1.max(r2).max(r3) < 1.0 && r1 + r2 + r3 < 2.0,
                refined_or_sufficient: 3.0 * r1 + r2 + r3 < 3.0 && r2 + r3 < 1.0,
            })
        }
        other => Err(AnalyticsError::NoSuchExample(other)),
    }
}

/// Bisects `[lo, hi]` for the boundary of a monotone predicate that holds
/// at `lo` and fails at `hi`, until the bracket is narrower than
/// `rel_tol · hi`. Returns the final bracket.
pub fn bisect_boundary(mut lo: f64, mut hi: f64, rel_tol: f64, mut holds: impl FnMut(f64) -> bool) -> (f64, f64) {
    while hi - lo > rel_tol * hi.abs() {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Total load at which `stable` flips, scaling the per-ONU load `shape`
/// uniformly. `shape` only fixes proportions.
pub fn capacity_search(
    shape: &[f64],
    mut stable: impl FnMut(&[f64]) -> StabilityReport,
) -> Result<f64, AnalyticsError> {
    let total: f64 = shape.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(AnalyticsError::NoBracket("load shape sums to zero".into()));
    }
    let unit: Vec<f64> = shape.iter().map(|r| r / total).collect();
    let mut at = |x: f64| stable(&unit.iter().map(|r| r * x).collect::<Vec<_>>()).stable;
    if !at(0.0) {
        return Err(AnalyticsError::NoBracket("unstable at zero load".into()));
    }
    let mut hi = 1.0;
    while at(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(AnalyticsError::NoBracket("stable at every load tried".into()));
        }
    }
    let (lo, hi) = bisect_boundary(0.0, hi, 1e-9, at);
    Ok(0.5 * (lo + hi))
}

/// Per-cycle switchover `S`: one REPORT slot per visit in the cycle order.
pub fn cycle_switchover(cfg: &ValidConfig) -> SimTime {
    cfg.delta_r * cfg.cycle_order().len() as u64
}

fn caps(cfg: &ValidConfig) -> Vec<GrantCap> {
    cfg.onus.iter().map(|o| o.d_max).collect()
}

/// The condition that governs `cfg`'s scheduler, evaluated at `loads`.
/// `None` for the REPORT-driven baseline, which has no closed form.
pub fn stability_for(cfg: &ValidConfig, loads: &[f64]) -> Option<Result<StabilityReport, AnalyticsError>> {
    let d = caps(cfg);
    let l = cfg.wavelengths;
    Some(match cfg.scheduler_mode {
        SchedulerMode::GateSingle => Ok(stability_single(loads, &d, cfg.delta_r)),
        SchedulerMode::GatePerWavelength | SchedulerMode::GateSingleCycle => {
            if cfg.onus.iter().any(|o| o.allowed_wavelengths.len() != l) {
                partial_sharing_stable(loads, &cfg.availability())
            } else if cfg.onus.iter().any(|o| o.is_transmitter_limited()) {
                let t: Vec<usize> = cfg.onus.iter().map(|o| o.transmitter_count).collect();
                Ok(tunable_necessary(loads, &t, &d, cfg.delta_r, l))
            } else {
                Ok(stability_wdm_full(loads, &d, cfg.delta_r, l))
            }
        }
        SchedulerMode::GatePartialSharing => partial_sharing_stable(loads, &cfg.availability()),
        SchedulerMode::ReportDriven => return None,
    })
}

/// Per-ONU load proportions used for capacity predictions: the configured
/// profile if any, else the configured loads, else a symmetric split.
pub fn load_shape(cfg: &ValidConfig) -> Vec<f64> {
    if let Some(kind) = cfg.profile {
        if let Ok(p) = build_profile(kind, 1.0, cfg.n()) {
            return p.per_onu_loads;
        }
    }
    let loads = cfg.loads();
    if loads.iter().sum::<f64>() > 0.0 {
        loads
    } else {
        build_profile(ProfileKind::Symmetric, 1.0, cfg.n())
            .expect("symmetric profile")
            .per_onu_loads
    }
}

/// Predicted total-load capacity of `cfg`'s scheduler, if it has one.
pub fn predicted_capacity(cfg: &ValidConfig) -> Option<f64> {
    let shape = load_shape(cfg);
    stability_for(cfg, &shape)?.ok()?;
    capacity_search(&shape, |loads| {
        stability_for(cfg, loads)
            .expect("GATE-driven mode")
            .expect("checked above")
    })
    .ok()
}

/// Predicted mean cycle time of `cfg` at its configured loads, in ns.
/// `None` when there is no closed form or the load is not stable.
pub fn predicted_cycle(cfg: &ValidConfig) -> Option<f64> {
    let loads = cfg.loads();
    if !stability_for(cfg, &loads)?.ok()?.stable {
        return None;
    }
    let rho: f64 = loads.iter().sum();
    let s = cycle_switchover(cfg);
    let l = cfg.wavelengths;
    match cfg.scheduler_mode {
        SchedulerMode::GateSingle => mean_cycle_single(rho, s).ok(),
        SchedulerMode::GatePerWavelength => mean_cycle_wdm(rho, s, l, CycleMode::PerWavelength).ok(),
        SchedulerMode::GateSingleCycle => mean_cycle_wdm(rho, s, l, CycleMode::SingleCycle).ok(),
        SchedulerMode::GatePartialSharing | SchedulerMode::ReportDriven => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ns(x: u64) -> SimTime {
        SimTime::from_nanos(x)
    }

    fn bounded(x: u64, n: usize) -> Vec<GrantCap> {
        vec![GrantCap::Bounded(ns(x)); n]
    }

    const DR: SimTime = SimTime::from_nanos(2120);

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_wavelength_example() {
        let r = stability_single(&[0.04; 20], &bounded(16_000, 20), DR);
        // 0.8 + 0.04/16000 · 42400
        assert!(close(r.margin + 1.0, 0.906, 1e-12));
        assert!(r.stable);
        assert_eq!(r.binding_onu, Some(1));
    }

    #[test]
    fn unbounded_caps_reduce_to_load_below_one() {
        let caps = vec![GrantCap::Unbounded; 20];
        assert!(stability_single(&[0.999 / 20.0; 20], &caps, DR).stable);
        assert!(!stability_single(&[1.0 / 20.0; 20], &caps, DR).stable);
    }

    #[test]
    fn symmetric_capacity_closed_forms() {
        for (d, l) in [(16_000u64, 1usize), (32_000, 1), (48_000, 1), (80_000, 3)] {
            let cap = capacity_search(&[1.0; 20], |x| stability_wdm_full(x, &bounded(d, 20), DR, l)).unwrap();
            let expect = l as f64 * d as f64 / (d as f64 + 2120.0);
            assert!(close(cap, expect, 1e-6 * expect), "d={d} L={l}: {cap} vs {expect}");
        }
        let c = capacity_search(&[1.0; 20], |x| stability_single(x, &bounded(16_000, 20), DR)).unwrap();
        assert!(close(c, 0.883, 5e-4));
    }

    #[test]
    fn asymmetric_wdm_capacity() {
        let mut shape = vec![1.0; 15];
        shape.extend([5.0; 5]);
        let cap = capacity_search(&shape, |x| stability_wdm_full(x, &bounded(64_000, 20), DR, 3)).unwrap();
        // 40γ + 5γ·42400/64000 = 3
        let gamma = 3.0 / (40.0 + 5.0 * 42_400.0 / 64_000.0);
        assert!(close(cap, 40.0 * gamma, 1e-6));
        assert!(close(cap, 2.770, 1e-3));
    }

    #[test]
    fn mean_cycle_examples() {
        let s = ns(42_400);
        assert!(close(mean_cycle_single(0.0, s).unwrap(), 42_400.0, 1e-9));
        assert!(close(mean_cycle_single(0.5, s).unwrap(), 84_800.0, 1e-6));
        assert!(close(mean_cycle_single(0.8, s).unwrap(), 212_000.0, 1e-6));
        assert!(close(mean_cycle_wdm(1.2, s, 2, CycleMode::PerWavelength).unwrap(), 106_000.0, 1e-6));
        assert!(close(mean_cycle_wdm(1.2, s, 2, CycleMode::SingleCycle).unwrap(), 53_000.0, 1e-6));
        assert!(matches!(mean_cycle_single(1.0, s), Err(AnalyticsError::Overloaded { .. })));
    }

    #[test]
    fn mean_grant_examples() {
        let s = ns(42_400);
        assert_eq!(mean_grant_per_cycle(0.0, 0.8, s, 1).unwrap(), 0.0);
        assert!(close(mean_grant_per_cycle(0.04, 0.8, s, 1).unwrap(), 8480.0, 1e-6));
    }

    #[test]
    fn local_partition_example() {
        let p = local_stability_partition(&[0.4, 0.9], &bounded(10_000, 2), ns(2000)).unwrap();
        assert_eq!(p.k, 1);
        assert_eq!(p.stable_set, vec![1]);
        assert!(close(p.effective_switchover, 14_000.0, 1e-9));
    }

    #[test]
    fn local_partition_all_idle_and_all_stable() {
        assert_eq!(local_stability_partition(&[0.0; 5], &bounded(8000, 5), DR).unwrap().k, 5);
        assert_eq!(local_stability_partition(&[0.04; 20], &bounded(16_000, 20), DR).unwrap().k, 20);
    }

    #[test]
    fn local_partition_needs_bounded_heavy_caps() {
        let caps = [GrantCap::Bounded(ns(8000)), GrantCap::Unbounded];
        assert_eq!(
            local_stability_partition(&[0.1, 1.5], &caps, DR),
            Err(AnalyticsError::UnboundedSwitchover { onu: 2 })
        );
    }

    fn example1_map() -> AvailabilityMap {
        let mut m = AvailabilityMap::new();
        m.insert(1, [1, 2]);
        m.insert(2, [2]);
        m
    }

    #[test]
    fn partial_sharing_examples() {
        assert!(partial_sharing_stable(&[1.4, 0.5], &example1_map()).unwrap().stable);
        let r = partial_sharing_stable(&[1.4, 1.0], &example1_map()).unwrap();
        assert!(!r.stable);
        assert_eq!(r.binding_subset, Some(vec![2]));
        assert_eq!(r.binding_onu, Some(2));
    }

    #[test]
    fn partial_sharing_rejects_large_n() {
        let n = MAX_SUBSET_ONUS + 1;
        assert!(matches!(
            partial_sharing_stable(&vec![0.0; n], &AvailabilityMap::full(n, 2)),
            Err(AnalyticsError::TooManyOnus { .. })
        ));
    }

    #[test]
    fn tunable_bound_examples() {
        let r = tunable_necessary(&[0.9], &[1], &bounded(64_000, 1), DR, 3);
        assert!(r.stable);
        assert!(close(r.margin, 0.9 - 64_000.0 / 66_120.0, 1e-12));
        let shape = [1.0, 1.0, 1.0, 5.0];
        let cap = capacity_search(&shape, |x| tunable_necessary(x, &[1; 4], &bounded(64_000, 4), DR, 3)).unwrap();
        assert!(close(cap, 8.0 * 64_000.0 / 66_120.0 / 5.0, 1e-6));
        assert!(close(cap, 1.549, 5e-4));
    }

    #[test]
    fn toy_conditions() {
        let v = toy_example_conditions(1, &[1.35, 0.5]).unwrap();
        assert_eq!((v.necessary, v.refined_or_sufficient), (true, true));
        let v = toy_example_conditions(1, &[1.35, 0.6]).unwrap();
        assert_eq!((v.necessary, v.refined_or_sufficient), (true, false));
        let v = toy_example_conditions(2, &[0.9, 0.1, 0.1]).unwrap();
        assert!(v.refined_or_sufficient);
        assert!(!toy_example_conditions(2, &[1.01, 0.3, 0.3]).unwrap().necessary);
        assert!(matches!(toy_example_conditions(2, &[0.1, 0.2, 0.3]), Err(AnalyticsError::UnsortedLoads(_))));
        assert!(matches!(toy_example_conditions(3, &[0.1]), Err(AnalyticsError::NoSuchExample(3))));
    }

    #[test]
    fn capacity_search_needs_a_bracket() {
        let always = |_: &[f64]| StabilityReport::new(-1.0, None, Formula::WdmFull);
        assert!(matches!(capacity_search(&[1.0, 1.0], always), Err(AnalyticsError::NoBracket(_))));
    }

    fn caps_strategy(n: usize) -> impl Strategy<Value = Vec<GrantCap>> {
        prop::collection::vec(
            prop_oneof![
                (1000u64..200_000).prop_map(|d| GrantCap::Bounded(SimTime::from_nanos(d))),
                Just(GrantCap::Unbounded)
            ],
            n,
        )
    }

    proptest! {
        #[test]
        fn wdm_with_one_wavelength_is_single(
            (loads, caps) in (1usize..12).prop_flat_map(|n| (prop::collection::vec(0.0f64..0.3, n), caps_strategy(n)))
        ) {
            let a = stability_single(&loads, &caps, DR);
            let b = stability_wdm_full(&loads, &caps, DR, 1);
            prop_assert_eq!(a.stable, b.stable);
            prop_assert_eq!(a.margin, b.margin);
        }

        #[test]
        fn raising_a_load_never_stabilises(
            (loads, caps, idx, bump) in (1usize..10).prop_flat_map(|n| (
                prop::collection::vec(0.0f64..0.5, n), caps_strategy(n), 0..n, 0.0f64..0.5))
        ) {
            let mut more = loads.clone();
            more[idx] += bump;
            for l in 1..=3 {
                let a = stability_wdm_full(&loads, &caps, DR, l);
                let b = stability_wdm_full(&more, &caps, DR, l);
                prop_assert!(!(b.stable && !a.stable));
            }
            let m = AvailabilityMap::full(loads.len(), 2);
            prop_assert!(!(partial_sharing_stable(&more, &m).unwrap().stable
                && !partial_sharing_stable(&loads, &m).unwrap().stable));
            let t = vec![1; loads.len()];
            prop_assert!(!(tunable_necessary(&more, &t, &caps, DR, 2).stable
                && !tunable_necessary(&loads, &t, &caps, DR, 2).stable));
        }

        #[test]
        fn full_availability_partial_sharing_is_total_below_l(
            loads in prop::collection::vec(0.0f64..1.0, 1..10), l in 1usize..4
        ) {
            let r = partial_sharing_stable(&loads, &AvailabilityMap::full(loads.len(), l)).unwrap();
            prop_assert_eq!(r.stable, loads.iter().sum::<f64>() < l as f64);
        }

        #[test]
        fn mean_cycle_reductions_and_grant_identity(rho in 0.0f64..0.99, s in 1u64..200_000) {
            let s = SimTime::from_nanos(s);
            let c = mean_cycle_single(rho, s).unwrap();
            prop_assert_eq!(c, mean_cycle_wdm(rho, s, 1, CycleMode::PerWavelength).unwrap());
            prop_assert_eq!(c, mean_cycle_wdm(rho, s, 1, CycleMode::SingleCycle).unwrap());
            let d = mean_grant_per_cycle(rho, rho, s, 1).unwrap();
            prop_assert!((d + s.as_nanos() as f64 - c).abs() <= 1e-9 * c);
        }
    }
}
