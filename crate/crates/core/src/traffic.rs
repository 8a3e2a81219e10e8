//! Seeded Poisson packet arrivals and load profiles.
//!
//! Every random stream in a run derives from one master seed. An ONU's
//! stream is seeded from `(seed, onu id)` through a SplitMix64 mix, so
//! adding or removing an ONU never perturbs the others.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::config::OnuId;
use crate::error::ConfigError;
use crate::model::Packet;
use crate::time::SimTime;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("total load must be finite and ≥ 0, got {0}")]
    BadTotal(f64),
    #[error("heavy fraction {fraction} of {n} ONUs is not a whole number of ONUs")]
    NonIntegralHeavyCount { fraction: f64, n: usize },
    #[error("heavy factor must be positive, got {0}")]
    BadFactor(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind {
    Symmetric,
    /// `heavy_fraction` of the ONUs carry `heavy_factor` times the light rate.
    Asymmetric { heavy_fraction: f64, heavy_factor: f64 },
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Symmetric => f.write_str("symmetric"),
            ProfileKind::Asymmetric {
                heavy_fraction,
                heavy_factor,
            } => write!(f, "asymmetric({heavy_fraction},{heavy_factor})"),
        }
    }
}

impl FromStr for ProfileKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Parse {
            what: "load_profile".into(),
            value: s.to_string(),
        };
        let t = s.trim();
        if t == "symmetric" {
            return Ok(ProfileKind::Symmetric);
        }
        let args = t
            .strip_prefix("asymmetric(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (a, b) = args.split_once(',').ok_or_else(bad)?;
        Ok(ProfileKind::Asymmetric {
            heavy_fraction: a.trim().parse().map_err(|_| bad())?,
            heavy_factor: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadProfile {
    pub kind: ProfileKind,
    pub total_load: f64,
    pub per_onu_loads: Vec<f64>,
    /// Ids of the heavily loaded ONUs (empty for symmetric profiles).
    pub heavy_onus: Vec<OnuId>,
}

/// Splits `total_load` over `n` ONUs. Asymmetric profiles make the last
/// `heavy_fraction * n` ONUs heavy.
pub fn build_profile(kind: ProfileKind, total_load: f64, n: usize) -> Result<LoadProfile, ProfileError> {
    if !(total_load.is_finite() && total_load >= 0.0) {
        return Err(ProfileError::BadTotal(total_load));
    }
    let (mut loads, heavy_onus) = match kind {
        ProfileKind::Symmetric => (vec![total_load / n as f64; n], Vec::new()),
        ProfileKind::Asymmetric {
            heavy_fraction,
            heavy_factor,
        } => {
            if !(heavy_factor > 0.0 && heavy_factor.is_finite()) {
                return Err(ProfileError::BadFactor(heavy_factor));
            }
            let heavy_f = heavy_fraction * n as f64;
            let heavy = heavy_f.round();
            if (heavy_f - heavy).abs() > 1e-9 || !(0.0..=n as f64).contains(&heavy) {
                return Err(ProfileError::NonIntegralHeavyCount {
                    fraction: heavy_fraction,
                    n,
                });
            }
            let heavy = heavy as usize;
            let light = n - heavy;
            let gamma = total_load / (light as f64 + heavy_factor * heavy as f64);
            let loads = (0..n)
                .map(|k| if k < light { gamma } else { heavy_factor * gamma })
                .collect();
            (loads, (light + 1..=n).collect())
        }
    };
    if n > 0 {
        let rest: f64 = loads[..n - 1].iter().sum();
        loads[n - 1] = (total_load - rest).max(0.0);
    }
    Ok(LoadProfile {
        kind,
        total_load,
        per_onu_loads: loads,
        heavy_onus,
    })
}

/// SplitMix64 finaliser: decorrelates (seed, stream id) pairs.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream ids used for non-ONU randomness within one run.
pub const JITTER_STREAM: u64 = 1 << 32;
const DELAY_STREAM: u64 = (1 << 32) + 1;

/// Poisson arrivals for one ONU.
#[derive(Clone, Debug)]
pub struct ArrivalStream {
    pub onu: OnuId,
    pub rate: f64,
    wire_time: SimTime,
    exp: Option<Exp<f64>>,
    rng: ChaCha8Rng,
}

impl ArrivalStream {
    pub fn new(seed: u64, onu: OnuId, rate: f64, wire_time: SimTime) -> Self {
        ArrivalStream {
            onu,
            rate,
            wire_time,
            exp: (rate > 0.0).then(|| Exp::new(rate).expect("positive rate")),
            rng: ChaCha8Rng::seed_from_u64(stream_seed(seed, onu as u64)),
        }
    }

    /// Next inter-arrival time (rounded to whole ns) and the packet template,
    /// or `None` for an empty stream. The packet's arrival time is relative:
    /// callers add the gap to their clock.
    pub fn next_arrival(&mut self, now: SimTime) -> Option<(SimTime, Packet)> {
        let exp = self.exp.as_ref()?;
        let gap_s: f64 = exp.sample(&mut self.rng);
        let gap = SimTime::from_nanos((gap_s * 1e9).round() as u64);
        Some((gap, Packet::new(self.onu, now + gap, self.wire_time)))
    }
}

/// `n` independent uniform propagation delays on `[lo, hi]`, fixed per seed.
pub fn onu_delays(n: usize, seed: u64, lo: SimTime, hi: SimTime) -> Vec<SimTime> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, DELAY_STREAM));
    (0..n)
        .map(|_| SimTime::from_nanos(rng.random_range(lo.as_nanos()..=hi.as_nanos())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_split() {
        let p = build_profile(ProfileKind::Symmetric, 0.8, 20).unwrap();
        assert!(p.per_onu_loads.iter().all(|&r| (r - 0.04).abs() < 1e-12));
        let sum: f64 = p.per_onu_loads.iter().sum();
        assert!((sum - 0.8).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_split() {
        let kind = ProfileKind::Asymmetric {
            heavy_fraction: 0.25,
            heavy_factor: 5.0,
        };
        let p = build_profile(kind, 0.8, 20).unwrap();
        // 15 gamma + 25 gamma = 40 gamma = 0.8
        for &r in &p.per_onu_loads[..15] {
            assert!((r - 0.02).abs() < 1e-12);
        }
        for &r in &p.per_onu_loads[15..] {
            assert!((r - 0.10).abs() < 1e-12);
        }
        assert_eq!(p.heavy_onus, (16..=20).collect::<Vec<_>>());
        let sum: f64 = p.per_onu_loads.iter().sum();
        assert!((sum - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_total_gives_zero_loads() {
        let p = build_profile(ProfileKind::Symmetric, 0.0, 5).unwrap();
        assert!(p.per_onu_loads.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn non_integral_heavy_count_rejected() {
        let kind = ProfileKind::Asymmetric {
            heavy_fraction: 0.3,
            heavy_factor: 5.0,
        };
        assert!(matches!(
            build_profile(kind, 1.0, 4),
            Err(ProfileError::NonIntegralHeavyCount { .. })
        ));
    }

    #[test]
    fn profile_kind_parses() {
        assert_eq!("symmetric".parse::<ProfileKind>().unwrap(), ProfileKind::Symmetric);
        assert_eq!(
            "asymmetric(0.25, 5)".parse::<ProfileKind>().unwrap(),
            ProfileKind::Asymmetric {
                heavy_fraction: 0.25,
                heavy_factor: 5.0
            }
        );
        assert!("lopsided".parse::<ProfileKind>().is_err());
    }

    #[test]
    fn zero_rate_stream_is_empty() {
        let mut s = ArrivalStream::new(7, 1, 0.0, SimTime::from_nanos(8000));
        assert!(s.next_arrival(SimTime::ZERO).is_none());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, onu| {
            let mut s = ArrivalStream::new(seed, onu, 1e5, SimTime::from_nanos(8000));
            let mut now = SimTime::ZERO;
            (0..50)
                .map(|_| {
                    let (gap, _) = s.next_arrival(now).unwrap();
                    now += gap;
                    now
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3, 1), draw(3, 1));
        assert_ne!(draw(3, 1), draw(3, 2));
        assert_ne!(draw(3, 1), draw(4, 1));
    }

    #[test]
    fn mean_inter_arrival_matches_rate() {
        // rate 1e5/s: mean gap 10 us, std of the mean over 1e6 draws is 10 ns
        let mut s = ArrivalStream::new(11, 1, 1e5, SimTime::from_nanos(8000));
        let n = 1_000_000u64;
        let mut total = 0u64;
        for _ in 0..n {
            total += s.next_arrival(SimTime::ZERO).unwrap().0.as_nanos();
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 10_000.0).abs() < 100.0, "mean gap {mean} ns");
    }

    #[test]
    fn inter_arrivals_pass_ks_against_exponential() {
        let rate = 1e5;
        let mut s = ArrivalStream::new(5, 3, rate, SimTime::from_nanos(8000));
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| s.next_arrival(SimTime::ZERO).unwrap().0.as_secs_f64())
            .collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (-rate * x).exp();
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        // Kolmogorov critical value at alpha = 1e-3: 1.9495 / sqrt(n)
        let crit = 1.9495 / (n as f64).sqrt();
        assert!(d < crit, "KS statistic {d} ≥ {crit}");
    }

    #[test]
    fn delays_in_range_and_seeded() {
        let lo = SimTime::from_micros(10);
        let hi = SimTime::from_micros(500);
        let a = onu_delays(20, 9, lo, hi);
        assert!(a.iter().all(|&d| lo <= d && d <= hi));
        assert_eq!(a, onu_delays(20, 9, lo, hi));
        assert_ne!(a, onu_delays(20, 10, lo, hi));
    }
}
