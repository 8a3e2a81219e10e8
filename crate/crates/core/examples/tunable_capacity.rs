//! Three wavelengths, one tunable transmitter per ONU, 8 KB grants. Finds
//! the simulated capacity by bisection on the stability verdict and sets
//! it beside the closed-form estimate, for 20 and 4 ONUs with a quarter of
//! the ONUs five times as loaded as the rest.
//!
//! cargo run --release --example tunable_capacity

use wdm_epon::acceptance::{reference_delays, simulated_capacity};
use wdm_epon::analytics::predicted_capacity;
use wdm_epon::traffic::ProfileKind;
use wdm_epon::{validate_config, GrantCap, NetworkConfig, SchedulerMode, SimError, SimTime, ValidConfig};

fn network(n: usize, total: f64) -> Result<ValidConfig, SimError> {
    let nc = NetworkConfig::new(&reference_delays(n), 3)
        .with_mode(SchedulerMode::GateSingleCycle)
        .with_d_max(GrantCap::Bounded(SimTime::from_nanos(64_000)))
        .with_transmitters(1)
        .with_profile(ProfileKind::Asymmetric { heavy_fraction: 0.25, heavy_factor: 5.0 }, total)?;
    Ok(validate_config(nc)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [20, 4] {
        let predicted = predicted_capacity(&network(n, 1.0)?).unwrap_or(f64::NAN);
        let (found, log) = simulated_capacity(|x| network(n, x), 0.8 * predicted, 1.2 * predicted, 7, 1)?;
        println!("{n:>2} ONUs: predicted {predicted:.4}, simulated {found:.4}");
        for (load, verdict) in log {
            println!("      load {load:.4}: {verdict}");
        }
    }
    Ok(())
}
