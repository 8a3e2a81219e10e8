//! Two wavelengths shared by all 20 ONUs at total load 1.2: one polling
//! cycle per wavelength against a single cycle that always takes the next
//! free wavelength. Per-ONU visit intervals differ by a factor of L.
//!
//! cargo run --release --example wdm_full_availability

use wdm_epon::acceptance::{reference_network, AcceptanceOptions};
use wdm_epon::sim::{simulate, RunOptions};
use wdm_epon::traffic::ProfileKind;
use wdm_epon::{validate_config, SchedulerMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = AcceptanceOptions::default();
    for mode in [SchedulerMode::GatePerWavelength, SchedulerMode::GateSingleCycle] {
        let nc = reference_network(2, &opts).with_mode(mode).with_profile(ProfileKind::Symmetric, 1.2)?;
        let cfg = validate_config(nc)?;
        let r = simulate(&cfg, 1, RunOptions::default())?;
        let util: Vec<String> = r.utilization.iter().map(|u| format!("{:.3}", u.data)).collect();
        println!(
            "{mode:<20} cycle {:>7.2} us (predicted {:>7.2})  delay {:>7.1} us  per-wavelength data [{}]",
            r.cycle.mean / 1e3,
            r.predicted_cycle_ns.unwrap_or(f64::NAN) / 1e3,
            r.delay.mean / 1e3,
            util.join(", ")
        );
    }
    Ok(())
}
