//! Closed-form capacity of the reference 20-ONU network for several grant
//! caps, on one wavelength and with two or three shared wavelengths.
//!
//! cargo run --example analyze_capacity

use wdm_epon::acceptance::{reference_network, AcceptanceOptions};
use wdm_epon::analytics::{predicted_capacity, stability_for};
use wdm_epon::traffic::ProfileKind;
use wdm_epon::{validate_config, GrantCap, SchedulerMode, SimTime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = AcceptanceOptions::default();
    println!("{:>10} {:>4} {:>10}", "cap (B)", "L", "capacity");
    for bytes in [2000u64, 4000, 6000, 10_000] {
        for l in 1..=3 {
            let mode = if l == 1 { SchedulerMode::GateSingle } else { SchedulerMode::GateSingleCycle };
            let nc = reference_network(l, &opts)
                .with_mode(mode)
                .with_d_max(GrantCap::Bounded(SimTime::from_nanos(bytes * 8)))
                .with_profile(ProfileKind::Symmetric, 0.5)?;
            let cfg = validate_config(nc)?;
            let cap = predicted_capacity(&cfg).unwrap_or(f64::NAN);
            println!("{bytes:>10} {l:>4} {cap:>10.4}");
        }
    }

    // what binds just above the one-wavelength boundary
    let nc = reference_network(1, &opts)
        .with_d_max(GrantCap::Bounded(SimTime::from_nanos(16_000)))
        .with_profile(ProfileKind::Symmetric, 0.9)?;
    let cfg = validate_config(nc)?;
    let report = stability_for(&cfg, &cfg.loads()).expect("GATE-driven")?;
    println!(
        "\nload 0.9, 2 KB cap: stable={} margin={:+.4} binding ONU {:?} ({})",
        report.stable, report.margin, report.binding_onu, report.formula
    );
    Ok(())
}
