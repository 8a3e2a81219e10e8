//! GATE-driven against REPORT-driven polling on one wavelength with
//! unlimited grants: mean cycle and mean packet delay by load.
//!
//! cargo run --release --example gate_vs_report

use wdm_epon::acceptance::{reference_network, AcceptanceOptions};
use wdm_epon::sim::{simulate, RunOptions};
use wdm_epon::traffic::ProfileKind;
use wdm_epon::{validate_config, SchedulerMode, SimTime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = AcceptanceOptions::default();
    let run = RunOptions {
        duration: Some(SimTime::from_secs(1)),
        auto_extend: false,
    };
    println!("{:>5} | {:>12} {:>12} | {:>12} {:>12} | ratio", "load", "GATE cycle", "GATE delay", "REPORT cycle", "REPORT delay");
    for load in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut row = Vec::new();
        for mode in [SchedulerMode::GateSingle, SchedulerMode::ReportDriven] {
            let nc = reference_network(1, &opts).with_mode(mode).with_profile(ProfileKind::Symmetric, load)?;
            let r = simulate(&validate_config(nc)?, 1, run)?;
            row.push((r.cycle.mean / 1e3, r.delay.mean / 1e3));
        }
        println!(
            "{load:>5} | {:>9.1} us {:>9.1} us | {:>9.1} us {:>9.1} us | {:.3}",
            row[0].0,
            row[0].1,
            row[1].0,
            row[1].1,
            row[1].1 / row[0].1
        );
    }
    Ok(())
}
