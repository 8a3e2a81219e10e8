//! Prints the first events of a small single-cycle run on two wavelengths,
//! then the GATEs that were issued.
//!
//! cargo run --example event_trace

use std::io::Write;

use wdm_epon::sim::Simulation;
use wdm_epon::{validate_config, GrantCap, NetworkConfig, SchedulerMode, SimTime};

struct Head(usize);

impl Write for Head {
    fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
        if self.0 > 0 {
            self.0 -= b.iter().filter(|&&c| c == b'\n').count().min(self.0);
            std::io::stdout().write_all(b)?;
        }
        Ok(b.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        std::io::stdout().flush()
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delays = [SimTime::from_micros(20), SimTime::from_micros(45), SimTime::from_micros(80)];
    let nc = NetworkConfig::new(&delays, 2)
        .with_mode(SchedulerMode::GateSingleCycle)
        .with_d_max(GrantCap::Bounded(SimTime::from_nanos(16_000)))
        .with_loads(&[0.3, 0.3, 0.3])?;
    let mut sim = Simulation::new(validate_config(nc)?, 3)?;
    sim.set_trace(Box::new(Head(40)));
    sim.record_gates();
    sim.run_until(SimTime::from_micros(600))?;
    println!("\nGATEs issued:");
    for r in sim.gates().iter().take(12) {
        println!("  sent {:>10}  at ONU {:>10}  {}", r.sent.to_string(), r.at_onu.to_string(), r.gate);
    }
    Ok(())
}
