//! Adaptive skipping of idle ONUs. Four ONUs carry traffic and sixteen are
//! silent. The line time left over after data goes to GATE/REPORT exchanges
//! either way, so skipping does not cut the number of visits; it moves them
//! from the silent ONUs to the busy ones, whose visit interval shrinks.
//!
//! cargo run --release --example adaptive_skipping

use wdm_epon::acceptance::{reference_network, AcceptanceOptions};
use wdm_epon::sim::{run_to_verdict, RunOptions, Simulation};
use wdm_epon::validate_config;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let busy = |k: usize| k.is_multiple_of(5);
    let loads: Vec<f64> = (0..20).map(|k| if busy(k) { 0.15 } else { 0.0 }).collect();
    for skipping in [false, true] {
        let mut nc = reference_network(1, &AcceptanceOptions::default()).with_loads(&loads)?;
        nc.skipping = skipping;
        let mut sim = Simulation::new(validate_config(nc)?, 1)?;
        sim.record_gates();
        let r = run_to_verdict(&mut sim, RunOptions::default())?;

        let span = sim.clock().as_secs_f64() * 1e6;
        let mut visits = [0usize; 20];
        for g in sim.gates() {
            visits[g.gate.onu - 1] += 1;
        }
        let interval = |pick: bool| {
            let v: Vec<usize> = (0..20).filter(|&k| busy(k) == pick).map(|k| visits[k]).collect();
            span * v.len() as f64 / v.iter().sum::<usize>() as f64
        };
        println!(
            "skipping {skipping:<5}: visit interval busy {:>6.1} us, silent {:>6.1} us; mean delay {:>7.1} us",
            interval(true),
            interval(false),
            r.delay.mean / 1e3
        );
    }
    Ok(())
}
