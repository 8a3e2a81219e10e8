//! The two small zero-overhead WDM networks: partial wavelength sharing
//! (ONU 1 on both wavelengths, ONU 2 on the second only) and three ONUs with
//! a single tunable transmitter each. Prints the analytic conditions and
//! the simulated verdict for loads on both sides of each boundary.
//!
//! cargo run --release --example partial_sharing_examples

use wdm_epon::acceptance::{example_one, example_two};
use wdm_epon::analytics::{partial_sharing_stable, toy_example_conditions};
use wdm_epon::sim::{simulate, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("partial sharing");
    for loads in [[1.2, 0.5], [1.35, 0.5], [1.35, 0.6], [1.4, 0.7]] {
        let cfg = example_one(loads)?;
        let subsets = partial_sharing_stable(&loads, &cfg.availability())?;
        let toy = toy_example_conditions(1, &loads)?;
        let r = simulate(&cfg, 1, RunOptions::default())?;
        println!(
            "  {loads:?}: subset condition {}, with sharing penalty {}, simulated {}",
            subsets.stable, toy.refined_or_sufficient, r.verdict.verdict
        );
    }
    println!("one transmitter per ONU");
    for loads in [[0.9, 0.1, 0.1], [0.95, 0.5, 0.4], [1.01, 0.3, 0.3]] {
        let cfg = example_two(loads)?;
        let toy = toy_example_conditions(2, &loads)?;
        let r = simulate(&cfg, 1, RunOptions::default())?;
        println!(
            "  {loads:?}: necessary {}, sufficient {}, simulated {}",
            toy.necessary, toy.refined_or_sufficient, r.verdict.verdict
        );
    }
    Ok(())
}
