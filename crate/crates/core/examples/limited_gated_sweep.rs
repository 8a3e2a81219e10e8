//! Runs a trimmed copy of the fig7 preset (GATE-driven, 2/4/6 KB grant
//! caps) and prints the rows next to their predictions. Pass a preset name
//! to run another one, e.g. `fig9`.
//!
//! cargo run --release --example limited_gated_sweep [preset]

use wdm_epon::metrics::format_table;
use wdm_epon::sweep::{run_sweep, SweepSpec};
use wdm_epon::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig7".into());
    let mut spec = SweepSpec::preset(&name)?;
    spec.loads = vec![0.3, 0.6, 0.9, 0.97];
    spec.duration = Some(SimTime::from_millis(500));
    let rows = run_sweep(&spec, std::io::sink())?;
    print!("{}", format_table(&rows));
    Ok(())
}
