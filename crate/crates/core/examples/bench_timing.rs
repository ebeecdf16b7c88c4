//! Median fit and predict wall times for CRMP and the 500-epoch network on
//! both presets.
//!
//! ```bash
//! cargo run -p floodnet --release --example bench_timing
//! ```

use floodnet::analysis::{bench, FitOptions};
use floodnet::scenario::PRESETS;

pub fn run_example() -> floodnet::Result<()> {
    let presets: Vec<String> = PRESETS.iter().map(|s| s.to_string()).collect();
    let report = bench(&presets, 3, &FitOptions::default())?;
    print!("{}", report.table());
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
