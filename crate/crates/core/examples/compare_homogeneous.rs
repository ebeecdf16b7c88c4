//! The CRM-versus-network comparison on the homogeneous preset, whose
//! non-linear producer response the CRM cannot capture.
//!
//! ```bash
//! cargo run -p floodnet --release --example compare_homogeneous
//! ```

use floodnet::analysis::{compare, FitOptions};
use floodnet::scenario::{generate, homogeneous_preset};

pub fn run_example() -> floodnet::Result<()> {
    let spec = homogeneous_preset();
    let series = generate(&spec)?;
    let cmp = compare("homogeneous preset", &spec.field, &series, &FitOptions::default())?;
    print!("{}", cmp.report.table());
    let tidy = cmp.tidy_csv();
    println!("tidy CSV for plotting: {} rows", tidy.lines().count() - 1);
    assert!(cmp.report.rnn.test_rmse_all <= cmp.report.crm.test_rmse_all);
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
