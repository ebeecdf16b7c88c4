//! Writes a generated scenario to the `time,INJ:…,PRD:…` CSV layout, reads
//! it back, and splits it into training and test segments.
//!
//! ```bash
//! cargo run -p floodnet --example csv_roundtrip
//! ```

use floodnet::scenario::{generate, read_csv, streak_preset, write_csv};

pub fn run_example() -> floodnet::Result<()> {
    let spec = streak_preset();
    let series = generate(&spec)?;
    let dir = std::env::temp_dir().join(format!("floodnet-csv-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("streak.csv");
    write_csv(&spec.field, &series, &path)?;
    let text = std::fs::read_to_string(&path)?;
    println!("{}", text.lines().take(3).collect::<Vec<_>>().join("\n"));

    let (field, back) = read_csv(&path)?;
    assert_eq!(field, spec.field);
    assert_eq!(back, series, "round trip is bit-exact");
    let (train, test) = back.split(spec.default_split())?;
    println!(
        "{} steps → train {} + test {}",
        back.n_steps(),
        train.n_steps(),
        test.n_steps()
    );
    assert_eq!(train.concat(&test)?, series);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
