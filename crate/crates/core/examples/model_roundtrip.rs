//! Fits every model kind on the streak training segment, saves each as a
//! model file, loads it back and predicts the test segment.
//!
//! ```bash
//! cargo run -p floodnet --release --example model_roundtrip
//! ```

use floodnet::analysis::{fit_model, load_model, save_model, FitOptions, ModelKind};
use floodnet::fit::FitConfig;
use floodnet::scenario::{generate, streak_preset};

pub fn run_example() -> floodnet::Result<()> {
    let spec = streak_preset();
    let series = generate(&spec)?;
    let opts = FitOptions {
        fit: FitConfig {
            n_starts: 2,
            ..FitConfig::default()
        },
        ..FitOptions::default()
    };
    let dir = std::env::temp_dir().join(format!("floodnet-model-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    for kind in ModelKind::ALL {
        let (file, summary) = fit_model(kind, &spec.field, &series, &opts)?;
        let path = dir.join(format!("{kind}.json"));
        save_model(&file, &path)?;
        let back = load_model(&path)?;
        let pred = back.predict(&spec.field, &series)?;
        assert_eq!(pred, file.predict(&spec.field, &series)?);
        let last = pred.row(pred.nrows() - 1);
        println!(
            "{kind:<6} loss {:.3e}  outputs {:?}  last step {:.1?}",
            summary.final_loss,
            back.output_names(),
            last.to_vec()
        );
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
