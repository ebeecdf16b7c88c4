//! Recovers the streak-case connectivity from noiseless synthetic data with
//! the multi-start CRMP fit, and shows the strongest producer per injector.
//!
//! ```bash
//! cargo run -p floodnet --example fit_streak
//! ```

use floodnet::fit::{fit_crmp, FitConfig};
use floodnet::scenario::{balanced_q0, generate, streak_gains_normalized, streak_preset};

pub fn run_example() -> floodnet::Result<()> {
    let mut spec = streak_preset();
    spec.truth.gains = streak_gains_normalized();
    spec.truth.q0 = balanced_q0(&spec.truth.gains, &spec.injection().row(0).to_vec());
    let series = generate(&spec)?;

    let fit = fit_crmp(&series, &spec.field, &FitConfig::default(), None)?;
    println!(
        "final loss {:.3e} after {} iterations, start {} won, {:.3} s",
        fit.final_loss,
        fit.loss_trajectory.len() - 1,
        fit.start_index,
        fit.wall_time_s
    );
    println!("        τ fitted   τ true");
    for (j, name) in spec.field.producers().iter().enumerate() {
        println!("{name:<6} {:>8.4} {:>8.4}", fit.params.tau[j], spec.truth.tau[j]);
    }
    for (i, name) in spec.field.injectors().iter().enumerate() {
        let row = fit.params.gains.row(i);
        let (best, f) = row
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
        println!(
            "{name} → {} (f = {f:.3}, true {:.3})",
            spec.field.producers()[best],
            spec.truth.gains[[i, best]]
        );
    }
    let err = (&fit.params.gains - &spec.truth.gains)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err < 0.05, "gain error {err}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
