//! Trains the stateless linear network on data produced by a known network
//! and prints the loss trajectory and recovered recurrence weights.
//!
//! ```bash
//! cargo run -p floodnet --example train_rnn
//! ```

use floodnet::rnn::{rnn_forward, rnn_train, LinearRnnParams, RnnTrainConfig};
use floodnet::scenario::streak_preset;
use ndarray::array;

pub fn run_example() -> floodnet::Result<()> {
    let truth = LinearRnnParams {
        kernel: array![
            [0.50, 0.02, 0.01, 0.03],
            [0.30, 0.02, 0.05, 0.12],
            [0.01, 0.00, 0.03, 0.60],
            [0.10, 0.08, 0.03, 0.30],
            [0.09, 0.01, 0.07, 0.32]
        ],
        recurrence: ndarray::Array2::from_diag(&array![0.1, 0.6, 0.55, 0.2]),
        window: 10,
    };
    let inj = streak_preset().injection();
    let peak = inj.iter().copied().fold(0.0, f64::max);
    let inputs = inj.mapv(|v| v / peak);
    let targets = rnn_forward(&truth, inputs.view())?;

    let config = RnnTrainConfig::default();
    let fit = rnn_train(&config, inputs.view(), targets.view())?;
    for e in [0, 9, 49, 99, 249, config.epochs - 1] {
        println!("epoch {:>3}: loss {:.3e}", e + 1, fit.loss_trajectory[e]);
    }
    println!("recovered diag(B): {:.4?}", fit.params.recurrence_diag());
    println!("true      diag(B): {:.4?}", truth.recurrence_diag());
    assert!(fit.loss_trajectory.windows(2).all(|w| w[1] <= w[0]));
    assert!(fit.params.is_feasible());
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
