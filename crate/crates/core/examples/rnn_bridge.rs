//! Maps CRMP parameters onto the linear recurrent network and shows that
//! the network reproduces the CRM prediction.
//!
//! ```bash
//! cargo run -p floodnet --example rnn_bridge
//! ```

use floodnet::crm::{crmp_predict, CrmpParams};
use floodnet::rnn::{crm_to_rnn, rnn_forward, rnn_forward_seeded};
use floodnet::series::RateSeries;
use ndarray::array;

pub fn run_example() -> floodnet::Result<()> {
    let params = CrmpParams {
        tau: vec![0.5, 3.0],
        gains: array![[0.6, 0.4], [0.1, 0.9]],
        q0: vec![0.0, 0.0],
        j_index: None,
    };
    let series = RateSeries::uniform(
        1.0,
        array![
            [0.0, 0.0],
            [500.0, 100.0],
            [500.0, 100.0],
            [200.0, 400.0],
            [200.0, 400.0],
            [0.0, 400.0]
        ],
    );
    let net = crm_to_rnn(&params, 1.0, series.n_steps())?;
    println!("B = diag({:.4}, {:.4})", net.recurrence[[0, 0]], net.recurrence[[1, 1]]);
    println!("A =\n{:.4}", net.kernel);

    let crm = crmp_predict(&params, &series)?;
    let rnn = rnn_forward(&net, series.injection.view())?;
    let gap = (&crm - &rnn).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("zero state, x_0 = 0: max |CRM − RNN| = {gap:.2e}");
    assert!(gap < 1e-9);

    // with a non-zero initial rate the network is seeded with q0 instead
    let warm = CrmpParams {
        q0: vec![150.0, 60.0],
        ..params
    };
    let seeded = rnn_forward_seeded(&net, series.injection.view(), &warm.q0)?;
    let gap = (&crmp_predict(&warm, &series)? - &seeded)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    println!("seeded with q0: max |CRM − RNN| = {gap:.2e}");
    assert!(gap < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
