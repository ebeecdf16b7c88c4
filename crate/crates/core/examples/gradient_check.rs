//! Analytic CRMP sensitivities against central finite differences for every
//! parameter of a producer with a BHP drive term.
//!
//! ```bash
//! cargo run -p floodnet --example gradient_check
//! ```

use floodnet::crm::{crmp_gradients, crmp_predict, CrmpParams};
use floodnet::series::RateSeries;
use ndarray::{array, Array1};

fn central(
    params: &CrmpParams,
    series: &RateSeries,
    set: impl Fn(&mut CrmpParams) -> &mut f64,
) -> floodnet::Result<Array1<f64>> {
    let mut plus = params.clone();
    let theta = *set(&mut plus);
    let h = 1e-6 * theta.abs().max(1.0);
    *set(&mut plus) = theta + h;
    let mut minus = params.clone();
    *set(&mut minus) = theta - h;
    let d = (crmp_predict(&plus, series)? - crmp_predict(&minus, series)?) / (2.0 * h);
    Ok(d.column(0).to_owned())
}

fn report(name: &str, analytic: Array1<f64>, fd: Array1<f64>) -> f64 {
    let diff = (&analytic - &fd).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = analytic.iter().chain(&fd).fold(0.0f64, |m, v| m.max(v.abs()));
    let rel = if scale > 0.0 { diff / scale } else { 0.0 };
    println!("{name:<8} relative error {rel:.2e}");
    rel
}

pub fn run_example() -> floodnet::Result<()> {
    let series = RateSeries::new(
        vec![0.0, 0.5, 1.5, 2.0, 3.5, 5.0],
        array![
            [300.0, 100.0],
            [350.0, 80.0],
            [350.0, 0.0],
            [500.0, 0.0],
            [420.0, 60.0],
            [420.0, 60.0]
        ],
        None,
        Some(array![[2100.0], [2050.0], [2010.0], [1990.0], [2030.0], [2000.0]]),
    );
    let params = CrmpParams {
        tau: vec![1.3],
        gains: array![[0.9], [0.6]],
        q0: vec![250.0],
        j_index: Some(vec![1.7]),
    };
    let g = crmp_gradients(&params, &series)?;
    let mut worst = 0.0f64;
    worst = worst.max(report(
        "τ",
        g.d_tau.column(0).to_owned(),
        central(&params, &series, |p| &mut p.tau[0])?,
    ));
    worst = worst.max(report(
        "q0",
        g.d_q0.column(0).to_owned(),
        central(&params, &series, |p| &mut p.q0[0])?,
    ));
    for i in 0..2 {
        let fd = central(&params, &series, |p| &mut p.gains[[i, 0]])?;
        worst = worst.max(report(
            &format!("f_{}1", i + 1),
            g.d_gains.slice(ndarray::s![.., i, 0]).to_owned(),
            fd,
        ));
    }
    let dj = g.d_j.as_ref().expect("BHP present").column(0).to_owned();
    worst = worst.max(report(
        "J",
        dj,
        central(&params, &series, |p| &mut p.j_index.as_mut().unwrap()[0])?,
    ));
    assert!(worst < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> floodnet::Result<()> {
    run_example()
}
