//! Random configurations and comparison helpers shared by the integration tests.
#![allow(dead_code)]

use floodnet::crm::CrmpParams;
use floodnet::series::RateSeries;
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gains with unit row sums, `τ ∈ [0.2, 10]` log-uniform, `q0 ∈ [0, 500]`,
/// productivity indices in `[0, 5]` when `with_bhp`.
pub fn random_params(rng: &mut ChaCha8Rng, ni: usize, np: usize, with_bhp: bool) -> CrmpParams {
    let mut gains = Array2::from_shape_fn((ni, np), |_| rng.random_range(0.0..1.0));
    for mut row in gains.rows_mut() {
        let s = row.sum();
        row /= s;
    }
    CrmpParams {
        tau: (0..np)
            .map(|_| (rng.random_range(0.2f64.ln()..10f64.ln())).exp())
            .collect(),
        gains,
        q0: (0..np).map(|_| rng.random_range(0.0..500.0)).collect(),
        j_index: with_bhp.then(|| (0..np).map(|_| rng.random_range(0.0..5.0)).collect()),
    }
}

/// Piecewise-constant injection in `[0, 1000]` with occasional shut-ins.
pub fn random_injection(rng: &mut ChaCha8Rng, n: usize, ni: usize) -> Array2<f64> {
    let mut inj = Array2::zeros((n, ni));
    for i in 0..ni {
        let mut rate = rng.random_range(100.0..1000.0);
        for k in 0..n {
            if rng.random_bool(0.15) {
                rate = if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random_range(100.0..1000.0)
                };
            }
            inj[[k, i]] = rate;
        }
    }
    inj
}

/// Random-walk bottomhole pressures around 2000.
pub fn random_bhp(rng: &mut ChaCha8Rng, n: usize, np: usize) -> Array2<f64> {
    let mut bhp = Array2::zeros((n, np));
    for j in 0..np {
        let mut p = rng.random_range(1500.0..2500.0);
        for k in 0..n {
            p += rng.random_range(-40.0..40.0);
            bhp[[k, j]] = p;
        }
    }
    bhp
}

/// Strictly increasing times with steps in `[0.25, 2]` days when `nonuniform`,
/// otherwise unit steps.
pub fn random_times(rng: &mut ChaCha8Rng, n: usize, nonuniform: bool) -> Vec<f64> {
    let mut t = 0.0;
    (0..n)
        .map(|k| {
            if k > 0 {
                t += if nonuniform { rng.random_range(0.25..2.0) } else { 1.0 };
            }
            t
        })
        .collect()
}

pub fn random_series(
    rng: &mut ChaCha8Rng,
    n: usize,
    ni: usize,
    np: usize,
    with_bhp: bool,
    nonuniform: bool,
) -> RateSeries {
    let times = random_times(rng, n, nonuniform);
    let inj = random_injection(rng, n, ni);
    let bhp = with_bhp.then(|| random_bhp(rng, n, np));
    RateSeries::new(times, inj, None, bhp)
}

/// `max |a − b| / max |b|`, the reference being `b`.
pub fn rel_err(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n
}
