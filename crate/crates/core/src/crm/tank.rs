//! The single-control-volume recursion shared by every CRM variant.
//!
//! A tank is driven by `k` input columns through gains `g`, decays with time
//! constant `τ`, and optionally feels a producer BHP drive. For `n ≥ 1`:
//!
//! ```text
//! a_n = exp(−Δt_n/τ)
//! u_n = Σ_i g_i·x_{n,i} − J·τ·Δp_n/Δt_n
//! q_n = a_n·q_{n−1} + (1 − a_n)·u_n
//! ```
//!
//! with `q_0 = q0`. Each partial derivative obeys its own linear recursion
//! with the same decay factor, so sensitivities are carried forward in the
//! same sweep as the rates.

use ndarray::{ArrayView1, ArrayView2};

pub(crate) struct Tank<'a> {
    pub tau: f64,
    pub q0: f64,
    pub gains: &'a [f64],
    /// Productivity index; the pressure drive is active only with `bhp` present.
    pub j_index: Option<f64>,
}

/// Sensitivities of the current rate sample.
pub(crate) struct Sens<'a> {
    pub tau: f64,
    pub q0: f64,
    pub gains: &'a [f64],
    pub j: f64,
}

/// Rates only.
pub(crate) fn forward(
    times: &[f64],
    tank: &Tank<'_>,
    inputs: ArrayView2<'_, f64>,
    bhp: Option<ArrayView1<'_, f64>>,
    mut sink: impl FnMut(usize, f64),
) {
    let press = tank.j_index.zip(bhp);
    let mut q = tank.q0;
    sink(0, q);
    for n in 1..times.len() {
        let dt = times[n] - times[n - 1];
        let a = (-dt / tank.tau).exp();
        let one_minus_a = -(-dt / tank.tau).exp_m1();
        let mut u: f64 = inputs.row(n).iter().zip(tank.gains).map(|(x, g)| g * x).sum();
        if let Some((j, p)) = press {
            u -= j * tank.tau * (p[n] - p[n - 1]) / dt;
        }
        q = a * q + one_minus_a * u;
        sink(n, q);
    }
}

/// Rates plus forward-mode sensitivities with respect to the tank's own parameters.
pub(crate) fn sweep(
    times: &[f64],
    tank: &Tank<'_>,
    inputs: ArrayView2<'_, f64>,
    bhp: Option<ArrayView1<'_, f64>>,
    mut sink: impl FnMut(usize, f64, &Sens<'_>),
) {
    let tau = tank.tau;
    let k = tank.gains.len();
    let press = tank.j_index.zip(bhp);

    let mut q = tank.q0;
    let mut d_tau = 0.0;
    let mut d_q0 = 1.0;
    let mut d_gains = vec![0.0; k];
    let mut d_j = 0.0;
    sink(
        0,
        q,
        &Sens {
            tau: d_tau,
            q0: d_q0,
            gains: &d_gains,
            j: d_j,
        },
    );

    for n in 1..times.len() {
        let dt = times[n] - times[n - 1];
        let a = (-dt / tau).exp();
        let one_minus_a = -(-dt / tau).exp_m1();
        let da_dtau = a * dt / (tau * tau);

        let x = inputs.row(n);
        let mut u = 0.0;
        for (xi, gi) in x.iter().zip(tank.gains) {
            u += gi * xi;
        }
        let (du_dtau, du_dj) = match press {
            Some((j, p)) => {
                let slope = (p[n] - p[n - 1]) / dt;
                u -= j * tau * slope;
                (-j * slope, -tau * slope)
            }
            None => (0.0, 0.0),
        };

        // d/dτ of a·q + (1−a)·u, product rule through a, q and u
        d_tau = a * d_tau + da_dtau * (q - u) + one_minus_a * du_dtau;
        d_q0 *= a;
        for (d, xi) in d_gains.iter_mut().zip(x.iter()) {
            *d = a * *d + one_minus_a * xi;
        }
        d_j = a * d_j + one_minus_a * du_dj;
        q = a * q + one_minus_a * u;

        sink(
            n,
            q,
            &Sens {
                tau: d_tau,
                q0: d_q0,
                gains: &d_gains,
                j: d_j,
            },
        );
    }
}
