use ndarray::{Array2, Array3};

use super::tank::{self, Tank};
use super::CrmpParams;
use crate::error::Result;
use crate::series::RateSeries;

/// Partial derivatives of every predicted CRMP rate with respect to its own
/// producer's parameters.
///
/// Cross-producer partials are identically zero and are not stored:
/// `d_tau[[n, j]] = ∂q_j(t_n)/∂τ_j`, `d_gains[[n, i, j]] = ∂q_j(t_n)/∂f_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientBundle {
    /// `[n_steps × N_pro]`
    pub d_tau: Array2<f64>,
    /// `[n_steps × N_inj × N_pro]`
    pub d_gains: Array3<f64>,
    /// `[n_steps × N_pro]`
    pub d_q0: Array2<f64>,
    /// `[n_steps × N_pro]`, present when both `j_index` and BHP are.
    pub d_j: Option<Array2<f64>>,
}

/// Forward-mode derivatives of [`super::crmp_predict`].
pub fn crmp_gradients(params: &CrmpParams, series: &RateSeries) -> Result<GradientBundle> {
    params.check_against(series)?;
    let n = series.n_steps();
    let (ni, np) = params.gains.dim();
    let with_press = params.j_index.is_some() && series.bhp.is_some();

    let mut d_tau = Array2::zeros((n, np));
    let mut d_gains = Array3::zeros((n, ni, np));
    let mut d_q0 = Array2::zeros((n, np));
    let mut d_j = with_press.then(|| Array2::zeros((n, np)));

    for j in 0..np {
        let gains = params.tank_gains(j);
        let tank = Tank {
            tau: params.tau[j],
            q0: params.q0[j],
            gains: &gains,
            j_index: params.j_index.as_ref().map(|v| v[j]),
        };
        let bhp = series.bhp.as_ref().map(|b| b.column(j));
        tank::sweep(&series.times, &tank, series.injection.view(), bhp, |k, _, s| {
            d_tau[[k, j]] = s.tau;
            d_q0[[k, j]] = s.q0;
            for (i, g) in s.gains.iter().enumerate() {
                d_gains[[k, i, j]] = *g;
            }
            if let Some(dj) = d_j.as_mut() {
                dj[[k, j]] = s.j;
            }
        });
    }
    Ok(GradientBundle {
        d_tau,
        d_gains,
        d_q0,
        d_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn q0_sensitivity_is_pure_decay() {
        let p = CrmpParams {
            tau: vec![1.7, 0.4],
            gains: array![[0.3, 0.7]],
            q0: vec![20.0, 5.0],
            j_index: None,
        };
        let s = RateSeries::new(
            vec![0.0, 0.5, 1.25, 3.0],
            array![[1.0], [100.0], [50.0], [0.0]],
            None,
            None,
        );
        let g = crmp_gradients(&p, &s).unwrap();
        for (n, t) in s.times.iter().enumerate() {
            for j in 0..2 {
                let expected = (-t / p.tau[j]).exp();
                assert!((g.d_q0[[n, j]] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_injection_gives_zero_gain_partials() {
        let p = CrmpParams {
            tau: vec![2.0],
            gains: array![[0.5], [0.5]],
            q0: vec![30.0],
            j_index: None,
        };
        let s = RateSeries::uniform(1.0, Array2::zeros((6, 2)));
        let g = crmp_gradients(&p, &s).unwrap();
        assert!(g.d_gains.iter().all(|&v| v == 0.0));
        assert!(g.d_j.is_none());
    }
}
