//! Capacitance-resistance models: tank (CRMT), producer (CRMP) and
//! injector-producer pair (CRMIP) control volumes.
//!
//! Every variant discretizes the same first-order response under the
//! assumption that injection is constant over each step and producer BHP
//! varies linearly across it. The time constant `τ = c_t·V_p/J` lumps total
//! compressibility, drainage pore volume and productivity index; those never
//! appear separately in the fitted models.
//!
//! Row 0 of every prediction is the initial rate `q(t_0)`; injection in row 0
//! is never read. Row `n ≥ 1` applies one recursion step over `[t_{n−1}, t_n]`
//! using the injection recorded at `t_n`.

mod gradient;
pub(crate) mod tank;

use ndarray::{s, Array1, Array2, Array3, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{matrix_serde, RateSeries};

pub use gradient::{crmp_gradients, GradientBundle};

use tank::Tank;

/// Smallest admissible time constant, in days.
pub const TAU_MIN: f64 = 1e-4;

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= TAU_MIN) || !tau.is_finite() {
        return Err(Error::InvalidParam(format!(
            "time constant {tau} must be finite and at least {TAU_MIN}"
        )));
    }
    Ok(())
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParam(format!(
            "{what} must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

/// Whole-field tank: one net-injection signal, one net production signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrmtParams {
    pub tau: f64,
    /// Fraction of net injection supporting the well group.
    pub f_field: f64,
    pub q0: f64,
}

impl CrmtParams {
    pub fn check(&self) -> Result<()> {
        check_tau(self.tau)?;
        if !(0.0..=1.0).contains(&self.f_field) {
            return Err(Error::InvalidParam(format!(
                "field gain {} outside [0, 1]",
                self.f_field
            )));
        }
        check_nonneg("q0", self.q0)
    }
}

/// Per-producer drainage volumes with an injector-to-producer gain matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrmpParams {
    /// `[N_pro]`
    pub tau: Vec<f64>,
    /// `[N_inj × N_pro]`, row `i` is injector `i`'s allocation across producers.
    #[serde(with = "matrix_serde")]
    pub gains: Array2<f64>,
    /// `[N_pro]`
    pub q0: Vec<f64>,
    /// `[N_pro]` productivity indices; `None` drops the BHP term.
    pub j_index: Option<Vec<f64>>,
}

impl CrmpParams {
    pub fn n_inj(&self) -> usize {
        self.gains.nrows()
    }

    pub fn n_pro(&self) -> usize {
        self.gains.ncols()
    }

    /// Shape and bound checks. Gain row sums are not checked here; see
    /// [`crate::fit::GainConstraint`].
    pub fn check(&self) -> Result<()> {
        let m = self.n_pro();
        if self.tau.len() != m || self.q0.len() != m {
            return Err(Error::Shape(format!(
                "tau has {} and q0 has {} entries for {m} producers",
                self.tau.len(),
                self.q0.len()
            )));
        }
        if let Some(j) = &self.j_index {
            if j.len() != m {
                return Err(Error::Shape(format!(
                    "j_index has {} entries for {m} producers",
                    j.len()
                )));
            }
            j.iter().try_for_each(|&v| check_nonneg("productivity index", v))?;
        }
        self.tau.iter().try_for_each(|&t| check_tau(t))?;
        self.gains.iter().try_for_each(|&g| check_nonneg("gain", g))?;
        self.q0.iter().try_for_each(|&q| check_nonneg("q0", q))
    }

    fn check_against(&self, series: &RateSeries) -> Result<()> {
        self.check()?;
        if series.injection.ncols() != self.n_inj() {
            return Err(Error::Shape(format!(
                "series has {} injectors, parameters have {}",
                series.injection.ncols(),
                self.n_inj()
            )));
        }
        if let Some(b) = &series.bhp {
            if b.ncols() != self.n_pro() {
                return Err(Error::Shape(format!(
                    "series has BHP for {} producers, parameters have {}",
                    b.ncols(),
                    self.n_pro()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn tank_gains(&self, j: usize) -> Vec<f64> {
        self.gains.column(j).to_vec()
    }
}

/// One control volume per injector-producer pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrmipParams {
    #[serde(with = "matrix_serde")]
    pub tau: Array2<f64>,
    #[serde(with = "matrix_serde")]
    pub gains: Array2<f64>,
    #[serde(with = "matrix_serde")]
    pub q0: Array2<f64>,
    #[serde(with = "matrix_serde::option", default)]
    pub j_index: Option<Array2<f64>>,
}

impl CrmipParams {
    pub fn n_inj(&self) -> usize {
        self.gains.nrows()
    }

    pub fn n_pro(&self) -> usize {
        self.gains.ncols()
    }

    /// Embeds CRMP: every pair feeding producer `j` shares `τ_j`, and both
    /// `q_j(t_0)` and `J_j` are split evenly across the injectors, since each
    /// pair carries its own BHP drive term and the pair rates are summed.
    pub fn from_crmp(p: &CrmpParams) -> Self {
        let (ni, np) = p.gains.dim();
        let tau = Array2::from_shape_fn((ni, np), |(_, j)| p.tau[j]);
        let q0 = Array2::from_shape_fn((ni, np), |(_, j)| p.q0[j] / ni as f64);
        let j_index = p
            .j_index
            .as_ref()
            .map(|jv| Array2::from_shape_fn((ni, np), |(_, j)| jv[j] / ni as f64));
        CrmipParams {
            tau,
            gains: p.gains.clone(),
            q0,
            j_index,
        }
    }

    /// Trainable parameter count: 3 or 4 per pair depending on the BHP term.
    pub fn n_params(&self) -> usize {
        let per = if self.j_index.is_some() { 4 } else { 3 };
        per * self.gains.len()
    }

    pub fn check(&self) -> Result<()> {
        let dim = self.gains.dim();
        if self.tau.dim() != dim || self.q0.dim() != dim {
            return Err(Error::Shape("tau, gains and q0 must share one shape".into()));
        }
        if let Some(j) = &self.j_index {
            if j.dim() != dim {
                return Err(Error::Shape("j_index shape differs from gains".into()));
            }
            j.iter().try_for_each(|&v| check_nonneg("productivity index", v))?;
        }
        self.tau.iter().try_for_each(|&t| check_tau(t))?;
        self.gains.iter().try_for_each(|&g| check_nonneg("gain", g))?;
        self.q0.iter().try_for_each(|&q| check_nonneg("q0", q))
    }
}

/// BHP drive for one step: productivity index and pressure change over the step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BhpTerm {
    pub j_index: f64,
    pub delta_p: f64,
}

/// One CRMP recursion step for producer `j`.
pub fn crmp_step(
    q_prev: f64,
    dt: f64,
    tau: f64,
    gains_col: &[f64],
    inj_now: &[f64],
    bhp: Option<BhpTerm>,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParam(format!("time constant {tau} must be positive")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParam(format!("time step {dt} must be positive")));
    }
    if gains_col.len() != inj_now.len() {
        return Err(Error::Shape(format!(
            "{} gains for {} injection rates",
            gains_col.len(),
            inj_now.len()
        )));
    }
    let a = (-dt / tau).exp();
    let mut u: f64 = gains_col.iter().zip(inj_now).map(|(g, x)| g * x).sum();
    if let Some(b) = bhp {
        u -= b.j_index * tau * b.delta_p / dt;
    }
    Ok(a * q_prev + -(-dt / tau).exp_m1() * u)
}

/// Predicted production `[n_steps × N_pro]`, seeded with `params.q0`.
pub fn crmp_predict(params: &CrmpParams, series: &RateSeries) -> Result<Array2<f64>> {
    crmp_predict_from(params, series, &params.q0)
}

/// As [`crmp_predict`] but with row 0 set to `q_start`.
pub fn crmp_predict_from(params: &CrmpParams, series: &RateSeries, q_start: &[f64]) -> Result<Array2<f64>> {
    params.check_against(series)?;
    if q_start.len() != params.n_pro() {
        return Err(Error::Shape(format!(
            "{} starting rates for {} producers",
            q_start.len(),
            params.n_pro()
        )));
    }
    let n = series.n_steps();
    let mut out = Array2::zeros((n, params.n_pro()));
    for j in 0..params.n_pro() {
        let gains = params.tank_gains(j);
        let tank = Tank {
            tau: params.tau[j],
            q0: q_start[j],
            gains: &gains,
            j_index: params.j_index.as_ref().map(|v| v[j]),
        };
        let bhp = series.bhp.as_ref().map(|b| b.column(j));
        tank::forward(&series.times, &tank, series.injection.view(), bhp, |k, q| {
            out[[k, j]] = q
        });
    }
    Ok(out)
}

/// Non-recursive evaluation: every row is the decayed initial rate plus an
/// explicit sum of decayed per-step drives.
pub fn crmp_predict_closed_form(params: &CrmpParams, series: &RateSeries) -> Result<Array2<f64>> {
    params.check_against(series)?;
    let n = series.n_steps();
    let t = &series.times;
    let mut out = Array2::zeros((n, params.n_pro()));
    for j in 0..params.n_pro() {
        let tau = params.tau[j];
        let gains = params.gains.column(j);
        let press = params
            .j_index
            .as_ref()
            .zip(series.bhp.as_ref())
            .map(|(jv, b)| (jv[j], b.column(j)));
        // drive u_k for k ≥ 1
        let drive: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 {
                    return 0.0;
                }
                let mut u = gains.dot(&series.injection.row(k));
                if let Some((jj, p)) = &press {
                    u -= jj * tau * (p[k] - p[k - 1]) / (t[k] - t[k - 1]);
                }
                u
            })
            .collect();
        for row in 0..n {
            let mut q = params.q0[j] * (-(t[row] - t[0]) / tau).exp();
            for k in 1..=row {
                let decay = (-(t[row] - t[k]) / tau).exp();
                let fill = -(-(t[k] - t[k - 1]) / tau).exp_m1();
                q += decay * fill * drive[k];
            }
            out[[row, j]] = q;
        }
    }
    Ok(out)
}

/// Tank model on summed injection; BHP is ignored.
pub fn crmt_predict(params: &CrmtParams, series: &RateSeries) -> Result<Array1<f64>> {
    params.check()?;
    let total = series.injection.sum_axis(Axis(1)).insert_axis(Axis(1));
    let gains = [params.f_field];
    let tank = Tank {
        tau: params.tau,
        q0: params.q0,
        gains: &gains,
        j_index: None,
    };
    let mut out = Array1::zeros(series.n_steps());
    tank::forward(&series.times, &tank, total.view(), None, |k, q| out[k] = q);
    Ok(out)
}

/// Per-pair rates `[n_steps × N_inj × N_pro]` and producer totals `[n_steps × N_pro]`.
pub fn crmip_predict(params: &CrmipParams, series: &RateSeries) -> Result<(Array3<f64>, Array2<f64>)> {
    params.check()?;
    let (ni, np) = params.gains.dim();
    if series.injection.ncols() != ni {
        return Err(Error::Shape(format!(
            "series has {} injectors, parameters have {ni}",
            series.injection.ncols()
        )));
    }
    if let Some(b) = &series.bhp {
        if b.ncols() != np {
            return Err(Error::Shape(format!(
                "series has BHP for {} producers, parameters have {np}",
                b.ncols()
            )));
        }
    }
    let n = series.n_steps();
    let mut pairs = Array3::zeros((n, ni, np));
    for i in 0..ni {
        let input = series.injection.slice(s![.., i..i + 1]);
        for j in 0..np {
            let gains = [params.gains[[i, j]]];
            let tank = Tank {
                tau: params.tau[[i, j]],
                q0: params.q0[[i, j]],
                gains: &gains,
                j_index: params.j_index.as_ref().map(|m| m[[i, j]]),
            };
            let bhp: Option<ArrayView1<'_, f64>> = series.bhp.as_ref().map(|b| b.column(j));
            tank::forward(&series.times, &tank, input, bhp, |k, q| pairs[[k, i, j]] = q);
        }
    }
    let totals = pairs.sum_axis(Axis(1));
    Ok((pairs, totals))
}
