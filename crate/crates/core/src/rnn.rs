//! Linear stateless recurrent network.
//!
//! `y_t = Aᵀ·x_t + B·y_{t−1}` with linear activation and no bias. Each output
//! is evaluated over a window of the last `TS + 1` inputs with a zero state
//! entering the window, so
//!
//! ```text
//! y_t = Σ_{m=0}^{min(t, TS)} B^m · Aᵀ · x_{t−m}
//! ```
//!
//! `A` (kernel, `[N_inj × N_pro]`) is kept non-negative and `B` (recurrence,
//! `[N_pro × N_pro]`) diagonal with entries in `[0, 1)`.

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crm::CrmpParams;
use crate::error::{Error, Result};
use crate::series::matrix_serde;

/// Upper clip for the recurrence diagonal.
pub const RECURRENCE_MAX: f64 = 1.0 - 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRnnParams {
    /// `A`, `[N_inj × N_pro]`.
    #[serde(with = "matrix_serde")]
    pub kernel: Array2<f64>,
    /// `B`, `[N_pro × N_pro]`.
    #[serde(with = "matrix_serde")]
    pub recurrence: Array2<f64>,
    /// Lookback `TS`; each window spans `TS + 1` inputs.
    pub window: usize,
}

impl LinearRnnParams {
    pub fn zeros(n_inj: usize, n_pro: usize, window: usize) -> Self {
        LinearRnnParams {
            kernel: Array2::zeros((n_inj, n_pro)),
            recurrence: Array2::zeros((n_pro, n_pro)),
            window,
        }
    }

    /// Small non-negative uniform init in `[0, 0.1]` for `A` and `diag(B)`.
    pub fn random(n_inj: usize, n_pro: usize, window: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = Array2::from_shape_fn((n_inj, n_pro), |_| rng.random_range(0.0..=0.1));
        let mut recurrence = Array2::zeros((n_pro, n_pro));
        for j in 0..n_pro {
            recurrence[[j, j]] = rng.random_range(0.0..=0.1);
        }
        LinearRnnParams {
            kernel,
            recurrence,
            window,
        }
    }

    pub fn n_inj(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn n_pro(&self) -> usize {
        self.kernel.ncols()
    }

    pub fn recurrence_diag(&self) -> Vec<f64> {
        self.recurrence.diag().to_vec()
    }

    /// Clip `A` at zero, zero the off-diagonal of `B`, clip `diag(B)` to `[0, 1 − 1e−6]`.
    pub fn project(&mut self) {
        self.kernel.mapv_inplace(|a| a.max(0.0));
        for ((r, c), b) in self.recurrence.indexed_iter_mut() {
            *b = if r == c { b.clamp(0.0, RECURRENCE_MAX) } else { 0.0 };
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.kernel.iter().all(|&a| a >= 0.0)
            && self
                .recurrence
                .indexed_iter()
                .all(|((r, c), &b)| if r == c { (0.0..1.0).contains(&b) } else { b == 0.0 })
    }

    pub fn check(&self) -> Result<()> {
        let m = self.n_pro();
        if self.recurrence.dim() != (m, m) {
            return Err(Error::Shape(format!(
                "recurrence is {:?}, expected {m}×{m}",
                self.recurrence.dim()
            )));
        }
        if self.kernel.iter().chain(self.recurrence.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("non-finite network weight".into()));
        }
        Ok(())
    }

    fn check_inputs(&self, inputs: &ArrayView2<'_, f64>) -> Result<()> {
        self.check()?;
        if inputs.ncols() != self.n_inj() {
            return Err(Error::Shape(format!(
                "inputs have {} columns, kernel expects {}",
                inputs.ncols(),
                self.n_inj()
            )));
        }
        Ok(())
    }
}

/// Windowed stateless evaluation, `[n_steps × N_pro]`.
pub fn rnn_forward(params: &LinearRnnParams, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    params.check_inputs(&inputs)?;
    let n = inputs.nrows();
    let drive = inputs.dot(&params.kernel);
    let mut out = Array2::zeros((n, params.n_pro()));
    for t in 0..n {
        let start = t.saturating_sub(params.window);
        let mut state = Array1::<f64>::zeros(params.n_pro());
        for s in start..=t {
            state = params.recurrence.dot(&state) + drive.row(s);
        }
        out.row_mut(t).assign(&state);
    }
    Ok(out)
}

/// Unwindowed recursion with the first output fixed at `y0`:
/// `y_0 = y0`, `y_t = Aᵀ·x_t + B·y_{t−1}` for `t ≥ 1`.
///
/// Requires `window + 1 ≥ n_steps` so that no truncation is implied.
pub fn rnn_forward_seeded(params: &LinearRnnParams, inputs: ArrayView2<'_, f64>, y0: &[f64]) -> Result<Array2<f64>> {
    params.check_inputs(&inputs)?;
    let n = inputs.nrows();
    if params.window + 1 < n {
        return Err(Error::InvalidParam(format!(
            "seeded evaluation needs a window of at least {} steps, have {}",
            n.saturating_sub(1),
            params.window
        )));
    }
    if y0.len() != params.n_pro() {
        return Err(Error::Shape(format!(
            "{} seed values for {} producers",
            y0.len(),
            params.n_pro()
        )));
    }
    let drive = inputs.dot(&params.kernel);
    let mut out = Array2::zeros((n, params.n_pro()));
    if n == 0 {
        return Ok(out);
    }
    let mut state = Array1::from(y0.to_vec());
    out.row_mut(0).assign(&state);
    for t in 1..n {
        state = params.recurrence.dot(&state) + drive.row(t);
        out.row_mut(t).assign(&state);
    }
    Ok(out)
}

/// Maps CRMP parameters onto an equivalent network for a uniform step `dt`:
/// `B_jj = e^(−dt/τ_j)`, `A_ij = (1 − e^(−dt/τ_j))·f_ij`.
///
/// Seeded with `q0` through [`rnn_forward_seeded`], the network reproduces
/// [`crate::crm::crmp_predict`] on BHP-free series. `window` should cover the
/// whole series.
pub fn crm_to_rnn(params: &CrmpParams, dt: f64, window: usize) -> Result<LinearRnnParams> {
    params.check()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParam(format!("time step {dt} must be positive")));
    }
    let np = params.n_pro();
    let mut recurrence = Array2::zeros((np, np));
    let mut kernel = params.gains.clone();
    for j in 0..np {
        let x = -dt / params.tau[j];
        recurrence[[j, j]] = x.exp();
        kernel.column_mut(j).mapv_inplace(|f| -x.exp_m1() * f);
    }
    Ok(LinearRnnParams {
        kernel,
        recurrence,
        window,
    })
}

/// The kernel matrix read as an injector-to-producer connectivity estimate.
pub fn connectivity_from_rnn(params: &LinearRnnParams) -> Array2<f64> {
    params.kernel.clone()
}

/// How each epoch's full-batch gradient step is sized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StepRule {
    /// First trial step is the learning rate, later ones Barzilai-Borwein;
    /// trial steps are halved until the loss does not increase, so the loss
    /// trajectory is non-increasing for any learning rate.
    #[default]
    #[serde(rename = "spectral")]
    Spectral,
    /// Fixed learning rate with classical momentum; diverges if the rate is
    /// too large.
    #[serde(rename = "fixed")]
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnnTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Classical momentum coefficient for [`StepRule::Fixed`]; 0 gives plain
    /// gradient descent.
    pub momentum: f64,
    pub step_rule: StepRule,
    pub window: usize,
    pub seed: u64,
}

impl Default for RnnTrainConfig {
    fn default() -> Self {
        RnnTrainConfig {
            epochs: 500,
            learning_rate: 0.05,
            momentum: 0.0,
            step_rule: StepRule::Spectral,
            window: 10,
            seed: 0,
        }
    }
}

impl RnnTrainConfig {
    pub fn check(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParam("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParam(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParam(format!(
                "momentum {} outside [0, 1)",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Gradient of [`window_loss`] with respect to `A` and `diag(B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnGradient {
    pub kernel: Array2<f64>,
    pub recurrence_diag: Array1<f64>,
}

/// Number of full training windows: outputs at `t = TS, …, n − 1`.
fn n_windows(n: usize, window: usize) -> usize {
    n.saturating_sub(window)
}

/// Mean squared error over all full `TS + 1` windows and producers, with the
/// gradient with respect to `A` and `diag(B)`.
///
/// Off-diagonal entries of `B` are taken as zero.
pub fn window_loss(
    params: &LinearRnnParams,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<(f64, RnnGradient)> {
    params.check_inputs(&inputs)?;
    let n = inputs.nrows();
    let (ni, np) = params.kernel.dim();
    if targets.dim() != (n, np) {
        return Err(Error::Shape(format!(
            "targets are {:?}, expected {n}×{np}",
            targets.dim()
        )));
    }
    let ts = params.window;
    let windows = n_windows(n, ts);
    if windows == 0 {
        return Err(Error::InvalidParam(format!(
            "window {ts} leaves no full training window in {n} steps"
        )));
    }
    let drive = inputs.dot(&params.kernel);
    let b = params.recurrence.diag().to_owned();
    let scale = 1.0 / (windows * np) as f64;

    let mut loss = 0.0;
    let mut g_kernel = Array2::zeros((ni, np));
    let mut g_b = Array1::zeros(np);
    let mut d_a = vec![0.0; ni];
    for t in ts..n {
        for j in 0..np {
            let bj = b[j];
            let mut y = 0.0;
            let mut dy_db = 0.0;
            d_a.iter_mut().for_each(|d| *d = 0.0);
            for s in t - ts..=t {
                dy_db = bj * dy_db + y;
                y = bj * y + drive[[s, j]];
                for (d, x) in d_a.iter_mut().zip(inputs.row(s)) {
                    *d = bj * *d + x;
                }
            }
            let r = y - targets[[t, j]];
            loss += r * r;
            let w = 2.0 * r * scale;
            g_b[j] += w * dy_db;
            for (i, d) in d_a.iter().enumerate() {
                g_kernel[[i, j]] += w * d;
            }
        }
    }
    Ok((
        loss * scale,
        RnnGradient {
            kernel: g_kernel,
            recurrence_diag: g_b,
        },
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RnnFit {
    pub params: LinearRnnParams,
    /// Loss after each epoch's update; `epochs` entries.
    pub loss_trajectory: Vec<f64>,
}

/// Full-batch projected gradient descent from the seeded random init.
pub fn rnn_train(config: &RnnTrainConfig, inputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<RnnFit> {
    let init = LinearRnnParams::random(inputs.ncols(), targets.ncols(), config.window, config.seed);
    rnn_train_from(config, init, inputs, targets)
}

/// As [`rnn_train`] from an explicit starting point (projected first).
pub fn rnn_train_from(
    config: &RnnTrainConfig,
    init: LinearRnnParams,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<RnnFit> {
    config.check()?;
    if inputs.nrows() != targets.nrows() {
        return Err(Error::Shape(format!(
            "{} input rows for {} target rows",
            inputs.nrows(),
            targets.nrows()
        )));
    }
    let mut params = init;
    params.window = config.window;
    params.project();

    let mut trajectory = Vec::with_capacity(config.epochs);
    match config.step_rule {
        StepRule::Fixed => train_fixed(config, &mut params, inputs, targets, &mut trajectory)?,
        StepRule::Spectral => train_spectral(config, &mut params, inputs, targets, &mut trajectory)?,
    }
    Ok(RnnFit {
        params,
        loss_trajectory: trajectory,
    })
}

fn train_fixed(
    config: &RnnTrainConfig,
    params: &mut LinearRnnParams,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    trajectory: &mut Vec<f64>,
) -> Result<()> {
    let np = params.n_pro();
    let mut v_kernel = Array2::<f64>::zeros(params.kernel.dim());
    let mut v_b = Array1::<f64>::zeros(np);
    let (mut loss, mut grad) = window_loss(params, inputs, targets)?;
    for epoch in 0..config.epochs {
        if !loss.is_finite() {
            return Err(Error::RnnDivergence { epoch });
        }
        v_kernel = config.momentum * &v_kernel - config.learning_rate * &grad.kernel;
        v_b = config.momentum * &v_b - config.learning_rate * &grad.recurrence_diag;
        params.kernel += &v_kernel;
        for j in 0..np {
            params.recurrence[[j, j]] += v_b[j];
        }
        params.project();
        debug_assert!(params.is_feasible());

        (loss, grad) = window_loss(params, inputs, targets)?;
        if !loss.is_finite() {
            return Err(Error::RnnDivergence { epoch });
        }
        trajectory.push(loss);
    }
    Ok(())
}

const MAX_HALVINGS: usize = 60;

fn train_spectral(
    config: &RnnTrainConfig,
    params: &mut LinearRnnParams,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    trajectory: &mut Vec<f64>,
) -> Result<()> {
    let np = params.n_pro();
    let (mut loss, mut grad) = window_loss(params, inputs, targets)?;
    if !loss.is_finite() {
        return Err(Error::RnnDivergence { epoch: 0 });
    }
    let mut step = config.learning_rate;
    for _ in 0..config.epochs {
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = params.clone();
            trial.kernel.scaled_add(-step, &grad.kernel);
            for j in 0..np {
                trial.recurrence[[j, j]] -= step * grad.recurrence_diag[j];
            }
            trial.project();
            let (l, g) = window_loss(&trial, inputs, targets)?;
            if l <= loss {
                accepted = Some((trial, l, g));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, l, g)) = accepted else {
            // no descent step exists at this resolution: stationary
            break;
        };
        // Barzilai-Borwein step from the accepted move
        let mut ss = 0.0;
        let mut sy = 0.0;
        for ((a, b), (ga, gb)) in trial
            .kernel
            .iter()
            .zip(&params.kernel)
            .zip(g.kernel.iter().zip(&grad.kernel))
        {
            ss += (a - b).powi(2);
            sy += (a - b) * (ga - gb);
        }
        for j in 0..np {
            let s = trial.recurrence[[j, j]] - params.recurrence[[j, j]];
            ss += s * s;
            sy += s * (g.recurrence_diag[j] - grad.recurrence_diag[j]);
        }
        if sy > 0.0 && ss > 0.0 {
            step = ss / sy;
        } else if ss > 0.0 {
            step *= 2.0;
        }
        *params = trial;
        loss = l;
        grad = g;
        trajectory.push(loss);
        if ss == 0.0 {
            break;
        }
    }
    // converged early: the loss stays where it is for the remaining epochs
    trajectory.resize(config.epochs, loss);
    Ok(())
}

/// Global scale factors applied before training and undone after prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub input_scale: f64,
    pub output_scale: f64,
}

impl Normalization {
    /// Maxima of the training-segment injection and production.
    pub fn from_training(inputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Self {
        let max_or_one = |m: ArrayView2<'_, f64>| {
            let v = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if v > 0.0 {
                v
            } else {
                1.0
            }
        };
        Normalization {
            input_scale: max_or_one(inputs),
            output_scale: max_or_one(targets),
        }
    }

    pub fn identity() -> Self {
        Normalization {
            input_scale: 1.0,
            output_scale: 1.0,
        }
    }

    pub fn scale_inputs(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.mapv(|v| v / self.input_scale)
    }

    pub fn scale_outputs(&self, y: ArrayView2<'_, f64>) -> Array2<f64> {
        y.mapv(|v| v / self.output_scale)
    }

    pub fn unscale_outputs(&self, y: ArrayView2<'_, f64>) -> Array2<f64> {
        y.mapv(|v| v * self.output_scale)
    }
}

/// Trains on raw rates: normalizes, trains, and returns the scale factors.
pub fn rnn_train_normalized(
    config: &RnnTrainConfig,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<(RnnFit, Normalization)> {
    let norm = Normalization::from_training(inputs, targets);
    let x = norm.scale_inputs(inputs);
    let y = norm.scale_outputs(targets);
    Ok((rnn_train(config, x.view(), y.view())?, norm))
}

/// Prediction in raw rate units.
pub fn rnn_predict(params: &LinearRnnParams, norm: &Normalization, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let y = rnn_forward(params, norm.scale_inputs(inputs).view())?;
    Ok(norm.unscale_outputs(y.view()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scalar_unroll() {
        let p = LinearRnnParams {
            kernel: array![[1.0]],
            recurrence: array![[0.5]],
            window: 3,
        };
        let y = rnn_forward(&p, array![[1.0], [1.0], [1.0]].view()).unwrap();
        assert_eq!(y.column(0).to_vec(), vec![1.0, 1.5, 1.75]);
    }

    #[test]
    fn zero_kernel_gives_zero_output() {
        let mut p = LinearRnnParams::zeros(2, 2, 4);
        p.recurrence = array![[0.9, 0.0], [0.0, 0.3]];
        let y = rnn_forward(&p, array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]].view()).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_recurrence_is_memoryless() {
        let mut p = LinearRnnParams::zeros(2, 1, 4);
        p.kernel = array![[0.25], [2.0]];
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let y = rnn_forward(&p, x.view()).unwrap();
        assert_eq!(y, x.dot(&p.kernel));
    }

    #[test]
    fn crm_bridge_scalar() {
        let crm = CrmpParams {
            tau: vec![1.0],
            gains: array![[1.0]],
            q0: vec![0.0],
            j_index: None,
        };
        let p = crm_to_rnn(&crm, 1.0, 10).unwrap();
        assert_eq!(p.recurrence[[0, 0]], (-1.0f64).exp());
        assert!((p.kernel[[0, 0]] - (1.0 - (-1.0f64).exp())).abs() < 1e-16);

        let slow = CrmpParams { tau: vec![1e6], ..crm };
        let p = crm_to_rnn(&slow, 1.0, 10).unwrap();
        assert!(p.recurrence[[0, 0]] > 0.999_998);
        assert!(p.kernel[[0, 0]] < 2e-6);
    }

    #[test]
    fn seeded_mode_requires_full_window() {
        let p = LinearRnnParams::zeros(1, 1, 2);
        assert!(rnn_forward_seeded(&p, Array2::zeros((5, 1)).view(), &[0.0]).is_err());
        assert!(rnn_forward_seeded(&p, Array2::zeros((3, 1)).view(), &[0.0]).is_ok());
    }

    #[test]
    fn projection_enforces_constraints() {
        let mut p = LinearRnnParams {
            kernel: array![[-0.5, 0.2]],
            recurrence: array![[1.5, 0.3], [-0.1, -0.2]],
            window: 2,
        };
        assert!(!p.is_feasible());
        p.project();
        assert!(p.is_feasible());
        assert_eq!(p.kernel, array![[0.0, 0.2]]);
        assert_eq!(p.recurrence, array![[RECURRENCE_MAX, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn zero_targets_from_zero_weights_stay_at_zero_loss() {
        let x = Array2::from_shape_fn((30, 3), |(t, i)| ((t * 7 + i * 3) % 5) as f64);
        let y = Array2::zeros((30, 2));
        let fit = rnn_train_from(
            &RnnTrainConfig {
                epochs: 20,
                ..Default::default()
            },
            LinearRnnParams::zeros(3, 2, 10),
            x.view(),
            y.view(),
        )
        .unwrap();
        assert_eq!(fit.loss_trajectory.len(), 20);
        assert!(fit.loss_trajectory.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn divergence_reports_epoch() {
        // opposed inputs let the kernel grow without the non-negativity clip stopping it
        let x = Array2::from_shape_fn((20, 2), |(_, i)| if i == 0 { 100.0 } else { -100.0 });
        let y = Array2::from_elem((20, 1), 1.0);
        let cfg = RnnTrainConfig {
            epochs: 200,
            learning_rate: 10.0,
            step_rule: StepRule::Fixed,
            window: 3,
            ..Default::default()
        };
        match rnn_train(&cfg, x.view(), y.view()) {
            Err(Error::RnnDivergence { epoch }) => assert!(epoch < 200),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn spectral_rule_is_monotone_where_fixed_diverges() {
        let x = Array2::from_shape_fn((20, 2), |(_, i)| if i == 0 { 100.0 } else { -100.0 });
        let y = Array2::from_elem((20, 1), 1.0);
        let cfg = RnnTrainConfig {
            epochs: 200,
            learning_rate: 10.0,
            window: 3,
            ..Default::default()
        };
        let fit = rnn_train(&cfg, x.view(), y.view()).unwrap();
        assert_eq!(fit.loss_trajectory.len(), 200);
        assert!(fit.loss_trajectory.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.params.is_feasible());
    }

    #[test]
    fn spectral_rule_recovers_noiseless_network() {
        let truth = LinearRnnParams {
            kernel: array![[0.2, 0.05], [0.1, 0.3], [0.0, 0.15]],
            recurrence: Array2::from_diag(&array![0.4, 0.7]),
            window: 6,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((80, 3), |_| rng.random_range(0.0..1.0));
        let y = rnn_forward(&truth, x.view()).unwrap();
        let cfg = RnnTrainConfig {
            window: 6,
            ..Default::default()
        };
        let fit = rnn_train(&cfg, x.view(), y.view()).unwrap();
        let mean = y.mean().unwrap();
        let var = y.mapv(|v| (v - mean).powi(2)).mean().unwrap();
        assert!(*fit.loss_trajectory.last().unwrap() < 1e-8 * var);
        assert!(fit.loss_trajectory.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn config_validation() {
        let bad = RnnTrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(bad.check().is_err());
        let bad = RnnTrainConfig {
            learning_rate: 0.0,
            ..Default::default()
        };
        assert!(bad.check().is_err());
    }
}
