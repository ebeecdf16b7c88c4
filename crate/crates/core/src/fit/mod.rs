//! Constrained least-squares fitting of CRM parameters.
//!
//! The objective is a variance-scaled mean squared error. Parameters are kept
//! feasible throughout: `τ ≥ τ_min`, gains, `q0` and `J` non-negative, and each
//! injector's gain row (or, optionally, each producer's column) on the simplex
//! (or under it, in inequality mode).
//! Several seeded starts are run and the lowest final loss wins, ties going to
//! the lower start index.

mod problems;
pub(crate) mod solver;

use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crm::{CrmipParams, CrmpParams, CrmtParams};
use crate::error::{Error, Result};
use crate::series::{RateSeries, WellField};

use problems::{CrmipProblem, CrmpProblem, CrmtProblem};

/// Whether each constrained group of gains sums to exactly one or at most one;
/// see [`GainOrientation`] for which gains form a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GainConstraint {
    /// Each group sums to exactly 1 (no unaccounted influx or outflux).
    #[default]
    #[serde(rename = "eq")]
    Equality,
    /// Each group sums to at most 1.
    #[serde(rename = "ineq")]
    Inequality,
}

/// Which gains share a unit (or at most unit) sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GainOrientation {
    /// Each injector's allocations across producers (rows of the gain matrix).
    #[default]
    #[serde(rename = "injector")]
    PerInjector,
    /// Each producer's support across injectors (columns), the literal
    /// reading of the summation index in the paper's constraint text.
    #[serde(rename = "producer")]
    PerProducer,
}

impl GainOrientation {
    /// The constrained groups of `gains` laid out as rows.
    pub fn groups(self, gains: &Array2<f64>) -> Array2<f64> {
        match self {
            GainOrientation::PerInjector => gains.clone(),
            GainOrientation::PerProducer => gains.t().to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iters: usize,
    /// Stop once an iteration lowers the loss by less than `tol` relative.
    pub tol: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub gain_constraint: GainConstraint,
    #[serde(default)]
    pub gain_orientation: GainOrientation,
    /// Fit productivity indices when the series carries BHP.
    pub include_press: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: 2000,
            tol: 1e-10,
            n_starts: 8,
            seed: 0,
            gain_constraint: GainConstraint::Equality,
            gain_orientation: GainOrientation::PerInjector,
            include_press: true,
        }
    }
}

impl FitConfig {
    pub fn check(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParam(format!("tol {} must be positive", self.tol)));
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidParam("n_starts must be at least 1".into()));
        }
        Ok(())
    }

    /// [`constraint_residual`] of `gains` under this orientation and mode.
    pub fn residual(&self, gains: &Array2<f64>) -> f64 {
        constraint_residual(&self.gain_orientation.groups(gains), self.gain_constraint)
    }

    /// Feasible uniform start: every constrained group sums to one.
    fn uniform_gains(&self, ni: usize, np: usize) -> Array2<f64> {
        let n = match self.gain_orientation {
            GainOrientation::PerInjector => np,
            GainOrientation::PerProducer => ni,
        };
        Array2::from_elem((ni, np), 1.0 / n as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport<P> {
    pub params: P,
    pub final_loss: f64,
    /// Loss at the winning start's initial point, then after each accepted step.
    pub loss_trajectory: Vec<f64>,
    /// Over the constrained groups (injector rows by default): equality mode
    /// `max |Σ f − 1|`, inequality mode `max (Σ f − 1)⁺`.
    pub constraint_residual: f64,
    pub start_index: usize,
    /// Final loss of every start; `None` where a start failed.
    pub start_losses: Vec<Option<f64>>,
    pub wall_time_s: f64,
}

/// Per-producer MSE divided by the observed variance, averaged over producers.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMse {
    weights: Vec<f64>,
    degenerate: Vec<usize>,
    n_rows: usize,
}

impl ScaledMse {
    pub fn new(observed: ArrayView2<'_, f64>) -> Self {
        let (n, m) = observed.dim();
        let mut weights = Vec::with_capacity(m);
        let mut degenerate = Vec::new();
        for (j, col) in observed.axis_iter(Axis(1)).enumerate() {
            let var = variance(col.iter().copied());
            let mean = col.mean().unwrap_or(0.0);
            let base = 1.0 / (n.max(1) * m.max(1)) as f64;
            if var > (1e-12 * mean).powi(2) && var > 0.0 {
                weights.push(base / var);
            } else {
                degenerate.push(j);
                weights.push(base);
            }
        }
        ScaledMse {
            weights,
            degenerate,
            n_rows: n,
        }
    }

    /// Weight applied to each squared residual of producer `j`.
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// Columns with zero observed variance, scored by plain MSE instead.
    pub fn degenerate_columns(&self) -> &[usize] {
        &self.degenerate
    }

    pub fn evaluate(&self, predicted: ArrayView2<'_, f64>, observed: ArrayView2<'_, f64>) -> Result<f64> {
        if predicted.dim() != observed.dim() || observed.dim() != (self.n_rows, self.weights.len()) {
            return Err(Error::Shape(format!(
                "predicted {:?} vs observed {:?}",
                predicted.dim(),
                observed.dim()
            )));
        }
        let mut total = 0.0;
        for (j, (p, o)) in predicted
            .axis_iter(Axis(1))
            .zip(observed.axis_iter(Axis(1)))
            .enumerate()
        {
            let sse: f64 = p.iter().zip(o).map(|(a, b)| (a - b) * (a - b)).sum();
            total += self.weights[j] * sse;
        }
        Ok(total)
    }
}

pub(crate) fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64
}

/// Scaled MSE of `predicted` against `observed`.
///
/// Zero-variance observed columns fall back to unscaled MSE and are logged.
pub fn loss(predicted: ArrayView2<'_, f64>, observed: ArrayView2<'_, f64>) -> Result<f64> {
    if predicted.dim() != observed.dim() {
        return Err(Error::Shape(format!(
            "predicted {:?} vs observed {:?}",
            predicted.dim(),
            observed.dim()
        )));
    }
    if observed.nrows() == 0 {
        return Err(Error::Shape("no observations".into()));
    }
    let scaled = ScaledMse::new(observed);
    for j in scaled.degenerate_columns() {
        log::warn!("observed column {j} has zero variance; using unscaled MSE");
    }
    scaled.evaluate(predicted, observed)
}

/// Euclidean projection of one row onto `{x ≥ 0, Σx = 1}` or `{x ≥ 0, Σx ≤ 1}`.
pub fn project_row(row: &mut [f64], mode: GainConstraint) {
    if row.is_empty() {
        return;
    }
    // rows feasible up to summation round-off are fixed points, which makes
    // the projection exactly idempotent
    let slack = 4.0 * f64::EPSILON * row.len() as f64;
    if row.iter().all(|&v| v >= 0.0) {
        let sum: f64 = row.iter().sum();
        let feasible = match mode {
            GainConstraint::Equality => (sum - 1.0).abs() <= slack,
            GainConstraint::Inequality => sum <= 1.0 + slack,
        };
        if feasible {
            return;
        }
    }
    if mode == GainConstraint::Inequality {
        let clipped_sum: f64 = row.iter().map(|v| v.max(0.0)).sum();
        if clipped_sum <= 1.0 {
            row.iter_mut().for_each(|v| *v = v.max(0.0));
            return;
        }
    }
    // sort-based threshold search
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    row.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
}

/// Projects every injector row of `gains`.
pub fn project_gain_rows(gains: &Array2<f64>, mode: GainConstraint) -> Array2<f64> {
    let mut out = gains.clone();
    for mut row in out.rows_mut() {
        let mut buf = row.to_vec();
        project_row(&mut buf, mode);
        row.assign(&ndarray::ArrayView1::from(&buf));
    }
    out
}

/// Row-sum violation of `gains` under `mode`.
pub fn constraint_residual(gains: &Array2<f64>, mode: GainConstraint) -> f64 {
    gains
        .sum_axis(Axis(1))
        .iter()
        .map(|&s| match mode {
            GainConstraint::Equality => (s - 1.0).abs(),
            GainConstraint::Inequality => (s - 1.0).max(0.0),
        })
        .fold(0.0, f64::max)
}

/// Random `τ` in `[0.1, 10]` days, log-uniform.
fn random_tau(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range((0.1f64).ln()..=(10.0f64).ln()).exp()
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

/// Shared multi-start driver: runs every start, keeps the best.
fn multi_start<P>(
    problem: &impl solver::Problem,
    config: &FitConfig,
    mut initial: impl FnMut(usize) -> Vec<f64>,
    unpack: impl Fn(&[f64]) -> P,
    residual: impl Fn(&P) -> f64,
) -> Result<FitReport<P>> {
    config.check()?;
    let clock = Instant::now();
    let mut best: Option<(usize, solver::Outcome)> = None;
    let mut start_losses = Vec::with_capacity(config.n_starts);
    let mut last_err = None;
    for start in 0..config.n_starts {
        let x0 = initial(start);
        match solver::minimize(problem, &x0, config.max_iters, config.tol) {
            Ok(out) => {
                start_losses.push(Some(out.loss));
                let better = best.as_ref().is_none_or(|(_, b)| out.loss < b.loss);
                if better {
                    best = Some((start, out));
                }
            }
            Err(e) => {
                log::debug!("start {start} failed: {e}");
                start_losses.push(None);
                last_err = Some(e);
            }
        }
    }
    let Some((start_index, out)) = best else {
        return Err(match last_err {
            Some(e) if config.n_starts == 1 => e,
            _ => Error::AllStartsFailed(config.n_starts),
        });
    };
    let params = unpack(&out.x);
    let constraint_residual = residual(&params);
    Ok(FitReport {
        params,
        final_loss: out.loss,
        loss_trajectory: out.trajectory,
        constraint_residual,
        start_index,
        start_losses,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

fn prepare<'a>(series: &'a RateSeries, field: &WellField) -> Result<ArrayView2<'a, f64>> {
    series.check(field)?;
    Ok(series.require_production()?.view())
}

/// Fits CRMP to the observed production in `series`.
///
/// `init`, when given, is used as the first start. Productivity indices are
/// fitted only if `config.include_press` and the series has BHP.
pub fn fit_crmp(
    series: &RateSeries,
    field: &WellField,
    config: &FitConfig,
    init: Option<&CrmpParams>,
) -> Result<FitReport<CrmpParams>> {
    let observed = prepare(series, field)?;
    let press = config.include_press && series.bhp.is_some();
    let problem = CrmpProblem::new(series, observed, config.gain_constraint, config.gain_orientation, press);
    let (ni, np) = (field.n_inj(), field.n_pro());
    if let Some(p) = init {
        p.check()?;
        if p.gains.dim() != (ni, np) {
            return Err(Error::Shape("initial gains do not match the field".into()));
        }
    }
    let first_rates: Vec<f64> = observed.row(0).iter().map(|v| v.max(0.0)).collect();
    multi_start(
        &problem,
        config,
        |start| match init {
            Some(p) if start == 0 => problem.pack(p),
            _ => {
                let mut rng = start_rng(config.seed, start);
                let p = CrmpParams {
                    tau: (0..np).map(|_| random_tau(&mut rng)).collect(),
                    gains: config.uniform_gains(ni, np),
                    q0: first_rates.clone(),
                    j_index: press.then(|| vec![0.0; np]),
                };
                problem.pack(&p)
            }
        },
        |x| problem.unpack(x),
        |p| config.residual(&p.gains),
    )
}

/// Fits the tank model to total production against total injection.
///
/// The field gain is a single-entry row: fixed at 1 in equality mode, in
/// `[0, 1]` in inequality mode.
pub fn fit_crmt(series: &RateSeries, field: &WellField, config: &FitConfig) -> Result<FitReport<CrmtParams>> {
    let observed = prepare(series, field)?;
    let total = observed.sum_axis(Axis(1));
    let problem = CrmtProblem::new(series, total.view(), config.gain_constraint);
    let first_rate = total[0].max(0.0);
    let mode = config.gain_constraint;
    multi_start(
        &problem,
        config,
        |start| {
            let mut rng = start_rng(config.seed, start);
            problem.pack(&CrmtParams {
                tau: random_tau(&mut rng),
                f_field: 1.0,
                q0: first_rate,
            })
        },
        |x| problem.unpack(x),
        |p| constraint_residual(&Array2::from_elem((1, 1), p.f_field), mode),
    )
}

/// Fits CRMIP; the gain constraint applies to each injector row.
pub fn fit_crmip(
    series: &RateSeries,
    field: &WellField,
    config: &FitConfig,
    init: Option<&CrmipParams>,
) -> Result<FitReport<CrmipParams>> {
    let observed = prepare(series, field)?;
    let press = config.include_press && series.bhp.is_some();
    let problem = CrmipProblem::new(series, observed, config.gain_constraint, config.gain_orientation, press);
    let (ni, np) = (field.n_inj(), field.n_pro());
    if let Some(p) = init {
        p.check()?;
        if p.gains.dim() != (ni, np) {
            return Err(Error::Shape("initial gains do not match the field".into()));
        }
    }
    let first_rates: Vec<f64> = observed.row(0).iter().map(|v| v.max(0.0)).collect();
    multi_start(
        &problem,
        config,
        |start| match init {
            Some(p) if start == 0 => problem.pack(p),
            _ => {
                let mut rng = start_rng(config.seed, start);
                let p = CrmipParams {
                    tau: Array2::from_shape_fn((ni, np), |_| random_tau(&mut rng)),
                    gains: config.uniform_gains(ni, np),
                    q0: Array2::from_shape_fn((ni, np), |(_, j)| first_rates[j] / ni as f64),
                    j_index: press.then(|| Array2::zeros((ni, np))),
                };
                problem.pack(&p)
            }
        },
        |x| problem.unpack(x),
        |p| config.residual(&p.gains),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn loss_zero_on_exact_match() {
        let o = array![[1.0, 5.0], [2.0, 7.0], [4.0, 6.0]];
        assert_eq!(loss(o.view(), o.view()).unwrap(), 0.0);
    }

    #[test]
    fn loss_of_constant_offset() {
        let o = array![[1.0, 5.0], [2.0, 7.0], [4.0, 6.0]];
        let c = [0.5, -2.0];
        let p = Array2::from_shape_fn(o.dim(), |(n, j)| o[[n, j]] + c[j]);
        // population variances 14/9 and 2/3
        let expected = (0.25 / (14.0 / 9.0) + 4.0 / (2.0 / 3.0)) / 2.0;
        let l = loss(p.view(), o.view()).unwrap();
        assert!((l - expected).abs() < 1e-14);
    }

    #[test]
    fn loss_is_scale_invariant() {
        let o = array![[1.0, 5.0], [2.0, 7.0], [4.0, 6.0]];
        let p = array![[1.5, 4.0], [2.0, 8.0], [3.0, 6.5]];
        let a = loss(p.view(), o.view()).unwrap();
        let b = loss((&p * 37.5).view(), (&o * 37.5).view()).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn zero_variance_column_falls_back_to_mse() {
        let o = array![[3.0, 1.0], [3.0, 2.0], [3.0, 3.0]];
        let p = array![[4.0, 1.0], [4.0, 2.0], [4.0, 3.0]];
        let s = ScaledMse::new(o.view());
        assert_eq!(s.degenerate_columns(), &[0]);
        // MSE 1 on column 0, averaged over two producers
        assert!((loss(p.view(), o.view()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn loss_shape_mismatch() {
        let o = Array2::<f64>::zeros((3, 2));
        let p = Array2::<f64>::zeros((3, 1));
        assert!(matches!(loss(p.view(), o.view()), Err(Error::Shape(_))));
    }

    #[test]
    fn projection_examples() {
        let mut r = [0.25, 0.25, 0.25, 0.25];
        project_row(&mut r, GainConstraint::Equality);
        assert_eq!(r, [0.25, 0.25, 0.25, 0.25]);
        let mut r = [0.8, 0.8];
        project_row(&mut r, GainConstraint::Equality);
        assert_eq!(r, [0.5, 0.5]);
        let mut r = [2.0, 0.0];
        project_row(&mut r, GainConstraint::Equality);
        assert_eq!(r, [1.0, 0.0]);
    }

    #[test]
    fn inequality_projection_keeps_interior_points() {
        let mut r = [0.2, -0.3, 0.1];
        project_row(&mut r, GainConstraint::Inequality);
        assert_eq!(r, [0.2, 0.0, 0.1]);
        let mut r = [0.8, 0.8];
        project_row(&mut r, GainConstraint::Inequality);
        assert_eq!(r, [0.5, 0.5]);
    }

    #[test]
    fn residuals() {
        let g = array![[0.5, 0.5], [0.2, 0.7]];
        assert!((constraint_residual(&g, GainConstraint::Equality) - 0.1).abs() < 1e-15);
        assert_eq!(constraint_residual(&g, GainConstraint::Inequality), 0.0);
    }

    #[test]
    fn config_rejects_degenerate_values() {
        for c in [
            FitConfig {
                max_iters: 0,
                ..Default::default()
            },
            FitConfig {
                n_starts: 0,
                ..Default::default()
            },
            FitConfig {
                tol: 0.0,
                ..Default::default()
            },
        ] {
            assert!(c.check().is_err());
        }
    }

    #[test]
    fn producer_orientation_constrains_columns() {
        // columns sum to one, rows do not
        let truth = CrmpParams {
            tau: vec![0.7, 2.0],
            gains: array![[0.6, 0.1], [0.3, 0.2], [0.1, 0.7]],
            q0: vec![0.0, 0.0],
            j_index: None,
        };
        let inj = Array2::from_shape_fn((40, 3), |(n, i)| 100.0 + 400.0 * (((n / (4 + 3 * i)) + i) % 3) as f64);
        let series = RateSeries::uniform(1.0, inj);
        let prod = crate::crm::crmp_predict(&truth, &series).unwrap();
        let series = series.with_production(prod);
        let field = WellField::numbered(3, 2).unwrap();
        let config = FitConfig {
            gain_orientation: GainOrientation::PerProducer,
            n_starts: 3,
            ..FitConfig::default()
        };
        let fit = fit_crmp(&series, &field, &config, None).unwrap();
        assert!(fit.constraint_residual <= 1e-9);
        for col in fit.params.gains.columns() {
            assert!((col.sum() - 1.0).abs() <= 1e-9);
        }
        let err = (&fit.params.gains - &truth.gains)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-4, "gain error {err}");
        // the per-injector reading of the same gains is infeasible
        assert!(constraint_residual(&truth.gains, GainConstraint::Equality) > 0.1);
        assert_eq!(
            serde_json::to_string(&GainOrientation::PerProducer).unwrap(),
            "\"producer\""
        );
    }

    #[test]
    fn gain_constraint_serde_names() {
        assert_eq!(serde_json::to_string(&GainConstraint::Equality).unwrap(), "\"eq\"");
        assert_eq!(
            serde_json::from_str::<GainConstraint>("\"ineq\"").unwrap(),
            GainConstraint::Inequality
        );
    }
}
