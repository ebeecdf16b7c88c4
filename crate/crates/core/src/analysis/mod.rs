//! Fitting, prediction, CRM-vs-network comparison and timing benchmarks on
//! whole data sets, plus the file-level commands behind the `floodnet` binary.
//!
//! Every report field holding a duration ends in `wall_time_s`; everything
//! else is a deterministic function of the inputs and seeds.

mod commands;
mod model_file;

use std::str::FromStr;
use std::time::Instant;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::crm::crmp_predict;
use crate::error::{Error, Result};
use crate::fit::{fit_crmip, fit_crmp, fit_crmt, FitConfig, GainConstraint};
use crate::rnn::{rnn_predict, rnn_train_normalized, RnnTrainConfig};
use crate::scenario::{generate, preset_by_name};
use crate::series::{matrix_serde, RateSeries, TrainTestSplit, WellField};

pub use commands::{cmd_bench, cmd_compare, cmd_fit, cmd_generate, cmd_predict, GenerateOutput};
pub use model_file::{load_model, save_model, Model, ModelFile, ModelKind, FORMAT_VERSION, TOTAL_COLUMN};

/// Train/test boundary used when none is given: the first 75% of steps train.
pub const DEFAULT_SPLIT_FRACTION: f64 = 0.75;

/// A split given either as a step index or as a fraction of the series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitSpec {
    Index(usize),
    Fraction(f64),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Fraction(DEFAULT_SPLIT_FRACTION)
    }
}

impl SplitSpec {
    pub fn resolve(self, n_steps: usize) -> Result<TrainTestSplit> {
        let split = match self {
            SplitSpec::Index(k) => TrainTestSplit::new(k),
            SplitSpec::Fraction(f) => TrainTestSplit::fraction(n_steps, f),
        };
        if split.index == 0 || split.index >= n_steps {
            return Err(Error::SplitOutOfRange {
                index: split.index,
                n_steps,
            });
        }
        Ok(split)
    }
}

impl FromStr for SplitSpec {
    type Err = Error;

    /// `90` is a step index; `0.75` (anything with a decimal point) a fraction in `(0, 1)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("split `{s}` is neither a step index nor a fraction in (0, 1)"));
        if s.contains('.') {
            let f: f64 = s.parse().map_err(|_| bad())?;
            if !(f > 0.0 && f < 1.0) {
                return Err(bad());
            }
            Ok(SplitSpec::Fraction(f))
        } else {
            s.parse().map(SplitSpec::Index).map_err(|_| bad())
        }
    }
}

/// Parses `START:END` (half-open step indices, either side optional) against a
/// series of `n_steps` rows.
pub fn parse_range(s: &str, n_steps: usize) -> Result<(usize, usize)> {
    let bad = |why: &str| Error::Usage(format!("range `{s}`: {why}"));
    let (a, b) = s.split_once(':').ok_or_else(|| bad("expected START:END"))?;
    let parse = |t: &str, default: usize| -> Result<usize> {
        if t.trim().is_empty() {
            Ok(default)
        } else {
            t.trim()
                .parse()
                .map_err(|_| bad("bounds must be non-negative integers"))
        }
    };
    let (start, end) = (parse(a, 0)?, parse(b, n_steps)?);
    if end > n_steps {
        return Err(bad(&format!("end {end} exceeds the {n_steps} steps in the data")));
    }
    if start >= end {
        return Err(bad("empty range"));
    }
    Ok((start, end))
}

/// Everything that controls a fit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitOptions {
    pub split: SplitSpec,
    pub fit: FitConfig,
    pub rnn: RnnTrainConfig,
}

/// What `fit` reports next to the model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model_kind: ModelKind,
    pub split_index: usize,
    pub n_train_steps: usize,
    pub final_loss: f64,
    /// CRM: initial loss then one entry per accepted step of the winning
    /// start. Network: one entry per epoch.
    pub loss_trajectory: Vec<f64>,
    /// CRM only: gain-row constraint violation.
    pub constraint_residual: Option<f64>,
    /// CRM only: winning start and the final loss of every start.
    pub start_index: Option<usize>,
    pub start_losses: Option<Vec<Option<f64>>>,
    pub fit_config: Option<FitConfig>,
    pub rnn_config: Option<RnnTrainConfig>,
    pub wall_time_s: f64,
}

/// Fits one model kind on the training segment of `series`.
pub fn fit_model(
    kind: ModelKind,
    field: &WellField,
    series: &RateSeries,
    opts: &FitOptions,
) -> Result<(ModelFile, FitSummary)> {
    series.check(field)?;
    series.require_production()?;
    let split = opts.split.resolve(series.n_steps())?;
    let (train, _) = series.split(split)?;
    let crm_summary = |final_loss, loss_trajectory, residual, start, losses, wall| FitSummary {
        model_kind: kind,
        split_index: split.index,
        n_train_steps: train.n_steps(),
        final_loss,
        loss_trajectory,
        constraint_residual: Some(residual),
        start_index: Some(start),
        start_losses: Some(losses),
        fit_config: Some(opts.fit.clone()),
        rnn_config: None,
        wall_time_s: wall,
    };
    Ok(match kind {
        ModelKind::Crmt => {
            let r = fit_crmt(&train, field, &opts.fit)?;
            let file = ModelFile::new(field, Model::Crmt(r.params), None)?;
            let sum = crm_summary(
                r.final_loss,
                r.loss_trajectory,
                r.constraint_residual,
                r.start_index,
                r.start_losses,
                r.wall_time_s,
            );
            (file, sum)
        }
        ModelKind::Crmp => {
            let r = fit_crmp(&train, field, &opts.fit, None)?;
            let file = ModelFile::new(field, Model::Crmp(r.params), None)?;
            let sum = crm_summary(
                r.final_loss,
                r.loss_trajectory,
                r.constraint_residual,
                r.start_index,
                r.start_losses,
                r.wall_time_s,
            );
            (file, sum)
        }
        ModelKind::Crmip => {
            let r = fit_crmip(&train, field, &opts.fit, None)?;
            let file = ModelFile::new(field, Model::Crmip(r.params), None)?;
            let sum = crm_summary(
                r.final_loss,
                r.loss_trajectory,
                r.constraint_residual,
                r.start_index,
                r.start_losses,
                r.wall_time_s,
            );
            (file, sum)
        }
        ModelKind::Rnn => {
            let clock = Instant::now();
            let (fit, norm) =
                rnn_train_normalized(&opts.rnn, train.injection.view(), train.require_production()?.view())?;
            let wall = clock.elapsed().as_secs_f64();
            let final_loss = *fit.loss_trajectory.last().expect("epochs ≥ 1");
            let file = ModelFile::new(field, Model::Rnn(fit.params), Some(norm))?;
            let sum = FitSummary {
                model_kind: kind,
                split_index: split.index,
                n_train_steps: train.n_steps(),
                final_loss,
                loss_trajectory: fit.loss_trajectory,
                constraint_residual: None,
                start_index: None,
                start_losses: None,
                fit_config: None,
                rnn_config: Some(opts.rnn.clone()),
                wall_time_s: wall,
            };
            (file, sum)
        }
    })
}

/// Root-mean-square error per column and over all entries.
fn rmse(pred: ArrayView2<'_, f64>, obs: ArrayView2<'_, f64>) -> (Vec<f64>, f64) {
    let sq = (&pred - &obs).mapv(|v| v * v);
    let per = sq
        .columns()
        .into_iter()
        .map(|c| c.mean().unwrap_or(0.0).sqrt())
        .collect();
    (per, sq.mean().unwrap_or(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    /// Per producer, over steps `[train_rmse_from_step, split)`.
    pub train_rmse: Vec<f64>,
    /// Per producer, over steps `[split, n)`.
    pub test_rmse: Vec<f64>,
    pub train_rmse_all: f64,
    pub test_rmse_all: f64,
    /// The optimizer's own objective at the end of training.
    pub final_loss: f64,
    pub fit_wall_time_s: f64,
    pub predict_wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMeta {
    /// Preset name or data file the series came from.
    pub source: String,
    pub n_steps: usize,
    pub split_index: usize,
    /// First step scored as training: the network has no full window before it.
    pub train_rmse_from_step: usize,
    pub crm_kind: ModelKind,
    pub fit_config: FitConfig,
    pub rnn_config: RnnTrainConfig,
    /// How test-segment network outputs are formed.
    pub rnn_test_inputs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub meta: ComparisonMeta,
    pub injectors: Vec<String>,
    pub producers: Vec<String>,
    pub crm: ModelScores,
    pub rnn: ModelScores,
    /// CRMP gains `[N_inj × N_pro]`.
    #[serde(with = "matrix_serde")]
    pub crm_gains: Array2<f64>,
    pub crm_tau: Vec<f64>,
    /// Network kernel `A` `[N_inj × N_pro]`, on the normalized scale.
    #[serde(with = "matrix_serde")]
    pub rnn_kernel: Array2<f64>,
    pub rnn_recurrence_diag: Vec<f64>,
}

/// Both models' predictions over every step, for the tidy CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub observed: Array2<f64>,
    pub crm_pred: Array2<f64>,
    pub rnn_pred: Array2<f64>,
}

impl Comparison {
    /// Long format: one row per step and producer.
    pub fn tidy_csv(&self) -> String {
        let mut out = String::from("step,producer,observed,crm_pred,rnn_pred,segment\n");
        let split = self.report.meta.split_index;
        for n in 0..self.observed.nrows() {
            let segment = if n < split { "train" } else { "test" };
            for (j, name) in self.report.producers.iter().enumerate() {
                out.push_str(&format!(
                    "{n},{name},{},{},{},{segment}\n",
                    self.observed[[n, j]],
                    self.crm_pred[[n, j]],
                    self.rnn_pred[[n, j]]
                ));
            }
        }
        out
    }
}

/// Fits CRMP and the network on the training segment and scores both on
/// both segments. CRM test predictions continue the recursion through the
/// training segment; network outputs depend on injection windows only.
pub fn compare(source: &str, field: &WellField, series: &RateSeries, opts: &FitOptions) -> Result<Comparison> {
    series.check(field)?;
    let observed = series.require_production()?.clone();
    let n = series.n_steps();
    let split = opts.split.resolve(n)?;
    let (train, _) = series.split(split)?;
    let warmup = opts.rnn.window;
    if warmup >= split.index {
        return Err(Error::Usage(format!(
            "window {warmup} leaves no full training window before split {}",
            split.index
        )));
    }

    let crm = fit_crmp(&train, field, &opts.fit, None)?;
    let clock = Instant::now();
    let crm_pred = crmp_predict(&crm.params, series)?;
    let crm_predict_time = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let (rnn, norm) = rnn_train_normalized(&opts.rnn, train.injection.view(), train.require_production()?.view())?;
    let rnn_fit_time = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let rnn_pred = rnn_predict(&rnn.params, &norm, series.injection.view())?;
    let rnn_predict_time = clock.elapsed().as_secs_f64();

    let k = split.index;
    let score = |pred: &Array2<f64>, final_loss, fit_time, predict_time| {
        let (train_rmse, train_rmse_all) = rmse(pred.slice(s![warmup..k, ..]), observed.slice(s![warmup..k, ..]));
        let (test_rmse, test_rmse_all) = rmse(pred.slice(s![k.., ..]), observed.slice(s![k.., ..]));
        ModelScores {
            train_rmse,
            test_rmse,
            train_rmse_all,
            test_rmse_all,
            final_loss,
            fit_wall_time_s: fit_time,
            predict_wall_time_s: predict_time,
        }
    };
    let report = ComparisonReport {
        meta: ComparisonMeta {
            source: source.to_string(),
            n_steps: n,
            split_index: k,
            train_rmse_from_step: warmup,
            crm_kind: ModelKind::Crmp,
            fit_config: opts.fit.clone(),
            rnn_config: opts.rnn.clone(),
            rnn_test_inputs: "injection windows only; no observed or predicted production is fed back".into(),
        },
        injectors: field.injectors().to_vec(),
        producers: field.producers().to_vec(),
        crm: score(&crm_pred, crm.final_loss, crm.wall_time_s, crm_predict_time),
        rnn: score(
            &rnn_pred,
            *rnn.loss_trajectory.last().expect("epochs ≥ 1"),
            rnn_fit_time,
            rnn_predict_time,
        ),
        crm_gains: crm.params.gains.clone(),
        crm_tau: crm.params.tau.clone(),
        rnn_kernel: rnn.params.kernel.clone(),
        rnn_recurrence_diag: rnn.params.recurrence_diag(),
    };
    Ok(Comparison {
        report,
        observed,
        crm_pred,
        rnn_pred,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub preset: String,
    /// `crm` (CRMP) or `rnn`.
    pub model: String,
    /// `fit` or `predict`.
    pub phase: String,
    pub median_wall_time_s: f64,
    /// Fit rows: final training loss, identical across repeats.
    pub final_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub repeats: usize,
    pub fit_config: FitConfig,
    pub rnn_config: RnnTrainConfig,
    pub rows: Vec<BenchRow>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Median-of-`repeats` wall times for fitting (training segment) and
/// predicting (all steps) with CRMP and the network on each preset.
pub fn bench(presets: &[String], repeats: usize, opts: &FitOptions) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::Usage("repeats must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for name in presets {
        let spec = preset_by_name(name)?;
        let series = generate(&spec)?;
        let split = opts.split.resolve(series.n_steps())?;
        let (train, _) = series.split(split)?;
        let obs = train.require_production()?.view();
        let mut times = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        let mut losses = [0.0, 0.0];
        for _ in 0..repeats {
            let clock = Instant::now();
            let crm = fit_crmp(&train, &spec.field, &opts.fit, None)?;
            times[0].push(clock.elapsed().as_secs_f64());
            let clock = Instant::now();
            std::hint::black_box(crmp_predict(&crm.params, &series)?);
            times[1].push(clock.elapsed().as_secs_f64());

            let clock = Instant::now();
            let (rnn, norm) = rnn_train_normalized(&opts.rnn, train.injection.view(), obs)?;
            times[2].push(clock.elapsed().as_secs_f64());
            let clock = Instant::now();
            std::hint::black_box(rnn_predict(&rnn.params, &norm, series.injection.view())?);
            times[3].push(clock.elapsed().as_secs_f64());
            losses = [crm.final_loss, *rnn.loss_trajectory.last().expect("epochs ≥ 1")];
        }
        let labels = [("crm", "fit"), ("crm", "predict"), ("rnn", "fit"), ("rnn", "predict")];
        for ((model, phase), t) in labels.into_iter().zip(times) {
            rows.push(BenchRow {
                preset: name.clone(),
                model: model.into(),
                phase: phase.into(),
                median_wall_time_s: median(t),
                final_loss: (phase == "fit").then(|| losses[usize::from(model == "rnn")]),
            });
        }
    }
    Ok(BenchReport {
        repeats,
        fit_config: opts.fit.clone(),
        rnn_config: opts.rnn.clone(),
        rows,
    })
}

impl BenchReport {
    fn time(&self, preset: &str, model: &str, phase: &str) -> f64 {
        self.rows
            .iter()
            .find(|r| r.preset == preset && r.model == model && r.phase == phase)
            .map_or(f64::NAN, |r| r.median_wall_time_s)
    }

    /// Two tables, fit and predict, one row per preset.
    pub fn table(&self) -> String {
        let mut presets: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !presets.contains(&r.preset.as_str()) {
                presets.push(&r.preset);
            }
        }
        let mut out = String::new();
        for (phase, title) in [("fit", "Fit (training segment)"), ("predict", "Predict (all steps)")] {
            out.push_str(&format!(
                "{title}: median wall time of {} runs, seconds\n",
                self.repeats
            ));
            out.push_str(&format!(
                "{:<14} {:>12} {:>12} {:>10}\n",
                "preset",
                "CRMP",
                format!("RNN {}ep", self.rnn_config.epochs),
                "RNN/CRMP"
            ));
            for p in &presets {
                let crm = self.time(p, "crm", phase);
                let rnn = self.time(p, "rnn", phase);
                out.push_str(&format!("{p:<14} {crm:>12.6} {rnn:>12.6} {:>10.1}\n", rnn / crm));
            }
            out.push('\n');
        }
        out
    }
}

impl ComparisonReport {
    /// Human-readable summary.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} — {} steps, split at {}, training scored from step {}\n",
            self.meta.source, self.meta.n_steps, self.meta.split_index, self.meta.train_rmse_from_step
        );
        out.push_str(&format!(
            "{:<10} {:>12} {:>12} {:>12} {:>12}\n",
            "producer", "CRM train", "RNN train", "CRM test", "RNN test"
        ));
        for (j, p) in self.producers.iter().enumerate() {
            out.push_str(&format!(
                "{p:<10} {:>12.4} {:>12.4} {:>12.4} {:>12.4}\n",
                self.crm.train_rmse[j], self.rnn.train_rmse[j], self.crm.test_rmse[j], self.rnn.test_rmse[j]
            ));
        }
        out.push_str(&format!(
            "{:<10} {:>12.4} {:>12.4} {:>12.4} {:>12.4}\n",
            "all", self.crm.train_rmse_all, self.rnn.train_rmse_all, self.crm.test_rmse_all, self.rnn.test_rmse_all
        ));
        out.push_str(&format!(
            "fit wall time: CRM {:.4} s, RNN {:.4} s; predict: CRM {:.6} s, RNN {:.6} s\n",
            self.crm.fit_wall_time_s,
            self.rnn.fit_wall_time_s,
            self.crm.predict_wall_time_s,
            self.rnn.predict_wall_time_s
        ));
        out.push_str("CRM gains (rows: injectors):\n");
        out.push_str(&matrix_table(&self.crm_gains, &self.injectors, &self.producers));
        out.push_str("RNN kernel A (normalized scale):\n");
        out.push_str(&matrix_table(&self.rnn_kernel, &self.injectors, &self.producers));
        out.push_str(&format!("RNN recurrence diag B: {:.4?}\n", self.rnn_recurrence_diag));
        out
    }
}

fn matrix_table(m: &Array2<f64>, rows: &[String], cols: &[String]) -> String {
    let mut out = format!("{:<8}", "");
    for c in cols {
        out.push_str(&format!(" {c:>8}"));
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!("{r:<8}"));
        for j in 0..cols.len() {
            out.push_str(&format!(" {:>8.4}", m[[i, j]]));
        }
        out.push('\n');
    }
    out
}

/// Gain constraint names as accepted on the command line.
pub fn parse_gain_constraint(s: &str) -> Result<GainConstraint> {
    match s {
        "eq" => Ok(GainConstraint::Equality),
        "ineq" => Ok(GainConstraint::Inequality),
        other => Err(Error::Usage(format!("gain constraint `{other}`; expected eq or ineq"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{homogeneous_preset, streak_preset};

    #[test]
    fn split_spec_parsing() {
        assert_eq!("90".parse::<SplitSpec>().unwrap(), SplitSpec::Index(90));
        assert_eq!("0.5".parse::<SplitSpec>().unwrap(), SplitSpec::Fraction(0.5));
        assert!("1.5".parse::<SplitSpec>().is_err());
        assert!("x".parse::<SplitSpec>().is_err());
        assert_eq!(SplitSpec::default().resolve(120).unwrap().index, 90);
        assert!(matches!(
            SplitSpec::Index(120).resolve(120),
            Err(Error::SplitOutOfRange { .. })
        ));
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("10:20", 120).unwrap(), (10, 20));
        assert_eq!(parse_range(":", 120).unwrap(), (0, 120));
        assert_eq!(parse_range("90:", 120).unwrap(), (90, 120));
        for bad in ["5:5", "7:3", "0:121", "abc", "1:x"] {
            assert!(matches!(parse_range(bad, 120), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn streak_comparison_recovers_dominant_connections() {
        let spec = streak_preset();
        let series = generate(&spec).unwrap();
        let c = compare("streak", &spec.field, &series, &FitOptions::default()).unwrap();
        let argmax = |i: usize| {
            (0..4)
                .max_by(|&a, &b| c.report.crm_gains[[i, a]].total_cmp(&c.report.crm_gains[[i, b]]))
                .unwrap()
        };
        assert_eq!(argmax(0), 0, "I1 → P1");
        assert_eq!(argmax(2), 3, "I3 → P4");
        let mean_rate = series.production.as_ref().unwrap().mean().unwrap();
        assert!(c.report.crm.train_rmse_all < 0.01 * mean_rate);
        assert!(
            c.report.rnn.train_rmse_all < 0.01 * mean_rate,
            "{}",
            c.report.rnn.train_rmse_all
        );
        let csv = c.tidy_csv();
        assert_eq!(csv.lines().count(), 1 + 120 * 4);
    }

    #[test]
    fn homogeneous_network_beats_crm_out_of_sample() {
        let spec = homogeneous_preset();
        let series = generate(&spec).unwrap();
        let c = compare("homogeneous", &spec.field, &series, &FitOptions::default()).unwrap();
        assert!(c.report.rnn.test_rmse_all <= c.report.crm.test_rmse_all);
    }

    #[test]
    fn fit_model_reports_per_kind() {
        let spec = streak_preset();
        let series = generate(&spec).unwrap();
        let mut opts = FitOptions::default();
        opts.rnn.epochs = 20;
        for kind in ModelKind::ALL {
            let (file, sum) = fit_model(kind, &spec.field, &series, &opts).unwrap();
            assert_eq!(file.kind(), kind);
            assert_eq!(sum.split_index, 90);
            assert_eq!(sum.final_loss, *sum.loss_trajectory.last().unwrap());
            if kind == ModelKind::Rnn {
                assert_eq!(sum.loss_trajectory.len(), 20);
            } else {
                assert!(sum.constraint_residual.unwrap() <= 1e-6);
            }
            let pred = file.predict(&spec.field, &series).unwrap();
            assert_eq!(pred.nrows(), 120);
            assert_eq!(pred.ncols(), file.output_names().len());
        }
    }
}
