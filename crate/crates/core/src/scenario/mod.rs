//! Synthetic waterflood scenarios.
//!
//! Production is generated by a CRMP truth model, optionally passed through a
//! saturating warp `S(q) = q_max·(1 − e^(−q/q_max))` blended in with weight
//! `γ`, plus Gaussian noise. With `γ = 0` and no noise the data lie exactly in
//! the CRMP model class, which makes parameter recovery well posed; `γ > 0`
//! adds the kind of non-linear producer response that a CRM cannot capture.

mod csv;

pub use self::csv::{read_csv, write_csv};

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::crm::{crmp_predict, CrmpParams};
use crate::error::{Error, Result};
use crate::series::{RateSeries, TrainTestSplit, WellField};

/// Default series length, step and train/test split.
pub const DEFAULT_STEPS: usize = 120;
pub const DEFAULT_DT: f64 = 1.0;
pub const DEFAULT_SPLIT: usize = 90;

/// Seed for the injection schedule shared by both presets.
const SCHEDULE_SEED: u64 = 2008;

/// Streak-case gain matrix with two dominant injector-producer connections
/// (I1→P1 and I3→P4). Rows sum to roughly, not exactly, one.
pub const STREAK_GAINS_RAW: [[f64; 4]; 5] = [
    [0.95, 0.02, 0.00, 0.03],
    [0.51, 0.03, 0.12, 0.29],
    [0.03, 0.00, 0.10, 0.87],
    [0.18, 0.12, 0.07, 0.63],
    [0.16, 0.02, 0.16, 0.66],
];

/// Streak-case producer time constants, days.
pub const STREAK_TAU: [f64; 4] = [0.1, 0.5, 1.7, 0.6];

/// [`STREAK_GAINS_RAW`] with every row divided by its sum.
pub fn streak_gains_normalized() -> Array2<f64> {
    let mut g = Array2::from_shape_fn((5, 4), |(i, j)| STREAK_GAINS_RAW[i][j]);
    for mut row in g.rows_mut() {
        let s = row.sum();
        row /= s;
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub field: WellField,
    pub n_steps: usize,
    /// Uniform step, days.
    pub dt: f64,
    /// Per injector, `(start_step, rate)` breakpoints of a piecewise-constant
    /// schedule. The rate is zero before the first breakpoint.
    pub schedule: Vec<Vec<(usize, f64)>>,
    pub truth: CrmpParams,
    /// Noise standard deviation as a fraction of each producer's mean rate.
    pub noise_std: f64,
    /// Blend weight `γ` of the saturating warp.
    pub nonlinearity: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn check(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::InvalidParam(format!(
                "n_steps {} must be at least 2",
                self.n_steps
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParam(format!("dt {} must be positive", self.dt)));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "noise_std {} must be non-negative",
                self.noise_std
            )));
        }
        if !(self.nonlinearity >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "nonlinearity {} must be non-negative",
                self.nonlinearity
            )));
        }
        if self.schedule.len() != self.field.n_inj() {
            return Err(Error::Shape(format!(
                "{} schedules for {} injectors",
                self.schedule.len(),
                self.field.n_inj()
            )));
        }
        for (i, bps) in self.schedule.iter().enumerate() {
            for (k, &(step, rate)) in bps.iter().enumerate() {
                if step >= self.n_steps {
                    return Err(Error::InvalidParam(format!(
                        "injector {i} breakpoint {k} at step {step} is beyond the last step {}",
                        self.n_steps - 1
                    )));
                }
                if k > 0 && step <= bps[k - 1].0 {
                    return Err(Error::InvalidParam(format!(
                        "injector {i} breakpoints must have increasing steps (breakpoint {k})"
                    )));
                }
                if !(rate >= 0.0) || !rate.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "injector {i} breakpoint {k} has invalid rate {rate}"
                    )));
                }
            }
        }
        self.truth.check()?;
        if self.truth.gains.dim() != (self.field.n_inj(), self.field.n_pro()) {
            return Err(Error::Shape("truth gains do not match the field".into()));
        }
        Ok(())
    }

    /// Injection matrix `[n_steps × N_inj]` built from the schedule.
    pub fn injection(&self) -> Array2<f64> {
        let mut inj = Array2::zeros((self.n_steps, self.field.n_inj()));
        for (i, bps) in self.schedule.iter().enumerate() {
            for (k, &(start, rate)) in bps.iter().enumerate() {
                let end = bps.get(k + 1).map_or(self.n_steps, |b| b.0);
                for n in start..end.min(self.n_steps) {
                    inj[[n, i]] = rate;
                }
            }
        }
        inj
    }

    pub fn default_split(&self) -> TrainTestSplit {
        TrainTestSplit::fraction(self.n_steps, DEFAULT_SPLIT as f64 / DEFAULT_STEPS as f64)
    }
}

/// Produces the injection and observed production of `spec`, deterministic in `spec.seed`.
pub fn generate(spec: &ScenarioSpec) -> Result<RateSeries> {
    spec.check()?;
    let injection = spec.injection();
    let series = RateSeries::uniform(spec.dt, injection);
    let clean = crmp_predict(&spec.truth, &series)?;
    let mut production = clean.clone();

    let gamma = spec.nonlinearity;
    if gamma > 0.0 {
        let steady = series.injection.dot(&spec.truth.gains);
        let q_max = 1.5 * steady.iter().fold(0.0f64, |m, &v| m.max(v));
        if q_max > 0.0 {
            production.mapv_inplace(|q| (1.0 - gamma) * q + gamma * q_max * -(-q / q_max).exp_m1());
        }
    }

    if spec.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let means: Vec<f64> = clean.columns().into_iter().map(|c| c.mean().unwrap_or(0.0)).collect();
        for ((_, j), q) in production.indexed_iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *q = (*q + spec.noise_std * means[j] * e).max(0.0);
        }
    }
    Ok(series.with_production(production))
}

/// Piecewise-constant schedules with 4–6 breakpoints per injector, the first
/// at step 0, rates uniform in `[100, 1000]`.
pub fn random_schedule(n_inj: usize, n_steps: usize, seed: u64) -> Vec<Vec<(usize, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_inj)
        .map(|_| {
            let k = rng.random_range(4..=6).min(n_steps);
            let mut steps = vec![0usize];
            while steps.len() < k {
                let s = rng.random_range(1..n_steps);
                if !steps.contains(&s) {
                    steps.push(s);
                }
            }
            steps.sort_unstable();
            steps
                .into_iter()
                .map(|s| (s, rng.random_range(100.0..=1000.0)))
                .collect()
        })
        .collect()
}

/// `q_j(t_0) = Σ_i f_ij·I_i(t_0)`: production already in balance with the
/// first injection row, so there is no start-up transient.
pub fn balanced_q0(gains: &Array2<f64>, schedule_row0: &[f64]) -> Vec<f64> {
    gains
        .columns()
        .into_iter()
        .map(|c| c.iter().zip(schedule_row0).map(|(g, i)| g * i).sum())
        .collect()
}

fn preset(gains: Array2<f64>, tau: Vec<f64>, nonlinearity: f64, noise_std: f64, seed: u64) -> ScenarioSpec {
    let field = WellField::numbered(5, 4).expect("static field");
    let schedule = random_schedule(5, DEFAULT_STEPS, SCHEDULE_SEED);
    let mut spec = ScenarioSpec {
        field,
        n_steps: DEFAULT_STEPS,
        dt: DEFAULT_DT,
        schedule,
        truth: CrmpParams {
            tau,
            gains,
            q0: vec![0.0; 4],
            j_index: None,
        },
        noise_std,
        nonlinearity,
        seed,
    };
    let row0 = spec.injection().row(0).to_vec();
    spec.truth.q0 = balanced_q0(&spec.truth.gains, &row0);
    spec
}

/// Five injectors, four producers, two high-connectivity streaks (I1→P1,
/// I3→P4), linear response, no noise.
pub fn streak_preset() -> ScenarioSpec {
    let mut gains = streak_gains_normalized();
    // sharpen the I3→P4 streak
    gains.row_mut(2).assign(&array![0.02, 0.00, 0.06, 0.92]);
    preset(gains, STREAK_TAU.to_vec(), 0.0, 0.0, 7)
}

/// Same wells and schedule with near-uniform connectivity, longer memory and
/// a strongly non-linear response.
pub fn homogeneous_preset() -> ScenarioSpec {
    let gains = array![
        [0.27, 0.28, 0.22, 0.23],
        [0.26, 0.22, 0.27, 0.25],
        [0.24, 0.25, 0.26, 0.25],
        [0.22, 0.27, 0.25, 0.26],
        [0.23, 0.24, 0.27, 0.26],
    ];
    preset(gains, vec![4.2, 3.6, 4.2, 4.2], 0.5, 0.01, 7)
}

pub const PRESETS: [&str; 2] = ["streak", "homogeneous"];

pub fn preset_by_name(name: &str) -> Result<ScenarioSpec> {
    match name {
        "streak" => Ok(streak_preset()),
        "homogeneous" => Ok(homogeneous_preset()),
        other => Err(Error::Usage(format!(
            "unknown preset `{other}`; available presets: {}",
            PRESETS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Axis;

    #[test]
    fn linear_noiseless_generation_is_the_truth_model() {
        let spec = streak_preset();
        let s = generate(&spec).unwrap();
        let expected = crmp_predict(&spec.truth, &s).unwrap();
        assert_eq!(s.production.unwrap(), expected);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = homogeneous_preset();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn streak_preset_has_dominant_streaks() {
        let g = streak_preset().truth.gains;
        assert!(g[[0, 0]] >= 0.9 && g[[2, 3]] >= 0.9);
        let argmax = |i: usize| (0..4).max_by(|&a, &b| g[[i, a]].total_cmp(&g[[i, b]])).unwrap();
        assert_eq!(argmax(0), 0);
        assert_eq!(argmax(2), 3);
        for s in g.sum_axis(Axis(1)) {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_rows_are_flat() {
        let g = homogeneous_preset().truth.gains;
        for row in g.rows() {
            let max = row.iter().cloned().fold(f64::MIN, f64::max);
            let min = row.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max - min <= 0.1);
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn presets_validate_and_generate() {
        for name in PRESETS {
            let spec = preset_by_name(name).unwrap();
            assert_eq!(spec.n_steps, 120);
            let s = generate(&spec).unwrap();
            s.check(&spec.field).unwrap();
        }
        assert!(matches!(preset_by_name("bogus"), Err(Error::Usage(_))));
    }

    #[test]
    fn warp_lowers_production() {
        let mut spec = streak_preset();
        let linear = generate(&spec).unwrap().production.unwrap();
        spec.nonlinearity = 0.5;
        let warped = generate(&spec).unwrap().production.unwrap();
        assert!(warped.iter().zip(&linear).all(|(w, l)| w <= l));
        assert!(warped.iter().zip(&linear).any(|(w, l)| w < l));
    }

    #[test]
    fn schedule_breakpoints_out_of_range() {
        let mut spec = streak_preset();
        spec.schedule[1].push((500, 10.0));
        assert!(generate(&spec).is_err());
        let mut spec = streak_preset();
        spec.schedule[0] = vec![(5, 1.0), (5, 2.0)];
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn schedule_shape() {
        let sched = random_schedule(5, 120, 1);
        for bps in &sched {
            assert!((4..=6).contains(&bps.len()));
            assert_eq!(bps[0].0, 0);
            assert!(bps.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(bps.iter().all(|&(_, r)| (100.0..=1000.0).contains(&r)));
        }
    }

    #[test]
    fn spec_json_uses_pair_arrays() {
        let spec = streak_preset();
        let json = serde_json::to_value(&spec).unwrap();
        let first = &json["schedule"][0][0];
        assert!(first.is_array() && first.as_array().unwrap().len() == 2);
        let back: ScenarioSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }
}
