//! Well topology and time-indexed rate records.
//!
//! Times are floating-point days and need not be uniformly spaced. Rates are
//! reservoir-volume rates. BHP is optional; when absent, models drop their
//! pressure terms entirely rather than treating it as zero.

use std::collections::HashSet;

use ndarray::{concatenate, s, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names of the injectors and producers in a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellField {
    injectors: Vec<String>,
    producers: Vec<String>,
}

impl WellField {
    pub fn new(injectors: Vec<String>, producers: Vec<String>) -> Result<Self> {
        if injectors.is_empty() {
            return Err(Error::Field("at least one injector is required".into()));
        }
        if producers.is_empty() {
            return Err(Error::Field("at least one producer is required".into()));
        }
        check_unique("injector", &injectors)?;
        check_unique("producer", &producers)?;
        Ok(WellField { injectors, producers })
    }

    /// `I1..In` injectors and `P1..Pm` producers.
    pub fn numbered(n_inj: usize, n_pro: usize) -> Result<Self> {
        Self::new(
            (1..=n_inj).map(|i| format!("I{i}")).collect(),
            (1..=n_pro).map(|j| format!("P{j}")).collect(),
        )
    }

    pub fn injectors(&self) -> &[String] {
        &self.injectors
    }

    pub fn producers(&self) -> &[String] {
        &self.producers
    }

    pub fn n_inj(&self) -> usize {
        self.injectors.len()
    }

    pub fn n_pro(&self) -> usize {
        self.producers.len()
    }
}

fn check_unique(kind: &str, names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::Field(format!("empty {kind} name")));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::Field(format!("duplicate {kind} name `{name}`")));
        }
    }
    Ok(())
}

/// Injection, production and bottomhole-pressure records on a shared time axis.
///
/// Matrices are `[n_steps × n_wells]`. Construction does not check anything;
/// call [`RateSeries::validate`] against a [`WellField`] before use.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSeries {
    pub times: Vec<f64>,
    pub injection: Array2<f64>,
    pub production: Option<Array2<f64>>,
    pub bhp: Option<Array2<f64>>,
}

impl RateSeries {
    pub fn new(
        times: Vec<f64>,
        injection: Array2<f64>,
        production: Option<Array2<f64>>,
        bhp: Option<Array2<f64>>,
    ) -> Self {
        RateSeries {
            times,
            injection,
            production,
            bhp,
        }
    }

    /// Uniform grid `t_n = n·dt` starting at zero.
    pub fn uniform(dt: f64, injection: Array2<f64>) -> Self {
        let times = (0..injection.nrows()).map(|n| n as f64 * dt).collect();
        RateSeries::new(times, injection, None, None)
    }

    pub fn with_production(mut self, production: Array2<f64>) -> Self {
        self.production = Some(production);
        self
    }

    pub fn with_bhp(mut self, bhp: Array2<f64>) -> Self {
        self.bhp = Some(bhp);
        self
    }

    pub fn n_steps(&self) -> usize {
        self.times.len()
    }

    /// `t_n − t_{n−1}`; only meaningful for `n ≥ 1`.
    pub fn dt(&self, n: usize) -> f64 {
        self.times[n] - self.times[n - 1]
    }

    pub fn injection_row(&self, n: usize) -> ArrayView1<'_, f64> {
        self.injection.row(n)
    }

    /// Returns the common step if the grid is uniform to within `1e-9` relative.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.n_steps() < 2 {
            return Err(Error::Shape("a uniform step needs at least two samples".into()));
        }
        let expected = self.dt(1);
        for n in 2..self.n_steps() {
            let dt = self.dt(n);
            if (dt - expected).abs() > 1e-9 * expected.abs() {
                return Err(Error::NonUniformGrid { index: n, dt, expected });
            }
        }
        Ok(expected)
    }

    /// Checks the series against `field`; returns it unchanged if every invariant holds.
    pub fn validate(self, field: &WellField) -> Result<Self> {
        self.check(field)?;
        Ok(self)
    }

    pub fn check(&self, field: &WellField) -> Result<()> {
        let n = self.n_steps();
        if n == 0 {
            return Err(Error::Shape("series has no time steps".into()));
        }
        check_shape("injection", &self.injection, n, field.n_inj())?;
        if let Some(p) = &self.production {
            check_shape("production", p, n, field.n_pro())?;
        }
        if let Some(p) = &self.bhp {
            check_shape("bhp", p, n, field.n_pro())?;
        }

        for (i, &t) in self.times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    what: "time",
                    row: i,
                    col: 0,
                });
            }
            if i > 0 && t <= self.times[i - 1] {
                return Err(Error::NonMonotoneTime {
                    index: i,
                    value: t,
                    prev_value: self.times[i - 1],
                });
            }
        }

        for ((row, col), &v) in self.injection.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "injection rate",
                    row,
                    col,
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeInjection { row, col, value: v });
            }
        }
        for (what, m) in [("production rate", &self.production), ("bhp", &self.bhp)] {
            if let Some(m) = m {
                if let Some(((row, col), _)) = m.indexed_iter().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::NonFinite { what, row, col });
                }
            }
        }
        Ok(())
    }

    /// Splits into rows `[0, index)` and `[index, n)`.
    pub fn split(&self, split: TrainTestSplit) -> Result<(RateSeries, RateSeries)> {
        let n = self.n_steps();
        let k = split.index;
        if k == 0 || k >= n {
            return Err(Error::SplitOutOfRange { index: k, n_steps: n });
        }
        let head = self.rows(0, k);
        let tail = self.rows(k, n);
        Ok((head, tail))
    }

    /// Copy of rows `[start, end)`.
    pub fn rows(&self, start: usize, end: usize) -> RateSeries {
        let take = |m: &Array2<f64>| m.slice(s![start..end, ..]).to_owned();
        RateSeries {
            times: self.times[start..end].to_vec(),
            injection: take(&self.injection),
            production: self.production.as_ref().map(take),
            bhp: self.bhp.as_ref().map(take),
        }
    }

    /// Appends `other` after `self`; optional parts must be present in both or neither.
    pub fn concat(&self, other: &RateSeries) -> Result<RateSeries> {
        let join = |a: &Array2<f64>, b: &Array2<f64>, what: &str| {
            concatenate(Axis(0), &[a.view(), b.view()])
                .map_err(|_| Error::Shape(format!("{what} column counts differ")))
        };
        let join_opt = |a: &Option<Array2<f64>>, b: &Option<Array2<f64>>, what: &str| match (a, b) {
            (Some(a), Some(b)) => join(a, b, what).map(Some),
            (None, None) => Ok(None),
            _ => Err(Error::Shape(format!("{what} present in only one part"))),
        };
        let mut times = self.times.clone();
        times.extend_from_slice(&other.times);
        Ok(RateSeries {
            times,
            injection: join(&self.injection, &other.injection, "injection")?,
            production: join_opt(&self.production, &other.production, "production")?,
            bhp: join_opt(&self.bhp, &other.bhp, "bhp")?,
        })
    }

    pub fn require_production(&self) -> Result<&Array2<f64>> {
        self.production
            .as_ref()
            .ok_or_else(|| Error::Shape("series carries no observed production".into()))
    }
}

fn check_shape(what: &str, m: &Array2<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::Shape(format!(
            "{what} is {}×{}, expected {rows}×{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Row index separating the training segment from the test segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub index: usize,
}

impl TrainTestSplit {
    pub fn new(index: usize) -> Self {
        TrainTestSplit { index }
    }

    /// Split at `⌊fraction · n_steps⌋`.
    pub fn fraction(n_steps: usize, fraction: f64) -> Self {
        TrainTestSplit {
            index: (n_steps as f64 * fraction).floor() as usize,
        }
    }
}

/// Serde adapter writing a matrix as nested row arrays.
pub(crate) mod matrix_serde {
    use ndarray::Array2;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
        m.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>, String> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err("ragged matrix rows".into());
        }
        Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect()).map_err(|e| e.to_string())
    }

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        from_rows(Vec::<Vec<f64>>::deserialize(d)?).map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<Array2<f64>>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_rows).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Array2<f64>>, D::Error> {
            Option::<Vec<Vec<f64>>>::deserialize(d)?
                .map(from_rows)
                .transpose()
                .map_err(D::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn field() -> WellField {
        WellField::numbered(2, 1).unwrap()
    }

    #[test]
    fn valid_series_passes_unchanged() {
        let s = RateSeries::new(
            vec![0.0, 1.0, 2.5],
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
            Some(array![[1.0], [2.0], [3.0]]),
            None,
        );
        let v = s.clone().validate(&field()).unwrap();
        assert_eq!(v, s);
        // idempotent
        assert_eq!(v.clone().validate(&field()).unwrap(), v);
    }

    #[test]
    fn repeated_time_reports_index() {
        let s = RateSeries::new(vec![0.0, 1.0, 1.0], Array2::zeros((3, 2)), None, None);
        match s.validate(&field()) {
            Err(Error::NonMonotoneTime { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_injection_reports_location() {
        let mut inj = Array2::zeros((3, 2));
        inj[[1, 0]] = -5.0;
        let s = RateSeries::new(vec![0.0, 1.0, 2.0], inj, None, None);
        match s.validate(&field()) {
            Err(Error::NegativeInjection { row, col, value }) => {
                assert_eq!((row, col), (1, 0));
                assert_eq!(value, -5.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn column_mismatch_is_shape_error() {
        let s = RateSeries::new(vec![0.0, 1.0], Array2::zeros((2, 3)), None, None);
        assert!(matches!(s.validate(&field()), Err(Error::Shape(_))));
        let s = RateSeries::uniform(1.0, Array2::zeros((2, 2))).with_production(Array2::zeros((2, 2)));
        assert!(matches!(s.validate(&field()), Err(Error::Shape(_))));
    }

    #[test]
    fn field_rejects_duplicates_and_empty() {
        assert!(WellField::new(vec![], vec!["P1".into()]).is_err());
        assert!(WellField::new(vec!["I1".into()], vec![]).is_err());
        assert!(WellField::new(vec!["I1".into(), "I1".into()], vec!["P1".into()]).is_err());
        // same name may appear as both injector and producer
        assert!(WellField::new(vec!["W".into()], vec!["W".into()]).is_ok());
    }

    #[test]
    fn split_lengths() {
        let s = RateSeries::uniform(1.0, Array2::zeros((10, 2)));
        let (a, b) = s.split(TrainTestSplit::new(7)).unwrap();
        assert_eq!((a.n_steps(), b.n_steps()), (7, 3));
        assert_eq!(b.times[0], 7.0);
    }

    #[test]
    fn split_boundaries_rejected() {
        let s = RateSeries::uniform(1.0, Array2::zeros((10, 2)));
        assert!(matches!(
            s.split(TrainTestSplit::new(0)),
            Err(Error::SplitOutOfRange { index: 0, n_steps: 10 })
        ));
        assert!(s.split(TrainTestSplit::new(10)).is_err());
    }

    #[test]
    fn uniform_step_detects_irregular_grid() {
        let s = RateSeries::new(vec![0.0, 1.0, 2.0, 3.5], Array2::zeros((4, 1)), None, None);
        assert!(matches!(s.uniform_step(), Err(Error::NonUniformGrid { index: 3, .. })));
        assert_eq!(
            RateSeries::uniform(0.5, Array2::zeros((4, 1))).uniform_step().unwrap(),
            0.5
        );
    }
}
