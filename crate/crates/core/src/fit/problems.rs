//! Objectives for the three CRM variants in a scaled coordinate system.
//!
//! Time constants are optimized as `ln τ`. Initial rates and productivity
//! indices are divided by per-producer scales so that a unit change in any
//! coordinate moves the variance-scaled residuals by a comparable amount.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use super::solver::{FeasibleSet, Problem};
use super::{variance, GainConstraint, GainOrientation, ScaledMse};
use crate::crm::tank::{self, Tank};
use crate::crm::{CrmipParams, CrmpParams, CrmtParams, TAU_MIN};
use crate::series::RateSeries;

fn tau_of(x: f64) -> f64 {
    x.exp().max(TAU_MIN)
}

/// Per-iteration move limit on `ln τ`: one e-fold. Where the loss is flat in
/// `τ` an unrestricted Gauss-Newton step can fling `τ` to overflow.
const LN_TAU_MOVE: f64 = 1.0;

fn move_limits(dim: usize, tau_coords: usize) -> Vec<f64> {
    let mut m = vec![f64::INFINITY; dim];
    m[..tau_coords].iter_mut().for_each(|v| *v = LN_TAU_MOVE);
    m
}

fn log_tau_floor() -> f64 {
    TAU_MIN.ln()
}

fn rate_scales(observed: ArrayView2<'_, f64>) -> Vec<f64> {
    observed
        .axis_iter(Axis(1))
        .map(|c| {
            let sd = variance(c.iter().copied()).sqrt();
            if sd > 0.0 {
                sd
            } else {
                c.iter().fold(1.0f64, |m, v| m.max(v.abs()))
            }
        })
        .collect()
}

/// Scale for `J`: rate scale over the RMS BHP slope.
fn press_scales(series: &RateSeries, rate_scale: &[f64]) -> Vec<f64> {
    let bhp = series.bhp.as_ref().expect("pressure scales need BHP");
    rate_scale
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let col = bhp.column(j);
            let n = series.n_steps();
            let ms = (1..n)
                .map(|k| ((col[k] - col[k - 1]) / series.dt(k)).powi(2))
                .sum::<f64>()
                / (n.max(2) - 1) as f64;
            if ms > 0.0 {
                s / ms.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// Gradient and Gauss-Newton contributions of the residuals that depend on
/// one subset of coordinates (one producer's parameters).
struct Local {
    idx: Vec<usize>,
    /// Sensitivity of the current residual to each coordinate in `idx`.
    v: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    with_hess: bool,
}

impl Local {
    fn new(idx: Vec<usize>, with_hess: bool) -> Self {
        let m = idx.len();
        Local {
            idx,
            v: vec![0.0; m],
            g: vec![0.0; m],
            h: if with_hess { vec![0.0; m * m] } else { Vec::new() },
            with_hess,
        }
    }

    /// Adds residual `r` with weight `w`, sensitivities taken from `self.v`.
    fn add(&mut self, w: f64, r: f64) {
        let m = self.v.len();
        let c = 2.0 * w * r;
        for (g, v) in self.g.iter_mut().zip(&self.v) {
            *g += c * v;
        }
        if self.with_hess {
            for a in 0..m {
                let va = 2.0 * w * self.v[a];
                if va == 0.0 {
                    continue;
                }
                let row = &mut self.h[a * m..(a + 1) * m];
                for (h, vb) in row[a..].iter_mut().zip(&self.v[a..]) {
                    *h += va * vb;
                }
            }
        }
    }

    fn scatter(&self, grad: &mut [f64], hess: Option<&mut [f64]>) {
        let n = grad.len();
        for (&k, g) in self.idx.iter().zip(&self.g) {
            grad[k] += g;
        }
        if let Some(h) = hess {
            let m = self.idx.len();
            for a in 0..m {
                for b in a..m {
                    let v = self.h[a * m + b];
                    let (ka, kb) = (self.idx[a], self.idx[b]);
                    h[ka * n + kb] += v;
                    if ka != kb {
                        h[kb * n + ka] += v;
                    }
                }
            }
        }
    }
}

fn clear(grad: &mut Option<&mut [f64]>, hess: &mut Option<&mut [f64]>) {
    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    if let Some(h) = hess.as_deref_mut() {
        h.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Simplex groups over a row-major `[ni × np]` gain block at `offset`: one
/// per injector row, or one per producer column.
fn gain_rows(ni: usize, np: usize, offset: usize, orientation: GainOrientation) -> Vec<Vec<usize>> {
    match orientation {
        GainOrientation::PerInjector => (0..ni)
            .map(|i| (offset + i * np..offset + (i + 1) * np).collect())
            .collect(),
        GainOrientation::PerProducer => (0..np)
            .map(|j| (0..ni).map(|i| offset + i * np + j).collect())
            .collect(),
    }
}

pub(crate) struct CrmpProblem<'a> {
    series: &'a RateSeries,
    observed: ArrayView2<'a, f64>,
    scaled: ScaledMse,
    q0_scale: Vec<f64>,
    j_scale: Option<Vec<f64>>,
    set: FeasibleSet,
    ni: usize,
    np: usize,
}

impl<'a> CrmpProblem<'a> {
    pub fn new(
        series: &'a RateSeries,
        observed: ArrayView2<'a, f64>,
        mode: GainConstraint,
        orientation: GainOrientation,
        press: bool,
    ) -> Self {
        let q0_scale = rate_scales(observed);
        let j_scale = press.then(|| press_scales(series, &q0_scale));
        let (ni, np) = (series.injection.ncols(), observed.ncols());
        let dim = np * (2 + ni) + if press { np } else { 0 };
        let mut lower = vec![0.0; dim];
        lower[..np].iter_mut().for_each(|v| *v = log_tau_floor());
        CrmpProblem {
            series,
            observed,
            scaled: ScaledMse::new(observed),
            q0_scale,
            j_scale,
            set: FeasibleSet {
                lower,
                rows: gain_rows(ni, np, np, orientation),
                mode,
                max_move: move_limits(dim, np),
            },
            ni,
            np,
        }
    }

    fn gain_offset(&self) -> usize {
        self.np
    }

    fn q0_offset(&self) -> usize {
        self.np + self.ni * self.np
    }

    fn j_offset(&self) -> usize {
        self.q0_offset() + self.np
    }

    pub fn pack(&self, p: &CrmpParams) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        x.extend(p.tau.iter().map(|t| t.ln()));
        x.extend(p.gains.iter().copied());
        x.extend(p.q0.iter().zip(&self.q0_scale).map(|(q, s)| q / s));
        if let Some(js) = &self.j_scale {
            match &p.j_index {
                Some(jv) => x.extend(jv.iter().zip(js).map(|(j, s)| j / s)),
                None => x.extend(std::iter::repeat_n(0.0, self.np)),
            }
        }
        x
    }

    pub fn unpack(&self, x: &[f64]) -> CrmpParams {
        let np = self.np;
        let g0 = self.gain_offset();
        let q = self.q0_offset();
        CrmpParams {
            tau: x[..np].iter().map(|&v| tau_of(v)).collect(),
            gains: Array2::from_shape_vec((self.ni, np), x[g0..q].to_vec()).expect("gain block length"),
            q0: x[q..q + np].iter().zip(&self.q0_scale).map(|(z, s)| z * s).collect(),
            j_index: self.j_scale.as_ref().map(|js| {
                let o = self.j_offset();
                x[o..o + np].iter().zip(js).map(|(z, s)| z * s).collect()
            }),
        }
    }
}

impl Problem for CrmpProblem<'_> {
    fn dim(&self) -> usize {
        self.set.lower.len()
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>, mut hess: Option<&mut [f64]>) -> f64 {
        let (ni, np) = (self.ni, self.np);
        let g0 = self.gain_offset();
        let qo = self.q0_offset();
        let jo = self.j_offset();
        clear(&mut grad, &mut hess);
        let mut total = 0.0;
        let mut gains = vec![0.0; ni];
        for j in 0..np {
            let tau = tau_of(x[j]);
            for i in 0..ni {
                gains[i] = x[g0 + i * np + j];
            }
            let tank = Tank {
                tau,
                q0: x[qo + j] * self.q0_scale[j],
                gains: &gains,
                j_index: self.j_scale.as_ref().map(|js| x[jo + j] * js[j]),
            };
            let bhp = self.j_scale.as_ref().and(self.series.bhp.as_ref()).map(|b| b.column(j));
            let w = self.scaled.weight(j);
            let obs = self.observed.column(j);
            let inputs = self.series.injection.view();

            let Some(g) = grad.as_deref_mut() else {
                tank::forward(&self.series.times, &tank, inputs, bhp, |k, q| {
                    let r = q - obs[k];
                    total += w * r * r;
                });
                continue;
            };
            let mut idx = vec![j];
            idx.extend((0..ni).map(|i| g0 + i * np + j));
            idx.push(qo + j);
            let j_scale = self.j_scale.as_ref().map(|js| js[j]);
            if j_scale.is_some() {
                idx.push(jo + j);
            }
            let mut local = Local::new(idx, hess.is_some());
            tank::sweep(&self.series.times, &tank, inputs, bhp, |k, q, s| {
                let r = q - obs[k];
                total += w * r * r;
                local.v[0] = s.tau * tau;
                local.v[1..=ni].copy_from_slice(s.gains);
                local.v[ni + 1] = s.q0 * self.q0_scale[j];
                if let Some(js) = j_scale {
                    local.v[ni + 2] = s.j * js;
                }
                local.add(w, r);
            });
            local.scatter(g, hess.as_deref_mut());
        }
        total
    }
}

pub(crate) struct CrmtProblem<'a> {
    series: &'a RateSeries,
    total_injection: Array2<f64>,
    observed: ArrayView1<'a, f64>,
    weight: f64,
    q0_scale: f64,
    set: FeasibleSet,
}

impl<'a> CrmtProblem<'a> {
    pub fn new(series: &'a RateSeries, observed: ArrayView1<'a, f64>, mode: GainConstraint) -> Self {
        let col = observed.insert_axis(Axis(1));
        CrmtProblem {
            series,
            total_injection: series.injection.sum_axis(Axis(1)).insert_axis(Axis(1)),
            observed,
            weight: ScaledMse::new(col).weight(0),
            q0_scale: rate_scales(col)[0],
            set: FeasibleSet {
                lower: vec![log_tau_floor(), 0.0, 0.0],
                rows: vec![vec![1]],
                mode,
                max_move: move_limits(3, 1),
            },
        }
    }

    pub fn pack(&self, p: &CrmtParams) -> Vec<f64> {
        vec![p.tau.ln(), p.f_field, p.q0 / self.q0_scale]
    }

    pub fn unpack(&self, x: &[f64]) -> CrmtParams {
        CrmtParams {
            tau: tau_of(x[0]),
            f_field: x[1].clamp(0.0, 1.0),
            q0: x[2] * self.q0_scale,
        }
    }
}

impl Problem for CrmtProblem<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>, mut hess: Option<&mut [f64]>) -> f64 {
        let tau = tau_of(x[0]);
        let gains = [x[1]];
        let tank = Tank {
            tau,
            q0: x[2] * self.q0_scale,
            gains: &gains,
            j_index: None,
        };
        clear(&mut grad, &mut hess);
        let mut total = 0.0;
        let mut local = Local::new(vec![0, 1, 2], hess.is_some());
        tank::sweep(
            &self.series.times,
            &tank,
            self.total_injection.view(),
            None,
            |k, q, s| {
                let r = q - self.observed[k];
                total += self.weight * r * r;
                local.v[0] = s.tau * tau;
                local.v[1] = s.gains[0];
                local.v[2] = s.q0 * self.q0_scale;
                local.add(self.weight, r);
            },
        );
        if let Some(g) = grad {
            local.scatter(g, hess);
        }
        total
    }
}

pub(crate) struct CrmipProblem<'a> {
    series: &'a RateSeries,
    observed: ArrayView2<'a, f64>,
    scaled: ScaledMse,
    /// Per-producer scale shared by that producer's pairs.
    q0_scale: Vec<f64>,
    j_scale: Option<Vec<f64>>,
    set: FeasibleSet,
    ni: usize,
    np: usize,
}

impl<'a> CrmipProblem<'a> {
    pub fn new(
        series: &'a RateSeries,
        observed: ArrayView2<'a, f64>,
        mode: GainConstraint,
        orientation: GainOrientation,
        press: bool,
    ) -> Self {
        let q0_scale = rate_scales(observed);
        let j_scale = press.then(|| press_scales(series, &q0_scale));
        let (ni, np) = (series.injection.ncols(), observed.ncols());
        let b = ni * np;
        let dim = b * if press { 4 } else { 3 };
        let mut lower = vec![0.0; dim];
        lower[..b].iter_mut().for_each(|v| *v = log_tau_floor());
        CrmipProblem {
            series,
            observed,
            scaled: ScaledMse::new(observed),
            q0_scale,
            j_scale,
            set: FeasibleSet {
                lower,
                rows: gain_rows(ni, np, b, orientation),
                mode,
                max_move: move_limits(dim, b),
            },
            ni,
            np,
        }
    }

    fn block(&self) -> usize {
        self.ni * self.np
    }

    pub fn pack(&self, p: &CrmipParams) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        x.extend(p.tau.iter().map(|t| t.ln()));
        x.extend(p.gains.iter().copied());
        x.extend(p.q0.indexed_iter().map(|((_, j), q)| q / self.q0_scale[j]));
        if let Some(js) = &self.j_scale {
            match &p.j_index {
                Some(m) => x.extend(m.indexed_iter().map(|((_, j), v)| v / js[j])),
                None => x.extend(std::iter::repeat_n(0.0, self.block())),
            }
        }
        x
    }

    pub fn unpack(&self, x: &[f64]) -> CrmipParams {
        let b = self.block();
        let shape = (self.ni, self.np);
        let tau = Array2::from_shape_fn(shape, |(i, j)| tau_of(x[i * self.np + j]));
        let gains = Array2::from_shape_fn(shape, |(i, j)| x[b + i * self.np + j]);
        let q0 = Array2::from_shape_fn(shape, |(i, j)| x[2 * b + i * self.np + j] * self.q0_scale[j]);
        let j_index = self
            .j_scale
            .as_ref()
            .map(|js| Array2::from_shape_fn(shape, |(i, j)| x[3 * b + i * self.np + j] * js[j]));
        CrmipParams {
            tau,
            gains,
            q0,
            j_index,
        }
    }
}

impl Problem for CrmipProblem<'_> {
    fn dim(&self) -> usize {
        self.set.lower.len()
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>, mut hess: Option<&mut [f64]>) -> f64 {
        let (ni, np) = (self.ni, self.np);
        let b = self.block();
        let n = self.series.n_steps();
        let blocks = if self.j_scale.is_some() { 4 } else { 3 };
        clear(&mut grad, &mut hess);
        let mut total = 0.0;
        // per (step, injector): rate and its sensitivities in optimizer coordinates
        let mut rates = Array2::<f64>::zeros((n, ni));
        let mut sens = ndarray::Array3::<f64>::zeros((n, ni, blocks));
        for j in 0..np {
            let bhp = self.j_scale.as_ref().and(self.series.bhp.as_ref()).map(|m| m.column(j));
            for i in 0..ni {
                let at = i * np + j;
                let gains = [x[b + at]];
                let tau = tau_of(x[at]);
                let tank = Tank {
                    tau,
                    q0: x[2 * b + at] * self.q0_scale[j],
                    gains: &gains,
                    j_index: self.j_scale.as_ref().map(|js| x[3 * b + at] * js[j]),
                };
                let input = self.series.injection.slice(ndarray::s![.., i..i + 1]);
                if grad.is_some() {
                    tank::sweep(&self.series.times, &tank, input, bhp, |k, q, s| {
                        rates[[k, i]] = q;
                        sens[[k, i, 0]] = s.tau * tau;
                        sens[[k, i, 1]] = s.gains[0];
                        sens[[k, i, 2]] = s.q0 * self.q0_scale[j];
                        if let Some(js) = &self.j_scale {
                            sens[[k, i, 3]] = s.j * js[j];
                        }
                    });
                } else {
                    tank::forward(&self.series.times, &tank, input, bhp, |k, q| rates[[k, i]] = q);
                }
            }
            let w = self.scaled.weight(j);
            let idx = (0..ni)
                .flat_map(|i| (0..blocks).map(move |d| d * b + i * np + j))
                .collect();
            let mut local = Local::new(idx, hess.is_some());
            for k in 0..n {
                let r = rates.row(k).sum() - self.observed[[k, j]];
                total += w * r * r;
                if grad.is_some() {
                    for (v, s) in local.v.iter_mut().zip(sens.slice(ndarray::s![k, .., ..]).iter()) {
                        *v = *s;
                    }
                    local.add(w, r);
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                local.scatter(g, hess.as_deref_mut());
            }
        }
        total
    }
}
