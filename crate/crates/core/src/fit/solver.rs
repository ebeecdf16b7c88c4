//! Projected Gauss-Newton with Armijo backtracking.
//!
//! Each iteration builds the Gauss-Newton model of the least-squares
//! objective, damps it Levenberg-Marquardt style, and minimizes the model
//! exactly over the feasible set (lower bounds plus per-row simplex
//! constraints) with a small primal active-set QP solver. The model minimizer
//! is feasible by construction, so the step `d = y − x` is a feasible descent
//! direction; the Armijo rule (halving, at most 40 times) then accepts only
//! steps that decrease the true objective.

use super::{project_row, GainConstraint};
use crate::error::{Error, Result};

/// Lower bounds on every coordinate plus groups of coordinates constrained to
/// the simplex (`Σ = 1`, or `Σ ≤ 1` in inequality mode). Group members must
/// have lower bound 0.
pub(crate) struct FeasibleSet {
    pub lower: Vec<f64>,
    pub rows: Vec<Vec<usize>>,
    pub mode: GainConstraint,
    /// Largest move of each coordinate in a single iteration (a box trust
    /// region); infinite where unrestricted.
    pub max_move: Vec<f64>,
}

impl FeasibleSet {
    pub fn project(&self, x: &mut [f64]) {
        for (v, l) in x.iter_mut().zip(&self.lower) {
            *v = v.max(*l);
        }
        let mut buf = Vec::new();
        for row in &self.rows {
            buf.clear();
            buf.extend(row.iter().map(|&k| x[k]));
            project_row(&mut buf, self.mode);
            for (&k, v) in row.iter().zip(&buf) {
                x[k] = *v;
            }
        }
    }
}

/// A sum of squared residuals over a [`FeasibleSet`].
pub(crate) trait Problem {
    fn dim(&self) -> usize;
    /// Objective value. With `grad`, also its gradient; with `hess` (which
    /// requires `grad`), also the Gauss-Newton matrix `2·JᵀWJ`, row-major.
    fn evaluate(&self, x: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64;
    fn feasible_set(&self) -> &FeasibleSet;
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub loss: f64,
    /// Initial loss followed by one entry per accepted step.
    pub trajectory: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;
const DAMP_INIT: f64 = 1e-3;
const DAMP_MIN: f64 = 1e-12;
const DAMP_MAX: f64 = 1e10;

pub(crate) fn minimize(problem: &impl Problem, x0: &[f64], max_iters: usize, tol: f64) -> Result<Outcome> {
    let n = problem.dim();
    let set = problem.feasible_set();
    let mut x = x0.to_vec();
    set.project(&mut x);
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n * n];
    let mut f = problem.evaluate(&x, Some(&mut g), Some(&mut h));
    if !f.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut trajectory = vec![f];
    let mut damping = DAMP_INIT;
    let mut m = vec![0.0; n * n];
    let mut x_try = vec![0.0; n];

    for iteration in 1..=max_iters {
        if f == 0.0 {
            break;
        }
        let diag_max = (0..n).map(|k| h[k * n + k]).fold(0.0, f64::max);
        let floor = if diag_max > 0.0 { 1e-10 * diag_max } else { 1.0 };
        m.copy_from_slice(&h);
        for k in 0..n {
            m[k * n + k] += damping * (h[k * n + k] + floor) + f64::EPSILON * floor;
        }
        let lo: Vec<f64> = (0..n).map(|k| set.lower[k].max(x[k] - set.max_move[k])).collect();
        let hi: Vec<f64> = (0..n).map(|k| x[k] + set.max_move[k]).collect();
        let y = solve_qp(&m, &g, &x, &lo, &hi, set);
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            break;
        }
        let curvature = quad_form(&h, &d);
        let predicted = -(slope + 0.5 * curvature);

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            for k in 0..n {
                x_try[k] = x[k] + lambda * d[k];
            }
            let f_try = problem.evaluate(&x_try, None, None);
            if !f_try.is_finite() {
                return Err(Error::Divergence { iteration });
            }
            if f_try <= f + ARMIJO * lambda * slope {
                accepted = Some(f_try);
                break;
            }
            lambda *= 0.5;
        }
        let Some(f_new) = accepted else {
            break;
        };

        let ratio = if lambda == 1.0 && predicted > 0.0 {
            (f - f_new) / predicted
        } else {
            0.0
        };
        if ratio > 0.75 {
            damping = (damping / 4.0).max(DAMP_MIN);
        } else if ratio < 0.25 {
            damping = (damping * 4.0).min(DAMP_MAX);
        }

        let decrease = f - f_new;
        std::mem::swap(&mut x, &mut x_try);
        f = problem.evaluate(&x, Some(&mut g), Some(&mut h));
        trajectory.push(f);
        if decrease <= tol * trajectory[trajectory.len() - 2].abs() {
            break;
        }
    }

    Ok(Outcome { x, loss: f, trajectory })
}

fn quad_form(m: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        s += v[i] * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
    s
}

/// Minimizes `gᵀ(y−x) + ½(y−x)ᵀM(y−x)` over the box `lo ≤ y ≤ hi` and the
/// row constraints of `set`, starting from the feasible point `x`. `M` must be
/// positive definite.
///
/// Primal active-set method: the working set holds variables pinned at a
/// bound and active row constraints. Each iteration solves the
/// equality-constrained subproblem on the working set, moves toward its
/// solution until a new constraint blocks, or, at a subproblem minimizer,
/// releases the constraint with the most negative multiplier.
pub(crate) fn solve_qp(m: &[f64], g: &[f64], x: &[f64], lo: &[f64], hi: &[f64], set: &FeasibleSet) -> Vec<f64> {
    let n = x.len();
    let mut y = x.to_vec();
    let mut row_of = vec![usize::MAX; n];
    for (r, row) in set.rows.iter().enumerate() {
        for &k in row {
            row_of[k] = r;
        }
    }
    let eq = set.mode == GainConstraint::Equality;
    let row_sum = |y: &[f64], r: usize| set.rows[r].iter().map(|&k| y[k]).sum::<f64>();

    let mut pinned: Vec<Pin> = (0..n)
        .map(|k| {
            if y[k] <= lo[k] {
                Pin::Lower
            } else if y[k] >= hi[k] {
                Pin::Upper
            } else {
                Pin::Free
            }
        })
        .collect();
    let mut row_active: Vec<bool> = (0..set.rows.len())
        .map(|r| eq || row_sum(&y, r) >= 1.0 - 1e-12)
        .collect();
    let g_scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);

    let mut grad_phi = vec![0.0; n];
    // set after an unblocked full step: y is then the working-set minimizer
    // even if round-off makes the recomputed step slightly nonzero
    let mut at_minimizer = false;
    for _ in 0..(10 * n + 20) {
        // gradient of the model at y
        for i in 0..n {
            let row = &m[i * n..(i + 1) * n];
            grad_phi[i] = g[i]
                + row
                    .iter()
                    .zip(&y)
                    .zip(x)
                    .map(|((a, yv), xv)| a * (yv - xv))
                    .sum::<f64>();
        }
        let free: Vec<usize> = (0..n).filter(|&k| pinned[k] == Pin::Free).collect();
        let rows: Vec<usize> = (0..set.rows.len())
            .filter(|&r| row_active[r] && set.rows[r].iter().any(|&k| pinned[k] == Pin::Free))
            .collect();
        let (p_free, lambda) = equality_step(m, &grad_phi, &free, &rows, &set.rows, n);
        let mut p = vec![0.0; n];
        for (&k, v) in free.iter().zip(&p_free) {
            p[k] = *v;
        }
        let y_scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let step_norm = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));

        if at_minimizer || step_norm <= 1e-13 * y_scale {
            at_minimizer = false;
            // y minimizes the model on the working set: check multipliers
            let mut row_lambda = vec![0.0; set.rows.len()];
            for (&r, l) in rows.iter().zip(&lambda) {
                row_lambda[r] = *l;
            }
            let tol = 1e-12 * g_scale;
            let mut worst: Option<(f64, Release)> = None;
            for k in 0..n {
                if pinned[k] != Pin::Free {
                    let r = row_of[k];
                    let mut mu = grad_phi[k]
                        + if r != usize::MAX && row_active[r] {
                            row_lambda[r]
                        } else {
                            0.0
                        };
                    if pinned[k] == Pin::Upper {
                        mu = -mu;
                    }
                    if mu < -tol && worst.as_ref().is_none_or(|(w, _)| mu < *w) {
                        worst = Some((mu, Release::Bound(k)));
                    }
                }
            }
            if !eq {
                for &r in &rows {
                    let nu = row_lambda[r];
                    if nu < -tol && worst.as_ref().is_none_or(|(w, _)| nu < *w) {
                        worst = Some((nu, Release::Row(r)));
                    }
                }
            }
            match worst {
                None => return y,
                Some((_, Release::Bound(k))) => pinned[k] = Pin::Free,
                Some((_, Release::Row(r))) => row_active[r] = false,
            }
            continue;
        }

        // ratio test against constraints outside the working set
        let mut alpha = 1.0;
        let mut block = None;
        for &k in &free {
            let a = if p[k] < 0.0 {
                (lo[k] - y[k]) / p[k]
            } else if p[k] > 0.0 {
                (hi[k] - y[k]) / p[k]
            } else {
                f64::INFINITY
            };
            if a.max(0.0) < alpha {
                alpha = a.max(0.0);
                block = Some(Release::Bound(k));
            }
        }
        if !eq {
            for (r, row) in set.rows.iter().enumerate() {
                if row_active[r] {
                    continue;
                }
                let s: f64 = row.iter().map(|&k| p[k]).sum();
                if s > 0.0 {
                    let a = ((1.0 - row_sum(&y, r)) / s).max(0.0);
                    if a < alpha {
                        alpha = a;
                        block = Some(Release::Row(r));
                    }
                }
            }
        }
        for k in 0..n {
            y[k] += alpha * p[k];
        }
        match block {
            Some(Release::Bound(k)) => {
                if p[k] < 0.0 {
                    y[k] = lo[k];
                    pinned[k] = Pin::Lower;
                } else {
                    y[k] = hi[k];
                    pinned[k] = Pin::Upper;
                }
            }
            Some(Release::Row(r)) => row_active[r] = true,
            None => at_minimizer = true,
        }
    }
    y
}

#[derive(Clone, Copy, PartialEq)]
enum Pin {
    Free,
    Lower,
    Upper,
}

enum Release {
    Bound(usize),
    Row(usize),
}

/// Solves the KKT system of `min ½pᵀMp + hᵀp` over the free coordinates
/// subject to `Σ_{row ∩ free} p = 0` for every listed row. Returns the free
/// step and the row multipliers (sign convention `Mp + h + Aᵀλ = 0`).
fn equality_step(
    m: &[f64],
    h: &[f64],
    free: &[usize],
    rows: &[usize],
    groups: &[Vec<usize>],
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let nf = free.len();
    let size = nf + rows.len();
    let mut pos = vec![usize::MAX; n];
    for (a, &k) in free.iter().enumerate() {
        pos[k] = a;
    }
    let mut kkt = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            kkt[a * size + b] = m[i * n + j];
        }
        rhs[a] = -h[i];
    }
    for (c, &r) in rows.iter().enumerate() {
        for &k in &groups[r] {
            if pos[k] != usize::MAX {
                kkt[(nf + c) * size + pos[k]] = 1.0;
                kkt[pos[k] * size + nf + c] = 1.0;
            }
        }
    }
    let sol = solve_dense(&mut kkt, &mut rhs, size);
    (sol[..nf].to_vec(), sol[nf..].to_vec())
}

/// Gaussian elimination with partial pivoting; singular pivots yield zeros.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Vec<f64> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            continue;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let d = a[r * n + r];
        if d == 0.0 {
            continue;
        }
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
        x[r] = (b[r] - s) / d;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Weighted distance to a target with a box lower bound at zero.
    struct BoxQuad {
        target: Vec<f64>,
        weight: Vec<f64>,
        set: FeasibleSet,
    }

    impl BoxQuad {
        fn new(target: Vec<f64>, weight: Vec<f64>, rows: Vec<Vec<usize>>, mode: GainConstraint) -> Self {
            let n = target.len();
            BoxQuad {
                target,
                weight,
                set: FeasibleSet {
                    lower: vec![0.0; n],
                    rows,
                    mode,
                    max_move: vec![f64::INFINITY; n],
                },
            }
        }
    }

    impl Problem for BoxQuad {
        fn dim(&self) -> usize {
            self.target.len()
        }
        fn evaluate(&self, x: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64 {
            let n = x.len();
            let f = (0..n).map(|k| self.weight[k] * (x[k] - self.target[k]).powi(2)).sum();
            if let Some(g) = grad {
                for k in 0..n {
                    g[k] = 2.0 * self.weight[k] * (x[k] - self.target[k]);
                }
            }
            if let Some(h) = hess {
                h.iter_mut().for_each(|v| *v = 0.0);
                for k in 0..n {
                    h[k * n + k] = 2.0 * self.weight[k];
                }
            }
            f
        }
        fn feasible_set(&self) -> &FeasibleSet {
            &self.set
        }
    }

    #[test]
    fn solves_bound_constrained_quadratic() {
        let p = BoxQuad::new(
            vec![1.0, -2.0, 3.0],
            vec![1.0, 10.0, 100.0],
            vec![],
            GainConstraint::Equality,
        );
        let out = minimize(&p, &[5.0, 5.0, 5.0], 500, 1e-14).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-6);
        assert_eq!(out.x[1], 0.0);
        assert!((out.x[2] - 3.0).abs() < 1e-6);
        assert!(out.trajectory.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*out.trajectory.last().unwrap(), out.loss);
    }

    #[test]
    fn stationary_start_stops_immediately() {
        let p = BoxQuad::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![], GainConstraint::Equality);
        let out = minimize(&p, &[1.0, 2.0], 100, 1e-10).unwrap();
        assert_eq!(out.trajectory, vec![0.0]);
    }

    #[test]
    fn qp_with_unit_metric_is_simplex_projection() {
        // minimizing ½|y − v|² over the simplex is the Euclidean projection of v
        let v = [0.9, 0.4, -0.3, 0.5];
        let set = FeasibleSet {
            lower: vec![0.0; 4],
            rows: vec![vec![0, 1, 2, 3]],
            mode: GainConstraint::Equality,
            max_move: vec![f64::INFINITY; 4],
        };
        let x = [0.25; 4];
        let mut m = vec![0.0; 16];
        for k in 0..4 {
            m[k * 4 + k] = 1.0;
        }
        let g: Vec<f64> = (0..4).map(|k| x[k] - v[k]).collect();
        let y = solve_qp(&m, &g, &x, &set.lower, &[f64::INFINITY; 4], &set);
        let mut expect = v.to_vec();
        project_row(&mut expect, GainConstraint::Equality);
        for k in 0..4 {
            assert!((y[k] - expect[k]).abs() < 1e-12, "{y:?} vs {expect:?}");
        }
    }

    #[test]
    fn qp_inequality_rows_activate_and_release() {
        let set = FeasibleSet {
            lower: vec![0.0; 3],
            rows: vec![vec![0, 1, 2]],
            mode: GainConstraint::Inequality,
            max_move: vec![f64::INFINITY; 3],
        };
        let mut m = vec![0.0; 9];
        for k in 0..3 {
            m[k * 3 + k] = 1.0;
        }
        let x = [0.1, 0.1, 0.1];
        for v in [[0.9, 0.8, 0.1], [0.2, 0.1, -0.5], [0.3, 0.3, 0.3]] {
            let g: Vec<f64> = (0..3).map(|k| x[k] - v[k]).collect();
            let y = solve_qp(&m, &g, &x, &set.lower, &[f64::INFINITY; 3], &set);
            let mut expect = v.to_vec();
            project_row(&mut expect, GainConstraint::Inequality);
            for k in 0..3 {
                assert!((y[k] - expect[k]).abs() < 1e-12, "{y:?} vs {expect:?}");
            }
        }
    }

    #[test]
    fn fits_weighted_target_on_simplex() {
        let p = BoxQuad::new(
            vec![0.7, 0.6, -0.1, 2.0],
            vec![1.0, 3.0, 2.0, 1.0],
            vec![vec![0, 1, 2]],
            GainConstraint::Equality,
        );
        let out = minimize(&p, &[1.0, 0.0, 0.0, 0.0], 50, 1e-14).unwrap();
        let s: f64 = out.x[..3].iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(out.x.iter().all(|v| *v >= 0.0));
        assert!((out.x[3] - 2.0).abs() < 1e-9);
        // KKT by hand: w·(x − t) equal across the free pair, x2 = 0
        assert_eq!(out.x[2], 0.0);
        assert!(
            (out.x[0] - 0.475).abs() < 1e-9 && (out.x[1] - 0.525).abs() < 1e-9,
            "{:?}",
            out.x
        );
    }
}
