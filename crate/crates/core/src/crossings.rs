//! Three-zonal periodic solutions described by their four crossing times,
//! and the bias function `lambda(x)`.
//!
//! A periodic solution visiting both outer zones leaves the upper zone at
//! `t1` (through `x = 1`), enters the lower zone at `t2`, leaves it at `t3`
//! and re-enters the upper zone at `t4`, closing up at `t1 + 2 pi`. The
//! transition system
//!
//! ```text
//! u(t2, t1, 1) = -1,  u(t3, t2, -1) = -1,  u(t4, t3, -1) = 1,  u(t1 + 2 pi, t4, 1) = 1
//! ```
//!
//! is solved with a damped Newton iteration. [`residual_3z`] evaluates the
//! equivalent exponential form built from [`g_aux`].

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactflow::{advance, linear_zone_flow, ZoneCoeffs};
use crate::model::{Params, Zone};
use crate::poincare::{displacement_d, dp};

/// Crossing times `t1 < t2 < t3 < t4 < t1 + 2 pi` with `t1` in `[0, 2 pi)`,
/// together with the bias they were computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSequence {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub lambda: f64,
}

impl CrossingSequence {
    pub fn times(&self) -> [f64; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }

    fn with_times(&self, t: [f64; 4]) -> Self {
        CrossingSequence {
            t1: t[0],
            t2: t[1],
            t3: t[2],
            t4: t[3],
            lambda: self.lambda,
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.t1 < self.t2 && self.t2 < self.t3 && self.t3 < self.t4 && self.t4 < self.t1 + TAU
    }

    /// Shifts all four times by the multiple of `2 pi` that puts `t1` in `[0, 2 pi)`.
    pub fn normalized(&self) -> Self {
        let k = (self.t1 / TAU).floor();
        let shift = k * TAU;
        let mut t = self.times().map(|v| v - shift);
        if t[0] >= TAU {
            t = t.map(|v| v - TAU);
        }
        self.with_times(t)
    }
}

/// Result of [`solve_crossing_system`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSolution {
    pub sequence: CrossingSequence,
    pub iterations: usize,
    /// Infinity norm of [`residual_direct`] at `sequence`.
    pub residual: f64,
}

/// `g(t, s) = (mu s (s sin t + cos t) + b (s^2 + 1)) / (s^2 + 1)` with the
/// effective inner slope `eps b`.
pub fn g_aux(t: f64, s: f64, p: &Params) -> f64 {
    let s2 = s * s + 1.0;
    (p.mu * s * (s * t.sin() + t.cos()) + p.b_eff() * s2) / s2
}

/// Exponential form of the crossing system. Each row is the transition
/// equation of one leg multiplied by that leg's slope, so the rows vanish
/// identically (and carry no information) when the slope is zero.
pub fn residual_3z(p: &Params, cs: &CrossingSequence) -> [f64; 4] {
    let a = p.a_eff();
    let b = p.b_eff();
    let l = cs.lambda;
    let g = |t: f64, s: f64| g_aux(t, s, p);
    let pi = std::f64::consts::PI;
    let CrossingSequence { t1, t2, t3, t4, .. } = *cs;
    [
        (-b * t1).exp() * (g(t1, b) + l) + (-b * t2).exp() * (g(t2 + pi, b) - l),
        (-a * t2).exp() * (g(t2 + pi, a) - l) - (-a * t3).exp() * (g(t3 + pi, a) - l),
        (-b * t3).exp() * (g(t3 + pi, b) - l) + (-b * t4).exp() * (g(t4, b) + l),
        (-a * t1).exp() * (g(t1, a) + l) - (-a * (t4 - TAU)).exp() * (g(t4, a) + l),
    ]
}

/// Transition residuals of the four legs, each leg integrated with its own
/// zone's closed form (no event detection).
pub fn residual_direct(p: &Params, cs: &CrossingSequence) -> [f64; 4] {
    let q = p.with_lambda(cs.lambda);
    let inner = ZoneCoeffs::for_zone(&q, Zone::Inner);
    let lower = ZoneCoeffs::for_zone(&q, Zone::Lower);
    let upper = ZoneCoeffs::for_zone(&q, Zone::Upper);
    let mu = q.mu;
    let CrossingSequence { t1, t2, t3, t4, .. } = *cs;
    [
        linear_zone_flow(inner, mu, t1, 1.0, t2) + 1.0,
        linear_zone_flow(lower, mu, t2, -1.0, t3) + 1.0,
        linear_zone_flow(inner, mu, t3, -1.0, t4) - 1.0,
        linear_zone_flow(upper, mu, t4, 1.0, t1 + TAU) - 1.0,
    ]
}

fn inf_norm(r: &[f64; 4]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Reads the crossing times off the periodic solution through `x0` at
/// `t = 0`. Returns `None` unless the solution follows the pattern
/// upper, inner, lower, inner, upper exactly once per period.
pub fn extract_crossings(p: &Params, x0: f64) -> Result<Option<CrossingSequence>> {
    let tr = advance(p, 0.0, x0, 2.0 * TAU)?;
    let switches: Vec<(f64, Zone, Zone)> = tr.switches().collect();
    let Some(start) = switches
        .iter()
        .position(|&(t, from, to)| t < TAU && from == Zone::Upper && to == Zone::Inner)
    else {
        return Ok(None);
    };
    let t1 = switches[start].0;
    let expected = [
        (Zone::Inner, Zone::Lower),
        (Zone::Lower, Zone::Inner),
        (Zone::Inner, Zone::Upper),
        (Zone::Upper, Zone::Inner),
    ];
    let rest = &switches[start + 1..];
    if rest.len() < 4 {
        return Ok(None);
    }
    for (k, &(from, to)) in expected.iter().enumerate() {
        if rest[k].1 != from || rest[k].2 != to {
            return Ok(None);
        }
    }
    // the fourth switch closes the period
    if (rest[3].0 - (t1 + TAU)).abs() > 1e-6 {
        return Ok(None);
    }
    let cs = CrossingSequence {
        t1,
        t2: rest[0].0,
        t3: rest[1].0,
        t4: rest[2].0,
        lambda: p.lambda,
    };
    Ok(Some(cs.normalized()))
}

/// Newton finite-difference step for the Jacobian columns.
pub const JACOBIAN_STEP: f64 = 1e-7;
/// Convergence target on the infinity norm of [`residual_direct`].
pub const RESIDUAL_TARGET: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;

fn jacobian(p: &Params, cs: &CrossingSequence) -> [[f64; 4]; 4] {
    let mut jac = [[0.0; 4]; 4];
    let t = cs.times();
    for j in 0..4 {
        let mut plus = t;
        let mut minus = t;
        plus[j] += JACOBIAN_STEP;
        minus[j] -= JACOBIAN_STEP;
        let rp = residual_direct(p, &cs.with_times(plus));
        let rm = residual_direct(p, &cs.with_times(minus));
        for i in 0..4 {
            jac[i][j] = (rp[i] - rm[i]) / (2.0 * JACOBIAN_STEP);
        }
    }
    jac
}

/// Gaussian elimination with partial pivoting; `None` for a singular matrix.
fn solve4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = rhs[row];
        for k in row + 1..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Damped Newton iteration on [`residual_direct`] from an ordered guess.
///
/// A step is halved until the times stay ordered and the residual norm
/// decreases. Fails with [`Error::OrderViolated`] when no halving keeps the
/// ordering and with [`Error::NoConvergence`] on stagnation, a singular
/// Jacobian or after 100 iterations.
pub fn solve_crossing_system(p: &Params, guess: &CrossingSequence) -> Result<CrossingSolution> {
    p.validate()?;
    if !guess.is_ordered() {
        return Err(Error::OrderViolated);
    }
    let mut cs = guess.normalized();
    let mut r = residual_direct(p, &cs);
    let mut norm = inf_norm(&r);
    for iter in 0..=MAX_ITERATIONS {
        if norm < RESIDUAL_TARGET {
            return Ok(CrossingSolution {
                sequence: cs,
                iterations: iter,
                residual: norm,
            });
        }
        if iter == MAX_ITERATIONS {
            break;
        }
        let stalled = || Error::NoConvergence {
            iterations: iter,
            residual: norm,
        };
        let step = solve4(jacobian(p, &cs), r.map(|v| -v)).ok_or_else(stalled)?;
        let t = cs.times();
        let mut alpha = 1.0;
        let mut saw_ordered = false;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = cs.with_times([0, 1, 2, 3].map(|k| t[k] + alpha * step[k]));
            if trial.is_ordered() {
                saw_ordered = true;
                let rt = residual_direct(p, &trial);
                let nt = inf_norm(&rt);
                if nt < norm {
                    accepted = Some((trial.normalized(), rt, nt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((c, rt, nt)) => {
                cs = c;
                r = rt;
                norm = nt;
            }
            None if !saw_ordered => return Err(Error::OrderViolated),
            None => return Err(stalled()),
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: norm,
    })
}

const LAMBDA_DOUBLINGS: usize = 60;

/// The bias `lambda` for which the solution through `x` at `t = 0` is
/// `2 pi`-periodic, by bisection on `lambda -> d(x; lambda)`, which is
/// strictly increasing. Any `lambda` already set in `p` is ignored.
pub fn lambda_of_x(p: &Params, x: f64) -> Result<f64> {
    p.validate()?;
    crate::error::ensure_finite("x", x)?;
    let d = |l: f64| displacement_d(&p.with_lambda(l), x);
    let mut bound = 10.0 * (1.0 + p.a.abs() + p.b.abs() + p.mu.abs());
    let mut doublings = 0;
    let (mut lo, mut hi);
    loop {
        lo = -bound;
        hi = bound;
        if d(lo)? < 0.0 && d(hi)? > 0.0 {
            break;
        }
        doublings += 1;
        if doublings > LAMBDA_DOUBLINGS {
            return Err(Error::BracketFailed { what: "lambda(x)" });
        }
        bound *= 2.0;
    }
    let (mut d_lo, mut d_hi) = (d(lo)?, d(hi)?);
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let dm = d(mid)?;
        if dm == 0.0 {
            return Ok(mid);
        }
        if dm < 0.0 {
            lo = mid;
            d_lo = dm;
        } else {
            hi = mid;
            d_hi = dm;
        }
    }
    Ok(if d_hi.abs() < d_lo.abs() { hi } else { lo })
}

/// A local extremum of `lambda(x)`: the equation with bias `lambda` has a
/// nonhyperbolic cycle through `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fold {
    pub x: f64,
    pub lambda: f64,
    /// `P'(x)` at the fold, ideally 1.
    pub multiplier: f64,
}

/// Folds of `lambda(x)` on `[x_lo, x_hi]`.
///
/// `lambda(x)` is sampled on `n` points; each sign change of its finite
/// differences is refined by bisection on `P'(x; lambda(x)) - 1`, which
/// vanishes exactly where `lambda'(x) = 0`.
pub fn lambda_folds(p: &Params, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<Fold>> {
    if n < 3 || !(x_lo < x_hi) {
        return Err(Error::InvalidArgument(
            "lambda_folds needs x_lo < x_hi and at least 3 samples".into(),
        ));
    }
    let h = (x_hi - x_lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| x_lo + i as f64 * h).collect();
    let ls: Vec<f64> = xs.par_iter().map(|&x| lambda_of_x(p, x)).collect::<Result<_>>()?;

    let slope_minus_one = |x: f64| -> Result<(f64, f64)> {
        let l = lambda_of_x(p, x)?;
        Ok((dp(&p.with_lambda(l), x)? - 1.0, l))
    };

    let mut folds = Vec::new();
    for i in 1..n - 1 {
        let left = ls[i] - ls[i - 1];
        let right = ls[i + 1] - ls[i];
        if left == 0.0 || right == 0.0 || left.signum() == right.signum() {
            continue;
        }
        let (mut lo, mut hi) = (xs[i - 1], xs[i + 1]);
        let (g_lo, _) = slope_minus_one(lo)?;
        let (g_hi, _) = slope_minus_one(hi)?;
        let x = if g_lo.signum() != g_hi.signum() {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if slope_minus_one(mid)?.0.signum() == g_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        } else {
            xs[i]
        };
        let (g, l) = slope_minus_one(x)?;
        folds.push(Fold {
            x,
            lambda: l,
            multiplier: g + 1.0,
        });
    }
    Ok(folds)
}
