#![allow(dead_code)]

use std::f64::consts::TAU;

use satcycles::{f_eval, Params};

/// Composite Simpson quadrature of `t -> f(x - mu cos t)` over one period.
///
/// The kinks of the integrand are located by sign changes of
/// `|x - mu cos t| - 1` on a uniform grid of `nodes` points refined by
/// bisection, and each smooth piece gets its share of the nodes. Plain
/// trapezoid sums only converge like `h^2` across the kinks.
pub fn melnikov_quadrature(x: f64, mu: f64, p: &Params, nodes: usize) -> f64 {
    let g = |t: f64| f_eval(p, x - mu * t.cos());
    let h = |t: f64, level: f64| x - mu * t.cos() - level;
    let mut cuts = vec![0.0, TAU];
    for level in [1.0, -1.0] {
        for i in 0..nodes {
            let (mut lo, mut hi) = (TAU * i as f64 / nodes as f64, TAU * (i + 1) as f64 / nodes as f64);
            let (hl, hh) = (h(lo, level), h(hi, level));
            if hl == 0.0 {
                cuts.push(lo);
                continue;
            }
            if hl.signum() == hh.signum() {
                continue;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if h(mid, level).signum() == hl.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1]);
        if e <= s {
            continue;
        }
        let share = (((e - s) / TAU * nodes as f64).ceil() as usize).max(2);
        let n = share + share % 2;
        let step = (e - s) / n as f64;
        let mut acc = g(s) + g(e);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(s + k as f64 * step);
        }
        total += acc * step / 3.0;
    }
    total
}

/// Plain trapezoid rule with `nodes` equal panels.
pub fn trapezoid(x: f64, mu: f64, p: &Params, nodes: usize) -> f64 {
    let step = TAU / nodes as f64;
    (0..nodes)
        .map(|k| f_eval(p, x - mu * (k as f64 * step).cos()))
        .sum::<f64>()
        * step
}
