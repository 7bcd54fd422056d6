//! Exact solution of the piecewise-linear equation by chaining closed-form
//! linear flows across the switching lines `x = -1` and `x = 1`.
//!
//! Inside a zone the equation is `x' = p x + q + mu sin t` and is solved in
//! closed form by [`linear_zone_flow`]. [`advance`] locates each zone switch
//! with [`first_crossing`]-style event detection (uniform scan plus
//! bisection) and restarts the closed form from the switching line.
//!
//! [`rk4_oracle`] is a plain fixed-step integrator of the same right-hand
//! side and exists only to cross-check the exact flow.

use std::f64::consts::{PI, TAU};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{Params, Zone};

/// Below this `|p|` the closed form switches to the exact `p = 0` expression.
pub const DEGENERATE_SLOPE: f64 = 1e-10;
/// Scan samples per `2 pi` of searched time before bisection.
pub const SCAN_PER_PERIOD: usize = 256;
/// Time derivative below which a located crossing is treated as grazing.
pub const TANGENCY_SPEED: f64 = 1e-9;
/// Probe offset used to decide whether a grazing contact actually switches zone.
pub const TANGENCY_PROBE: f64 = 1e-9;
/// Default cap on zone switches per call to [`advance`].
pub const DEFAULT_SWITCH_CAP: usize = 10_000;

/// Coefficients of the per-zone linear equation `x' = p x + q + mu sin t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneCoeffs {
    pub p: f64,
    pub q: f64,
}

impl ZoneCoeffs {
    pub fn new(p: f64, q: f64) -> Self {
        ZoneCoeffs { p, q }
    }

    /// Coefficients of `zone` for `x' = eps f(x) + mu sin t + lambda`.
    pub fn for_zone(params: &Params, zone: Zone) -> Self {
        let (p, q) = match zone {
            Zone::Inner => (params.b_eff(), 0.0),
            Zone::Upper => (params.a_eff(), params.eps * (params.b - params.a)),
            Zone::Lower => (params.a_eff(), params.eps * (params.a - params.b)),
        };
        ZoneCoeffs {
            p,
            q: q + params.lambda,
        }
    }

    /// Right-hand side `p x + q + mu sin t`.
    pub fn velocity(&self, mu: f64, t: f64, x: f64) -> f64 {
        self.p * x + self.q + mu * t.sin()
    }
}

/// Closed-form solution `v(t, tau, x)` of `x' = p x + q + mu sin t` with
/// `v(tau) = x`.
pub fn linear_zone_flow(z: ZoneCoeffs, mu: f64, tau: f64, x: f64, t: f64) -> f64 {
    let dt = t - tau;
    if z.p.abs() < DEGENERATE_SLOPE {
        return x + z.q * dt + mu * (tau.cos() - t.cos());
    }
    let p = z.p;
    let growth = (p * dt).exp();
    // (e^{p dt} - 1) / p without cancellation for small p dt
    let ramp = (p * dt).exp_m1() / p;
    growth * x
        + z.q * ramp
        + mu * (growth * (p * tau.sin() + tau.cos()) - (p * t.sin() + t.cos())) / (p * p + 1.0)
}

/// Side of a switching line a trajectory is expected to stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Below,
    Above,
}

/// What counts as an event for the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    /// The value reaches the level, tangential touches included (to within
    /// the given tolerance on the signed distance).
    Reach(f64),
    /// The value passes to the other side; grazing contacts are probed.
    Pass,
}

/// Bisection on a sign change: requires `g(lo) <= 0 < g(hi)` and returns the
/// upper end of the final (representably smallest) bracket.
fn bisect_up<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Location of a sign change of `g` from positive to non-positive.
fn bisect_down<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + 0.5 * (hi - lo)
}

/// Searches one scan cell `[t0, t1]` for the first event. `s <= 0` on the
/// expected side, `ds` is its time derivative.
fn search_cell<S, D>(s: &S, ds: &D, t0: f64, t1: f64, event: Event) -> Option<f64>
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = t0;
    // each grazing contact skipped moves `lo` forward by the probe offset
    for _ in 0..64 {
        if lo >= t1 {
            return None;
        }
        let s_lo = s(lo);
        let hi = if s_lo > 0.0 {
            lo
        } else if s(t1) > 0.0 {
            t1
        } else if ds(lo) > 0.0 && ds(t1) < 0.0 {
            // interior maximum; it may touch or poke across the level
            let tm = bisect_down(ds, lo, t1);
            let peak = s(tm);
            match event {
                Event::Reach(tol) if peak > -tol && peak <= 0.0 => return Some(tm),
                _ if peak > 0.0 => tm,
                _ => return None,
            }
        } else {
            return None;
        };
        let root = if hi == lo { lo } else { bisect_up(s, lo, hi) };
        match event {
            Event::Reach(_) => return Some(root),
            Event::Pass => {
                if ds(root).abs() >= TANGENCY_SPEED || s(root + TANGENCY_PROBE) > 0.0 {
                    return Some(root);
                }
                lo = root + TANGENCY_PROBE;
            }
        }
    }
    None
}

fn scan_for_event(
    z: ZoneCoeffs,
    mu: f64,
    tau: f64,
    x: f64,
    level: f64,
    side: Side,
    t_max: f64,
    event: Event,
) -> Option<f64> {
    if !(t_max > tau) {
        return None;
    }
    let sigma = match side {
        Side::Below => 1.0,
        Side::Above => -1.0,
    };
    let s = |t: f64| sigma * (linear_zone_flow(z, mu, tau, x, t) - level);
    let ds = |t: f64| sigma * z.velocity(mu, t, linear_zone_flow(z, mu, tau, x, t));

    let span = t_max - tau;
    let cells = ((SCAN_PER_PERIOD as f64 * span / TAU).ceil() as usize).max(1);
    let h = span / cells as f64;
    let mut t0 = tau;
    for k in 1..=cells {
        let t1 = if k == cells { t_max } else { tau + k as f64 * h };
        if let Some(r) = search_cell(&s, &ds, t0, t1, event) {
            if r > tau {
                return Some(r);
            }
        }
        t0 = t1;
    }
    None
}

/// First time in `(tau, t_max]` at which the zone flow started from `x`
/// passes from `side` of `level` to the other side.
pub(crate) fn first_exit(
    z: ZoneCoeffs,
    mu: f64,
    tau: f64,
    x: f64,
    level: f64,
    side: Side,
    t_max: f64,
) -> Option<f64> {
    scan_for_event(z, mu, tau, x, level, side, t_max, Event::Pass)
}

/// Smallest `s` in `(tau, t_max]` where the zone flow started at `x` reaches
/// `level`, or `None`.
///
/// The side of `level` the trajectory starts on is taken from `x`; when `x`
/// sits exactly on `level` it is taken from the direction of motion.
/// Tangential touches count here. Zone switching inside [`advance`] is
/// stricter: a grazing contact only switches zone when the trajectory really
/// passes to the other side.
pub fn first_crossing(
    z: ZoneCoeffs,
    mu: f64,
    tau: f64,
    x: f64,
    level: f64,
    t_max: f64,
) -> Option<f64> {
    let side = if x < level {
        Side::Below
    } else if x > level {
        Side::Above
    } else {
        let probe = linear_zone_flow(z, mu, tau, x, tau + TANGENCY_PROBE);
        if probe > level {
            Side::Above
        } else {
            Side::Below
        }
    };
    let touch = 1e-12 * level.abs().max(1.0);
    scan_for_event(z, mu, tau, x, level, side, t_max, Event::Reach(touch))
}

/// One piece of a trajectory spent in a single zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub zone: Zone,
    pub entry_state: f64,
}

/// Piecewise record of one solution over `[tau, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
    /// Total time spent with `|u| <= 1`.
    pub a_in_measure: f64,
    /// Time with `|u| <= 1` restricted to `[0, pi]`.
    pub a_in_half_measure: f64,
    pub final_state: f64,
    params: Params,
}

impl Trajectory {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn t_start(&self) -> f64 {
        self.segments[0].t_start
    }

    pub fn t_end(&self) -> f64 {
        self.segments[self.segments.len() - 1].t_end
    }

    /// State at time `t` inside the covered interval.
    pub fn state_at(&self, t: f64) -> f64 {
        let seg = self
            .segments
            .iter()
            .find(|s| t <= s.t_end)
            .unwrap_or_else(|| &self.segments[self.segments.len() - 1]);
        let z = ZoneCoeffs::for_zone(&self.params, seg.zone);
        linear_zone_flow(z, self.params.mu, seg.t_start, seg.entry_state, t)
    }

    /// Times at which the solution switches zone, with the zone entered.
    pub fn switches(&self) -> impl Iterator<Item = (f64, Zone, Zone)> + '_ {
        self.segments
            .windows(2)
            .map(|w| (w[1].t_start, w[0].zone, w[1].zone))
    }

    /// Zones visited, in `Lower, Inner, Upper` order, ignoring zero-length segments
    /// unless the trajectory has no other.
    pub fn zones_visited(&self) -> Vec<Zone> {
        let mut zones: Vec<Zone> = self
            .segments
            .iter()
            .filter(|s| s.t_end > s.t_start)
            .map(|s| s.zone)
            .collect();
        if zones.is_empty() {
            zones.push(self.segments[0].zone);
        }
        zones.sort();
        zones.dedup();
        zones
    }
}

/// Zone a trajectory starting at `(tau, x)` evolves in. Exactly on a
/// switching line the direction of motion decides.
fn initial_zone(params: &Params, tau: f64, x: f64) -> Zone {
    let zone = Zone::of(x);
    if x.abs() != 1.0 {
        return zone;
    }
    let outer = if x > 0.0 { Zone::Upper } else { Zone::Lower };
    let z = ZoneCoeffs::for_zone(params, outer);
    let probe = linear_zone_flow(z, params.mu, tau, x, tau + TANGENCY_PROBE);
    if probe.abs() > 1.0 {
        outer
    } else {
        Zone::Inner
    }
}

/// Next exit from `zone` after `t` within `t_max`: the time and the zone entered.
fn next_switch(params: &Params, zone: Zone, t: f64, x: f64, t_max: f64) -> Option<(f64, Zone)> {
    let z = ZoneCoeffs::for_zone(params, zone);
    let mu = params.mu;
    match zone {
        Zone::Upper => first_exit(z, mu, t, x, 1.0, Side::Above, t_max).map(|s| (s, Zone::Inner)),
        Zone::Lower => first_exit(z, mu, t, x, -1.0, Side::Below, t_max).map(|s| (s, Zone::Inner)),
        Zone::Inner => {
            let up = first_exit(z, mu, t, x, 1.0, Side::Below, t_max);
            let limit = up.unwrap_or(t_max);
            let down = first_exit(z, mu, t, x, -1.0, Side::Above, limit);
            match (up, down) {
                (_, Some(d)) if up.map_or(true, |u| d < u) => Some((d, Zone::Lower)),
                (Some(u), _) => Some((u, Zone::Upper)),
                _ => None,
            }
        }
    }
}

/// Solution of the full piecewise equation from `x` at `tau` up to `t_end`.
pub fn advance(params: &Params, tau: f64, x: f64, t_end: f64) -> Result<Trajectory> {
    advance_with_cap(params, tau, x, t_end, DEFAULT_SWITCH_CAP)
}

/// [`advance`] with an explicit cap on the number of zone switches.
pub fn advance_with_cap(
    params: &Params,
    tau: f64,
    x: f64,
    t_end: f64,
    cap: usize,
) -> Result<Trajectory> {
    params.validate()?;
    ensure_finite("tau", tau)?;
    ensure_finite("x", x)?;
    ensure_finite("t_end", t_end)?;
    if t_end < tau {
        return Err(Error::InvalidInterval {
            start: tau,
            end: t_end,
        });
    }

    let mut segments = Vec::new();
    let mut zone = initial_zone(params, tau, x);
    let mut t = tau;
    let mut state = x;
    loop {
        match next_switch(params, zone, t, state, t_end) {
            Some((s, next)) if s < t_end => {
                segments.push(Segment {
                    t_start: t,
                    t_end: s,
                    zone,
                    entry_state: state,
                });
                if segments.len() > cap {
                    return Err(Error::SwitchCapExceeded { cap, t: s });
                }
                state = if next == Zone::Upper || zone == Zone::Upper {
                    1.0
                } else {
                    -1.0
                };
                zone = next;
                t = s;
            }
            _ => {
                segments.push(Segment {
                    t_start: t,
                    t_end,
                    zone,
                    entry_state: state,
                });
                break;
            }
        }
    }

    let last = segments[segments.len() - 1];
    let final_state = linear_zone_flow(
        ZoneCoeffs::for_zone(params, last.zone),
        params.mu,
        last.t_start,
        last.entry_state,
        t_end,
    );
    let mut a_in = 0.0;
    let mut a_in_half = 0.0;
    for s in segments.iter().filter(|s| s.zone == Zone::Inner) {
        a_in += s.t_end - s.t_start;
        let lo = s.t_start.max(0.0);
        let hi = s.t_end.min(PI);
        if hi > lo {
            a_in_half += hi - lo;
        }
    }
    Ok(Trajectory {
        segments,
        a_in_measure: a_in,
        a_in_half_measure: a_in_half,
        final_state,
        params: *params,
    })
}

/// Classical fixed-step fourth-order Runge-Kutta integration of
/// `x' = eps f(x) + mu sin t + lambda`. The step is shrunk so that an integer
/// number of steps covers `[tau, t_end]`.
pub fn rk4_oracle(params: &Params, tau: f64, x: f64, t_end: f64, step: f64) -> f64 {
    assert!(step > 0.0, "rk4 step must be positive");
    let span = t_end - tau;
    if span == 0.0 {
        return x;
    }
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut y = x;
    for i in 0..n {
        let t = tau + i as f64 * h;
        let k1 = params.rhs(t, y);
        let k2 = params.rhs(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = params.rhs(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = params.rhs(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}
