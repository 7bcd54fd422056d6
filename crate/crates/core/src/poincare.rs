//! Poincaré map, half-map and displacement function, their exact
//! derivatives, the regime classification for `a b >= 0`, closed-form
//! one-zone cycles and the global limit-cycle finder.
//!
//! With `u(t, 0, x)` the solution through `x` at `t = 0`:
//!
//! * `P(x) = u(2 pi, 0, x)`, `d(x) = P(x) - x`;
//! * `Q(x) = -u(pi, 0, x)`, and `Q(Q(x)) = P(x)` whenever `lambda = 0`;
//! * `P'(x) = exp(2 pi a + (b - a) m)` where `m` is the time spent in `|u| <= 1`
//!   (slopes scaled by `eps`).
//!
//! Fixed points of `Q` are the symmetric periodic solutions; `Q` is strictly
//! decreasing so there is exactly one.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactflow::{advance, Trajectory};
use crate::model::{Params, SymmetryTransform, Zone};

/// Multipliers within this distance of 1 are reported as nonhyperbolic.
pub const NONHYPERBOLIC_BAND: f64 = 1e-7;

pub fn poincare_p(p: &Params, x: f64) -> Result<f64> {
    Ok(advance(p, 0.0, x, TAU)?.final_state)
}

pub fn half_q(p: &Params, x: f64) -> Result<f64> {
    Ok(-advance(p, 0.0, x, PI)?.final_state)
}

pub fn displacement_d(p: &Params, x: f64) -> Result<f64> {
    Ok(poincare_p(p, x)? - x)
}

fn multiplier_from(p: &Params, span: f64, inner_time: f64) -> f64 {
    let a = p.a_eff();
    let b = p.b_eff();
    (span * a + (b - a) * inner_time).exp()
}

/// `P'(x)` from the time the orbit spends in the inner zone.
pub fn dp(p: &Params, x: f64) -> Result<f64> {
    let tr = advance(p, 0.0, x, TAU)?;
    Ok(multiplier_from(p, TAU, tr.a_in_measure))
}

/// `Q'(x)`, always negative.
pub fn dq(p: &Params, x: f64) -> Result<f64> {
    let tr = advance(p, 0.0, x, PI)?;
    Ok(-multiplier_from(p, PI, tr.a_in_half_measure))
}

/// `(P(x), P'(x))` from a single integration.
fn map_and_slope(p: &Params, x: f64) -> Result<(f64, f64)> {
    let tr = advance(p, 0.0, x, TAU)?;
    Ok((tr.final_state, multiplier_from(p, TAU, tr.a_in_measure)))
}

/// Maps the initial condition of a cycle of `symmetry_reduce`'s output back
/// to the equivalent cycle of the original parameters.
///
/// `reduced` is the transformed parameter set and `x0` the cycle's value at
/// `t = 0`. Undoing the phase shift evaluates the reduced cycle at `t = pi`;
/// time reversal keeps the initial value.
pub fn pull_back_initial(transform: &SymmetryTransform, reduced: &Params, x0: f64) -> Result<f64> {
    if transform.phase_shifted {
        Ok(advance(reduced, 0.0, x0, PI)?.final_state)
    } else {
        Ok(x0)
    }
}

/// Coarse dynamical regime for `a b >= 0` (and the mixed-sign case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeTag {
    GlobalCenter,
    CenterNoCycles,
    UniqueCycle,
    MixedSign,
}

impl RegimeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeTag::GlobalCenter => "global_center",
            RegimeTag::CenterNoCycles => "center_no_cycles",
            RegimeTag::UniqueCycle => "unique_cycle",
            RegimeTag::MixedSign => "mixed_sign",
        }
    }

    pub fn is_center(self) -> bool {
        matches!(self, RegimeTag::GlobalCenter | RegimeTag::CenterNoCycles)
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    pub detail: String,
}

/// Classifies the dynamics from the effective slopes `eps a`, `eps b`.
/// `eps = 0` reduces to the global center `x' = mu sin t`.
pub fn classify_regime(p: &Params) -> Regime {
    let a = p.a_eff();
    let b = p.b_eff();
    let (tag, detail) = if a == 0.0 && b == 0.0 {
        (
            RegimeTag::GlobalCenter,
            "a = b = 0: every solution is periodic".to_string(),
        )
    } else if b == 0.0 && p.mu.abs() < 1.0 {
        (
            RegimeTag::CenterNoCycles,
            "b = 0, |mu| < 1: a band of periodic solutions inside |x| <= 1, no limit cycles"
                .to_string(),
        )
    } else if a * b < 0.0 {
        (
            RegimeTag::MixedSign,
            "a b < 0: one, three or more limit cycles depending on mu".to_string(),
        )
    } else {
        let kind = if b < 0.0 {
            "globally asymptotically stable"
        } else {
            "unstable"
        };
        (
            RegimeTag::UniqueCycle,
            format!("a b >= 0: exactly one limit cycle, the symmetric one, hyperbolic and {kind}"),
        )
    };
    Regime { tag, detail }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZonalType {
    OneLower,
    OneInner,
    OneUpper,
    TwoZonal,
    ThreeZonal,
}

impl ZonalType {
    pub fn as_str(self) -> &'static str {
        match self {
            ZonalType::OneLower => "one_lower",
            ZonalType::OneInner => "one_inner",
            ZonalType::OneUpper => "one_upper",
            ZonalType::TwoZonal => "two_zonal",
            ZonalType::ThreeZonal => "three_zonal",
        }
    }

    fn from_zones(zones: &[Zone]) -> Self {
        match zones {
            [Zone::Lower] => ZonalType::OneLower,
            [Zone::Inner] => ZonalType::OneInner,
            [Zone::Upper] => ZonalType::OneUpper,
            [_, _] => ZonalType::TwoZonal,
            _ => ZonalType::ThreeZonal,
        }
    }
}

impl fmt::Display for ZonalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Attracting,
    Repelling,
    Nonhyperbolic,
}

impl Stability {
    pub fn from_multiplier(m: f64) -> Self {
        if m < 1.0 - NONHYPERBOLIC_BAND {
            Stability::Attracting
        } else if m > 1.0 + NONHYPERBOLIC_BAND {
            Stability::Repelling
        } else {
            Stability::Nonhyperbolic
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Nonhyperbolic => "nonhyperbolic",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One periodic solution, identified by its value at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub x0: f64,
    pub zonal_type: ZonalType,
    /// Floquet multiplier `P'(x0)`.
    pub multiplier: f64,
    pub stability: Stability,
    /// Whether `u(t + pi) = -u(t)`, i.e. `x0` is a fixed point of `Q`.
    pub symmetric: bool,
}

const ANALYTIC_SLACK: f64 = 1e-12;

/// Periodic solutions lying entirely in one zone, from the closed-form
/// periodic solution `-q/p - mu (cos t + p sin t)/(p^2 + 1)` of each zone's
/// linear equation. A record is returned when that solution stays in its
/// zone (boundary contact allowed), in the order upper, lower, inner.
pub fn analytic_one_zone_cycles(p: &Params) -> Vec<CycleRecord> {
    use crate::exactflow::ZoneCoeffs;

    let mut out = Vec::new();
    let mu = p.mu;
    for zone in [Zone::Upper, Zone::Lower, Zone::Inner] {
        let z = ZoneCoeffs::for_zone(p, zone);
        if z.p == 0.0 {
            continue;
        }
        let center = -z.q / z.p;
        let amplitude = mu.abs() / (z.p * z.p + 1.0).sqrt();
        let fits = match zone {
            Zone::Upper => center - amplitude >= 1.0 - ANALYTIC_SLACK,
            Zone::Lower => center + amplitude <= -1.0 + ANALYTIC_SLACK,
            Zone::Inner => center.abs() + amplitude <= 1.0 + ANALYTIC_SLACK,
        };
        if !fits {
            continue;
        }
        let multiplier = (TAU * z.p).exp();
        out.push(CycleRecord {
            x0: center - mu / (z.p * z.p + 1.0),
            zonal_type: ZonalType::from_zones(&[zone]),
            multiplier,
            stability: Stability::from_multiplier(multiplier),
            symmetric: zone == Zone::Inner && p.lambda == 0.0,
        });
    }
    out
}

/// Tuning knobs of [`find_all_cycles`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinderOptions {
    /// Points of the coarse scan of `d`.
    pub grid: usize,
    /// Bracket width at which bisection stops.
    pub tol_root: f64,
    /// Roots closer than this are merged.
    pub dedup: f64,
    /// Sub-points used to refine a scan cell around a small local minimum of `|d|`.
    pub refine: usize,
    /// Re-scan on a grid of `2 grid - 1` points and fail on a count mismatch.
    pub check_refinement: bool,
}

impl Default for FinderOptions {
    fn default() -> Self {
        FinderOptions {
            grid: 4096,
            tol_root: 1e-11,
            dedup: 1e-7,
            refine: 64,
            check_refinement: true,
        }
    }
}

/// Half-width of the interval of initial conditions scanned for cycles.
pub fn search_bound(p: &Params) -> f64 {
    let a = p.a_eff();
    let b = p.b_eff();
    let forcing = p.mu.abs() + p.lambda.abs();
    if a.abs() < 1e-6 {
        // outer zones drift; cycles must visit the inner zone every period
        3.0 + 2.0 * forcing + TAU * p.lambda.abs()
    } else {
        (1.0 - b / a).abs() + forcing * (1.0 + 1.0 / a.abs().max(1e-6)) + 1.0
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * h })
        .collect()
}

fn eval_d(p: &Params, xs: &[f64]) -> Result<Vec<f64>> {
    xs.par_iter().map(|&x| displacement_d(p, x)).collect()
}

/// Sign-change brackets of `d` on a uniform grid, with local refinement of
/// cells around local minima of `|d|` that show no sign change.
fn scan_brackets(p: &Params, bound: f64, n: usize, refine: usize) -> Result<Vec<(f64, f64)>> {
    let xs = linspace(-bound, bound, n);
    let ds = eval_d(p, &xs)?;
    let mut brackets = sign_brackets(&xs, &ds);

    let suspicious: Vec<(f64, f64)> = (1..n - 1)
        .filter(|&i| {
            let (l, m, r) = (ds[i - 1], ds[i], ds[i + 1]);
            m != 0.0
                && l.signum() == m.signum()
                && r.signum() == m.signum()
                && m.abs() <= l.abs()
                && m.abs() <= r.abs()
        })
        .map(|i| (xs[i - 1], xs[i + 1]))
        .collect();
    for (lo, hi) in suspicious {
        let sub = linspace(lo, hi, refine.max(3));
        let sd = eval_d(p, &sub)?;
        brackets.extend(sign_brackets(&sub, &sd));
    }
    brackets.sort_by(|u, v| u.0.total_cmp(&v.0));
    brackets.dedup_by(|u, v| u.0 == v.0 && u.1 == v.1);
    Ok(brackets)
}

fn sign_brackets(xs: &[f64], ds: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if ds[i] == 0.0 {
            out.push((xs[i], xs[i]));
        } else if i + 1 < xs.len() && ds[i + 1] != 0.0 && ds[i].signum() != ds[i + 1].signum() {
            out.push((xs[i], xs[i + 1]));
        }
    }
    out
}

/// Bisection to `tol` followed by a few safeguarded Newton steps using the
/// exact derivative of the map.
fn refine_root<F>(g: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    if lo == hi {
        return Ok(lo);
    }
    let (g_lo, _) = g(lo)?;
    let s_lo = g_lo.signum();
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let (gm, _) = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = lo + 0.5 * (hi - lo);
    let (mut gx, mut slope) = g(x)?;
    for _ in 0..4 {
        if gx == 0.0 || slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - gx / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        let (gn, sn) = g(next)?;
        if gn.abs() >= gx.abs() {
            break;
        }
        x = next;
        gx = gn;
        slope = sn;
    }
    Ok(x)
}

/// Unique fixed point of the half-map; requires `lambda = 0`.
fn symmetric_cycle(p: &Params, bound: f64, tol: f64) -> Result<f64> {
    let h = |x: f64| -> Result<(f64, f64)> {
        let tr = advance(p, 0.0, x, PI)?;
        Ok((-tr.final_state - x, -multiplier_from(p, PI, tr.a_in_half_measure) - 1.0))
    };
    let mut lo = -bound.max(1.0);
    let mut hi = bound.max(1.0);
    let mut tries = 0;
    // Q(x) - x is strictly decreasing
    while h(lo)?.0 <= 0.0 || h(hi)?.0 >= 0.0 {
        lo *= 2.0;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::BracketFailed {
                what: "symmetric fixed point of Q",
            });
        }
    }
    refine_root(h, lo, hi, tol)
}

fn classify(p: &Params, x0: f64) -> Result<CycleRecord> {
    let tr: Trajectory = advance(p, 0.0, x0, TAU)?;
    let multiplier = multiplier_from(p, TAU, tr.a_in_measure);
    let symmetric = p.lambda == 0.0 && (half_q(p, x0)? - x0).abs() < 1e-9;
    Ok(CycleRecord {
        x0,
        zonal_type: ZonalType::from_zones(&tr.zones_visited()),
        multiplier,
        stability: Stability::from_multiplier(multiplier),
        symmetric,
    })
}

/// All limit cycles found by scanning the displacement function.
///
/// The symmetric cycle is located first from the half-map. The remaining
/// ones come from sign changes of `d` on a grid over `[-X, X]` (see
/// [`search_bound`]), refined near small local minima of `|d|`, bisected and
/// polished with Newton steps. Results are sorted by `x0`.
pub fn find_all_cycles(p: &Params, opts: &FinderOptions) -> Result<Vec<CycleRecord>> {
    p.validate()?;
    if opts.grid < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 points".into()));
    }
    if p.lambda == 0.0 {
        let regime = classify_regime(p);
        if regime.tag.is_center() {
            return Err(Error::CenterRegime(regime.tag));
        }
    }
    let bound = search_bound(p);

    let brackets = scan_brackets(p, bound, opts.grid, opts.refine)?;
    if opts.check_refinement {
        let finer = scan_brackets(p, bound, 2 * opts.grid - 1, opts.refine)?;
        if finer.len() != brackets.len() {
            return Err(Error::CountUnstable {
                coarse: brackets.len(),
                fine: finer.len(),
            });
        }
    }

    let mut roots: Vec<(f64, bool)> = Vec::new();
    if p.lambda == 0.0 {
        roots.push((symmetric_cycle(p, bound, opts.tol_root)?, true));
    }
    let d_and_slope = |x: f64| -> Result<(f64, f64)> {
        let (px, slope) = map_and_slope(p, x)?;
        Ok((px - x, slope - 1.0))
    };
    let refined: Result<Vec<f64>> = brackets
        .par_iter()
        .map(|&(lo, hi)| refine_root(d_and_slope, lo, hi, opts.tol_root))
        .collect();
    roots.extend(refined?.into_iter().map(|x| (x, false)));

    // symmetric root first within each cluster so its value is kept
    roots.sort_by(|u, v| u.0.total_cmp(&v.0).then(v.1.cmp(&u.1)));
    let mut merged: Vec<(f64, bool)> = Vec::new();
    for r in roots {
        match merged.last_mut() {
            Some(last) if (r.0 - last.0).abs() < opts.dedup => {
                if r.1 && !last.1 {
                    *last = r;
                }
            }
            _ => merged.push(r),
        }
    }

    merged.iter().map(|&(x, _)| classify(p, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_center_map_is_identity() {
        let p = Params::new(0.0, 0.0, 1.0);
        for i in -10..=10 {
            let x = i as f64 * 0.7;
            assert!((poincare_p(&p, x).unwrap() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn half_map_of_pure_forcing() {
        let p = Params::new(0.0, 0.0, 1.0);
        assert!((half_q(&p, 0.0).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn linear_case_matches_closed_form_map() {
        // a = b = -1: P(x) = v(2 pi, 0, x) of x' = -x + sin t
        let p = Params::new(-1.0, -1.0, 1.0);
        let e = (-TAU).exp();
        // closed form of the linear Poincare map with p = -1, q = 0, mu = 1
        let pp = -1.0f64;
        let closed = |x: f64| {
            ((TAU * pp).exp() * pp * (1.0 + pp * pp * x + x) - pp) / (pp * pp * pp + pp)
        };
        assert!((poincare_p(&p, 0.0).unwrap() - closed(0.0)).abs() < 1e-12);
        assert!((closed(0.0) - (-0.5 * (1.0 - e))).abs() < 1e-12);
        assert!((poincare_p(&p, -0.5).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn far_field_displacement_when_a_vanishes() {
        // a = 0, b = -1: the outer zones are pure drift x' = -/+ b + mu sin t
        let p = Params::new(0.0, -1.0, 0.5);
        let d_low = displacement_d(&p, -10.0).unwrap();
        let d_high = displacement_d(&p, 10.0).unwrap();
        assert!((d_low - TAU).abs() < 1e-12, "{d_low}");
        assert!((d_high + TAU).abs() < 1e-12, "{d_high}");
        // d = 2 pi b sign(x) in the far zones
        assert!((d_low - TAU * p.b * (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn derivative_extremes() {
        // fully outside: m = 0
        let p = Params::new(-1.0, 1.0, 1.2);
        assert!((dp(&p, 1.4).unwrap() - (TAU * -1.0).exp()).abs() < 1e-15);
        // fully inside: m = 2 pi
        let inner = dp(&p, -0.6).unwrap();
        assert!((inner / TAU.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_tags() {
        assert_eq!(classify_regime(&Params::new(0.0, 0.0, 3.0)).tag, RegimeTag::GlobalCenter);
        assert_eq!(classify_regime(&Params::new(2.0, 0.0, 0.5)).tag, RegimeTag::CenterNoCycles);
        assert_eq!(classify_regime(&Params::new(2.0, 0.0, 1.5)).tag, RegimeTag::UniqueCycle);
        let r = classify_regime(&Params::new(-1.0, -2.0, 3.0));
        assert_eq!(r.tag, RegimeTag::UniqueCycle);
        assert!(r.detail.contains("stable"));
        assert_eq!(classify_regime(&Params::new(-1.0, 1.0, 3.0)).tag, RegimeTag::MixedSign);
        // eps = 0 collapses to the global center
        assert_eq!(
            classify_regime(&Params::new(-1.0, 1.0, 3.0).with_eps(0.0)).tag,
            RegimeTag::GlobalCenter
        );
    }

    #[test]
    fn analytic_three_cycles() {
        let cycles = analytic_one_zone_cycles(&Params::new(-1.0, 1.0, 1.2));
        assert_eq!(cycles.len(), 3);
        let x0: Vec<f64> = cycles.iter().map(|c| c.x0).collect();
        assert!((x0[0] - 1.4).abs() < 1e-15);
        assert!((x0[1] + 2.6).abs() < 1e-15);
        assert!((x0[2] + 0.6).abs() < 1e-15);
        assert_eq!(cycles[0].stability, Stability::Attracting);
        assert_eq!(cycles[1].stability, Stability::Attracting);
        assert_eq!(cycles[2].stability, Stability::Repelling);
        assert!(cycles[2].symmetric && !cycles[0].symmetric);
    }

    #[test]
    fn analytic_bounds() {
        assert!(analytic_one_zone_cycles(&Params::new(-1.0, 1.0, 1.5)).is_empty());
        assert_eq!(
            analytic_one_zone_cycles(&Params::new(-1.0, 1.0, 2f64.sqrt())).len(),
            3
        );
        // ab > 0: no outer cycles, inner one survives for |mu| <= sqrt(b^2 + 1)
        let same = analytic_one_zone_cycles(&Params::new(-1.0, -2.0, 1.0));
        assert_eq!(same.len(), 1);
        assert_eq!(same[0].zonal_type, ZonalType::OneInner);
        assert_eq!(same[0].stability, Stability::Attracting);
    }

    #[test]
    fn center_regime_is_refused() {
        let err = find_all_cycles(&Params::new(0.0, 0.0, 1.0), &FinderOptions::default());
        assert_eq!(err, Err(Error::CenterRegime(RegimeTag::GlobalCenter)));
        let err = find_all_cycles(&Params::new(2.0, 0.0, 0.5), &FinderOptions::default());
        assert_eq!(err, Err(Error::CenterRegime(RegimeTag::CenterNoCycles)));
    }

    #[test]
    fn stability_band() {
        assert_eq!(Stability::from_multiplier(0.5), Stability::Attracting);
        assert_eq!(Stability::from_multiplier(1.0 + 5e-8), Stability::Nonhyperbolic);
        assert_eq!(Stability::from_multiplier(1.0 + 2e-7), Stability::Repelling);
    }

    #[test]
    fn search_bound_is_positive() {
        assert!(search_bound(&Params::new(1.0, 5.0, 0.5)) > 1.0);
        assert!(search_bound(&Params::new(0.0, -1.0, 0.5)).is_finite());
    }
}
