//! First-order averaging function of `x' = eps f(x) + mu sin t` and its
//! bifurcation diagram for `a b < 0`.
//!
//! For small `eps` the solution through `x` is close to `x + mu (1 - cos t)`,
//! and simple zeros of
//!
//! ```text
//! M(x, mu) = integral over [0, 2 pi] of f(x + mu (1 - cos t)) dt
//! ```
//!
//! continue to limit cycles. Most work is done on the shifted form
//! `M~(x, mu) = integral of f(x - mu cos t)`, which is odd in `x` and even in
//! `mu`; [`m_orig`] translates back. Everything here uses the raw slopes
//! `a`, `b` of the parameter set.
//!
//! All integrals are exact: the period is cut where `x - mu cos t = +-1`
//! and each piece integrates a linear function of `cos t` in closed form.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{f_eval, Params, Zone};

/// Arccos arguments within this distance of `+-1` are clipped.
pub const CLIP_GUARD: f64 = 1e-14;
/// Half-width of the excluded neighbourhood of each bifurcation value.
pub const BIFURCATION_GUARD: f64 = 1e-9;

/// Split of `[0, 2 pi]` according to the zone of `x - mu cos t`.
/// Intervals are closed, sorted and of positive length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZonePartition {
    pub inner_intervals: Vec<(f64, f64)>,
    pub upper_intervals: Vec<(f64, f64)>,
    pub lower_intervals: Vec<(f64, f64)>,
}

fn measure(intervals: &[(f64, f64)]) -> f64 {
    intervals.iter().map(|(s, e)| e - s).sum()
}

impl ZonePartition {
    pub fn inner_measure(&self) -> f64 {
        measure(&self.inner_intervals)
    }

    pub fn upper_measure(&self) -> f64 {
        measure(&self.upper_intervals)
    }

    pub fn lower_measure(&self) -> f64 {
        measure(&self.lower_intervals)
    }

    /// All pieces in time order with their zone.
    pub fn pieces(&self) -> Vec<(f64, f64, Zone)> {
        let mut all: Vec<(f64, f64, Zone)> = self
            .inner_intervals
            .iter()
            .map(|&(s, e)| (s, e, Zone::Inner))
            .chain(self.upper_intervals.iter().map(|&(s, e)| (s, e, Zone::Upper)))
            .chain(self.lower_intervals.iter().map(|&(s, e)| (s, e, Zone::Lower)))
            .collect();
        all.sort_by(|u, v| u.0.total_cmp(&v.0));
        all
    }

    fn push(&mut self, zone: Zone, s: f64, e: f64) {
        let list = match zone {
            Zone::Inner => &mut self.inner_intervals,
            Zone::Upper => &mut self.upper_intervals,
            Zone::Lower => &mut self.lower_intervals,
        };
        match list.last_mut() {
            Some(last) if last.1 == s => last.1 = e,
            _ => list.push((s, e)),
        }
    }
}

/// Times in `[0, 2 pi]` where `cos t = c`, if any.
fn cos_roots(c: f64) -> Option<(f64, f64)> {
    let c = if c.abs() > 1.0 && c.abs() <= 1.0 + CLIP_GUARD {
        c.signum()
    } else {
        c
    };
    if c.abs() > 1.0 {
        return None;
    }
    let s = c.acos();
    Some((s, TAU - s))
}

pub fn partition(x: f64, mu: f64) -> ZonePartition {
    let mut out = ZonePartition::default();
    if mu == 0.0 {
        out.push(Zone::of(x), 0.0, TAU);
        return out;
    }
    let mut cuts = vec![0.0, TAU];
    for level in [1.0, -1.0] {
        if let Some((s1, s2)) = cos_roots((x - level) / mu) {
            cuts.push(s1);
            cuts.push(s2);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1]);
        if e <= s {
            continue;
        }
        let mid = 0.5 * (s + e);
        out.push(Zone::of(x - mu * mid.cos()), s, e);
    }
    out
}

fn slope_offset(p: &Params, zone: Zone) -> (f64, f64) {
    match zone {
        Zone::Inner => (p.b, 0.0),
        Zone::Upper => (p.a, p.b - p.a),
        Zone::Lower => (p.a, p.a - p.b),
    }
}

/// `M~(x, mu)`, the integral of `f(x - mu cos t)` over one period.
pub fn m_shift(x: f64, mu: f64, p: &Params) -> f64 {
    if mu == 0.0 {
        return TAU * f_eval(p, x);
    }
    partition(x, mu)
        .pieces()
        .into_iter()
        .map(|(s, e, zone)| {
            let (slope, offset) = slope_offset(p, zone);
            let len = e - s;
            slope * (x * len - mu * (e.sin() - s.sin())) + offset * len
        })
        .sum()
}

/// `M(x, mu) = M~(x + mu, mu)`; its zeros approximate the initial values
/// of limit cycles for small `eps`.
pub fn m_orig(x: f64, mu: f64, p: &Params) -> f64 {
    m_shift(x + mu, mu, p)
}

/// `dM~/dx = 2 pi a - (a - b) m(A_in)`.
pub fn mx(x: f64, mu: f64, p: &Params) -> f64 {
    TAU * p.a - (p.a - p.b) * partition(x, mu).inner_measure()
}

/// `dM~/dmu = (a - b)` times the integral of `cos t` over the inner set.
pub fn mmu(x: f64, mu: f64, p: &Params) -> f64 {
    let part = partition(x, mu);
    let s: f64 = part
        .inner_intervals
        .iter()
        .map(|&(s, e)| e.sin() - s.sin())
        .sum();
    (p.a - p.b) * s
}

/// `M~ - [x Mx + mu Mmu - (a - b)(m(A+) - m(A-))]`, zero up to rounding.
pub fn consistency_identity(x: f64, mu: f64, p: &Params) -> f64 {
    let part = partition(x, mu);
    let rhs = x * mx(x, mu, p) + mu * mmu(x, mu, p)
        - (p.a - p.b) * (part.upper_measure() - part.lower_measure());
    m_shift(x, mu, p) - rhs
}

/// Bifurcation constants of the averaged diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifValues {
    /// `pi b / (b - a)`, in `(0, pi)`.
    pub c: f64,
    /// Fold value `c / sin c`.
    pub mu1: f64,
    /// Pitchfork value `1 / cos(c / 2)`.
    pub mu2: f64,
    /// Position of the fold, `1 - mu1 cos c`.
    pub x1: f64,
}

fn require_mixed_sign(p: &Params) -> Result<()> {
    p.validate()?;
    if p.a * p.b < 0.0 {
        Ok(())
    } else {
        Err(Error::BadRegime { a: p.a, b: p.b })
    }
}

pub fn bif_values(p: &Params) -> Result<BifValues> {
    require_mixed_sign(p)?;
    let c = PI * p.b / (p.b - p.a);
    let mu1 = c / c.sin();
    let mu2 = 1.0 / (0.5 * c).cos();
    let x1 = 1.0 - mu1 * c.cos();
    debug_assert!(c > 0.0 && c < PI);
    debug_assert!(mu2 < mu1);
    Ok(BifValues { c, mu1, mu2, x1 })
}

/// The positive `mu` with `M~(x, mu) = 0` for `x` in `[0, 1 - b/a]`.
///
/// Both endpoints are returned in closed form: `-b/a` at `1 - b/a` and
/// `mu2` at 0 (the branch meets the axis there as a limit).
pub fn phi(x: f64, p: &Params) -> Result<f64> {
    let bif = bif_values(p)?;
    let right = 1.0 - p.b / p.a;
    if !(0.0..=right).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "phi is defined on [0, {right}], got x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok(bif.mu2);
    }
    if x == right {
        return Ok(-p.b / p.a);
    }
    let g = |mu: f64| m_shift(x, mu, p);
    let s0 = g(0.0).signum();
    let (mut lo, mut hi) = (0.0, 2.0 * bif.mu1);
    if g(hi).signum() == s0 {
        return Err(Error::BracketFailed { what: "phi" });
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == s0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if g(hi).abs() < g(lo).abs() { hi } else { lo })
}

/// Samples of the `phi` branch on `n` equally spaced points of `[0, 1 - b/a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSetBranch {
    pub samples: Vec<(f64, f64)>,
    pub bif: BifValues,
}

pub fn phi_branch(p: &Params, n: usize) -> Result<ZeroSetBranch> {
    let bif = bif_values(p)?;
    if n < 2 {
        return Err(Error::InvalidArgument("phi_branch needs n >= 2".into()));
    }
    let right = 1.0 - p.b / p.a;
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = if i + 1 == n {
                right
            } else {
                right * i as f64 / (n - 1) as f64
            };
            phi(x, p).map(|m| (x, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroSetBranch { samples, bif })
}

/// Number of sign changes of `x -> M~(x, mu)` on `[-(1 - b/a) - 1, (1 - b/a) + 1]`.
///
/// The grid starts at 1001 points and is doubled until two consecutive
/// counts agree. `mu` within [`BIFURCATION_GUARD`] of `+-mu1` or `+-mu2` is
/// refused.
pub fn count_simple_zeros(mu: f64, p: &Params) -> Result<usize> {
    let bif = bif_values(p)?;
    crate::error::ensure_finite("mu", mu)?;
    for value in [bif.mu1, bif.mu2] {
        if (mu.abs() - value).abs() <= BIFURCATION_GUARD {
            return Err(Error::AtBifurcation { mu, value });
        }
    }
    let half = (1.0 - p.b / p.a).abs() + 1.0;
    let count = |n: usize| -> usize {
        let vals: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| m_shift(-half + 2.0 * half * i as f64 / (n - 1) as f64, mu, p))
            .collect();
        let signs: Vec<f64> = vals.iter().filter(|v| **v != 0.0).map(|v| v.signum()).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        // a zero at either end of the window is a zero too
        changes + usize::from(vals[0] == 0.0) + usize::from(vals[n - 1] == 0.0)
    };
    let mut n = 1001;
    let mut prev = count(n);
    for _ in 0..8 {
        n = 2 * n - 1;
        let next = count(n);
        if next == prev {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::CountUnstable {
        coarse: prev,
        fine: count(2 * n - 1),
    })
}

/// Which piece of the zero set a polyline belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchKind {
    /// The line `x = 0`.
    Axis,
    /// `x = 1 - b/a`, `0 <= mu <= -b/a`.
    Segment,
    /// The graph of `phi`.
    Phi,
}

/// Image under the symmetries `S1: x -> -x` and `S2: mu -> -mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryImage {
    Identity,
    S1,
    S2,
    S2S1,
}

impl SymmetryImage {
    fn apply(self, (x, mu): (f64, f64)) -> (f64, f64) {
        match self {
            SymmetryImage::Identity => (x, mu),
            SymmetryImage::S1 => (-x, mu),
            SymmetryImage::S2 => (x, -mu),
            SymmetryImage::S2S1 => (-x, -mu),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub kind: BranchKind,
    pub image: SymmetryImage,
    /// `(x, mu)` points in the shifted coordinates of [`m_shift`].
    pub points: Vec<(f64, f64)>,
}

impl Polyline {
    /// Stable identifier such as `phi_s2s1`.
    pub fn id(&self) -> String {
        let kind = match self.kind {
            BranchKind::Axis => "axis",
            BranchKind::Segment => "segment",
            BranchKind::Phi => "phi",
        };
        match self.image {
            SymmetryImage::Identity => kind.to_string(),
            SymmetryImage::S1 => format!("{kind}_s1"),
            SymmetryImage::S2 => format!("{kind}_s2"),
            SymmetryImage::S2S1 => format!("{kind}_s2s1"),
        }
    }
}

/// Zero set of `M~` for `a b < 0` as polylines with `n_samples` points each:
/// the axis `x = 0` over `|mu| <= 2 mu1`, the segment, the `phi` branch and
/// the images of the last two under `S1`, `S2` and `S2 S1`.
pub fn zero_set(p: &Params, n_samples: usize) -> Result<Vec<Polyline>> {
    let branch = phi_branch(p, n_samples)?;
    let n = n_samples;
    let mu_max = 2.0 * branch.bif.mu1;
    let axis = (0..n)
        .map(|i| (0.0, -mu_max + 2.0 * mu_max * i as f64 / (n - 1) as f64))
        .collect();
    let right = 1.0 - p.b / p.a;
    let top = -p.b / p.a;
    let segment: Vec<(f64, f64)> = (0..n)
        .map(|i| (right, top * i as f64 / (n - 1) as f64))
        .collect();

    let mut out = vec![Polyline {
        kind: BranchKind::Axis,
        image: SymmetryImage::Identity,
        points: axis,
    }];
    for (kind, pts) in [(BranchKind::Segment, &segment), (BranchKind::Phi, &branch.samples)] {
        for image in [
            SymmetryImage::Identity,
            SymmetryImage::S1,
            SymmetryImage::S2,
            SymmetryImage::S2S1,
        ] {
            out.push(Polyline {
                kind,
                image,
                points: pts.iter().map(|&q| image.apply(q)).collect(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm() -> Params {
        Params::new(-1.0, 1.0, 0.0)
    }

    #[test]
    fn partition_examples() {
        let part = partition(0.0, 2.0);
        assert!((part.inner_measure() - TAU / 3.0).abs() < 1e-14);
        assert_eq!(part.inner_intervals.len(), 2);
        assert!((part.inner_intervals[0].0 - PI / 3.0).abs() < 1e-14);
        assert!((part.inner_intervals[1].1 - 5.0 * PI / 3.0).abs() < 1e-14);

        let part = partition(3.0, 1.0);
        assert_eq!(part.upper_intervals, vec![(0.0, TAU)]);
        assert!(part.inner_intervals.is_empty() && part.lower_intervals.is_empty());

        let part = partition(1.0, 2.0);
        assert!((part.inner_measure() - PI).abs() < 1e-14);
        assert!(part.lower_intervals.is_empty());
        assert_eq!(part.upper_intervals.len(), 1);
        assert!((part.upper_intervals[0].0 - PI / 2.0).abs() < 1e-14);
        assert!((part.upper_intervals[0].1 - 1.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn partition_tiles_period() {
        for &(x, mu) in &[(0.3, 2.5), (-1.7, 0.4), (2.0, 1.0), (0.0, 1.0), (5.0, -3.0)] {
            let part = partition(x, mu);
            let total = part.inner_measure() + part.upper_measure() + part.lower_measure();
            assert!((total - TAU).abs() < 1e-13);
            let pieces = part.pieces();
            assert_eq!(pieces[0].0, 0.0);
            assert_eq!(pieces.last().unwrap().1, TAU);
            for w in pieces.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
        }
    }

    #[test]
    fn m_shift_examples() {
        let p = pm();
        for mu in [0.5, 1.0, 1.5, PI / 2.0, 2.0] {
            assert!((m_shift(1.0, mu, &p) - (TAU - 4.0 * mu)).abs() < 1e-12, "mu = {mu}");
        }
        assert!(m_shift(1.0, PI / 2.0, &p).abs() < 1e-14);
        assert!((m_shift(1.0, 2.0, &p) - (TAU - 8.0)).abs() < 1e-13);
        for mu in [0.0, 0.7, 1.0, 3.0] {
            assert!(m_shift(0.0, mu, &p).abs() < 1e-14);
        }
    }

    #[test]
    fn m_orig_examples() {
        let p = pm();
        assert!((m_orig(3.0, 0.0, &p) + TAU).abs() < 1e-14);
        assert!(m_orig(-1.3, 1.3, &p).abs() < 1e-14);
    }

    #[test]
    fn derivative_examples() {
        let p = pm();
        assert!((mx(0.0, 2.0, &p) + TAU / 3.0).abs() < 1e-13);
        assert!(mx(0.0, 2f64.sqrt(), &p).abs() < 1e-13);
        assert!((mx(0.0, 0.8, &p) - TAU).abs() < 1e-14);
        assert_eq!(mmu(3.0, 1.0, &p), 0.0);
        for mu in [0.5, 1.5, 3.0] {
            assert!(mmu(0.0, mu, &p).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_at_worked_point() {
        assert!(consistency_identity(1.0, 2.0, &pm()).abs() < 1e-10);
        assert!(consistency_identity(0.0, 1.3, &pm()).abs() < 1e-14);
    }

    #[test]
    fn bif_values_examples() {
        let b = bif_values(&pm()).unwrap();
        assert!((b.c - PI / 2.0).abs() < 1e-15);
        assert!((b.mu1 - PI / 2.0).abs() < 1e-15);
        assert!((b.mu2 - 2f64.sqrt()).abs() < 1e-15);
        assert!((b.x1 - 1.0).abs() < 1e-15);
        let small = bif_values(&Params::new(-0.05, 0.05, 0.0)).unwrap();
        assert_eq!(small, b);
        assert_eq!(
            bif_values(&Params::new(-1.0, -1.0, 0.0)),
            Err(Error::BadRegime { a: -1.0, b: -1.0 })
        );
    }

    #[test]
    fn phi_examples() {
        let p = pm();
        assert!((phi(1.0, &p).unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(phi(2.0, &p).unwrap(), 1.0);
        assert!((phi(0.0, &p).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // the limit at 0 agrees with the bisection nearby
        assert!((phi(1e-6, &p).unwrap() - 2f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn zero_counts() {
        let p = pm();
        assert_eq!(count_simple_zeros(1.0, &p).unwrap(), 3);
        assert_eq!(count_simple_zeros(1.5, &p).unwrap(), 5);
        assert_eq!(count_simple_zeros(2.0, &p).unwrap(), 1);
        assert!(matches!(
            count_simple_zeros(2f64.sqrt(), &p),
            Err(Error::AtBifurcation { .. })
        ));
    }

    #[test]
    fn zero_set_layout() {
        let set = zero_set(&pm(), 33).unwrap();
        assert_eq!(set.len(), 9);
        assert_eq!(set[0].id(), "axis");
        assert!(set.iter().any(|l| l.id() == "phi_s2s1"));
        for line in &set {
            assert_eq!(line.points.len(), 33);
            for &(x, mu) in &line.points {
                assert!(m_shift(x, mu, &pm()).abs() < 1e-8, "{} at ({x}, {mu})", line.id());
            }
        }
    }
}
