use thiserror::Error;

use crate::poincare::RegimeTag;

/// Errors raised by the flow, cycle finder, crossing solver and Melnikov tools.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("integration interval is reversed: start {start} > end {end}")]
    InvalidInterval { start: f64, end: f64 },

    /// The event loop switched zones more often than allowed. Real solutions
    /// cross the lines |x| = 1 only a handful of times per period, so this
    /// always points at a tolerance pathology.
    #[error("more than {cap} zone switches before t = {t}")]
    SwitchCapExceeded { cap: usize, t: f64 },

    #[error("parameters are in the analytic center regime `{0}`; no isolated cycles to search for")]
    CenterRegime(RegimeTag),

    #[error("root count changed between adjacent grid refinements ({coarse} vs {fine})")]
    CountUnstable { coarse: usize, fine: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("crossing times lost their ordering and damping could not restore it")]
    OrderViolated,

    #[error("could not bracket a root for {what}")]
    BracketFailed { what: &'static str },

    #[error("operation needs a*b < 0, got a = {a}, b = {b}")]
    BadRegime { a: f64, b: f64 },

    #[error("mu = {mu} lies within 1e-9 of the bifurcation value {value}")]
    AtBifurcation { mu: f64, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}
