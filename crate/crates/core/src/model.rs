//! Parameters, the piecewise-linear field and its symmetries.
//!
//! Every equation variant handled by the crate is
//!
//! ```text
//! x' = eps * f(x) + mu * sin(t) + lambda,
//! f(x) = a x + (b - a) sat(x)
//! ```
//!
//! With `eps = 1` and `lambda = 0` this is the base equation; `eps` gives the
//! first-order deformation studied with the Melnikov function and `lambda`
//! the constant bias used to unfold singular cycles.

use std::fmt;

use crate::error::{ensure_finite, Result};

/// Normalized saturation: identity on `|x| < 1`, `sign(x)` outside.
pub fn sat(x: f64) -> f64 {
    if x.abs() < 1.0 {
        x
    } else {
        x.signum()
    }
}

/// One of the three linearity zones. Points with `|x| = 1` belong to
/// [`Zone::Inner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Zone {
    Lower,
    Inner,
    Upper,
}

impl Zone {
    pub fn of(x: f64) -> Zone {
        if x > 1.0 {
            Zone::Upper
        } else if x < -1.0 {
            Zone::Lower
        } else {
            Zone::Inner
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Lower => "lower",
            Zone::Inner => "inner",
            Zone::Upper => "upper",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sign of the product `a * b`, which selects the dynamical regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductSign {
    Neg,
    Zero,
    Pos,
}

/// Full parameter state of the forced saturated equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Slope in the outer zones `|x| >= 1`.
    pub a: f64,
    /// Slope in the inner zone `|x| <= 1`.
    pub b: f64,
    /// Forcing amplitude.
    pub mu: f64,
    /// Scale of the piecewise-linear field; 1 for the unperturbed equation.
    pub eps: f64,
    /// Constant bias added to the right-hand side.
    pub lambda: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, mu: f64) -> Self {
        Params {
            a,
            b,
            mu,
            eps: 1.0,
            lambda: 0.0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("a", self.a)?;
        ensure_finite("b", self.b)?;
        ensure_finite("mu", self.mu)?;
        ensure_finite("eps", self.eps)?;
        ensure_finite("lambda", self.lambda)
    }

    /// Sign of `a * b` computed from the raw slopes.
    pub fn product_sign(&self) -> ProductSign {
        let s = self.a.signum() * self.b.signum();
        if self.a == 0.0 || self.b == 0.0 {
            ProductSign::Zero
        } else if s < 0.0 {
            ProductSign::Neg
        } else {
            ProductSign::Pos
        }
    }

    /// Outer slope actually seen by the flow, `eps * a`.
    pub fn a_eff(&self) -> f64 {
        self.eps * self.a
    }

    /// Inner slope actually seen by the flow, `eps * b`.
    pub fn b_eff(&self) -> f64 {
        self.eps * self.b
    }

    /// Right-hand side `eps f(x) + mu sin t + lambda`.
    pub fn rhs(&self, t: f64, x: f64) -> f64 {
        self.eps * f_eval(self, x) + self.mu * t.sin() + self.lambda
    }
}

/// The piecewise-linear field `f(x) = a x + (b - a) sat(x)` with the raw
/// slopes of `p` (no `eps` scaling, no bias).
pub fn f_eval(p: &Params, x: f64) -> f64 {
    if x <= -1.0 {
        p.a * x + (p.a - p.b)
    } else if x >= 1.0 {
        p.a * x + (p.b - p.a)
    } else {
        p.b * x
    }
}

/// Record of the symmetry changes of variables applied to a parameter set.
///
/// * phase shift `t -> t + pi` maps `mu` to `-mu`;
/// * time reversal `t -> -t` maps `(a, b, lambda)` to `(-a, -b, -lambda)`.
///
/// Both are involutions and commute, so applying a transform twice is the
/// identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SymmetryTransform {
    pub time_reversed: bool,
    pub phase_shifted: bool,
}

impl SymmetryTransform {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        !self.time_reversed && !self.phase_shifted
    }

    pub fn apply(&self, p: &Params) -> Params {
        let mut q = *p;
        if self.phase_shifted {
            q.mu = -q.mu;
        }
        if self.time_reversed {
            q.a = -q.a;
            q.b = -q.b;
            q.lambda = -q.lambda;
        }
        q
    }
}

/// Returns an equivalent parameter set with `mu >= 0` together with the
/// transform that produced it. Cycle counts are preserved; see
/// [`crate::poincare::pull_back_initial`] for mapping cycles back.
pub fn symmetry_reduce(p: &Params) -> (Params, SymmetryTransform) {
    let t = SymmetryTransform {
        time_reversed: false,
        phase_shifted: p.mu < 0.0,
    };
    (t.apply(p), t)
}

/// The time-reversed equation `x' = -eps f(x) + mu sin t - lambda`.
pub fn time_reverse(p: &Params) -> Params {
    SymmetryTransform {
        time_reversed: true,
        phase_shifted: false,
    }
    .apply(p)
}
