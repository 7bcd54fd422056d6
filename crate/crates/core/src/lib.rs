//! # satcycles
//!
//! Limit cycles of the periodically forced saturated scalar equation
//!
//! ```text
//! x' = a x + (b - a) sat(x) + mu sin t
//! ```
//!
//! together with its deformations `x' = eps f(x) + mu sin t + lambda`.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, the piecewise-linear field and its symmetries;
//! * [`exactflow`]: exact event-driven solutions built from per-zone closed forms;
//! * [`poincare`]: Poincaré map and half-map, their exact derivatives, regime
//!   classification, closed-form one-zone cycles and the global cycle finder;
//! * [`crossings`]: the four crossing times of three-zone periodic solutions
//!   and the bias function `lambda(x)`;
//! * [`melnikov`]: the first-order averaging function, its zero set and the
//!   bifurcation constants `c`, `mu1`, `mu2`, `x1`.
//!
//! ```
//! use satcycles::{find_all_cycles, FinderOptions, Params, Stability};
//!
//! let p = Params::new(-1.0, 1.0, 1.2);
//! let cycles = find_all_cycles(&p, &FinderOptions::default()).unwrap();
//! assert_eq!(cycles.len(), 3);
//! let repelling: Vec<_> = cycles
//!     .iter()
//!     .filter(|c| c.stability == Stability::Repelling)
//!     .collect();
//! assert_eq!(repelling.len(), 1);
//! assert!((repelling[0].x0 + 0.6).abs() < 1e-8);
//! ```
//!
//! The guide under `book/` walks through each concept; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod crossings;
pub mod error;
pub mod exactflow;
pub mod melnikov;
pub mod model;
pub mod poincare;

pub use crossings::{
    extract_crossings, g_aux, lambda_folds, lambda_of_x, residual_3z, residual_direct,
    solve_crossing_system, CrossingSequence, CrossingSolution, Fold,
};
pub use error::{Error, Result};
pub use exactflow::{
    advance, first_crossing, linear_zone_flow, rk4_oracle, Segment, Trajectory, ZoneCoeffs,
};
pub use melnikov::{
    bif_values, consistency_identity, count_simple_zeros, m_orig, m_shift, mmu, mx, partition,
    phi, phi_branch, zero_set, BifValues, Polyline, ZeroSetBranch, ZonePartition,
};
pub use model::{f_eval, sat, symmetry_reduce, Params, ProductSign, SymmetryTransform, Zone};
pub use poincare::{
    analytic_one_zone_cycles, classify_regime, displacement_d, dp, dq, find_all_cycles, half_q,
    poincare_p, pull_back_initial, CycleRecord, FinderOptions, Regime, RegimeTag, Stability,
    ZonalType,
};

// Book chapters, compiled so that their listings run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/exact-flow.md")]
    mod exact_flow {}
    #[doc = include_str!("../../../book/src/poincare.md")]
    mod poincare {}
    #[doc = include_str!("../../../book/src/crossings.md")]
    mod crossings {}
    #[doc = include_str!("../../../book/src/melnikov.md")]
    mod melnikov {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
