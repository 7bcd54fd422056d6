use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use satcycles::{advance, linear_zone_flow, rk4_oracle, Params, ZoneCoeffs};

fn params() -> impl Strategy<Value = Params> {
    (-3.0..3.0f64, -3.0..3.0f64, -5.0..5.0f64).prop_map(|(a, b, mu)| Params::new(a, b, mu))
}

// |u| grows like exp(2 pi |a|); slopes up to 1 keep it where 1e-8 is
// above float resolution
fn moderate_params() -> impl Strategy<Value = Params> {
    (-1.0..1.0f64, -1.0..1.0f64, -5.0..5.0f64).prop_map(|(a, b, mu)| Params::new(a, b, mu))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn semigroup(p in moderate_params(), x in -5.0..5.0f64, u in 0.0..1.0f64, v in 0.0..1.0f64, tau in 0.0..TAU) {
        let (s, t) = if u < v { (u, v) } else { (v, u) };
        let s = tau + s * TAU;
        let t = tau + t * TAU;
        let whole = advance(&p, tau, x, t).unwrap().final_state;
        let mid = advance(&p, tau, x, s).unwrap().final_state;
        let split = advance(&p, s, mid, t).unwrap().final_state;
        prop_assert!((whole - split).abs() < 1e-8, "{} vs {}", whole, split);
    }

    #[test]
    fn segments_are_continuous(p in params(), x in -5.0..5.0f64) {
        let tr = advance(&p, 0.0, x, 2.0 * TAU).unwrap();
        for w in tr.segments.windows(2) {
            let z = ZoneCoeffs::for_zone(&p, w[0].zone);
            let left = linear_zone_flow(z, p.mu, w[0].t_start, w[0].entry_state, w[0].t_end);
            prop_assert!((left - w[1].entry_state).abs() < 1e-10 * left.abs().max(1.0));
            prop_assert!(w[0].t_end == w[1].t_start);
        }
    }

    #[test]
    fn inner_measure_is_bounded(p in params(), x in -5.0..5.0f64) {
        let tr = advance(&p, 0.0, x, TAU).unwrap();
        prop_assert!(tr.a_in_measure >= 0.0 && tr.a_in_measure <= TAU + 1e-12);
        prop_assert!(tr.a_in_half_measure <= tr.a_in_measure + 1e-12);
        prop_assert!(tr.a_in_half_measure <= PI + 1e-12);
    }

    #[test]
    fn phase_shift_preserves_inner_measure(p in params(), x in -0.5..0.5f64) {
        // u(t) solves the mu-equation iff -u(t + pi) solves it; with mu -> -mu
        // the inner time of odd data is unchanged
        let flipped = p.with_mu(-p.mu);
        let m1 = advance(&p, 0.0, x, TAU).unwrap().a_in_measure;
        let m2 = advance(&flipped, 0.0, -x, TAU).unwrap().a_in_measure;
        prop_assert!((m1 - m2).abs() < 1e-9);
    }
}

#[test]
fn rk4_oracle_converges_to_exact_flow() {
    // halving the oracle step shrinks the gap to the exact flow
    let cases = [
        Params::new(1.881, 0.779, -3.176),
        Params::new(-1.0, 1.0, 1.2),
        Params::new(-0.05, 0.05, 1.5),
    ];
    for p in cases {
        let exact = advance(&p, 0.0, 0.065, TAU).unwrap().final_state;
        let coarse = (rk4_oracle(&p, 0.0, 0.065, TAU, 2e-4) - exact).abs();
        let fine = (rk4_oracle(&p, 0.0, 0.065, TAU, 1.25e-5) - exact).abs();
        assert!(fine < 1e-6 * exact.abs().max(1.0), "{p:?}: {fine}");
        assert!(fine <= coarse + 1e-12, "{p:?}: {coarse} -> {fine}");
    }
}

#[test]
fn one_switch_closed_form() {
    // x' = 2x from 0.5 reaches 1 at ln 2 / 2, then x' = x + 1
    let p = Params::new(1.0, 2.0, 0.0);
    let exact = 2.0 * (TAU - 0.5 * 2f64.ln()).exp() - 1.0;
    let tr = advance(&p, 0.0, 0.5, TAU).unwrap();
    assert!((tr.final_state - exact).abs() < 1e-12 * exact);
    assert!((tr.a_in_measure - 0.5 * 2f64.ln()).abs() < 1e-14);
}
