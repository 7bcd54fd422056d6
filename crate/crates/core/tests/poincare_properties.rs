use std::f64::consts::TAU;

use proptest::prelude::*;
use satcycles::{
    advance, analytic_one_zone_cycles, displacement_d, dp, dq, find_all_cycles, half_q, poincare_p,
    pull_back_initial, symmetry_reduce, FinderOptions, Params, Stability, ZonalType,
};

fn mixed() -> Params {
    Params::new(-1.0, 1.0, 1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn half_map_squares_to_full_map(x in -4.0..4.0f64) {
        let p = mixed();
        let qq = half_q(&p, half_q(&p, x).unwrap()).unwrap();
        prop_assert!((qq - poincare_p(&p, x).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn half_map_is_decreasing(x in -4.0..4.0f64, gap in 1e-6..1.0f64,
                             a in -2.0..2.0f64, b in -2.0..2.0f64, mu in -3.0..3.0f64) {
        let p = Params::new(a, b, mu);
        prop_assert!(half_q(&p, x).unwrap() > half_q(&p, x + gap).unwrap());
        prop_assert!(dq(&p, x).unwrap() < 0.0);
    }

    #[test]
    fn dp_matches_finite_differences(x in -4.0..4.0f64, a in -1.5..1.5f64,
                                     b in -1.5..1.5f64, mu in -3.0..3.0f64) {
        let p = Params::new(a, b, mu);
        let h = 1e-5;
        let fd = (poincare_p(&p, x + h).unwrap() - poincare_p(&p, x - h).unwrap()) / (2.0 * h);
        let exact = dp(&p, x).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-4 * exact.abs(), "fd {} exact {}", fd, exact);
    }
}

proptest! {
    // each case runs the full finder
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn same_sign_slopes_give_one_symmetric_cycle(a in -2.0..-0.2f64, b in -2.0..-0.2f64,
                                                 mu in 0.0..4.0f64, flip in any::<bool>()) {
        let (a, b) = if flip { (-a, -b) } else { (a, b) };
        let p = Params::new(a, b, mu);
        let cycles = find_all_cycles(&p, &FinderOptions::default()).unwrap();
        prop_assert_eq!(cycles.len(), 1);
        prop_assert!(cycles[0].symmetric);
        let expected = if b < 0.0 { Stability::Attracting } else { Stability::Repelling };
        prop_assert_eq!(cycles[0].stability, expected);
    }
}

fn check_cycles(p: &Params) -> usize {
    let cycles = find_all_cycles(p, &FinderOptions::default()).unwrap();
    for c in &cycles {
        assert!(displacement_d(p, c.x0).unwrap().abs() < 1e-9, "{p:?} {c:?}");
        let back = advance(p, 0.0, c.x0, 2.0 * TAU).unwrap().final_state;
        assert!((back - c.x0).abs() < 1e-7);
        if c.symmetric {
            assert!((half_q(p, c.x0).unwrap() - c.x0).abs() < 1e-9);
        }
        let expected = Stability::from_multiplier(c.multiplier);
        assert_eq!(c.stability, expected);
    }
    for w in cycles.windows(2) {
        assert!(w[0].x0 < w[1].x0);
    }
    cycles.len()
}

#[test]
fn cycles_are_fixed_points() {
    for p in [
        Params::new(-1.0, 1.0, 1.2),
        Params::new(-0.05, 0.05, 1.5),
        Params::new(-1.0, -2.0, 5.0),
        Params::new(0.5, -0.3, 2.0),
        Params::new(-1.0, 1.0, 2.0).with_eps(0.05),
    ] {
        assert!(check_cycles(&p) >= 1);
    }
}

#[test]
fn small_forcing_gives_three_one_zone_cycles() {
    // ab < 0 and |mu| below both one-zone bounds
    for (a, b) in [(-1.0, 1.0), (-2.0, 0.5), (-0.5, 2.0)] {
        let bound = (-b * (a * a + 1.0f64).sqrt() / a).min((b * b + 1.0f64).sqrt());
        for mu in [0.3 * bound, 0.9 * bound] {
            let p = Params::new(a, b, mu);
            let found = find_all_cycles(&p, &FinderOptions::default()).unwrap();
            let analytic = analytic_one_zone_cycles(&p);
            assert_eq!(found.len(), 3, "{p:?}");
            assert_eq!(analytic.len(), 3);
            for c in &found {
                assert!(matches!(
                    c.zonal_type,
                    ZonalType::OneLower | ZonalType::OneInner | ZonalType::OneUpper
                ));
                assert!(analytic.iter().any(|r| (r.x0 - c.x0).abs() < 1e-8));
            }
        }
    }
}

#[test]
fn analytic_cycles_are_fixed_points() {
    let p = Params::new(-1.0, 1.0, 1.2);
    for c in analytic_one_zone_cycles(&p) {
        assert!(displacement_d(&p, c.x0).unwrap().abs() < 1e-8);
    }
    assert!((half_q(&p, -0.6).unwrap() + 0.6).abs() < 1e-8);
    assert!((dp(&p, -0.6).unwrap() - TAU.exp()).abs() < 1e-9 * TAU.exp());
}

#[test]
fn reduction_round_trip() {
    let p = Params::new(-0.05, 0.05, -1.5);
    let (reduced, transform) = symmetry_reduce(&p);
    let direct = find_all_cycles(&p, &FinderOptions::default()).unwrap();
    let via = find_all_cycles(&reduced, &FinderOptions::default()).unwrap();
    assert_eq!(direct.len(), via.len());
    for c in via {
        let x0 = pull_back_initial(&transform, &reduced, c.x0).unwrap();
        assert!(direct.iter().any(|d| (d.x0 - x0).abs() < 1e-7), "{x0}");
    }
}
