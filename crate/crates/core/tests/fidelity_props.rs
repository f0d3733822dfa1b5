mod common;

use std::f64::consts::PI;

use common::{random_compact_config, FS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xpm_fidelity::fidelity::{self, Direction, GateGeometry};
use xpm_fidelity::pulse::PulseShape;
use xpm_fidelity::response::{self, ResponseModel, TwoPoleParams};

fn two_pole(w0: f64, gamma: f64) -> ResponseModel {
    TwoPoleParams::from_normalized(w0, gamma).unwrap().into()
}

#[test]
fn uniform_conditions_give_uniform_phase_and_matching_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        let c = random_compact_config(&mut rng);
        let g = GateGeometry::uniform(PI, c.t_psi, c.support).unwrap();
        let a = c.pulse.clone();
        let b = a.delayed(g.delay);

        let (lo, hi) = a.window();
        let grid: Vec<f64> = (0..=20).map(|k| lo + (hi - lo) * k as f64 / 20.0).collect();
        for z in fidelity::induced_phase_profile(&grid, &g, &c.response, &b, Direction::ASeesB).unwrap() {
            assert!((z.norm() - 1.0).abs() < 1e-6);
            assert!((z.arg().abs() - PI).abs() < 1e-6);
        }

        let f1 = fidelity::f1max_nonuniform(&g, &c.response, &a, &b).unwrap();
        let him = response::him_l1(&c.response).unwrap();
        let f0 = fidelity::f0_uniform_bound(PI, c.t_psi, c.support, him).unwrap();
        assert!((f1.value - f0.value).abs() < 1e-8, "{} vs {}", f1.value, f0.value);
    }
}

#[test]
fn dirac_closed_form_matches_narrow_gaussian() {
    let r = two_pole(8e13, 0.7);
    for (phi, tw) in [(1.0, 10.0 * FS), (4.25, 16.0 * FS), (2.5, 80.0 * FS)] {
        let g = GateGeometry::symmetric(phi, tw).unwrap();
        let a = PulseShape::gaussian(0.0, 1e-6 * tw).unwrap();
        let b = a.delayed(g.delay);
        let general = fidelity::f1max_nonuniform(&g, &r, &a, &b).unwrap().value;
        let closed = fidelity::f1max_dirac(&g, &r).unwrap();
        assert!((general - closed).abs() < 1e-8, "{general} vs {closed}");
    }
}

#[test]
fn long_gaussian_pulses_cannot_beat_two_thirds() {
    let r = two_pole(8e13, 0.7);
    let t_psi = 3000.0 * FS;
    for (phi, tw) in [(PI, 16.0 * FS), (4.25, 50.0 * FS), (6.0, 200.0 * FS)] {
        let g = GateGeometry::symmetric(phi, tw).unwrap();
        let a = PulseShape::gaussian(0.0, t_psi).unwrap();
        let b = a.delayed(g.delay);
        let f = fidelity::f1max_nonuniform(&g, &r, &a, &b).unwrap().value;
        assert!(f <= 2.0 / 3.0 + 1e-3, "{f}");
    }
}

#[test]
fn mismatched_pulses_are_rejected() {
    let r = two_pole(1e14, 2.0);
    let g = GateGeometry::symmetric(PI, 30.0 * FS).unwrap();
    let a = PulseShape::gaussian(0.0, 5.0 * FS).unwrap();
    let b = PulseShape::gaussian(0.0, 5.0 * FS).unwrap();
    assert!(fidelity::f1max_nonuniform(&g, &r, &a, &b).is_err());
}

#[test]
fn pmp_cascade_is_invariant_and_equals_fmax() {
    for gamma in [0.7, 1.5, 2.0, 4.0] {
        let r = two_pole(1e14, gamma);
        let fmax = fidelity::fmax(&r).unwrap().value;
        for n in [1u32, 2, 10, 100] {
            let bound = fidelity::pmp_cascade_bound(n, &r, PI / n as f64, &PulseShape::dirac(0.0)).unwrap().value;
            assert!((bound - fmax).abs() < 1e-12);
        }
    }
}

#[test]
fn pmp_flags_out_of_regime_pulses() {
    let r = two_pole(1e14, 2.0);
    let t_h = response::rms_duration(&r).unwrap();
    let short = PulseShape::gaussian(0.0, 0.05 * t_h).unwrap();
    let long = PulseShape::gaussian(0.0, 2.0 * t_h).unwrap();
    assert_eq!(fidelity::pmp_cascade_bound(4, &r, PI / 4.0, &short).unwrap().in_regime, Some(true));
    assert_eq!(fidelity::pmp_cascade_bound(4, &r, PI / 4.0, &long).unwrap().in_regime, Some(false));
}

#[test]
fn raw_geometry_conversion() {
    // v_a = c/1.5, v_b = c/1.4 → 1/u = 0.1/c.
    let c = 299_792_458.0;
    let g = GateGeometry::from_raw(2.0e-8, 0.01, c / 1.5, c / 1.4, 0.0).unwrap();
    let u = c / 0.1;
    assert!((g.phi - 2.0e-8 * u).abs() < 1e-12 * g.phi);
    assert!((g.walkoff_time - 0.01 / u).abs() < 1e-24);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f0_is_monotone(phi in 0.0f64..7.0, t_psi in 0.0f64..5.0, t_h in 0.01f64..5.0, him in 0.1f64..5.0, d in 0.001f64..1.0) {
        let base = fidelity::f0_uniform_bound(phi, t_psi, t_h, him).unwrap().value;
        prop_assert!((2.0 / 3.0..=1.0).contains(&base));
        prop_assert!(fidelity::f0_uniform_bound(phi + d, t_psi, t_h, him).unwrap().value <= base);
        prop_assert!(fidelity::f0_uniform_bound(phi, t_psi + d, t_h, him).unwrap().value <= base);
        prop_assert!(fidelity::f0_uniform_bound(phi, t_psi, t_h, him + d).unwrap().value <= base);
    }

    #[test]
    fn profile_modulus_at_most_one(
        gamma in 0.3f64..5.0,
        phi in 0.0f64..6.3,
        tw_fs in 1.0f64..100.0,
        t_psi_fs in 1.0f64..40.0,
        t_fs in -40.0f64..40.0,
    ) {
        let r = two_pole(1e14, gamma);
        let g = GateGeometry::symmetric(phi, tw_fs * FS).unwrap();
        let other = PulseShape::gaussian(g.delay, t_psi_fs * FS).unwrap();
        for dir in [Direction::ASeesB, Direction::BSeesA] {
            let z = fidelity::induced_phase_profile(&[t_fs * FS], &g, &r, &other, dir).unwrap()[0];
            prop_assert!(z.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn f1_bounds_lie_between_one_third_and_one(gamma in 0.3f64..5.0, phi in 0.0f64..6.3, tw_fs in 1.0f64..100.0) {
        let r = two_pole(1e14, gamma);
        let g = GateGeometry::symmetric(phi, tw_fs * FS).unwrap();
        let f = fidelity::f1max_dirac(&g, &r).unwrap();
        prop_assert!((1.0 / 3.0 - 1e-12..=1.0).contains(&f));
    }
}
