use std::f64::consts::PI;

use xpm_fidelity::fidelity::{self, GateGeometry};
use xpm_fidelity::response::{ResponseModel, TwoPoleParams};
use xpm_fidelity::sweep::{self, Axis, PulseKind, SweepSpec};

fn raman_like() -> ResponseModel {
    let (tau1, tau2) = (12.2e-15_f64, 32e-15_f64);
    TwoPoleParams::new((tau1.powi(-2) + tau2.powi(-2)).sqrt(), 2.0 / tau2).unwrap().into()
}

#[test]
fn dirac_heatmap_matches_closed_form() {
    let r = raman_like();
    let spec = SweepSpec::default_f1(PulseKind::Dirac).with_resolution(32, 32).unwrap();
    let map = sweep::heatmap_f1(&spec, &r).unwrap();
    assert!(map.failures.is_empty());
    for (i, &phi) in map.phi.iter().enumerate() {
        for (j, &tw) in map.walkoff.iter().enumerate() {
            let closed = fidelity::f1max_dirac(&GateGeometry::symmetric(phi, tw).unwrap(), &r).unwrap();
            assert!((map.values[i][j] - closed).abs() < 1e-8);
        }
    }
}

#[test]
fn heatmap_is_deterministic_and_thread_independent() {
    let r = raman_like();
    let spec = SweepSpec::default_f1(PulseKind::Gaussian { t_psi: 5e-15 }).with_resolution(8, 8).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| sweep::heatmap_f1(&spec, &r).unwrap());
    let b = sweep::heatmap_f1(&spec, &r).unwrap();
    assert_eq!(a.values.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>(),
               b.values.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.peak, b.peak);
}

#[test]
fn refinement_never_lowers_the_peak_and_is_grid_stable() {
    let r = raman_like();
    let coarse = SweepSpec::default_f1(PulseKind::Dirac).with_resolution(32, 32).unwrap();
    let fine = SweepSpec {
        phi: coarse.phi.doubled(),
        walkoff: coarse.walkoff.doubled(),
        ..coarse.clone()
    };
    let p1 = sweep::heatmap_f1(&coarse, &r).unwrap().peak.unwrap();
    let p2 = sweep::heatmap_f1(&fine, &r).unwrap().peak.unwrap();
    assert!(p1.refined && p1.value >= p1.coarse_value);
    assert!(p2.value >= p2.coarse_value);
    assert!((p1.value - p2.value).abs() < 1e-3, "{} vs {}", p1.value, p2.value);
}

#[test]
fn fmax_sweep_shape() {
    let rows = sweep::gamma_sweep(&Axis::log("gamma", 0.05, 20.0, 2000).unwrap()).unwrap();
    let fmax: Vec<f64> = rows.iter().map(|r| r.fmax).collect();
    let (i, peak) = sweep::find_peak_1d(&fmax).unwrap();
    assert!(peak > 0.79 && peak < 0.82);
    // Monotone on each side of the peak, approaching 2/3 at small Γ.
    assert!(fmax[..=i].windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert!(fmax[i..].windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!((fmax[0] - 2.0 / 3.0).abs() < 1e-6);
    assert!(fmax[fmax.len() - 1] - 2.0 / 3.0 < 0.02);
    assert!(rows.windows(2).all(|w| w[0].gamma_norm < w[1].gamma_norm));
}

#[test]
fn zero_temperature_f0_map_uses_variance_only() {
    let r = raman_like();
    let mut spec = SweepSpec::default_f1(PulseKind::Dirac).with_resolution(4, 4).unwrap();
    spec.bound = sweep::BoundSelector::F0Nonuniform;
    let map = sweep::heatmap_f1(&spec, &r).unwrap();
    let g = GateGeometry::symmetric(map.phi[2], map.walkoff[3]).unwrap();
    let direct = fidelity::f0_nonuniform(&g, &r).unwrap().value;
    assert!((map.values[2][3] - direct).abs() < 1e-14);
    assert!(map.values[0].iter().all(|&v| (v - 1.0).abs() < 1e-15));
    assert!(map.phi[3] == 2.0 * PI);
}
