//! Fidelity bounds for an XPM CPHASE gate with group-velocity walk-off.
//!
//! Geometry is parameterized by the uniform phase `φ = ηu`, the walk-off
//! time `T_w = L/u` (with `1/u = 1/v_A − 1/v_B`) and the launch delay
//! `t_d` of the fast pulse. Every bound is `2/3 ± (1/3)·e^{−X}·(…)` where
//! `X = ⟨ξ²⟩/2` is the phase-noise exponent; at zero temperature
//! `X = (φ T_w / 4π)·∫dω |Im H(ω)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{self, PulseShape};
use crate::quad::{self, Tolerance};
use crate::response::{self, ResponseModel};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Tolerance on the Δ-integral of the phase kernel.
pub const KERNEL_TOLERANCE: Tolerance = Tolerance::new(1e-11, 1e-10);

/// Pulses much shorter than this fraction of `t_h` count as slow-response.
pub const SLOW_RESPONSE_RATIO: f64 = 0.1;

/// Walk-off geometry of a single XPM interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateGeometry {
    /// Uniform phase `φ = ηu` (rad).
    pub phi: f64,
    /// `T_w = L/u` (s).
    pub walkoff_time: f64,
    /// Delay `t_d` of the fast pulse (s).
    pub delay: f64,
    /// Reservoir temperature (K).
    pub temperature: f64,
}

impl GateGeometry {
    pub fn new(phi: f64, walkoff_time: f64, delay: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::invalid("phi", "must be finite"));
        }
        if !(walkoff_time.is_finite() && walkoff_time > 0.0) {
            return Err(Error::invalid("walkoff_time", format!("must be > 0, got {walkoff_time}")));
        }
        if !(delay.is_finite() && delay >= 0.0) {
            return Err(Error::invalid("delay", format!("must be >= 0, got {delay}")));
        }
        Ok(GateGeometry {
            phi,
            walkoff_time,
            delay,
            temperature: 0.0,
        })
    }

    pub fn with_temperature(mut self, kelvin: f64) -> Result<Self> {
        if !(kelvin.is_finite() && kelvin >= 0.0) {
            return Err(Error::invalid("temperature", format!("must be >= 0 K, got {kelvin}")));
        }
        self.temperature = kelvin;
        Ok(self)
    }

    /// From raw medium parameters: nonlinearity `eta` (rad·s/m), length
    /// (m), group velocities (m/s, `v_b > v_a`) and delay (s).
    pub fn from_raw(eta: f64, length: f64, v_a: f64, v_b: f64, delay: f64) -> Result<Self> {
        if !(v_a > 0.0 && v_b > v_a && v_b.is_finite()) {
            return Err(Error::invalid("v_b", format!("need 0 < v_a < v_b, got v_a = {v_a}, v_b = {v_b}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid("length", format!("must be > 0, got {length}")));
        }
        let u = 1.0 / (1.0 / v_a - 1.0 / v_b);
        Self::new(eta * u, length / u, delay)
    }

    /// Shortest delay and walk-off giving a uniform phase shift.
    pub fn uniform(phi: f64, t_psi: f64, t_h: f64) -> Result<Self> {
        let (delay, walkoff) = uniform_conditions(t_psi, t_h)?;
        Self::new(phi, walkoff, delay)
    }

    /// Symmetric walk-off: `t_d = T_w / 2`.
    pub fn symmetric(phi: f64, walkoff_time: f64) -> Result<Self> {
        Self::new(phi, walkoff_time, 0.5 * walkoff_time)
    }
}

/// Which field's phase is being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Phase on A induced by the photon in B.
    ASeesB,
    /// Phase on B induced by the photon in A.
    BSeesA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    F0Uniform,
    Fmax,
    F0Nonuniform,
    F1maxNonuniform,
    PmpCascade,
}

/// Inputs echoed into a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walkoff_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub him_l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<u32>,
}

/// A computed bound with the factors that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub bound: BoundKind,
    pub value: f64,
    /// `X` in the `e^{−X}` noise factor.
    pub noise_exponent: f64,
    /// `Re ∬ e^{iΘ(t−s)} |ψ_A(t)|² |ψ_B(s)|²`, where it enters.
    pub overlap_real: Option<f64>,
    /// Set for cascade bounds: whether each cell is in the slow-response
    /// regime the bound assumes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_regime: Option<bool>,
    pub inputs: BoundInputs,
}

/// Phase `η∫₀ᴸ h(Δ ± z/u) dz` induced at time offset `Δ = t − s`.
pub fn phase_shift_exponent(delta: f64, g: &GateGeometry, r: &ResponseModel, direction: Direction) -> f64 {
    let tw = g.walkoff_time;
    match direction {
        Direction::ASeesB => g.phi * (r.cumulative(delta + tw) - r.cumulative(delta)),
        Direction::BSeesA => g.phi * (r.cumulative(delta) - r.cumulative(delta - tw)),
    }
}

/// Offsets `Δ` at which the phase exponent is not smooth.
fn phase_kinks(g: &GateGeometry, r: &ResponseModel, direction: Direction) -> Vec<f64> {
    let mut edges = vec![0.0];
    if let ResponseModel::Tabulated(t) = r {
        edges.push(t.times()[0]);
        edges.push(t.support_end());
    }
    let shift = match direction {
        Direction::ASeesB => -g.walkoff_time,
        Direction::BSeesA => g.walkoff_time,
    };
    let mut kinks: Vec<f64> = edges.iter().flat_map(|&e| [e, e + shift]).collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    kinks
}

/// `∫ds e^{iΘ(t−s)} |ψ_other(s)|²` at each `t`.
pub fn induced_phase_profile(
    t_grid: &[f64],
    g: &GateGeometry,
    r: &ResponseModel,
    other_pulse: &PulseShape,
    direction: Direction,
) -> Result<Vec<Complex64>> {
    let kinks = phase_kinks(g, r, direction);
    t_grid
        .iter()
        .map(|&t| {
            let s_breaks: Vec<f64> = kinks.iter().map(|k| t - k).collect();
            other_pulse.integrate(
                |s| Complex64::from_polar(1.0, phase_shift_exponent(t - s, g, r, direction)),
                &s_breaks,
                KERNEL_TOLERANCE,
            )
        })
        .collect()
}

/// Shortest `(t_d, T_w)` satisfying the uniform-phase conditions.
pub fn uniform_conditions(t_psi: f64, t_h: f64) -> Result<(f64, f64)> {
    if !(t_psi.is_finite() && t_psi >= 0.0) {
        return Err(Error::invalid("t_psi", format!("must be >= 0, got {t_psi}")));
    }
    if !(t_h.is_finite() && t_h >= 0.0) {
        return Err(Error::invalid("t_h", format!("must be >= 0, got {t_h}")));
    }
    let total = t_psi + t_h;
    if total == 0.0 {
        return Err(Error::Domain(
            "degenerate geometry: pulse and response durations are both zero".into(),
        ));
    }
    Ok((total, 2.0 * total))
}

/// `coth(x)` with its small-argument expansion.
fn coth(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// Variance `⟨ξ²⟩` of the phase noise accumulated over the interaction.
pub fn phase_variance(g: &GateGeometry, r: &ResponseModel) -> Result<f64> {
    let strength = g.phi.abs() * g.walkoff_time;
    if strength == 0.0 {
        return Ok(0.0);
    }
    if g.temperature == 0.0 {
        return Ok(strength / (2.0 * PI) * response::him_l1(r)?);
    }
    let thermal = HBAR / (2.0 * BOLTZMANN * g.temperature);
    let w0 = r.frequency_scale()?;
    let mut failure = None;
    let est = quad::integrate_half_line(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            match r.spectrum(w) {
                Ok(h) => h.im.abs() * coth(thermal * w),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        w0,
        1e-12,
        r.frequency_cap(),
        Tolerance::new(1e-15 * w0, 1e-11),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(strength / PI * est.value)
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Vacuum-fidelity bound under the uniform-phase conditions.
pub fn f0_uniform_bound(phi: f64, t_psi: f64, t_h: f64, him_l1: f64) -> Result<FidelityReport> {
    check_nonnegative("phi", phi)?;
    check_nonnegative("t_psi", t_psi)?;
    check_nonnegative("t_h", t_h)?;
    check_nonnegative("him_l1", him_l1)?;
    let exponent = phi / (2.0 * PI) * (t_psi + t_h) * him_l1;
    Ok(FidelityReport {
        bound: BoundKind::F0Uniform,
        value: 2.0 / 3.0 + (-exponent).exp() / 3.0,
        noise_exponent: exponent,
        overlap_real: None,
        in_regime: None,
        inputs: BoundInputs {
            phi: Some(phi),
            t_psi: Some(t_psi),
            t_h: Some(t_h),
            him_l1: Some(him_l1),
            ..Default::default()
        },
    })
}

/// Slow-response, π-phase bound shared by `F₀` and `F₁`.
pub fn fmax(r: &ResponseModel) -> Result<FidelityReport> {
    let m = response::metrics(r)?;
    let mut report = f0_uniform_bound(PI, 0.0, m.t_h, m.him_l1)?;
    report.bound = BoundKind::Fmax;
    Ok(report)
}

/// Vacuum-fidelity bound without the uniform-phase conditions.
pub fn f0_nonuniform(g: &GateGeometry, r: &ResponseModel) -> Result<FidelityReport> {
    let exponent = 0.5 * phase_variance(g, r)?;
    Ok(FidelityReport {
        bound: BoundKind::F0Nonuniform,
        value: 2.0 / 3.0 + (-exponent).exp() / 3.0,
        noise_exponent: exponent,
        overlap_real: None,
        in_regime: None,
        inputs: geometry_inputs(g),
    })
}

fn geometry_inputs(g: &GateGeometry) -> BoundInputs {
    BoundInputs {
        phi: Some(g.phi),
        walkoff_time: Some(g.walkoff_time),
        delay: Some(g.delay),
        temperature: Some(g.temperature),
        ..Default::default()
    }
}

/// `∬ e^{iΘ(t−s)} |ψ_A(t)|² |ψ_B(s)|² dt ds` for the A-sees-B phase.
pub fn phase_overlap(g: &GateGeometry, r: &ResponseModel, pulse_a: &PulseShape, pulse_b: &PulseShape) -> Result<Complex64> {
    let kinks = phase_kinks(g, r, Direction::ASeesB);
    pulse::cross_integral(
        pulse_a,
        pulse_b,
        |d| Complex64::from_polar(1.0, phase_shift_exponent(d, g, r, Direction::ASeesB)),
        &kinks,
        KERNEL_TOLERANCE,
    )
}

/// Single-photon fidelity bound without the uniform-phase conditions.
/// `pulse_b` must be `pulse_a` delayed by `g.delay`.
pub fn f1max_nonuniform(
    g: &GateGeometry,
    r: &ResponseModel,
    pulse_a: &PulseShape,
    pulse_b: &PulseShape,
) -> Result<FidelityReport> {
    let time_tol = 1e-9 * (g.delay.abs() + pulse_a.duration() + g.walkoff_time);
    if !pulse_a.is_delayed_copy(pulse_b, g.delay, time_tol) {
        return Err(Error::invalid("pulse_b", "must equal pulse_a delayed by the geometry's t_d"));
    }
    let exponent = 0.5 * phase_variance(g, r)?;
    let overlap = phase_overlap(g, r, pulse_a, pulse_b)?;
    let mut inputs = geometry_inputs(g);
    inputs.t_psi = Some(pulse_a.duration());
    Ok(FidelityReport {
        bound: BoundKind::F1maxNonuniform,
        value: 2.0 / 3.0 - (-exponent).exp() / 3.0 * overlap.re,
        noise_exponent: exponent,
        overlap_real: Some(overlap.re),
        in_regime: None,
        inputs,
    })
}

/// Closed form of [`f1max_nonuniform`] for delta pulses.
pub fn f1max_dirac(g: &GateGeometry, r: &ResponseModel) -> Result<f64> {
    let exponent = 0.5 * phase_variance(g, r)?;
    let theta = g.phi * r.cumulative(g.walkoff_time - g.delay);
    Ok(2.0 / 3.0 - (-exponent).exp() / 3.0 * theta.cos())
}

/// `F = 1/2 + c^N/3 + term/6` for `N` cascaded XPM+PMP cells, where `c`
/// is the per-cell `⟨e^{iξ}⟩` and `term` the pulse-averaged two-point
/// coherence of the whole cascade.
pub fn cascade_fidelity(char_per_cell: f64, n_cells: u32, coherence_term: f64) -> f64 {
    0.5 + char_per_cell.powi(n_cells as i32) / 3.0 + coherence_term / 6.0
}

/// Upper bound for `N` cascaded XPM+PMP cells, each run under
/// uniform-phase conditions with phase `per_cell_phi`.
pub fn pmp_cascade_bound(
    n_cells: u32,
    r: &ResponseModel,
    per_cell_phi: f64,
    pulse: &PulseShape,
) -> Result<FidelityReport> {
    if n_cells == 0 {
        return Err(Error::Domain("n_cells must be at least 1".into()));
    }
    check_nonnegative("per_cell_phi", per_cell_phi)?;
    let m = response::metrics(r)?;
    let t_psi = pulse.duration();
    let cell = f0_uniform_bound(per_cell_phi, t_psi, m.t_h, m.him_l1)?;
    let exponent = n_cells as f64 * cell.noise_exponent;
    // Two-point coherence term set to its maximum of 1.
    let value = cascade_fidelity((-exponent / n_cells as f64).exp(), n_cells, 1.0);
    Ok(FidelityReport {
        bound: BoundKind::PmpCascade,
        value,
        noise_exponent: exponent,
        overlap_real: None,
        in_regime: Some(t_psi <= SLOW_RESPONSE_RATIO * m.t_h),
        inputs: BoundInputs {
            phi: Some(per_cell_phi),
            t_psi: Some(t_psi),
            t_h: Some(m.t_h),
            him_l1: Some(m.him_l1),
            n_cells: Some(n_cells),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::TwoPoleParams;
    use std::f64::consts::E;

    fn critical(w0: f64) -> ResponseModel {
        TwoPoleParams::from_normalized(w0, 2.0).unwrap().into()
    }

    #[test]
    fn geometry_validation() {
        assert!(GateGeometry::new(1.0, 0.0, 0.0).is_err());
        assert!(GateGeometry::new(1.0, 1.0, -1.0).is_err());
        assert!(GateGeometry::new(1.0, 1.0, 0.0).unwrap().with_temperature(-1.0).is_err());
        let raw = GateGeometry::from_raw(2.0, 3.0, 1.0, 2.0, 0.0).unwrap();
        // 1/u = 1 − 1/2 ⇒ u = 2
        assert!((raw.phi - 4.0).abs() < 1e-15);
        assert!((raw.walkoff_time - 1.5).abs() < 1e-15);
        assert!(GateGeometry::from_raw(1.0, 1.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exponent_limits() {
        let r = critical(1.0);
        let g = GateGeometry::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(phase_shift_exponent(-1.0, &g, &r, Direction::ASeesB), 0.0);
        let v = phase_shift_exponent(0.0, &g, &r, Direction::ASeesB);
        assert!((v - 2.0 * (1.0 - 2.0 / E)).abs() < 1e-14);
        let full = phase_shift_exponent(-0.5, &GateGeometry::new(2.0, 200.0, 0.0).unwrap(), &r, Direction::ASeesB);
        assert!((full - 2.0).abs() < 1e-12);
        let b = phase_shift_exponent(1.0, &g, &r, Direction::BSeesA);
        assert!((b - 2.0 * (1.0 - 2.0 / E)).abs() < 1e-14);
    }

    #[test]
    fn uniform_conditions_arithmetic() {
        let (td, tw) = uniform_conditions(1e-12, 50e-15).unwrap();
        assert!((td - 1.05e-12).abs() < 1e-24);
        assert!((tw - 2.1e-12).abs() < 1e-24);
        assert_eq!(uniform_conditions(0.0, 3.0).unwrap(), (3.0, 6.0));
        assert!(matches!(uniform_conditions(0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn f0_uniform_special_values() {
        assert_eq!(f0_uniform_bound(PI, 1.0, 1.0, 0.0).unwrap().value, 1.0);
        let r = f0_uniform_bound(PI, 0.0, 3f64.sqrt() / 2.0, 2.0).unwrap();
        assert!((r.noise_exponent - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((r.value - (2.0 / 3.0 + (-(3f64.sqrt()) / 2.0).exp() / 3.0)).abs() < 1e-15);
        assert!((r.value - 0.8069).abs() < 5e-5);
        assert!(f0_uniform_bound(-1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fmax_critical() {
        let r = fmax(&critical(7.0)).unwrap();
        assert!((r.value - 0.806_89).abs() < 1e-4, "{}", r.value);
        let undamped: ResponseModel = TwoPoleParams::new(1.0, 0.0).unwrap().into();
        assert!(matches!(fmax(&undamped), Err(Error::Divergent(_))));
    }

    #[test]
    fn variance_zero_temperature_matches_closed_form() {
        let r = critical(1.0);
        let g = GateGeometry::new(PI, 2.0, 1.0).unwrap();
        let v = phase_variance(&g, &r).unwrap();
        assert!((v / 2.0 - PI * 2.0 / (4.0 * PI) * 2.0).abs() < 1e-14);
        let zero = GateGeometry::new(0.0, 2.0, 1.0).unwrap();
        assert_eq!(phase_variance(&zero, &r).unwrap(), 0.0);
    }

    #[test]
    fn thermal_variance_exceeds_ground_state() {
        // ω₀ near the silica Raman resonance
        let r = critical(8.0e13);
        let g = GateGeometry::new(PI, 30e-15, 15e-15).unwrap();
        let cold = phase_variance(&g, &r).unwrap();
        let hot = phase_variance(&g.with_temperature(300.0).unwrap(), &r).unwrap();
        let tiny = phase_variance(&g.with_temperature(1e-3).unwrap(), &r).unwrap();
        assert!(hot > cold);
        assert!((tiny - cold).abs() < 1e-9 * cold);
    }

    #[test]
    fn dirac_collapse_uses_delay() {
        let r = critical(1.0);
        let g = GateGeometry::symmetric(4.0, 3.0).unwrap();
        let a = PulseShape::dirac(0.0);
        let b = a.delayed(g.delay);
        let full = f1max_nonuniform(&g, &r, &a, &b).unwrap();
        let closed = f1max_dirac(&g, &r).unwrap();
        assert!((full.value - closed).abs() < 1e-15);
        assert!(f1max_nonuniform(&g, &r, &a, &a).is_err());
    }

    #[test]
    fn zero_phase_gives_one_third() {
        let r = critical(1.0);
        let g = GateGeometry::symmetric(0.0, 3.0).unwrap();
        let a = PulseShape::gaussian(0.0, 0.5).unwrap();
        let rep = f1max_nonuniform(&g, &r, &a, &a.delayed(g.delay)).unwrap();
        assert!((rep.value - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn pmp_errors_and_noiseless_limit() {
        let r = critical(1.0);
        assert!(matches!(
            pmp_cascade_bound(0, &r, 1.0, &PulseShape::dirac(0.0)),
            Err(Error::Domain(_))
        ));
        for n in [1, 5, 50] {
            assert!((cascade_fidelity(1.0, n, 1.0) - 1.0).abs() < 1e-15);
        }
        let single = pmp_cascade_bound(1, &r, PI, &PulseShape::dirac(0.0)).unwrap();
        assert!((single.value - fmax(&r).unwrap().value).abs() < 1e-15);
        assert_eq!(single.in_regime, Some(true));
        let slow = pmp_cascade_bound(1, &r, PI, &PulseShape::gaussian(0.0, 5.0).unwrap()).unwrap();
        assert_eq!(slow.in_regime, Some(false));
    }
}
