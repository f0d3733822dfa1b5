//! Phase imposed on pulse A by a photon in B, first under the
//! uniform-phase conditions and then with too short a walk-off.
//!
//! The response is a compact, decreasing ramp `(1 − t/t_h)²` (decreasing
//! keeps `Im H ≥ 0`); the pulses are sin² bumps of width `t_psi`.
//!
//! ```text
//! cargo run --example induced_phase
//! ```

use std::f64::consts::PI;

use xpm_fidelity::fidelity::{self, Direction, GateGeometry};
use xpm_fidelity::pulse::{PulseShape, TabulatedPulse};
use xpm_fidelity::response::{ResponseModel, TabulatedResponse};

fn bump(t: f64, width: f64) -> f64 {
    if (0.0..=width).contains(&t) {
        (PI * t / width).sin().powi(2)
    } else {
        0.0
    }
}

fn main() -> xpm_fidelity::error::Result<()> {
    let fs = 1e-15;
    let (t_h, t_psi) = (30.0 * fs, 10.0 * fs);
    let samples: Vec<(f64, f64)> = (0..=120)
        .map(|k| {
            let s = k as f64 / 120.0;
            (t_h * s, (1.0 - s).powi(2))
        })
        .collect();
    let r: ResponseModel = TabulatedResponse::from_samples(&samples)?.into();
    let a = PulseShape::Tabulated(TabulatedPulse::from_fn(|t| bump(t, t_psi), 0.0, t_psi, 41)?);

    for (label, g) in [
        ("uniform", GateGeometry::uniform(PI, t_psi, t_h)?),
        ("short walk-off", GateGeometry::new(PI, 20.0 * fs, 15.0 * fs)?),
    ] {
        let b = a.delayed(g.delay);
        let grid: Vec<f64> = (0..=10).map(|k| t_psi * k as f64 / 10.0).collect();
        let profile = fidelity::induced_phase_profile(&grid, &g, &r, &b, Direction::ASeesB)?;
        println!("{label}: t_d = {:.0} fs, T_w = {:.0} fs", g.delay / fs, g.walkoff_time / fs);
        for (t, z) in grid.iter().zip(&profile) {
            println!("  t = {:5.1} fs  |.| = {:.6}  arg = {:+.5}", t / fs, z.norm(), z.arg());
        }
        let f1 = fidelity::f1max_nonuniform(&g, &r, &a, &b)?;
        println!("  F1max bound = {:.6}\n", f1.value);
    }
    Ok(())
}
