//! F1 heat map over phase and walk-off time for delta pulses, using a
//! two-pole fit to the silica Raman response (τ1 = 12.2 fs, τ2 = 32 fs).
//!
//! ```text
//! cargo run --release --example walkoff_heatmap
//! ```

use xpm_fidelity::response::{ResponseModel, TwoPoleParams};
use xpm_fidelity::sweep::{self, PulseKind, SweepSpec};

fn main() -> xpm_fidelity::error::Result<()> {
    let (tau1, tau2) = (12.2e-15_f64, 32e-15_f64);
    let omega0 = (tau1.powi(-2) + tau2.powi(-2)).sqrt();
    let r: ResponseModel = TwoPoleParams::new(omega0, 2.0 / tau2)?.into();

    let spec = SweepSpec::default_f1(PulseKind::Dirac).with_resolution(64, 64)?;
    let map = sweep::heatmap_f1(&spec, &r)?;
    let peak = map.peak.expect("non-empty map");
    println!(
        "coarse peak {:.5} at phi = {:.3}, T_w = {:.2} fs",
        peak.coarse_value,
        map.phi[peak.index.0],
        map.walkoff[peak.index.1] * 1e15
    );
    println!(
        "refined peak {:.5} at phi = {:.4}, T_w = {:.3} fs",
        peak.value,
        peak.phi,
        peak.walkoff * 1e15
    );

    // A coarse text rendering: rows are T_w, columns phi.
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#'];
    for j in (0..map.walkoff.len()).rev().step_by(4) {
        let line: String = (0..map.phi.len())
            .map(|i| {
                let v = ((map.values[i][j] - 1.0 / 3.0) / 0.5).clamp(0.0, 0.999);
                shades[(v * shades.len() as f64) as usize]
            })
            .collect();
        println!("{:7.1} fs |{line}|", map.walkoff[j] * 1e15);
    }
    Ok(())
}
