//! Splitting a π phase over N cascaded XPM+PMP cells does not beat F_max.
//!
//! ```text
//! cargo run --example pmp_cascade
//! ```

use std::f64::consts::PI;

use xpm_fidelity::fidelity;
use xpm_fidelity::pulse::PulseShape;
use xpm_fidelity::response::{ResponseModel, TwoPoleParams};

fn main() -> xpm_fidelity::error::Result<()> {
    let r: ResponseModel = TwoPoleParams::from_normalized(1e14, 1.5)?.into();
    let pulse = PulseShape::dirac(0.0);
    println!("F_max = {:.12}", fidelity::fmax(&r)?.value);
    for n in [1, 2, 10, 100, 1000] {
        let report = fidelity::pmp_cascade_bound(n, &r, PI / n as f64, &pulse)?;
        println!(
            "N = {n:4}  phi/cell = {:.5}  bound = {:.12}  in regime: {}",
            PI / n as f64,
            report.value,
            report.in_regime.unwrap_or(false)
        );
    }
    Ok(())
}
