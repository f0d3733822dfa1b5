//! Sample the phase noise for a critically damped response and compare
//! <e^{iξ}> and the two-time coherence with their Gaussian predictions.
//!
//! ```text
//! cargo run --release --example monte_carlo_oracle
//! ```

use std::f64::consts::PI;

use xpm_fidelity::fidelity::{self, GateGeometry};
use xpm_fidelity::phasenoise::{self, NoiseSpectrum};
use xpm_fidelity::response::{self, ResponseModel, TwoPoleParams};

fn main() -> xpm_fidelity::error::Result<()> {
    let r: ResponseModel = TwoPoleParams::from_normalized(1e14, 2.0)?.into();
    let t_h = response::rms_duration(&r)?;
    let g = GateGeometry::symmetric(PI, 2.0 * t_h)?;

    let spectrum = NoiseSpectrum::phase_noise(&g, &r)?;
    let dt = PI / spectrum.cutoff();
    let ens = phasenoise::sample_process(&spectrum, 100_000, 256, dt, 42)?;

    let variance = fidelity::phase_variance(&g, &r)?;
    let est = phasenoise::estimate_char(&ens);
    println!("<xi^2> analytic {variance:.6}, synthesized {:.6}", ens.synthesized_variance());
    println!(
        "<e^(i xi)> = {:.5} {:+.5}i ± {:.5}   analytic {:.5}",
        est.estimate.re,
        est.estimate.im,
        est.stderr,
        (-0.5 * variance).exp()
    );

    println!("\n   tau (fs)   estimate   exp(-(R(0)-R(tau)))");
    for lag in [0, 1, 2, 4, 8, 16, 32, 64, 128] {
        let c = phasenoise::estimate_coherence(&ens, lag as f64 * dt)?;
        let exact = (-(ens.synthesized_variance() - ens.synthesized_autocovariance(lag))).exp();
        println!("{:10.3} {:10.5} {:12.5}", lag as f64 * dt * 1e15, c.estimate.re, exact);
    }
    Ok(())
}
