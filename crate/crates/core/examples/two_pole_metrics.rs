//! RMS duration, integrated |Im H| and F_max for two-pole responses in all
//! three damping regimes.
//!
//! ```text
//! cargo run --example two_pole_metrics
//! ```

use xpm_fidelity::fidelity;
use xpm_fidelity::response::{self, ResponseModel, TwoPoleParams};

fn main() -> xpm_fidelity::error::Result<()> {
    println!("{:>8} {:>14} {:>10} {:>12} {:>8}", "Gamma", "regime", "w0*t_h", "him_l1/w0", "F_max");
    for gamma in [0.5, 1.0, std::f64::consts::SQRT_2, 2.0, 3.0, 10.0] {
        let p = TwoPoleParams::from_normalized(1.0, gamma)?;
        let r = ResponseModel::from(p);
        let m = response::metrics(&r)?;
        let f = fidelity::fmax(&r)?;
        println!(
            "{gamma:8.4} {:>14} {:10.6} {:12.8} {:8.5}",
            format!("{:?}", p.regime()),
            m.t_h,
            m.him_l1,
            f.value
        );
    }

    // The closed form for the integral against an independent quadrature.
    let r: ResponseModel = TwoPoleParams::from_normalized(1.0, 3.0)?.into();
    println!(
        "\nGamma = 3: closed form {:.12}, quadrature {:.12}",
        response::him_l1(&r)?,
        response::him_l1_quadrature(&r)?
    );
    Ok(())
}
