//! Load a tabulated response from CSV and compute its metrics. The table
//! here is generated from the damped-oscillator Raman model
//! `h ∝ e^{−t/τ2} sin(t/τ1)` with τ1 = 12.2 fs and τ2 = 32 fs; pass a path
//! to use a measured file instead (header `t_fs,h`).
//!
//! ```text
//! cargo run --release --example tabulated_response [response.csv]
//! ```

use std::fs::File;
use std::io::BufReader;

use xpm_fidelity::fidelity;
use xpm_fidelity::response::{self, ResponseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = match std::env::args().nth(1) {
        Some(path) => response::load_tabulated(BufReader::new(File::open(path)?))?,
        None => {
            let (tau1, tau2) = (12.2, 32.0);
            let mut csv = String::from("# damped-oscillator model\nt_fs,h\n");
            for k in 0..=4000 {
                let t = 0.1 * k as f64;
                csv.push_str(&format!("{t},{}\n", (-t / tau2).exp() * (t / tau1).sin()));
            }
            response::load_tabulated(csv.as_bytes())?
        }
    };
    println!(
        "{} samples, scale factor {:.4e}{}",
        table.times().len(),
        table.scale_factor(),
        if table.normalization_applied() { " (normalized)" } else { "" }
    );
    let r = ResponseModel::from(table);
    let m = response::metrics(&r)?;
    println!("t_h          = {:.3} fs", m.t_h * 1e15);
    println!("∫dω |Im H|   = {:.4e} rad/s", m.him_l1);
    println!("F_max        = {:.4}", fidelity::fmax(&r)?.value);
    Ok(())
}
