//! F_max across the normalized damping range, with its peak.
//!
//! ```text
//! cargo run --example fmax_vs_damping
//! ```

use xpm_fidelity::sweep::{self, Axis};

fn main() -> xpm_fidelity::error::Result<()> {
    let axis = Axis::log("gamma_norm", 0.05, 20.0, 2000)?;
    let rows = sweep::gamma_sweep(&axis)?;
    let fmax: Vec<f64> = rows.iter().map(|r| r.fmax).collect();
    let (i, peak) = sweep::find_peak_1d(&fmax)?;

    for row in rows.iter().step_by(200) {
        println!("Gamma {:9.4}  F_max {:.5}", row.gamma_norm, row.fmax);
    }
    println!("\npeak F_max = {peak:.5} at Gamma = {:.4}", rows[i].gamma_norm);
    println!("ends: {:.5} (Gamma = 0.05), {:.5} (Gamma = 20)", fmax[0], fmax[fmax.len() - 1]);
    Ok(())
}
