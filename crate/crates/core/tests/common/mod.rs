#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use xpm_fidelity::pulse::{PulseShape, TabulatedPulse};
use xpm_fidelity::response::{ResponseModel, TabulatedResponse};

pub const FS: f64 = 1e-15;

/// A compactly supported response and pulse, with the support widths that
/// enter the uniform-phase conditions.
pub struct CompactConfig {
    pub response: ResponseModel,
    pub support: f64,
    pub pulse: PulseShape,
    pub t_psi: f64,
}

/// Decreasing ramp `(1 − t/S)^p` (so `Im H ≥ 0`) and a sin² pulse of
/// random width, or a delta pulse.
pub fn random_compact_config(rng: &mut impl Rng) -> CompactConfig {
    let support = rng.gen_range(5.0..100.0) * FS;
    let power = rng.gen_range(0.5..3.0);
    let n = rng.gen_range(40..160);
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            (support * s, (1.0 - s).powf(power))
        })
        .collect();
    let response = TabulatedResponse::from_samples(&samples).unwrap().into();
    let (pulse, t_psi) = if rng.gen_bool(0.25) {
        (PulseShape::dirac(0.0), 0.0)
    } else {
        let width = rng.gen_range(1.0..50.0) * FS;
        let m = rng.gen_range(16..64);
        let shape = move |t: f64| (PI * t / width).sin().powi(2);
        (
            PulseShape::Tabulated(TabulatedPulse::from_fn(shape, 0.0, width, m).unwrap()),
            width,
        )
    };
    CompactConfig {
        response,
        support,
        pulse,
        t_psi,
    }
}
