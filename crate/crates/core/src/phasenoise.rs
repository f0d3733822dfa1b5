//! Monte Carlo sampling of the Gaussian phase-noise process `ξ(t)`.
//!
//! Realizations are synthesized spectrally on a periodic grid of
//! `n_time` points: frequency bin `k` (spacing `Δω = 2π / (n_time·dt)`)
//! carries independent Gaussian cosine and sine amplitudes whose variance
//! is the spectral power integrated over the bin. The process is exactly
//! stationary and Gaussian, and its per-time variance equals
//! `∫₀^cutoff G(ω) dω` regardless of bin resolution.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`; realization `i` uses stream `i`. An ensemble is
//! therefore bit-identical for a given seed whatever the thread count.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fidelity::{GateGeometry, BOLTZMANN, HBAR};
use crate::quad::{self, Tolerance};
use crate::response::ResponseModel;

/// Density at the cutoff must fall below this fraction of the peak.
pub const CUTOFF_FRACTION: f64 = 1e-6;

const BIN_TOLERANCE: Tolerance = Tolerance::new(1e-16, 1e-10);

type Density = dyn Fn(f64) -> f64 + Send + Sync;

/// One-sided spectral density `G(ω)` of `ξ`, normalized so that
/// `⟨ξ²⟩ = ∫₀^∞ G(ω) dω`. Treated as zero above `cutoff`.
#[derive(Clone)]
pub struct NoiseSpectrum {
    density: Arc<Density>,
    cutoff: f64,
}

impl std::fmt::Debug for NoiseSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseSpectrum").field("cutoff", &self.cutoff).finish()
    }
}

impl NoiseSpectrum {
    /// Wrap a density; checks non-negativity and the cutoff decay on a
    /// uniform grid.
    pub fn new(density: impl Fn(f64) -> f64 + Send + Sync + 'static, cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::invalid("cutoff", format!("must be > 0, got {cutoff}")));
        }
        let spec = NoiseSpectrum {
            density: Arc::new(density),
            cutoff,
        };
        let n = 2048;
        let mut peak: f64 = 0.0;
        for i in 1..=n {
            let w = cutoff * i as f64 / n as f64;
            let d = spec.density(w);
            if !(d >= 0.0) {
                return Err(Error::invalid("density", format!("negative or NaN at ω = {w:e}: {d:e}")));
            }
            peak = peak.max(d);
        }
        let edge = (spec.density)(cutoff);
        if peak > 0.0 && edge >= CUTOFF_FRACTION * peak {
            return Err(Error::invalid(
                "cutoff",
                format!("density at cutoff {edge:e} is not below {CUTOFF_FRACTION:e} of peak {peak:e}"),
            ));
        }
        Ok(spec)
    }

    pub fn zero() -> Self {
        NoiseSpectrum {
            density: Arc::new(|_| 0.0),
            cutoff: 1.0,
        }
    }

    /// Band-limited white spectrum with total variance `variance` on
    /// `[0, cutoff)`.
    pub fn flat(variance: f64, cutoff: f64) -> Result<Self> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(Error::invalid("variance", format!("must be >= 0, got {variance}")));
        }
        let level = variance / cutoff;
        Self::new(move |w| if w < cutoff { level } else { 0.0 }, cutoff)
    }

    /// Phase-noise spectrum for one XPM interaction:
    /// `G(ω) = (|φ| T_w / π) · Im H(ω) · coth(ħω / 2k_B T)`.
    pub fn phase_noise(g: &GateGeometry, r: &ResponseModel) -> Result<Self> {
        let strength = g.phi.abs() * g.walkoff_time / PI;
        if strength == 0.0 {
            return Ok(Self::zero());
        }
        let thermal = if g.temperature > 0.0 {
            HBAR / (2.0 * BOLTZMANN * g.temperature)
        } else {
            0.0
        };
        // Probe the response once for pole errors.
        let scale = r.frequency_scale()?;
        let model = r.clone();
        let density = move |w: f64| -> f64 {
            if w <= 0.0 {
                return 0.0;
            }
            let im = model.spectrum(w).map(|h| h.im.max(0.0)).unwrap_or(0.0);
            let occupation = if thermal > 0.0 {
                let x = thermal * w;
                if x < 1e-4 {
                    1.0 / x + x / 3.0
                } else {
                    1.0 / x.tanh()
                }
            } else {
                1.0
            };
            strength * im * occupation
        };
        let cutoff = find_cutoff(&density, scale, r.frequency_cap())?;
        Self::new(density, cutoff)
    }

    pub fn density(&self, omega: f64) -> f64 {
        if omega < 0.0 || omega >= self.cutoff {
            0.0
        } else {
            (self.density)(omega)
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `∫₀^cutoff G(ω) dω`.
    pub fn variance(&self) -> Result<f64> {
        self.integrate(0.0, self.cutoff)
    }

    /// `∫₀^cutoff G(ω) cos(ωτ) dω`.
    pub fn autocovariance(&self, tau: f64) -> Result<f64> {
        let n = ((self.cutoff * tau.abs() / PI).ceil() as usize).clamp(1, 100_000);
        let mut total = 0.0;
        for i in 0..n {
            let a = self.cutoff * i as f64 / n as f64;
            let b = self.cutoff * (i + 1) as f64 / n as f64;
            total += quad::integrate(|w| self.density(w) * (w * tau).cos(), a, b, &[], BIN_TOLERANCE)?.value;
        }
        Ok(total)
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let hi = b.min(self.cutoff);
        if hi <= a {
            return Ok(0.0);
        }
        Ok(quad::integrate(|w| self.density(w), a, hi, &[], BIN_TOLERANCE)?.value)
    }

    /// Power in each synthesis bin `k = 1..=n_time/2`.
    fn bin_powers(&self, n_time: usize, dt: f64) -> Result<Vec<f64>> {
        let d_omega = 2.0 * PI / (n_time as f64 * dt);
        let half = n_time / 2;
        (1..=half)
            .map(|k| {
                let lo = if k == 1 { 0.0 } else { (k as f64 - 0.5) * d_omega };
                let hi = if k == half { self.cutoff } else { (k as f64 + 0.5) * d_omega };
                self.integrate(lo, hi)
            })
            .collect()
    }
}

/// Smallest frequency past the peak where the density drops below
/// `CUTOFF_FRACTION` of the peak, on a geometric grid.
fn find_cutoff(density: &dyn Fn(f64) -> f64, scale: f64, cap: f64) -> Result<f64> {
    let ratio: f64 = 1.05;
    let mut w = scale * 1e-3;
    let mut peak: f64 = 0.0;
    while w < scale * 10.0 && w < cap {
        peak = peak.max(density(w));
        w *= ratio;
    }
    if peak == 0.0 {
        return Err(Error::Domain("phase-noise spectrum vanishes near the response scale".into()));
    }
    w = scale;
    while w < cap {
        if density(w) < CUTOFF_FRACTION * peak && w > scale {
            return Ok(w);
        }
        w *= ratio;
        if w > scale * 1e12 {
            break;
        }
    }
    if cap.is_finite() {
        Ok(cap)
    } else {
        Err(Error::Domain("phase-noise spectrum does not decay to the cutoff level".into()))
    }
}

/// Matrix of `ξ` samples: rows are realizations, columns the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEnsemble {
    samples: Vec<f64>,
    n_real: usize,
    n_time: usize,
    dt: f64,
    seed: u64,
    bin_powers: Vec<f64>,
}

impl NoiseEnsemble {
    pub fn n_realizations(&self) -> usize {
        self.n_real
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realization(&self, i: usize) -> &[f64] {
        &self.samples[i * self.n_time..(i + 1) * self.n_time]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_real).map(move |i| self.samples[i * self.n_time + j])
    }

    /// Exact variance of the synthesized process.
    pub fn synthesized_variance(&self) -> f64 {
        self.bin_powers.iter().sum()
    }

    /// Exact autocovariance of the synthesized process at lag `lag·dt`.
    pub fn synthesized_autocovariance(&self, lag: usize) -> f64 {
        let n = self.n_time as f64;
        self.bin_powers
            .iter()
            .enumerate()
            .map(|(i, p)| p * (2.0 * PI * (i + 1) as f64 * lag as f64 / n).cos())
            .sum()
    }

    /// CSV dump `realization,t_fs,xi_rad` of the first `max_rows`
    /// realizations.
    pub fn write_csv<W: Write>(&self, out: W, max_rows: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["realization", "t_fs", "xi_rad"]).map_err(csv_io)?;
        for i in 0..self.n_real.min(max_rows) {
            for (j, xi) in self.realization(i).iter().enumerate() {
                w.serialize((i, j as f64 * self.dt * 1e15, xi)).map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Draw `n_real` realizations of the process on `n_time` points spaced
/// `dt` apart.
pub fn sample_process(spec: &NoiseSpectrum, n_real: usize, n_time: usize, dt: f64, seed: u64) -> Result<NoiseEnsemble> {
    if n_real == 0 {
        return Err(Error::Config("need at least one realization".into()));
    }
    if n_time < 2 || !n_time.is_power_of_two() {
        return Err(Error::Config(format!("n_time must be a power of two >= 2, got {n_time}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    if dt * spec.cutoff() > PI * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "aliasing: dt·cutoff = {:.4} exceeds π (dt = {dt:e} s, cutoff = {:e} rad/s)",
            dt * spec.cutoff(),
            spec.cutoff()
        )));
    }
    let powers = spec.bin_powers(n_time, dt)?;
    let amplitudes: Vec<f64> = powers.iter().map(|p| p.sqrt()).collect();
    let half = n_time / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n_time);

    let mut samples = vec![0.0; n_real * n_time];
    samples
        .par_chunks_mut(n_time)
        .enumerate()
        .for_each_init(
            || (vec![Complex64::new(0.0, 0.0); n_time], vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()]),
            |(buf, scratch), (i, row)| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for k in 1..=half {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    let b: f64 = StandardNormal.sample(&mut rng);
                    let amp = amplitudes[k - 1];
                    // Re Σ A_k (a − ib) e^{iω_k t} = Σ A_k (a cos ω_k t + b sin ω_k t);
                    // at the Nyquist bin the sine term vanishes on the grid.
                    buf[k] = if k == half {
                        Complex64::new(amp * a, 0.0)
                    } else {
                        Complex64::new(amp * a, -amp * b)
                    };
                }
                fft.process_with_scratch(buf, scratch);
                for (x, z) in row.iter_mut().zip(buf.iter()) {
                    *x = z.re;
                }
            },
        );

    Ok(NoiseEnsemble {
        samples,
        n_real,
        n_time,
        dt,
        seed,
        bin_powers: powers,
    })
}

/// Monte Carlo estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: Complex64,
    pub stderr: f64,
}

fn jackknife_mean(values: &[Complex64]) -> McEstimate {
    let n = values.len();
    let total: Complex64 = values.iter().sum();
    let mean = total / n as f64;
    if n < 2 {
        return McEstimate {
            estimate: mean,
            stderr: f64::NAN,
        };
    }
    // Leave-one-out means θ₍ᵢ₎ = (S − zᵢ)/(n − 1).
    let nf = n as f64;
    let spread: f64 = values
        .iter()
        .map(|z| {
            let loo = (total - z) / (nf - 1.0);
            (loo - mean).norm_sqr()
        })
        .sum();
    McEstimate {
        estimate: mean,
        stderr: ((nf - 1.0) / nf * spread).sqrt(),
    }
}

/// `⟨e^{iξ(t₀)}⟩` at the first grid time.
pub fn estimate_char(ens: &NoiseEnsemble) -> McEstimate {
    estimate_char_at(ens, 0)
}

pub fn estimate_char_at(ens: &NoiseEnsemble, column: usize) -> McEstimate {
    let values: Vec<Complex64> = ens.column(column).map(|xi| Complex64::from_polar(1.0, xi)).collect();
    jackknife_mean(&values)
}

/// `⟨e^{i[ξ(t₀+τ) − ξ(t₀)]}⟩`; `tau` must be a grid multiple of `dt`.
pub fn estimate_coherence(ens: &NoiseEnsemble, tau: f64) -> Result<McEstimate> {
    let steps = tau / ens.dt;
    let lag = steps.round();
    if !(tau >= 0.0) || (steps - lag).abs() > 1e-9 * lag.max(1.0) || lag as usize >= ens.n_time {
        return Err(Error::Domain(format!(
            "tau = {tau:e} s is not a grid lag (dt = {:e} s, {} points)",
            ens.dt, ens.n_time
        )));
    }
    let lag = lag as usize;
    let values: Vec<Complex64> = (0..ens.n_real)
        .map(|i| {
            let row = ens.realization(i);
            Complex64::from_polar(1.0, row[lag] - row[0])
        })
        .collect();
    Ok(jackknife_mean(&values))
}
