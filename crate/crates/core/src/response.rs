//! XPM response functions and the two scalar metrics that drive the
//! fidelity bounds: the RMS duration `t_h` of `h(t)` and the full-line
//! integral `∫dω |Im H(ω)|`.
//!
//! Two families are supported. The single-resonance two-pole model
//! `H(ω) = ω₀² / (ω₀² − ω² − iωγ)` has closed forms for everything. A
//! tabulated response is a causal, piecewise-linear `h(t)` built from
//! samples (for instance a measured Raman response), normalized to unit
//! area on ingestion.

use std::f64::consts::PI;
use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// `|Γ − 2|` below this is treated as critical damping.
pub const CRITICAL_TOLERANCE: f64 = 1e-6;

/// Largest tolerated imaginary residue (relative) of the closed-form
/// `∫dω |Im H|` evaluation.
pub const RESIDUE_TOLERANCE: f64 = 1e-8;

/// Tolerated negative excursion of `Im H(ω)` for tabulated data.
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

pub const MIN_TABULATED_SAMPLES: usize = 8;

const FEMTOSECOND: f64 = 1e-15;

/// Damping regime of a two-pole response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

/// Parameters of the single-resonance two-pole response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoleParams {
    omega0: f64,
    gamma: f64,
}

impl TwoPoleParams {
    /// `omega0` is the resonance (rad/s, > 0) and `gamma` the damping rate
    /// (rad/s, ≥ 0).
    pub fn new(omega0: f64, gamma: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::invalid("omega0", format!("must be finite and > 0, got {omega0}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid("gamma", format!("must be finite and >= 0, got {gamma}")));
        }
        Ok(TwoPoleParams { omega0, gamma })
    }

    /// Build from the normalized damping `Γ = γ/ω₀`.
    pub fn from_normalized(omega0: f64, gamma_norm: f64) -> Result<Self> {
        if !(gamma_norm.is_finite() && gamma_norm >= 0.0) {
            return Err(Error::invalid("gamma_norm", format!("must be finite and >= 0, got {gamma_norm}")));
        }
        Self::new(omega0, gamma_norm * omega0)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `Γ = γ/ω₀`.
    pub fn gamma_norm(&self) -> f64 {
        self.gamma / self.omega0
    }

    pub fn regime(&self) -> Regime {
        let g = self.gamma_norm();
        if (g - 2.0).abs() < CRITICAL_TOLERANCE {
            Regime::Critical
        } else if g < 2.0 {
            Regime::Underdamped
        } else {
            Regime::Overdamped
        }
    }

    pub fn h(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let w0 = self.omega0;
        let a = 0.5 * self.gamma;
        match self.regime() {
            Regime::Critical => w0 * w0 * t * (-w0 * t).exp(),
            Regime::Underdamped => {
                let wd = (w0 * w0 - a * a).sqrt();
                w0 * w0 * (-a * t).exp() * (wd * t).sin() / wd
            }
            Regime::Overdamped => {
                // e^{-at} sinh(κt) written with two decaying exponentials;
                // a − κ = ω₀²/(a + κ) avoids cancellation for large Γ.
                let kappa = (a * a - w0 * w0).sqrt();
                let slow = w0 * w0 / (a + kappa);
                let fast = a + kappa;
                w0 * w0 * 0.5 * ((-slow * t).exp() - (-fast * t).exp()) / kappa
            }
        }
    }

    /// `∫₀ᵗ h(s) ds`.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let w0 = self.omega0;
        let a = 0.5 * self.gamma;
        match self.regime() {
            Regime::Critical => {
                let x = w0 * t;
                -(-x).exp_m1() - x * (-x).exp()
            }
            Regime::Underdamped => {
                let wd = (w0 * w0 - a * a).sqrt();
                1.0 - (-a * t).exp() * ((wd * t).cos() + a / wd * (wd * t).sin())
            }
            Regime::Overdamped => {
                let kappa = (a * a - w0 * w0).sqrt();
                let slow = w0 * w0 / (a + kappa);
                let fast = a + kappa;
                // 1 − e^{-at}[cosh κt + (a/κ) sinh κt]
                let es = (-slow * t).exp();
                let ef = (-fast * t).exp();
                1.0 - 0.5 * (es + ef) - 0.5 * a / kappa * (es - ef)
            }
        }
    }

    /// `H(ω) = ω₀² / (ω₀² − ω² − iωγ)`.
    pub fn spectrum(&self, omega: f64) -> Result<Complex64> {
        let w0sq = self.omega0 * self.omega0;
        let den = Complex64::new(w0sq - omega * omega, -omega * self.gamma);
        if den.norm() == 0.0 {
            return Err(Error::Pole { omega });
        }
        Ok(Complex64::new(w0sq, 0.0) / den)
    }

    /// Closed-form RMS duration of `h(t)` (h²-weighted).
    pub fn rms_duration(&self) -> Result<f64> {
        if self.gamma == 0.0 {
            return Err(Error::Divergent("undamped response has infinite RMS duration"));
        }
        Ok(normalized_rms_duration(self.gamma_norm()) / self.omega0)
    }

    /// Full-line `∫dω |Im H(ω)|` from the closed form.
    pub fn him_l1(&self) -> Result<f64> {
        Ok(normalized_him_l1(self.gamma_norm())? * self.omega0)
    }
}

/// `ω₀ t_h` as a function of `Γ`.
pub fn normalized_rms_duration(gamma_norm: f64) -> f64 {
    let g2 = gamma_norm * gamma_norm;
    (1.0 / g2 + g2 / 4.0 - 0.5).sqrt()
}

/// `(∫dω |Im H|)/ω₀` as a function of `Γ`, evaluated through the
/// arctanh closed form in complex arithmetic.
pub fn normalized_him_l1(gamma_norm: f64) -> Result<f64> {
    if !(gamma_norm.is_finite() && gamma_norm >= 0.0) {
        return Err(Error::invalid("gamma_norm", format!("must be finite and >= 0, got {gamma_norm}")));
    }
    if gamma_norm == 0.0 {
        // Lorentzian limit: Im H → (π ω₀/2) δ(ω − ω₀) on each half-line.
        return Ok(PI);
    }
    if (gamma_norm - 2.0).abs() < CRITICAL_TOLERANCE {
        return Ok(2.0);
    }
    let g = Complex64::new(gamma_norm, 0.0);
    let disc = (g * g - 4.0).sqrt();
    let arg = (g * g - 2.0) / (g * disc);
    let value = (Complex64::new(0.0, PI) + 2.0 * atanh_below_cut(arg)) / disc;
    let residue = value.im.abs() / value.re.abs().max(f64::MIN_POSITIVE);
    if residue > RESIDUE_TOLERANCE {
        return Err(Error::Consistency {
            what: "closed-form ∫|Im H| is not real",
            residue,
        });
    }
    Ok(value.re)
}

/// Principal `atanh`, except on the real cut `|x| > 1` where the value is
/// the limit from below the axis.
fn atanh_below_cut(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re.abs() > 1.0 {
        Complex64::new((1.0 / z.re).atanh(), -0.5 * PI)
    } else {
        z.atanh()
    }
}

/// Options for ingesting tabulated data.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Allowed negative excursion of `Im H(ω)` on the checked band.
    pub positivity_tolerance: f64,
    /// Skip the spectral positivity check entirely.
    pub check_positivity: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            positivity_tolerance: POSITIVITY_TOLERANCE,
            check_positivity: true,
        }
    }
}

/// A causal, piecewise-linear response built from samples and normalized
/// to unit area. `h ≡ 0` outside the sampled support.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse {
    times: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
    /// Slope jumps `s_{j-1} − s_j` at each node, zero slope outside.
    slope_jumps: Vec<f64>,
    /// `Σ|slope_jumps|`, which bounds cancellation in the node form.
    slope_variation: f64,
    /// Common spacing when the grid is uniform.
    uniform_step: Option<f64>,
    scale_factor: f64,
    normalization_applied: bool,
}

impl TabulatedResponse {
    /// Samples are `(time in seconds, value)`; rows are numbered from 1 in
    /// error messages.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        Self::from_samples_with(samples, LoadOptions::default())
    }

    pub fn from_samples_with(samples: &[(f64, f64)], opts: LoadOptions) -> Result<Self> {
        let rows: Vec<u64> = (1..=samples.len() as u64).collect();
        build_tabulated(samples, &rows, opts)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Normalized sample values (1/s).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Factor applied to the raw values to reach unit area.
    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    pub fn normalization_applied(&self) -> bool {
        self.normalization_applied
    }

    /// Last sampled time; `h` vanishes beyond it.
    pub fn support_end(&self) -> f64 {
        *self.times.last().expect("validated non-empty")
    }

    /// Nyquist frequency of the finest sample spacing.
    pub fn nyquist(&self) -> f64 {
        let dt = self
            .times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        PI / dt
    }

    /// Index of the segment `[t_k, t_{k+1})` containing `t`, if any.
    fn segment(&self, t: f64) -> Option<usize> {
        if t < self.times[0] || t >= self.support_end() {
            return None;
        }
        let k = self.times.partition_point(|&x| x <= t);
        Some(k - 1)
    }

    pub fn h(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(k) => {
                let (t0, t1) = (self.times[k], self.times[k + 1]);
                let s = (t - t0) / (t1 - t0);
                self.values[k] + s * (self.values[k + 1] - self.values[k])
            }
            None if t == self.support_end() => self.values[self.values.len() - 1],
            None => 0.0,
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return 0.0;
        }
        match self.segment(t) {
            Some(k) => {
                let dt = t - self.times[k];
                let slope = (self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k]);
                self.cumulative[k] + self.values[k] * dt + 0.5 * slope * dt * dt
            }
            None => self.cumulative[self.cumulative.len() - 1],
        }
    }

    /// Exact Fourier transform `∫ h(t) e^{iωt} dt` of the piecewise-linear
    /// interpolant.
    pub fn spectrum(&self, omega: f64) -> Complex64 {
        // The node form divides by ω²; use it only where the cancellation
        // it suffers stays below ~1e-12 in H.
        if omega * omega >= 0.06 * self.slope_variation {
            self.spectrum_nodes(omega)
        } else {
            self.spectrum_segments(omega)
        }
    }

    /// `H = (v_N E_N − v_0 E_0)/(iω) + Σ_j d_j E_j / ω²` with
    /// `E_j = e^{iωt_j}` and `d_j` the slope jumps.
    fn spectrum_nodes(&self, omega: f64) -> Complex64 {
        const RESYNC: usize = 256;
        let mut sum = Complex64::new(0.0, 0.0);
        match self.uniform_step {
            Some(dt) => {
                let rot = Complex64::from_polar(1.0, omega * dt);
                let mut e = Complex64::new(0.0, 0.0);
                for (j, d) in self.slope_jumps.iter().enumerate() {
                    if j % RESYNC == 0 {
                        e = Complex64::from_polar(1.0, omega * self.times[j]);
                    }
                    sum += e * *d;
                    e *= rot;
                }
            }
            None => {
                for (t, d) in self.times.iter().zip(&self.slope_jumps) {
                    sum += Complex64::from_polar(*d, omega * t);
                }
            }
        }
        let n = self.times.len() - 1;
        let ends = Complex64::from_polar(self.values[n], omega * self.times[n])
            - Complex64::from_polar(self.values[0], omega * self.times[0]);
        ends / Complex64::new(0.0, omega) + sum / (omega * omega)
    }

    fn spectrum_segments(&self, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.times.len() - 1 {
            let t0 = self.times[k];
            let dt = self.times[k + 1] - t0;
            let z = Complex64::new(0.0, omega * dt);
            let (p0, p1) = linear_segment_weights(z);
            let phase = Complex64::new(0.0, omega * t0).exp();
            acc += phase * dt * (p0 * self.values[k] + p1 * self.values[k + 1]);
        }
        acc
    }

    /// RMS duration of `h²` over the sampled support. Exact for the
    /// piecewise-linear interpolant.
    pub fn rms_duration(&self) -> Result<f64> {
        let segments = || self.times.windows(2).zip(self.values.windows(2));
        let moment = |weight: &dyn Fn(f64) -> f64| -> f64 {
            segments()
                .map(|(t, v)| {
                    let slope = (v[1] - v[0]) / (t[1] - t[0]);
                    quad::gauss_legendre3(
                        |x| {
                            let h = v[0] + slope * (x - t[0]);
                            weight(x) * h * h
                        },
                        t[0],
                        t[1],
                    )
                })
                .sum()
        };
        let m0 = moment(&|_| 1.0);
        if m0 <= 0.0 {
            return Err(Error::Divergent("tabulated response has zero energy"));
        }
        let mean = moment(&|t| t) / m0;
        let var = moment(&|t| (t - mean) * (t - mean)) / m0;
        Ok(var.max(0.0).sqrt())
    }

    /// Full-line `∫dω |Im H(ω)|` up to the sampling Nyquist frequency.
    ///
    /// `H` oscillates in `ω` with period about `2π / t_end`, so the range
    /// is cut into chunks a few oscillations wide, each integrated
    /// adaptively.
    pub fn him_l1(&self) -> Result<f64> {
        let th = self.rms_duration()?;
        let nyquist = self.nyquist();
        let w0 = if th > 0.0 { 1.0 / th } else { nyquist / 64.0 };
        let chunk = (8.0 * PI / self.support_end()).min(w0);
        let n = (nyquist / chunk).ceil().max(1.0) as usize;
        let tol = Tolerance::new(1e-11 * w0, 1e-10).with_max_intervals(400);
        let mut total = 0.0;
        for k in 0..n {
            let a = nyquist * k as f64 / n as f64;
            let b = nyquist * (k + 1) as f64 / n as f64;
            total += quad::integrate(|w| self.spectrum(w).im.abs(), a, b, &[], tol)?.value;
        }
        Ok(2.0 * total)
    }

    fn check_positivity(&self, tolerance: f64) -> Result<()> {
        let band = 0.5 * self.nyquist();
        let n = 1024;
        for i in 1..=n {
            let w = band * i as f64 / n as f64;
            let im = self.spectrum(w).im;
            if im < -tolerance {
                return Err(Error::validation(
                    None,
                    format!("spectral positivity violated: Im H({w:.6e} rad/s) = {im:.3e}"),
                ));
            }
        }
        Ok(())
    }
}

/// `(∫₀¹ (1−s) e^{zs} ds, ∫₀¹ s e^{zs} ds)`.
fn linear_segment_weights(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.25 {
        // Σ zⁿ/(n+2)!  and  Σ (n+1) zⁿ/(n+2)!
        let mut p0 = Complex64::new(0.0, 0.0);
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut fact = 2.0;
        for n in 0..12 {
            p0 += zn / fact;
            p1 += zn * (n as f64 + 1.0) / fact;
            zn *= z;
            fact *= n as f64 + 3.0;
        }
        (p0, p1)
    } else {
        let ez = z.exp();
        let z2 = z * z;
        ((ez - 1.0 - z) / z2, (ez * (z - 1.0) + 1.0) / z2)
    }
}

fn build_tabulated(samples: &[(f64, f64)], rows: &[u64], opts: LoadOptions) -> Result<TabulatedResponse> {
    if samples.len() < MIN_TABULATED_SAMPLES {
        return Err(Error::validation(
            None,
            format!(
                "fewer than {MIN_TABULATED_SAMPLES} samples (got {})",
                samples.len()
            ),
        ));
    }
    for (i, &(t, v)) in samples.iter().enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::validation(Some(rows[i]), "non-finite sample"));
        }
        if t < 0.0 {
            return Err(Error::validation(
                Some(rows[i]),
                format!("negative time {t:e} s violates causality"),
            ));
        }
        if i > 0 && t <= samples[i - 1].0 {
            return Err(Error::validation(
                Some(rows[i]),
                "times must be strictly increasing",
            ));
        }
    }
    if samples.iter().all(|&(_, v)| v == 0.0) {
        return Err(Error::validation(None, "all sample values are zero"));
    }
    let area: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    if !(area > 0.0) {
        return Err(Error::validation(
            None,
            format!("response area {area:e} is not positive"),
        ));
    }
    let scale_factor = 1.0 / area;
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let values: Vec<f64> = samples.iter().map(|s| s.1 * scale_factor).collect();
    let mut cumulative = Vec::with_capacity(times.len());
    cumulative.push(0.0);
    for k in 0..times.len() - 1 {
        let prev = cumulative[k];
        cumulative.push(prev + 0.5 * (times[k + 1] - times[k]) * (values[k] + values[k + 1]));
    }
    let slopes: Vec<f64> = (0..times.len() - 1)
        .map(|k| (values[k + 1] - values[k]) / (times[k + 1] - times[k]))
        .collect();
    let slope_jumps: Vec<f64> = (0..times.len())
        .map(|j| {
            let before = if j == 0 { 0.0 } else { slopes[j - 1] };
            let after = slopes.get(j).copied().unwrap_or(0.0);
            before - after
        })
        .collect();
    let slope_variation = slope_jumps.iter().map(|d| d.abs()).sum();
    let step = times[1] - times[0];
    let uniform_step = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step)
        .then_some(step);
    let resp = TabulatedResponse {
        times,
        values,
        cumulative,
        slope_jumps,
        slope_variation,
        uniform_step,
        scale_factor,
        normalization_applied: (scale_factor - 1.0).abs() > 0.0,
    };
    if opts.check_positivity {
        resp.check_positivity(opts.positivity_tolerance)?;
    }
    Ok(resp)
}

/// Read a tabulated response from CSV: header `t_fs,h`, times in
/// femtoseconds, `#` comment lines ignored.
pub fn load_tabulated<R: Read>(source: R) -> Result<TabulatedResponse> {
    load_tabulated_with(source, LoadOptions::default())
}

pub fn load_tabulated_with<R: Read>(source: R, opts: LoadOptions) -> Result<TabulatedResponse> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["t_fs", "h"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `t_fs,h`, found `{}`", names.join(",")),
        });
    }
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column `{name}`: cannot parse `{raw}` as a number"),
            })
        };
        let t_fs = field(0, "t_fs")?;
        let h = field(1, "h")?;
        samples.push((t_fs * FEMTOSECOND, h));
        rows.push(line);
    }
    build_tabulated(&samples, &rows, opts)
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// An XPM response function.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseModel {
    TwoPole(TwoPoleParams),
    Tabulated(TabulatedResponse),
}

impl From<TwoPoleParams> for ResponseModel {
    fn from(p: TwoPoleParams) -> Self {
        ResponseModel::TwoPole(p)
    }
}

impl From<TabulatedResponse> for ResponseModel {
    fn from(t: TabulatedResponse) -> Self {
        ResponseModel::Tabulated(t)
    }
}

impl ResponseModel {
    pub fn h(&self, t: f64) -> f64 {
        match self {
            ResponseModel::TwoPole(p) => p.h(t),
            ResponseModel::Tabulated(r) => r.h(t),
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        match self {
            ResponseModel::TwoPole(p) => p.cumulative(t),
            ResponseModel::Tabulated(r) => r.cumulative(t),
        }
    }

    pub fn spectrum(&self, omega: f64) -> Result<Complex64> {
        match self {
            ResponseModel::TwoPole(p) => p.spectrum(omega),
            ResponseModel::Tabulated(r) => Ok(r.spectrum(omega)),
        }
    }

    /// End of the support of `h`, when it is bounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            ResponseModel::TwoPole(_) => None,
            ResponseModel::Tabulated(r) => Some(r.support_end()),
        }
    }

    /// Frequency scale used to seed frequency-domain quadrature.
    pub(crate) fn frequency_scale(&self) -> Result<f64> {
        match self {
            ResponseModel::TwoPole(p) => Ok(p.omega0()),
            ResponseModel::Tabulated(r) => {
                let th = r.rms_duration()?;
                Ok(if th > 0.0 { 1.0 / th } else { r.nyquist() / 64.0 })
            }
        }
    }

    /// Upper limit for frequency-domain quadrature.
    pub(crate) fn frequency_cap(&self) -> f64 {
        match self {
            ResponseModel::TwoPole(_) => f64::INFINITY,
            ResponseModel::Tabulated(r) => r.nyquist(),
        }
    }
}

/// Derived scalar metrics of a response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetrics {
    /// RMS duration (s).
    pub t_h: f64,
    /// Full-line `∫dω |Im H(ω)|` (rad/s).
    pub him_l1: f64,
    /// `∫h dt`; 1 for a normalized response.
    pub h_area: f64,
}

pub fn two_pole_h(t: f64, p: &TwoPoleParams) -> f64 {
    p.h(t)
}

pub fn two_pole_spectrum(omega: f64, p: &TwoPoleParams) -> Result<Complex64> {
    p.spectrum(omega)
}

pub fn cumulative_h(t: f64, r: &ResponseModel) -> f64 {
    r.cumulative(t)
}

pub fn rms_duration(r: &ResponseModel) -> Result<f64> {
    match r {
        ResponseModel::TwoPole(p) => p.rms_duration(),
        ResponseModel::Tabulated(t) => t.rms_duration(),
    }
}

pub fn him_l1(r: &ResponseModel) -> Result<f64> {
    match r {
        ResponseModel::TwoPole(p) => p.him_l1(),
        ResponseModel::Tabulated(t) => t.him_l1(),
    }
}

/// `∫dω |Im H|` by frequency-domain quadrature, whatever the model. For
/// two-pole responses this is an independent check on the closed form.
pub fn him_l1_quadrature(r: &ResponseModel) -> Result<f64> {
    let w0 = r.frequency_scale()?;
    let mut pole = None;
    let est = quad::integrate_half_line(
        |w| match r.spectrum(w) {
            Ok(h) => h.im.abs(),
            Err(e) => {
                pole.get_or_insert(e);
                0.0
            }
        },
        w0,
        1e-12,
        r.frequency_cap(),
        Tolerance::new(1e-15 * w0, 1e-11),
    )?;
    if let Some(e) = pole {
        return Err(e);
    }
    Ok(2.0 * est.value)
}

pub fn metrics(r: &ResponseModel) -> Result<ResponseMetrics> {
    let h_area = match r {
        ResponseModel::TwoPole(_) => 1.0,
        ResponseModel::Tabulated(t) => t.cumulative(t.support_end()),
    };
    Ok(ResponseMetrics {
        t_h: rms_duration(r)?,
        him_l1: him_l1(r)?,
        h_area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    fn critical(w0: f64) -> TwoPoleParams {
        TwoPoleParams::from_normalized(w0, 2.0).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(TwoPoleParams::new(0.0, 1.0).is_err());
        assert!(TwoPoleParams::new(1.0, -1.0).is_err());
        assert!(TwoPoleParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(TwoPoleParams::from_normalized(1.0, 1.0).unwrap().regime(), Regime::Underdamped);
        assert_eq!(TwoPoleParams::from_normalized(1.0, 2.0 + 5e-7).unwrap().regime(), Regime::Critical);
        assert_eq!(TwoPoleParams::from_normalized(1.0, 3.0).unwrap().regime(), Regime::Overdamped);
    }

    #[test]
    fn causal_and_zero_at_origin() {
        for g in [0.3, 2.0, 7.0] {
            let p = TwoPoleParams::from_normalized(2.0, g).unwrap();
            assert_eq!(p.h(-1e-15), 0.0);
            assert_eq!(p.h(0.0), 0.0);
            assert_eq!(p.cumulative(0.0), 0.0);
        }
    }

    #[test]
    fn continuous_across_critical() {
        let w0: f64 = 3.0;
        let t = 1.0 / w0;
        let crit = w0 * w0 * t * (-w0 * t).exp();
        for g in [1.999, 2.001] {
            let v = TwoPoleParams::from_normalized(w0, g).unwrap().h(t);
            assert!(((v - crit) / crit).abs() < 1e-3, "Γ={g}: {v} vs {crit}");
        }
    }

    #[test]
    fn spectrum_special_points() {
        let p = TwoPoleParams::new(2.0, 0.5).unwrap();
        assert_eq!(p.spectrum(0.0).unwrap(), Complex64::new(1.0, 0.0));
        let at_res = p.spectrum(2.0).unwrap();
        assert!((at_res - Complex64::new(0.0, 2.0 / 0.5)).norm() < 1e-14);
        let undamped = TwoPoleParams::new(2.0, 0.0).unwrap();
        assert!(matches!(undamped.spectrum(2.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn cumulative_closed_forms() {
        let p = critical(5.0);
        assert!((p.cumulative(1.0 / 5.0) - (1.0 - 2.0 / E)).abs() < 1e-15);
        for g in [0.5, 2.0, 5.0] {
            let p = TwoPoleParams::from_normalized(1.0, g).unwrap();
            let th = p.rms_duration().unwrap();
            assert!((p.cumulative(100.0 * th.max(1.0 / g)) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rms_special_values() {
        assert!((normalized_rms_duration(SQRT_2) - 1.0 / SQRT_2).abs() < 1e-12);
        assert!((normalized_rms_duration(2.0) - 3f64.sqrt() / 2.0).abs() < 1e-12);
        let undamped = TwoPoleParams::new(1.0, 0.0).unwrap();
        assert!(matches!(undamped.rms_duration(), Err(Error::Divergent(_))));
    }

    #[test]
    fn him_critical_and_branches_are_real() {
        assert_eq!(normalized_him_l1(2.0).unwrap(), 2.0);
        // Approaching the critical point from either side.
        for g in [2.0 - 1e-4, 2.0 + 1e-4] {
            assert!((normalized_him_l1(g).unwrap() - 2.0).abs() < 1e-3);
        }
        assert!((normalized_him_l1(1e-9).unwrap() - PI).abs() < 1e-6);
    }

    #[test]
    fn node_form_matches_segment_form() {
        let uniform: Vec<(f64, f64)> = (0..200).map(|k| {
            let t = k as f64 * 0.5e-15;
            (t, (-t / 20e-15).exp() * (t / 8e-15).sin())
        }).collect();
        let ragged: Vec<(f64, f64)> = (0..200).map(|k| {
            let t = (k as f64 + 0.3 * ((k * 7) % 5) as f64 / 5.0) * 0.5e-15;
            (t, (-t / 20e-15).exp() * (t / 8e-15).sin())
        }).collect();
        let opts = LoadOptions { check_positivity: false, ..Default::default() };
        for samples in [uniform, ragged] {
            let r = TabulatedResponse::from_samples_with(&samples, opts).unwrap();
            for w in [1e13, 1e14, 7.7e14, 3e15, 6e15] {
                let a = r.spectrum_nodes(w);
                let b = r.spectrum_segments(w);
                assert!((a - b).norm() < 1e-10 * b.norm().max(1e-3), "w = {w:e}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn segment_weights_series_matches_closed_form() {
        for z in [Complex64::new(0.0, 0.2499), Complex64::new(0.1, -0.2)] {
            let (s0, s1) = linear_segment_weights(z);
            let ez = z.exp();
            let z2 = z * z;
            let c0 = (ez - 1.0 - z) / z2;
            let c1 = (ez * (z - 1.0) + 1.0) / z2;
            assert!((s0 - c0).norm() < 1e-12);
            assert!((s1 - c1).norm() < 1e-12);
        }
    }

    fn sampled_critical(w0: f64, n: usize, span: f64, scale: f64) -> Vec<(f64, f64)> {
        let p = critical(w0);
        (0..n)
            .map(|i| {
                let t = span / w0 * i as f64 / (n - 1) as f64;
                (t, scale * p.h(t))
            })
            .collect()
    }

    #[test]
    fn tabulated_validation() {
        let few: Vec<(f64, f64)> = (0..2).map(|i| (i as f64, 1.0)).collect();
        let err = TabulatedResponse::from_samples(&few).unwrap_err();
        assert!(err.to_string().contains("fewer than 8 samples"));

        let mut neg = sampled_critical(1.0, 16, 20.0, 1.0);
        neg[0].0 = -0.1;
        let err = TabulatedResponse::from_samples(&neg).unwrap_err();
        assert!(err.to_string().contains("causality"));
        assert!(err.to_string().contains("line 1"));

        let mut swapped = sampled_critical(1.0, 16, 20.0, 1.0);
        swapped.swap(4, 5);
        let err = TabulatedResponse::from_samples(&swapped).unwrap_err();
        assert!(err.to_string().contains("line 6"), "{err}");

        let zeros: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.0)).collect();
        assert!(TabulatedResponse::from_samples(&zeros).unwrap_err().to_string().contains("zero"));
    }

    #[test]
    fn tabulated_normalization_and_interpolation() {
        let samples = sampled_critical(1e14, 2048, 20.0, 7.3);
        let r = TabulatedResponse::from_samples(&samples).unwrap();
        assert!((r.scale_factor() * 7.3 - 1.0).abs() < 1e-4);
        assert!((r.cumulative(r.support_end()) - 1.0).abs() < 1e-12);
        assert_eq!(r.h(-1.0), 0.0);
        assert_eq!(r.h(r.support_end() * 1.01), 0.0);
        let (t3, v3) = (r.times()[3], r.values()[3]);
        let (t4, v4) = (r.times()[4], r.values()[4]);
        assert!((r.h(0.5 * (t3 + t4)) - 0.5 * (v3 + v4)).abs() < 1e-12 * v3.abs().max(1.0));
    }

    #[test]
    fn tabulated_spectrum_matches_two_pole_below_nyquist() {
        let w0 = 1e14;
        let r = TabulatedResponse::from_samples(&sampled_critical(w0, 4096, 40.0, 1.0)).unwrap();
        let p = critical(w0);
        for x in [0.0, 0.3, 1.0, 3.0, 10.0] {
            let a = r.spectrum(x * w0);
            let b = p.spectrum(x * w0).unwrap();
            assert!((a - b).norm() < 1e-4, "ω={x}ω₀: {a} vs {b}");
        }
    }

    #[test]
    fn tabulated_him_l1_critical() {
        let w0 = 1e14;
        let r = TabulatedResponse::from_samples(&sampled_critical(w0, 2048, 20.0, 1.0)).unwrap();
        let v = r.him_l1().unwrap();
        assert!((v / (2.0 * w0) - 1.0).abs() < 1e-3, "{}", v / w0);
    }

    #[test]
    fn load_csv_roundtrip_and_errors() {
        let mut text = String::from("# critical damping, omega0 = 1e14 rad/s\nt_fs,h\n");
        for (t, h) in sampled_critical(1e14, 64, 20.0, 3.0) {
            text.push_str(&format!("{},{}\n", t / FEMTOSECOND, h));
        }
        let r = load_tabulated(text.as_bytes()).unwrap();
        assert_eq!(r.times().len(), 64);
        assert!((r.scale_factor() - 1.0 / 3.0).abs() < 1e-2);

        let bad = "t_fs,h\n0,1\n1,abc\n";
        let err = load_tabulated(bad.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let header = "time,h\n0,1\n";
        assert!(matches!(load_tabulated(header.as_bytes()), Err(Error::Parse { line: 1, .. })));

        let negative = "t_fs,h\n-1,0\n0,1\n1,2\n2,3\n3,2\n4,1\n5,0.5\n6,0\n";
        let err = load_tabulated(negative.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("causality") && err.to_string().contains("line 2"), "{err}");
    }
}
