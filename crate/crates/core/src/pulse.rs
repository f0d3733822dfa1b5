//! Single-photon intensity profiles `|ψ(t)|²`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Gaussian intensity is integrated over `center ± WINDOW_SIGMAS·σ`.
pub const WINDOW_SIGMAS: f64 = 8.0;

/// Normalized `|ψ(t)|²` sampled on a grid and linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPulse {
    times: Vec<f64>,
    intensity: Vec<f64>,
}

impl TabulatedPulse {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("pulse", "tabulated pulse needs at least two samples"));
        }
        for (i, &(t, v)) in samples.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    "pulse",
                    format!("sample {i}: intensity must be finite and non-negative"),
                ));
            }
            if i > 0 && t <= samples[i - 1].0 {
                return Err(Error::invalid("pulse", format!("sample {i}: times must increase")));
            }
        }
        let area: f64 = samples
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        if !(area > 0.0) {
            return Err(Error::invalid("pulse", "tabulated pulse has zero energy"));
        }
        Ok(TabulatedPulse {
            times: samples.iter().map(|s| s.0).collect(),
            intensity: samples.iter().map(|s| s.1 / area).collect(),
        })
    }

    /// Sample `shape` at `n` points on `[start, end]` and normalize.
    pub fn from_fn(shape: impl Fn(f64) -> f64, start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 || !(end > start) {
            return Err(Error::invalid("pulse", "need n >= 2 and end > start"));
        }
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = start + (end - start) * i as f64 / (n - 1) as f64;
                (t, shape(t))
            })
            .collect();
        Self::new(&samples)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn intensity_samples(&self) -> &[f64] {
        &self.intensity
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    fn intensity(&self, t: f64) -> f64 {
        if t < self.start() || t > self.end() {
            return 0.0;
        }
        let k = self.times.partition_point(|&x| x <= t).clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let s = (t - t0) / (t1 - t0);
        self.intensity[k - 1] + s * (self.intensity[k] - self.intensity[k - 1])
    }
}

/// Intensity profile of a single-photon wave packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseShape {
    Dirac { center: f64 },
    /// `ψ(t) ∝ exp(−2(t − center)²/t_psi²)`.
    Gaussian { center: f64, t_psi: f64 },
    Tabulated(TabulatedPulse),
}

impl PulseShape {
    pub fn dirac(center: f64) -> Self {
        PulseShape::Dirac { center }
    }

    pub fn gaussian(center: f64, t_psi: f64) -> Result<Self> {
        if !(t_psi.is_finite() && t_psi > 0.0) {
            return Err(Error::invalid("t_psi", format!("Gaussian duration must be > 0, got {t_psi}")));
        }
        Ok(PulseShape::Gaussian { center, t_psi })
    }

    /// Nominal duration `t_ψ`: zero for a delta, the Gaussian parameter,
    /// or the sampled support width.
    pub fn duration(&self) -> f64 {
        match self {
            PulseShape::Dirac { .. } => 0.0,
            PulseShape::Gaussian { t_psi, .. } => *t_psi,
            PulseShape::Tabulated(p) => p.end() - p.start(),
        }
    }

    /// Standard deviation of `|ψ|²` for a Gaussian pulse.
    fn sigma(t_psi: f64) -> f64 {
        t_psi / (2.0 * std::f64::consts::SQRT_2)
    }

    /// Same shape shifted later by `delay`.
    pub fn delayed(&self, delay: f64) -> Self {
        match self {
            PulseShape::Dirac { center } => PulseShape::Dirac { center: center + delay },
            PulseShape::Gaussian { center, t_psi } => PulseShape::Gaussian {
                center: center + delay,
                t_psi: *t_psi,
            },
            PulseShape::Tabulated(p) => PulseShape::Tabulated(TabulatedPulse {
                times: p.times.iter().map(|t| t + delay).collect(),
                intensity: p.intensity.clone(),
            }),
        }
    }

    /// `|ψ(t)|²`; zero everywhere for a delta (it has no density).
    pub fn intensity(&self, t: f64) -> f64 {
        match self {
            PulseShape::Dirac { .. } => 0.0,
            PulseShape::Gaussian { center, t_psi } => {
                let s = Self::sigma(*t_psi);
                let x = (t - center) / s;
                (-0.5 * x * x).exp() / (s * (2.0 * PI).sqrt())
            }
            PulseShape::Tabulated(p) => p.intensity(t),
        }
    }

    /// Interval outside which the intensity is negligible.
    pub fn window(&self) -> (f64, f64) {
        match self {
            PulseShape::Dirac { center } => (*center, *center),
            PulseShape::Gaussian { center, t_psi } => {
                let half = WINDOW_SIGMAS * Self::sigma(*t_psi);
                (center - half, center + half)
            }
            PulseShape::Tabulated(p) => (p.start(), p.end()),
        }
    }

    /// Whether `other` is this pulse delayed by `delay`, up to `tol` in time.
    pub fn is_delayed_copy(&self, other: &PulseShape, delay: f64, tol: f64) -> bool {
        match (self, other) {
            (PulseShape::Dirac { center: a }, PulseShape::Dirac { center: b }) => (a + delay - b).abs() <= tol,
            (
                PulseShape::Gaussian { center: a, t_psi: ta },
                PulseShape::Gaussian { center: b, t_psi: tb },
            ) => (a + delay - b).abs() <= tol && (ta - tb).abs() <= tol,
            (PulseShape::Tabulated(a), PulseShape::Tabulated(b)) => {
                a.times.len() == b.times.len()
                    && a.times.iter().zip(&b.times).all(|(x, y)| (x + delay - y).abs() <= tol)
                    && a
                        .intensity
                        .iter()
                        .zip(&b.intensity)
                        .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0 / (a.end() - a.start())))
            }
            _ => false,
        }
    }

    /// `∫ |ψ(s)|² f(s) ds`. `breaks` marks points where `f` is not smooth.
    pub fn integrate<F>(&self, mut f: F, breaks: &[f64], tol: Tolerance) -> Result<Complex64>
    where
        F: FnMut(f64) -> Complex64,
    {
        match self {
            PulseShape::Dirac { center } => Ok(f(*center)),
            PulseShape::Gaussian { .. } => {
                let (lo, hi) = self.window();
                let est = quad::integrate(|s| f(s) * self.intensity(s), lo, hi, breaks, tol)?;
                Ok(est.value)
            }
            PulseShape::Tabulated(p) => {
                let mut all: Vec<f64> = p.times.clone();
                all.extend_from_slice(breaks);
                let tol = tol.with_max_intervals(tol.max_intervals.max(4 * all.len()));
                let est = quad::integrate(|s| f(s) * p.intensity(s), p.start(), p.end(), &all, tol)?;
                Ok(est.value)
            }
        }
    }
}

/// Kernel of the reduced double integral `∬ f(t − s) |ψ_A(t)|²|ψ_B(s)|²`.
pub(crate) enum CrossKernel {
    /// `Δ = t − s` is fixed.
    Delta(f64),
    /// `Δ` is Gaussian with the given mean and standard deviation.
    Gaussian { mean: f64, sigma: f64 },
    /// No closed-form reduction; integrate over both pulses.
    Nested,
}

pub(crate) fn cross_kernel(a: &PulseShape, b: &PulseShape) -> CrossKernel {
    let moments = |p: &PulseShape| match p {
        PulseShape::Dirac { center } => Some((*center, 0.0)),
        PulseShape::Gaussian { center, t_psi } => Some((*center, PulseShape::sigma(*t_psi))),
        PulseShape::Tabulated(_) => None,
    };
    match (moments(a), moments(b)) {
        (Some((ca, sa)), Some((cb, sb))) => {
            let sigma = (sa * sa + sb * sb).sqrt();
            if sigma == 0.0 {
                CrossKernel::Delta(ca - cb)
            } else {
                CrossKernel::Gaussian { mean: ca - cb, sigma }
            }
        }
        _ => CrossKernel::Nested,
    }
}

/// `∬ f(t − s) |ψ_A(t)|² |ψ_B(s)|² dt ds` where `f` is smooth away from
/// the `Δ` values in `kinks`.
pub(crate) fn cross_integral<F>(a: &PulseShape, b: &PulseShape, f: F, kinks: &[f64], tol: Tolerance) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    match cross_kernel(a, b) {
        CrossKernel::Delta(d) => Ok(f(d)),
        CrossKernel::Gaussian { mean, sigma } => {
            let half = WINDOW_SIGMAS * sigma;
            let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
            let est = quad::integrate(
                |d| {
                    let x = (d - mean) / sigma;
                    f(d) * ((-0.5 * x * x).exp() * norm)
                },
                mean - half,
                mean + half,
                kinks,
                tol,
            )?;
            Ok(est.value)
        }
        CrossKernel::Nested => {
            let inner_failure: RefCell<Option<Error>> = RefCell::new(None);
            let inner_tol = Tolerance::new(tol.abs * 0.1, tol.rel * 0.1).with_max_intervals(tol.max_intervals);
            let outer = a.integrate(
                |t| {
                    // t − s = Δ  ⇒  s = t − Δ
                    let s_breaks: Vec<f64> = kinks.iter().map(|k| t - k).collect();
                    match b.integrate(|s| f(t - s), &s_breaks, inner_tol) {
                        Ok(v) => v,
                        Err(e) => {
                            inner_failure.borrow_mut().get_or_insert(e);
                            Complex64::new(0.0, 0.0)
                        }
                    }
                },
                &[],
                tol,
            )?;
            if let Some(e) = inner_failure.into_inner() {
                return Err(e);
            }
            Ok(outer)
        }
    }
}
