//! Parameter sweeps: the F_max-versus-damping curve and F₁ heat maps over
//! `(φ, T_w)`, with peak location and nested-grid refinement.
//!
//! Cells are evaluated in parallel with rayon and assembled by index, so
//! results do not depend on the worker count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{self, GateGeometry};
use crate::pulse::PulseShape;
use crate::response::{self, ResponseModel};

/// Points per side of each refinement grid; odd so the centre is a node.
pub const REFINE_POINTS: usize = 21;
/// Number of successive 10× refinements.
pub const REFINE_LEVELS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// A sampled axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if count < 2 {
            return Err(Error::Config(format!("axis {name}: count must be >= 2, got {count}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!("axis {name}: need finite min < max, got [{min}, {max}]")));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(Error::Config(format!("axis {name}: log spacing needs min > 0, got {min}")));
        }
        Ok(Axis {
            name: name.to_string(),
            min,
            max,
            count,
            spacing,
        })
    }

    pub fn linear(name: &str, min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(name, min, max, count, Spacing::Linear)
    }

    pub fn log(name: &str, min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(name, min, max, count, Spacing::Log)
    }

    fn coordinate(&self, x: f64) -> f64 {
        match self.spacing {
            Spacing::Linear => x,
            Spacing::Log => x.ln(),
        }
    }

    fn at_coordinate(&self, u: f64) -> f64 {
        match self.spacing {
            Spacing::Linear => u,
            Spacing::Log => u.exp(),
        }
    }

    /// Step between neighbouring points in the spacing's own coordinate.
    fn step(&self) -> f64 {
        (self.coordinate(self.max) - self.coordinate(self.min)) / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let lo = self.coordinate(self.min);
        let step = self.step();
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    self.max
                } else if i == 0 {
                    self.min
                } else {
                    self.at_coordinate(lo + step * i as f64)
                }
            })
            .collect()
    }

    /// Axis with twice the resolution over the same range.
    pub fn doubled(&self) -> Self {
        Axis {
            count: 2 * self.count - 1,
            ..self.clone()
        }
    }
}

/// One row of the F_max-versus-Γ table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma_norm: f64,
    pub omega0_th: f64,
    pub him_l1_norm: f64,
    pub fmax: f64,
}

/// `F_max` of the normalized two-pole family at each `Γ` on `axis`.
pub fn gamma_sweep(axis: &Axis) -> Result<Vec<GammaRow>> {
    if axis.min <= 0.0 {
        return Err(Error::invalid("gamma_norm", format!("values must be > 0, got min {}", axis.min)));
    }
    axis.values()
        .into_par_iter()
        .map(|gamma| {
            let omega0_th = response::normalized_rms_duration(gamma);
            let him_l1_norm = response::normalized_him_l1(gamma)?;
            let fmax = fidelity::f0_uniform_bound(PI, 0.0, omega0_th, him_l1_norm)?.value;
            Ok(GammaRow {
                gamma_norm: gamma,
                omega0_th,
                him_l1_norm,
                fmax,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSelector {
    F1maxNonuniform,
    F0Nonuniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseKind {
    Dirac,
    /// Gaussian intensity with RMS duration `t_psi` (s).
    Gaussian { t_psi: f64 },
}

impl PulseKind {
    pub fn pulse(&self, center: f64) -> Result<PulseShape> {
        match *self {
            PulseKind::Dirac => Ok(PulseShape::dirac(center)),
            PulseKind::Gaussian { t_psi } => PulseShape::gaussian(center, t_psi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DelayRule {
    /// `t_d = T_w / 2`.
    Symmetric,
    /// Fixed delay (s).
    Fixed { delay: f64 },
}

impl DelayRule {
    pub fn delay(&self, walkoff_time: f64) -> f64 {
        match *self {
            DelayRule::Symmetric => 0.5 * walkoff_time,
            DelayRule::Fixed { delay } => delay,
        }
    }
}

/// A heat-map request: `phi` axis (rad) by `walkoff` axis (s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub phi: Axis,
    pub walkoff: Axis,
    pub bound: BoundSelector,
    pub pulse: PulseKind,
    pub delay_rule: DelayRule,
    pub temperature: f64,
    pub refine: bool,
}

impl SweepSpec {
    /// φ ∈ [0, 2π] by T_w ∈ [1, 200] fs (log), 256 × 256, symmetric delay.
    pub fn default_f1(pulse: PulseKind) -> Self {
        SweepSpec {
            phi: Axis::linear("phi", 0.0, 2.0 * PI, 256).expect("valid default"),
            walkoff: Axis::log("walkoff", 1e-15, 200e-15, 256).expect("valid default"),
            bound: BoundSelector::F1maxNonuniform,
            pulse,
            delay_rule: DelayRule::Symmetric,
            temperature: 0.0,
            refine: true,
        }
    }

    pub fn with_resolution(mut self, n_phi: usize, n_walkoff: usize) -> Result<Self> {
        self.phi = Axis::new(&self.phi.name, self.phi.min, self.phi.max, n_phi, self.phi.spacing)?;
        self.walkoff = Axis::new(
            &self.walkoff.name,
            self.walkoff.min,
            self.walkoff.max,
            n_walkoff,
            self.walkoff.spacing,
        )?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub phi: f64,
    pub walkoff: f64,
    pub value: f64,
    /// Coarse grid indices of the maximum.
    pub index: (usize, usize),
    pub coarse_value: f64,
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub index: (usize, usize),
    pub message: String,
}

/// Bound values on a `(φ, T_w)` grid; `values[i][j]` is at
/// `(phi[i], walkoff[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatMap {
    pub phi: Vec<f64>,
    pub walkoff: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub peak: Option<Peak>,
    pub failures: Vec<CellFailure>,
}

/// Evaluates one bound at arbitrary `(φ, T_w)` for a fixed response and
/// pulse. The noise variance is linear in `|φ| T_w`, so it is computed once.
pub struct CellEvaluator<'a> {
    response: &'a ResponseModel,
    bound: BoundSelector,
    pulse: PulseKind,
    delay_rule: DelayRule,
    temperature: f64,
    variance_per_strength: f64,
}

impl<'a> CellEvaluator<'a> {
    pub fn new(spec: &SweepSpec, response: &'a ResponseModel) -> Result<Self> {
        let reference = GateGeometry::new(1.0, 1.0, 0.0)?.with_temperature(spec.temperature)?;
        let variance_per_strength = fidelity::phase_variance(&reference, response)?;
        Ok(CellEvaluator {
            response,
            bound: spec.bound,
            pulse: spec.pulse,
            delay_rule: spec.delay_rule,
            temperature: spec.temperature,
            variance_per_strength,
        })
    }

    pub fn evaluate(&self, phi: f64, walkoff: f64) -> Result<f64> {
        let g = GateGeometry::new(phi, walkoff, self.delay_rule.delay(walkoff))?.with_temperature(self.temperature)?;
        let exponent = 0.5 * self.variance_per_strength * phi.abs() * walkoff;
        match self.bound {
            BoundSelector::F0Nonuniform => Ok(2.0 / 3.0 + (-exponent).exp() / 3.0),
            BoundSelector::F1maxNonuniform => {
                let a = self.pulse.pulse(0.0)?;
                let b = self.pulse.pulse(g.delay)?;
                let overlap = fidelity::phase_overlap(&g, self.response, &a, &b)?;
                Ok(2.0 / 3.0 - (-exponent).exp() / 3.0 * overlap.re)
            }
        }
    }
}

/// Heat map of the selected bound, with its peak.
pub fn heatmap_f1(spec: &SweepSpec, r: &ResponseModel) -> Result<HeatMap> {
    let eval = CellEvaluator::new(spec, r)?;
    let phi = spec.phi.values();
    let walkoff = spec.walkoff.values();
    let ny = walkoff.len();
    let cells: Vec<std::result::Result<f64, String>> = (0..phi.len() * ny)
        .into_par_iter()
        .map(|k| eval.evaluate(phi[k / ny], walkoff[k % ny]).map_err(|e| e.to_string()))
        .collect();

    let mut values = vec![vec![f64::NAN; ny]; phi.len()];
    let mut failures = Vec::new();
    for (k, cell) in cells.into_iter().enumerate() {
        let (i, j) = (k / ny, k % ny);
        match cell {
            Ok(v) => values[i][j] = v,
            Err(message) => failures.push(CellFailure { index: (i, j), message }),
        }
    }

    let peak = match find_peak(&values) {
        Ok((i, j, v)) => {
            let mut peak = Peak {
                phi: phi[i],
                walkoff: walkoff[j],
                value: v,
                index: (i, j),
                coarse_value: v,
                refined: false,
            };
            if spec.refine {
                let (x, y, best) = refine_peak(|x, y| eval.evaluate(x, y).ok(), &spec.phi, &spec.walkoff, (phi[i], walkoff[j]), v);
                peak.phi = x;
                peak.walkoff = y;
                peak.value = best;
                peak.refined = true;
            }
            Some(peak)
        }
        Err(_) => None,
    };

    Ok(HeatMap {
        phi,
        walkoff,
        values,
        peak,
        failures,
    })
}

/// Argmax of a matrix, skipping NaN. Ties go to the lowest first index,
/// then the lowest second index.
pub fn find_peak(values: &[Vec<f64>]) -> Result<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((i, j, v));
            }
        }
    }
    best.ok_or(Error::EmptyResult)
}

/// Argmax of a sequence, skipping NaN; ties go to the lowest index.
pub fn find_peak_1d(values: &[f64]) -> Result<(usize, f64)> {
    find_peak(&[values.to_vec()]).map(|(_, j, v)| (j, v))
}

/// Two successive 10× grid refinements around `center`, each over
/// ±1 step of the previous grid. Points outside the axis ranges are
/// skipped and `f` returning `None` marks a failed point. The returned
/// value is never below `center_value`.
pub fn refine_peak<F>(f: F, x_axis: &Axis, y_axis: &Axis, center: (f64, f64), center_value: f64) -> (f64, f64, f64)
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    let half = (REFINE_POINTS / 2) as f64;
    let (mut best_x, mut best_y, mut best) = (center.0, center.1, center_value);
    let mut step_x = x_axis.step();
    let mut step_y = y_axis.step();
    for _ in 0..REFINE_LEVELS {
        step_x /= half;
        step_y /= half;
        let ux = x_axis.coordinate(best_x);
        let uy = y_axis.coordinate(best_y);
        let points: Vec<(f64, f64)> = (0..REFINE_POINTS)
            .flat_map(|a| (0..REFINE_POINTS).map(move |b| (a, b)))
            .filter_map(|(a, b)| {
                let x = if a == REFINE_POINTS / 2 { best_x } else { x_axis.at_coordinate(ux + (a as f64 - half) * step_x) };
                let y = if b == REFINE_POINTS / 2 { best_y } else { y_axis.at_coordinate(uy + (b as f64 - half) * step_y) };
                let inside = x >= x_axis.min && x <= x_axis.max && y >= y_axis.min && y <= y_axis.max;
                inside.then_some((x, y))
            })
            .collect();
        let found: Vec<Option<f64>> = points.par_iter().map(|&(x, y)| f(x, y)).collect();
        for (&(x, y), v) in points.iter().zip(found) {
            if let Some(v) = v {
                if v > best {
                    best = v;
                    best_x = x;
                    best_y = y;
                }
            }
        }
    }
    (best_x, best_y, best)
}

/// Refine a peak of an arbitrary function sampled on the given axes.
pub fn peak_of<F>(f: F, x_axis: &Axis, y_axis: &Axis) -> Result<(f64, f64, f64)>
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    let xs = x_axis.values();
    let ys = y_axis.values();
    let values: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| f(x, y).unwrap_or(f64::NAN)).collect())
        .collect();
    let (i, j, v) = find_peak(&values)?;
    Ok(refine_peak(&f, x_axis, y_axis, (xs[i], ys[j]), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::TwoPoleParams;

    #[test]
    fn axis_validation_and_values() {
        assert!(Axis::linear("x", 0.0, 1.0, 1).is_err());
        assert!(Axis::linear("x", 1.0, 1.0, 3).is_err());
        assert!(Axis::log("x", 0.0, 1.0, 3).is_err());
        let a = Axis::log("x", 1.0, 100.0, 3).unwrap();
        let v = a.values();
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(v[2], 100.0);
        assert_eq!(a.doubled().count, 5);
    }

    #[test]
    fn gamma_row_at_critical() {
        let axis = Axis::linear("gamma", 1.0, 2.0, 2).unwrap();
        let rows = gamma_sweep(&axis).unwrap();
        let r = rows[1];
        assert_eq!(r.gamma_norm, 2.0);
        assert!((r.omega0_th - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((r.him_l1_norm - 2.0).abs() < 1e-12);
        assert!((r.fmax - 0.806874).abs() < 1e-6);
    }

    #[test]
    fn peak_tie_breaking() {
        let m = vec![vec![1.0; 3]; 3];
        assert_eq!(find_peak(&m).unwrap(), (0, 0, 1.0));
        let mut m = vec![vec![0.0; 4]; 4];
        m[2][3] = 5.0;
        m[1][1] = f64::NAN;
        assert_eq!(find_peak(&m).unwrap(), (2, 3, 5.0));
        assert!(matches!(find_peak(&[vec![f64::NAN; 2]]), Err(Error::EmptyResult)));
        assert_eq!(find_peak_1d(&[0.0, 2.0, 2.0]).unwrap(), (1, 2.0));
    }

    #[test]
    fn refinement_finds_quadratic_apex() {
        let (x0, y0) = (0.737, 3.21);
        let f = |x: f64, y: f64| Some(1.0 - (x - x0).powi(2) - 0.5 * (y - y0).powi(2));
        let xa = Axis::linear("x", 0.0, 2.0, 9).unwrap();
        let ya = Axis::linear("y", 0.0, 5.0, 9).unwrap();
        let (x, y, v) = peak_of(f, &xa, &ya).unwrap();
        assert!((x - x0).abs() < 0.01 * x0);
        assert!((y - y0).abs() < 0.01 * y0);
        assert!(v <= 1.0 && v > 1.0 - 1e-4);
    }

    #[test]
    fn zero_phi_column_is_one_third() {
        let r: ResponseModel = TwoPoleParams::from_normalized(1.0, 1.0).unwrap().into();
        let mut spec = SweepSpec::default_f1(PulseKind::Dirac).with_resolution(3, 4).unwrap();
        spec.walkoff = Axis::log("walkoff", 0.5, 20.0, 4).unwrap();
        spec.refine = false;
        let map = heatmap_f1(&spec, &r).unwrap();
        assert_eq!(map.values.len(), 3);
        assert_eq!(map.values[0].len(), 4);
        for v in &map.values[0] {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(map.failures.is_empty());
        let peak = map.peak.unwrap();
        assert_eq!(peak.value, peak.coarse_value);
    }
}
