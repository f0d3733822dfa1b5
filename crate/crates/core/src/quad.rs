//! Adaptive Gauss-Kronrod quadrature for real and complex integrands.
//!
//! The integrator is a global bisection scheme over a 7/15-point
//! Gauss-Kronrod pair: the interval with the largest error estimate is
//! split until the summed estimate meets the requested tolerance.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: closed under addition and real scaling,
/// with a magnitude for error control.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn real(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn real(&self) -> f64 {
        *self
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn real(&self) -> f64 {
        self.re
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (x = XGK[1], XGK[3], XGK[5], 0).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * w;
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let result = kronrod * half;
    let err = ((kronrod - gauss) * half).magnitude();
    (result, err)
}

/// Tolerance and work limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 4000,
        }
    }

    pub const fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-12, 1e-10)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

/// Integrate `f` over `[a, b]`, splitting first at any `breaks` that fall
/// strictly inside the interval.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
        });
    }
    if a > b {
        let est = integrate(f, b, a, breaks, tol)?;
        return Ok(Estimate {
            value: est.value * -1.0,
            error: est.error,
        });
    }

    let mut edges = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut segments: Vec<Segment<T>> = edges
        .windows(2)
        .map(|w| {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();

    loop {
        let total = segments.iter().fold(T::zero(), |acc, s| acc + s.value);
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Accuracy {
                estimate: total.real(),
                error_bound: err,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            return Err(Error::Accuracy {
                estimate: total.real(),
                error_bound: err,
            });
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
}

/// Integrate `f` over `[0, ∞)` by summing doubling panels `[0, w0]`,
/// `[w0, 2 w0]`, ... Stops once a panel contributes less than `stop_rel`
/// of the running total (two panels in a row), or once the panel edge
/// reaches `cap`.
pub fn integrate_half_line<F>(mut f: F, w0: f64, stop_rel: f64, cap: f64, tol: Tolerance) -> Result<Estimate<f64>>
where
    F: FnMut(f64) -> f64,
{
    if !(w0 > 0.0 && w0.is_finite()) {
        return Err(Error::invalid("w0", "initial panel width must be positive and finite"));
    }
    let first = integrate(&mut f, 0.0, w0.min(cap), &[], tol)?;
    let mut total = first.value;
    let mut error = first.error;
    let mut lo = w0;
    let mut quiet = 0;
    while lo < cap {
        let hi = (2.0 * lo).min(cap);
        let panel = integrate(&mut f, lo, hi, &[], tol)?;
        total += panel.value;
        error += panel.error;
        if panel.value.abs() <= stop_rel * total.abs() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        if lo > 1e60 * w0 {
            return Err(Error::Accuracy {
                estimate: total,
                error_bound: f64::INFINITY,
            });
        }
    }
    Ok(Estimate { value: total, error })
}

/// Three-point Gauss-Legendre rule on `[a, b]`; exact for polynomials of
/// degree five or less.
pub fn gauss_legendre3<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    const X: f64 = 0.774_596_669_241_483_4;
    const W_OUTER: f64 = 5.0 / 9.0;
    const W_CENTER: f64 = 8.0 / 9.0;
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * (W_OUTER * (f(c - h * X) + f(c + h * X)) + W_CENTER * f(c))
}
