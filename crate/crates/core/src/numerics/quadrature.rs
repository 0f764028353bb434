//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

use crate::error::{MsdError, Result};

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

// Gauss weights for the odd-indexed Kronrod nodes, last entry is the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default subdivision budget.
pub const DEFAULT_MAX_INTERVALS: usize = 4000;

/// Tuning for [`integrate_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl QuadratureOptions {
    pub fn new(abs_tol: f64) -> Self {
        Self { abs_tol, max_intervals: DEFAULT_MAX_INTERVALS }
    }
}

/// Integral estimate plus its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gk15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    if !value.is_finite() {
        return Err(MsdError::domain(format!("integrand not finite on [{lo}, {hi}]")));
    }
    let error = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok(Segment { lo, hi, value, error })
}

/// Adaptive integration of a fallible integrand. The segment with the
/// largest error estimate is bisected until the summed error estimate
/// drops below `abs_tol`.
pub fn try_integrate_with<F>(mut f: F, lo: f64, hi: f64, opts: QuadratureOptions) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.abs_tol > 0.0) {
        return Err(MsdError::domain(format!("abs_tol = {} must be positive", opts.abs_tol)));
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(MsdError::domain(format!("integration limits [{lo}, {hi}] must be finite")));
    }
    if lo == hi {
        return Ok(Estimate { value: 0.0, abs_error: 0.0, intervals: 0 });
    }
    let mut segments = vec![gk15(&mut f, lo, hi)?];
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if total_err <= opts.abs_tol {
            break;
        }
        if segments.len() >= opts.max_intervals {
            let value: f64 = segments.iter().map(|s| s.value).sum();
            return Err(MsdError::NoConvergence {
                what: "adaptive quadrature",
                detail: format!(
                    "[{lo}, {hi}] after {} intervals: estimate {value}, error {total_err} > {}",
                    segments.len(),
                    opts.abs_tol
                ),
            });
        }
        // first index of the maximum keeps the refinement order deterministic
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments[worst];
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // interval can no longer be split in floating point; accept it
            segments[worst].error = 0.0;
            continue;
        }
        segments[worst] = gk15(&mut f, seg.lo, mid)?;
        segments.push(gk15(&mut f, mid, seg.hi)?);
    }
    let mut sorted = segments;
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(Estimate {
        value: sorted.iter().map(|s| s.value).sum(),
        abs_error: sorted.iter().map(|s| s.error).sum(),
        intervals: sorted.len(),
    })
}

pub fn try_integrate<F>(f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_with(f, lo, hi, QuadratureOptions::new(abs_tol)).map(|e| e.value)
}

/// ∫ f over [lo, hi] with estimated absolute error at most `abs_tol`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), lo, hi, abs_tol)
}
