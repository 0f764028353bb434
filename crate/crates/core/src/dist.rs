//! Sampling distribution of Q_E for a single observation among n IID
//! normal observations: exact forms for even and odd n, the large-n limit,
//! and quantiles by root finding.
//!
//! All computations are on the standardized scale (mean 0, sd 1); Q_E is
//! location and scale invariant so nothing is lost.
//!
//! Conditional on the subject value x₀, the n − 1 scaled absolute
//! differences are IID with distribution function
//! `F(d | x₀) = Φ(x₀ + d√2) − Φ(x₀ − d√2)`. For even n, Q_E is a single
//! order statistic of those and its conditional CDF is an incomplete beta
//! function of F. For odd n it is the mean of the two central order
//! statistics and needs an extra integral over the lower one.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{MsdError, Result};
use crate::numerics::{
    ln_beta, regularized_incomplete_beta, std_normal_cdf, std_normal_pdf, std_normal_sf, try_find_root,
    try_integrate,
};

/// Truncation of the x₀ integral; φ(8.5) ≈ 1.3e-16.
pub const X0_LIMIT: f64 = 8.5;
/// Absolute tolerance of the single integral for even n.
pub const EVEN_ABS_TOL: f64 = 1e-10;
/// Absolute tolerances of the inner (over t) and outer (over x₀) integrals for odd n.
pub const ODD_INNER_ABS_TOL: f64 = 1e-11;
pub const ODD_OUTER_ABS_TOL: f64 = 1e-9;
/// Largest odd n evaluated with the exact double integral by [`cdf`];
/// above it the next even n is used.
pub const EXACT_ODD_MAX_N: usize = 99;
/// Quantiles are searched for in [0, QUANTILE_UPPER].
pub const QUANTILE_UPPER: f64 = 10.0;
/// Bracket width at which quantile root finding stops.
pub const QUANTILE_XTOL: f64 = 1e-10;

/// Φ⁻¹(0.75): median of the half-normal distribution.
pub const HALF_NORMAL_MEDIAN: f64 = 0.674_489_750_196_081_7;

/// Left end of the support of the limiting distribution, Φ⁻¹(0.75)/√2.
pub fn asymptotic_lower_bound() -> f64 {
    HALF_NORMAL_MEDIAN / SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = MsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(MsdError::domain(format!("unknown parity '{s}'"))),
        }
    }
}

/// The IID reference distribution for a dataset of `n` observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistSpec {
    n: usize,
}

impl DistSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(MsdError::domain(format!("n = {n}: at least 3 observations are required")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.n)
    }

    /// r = n/2 for even n, r_e = (n − 1)/2 for odd n.
    pub fn r(&self) -> usize {
        self.n / 2
    }
}

/// F(d | x₀) = P(|X − x₀|/√2 ≤ d) for X ~ N(0, 1).
pub fn conditional_cdf(d: f64, x0: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(MsdError::domain(format!("conditional cdf at negative |d| = {d}")));
    }
    Ok(cond_cdf(d, x0))
}

// F is even in x₀; working with |x₀| and upper tails keeps relative
// precision when F is tiny.
#[inline]
fn cond_cdf(d: f64, x0: f64) -> f64 {
    let a = d * SQRT_2;
    let x = x0.abs();
    (std_normal_sf(x - a) - std_normal_sf(x + a)).max(0.0)
}

/// 1 − F(d | x₀), computed without cancellation.
pub fn conditional_sf(d: f64, x0: f64) -> f64 {
    let a = d * SQRT_2;
    std_normal_cdf(x0 - a) + std_normal_sf(x0 + a)
}

/// Density of the conditional scaled absolute difference, dF/dd.
pub fn conditional_pdf(d: f64, x0: f64) -> f64 {
    let a = d * SQRT_2;
    SQRT_2 * (std_normal_pdf(x0 - a) + std_normal_pdf(x0 + a))
}

/// P(Q_E ≤ q | x₀) for even n: I_F(r, n − r).
pub fn conditional_cdf_even(q: f64, x0: f64, spec: &DistSpec) -> Result<f64> {
    let r = spec.r() as f64;
    let m = (spec.n() - spec.r()) as f64;
    regularized_incomplete_beta(cond_cdf(q, x0), r, m)
}

/// P(Q_E ≤ q | x₀) for odd n, with r = (n − 1)/2:
///
/// (2/B(r, r)) ∫₀^q F(t)^{r−1} {[1 − F(t)]^r − [1 − F(2q − t)]^r} f(t) dt
///
/// The bracketed difference is evaluated in log space so that it keeps its
/// relative precision when both powers are tiny.
pub fn conditional_cdf_odd(q: f64, x0: f64, spec: &DistSpec) -> Result<f64> {
    if q <= 0.0 {
        return Ok(0.0);
    }
    let r = spec.r() as f64;
    let ln_coef = LN_2 - ln_beta(r, r);
    let integrand = |t: f64| -> Result<f64> {
        let f_t = cond_cdf(t, x0);
        let lower = if spec.r() == 1 {
            0.0
        } else if f_t <= 0.0 {
            return Ok(0.0);
        } else {
            (r - 1.0) * f_t.ln()
        };
        let surv_t = conditional_sf(t, x0);
        let surv_far = conditional_sf(2.0 * q - t, x0);
        if surv_t <= 0.0 {
            return Ok(0.0);
        }
        let ln_a = surv_t.ln();
        // ln(A^r − B^r) = r ln A + ln(1 − (B/A)^r)
        let ln_diff = if surv_far <= 0.0 {
            r * ln_a
        } else {
            let ratio_pow = r * (surv_far.ln() - ln_a);
            if ratio_pow >= 0.0 {
                return Ok(0.0);
            }
            r * ln_a + (-ratio_pow.exp_m1()).ln()
        };
        let dens = conditional_pdf(t, x0);
        if dens <= 0.0 {
            return Ok(0.0);
        }
        Ok((ln_coef + lower + ln_diff + dens.ln()).exp())
    };
    let v = try_integrate(integrand, 0.0, q, ODD_INNER_ABS_TOL)?;
    Ok(v.clamp(0.0, 1.0))
}

fn marginal<F>(mut conditional: F, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    // the conditional is even in x₀
    let half = try_integrate(|x0| Ok(conditional(x0)? * std_normal_pdf(x0)), 0.0, X0_LIMIT, tol / 2.0)?;
    Ok((2.0 * half).clamp(0.0, 1.0))
}

fn check_q(q: f64) -> Result<()> {
    if q.is_nan() {
        return Err(MsdError::domain("q is NaN"));
    }
    Ok(())
}

/// P(Q_E ≤ q) for even n.
pub fn cdf_even(q: f64, spec: &DistSpec) -> Result<f64> {
    check_q(q)?;
    if spec.parity() != Parity::Even {
        return Err(MsdError::Parity(format!("cdf_even called with odd n = {}", spec.n())));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    marginal(|x0| conditional_cdf_even(q, x0, spec), EVEN_ABS_TOL)
}

/// P(Q_E ≤ q) for odd n by the double integral. Works for any odd n ≥ 3;
/// [`cdf`] only routes n ≤ [`EXACT_ODD_MAX_N`] here.
pub fn cdf_odd(q: f64, spec: &DistSpec) -> Result<f64> {
    check_q(q)?;
    if spec.parity() != Parity::Odd {
        return Err(MsdError::Parity(format!("cdf_odd called with even n = {}", spec.n())));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    marginal(|x0| conditional_cdf_odd(q, x0, spec), ODD_OUTER_ABS_TOL)
}

/// Limiting distribution as n → ∞: zero up to Φ⁻¹(0.75)/√2, then
/// 2Φ(x*) − 1 where x* > 0 solves F(q | x*) = ½.
pub fn cdf_asymptotic(q: f64) -> f64 {
    if q.is_nan() || q <= asymptotic_lower_bound() {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    // F(q|x0) decreases in |x0| from F(q|0) > 1/2 towards 0
    let hi = q * SQRT_2 + 10.0;
    match try_find_root(|x0| Ok(cond_cdf(q, x0) - 0.5), 0.0, hi, 1e-14) {
        Ok(x_star) => 2.0 * std_normal_cdf(x_star) - 1.0,
        // F(q|0) rounds to exactly 1/2 just above the bound
        Err(_) => 0.0,
    }
}

/// P(Q_E ≤ q) for n observations: exact for even n and odd n ≤ 99, next
/// even n above that.
pub fn cdf(q: f64, n: usize) -> Result<f64> {
    let spec = DistSpec::new(n)?;
    match spec.parity() {
        Parity::Even => cdf_even(q, &spec),
        Parity::Odd if n <= EXACT_ODD_MAX_N => cdf_odd(q, &spec),
        Parity::Odd => cdf_even(q, &DistSpec::new(n + 1)?),
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MsdError::domain(format!("probability {p} must lie strictly between 0 and 1")));
    }
    Ok(())
}

/// Invert a distribution function on [lo, hi] by bracketing root search.
pub fn invert_cdf<F>(p: f64, mut cdf_fn: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_p(p)?;
    try_find_root(|q| Ok(cdf_fn(q)? - p), lo, hi, QUANTILE_XTOL)
}

/// Upper quantile of Q_E: q with P(Q_E ≤ q) = p for n observations.
pub fn quantile(p: f64, n: usize) -> Result<f64> {
    DistSpec::new(n)?;
    invert_cdf(p, |q| cdf(q, n), 0.0, QUANTILE_UPPER)
}

/// Quantile of the exact odd-n form regardless of the n ≤ 99 cutoff.
pub fn quantile_odd_exact(p: f64, n: usize) -> Result<f64> {
    let spec = DistSpec::new(n)?;
    invert_cdf(p, |q| cdf_odd(q, &spec), 0.0, QUANTILE_UPPER)
}

/// Quantile of the limiting distribution.
pub fn quantile_asymptotic(p: f64) -> Result<f64> {
    invert_cdf(p, |q| Ok(cdf_asymptotic(q)), asymptotic_lower_bound(), QUANTILE_UPPER)
}
