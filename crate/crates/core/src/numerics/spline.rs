//! Monotone piecewise cubic Hermite interpolation with Hyman filtering.

use crate::error::{MsdError, Result};

/// Cubic Hermite interpolant whose knot derivatives have been passed
/// through Hyman's monotonicity filter. Non-decreasing knot values give a
/// non-decreasing curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneSpline {
    pub fn fit(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n < 3 {
            return Err(MsdError::domain(format!("spline needs at least 3 knots, got {n}")));
        }
        if values.len() != n {
            return Err(MsdError::domain(format!("{n} knots but {} values", values.len())));
        }
        if knots.iter().chain(values).any(|v| !v.is_finite()) {
            return Err(MsdError::domain("spline knots and values must be finite"));
        }
        if let Some(w) = knots.windows(2).find(|w| w[1] <= w[0]) {
            return Err(MsdError::domain(format!(
                "spline knots must be strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = values.windows(2).zip(&h).map(|(v, hi)| (v[1] - v[0]) / hi).collect();

        // three-point (parabolic) derivative estimates
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            slopes[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
        }
        slopes[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
        let m = n - 2;
        slopes[n - 1] = ((2.0 * h[m] + h[m - 1]) * delta[m] - h[m] * delta[m - 1]) / (h[m] + h[m - 1]);

        hyman_filter(&mut slopes, &delta);
        Ok(Self { knots: knots.to_vec(), values: values.to_vec(), slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Evaluate the interpolant. No extrapolation: `x` must lie within the
    /// knot range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(MsdError::domain(format!("spline evaluated at {x} outside [{lo}, {hi}]")));
        }
        let last = self.knots.len() - 1;
        if x == hi {
            return Ok(self.values[last]);
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        let t = (x - self.knots[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1])
    }
}

/// Hyman (1983) filter: keep each derivative inside [0, 3·min(adjacent
/// secants)] (sign-adjusted), and flatten it at local extrema.
fn hyman_filter(slopes: &mut [f64], delta: &[f64]) {
    let n = slopes.len();
    for i in 0..n {
        let (left, right) = match i {
            0 => (delta[0], delta[0]),
            _ if i == n - 1 => (delta[n - 2], delta[n - 2]),
            _ => (delta[i - 1], delta[i]),
        };
        let s = slopes[i];
        if left * right <= 0.0 {
            // local extremum or flat segment
            slopes[i] = if i == 0 || i == n - 1 {
                clamp_toward(s, left)
            } else {
                0.0
            };
            continue;
        }
        let bound = 3.0 * left.abs().min(right.abs());
        slopes[i] = if left > 0.0 { s.clamp(0.0, bound) } else { s.clamp(-bound, 0.0) };
    }
}

fn clamp_toward(s: f64, secant: f64) -> f64 {
    if secant > 0.0 {
        s.clamp(0.0, 3.0 * secant)
    } else if secant < 0.0 {
        s.clamp(3.0 * secant, 0.0)
    } else {
        0.0
    }
}

pub fn fit_monotone_spline(knots: &[f64], values: &[f64]) -> Result<MonotoneSpline> {
    MonotoneSpline::fit(knots, values)
}

pub fn eval_spline(s: &MonotoneSpline, x: f64) -> Result<f64> {
    s.eval(x)
}
