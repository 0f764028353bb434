//! Pairwise scaled differences, the median scaled difference Q_E, and the
//! pairwise chi-squared comparator.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{MsdError, Result};

/// One laboratory's reported value and standard uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub label: String,
    pub value: f64,
    pub uncertainty: f64,
}

impl Observation {
    pub fn new(label: impl Into<String>, value: f64, uncertainty: f64) -> Result<Self> {
        let label = label.into();
        if !value.is_finite() {
            return Err(MsdError::InvalidDataset(format!("{label}: value {value} is not finite")));
        }
        if !(uncertainty > 0.0) || !uncertainty.is_finite() {
            return Err(MsdError::InvalidDataset(format!(
                "{label}: uncertainty {uncertainty} must be positive and finite"
            )));
        }
        Ok(Self { label, value, uncertainty })
    }
}

/// Minimum number of observations for which Q_E is defined.
pub const MIN_OBSERVATIONS: usize = 3;

/// An ordered set of at least three observations with unique labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    observations: Vec<Observation>,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.len() < MIN_OBSERVATIONS {
            return Err(MsdError::InvalidDataset(format!(
                "need at least {MIN_OBSERVATIONS} observations, got {}",
                observations.len()
            )));
        }
        let mut seen = HashSet::new();
        for o in &observations {
            // re-run the per-observation checks for struct-literal input
            Observation::new(o.label.clone(), o.value, o.uncertainty)?;
            if !seen.insert(o.label.as_str()) {
                return Err(MsdError::InvalidDataset(format!("duplicate label '{}'", o.label)));
            }
        }
        Ok(Self { observations })
    }

    /// Build from parallel slices; labels default to 1-based indices.
    pub fn from_slices(values: &[f64], uncertainties: &[f64], labels: Option<&[String]>) -> Result<Self> {
        if values.len() != uncertainties.len() {
            return Err(MsdError::InvalidDataset(format!(
                "{} values but {} uncertainties",
                values.len(),
                uncertainties.len()
            )));
        }
        if let Some(l) = labels {
            if l.len() != values.len() {
                return Err(MsdError::InvalidDataset(format!("{} values but {} labels", values.len(), l.len())));
            }
        }
        let obs = values
            .iter()
            .zip(uncertainties)
            .enumerate()
            .map(|(i, (&x, &u))| {
                let label = labels.map_or_else(|| (i + 1).to_string(), |l| l[i].clone());
                Observation::new(label, x, u)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    pub fn uncertainties(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.uncertainty).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.observations.iter().map(|o| o.label.clone()).collect()
    }
}

/// Scaled differences d_ij for one subject i, j ≠ i, in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledDifferenceRow {
    pub subject: usize,
    pub differences: Vec<f64>,
}

/// Q_E for every observation, plus the differences behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdResult {
    pub labels: Vec<String>,
    pub q_e: Vec<f64>,
    pub rows: Vec<ScaledDifferenceRow>,
}

#[inline]
pub(crate) fn scaled_difference(xi: f64, ui: f64, xj: f64, uj: f64) -> f64 {
    (xi - xj) / (ui * ui + uj * uj).sqrt()
}

/// Median of a scratch buffer; even counts average the two central
/// order statistics. The buffer is reordered.
pub fn median_in_place(buf: &mut [f64]) -> f64 {
    let m = buf.len();
    assert!(m > 0, "median of empty slice");
    let mid = m / 2;
    let (lower, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if m % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

/// d_ij = (x_i − x_j)/√(u_i² + u_j²) for all i and j ≠ i.
pub fn scaled_differences(ds: &Dataset) -> Result<Vec<ScaledDifferenceRow>> {
    let obs = ds.observations();
    let rows = (0..obs.len())
        .map(|i| {
            let differences = obs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, oj)| scaled_difference(obs[i].value, obs[i].uncertainty, oj.value, oj.uncertainty))
                .collect::<Vec<_>>();
            if let Some(bad) = differences.iter().find(|d| !d.is_finite()) {
                return Err(MsdError::InvalidDataset(format!(
                    "non-finite scaled difference {bad} for '{}'",
                    obs[i].label
                )));
            }
            Ok(ScaledDifferenceRow { subject: i, differences })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

/// Q_E(i) = med_{j≠i} |d_ij| for every observation.
pub fn msd(ds: &Dataset) -> Result<MsdResult> {
    let rows = scaled_differences(ds)?;
    let mut buf = Vec::with_capacity(ds.len());
    let q_e = rows
        .iter()
        .map(|row| {
            buf.clear();
            buf.extend(row.differences.iter().map(|d| d.abs()));
            median_in_place(&mut buf)
        })
        .collect();
    Ok(MsdResult { labels: ds.labels(), q_e, rows })
}

/// Q_E for every observation from raw slices, writing into `out`.
///
/// Allocation-free inner kernel for simulation loops: `scratch` is reused
/// for the absolute differences. No validation is performed.
pub fn q_e_into(values: &[f64], uncertainties: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate().take(values.len()) {
        *o = q_e_single(values, uncertainties, i, scratch);
    }
}

/// Q_E for observation `i` only.
pub fn q_e_single(values: &[f64], uncertainties: &[f64], i: usize, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    let (xi, ui) = (values[i], uncertainties[i]);
    for j in 0..values.len() {
        if j != i {
            scratch.push(scaled_difference(xi, ui, values[j], uncertainties[j]).abs());
        }
    }
    median_in_place(scratch)
}

/// Pairwise chi-squared comparator for observation `i`:
/// the mean of d_ij² over j ≠ i.
pub fn pwch_single(values: &[f64], uncertainties: &[f64], i: usize) -> f64 {
    let (xi, ui) = (values[i], uncertainties[i]);
    let n = values.len();
    let sum: f64 = (0..n)
        .filter(|&j| j != i)
        .map(|j| {
            let d = scaled_difference(xi, ui, values[j], uncertainties[j]);
            d * d
        })
        .sum();
    sum / (n - 1) as f64
}

/// Per-observation pairwise chi-squared comparator statistic.
pub fn pairwise_chisq(ds: &Dataset) -> Result<Vec<(String, f64)>> {
    let rows = scaled_differences(ds)?;
    Ok(rows
        .iter()
        .map(|row| {
            let s = row.differences.iter().map(|d| d * d).sum::<f64>() / row.differences.len() as f64;
            (ds.observations()[row.subject].label.clone(), s)
        })
        .collect())
}
