//! Parametric bootstrap for Q_E under reported uncertainties, with
//! multiple-comparison adjustment of the resulting p-values.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MsdError, Result};
use crate::mc::{empirical_quantile, replicate_rng};
use crate::msd::{msd, q_e_into, Dataset};

pub const DEFAULT_ITERATIONS: usize = 2000;
pub const MIN_ITERATIONS: usize = 100;
pub const DEFAULT_LEVELS: [f64; 2] = [0.95, 0.99];
pub const QUANTILE_METHOD: &str = "linear interpolation between order statistics (type 7)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { iterations: DEFAULT_ITERATIONS, seed: 1, levels: DEFAULT_LEVELS.to_vec() }
    }
}

impl BootstrapConfig {
    pub fn new(iterations: usize, seed: u64) -> Result<Self> {
        let cfg = Self { iterations, seed, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_levels(mut self, levels: Vec<f64>) -> Result<Self> {
        self.levels = levels;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < MIN_ITERATIONS {
            return Err(MsdError::Config(format!(
                "{} bootstrap iterations is below the minimum of {MIN_ITERATIONS}",
                self.iterations
            )));
        }
        if self.iterations as u64 > u32::MAX as u64 {
            return Err(MsdError::Config(format!("{} iterations exceeds the stream range", self.iterations)));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(MsdError::Config(format!("quantile level {l} must lie strictly between 0 and 1")));
        }
        Ok(())
    }
}

/// A p-value that may only be known as an upper bound (no simulated value
/// reached the observed one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PValue {
    pub value: f64,
    pub is_upper_bound: bool,
}

impl PValue {
    pub fn exact(value: f64) -> Self {
        Self { value, is_upper_bound: false }
    }

    pub fn upper_bound(value: f64) -> Self {
        Self { value, is_upper_bound: true }
    }

    /// p-value from `count` of `total` simulated values at or above the
    /// observed one, floored at 1/total.
    pub fn from_count(count: usize, total: usize) -> Self {
        if count == 0 {
            Self::upper_bound(1.0 / total as f64)
        } else {
            Self::exact(count as f64 / total as f64)
        }
    }
}

impl std::fmt::Display for PValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_upper_bound {
            f.write_str("< ")?;
        }
        match f.precision() {
            Some(p) => write!(f, "{:.*}", p, self.value),
            None => write!(f, "{}", self.value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjustment {
    Holm,
    Bh,
}

impl std::str::FromStr for Adjustment {
    type Err = MsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "holm" => Ok(Adjustment::Holm),
            "bh" => Ok(Adjustment::Bh),
            _ => Err(MsdError::Config(format!("unknown adjustment '{s}' (expected holm or bh)"))),
        }
    }
}

impl std::fmt::Display for Adjustment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Adjustment::Holm => "holm",
            Adjustment::Bh => "bh",
        })
    }
}

fn check_p(ps: impl IntoIterator<Item = f64>) -> Result<()> {
    for p in ps {
        if !(p > 0.0 && p <= 1.0) {
            return Err(MsdError::domain(format!("p-value {p} must lie in (0, 1]")));
        }
    }
    Ok(())
}

fn ascending_order(ps: &[PValue]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ps.len()).collect();
    // a bound equal to an exact value is the smaller of the two
    idx.sort_by(|&a, &b| {
        ps[a].value.total_cmp(&ps[b].value).then(ps[b].is_upper_bound.cmp(&ps[a].is_upper_bound))
    });
    idx
}

/// Holm step-down adjustment. The result is an upper bound when the term
/// that attains the running maximum is one.
pub fn holm_adjust_pvalues(ps: &[PValue]) -> Result<Vec<PValue>> {
    check_p(ps.iter().map(|p| p.value))?;
    let m = ps.len();
    let mut out = vec![PValue::exact(0.0); m];
    let mut running: Option<PValue> = None;
    for (rank, &i) in ascending_order(ps).iter().enumerate() {
        let term = PValue { value: ((m - rank) as f64 * ps[i].value).min(1.0), ..ps[i] };
        running = Some(match running {
            None => term,
            Some(r) if term.value > r.value => term,
            Some(r) if term.value == r.value => PValue { is_upper_bound: r.is_upper_bound && term.is_upper_bound, ..r },
            Some(r) => r,
        });
        out[i] = running.unwrap();
    }
    Ok(out)
}

/// Benjamini–Hochberg step-up adjustment. The result is an upper bound
/// when any term in its minimisation window is one.
pub fn bh_adjust_pvalues(ps: &[PValue]) -> Result<Vec<PValue>> {
    check_p(ps.iter().map(|p| p.value))?;
    let m = ps.len();
    let order = ascending_order(ps);
    let mut out = vec![PValue::exact(0.0); m];
    let mut running = PValue::exact(1.0);
    let mut any_bound = false;
    for (rank, &i) in order.iter().enumerate().rev() {
        let term = (m as f64 / (rank + 1) as f64 * ps[i].value).min(1.0);
        any_bound |= ps[i].is_upper_bound;
        if term < running.value {
            running.value = term;
        }
        running.is_upper_bound = any_bound;
        out[i] = running;
    }
    Ok(out)
}

pub fn holm_adjust(ps: &[f64]) -> Result<Vec<f64>> {
    let wrapped: Vec<PValue> = ps.iter().copied().map(PValue::exact).collect();
    Ok(holm_adjust_pvalues(&wrapped)?.into_iter().map(|p| p.value).collect())
}

pub fn bh_adjust(ps: &[f64]) -> Result<Vec<f64>> {
    let wrapped: Vec<PValue> = ps.iter().copied().map(PValue::exact).collect();
    Ok(bh_adjust_pvalues(&wrapped)?.into_iter().map(|p| p.value).collect())
}

pub fn adjust_pvalues(ps: &[PValue], method: Adjustment) -> Result<Vec<PValue>> {
    match method {
        Adjustment::Holm => holm_adjust_pvalues(ps),
        Adjustment::Bh => bh_adjust_pvalues(ps),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapRecord {
    pub label: String,
    pub q_e: f64,
    /// Empirical quantiles of the simulated Q_E, one per configured level.
    pub quantiles: Vec<f64>,
    pub p_raw: PValue,
    pub p_holm: PValue,
    pub p_bh: PValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub iterations: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub quantile_method: &'static str,
    pub records: Vec<BootstrapRecord>,
}

/// Simulated Q_E values, `draws[b][i]` for replicate `b` and observation
/// `i`, with every observation drawn from N(0, uᵢ).
pub fn simulate_null(ds: &Dataset, iterations: usize, seed: u64) -> Vec<Vec<f64>> {
    let u = ds.uncertainties();
    let n = u.len();
    (0..iterations as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], Vec::with_capacity(n)),
            |(x, scratch), b| {
                let mut rng = replicate_rng(seed, b);
                for (xi, ui) in x.iter_mut().zip(&u) {
                    *xi = ui * rng.sample::<f64, _>(StandardNormal);
                }
                let mut q = vec![0.0; n];
                q_e_into(x, &u, scratch, &mut q);
                q
            },
        )
        .collect()
}

pub fn bootstrap_msd(ds: &Dataset, cfg: &BootstrapConfig) -> Result<BootstrapReport> {
    cfg.validate()?;
    let observed = msd(ds)?;
    let draws = simulate_null(ds, cfg.iterations, cfg.seed);
    let n = ds.len();
    let mut column = vec![0.0; cfg.iterations];
    let mut quantiles = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for (i, &q_obs) in observed.q_e.iter().enumerate() {
        for (c, d) in column.iter_mut().zip(&draws) {
            *c = d[i];
        }
        column.sort_by(f64::total_cmp);
        let at_or_above = cfg.iterations - column.partition_point(|&v| v < q_obs);
        raw.push(PValue::from_count(at_or_above, cfg.iterations));
        quantiles.push(cfg.levels.iter().map(|&l| empirical_quantile(&column, l)).collect());
    }
    let holm = holm_adjust_pvalues(&raw)?;
    let bh = bh_adjust_pvalues(&raw)?;
    let records = observed
        .labels
        .into_iter()
        .zip(observed.q_e)
        .zip(quantiles)
        .enumerate()
        .map(|(i, ((label, q_e), quantiles))| BootstrapRecord {
            label,
            q_e,
            quantiles,
            p_raw: raw[i],
            p_holm: holm[i],
            p_bh: bh[i],
        })
        .collect();
    Ok(BootstrapReport {
        iterations: cfg.iterations,
        seed: cfg.seed,
        levels: cfg.levels.clone(),
        quantile_method: QUANTILE_METHOD,
        records,
    })
}
