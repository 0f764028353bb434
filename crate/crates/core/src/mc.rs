//! Seeded Monte Carlo experiments: multiple-observation quantiles, power
//! and outlier resistance, and the heteroscedastic rule-of-thumb study.
//!
//! Replicate `r` always draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `r`, and results are reduced with integer counts or sorted
//! pools, so output does not depend on the rayon thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MsdError, Result};
use crate::msd::{pwch_single, q_e_into, q_e_single, MIN_OBSERVATIONS};

/// Fewer replicates than this give quantile estimates too noisy to report.
pub const MIN_QUANTILE_REPLICATES: usize = 1000;

pub const DEFAULT_QUANTILE_REPLICATES: usize = 100_000;
pub const DEFAULT_CURVE_REPLICATES: usize = 10_000;

/// Per-value and per-dataset thresholds for the rule-of-thumb study.
pub const GUIDELINE_VALUE_THRESHOLD: f64 = 2.0;
pub const GUIDELINE_DATASET_THRESHOLD: f64 = 2.5;

/// Degrees of freedom of the χ² variance distribution in the rule-of-thumb study.
pub const GUIDELINE_VARIANCE_DOF: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replicates: usize,
    pub n: usize,
}

impl SimConfig {
    pub fn new(seed: u64, replicates: usize, n: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(MsdError::Config("replicates must be at least 1".into()));
        }
        if replicates as u64 > u32::MAX as u64 {
            return Err(MsdError::Config(format!("{replicates} replicates exceeds the stream range")));
        }
        if n < MIN_OBSERVATIONS {
            return Err(MsdError::Config(format!("n = {n} is below the minimum of {MIN_OBSERVATIONS}")));
        }
        Ok(Self { seed, replicates, n })
    }
}

/// RNG for one replicate. `stream` identifies the replicate (and, where an
/// experiment has several independent parts, the part as well).
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn fill_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for x in out {
        *x = rng.sample(StandardNormal);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Msd,
    Pwch,
}

impl Statistic {
    /// Statistic for observation `i`. `scratch` is reused between calls.
    pub fn eval(self, values: &[f64], uncertainties: &[f64], i: usize, scratch: &mut Vec<f64>) -> f64 {
        match self {
            Statistic::Msd => q_e_single(values, uncertainties, i, scratch),
            Statistic::Pwch => pwch_single(values, uncertainties, i),
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistic::Msd => "msd",
            Statistic::Pwch => "pwch",
        })
    }
}

impl std::str::FromStr for Statistic {
    type Err = MsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "msd" => Ok(Statistic::Msd),
            "pwch" => Ok(Statistic::Pwch),
            _ => Err(MsdError::Config(format!("unknown statistic '{s}' (expected msd or pwch)"))),
        }
    }
}

/// Linear interpolation between order statistics (type 7).
/// `sorted` must be ascending and non-empty.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_probabilities(ps: &[f64]) -> Result<()> {
    match ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        Some(p) => Err(MsdError::Config(format!("probability {p} must lie strictly between 0 and 1"))),
        None => Ok(()),
    }
}

fn check_quantile_replicates(cfg: &SimConfig) -> Result<()> {
    if cfg.replicates < MIN_QUANTILE_REPLICATES {
        return Err(MsdError::Config(format!(
            "{} replicates is below the minimum of {MIN_QUANTILE_REPLICATES} for quantile estimation",
            cfg.replicates
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileEstimate {
    pub p: f64,
    pub quantile: f64,
    /// Half the width of the distribution-free 95% order-statistic interval,
    /// divided by 1.96.
    pub se: f64,
}

fn estimate(sorted: &[f64], p: f64) -> QuantileEstimate {
    let h = 1.96 * (p * (1.0 - p) / sorted.len() as f64).sqrt();
    let lo = empirical_quantile(sorted, (p - h).max(0.0));
    let hi = empirical_quantile(sorted, (p + h).min(1.0));
    QuantileEstimate { p, quantile: empirical_quantile(sorted, p), se: (hi - lo) / (2.0 * 1.96) }
}

/// Empirical quantiles of the per-dataset maximum of Q_E over IID standard
/// normal datasets of size `cfg.n`.
pub fn simulate_multi_quantiles(cfg: &SimConfig, probabilities: &[f64]) -> Result<Vec<QuantileEstimate>> {
    check_quantile_replicates(cfg)?;
    check_probabilities(probabilities)?;
    let n = cfg.n;
    let ones = vec![1.0; n];
    let mut maxima: Vec<f64> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], Vec::with_capacity(n)),
            |(x, q, scratch), r| {
                fill_normal(&mut replicate_rng(cfg.seed, r), x);
                q_e_into(x, &ones, scratch, q);
                q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            },
        )
        .collect();
    maxima.sort_by(f64::total_cmp);
    Ok(probabilities.iter().map(|&p| estimate(&maxima, p)).collect())
}

pub fn multi_quantiles_csv(n: usize, replicates: usize, seed: u64, rows: &[QuantileEstimate]) -> String {
    let mut out = format!("# maximum Q_E over IID normal datasets; replicates: {replicates}; seed: {seed}\nn,p,quantile,se\n");
    for r in rows {
        out.push_str(&format!("{n},{},{},{}\n", r.p, r.quantile, r.se));
    }
    out
}

/// Empirical quantile of PWCH values pooled over every observation of every
/// replicate.
pub fn calibrate_pwch_quantile(cfg: &SimConfig, p: f64) -> Result<f64> {
    check_quantile_replicates(cfg)?;
    check_probabilities(&[p])?;
    let n = cfg.n;
    let ones = vec![1.0; n];
    let mut pooled: Vec<f64> = (0..cfg.replicates as u64)
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut x = vec![0.0; n];
            fill_normal(&mut replicate_rng(cfg.seed, r), &mut x);
            let ones = &ones;
            (0..n).map(move |i| pwch_single(&x, ones, i))
        })
        .collect();
    pooled.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&pooled, p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub statistic: Statistic,
    pub critical: f64,
    pub replicates: usize,
    pub grid: Vec<f64>,
    pub proportions: Vec<f64>,
    pub standard_errors: Vec<f64>,
}

impl PowerCurve {
    fn from_counts(statistic: Statistic, critical: f64, grid: &[f64], counts: &[u64], replicates: usize) -> Self {
        let r = replicates as f64;
        let proportions: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
        let standard_errors = proportions.iter().map(|p| (p * (1.0 - p) / r).sqrt()).collect();
        Self { statistic, critical, replicates, grid: grid.to_vec(), proportions, standard_errors }
    }

    /// Delimited text: grid value, proportion, standard error.
    pub fn to_csv(&self, grid_name: &str) -> String {
        let mut out = format!(
            "# statistic: {}; critical value: {}; replicates: {}\n{grid_name},proportion,se\n",
            self.statistic, self.critical, self.replicates
        );
        for ((g, p), se) in self.grid.iter().zip(&self.proportions).zip(&self.standard_errors) {
            out.push_str(&format!("{g},{p},{se}\n"));
        }
        out
    }
}

fn check_curve_args(grid: &[f64], critical: f64) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
        return Err(MsdError::Config("grid must be non-empty and finite".into()));
    }
    if !(critical > 0.0 && critical.is_finite()) {
        return Err(MsdError::Config(format!("critical value {critical} must be positive")));
    }
    Ok(())
}

/// Count, per grid point, replicates whose subject (observation 0) exceeds
/// `critical` after `shift(x, g)` is applied to the base normal draw. The
/// same draws are reused at every grid point.
fn exceedance_counts<S>(cfg: &SimConfig, statistic: Statistic, grid: &[f64], critical: f64, shift: S) -> Vec<u64>
where
    S: Fn(&mut [f64], f64) + Sync,
{
    let n = cfg.n;
    let ones = vec![1.0; n];
    let zero = || vec![0u64; grid.len()];
    (0..cfg.replicates as u64)
        .into_par_iter()
        .fold(
            || (zero(), vec![0.0; n], vec![0.0; n], Vec::with_capacity(n)),
            |(mut counts, mut base, mut x, mut scratch), r| {
                fill_normal(&mut replicate_rng(cfg.seed, r), &mut base);
                for (c, &g) in counts.iter_mut().zip(grid) {
                    x.copy_from_slice(&base);
                    shift(&mut x, g);
                    if statistic.eval(&x, &ones, 0, &mut scratch) > critical {
                        *c += 1;
                    }
                }
                (counts, base, x, scratch)
            },
        )
        .map(|(counts, ..)| counts)
        .reduce(zero, |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
}

/// Detection rate when the subject observation is displaced by δ from a
/// null of n − 1 standard normals.
pub fn simulate_power(cfg: &SimConfig, statistic: Statistic, displacements: &[f64], critical: f64) -> Result<PowerCurve> {
    check_curve_args(displacements, critical)?;
    let counts = exceedance_counts(cfg, statistic, displacements, critical, |x, d| x[0] += d);
    Ok(PowerCurve::from_counts(statistic, critical, displacements, &counts, cfg.replicates))
}

/// False-positive rate of a null subject while a second observation is
/// moved to each contaminant location.
pub fn simulate_resistance(
    cfg: &SimConfig,
    statistic: Statistic,
    contaminants: &[f64],
    critical: f64,
) -> Result<PowerCurve> {
    check_curve_args(contaminants, critical)?;
    let counts = exceedance_counts(cfg, statistic, contaminants, critical, |x, c| x[1] += c);
    Ok(PowerCurve::from_counts(statistic, critical, contaminants, &counts, cfg.replicates))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuidelineRow {
    pub n: usize,
    pub replicates: usize,
    /// Share of all individual Q_E values above 2.0.
    pub per_value_rate: f64,
    pub per_value_se: f64,
    /// Share of datasets with any Q_E above 2.5.
    pub per_dataset_rate: f64,
    pub per_dataset_se: f64,
}

pub fn guideline_csv(rows: &[GuidelineRow]) -> String {
    let mut out = format!(
        "# variances ~ chi2({GUIDELINE_VARIANCE_DOF}); per-value threshold {GUIDELINE_VALUE_THRESHOLD}; per-dataset threshold {GUIDELINE_DATASET_THRESHOLD}\nn,replicates,per_value_rate,per_value_se,per_dataset_rate,per_dataset_se\n"
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.replicates, r.per_value_rate, r.per_value_se, r.per_dataset_rate, r.per_dataset_se
        ));
    }
    out
}

pub const GUIDELINE_MIN_N: usize = 5;
pub const GUIDELINE_MAX_N: usize = 25;

/// Heteroscedastic null datasets: each variance is χ²(3), each value is
/// N(0, variance). Each n uses its own block of streams.
pub fn simulate_hetero_guideline(n_values: &[usize], replicates: usize, seed: u64) -> Result<Vec<GuidelineRow>> {
    if n_values.is_empty() {
        return Err(MsdError::Config("no n values given".into()));
    }
    if let Some(n) = n_values.iter().find(|n| !(GUIDELINE_MIN_N..=GUIDELINE_MAX_N).contains(*n)) {
        return Err(MsdError::Config(format!(
            "n = {n} outside the studied range [{GUIDELINE_MIN_N}, {GUIDELINE_MAX_N}]"
        )));
    }
    n_values
        .iter()
        .map(|&n| {
            let cfg = SimConfig::new(seed, replicates, n)?;
            let (values, datasets) = (0..replicates as u64)
                .into_par_iter()
                .map_init(
                    || (vec![0.0; n], vec![0.0; n], vec![0.0; n], Vec::with_capacity(n)),
                    |(x, u, q, scratch), r| {
                        let mut rng = replicate_rng(cfg.seed, ((n as u64) << 32) | r);
                        for (xi, ui) in x.iter_mut().zip(u.iter_mut()) {
                            let var: f64 =
                                (0..GUIDELINE_VARIANCE_DOF).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
                            *ui = var.sqrt();
                            *xi = *ui * rng.sample::<f64, _>(StandardNormal);
                        }
                        q_e_into(x, u, scratch, q);
                        let above = q.iter().filter(|&&v| v > GUIDELINE_VALUE_THRESHOLD).count() as u64;
                        let any = q.iter().any(|&v| v > GUIDELINE_DATASET_THRESHOLD) as u64;
                        (above, any)
                    },
                )
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            let total = (replicates * n) as f64;
            let pv = values as f64 / total;
            let pd = datasets as f64 / replicates as f64;
            Ok(GuidelineRow {
                n,
                replicates,
                per_value_rate: pv,
                // values within a dataset are correlated; this is the naive binomial error
                per_value_se: (pv * (1.0 - pv) / total).sqrt(),
                per_dataset_rate: pd,
                per_dataset_se: (pd * (1.0 - pd) / replicates as f64).sqrt(),
            })
        })
        .collect()
}
