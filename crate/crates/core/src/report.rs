//! Whole-dataset analysis: Q_E with IID quantile flags, rule-of-thumb
//! flags and an optional bootstrap block.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bootstrap::{bootstrap_msd, Adjustment, BootstrapConfig, PValue, QUANTILE_METHOD};
use crate::dist::{self, Parity};
use crate::error::Result;
use crate::msd::{msd, Dataset};
use crate::tables::{adjusted_probability, TableSet};

pub const RULE_OF_THUMB: f64 = 2.0;
pub const RULE_OF_THUMB_STRICT: f64 = 2.5;
pub const REPORT_LEVELS: [f64; 2] = [0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Multiple,
}

/// Where IID quantiles come from.
pub enum QuantileSource<'a> {
    Exact,
    Tables { set: &'a TableSet, origin: String },
}

impl QuantileSource<'_> {
    fn quantile(&self, p: f64, n: usize) -> Result<f64> {
        match self {
            QuantileSource::Exact => dist::quantile(p, n),
            QuantileSource::Tables { set, .. } => set.quantile(n, p),
        }
    }

    fn describe(&self) -> String {
        match self {
            QuantileSource::Exact => "exact quadrature".into(),
            QuantileSource::Tables { origin, .. } => format!("interpolation tables ({origin})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelQuantile {
    pub p: f64,
    pub quantile: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub single_95: bool,
    pub single_99: bool,
    pub multiple_95: bool,
    pub multiple_99: bool,
    pub above_2_0: bool,
    pub above_2_5: bool,
}

impl Flags {
    pub fn compute(q_e: f64, single: &[LevelQuantile; 2], multiple: &[LevelQuantile; 2]) -> Self {
        Self {
            single_95: q_e > single[0].quantile,
            single_99: q_e > single[1].quantile,
            multiple_95: q_e > multiple[0].quantile,
            multiple_99: q_e > multiple[1].quantile,
            above_2_0: q_e > RULE_OF_THUMB,
            above_2_5: q_e > RULE_OF_THUMB_STRICT,
        }
    }

    /// (95%, 99%) flags for the chosen mode.
    pub fn for_mode(&self, mode: Mode) -> (bool, bool) {
        match mode {
            Mode::Single => (self.single_95, self.single_99),
            Mode::Multiple => (self.multiple_95, self.multiple_99),
        }
    }
}

/// p-value with its printed form ("< 0.0026" for bounds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportedP {
    pub value: f64,
    pub upper_bound: bool,
    pub text: String,
}

impl From<PValue> for ReportedP {
    fn from(p: PValue) -> Self {
        Self { value: p.value, upper_bound: p.is_upper_bound, text: format!("{p:.4}") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabBootstrap {
    pub quantiles: Vec<LevelQuantile>,
    pub p_raw: ReportedP,
    pub p_holm: ReportedP,
    pub p_bh: ReportedP,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabRecord {
    pub lab: String,
    pub value: f64,
    pub u: f64,
    pub q_e: f64,
    pub flags: Flags,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<LabBootstrap>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapMeta {
    pub iterations: usize,
    pub seed: u64,
    pub quantile_method: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub n: usize,
    pub parity: Parity,
    pub mode: Mode,
    pub adjust: Adjustment,
    pub quantile_source: String,
    pub multiple_method: &'static str,
    pub single_quantiles: [LevelQuantile; 2],
    pub multiple_quantiles: [LevelQuantile; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub metadata: ReportMeta,
    pub labs: Vec<LabRecord>,
}

pub struct AnalysisOptions<'a> {
    pub mode: Mode,
    pub adjust: Adjustment,
    pub source: QuantileSource<'a>,
    pub bootstrap: Option<BootstrapConfig>,
}

pub fn analyze(ds: &Dataset, opts: &AnalysisOptions<'_>) -> Result<AnalysisReport> {
    let n = ds.len();
    let level = |p: f64, adjusted: bool| -> Result<LevelQuantile> {
        let p1 = if adjusted { adjusted_probability(n, p) } else { p };
        Ok(LevelQuantile { p, quantile: opts.source.quantile(p1, n)? })
    };
    let single = [level(REPORT_LEVELS[0], false)?, level(REPORT_LEVELS[1], false)?];
    let multiple = [level(REPORT_LEVELS[0], true)?, level(REPORT_LEVELS[1], true)?];

    let result = msd(ds)?;
    let boot = match &opts.bootstrap {
        Some(cfg) => {
            let cfg = cfg.clone().with_levels(REPORT_LEVELS.to_vec())?;
            Some(bootstrap_msd(ds, &cfg)?)
        }
        None => None,
    };

    let labs = ds
        .observations()
        .iter()
        .zip(&result.q_e)
        .enumerate()
        .map(|(i, (o, &q_e))| LabRecord {
            lab: o.label.clone(),
            value: o.value,
            u: o.uncertainty,
            q_e,
            flags: Flags::compute(q_e, &single, &multiple),
            bootstrap: boot.as_ref().map(|b| {
                let r = &b.records[i];
                LabBootstrap {
                    quantiles: REPORT_LEVELS
                        .iter()
                        .zip(&r.quantiles)
                        .map(|(&p, &quantile)| LevelQuantile { p, quantile })
                        .collect(),
                    p_raw: r.p_raw.into(),
                    p_holm: r.p_holm.into(),
                    p_bh: r.p_bh.into(),
                }
            }),
        })
        .collect();

    Ok(AnalysisReport {
        metadata: ReportMeta {
            n,
            parity: Parity::of(n),
            mode: opts.mode,
            adjust: opts.adjust,
            quantile_source: opts.source.describe(),
            multiple_method: "single-observation quantile at p^(1/n)",
            single_quantiles: single,
            multiple_quantiles: multiple,
            bootstrap: boot.map(|b| BootstrapMeta {
                iterations: b.iterations,
                seed: b.seed,
                quantile_method: QUANTILE_METHOD,
            }),
        },
        labs,
    })
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let _ = writeln!(out, "n = {} ({}), quantiles from {}", m.n, m.parity, m.quantile_source);
        let _ = writeln!(
            out,
            "single-observation quantiles:   0.95 {:.3}   0.99 {:.3}",
            m.single_quantiles[0].quantile, m.single_quantiles[1].quantile
        );
        let _ = writeln!(
            out,
            "multiple-observation quantiles: 0.95 {:.3}   0.99 {:.3}   ({})",
            m.multiple_quantiles[0].quantile, m.multiple_quantiles[1].quantile, m.multiple_method
        );
        let mode = match m.mode {
            Mode::Single => "single",
            Mode::Multiple => "multiple",
        };
        if let Some(b) = &m.bootstrap {
            let _ = writeln!(out, "bootstrap: B = {}, seed = {}, p adjusted by {}", b.iterations, b.seed, m.adjust);
        }
        let _ = writeln!(out);
        let label_w = self.labs.iter().map(|l| l.lab.len()).max().unwrap_or(3).max(3);
        let _ = write!(out, "{:<label_w$}  {:>8}  {:<10} {:<10}", "lab", "q_e", format!("{mode} 95/99"), "thumb 2/2.5");
        if m.bootstrap.is_some() {
            let _ = write!(out, "  {:>7} {:>7}  {:>10} {:>10}", "boot95", "boot99", "p raw", format!("p {}", m.adjust));
        }
        out.push('\n');
        let mark = |b: bool| if b { "*" } else { "." };
        for l in &self.labs {
            let (f95, f99) = l.flags.for_mode(m.mode);
            let _ = write!(
                out,
                "{:<label_w$}  {:>8.3}  {:<10} {:<10}",
                l.lab,
                l.q_e,
                format!("{} {}", mark(f95), mark(f99)),
                format!("{} {}", mark(l.flags.above_2_0), mark(l.flags.above_2_5)),
            );
            if let Some(b) = &l.bootstrap {
                let adj = match m.adjust {
                    Adjustment::Holm => &b.p_holm,
                    Adjustment::Bh => &b.p_bh,
                };
                let _ = write!(
                    out,
                    "  {:>7.3} {:>7.3}  {:>10} {:>10}",
                    b.quantiles[0].quantile, b.quantiles[1].quantile, b.p_raw.text, adj.text
                );
            }
            out.push('\n');
        }
        out
    }
}
