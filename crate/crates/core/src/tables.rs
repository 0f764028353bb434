//! Precomputed probability tables for fast quantile lookup.
//!
//! Each table holds P(Q_E ≤ q) on a grid of n values and 51 quantile knots
//! placed on the transformed axis s = q/(1+q). Tabulated rows are
//! interpolated over s with a monotone spline; other n are first
//! interpolated across rows on n/(n+1) at every knot. Quantiles come from
//! root finding on the probability spline, never from a transposed fit.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{
    self, asymptotic_lower_bound, cdf_asymptotic, cdf_even, cdf_odd, DistSpec, Parity, EVEN_ABS_TOL,
    ODD_INNER_ABS_TOL, ODD_OUTER_ABS_TOL,
};
use crate::error::{MsdError, Result};
use crate::numerics::{find_root, MonotoneSpline};

pub const TABLE_FORMAT_VERSION: &str = "msd-quantile-table v1";

/// Number of regularly spaced knots on s ∈ [0, 0.8].
pub const REGULAR_KNOTS: usize = 49;
pub const REGULAR_KNOT_MAX: f64 = 0.8;

/// A row of a table: a finite n or the n → ∞ limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TableN {
    Finite(usize),
    Infinite,
}

impl TableN {
    /// Position on the cross-row interpolation axis n/(n+1).
    pub fn axis(&self) -> f64 {
        match *self {
            TableN::Finite(n) => n as f64 / (n as f64 + 1.0),
            TableN::Infinite => 1.0,
        }
    }
}

impl std::fmt::Display for TableN {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableN::Finite(n) => write!(f, "{n}"),
            TableN::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for TableN {
    type Err = MsdError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(TableN::Infinite);
        }
        s.parse::<usize>()
            .map(TableN::Finite)
            .map_err(|_| MsdError::TableFormat(format!("bad row label '{s}'")))
    }
}

/// The 51 knots on s = q/(1+q): 49 regular values on [0, 0.8], the left
/// edge of the limiting distribution, and s = 1 (q = ∞).
pub fn knot_grid() -> Vec<f64> {
    let mut s: Vec<f64> = (0..REGULAR_KNOTS)
        .map(|k| (k as f64 / (REGULAR_KNOTS - 1) as f64) * REGULAR_KNOT_MAX)
        .collect();
    let edge = asymptotic_lower_bound();
    s.push(edge / (1.0 + edge));
    s.push(1.0);
    s.sort_by(f64::total_cmp);
    s
}

fn knot_to_q(s: f64) -> f64 {
    if s >= 1.0 {
        f64::INFINITY
    } else {
        s / (1.0 - s)
    }
}

/// Even grid: 4..=30, {d, d+4} for each decade d = 30..90, 100, then
/// 10^k and 5·10^k for k = 2..5, then ∞.
pub fn even_grid() -> Vec<TableN> {
    let mut n: Vec<usize> = (4..=30).step_by(2).collect();
    for d in (30..=90).step_by(10) {
        n.push(d);
        n.push(d + 4);
    }
    for k in 2..=5u32 {
        n.push(10usize.pow(k));
        n.push(5 * 10usize.pow(k));
    }
    n.sort_unstable();
    n.dedup();
    n.into_iter().map(TableN::Finite).chain(std::iter::once(TableN::Infinite)).collect()
}

/// Odd rows computed exactly: 3..=29, odd multiples of 5 to 95, 109..=189
/// step 20.
pub fn odd_exact_grid() -> Vec<usize> {
    let mut n: Vec<usize> = (3..=29).step_by(2).collect();
    n.extend((5..=95).step_by(10));
    n.extend((109..=189).step_by(20));
    n.sort_unstable();
    n.dedup();
    n
}

/// Odd grid: exact odd rows followed by the even rows above them and ∞.
pub fn odd_grid() -> Vec<TableN> {
    let exact = odd_exact_grid();
    let top = *exact.last().unwrap();
    exact
        .into_iter()
        .map(TableN::Finite)
        .chain(even_grid().into_iter().filter(|r| match r {
            TableN::Finite(n) => *n > top,
            TableN::Infinite => true,
        }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    parity: Parity,
    rows: Vec<TableN>,
    knots: Vec<f64>,
    probabilities: Vec<Vec<f64>>,
}

fn cell(row: TableN, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s >= 1.0 {
        return Ok(1.0);
    }
    let q = knot_to_q(s);
    match row {
        TableN::Infinite => Ok(cdf_asymptotic(q)),
        TableN::Finite(n) => {
            let spec = DistSpec::new(n)?;
            match spec.parity() {
                Parity::Even => cdf_even(q, &spec),
                Parity::Odd => cdf_odd(q, &spec),
            }
        }
    }
}

impl QuantileTable {
    /// Compute a table by quadrature. Cells are evaluated in parallel; the
    /// result does not depend on scheduling.
    pub fn build(parity: Parity) -> Result<Self> {
        let rows = match parity {
            Parity::Even => even_grid(),
            Parity::Odd => odd_grid(),
        };
        Self::build_rows(parity, rows)
    }

    /// Build over an explicit set of rows (ascending, ∞ last if present).
    pub fn build_rows(parity: Parity, rows: Vec<TableN>) -> Result<Self> {
        let knots = knot_grid();
        let cells: Vec<(usize, usize)> =
            (0..rows.len()).flat_map(|i| (0..knots.len()).map(move |j| (i, j))).collect();
        let values = cells
            .par_iter()
            .map(|&(i, j)| {
                cell(rows[i], knots[j]).map_err(|e| MsdError::TableCell {
                    n: rows[i].to_string(),
                    q: knot_to_q(knots[j]),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let probabilities = values.chunks(knots.len()).map(|c| c.to_vec()).collect();
        Self::from_parts(parity, rows, knots, probabilities)
    }

    pub fn from_parts(
        parity: Parity,
        rows: Vec<TableN>,
        knots: Vec<f64>,
        probabilities: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows.len() < 2 {
            return Err(MsdError::TableFormat("a table needs at least two rows".into()));
        }
        if rows.windows(2).any(|w| w[1].axis() <= w[0].axis()) {
            return Err(MsdError::TableFormat("rows must be strictly ascending in n".into()));
        }
        if knots.len() < 3 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MsdError::TableFormat("knots must be strictly ascending".into()));
        }
        if probabilities.len() != rows.len() || probabilities.iter().any(|p| p.len() != knots.len()) {
            return Err(MsdError::TableFormat("probability matrix shape mismatch".into()));
        }
        for (row, p) in rows.iter().zip(&probabilities) {
            if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(MsdError::TableFormat(format!("row {row}: probability outside [0, 1]")));
            }
            if p.windows(2).any(|w| w[1] < w[0]) {
                return Err(MsdError::TableFormat(format!("row {row}: probabilities decrease along q")));
            }
        }
        Ok(Self { parity, rows, knots, probabilities })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn rows(&self) -> &[TableN] {
        &self.rows
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn probabilities(&self) -> &[Vec<f64>] {
        &self.probabilities
    }

    pub fn row(&self, n: TableN) -> Option<&[f64]> {
        self.rows.iter().position(|&r| r == n).map(|i| self.probabilities[i].as_slice())
    }

    fn smallest_n(&self) -> usize {
        match self.rows[0] {
            TableN::Finite(n) => n,
            TableN::Infinite => usize::MAX,
        }
    }

    /// Probabilities at every knot for `n`, interpolated across rows if `n`
    /// is not tabulated.
    pub fn column_for(&self, n: usize) -> Result<Vec<f64>> {
        if Parity::of(n) != self.parity && n <= self.largest_same_parity_row() {
            return Err(MsdError::domain(format!("n = {n} does not match the {} table", self.parity)));
        }
        if n < self.smallest_n() {
            return Err(MsdError::domain(format!(
                "n = {n} is below the smallest tabulated n = {}",
                self.smallest_n()
            )));
        }
        if let Some(row) = self.row(TableN::Finite(n)) {
            return Ok(row.to_vec());
        }
        let x = TableN::Finite(n).axis();
        let axes: Vec<f64> = self.rows.iter().map(TableN::axis).collect();
        // rows[hi-1] < x < rows[hi]
        let hi = axes.partition_point(|&a| a < x);
        if hi >= self.rows.len() {
            return Err(MsdError::domain(format!("n = {n} lies above the table and it has no limiting row")));
        }
        let last = self.rows.len() - 1;
        let window: Vec<usize> = if hi == last {
            (last - 2..=last).collect()
        } else {
            let start = hi.saturating_sub(2).min(self.rows.len() - 4);
            (start..start + 4).collect()
        };
        let mut col: Vec<f64> = (0..self.knots.len())
            .map(|j| {
                let v = lagrange(x, window.iter().map(|&i| (axes[i], self.probabilities[i][j])));
                v.clamp(0.0, 1.0)
            })
            .collect();
        // cross-row cubic can leave small dips along q; restore monotonicity
        for j in 1..col.len() {
            if col[j] < col[j - 1] {
                col[j] = col[j - 1];
            }
        }
        Ok(col)
    }

    fn largest_same_parity_row(&self) -> usize {
        self.rows
            .iter()
            .filter_map(|r| match r {
                TableN::Finite(n) if Parity::of(*n) == self.parity => Some(*n),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Monotone spline of P(Q_E ≤ q) over s = q/(1+q) for `n`.
    pub fn spline_for(&self, n: usize) -> Result<MonotoneSpline> {
        MonotoneSpline::fit(&self.knots, &self.column_for(n)?)
    }

    pub fn interp_probability(&self, n: usize, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(MsdError::domain(format!("quantile {q} must be non-negative")));
        }
        let s = if q.is_infinite() { 1.0 } else { q / (1.0 + q) };
        Ok(self.spline_for(n)?.eval(s)?.clamp(0.0, 1.0))
    }

    pub fn interp_quantile(&self, n: usize, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(MsdError::domain(format!("probability {p} must lie strictly between 0 and 1")));
        }
        let spline = self.spline_for(n)?;
        let (lo, hi) = spline.domain();
        let s = find_root(|s| spline.eval(s).unwrap_or(f64::NAN) - p, lo, hi, 1e-13).map_err(|e| match e {
            MsdError::NoSignChange { .. } => {
                MsdError::domain(format!("p = {p} outside the range of the interpolated distribution for n = {n}"))
            }
            other => other,
        })?;
        Ok(knot_to_q(s))
    }

    /// Plain-text form: `#` header lines, a knot line, one row per n.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {TABLE_FORMAT_VERSION}");
        let _ = writeln!(out, "# parity: {}", self.parity);
        let _ = writeln!(out, "# axis: s = q/(1+q); cells are P(Q_E <= q) for a single observation among n");
        let _ = writeln!(
            out,
            "# knots: {REGULAR_KNOTS} regular on [0, {REGULAR_KNOT_MAX}], q = Phi^-1(0.75)/sqrt(2), q = inf"
        );
        let grid = match self.parity {
            Parity::Even => "4..30 step 2; d and d+4 for d = 30..90 step 10; 100; 10^k and 5*10^k, k = 2..5; inf",
            Parity::Odd => "3..29 step 2; 35..95 step 10; 109..189 step 20 (exact); even rows above 189; inf",
        };
        let _ = writeln!(out, "# n-grid: {grid}");
        let _ = writeln!(
            out,
            "# tolerances: even {EVEN_ABS_TOL:e}; odd inner {ODD_INNER_ABS_TOL:e}, outer {ODD_OUTER_ABS_TOL:e}; x0 truncated at +-{}",
            dist::X0_LIMIT
        );
        let _ = write!(out, "n");
        for k in &self.knots {
            let _ = write!(out, ",{k:?}");
        }
        out.push('\n');
        for (row, probs) in self.rows.iter().zip(&self.probabilities) {
            let _ = write!(out, "{row}");
            for p in probs {
                let _ = write!(out, ",{p:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut parity = None;
        let mut knots: Option<Vec<f64>> = None;
        let mut rows = Vec::new();
        let mut probabilities = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(p) = comment.trim().strip_prefix("parity:") {
                    parity = Some(p.trim().parse::<Parity>()?);
                }
                continue;
            }
            let mut fields = line.split(',');
            let head = fields.next().unwrap_or_default().trim();
            let nums = fields
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        MsdError::TableFormat(format!("line {}: bad number '{}'", lineno + 1, f.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if head == "n" {
                knots = Some(nums);
            } else {
                rows.push(head.parse::<TableN>()?);
                probabilities.push(nums);
            }
        }
        let parity = parity.ok_or_else(|| MsdError::TableFormat("missing '# parity:' header".into()))?;
        let knots = knots.ok_or_else(|| MsdError::TableFormat("missing knot line".into()))?;
        Self::from_parts(parity, rows, knots, probabilities)
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn read_from(path: &Path) -> std::result::Result<Self, TableLoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| TableLoadError::Io(path.display().to_string(), e))?;
        Self::from_text(&text).map_err(TableLoadError::Format)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TableLoadError {
    #[error("cannot read table {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Format(MsdError),
}

/// File name used for a table of the given parity inside a table directory.
pub fn table_file_name(parity: Parity) -> String {
    format!("msd_{parity}.csv")
}

/// Both parity tables, as stored together in a directory.
#[derive(Debug, Clone)]
pub struct TableSet {
    pub even: QuantileTable,
    pub odd: QuantileTable,
}

impl TableSet {
    pub fn load(dir: &Path) -> std::result::Result<Self, TableLoadError> {
        Ok(Self {
            even: QuantileTable::read_from(&dir.join(table_file_name(Parity::Even)))?,
            odd: QuantileTable::read_from(&dir.join(table_file_name(Parity::Odd)))?,
        })
    }

    pub fn for_n(&self, n: usize) -> &QuantileTable {
        match Parity::of(n) {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    pub fn quantile(&self, n: usize, p: f64) -> Result<f64> {
        self.for_n(n).interp_quantile(n, p)
    }

    pub fn probability(&self, n: usize, q: f64) -> Result<f64> {
        self.for_n(n).interp_probability(n, q)
    }
}

fn lagrange(x: f64, points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    points
        .clone()
        .enumerate()
        .map(|(i, (xi, yi))| {
            let w: f64 = points
                .clone()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, (xj, _))| (x - xj) / (xi - xj))
                .product();
            w * yi
        })
        .sum()
}

/// Single-observation probability adjusted for n simultaneous
/// observations: p₁ = pₙ^{1/n}.
pub fn adjusted_probability(n: usize, p: f64) -> f64 {
    p.powf(1.0 / n as f64)
}

/// Multiple-observation quantile from the single-observation
/// distribution at the adjusted probability p^{1/n}.
pub fn multi_quantile_adjusted(n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MsdError::domain(format!("probability {p} must lie strictly between 0 and 1")));
    }
    dist::quantile(adjusted_probability(n, p), n)
}

/// Probabilities reported in multiple-observation tables.
pub const MULTI_PROBABILITIES: [f64; 3] = [0.95, 0.99, 0.999];

/// Multiple-observation upper quantiles over a grid of n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiQuantileTable {
    pub parity: Parity,
    pub n: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// `quantiles[i][k]` is the quantile for `n[i]` at `probabilities[k]`.
    pub quantiles: Vec<Vec<f64>>,
}

impl MultiQuantileTable {
    /// Table from the p^{1/n} adjustment of the exact single-observation
    /// distribution.
    pub fn adjusted(parity: Parity, n: &[usize], probabilities: &[f64]) -> Result<Self> {
        if let Some(bad) = n.iter().find(|&&k| Parity::of(k) != parity) {
            return Err(MsdError::Parity(format!("n = {bad} in a {parity} table")));
        }
        let quantiles = n
            .par_iter()
            .map(|&k| probabilities.iter().map(|&p| multi_quantile_adjusted(k, p)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parity, n: n.to_vec(), probabilities: probabilities.to_vec(), quantiles })
    }

    pub fn get(&self, n: usize, p: f64) -> Option<f64> {
        let i = self.n.iter().position(|&k| k == n)?;
        let k = self.probabilities.iter().position(|&q| (q - p).abs() < 1e-12)?;
        Some(self.quantiles[i][k])
    }
}

/// n values of the published multiple-observation tables.
pub fn multi_table_grid(parity: Parity) -> Vec<usize> {
    match parity {
        Parity::Even => (4..=30).step_by(2).chain((40..=100).step_by(10)).collect(),
        Parity::Odd => (3..=29).step_by(2).chain((35..=95).step_by(10)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_even_table() -> QuantileTable {
        let rows = [4usize, 6, 8, 10, 12, 14, 16].into_iter().map(TableN::Finite).collect();
        QuantileTable::build_rows(Parity::Even, rows).unwrap()
    }

    #[test]
    fn knot_grid_shape() {
        let k = knot_grid();
        assert_eq!(k.len(), 51);
        assert_eq!(k[0], 0.0);
        assert_eq!(*k.last().unwrap(), 1.0);
        assert!(k.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(k[k.len() - 2], 0.8);
    }

    #[test]
    fn grids() {
        let e = even_grid();
        assert_eq!(e[0], TableN::Finite(4));
        assert!(e.contains(&TableN::Finite(34)) && e.contains(&TableN::Finite(94)));
        assert!(e.contains(&TableN::Finite(500_000)));
        assert_eq!(*e.last().unwrap(), TableN::Infinite);
        assert_eq!(odd_exact_grid().len(), 14 + 7 + 5);
        let o = odd_grid();
        assert_eq!(o[0], TableN::Finite(3));
        assert!(o.contains(&TableN::Finite(189)) && o.contains(&TableN::Finite(500)));
        assert!(!o.contains(&TableN::Finite(100)));
    }

    #[test]
    fn tabulated_rows_interpolate_exactly_at_knots() {
        let t = small_even_table();
        let row = t.row(TableN::Finite(10)).unwrap().to_vec();
        let spline = t.spline_for(10).unwrap();
        for (j, &s) in t.knots().iter().enumerate() {
            assert_eq!(spline.eval(s).unwrap(), row[j]);
            assert_abs_diff_eq!(t.interp_probability(10, knot_to_q(s)).unwrap(), row[j], epsilon = 1e-12);
        }
        assert_eq!(*row.last().unwrap(), 1.0);
        assert_abs_diff_eq!(t.interp_probability(10, 1.497).unwrap(), 0.95, epsilon = 0.0005);
    }

    #[test]
    fn untabulated_rows_agree_with_quadrature() {
        let t = small_even_table();
        for &q in &[0.5, 0.9, 1.4, 2.0] {
            let direct = dist::cdf(q, 11 + 1).unwrap();
            assert_abs_diff_eq!(t.interp_probability(12, q).unwrap(), direct, epsilon = 5e-4);
        }
        // n = 13 is odd: rejected by an even table within its range
        assert!(t.interp_probability(13, 1.0).is_err());
        assert!(t.interp_probability(2, 1.0).is_err());
    }

    #[test]
    fn quantile_round_trip() {
        let t = small_even_table();
        for &p in &[0.3, 0.5, 0.9, 0.95, 0.99, 0.999] {
            let q = t.interp_quantile(8, p).unwrap();
            assert_abs_diff_eq!(t.interp_probability(8, q).unwrap(), p, epsilon = 1e-6);
        }
        assert!(t.interp_quantile(8, 1.0).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let t = small_even_table();
        let text = t.to_text();
        let back = QuantileTable::from_text(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(QuantileTable::from_text("n,0,0.5,1\n4,0,0.5,1\n6,0,0.4,1\n").is_err());
        let bad = "# parity: even\nn,0,0.5,1\n4,0,0.6,0.5\n6,0,0.4,1\n";
        assert!(QuantileTable::from_text(bad).is_err());
        let ok = "# parity: even\nn,0,0.5,1\n4,0,0.5,1\n6,0,0.4,1\n";
        assert!(QuantileTable::from_text(ok).is_ok());
    }

    #[test]
    fn asymptotic_row_is_zero_at_left_edge() {
        let rows = vec![TableN::Finite(1000), TableN::Finite(5000), TableN::Infinite];
        let t = QuantileTable::build_rows(Parity::Even, rows).unwrap();
        let edge = asymptotic_lower_bound();
        let j = t.knots().iter().position(|&s| (s - edge / (1.0 + edge)).abs() < 1e-15).unwrap();
        assert_eq!(t.row(TableN::Infinite).unwrap()[j], 0.0);
    }

    #[test]
    fn adjusted_probability_arithmetic() {
        assert_abs_diff_eq!(adjusted_probability(10, 0.95), 0.994_884, epsilon = 1e-6);
        let a = multi_quantile_adjusted(10, 0.95).unwrap();
        let b = multi_quantile_adjusted(10, 0.99).unwrap();
        assert!(b > a);
        assert_abs_diff_eq!(a, 2.135, epsilon = 0.01);
    }

    #[test]
    fn lagrange_reproduces_cubic() {
        let f = |x: f64| 2.0 - x + 0.5 * x * x * x;
        let pts: Vec<(f64, f64)> = [0.0, 1.0, 2.5, 3.0].iter().map(|&x| (x, f(x))).collect();
        assert_abs_diff_eq!(lagrange(1.7, pts.iter().copied()), f(1.7), epsilon = 1e-12);
    }
}
