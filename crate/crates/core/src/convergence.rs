//! Ladders over `n`: exact distances next to their asymptotic predictions.

use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::metrics::{self, ExactCdf};
use crate::scaling::{self, Scaling};
use crate::util::round_sig;

/// Largest `n` evaluated exactly; beyond it records hold predictions only.
pub const EXACT_MAX_N: u64 = 100_000_000;

/// Significant digits in reports.
pub const REPORT_DIGITS: usize = 12;

/// One rung of a ladder. Exact fields are `None` when `exact` is false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: u64,
    pub scaling: Scaling,
    pub exact: bool,
    pub w1_exact: Option<f64>,
    pub w1_leading: f64,
    pub w1_refined: f64,
    pub ks_exact: Option<f64>,
    pub ks_leading: f64,
    pub ks_refined: f64,
    /// Where the exact Kolmogorov distance is attained.
    pub ks_argmax: Option<f64>,
    /// `(ln n / ln ln n) · w1_exact`.
    pub norm_w1: Option<f64>,
    /// `(ln n / ln ln n) · ks_exact`.
    pub norm_ks: Option<f64>,
    pub scaling_gap: Option<f64>,
    #[serde(rename = "I")]
    pub decomp_left: Option<f64>,
    #[serde(rename = "II")]
    pub decomp_middle: Option<f64>,
    #[serde(rename = "III")]
    pub decomp_right: Option<f64>,
    pub tol: f64,
    pub w1_error_bound: Option<f64>,
    pub ks_error_bound: Option<f64>,
    pub gap_error_bound: Option<f64>,
}

/// Number of columns in the CSV report.
pub const COLUMNS: usize = 20;

fn round_opt(x: Option<f64>, d: usize) -> Option<f64> {
    x.map(|v| round_sig(v, d))
}

impl ConvergenceRecord {
    /// The record as it appears in a report.
    pub fn rounded(&self, digits: usize) -> Self {
        let r = |x: f64| round_sig(x, digits);
        ConvergenceRecord {
            w1_exact: round_opt(self.w1_exact, digits),
            w1_leading: r(self.w1_leading),
            w1_refined: r(self.w1_refined),
            ks_exact: round_opt(self.ks_exact, digits),
            ks_leading: r(self.ks_leading),
            ks_refined: r(self.ks_refined),
            ks_argmax: round_opt(self.ks_argmax, digits),
            norm_w1: round_opt(self.norm_w1, digits),
            norm_ks: round_opt(self.norm_ks, digits),
            scaling_gap: round_opt(self.scaling_gap, digits),
            decomp_left: round_opt(self.decomp_left, digits),
            decomp_middle: round_opt(self.decomp_middle, digits),
            decomp_right: round_opt(self.decomp_right, digits),
            tol: r(self.tol),
            w1_error_bound: round_opt(self.w1_error_bound, digits),
            ks_error_bound: round_opt(self.ks_error_bound, digits),
            gap_error_bound: round_opt(self.gap_error_bound, digits),
            ..self.clone()
        }
    }

    /// `II / (I + II + III)`.
    pub fn middle_fraction(&self) -> Option<f64> {
        let (l, m, r) = (self.decomp_left?, self.decomp_middle?, self.decomp_right?);
        Some(m / (l + m + r))
    }
}

/// Evaluate one rung.
pub fn record(n: u64, kind: Scaling, tol: f64) -> Result<ConvergenceRecord> {
    let c = scaling::make_constants(n)?;
    let rate = c.rate_normalizer();
    let (ks_refined, _) = asymptotics::ks_refined_with_argmax(&c);
    let mut rec = ConvergenceRecord {
        n,
        scaling: kind,
        exact: n <= EXACT_MAX_N,
        w1_exact: None,
        w1_leading: asymptotics::w1_leading(&c),
        w1_refined: asymptotics::w1_refined(&c)?,
        ks_exact: None,
        ks_leading: asymptotics::ks_leading(&c),
        ks_refined,
        ks_argmax: None,
        norm_w1: None,
        norm_ks: None,
        scaling_gap: None,
        decomp_left: None,
        decomp_middle: None,
        decomp_right: None,
        tol,
        w1_error_bound: None,
        ks_error_bound: None,
        gap_error_bound: None,
    };
    if !rec.exact {
        return Ok(rec);
    }
    let model = ExactCdf::for_tolerance(c, kind, tol);
    let (w1, dec) = metrics::w1_with_decomposition(&model, &c, tol)?;
    let ks = metrics::ks_to_gumbel(&model, tol)?;
    let gap = metrics::scaling_gap(&c, tol)?;
    rec.w1_exact = Some(w1.value);
    rec.norm_w1 = Some(rate * w1.value);
    rec.w1_error_bound = Some(w1.error_budget());
    rec.decomp_left = Some(dec.left);
    rec.decomp_middle = Some(dec.middle);
    rec.decomp_right = Some(dec.right);
    rec.ks_exact = Some(ks.value);
    rec.norm_ks = Some(rate * ks.value);
    rec.ks_argmax = ks.argmax_x;
    rec.ks_error_bound = Some(ks.error_budget());
    rec.scaling_gap = Some(gap.value);
    rec.gap_error_bound = Some(gap.error_budget());
    Ok(rec)
}

/// One record per `n`, in input order. `ns` must be strictly increasing.
pub fn run_ladder(ns: &[u64], kind: Scaling, tol: f64) -> Result<Vec<ConvergenceRecord>> {
    if ns.is_empty() {
        return Err(Error::domain("empty ladder"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("ladder sizes must be strictly increasing"));
    }
    for &n in ns {
        scaling::make_constants(n)?;
    }
    ns.par_iter().map(|&n| record(n, kind, tol)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::domain(format!("unknown format {other:?}; expected csv or json"))),
        }
    }
}

/// Write records at `REPORT_DIGITS` significant digits.
pub fn report<W: Write>(records: &[ConvergenceRecord], format: Format, mut w: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::domain("nothing to report"));
    }
    let rounded: Vec<ConvergenceRecord> = records.iter().map(|r| r.rounded(REPORT_DIGITS)).collect();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rounded)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for r in &rounded {
                out.serialize(r)?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn report_string(records: &[ConvergenceRecord], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    report(records, format, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn read_report<R: Read>(r: R, format: Format) -> Result<Vec<ConvergenceRecord>> {
    match format {
        Format::Json => Ok(serde_json::from_reader(r)?),
        Format::Csv => csv::Reader::from_reader(r)
            .deserialize()
            .map(|row| row.map_err(Error::from))
            .collect(),
    }
}

/// Parse `1e4,1e5,100000` into sizes.
pub fn parse_sizes(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|part| {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("not a number: {part:?}")))?;
            if !(v >= 1.0 && v.fract() == 0.0 && v < 1.8e19) {
                return Err(Error::domain(format!("not a positive integer: {part:?}")));
            }
            Ok(v as u64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ConvergenceRecord {
        record(10_000, Scaling::Xn, 1e-5).unwrap()
    }

    #[test]
    fn csv_shape() {
        let s = report_string(&[sample()], Format::Csv).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), COLUMNS);
        assert_eq!(lines[1].split(',').count(), COLUMNS);
        assert!(lines[0].starts_with("n,scaling,exact,w1_exact"));
        assert!(lines[0].contains(",I,II,III,"));
    }

    #[test]
    fn round_trips() {
        let r = sample();
        let want = vec![r.rounded(REPORT_DIGITS)];
        for f in [Format::Json, Format::Csv] {
            let s = report_string(&[r.clone()], f).unwrap();
            assert_eq!(read_report(s.as_bytes(), f).unwrap(), want, "{f:?}");
        }
    }

    #[test]
    fn beyond_exact_range_is_flagged() {
        let r = record(1_000_000_000, Scaling::Wn, 1e-5).unwrap();
        assert!(!r.exact);
        assert!(r.w1_exact.is_none() && r.norm_w1.is_none());
        let s = report_string(&[r.clone()], Format::Csv).unwrap();
        assert_eq!(read_report(s.as_bytes(), Format::Csv).unwrap(), vec![r.rounded(12)]);
    }

    #[test]
    fn decomposition_adds_up() {
        let r = sample();
        let total = r.decomp_left.unwrap() + r.decomp_middle.unwrap() + r.decomp_right.unwrap();
        assert!((total - r.w1_exact.unwrap()).abs() <= 1e-12);
        assert!(r.middle_fraction().unwrap() > 0.5);
    }

    #[test]
    fn ladder_validation() {
        assert!(run_ladder(&[], Scaling::Wn, 1e-5).is_err());
        assert!(run_ladder(&[10_000, 1000], Scaling::Wn, 1e-5).is_err());
        assert!(run_ladder(&[100], Scaling::Wn, 1e-5).is_err());
    }

    #[test]
    fn size_parsing() {
        assert_eq!(parse_sizes("1e4, 1e5,1000").unwrap(), vec![10_000, 100_000, 1000]);
        assert!(parse_sizes("1.5").is_err());
        assert!(parse_sizes("x").is_err());
        assert!("CSV".parse::<Format>().is_ok() && "xml".parse::<Format>().is_err());
    }
}
