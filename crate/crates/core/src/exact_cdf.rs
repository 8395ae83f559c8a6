//! Exact finite-`n` distribution functions of `W_n` and `X_n`.
//!
//! `P(R_n² <= t) = prod_k P(Y_k <= t)`, so `-log` of the CDF is
//! `β(t) = sum_k -log P(Y_k <= t)`. The summands increase with `k`, which
//! gives a cheap certificate for dropping the small ones: if `K0` is the
//! largest index with `K0 · term(K0) <= eps`, every dropped term is at most
//! `term(K0)` and their total is at most `K0 · term(K0)`.
//!
//! The kept terms are summed in increasing `k`. Where `P(Y_k > t) <= ½` the
//! upper tail is advanced with the exact recurrence
//! `Q(k+1, t) = Q(k, t) + e^{-t} t^k / k!` (all additions, no cancellation),
//! restarted from a direct evaluation every [`REFRESH`] steps.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::{Scaling, ScalingConstants};
use crate::special_fn::{self, LogProb, MAX_SHAPE};
use crate::util::{fmt_sig, KahanSum};

/// Sums beyond this are reported as saturated: the CDF is below `e^{-800}`.
pub const SATURATION: f64 = 800.0;

/// Largest accepted truncation budget.
pub const MAX_EPS: f64 = 1e-3;

const REFRESH: u64 = 128;

/// `β` at one threshold, bracketed as `β ∈ [beta, beta + error_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaValue {
    /// The threshold in `W_n` coordinates, `(t - a_n) / b_n`.
    pub x: f64,
    pub threshold: f64,
    pub beta: f64,
    pub error_bound: f64,
    /// True when the sum was abandoned past [`SATURATION`]; `beta` is then
    /// only a lower bound and `error_bound` is infinite.
    pub saturated: bool,
    /// Direct incomplete-gamma evaluations spent.
    pub evals: u64,
}

impl BetaValue {
    pub fn log_cdf(&self) -> LogProb {
        LogProb::clamped(-self.beta)
    }

    pub fn cdf(&self) -> f64 {
        (-self.beta).exp()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(Error::domain(format!("eps must lie in (0, {MAX_EPS}], got {eps}")));
    }
    Ok(())
}

fn term(k: u64, t: f64, evals: &mut u64) -> Result<f64> {
    *evals += 1;
    Ok(-special_fn::log_gamma_cdf(k, t)?.value())
}

/// `β` at the raw threshold `t` on `R_n²`, with certified truncation.
pub fn beta_at_threshold(c: &ScalingConstants, t: f64, eps: f64) -> Result<BetaValue> {
    check_eps(eps)?;
    let n = c.n;
    if n > MAX_SHAPE {
        return Err(Error::Accuracy(format!(
            "n = {n} exceeds the exact-path maximum {MAX_SHAPE}"
        )));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("threshold must be nonnegative, got {t}")));
    }
    let x = (t - c.a_n) / c.b_n;
    let mut out = BetaValue { x, threshold: t, beta: 0.0, error_bound: 0.0, saturated: false, evals: 0 };
    if t == 0.0 {
        out.beta = f64::INFINITY;
        return Ok(out);
    }

    // Every k >= t + 1 has its median above t, so contributes at least ln 2.
    let heavy = n.saturating_sub((t + 1.0).ceil() as u64 - 1);
    if heavy as f64 * std::f64::consts::LN_2 >= SATURATION {
        out.beta = heavy as f64 * std::f64::consts::LN_2;
        out.error_bound = f64::INFINITY;
        out.saturated = true;
        return Ok(out);
    }

    let mut evals = 0u64;
    // Largest K0 in [0, n] with K0 * term(K0) <= eps (K0 = 0: nothing dropped).
    let top = term(n, t, &mut evals)?;
    let (k0, dropped) = if n as f64 * top <= eps {
        (n, n as f64 * top)
    } else {
        let first = term(1, t, &mut evals)?;
        if first > eps {
            (0, 0.0)
        } else {
            let (mut lo, mut lo_val, mut hi) = (1u64, first, n);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                let v = mid as f64 * term(mid, t, &mut evals)?;
                if v <= eps {
                    lo = mid;
                    lo_val = v;
                } else {
                    hi = mid;
                }
            }
            (lo, lo_val)
        }
    };

    let mut sum = KahanSum::new();
    let mut k = k0 + 1;
    while k <= n {
        evals += 1;
        let tails = special_fn::gamma_tails(k, t)?;
        if tails.upper.value() > -std::f64::consts::LN_2 {
            sum.add(-tails.lower.value());
            k += 1;
            continue;
        }
        let mut q = tails.upper.prob();
        // w = e^{-t} t^k / k!
        let mut w = special_fn::log_poisson_weight(k, t).exp();
        sum.add(-(-q).ln_1p());
        let block_end = (k + REFRESH).min(n + 1);
        k += 1;
        while k < block_end {
            q += w;
            if q > 0.5 {
                break;
            }
            w *= t / k as f64;
            sum.add(-(-q).ln_1p());
            k += 1;
        }
    }
    out.beta = sum.value();
    out.error_bound = dropped;
    out.evals = evals;
    Ok(out)
}

/// `β` at the scaled coordinate `x`; infinite below the support edge.
pub fn beta(c: &ScalingConstants, kind: Scaling, x: f64, eps: f64) -> Result<BetaValue> {
    if x.is_nan() {
        return Err(Error::domain("x is NaN"));
    }
    if x <= c.support_edge(kind) {
        check_eps(eps)?;
        return Ok(BetaValue {
            x: (0.0 - c.a_n) / c.b_n,
            threshold: 0.0,
            beta: f64::INFINITY,
            error_bound: 0.0,
            saturated: false,
            evals: 0,
        });
    }
    beta_at_threshold(c, c.threshold(kind, x)?, eps)
}

/// `ln P(scaled <= x)`.
pub fn log_cdf(c: &ScalingConstants, kind: Scaling, x: f64, eps: f64) -> Result<LogProb> {
    Ok(beta(c, kind, x, eps)?.log_cdf())
}

/// `P(scaled <= x)`.
pub fn cdf(c: &ScalingConstants, kind: Scaling, x: f64, eps: f64) -> Result<f64> {
    Ok(beta(c, kind, x, eps)?.cdf())
}

pub fn cdf_wn(c: &ScalingConstants, x: f64, eps: f64) -> Result<f64> {
    cdf(c, Scaling::Wn, x, eps)
}

pub fn cdf_xn(c: &ScalingConstants, x: f64, eps: f64) -> Result<f64> {
    cdf(c, Scaling::Xn, x, eps)
}

/// `P(Y_{n-k} > a_n + b_n x)`.
pub fn exact_tail(c: &ScalingConstants, k: u64, x: f64) -> Result<f64> {
    Ok(exact_log_tail(c, k, x)?.prob())
}

/// `ln P(Y_{n-k} > a_n + b_n x)`.
pub fn exact_log_tail(c: &ScalingConstants, k: u64, x: f64) -> Result<LogProb> {
    if k >= c.n {
        return Err(Error::domain(format!("k = {k} must be below n = {}", c.n)));
    }
    let t = crate::scaling::threshold_w(c, x)?;
    special_fn::log_gamma_sf(c.n - k, t)
}

/// A grid of exact log-CDF values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    pub scaling_kind: Scaling,
    pub constants: ScalingConstants,
    pub grid: Vec<f64>,
    pub log_cdf: Vec<LogProb>,
    /// Largest certified truncation error over the non-saturated points.
    pub truncation_bound: f64,
    /// Points whose CDF is below `e^{-800}`; their log value is an upper bound.
    pub saturated_points: usize,
    pub eval_count: u64,
}

/// Evaluate the exact CDF on a strictly increasing grid, in parallel.
pub fn tabulate(c: &ScalingConstants, kind: Scaling, grid: &[f64], eps: f64) -> Result<TabulatedCdf> {
    check_eps(eps)?;
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let values: Vec<BetaValue> = grid
        .par_iter()
        .map(|&x| beta(c, kind, x, eps))
        .collect::<Result<_>>()?;
    let mut log_cdf = Vec::with_capacity(values.len());
    let mut running = f64::NEG_INFINITY;
    for v in &values {
        // Rounding can break monotonicity by an ulp; the running max keeps
        // the lower end of every bracket valid.
        running = running.max(-v.beta);
        log_cdf.push(LogProb::clamped(running));
    }
    Ok(TabulatedCdf {
        scaling_kind: kind,
        constants: *c,
        grid: grid.to_vec(),
        log_cdf,
        truncation_bound: values
            .iter()
            .filter(|v| !v.saturated)
            .map(|v| v.error_bound)
            .fold(0.0, f64::max),
        saturated_points: values.iter().filter(|v| v.saturated).count(),
        eval_count: values.iter().map(|v| v.evals).sum(),
    })
}

/// Gumbel quantiles of `points` equispaced probabilities in `[1e-6, 1 - 1e-6]`,
/// preceded by the support edge when it lies to the left.
pub fn default_grid(c: &ScalingConstants, kind: Scaling, points: usize) -> Vec<f64> {
    let (lo, hi) = (1e-6f64, 1.0 - 1e-6);
    let mut grid = Vec::with_capacity(points + 1);
    let edge = c.support_edge(kind);
    let first = -(-lo.ln()).ln();
    if edge < first {
        grid.push(edge);
    }
    for i in 0..points {
        let p = if points == 1 { 0.5 } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
        let x = -(-p.ln()).ln();
        if x > edge {
            grid.push(x);
        }
    }
    grid
}

impl TabulatedCdf {
    pub fn cdf(&self) -> Vec<f64> {
        self.log_cdf.iter().map(|l| l.prob()).collect()
    }

    /// Columns `x, log_cdf, cdf, truncation_bound`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "log_cdf", "cdf", "truncation_bound"])?;
        for (x, l) in self.grid.iter().zip(&self.log_cdf) {
            out.write_record([
                fmt_sig(*x, 17),
                fmt_sig(l.value(), 17),
                fmt_sig(l.prob(), 17),
                fmt_sig(self.truncation_bound, 17),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
