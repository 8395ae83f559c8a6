//! Sampling `Y_(n) = max_k Y_k` with independent `Y_k ~ Gamma(k, 1)`, and
//! Kolmogorov–Smirnov statistics.
//!
//! Draws are produced in fixed-size chunks. Chunk `i` uses a ChaCha8 stream
//! seeded from `(seed, i)`, so a batch depends only on its parameters and not
//! on the number of worker threads.
//!
//! With `delta = 0` every shape `1..=n` is drawn (for `n <= EXACT_MAX_N`).
//! With `delta > 0` shapes at
//! or below a cut `m` are skipped. The cut is chosen so that, summed over the
//! batch, the probability that skipping changed any draw is at most `delta`:
//! pick `τ` with `P(max_{k>m} Y_k <= τ)` tiny, then `m` with `m Q_m(τ)` tiny.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_cdf;
use crate::scaling::{Scaling, ScalingConstants};
use crate::special_fn;
use crate::util::fmt_sig;

/// Draws per RNG stream.
pub const CHUNK: usize = 256;

/// Largest accepted bias budget.
pub const MAX_DELTA: f64 = 1e-3;

/// Largest `n` drawn without truncation.
pub const EXACT_MAX_N: u64 = 1_000_000;

/// Coordinates a batch is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleScaling {
    /// The squared radius itself.
    RawY,
    Wn,
    Xn,
}

impl From<Scaling> for SampleScaling {
    fn from(s: Scaling) -> Self {
        match s {
            Scaling::Wn => SampleScaling::Wn,
            Scaling::Xn => SampleScaling::Xn,
        }
    }
}

/// How the draws were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    /// Max over all gamma shapes.
    MaxGammaExact,
    /// Max over the shapes above `first_shape - 1`.
    MaxGammaTruncated { first_shape: u64 },
    /// Eigenvalues of sampled Ginibre matrices.
    Ginibre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: u64,
    pub scaling_kind: SampleScaling,
    pub values: Vec<f64>,
    pub seed: u64,
    /// Probability that truncation altered at least one draw.
    pub bias_bound: f64,
    pub source: SampleSource,
    /// Largest eigen-solver backward residual, for matrix-based batches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
}

/// Metadata written next to a binary batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    n: u64,
    scaling_kind: SampleScaling,
    seed: u64,
    bias_bound: f64,
    source: SampleSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_residual: Option<f64>,
    size: usize,
    encoding: String,
}

/// The RNG for chunk `chunk` of a batch seeded with `seed`.
pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Produce `size` draws, `CHUNK` per stream, merged in chunk order.
pub(crate) fn chunked<T, F>(size: usize, seed: u64, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let chunks = size.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = chunk_rng(seed, i);
            let len = CHUNK.min(size - i * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn gamma(shape: u64) -> Result<Gamma<f64>> {
    Gamma::new(shape as f64, 1.0).map_err(|e| Error::domain(format!("gamma({shape}): {e}")))
}

/// The truncation plan for a bias budget: first shape drawn and certified bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    pub first_shape: u64,
    pub tau: f64,
    pub bias_bound: f64,
}

/// Choose the cut for `size` draws at total bias `delta > 0`.
pub fn plan_truncation(n: u64, size: usize, delta: f64) -> Result<TruncationPlan> {
    if !(delta > 0.0 && delta <= MAX_DELTA) {
        return Err(Error::domain(format!("delta must lie in (0, {MAX_DELTA}]")));
    }
    let per_draw = delta / (2.0 * size as f64);
    let none = TruncationPlan { first_shape: 1, tau: 0.0, bias_bound: 0.0 };
    if n < 2 {
        return Ok(none);
    }
    // Largest τ with β(τ) >= -ln(per_draw) + 1, by bisection on [0, hi].
    let target = -per_draw.ln() + 1.0;
    let beta_at = |t: f64| -> Result<f64> {
        let v = beta_full(n, t)?;
        Ok(v)
    };
    let nf = n as f64;
    let (mut lo, mut hi) = (0.0f64, nf + 10.0 * nf.sqrt() + 10.0);
    while beta_at(hi)? >= target {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if beta_at(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = lo;
    if tau <= 0.0 {
        return Ok(none);
    }
    // Largest m with m Q_m(τ) <= per_draw.
    let mq = |m: u64| -> Result<f64> { Ok(m as f64 * special_fn::gamma_sf(m, tau)?) };
    if mq(1)? > per_draw {
        return Ok(none);
    }
    let (mut good, mut bad) = (1u64, n);
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if mq(mid)? <= per_draw {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let m = good;
    // P(max_{k>m} Y_k <= τ) <= exp(-(β(τ) - m · term_m)).
    let term_m = -special_fn::log_gamma_cdf(m, tau)?.value();
    let beta_tau = beta_full(n, tau)?;
    let below = (-(beta_tau - m as f64 * term_m)).exp();
    let bias = size as f64 * (below + mq(m)?);
    if bias > delta {
        return Err(Error::Accuracy(format!(
            "cannot certify bias {delta:e}: planned cut gives {bias:e}"
        )));
    }
    Ok(TruncationPlan { first_shape: m + 1, tau, bias_bound: bias })
}

/// Lower end of the bracket for `β` at raw threshold `t` and any `n >= 1`.
fn beta_full(n: u64, t: f64) -> Result<f64> {
    if n >= crate::scaling::MIN_N {
        let c = crate::scaling::make_constants(n)?;
        Ok(exact_cdf::beta_at_threshold(&c, t, 1e-12)?.beta)
    } else {
        let mut s = 0.0;
        for k in 1..=n {
            s -= special_fn::log_gamma_cdf(k, t)?.value();
        }
        Ok(s)
    }
}

/// Draw `size` copies of `Y_(n)` with total truncation bias at most `delta`.
pub fn sample_ymax(n: u64, size: usize, seed: u64, delta: f64) -> Result<SampleBatch> {
    if n == 0 || size == 0 {
        return Err(Error::domain("n and size must be at least 1"));
    }
    if !(delta >= 0.0 && delta <= MAX_DELTA) {
        return Err(Error::domain(format!("delta must lie in [0, {MAX_DELTA}], got {delta}")));
    }
    if delta == 0.0 && n > EXACT_MAX_N {
        return Err(Error::domain(format!(
            "exact sampling is limited to n <= {EXACT_MAX_N}; pass a bias budget delta > 0"
        )));
    }
    let (first, bias, source) = if delta == 0.0 {
        (1, 0.0, SampleSource::MaxGammaExact)
    } else {
        let plan = plan_truncation(n, size, delta)?;
        (
            plan.first_shape,
            plan.bias_bound,
            SampleSource::MaxGammaTruncated { first_shape: plan.first_shape },
        )
    };
    // Keep the distributions for moderate ranges; rebuild on the fly otherwise.
    let cached: Option<Vec<Gamma<f64>>> = if n - first < 1_000_000 {
        Some((first..=n).map(gamma).collect::<Result<_>>()?)
    } else {
        None
    };
    let values = chunked(size, seed, |rng| {
        let mut best = 0.0f64;
        match &cached {
            Some(dists) => {
                for d in dists {
                    best = best.max(rng.sample(d));
                }
            }
            None => {
                for k in first..=n {
                    best = best.max(rng.sample(gamma(k)?));
                }
            }
        }
        Ok(best)
    })?;
    Ok(SampleBatch {
        n,
        scaling_kind: SampleScaling::RawY,
        values,
        seed,
        bias_bound: bias,
        source,
        max_residual: None,
    })
}

/// Map a raw batch to `W_n` or `X_n`; order preserving.
pub fn transform_batch(batch: &SampleBatch, c: &ScalingConstants, target: Scaling) -> Result<SampleBatch> {
    if batch.scaling_kind != SampleScaling::RawY {
        return Err(Error::domain("only raw batches can be transformed"));
    }
    if batch.n != c.n {
        return Err(Error::domain(format!("batch has n = {}, constants n = {}", batch.n, c.n)));
    }
    let values = batch
        .values
        .iter()
        .map(|&y| c.scaled(target, y))
        .collect::<Result<_>>()?;
    Ok(SampleBatch { values, scaling_kind: target.into(), ..batch.clone() })
}

/// Kolmogorov statistic and its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form, fast for small λ.
        let pi2 = std::f64::consts::PI.powi(2);
        let mut s = 0.0;
        for j in 1..=20 {
            let k = (2 * j - 1) as f64;
            s += (-k * k * pi2 / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            s += if j % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn p_value(statistic: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_sf((root + 0.12 + 0.11 / root) * statistic)
}

const MIN_KS_SIZE: usize = 100;

/// One-sample test of `batch` against a reference CDF.
pub fn ks_one_sample<F>(batch: &SampleBatch, reference: F) -> Result<KsTest>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let size = batch.values.len();
    if size < MIN_KS_SIZE {
        return Err(Error::domain(format!("KS needs at least {MIN_KS_SIZE} draws, got {size}")));
    }
    let mut xs = batch.values.clone();
    xs.sort_by(f64::total_cmp);
    let cdf: Vec<f64> = xs.par_iter().map(|&x| reference(x)).collect::<Result<_>>()?;
    let nf = size as f64;
    let statistic = cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64 / nf - f).max(f - i as f64 / nf))
        .fold(0.0, f64::max);
    Ok(KsTest { statistic, p_value: p_value(statistic, nf) })
}

/// Two-sample test between the empirical laws of `a` and `b`.
pub fn ks_two_sample(a: &SampleBatch, b: &SampleBatch) -> Result<KsTest> {
    let (na, nb) = (a.values.len(), b.values.len());
    if na < MIN_KS_SIZE || nb < MIN_KS_SIZE {
        return Err(Error::domain(format!("KS needs at least {MIN_KS_SIZE} draws per sample")));
    }
    let mut xa = a.values.clone();
    let mut xb = b.values.clone();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let eff = (na * nb) as f64 / (na + nb) as f64;
    Ok(KsTest { statistic: d, p_value: p_value(d, eff) })
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl SampleBatch {
    /// Little-endian f64 values at `path`, metadata in `path.json`.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&bytes)?;
        let meta = Sidecar {
            n: self.n,
            scaling_kind: self.scaling_kind,
            seed: self.seed,
            bias_bound: self.bias_bound,
            source: self.source,
            max_residual: self.max_residual,
            size: self.values.len(),
            encoding: "f64-le".into(),
        };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let meta: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * meta.size {
            return Err(Error::Serialization(format!(
                "expected {} values, file holds {} bytes",
                meta.size,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        Ok(SampleBatch {
            n: meta.n,
            scaling_kind: meta.scaling_kind,
            values,
            seed: meta.seed,
            bias_bound: meta.bias_bound,
            source: meta.source,
            max_residual: meta.max_residual,
        })
    }

    /// A single `value` column, full precision.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["value"])?;
        for v in &self.values {
            out.write_record([fmt_sig(*v, 17)])?;
        }
        out.flush()?;
        Ok(())
    }
}
