//! Centring and scaling constants, and the maps between the raw squared
//! radius and the two standard scalings.
//!
//! `W_n = (R_n² - a_n) / b_n` and `X_n = sqrt(4 γ_n) (R_n - sqrt(n) - sqrt(γ_n)/2)`.
//! Everything in the crate evaluates distribution functions through the
//! thresholds `t` with `P(W_n <= x) = P(Y_(n) <= threshold_w(x))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest matrix size accepted by [`make_constants`].
pub const MIN_N: u64 = 1000;

/// Which affine or square-root scaling of the squared radius is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Wn,
    Xn,
}

impl Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Scaling::Wn => "wn",
            Scaling::Xn => "xn",
        }
    }
}

impl std::str::FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wn" | "w" => Ok(Scaling::Wn),
            "xn" | "x" => Ok(Scaling::Xn),
            other => Err(Error::domain(format!("unknown scaling {other:?}, expected wn or xn"))),
        }
    }
}

/// All `n`-dependent constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub n: u64,
    /// `log n - 2 log(sqrt(2 pi) log n)`
    pub gamma_n: f64,
    /// `n + sqrt(n γ_n)`
    pub a_n: f64,
    /// `sqrt(n / γ_n)`
    pub b_n: f64,
    /// Left window edge `½ log log n`.
    pub ell1: f64,
    /// Right window edge `log(sqrt(2 pi) log n)`.
    pub ell2: f64,
    /// Left support edge of `W_n`.
    pub y0: f64,
    /// Left support edge of `X_n`.
    pub y1: f64,
}

/// `γ_n` for any `n >= 2`, without the admissibility guard.
pub fn gamma_n(n: u64) -> f64 {
    let l = (n as f64).ln();
    l - 2.0 * ((2.0 * std::f64::consts::PI).sqrt() * l).ln()
}

pub fn make_constants(n: u64) -> Result<ScalingConstants> {
    if n < 3 {
        return Err(Error::domain(format!("n = {n} is too small: log log n is undefined")));
    }
    let g = gamma_n(n);
    if !(g > 0.0) {
        return Err(Error::domain(format!(
            "gamma_n = {g:.6} <= 0 at n = {n}; the scaling is undefined"
        )));
    }
    if n < MIN_N {
        return Err(Error::domain(format!(
            "n = {n} is below the supported minimum {MIN_N} (gamma_n = {g:.6})"
        )));
    }
    let nf = n as f64;
    let l = nf.ln();
    let sng = (nf * g).sqrt();
    let c = ScalingConstants {
        n,
        gamma_n: g,
        a_n: nf + sng,
        b_n: (nf / g).sqrt(),
        ell1: 0.5 * l.ln(),
        ell2: ((2.0 * std::f64::consts::PI).sqrt() * l).ln(),
        y0: -(sng + g),
        y1: -(4.0 * g).sqrt() * (nf.sqrt() + 0.5 * g.sqrt()),
    };
    Ok(c)
}

impl ScalingConstants {
    pub fn support_edge(&self, kind: Scaling) -> f64 {
        match kind {
            Scaling::Wn => self.y0,
            Scaling::Xn => self.y1,
        }
    }

    /// `log n / log log n`, the normalisation of the rate statements.
    pub fn rate_normalizer(&self) -> f64 {
        let l = (self.n as f64).ln();
        l / l.ln()
    }

    /// Threshold on `R_n²` for the event `{scaled <= x}`.
    pub fn threshold(&self, kind: Scaling, x: f64) -> Result<f64> {
        match kind {
            Scaling::Wn => threshold_w(self, x),
            Scaling::Xn => threshold_x(self, x),
        }
    }

    /// Inverse of [`threshold`](Self::threshold): the scaled value of `R_n² = t`.
    pub fn scaled(&self, kind: Scaling, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::domain(format!("squared radius must be nonnegative, got {t}")));
        }
        let nf = self.n as f64;
        Ok(match kind {
            Scaling::Wn => (t - self.a_n) / self.b_n,
            Scaling::Xn => {
                let g = self.gamma_n;
                let root_gap = (t - nf) / (t.sqrt() + nf.sqrt());
                (4.0 * g).sqrt() * (root_gap - 0.5 * g.sqrt())
            }
        })
    }

    /// `dt/dx` of the threshold map at `x`.
    pub fn threshold_slope(&self, kind: Scaling, x: f64) -> Result<f64> {
        match kind {
            Scaling::Wn => Ok(self.b_n),
            Scaling::Xn => Ok(threshold_x(self, x)?.sqrt() / self.gamma_n.sqrt()),
        }
    }
}

/// `k / sqrt(n) + sqrt(γ_n) + x / sqrt(γ_n)`; `k` may be any nonnegative real.
pub fn u_n(c: &ScalingConstants, k: f64, x: f64) -> f64 {
    let sg = c.gamma_n.sqrt();
    k / (c.n as f64).sqrt() + sg + x / sg
}

/// `a_n + b_n x`.
pub fn threshold_w(c: &ScalingConstants, x: f64) -> Result<f64> {
    if x.is_nan() || x < c.y0 {
        return Err(Error::domain(format!(
            "x = {x} lies below the W_n support edge {}",
            c.y0
        )));
    }
    Ok((c.a_n + c.b_n * x).max(0.0))
}

/// `(x / sqrt(4 γ_n) + sqrt(n) + sqrt(γ_n)/2)²`.
pub fn threshold_x(c: &ScalingConstants, x: f64) -> Result<f64> {
    if x.is_nan() || x < c.y1 {
        return Err(Error::domain(format!(
            "x = {x} lies below the X_n support edge {}",
            c.y1
        )));
    }
    let g = c.gamma_n;
    let s = x / (4.0 * g).sqrt() + (c.n as f64).sqrt() + 0.5 * g.sqrt();
    Ok(s.max(0.0).powi(2))
}
