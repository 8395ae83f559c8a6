//! Closed-form asymptotic approximations.
//!
//! Tail of a single gamma variable in the normal-deviate coordinate
//! `u = u_n(k, x)`, integrals and sums of `u^{-m} e^{-c u²}` over `x` or `k`,
//! the large-`n` form of `β`, and the leading and refined rate predictions
//! for the Wasserstein-1 and Kolmogorov distances to the Gumbel law.
//!
//! Each approximation reports an error magnitude alongside its value. Where
//! the remainder is known explicitly (integration by parts of
//! `int y^{-a} e^{-y}`, or the sum-versus-integral sandwich for monotone
//! summands) that explicit bound is used; otherwise the bare order of
//! magnitude is reported with constant one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scaling::{u_n, ScalingConstants};
use crate::search;
use crate::special_fn::gumbel_density;

/// Smallest `u` treated as "large" by the validity guards.
pub const MIN_U: f64 = 3.0;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// A value with the magnitude of its relative error term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub claimed_rel_error_order: f64,
}

fn require_large_u(u: f64, what: &str) -> Result<()> {
    if !(u >= MIN_U) {
        return Err(Error::domain(format!("{what}: u = {u:.6} is below {MIN_U}")));
    }
    Ok(())
}

/// `e^{-u²/2} / (sqrt(2 pi) u)` approximating `P(Y_{n-k} > a_n + b_n x)`,
/// valid for `3 <= u <= n^{1/10}`.
pub fn tail_approx(c: &ScalingConstants, k: u64, x: f64) -> Result<AsymptoticValue> {
    let u = u_n(c, k as f64, x);
    require_large_u(u, "tail_approx")?;
    let cap = (c.n as f64).powf(0.1);
    if u > cap {
        return Err(Error::domain(format!("tail_approx: u = {u:.6} exceeds n^(1/10) = {cap:.6}")));
    }
    Ok(AsymptoticValue {
        value: (-0.5 * u * u).exp() / (SQRT_2PI * u),
        claimed_rel_error_order: u.powi(-2),
    })
}

/// Upper envelope `e^{-u²/2} / u + C n^{-1/2} u^{-3}` for the same tail.
pub fn tail_upper(c: &ScalingConstants, k: u64, x: f64, constant: f64) -> Result<f64> {
    let u = u_n(c, k as f64, x);
    require_large_u(u, "tail_upper")?;
    if !(constant >= 0.0) {
        return Err(Error::domain("tail_upper: constant must be nonnegative"));
    }
    Ok((-0.5 * u * u).exp() / u + constant / (c.n as f64).sqrt() * u.powi(-3))
}

/// `int_{x_n}^inf u_n(k, x)^{-m} dx = sqrt(γ_n) u^{1-m} / (m - 1)`, exact for `m > 1`.
pub fn power_integral(c: &ScalingConstants, k: f64, x_n: f64, m: f64) -> Result<AsymptoticValue> {
    if !(m > 1.0) {
        return Err(Error::domain(format!("power_integral needs m > 1, got {m}")));
    }
    let u = u_n(c, k, x_n);
    if !(u > 0.0) {
        return Err(Error::domain(format!("power_integral needs u > 0, got {u}")));
    }
    Ok(AsymptoticValue {
        value: c.gamma_n.sqrt() / (m - 1.0) * u.powf(1.0 - m),
        claimed_rel_error_order: 0.0,
    })
}

fn check_mc(m: f64, cc: f64) -> Result<()> {
    if !(m > 0.0 && cc > 0.0) {
        return Err(Error::domain(format!("need m > 0 and c > 0, got m = {m}, c = {cc}")));
    }
    Ok(())
}

/// `e^{-c u²} / (2 c u^{m+1}) (1 - (m+1)/(2c) u^{-2})` and the size of the
/// next term, `(m+1)(m+3)/(4c²) u^{-4}`, which bounds the remainder.
fn gaussian_power_tail(u: f64, m: f64, cc: f64) -> (f64, f64) {
    let lead = (-cc * u * u).exp() / (2.0 * cc * u.powf(m + 1.0));
    let corr = 1.0 - (m + 1.0) / (2.0 * cc) * u.powi(-2);
    let next = (m + 1.0) * (m + 3.0) / (4.0 * cc * cc) * u.powi(-4);
    (lead * corr, next)
}

/// `int_{x_n}^inf u_n(k, x)^{-m} e^{-c u²} dx` to two terms.
pub fn gaussian_power_integral(
    c: &ScalingConstants,
    k: f64,
    x_n: f64,
    m: f64,
    cc: f64,
) -> Result<AsymptoticValue> {
    check_mc(m, cc)?;
    let u = u_n(c, k, x_n);
    require_large_u(u, "gaussian_power_integral")?;
    let (v, next) = gaussian_power_tail(u, m, cc);
    Ok(AsymptoticValue { value: c.gamma_n.sqrt() * v, claimed_rel_error_order: next })
}

/// `sum_{k >= L} u_n(k, x_n)^{-m} e^{-c u²}` to two terms, for `3 <= u_n(L, x_n) <= n^{1/4}`.
///
/// Besides the integral remainder, replacing the sum by the integral costs at
/// most the first summand, a relative `2 c u / sqrt(n)`.
pub fn gaussian_power_sum(
    c: &ScalingConstants,
    l: f64,
    x_n: f64,
    m: f64,
    cc: f64,
) -> Result<AsymptoticValue> {
    check_mc(m, cc)?;
    let u = u_n(c, l, x_n);
    require_large_u(u, "gaussian_power_sum")?;
    let sqrt_n = (c.n as f64).sqrt();
    if u > sqrt_n.sqrt() {
        return Err(Error::domain(format!("gaussian_power_sum: u = {u:.6} exceeds n^(1/4)")));
    }
    let (v, next) = gaussian_power_tail(u, m, cc);
    Ok(AsymptoticValue {
        value: sqrt_n * v,
        claimed_rel_error_order: next + 2.0 * cc * u / sqrt_n,
    })
}

/// `sum_{k >= L} u_n(k, x_n)^{-m} ~ sqrt(n) u^{1-m} / (m - 1)`, relative error
/// at most `(m - 1) / (u sqrt(n))`.
pub fn power_sum(c: &ScalingConstants, l: f64, x_n: f64, m: f64) -> Result<AsymptoticValue> {
    if !(m > 1.0) {
        return Err(Error::domain(format!("power_sum needs m > 1, got {m}")));
    }
    let u = u_n(c, l, x_n);
    require_large_u(u, "power_sum")?;
    let sqrt_n = (c.n as f64).sqrt();
    Ok(AsymptoticValue {
        value: sqrt_n / (m - 1.0) * u.powf(1.0 - m),
        claimed_rel_error_order: (m - 1.0) / (u * sqrt_n),
    })
}

fn require_window(c: &ScalingConstants, x: f64) -> Result<()> {
    if !(x >= -c.ell1 && x <= c.ell2) {
        return Err(Error::domain(format!(
            "x = {x} outside the window [{:.6}, {:.6}]",
            -c.ell1, c.ell2
        )));
    }
    Ok(())
}

/// `log n / (γ_n (1 + x/γ_n)²) · e^{-x - x²/(2γ_n)}`, relative error order `1/γ_n`.
pub fn beta_asym(c: &ScalingConstants, x: f64) -> Result<AsymptoticValue> {
    require_window(c, x)?;
    let g = c.gamma_n;
    let ln_n = (c.n as f64).ln();
    let value = ln_n / (g * (1.0 + x / g).powi(2)) * (-x - x * x / (2.0 * g)).exp();
    Ok(AsymptoticValue { value, claimed_rel_error_order: 1.0 / g })
}

/// Leading Wasserstein-1 prediction `2 ℓ2 / γ_n`.
pub fn w1_leading(c: &ScalingConstants) -> f64 {
    2.0 * c.ell2 / c.gamma_n
}

/// `γ_n^{-1} int_{-ℓ1}^{ℓ2} Λ'(x) |2(x - ℓ2) + x²/2| dx`.
pub fn w1_refined(c: &ScalingConstants) -> Result<f64> {
    let ell2 = c.ell2;
    let kink = -2.0 + 2.0 * (1.0 + ell2).sqrt();
    let mut points = vec![-c.ell1, ell2];
    if kink > -c.ell1 && kink < ell2 {
        points.insert(1, kink);
    }
    let r = quadrature::integrate(
        |x| gumbel_density(x) * (2.0 * (x - ell2) + 0.5 * x * x).abs(),
        &points,
        1e-10,
    )?;
    Ok(r.value / c.gamma_n)
}

/// Leading Kolmogorov prediction `2 ℓ2 / (e γ_n)`.
pub fn ks_leading(c: &ScalingConstants) -> f64 {
    2.0 * c.ell2 / (std::f64::consts::E * c.gamma_n)
}

/// `γ_n^{-1} sup_{[-ℓ1, ℓ2]} Λ'(x) |2(ℓ2 - x) - x²/2|`, with its location.
pub fn ks_refined_with_argmax(c: &ScalingConstants) -> (f64, f64) {
    let ell2 = c.ell2;
    let f = |x: f64| gumbel_density(x) * (2.0 * (ell2 - x) - 0.5 * x * x).abs();
    let grid = search::linspace(-c.ell1, ell2, 2048);
    let m = search::grid_max(&f, &grid, 5, 1e-12);
    (m.value / c.gamma_n, m.x)
}

pub fn ks_refined(c: &ScalingConstants) -> f64 {
    ks_refined_with_argmax(c).0
}

/// `g'(x) = 1 - e^{-x} + 1/(ℓ2 - x)` for `g(x) = e^{-x} + x - log(ℓ2 - x)`.
pub fn g_prime(c: &ScalingConstants, x: f64) -> f64 {
    1.0 - (-x).exp() + 1.0 / (c.ell2 - x)
}

/// The unique minimiser of `g` in `(-1/ℓ2, 0)`, by bisection-safeguarded Newton.
pub fn g_minimizer(c: &ScalingConstants) -> Result<f64> {
    let (mut lo, mut hi) = (-1.0 / c.ell2, 0.0);
    if !(g_prime(c, lo) < 0.0 && g_prime(c, hi) > 0.0) {
        return Err(Error::Convergence("g' does not change sign on (-1/ell2, 0)".into()));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let d = g_prime(c, x);
        if d.abs() <= 1e-12 {
            return Ok(x);
        }
        if d < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let curvature = (-x).exp() + (c.ell2 - x).powi(-2);
        let newton = x - d / curvature;
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::Convergence("g minimiser did not converge".into()))
}
