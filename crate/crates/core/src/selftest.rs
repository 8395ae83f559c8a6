//! Built-in consistency checks against independent computations.
//!
//! Closed forms are compared with adaptive quadrature or direct summation;
//! a few incomplete gamma values are compared with frozen 20-digit
//! references. [`run`] returns one [`Check`] per comparison.

use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::error::Result;
use crate::quadrature;
use crate::scaling::{make_constants, u_n, ScalingConstants};
use crate::special_fn::{self, EULER_GAMMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Worst observed error, in the units of `limit`.
    pub error: f64,
    pub limit: f64,
    /// Representative computed value.
    pub value: f64,
    pub pass: bool,
}

fn check(name: &str, error: f64, limit: f64, value: f64) -> Check {
    Check { name: name.to_string(), error, limit, value, pass: error <= limit }
}

/// `int_{x0}^inf f(u_n(k, x)) dx` by quadrature after `x = x0 + s / (1 - s)`,
/// to absolute tolerance `1e-14 · scale`.
pub fn x_integral(c: &ScalingConstants, k: f64, x0: f64, f: impl Fn(f64) -> f64 + Sync, scale: f64) -> Result<f64> {
    let g = |s: f64| {
        let w = 1.0 - s;
        f(u_n(c, k, x0 + s / w)) / (w * w)
    };
    let pts: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
    Ok(quadrature::integrate(g, &pts, 1e-14 * scale)?.value)
}

/// `sum_{k >= l} u_n(k, x)^{-m} e^{-cc u²}` by direct summation.
pub fn gaussian_sum(c: &ScalingConstants, l: u64, x: f64, m: f64, cc: f64) -> f64 {
    let mut s = 0.0;
    let mut k = l;
    loop {
        let u = u_n(c, k as f64, x);
        let t = u.powf(-m) * (-cc * u * u).exp();
        s += t;
        // Successive ratios are below one and shrinking, so the rest is negligible.
        if t < 1e-20 * s {
            return s;
        }
        k += 1;
    }
}

/// `sum_{k >= l} u_n(k, x)^{-m}`, `m > 1`: 1000 direct terms, then
/// Euler–Maclaurin with two corrections.
pub fn power_series(c: &ScalingConstants, l: u64, x: f64, m: f64) -> f64 {
    let sqrt_n = (c.n as f64).sqrt();
    let kk = l + 1000;
    let direct: f64 = (l..kk).map(|k| u_n(c, k as f64, x).powf(-m)).sum();
    let u = u_n(c, kk as f64, x);
    let integral = sqrt_n * u.powf(1.0 - m) / (m - 1.0);
    let df = -m * u.powf(-m - 1.0) / sqrt_n;
    direct + integral + 0.5 * u.powf(-m) - df / 12.0
}

/// `(n, k, x)` points with `u_n(k, x) >= 3`, and optionally `u <= n^(1/10)`.
pub fn lattice(capped: bool) -> Result<Vec<(ScalingConstants, u64, f64)>> {
    let mut out = Vec::new();
    for n in [10_000u64, 1_000_000, 100_000_000] {
        let c = make_constants(n)?;
        let nf = n as f64;
        for k in [0, nf.sqrt().floor() as u64, nf.powf(0.55).floor() as u64] {
            for x in [1.0, 2.0, 4.0] {
                let u = u_n(&c, k as f64, x);
                if u >= asymptotics::MIN_U && (!capped || u <= nf.powf(0.1)) {
                    out.push((c, k, x));
                }
            }
        }
    }
    Ok(out)
}

/// Gumbel integrals, reference incomplete gamma values, and the closed-form
/// integrals and sums against quadrature and summation.
pub fn run() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (m0, m2) = special_fn::gumbel_moment_integrals()?;
    out.push(check("gumbel_mass", (m0 - 1.0).abs(), 1e-10, m0));
    let m2_exact = EULER_GAMMA * EULER_GAMMA + std::f64::consts::PI.powi(2) / 6.0;
    out.push(check("gumbel_second_moment", (m2 - m2_exact).abs(), 1e-8, m2));

    let p = special_fn::gamma_cdf(10, 10.0)?;
    out.push(check("gamma_cdf_10_10", (p / 5.420_702_855_281_478e-1 - 1.0).abs(), 1e-13, p));
    let q = special_fn::gamma_sf(10, 10.0)?;
    out.push(check("gamma_sf_10_10", (q / 4.579_297_144_718_522e-1 - 1.0).abs(), 1e-13, q));

    let (mut w1, mut w2, mut w3, mut w4) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut v1, mut v2, mut v3, mut v4) = (0.0, 0.0, 0.0, 0.0);
    for (c, k, x) in lattice(false)? {
        let kf = k as f64;
        for m in [2.0, 2.5, 4.0] {
            let a = asymptotics::power_integral(&c, kf, x, m)?.value;
            let q = x_integral(&c, kf, x, |u| u.powf(-m), a)?;
            w1 = w1.max((a / q - 1.0).abs());
            v1 = a;
        }
        for (m, cc) in [(1.0, 0.5), (2.0, 0.5), (1.0, 1.0)] {
            let a = asymptotics::gaussian_power_integral(&c, kf, x, m, cc)?;
            let q = x_integral(&c, kf, x, |u| u.powf(-m) * (-cc * u * u).exp(), a.value)?;
            w2 = w2.max((a.value / q - 1.0).abs() / (3.0 * a.claimed_rel_error_order));
            v2 = a.value;
            if u_n(&c, kf, x) <= (c.n as f64).powf(0.25) {
                let a = asymptotics::gaussian_power_sum(&c, kf, x, m, cc)?;
                let s = gaussian_sum(&c, k, x, m, cc);
                w3 = w3.max((a.value / s - 1.0).abs() / (3.0 * a.claimed_rel_error_order));
                v3 = a.value;
            }
        }
        for m in [2.0, 3.0] {
            let a = asymptotics::power_sum(&c, kf, x, m)?;
            let s = power_series(&c, k, x, m);
            w4 = w4.max((a.value / s - 1.0).abs() / (3.0 * a.claimed_rel_error_order));
            v4 = a.value;
        }
    }
    out.push(check("power_integral_vs_quadrature", w1, 1e-10, v1));
    out.push(check("gaussian_power_integral_vs_quadrature", w2, 1.0, v2));
    out.push(check("gaussian_power_sum_vs_summation", w3, 1.0, v3));
    out.push(check("power_sum_vs_euler_maclaurin", w4, 1.0, v4));
    Ok(out)
}
