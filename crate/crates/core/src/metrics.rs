//! Distances between distribution functions on the line.
//!
//! Wasserstein-1 is `int |F - G|`. The integral is split into a finite range
//! `[x_lo, x_hi]`, integrated adaptively with the sign changes of `F - G` as
//! breakpoints, and two tails bounded by certified mass bounds that every
//! [`CdfModel`] provides. The Kolmogorov distance is a grid-plus-golden-section
//! search for `sup |F - G|`.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_cdf;
use crate::quadrature;
use crate::scaling::{Scaling, ScalingConstants};
use crate::search;
use crate::special_fn::{self, gumbel_cdf};

/// Number of Gumbel-quantile points in the Kolmogorov search grid.
pub const KS_GRID: usize = 2048;
/// Number of local maxima refined by golden section.
pub const KS_REFINE: usize = 5;

/// A distribution function with certified tail masses.
pub trait CdfModel: Sync {
    fn cdf(&self, x: f64) -> Result<f64>;

    /// Upper bound on `int_{-inf}^x F`.
    fn left_mass_bound(&self, x: f64) -> Result<f64>;

    /// Upper bound on `int_x^inf (1 - F)`.
    fn right_mass_bound(&self, x: f64) -> Result<f64>;

    /// Bound on `|cdf(x) - F(x)|` at every point.
    fn pointwise_error(&self) -> f64 {
        0.0
    }
}

/// The Gumbel law shifted to `location`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gumbel {
    pub location: f64,
}

impl CdfModel for Gumbel {
    fn cdf(&self, x: f64) -> Result<f64> {
        Ok(gumbel_cdf(x - self.location))
    }

    fn left_mass_bound(&self, x: f64) -> Result<f64> {
        // int_{-inf}^z e^{-e^{-s}} ds = E1(e^{-z}) <= e^{z} e^{-e^{-z}}
        let z = x - self.location;
        Ok((z - (-z).exp()).exp())
    }

    fn right_mass_bound(&self, x: f64) -> Result<f64> {
        // 1 - Λ(z) <= e^{-z}
        Ok((self.location - x).exp())
    }
}

/// Exact CDF of `W_n` or `X_n`, with truncation budget `eps` per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCdf {
    pub constants: ScalingConstants,
    pub kind: Scaling,
    pub eps: f64,
}

impl ExactCdf {
    pub fn new(constants: ScalingConstants, kind: Scaling, eps: f64) -> Self {
        ExactCdf { constants, kind, eps }
    }

    /// Truncation budget matched to a distance tolerance.
    pub fn for_tolerance(constants: ScalingConstants, kind: Scaling, tol: f64) -> Self {
        Self::new(constants, kind, (tol * 1e-3).clamp(1e-14, exact_cdf::MAX_EPS))
    }
}

impl CdfModel for ExactCdf {
    fn cdf(&self, x: f64) -> Result<f64> {
        exact_cdf::cdf(&self.constants, self.kind, x, self.eps)
    }

    fn left_mass_bound(&self, x: f64) -> Result<f64> {
        let edge = self.constants.support_edge(self.kind);
        if x <= edge {
            return Ok(0.0);
        }
        // F is nondecreasing and vanishes below the edge.
        Ok((x - edge) * self.cdf(x)?)
    }

    fn right_mass_bound(&self, x: f64) -> Result<f64> {
        // 1 - F <= β. Each summand of β is -log(1 - Q_k) with Q_k a gamma
        // survival function. Gamma laws have increasing hazard, and smaller
        // shapes have larger hazard, so Q_k(s) <= Q_k(t) e^{-h_n(t)(s - t)} for
        // s >= t and k <= n. Convexity of -log(1 - q) in q then gives
        // int_t^inf β(s) ds <= β(t) / h_n(t). The threshold map has
        // nondecreasing slope, so dividing by its slope at x converts to x.
        let c = &self.constants;
        let v = exact_cdf::beta(c, self.kind, x, self.eps)?;
        if v.saturated || !v.beta.is_finite() {
            return Ok(f64::INFINITY);
        }
        let t = v.threshold;
        let ln_hazard = special_fn::log_gamma_density(c.n, t)? - special_fn::log_gamma_sf(c.n, t)?.value();
        let slope = c.threshold_slope(self.kind, x)?;
        Ok((v.beta + v.error_bound) / (ln_hazard.exp() * slope))
    }

    fn pointwise_error(&self) -> f64 {
        // β in [S, S + b] implies |e^{-β} - e^{-S}| <= b.
        self.eps
    }
}

/// Which distance a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    W1,
    Ks,
}

/// A distance with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub kind: DistanceKind,
    pub value: f64,
    /// Requested tolerance.
    pub quadrature_tol: f64,
    /// Achieved quadrature (W1) or search-grid (KS) error estimate.
    pub quadrature_error: f64,
    /// Certified bound on the part of the distance outside the evaluated range.
    pub tail_remainder_bound: f64,
    /// Contribution of pointwise CDF truncation errors.
    pub cdf_error_bound: f64,
    pub argmax_x: Option<f64>,
    pub window: Option<(f64, f64)>,
    /// Range actually integrated or searched.
    pub range: (f64, f64),
}

impl DistanceReport {
    /// Total certified error budget.
    pub fn error_budget(&self) -> f64 {
        self.quadrature_error + self.tail_remainder_bound + self.cdf_error_bound
    }
}

/// Three-way split of W1 at `-ℓ1` and `ℓ2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(rename = "I")]
    pub left: f64,
    #[serde(rename = "II")]
    pub middle: f64,
    #[serde(rename = "III")]
    pub right: f64,
    pub window: (f64, f64),
    /// Error budget of the combined value, tails included.
    pub error_bound: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.left + self.middle + self.right
    }

    pub fn middle_fraction(&self) -> f64 {
        self.middle / self.total()
    }
}

/// Collects the first error raised inside an infallible closure.
struct ErrorSlot(Mutex<Option<Error>>);

impl ErrorSlot {
    fn new() -> Self {
        ErrorSlot(Mutex::new(None))
    }

    fn value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.0.lock().unwrap_or_else(|p| p.into_inner());
                if slot.is_none() {
                    *slot = Some(e);
                }
                f64::NAN
            }
        }
    }

    fn take(&self) -> Option<Error> {
        self.0.lock().unwrap_or_else(|p| p.into_inner()).take()
    }

    fn finish<T>(&self, r: Result<T>) -> Result<T> {
        match self.take() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::domain(format!("tolerance must lie in (0, 1e-3], got {tol}")));
    }
    Ok(())
}

fn tail_left(a: &dyn CdfModel, b: &dyn CdfModel, x: f64) -> Result<f64> {
    Ok(a.left_mass_bound(x)? + b.left_mass_bound(x)?)
}

fn tail_right(a: &dyn CdfModel, b: &dyn CdfModel, x: f64) -> Result<f64> {
    Ok(a.right_mass_bound(x)? + b.right_mass_bound(x)?)
}

/// Integration range whose two tails each carry at most `budget`.
fn w1_range(a: &dyn CdfModel, b: &dyn CdfModel, budget: f64) -> Result<(f64, f64, f64)> {
    let mut lo = 0.0;
    let mut left = tail_left(a, b, lo)?;
    let mut steps = 0;
    while left > budget {
        lo -= 1.0;
        left = tail_left(a, b, lo)?;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Tolerance("cannot bound the left tail of the W1 integral".into()));
        }
    }
    let mut hi = 1.0;
    let mut right = tail_right(a, b, hi)?;
    steps = 0;
    while right > budget {
        hi += 1.0;
        right = tail_right(a, b, hi)?;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Tolerance("cannot bound the right tail of the W1 integral".into()));
        }
    }
    Ok((lo, hi, left + right))
}

/// Sign changes of `F - G` on a coarse grid, refined by bisection.
fn crossings(a: &dyn CdfModel, b: &dyn CdfModel, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let slot = ErrorSlot::new();
    let diff = |x: f64| slot.value(a.cdf(x)) - slot.value(b.cdf(x));
    let grid = search::linspace(lo, hi, 65);
    let vals: Vec<f64> = grid.iter().map(|&x| diff(x)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        if vals[i] == 0.0 || vals[i] * vals[i + 1] >= 0.0 {
            continue;
        }
        let (mut l, mut r, mut fl) = (grid[i], grid[i + 1], vals[i]);
        while r - l > 1e-10 * (1.0 + l.abs()) {
            let m = 0.5 * (l + r);
            let fm = diff(m);
            if fm * fl > 0.0 {
                l = m;
                fl = fm;
            } else {
                r = m;
            }
        }
        roots.push(0.5 * (l + r));
    }
    slot.finish(Ok(roots))
}

struct W1Parts {
    segments: Vec<f64>,
    quadrature_error: f64,
    tail: f64,
    cdf_error: f64,
    range: (f64, f64),
}

/// `int |F - G|` split at `cuts` (clipped to the integration range).
fn w1_segments(a: &dyn CdfModel, b: &dyn CdfModel, cuts: &[f64], tol: f64) -> Result<W1Parts> {
    check_tol(tol)?;
    let (lo, hi, tail) = w1_range(a, b, tol / 4.0)?;
    let mut breaks = crossings(a, b, lo, hi)?;
    breaks.extend(cuts.iter().copied().filter(|&x| x > lo && x < hi));
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut edges = vec![lo];
    edges.extend(cuts.iter().map(|&x| x.clamp(lo, hi)));
    edges.push(hi);

    let slot = ErrorSlot::new();
    let integrand = |x: f64| (slot.value(a.cdf(x)) - slot.value(b.cdf(x))).abs();
    let seg_tol = tol / (2.0 * (edges.len() - 1) as f64);
    let mut segments = Vec::with_capacity(edges.len() - 1);
    let mut quadrature_error = 0.0;
    for w in edges.windows(2) {
        if w[1] <= w[0] {
            segments.push(0.0);
            continue;
        }
        let pts: Vec<f64> = std::iter::once(w[0])
            .chain(breaks.iter().copied().filter(|&x| x > w[0] && x < w[1]))
            .chain(std::iter::once(w[1]))
            .collect();
        let r = slot.finish(quadrature::integrate(&integrand, &pts, seg_tol))?;
        segments.push(r.value);
        quadrature_error += r.error;
    }
    let cdf_error = (a.pointwise_error() + b.pointwise_error()) * (hi - lo);
    Ok(W1Parts { segments, quadrature_error, tail, cdf_error, range: (lo, hi) })
}

/// Wasserstein-1 distance between two models.
pub fn w1_between(a: &dyn CdfModel, b: &dyn CdfModel, tol: f64) -> Result<DistanceReport> {
    let parts = w1_segments(a, b, &[], tol)?;
    Ok(DistanceReport {
        kind: DistanceKind::W1,
        value: parts.segments.iter().sum(),
        quadrature_tol: tol,
        quadrature_error: parts.quadrature_error,
        tail_remainder_bound: parts.tail,
        cdf_error_bound: parts.cdf_error,
        argmax_x: None,
        window: None,
        range: parts.range,
    })
}

/// Wasserstein-1 distance from `model` to the standard Gumbel law.
pub fn w1_to_gumbel(model: &dyn CdfModel, tol: f64) -> Result<DistanceReport> {
    w1_between(model, &Gumbel::default(), tol)
}

/// Split of the W1 distance to Gumbel over `(-inf, -ℓ1]`, `[-ℓ1, ℓ2]`, `[ℓ2, inf)`.
pub fn decompose(model: &dyn CdfModel, c: &ScalingConstants, tol: f64) -> Result<Decomposition> {
    let parts = w1_segments(model, &Gumbel::default(), &[-c.ell1, c.ell2], tol)?;
    Ok(Decomposition {
        left: parts.segments[0],
        middle: parts.segments[1],
        right: parts.segments[2],
        window: (-c.ell1, c.ell2),
        error_bound: parts.quadrature_error + parts.tail + parts.cdf_error,
    })
}

/// W1 to Gumbel together with its decomposition, from a single integration.
pub fn w1_with_decomposition(
    model: &dyn CdfModel,
    c: &ScalingConstants,
    tol: f64,
) -> Result<(DistanceReport, Decomposition)> {
    let parts = w1_segments(model, &Gumbel::default(), &[-c.ell1, c.ell2], tol)?;
    let report = DistanceReport {
        kind: DistanceKind::W1,
        value: parts.segments.iter().sum(),
        quadrature_tol: tol,
        quadrature_error: parts.quadrature_error,
        tail_remainder_bound: parts.tail,
        cdf_error_bound: parts.cdf_error,
        argmax_x: None,
        window: Some((-c.ell1, c.ell2)),
        range: parts.range,
    };
    let dec = Decomposition {
        left: parts.segments[0],
        middle: parts.segments[1],
        right: parts.segments[2],
        window: (-c.ell1, c.ell2),
        error_bound: report.error_budget(),
    };
    Ok((report, dec))
}

/// Gumbel quantiles of `points` equispaced probabilities in `[1e-6, 1 - 1e-6]`.
pub fn gumbel_quantile_grid(points: usize) -> Vec<f64> {
    search::linspace(1e-6, 1.0 - 1e-6, points)
        .into_iter()
        .map(|p| -(-p.ln()).ln())
        .collect()
}

fn ks_on_grid(a: &dyn CdfModel, b: &dyn CdfModel, grid: &[f64], tol: f64) -> Result<DistanceReport> {
    check_tol(tol)?;
    let slot = ErrorSlot::new();
    let f = |x: f64| (slot.value(a.cdf(x)) - slot.value(b.cdf(x))).abs();
    let best = search::grid_max(&f, grid, KS_REFINE, tol);
    if let Some(e) = slot.take() {
        return Err(e);
    }
    if !best.value.is_finite() {
        return Err(Error::Tolerance("Kolmogorov search produced a non-finite value".into()));
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    // Both CDFs are monotone, so outside the grid |F - G| <= max(F, G) on the
    // left and max(1 - F, 1 - G) on the right.
    let left = a.cdf(lo)?.max(b.cdf(lo)?);
    let right = (1.0 - a.cdf(hi)?).max(1.0 - b.cdf(hi)?);
    Ok(DistanceReport {
        kind: DistanceKind::Ks,
        value: best.value.min(1.0),
        quadrature_tol: tol,
        quadrature_error: 0.0,
        tail_remainder_bound: (left.max(right) - best.value).max(0.0),
        cdf_error_bound: a.pointwise_error() + b.pointwise_error(),
        argmax_x: Some(best.x),
        window: None,
        range: (lo, hi),
    })
}

/// Kolmogorov distance between two models on the default Gumbel-quantile grid.
pub fn ks_between(a: &dyn CdfModel, b: &dyn CdfModel, tol: f64) -> Result<DistanceReport> {
    ks_on_grid(a, b, &gumbel_quantile_grid(KS_GRID), tol)
}

/// Kolmogorov distance from `model` to the standard Gumbel law.
pub fn ks_to_gumbel(model: &dyn CdfModel, tol: f64) -> Result<DistanceReport> {
    ks_between(model, &Gumbel::default(), tol)
}

/// Kolmogorov distance restricted to the window `[-ℓ1, ℓ2]`.
pub fn ks_in_window(model: &dyn CdfModel, c: &ScalingConstants, tol: f64) -> Result<DistanceReport> {
    let mut r = ks_on_grid(model, &Gumbel::default(), &search::linspace(-c.ell1, c.ell2, KS_GRID), tol)?;
    r.window = Some((-c.ell1, c.ell2));
    r.tail_remainder_bound = 0.0;
    Ok(r)
}

/// `int (F_{X_n} - F_{W_n}) dx`, the W1 distance between the two scalings.
pub fn scaling_gap(c: &ScalingConstants, tol: f64) -> Result<DistanceReport> {
    let x = ExactCdf::for_tolerance(*c, Scaling::Xn, tol);
    let w = ExactCdf::for_tolerance(*c, Scaling::Wn, tol);
    w1_between(&x, &w, tol)
}

/// Smallest `F_{X_n}(x) - F_{W_n}(x)` over `grid` (nonnegative when the
/// ordering `threshold_x >= threshold_w` holds).
pub fn scaling_gap_min_integrand(c: &ScalingConstants, grid: &[f64], eps: f64) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for &x in grid {
        let d = exact_cdf::cdf(c, Scaling::Xn, x, eps)? - exact_cdf::cdf(c, Scaling::Wn, x, eps)?;
        worst = worst.min(d);
    }
    Ok(worst)
}

/// The scaling gap computed in threshold coordinates: for a cut `M`,
/// `sqrt(γ_n) [int_0^{T_W(M)} (t^{-1/2} - n^{-1/2}) P(t) dt + int_{T_W(M)}^{T_X(M)} t^{-1/2} P(t) dt]`
/// plus a remainder in `[0, int_M^inf (1 - F_W)]`. Returns the value and the
/// width of that remainder (the left cut-off adds at most `left_mass_X`).
pub fn scaling_gap_in_threshold(c: &ScalingConstants, tol: f64) -> Result<(f64, f64)> {
    check_tol(tol)?;
    let w = ExactCdf::for_tolerance(*c, Scaling::Wn, tol);
    let x = ExactCdf::for_tolerance(*c, Scaling::Xn, tol);
    let mut m = 1.0;
    while w.right_mass_bound(m)? > tol / 4.0 {
        m += 1.0;
    }
    let mut lo = -1.0;
    while x.left_mass_bound(lo)? + w.left_mass_bound(lo)? > tol / 4.0 {
        lo -= 1.0;
    }
    let t_lo = c.threshold(Scaling::Wn, lo.max(c.y0))?;
    let t_w = c.threshold(Scaling::Wn, m)?;
    let t_x = c.threshold(Scaling::Xn, m)?;
    let sqrt_n = (c.n as f64).sqrt();
    let slot = ErrorSlot::new();
    let p = |t: f64| (-slot.value(exact_cdf::beta_at_threshold(c, t, w.eps).map(|v| v.beta))).exp();
    let mut pts = vec![t_lo, t_w];
    let nf = c.n as f64;
    if nf > t_lo && nf < t_w {
        // The integrand changes sign at t = n.
        pts.insert(1, nf);
    }
    let first = slot.finish(quadrature::integrate(
        |t| (1.0 / t.sqrt() - 1.0 / sqrt_n) * p(t),
        &pts,
        tol / (4.0 * c.gamma_n.sqrt()),
    ))?;
    let second = slot.finish(quadrature::integrate(
        |t| p(t) / t.sqrt(),
        &[t_w, t_x],
        tol / (4.0 * c.gamma_n.sqrt()),
    ))?;
    let value = c.gamma_n.sqrt() * (first.value + second.value);
    let slack = w.right_mass_bound(m)? + x.left_mass_bound(lo)? + w.left_mass_bound(lo)?;
    Ok((value, slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::make_constants;

    #[test]
    fn gumbel_to_itself_is_zero() {
        let g = Gumbel::default();
        let w = w1_to_gumbel(&g, 1e-8).unwrap();
        assert!(w.value <= 1e-12);
        assert!(w.tail_remainder_bound <= 1e-8);
        let k = ks_to_gumbel(&g, 1e-8).unwrap();
        assert_eq!(k.value, 0.0);
    }

    #[test]
    fn shifted_gumbel_w1_is_the_shift() {
        for &d in &[0.01, 0.3, -1.2] {
            let w = w1_to_gumbel(&Gumbel { location: d }, 1e-8).unwrap();
            assert!((w.value - d.abs()).abs() <= 2e-8 + w.tail_remainder_bound, "d={d}");
        }
    }

    #[test]
    fn shifted_gumbel_ks_matches_dense_grid() {
        let d = 0.25;
        let k = ks_to_gumbel(&Gumbel { location: d }, 1e-9).unwrap();
        let dense = (0..400_001)
            .map(|i| -5.0 + 15.0 * i as f64 / 400_000.0)
            .map(|x| (gumbel_cdf(x) - gumbel_cdf(x - d)).abs())
            .fold(0.0, f64::max);
        assert!((k.value - dense).abs() < 1e-9);
        assert!(k.argmax_x.unwrap().abs() < 1.0);
    }

    #[test]
    fn tolerance_is_validated() {
        assert!(w1_to_gumbel(&Gumbel::default(), 0.0).is_err());
        assert!(ks_to_gumbel(&Gumbel::default(), 0.5).is_err());
    }

    #[test]
    fn exact_tail_bounds_hold_numerically() {
        let c = make_constants(20_000).unwrap();
        let m = ExactCdf::new(c, Scaling::Wn, 1e-12);
        for &x in &[2.0, 5.0] {
            let bound = m.right_mass_bound(x).unwrap();
            let direct = quadrature::integrate(|s| 1.0 - m.cdf(s).unwrap(), &[x, x + 40.0], 1e-12)
                .unwrap()
                .value;
            assert!(direct <= bound, "x={x}: {direct} > {bound}");
            assert!(bound < 3.0 * direct + 1e-12, "x={x}: loose {bound} vs {direct}");
        }
        let left = m.left_mass_bound(-2.0).unwrap();
        let direct = quadrature::integrate(|s| m.cdf(s).unwrap(), &[-8.0, -2.0], 1e-14)
            .unwrap()
            .value;
        assert!(direct <= left);
    }

    #[test]
    fn decomposition_adds_up() {
        let c = make_constants(10_000).unwrap();
        let m = ExactCdf::for_tolerance(c, Scaling::Wn, 1e-6);
        let (w, d) = w1_with_decomposition(&m, &c, 1e-6).unwrap();
        assert!((d.total() - w.value).abs() < 1e-12);
        let direct = w1_to_gumbel(&m, 1e-6).unwrap();
        assert!((direct.value - w.value).abs() <= 3e-6);
        let alone = decompose(&m, &c, 1e-6).unwrap();
        assert!((alone.total() - direct.value).abs() <= 3e-6);
    }
}
