use ginibre_gumbel::exact_cdf;
use ginibre_gumbel::metrics::*;
use ginibre_gumbel::scaling::{make_constants, Scaling};
use ginibre_gumbel::special_fn::gumbel_cdf;

#[test]
fn w1_of_a_shift_is_the_shift() {
    let tol = 1e-8;
    for delta in [0.05, 0.3, -1.2] {
        let r = w1_between(&Gumbel { location: delta }, &Gumbel::default(), tol).unwrap();
        assert!((r.value - delta.abs()).abs() <= 2.0 * tol, "{delta}: {}", r.value);
    }
}

#[test]
fn w1_matches_dense_riemann_sum() {
    let c = make_constants(10_000).unwrap();
    let tol = 1e-7;
    let model = ExactCdf::for_tolerance(c, Scaling::Wn, tol);
    let r = w1_to_gumbel(&model, tol).unwrap();

    let (lo, hi) = (c.y0, 20.0);
    let points = 1_000_000;
    let h = (hi - lo) / points as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let tab = exact_cdf::tabulate(&c, Scaling::Wn, &grid, 1e-12).unwrap();
    let riemann: f64 = tab
        .cdf()
        .iter()
        .zip(&grid)
        .map(|(f, &x)| (f - gumbel_cdf(x)).abs() * h)
        .sum();
    // Left of the support edge only the Gumbel mass remains; right of 20 both tails are below e^{-20}.
    assert!(gumbel_cdf(lo) == 0.0);
    let tails = (-hi).exp() + model.right_mass_bound(hi).unwrap();
    assert!((r.value - riemann).abs() <= 1e-6 + tails, "{} vs {riemann}", r.value);
}

#[test]
fn ks_argmax_near_origin() {
    let c = make_constants(1_000_000).unwrap();
    let r = ks_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Wn, 1e-7), 1e-7).unwrap();
    let x = r.argmax_x.unwrap();
    assert!(x > -1.0 && x < 1.0, "{x}");
    assert!(r.value > 0.0 && r.value <= 1.0);
}

#[test]
fn decomposition_dominance_and_trend() {
    let tol = 1e-6;
    let mut prev = f64::INFINITY;
    for n in [10_000u64, 1_000_000, 100_000_000] {
        let c = make_constants(n).unwrap();
        let model = ExactCdf::for_tolerance(c, Scaling::Wn, tol);
        let d = decompose(&model, &c, tol).unwrap();
        let w = w1_to_gumbel(&model, tol).unwrap();
        assert!((d.total() - w.value).abs() <= 3.0 * tol);
        if n >= 1_000_000 {
            assert!(d.middle_fraction() >= 0.5);
        }
        let ratio = d.right / d.middle;
        assert!(ratio < prev, "n={n}: III/II = {ratio}");
        prev = ratio;
    }
}

#[test]
fn scaling_gap_properties() {
    let c = make_constants(1_000_000).unwrap();
    let tol = 1e-7;
    let grid: Vec<f64> = (0..200).map(|i| -5.0 + 0.1 * i as f64).collect();
    assert!(scaling_gap_min_integrand(&c, &grid, 1e-12).unwrap() >= 0.0);
    let gap = scaling_gap(&c, tol).unwrap();
    assert!(gap.value < 1.0 / c.gamma_n);
    let (alt, slack) = scaling_gap_in_threshold(&c, tol).unwrap();
    assert!((gap.value - alt).abs() <= 2.0 * tol + slack + gap.error_budget(), "{} vs {alt}", gap.value);
}

#[test]
fn triangle_inequality_between_scalings() {
    let c = make_constants(1_000_000).unwrap();
    let tol = 1e-7;
    let wx = w1_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Xn, tol), tol).unwrap();
    let ww = w1_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Wn, tol), tol).unwrap();
    let gap = scaling_gap(&c, tol).unwrap();
    let slack = wx.error_budget() + ww.error_budget() + gap.error_budget() + 3.0 * tol;
    assert!((wx.value - ww.value).abs() <= gap.value + slack);
}

#[test]
fn halving_tolerance_is_stable() {
    let c = make_constants(100_000).unwrap();
    for tol in [1e-5, 1e-7] {
        let coarse = w1_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Xn, tol), tol).unwrap();
        let fine = w1_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Xn, tol / 2.0), tol / 2.0).unwrap();
        assert!((coarse.value - fine.value).abs() < tol);
        let ks_c = ks_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Xn, tol), tol).unwrap();
        let ks_f = ks_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Xn, tol / 2.0), tol / 2.0).unwrap();
        assert!((ks_c.value - ks_f.value).abs() < tol);
    }
}
