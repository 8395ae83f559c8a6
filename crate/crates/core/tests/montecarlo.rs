use ginibre_gumbel::exact_cdf;
use ginibre_gumbel::metrics::{ks_to_gumbel, ExactCdf};
use ginibre_gumbel::montecarlo::*;
use ginibre_gumbel::scaling::{make_constants, threshold_x, Scaling};
use ginibre_gumbel::special_fn::gumbel_cdf;

#[test]
fn truncated_and_exact_paths_agree() {
    let exact = sample_ymax(100_000, 10_000, 21, 0.0).unwrap();
    let trunc = sample_ymax(100_000, 10_000, 22, 1e-3).unwrap();
    assert!(matches!(trunc.source, SampleSource::MaxGammaTruncated { .. }));
    assert!(trunc.bias_bound > 0.0 && trunc.bias_bound <= 1e-3);
    let t = ks_two_sample(&exact, &trunc).unwrap();
    assert!(t.p_value > 0.001, "{t:?}");
}

#[test]
fn truncated_batch_matches_exact_cdf() {
    let n = 100_000;
    let c = make_constants(n).unwrap();
    let b = sample_ymax(n, 20_000, 5, 1e-3).unwrap();
    let t = ks_one_sample(&b, |y| Ok(exact_cdf::beta_at_threshold(&c, y, 1e-12)?.cdf())).unwrap();
    assert!(t.statistic <= 1.63 / (20_000f64).sqrt(), "{t:?}");
}

#[test]
fn xn_batch_against_gumbel() {
    let n = 1_000_000;
    let size = 100_000;
    let c = make_constants(n).unwrap();
    let raw = sample_ymax(n, size, 8, 1e-3).unwrap();
    let xb = transform_batch(&raw, &c, Scaling::Xn).unwrap();
    let stat = ks_one_sample(&xb, |x| Ok(gumbel_cdf(x))).unwrap().statistic;
    let exact = ks_to_gumbel(&ExactCdf::for_tolerance(c, Scaling::Xn, 1e-6), 1e-6).unwrap().value;
    let pred = exact + 1.63 / (size as f64).sqrt();
    assert!(stat >= 0.5 * pred && stat <= 2.0 * pred, "{stat} vs {pred}");
}

#[test]
fn transforms_hit_their_anchors() {
    let c = make_constants(10_000).unwrap();
    let raw = SampleBatch {
        n: c.n,
        scaling_kind: SampleScaling::RawY,
        values: vec![c.a_n, threshold_x(&c, 0.0).unwrap()],
        seed: 0,
        bias_bound: 0.0,
        source: SampleSource::MaxGammaExact,
        max_residual: None,
    };
    let w = transform_batch(&raw, &c, Scaling::Wn).unwrap();
    let x = transform_batch(&raw, &c, Scaling::Xn).unwrap();
    assert!(w.values[0].abs() < 1e-12);
    assert!(x.values[1].abs() < 1e-12);
}

#[test]
fn seeds_reproduce_bitwise_across_thread_counts() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| sample_ymax(2000, 3000, 99, 1e-3).unwrap());
    let b = four.install(|| sample_ymax(2000, 3000, 99, 1e-3).unwrap());
    assert_eq!(a, b);
    let bits = |s: &SampleBatch| s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn tiny_samples_rejected() {
    let b = sample_ymax(10, 50, 1, 0.0).unwrap();
    assert!(ks_one_sample(&b, |_| Ok(0.5)).is_err());
    assert!(ks_two_sample(&b, &b).is_err());
}
