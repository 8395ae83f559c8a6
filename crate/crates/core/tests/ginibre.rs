use ginibre_gumbel::ginibre::*;
use ginibre_gumbel::montecarlo::{ks_two_sample, sample_ymax, SampleBatch};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_by_two_spectral_identities() {
    for m in sample_matrices(2, 2000, 17).unwrap() {
        let ev = m.eigenvalues().unwrap();
        assert!((ev[0] + ev[1] - m.trace()).norm() <= 1e-10);
        assert!((ev[0] * ev[1] - m.determinant()).norm() <= 1e-10);
    }
}

#[test]
fn schur_inequality_and_residuals() {
    for n in [3usize, 16, 64] {
        for m in sample_matrices(n, 20, 3).unwrap() {
            let s = m.schur().unwrap();
            let sum: f64 = s.eigenvalues().iter().map(|z| z.norm_sqr()).sum();
            assert!(sum <= m.frobenius_sq() * (1.0 + 1e-12));
            assert!(s.residual <= 1e-8 * n as f64);
        }
    }
}

#[test]
fn radius_law_matches_max_of_gammas() {
    let direct = sample_radius_sq(8, 2000, 1).unwrap();
    let kostlan = sample_ymax(8, 2000, 2, 0.0).unwrap();
    let t = ks_two_sample(&direct, &kostlan).unwrap();
    assert!(t.p_value > 0.001, "{t:?}");
}

#[test]
fn diagonal_unitary_leaves_law_unchanged() {
    let n = 6;
    let size = 2000;
    let base = sample_matrices(n, size, 40).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let rotated: Vec<f64> = base
        .iter()
        .map(|m| {
            let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            radius_sq(&m.scale_columns_by_phases(&angles)).unwrap().radius_sq
        })
        .collect();
    let plain = sample_radius_sq(n, size, 42).unwrap();
    let rotated = SampleBatch { values: rotated, ..plain.clone() };
    assert!(ks_two_sample(&plain, &rotated).unwrap().p_value > 0.001);
}

#[test]
fn second_moment_at_n_two() {
    let b = sample_radius_sq(2, 100_000, 7).unwrap();
    let size = b.values.len() as f64;
    let mean = b.values.iter().sum::<f64>() / size;
    let var = b.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (size - 1.0);
    // E max(Exp(1), Gamma(2, 1)) = int_0^inf 1 - (1 - e^{-t})(1 - (1 + t) e^{-t}) dt.
    let expect = ginibre_gumbel::quadrature::integrate(
        |s: f64| {
            let t = s / (1.0 - s);
            let f = (1.0 - (-t).exp()) * (1.0 - (1.0 + t) * (-t).exp());
            (1.0 - f) / (1.0 - s).powi(2)
        },
        &[0.0, 0.5, 0.9, 0.99, 1.0],
        1e-12,
    )
    .unwrap()
    .value;
    assert!((expect - 2.25).abs() < 1e-10);
    assert!((mean - expect).abs() <= 3.0 * (var / size).sqrt(), "{mean} vs {expect}");
}

#[test]
fn known_spectrum() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let m = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(2.0, 0.0)]]).unwrap();
    let r = radius_sq(&m).unwrap();
    assert!((r.radius_sq - 9.0).abs() < 1e-12);
}
