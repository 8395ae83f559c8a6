//! Direct sampling of complex Ginibre matrices and their spectral radius.
//!
//! Eigenvalues come from a complex Schur decomposition: Householder reduction
//! to Hessenberg form followed by single-shift QR sweeps with Wilkinson shifts.
//! The unitary factor is accumulated so that every draw carries a backward
//! residual `‖A Z − Z T‖_F / ‖A‖_F`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{chunked, SampleBatch, SampleScaling, SampleSource};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 64;
/// Relative size below which a subdiagonal entry is treated as zero.
pub const DEFLATION_TOL: f64 = 1e-12;
/// Residual allowed per unit of dimension.
pub const RESIDUAL_PER_DIM: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("matrix must be square"));
        }
        Ok(ComplexMatrix { n, data: rows.concat() })
    }

    /// Independent entries with real and imaginary parts of variance ½.
    pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let data = (0..n * n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(scale * re, scale * im)
            })
            .collect();
        ComplexMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `A · diag(phases)`, with `phases` given as angles.
    pub fn scale_columns_by_phases(&self, angles: &[f64]) -> ComplexMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            for (j, &a) in angles.iter().enumerate().take(self.n) {
                out[(i, j)] *= Complex64::from_polar(1.0, a);
            }
        }
        out
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = ONE;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .expect("nonempty range");
            if a[(p, k)] == ZERO {
                return ZERO;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                det = -det;
            }
            let pivot = a[(k, k)];
            det *= pivot;
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        det
    }

    /// Complex Schur decomposition `A = Z T Z*`.
    pub fn schur(&self) -> Result<Schur> {
        schur(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        Ok(self.schur()?.eigenvalues())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone)]
pub struct Schur {
    /// Upper triangular factor.
    pub t: ComplexMatrix,
    /// Unitary factor.
    pub z: ComplexMatrix,
    pub sweeps: usize,
    /// `‖A Z − Z T‖_F / ‖A‖_F`.
    pub residual: f64,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.n).map(|i| self.t[(i, i)]).collect()
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, ONE);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn rotate_rows(m: &mut ComplexMatrix, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let (x, y) = (m[(k, j)], m[(k + 1, j)]);
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = -s.conj() * x + y * c;
    }
}

fn rotate_cols(m: &mut ComplexMatrix, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let (x, y) = (m[(i, k)], m[(i, k + 1)]);
        m[(i, k)] = x * c + s.conj() * y;
        m[(i, k + 1)] = -s * x + y * c;
    }
}

/// Householder reduction to upper Hessenberg form, accumulating `z`.
fn hessenberg(t: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = t.n;
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| t[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = t[(k + 1, k)];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| t[(i, k)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            continue;
        }
        let f = 2.0 / vv;
        for j in k..n {
            let s: Complex64 = v.iter().enumerate().map(|(a, vi)| vi.conj() * t[(k + 1 + a, j)]).sum();
            for (a, vi) in v.iter().enumerate() {
                t[(k + 1 + a, j)] -= vi * s * f;
            }
        }
        for m in [&mut *t, &mut *z] {
            for i in 0..n {
                let s: Complex64 = v.iter().enumerate().map(|(a, vj)| m[(i, k + 1 + a)] * vj).sum();
                for (a, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + a)] -= s * vj.conj() * f;
                }
            }
        }
        t[(k + 1, k)] = alpha;
        for i in k + 2..n {
            t[(i, k)] = ZERO;
        }
    }
}

/// Eigenvalue of the trailing 2×2 block of `[l..=h]` nearest its corner.
fn wilkinson_shift(t: &ComplexMatrix, h: usize) -> Complex64 {
    let (a, b, c, d) = (t[(h - 1, h - 1)], t[(h - 1, h)], t[(h, h - 1)], t[(h, h)]);
    let half = (a - d) * 0.5;
    let root = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (e1, e2) = (mid + root, mid - root);
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// One explicitly shifted QR step on the unreduced block `[l..=h]`.
fn qr_sweep(t: &mut ComplexMatrix, z: &mut ComplexMatrix, l: usize, h: usize, mu: Complex64) {
    let n = t.n;
    for i in l..=h {
        t[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(h - l);
    for k in l..h {
        let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
        rotate_rows(t, k, c, s, k..n);
        t[(k + 1, k)] = ZERO;
        rots.push((c, s));
    }
    for (off, &(c, s)) in rots.iter().enumerate() {
        let k = l + off;
        rotate_cols(t, k, c, s, 0..(k + 2).min(h + 1));
        rotate_cols(z, k, c, s, 0..n);
    }
    for i in l..=h {
        t[(i, i)] += mu;
    }
}

fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let n = a.n;
    let mut t = a.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut t, &mut z);
    let scale = a.frobenius_sq().sqrt().max(f64::MIN_POSITIVE);
    let max_sweeps = 100 * n.max(1);
    let mut sweeps = 0;
    let mut stalled = 0;
    let mut h = n.saturating_sub(1);
    while h > 0 {
        let mut l = h;
        while l > 0 {
            let mut s = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if s == 0.0 {
                s = scale;
            }
            if t[(l, l - 1)].norm() <= DEFLATION_TOL * s {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == h {
            h -= 1;
            stalled = 0;
            continue;
        }
        sweeps += 1;
        stalled += 1;
        if sweeps > max_sweeps {
            return Err(Error::Convergence(format!(
                "QR iteration did not converge in {max_sweeps} sweeps (n = {n})"
            )));
        }
        let mu = if stalled % 11 == 0 {
            // Exceptional shift to break cycles.
            t[(h, h)] + Complex64::new(0.75, 0.5) * t[(h, h - 1)].norm()
        } else {
            wilkinson_shift(&t, h)
        };
        qr_sweep(&mut t, &mut z, l, h, mu);
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    let az = a.mul(&z);
    let zt = z.mul(&t);
    let diff: f64 = az.data.iter().zip(&zt.data).map(|(x, y)| (x - y).norm_sqr()).sum();
    let residual = diff.sqrt() / scale;
    Ok(Schur { t, z, sweeps, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub n: usize,
    /// `max |λ|²`.
    pub radius_sq: f64,
    pub residual: f64,
}

fn check_dim(n: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(Error::domain(format!("matrix size must lie in [{MIN_DIM}, {MAX_DIM}], got {n}")));
    }
    Ok(())
}

/// Squared spectral radius of one matrix, with residual control.
pub fn radius_sq(m: &ComplexMatrix) -> Result<EigenSample> {
    let s = m.schur()?;
    let limit = RESIDUAL_PER_DIM * m.n as f64;
    if s.residual > limit {
        return Err(Error::Accuracy(format!("eigen residual {:e} exceeds {limit:e}", s.residual)));
    }
    let radius_sq = s.eigenvalues().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    Ok(EigenSample { n: m.n, radius_sq, residual: s.residual })
}

/// The matrices behind `sample_eigen(n, size, seed)`, in order.
pub fn sample_matrices(n: usize, size: usize, seed: u64) -> Result<Vec<ComplexMatrix>> {
    check_dim(n)?;
    chunked(size, seed, |rng| Ok(ComplexMatrix::ginibre(n, rng)))
}

pub fn sample_eigen(n: usize, size: usize, seed: u64) -> Result<Vec<EigenSample>> {
    check_dim(n)?;
    chunked(size, seed, |rng| radius_sq(&ComplexMatrix::ginibre(n, rng)))
}

/// `size >= 100` draws of `R_n²` as a raw batch.
pub fn sample_radius_sq(n: usize, size: usize, seed: u64) -> Result<SampleBatch> {
    if size < 100 {
        return Err(Error::domain(format!("size must be at least 100, got {size}")));
    }
    let draws = sample_eigen(n, size, seed)?;
    let max_residual = draws.iter().map(|d| d.residual).fold(0.0, f64::max);
    Ok(SampleBatch {
        n: n as u64,
        scaling_kind: SampleScaling::RawY,
        values: draws.iter().map(|d| d.radius_sq).collect(),
        seed,
        bias_bound: 0.0,
        source: SampleSource::Ginibre,
        max_residual: Some(max_residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::chunk_rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triangular_matrix_keeps_diagonal() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 1.0), c(0.0, 3.0)],
            vec![ZERO, c(-2.0, 0.5), c(1.0, 1.0)],
            vec![ZERO, ZERO, c(0.0, -4.0)],
        ])
        .unwrap();
        let mut ev = m.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        assert!((ev[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c(-2.0, 0.5)).norm() < 1e-14);
        assert!((ev[2] - c(0.0, -4.0)).norm() < 1e-14);
    }

    #[test]
    fn rotation_matrix_has_unit_circle_spectrum() {
        let m = ComplexMatrix::from_rows(&[vec![ZERO, c(-1.0, 0.0)], vec![ONE, ZERO]]).unwrap();
        for ev in m.eigenvalues().unwrap() {
            assert!((ev.norm() - 1.0).abs() < 1e-13);
            assert!(ev.re.abs() < 1e-13);
        }
    }

    #[test]
    fn random_schur_is_accurate() {
        let mut rng = chunk_rng(11, 0);
        for &n in &[2usize, 3, 8, 31, 64] {
            let m = ComplexMatrix::ginibre(n, &mut rng);
            let s = m.schur().unwrap();
            assert!(s.residual < 1e-13 * n as f64, "n={n} residual {}", s.residual);
            let ev = s.eigenvalues();
            let sum: Complex64 = ev.iter().sum();
            assert!((sum - m.trace()).norm() < 1e-10 * n as f64);
            let prod: Complex64 = ev.iter().product();
            let det = m.determinant();
            assert!((prod - det).norm() <= 1e-9 * det.norm().max(1.0));
            let eig_sq: f64 = ev.iter().map(|z| z.norm_sqr()).sum();
            assert!(eig_sq <= m.frobenius_sq() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dimension_limits() {
        assert!(sample_radius_sq(1, 100, 0).is_err());
        assert!(sample_radius_sq(65, 100, 0).is_err());
        assert!(sample_radius_sq(4, 99, 0).is_err());
    }

    #[test]
    fn batches_match_their_matrices() {
        let ms = sample_matrices(5, 300, 4).unwrap();
        let b = sample_radius_sq(5, 300, 4).unwrap();
        for (m, v) in ms.iter().zip(&b.values) {
            assert_eq!(radius_sq(m).unwrap().radius_sq, *v);
        }
        assert!(b.max_residual.unwrap() < 1e-12);
    }
}
