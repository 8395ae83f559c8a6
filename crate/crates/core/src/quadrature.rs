//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Refinement proceeds in rounds. Each round bisects every interval whose
//! error estimate is within a factor of ten of the worst one, and the new
//! halves are evaluated in parallel. Results are collected in interval order
//! and summed with compensation, so the answer does not depend on the number
//! of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::util::kahan_sum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Hard cap on the number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 4000;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-interval |K15 - G7| estimates.
    pub error: f64,
    pub evals: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel { a, b, value, error }
}

/// Integrate `f` over `[points[0], points[last]]` with interior breakpoints,
/// to absolute tolerance `tol`.
pub fn integrate<F>(f: F, points: &[f64], tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    if points.len() < 2 {
        return Err(Error::Domain("integration needs at least two points".into()));
    }
    if points.windows(2).any(|w| !(w[0] <= w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("integration points must be finite and sorted".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let spans: Vec<(f64, f64)> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    let mut panels: Vec<Panel> = spans.par_iter().map(|&(a, b)| gk15(&f, a, b)).collect();
    let mut evals = 15 * panels.len();

    loop {
        let total_err = kahan_sum(panels.iter().map(|p| p.error));
        if total_err <= tol {
            break;
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Tolerance(format!(
                "quadrature did not reach {tol:e} with {} intervals (estimate {total_err:e})",
                panels.len()
            )));
        }
        let worst = panels.iter().map(|p| p.error).fold(0.0, f64::max);
        let cutoff = 0.1 * worst;
        let split: Vec<usize> = (0..panels.len()).filter(|&i| panels[i].error >= cutoff).collect();
        let halves: Vec<(Panel, Panel)> = split
            .par_iter()
            .map(|&i| {
                let p = panels[i];
                let mid = 0.5 * (p.a + p.b);
                (gk15(&f, p.a, mid), gk15(&f, mid, p.b))
            })
            .collect();
        if split
            .iter()
            .any(|&i| 0.5 * (panels[i].a + panels[i].b) <= panels[i].a)
        {
            return Err(Error::Tolerance(
                "quadrature interval shrank below machine resolution".into(),
            ));
        }
        evals += 30 * split.len();
        let mut next = Vec::with_capacity(panels.len() + split.len());
        let mut pending = split.iter().zip(halves).peekable();
        for (i, p) in panels.iter().enumerate() {
            match pending.peek() {
                Some((&j, _)) if j == i => {
                    let (_, (left, right)) = pending.next().unwrap();
                    next.push(left);
                    next.push(right);
                }
                _ => next.push(*p),
            }
        }
        panels = next;
    }

    Ok(QuadResult {
        value: kahan_sum(panels.iter().map(|p| p.value)),
        error: kahan_sum(panels.iter().map(|p| p.error)),
        evals,
        intervals: panels.len(),
    })
}
