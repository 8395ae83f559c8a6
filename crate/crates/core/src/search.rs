//! Global maximisation of a cheap-to-evaluate function on a grid, with
//! golden-section refinement of the best local maxima.

use rayon::prelude::*;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evals: usize,
}

/// Golden-section search for a maximum of `f` inside `[a, b]`, to width `tol`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Maximum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    if fc >= fd {
        Maximum { x: c, value: fc, evals }
    } else {
        Maximum { x: d, value: fd, evals }
    }
}

/// Maximise `f` over the sorted `grid`, refining the `top` best interior
/// local maxima by golden section to x-resolution `tol`.
pub(crate) fn grid_max<F: Fn(f64) -> f64 + Sync>(f: &F, grid: &[f64], top: usize, tol: f64) -> Maximum {
    assert!(!grid.is_empty());
    let values: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect();
    let mut best = Maximum { x: grid[0], value: values[0], evals: values.len() };
    for (i, &v) in values.iter().enumerate() {
        if v > best.value {
            best.x = grid[i];
            best.value = v;
        }
    }
    let mut peaks: Vec<usize> = (0..values.len())
        .filter(|&i| {
            let left = i == 0 || values[i - 1] <= values[i];
            let right = i + 1 == values.len() || values[i + 1] <= values[i];
            left && right
        })
        .collect();
    peaks.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    peaks.truncate(top);
    let refined: Vec<Maximum> = peaks
        .par_iter()
        .map(|&i| {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(grid.len() - 1)];
            golden_max(f, a, b, tol)
        })
        .collect();
    for r in refined {
        best.evals += r.evals;
        if r.value > best.value {
            best.x = r.x;
            best.value = r.value;
        }
    }
    best
}

/// `points` equispaced values covering `[a, b]`.
pub(crate) fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..points)
            .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_smooth_peak() {
        let f = |x: f64| -(x - 0.123_456).powi(2);
        let m = grid_max(&f, &linspace(-1.0, 1.0, 11), 3, 1e-10);
        assert!((m.x - 0.123_456).abs() < 1e-9);
    }

    #[test]
    fn prefers_global_among_several_peaks() {
        let f = |x: f64| (3.0 * x).sin() + 0.1 * x;
        let m = grid_max(&f, &linspace(0.0, 10.0, 200), 5, 1e-10);
        // Local maxima solve cos(3x) = -1/30; the largest one in range is the last.
        let expect = (-1.0f64 / 30.0).acos() / 3.0 + 8.0 * std::f64::consts::PI / 3.0;
        assert!((m.x - expect).abs() < 1e-8, "{}", m.x);
    }

    #[test]
    fn endpoint_maximum() {
        let m = grid_max(&|x: f64| x, &linspace(0.0, 2.0, 5), 2, 1e-8);
        assert!((m.x - 2.0).abs() < 1e-8);
    }
}
