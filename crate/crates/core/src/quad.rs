//! Quadrature building blocks: midpoint rules on the circle and
//! Gauss-Legendre rules on an interval.

use alloc::vec::Vec;
#[allow(unused_imports)] // method source under no_std
use num_traits::Float;

use crate::error::{CoreError, CoreResult};

/// Midpoint angles 2*pi*(k + 1/2)/m, k = 0..m.
///
/// The half-step shift keeps nodes off theta = 0, where the modulus
/// families of interest may vanish. For periodic integrands the rule has
/// the same spectral accuracy as the trapezoid rule.
pub fn circle_nodes(m: usize) -> Vec<f64> {
    let step = core::f64::consts::TAU / m as f64;
    (0..m).map(|k| (k as f64 + 0.5) * step).collect()
}

/// Mean of `f` over the midpoint grid, i.e. (1/2pi) * integral over the
/// circle up to quadrature error.
pub fn circle_mean(m: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let step = core::f64::consts::TAU / m as f64;
    let mut acc = 0.0;
    for k in 0..m {
        acc += f((k as f64 + 0.5) * step);
    }
    acc / m as f64
}

/// Gauss-Legendre nodes and weights on [lo, hi].
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> CoreResult<(Vec<f64>, Vec<f64>)> {
    if n < 2 || !(hi > lo) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("gauss_legendre(n={n}, lo={lo}, hi={hi})"),
        });
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(mid - half * x);
        weights.push(half * w);
        if i != n - 1 - i {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    // Ascending order keeps downstream sums deterministic and cache friendly.
    let mut idx: Vec<usize> = (0..nodes.len()).collect();
    idx.sort_unstable_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
    Ok((
        idx.iter().map(|&i| nodes[i]).collect(),
        idx.iter().map(|&i| weights[i]).collect(),
    ))
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
