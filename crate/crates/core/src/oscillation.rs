//! Local mean oscillation over nonisotropic balls and the exponents it is
//! compared against.
//!
//! The oscillation of f over a ball Q is inf over pivots a of the mean of
//! |f - a|; the minimizing pivot is the geometric median of the sampled
//! values, computed by a damped Weiszfeld iteration. Exponents are read off
//! log-log fits of oscillation against ball radius.

use alloc::vec::Vec;
#[allow(unused_imports)] // method source under no_std
use num_traits::Float;

use crate::error::{CoreError, CoreResult};
use crate::function::BoundaryFunction;
use crate::sampler::Sampler;
use crate::sphere::{sample_cap, NisoBall, SpherePoint};
use crate::C64;

/// Weiszfeld stopping tolerance on the pivot displacement.
pub const MEDIAN_TOL: f64 = 1e-10;
/// Weiszfeld iteration budget before falling back to coordinate medians.
pub const MEDIAN_MAX_ITER: usize = 10_000;

/// Result of one oscillation measurement.
#[derive(Debug, Clone, Copy)]
pub struct Oscillation {
    /// Mean absolute deviation about the optimal pivot.
    pub nu: f64,
    /// The minimizing pivot (geometric median of the values).
    pub pivot: C64,
    /// True when Weiszfeld stalled and the coordinate-median fallback was used.
    pub fallback: bool,
}

/// Mean oscillation of a finite value set: min over a of mean |v - a|.
pub fn mean_oscillation(values: &[C64]) -> CoreResult<Oscillation> {
    if values.len() < 2 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("mean oscillation needs >= 2 values, got {}", values.len()),
        });
    }
    let scale = spread_scale(values);
    if scale < 1e-12 {
        // All values coincide to working precision.
        return Ok(Oscillation {
            nu: 0.0,
            pivot: values[0],
            fallback: false,
        });
    }
    let (pivot, fallback) = match weiszfeld(values, scale) {
        Some(p) => (p, false),
        None => (coordinate_median(values), true),
    };
    Ok(Oscillation {
        nu: mean_abs_dev(values, pivot),
        pivot,
        fallback,
    })
}

fn mean_abs_dev(values: &[C64], pivot: C64) -> f64 {
    values.iter().map(|v| (v - pivot).norm()).sum::<f64>() / values.len() as f64
}

fn spread_scale(values: &[C64]) -> f64 {
    let mean = values.iter().sum::<C64>() / values.len() as f64;
    values
        .iter()
        .map(|v| (v - mean).norm())
        .fold(0.0f64, f64::max)
}

/// Damped Weiszfeld iteration seeded at the mean. When an iterate lands on
/// a data point the subgradient test decides optimality; otherwise the
/// iterate is pushed off along the descent direction (Vardi-Zhang step).
/// Approaching a vertex optimum contracts only like the subgradient norm,
/// which can sit arbitrarily close to 1, so once the iterate is near a data
/// point that point is tested directly: when its subgradient condition
/// holds it is the exact global minimizer by convexity and is returned
/// as-is instead of being crawled toward.
fn weiszfeld(values: &[C64], scale: f64) -> Option<C64> {
    let coincide = 1e-14 * scale.max(1.0);
    let near = 1e-3 * scale;
    let mut y = values.iter().sum::<C64>() / values.len() as f64;
    let mut tested: Option<usize> = None;
    for _ in 0..MEDIAN_MAX_ITER {
        let mut num = C64::new(0.0, 0.0);
        let mut denom = 0.0;
        let mut pull = C64::new(0.0, 0.0); // sum of unit vectors toward the data
        let mut hits = 0usize;
        let mut nearest = (f64::MAX, 0usize);
        for (k, v) in values.iter().enumerate() {
            let d = (v - y).norm();
            if d < nearest.0 {
                nearest = (d, k);
            }
            if d <= coincide {
                hits += 1;
                continue;
            }
            num += v / d;
            denom += 1.0 / d;
            pull += (v - y) / d;
        }
        if denom == 0.0 {
            return Some(y); // every value coincides with the iterate
        }
        if hits == 0 && nearest.0 <= near && tested != Some(nearest.1) {
            tested = Some(nearest.1);
            if let Some(v) = vertex_optimum(values, nearest.1, coincide) {
                return Some(v);
            }
        }
        let next = if hits == 0 {
            num / denom
        } else {
            let r = pull.norm();
            if r <= hits as f64 {
                return Some(y); // subgradient optimality at a data point
            }
            let t = num / denom;
            let step = hits as f64 / r;
            t * (1.0 - step) + y * step
        };
        if (next - y).norm() <= MEDIAN_TOL * scale {
            return Some(next);
        }
        y = next;
    }
    None
}

/// Exact subgradient test at data point k: the point minimizes the mean
/// absolute deviation iff the unit pulls from the remaining values have
/// norm at most the multiplicity of the point itself.
fn vertex_optimum(values: &[C64], k: usize, coincide: f64) -> Option<C64> {
    let vk = values[k];
    let mut pull = C64::new(0.0, 0.0);
    let mut mult = 0usize;
    for v in values {
        let d = (v - vk).norm();
        if d <= coincide {
            mult += 1;
        } else {
            pull += (v - vk) / d;
        }
    }
    if pull.norm() <= mult as f64 {
        Some(vk)
    } else {
        None
    }
}

fn coordinate_median(values: &[C64]) -> C64 {
    let mut re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = values.iter().map(|v| v.im).collect();
    re.sort_unstable_by(f64::total_cmp);
    im.sort_unstable_by(f64::total_cmp);
    let mid = |xs: &[f64]| {
        let m = xs.len() / 2;
        if xs.len() % 2 == 1 {
            xs[m]
        } else {
            0.5 * (xs[m - 1] + xs[m])
        }
    };
    C64::new(mid(&re), mid(&im))
}

/// Oscillation of a boundary function over one ball, with sampling noise.
#[derive(Debug, Clone)]
pub struct OscillationEstimate {
    pub radius: f64,
    pub nu: f64,
    pub pivot: C64,
    pub sample_count: usize,
    /// Standard error of nu from the spread of |v - pivot|.
    pub standard_error: f64,
    pub fallback: bool,
}

/// Measures oscillation over the ball Q(center, r) from `count` uniform
/// samples of the ball.
pub fn oscillation_on_ball(
    f: &dyn BoundaryFunction,
    ball: &NisoBall,
    count: usize,
    sampler: &mut Sampler,
) -> CoreResult<OscillationEstimate> {
    if count < 8 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("oscillation needs >= 8 samples, got {count}"),
        });
    }
    let points = sample_cap(ball, count, sampler)?;
    let mut values = Vec::with_capacity(count);
    for p in &points {
        values.push(f.boundary_value(p)?);
    }
    let osc = mean_oscillation(&values)?;
    let var = values
        .iter()
        .map(|v| {
            let d = (v - osc.pivot).norm() - osc.nu;
            d * d
        })
        .sum::<f64>()
        / (count as f64 - 1.0);
    Ok(OscillationEstimate {
        radius: ball.radius,
        nu: osc.nu,
        pivot: osc.pivot,
        sample_count: count,
        standard_error: (var / count as f64).sqrt(),
        fallback: osc.fallback,
    })
}

/// Oscillation at every radius in `radii` around `center`. Each radius gets
/// its own substream, so the profile is independent of evaluation order.
pub fn oscillation_profile(
    f: &dyn BoundaryFunction,
    center: &SpherePoint,
    radii: &[f64],
    counts: &[usize],
    sampler: &Sampler,
) -> CoreResult<Vec<OscillationEstimate>> {
    if radii.len() != counts.len() {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("{} radii but {} counts", radii.len(), counts.len()),
        });
    }
    let mut out = Vec::with_capacity(radii.len());
    for (k, (&r, &count)) in radii.iter().zip(counts).enumerate() {
        let ball = NisoBall::new(center.clone(), r)?;
        let mut sub = sampler.substream(0x0513 + k as u64);
        out.push(oscillation_on_ball(f, &ball, count, &mut sub)?);
    }
    Ok(out)
}

/// Default per-ball sample count: grows as the ball shrinks so the relative
/// sampling error of nu stays roughly level across scales.
pub fn default_ball_count(radius: f64, n: usize, cap: usize) -> usize {
    let grown = 50.0 / radius.powf(n as f64 / 2.0);
    (grown.max(1_000.0) as usize).min(cap)
}

/// Power-law fit nu ~ C r^slope in log-log coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Two standard errors of the slope from the fit residuals.
    pub confidence_halfwidth: f64,
}

/// Ordinary least squares of y against x with the slope's 2-sigma halfwidth.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> CoreResult<ExponentFit> {
    let m = xs.len();
    if m != ys.len() || m < 3 {
        return Err(CoreError::InsufficientScales { needed: 3, got: m });
    }
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx < 1e-12 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("degenerate abscissa spread {sxx:.3e}"),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let slope_se = if m > 2 {
        (ss_res / (m as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        confidence_halfwidth: 2.0 * slope_se,
    })
}

/// Scales removed from a fit and why.
#[derive(Debug, Clone, Default)]
pub struct FitDiagnostics {
    /// Indices into the profile that were dropped (nu at noise level).
    pub dropped: Vec<usize>,
    pub used: usize,
}

/// Fits the decay exponent of an oscillation profile, dropping scales whose
/// nu is zero or noise dominated (standard error above nu/3).
pub fn fit_exponent(profile: &[OscillationEstimate]) -> CoreResult<(ExponentFit, FitDiagnostics)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut diag = FitDiagnostics::default();
    for (k, est) in profile.iter().enumerate() {
        if est.nu > 0.0 && est.standard_error <= est.nu / 3.0 {
            xs.push(est.radius.ln());
            ys.push(est.nu.ln());
        } else {
            diag.dropped.push(k);
        }
    }
    diag.used = xs.len();
    if xs.len() < 4 {
        return Err(CoreError::InsufficientScales {
            needed: 4,
            got: xs.len(),
        });
    }
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 3.0 * core::f64::consts::LN_2 - 1e-9 {
        return Err(CoreError::InsufficientScales {
            needed: 4,
            got: xs.len(),
        });
    }
    Ok((fit_loglog(&xs, &ys)?, diag))
}

/// The two bound regimes for a modulus that is alpha-Holder at the base
/// point, evaluated where they exchange roles.
#[derive(Debug, Clone, Copy)]
pub struct BalancedExponents {
    /// Radius exponent gamma at which phi(base) ~ l(Q)^gamma balances the
    /// two regime bounds; equals alpha/2.
    pub gamma: f64,
    /// Exponent of the regime bound l^alpha + phi(base), with phi ~ l^gamma.
    pub far_regime: f64,
    /// Exponent of the regime bound l^alpha + l^2 / phi^(2/alpha - 1).
    pub near_regime: f64,
}

/// Solves gamma = 1 - gamma (2/alpha - 1) for the crossover exponent.
pub fn balance_exponents(alpha: f64) -> CoreResult<BalancedExponents> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("holder exponent {alpha} outside (0, 2)"),
        });
    }
    let gamma = alpha / 2.0;
    Ok(BalancedExponents {
        gamma,
        far_regime: gamma.min(alpha),
        near_regime: 1.0 - gamma * (2.0 / alpha - 1.0),
    })
}

/// Smoothness-drop exponent alpha p / (p + n) for an alpha-Holder modulus
/// whose logarithm lies in L^p of the sphere of C^n. The equivalent dual
/// form alpha / (n + 1 - n/q), q = p/(p-1), must agree to 1e-12; the check
/// guards the algebra both routes rely on.
pub fn ball_drop_exponent(alpha: f64, p: f64, n: usize) -> CoreResult<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(p > 1.0) || n == 0 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("ball_drop_exponent(alpha={alpha}, p={p}, n={n})"),
        });
    }
    let direct = alpha * p / (p + n as f64);
    let q = p / (p - 1.0);
    let dual = alpha / (n as f64 + 1.0 - n as f64 / q);
    if (direct - dual).abs() > 1e-12 {
        return Err(CoreError::NoConvergence {
            what: "dual forms of the drop exponent disagree",
        });
    }
    Ok(direct)
}

/// Disc drop exponent alpha / (2 - 1/q) for a modulus with finite L^p log
/// integral on the circle, q = p/(p-1).
pub fn disc_drop_exponent(alpha: f64, p: f64) -> CoreResult<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || !(p > 1.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("disc_drop_exponent(alpha={alpha}, p={p})"),
        });
    }
    let q = p / (p - 1.0);
    Ok(alpha / (2.0 - 1.0 / q))
}

/// Radial weight exponent of the sharpness construction, computed two ways.
///
/// With q solving 1 + 1/p = 1/q + 1/(p/n + eps), the weight exponent is
/// p1 = (n - 2) - p (q - 1)/q; the closed form n^2 eps / (p + n eps) - 1
/// must agree to 1e-12, and integrability requires p1 > -1.
pub fn sharpness_weight_exponent(p: f64, n: usize, eps: f64) -> CoreResult<f64> {
    if n < 2 || !(p > n as f64) || !(eps > 0.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("sharpness_weight_exponent(p={p}, n={n}, eps={eps})"),
        });
    }
    let nf = n as f64;
    let inv_q = 1.0 + 1.0 / p - 1.0 / (p / nf + eps);
    if !(inv_q > 0.0) || !inv_q.is_finite() {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("conjugate exponent undefined: 1/q = {inv_q}"),
        });
    }
    let q = 1.0 / inv_q;
    let via_q = (nf - 2.0) - p * (q - 1.0) / q;
    let closed = nf * nf * eps / (p + nf * eps) - 1.0;
    if (via_q - closed).abs() > 1e-12 {
        return Err(CoreError::NoConvergence {
            what: "weight exponent routes disagree",
        });
    }
    if !(closed > -1.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("weight exponent {closed} fails integrability"),
        });
    }
    Ok(closed)
}
