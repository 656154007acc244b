//! Outer (zero-free) function evaluators: boundary modulus in, holomorphic
//! function out.
//!
//! On the disc the exponent is the Herglotz integral of log psi against
//! (e^{it} + z)/(e^{it} - z), discretized on a midpoint grid. Power cusps
//! |1 - e^{it}|^beta make that integrand log-singular, which caps a plain
//! periodic rule at O(1/M) accuracy; the evaluator instead subtracts
//! beta * log|1 - e^{it}| at the nodes and restores the cusp through its
//! exact transform (1 - z)^beta, so quadrature only ever sees the smooth
//! remainder.
//!
//! On the ball the exponent integral runs over the whole sphere and is
//! estimated by Monte Carlo with a per-point substream, making repeated
//! evaluations at one point reproducible.

use alloc::vec::Vec;
#[allow(unused_imports)] // method source under no_std
use num_traits::Float;

use crate::error::{CoreError, CoreResult};
use crate::function::InteriorFunction;
use crate::modulus::{CircleModulus, ModulusProfile};
use crate::quad;
use crate::sampler::Sampler;
use crate::sphere::{cap_measure_exact, sample_cap, sample_sphere, NisoBall, SpherePoint};
use crate::C64;

/// log|1 - e^{i t}|, shared by profile evaluation and subtraction so the
/// two agree bit for bit and the residual of a pure cusp is exactly zero.
pub(crate) fn log_gap(t: f64) -> f64 {
    (2.0 * (0.5 * t).sin()).abs().ln()
}

/// Quadrature-backed evaluator of the outer function of a circle modulus.
pub struct DiscOuterEvaluator {
    nodes: Vec<f64>,
    /// log psi at the nodes minus the subtracted cusp logs; zero for a pure
    /// power cusp.
    residual: Vec<f64>,
    /// (angle, exponent) of each subtracted cusp.
    cusps: Vec<(f64, f64)>,
    all_residuals_vanish: bool,
    clamped_nodes: usize,
    delta_min: f64,
}

impl DiscOuterEvaluator {
    /// Builds the evaluator on `m` midpoint nodes (power of two, >= 256),
    /// clamping the modulus below at `floor`.
    pub fn new(psi: &CircleModulus, m: usize, floor: f64) -> CoreResult<Self> {
        if !m.is_power_of_two() || m < 256 {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("node count {m} must be a power of two >= 256"),
            });
        }
        if !(floor > 0.0 && floor < 1.0) {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("modulus floor {floor} outside (0, 1)"),
            });
        }
        let nodes = quad::circle_nodes(m);
        let cusps = psi.cusps();
        let log_floor = floor.ln();
        let mut clamped = 0usize;
        let mut residual = Vec::with_capacity(m);
        for &t in &nodes {
            let mut v = psi.log_value(t);
            if v < log_floor {
                v = log_floor;
                clamped += 1;
            }
            for &(t0, beta) in &cusps {
                v -= beta * log_gap(t - t0);
            }
            residual.push(v);
        }
        let all_residuals_vanish = residual.iter().all(|&v| v == 0.0);
        Ok(DiscOuterEvaluator {
            nodes,
            residual,
            cusps,
            all_residuals_vanish,
            clamped_nodes: clamped,
            delta_min: 1e-8,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes whose modulus value was raised to the floor.
    pub fn clamped_nodes(&self) -> usize {
        self.clamped_nodes
    }

    /// True when the whole modulus is carried by closed-form cusp factors,
    /// in which case evaluation is exact up to rounding and valid on the
    /// closed disc.
    pub fn closed_form(&self) -> bool {
        self.all_residuals_vanish
    }

    fn guard_interior(&self, z: C64) -> CoreResult<()> {
        let norm = z.norm();
        if norm > 1.0 - self.delta_min {
            return Err(CoreError::TooCloseToBoundary {
                norm,
                max_norm: 1.0 - self.delta_min,
            });
        }
        Ok(())
    }

    /// Holomorphic exponent: quadrature of the residual against the
    /// Herglotz kernel plus the exact cusp logs.
    pub fn log_eval(&self, z: C64) -> CoreResult<C64> {
        self.guard_interior(z)?;
        Ok(self.residual_herglotz(z) + self.cusp_log(z))
    }

    /// Outer function value at an interior point.
    pub fn eval(&self, z: C64) -> CoreResult<C64> {
        Ok(self.log_eval(z)?.exp())
    }

    /// log |O(z)|: the Poisson integral of log psi.
    pub fn log_modulus(&self, z: C64) -> CoreResult<f64> {
        Ok(self.log_eval(z)?.re)
    }

    /// Boundary value on the closed disc; exact for closed-form cusps,
    /// radial limit otherwise.
    pub fn boundary_eval(&self, z: C64, tol: f64) -> CoreResult<C64> {
        if self.all_residuals_vanish || z.norm() <= 1.0 - self.delta_min {
            return Ok(self.residual_herglotz_interior_or_zero(z) + self.cusp_log(z)).map(C64::exp);
        }
        // Radial dilate schedule, capped where the node grid stops
        // resolving the kernel peak: the periodic rule needs roughly
        // 32 nodes across the strip 1 - |z|, and in any case the point
        // must stay inside the interior guard.
        let grid_cap = ((self.nodes.len() / 32).max(2) as f64).log2() as i32;
        let delta_cap = (-(self.delta_min.log2())) as i32 - 1;
        let k_cap = grid_cap.min(delta_cap);
        let mut prev: Option<C64> = None;
        let mut last = C64::new(0.0, 0.0);
        for k in 2..=k_cap.min(crate::function::MAX_DILATE_LEVEL) {
            let r = 1.0 - (0.5f64).powi(k);
            last = self.eval(z * r)?;
            if let Some(q) = prev {
                if (last - q).norm() < tol {
                    return Ok(last);
                }
            }
            prev = Some(last);
        }
        crate::function::note_stalled_dilate();
        Ok(last)
    }

    fn residual_herglotz_interior_or_zero(&self, z: C64) -> C64 {
        if self.all_residuals_vanish {
            C64::new(0.0, 0.0)
        } else {
            self.residual_herglotz(z)
        }
    }

    fn residual_herglotz(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&t, &h) in self.nodes.iter().zip(&self.residual) {
            if h == 0.0 {
                continue;
            }
            let e = C64::from_polar(1.0, t);
            acc += (e + z) / (e - z) * h;
        }
        acc / self.nodes.len() as f64
    }

    fn cusp_log(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(t0, beta) in &self.cusps {
            let w = C64::new(1.0, 0.0) - z * C64::from_polar(1.0, -t0);
            acc += w.ln() * beta;
        }
        acc
    }
}

impl InteriorFunction for DiscOuterEvaluator {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, z: &[C64]) -> CoreResult<C64> {
        if z.len() != 1 {
            return Err(CoreError::DimensionMismatch {
                expected: 1,
                got: z.len(),
            });
        }
        DiscOuterEvaluator::eval(self, z[0])
    }

    fn boundary_value(&self, p: &SpherePoint, tol: f64) -> CoreResult<C64> {
        self.boundary_eval(p.coords()[0], tol)
    }
}

/// The lift z -> g(z_1) of a disc function to the ball of C^n: holomorphic,
/// zero-free when g is, and with boundary modulus |g(zeta_1)|.
pub struct LiftedDisc {
    g: DiscOuterEvaluator,
    n: usize,
}

/// Lifts a disc outer function to dimension n >= 2.
pub fn lift_to_ball(g: DiscOuterEvaluator, n: usize) -> CoreResult<LiftedDisc> {
    if n < 2 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("lift target dimension {n} must be >= 2"),
        });
    }
    Ok(LiftedDisc { g, n })
}

impl LiftedDisc {
    pub fn disc(&self) -> &DiscOuterEvaluator {
        &self.g
    }
}

impl InteriorFunction for LiftedDisc {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[C64]) -> CoreResult<C64> {
        if z.len() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        DiscOuterEvaluator::eval(&self.g, z[0])
    }

    fn boundary_value(&self, p: &SpherePoint, tol: f64) -> CoreResult<C64> {
        // |zeta_1| <= 1 on the sphere, so the disc evaluator's own boundary
        // handling applies coordinate-wise.
        self.g.boundary_eval(p.coords()[0], tol)
    }
}

/// One Monte-Carlo evaluation of a ball outer function.
#[derive(Debug, Clone, Copy)]
pub struct BallOuterValue {
    pub value: C64,
    /// Estimated holomorphic exponent integral.
    pub exponent: C64,
    /// Standard error of the exponent estimate (complex components combined).
    pub exponent_se: f64,
}

/// Monte-Carlo evaluator of the outer function with boundary modulus `phi`
/// on the ball of C^n.
pub struct BallOuterEvaluator<'a> {
    phi: &'a ModulusProfile,
    mc_count: usize,
    sampler: Sampler,
    delta_min: f64,
    se_cap: f64,
    /// Blend a cap proposal around z/|z| into the sampling once |z| passes
    /// the threshold; None disables the mixture.
    importance_threshold: Option<f64>,
}

impl<'a> BallOuterEvaluator<'a> {
    pub fn new(phi: &'a ModulusProfile, mc_count: usize, sampler: Sampler) -> CoreResult<Self> {
        if mc_count < 100 {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("ball outer needs >= 100 Monte-Carlo samples, got {mc_count}"),
            });
        }
        Ok(BallOuterEvaluator {
            phi,
            mc_count,
            sampler,
            delta_min: 1e-8,
            se_cap: 0.5,
            importance_threshold: None,
        })
    }

    /// Caps the tolerated exponent standard error (default 0.5).
    pub fn with_se_cap(mut self, cap: f64) -> Self {
        self.se_cap = cap;
        self
    }

    /// Enables the cap-concentrated importance mixture beyond `threshold`.
    pub fn with_importance_mixture(mut self, threshold: f64) -> Self {
        self.importance_threshold = Some(threshold);
        self
    }

    pub fn eval_detailed(&self, z: &[C64]) -> CoreResult<BallOuterValue> {
        let n = self.phi.dim();
        if z.len() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1.0 - self.delta_min {
            return Err(CoreError::TooCloseToBoundary {
                norm,
                max_norm: 1.0 - self.delta_min,
            });
        }
        let mut sub = self.sampler.substream(Sampler::point_stream(z));
        let use_mixture = match self.importance_threshold {
            Some(t) => norm > t,
            None => false,
        };
        let (mean, se) = if use_mixture {
            self.exponent_by_mixture(z, norm, &mut sub)?
        } else {
            self.exponent_plain(z, &mut sub)?
        };
        if se > self.se_cap {
            return Err(CoreError::NoisyEstimate {
                standard_error: se,
                cap: self.se_cap,
            });
        }
        Ok(BallOuterValue {
            value: mean.exp(),
            exponent: mean,
            exponent_se: se,
        })
    }

    fn exponent_plain(&self, z: &[C64], sub: &mut Sampler) -> CoreResult<(C64, f64)> {
        let n = self.phi.dim();
        let mut acc = C64::new(0.0, 0.0);
        let mut acc2 = 0.0;
        for _ in 0..self.mc_count {
            let xi = sample_sphere(n, sub);
            let v = crate::kernels::herglotz_kernel(z, &xi)? * self.phi.log_value(&xi);
            acc += v;
            acc2 += v.norm_sqr();
        }
        finish_mean(acc, acc2, self.mc_count)
    }

    /// Importance mixture: half uniform, half uniform on the cap around
    /// z/|z| that covers the kernel peak; densities are known exactly, so
    /// the weighted estimator stays unbiased.
    fn exponent_by_mixture(&self, z: &[C64], norm: f64, sub: &mut Sampler) -> CoreResult<(C64, f64)> {
        let n = self.phi.dim();
        let dir = SpherePoint::new(z.to_vec()).expect("nonzero interior point");
        let radius = (8.0 * (1.0 - norm)).min(2.0);
        let cap = NisoBall::new(dir, radius)?;
        let sigma_cap = cap_measure_exact(n, radius)?;
        let mut acc = C64::new(0.0, 0.0);
        let mut acc2 = 0.0;
        let half = self.mc_count / 2;
        for i in 0..self.mc_count {
            let xi = if i < half {
                sample_sphere(n, sub)
            } else {
                sample_cap(&cap, 1, sub)?.pop().expect("one cap point")
            };
            let in_cap = cap.contains(&xi);
            let density = 0.5 + if in_cap { 0.5 / sigma_cap } else { 0.0 };
            let v = crate::kernels::herglotz_kernel(z, &xi)? * self.phi.log_value(&xi) / density;
            acc += v;
            acc2 += v.norm_sqr();
        }
        finish_mean(acc, acc2, self.mc_count)
    }
}

fn finish_mean(acc: C64, acc2: f64, count: usize) -> CoreResult<(C64, f64)> {
    let mean = acc / count as f64;
    let var = (acc2 / count as f64 - mean.norm_sqr()).max(0.0);
    Ok((mean, (var / count as f64).sqrt()))
}

impl InteriorFunction for BallOuterEvaluator<'_> {
    fn dim(&self) -> usize {
        self.phi.dim()
    }

    fn eval(&self, z: &[C64]) -> CoreResult<C64> {
        Ok(self.eval_detailed(z)?.value)
    }

    /// Dilate schedule aware of Monte-Carlo noise: stops on the value
    /// tolerance like the default, or once successive exponents agree
    /// within their combined standard errors (deeper dilates only add
    /// variance), and never dilates past the interior guard.
    fn boundary_value(&self, p: &SpherePoint, tol: f64) -> CoreResult<C64> {
        let k_cap = (-(self.delta_min.log2())) as i32 - 1;
        let mut prev: Option<BallOuterValue> = None;
        let mut last = C64::new(0.0, 0.0);
        for k in 2..=k_cap.min(crate::function::MAX_DILATE_LEVEL) {
            let r = 1.0 - (0.5f64).powi(k);
            let v = self.eval_detailed(&p.dilate(r))?;
            if let Some(q) = &prev {
                let value_close = (v.value - q.value).norm() < tol;
                let noise_floor =
                    (v.exponent - q.exponent).norm() <= 3.0 * (v.exponent_se + q.exponent_se);
                if value_close || noise_floor {
                    return Ok(v.value);
                }
            }
            last = v.value;
            prev = Some(v);
        }
        crate::function::note_stalled_dilate();
        Ok(last)
    }
}

/// Integral over the sphere of a function of the first coordinate, computed
/// on the slice: integral of F(lambda) against the weighted area density
/// (1 - |lambda|^2)^(n-2) on the unit disc, n >= 2.
///
/// The normalizing constant is not taken on faith: the same grid integrates
/// F = 1 and the ratio is returned, so the formula is exact on constants by
/// construction.
pub fn slice_integral(
    f: impl Fn(C64) -> CoreResult<f64>,
    n: usize,
    radial_nodes: usize,
    angular_nodes: usize,
) -> CoreResult<f64> {
    if n < 2 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("slice integral needs dimension >= 2, got {n}"),
        });
    }
    let (rs, ws) = quad::gauss_legendre(radial_nodes, 0.0, 1.0)?;
    let angles = quad::circle_nodes(angular_nodes);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&r, &w) in rs.iter().zip(&ws) {
        let weight = w * r * (1.0 - r * r).powi(n as i32 - 2);
        for &b in &angles {
            num += weight * f(C64::from_polar(r, b))?;
            den += weight;
        }
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::CircleModulus;

    const EVAL_GRID: [(f64, f64); 5] = [(0.0, 0.0), (0.3, 0.0), (0.0, 0.5), (-0.55, 0.2), (0.1, -0.7)];

    #[test]
    fn constant_modulus_gives_constant_outer_function() {
        let g = DiscOuterEvaluator::new(&CircleModulus::constant(0.37).unwrap(), 256, 1e-12).unwrap();
        for &(re, im) in &EVAL_GRID {
            let got = g.eval(C64::new(re, im)).unwrap();
            assert!((got - C64::new(0.37, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn power_cusp_outer_function_is_one_minus_z_to_beta() {
        for &beta in &[0.25, 0.5, 1.0] {
            let psi = CircleModulus::power_cusp(beta).unwrap();
            let g = DiscOuterEvaluator::new(&psi, 1 << 12, 1e-12).unwrap();
            assert!(g.closed_form());
            for &(re, im) in &EVAL_GRID {
                let z = C64::new(re, im);
                let want = ((C64::new(1.0, 0.0) - z).ln() * beta).exp();
                let got = g.eval(z).unwrap();
                assert!(
                    (got - want).norm() < 1e-6,
                    "beta={beta}, z={z}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn plain_midpoint_quadrature_oracle_confirms_the_cusp_transform() {
        // Independent route, no subtraction: midpoint sums at M and 2M with
        // Richardson elimination of the 1/M term from the log singularity.
        let z = C64::new(0.3, 0.0);
        let herglotz_sum = |m: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for t in quad::circle_nodes(m) {
                let e = C64::from_polar(1.0, t);
                acc += (e + z) / (e - z) * log_gap(t);
            }
            acc / m as f64
        };
        let m = 1 << 18;
        let (a, b) = (herglotz_sum(m), herglotz_sum(2 * m));
        let extrapolated = b * 2.0 - a;
        let closed = (C64::new(1.0, 0.0) - z).ln();
        assert!(
            (b * 2.0 - a - (C64::new(1.0, 0.0) - z).ln()).norm() < 1e-7,
            "oracle {extrapolated} vs closed form {closed}"
        );
    }

    #[test]
    fn smooth_modulus_quadrature_is_spectral() {
        // psi = exp(cos t) has outer function exp(z).
        let psi = CircleModulus::custom(|t| t.cos());
        let coarse = DiscOuterEvaluator::new(&psi, 256, 1e-12).unwrap();
        let fine = DiscOuterEvaluator::new(&psi, 512, 1e-12).unwrap();
        for &(re, im) in &EVAL_GRID {
            let z = C64::new(re, im);
            let want = z.exp();
            let a = coarse.eval(z).unwrap();
            let b = fine.eval(z).unwrap();
            assert!((a - want).norm() < 1e-10, "z={z}: {a} vs {want}");
            assert!((a - b).norm() < 1e-10, "doubling the grid moved the value");
        }
    }

    #[test]
    fn outer_functions_multiply_when_moduli_multiply() {
        // log(psi1 psi2) fed as one custom profile vs the product of the
        // separate outer functions.
        let psi1 = CircleModulus::custom(|t| 0.3 * t.cos());
        let psi2 = CircleModulus::custom(|t| -0.2 * (2.0 * t).sin() + 0.1);
        let both = CircleModulus::custom(|t| 0.3 * t.cos() - 0.2 * (2.0 * t).sin() + 0.1);
        let m = 1 << 10;
        let g1 = DiscOuterEvaluator::new(&psi1, m, 1e-12).unwrap();
        let g2 = DiscOuterEvaluator::new(&psi2, m, 1e-12).unwrap();
        let g12 = DiscOuterEvaluator::new(&both, m, 1e-12).unwrap();
        for &(re, im) in &EVAL_GRID {
            let z = C64::new(re, im);
            let prod = g1.eval(z).unwrap() * g2.eval(z).unwrap();
            let joint = g12.eval(z).unwrap();
            assert!((prod - joint).norm() < 1e-11);
        }
    }

    #[test]
    fn dilated_modulus_approaches_the_boundary_data() {
        // |O(r e^{i b})| -> psi(b) as r -> 1 at angles away from the cusp.
        let psi = CircleModulus::power_cusp(0.5).unwrap();
        let g = DiscOuterEvaluator::new(&psi, 1 << 18, 1e-12).unwrap();
        let r = 1.0 - 1e-4;
        for k in 1..32 {
            let b = core::f64::consts::TAU * k as f64 / 32.0;
            let got = g.eval(C64::from_polar(r, b)).unwrap().norm();
            let want = psi.log_value(b).exp();
            assert!((got - want).abs() < 1e-3, "angle {b}: {got} vs {want}");
        }
    }

    #[test]
    fn evaluator_rejects_near_boundary_points_and_directs_to_radial_mode() {
        let psi = CircleModulus::power_cusp(0.5).unwrap();
        let g = DiscOuterEvaluator::new(&psi, 256, 1e-12).unwrap();
        match g.eval(C64::new(1.0 - 1e-9, 0.0)) {
            Err(CoreError::TooCloseToBoundary { .. }) => {}
            other => panic!("expected boundary guard, got {other:?}"),
        }
        // closed-form path still serves boundary values exactly
        let b = g.boundary_eval(C64::new(1.0, 0.0) - C64::from_polar(1e-9, 0.3), 1e-10).unwrap();
        assert!(b.norm() < 1e-4);
    }

    #[test]
    fn node_count_must_be_a_power_of_two() {
        let psi = CircleModulus::constant(1.0).unwrap();
        assert!(DiscOuterEvaluator::new(&psi, 300, 1e-12).is_err());
        assert!(DiscOuterEvaluator::new(&psi, 128, 1e-12).is_err());
    }

    #[test]
    fn slice_integral_is_exact_on_constants_and_moments() {
        let one = slice_integral(|_| Ok(1.0), 2, 24, 64).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
        // E |zeta_1|^2 = 1/n on the sphere of C^n.
        for n in 2..=4usize {
            let got = slice_integral(|l| Ok(l.norm_sqr()), n, 24, 64).unwrap();
            assert!(
                (got - 1.0 / n as f64).abs() < 1e-12,
                "n={n}: {got}"
            );
        }
        assert!(slice_integral(|_| Ok(1.0), 1, 24, 64).is_err());
    }

    #[test]
    fn lift_requires_dimension_at_least_two() {
        let psi = CircleModulus::power_cusp(0.5).unwrap();
        let g = DiscOuterEvaluator::new(&psi, 256, 1e-12).unwrap();
        assert!(lift_to_ball(g, 1).is_err());
    }

    #[test]
    fn lifted_function_depends_on_the_first_coordinate_only() {
        let psi = CircleModulus::power_cusp(0.5).unwrap();
        let g = DiscOuterEvaluator::new(&psi, 1 << 10, 1e-12).unwrap();
        let lifted = lift_to_ball(g, 2).unwrap();
        let z1 = C64::new(0.4, 0.1);
        let a = lifted.eval(&[z1, C64::new(0.2, 0.0)]).unwrap();
        let b = lifted.eval(&[z1, C64::new(0.0, -0.6)]).unwrap();
        assert!((a - b).norm() < 1e-14);
        let want = ((C64::new(1.0, 0.0) - z1).ln() * 0.5).exp();
        assert!((a - want).norm() < 1e-9);
    }
}
