//! Geometry of the unit sphere of C^n: the nonisotropic quasimetric
//! d(u, v) = |1 - <u, v>|, the balls it induces, and samplers for the
//! normalized surface measure.
//!
//! Coordinates are written in the slice form zeta = (zeta_1, rho * omega)
//! with rho^2 = 1 - |zeta_1|^2: surface measure pushes forward to the
//! weighted area density (1 - |lambda|^2)^(n-2) dA(lambda) on the unit disc
//! of the first coordinate, times the uniform fiber. The cap sampler below
//! is built directly on that identity.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // method source under no_std
use num_traits::Float;

use crate::error::{CoreError, CoreResult};
use crate::sampler::Sampler;
use crate::C64;

/// Point on the unit sphere of C^n, kept unit length by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<C64>,
}

impl SpherePoint {
    /// Normalizes `coords` onto the sphere. Errors on an empty or zero vector.
    pub fn new(coords: Vec<C64>) -> CoreResult<Self> {
        if coords.is_empty() {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("sphere point needs at least one coordinate"),
            });
        }
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("cannot normalize vector of norm {norm}"),
            });
        }
        let coords = coords.into_iter().map(|c| c / norm).collect();
        Ok(SpherePoint { coords })
    }

    /// The distinguished point (1, 0, ..., 0).
    pub fn base(n: usize) -> Self {
        let mut coords = vec![C64::new(0.0, 0.0); n.max(1)];
        coords[0] = C64::new(1.0, 0.0);
        SpherePoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// Coordinates scaled by `r`, an interior point for r < 1.
    pub fn dilate(&self, r: f64) -> Vec<C64> {
        self.coords.iter().map(|c| c * r).collect()
    }

    /// Rotation by a unimodular scalar: every coordinate times e^{i t}.
    pub fn rotate_scalar(&self, t: f64) -> SpherePoint {
        let u = C64::from_polar(1.0, t);
        SpherePoint {
            coords: self.coords.iter().map(|c| c * u).collect(),
        }
    }
}

/// Hermitian inner product sum u_i * conj(v_i).
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// Nonisotropic quasimetric |1 - <u, v>|. Satisfies the quasi-triangle
/// inequality with constant 2 (it is the square of a metric).
pub fn niso_distance(u: &SpherePoint, v: &SpherePoint) -> f64 {
    (C64::new(1.0, 0.0) - inner(u.coords(), v.coords())).norm()
}

/// Closed nonisotropic ball Q = { z : d(z, center) <= radius }.
#[derive(Debug, Clone)]
pub struct NisoBall {
    pub center: SpherePoint,
    pub radius: f64,
}

impl NisoBall {
    pub fn new(center: SpherePoint, radius: f64) -> CoreResult<Self> {
        if !(radius > 0.0 && radius <= 2.0) {
            return Err(CoreError::RadiusOutOfRange { radius });
        }
        Ok(NisoBall { center, radius })
    }

    pub fn contains(&self, z: &SpherePoint) -> bool {
        niso_distance(z, &self.center) <= self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }
}

/// Uniform point on the sphere: 2n standard normals, normalized.
pub fn sample_sphere(n: usize, sampler: &mut Sampler) -> SpherePoint {
    loop {
        let coords: Vec<C64> = (0..n.max(1))
            .map(|_| C64::new(sampler.normal(), sampler.normal()))
            .collect();
        if let Ok(p) = SpherePoint::new(coords) {
            return p;
        }
    }
}

/// Uniform interior point of the unit ball of C^n scaled to |z| <= max_norm.
pub fn sample_interior(n: usize, max_norm: f64, sampler: &mut Sampler) -> Vec<C64> {
    let dir = sample_sphere(n, sampler);
    let r = max_norm * sampler.uniform().powf(1.0 / (2.0 * n as f64));
    dir.dilate(r)
}

/// Outcome of rejection sampling inside a ball.
#[derive(Debug, Clone)]
pub struct BallSample {
    pub points: Vec<SpherePoint>,
    /// Accepted fraction of all sphere draws made.
    pub acceptance_rate: f64,
}

/// Uniform sample of `count` points of `ball` by rejection from the sphere.
///
/// Errors once the running acceptance rate drops below `floor` with enough
/// draws to trust it; the error directs callers to [`sample_cap`], which
/// costs O(1) per point at any radius.
pub fn sample_ball(
    ball: &NisoBall,
    count: usize,
    sampler: &mut Sampler,
    floor: f64,
) -> CoreResult<BallSample> {
    let mut points = Vec::with_capacity(count);
    let mut draws = 0u64;
    while points.len() < count {
        let p = sample_sphere(ball.dim(), sampler);
        draws += 1;
        if ball.contains(&p) {
            points.push(p);
        }
        let enough_evidence = draws >= 10_000 && draws >= 10 * count as u64;
        if enough_evidence && (points.len() as f64 / draws as f64) < floor {
            return Err(CoreError::LowAcceptance {
                rate: points.len() as f64 / draws as f64,
                floor,
            });
        }
    }
    Ok(BallSample {
        points,
        acceptance_rate: count as f64 / draws as f64,
    })
}

/// Uniform sample of a ball through the slice parametrization; exact at any
/// radius, with per-point cost bounded independently of the radius.
pub fn sample_cap(ball: &NisoBall, count: usize, sampler: &mut Sampler) -> CoreResult<Vec<SpherePoint>> {
    sample_shell(&ball.center, 0.0, ball.radius, count, sampler)
}

/// Uniform sample of the annulus { lo < d(z, center) <= hi }.
pub fn sample_shell(
    center: &SpherePoint,
    lo: f64,
    hi: f64,
    count: usize,
    sampler: &mut Sampler,
) -> CoreResult<Vec<SpherePoint>> {
    if !(hi > lo && lo >= 0.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("shell radii lo={lo}, hi={hi}"),
        });
    }
    if hi > 2.0 {
        return Err(CoreError::AnnulusOutOfRange { outer: hi });
    }
    let n = center.dim();
    let frame = orthonormal_frame(center);
    let mut out = Vec::with_capacity(count);
    let budget = 10_000u64 + 2_000 * count as u64;
    let mut attempts = 0u64;
    while out.len() < count {
        if attempts > budget {
            return Err(CoreError::NoConvergence {
                what: "shell rejection step",
            });
        }
        attempts += 1;
        if n == 1 {
            // Arc |theta| in [2 asin(lo/2), 2 asin(hi/2)], uniform in theta.
            let t_lo = 2.0 * (lo / 2.0).asin();
            let t_hi = 2.0 * (hi / 2.0).asin();
            let t = sampler.uniform_in(t_lo, t_hi);
            let sign = if sampler.uniform() < 0.5 { -1.0 } else { 1.0 };
            out.push(apply_frame(&frame, &[C64::from_polar(1.0, sign * t)]));
            continue;
        }
        // First coordinate lambda = 1 - s e^{i psi} carries the weighted
        // density s^{n-1} (2 cos psi - s)^{n-2}; propose s with density
        // proportional to s^{n-1} and accept with the bounded remainder.
        let u = sampler.uniform();
        let s = (lo.powi(n as i32) + u * (hi.powi(n as i32) - lo.powi(n as i32))).powf(1.0 / n as f64);
        let psi = sampler.uniform_in(-core::f64::consts::FRAC_PI_2, core::f64::consts::FRAC_PI_2);
        let head = 2.0 * psi.cos() - s;
        if head <= 0.0 {
            continue;
        }
        if n > 2 && sampler.uniform() >= (head / 2.0).powi(n as i32 - 2) {
            continue;
        }
        let lambda = C64::new(1.0, 0.0) - C64::from_polar(s, psi);
        let rho = (s * head).max(0.0).sqrt();
        let fiber = sample_sphere(n - 1, sampler);
        let mut w = Vec::with_capacity(n);
        w.push(lambda);
        for c in fiber.coords() {
            w.push(c * rho);
        }
        out.push(apply_frame(&frame, &w));
    }
    Ok(out)
}

/// Monte-Carlo estimate of the normalized surface measure of a ball.
#[derive(Debug, Clone, Copy)]
pub struct MeasureEstimate {
    pub measure: f64,
    pub standard_error: f64,
    pub hits: u64,
    pub count: u64,
}

/// sigma(ball) from `count` uniform sphere draws, with binomial standard error.
pub fn ball_measure(ball: &NisoBall, count: usize, sampler: &mut Sampler) -> CoreResult<MeasureEstimate> {
    if count < 1_000 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("ball_measure needs >= 1000 samples, got {count}"),
        });
    }
    let mut hits = 0u64;
    for _ in 0..count {
        if ball.contains(&sample_sphere(ball.dim(), sampler)) {
            hits += 1;
        }
    }
    let p = hits as f64 / count as f64;
    Ok(MeasureEstimate {
        measure: p,
        standard_error: (p * (1.0 - p) / count as f64).sqrt(),
        hits,
        count: count as u64,
    })
}

/// Normalized measure of a nonisotropic cap by deterministic quadrature on
/// the slice parametrization lambda = 1 - s e^{i psi}; the s integral is
/// done in closed form, the psi integral by Gauss-Legendre. Serves as an
/// exact reference for the Monte-Carlo estimates.
pub fn cap_measure_exact(n: usize, t: f64) -> CoreResult<f64> {
    if !(t > 0.0 && t <= 2.0) {
        return Err(CoreError::RadiusOutOfRange { radius: t });
    }
    if n == 1 {
        return Ok(2.0 * (t / 2.0).asin() / core::f64::consts::PI);
    }
    // integral over 0 <= s <= up of s^(n-1) (a - s)^(n-2) ds, expanded
    // binomially; up <= a <= 2.
    let inner = |a: f64, up: f64| -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0f64;
        for k in 0..=(n - 2) {
            let term = binom * a.powi((n - 2 - k) as i32) * up.powi((n + k) as i32)
                / (n + k) as f64;
            acc += if k % 2 == 0 { term } else { -term };
            binom *= (n - 2 - k) as f64 / (k + 1) as f64;
        }
        acc
    };
    let half_pi = core::f64::consts::FRAC_PI_2;
    let psi_t = (t / 2.0).min(1.0).acos();
    let mut num = 0.0;
    if psi_t > 0.0 {
        let (xs, ws) = crate::quad::gauss_legendre(64, 0.0, psi_t)?;
        for (&x, &w) in xs.iter().zip(&ws) {
            num += w * inner(2.0 * x.cos(), t);
        }
    }
    if psi_t < half_pi {
        let (xs, ws) = crate::quad::gauss_legendre(64, psi_t, half_pi)?;
        for (&x, &w) in xs.iter().zip(&ws) {
            let a = 2.0 * x.cos();
            num += w * inner(a, a);
        }
    }
    let (xs, ws) = crate::quad::gauss_legendre(64, 0.0, half_pi)?;
    let mut den = 0.0;
    for (&x, &w) in xs.iter().zip(&ws) {
        let a = 2.0 * x.cos();
        den += w * inner(a, a);
    }
    Ok(num / den)
}

/// Orthonormal columns u_1 = center, u_2, ..., u_n: a unitary sending the
/// base point to `center`. Uniform samples around the base point pushed
/// through this frame stay uniform because the surface measure and the
/// quasimetric are unitarily invariant.
pub fn orthonormal_frame(center: &SpherePoint) -> Vec<Vec<C64>> {
    let n = center.dim();
    let mut frame: Vec<Vec<C64>> = Vec::with_capacity(n);
    frame.push(center.coords().to_vec());
    if n == 1 {
        return frame;
    }
    // Drop the standard basis vector most parallel to the center, then
    // Gram-Schmidt the rest; the pivot choice keeps the frame well
    // conditioned and deterministic.
    let skip = (0..n)
        .max_by(|&a, &b| center.coords()[a].norm().total_cmp(&center.coords()[b].norm()))
        .unwrap_or(0);
    for j in (0..n).filter(|&j| j != skip) {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[j] = C64::new(1.0, 0.0);
        for u in &frame {
            let proj = inner(&v, u);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        frame.push(v);
    }
    frame
}

/// Applies the frame as a unitary: w maps to sum_k w_k u_k.
pub fn apply_frame(frame: &[Vec<C64>], w: &[C64]) -> SpherePoint {
    let n = frame[0].len();
    let mut coords = vec![C64::new(0.0, 0.0); n];
    for (wk, u) in w.iter().zip(frame) {
        for (c, ui) in coords.iter_mut().zip(u) {
            *c += wk * ui;
        }
    }
    // Renormalize to guard against rounding drift in the frame product.
    SpherePoint::new(coords).expect("frame output cannot vanish")
}
