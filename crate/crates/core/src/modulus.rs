//! Boundary modulus data: the nonnegative functions on the circle or
//! sphere whose outer functions the experiments evaluate.
//!
//! All profiles are clamped below at a configurable floor so logarithms
//! stay finite; clamp events are counted, since a run that leans on the
//! floor is measuring the floor and not the modulus.

use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};
#[allow(unused_imports)] // method source under no_std
use num_traits::Float;

use crate::error::{CoreError, CoreResult};
use crate::function::BoundaryFunction;
use crate::outer::{log_gap, DiscOuterEvaluator};
use crate::sampler::Sampler;
use crate::sphere::{niso_distance, sample_shell, sample_sphere, SpherePoint};
use crate::C64;

/// Default lower clamp for modulus values.
pub const MODULUS_FLOOR: f64 = 1e-12;

/// Nonnegative profile on the unit circle, the 1-D boundary data.
#[derive(Debug, Clone)]
pub enum CircleModulus {
    /// psi = c.
    Constant { value: f64 },
    /// psi(t) = |1 - e^{it}|^beta: a power cusp vanishing at t = 0.
    PowerCusp { beta: f64 },
    /// psi(t) = exp(-chi(t) min(|t|^-gamma, cap)): an essential spike at
    /// t = 0, tapered back to 1 for |t| >= 1. log psi is in L^p of the
    /// circle exactly when gamma p < 1.
    LogSpike { gamma: f64, cap: f64 },
    /// log psi supplied directly; test and composition hook.
    Custom { log_psi: fn(f64) -> f64 },
}

impl CircleModulus {
    pub fn constant(value: f64) -> CoreResult<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("constant modulus {value} must be positive"),
            });
        }
        Ok(CircleModulus::Constant { value })
    }

    pub fn power_cusp(beta: f64) -> CoreResult<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("cusp exponent {beta} must be positive"),
            });
        }
        Ok(CircleModulus::PowerCusp { beta })
    }

    /// gamma in (0, 1) keeps |log psi| integrable; `floor` fixes the spike
    /// depth at log(1/floor).
    pub fn log_spike(gamma: f64, floor: f64) -> CoreResult<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("spike exponent {gamma} outside (0, 1)"),
            });
        }
        if !(floor > 0.0 && floor < 1.0) {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("spike floor {floor} outside (0, 1)"),
            });
        }
        Ok(CircleModulus::LogSpike {
            gamma,
            cap: (1.0 / floor).ln(),
        })
    }

    pub fn custom(log_psi: fn(f64) -> f64) -> Self {
        CircleModulus::Custom { log_psi }
    }

    /// log psi(t), before any floor clamp.
    pub fn log_value(&self, t: f64) -> f64 {
        match self {
            CircleModulus::Constant { value } => value.ln(),
            CircleModulus::PowerCusp { beta } => beta * log_gap(t),
            CircleModulus::LogSpike { gamma, cap } => {
                let a = wrap_angle(t).abs();
                let chi = taper(a);
                if chi == 0.0 {
                    0.0
                } else {
                    -chi * a.powf(-gamma).min(*cap)
                }
            }
            CircleModulus::Custom { log_psi } => log_psi(t),
        }
    }

    /// Power cusps carried in closed form by the evaluators: (angle, exponent).
    pub fn cusps(&self) -> Vec<(f64, f64)> {
        match self {
            CircleModulus::PowerCusp { beta } => vec![(0.0, *beta)],
            _ => Vec::new(),
        }
    }

    /// True when |outer function| has a closed form on the whole closed disc.
    pub fn closed_form(&self) -> bool {
        matches!(
            self,
            CircleModulus::Constant { .. } | CircleModulus::PowerCusp { .. }
        )
    }
}

fn wrap_angle(t: f64) -> f64 {
    let mut a = t % core::f64::consts::TAU;
    if a > core::f64::consts::PI {
        a -= core::f64::consts::TAU;
    } else if a < -core::f64::consts::PI {
        a += core::f64::consts::TAU;
    }
    a
}

/// 1 on [0, 1/2], cos^2(pi (a - 1/2)) on (1/2, 1), 0 beyond: joins the
/// spike smoothly to the constant 1.
fn taper(a: f64) -> f64 {
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let c = (core::f64::consts::PI * (a - 0.5)).cos();
        c * c
    }
}

/// Boundary modulus on the sphere of C^n.
pub struct ModulusProfile {
    family: Family,
    dim: usize,
    floor: f64,
    clamps: AtomicU64,
}

enum Family {
    Constant(f64),
    /// min(1, d(zeta, base)^alpha): Holder cusp in the nonisotropic metric.
    NisoCusp { alpha: f64 },
    /// |O_psi(zeta_1)|: the boundary modulus of a lifted disc outer function.
    Lifted {
        psi: CircleModulus,
        disc: DiscOuterEvaluator,
        safe_radius: f64,
    },
    Custom { log_phi: fn(&SpherePoint) -> f64 },
}

impl ModulusProfile {
    pub fn constant(value: f64, n: usize, floor: f64) -> CoreResult<Self> {
        CircleModulus::constant(value)?; // shared validation
        Self::build(Family::Constant(value), n, floor)
    }

    /// The n-dimensional Holder cusp min(1, d(zeta, base)^alpha).
    pub fn holder_cusp(alpha: f64, n: usize, floor: f64) -> CoreResult<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("holder exponent {alpha} outside (0, 1]"),
            });
        }
        Self::build(Family::NisoCusp { alpha }, n, floor)
    }

    /// Boundary modulus |O_psi(zeta_1)| of the lift of psi's outer function.
    /// `quad_nodes` sizes the disc quadrature used when psi has no closed
    /// form.
    pub fn lifted(psi: CircleModulus, n: usize, quad_nodes: usize, floor: f64) -> CoreResult<Self> {
        let disc = DiscOuterEvaluator::new(&psi, quad_nodes, floor)?;
        let safe_radius = 1.0 - 32.0 / quad_nodes as f64;
        Self::build(
            Family::Lifted {
                psi,
                disc,
                safe_radius,
            },
            n,
            floor,
        )
    }

    pub fn custom(log_phi: fn(&SpherePoint) -> f64, n: usize, floor: f64) -> CoreResult<Self> {
        Self::build(Family::Custom { log_phi }, n, floor)
    }

    fn build(family: Family, dim: usize, floor: f64) -> CoreResult<Self> {
        if dim == 0 {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("modulus needs dimension >= 1"),
            });
        }
        if !(floor > 0.0 && floor < 1.0) {
            return Err(CoreError::InvalidParameter {
                what: alloc::format!("modulus floor {floor} outside (0, 1)"),
            });
        }
        Ok(ModulusProfile {
            family,
            dim,
            floor,
            clamps: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Clamp events since construction.
    pub fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    /// log phi(p), clamped below at log(floor).
    pub fn log_value(&self, p: &SpherePoint) -> f64 {
        let raw = match &self.family {
            Family::Constant(c) => c.ln(),
            Family::NisoCusp { alpha } => {
                let d = niso_distance(p, &SpherePoint::base(self.dim));
                alpha * d.ln().min(0.0)
            }
            Family::Lifted {
                psi,
                disc,
                safe_radius,
            } => {
                let lambda = p.coords()[0];
                match psi {
                    CircleModulus::Constant { value } => value.ln(),
                    CircleModulus::PowerCusp { beta } => {
                        beta * (C64::new(1.0, 0.0) - lambda).norm().ln()
                    }
                    _ => {
                        if lambda.norm() <= *safe_radius {
                            disc.log_modulus(lambda).unwrap_or(self.floor.ln())
                        } else {
                            // On the rim of the slice disc the lift's
                            // boundary value is psi itself.
                            psi.log_value(lambda.arg())
                        }
                    }
                }
            }
            Family::Custom { log_phi } => log_phi(p),
        };
        let log_floor = self.floor.ln();
        if raw < log_floor {
            self.clamps.fetch_add(1, Ordering::Relaxed);
            log_floor
        } else {
            raw
        }
    }

    pub fn value(&self, p: &SpherePoint) -> f64 {
        self.log_value(p).exp()
    }
}

/// Empirical Holder constant of a profile at a point.
#[derive(Debug, Clone, Copy)]
pub struct HolderCertificate {
    /// max over samples of |phi(t) - phi(point)| / d(t, point)^alpha.
    pub constant: f64,
    /// Distance at which the max was attained.
    pub worst_distance: f64,
    pub samples: usize,
}

/// Estimates sup |phi(t) - phi(point)| / d^alpha by sampling dyadic
/// distance shells around `point`, so short distances are not starved.
pub fn holder_constant_at(
    phi: &ModulusProfile,
    point: &SpherePoint,
    alpha: f64,
    count: usize,
    sampler: &mut Sampler,
) -> CoreResult<HolderCertificate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("holder exponent {alpha} outside (0, 1]"),
        });
    }
    if count < 64 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("holder certificate needs >= 64 samples"),
        });
    }
    let shells: u32 = 30;
    let per_shell = (count / shells as usize).max(8);
    let at_point = phi.value(point);
    let mut best = (0.0f64, 0.0f64);
    let mut used = 0usize;
    for k in 0..shells {
        let hi = 2.0 * (0.5f64).powi(k as i32);
        let lo = hi / 2.0;
        let pts = sample_shell(point, lo, hi, per_shell, sampler)?;
        for t in pts {
            let d = niso_distance(&t, point);
            if d <= 0.0 {
                continue;
            }
            let ratio = (phi.value(&t) - at_point).abs() / d.powf(alpha);
            used += 1;
            if ratio > best.0 {
                best = (ratio, d);
            }
        }
    }
    Ok(HolderCertificate {
        constant: best.0,
        worst_distance: best.1,
        samples: used,
    })
}

/// Monte-Carlo estimate of the integral of |log phi|^p over the sphere.
#[derive(Debug, Clone, Copy)]
pub struct LogMassEstimate {
    /// Estimated integral of |log phi|^p (the p-th power mass, not its root).
    pub mass: f64,
    pub standard_error: f64,
    /// Fraction of draws whose modulus value sat on the floor; estimates
    /// above a percent are measuring the clamp, not the data.
    pub clamp_fraction: f64,
}

pub fn log_lp_norm(
    phi: &ModulusProfile,
    p: f64,
    count: usize,
    sampler: &mut Sampler,
) -> CoreResult<LogMassEstimate> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("log mass exponent p = {p} below 1"),
        });
    }
    if count < 100 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("log mass needs >= 100 samples"),
        });
    }
    let clamps_before = phi.clamp_count();
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for _ in 0..count {
        let xi = sample_sphere(phi.dim(), sampler);
        let v = phi.log_value(&xi).abs().powf(p);
        acc += v;
        acc2 += v * v;
    }
    let mean = acc / count as f64;
    let var = (acc2 / count as f64 - mean * mean).max(0.0);
    Ok(LogMassEstimate {
        mass: mean,
        standard_error: (var / count as f64).sqrt(),
        clamp_fraction: (phi.clamp_count() - clamps_before) as f64 / count as f64,
    })
}

/// Slice-condition data: integrals of |log |f|| over scalar-rotation orbits.
#[derive(Debug, Clone)]
pub struct SliceConstant {
    /// sup over the supplied directions.
    pub max: f64,
    /// Integral for each direction, in input order.
    pub per_direction: Vec<f64>,
    /// Quadrature nodes whose value hit the floor (then locally refined).
    pub clamped_nodes: usize,
}

/// Integral over [0, 2 pi) of |log |f(xi e^{i theta})|| d theta for each
/// direction xi, with one level of midpoint refinement on panels whose node
/// landed on the floor clamp.
pub fn slice_constant(
    f: &dyn BoundaryFunction,
    directions: &[SpherePoint],
    angular_nodes: usize,
    floor: f64,
) -> CoreResult<SliceConstant> {
    if directions.is_empty() {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("slice constant needs at least one direction"),
        });
    }
    if angular_nodes < 64 {
        return Err(CoreError::InvalidParameter {
            what: alloc::format!("slice constant needs >= 64 angular nodes"),
        });
    }
    let log_floor = floor.ln();
    let step = core::f64::consts::TAU / angular_nodes as f64;
    let mut per_direction = Vec::with_capacity(directions.len());
    let mut clamped_total = 0usize;
    for xi in directions {
        let eval = |t: f64, clamped: &mut bool| -> CoreResult<f64> {
            let v = f.boundary_value(&xi.rotate_scalar(t))?.norm();
            let lv = v.ln();
            if !(lv > log_floor) {
                *clamped = true;
                return Ok(-log_floor); // |log floor|
            }
            Ok(lv.abs())
        };
        let mut total = 0.0;
        for k in 0..angular_nodes {
            let t = (k as f64 + 0.5) * step;
            let mut clamped = false;
            let v = eval(t, &mut clamped)?;
            if !clamped {
                total += step * v;
                continue;
            }
            clamped_total += 1;
            // One refinement level: split the panel at its midpoints.
            let mut sub = 0.0;
            for &tt in &[t - 0.25 * step, t + 0.25 * step] {
                let mut c2 = false;
                sub += eval(tt, &mut c2)?;
            }
            total += 0.5 * step * sub;
        }
        per_direction.push(total);
    }
    let max = per_direction.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SliceConstant {
        max,
        per_direction,
        clamped_nodes: clamped_total,
    })
}

/// The base point, the coordinate axes, and `extra` random directions:
/// a default direction set for slice scans.
pub fn default_directions(n: usize, extra: usize, sampler: &mut Sampler) -> Vec<SpherePoint> {
    let mut dirs = Vec::with_capacity(n + extra);
    for j in 0..n {
        let mut coords = vec![C64::new(0.0, 0.0); n];
        coords[j] = C64::new(1.0, 0.0);
        dirs.push(SpherePoint::new(coords).expect("axis"));
    }
    for _ in 0..extra {
        dirs.push(sample_sphere(n, sampler));
    }
    dirs
}
