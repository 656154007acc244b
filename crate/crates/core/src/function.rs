//! Function traits connecting evaluators to measurements.
//!
//! Interior evaluators know values at |z| < 1 only; boundary measurements
//! reach the sphere through radial dilates r z with r -> 1.

use core::sync::atomic::{AtomicU64, Ordering};

#[allow(unused_imports)] // method source under no_std
use num_traits::Float;

use crate::error::CoreResult;
use crate::sphere::SpherePoint;
use crate::C64;

/// Holomorphic (or at least continuous) function on the open unit ball.
pub trait InteriorFunction {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[C64]) -> CoreResult<C64>;

    /// Boundary value at `p` through the dilate schedule r_k = 1 - 2^-k,
    /// stopping once two successive dilates agree within `tol`. Evaluators
    /// with a cheaper direct route override this.
    fn boundary_value(&self, p: &SpherePoint, tol: f64) -> CoreResult<C64> {
        let mut prev: Option<C64> = None;
        let mut last = C64::new(0.0, 0.0);
        for k in 2..=MAX_DILATE_LEVEL {
            let r = 1.0 - (0.5f64).powi(k);
            last = self.eval(&p.dilate(r))?;
            if let Some(q) = prev {
                if (last - q).norm() < tol {
                    return Ok(last);
                }
            }
            prev = Some(last);
        }
        note_stalled_dilate();
        Ok(last)
    }
}

/// Records a boundary evaluation that ran out of dilate levels; overriding
/// evaluators call this so the diagnostic stays complete.
pub(crate) fn note_stalled_dilate() {
    STALLED_DILATES.fetch_add(1, Ordering::Relaxed);
}

/// Deepest dilate level: 1 - 2^-48 is the closest approach to the sphere
/// before 1 - r falls below f64 granularity near 1.
pub const MAX_DILATE_LEVEL: i32 = 48;

static STALLED_DILATES: AtomicU64 = AtomicU64::new(0);

/// Number of boundary evaluations that ran out of dilate levels without
/// meeting their tolerance since process start. Diagnostic only.
pub fn stalled_dilate_count() -> u64 {
    STALLED_DILATES.load(Ordering::Relaxed)
}

/// Function defined directly on the sphere.
pub trait BoundaryFunction {
    fn dim(&self) -> usize;
    fn boundary_value(&self, p: &SpherePoint) -> CoreResult<C64>;
}

/// The dilate f_r(xi) = f(r xi) of an interior function, itself a function
/// on the sphere.
pub struct Dilated<'a, F: InteriorFunction + ?Sized> {
    f: &'a F,
    r: f64,
}

/// Restriction of an interior function to the sphere via radial limits.
pub struct RadialLimit<'a, F: InteriorFunction + ?Sized> {
    f: &'a F,
    tol: f64,
}

pub fn radial_dilate<F: InteriorFunction + ?Sized>(f: &F, r: f64) -> CoreResult<Dilated<'_, F>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(crate::CoreError::InvalidParameter {
            what: alloc::format!("dilation radius {r} outside (0, 1)"),
        });
    }
    Ok(Dilated { f, r })
}

impl<'a, F: InteriorFunction + ?Sized> RadialLimit<'a, F> {
    pub fn new(f: &'a F, tol: f64) -> Self {
        RadialLimit { f, tol }
    }
}

impl<F: InteriorFunction + ?Sized> BoundaryFunction for Dilated<'_, F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn boundary_value(&self, p: &SpherePoint) -> CoreResult<C64> {
        self.f.eval(&p.dilate(self.r))
    }
}

impl<F: InteriorFunction + ?Sized> BoundaryFunction for RadialLimit<'_, F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn boundary_value(&self, p: &SpherePoint) -> CoreResult<C64> {
        InteriorFunction::boundary_value(self.f, p, self.tol)
    }
}
