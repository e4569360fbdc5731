use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::BiPoly;
use crate::normalform::normal_form_threshold;
use crate::numerics::C2Partials;

/// Bisection stops once `hi - lo ≤ 2⁻⁴⁰·hi`.
pub const RADIUS_REL_TOL: f64 = 9.094947017729282e-13;
pub const MAX_BISECTION_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedRadius {
    pub r: f64,
    pub threshold: f64,
    /// Coefficient bound on `‖F‖_{C²}` over the closed disk of radius `r`.
    pub c2_at_r: f64,
    pub bisection_steps: usize,
    pub certified: bool,
}

/// Largest `r ∈ (0, R]` (up to bisection resolution) with
/// `‖F‖_{C²(B_r)} ≤ (2γ-1)³/(2¹⁴γ³)`, using the certified coefficient bound.
pub fn certify_radius(gamma: f64, perturbation: &BiPoly, r_max: f64) -> Result<CertifiedRadius> {
    let threshold = normal_form_threshold(gamma)?;
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!("R must be positive, got {r_max}")));
    }
    if let Some((e, _)) = perturbation.terms().find(|(e, _)| e.w_degree() < 3) {
        return Err(Error::InvalidArgument(format!(
            "F must vanish to order three, found {e}"
        )));
    }
    let partials = C2Partials::new(perturbation)?;
    let full = partials.upper(r_max);
    if full <= threshold {
        return Ok(CertifiedRadius {
            r: r_max,
            threshold,
            c2_at_r: full,
            bisection_steps: 0,
            certified: true,
        });
    }
    let (mut lo, mut hi) = (0.0f64, r_max);
    let mut steps = 0;
    while steps < MAX_BISECTION_STEPS && hi - lo > RADIUS_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if partials.upper(mid) <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(CertifiedRadius {
        r: lo,
        threshold,
        c2_at_r: partials.upper(lo),
        bisection_steps: steps,
        certified: lo > 0.0,
    })
}
