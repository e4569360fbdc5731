//! Complex-analytic kernels shared by the certification engines.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::BiPoly;
use crate::normalform::TaylorJet;

/// `q = 1 - √(1+z)` on the principal branch, for `|z| < 1/4`.
///
/// On that disk `|q| ≤ (10/11)|z|` and `|q| < 9/10`.
pub fn sqrt1p_deviation(z: Complex64) -> Result<Complex64> {
    let abs = z.norm();
    if !(abs < 0.25) {
        return Err(Error::SqrtDomain { abs });
    }
    let q = Complex64::new(1.0, 0.0) - (Complex64::new(1.0, 0.0) + z).sqrt();
    debug_assert!(q.norm() <= 10.0 / 11.0 * abs * (1.0 + 1e-12) + 1e-300);
    Ok(q)
}

/// Polar sampling grid of the closed disk `|p| ≤ radius`: the center plus
/// `radial_count` equally spaced rings of `angular_count` points each. The
/// outermost ring lies on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGrid {
    pub radius: f64,
    pub radial_count: usize,
    pub angular_count: usize,
    #[serde(skip)]
    pub points: Vec<Complex64>,
}

impl DiskGrid {
    pub fn new(radius: f64, radial_count: usize, angular_count: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("disk radius {radius} must be positive")));
        }
        if radial_count < 2 || angular_count < 4 {
            return Err(Error::InvalidArgument(format!(
                "disk grid needs radial_count >= 2 and angular_count >= 4, got {radial_count}x{angular_count}"
            )));
        }
        let mut points = Vec::with_capacity(1 + radial_count * angular_count);
        points.push(Complex64::new(0.0, 0.0));
        for i in 1..=radial_count {
            let rho = radius * i as f64 / radial_count as f64;
            for j in 0..angular_count {
                let angle = 2.0 * PI * j as f64 / angular_count as f64;
                points.push(Complex64::from_polar(rho, angle));
            }
        }
        Ok(Self {
            radius,
            radial_count,
            angular_count,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid points other than the center.
    pub fn nonzero_points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.points.iter().copied().skip(1)
    }
}

/// Certified and sampled `C^2` sizes of a polynomial on a closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C2NormBound {
    /// `max` over the six real partials of `Σ |c| r^deg`; a true upper bound.
    pub upper: f64,
    /// Largest sampled modulus of the same partials; a lower estimate.
    pub grid_max: f64,
    pub radius: f64,
}

/// The six real partials `F, F_x, F_y, F_xx, F_xy, F_yy` of a polynomial in
/// `(w, w̄)`, written back in `(w, w̄)` through
/// `∂_x = ∂_w + ∂_w̄` and `∂_y = i(∂_w - ∂_w̄)`.
#[derive(Debug, Clone)]
pub struct C2Partials {
    partials: [BiPoly; 6],
}

impl C2Partials {
    pub fn new(f: &BiPoly) -> Result<Self> {
        if f.t_arity() != 0 {
            return Err(Error::ArityMismatch {
                expected: 0,
                got: f.t_arity(),
            });
        }
        let i = Complex64::i();
        let dx = |p: &BiPoly| &p.d_w() + &p.d_wbar();
        let dy = |p: &BiPoly| (&p.d_w() - &p.d_wbar()).scale(i);
        let fx = dx(f);
        let fy = dy(f);
        let fxx = dx(&fx);
        let fxy = dy(&fx);
        let fyy = dy(&fy);
        Ok(Self {
            partials: [f.clone(), fx, fy, fxx, fxy, fyy],
        })
    }

    pub fn partials(&self) -> &[BiPoly; 6] {
        &self.partials
    }

    /// Certified bound on the closed disk of radius `r`; nondecreasing in `r`.
    pub fn upper(&self, r: f64) -> f64 {
        self.partials
            .iter()
            .map(|p| p.coefficient_bound(r))
            .fold(0.0, f64::max)
    }

    pub fn grid_max(&self, points: &[Complex64]) -> f64 {
        let mut best = 0.0f64;
        for p in &self.partials {
            for &w in points {
                best = best.max(p.eval_unchecked(&[], w).norm());
            }
        }
        best
    }
}

/// Default sampling density used by [`c2_norm_upper`].
pub const DEFAULT_C2_GRID: (usize, usize) = (16, 32);

/// `C^2` size of `F` on `|w| ≤ r`, using the default sampling grid.
pub fn c2_norm_upper(f: &BiPoly, r: f64) -> Result<C2NormBound> {
    let grid = DiskGrid::new(r, DEFAULT_C2_GRID.0, DEFAULT_C2_GRID.1)?;
    c2_norm_upper_on(f, &grid)
}

pub fn c2_norm_upper_on(f: &BiPoly, grid: &DiskGrid) -> Result<C2NormBound> {
    let partials = C2Partials::new(f)?;
    Ok(C2NormBound {
        upper: partials.upper(grid.radius),
        grid_max: partials.grid_max(&grid.points),
        radius: grid.radius,
    })
}

/// Finite-difference settings for [`wirtinger_jet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetOptions {
    pub step: f64,
    /// Combine steps `h` and `h/2` to cancel the `O(h²)` error term.
    pub richardson: bool,
}

impl Default for JetOptions {
    fn default() -> Self {
        Self {
            step: 1e-4,
            richardson: false,
        }
    }
}

/// Second-order Taylor jet of `f(w, w̄)` at `p` from central differences.
///
/// Coefficients follow `f ≈ Σ β_{i,j} ζ^i ζ̄^j`, i.e. raw Wirtinger partials
/// divided by `i! j!`. No remainder is attached.
pub fn wirtinger_jet<F>(f: F, p: Complex64, options: JetOptions) -> TaylorJet
where
    F: Fn(Complex64) -> Complex64,
{
    let h = options.step;
    let raw = real_partials(&f, p, h);
    let partials = if options.richardson {
        let fine = real_partials(&f, p, h / 2.0);
        let mut out = [Complex64::new(0.0, 0.0); 6];
        for k in 0..6 {
            out[k] = (4.0 * fine[k] - raw[k]) / 3.0;
        }
        out
    } else {
        raw
    };
    let [f0, fx, fy, fxx, fxy, fyy] = partials;
    let i = Complex64::i();
    let half = 0.5;
    let fw = (fx - i * fy) * half;
    let fwb = (fx + i * fy) * half;
    let fww = (fxx - fyy - 2.0 * i * fxy) * 0.25;
    let fwbwb = (fxx - fyy + 2.0 * i * fxy) * 0.25;
    let fwwb = (fxx + fyy) * 0.25;
    TaylorJet::from_raw_partials(p, f0, fw, fwb, fww, fwwb, fwbwb)
}

fn real_partials<F>(f: &F, p: Complex64, h: f64) -> [Complex64; 6]
where
    F: Fn(Complex64) -> Complex64,
{
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    let f0 = f(p);
    let fpx = f(p + dx);
    let fmx = f(p - dx);
    let fpy = f(p + dy);
    let fmy = f(p - dy);
    let fx = (fpx - fmx) / (2.0 * h);
    let fy = (fpy - fmy) / (2.0 * h);
    let fxx = (fpx - 2.0 * f0 + fmx) / (h * h);
    let fyy = (fpy - 2.0 * f0 + fmy) / (h * h);
    let fxy = (f(p + dx + dy) - f(p + dx - dy) - f(p - dx + dy) + f(p - dx - dy)) / (4.0 * h * h);
    [f0, fx, fy, fxx, fxy, fyy]
}
