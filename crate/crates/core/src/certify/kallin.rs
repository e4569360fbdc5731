//! Half-plane separation margins for the preimage sheets.
//!
//! Surface case: `ψ(z₁, z₂) = ¼(z₁² - z₂²) + 2α z₁z₂` must send `S₁` to the
//! right half-plane and `S₂` to the left, meeting only at the origin.
//!
//! Three-dimensional case: `Q(ζ₀, ζ₁, ζ₂) = ε(ζ₁² + ζ₂²) + iζ₁ζ₂` on the sheets
//! `V₁`, `V₂` of `P(ζ₀, ζ₁, ζ₂) = (ζ₀, ζ₁ + iζ₂, ζ₁² + ζ₂² + 2γ(ζ₁² - ζ₂²))`.

use num_complex::Complex64;
use serde::Serialize;

use super::branch::{lipschitz_alpha, require_hyperbolic, solve_branch_f, solve_branch_g};
use crate::error::{Error, Result};
use crate::manifold::{order_two_in_w, validate_spec, BiPoly, ManifoldSpec};
use crate::numerics::{sqrt1p_deviation, DiskGrid};

/// `|ψ| ≤ ZERO_FIBER_TOL_M2·|ζ|²` at a nonzero grid point counts as a zero-fiber hit.
pub const ZERO_FIBER_TOL_M2: f64 = 1e-14;
/// Same for `|Re Q| / |w|²` on the three-dimensional sheets.
pub const ZERO_FIBER_TOL_M3: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridMeta {
    Disk {
        radius: f64,
        radial_count: usize,
        angular_count: usize,
    },
    Box {
        t_min: f64,
        t_max: f64,
        t_count: usize,
        half_width: f64,
        uv_count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KallinReport {
    /// Surface case: `min Re ψ(S₁)/|ζ|² - (3/8)α`. Three-dimensional case:
    /// `min Re Q(V₁)/|w|²`.
    pub side1_min_margin: f64,
    /// Surface case: `min -Re ψ(S₂)/|ζ|² - 3α`. Three-dimensional case:
    /// `min -Re Q(V₂)/|w|²`.
    pub side2_min_margin: f64,
    pub zero_fiber_ok: bool,
    /// Lipschitz constant used by `ψ` (surface case only).
    pub alpha: Option<f64>,
    /// `ε` used by `Q` (three-dimensional case only).
    pub epsilon: Option<f64>,
    /// Unnormalized `min Re` over the first sheet, including the origin.
    pub side1_min_raw: f64,
    /// Unnormalized `max Re` over the second sheet, including the origin.
    pub side2_max_raw: f64,
    /// Largest distance between `P(preimage)` and the manifold point.
    pub max_preimage_residual: f64,
    pub points: usize,
    pub grid: GridMeta,
}

impl KallinReport {
    pub fn holds(&self) -> bool {
        self.side1_min_margin > 0.0 && self.side2_min_margin > 0.0 && self.zero_fiber_ok
    }
}

pub fn psi(alpha: f64, z1: Complex64, z2: Complex64) -> Complex64 {
    0.25 * (z1 * z1 - z2 * z2) + 2.0 * alpha * z1 * z2
}

/// `ψ` on both sheets over one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiSample {
    pub zeta: Complex64,
    pub psi_s1: Complex64,
    pub psi_s2: Complex64,
    pub preimage_residual: f64,
}

fn surface_image(gamma: f64, z1: Complex64, z2: Complex64) -> Complex64 {
    z1 * z2 + gamma * (z1 * z1 + z2 * z2)
}

/// Evaluates `ψ` along `S₁` and `S₂` at every grid point, origin included.
pub fn psi_field(gamma: f64, perturbation: &BiPoly, grid: &DiskGrid) -> Result<Vec<PsiSample>> {
    require_hyperbolic(gamma)?;
    let alpha = lipschitz_alpha(gamma);
    grid.points
        .iter()
        .map(|&zeta| {
            let s1 = solve_branch_f(gamma, perturbation, &[], zeta)?;
            let s2 = solve_branch_g(gamma, perturbation, &[], zeta)?;
            let target = zeta * zeta.conj()
                + gamma * (zeta * zeta + zeta.conj() * zeta.conj())
                + perturbation.eval(&[], zeta)?;
            let preimage_residual = (surface_image(gamma, zeta, s1.linear_part) - target)
                .norm()
                .max((surface_image(gamma, zeta, s2.linear_part) - target).norm());
            Ok(PsiSample {
                zeta,
                psi_s1: psi(alpha, zeta, s1.linear_part),
                psi_s2: psi(alpha, zeta, s2.linear_part),
                preimage_residual,
            })
        })
        .collect()
}

pub fn kallin_check_m2(gamma: f64, perturbation: &BiPoly, grid: &DiskGrid) -> Result<KallinReport> {
    let alpha = lipschitz_alpha(gamma);
    let samples = psi_field(gamma, perturbation, grid)?;
    let mut side1 = f64::INFINITY;
    let mut side2 = f64::INFINITY;
    let mut raw1 = f64::INFINITY;
    let mut raw2 = f64::NEG_INFINITY;
    let mut residual = 0.0f64;
    let mut zero_fiber_ok = true;
    for s in &samples {
        raw1 = raw1.min(s.psi_s1.re);
        raw2 = raw2.max(s.psi_s2.re);
        residual = residual.max(s.preimage_residual);
        let n2 = s.zeta.norm_sqr();
        if n2 == 0.0 {
            continue;
        }
        side1 = side1.min(s.psi_s1.re / n2 - 0.375 * alpha);
        side2 = side2.min(-s.psi_s2.re / n2 - 3.0 * alpha);
        if s.psi_s1.norm() <= ZERO_FIBER_TOL_M2 * n2 || s.psi_s2.norm() <= ZERO_FIBER_TOL_M2 * n2 {
            zero_fiber_ok = false;
        }
    }
    Ok(KallinReport {
        side1_min_margin: side1,
        side2_min_margin: side2,
        zero_fiber_ok,
        alpha: Some(alpha),
        epsilon: None,
        side1_min_raw: raw1,
        side2_max_raw: raw2,
        max_preimage_residual: residual,
        points: samples.len(),
        grid: GridMeta::Disk {
            radius: grid.radius,
            radial_count: grid.radial_count,
            angular_count: grid.angular_count,
        },
    })
}

/// `ε = 1/4` for `γ ≥ 1`, otherwise half of `sup ε = (2γ-1)/(4γ(1-γ))`, so
/// that `ε(-1 + 1/γ) - 1/(2γ) + 1/(4γ²) < 0`.
pub fn choose_epsilon(gamma: f64) -> Result<f64> {
    require_hyperbolic(gamma)?;
    let eps = if gamma >= 1.0 {
        0.25
    } else {
        0.5 * (2.0 * gamma - 1.0) / (4.0 * gamma * (1.0 - gamma))
    };
    assert!(
        epsilon_expression(gamma, eps) < 0.0,
        "epsilon {eps} invalid for gamma {gamma}"
    );
    Ok(eps)
}

/// `ε(-1 + 1/γ) - 1/(2γ) + 1/(4γ²)`, the `v²` coefficient of `Re Q(V₂)` at `F = 0`.
pub fn epsilon_expression(gamma: f64, eps: f64) -> f64 {
    eps * (-1.0 + 1.0 / gamma) - 1.0 / (2.0 * gamma) + 1.0 / (4.0 * gamma * gamma)
}

/// Tensor grid over `(t, u, v)` for the three-dimensional check.
#[derive(Debug, Clone, PartialEq)]
pub struct M3Grid {
    pub t_values: Vec<f64>,
    pub uv_values: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

impl M3Grid {
    /// `t_count` values on `[-t_max, t_max]` and `uv_count` values on
    /// `[-half_width, half_width]` for each of `u`, `v`.
    pub fn uniform(t_max: f64, t_count: usize, half_width: f64, uv_count: usize) -> Result<Self> {
        if t_count == 0 || uv_count < 2 || !(half_width > 0.0) || !(t_max >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "m3 grid needs t_count ≥ 1, uv_count ≥ 2 and positive extents (got {t_count}, {uv_count}, {t_max}, {half_width})"
            )));
        }
        Ok(Self {
            t_values: linspace(-t_max, t_max, t_count),
            uv_values: linspace(-half_width, half_width, uv_count),
        })
    }

    fn meta(&self) -> GridMeta {
        let (t_min, t_max) = bounds(&self.t_values);
        let (_, half_width) = bounds(&self.uv_values);
        GridMeta::Box {
            t_min,
            t_max,
            t_count: self.t_values.len(),
            half_width,
            uv_count: self.uv_values.len(),
        }
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn q_form(eps: f64, z1: Complex64, z2: Complex64) -> Complex64 {
    eps * (z1 * z1 + z2 * z2) + Complex64::i() * z1 * z2
}

/// The two preimages `V₁`, `V₂` of the manifold point over `(t, w)`.
pub fn m3_sheets(spec: &ManifoldSpec, t: f64, w: Complex64) -> Result<[[Complex64; 3]; 2]> {
    let gamma = spec.gamma;
    let i = Complex64::i();
    let h = spec.graph[0].eval(&[t], w)?.re;
    let den = 2.0 * gamma * w.conj() + w;
    let f = if w == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        let z = 4.0 * gamma * spec.perturbation.eval(&[t], w)? / (den * den);
        -den * sqrt1p_deviation(z).map_err(|_| Error::BranchDomain { zeta: w, z })?
    };
    let (u, v) = (w.re, w.im);
    let z0 = Complex64::new(t, h);
    let k = f / (4.0 * gamma);
    let v1 = [z0, u + k, v + i * k];
    let v2 = [
        z0,
        (-u + (2.0 * gamma - 1.0) * i * v) / (2.0 * gamma) - k,
        (v - (2.0 * gamma + 1.0) * i * u) / (2.0 * gamma) - i * k,
    ];
    Ok([v1, v2])
}

fn m3_image(gamma: f64, z: &[Complex64; 3]) -> [Complex64; 3] {
    let (a, b) = (z[1] * z[1], z[2] * z[2]);
    [z[0], z[1] + Complex64::i() * z[2], a + b + 2.0 * gamma * (a - b)]
}

pub fn kallin_check_m3(spec: &ManifoldSpec, grid: &M3Grid) -> Result<KallinReport> {
    if spec.n != 3 {
        return Err(Error::InvalidArgument(format!(
            "three-dimensional check needs n = 3, got {}",
            spec.n
        )));
    }
    let diagnostics = validate_spec(spec);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidSpec(diagnostics));
    }
    if !order_two_in_w(&spec.perturbation) {
        return Err(Error::NotOrderTwoInW(format!("{}", spec.perturbation)));
    }
    let gamma = spec.gamma;
    let eps = choose_epsilon(gamma)?;

    let mut side1 = f64::INFINITY;
    let mut side2 = f64::INFINITY;
    let mut raw1 = f64::INFINITY;
    let mut raw2 = f64::NEG_INFINITY;
    let mut residual = 0.0f64;
    let mut zero_fiber_ok = true;
    let mut points = 0;
    let mut visit = |t: f64, w: Complex64| -> Result<()> {
        let sheets = m3_sheets(spec, t, w)?;
        let big_f = spec.perturbation.eval(&[t], w)?;
        let h = spec.graph[0].eval(&[t], w)?.re;
        let (u, v) = (w.re, w.im);
        let target = [
            Complex64::new(t, h),
            w,
            u * u + v * v + 2.0 * gamma * (u * u - v * v) + big_f,
        ];
        for sheet in &sheets {
            let image = m3_image(gamma, sheet);
            for k in 0..3 {
                residual = residual.max((image[k] - target[k]).norm());
            }
        }
        let q1 = q_form(eps, sheets[0][1], sheets[0][2]);
        let q2 = q_form(eps, sheets[1][1], sheets[1][2]);
        raw1 = raw1.min(q1.re);
        raw2 = raw2.max(q2.re);
        points += 1;
        let n2 = w.norm_sqr();
        if n2 == 0.0 {
            // the origin fiber: Q has to vanish here on both sheets
            if q1.norm() > ZERO_FIBER_TOL_M3 || q2.norm() > ZERO_FIBER_TOL_M3 {
                zero_fiber_ok = false;
            }
            return Ok(());
        }
        side1 = side1.min(q1.re / n2);
        side2 = side2.min(-q2.re / n2);
        if q1.re.abs() <= ZERO_FIBER_TOL_M3 * n2 || q2.re.abs() <= ZERO_FIBER_TOL_M3 * n2 {
            zero_fiber_ok = false;
        }
        Ok(())
    };
    for &t in &grid.t_values {
        for &u in &grid.uv_values {
            for &v in &grid.uv_values {
                visit(t, Complex64::new(u, v))?;
            }
        }
        // the line u = v = 0 is missed by even grids
        visit(t, Complex64::new(0.0, 0.0))?;
    }
    Ok(KallinReport {
        side1_min_margin: side1,
        side2_min_margin: side2,
        zero_fiber_ok,
        alpha: None,
        epsilon: Some(eps),
        side1_min_raw: raw1,
        side2_max_raw: raw2,
        max_preimage_residual: residual,
        points,
        grid: grid.meta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Domain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unperturbed_surface_margins() {
        let grid = DiskGrid::new(0.5, 8, 16).unwrap();
        let rep = kallin_check_m2(1.0, &BiPoly::zero(0), &grid).unwrap();
        assert!((rep.side1_min_margin - 13.0 / 256.0).abs() < 1e-12);
        assert!((rep.side2_min_margin - 5.0 / 32.0).abs() < 1e-12);
        assert!(rep.zero_fiber_ok);
        assert_eq!(rep.points, 129);
        assert!(rep.holds());
    }

    #[test]
    fn epsilon_rule() {
        assert!((choose_epsilon(0.75).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((epsilon_expression(0.75, 1.0 / 3.0) + 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(choose_epsilon(1.0).unwrap(), 0.25);
        assert!((epsilon_expression(1.0, 0.25) + 0.25).abs() < 1e-15);
        assert_eq!(choose_epsilon(2.0).unwrap(), 0.25);
        assert!((epsilon_expression(2.0, 0.25) - (-0.125 - 3.0 / 16.0)).abs() < 1e-15);
        assert!(matches!(choose_epsilon(0.5), Err(Error::NonHyperbolic { .. })));
    }

    fn m3_spec(perturbation: BiPoly, h: BiPoly) -> ManifoldSpec {
        ManifoldSpec {
            n: 3,
            gamma: 1.0,
            perturbation,
            graph: vec![h],
            domain: Domain {
                t_max: 1.0,
                r_max: 1.0,
            },
            flat: false,
        }
    }

    #[test]
    fn unperturbed_sheets_have_closed_form_q() {
        let spec = m3_spec(BiPoly::zero(1), BiPoly::zero(1));
        let eps = 0.25;
        let (u, v) = (0.3, -0.2);
        let sheets = m3_sheets(&spec, 0.1, c(u, v)).unwrap();
        let q1 = q_form(eps, sheets[0][1], sheets[0][2]);
        assert!((q1.re - eps * (u * u + v * v)).abs() < 1e-15);
        let q2 = q_form(eps, sheets[1][1], sheets[1][2]);
        assert!((q2.re - (-(2.0 * eps + 0.75) * u * u - 0.25 * v * v)).abs() < 1e-15);
    }

    #[test]
    fn m3_graph_function_does_not_move_margins() {
        let f = BiPoly::monomial(vec![0], 2, 1, c(1.0, 0.0));
        let uv = BiPoly::monomial(vec![0], 2, 0, c(0.0, -0.25))
            + BiPoly::monomial(vec![0], 0, 2, c(0.0, 0.25));
        let grid = M3Grid::uniform(0.1, 3, 0.02, 6).unwrap();
        let a = kallin_check_m3(&m3_spec(f.clone(), BiPoly::zero(1)), &grid).unwrap();
        let b = kallin_check_m3(&m3_spec(f, uv), &grid).unwrap();
        assert_eq!(a.side1_min_margin, b.side1_min_margin);
        assert_eq!(a.side2_min_margin, b.side2_min_margin);
        assert!(b.holds());
        assert!(b.max_preimage_residual < 1e-14);
    }

    #[test]
    fn m3_rejects_w_linear_perturbation() {
        let f = BiPoly::monomial(vec![2], 1, 0, c(1.0, 0.0)) + BiPoly::monomial(vec![2], 0, 1, c(1.0, 0.0));
        let grid = M3Grid::uniform(0.1, 3, 0.02, 4).unwrap();
        assert!(matches!(
            kallin_check_m3(&m3_spec(f, BiPoly::zero(1)), &grid),
            Err(Error::NotOrderTwoInW(_))
        ));
    }
}
