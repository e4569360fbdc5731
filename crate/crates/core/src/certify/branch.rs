//! Preimage sheets of a hyperbolic surface under the proper map
//! `P(z₁, z₂) = (z₁, z₁z₂ + γ(z₁² + z₂²))`.
//!
//! `P⁻¹(M)` is the union of the graphs `S₁ = {(ζ, ζ̄ + f)}` and
//! `S₂ = {(ζ, -ζ/γ - ζ̄ + g)}`, where `f` and `g` solve
//!
//! ```text
//! γ f² + (ζ + 2γζ̄) f - F = 0,     γ g² - (ζ + 2γζ̄) g - F = 0,
//! ```
//!
//! taking the roots with `df(0) = dg(0) = 0`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::BiPoly;
use crate::numerics::sqrt1p_deviation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchKind {
    S1,
    S2,
    V1,
    V2,
}

/// One sheet evaluated at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSolution {
    pub which: BranchKind,
    pub zeta: Complex64,
    /// The perturbation `f` (or `g`) at `zeta`.
    pub value: Complex64,
    /// Second preimage coordinate: `ζ̄ + f` on `S₁`, `-ζ/γ - ζ̄ + g` on `S₂`.
    pub linear_part: Complex64,
    /// Residual of the defining quadratic.
    pub residual: f64,
}

pub(crate) fn require_hyperbolic(gamma: f64) -> Result<()> {
    if gamma > 0.5 {
        Ok(())
    } else {
        Err(Error::NonHyperbolic { gamma })
    }
}

/// `q(4γF/(ζ + 2γζ̄)²)` with the denominator; `None` at `ζ = 0`.
fn deviation(gamma: f64, big_f: Complex64, zeta: Complex64) -> Result<Option<(Complex64, Complex64)>> {
    if zeta == Complex64::new(0.0, 0.0) {
        return Ok(None);
    }
    let den = zeta + 2.0 * gamma * zeta.conj();
    let z = 4.0 * gamma * big_f / (den * den);
    let q = sqrt1p_deviation(z).map_err(|_| Error::BranchDomain { zeta, z })?;
    Ok(Some((den, q)))
}

fn solve(
    which: BranchKind,
    gamma: f64,
    perturbation: &BiPoly,
    t: &[f64],
    zeta: Complex64,
) -> Result<BranchSolution> {
    require_hyperbolic(gamma)?;
    let big_f = perturbation.eval(t, zeta)?;
    let sign = match which {
        BranchKind::S1 => -1.0,
        BranchKind::S2 => 1.0,
        _ => unreachable!("surface branches only"),
    };
    let (value, den) = match deviation(gamma, big_f, zeta)? {
        None => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        Some((den, q)) => (sign * den / (2.0 * gamma) * q, den),
    };
    // γ v² - sign·(ζ + 2γζ̄) v - F, with sign = -1 for f.
    let residual = (gamma * value * value - sign * den * value - big_f).norm();
    let linear_part = match which {
        BranchKind::S1 => zeta.conj() + value,
        _ => -zeta / gamma - zeta.conj() + value,
    };
    Ok(BranchSolution {
        which,
        zeta,
        value,
        linear_part,
        residual,
    })
}

/// The `S₁` perturbation `f(ζ) = -((ζ + 2γζ̄)/(2γ)) · (1 - √(1 + 4γF/(ζ + 2γζ̄)²))`.
pub fn solve_branch_f(
    gamma: f64,
    perturbation: &BiPoly,
    t: &[f64],
    zeta: Complex64,
) -> Result<BranchSolution> {
    solve(BranchKind::S1, gamma, perturbation, t, zeta)
}

/// The `S₂` perturbation `g(ζ) = ((ζ + 2γζ̄)/(2γ)) · (1 - √(1 + 4γF/(ζ + 2γζ̄)²))`.
pub fn solve_branch_g(
    gamma: f64,
    perturbation: &BiPoly,
    t: &[f64],
    zeta: Complex64,
) -> Result<BranchSolution> {
    solve(BranchKind::S2, gamma, perturbation, t, zeta)
}

/// `|P₂(ζ, linear_part) - (ζζ̄ + γ(ζ² + ζ̄²) + F(ζ))|`: how far the preimage
/// point lands from the surface.
pub fn forward_check(
    gamma: f64,
    perturbation: &BiPoly,
    t: &[f64],
    branch: &BranchSolution,
) -> Result<f64> {
    let zeta = branch.zeta;
    let z2 = branch.linear_part;
    let image = zeta * z2 + gamma * (zeta * zeta + z2 * z2);
    let target = zeta * zeta.conj()
        + gamma * (zeta * zeta + zeta.conj() * zeta.conj())
        + perturbation.eval(t, zeta)?;
    Ok((image - target).norm())
}

/// Wirtinger derivatives `(v_ζ, v_ζ̄)` of a branch, by implicit
/// differentiation of its quadratic. Zero at `ζ = 0`.
pub fn branch_derivatives(
    gamma: f64,
    perturbation: &BiPoly,
    t: &[f64],
    branch: &BranchSolution,
) -> Result<(Complex64, Complex64)> {
    let zeta = branch.zeta;
    if zeta == Complex64::new(0.0, 0.0) {
        return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    let fz = perturbation.d_w().eval(t, zeta)?;
    let fzb = perturbation.d_wbar().eval(t, zeta)?;
    let den = zeta + 2.0 * gamma * zeta.conj();
    let v = branch.value;
    Ok(match branch.which {
        BranchKind::S1 => {
            let d = 2.0 * gamma * v + den;
            ((fz - v) / d, (fzb - 2.0 * gamma * v) / d)
        }
        _ => {
            let d = 2.0 * gamma * v - den;
            ((fz + v) / d, (fzb + 2.0 * gamma * v) / d)
        }
    })
}

/// The Lipschitz constant `α = (2γ - 1)/(32γ²)` claimed for both branches.
pub fn lipschitz_alpha(gamma: f64) -> f64 {
    (2.0 * gamma - 1.0) / (32.0 * gamma * gamma)
}

/// Sampled Lipschitz ratios of `f` and `g` on `|ζ| ≤ r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzAudit {
    pub max_ratio: f64,
    pub alpha: f64,
    pub pairs: usize,
    pub violations: usize,
    pub seed: u64,
}

/// Draws a point uniformly (by area) from the closed disk of radius `r`.
pub fn sample_disk<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    let rho = r * rng.random::<f64>().sqrt();
    let angle = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(rho, angle)
}

/// Compares `|Δf|/|Δζ|` and `|Δg|/|Δζ|` over random pairs against `α`.
pub fn lipschitz_audit(
    gamma: f64,
    perturbation: &BiPoly,
    r: f64,
    pair_count: usize,
    seed: u64,
) -> Result<LipschitzAudit> {
    require_hyperbolic(gamma)?;
    let alpha = lipschitz_alpha(gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut violations = 0;
    let mut pairs = 0;
    while pairs < pair_count {
        let z1 = sample_disk(&mut rng, r);
        let z2 = sample_disk(&mut rng, r);
        let dz = (z1 - z2).norm();
        if dz == 0.0 {
            continue;
        }
        pairs += 1;
        let df = solve_branch_f(gamma, perturbation, &[], z1)?.value
            - solve_branch_f(gamma, perturbation, &[], z2)?.value;
        let dg = solve_branch_g(gamma, perturbation, &[], z1)?.value
            - solve_branch_g(gamma, perturbation, &[], z2)?.value;
        let ratio = (df.norm() / dz).max(dg.norm() / dz);
        if ratio > alpha {
            violations += 1;
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(LipschitzAudit {
        max_ratio,
        alpha,
        pairs,
        violations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cubic() -> BiPoly {
        BiPoly::monomial(vec![], 3, 0, c(1.0, 0.0))
    }

    #[test]
    fn zero_perturbation_gives_zero_branches() {
        for zeta in [c(0.3, -0.2), c(0.0, 0.0), c(-1.0, 0.5)] {
            let f = solve_branch_f(0.9, &BiPoly::zero(0), &[], zeta).unwrap();
            let g = solve_branch_g(0.9, &BiPoly::zero(0), &[], zeta).unwrap();
            assert_eq!(f.value, c(0.0, 0.0));
            assert_eq!(g.value, c(0.0, 0.0));
            assert_eq!(forward_check(0.9, &BiPoly::zero(0), &[], &f).unwrap(), 0.0);
        }
    }

    #[test]
    fn cubic_branches_match_quadratic_formula() {
        let zeta = c(0.1, 0.0);
        let f = solve_branch_f(1.0, &cubic(), &[], zeta).unwrap();
        let expected = (-0.3 + 0.094f64.sqrt()) / 2.0;
        assert!((f.value - c(expected, 0.0)).norm() < 1e-15);
        assert!((f.value.re - 3.2971e-3).abs() < 1e-7);
        assert!(f.residual <= 1e-12);
        assert!(forward_check(1.0, &cubic(), &[], &f).unwrap() <= 1e-12);

        let g = solve_branch_g(1.0, &cubic(), &[], zeta).unwrap();
        assert!((g.value - c(-expected, 0.0)).norm() < 1e-15);
        assert!(g.residual <= 1e-12);
        assert!(forward_check(1.0, &cubic(), &[], &g).unwrap() <= 1e-12);
    }

    #[test]
    fn imaginary_input_residual() {
        // |ζ + 2ζ̄| = |ζ| on the imaginary axis, so |z| = 4|ζ| there.
        assert!(matches!(
            solve_branch_g(1.0, &cubic(), &[], c(0.0, 0.1)),
            Err(Error::BranchDomain { .. })
        ));
        for y in [0.01, -0.05, 0.06] {
            let g = solve_branch_g(1.0, &cubic(), &[], c(0.0, y)).unwrap();
            assert!(g.residual <= 1e-12);
            assert!(forward_check(1.0, &cubic(), &[], &g).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn origin_is_zero() {
        let f = solve_branch_f(1.0, &cubic(), &[], c(0.0, 0.0)).unwrap();
        assert_eq!(f.value, c(0.0, 0.0));
        assert_eq!(f.linear_part, c(0.0, 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            solve_branch_f(0.5, &cubic(), &[], c(0.1, 0.0)),
            Err(Error::NonHyperbolic { .. })
        ));
        // Large F relative to |ζ|² leaves the square-root disk.
        let big = BiPoly::monomial(vec![], 3, 0, c(100.0, 0.0));
        assert!(matches!(
            solve_branch_f(1.0, &big, &[], c(0.1, 0.0)),
            Err(Error::BranchDomain { .. })
        ));
    }

    #[test]
    fn alpha_values() {
        assert_eq!(lipschitz_alpha(1.0), 1.0 / 32.0);
        assert!((lipschitz_alpha(0.75) - 0.5 / 18.0).abs() < 1e-16);
    }

    #[test]
    fn audit_of_zero_perturbation() {
        let a = lipschitz_audit(1.0, &BiPoly::zero(0), 1.0, 100, 0).unwrap();
        assert_eq!(a.max_ratio, 0.0);
        assert_eq!(a.violations, 0);
        assert_eq!(a.pairs, 100);
    }

    #[test]
    fn implicit_derivatives_match_finite_differences() {
        let p = BiPoly::monomial(vec![], 2, 1, c(0.7, 0.2)) + BiPoly::monomial(vec![], 4, 0, c(0.0, -1.0));
        let zeta = c(0.05, 0.03);
        let h = 1e-6;
        for solver in [solve_branch_f, solve_branch_g] {
            let b = solver(0.8, &p, &[], zeta).unwrap();
            let (dz, dzb) = branch_derivatives(0.8, &p, &[], &b).unwrap();
            let v = |z: Complex64| solver(0.8, &p, &[], z).unwrap().value;
            let fx = (v(zeta + h) - v(zeta - h)) / (2.0 * h);
            let fy = (v(zeta + c(0.0, h)) - v(zeta - c(0.0, h))) / (2.0 * h);
            let fd_z = (fx - Complex64::i() * fy) * 0.5;
            let fd_zb = (fx + Complex64::i() * fy) * 0.5;
            assert!((dz - fd_z).norm() < 1e-8, "{dz} vs {fd_z}");
            assert!((dzb - fd_zb).norm() < 1e-8, "{dzb} vs {fd_zb}");
        }
    }
}
