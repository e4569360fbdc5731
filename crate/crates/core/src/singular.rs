//! The CR-singular locus and its Bishop classification.
//!
//! On the slice through a fixed `t`, complex tangents occur exactly where
//! `∂φ_t/∂w̄ = w + 2γw̄ + F_w̄(t, w, w̄)` vanishes. For hyperbolic and elliptic
//! origins this zero set is a graph `w = η(t)`, traced here by Newton
//! continuation.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{BiPoly, ManifoldSpec};
use crate::normalform::{bishop_ratio, jet_at, TaylorJet, DEGENERACY_TOL};

pub const NEWTON_MAX_ITER: usize = 50;
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const JACOBIAN_TOL: f64 = 1e-10;
pub const PARABOLIC_BAND: f64 = 1e-9;

/// `∂φ_t/∂w̄` at `(t, w)`.
pub fn b_slice(spec: &ManifoldSpec, t: &[f64], w: Complex64) -> Result<Complex64> {
    let fwb = spec.perturbation.d_wbar().eval(t, w)?;
    Ok(w + 2.0 * spec.gamma * w.conj() + fwb)
}

/// `∂φ_t/∂w̄` and its Wirtinger derivatives on one slice.
struct Tangency {
    b: BiPoly,
    b_w: BiPoly,
    b_wb: BiPoly,
}

impl Tangency {
    fn new(spec: &ManifoldSpec, t: &[f64]) -> Result<Self> {
        let b = spec.slice_phi(t)?.d_wbar();
        Ok(Self {
            b_w: b.d_w(),
            b_wb: b.d_wbar(),
            b,
        })
    }

    fn value(&self, w: Complex64) -> Complex64 {
        self.b.eval_unchecked(&[], w)
    }

    /// Real Jacobian of `(Re b, Im b)` in `(u, v)`, row-major.
    fn jacobian(&self, w: Complex64) -> [[f64; 2]; 2] {
        let bw = self.b_w.eval_unchecked(&[], w);
        let bwb = self.b_wb.eval_unchecked(&[], w);
        let du = bw + bwb;
        let dv = Complex64::i() * (bw - bwb);
        [[du.re, dv.re], [du.im, dv.im]]
    }
}

/// Outcome of [`locate_eta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaSolution {
    pub eta: Complex64,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    /// Jacobian determinant at `eta`.
    pub det: f64,
    /// False when `|det| < 1e-10`: the locus may not be a smooth graph here.
    pub nondegenerate: bool,
}

fn residual_scale(t: &[f64], w: Complex64) -> f64 {
    let tn = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 + w.norm() + tn
}

/// Newton iteration for the tangency point on the slice through `t`.
pub fn locate_eta(spec: &ManifoldSpec, t: &[f64], seed: Complex64) -> Result<EtaSolution> {
    let tangency = Tangency::new(spec, t)?;
    let mut w = seed;
    for iteration in 0..=NEWTON_MAX_ITER {
        let val = tangency.value(w);
        let jac = tangency.jacobian(w);
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let residual = val.norm();
        if residual <= RESIDUAL_TOL * residual_scale(t, w) {
            return Ok(EtaSolution {
                eta: w,
                converged: true,
                residual,
                iterations: iteration,
                det,
                nondegenerate: det.abs() >= JACOBIAN_TOL,
            });
        }
        if iteration == NEWTON_MAX_ITER {
            return Ok(EtaSolution {
                eta: w,
                converged: false,
                residual,
                iterations: iteration,
                det,
                nondegenerate: det.abs() >= JACOBIAN_TOL,
            });
        }
        if det.abs() < JACOBIAN_TOL {
            return Err(Error::SingularJacobian { det });
        }
        let du = (-val.re * jac[1][1] + val.im * jac[0][1]) / det;
        let dv = (-val.im * jac[0][0] + val.re * jac[1][0]) / det;
        w += Complex64::new(du, dv);
    }
    unreachable!("loop returns on its last iteration")
}

/// Traced tangency points over a grid of `t` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularLocus {
    pub t_grid: Vec<Vec<f64>>,
    pub eta: Vec<Complex64>,
    pub converged: Vec<bool>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

impl SingularLocus {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

fn distance2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Continuation over `t_grid`, outward from the origin.
///
/// Points are solved in order of increasing `|t|` (ties broken
/// lexicographically). Each seeds from the nearest point already solved, the
/// first from `w = 0`. Failures become non-converged entries.
pub fn trace_locus(spec: &ManifoldSpec, t_grid: &[Vec<f64>]) -> SingularLocus {
    let zero = vec![0.0; spec.t_arity()];
    let mut order: Vec<usize> = (0..t_grid.len()).collect();
    order.sort_by(|&i, &j| {
        distance2(&t_grid[i], &zero)
            .total_cmp(&distance2(&t_grid[j], &zero))
            .then_with(|| {
                t_grid[i]
                    .iter()
                    .zip(&t_grid[j])
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });

    let mut eta = vec![Complex64::new(0.0, 0.0); t_grid.len()];
    let mut converged = vec![false; t_grid.len()];
    let mut residuals = vec![f64::INFINITY; t_grid.len()];
    let mut solved: Vec<usize> = Vec::new();

    for &idx in &order {
        let t = &t_grid[idx];
        let seed = solved
            .iter()
            .min_by(|&&a, &&b| distance2(&t_grid[a], t).total_cmp(&distance2(&t_grid[b], t)))
            .map(|&k| eta[k])
            .unwrap_or(Complex64::new(0.0, 0.0));
        match locate_eta(spec, t, seed) {
            Ok(sol) => {
                eta[idx] = sol.eta;
                converged[idx] = sol.converged;
                residuals[idx] = sol.residual;
                if sol.converged {
                    solved.push(idx);
                }
            }
            Err(_) => {
                eta[idx] = seed;
                residuals[idx] = b_slice(spec, t, seed).map(|b| b.norm()).unwrap_or(f64::INFINITY);
            }
        }
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    SingularLocus {
        t_grid: t_grid.to_vec(),
        eta,
        converged,
        residuals,
        max_residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
    Degenerate,
}

/// Bishop classification of a complex point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub kind: PointKind,
    /// `|β₀₂/β₁₁|`; `None` when the jet is degenerate.
    pub gamma_t: Option<f64>,
    pub beta11: Complex64,
    pub beta02: Complex64,
}

/// Classifies the complex point at the jet's center by `γ_t = |β₀₂/β₁₁|`.
pub fn classify_point(jet: &TaylorJet) -> Classification {
    if jet.beta11.norm() <= DEGENERACY_TOL * jet.quadratic_scale() {
        return Classification {
            kind: PointKind::Degenerate,
            gamma_t: None,
            beta11: jet.beta11,
            beta02: jet.beta02,
        };
    }
    let (gamma_t, _) = bishop_ratio(jet.beta02, jet.beta11);
    let kind = if (gamma_t - 0.5).abs() <= PARABOLIC_BAND {
        PointKind::Parabolic
    } else if gamma_t < 0.5 {
        PointKind::Elliptic
    } else {
        PointKind::Hyperbolic
    };
    Classification {
        kind,
        gamma_t: Some(gamma_t),
        beta11: jet.beta11,
        beta02: jet.beta02,
    }
}

/// Locates the tangency point on the slice through `t` (seeded at `w = 0`)
/// and classifies it.
pub fn classify_at(spec: &ManifoldSpec, t: &[f64]) -> Result<(EtaSolution, Classification)> {
    let sol = locate_eta(spec, t, Complex64::new(0.0, 0.0))?;
    let jet = jet_at(spec, t, sol.eta)?;
    Ok((sol, classify_point(&jet)))
}
