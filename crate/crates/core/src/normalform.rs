//! Reduction of a two-dimensional slice, centered at a complex point, to
//! `z = ζζ̄ + γ_t(ζ² + ζ̄²) + Ĝ_t(ζ)`.
//!
//! The pipeline is a fixed sequence of holomorphic changes of coordinates:
//! translate the center to the origin, subtract the affine part
//! `β₀₀ + β₁₀ ζ`, divide by `β₁₁`, rotate `ζ → e^{iθ}ζ` so that the `ζ̄²`
//! coefficient becomes the positive real `γ_t`, and finally add a multiple of
//! `ζ²` to match the `ζ²` coefficient. Every step is recorded so the whole
//! chain can be replayed on the original polynomial.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{model_quadric, BiPoly, ManifoldSpec};

/// `|β₁₁|` at or below this (relative to the quadratic scale) is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// `|β₀₁|` above this (relative to `1 + |β₁₁|`) means the center is not a
/// tangency point.
pub const OFF_LOCUS_TOL: f64 = 1e-9;

/// Second-order Taylor data `φ ≈ Σ β_{i,j} ζ^i ζ̄^j` about `center`, with
/// `ζ = w - center`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorJet {
    pub center: Complex64,
    pub beta00: Complex64,
    pub beta10: Complex64,
    pub beta01: Complex64,
    pub beta20: Complex64,
    pub beta11: Complex64,
    pub beta02: Complex64,
    /// Exact terms of order ≥ 3 in `ζ`, when the input was a polynomial.
    pub remainder: Option<BiPoly>,
}

impl TaylorJet {
    /// Builds a jet from raw Wirtinger partials (no factorials applied).
    pub fn from_raw_partials(
        center: Complex64,
        f: Complex64,
        fw: Complex64,
        fwb: Complex64,
        fww: Complex64,
        fwwb: Complex64,
        fwbwb: Complex64,
    ) -> Self {
        Self {
            center,
            beta00: f,
            beta10: fw,
            beta01: fwb,
            beta20: fww * 0.5,
            beta11: fwwb,
            beta02: fwbwb * 0.5,
            remainder: None,
        }
    }

    /// Taylor coefficient of `ζ^i ζ̄^j`; zero outside `i + j ≤ 2`.
    pub fn beta(&self, i: u32, j: u32) -> Complex64 {
        match (i, j) {
            (0, 0) => self.beta00,
            (1, 0) => self.beta10,
            (0, 1) => self.beta01,
            (2, 0) => self.beta20,
            (1, 1) => self.beta11,
            (0, 2) => self.beta02,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// The raw partial `∂^{i+j} φ / ∂w^i ∂w̄^j`, i.e. `i! j! β_{i,j}`.
    pub fn raw_partial(&self, i: u32, j: u32) -> Complex64 {
        let fact = |k: u32| (1..=k).product::<u32>() as f64;
        self.beta(i, j) * fact(i) * fact(j)
    }

    /// Scale of the quadratic part, used for relative thresholds.
    pub fn quadratic_scale(&self) -> f64 {
        1f64.max(self.beta20.norm()).max(self.beta02.norm())
    }

    /// Quadratic part plus remainder as a polynomial in `ζ`.
    pub fn to_poly(&self) -> BiPoly {
        let mut p = self.remainder.clone().unwrap_or_else(|| BiPoly::zero(0));
        for (i, j) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            p.add_term(vec![], i, j, self.beta(i, j));
        }
        p
    }
}

/// Exact jet of a `t`-free polynomial about `center`.
pub fn jet_of_poly(phi: &BiPoly, center: Complex64) -> Result<TaylorJet> {
    if phi.t_arity() != 0 {
        return Err(Error::ArityMismatch {
            expected: 0,
            got: phi.t_arity(),
        });
    }
    let shifted = phi.recenter(center);
    Ok(TaylorJet {
        center,
        beta00: shifted.coeff(&[], 0, 0),
        beta10: shifted.coeff(&[], 1, 0),
        beta01: shifted.coeff(&[], 0, 1),
        beta20: shifted.coeff(&[], 2, 0),
        beta11: shifted.coeff(&[], 1, 1),
        beta02: shifted.coeff(&[], 0, 2),
        remainder: Some(shifted.filter(|e| e.w_degree() >= 3)),
    })
}

/// Exact jet of the slice `φ_t` about `center`.
pub fn jet_at(spec: &ManifoldSpec, t: &[f64], center: Complex64) -> Result<TaylorJet> {
    if center.norm() > spec.domain.r_max {
        return Err(Error::OutOfDomain(format!(
            "jet center |{center}| exceeds R = {}",
            spec.domain.r_max
        )));
    }
    jet_of_poly(&spec.slice_phi(t)?, center)
}

/// One recorded change of coordinates, applied to the slice polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum CoordinateChange {
    /// `ζ = w - center`.
    Translate { center: Complex64 },
    /// `z → z - β₀₀ - β₁₀ ζ`.
    KillLinear { beta00: Complex64, beta10: Complex64 },
    /// `z → factor · z`.
    Scale { factor: Complex64 },
    /// `ζ → e^{iθ} ζ`.
    Rotate { theta: f64 },
    /// `z → z + coeff · ζ²`.
    KillHolomorphicQuadratic { coeff: Complex64 },
}

impl CoordinateChange {
    pub fn apply(&self, phi: &BiPoly) -> BiPoly {
        match *self {
            Self::Translate { center } => phi.recenter(center),
            Self::KillLinear { beta00, beta10 } => {
                let mut p = phi.clone();
                p.add_term(vec![], 0, 0, -beta00);
                p.add_term(vec![], 1, 0, -beta10);
                p
            }
            Self::Scale { factor } => phi.scale(factor),
            Self::Rotate { theta } => phi.rotate(theta),
            Self::KillHolomorphicQuadratic { coeff } => {
                let mut p = phi.clone();
                p.add_term(vec![], 2, 0, coeff);
                p
            }
        }
    }
}

/// Result of [`reduce`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceNormalForm {
    pub gamma_t: f64,
    pub theta: f64,
    pub beta11: Complex64,
    /// `Ĝ_t`; vanishes to order three.
    pub g_hat: BiPoly,
    /// False when the jet had no exact remainder; `g_hat` is then zero and
    /// carries no information.
    pub exact: bool,
    pub change_log: Vec<CoordinateChange>,
}

impl SliceNormalForm {
    /// Replays the recorded changes on `phi`.
    pub fn replay(&self, phi: &BiPoly) -> BiPoly {
        self.change_log
            .iter()
            .fold(phi.clone(), |acc, step| step.apply(&acc))
    }

    /// `ζζ̄ + γ_t(ζ² + ζ̄²) + Ĝ_t(ζ)`.
    pub fn target(&self) -> BiPoly {
        &model_quadric(self.gamma_t) + &self.g_hat
    }
}

/// `γ_t = |β₀₂ / β₁₁|`, with `θ = arg(β₀₂/β₁₁)/2 ∈ (-π/2, π/2]` (0 when
/// `β₀₂ = 0`).
pub(crate) fn bishop_ratio(beta02: Complex64, beta11: Complex64) -> (f64, f64) {
    let ratio = beta02 / beta11;
    if ratio.norm() == 0.0 {
        return (0.0, 0.0);
    }
    let mut arg = ratio.arg();
    if arg <= -std::f64::consts::PI {
        arg = std::f64::consts::PI;
    }
    (ratio.norm(), 0.5 * arg)
}

/// Runs the normalization chain on a jet taken at a tangency point.
pub fn reduce(jet: &TaylorJet) -> Result<SliceNormalForm> {
    let b11 = jet.beta11;
    if b11.norm() <= DEGENERACY_TOL * jet.quadratic_scale() {
        return Err(Error::DegenerateJet { abs: b11.norm() });
    }
    if jet.beta01.norm() > OFF_LOCUS_TOL * (1.0 + b11.norm()) {
        return Err(Error::OffLocus {
            abs: jet.beta01.norm(),
        });
    }
    let (gamma_t, theta) = bishop_ratio(jet.beta02, b11);
    let rotated_20 = jet.beta20 / b11 * Complex64::from_polar(1.0, 2.0 * theta);
    let quad_fix = Complex64::new(gamma_t, 0.0) - rotated_20;

    let (g_hat, exact) = match &jet.remainder {
        Some(rem) => (rem.rotate(theta).scale(b11.inv()), true),
        None => (BiPoly::zero(0), false),
    };
    debug_assert!(g_hat.terms().all(|(e, _)| e.w_degree() >= 3));

    let change_log = vec![
        CoordinateChange::Translate { center: jet.center },
        CoordinateChange::KillLinear {
            beta00: jet.beta00,
            beta10: jet.beta10,
        },
        CoordinateChange::Scale { factor: b11.inv() },
        CoordinateChange::Rotate { theta },
        CoordinateChange::KillHolomorphicQuadratic { coeff: quad_fix },
    ];
    Ok(SliceNormalForm {
        gamma_t,
        theta,
        beta11: b11,
        g_hat,
        exact,
        change_log,
    })
}

/// `(2γ - 1)³ / (2¹⁴ γ³)`, the admissible `C^2` size of the perturbation for
/// a hyperbolic point of invariant `γ`.
pub fn normal_form_threshold(gamma: f64) -> Result<f64> {
    if !(gamma > 0.5) {
        return Err(Error::NonHyperbolic { gamma });
    }
    // (2γ-1)/γ = 2 - 1/γ; this form also has the right limit at γ = ∞.
    let s = 2.0 - 1.0 / gamma;
    Ok(s * s * s / 16384.0)
}
