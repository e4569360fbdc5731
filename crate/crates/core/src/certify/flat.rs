//! Slice-by-slice certificate for flat hyperbolic points.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{validate_spec, ManifoldSpec};
use crate::normalform::{jet_at, normal_form_threshold, reduce};
use crate::numerics::C2Partials;
use crate::singular::{locate_eta, trace_locus, PARABOLIC_BAND};

/// Geometric candidate lattices `T·2⁻ᵏ`, `R·2⁻ᵏ`, largest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatCandidates {
    pub t_levels: Vec<f64>,
    pub rho_levels: Vec<f64>,
}

impl FlatCandidates {
    pub const DEFAULT_DEPTH: u32 = 40;

    pub fn geometric(t_max: f64, r_max: f64, depth: u32) -> Self {
        let levels = |top: f64| (0..=depth).map(|k| top * 0.5f64.powi(k as i32)).collect();
        Self {
            t_levels: levels(t_max),
            rho_levels: levels(r_max),
        }
    }

    pub fn for_spec(spec: &ManifoldSpec) -> Self {
        Self::geometric(spec.domain.t_max, spec.domain.r_max, Self::DEFAULT_DEPTH)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceRecord {
    pub t: Vec<f64>,
    pub eta: Complex64,
    pub converged: bool,
    pub gamma_t: Option<f64>,
    pub hyperbolic: bool,
    pub threshold: Option<f64>,
    /// `C²` bound of `Ĝ_t` on the disk of radius `r_star`.
    pub g_hat_c2: Option<f64>,
    pub margin: Option<f64>,
    pub in_box: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatCertificate {
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub r_star: f64,
    /// Smallest margin over slices in the box, at `r_star`.
    pub min_margin: Option<f64>,
    pub per_slice: Vec<SliceRecord>,
    pub certified: bool,
    pub diagnostics: Vec<String>,
}

struct Slice {
    record: SliceRecord,
    partials: Option<C2Partials>,
}

impl Slice {
    fn failed(t: &[f64], eta: Complex64, converged: bool, note: String) -> Self {
        Slice {
            record: SliceRecord {
                t: t.to_vec(),
                eta,
                converged,
                gamma_t: None,
                hyperbolic: false,
                threshold: None,
                g_hat_c2: None,
                margin: None,
                in_box: false,
                note: Some(note),
            },
            partials: None,
        }
    }

    fn margin(&self, rho: f64) -> Option<f64> {
        Some(self.record.threshold? - self.partials.as_ref()?.upper(rho))
    }
}

fn analyse(spec: &ManifoldSpec, t: &[f64], eta: Complex64, converged: bool) -> Slice {
    if !converged {
        return Slice::failed(t, eta, false, "singular locus did not converge".into());
    }
    let form = match jet_at(spec, t, eta).and_then(|jet| reduce(&jet)) {
        Ok(form) => form,
        Err(e) => return Slice::failed(t, eta, true, e.to_string()),
    };
    let hyperbolic = form.gamma_t > 0.5 + PARABOLIC_BAND;
    let threshold = if hyperbolic {
        normal_form_threshold(form.gamma_t).ok()
    } else {
        None
    };
    let partials = match C2Partials::new(&form.g_hat) {
        Ok(p) => p,
        Err(e) => return Slice::failed(t, eta, true, e.to_string()),
    };
    Slice {
        record: SliceRecord {
            t: t.to_vec(),
            eta,
            converged: true,
            gamma_t: Some(form.gamma_t),
            hyperbolic,
            threshold,
            g_hat_c2: None,
            margin: None,
            in_box: false,
            note: (!hyperbolic).then(|| "non-hyperbolic slice".to_string()),
        },
        partials: Some(partials),
    }
}

fn sup_norm(t: &[f64]) -> f64 {
    t.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Searches the candidate lattice for the largest `(T, ρ)` such that every
/// grid slice with `|t|∞ ≤ T`, together with the origin slice, is hyperbolic
/// with `threshold(γ_t) - ‖Ĝ_t‖_{C²(B_ρ)} > 0`.
pub fn certify_flat(
    spec: &ManifoldSpec,
    t_grid: &[Vec<f64>],
    candidates: &FlatCandidates,
) -> Result<FlatCertificate> {
    let diagnostics = validate_spec(spec);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidSpec(diagnostics));
    }
    if !spec.flat {
        return Err(Error::NotFlat(
            "flat certificate requested for a spec without the flat flag".into(),
        ));
    }
    let arity = spec.t_arity();
    if let Some(t) = t_grid.iter().find(|t| t.len() != arity) {
        return Err(Error::ArityMismatch {
            expected: arity,
            got: t.len(),
        });
    }

    let mut diagnostics = Vec::new();
    let origin_t = vec![0.0; arity];
    let origin = match locate_eta(spec, &origin_t, Complex64::new(0.0, 0.0)) {
        Ok(sol) => analyse(spec, &origin_t, sol.eta, sol.converged),
        Err(e) => Slice::failed(&origin_t, Complex64::new(0.0, 0.0), false, e.to_string()),
    };
    let origin_ok = origin.record.hyperbolic;
    if !origin_ok {
        diagnostics.push(match origin.record.gamma_t {
            Some(g) => format!("non-hyperbolic origin slice (gamma_0 = {g})"),
            None => "non-hyperbolic origin slice (no valid jet)".to_string(),
        });
    }

    let locus = trace_locus(spec, t_grid);
    let mut slices: Vec<Slice> = t_grid
        .iter()
        .enumerate()
        .map(|(k, t)| analyse(spec, t, locus.eta[k], locus.converged[k]))
        .collect();

    let tol = 1.0 + 1e-12;
    let mut found: Option<(f64, f64)> = None;
    if origin_ok {
        'outer: for &t_level in &candidates.t_levels {
            let members: Vec<&Slice> = slices
                .iter()
                .filter(|s| sup_norm(&s.record.t) <= t_level * tol)
                .chain(std::iter::once(&origin))
                .collect();
            if members.iter().any(|s| !s.record.hyperbolic) {
                continue;
            }
            for &rho in &candidates.rho_levels {
                if members.iter().all(|s| s.margin(rho).is_some_and(|m| m > 0.0)) {
                    found = Some((t_level, rho));
                    break 'outer;
                }
            }
        }
    }

    let (t_star, r_star) = found.unwrap_or((0.0, 0.0));
    let rho_report = if found.is_some() {
        r_star
    } else {
        candidates.rho_levels.last().copied().unwrap_or(0.0)
    };
    let mut min_margin: Option<f64> = None;
    for s in &mut slices {
        s.record.in_box = found.is_some() && sup_norm(&s.record.t) <= t_star * tol;
        if let (Some(p), true) = (&s.partials, s.record.hyperbolic) {
            s.record.g_hat_c2 = Some(p.upper(rho_report));
            s.record.margin = s.margin(rho_report);
        }
        if s.record.in_box {
            min_margin = Some(min_margin.map_or(s.record.margin.unwrap(), |m: f64| {
                m.min(s.record.margin.unwrap())
            }));
        }
    }
    if found.is_none() && origin_ok {
        diagnostics.push("no candidate box has all slice margins positive".to_string());
    }
    Ok(FlatCertificate {
        t_star,
        r_star,
        min_margin,
        per_slice: slices.into_iter().map(|s| s.record).collect(),
        certified: found.is_some(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{BiPoly, Domain};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixture(gamma: f64, perturbation: BiPoly) -> ManifoldSpec {
        ManifoldSpec {
            n: 3,
            gamma,
            perturbation,
            graph: vec![BiPoly::monomial(vec![2], 0, 0, c(1.0, 0.0))],
            domain: Domain {
                t_max: 0.1,
                r_max: 0.5,
            },
            flat: true,
        }
    }

    fn grid(count: usize, t_max: f64) -> Vec<Vec<f64>> {
        (0..count)
            .map(|k| vec![-t_max + 2.0 * t_max * k as f64 / (count - 1) as f64])
            .collect()
    }

    #[test]
    fn unperturbed_certifies_full_box() {
        let spec = fixture(1.0, BiPoly::zero(1));
        let cert = certify_flat(&spec, &grid(5, 0.1), &FlatCandidates::for_spec(&spec)).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.t_star, 0.1);
        assert_eq!(cert.r_star, 0.5);
        assert!(cert.per_slice.iter().all(|s| s.gamma_t == Some(1.0)));
    }

    #[test]
    fn elliptic_origin_is_refused() {
        let spec = fixture(0.3, BiPoly::zero(1));
        let cert = certify_flat(&spec, &grid(5, 0.1), &FlatCandidates::for_spec(&spec)).unwrap();
        assert!(!cert.certified);
        assert!(cert.diagnostics[0].starts_with("non-hyperbolic origin slice"));
    }

    #[test]
    fn requires_flat_flag() {
        let mut spec = fixture(1.0, BiPoly::zero(1));
        spec.flat = false;
        assert!(matches!(
            certify_flat(&spec, &grid(3, 0.1), &FlatCandidates::for_spec(&spec)),
            Err(Error::NotFlat(_))
        ));
    }

    #[test]
    fn perturbed_fixture_has_closed_form_margin() {
        let f = BiPoly::monomial(vec![2], 1, 0, c(1.0, 0.0))
            + BiPoly::monomial(vec![2], 0, 1, c(1.0, 0.0))
            + BiPoly::monomial(vec![0], 3, 0, c(1.0, 0.0));
        let spec = fixture(1.0, f);
        let cert = certify_flat(&spec, &grid(21, 0.1), &FlatCandidates::for_spec(&spec)).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.t_star, 0.1);
        let rho = 0.5 * 0.5f64.powi(16);
        assert_eq!(cert.r_star, rho);
        let expected = 1.0 / 16384.0 - 6.0 * rho;
        assert!((cert.min_margin.unwrap() - expected).abs() < 1e-15);
        for s in &cert.per_slice {
            let t = s.t[0];
            assert!((s.eta - c(-t * t / 3.0, 0.0)).norm() < 1e-12);
            assert!((s.gamma_t.unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
