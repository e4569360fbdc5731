//! Manifolds in Bishop normal form
//!
//! ```text
//! z_j     = t_j + i f_j(t, w, w̄)          j = 1..n-2
//! z_{n-1} = w
//! z_n     = w w̄ + γ (w² + w̄²) + F(t, w, w̄)
//! ```
//!
//! with `t ∈ [-T, T]^{n-2}` and `|w| ≤ R`. All functions are polynomials
//! ([`BiPoly`]); certification needs exact coefficient bounds.

mod poly;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use poly::{BiPoly, Exponent, Wirtinger};

/// One serialized polynomial term `(re + i·im) · t^a w^b w̄^c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub a: Vec<u32>,
    pub b: u32,
    pub c: u32,
    pub re: f64,
    pub im: f64,
}

impl BiPoly {
    /// Terms in canonical (sorted exponent) order.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms()
            .map(|(e, c)| TermRecord {
                a: e.a.clone(),
                b: e.b,
                c: e.c,
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn from_records(t_arity: usize, records: &[TermRecord]) -> Result<Self> {
        BiPoly::from_terms(
            t_arity,
            records
                .iter()
                .map(|r| (r.a.clone(), r.b, r.c, Complex64::new(r.re, r.im))),
        )
    }
}

impl Serialize for BiPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

/// Parameter box: `t ∈ [-t_max, t_max]^{n-2}`, `|w| ≤ r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    #[serde(rename = "T")]
    pub t_max: f64,
    #[serde(rename = "R")]
    pub r_max: f64,
}

/// Input manifold in the normal form above.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub n: usize,
    pub gamma: f64,
    /// The perturbation `F(t, w, w̄)`, with `t_arity = n - 2`.
    pub perturbation: BiPoly,
    /// Graph functions `f_1 .. f_{n-2}`.
    pub graph: Vec<BiPoly>,
    pub domain: Domain,
    pub flat: bool,
}

impl ManifoldSpec {
    /// A surface in `C^2`: `z_2 = w w̄ + γ(w² + w̄²) + F(w, w̄)`.
    pub fn surface(gamma: f64, perturbation: BiPoly, r_max: f64) -> Self {
        Self {
            n: 2,
            gamma,
            perturbation,
            graph: Vec::new(),
            domain: Domain { t_max: 1.0, r_max },
            flat: true,
        }
    }

    pub fn t_arity(&self) -> usize {
        self.n.saturating_sub(2)
    }

    /// The slice function `φ_t(w) = w w̄ + γ(w² + w̄²) + F(t, w, w̄)`.
    pub fn slice_phi(&self, t: &[f64]) -> Result<BiPoly> {
        let f = self.perturbation.specialize_t(t)?;
        Ok(&model_quadric(self.gamma) + &f)
    }

    /// Checks `t` and `w` against the parameter box.
    pub fn check_domain(&self, t: &[f64], w: Complex64) -> Result<()> {
        if t.len() != self.t_arity() {
            return Err(Error::ArityMismatch {
                expected: self.t_arity(),
                got: t.len(),
            });
        }
        let slack = 1e-12;
        if let Some(tj) = t.iter().find(|tj| tj.abs() > self.domain.t_max * (1.0 + slack)) {
            return Err(Error::OutOfDomain(format!(
                "|t| = {} exceeds T = {}",
                tj.abs(),
                self.domain.t_max
            )));
        }
        if w.norm() > self.domain.r_max * (1.0 + slack) {
            return Err(Error::OutOfDomain(format!(
                "|w| = {} exceeds R = {}",
                w.norm(),
                self.domain.r_max
            )));
        }
        Ok(())
    }
}

/// `w w̄ + γ(w² + w̄²)` with no t-variables.
pub fn model_quadric(gamma: f64) -> BiPoly {
    let one = Complex64::new(1.0, 0.0);
    let g = Complex64::new(gamma, 0.0);
    let mut p = BiPoly::monomial(vec![], 1, 1, one);
    p.add_term(vec![], 2, 0, g);
    p.add_term(vec![], 0, 2, g);
    p
}

/// A point `(z_1, .., z_n)` of `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedPoint {
    pub z: Vec<Complex64>,
}

/// Evaluates the normal-form parametrization at `(t, w)`.
pub fn embed(spec: &ManifoldSpec, t: &[f64], w: Complex64) -> Result<EmbeddedPoint> {
    spec.check_domain(t, w)?;
    let mut z = Vec::with_capacity(spec.n);
    for (tj, fj) in t.iter().zip(&spec.graph) {
        let height = fj.eval_unchecked(t, w);
        z.push(Complex64::new(*tj, 0.0) + Complex64::i() * height.re);
    }
    z.push(w);
    let quadric = w * w.conj() + spec.gamma * (w * w + w.conj() * w.conj());
    z.push(quadric + spec.perturbation.eval_unchecked(t, w));
    Ok(EmbeddedPoint { z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    Structure,
    PerturbationOrder,
    GraphOrder,
    GraphNotReal,
    Flatness,
}

/// One violated normal-form invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Relative tolerance for the conjugation symmetry of the graph functions.
const REAL_SYMMETRY_TOL: f64 = 1e-14;

/// Returns one diagnostic per violated invariant; empty iff the manifold is valid.
pub fn validate_spec(spec: &ManifoldSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if spec.n < 2 {
        out.push(Diagnostic::new(
            DiagnosticKind::Structure,
            format!("ambient dimension n = {} must be at least 2", spec.n),
        ));
        return out;
    }
    if !(spec.gamma.is_finite() && spec.gamma >= 0.0) {
        out.push(Diagnostic::new(
            DiagnosticKind::Structure,
            format!("gamma = {} must be finite and nonnegative", spec.gamma),
        ));
    }
    if !(spec.domain.t_max > 0.0 && spec.domain.r_max > 0.0) {
        out.push(Diagnostic::new(
            DiagnosticKind::Structure,
            format!(
                "domain T = {}, R = {} must both be positive",
                spec.domain.t_max, spec.domain.r_max
            ),
        ));
    }
    let k = spec.t_arity();
    if spec.perturbation.t_arity() != k {
        out.push(Diagnostic::new(
            DiagnosticKind::Structure,
            format!("F has t-arity {} but n - 2 = {k}", spec.perturbation.t_arity()),
        ));
    }
    if spec.graph.len() != k {
        out.push(Diagnostic::new(
            DiagnosticKind::Structure,
            format!("expected {k} graph functions, got {}", spec.graph.len()),
        ));
    }

    for (e, _) in spec.perturbation.terms() {
        if e.total_degree() <= 2 {
            out.push(Diagnostic::new(
                DiagnosticKind::PerturbationOrder,
                format!("F order-3 violation at {e}"),
            ));
        }
    }

    for (j, fj) in spec.graph.iter().enumerate() {
        let name = format!("f{}", j + 1);
        if fj.t_arity() != k {
            out.push(Diagnostic::new(
                DiagnosticKind::Structure,
                format!("{name} has t-arity {} but n - 2 = {k}", fj.t_arity()),
            ));
            continue;
        }
        let scale = fj.max_abs_coeff().max(1.0);
        for (e, coeff) in fj.terms() {
            if e.total_degree() <= 1 {
                out.push(Diagnostic::new(
                    DiagnosticKind::GraphOrder,
                    format!("{name} order-2 violation at {e}"),
                ));
            }
            let mirror = fj.coeff(&e.a, e.c, e.b).conj();
            if (coeff - mirror).norm() > REAL_SYMMETRY_TOL * scale {
                out.push(Diagnostic::new(
                    DiagnosticKind::GraphNotReal,
                    format!("{name} is not real-valued: unmatched conjugate term at {e}"),
                ));
            }
            if spec.flat {
                if e.w_degree() > 0 {
                    out.push(Diagnostic::new(
                        DiagnosticKind::Flatness,
                        format!("flatness violation: {name} depends on w at {e}"),
                    ));
                }
                if let Some(later) = e.a.iter().skip(j + 1).position(|&ai| ai > 0) {
                    out.push(Diagnostic::new(
                        DiagnosticKind::Flatness,
                        format!(
                            "flatness violation: {name} depends on t{} at {e}",
                            j + 2 + later
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// True iff every term of `F` has `b + c ≥ 2`.
pub fn order_two_in_w(perturbation: &BiPoly) -> bool {
    perturbation.terms().all(|(e, _)| e.w_degree() >= 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn t2_w_plus_wbar() -> BiPoly {
        BiPoly::monomial(vec![2], 1, 0, c(1.0)) + BiPoly::monomial(vec![2], 0, 1, c(1.0))
    }

    fn flat_spec(f1: BiPoly, perturbation: BiPoly) -> ManifoldSpec {
        ManifoldSpec {
            n: 3,
            gamma: 1.0,
            perturbation,
            graph: vec![f1],
            domain: Domain {
                t_max: 0.5,
                r_max: 0.5,
            },
            flat: true,
        }
    }

    #[test]
    fn embed_unperturbed_surface() {
        let spec = ManifoldSpec::surface(1.0, BiPoly::zero(0), 2.0);
        let p = embed(&spec, &[], c(1.0)).unwrap();
        assert_eq!(p.z, vec![c(1.0), c(3.0)]);
        let p = embed(&spec, &[], c(0.0)).unwrap();
        assert_eq!(p.z, vec![c(0.0), c(0.0)]);
    }

    #[test]
    fn embed_imaginary_w() {
        let spec = ManifoldSpec::surface(0.75, BiPoly::zero(0), 2.0);
        let p = embed(&spec, &[], Complex64::i()).unwrap();
        assert!((p.z[1] - c(-0.5)).norm() < 1e-15);
        assert_eq!(p.z[0], Complex64::i());
    }

    #[test]
    fn embed_rejects_out_of_domain() {
        let spec = ManifoldSpec::surface(1.0, BiPoly::zero(0), 0.5);
        assert!(matches!(embed(&spec, &[], c(0.6)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn validate_reports_order_three_violation() {
        let spec = ManifoldSpec::surface(1.0, BiPoly::monomial(vec![], 2, 0, c(1.0)), 1.0);
        let d = validate_spec(&spec);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "F order-3 violation at (a=0,b=2,c=0)");
    }

    #[test]
    fn validate_reports_flatness_violation() {
        let mut spec = flat_spec(BiPoly::monomial(vec![0, 2], 0, 0, c(1.0)), BiPoly::zero(2));
        spec.n = 4;
        spec.graph.push(BiPoly::zero(2));
        let d = validate_spec(&spec);
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::Flatness
            && d.message.starts_with("flatness violation")));
    }

    #[test]
    fn validate_accepts_flat_fixture() {
        let spec = flat_spec(BiPoly::monomial(vec![2], 0, 0, c(1.0)), t2_w_plus_wbar());
        assert!(validate_spec(&spec).is_empty());
    }

    #[test]
    fn validate_rejects_non_real_graph() {
        let spec = flat_spec(
            BiPoly::monomial(vec![2], 0, 0, Complex64::new(0.0, 1.0)),
            BiPoly::zero(1),
        );
        let d = validate_spec(&spec);
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::GraphNotReal));
    }

    #[test]
    fn order_two_in_w_examples() {
        assert!(!order_two_in_w(&t2_w_plus_wbar()));
        assert!(order_two_in_w(&BiPoly::monomial(vec![], 2, 1, c(1.0))));
        let p = BiPoly::monomial(vec![1], 3, 0, c(1.0)) + BiPoly::monomial(vec![4], 0, 2, c(1.0));
        assert!(order_two_in_w(&p));
    }

    #[test]
    fn slice_phi_includes_quadric() {
        let spec = flat_spec(BiPoly::monomial(vec![2], 0, 0, c(1.0)), t2_w_plus_wbar());
        let phi = spec.slice_phi(&[0.3]).unwrap();
        assert_eq!(phi.coeff(&[], 1, 1), c(1.0));
        assert!((phi.coeff(&[], 1, 0) - c(0.09)).norm() < 1e-15);
    }
}
