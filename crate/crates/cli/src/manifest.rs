//! JSON manifests: a manifold in normal form plus per-run parameters.
//!
//! Term lists are canonicalized on parse (duplicates merged, zeros dropped,
//! exponents sorted), so re-serializing a canonical manifest reproduces it
//! byte for byte and the fingerprint only depends on content.

use crhull_core::manifold::TermRecord;
use crhull_core::{validate_spec, BiPoly, Diagnostic, Domain, ManifoldSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub manifold: ManifoldSection,
    #[serde(default)]
    pub run: RunParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSection {
    pub n: usize,
    pub gamma: f64,
    #[serde(default)]
    pub flat: bool,
    #[serde(rename = "F", default)]
    pub perturbation: Vec<TermRecord>,
    #[serde(default)]
    pub f: Vec<Vec<TermRecord>>,
    pub domain: Domain,
}

/// Command parameters. Flags given on the command line take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    /// Disk grid `[radial, angular]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    /// Points per `t` axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Disk radius; defaults to the certified radius or `R` depending on the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Slice parameter for `classify` and `normalform`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    /// Random pairs for the Lipschitz audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// `(u, v)` half-width and points per axis for `kallin-m3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uv_count: Option<usize>,
    /// Hull-probe query points, each a list of `[re, im]` coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported manifest version {0} (expected {MANIFEST_VERSION})")]
    Version(u32),
    #[error("{path}: {message}")]
    Structure { path: String, message: String },
    #[error("manifold violates normal-form invariants: {}", join_diagnostics(.0))]
    Spec(Vec<Diagnostic>),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

impl ManifestError {
    /// One line per problem, for report diagnostics.
    pub fn messages(&self) -> Vec<String> {
        match self {
            ManifestError::Spec(diags) => diags.iter().map(|d| d.message.clone()).collect(),
            other => vec![other.to_string()],
        }
    }
}

fn canonical_terms(t_arity: usize, path: &str, records: &[TermRecord]) -> Result<Vec<TermRecord>, ManifestError> {
    if let Some((k, r)) = records.iter().enumerate().find(|(_, r)| r.a.len() != t_arity) {
        return Err(ManifestError::Structure {
            path: format!("{path}[{k}].a"),
            message: format!("expected {t_arity} t-exponents, got {}", r.a.len()),
        });
    }
    if let Some((k, _)) = records
        .iter()
        .enumerate()
        .find(|(_, r)| !r.re.is_finite() || !r.im.is_finite())
    {
        return Err(ManifestError::Structure {
            path: format!("{path}[{k}]"),
            message: "coefficient is not finite".into(),
        });
    }
    let poly = BiPoly::from_records(t_arity, records).map_err(|e| ManifestError::Structure {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    Ok(poly.to_records())
}

impl Manifest {
    pub fn t_arity(&self) -> usize {
        self.manifold.n.saturating_sub(2)
    }

    /// The manifold as a core spec (no validation).
    pub fn spec(&self) -> ManifoldSpec {
        let arity = self.t_arity();
        let poly = |records: &[TermRecord]| {
            BiPoly::from_records(arity, records).expect("term arity checked on parse")
        };
        ManifoldSpec {
            n: self.manifold.n,
            gamma: self.manifold.gamma,
            perturbation: poly(&self.manifold.perturbation),
            graph: self.manifold.f.iter().map(|f| poly(f)).collect(),
            domain: self.manifold.domain,
            flat: self.manifold.flat,
        }
    }

    fn canonicalize(&mut self) -> Result<(), ManifestError> {
        let arity = self.t_arity();
        self.manifold.perturbation = canonical_terms(arity, "manifold.F", &self.manifold.perturbation)?;
        for (j, f) in self.manifold.f.iter_mut().enumerate() {
            *f = canonical_terms(arity, &format!("manifold.f[{j}]"), f)?;
        }
        Ok(())
    }

    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        sha256_hex(self.to_canonical_json().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Parses, canonicalizes and validates a manifest.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut manifest: Manifest = serde_json::from_str(text).map_err(|e| ManifestError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if manifest.version != MANIFEST_VERSION {
        return Err(ManifestError::Version(manifest.version));
    }
    manifest.canonicalize()?;
    let diagnostics = validate_spec(&manifest.spec());
    if !diagnostics.is_empty() {
        return Err(ManifestError::Spec(diagnostics));
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "version": 1,
  "manifold": {"n": 2, "gamma": 1.0, "domain": {"T": 1.0, "R": 1.0}}
}"#;

    #[test]
    fn minimal_manifest_is_valid() {
        let m = parse_manifest(MINIMAL).unwrap();
        assert_eq!(m.manifold.n, 2);
        assert!(m.manifold.perturbation.is_empty());
        let again = parse_manifest(&m.to_canonical_json()).unwrap();
        assert_eq!(again.to_canonical_json(), m.to_canonical_json());
    }

    #[test]
    fn quadratic_perturbation_is_rejected() {
        let text = r#"{"version": 1, "manifold": {"n": 2, "gamma": 1.0,
            "F": [{"a": [], "b": 1, "c": 1, "re": 1.0, "im": 0.0}],
            "domain": {"T": 1.0, "R": 1.0}}}"#;
        match parse_manifest(text) {
            Err(ManifestError::Spec(d)) => {
                assert!(d[0].message.contains("F order-3 violation at (a=0,b=1,c=1)"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_position() {
        let err = parse_manifest("{\"version\": 1,\n \"manifold\": {\"n\": 2}}").unwrap_err();
        assert!(matches!(err, ManifestError::Schema { line: 2, .. }), "{err}");
        let err = parse_manifest(r#"{"version": 1, "bogus": 0, "manifold": {}}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn terms_are_sorted_and_merged() {
        let text = r#"{"version": 1, "manifold": {"n": 2, "gamma": 1.0,
            "F": [{"a": [], "b": 3, "c": 0, "re": 1.0, "im": 0.0},
                  {"a": [], "b": 0, "c": 3, "re": 1.0, "im": 0.0},
                  {"a": [], "b": 3, "c": 0, "re": 0.5, "im": 0.0}],
            "domain": {"T": 1.0, "R": 1.0}}}"#;
        let m = parse_manifest(text).unwrap();
        let terms = &m.manifold.perturbation;
        assert_eq!(terms.len(), 2);
        assert_eq!((terms[0].b, terms[0].c), (0, 3));
        assert_eq!(terms[1].re, 1.5);
    }

    #[test]
    fn arity_mismatch_names_the_field() {
        let text = r#"{"version": 1, "manifold": {"n": 3, "gamma": 1.0,
            "F": [{"a": [], "b": 3, "c": 0, "re": 1.0, "im": 0.0}],
            "f": [[]],
            "domain": {"T": 1.0, "R": 1.0}}}"#;
        let err = parse_manifest(text).unwrap_err();
        assert!(err.to_string().starts_with("manifold.F[0].a"), "{err}");
    }
}
