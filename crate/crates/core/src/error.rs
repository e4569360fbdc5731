use num_complex::Complex64;
use thiserror::Error;

use crate::manifold::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("|z| = {abs} is outside the square-root deviation domain |z| < 1/4")]
    SqrtDomain { abs: f64 },

    #[error("expected {expected} t-variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("point outside the parameter domain: {0}")]
    OutOfDomain(String),

    #[error("singular Jacobian (det = {det:e}) while locating the tangency point")]
    SingularJacobian { det: f64 },

    #[error("degenerate jet: |beta_11| = {abs:e} is below the degeneracy threshold")]
    DegenerateJet { abs: f64 },

    #[error("jet center is not a tangency point: |beta_01| = {abs:e}")]
    OffLocus { abs: f64 },

    #[error("Bishop invariant {gamma} is not hyperbolic (needs > 1/2)")]
    NonHyperbolic { gamma: f64 },

    #[error("branch argument {z} at zeta = {zeta} leaves |z| < 1/4; point is outside the certified region")]
    BranchDomain { zeta: Complex64, z: Complex64 },

    #[error("perturbation does not vanish to order two in w: {0}")]
    NotOrderTwoInW(String),

    #[error("manifold is not flat: {0}")]
    NotFlat(String),

    #[error("invalid manifold: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSpec(Vec<Diagnostic>),

    #[error("ill-conditioned separation basis: {0}")]
    IllConditioned(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
