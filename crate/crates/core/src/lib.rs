//! Numerical toolkit for order-one CR singularities of real `n`-manifolds in
//! `C^n` written in Bishop normal form.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: square-root deviation kernel, Wirtinger jets by finite
//!   differences, certified `C^2` bounds and disk sampling grids.
//! * [`manifold`]: exact polynomials in `(t, w, w̄)` and the normal-form data
//!   model.
//! * [`singular`]: the tangency function on slices, Newton continuation of the
//!   singular locus and Bishop-invariant classification.
//! * [`normalform`]: the chain of holomorphic coordinate changes bringing a
//!   two-dimensional slice to `ζζ̄ + γ(ζ² + ζ̄²) + Ĝ(ζ)`.
//! * [`certify`]: branch solvers over the proper maps, Kallin separation
//!   margins, the radius certificate and the flat induction driver.
//! * [`hull`]: a solver-independent min-max separation probe used as a
//!   numerical cross-check.

pub mod certify;
pub mod error;
pub mod hull;
pub mod manifold;
pub mod normalform;
pub mod numerics;
pub mod singular;

pub use num_complex::Complex64;

pub use certify::{
    certify_flat, certify_radius, choose_epsilon, forward_check, kallin_check_m2,
    kallin_check_m3, lipschitz_audit, solve_branch_f, solve_branch_g, BranchKind,
    BranchSolution, CertifiedRadius, FlatCandidates, FlatCertificate, KallinReport,
    LipschitzAudit, M3Grid, SliceRecord,
};
pub use error::{Error, Result};
pub use hull::{hull_scan, sample_manifold, separate, SampleCloud, SeparationResult};
pub use manifold::{
    embed, order_two_in_w, validate_spec, BiPoly, Diagnostic, DiagnosticKind, Domain,
    EmbeddedPoint, Exponent, ManifoldSpec, Wirtinger,
};
pub use normalform::{
    jet_at, jet_of_poly, normal_form_threshold, reduce, CoordinateChange, SliceNormalForm,
    TaylorJet,
};
pub use numerics::{
    c2_norm_upper, c2_norm_upper_on, sqrt1p_deviation, wirtinger_jet, C2NormBound, C2Partials,
    DiskGrid, JetOptions,
};
pub use singular::{
    b_slice, classify_at, classify_point, locate_eta, trace_locus, Classification, EtaSolution, PointKind,
    SingularLocus,
};
