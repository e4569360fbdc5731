//! Certificates for local polynomial convexity at hyperbolic points.
//!
//! * [`branch`]: the preimage sheets `S₁`, `S₂` over the proper map of the
//!   surface case, with residual and Lipschitz audits.
//! * [`kallin`]: half-plane margins of the separating polynomials `ψ` and `Q`.
//! * [`radius`]: the `C²` radius certificate for a single slice.
//! * [`flat`]: the per-slice driver for flat hyperbolic points.

pub mod branch;
pub mod flat;
pub mod kallin;
pub mod radius;

pub use branch::{
    branch_derivatives, forward_check, lipschitz_alpha, lipschitz_audit, sample_disk,
    solve_branch_f, solve_branch_g, BranchKind, BranchSolution, LipschitzAudit,
};
pub use flat::{certify_flat, FlatCandidates, FlatCertificate, SliceRecord};
pub use kallin::{
    choose_epsilon, epsilon_expression, kallin_check_m2, kallin_check_m3, m3_sheets, psi,
    psi_field, q_form, GridMeta, KallinReport, M3Grid, PsiSample,
};
pub use radius::{certify_radius, CertifiedRadius};
