mod common;

use common::{c, coeff, w_poly};
use crhull_core::{
    b_slice, classify_point, jet_of_poly, locate_eta, reduce, trace_locus, BiPoly, Complex64,
    Domain, ManifoldSpec, PointKind,
};
use proptest::prelude::*;

/// `β₀₀ + β₁₀w + β₂₀w² + β₁₁ww̄ + β₀₂w̄² + (higher)`: a slice whose tangency
/// point is the origin.
fn slice_at_origin() -> impl Strategy<Value = BiPoly> {
    (
        coeff(1.0),
        coeff(1.0),
        coeff(1.0),
        (0.1..2.0f64, -3.2..3.2f64),
        coeff(2.0),
        w_poly(3, 5, 5, 1.0),
    )
        .prop_map(|(b00, b10, b20, (m11, a11), b02, higher)| {
            let mut p = higher;
            p.add_term(vec![], 0, 0, b00);
            p.add_term(vec![], 1, 0, b10);
            p.add_term(vec![], 2, 0, b20);
            p.add_term(vec![], 1, 1, Complex64::from_polar(m11, a11));
            p.add_term(vec![], 0, 2, b02);
            p
        })
}

fn flat_spec(gamma: f64, perturbation: BiPoly) -> ManifoldSpec {
    ManifoldSpec {
        n: 3,
        gamma,
        perturbation,
        graph: vec![BiPoly::monomial(vec![2], 0, 0, c(1.0, 0.0))],
        domain: Domain { t_max: 0.2, r_max: 1.0 },
        flat: true,
    }
}

fn t_perturbation() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec((1..3u32, 0..4u32, 0..4u32, coeff(0.5)), 1..5).prop_map(|terms| {
        let mut p = BiPoly::zero(1);
        for (a, b, cc, k) in terms {
            if a + b + cc >= 3 {
                p.add_term(vec![a], b, cc, k);
            }
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tangency_is_the_antiholomorphic_derivative(
        gamma in 0.0..3.0f64,
        f in t_perturbation(),
        t in -0.2..0.2f64,
        w in coeff(0.7),
    ) {
        let spec = flat_spec(gamma, f.clone());
        let b = b_slice(&spec, &[t], w).unwrap();
        let expected = f.d_wbar().eval(&[t], w).unwrap();
        prop_assert!((b - (w + 2.0 * gamma * w.conj()) - expected).norm() <= 1e-14 * (1.0 + expected.norm()));
    }

    #[test]
    fn converged_locus_points_are_tangencies(gamma in 0.6..2.0f64, f in t_perturbation()) {
        let spec = flat_spec(gamma, f);
        let grid: Vec<Vec<f64>> = (0..11).map(|k| vec![-0.2 + 0.04 * k as f64]).collect();
        let locus = trace_locus(&spec, &grid);
        for (k, t) in grid.iter().enumerate() {
            if locus.converged[k] {
                let eta = locus.eta[k];
                let b = b_slice(&spec, t, eta).unwrap().norm();
                prop_assert!(b <= 1e-12 * (1.0 + eta.norm() + t[0].abs()));
            }
        }
    }

    #[test]
    fn bishop_invariant_ignores_rotation_and_scaling(
        phi in slice_at_origin(),
        sigma in -7.0..7.0f64,
        lambda in (0.1..5.0f64, -3.2..3.2f64),
    ) {
        let base = classify_point(&jet_of_poly(&phi, c(0.0, 0.0)).unwrap()).gamma_t.unwrap();
        let rotated = classify_point(&jet_of_poly(&phi.rotate(sigma), c(0.0, 0.0)).unwrap()).gamma_t.unwrap();
        prop_assert!((base - rotated).abs() <= 1e-10);
        let lam = Complex64::from_polar(lambda.0, lambda.1);
        let scaled = classify_point(&jet_of_poly(&phi.scale(lam), c(0.0, 0.0)).unwrap()).gamma_t.unwrap();
        prop_assert!((base - scaled).abs() <= 1e-10 * (1.0 + base));
    }

    #[test]
    fn reduce_replays_and_agrees_with_classification(phi in slice_at_origin(), sigma in -4.0..4.0f64) {
        let jet = jet_of_poly(&phi, c(0.0, 0.0)).unwrap();
        let form = reduce(&jet).unwrap();
        prop_assert!(form.g_hat.terms().all(|(e, _)| e.w_degree() >= 3));
        prop_assert_eq!(Some(form.gamma_t), classify_point(&jet).gamma_t);
        let diff = form.replay(&phi).max_coeff_diff(&form.target());
        prop_assert!(diff <= 1e-12, "replay differs by {}", diff);
        let turned = reduce(&jet_of_poly(&phi.rotate(sigma), c(0.0, 0.0)).unwrap()).unwrap();
        prop_assert!((turned.gamma_t - form.gamma_t).abs() <= 1e-10);
    }
}

#[test]
fn hyperbolic_fixture_locus_and_kind() {
    let f = BiPoly::monomial(vec![2], 1, 0, c(1.0, 0.0)) + BiPoly::monomial(vec![2], 0, 1, c(1.0, 0.0));
    let spec = flat_spec(1.0, f);
    let sol = locate_eta(&spec, &[0.1], c(0.0, 0.0)).unwrap();
    assert!((sol.eta - c(-0.01 / 3.0, 0.0)).norm() < 1e-14);
    let jet = jet_of_poly(&spec.slice_phi(&[0.1]).unwrap(), sol.eta).unwrap();
    assert_eq!(classify_point(&jet).kind, PointKind::Hyperbolic);
}
