mod common;

use common::c;
use crhull_core::{sample_manifold, separate, BiPoly, Complex64, DiskGrid, ManifoldSpec, SampleCloud};
use proptest::prelude::*;

fn surface_cloud(gamma: f64, r: f64) -> SampleCloud {
    let spec = ManifoldSpec::surface(gamma, BiPoly::zero(0), r);
    sample_manifold(&spec, &[], &DiskGrid::new(r, 4, 8).unwrap()).unwrap()
}

fn query() -> impl Strategy<Value = Vec<Complex64>> {
    (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64).prop_map(|(a, b, x, y)| vec![c(a, b), c(x, y)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn higher_degree_never_hurts(gamma in 0.0..2.0f64, q in query()) {
        let cloud = surface_cloud(gamma, 0.5);
        let mut prev = f64::INFINITY;
        for d in 1..=4 {
            let res = separate(&cloud, &q, d).unwrap();
            prop_assert!(res.ratio <= prev + 1e-6, "degree {}: {} after {}", d, res.ratio, prev);
            prev = res.ratio;
        }
    }

    #[test]
    fn separating_polynomials_are_witnesses(gamma in 0.0..2.0f64, q in query(), d in 1..4usize) {
        let cloud = surface_cloud(gamma, 0.5);
        let res = separate(&cloud, &q, d).unwrap();
        prop_assert!((res.eval(&q) - 1.0).norm() <= 1e-10);
        prop_assert!((res.reevaluate(&cloud) - res.ratio).abs() <= 1e-10);
        if res.ratio < 1.0 - 1e-6 {
            prop_assert!(res.is_witness(&cloud));
        }
    }

    #[test]
    fn unitary_moves_leave_ratio_alone(
        gamma in 0.0..2.0f64,
        q in query(),
        shift in (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64),
        angles in (0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64, 0.0..1.5f64),
        d in 1..4usize,
    ) {
        let cloud = surface_cloud(gamma, 0.5);
        let (a, b, ph, mix) = angles;
        // U = diag(e^{ia}, e^{ib}) · R(mix) · diag(1, e^{i ph})
        let u = [
            [Complex64::from_polar(mix.cos(), a), -Complex64::from_polar(mix.sin(), a + ph)],
            [Complex64::from_polar(mix.sin(), b), Complex64::from_polar(mix.cos(), b + ph)],
        ];
        let s = [c(shift.0, shift.1), c(shift.2, shift.3)];
        let mv = |p: &[Complex64]| -> Vec<Complex64> {
            (0..2).map(|i| u[i][0] * p[0] + u[i][1] * p[1] + s[i]).collect()
        };
        let moved = SampleCloud::from_points(cloud.points.iter().map(|p| mv(p)).collect()).unwrap();
        let r0 = separate(&cloud, &q, d).unwrap().ratio;
        let r1 = separate(&moved, &mv(&q), d).unwrap().ratio;
        prop_assert!((r0 - r1).abs() < 1e-8, "{} vs {}", r0, r1);
    }
}

#[test]
fn points_of_the_cloud_cannot_be_separated() {
    let cloud = surface_cloud(1.0, 0.5);
    for p in cloud.points.iter().step_by(5) {
        for d in [1, 3] {
            let res = separate(&cloud, p, d).unwrap();
            assert!(res.ratio >= 1.0 - 1e-6, "{}", res.ratio);
        }
    }
}

#[test]
fn flat_cloud_size() {
    let spec = ManifoldSpec {
        n: 3,
        gamma: 1.0,
        perturbation: BiPoly::zero(1),
        graph: vec![BiPoly::monomial(vec![2], 0, 0, c(1.0, 0.0))],
        domain: crhull_core::Domain { t_max: 0.1, r_max: 0.5 },
        flat: true,
    };
    let grid = DiskGrid::new(0.5, 4, 8).unwrap();
    let cloud = sample_manifold(&spec, &[5], &grid).unwrap();
    assert_eq!(cloud.len(), 5 * grid.len());
    for p in &cloud.points {
        let w = p[1];
        let z3 = w * w.conj() + w * w + w.conj() * w.conj();
        assert!((p[2] - z3).norm() <= 1e-14);
        assert!((p[0].im - p[0].re * p[0].re).abs() <= 1e-14);
    }
}
