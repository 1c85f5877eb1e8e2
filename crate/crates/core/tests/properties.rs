use proptest::prelude::*;

use saddlescape::config::SearchConfig;
use saddlescape::frame::{orthonormalize, Frame};
use saddlescape::ghisd::{ghisd_run, ghisd_step, GhisdStatus};
use saddlescape::landscape::{aligned_distance, is_equivalent};
use saddlescape::state::{Grid, InnerProduct, StateVector};
use saddlescape::systems::{
    eval_energy, eval_field, laplacian_periodic, DynamicalSystem, PhaseField, Quartic2d,
    SymmetrySpec, Translations,
};

const N: usize = 8;

fn grid_state(values: Vec<f64>) -> StateVector {
    StateVector::with_grid(values, Grid::square(N)).unwrap()
}

fn field() -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.5f64..1.5, N * N).prop_map(grid_state)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_field_is_minus_energy_gradient(
        phi in field(),
        dir in field(),
        kappa in 0.005f64..0.05,
    ) {
        let sys = PhaseField::allen_cahn(kappa, N);
        let ip = sys.inner();
        let t = 1e-5;
        let e = |s: f64| eval_energy(&sys, &phi.add_scaled(s, &dir)).unwrap();
        let slope = (e(t) - e(-t)) / (2.0 * t);
        let f = eval_field(&sys, &phi).unwrap();
        let expected = -ip.dot(&f.values, &dir.values);
        prop_assert!((slope - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
            "slope {slope} vs {expected}");
    }

    #[test]
    fn allen_cahn_commutes_with_translations(
        phi in field(),
        dx in 0usize..N,
        dy in 0usize..N,
        kappa in 0.005f64..0.05,
    ) {
        let sys = PhaseField::allen_cahn(kappa, N);
        let lhs = eval_field(&sys, &phi.shifted(dx, dy).unwrap()).unwrap();
        let rhs = eval_field(&sys, &phi).unwrap().shifted(dx, dy).unwrap();
        prop_assert!(close(&lhs.values, &rhs.values, 1e-12));
    }

    #[test]
    fn sheared_field_commutes_with_x_translations(
        phi in field(),
        dx in 0usize..N,
        gamma in 0.0f64..0.5,
    ) {
        let sys = PhaseField::sheared(0.01, gamma, N);
        let lhs = eval_field(&sys, &phi.shifted(dx, 0).unwrap()).unwrap();
        let rhs = eval_field(&sys, &phi).unwrap().shifted(dx, 0).unwrap();
        prop_assert!(close(&lhs.values, &rhs.values, 1e-12));
    }

    #[test]
    fn phase_field_is_odd(phi in field(), gamma in 0.0f64..0.5) {
        let sys = PhaseField::sheared(0.01, gamma, N);
        let lhs = eval_field(&sys, &phi.negated()).unwrap();
        let rhs = eval_field(&sys, &phi).unwrap().negated();
        prop_assert_eq!(lhs.values, rhs.values);
    }

    #[test]
    fn laplacian_is_self_adjoint(u in field(), v in field()) {
        let ip = InnerProduct::new(Grid::square(N).cell_area());
        let lu = laplacian_periodic(&u).unwrap();
        let lv = laplacian_periodic(&v).unwrap();
        let a = ip.dot(&lu.values, &v.values);
        let b = ip.dot(&u.values, &lv.values);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn orthonormalize_gives_orthonormal_frame_with_same_span(
        raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 1..5),
        weight in 0.01f64..2.0,
    ) {
        let ip = InnerProduct::new(weight);
        let input: Vec<StateVector> = raw.iter().cloned().map(StateVector::new).collect();
        let Ok(frame) = orthonormalize(input.clone(), ip) else {
            return Ok(());
        };
        prop_assert!(frame.orthonormality_error(ip) <= 1e-12);
        for v in &input {
            let mut rest = v.values.clone();
            for d in &frame.directions {
                let c = ip.dot(&v.values, &d.values);
                for (r, di) in rest.iter_mut().zip(&d.values) {
                    *r -= c * di;
                }
            }
            prop_assert!(ip.norm(&rest) <= 1e-10 * (1.0 + ip.norm(&v.values)));
        }
    }

    #[test]
    fn reflection_is_an_involution(
        raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 1..4),
        f in prop::collection::vec(-10.0f64..10.0, 5),
    ) {
        let ip = InnerProduct::EUCLIDEAN;
        let Ok(frame) = orthonormalize(raw.into_iter().map(StateVector::new).collect(), ip) else {
            return Ok(());
        };
        let twice = frame.reflect(ip, &frame.reflect(ip, &f));
        prop_assert!(close(&twice, &f, 1e-12));
        let once = frame.reflect(ip, &f);
        prop_assert!((ip.norm(&once) - ip.norm(&f)).abs() <= 1e-12 * (1.0 + ip.norm(&f)));
    }

    #[test]
    fn index_zero_dynamics_is_explicit_euler(
        x0 in prop::collection::vec(-1.8f64..1.8, 2),
        steps in 1usize..200,
    ) {
        let cfg = SearchConfig::default();
        let sys = Quartic2d;
        let mut x = StateVector::new(x0.clone());
        let mut euler = x0;
        for _ in 0..steps {
            x = ghisd_step(&sys, &x, &Frame::empty(), &cfg).unwrap().0;
            let f: Vec<f64> = euler.iter().map(|v| -4.0 * v * (v * v - 1.0)).collect();
            for (e, fi) in euler.iter_mut().zip(f) {
                *e += cfg.alpha * fi;
            }
        }
        prop_assert_eq!(x.values, euler);
    }

    #[test]
    fn index_zero_dynamics_descends_energy(x0 in prop::collection::vec(-1.8f64..1.8, 2)) {
        let cfg = SearchConfig::default();
        let sys = Quartic2d;
        let mut x = StateVector::new(x0);
        let mut e = eval_energy(&sys, &x).unwrap();
        for _ in 0..500 {
            x = ghisd_step(&sys, &x, &Frame::empty(), &cfg).unwrap().0;
            let next = eval_energy(&sys, &x).unwrap();
            prop_assert!(next <= e + 1e-15);
            e = next;
        }
    }

    #[test]
    fn sinks_of_the_quartic_are_the_corners(x0 in prop::collection::vec(0.05f64..1.8, 2)) {
        let cfg = SearchConfig::default();
        let out = ghisd_run(&Quartic2d, &StateVector::new(x0), &Frame::empty(), &cfg).unwrap();
        prop_assert_eq!(out.status, GhisdStatus::Converged);
        prop_assert!(close(&out.final_x.values, &[1.0, 1.0], 1e-6));
    }

    #[test]
    fn node_identity_ignores_translations(
        phi in field(),
        dx in 0usize..N,
        dy in 0usize..N,
    ) {
        let sym = SymmetrySpec { translations: Translations::XAndY, sign_flip: false };
        let moved = phi.shifted(dx, dy).unwrap();
        prop_assert!(is_equivalent(&phi, &moved, sym, 1e-9).unwrap());
        prop_assert!(is_equivalent(&moved, &phi, sym, 1e-9).unwrap());
    }

    #[test]
    fn aligned_distance_is_symmetric(a in field(), b in field()) {
        let sym = SymmetrySpec { translations: Translations::XAndY, sign_flip: false };
        let (ab, _) = aligned_distance(&a, &b, sym, 1e-3).unwrap();
        let (ba, _) = aligned_distance(&b, &a, sym, 1e-3).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        let ip = InnerProduct::new(Grid::square(N).cell_area());
        prop_assert!(ab <= ip.dist(&a.values, &b.values) + 1e-12);
    }
}
