mod common;

use common::*;
use proptest::prelude::*;
use qgeo::models::{
    eigensystem, gauge_fix, grad_h, three_state, three_state_angular, CanonicalState,
    HamiltonianFamily, Settings, ThreeState,
};
use rand::Rng;

#[test]
fn ground_energy_matches_characteristic_polynomial() {
    let m = ThreeState::canonical(1.0);
    let x = [0.3, 0.7, 0.6, 0.2];
    let f = eigensystem(&m, &x, 0, &Settings::default()).unwrap();
    let roots = char_poly_roots(&m.eval(&x).unwrap());
    for (e, r) in f.energies.iter().zip(&roots) {
        assert!((e - r).abs() < 1e-10, "{e} vs {r}");
    }
}

#[test]
fn eigen_residual_and_orthonormality_on_grid() {
    let m = ThreeState::canonical(1.0);
    let mut r = rng(1);
    for _ in 0..50 {
        let x = random_canonical(&mut r);
        let f = eigensystem(&m, &x, 0, &Settings::default()).unwrap();
        let h = m.eval(&x).unwrap();
        assert!(f.residual(&h) <= 1e-10 * h.norm());
        let gram = f.states.adjoint() * &f.states;
        assert!((gram - qgeo::CMat::identity(3, 3)).norm() < 1e-10);
        assert!(f.gap > 1.0);
    }
}

#[test]
fn analytic_gradient_matches_richardson() {
    let m = ThreeState::canonical(1.0);
    let mut r = rng(2);
    for _ in 0..10 {
        let x = random_canonical(&mut r);
        for mu in 0..4 {
            let a = grad_h(&m, &x, mu, &Settings::default()).unwrap();
            let b = richardson_grad(&m, &x, mu);
            assert!(max_abs_c(&(&a - &b)) < 1e-8, "mu {mu}");
            assert!(max_abs_c(&(&a - a.adjoint())) < 1e-14);
        }
    }
}

#[test]
fn sweep_alignment_gives_positive_overlaps() {
    let t = three_state_tracker();
    let mut prev = t.frame(&[0.0, 0.0, 0.3, 0.1]).unwrap();
    for k in 1..=100 {
        let s = k as f64 / 100.0;
        let x = [2.0 * s, -s, 0.3 + 0.3 * s, 0.1 - 0.2 * s];
        let f = gauge_fix(&t.frame(&x).unwrap(), &prev).unwrap();
        let ov = prev.state().dotc(&f.state());
        assert!(ov.re > 0.0 && ov.im.abs() < 1e-14);
        prev = f;
    }
}

#[test]
fn angular_and_canonical_forms_agree() {
    let mut r = rng(3);
    for _ in 0..100 {
        let (theta, beta, gamma, alpha): (f64, f64, f64, f64) = (
            r.gen_range(0.0..1.5),
            r.gen_range(0.0..1.5),
            r.gen_range(0.0..6.0),
            r.gen_range(0.0..6.0),
        );
        let p1 = theta.sin().powi(2);
        let c = CanonicalState {
            q1: gamma,
            q2: alpha,
            p1,
            p2: p1 * (2.0 * beta).cos(),
        };
        let a = three_state(c).unwrap();
        let b = three_state_angular(theta, beta, gamma, alpha);
        assert!((a - b).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn canonical_state_has_unit_norm(q1 in 0.0..6.3f64, q2 in 0.0..6.3f64, p1 in 0.0..=1.0f64, t in -1.0..=1.0f64) {
        let v = three_state(CanonicalState { q1, q2, p1, p2: t * p1 }).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-14);
    }
}
