mod common;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use common::*;
use qgeo::geometry::{christoffel, curvature, qgt_at};
use qgeo::models::Chart;
use qgeo::path::ParamPath;
use qgeo::transport::{geometric_phase, holonomy, transport};
use qgeo::{CMat, CVec, C64};
use rand::Rng;

fn latitude_loop(theta: f64) -> ParamPath {
    ParamPath::from_jet(2, true, move |s| qgeo::path::Jet {
        x: vec![theta, TAU * s],
        v: vec![0.0, TAU],
        a: vec![0.0, 0.0],
    })
}

/// Discrete Wilson-loop phase `-arg prod <n_k|n_{k+1}>` on a dense grid.
fn wilson_phase(tracker: &qgeo::models::Tracker, path: &ParamPath, nodes: usize) -> f64 {
    let states: Vec<CVec> = (0..nodes)
        .map(|k| {
            tracker
                .frame(&path.point(k as f64 / nodes as f64))
                .unwrap()
                .state()
        })
        .collect();
    let mut prod = C64::new(1.0, 0.0);
    for k in 0..nodes {
        prod *= states[k].dotc(&states[(k + 1) % nodes]);
        prod /= prod.norm();
    }
    -prod.arg()
}

#[test]
fn equator_and_latitude_phases() {
    let t = two_level_tracker(Chart::Bloch);
    let g = geometric_phase(&t, &latitude_loop(PI / 2.0)).unwrap();
    assert!((g.gamma - PI).abs() < 1e-9, "{g:?}");
    let w = wilson_phase(&t, &latitude_loop(PI / 2.0), 100_000);
    assert!((w.rem_euclid(TAU) - g.gamma).abs() < 1e-8);

    let theta = 0.7;
    let g = geometric_phase(&t, &latitude_loop(theta)).unwrap();
    let expect = (-PI * (1.0 - theta.cos())).rem_euclid(TAU);
    assert!((g.gamma - expect).abs() < 1e-9, "{g:?} vs {expect}");
}

#[test]
fn constant_path_has_zero_phase_and_identity_holonomy() {
    let t = embedded_tracker();
    let p = ParamPath::constant(vec![0.1, 0.2]);
    assert_eq!(geometric_phase(&t, &p).unwrap().gamma, 0.0);
    let h = holonomy(&t, &p).unwrap();
    assert!(max_abs_c(&(h.g - CMat::identity(2, 2))) < 1e-15);
}

#[test]
fn closed_loop_phase_is_gauge_invariant() {
    let t = embedded_tracker();
    let loop_ = ParamPath::ellipse(vec![0.0, 0.1], vec![0.3, 0.1], vec![-0.05, 0.25]);
    let a = geometric_phase(&t, &loop_).unwrap();
    let g = t
        .clone()
        .with_gauge(Arc::new(|x: &[f64]| 2.0 * x[0] + (3.0 * x[1]).cos()));
    let b = geometric_phase(&g, &loop_).unwrap();
    assert!((a.raw - b.raw).abs() < 1e-8, "{a:?} {b:?}");
    let w = wilson_phase(&t, &loop_, 20_000);
    assert!((w.rem_euclid(TAU) - a.gamma).abs() < 1e-6);
}

#[test]
fn transport_preserves_metric_inner_product() {
    let t = embedded_tracker();
    let mut r = rng(20);
    for _ in 0..3 {
        let c0 = vec![r.gen_range(-0.1..0.1), r.gen_range(-0.1..0.1)];
        let loop_ = ParamPath::ellipse(
            c0,
            vec![r.gen_range(0.1..0.3), 0.05],
            vec![0.02, r.gen_range(0.1..0.3)],
        );
        let rv = |r: &mut rand_chacha::ChaCha8Rng| {
            CVec::from_fn(2, |_, _| {
                C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
            })
        };
        let (u, v) = (rv(&mut r), rv(&mut r));
        let tu = transport(&t, &loop_, &u, 5).unwrap();
        let tv = transport(&t, &loop_, &v, 5).unwrap();
        let h0 = qgt_at(&t, &loop_.point(0.0)).unwrap();
        let before = h0.inner(&u, &v);
        let after = h0.inner(&tu.final_components.v, &tv.final_components.v);
        let scale = h0.inner(&u, &u).re.sqrt() * h0.inner(&v, &v).re.sqrt();
        assert!(
            (after - before).norm() < 1e-7 * scale,
            "{}",
            (after - before).norm()
        );
        // and along the way, with the local metric
        for (a, b) in tu.trajectory.iter().zip(&tv.trajectory) {
            let hs = qgt_at(&t, &loop_.point(a.s)).unwrap();
            assert!((hs.inner(&a.v, &b.v) - before).norm() < 1e-7 * scale);
        }
    }
}

#[test]
fn holonomy_columns_reversal_and_unitarity() {
    let t = embedded_tracker();
    let loop_ = ParamPath::ellipse(vec![0.05, 0.0], vec![0.25, 0.0], vec![0.0, 0.2]);
    let h = holonomy(&t, &loop_).unwrap();
    assert!(h.unitarity_residual() < 1e-7);
    assert!(
        max_abs_c(&(&h.g - CMat::identity(2, 2))) > 1e-4,
        "holonomy is trivial"
    );
    for k in 0..2 {
        let e = CVec::from_fn(2, |i, _| {
            if i == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let col = transport(&t, &loop_, &e, 2).unwrap().final_components.v;
        assert!((col - h.g.column(k)).norm() < 1e-8);
    }
    let back = holonomy(&t, &loop_.reversed()).unwrap();
    assert!(max_abs_c(&(&h.g * &back.g - CMat::identity(2, 2))) < 1e-8);
}

#[test]
fn holonomy_matches_product_of_exponentials() {
    let t = embedded_tracker();
    let loop_ = ParamPath::ellipse(vec![0.05, 0.0], vec![0.25, 0.0], vec![0.0, 0.2]);
    let h = holonomy(&t, &loop_).unwrap();
    let n = 10_000;
    let mut g = CMat::identity(2, 2);
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        let jet = loop_.jet(s);
        let c = christoffel(&t, &jet.x).unwrap();
        let a = CMat::from_fn(2, 2, |l, v| {
            (0..2).map(|m| c.second[(l, m, v)] * jet.v[m]).sum::<C64>()
        });
        g = expm(&(a * C64::new(-1.0 / n as f64, 0.0))) * g;
    }
    assert!(max_abs_c(&(g - &h.g)) < 1e-6);
}

#[test]
fn reparametrization_invariance() {
    let t = embedded_tracker();
    let path = ParamPath::line(vec![-0.2, 0.1], vec![0.25, -0.15]);
    let warped = path.reparametrized(|s| {
        let w = TAU * s;
        [
            s + 0.1 * w.sin() / TAU,
            1.0 + 0.1 * w.cos(),
            -0.1 * TAU * w.sin(),
        ]
    });
    let v0 = CVec::from_vec(vec![C64::new(0.3, -0.2), C64::new(1.0, 0.5)]);
    let a = transport(&t, &path, &v0, 2).unwrap().final_components.v;
    let b = transport(&t, &warped, &v0, 2).unwrap().final_components.v;
    assert!((a - b).norm() < 1e-8);
}

#[test]
fn small_square_holonomy_approaches_curvature() {
    let t = embedded_tracker();
    let x0 = [0.05, -0.05];
    let r = curvature(&t, &x0).unwrap();
    let mut rel = Vec::new();
    for eps in [0.02, 0.01] {
        let p = |dx: f64, dy: f64| vec![x0[0] + dx, x0[1] + dy];
        let square = ParamPath::polyline(
            &[
                p(0.0, 0.0),
                p(eps, 0.0),
                p(eps, eps),
                p(0.0, eps),
                p(0.0, 0.0),
            ],
            true,
        )
        .unwrap();
        let h = holonomy(&t, &square).unwrap();
        // G = I - eps^2 R^kappa_{nu 0 1} + O(eps^3)
        let pred = CMat::from_fn(2, 2, |k, v| -r.mixed[(k, v, 0, 1)] * (eps * eps));
        let diff = &h.g - CMat::identity(2, 2) - &pred;
        rel.push(max_abs_c(&diff) / max_abs_c(&pred));
        // transported ket moves by O(eps^2)
        let v0 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let moved = (&h.g * &v0 - &v0).norm();
        assert!(
            moved
                < 10.0 * eps * eps * max_abs_c(&CMat::from_fn(2, 2, |k, v| r.mixed[(k, v, 0, 1)]))
        );
    }
    assert!(rel[0] < 0.2 && rel[1] < 0.6 * rel[0], "{rel:?}");
}
