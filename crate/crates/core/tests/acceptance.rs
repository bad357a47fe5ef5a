//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::*;
use qgeo::apt::{corrections, recurrence, response, solve, DrivenSystem, Route};
use qgeo::geometry::{
    compatibility_check, covariant_frame, curvature, local_geometry, qgt, qgt_at,
};
use qgeo::models::{Chart, MatrixPolynomial, Term, ThreeState, Tracker};
use qgeo::numerics::fit_line;
use qgeo::oracle::order_check;
use qgeo::path::ParamPath;
use qgeo::transport::{geometric_phase, holonomy, transport};
use qgeo::{CMat, CVec, Result, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn two_level_metric(r: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = two_level_tracker(Chart::Qp);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (q, p) = (
            r.gen_range(0.0..std::f64::consts::TAU),
            r.gen_range(0.02..0.98),
        );
        let g = qgt(&covariant_frame(&t, &[q, p])?).g;
        let expect = [[p * (1.0 - p), 0.0], [0.0, 1.0 / (4.0 * p * (1.0 - p))]];
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((g[(i, j)] - expect[i][j]).abs());
            }
        }
    }
    outcome(
        worst < 1e-8,
        format!("max |g - g_exact| = {worst:.2e} (< 1e-8) over 100 points"),
    )
}

fn three_state_closed_forms(r: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = three_state_tracker();
    let (mut eg, mut eb) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let x = random_canonical(r);
        let q = qgt_at(&t, &x)?;
        eg = eg.max(max_abs_r(&(&q.g - g_closed_form(&x))));
        eb = eb.max(max_abs_r(&(&q.b - b_closed_form())));
    }
    // (q2, p2) slice at q1 = 0, p1 = 1 against the two-level metric with q = 2 q2, p = (1 + p2) / 2
    let mut linear = nalgebra::DMatrix::zeros(4, 2);
    linear[(1, 0)] = 1.0;
    linear[(3, 1)] = 1.0;
    let slice = Tracker::new(
        Arc::new(ThreeState::embedded(
            1.0,
            vec![0.0, 0.0, 1.0, 0.0],
            linear,
            nalgebra::DMatrix::zeros(4, 2),
        )),
        0,
    );
    let mut er = 0.0f64;
    for _ in 0..20 {
        let (q, p) = (r.gen_range(0.0..6.0), r.gen_range(0.05..0.95));
        let g3 = qgt_at(&slice, &[q / 2.0, 2.0 * p - 1.0])?.g;
        // chain rule: d(q2, p2)/d(q, p) = diag(1/2, 2)
        let g2 = [g3[(0, 0)] / 4.0, g3[(0, 1)], 4.0 * g3[(1, 1)]];
        er = er
            .max((g2[0] - p * (1.0 - p)).abs())
            .max(g2[1].abs())
            .max((g2[2] - 1.0 / (4.0 * p * (1.0 - p))).abs());
    }
    let pass = eg < 1e-8 && eb < 1e-8 && er < 1e-8;
    outcome(
        pass,
        format!("g err {eg:.2e}, B err {eb:.2e}, two-level reduction err {er:.2e} (each < 1e-8)"),
    )
}

fn compatibility_identities(r: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = three_state_tracker();
    let (mut id, mut re, mut im) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let rep = compatibility_check(&t, &random_canonical(r))?;
        id = id.max(rep.identity);
        re = re.max(rep.real_part);
        im = im.max(rep.imag_part);
    }
    let pass = id < 1e-6 && re < 1e-6 && im < 1e-6;
    outcome(
        pass,
        format!("dh = Y + Y* {id:.2e}, Re Y {re:.2e}, Im Y {im:.2e} (each < 1e-6) over 20 points"),
    )
}

fn c_identity(r: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = three_state_tracker();
    let h = 1e-3;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random_canonical(r);
        let geo = local_geometry(&t, &x)?;
        let f = |y: &[f64]| psi(y);
        let p0 = psi(&x);
        let d: Vec<CVec> = (0..4).map(|m| fd1(&f, &x, m, h)).collect();
        let a: Vec<f64> = d.iter().map(|dm| -p0.dotc(dm).im).collect();
        let g = g_closed_form(&x);
        for l in 0..4 {
            for m in 0..4 {
                for v in 0..4 {
                    let dd = fd2(&f, &x, m, v, h);
                    let expect = d[l].dotc(&dd).im
                        + a[l] * g[(m, v)]
                        + a[m] * g[(l, v)]
                        + a[v] * g[(l, m)]
                        + a[l] * a[m] * a[v];
                    worst = worst.max((geo.first[(l, m, v)].im - expect).abs());
                }
            }
        }
    }
    outcome(
        worst < 1e-6,
        format!("max |C - C_formula| = {worst:.2e} (< 1e-6) over 20 points"),
    )
}

fn transport_compatibility(r: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = embedded_tracker();
    let (mut inner, mut unit) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let c0 = vec![r.gen_range(-0.15..0.15), r.gen_range(-0.15..0.15)];
        let u = vec![r.gen_range(0.05..0.3), r.gen_range(-0.1..0.1)];
        let v = vec![r.gen_range(-0.1..0.1), r.gen_range(0.05..0.3)];
        let loop_ = ParamPath::ellipse(c0, u, v);
        let mut rv = || {
            CVec::from_fn(2, |_, _| {
                C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
            })
        };
        let (a, b) = (rv(), rv());
        let ta = transport(&t, &loop_, &a, 2)?.final_components.v;
        let tb = transport(&t, &loop_, &b, 2)?.final_components.v;
        let h0 = qgt_at(&t, &loop_.point(0.0))?;
        let scale = h0.inner(&a, &a).re.sqrt() * h0.inner(&b, &b).re.sqrt();
        inner = inner.max((h0.inner(&ta, &tb) - h0.inner(&a, &b)).norm() / scale);
        unit = unit.max(holonomy(&t, &loop_)?.unitarity_residual());
    }
    let pass = inner < 1e-7 && unit < 1e-7;
    outcome(pass, format!("|dh(u,v)| / (|u||v|) = {inner:.2e}, |G^+hG - h| / |h| = {unit:.2e} (each < 1e-7) over 10 loops"))
}

fn curvature_symmetries(r: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = embedded_tracker();
    let (mut anti, mut herm) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let x = [r.gen_range(-0.2..0.2), r.gen_range(-0.2..0.2)];
        let c = curvature(&t, &x)?;
        anti = anti.max(c.antisymmetry_residual());
        herm = herm.max(c.anti_hermiticity_residual());
    }
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let terms = vec![
        Term {
            coeff: CMat::from_row_slice(2, 2, &[one, z, z, -one]),
            powers: vec![0],
        },
        Term {
            coeff: CMat::from_row_slice(2, 2, &[z, C64::new(0.5, -0.2), C64::new(0.5, 0.2), z]),
            powers: vec![1],
        },
        Term {
            coeff: CMat::from_row_slice(
                2,
                2,
                &[
                    C64::new(0.1, 0.0),
                    C64::new(0.0, 0.3),
                    C64::new(0.0, -0.3),
                    z,
                ],
            ),
            powers: vec![2],
        },
    ];
    let line = Tracker::new(Arc::new(MatrixPolynomial::new(2, 1, 1.0, terms)?), 0);
    let mut zero = 0.0f64;
    for x in [-0.4, 0.1, 0.7] {
        zero = zero.max(qgeo::tensor::max_abs(
            curvature(&line, &[x])?.covariant.as_slice(),
        ));
    }
    let pass = anti < 1e-5 && herm < 1e-5 && zero == 0.0;
    outcome(pass, format!("antisymmetry {anti:.2e}, anti-Hermiticity {herm:.2e} (each < 1e-5); one-parameter |R| = {zero:e}"))
}

fn convergence_orders(_r: &mut ChaCha8Rng) -> Result<Outcome> {
    let sys = ramp_system(50.0);
    let ts = [25.0, 50.0, 100.0, 200.0];
    let samples = [0.25, 0.5, 0.75, 1.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for p in 0..=3 {
        let fit = order_check(&sys, p, &ts, &samples)?;
        let (slope, r2) = (fit.slope.unwrap_or(f64::NAN), fit.r2.unwrap_or(f64::NAN));
        pass &= slope >= p as f64 + 0.7 && r2 >= 0.98;
        parts.push(format!(
            "p={p}: slope {slope:.3} (>= {:.1}), r2 {r2:.5}",
            p as f64 + 0.7
        ));
    }
    outcome(pass, parts.join("; "))
}

fn recurrence_equivalence(_r: &mut ChaCha8Rng) -> Result<Outcome> {
    let sys = ramp_system(40.0);
    let mut worst = [0.0f64; 2];
    let mut rel = [0.0f64; 2];
    for k in 0..10 {
        let s = 0.05 + 0.1 * k as f64;
        let rec = recurrence(&sys, s, 3)?;
        let closed = corrections(&sys, s, 3)?;
        for (i, o) in [1usize, 2].iter().enumerate() {
            let d = (&rec[*o].ket - &closed[*o].ket).norm();
            worst[i] = worst[i].max(d);
            rel[i] = rel[i].max(d / closed[*o].ket.norm());
        }
    }
    let pass = worst[0] < 1e-6 && worst[1] < 1e-6;
    outcome(
        pass,
        format!(
            "|n2 diff| {:.2e} (rel {:.2e}), |n3 diff| {:.2e} (rel {:.2e}) (each < 1e-6) over 10 points",
            worst[0], rel[0], worst[1], rel[1]
        ),
    )
}

fn energy_expansion(_r: &mut ChaCha8Rng) -> Result<Outcome> {
    let base = ramp_system(50.0);
    let ts = [25.0, 50.0, 100.0, 250.0];
    let mut worst_slope = f64::INFINITY;
    let mut min_mass = f64::INFINITY;
    for s in [0.3, 0.5, 0.7] {
        let (mut lx, mut ly) = (Vec::new(), Vec::new());
        for &tt in &ts {
            let sys = base.with_total_time(tt);
            let state = solve(&sys, 2, &[s], Route::Recurrence)?
                .samples
                .remove(0)
                .state;
            let h = sys.tracker.hamiltonian(&sys.path.point(s))?;
            let e = (state.dotc(&(&h * &state)) / state.dotc(&state)).re;
            let resp = response(&sys, s)?;
            lx.push(sys.epsilon().ln());
            ly.push((e - resp.energy3).abs().ln());
            let m = resp.mass2.clone();
            min_mass = min_mass.min(m.symmetric_eigenvalues().min());
            if (&m - m.transpose()).abs().max() > 0.0 {
                min_mass = f64::NEG_INFINITY;
            }
        }
        worst_slope = worst_slope.min(fit_line(&lx, &ly).slope);
    }
    let pass = worst_slope >= 3.7 && min_mass >= -1e-12;
    outcome(pass, format!("min slope {worst_slope:.3} (>= 3.7) over T in 25..250; min eigenvalue of M2 {min_mass:.3e} (>= 0)"))
}

fn gauge_invariance(_r: &mut ChaCha8Rng) -> Result<Outcome> {
    let f: qgeo::models::GaugeFn =
        Arc::new(|x: &[f64]| 0.9 * x[0] - 1.7 * x[1].sin() + 0.5 * x[0] * x[1]);
    let (t, g) = (embedded_tracker(), embedded_tracker().with_gauge(f));
    let mut geo = 0.0f64;
    for x in [[0.1, -0.05], [-0.12, 0.18]] {
        let (a, b) = (local_geometry(&t, &x)?, local_geometry(&g, &x)?);
        geo = geo.max(max_abs_c(&(&a.qgt.h - &b.qgt.h)));
        for (u, v) in a.first.as_slice().iter().zip(b.first.as_slice()) {
            geo = geo.max((u - v).norm());
        }
        let (ra, rb) = (curvature(&t, &x)?, curvature(&g, &x)?);
        for (u, v) in ra.covariant.as_slice().iter().zip(rb.covariant.as_slice()) {
            geo = geo.max((u - v).norm());
        }
    }
    let loop_ = ParamPath::ellipse(vec![0.0, 0.05], vec![0.25, 0.05], vec![-0.05, 0.2]);
    let phase = (geometric_phase(&t, &loop_)?.raw - geometric_phase(&g, &loop_)?.raw).abs();

    let f3: qgeo::models::GaugeFn =
        Arc::new(|x: &[f64]| 0.7 * x[0] - 1.3 * (x[2] * x[3]).sin() + x[1] * x[1]);
    let plain = ramp_system(60.0);
    let gauged = DrivenSystem::new(
        three_state_tracker().with_gauge(f3),
        smooth_ramp(),
        60.0,
        1.0,
    )?;
    let probes = [
        CVec::from_vec(vec![
            C64::new(0.6, 0.1),
            C64::new(-0.2, 0.5),
            C64::new(0.3, -0.4),
        ]),
        CVec::from_vec(vec![
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]),
    ];
    let grid = [0.2, 0.5, 0.8, 1.0];
    let mut obs = 0.0f64;
    for p in 0..=3 {
        let a = solve(&plain, p, &grid, Route::Recurrence)?;
        let b = solve(&gauged, p, &grid, Route::Recurrence)?;
        for (x, y) in a.samples.iter().zip(&b.samples) {
            for phi in &probes {
                obs =
                    obs.max((phi.dotc(&x.state).norm_sqr() - phi.dotc(&y.state).norm_sqr()).abs());
            }
        }
    }
    let pass = geo < 1e-8 && phase < 1e-8 && obs < 1e-8;
    outcome(pass, format!("h, Y, R change {geo:.2e}; loop phase {phase:.2e}; |<phi|psi(p)>|^2 {obs:.2e} (each < 1e-8)"))
}

type Check = fn(&mut ChaCha8Rng) -> Result<Outcome>;

/// Name, runtime budget in seconds, check.
const CHECKS: [(&str, Option<f64>, Check); 10] = [
    ("two-level metric", Some(1.0), two_level_metric),
    (
        "three-state closed forms",
        Some(5.0),
        three_state_closed_forms,
    ),
    (
        "compatibility identities",
        Some(10.0),
        compatibility_identities,
    ),
    ("C identity", None, c_identity),
    (
        "parallel-transport compatibility",
        Some(30.0),
        transport_compatibility,
    ),
    ("curvature symmetries", None, curvature_symmetries),
    ("APT convergence orders", Some(120.0), convergence_orders),
    ("recurrence equivalence", None, recurrence_equivalence),
    ("energy expansion", Some(120.0), energy_expansion),
    ("gauge invariance", None, gauge_invariance),
];

fn main() {
    let mut r = rng(SEED);
    let mut failures = 0;
    for (i, (name, budget, check)) in CHECKS.iter().enumerate() {
        let start = Instant::now();
        let res = check(&mut r);
        let secs = start.elapsed().as_secs_f64();
        let timing = match budget {
            Some(b) => format!("{secs:.2}s (budget {b}s)"),
            None => format!("{secs:.2}s"),
        };
        let (pass, detail) = match res {
            Ok(o) => (o.pass && budget.is_none_or(|b| secs < b), o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail}; {timing}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CHECKS.len() - failures,
        CHECKS.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
