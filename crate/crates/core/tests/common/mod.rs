//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use qgeo::models::{
    three_state, CanonicalState, Chart, HamiltonianFamily, ThreeState, Tracker, TwoLevel,
};
use qgeo::{CMat, CVec, RMat, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Interior canonical point away from the chart singularities.
pub fn random_canonical(r: &mut ChaCha8Rng) -> [f64; 4] {
    let p1 = r.gen_range(0.2..0.8);
    let p2 = r.gen_range(-0.6..0.6) * p1;
    [
        r.gen_range(0.0..std::f64::consts::TAU),
        r.gen_range(0.0..std::f64::consts::TAU),
        p1,
        p2,
    ]
}

pub fn three_state_tracker() -> Tracker {
    Tracker::new(Arc::new(ThreeState::canonical(1.0)), 0)
}

/// Two-parameter embedding `x -> (q1, q2, p1, p2)` with invertible `h`.
pub fn embedded_family() -> ThreeState {
    #[rustfmt::skip]
    let linear = DMatrix::from_row_slice(4, 2, &[
        1.0, 0.3,
        0.2, 1.0,
        0.1, 0.05,
        0.05, 0.12,
    ]);
    #[rustfmt::skip]
    let sine = DMatrix::from_row_slice(4, 2, &[
        0.0, 0.2,
        0.1, 0.0,
        0.02, 0.0,
        0.0, 0.03,
    ]);
    ThreeState::embedded(1.0, vec![0.3, 0.7, 0.55, 0.15], linear, sine)
}

pub fn embedded_tracker() -> Tracker {
    Tracker::new(Arc::new(embedded_family()), 0)
}

pub fn two_level_tracker(chart: Chart) -> Tracker {
    Tracker::new(Arc::new(TwoLevel::new(1.0, chart)), 0)
}

/// Closed-form metric of the three-level state in canonical coordinates.
pub fn g_closed_form(x: &[f64]) -> RMat {
    let (p1, p2) = (x[2], x[3]);
    let d = p1 * p1 - p2 * p2;
    #[rustfmt::skip]
    let g = RMat::from_row_slice(4, 4, &[
        p1 * (1.0 - p1), p2 * (1.0 - p1), 0.0, 0.0,
        p2 * (1.0 - p1), p1 - p2 * p2, 0.0, 0.0,
        0.0, 0.0, (p1 - p2 * p2) / (4.0 * (1.0 - p1) * d), -p2 / (4.0 * d),
        0.0, 0.0, -p2 / (4.0 * d), p1 / (4.0 * d),
    ]);
    g
}

/// Closed-form Berry curvature in canonical coordinates.
pub fn b_closed_form() -> RMat {
    #[rustfmt::skip]
    let b = RMat::from_row_slice(4, 4, &[
        0.0, 0.0, -1.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
    ]);
    b
}

/// Closed-form covariant kets `|D_m psi>` in the natural gauge of the canonical state.
pub fn dkets_closed_form(x: &[f64]) -> Vec<CVec> {
    let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
    let e1 = C64::from_polar(1.0, -(q1 - q2));
    let e2 = C64::from_polar(1.0, -(q1 + q2));
    let a = ((p1 - p2) / 2.0).sqrt();
    let b = ((p1 + p2) / 2.0).sqrt();
    let r = (1.0 - p1).sqrt();
    let i = c(0.0, 1.0);
    let v = |a: C64, b: C64, c3: C64| CVec::from_vec(vec![a, b, c3]);
    vec![
        v(
            -i * (1.0 - p1) * a * e1,
            -i * (1.0 - p1) * b * e2,
            i * p1 * r,
        ),
        v(
            i * (1.0 + p2) * a * e1,
            -i * (1.0 - p2) * b * e2,
            i * p2 * r,
        ),
        v(
            0.25 * (2.0 / (p1 - p2)).sqrt() * e1,
            0.25 * (2.0 / (p1 + p2)).sqrt() * e2,
            c(-0.5 / r, 0.0),
        ),
        v(
            -0.25 * (2.0 / (p1 - p2)).sqrt() * e1,
            0.25 * (2.0 / (p1 + p2)).sqrt() * e2,
            c(0.0, 0.0),
        ),
    ]
}

/// Analytic canonical state as a function of coordinates.
pub fn psi(x: &[f64]) -> CVec {
    three_state(CanonicalState::from_slice(x)).unwrap()
}

const D1: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];
const D2: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 16.0 / 12.0),
    (0.0, -30.0 / 12.0),
    (1.0, 16.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

fn shifted(x: &[f64], mu: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[mu] += d;
    y
}

/// `d_mu f` by a fourth-order stencil.
pub fn fd1(f: &dyn Fn(&[f64]) -> CVec, x: &[f64], mu: usize, h: f64) -> CVec {
    D1.iter().fold(CVec::zeros(f(x).len()), |acc, &(o, w)| {
        acc + f(&shifted(x, mu, o * h)) * c(w / h, 0.0)
    })
}

/// `d_mu d_nu f` by fourth-order stencils.
pub fn fd2(f: &dyn Fn(&[f64]) -> CVec, x: &[f64], mu: usize, nu: usize, h: f64) -> CVec {
    if mu == nu {
        return D2.iter().fold(CVec::zeros(f(x).len()), |acc, &(o, w)| {
            acc + f(&shifted(x, mu, o * h)) * c(w / (h * h), 0.0)
        });
    }
    let mut acc = CVec::zeros(f(x).len());
    for &(o1, w1) in &D1 {
        for &(o2, w2) in &D1 {
            let y = shifted(&shifted(x, mu, o1 * h), nu, o2 * h);
            acc += f(&y) * c(w1 * w2 / (h * h), 0.0);
        }
    }
    acc
}

/// Richardson-extrapolated central difference of `dH/dx^mu`.
pub fn richardson_grad(family: &dyn HamiltonianFamily, x: &[f64], mu: usize) -> CMat {
    let central = |h: f64| {
        (family.eval(&shifted(x, mu, h)).unwrap() - family.eval(&shifted(x, mu, -h)).unwrap())
            * c(0.5 / h, 0.0)
    };
    let h = 1e-3;
    let (d1, d2, d3) = (central(h), central(h / 2.0), central(h / 4.0));
    let r1 = (&d2 * c(4.0, 0.0) - &d1) * c(1.0 / 3.0, 0.0);
    let r2 = (&d3 * c(4.0, 0.0) - &d2) * c(1.0 / 3.0, 0.0);
    (r2 * c(16.0, 0.0) - r1) * c(1.0 / 15.0, 0.0)
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut k = 0;
    while norm / 2f64.powi(k) > 0.1 {
        k += 1;
    }
    let b = a * c(1.0 / 2f64.powi(k), 0.0);
    let n = a.nrows();
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for j in 1..30 {
        term = &term * &b * c(1.0 / j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..k {
        sum = &sum * &sum;
    }
    sum
}

/// Eigenvalues of a Hermitian 3x3 matrix from its characteristic polynomial,
/// via the real companion matrix.
pub fn char_poly_roots(h: &CMat) -> Vec<f64> {
    let tr = h.trace().re;
    let h2 = h * h;
    let c1 = 0.5 * (tr * tr - h2.trace().re);
    let det = h.determinant().re;
    // lambda^3 - tr lambda^2 + c1 lambda - det
    let comp = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, det, 1.0, 0.0, -c1, 0.0, 1.0, tr]);
    let mut r: Vec<f64> = comp.complex_eigenvalues().iter().map(|z| z.re).collect();
    r.sort_by(f64::total_cmp);
    r
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_r(m: &RMat) -> f64 {
    m.iter().map(|z| z.abs()).fold(0.0, f64::max)
}

/// Smooth ramp through the interior of the canonical chart.
pub fn smooth_ramp() -> qgeo::path::ParamPath {
    qgeo::path::ParamPath::ramp(vec![0.2, 0.4, 0.35, 0.1], vec![1.4, -0.5, 0.6, -0.15])
}

pub fn ramp_system(total_time: f64) -> qgeo::apt::DrivenSystem {
    qgeo::apt::DrivenSystem::new(three_state_tracker(), smooth_ramp(), total_time, 1.0).unwrap()
}

/// Ground state of `H(x)` from a plain Hermitian eigensolver, phase fixed so
/// that `<reference|n>` is real positive.
pub fn ground_state(
    h: &CMat,
    reference: Option<&CVec>,
) -> (f64, CVec, nalgebra::DVector<f64>, CMat) {
    let eig = h.clone().symmetric_eigen();
    let k = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap();
    let mut n = eig.eigenvectors.column(k).into_owned();
    let r = reference.cloned().unwrap_or_else(|| {
        let j = (0..n.len())
            .max_by(|&a, &b| n[a].norm().total_cmp(&n[b].norm()))
            .unwrap();
        CVec::from_fn(
            n.len(),
            |i, _| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) },
        )
    });
    let ov = r.dotc(&n);
    n *= ov.conj() / ov.norm();
    (eig.eigenvalues[k], n, eig.eigenvalues, eig.eigenvectors)
}
