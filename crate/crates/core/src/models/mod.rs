//! Parametrized Hamiltonian families and gauge-fixed eigensystems.
//!
//! A [`Tracker`] bundles a family with the tracked level, numerical settings
//! and an optional extra gauge transformation `|n> -> e^{i f(x)} |n>`. All
//! geometry and dynamics routines take a tracker.

mod config;
mod polynomial;
mod three_state;
mod two_level;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::numerics::stencil::{scaled_step, D1_O2};
use crate::{CMat, CVec, Error, Result, C64};

pub use config::{load_model, parse_model, Embedding, ModelConfig};
pub use polynomial::{MatrixPolynomial, Term};
pub use three_state::{three_state, three_state_angular, CanonicalState, ThreeState};
pub use two_level::{Chart, TwoLevel};

/// Smooth map from parameters to Hermitian matrices.
pub trait HamiltonianFamily: Send + Sync {
    /// Hilbert-space dimension `N`.
    fn dim(&self) -> usize;
    /// Number of parameters `n`.
    fn n_params(&self) -> usize;
    /// Characteristic energy scale `Delta`.
    fn energy_scale(&self) -> f64;
    fn eval(&self, x: &[f64]) -> Result<CMat>;
    /// Analytic `dH/dx^mu`, if available.
    fn grad(&self, _x: &[f64], _mu: usize) -> Option<Result<CMat>> {
        None
    }
}

/// Validated parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::DomainError(format!(
                "non-finite coordinates {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for ParameterPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Numerical knobs shared by all routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Degeneracy threshold relative to the energy scale.
    pub gap_tol: f64,
    /// Hermiticity tolerance relative to `max(1, max |H_ij|)`.
    pub hermitian_tol: f64,
    /// Base step of second-order differences of `H` when no analytic gradient exists.
    pub fd_step: f64,
    /// Base step of fourth-order stencils in parameter space.
    pub stencil_step: f64,
    /// Step in the path parameter `s` for time derivatives along paths.
    pub path_step: f64,
    /// Largest admissible condition number of `h` before raising indices.
    pub cond_max: f64,
    /// Tolerance of the transport integrator.
    pub tol_ode: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            hermitian_tol: 1e-12,
            fd_step: 1e-5,
            stencil_step: 1e-3,
            path_step: 1e-3,
            cond_max: 1e10,
            tol_ode: 1e-10,
        }
    }
}

/// Real-valued gauge function `f(x)` applied as `e^{i f(x)}` to the tracked state.
pub type GaugeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Eigen-decomposition at one point with a tracked level.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    pub point: ParameterPoint,
    /// Ascending energies.
    pub energies: DVector<f64>,
    /// Orthonormal eigenvectors as columns, matching `energies`.
    pub states: CMat,
    /// Tracked level.
    pub level: usize,
    /// `min_{m != n} |E_m - E_n|` (infinite for `N = 1`).
    pub gap: f64,
    /// Component of the tracked state used as gauge seed.
    pub seed: usize,
}

impl EigenFrame {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energy(&self) -> f64 {
        self.energies[self.level]
    }

    pub fn state(&self) -> CVec {
        self.states.column(self.level).into_owned()
    }

    /// Multiply the tracked state by `e^{i phi}`.
    pub fn rephase(&mut self, phi: f64) {
        let z = C64::from_polar(1.0, phi);
        for v in self.states.column_mut(self.level).iter_mut() {
            *v *= z;
        }
    }

    /// `sum_{m != n} |m><m|w> / (E_n - E_m)^k` without any orthogonality check.
    pub fn resolvent_raw(&self, k: i32, w: &CVec) -> CVec {
        let en = self.energy();
        let mut out = CVec::zeros(self.dim());
        for m in 0..self.dim() {
            if m == self.level {
                continue;
            }
            let col = self.states.column(m);
            let amp = col.dotc(w) / (en - self.energies[m]).powi(k);
            out.axpy(amp, &col, C64::new(1.0, 0.0));
        }
        out
    }

    /// Project off the tracked state: `(1 - |n><n|) w`.
    pub fn project(&self, w: &CVec) -> CVec {
        let n = self.states.column(self.level);
        let amp = n.dotc(w);
        w - n * amp
    }

    /// Largest residual `|H|m> - E_m|m>|` over all levels.
    pub fn residual(&self, h: &CMat) -> f64 {
        (0..self.dim())
            .map(|m| {
                let v = self.states.column(m);
                (h * v - v * C64::new(self.energies[m], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Which component of the tracked state is made real positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    /// Largest-magnitude component (first one among near-ties).
    Largest,
    /// A fixed component; gives a smooth local gauge where it does not vanish.
    Component(usize),
}

fn largest_component(v: &CVec) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter()
        .position(|z| z.norm() >= (1.0 - 1e-10) * max)
        .unwrap_or(0)
}

fn seed_column(states: &mut CMat, col: usize, j: usize) {
    let z = states[(j, col)];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        for v in states.column_mut(col).iter_mut() {
            *v *= phase;
        }
    }
}

fn hermitian_deviation(h: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..h.nrows() {
        for j in 0..=i {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Check shape and Hermiticity of `h` and return its symmetrized copy.
pub fn checked_hermitian(h: CMat, dim: usize, tol: f64) -> Result<CMat> {
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::Dimension(format!(
            "expected {dim}x{dim} matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(&h);
    if !(dev <= tol * scale) {
        return Err(Error::NonHermitian {
            deviation: dev,
            tol: tol * scale,
        });
    }
    Ok((&h + h.adjoint()) * C64::new(0.5, 0.0))
}

/// Eigenframe of `family` at `x` tracking level `n`, with every eigenvector's
/// largest component made real positive.
pub fn eigensystem(
    family: &dyn HamiltonianFamily,
    x: &[f64],
    n: usize,
    settings: &Settings,
) -> Result<EigenFrame> {
    eigensystem_seeded(family, x, n, settings, Seed::Largest)
}

pub fn eigensystem_seeded(
    family: &dyn HamiltonianFamily,
    x: &[f64],
    n: usize,
    settings: &Settings,
    seed: Seed,
) -> Result<EigenFrame> {
    let dim = family.dim();
    if n >= dim {
        return Err(Error::Config(format!(
            "level {n} out of range for dimension {dim}"
        )));
    }
    if x.len() != family.n_params() {
        return Err(Error::Dimension(format!(
            "expected {} parameters, got {}",
            family.n_params(),
            x.len()
        )));
    }
    let point = ParameterPoint::new(x.to_vec())?;
    let h = checked_hermitian(family.eval(x)?, dim, settings.hermitian_tol)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut states = CMat::zeros(dim, dim);
    for (k, &i) in order.iter().enumerate() {
        states.set_column(k, &eig.eigenvectors.column(i));
        let j = largest_component(&states.column(k).into_owned());
        seed_column(&mut states, k, j);
    }
    let seed_index = match seed {
        Seed::Largest => largest_component(&states.column(n).into_owned()),
        Seed::Component(j) => {
            if j >= dim {
                return Err(Error::Config(format!("seed component {j} out of range")));
            }
            if states[(j, n)].norm() < 1e-8 {
                return Err(Error::FrameMismatch {
                    overlap: states[(j, n)].norm(),
                });
            }
            seed_column(&mut states, n, j);
            j
        }
    };
    let gap = (0..dim)
        .filter(|&m| m != n)
        .map(|m| (energies[m] - energies[n]).abs())
        .fold(f64::INFINITY, f64::min);
    let tol = settings.gap_tol * family.energy_scale();
    if gap <= tol {
        return Err(Error::DegenerateLevel {
            level: n,
            point: x.to_vec(),
            gap,
            tol,
        });
    }
    Ok(EigenFrame {
        point,
        energies,
        states,
        level: n,
        gap,
        seed: seed_index,
    })
}

/// Rephase the tracked state of `frame` so that `<n_ref|n>` is real positive.
pub fn gauge_fix(frame: &EigenFrame, reference: &EigenFrame) -> Result<EigenFrame> {
    let ov = reference.state().dotc(&frame.state());
    if !(ov.norm() > 0.5) {
        return Err(Error::FrameMismatch { overlap: ov.norm() });
    }
    let mut out = frame.clone();
    // Phases below rounding level are left alone so the fix is idempotent.
    if ov.arg().abs() > 4.0 * f64::EPSILON {
        out.rephase(-ov.arg());
    }
    Ok(out)
}

/// `dH/dx^mu`: analytic if the family provides it, otherwise a second-order
/// central difference with step `fd_step * max(1, |x_mu|)`.
pub fn grad_h(
    family: &dyn HamiltonianFamily,
    x: &[f64],
    mu: usize,
    settings: &Settings,
) -> Result<CMat> {
    if mu >= family.n_params() {
        return Err(Error::Dimension(format!(
            "parameter index {mu} out of range"
        )));
    }
    if let Some(g) = family.grad(x, mu) {
        return g;
    }
    let h = scaled_step(settings.fd_step, x[mu])?;
    let mut acc = CMat::zeros(family.dim(), family.dim());
    let mut xs = x.to_vec();
    for &(o, w) in &D1_O2 {
        xs[mu] = x[mu] + o * h;
        acc += family.eval(&xs)? * C64::new(w / h, 0.0);
    }
    Ok(acc)
}

/// A family together with the tracked level, settings and an optional gauge.
#[derive(Clone)]
pub struct Tracker {
    pub family: Arc<dyn HamiltonianFamily>,
    pub level: usize,
    pub settings: Settings,
    gauge: Option<GaugeFn>,
}

impl fmt::Debug for Tracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tracker")
            .field("dim", &self.family.dim())
            .field("n_params", &self.family.n_params())
            .field("level", &self.level)
            .field("settings", &self.settings)
            .field("gauge", &self.gauge.is_some())
            .finish()
    }
}

impl Tracker {
    pub fn new(family: Arc<dyn HamiltonianFamily>, level: usize) -> Self {
        Self {
            family,
            level,
            settings: Settings::default(),
            gauge: None,
        }
    }

    pub fn with_settings(mut self, settings: Settings) -> Self {
        self.settings = settings;
        self
    }

    /// Apply `|n(x)> -> e^{i f(x)} |n(x)>` to every frame this tracker produces.
    pub fn with_gauge(mut self, f: GaugeFn) -> Self {
        self.gauge = Some(f);
        self
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn hamiltonian(&self, x: &[f64]) -> Result<CMat> {
        checked_hermitian(
            self.family.eval(x)?,
            self.dim(),
            self.settings.hermitian_tol,
        )
    }

    /// Frame with the canonical seed (plus gauge function, if any).
    pub fn frame(&self, x: &[f64]) -> Result<EigenFrame> {
        self.frame_seeded(x, Seed::Largest)
    }

    pub fn frame_seeded(&self, x: &[f64], seed: Seed) -> Result<EigenFrame> {
        let mut f = eigensystem_seeded(self.family.as_ref(), x, self.level, &self.settings, seed)?;
        if let Some(g) = &self.gauge {
            f.rephase(g(x));
        }
        Ok(f)
    }

    /// Frame at `x` rephased to align with `reference`.
    pub fn frame_aligned(&self, x: &[f64], reference: &EigenFrame) -> Result<EigenFrame> {
        gauge_fix(&self.frame(x)?, reference)
    }

    pub fn grad_h(&self, x: &[f64], mu: usize) -> Result<CMat> {
        grad_h(self.family.as_ref(), x, mu, &self.settings)
    }
}
