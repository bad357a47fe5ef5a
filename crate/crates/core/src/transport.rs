//! Berry phase, parallel transport of tangent kets and holonomy along paths.
//!
//! Phases along a path are accumulated in a piecewise smooth gauge: on each
//! segment one component of `|n>` is held real positive (times the tracker's
//! gauge function), and the phase jump between neighbouring segments is
//! subtracted at the switch point. For closed loops the mismatch between the
//! final and initial representatives closes the sum, which makes the result
//! independent of every gauge choice.

use std::collections::HashMap;

use crate::geometry::{berry_connection, christoffel, qgt_at, Qgt};
use crate::models::{EigenFrame, Seed, Tracker};
use crate::numerics::ode::{Collocation, OdeOptions, OdeOutput};
use crate::numerics::quad::{integrate_scalar, QuadOptions};
use crate::path::ParamPath;
use crate::{CMat, CVec, Error, Result, C64};

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    seed: usize,
    /// Accumulated phase at `start`.
    offset: f64,
}

/// Smooth piecewise gauge along a path together with the parallel-transport phase.
#[derive(Debug, Clone)]
pub struct PathGauge {
    tracker: Tracker,
    path: ParamPath,
    segments: Vec<Segment>,
    /// Phase at `s = 1` (without closure term).
    end_phase: f64,
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_depth: 16,
        points: 8,
        noise: 1e-8,
    }
}

impl PathGauge {
    pub fn new(tracker: &Tracker, path: &ParamPath) -> Result<Self> {
        const SCAN: usize = 256;
        let mut segments: Vec<Segment> = Vec::new();
        let mut current: Option<(f64, usize)> = None;
        for i in 0..=SCAN {
            let s = i as f64 / SCAN as f64;
            let f = tracker.frame(&path.point(s))?;
            let n = f.state();
            let max = n.iter().map(|z| z.norm()).fold(0.0, f64::max);
            match current {
                None => current = Some((0.0, f.seed)),
                Some((start, j)) if n[j].norm() < 0.5 * max => {
                    segments.push(Segment {
                        start,
                        end: s,
                        seed: j,
                        offset: 0.0,
                    });
                    current = Some((s, f.seed));
                }
                _ => {}
            }
        }
        let (start, j) = current.expect("scan visits s = 0");
        segments.push(Segment {
            start,
            end: 1.0,
            seed: j,
            offset: 0.0,
        });

        let mut g = Self {
            tracker: tracker.clone(),
            path: path.clone(),
            segments,
            end_phase: 0.0,
        };
        let mut acc = 0.0;
        for k in 0..g.segments.len() {
            g.segments[k].offset = acc;
            let seg = g.segments[k];
            acc += g.integrate_connection(&seg, seg.start, seg.end)?;
            if let Some(next) = g.segments.get(k + 1) {
                let x = path.point(seg.end);
                let old = tracker.frame_seeded(&x, Seed::Component(seg.seed))?.state();
                let new = tracker
                    .frame_seeded(&x, Seed::Component(next.seed))?
                    .state();
                acc -= old.dotc(&new).arg();
            }
        }
        g.end_phase = acc;
        Ok(g)
    }

    fn segment_at(&self, s: f64) -> &Segment {
        self.segments
            .iter()
            .find(|seg| s <= seg.end)
            .unwrap_or_else(|| self.segments.last().unwrap())
    }

    /// `A_mu dx^mu/ds` in the gauge of segment `seg`.
    fn connection_in(&self, seg: &Segment, s: f64) -> Result<f64> {
        let jet = self.path.jet(s);
        if jet.v.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let frame = self
            .tracker
            .frame_seeded(&jet.x, Seed::Component(seg.seed))?;
        let a = berry_connection(&self.tracker, &frame)?;
        Ok(a.iter().zip(&jet.v).map(|(a, v)| a * v).sum())
    }

    fn integrate_connection(&self, seg: &Segment, a: f64, b: f64) -> Result<f64> {
        let mut knots = vec![a];
        knots.extend(
            self.path
                .breakpoints()
                .iter()
                .copied()
                .filter(|&p| p > a && p < b),
        );
        knots.push(b);
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += integrate_scalar(|s| self.connection_in(seg, s), w[0], w[1], &quad_opts())?;
        }
        Ok(total)
    }

    /// Tracked frame at `s` in the path gauge.
    pub fn frame(&self, s: f64) -> Result<EigenFrame> {
        let seg = self.segment_at(s);
        self.tracker
            .frame_seeded(&self.path.point(s), Seed::Component(seg.seed))
    }

    /// `A_mu dx^mu/ds` at `s`.
    pub fn connection(&self, s: f64) -> Result<f64> {
        self.connection_in(self.segment_at(s), s)
    }

    /// Parallel-transport phase `gamma(s)` with `gamma(0) = 0`: the state
    /// `e^{i gamma(s)} |n(s)>` (with `|n(s)>` from [`PathGauge::frame`]) is
    /// continuous and satisfies `<n|d/ds n> = 0`.
    pub fn phase(&self, s: f64) -> Result<f64> {
        let seg = *self.segment_at(s);
        Ok(seg.offset + self.integrate_connection(&seg, seg.start, s)?)
    }

    /// Phase over the whole path; for closed paths includes the closure term.
    pub fn total_phase(&self) -> Result<f64> {
        if !self.path.is_closed() {
            return Ok(self.end_phase);
        }
        let first = self.frame(0.0)?.state();
        let last = self.frame(1.0)?.state();
        Ok(self.end_phase + first.dotc(&last).arg())
    }

    /// Phase of `e^{i gamma(s)} <n(0)|...>` at every `s` in `grid` (ascending),
    /// sharing the quadrature between consecutive points.
    pub fn phases(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(grid.len());
        let mut prev: Option<(f64, f64)> = None;
        for &s in grid {
            let seg = *self.segment_at(s);
            let value = match prev {
                Some((sp, vp)) if sp >= seg.start && sp <= s => {
                    vp + self.integrate_connection(&seg, sp, s)?
                }
                _ => self.phase(s)?,
            };
            out.push(value);
            prev = Some((s, value));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricPhase {
    /// Phase reduced to `[0, 2 pi)`.
    pub gamma: f64,
    /// Unreduced phase.
    pub raw: f64,
    /// `floor(raw / 2 pi)`.
    pub winding: i64,
}

/// Berry phase `gamma = \oint A_mu dx^mu` of a closed path.
pub fn geometric_phase(tracker: &Tracker, path: &ParamPath) -> Result<GeometricPhase> {
    if !path.is_closed() {
        return Err(Error::Config("geometric phase needs a closed path".into()));
    }
    let raw = PathGauge::new(tracker, path)?.total_phase()?;
    let tau = std::f64::consts::TAU;
    let gamma = raw.rem_euclid(tau);
    let winding = (raw / tau).floor() as i64;
    Ok(GeometricPhase {
        gamma: if gamma >= tau { 0.0 } else { gamma },
        raw,
        winding,
    })
}

/// Components `v^lambda` of a tangent ket `v^lambda |D_lambda n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentKetComponents {
    pub v: CVec,
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct TransportResult {
    pub final_components: TangentKetComponents,
    /// Sampled trajectory.
    pub trajectory: Vec<TangentKetComponents>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// `-(A)^lambda_nu = -Upsilon^lambda_{mu nu} dx^mu/ds`.
fn transport_generator(tracker: &Tracker, path: &ParamPath, s: f64) -> Result<CMat> {
    let n = tracker.n_params();
    let jet = path.jet(s);
    if jet.v.iter().all(|v| *v == 0.0) {
        return Ok(CMat::zeros(n, n));
    }
    let c = christoffel(tracker, &jet.x)?;
    Ok(CMat::from_fn(n, n, |l, v| {
        -(0..n).map(|m| c.second[(l, m, v)] * jet.v[m]).sum::<C64>()
    }))
}

/// Integrate `dY/ds = -A(s) Y` over `[0, 1]` with outputs at `outputs`.
pub fn transport_matrix(
    tracker: &Tracker,
    path: &ParamPath,
    y0: &CMat,
    outputs: &[f64],
) -> Result<OdeOutput> {
    let n = tracker.n_params();
    if path.dim() != n || y0.nrows() != n {
        return Err(Error::Dimension(format!(
            "path dim {}, initial rows {}, parameters {n}",
            path.dim(),
            y0.nrows()
        )));
    }
    let mut memo: HashMap<u64, CMat> = HashMap::new();
    let m = |s: f64| -> Result<CMat> {
        if let Some(v) = memo.get(&s.to_bits()) {
            return Ok(v.clone());
        }
        let v = transport_generator(tracker, path, s)?;
        memo.insert(s.to_bits(), v.clone());
        Ok(v)
    };
    let opts = OdeOptions {
        tol: tracker.settings.tol_ode,
        h_init: Some(0.125),
        ..OdeOptions::default()
    };
    Collocation::new(opts.stages).solve(m, 0.0, y0, outputs, path.breakpoints(), &opts)
}

/// Parallel transport `dv^lambda/ds + Upsilon^lambda_{mu nu} (dx^mu/ds) v^nu = 0`.
pub fn transport(
    tracker: &Tracker,
    path: &ParamPath,
    v0: &CVec,
    samples: usize,
) -> Result<TransportResult> {
    let samples = samples.max(2);
    let grid: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1) as f64)
        .collect();
    let y0 = CMat::from_column_slice(v0.len(), 1, v0.as_slice());
    let out = transport_matrix(tracker, path, &y0, &grid[1..])?;
    let mut trajectory = vec![TangentKetComponents {
        v: v0.clone(),
        s: 0.0,
    }];
    for (s, y) in out.times.iter().zip(&out.states) {
        trajectory.push(TangentKetComponents {
            v: y.column(0).into_owned(),
            s: *s,
        });
    }
    Ok(TransportResult {
        final_components: trajectory.last().unwrap().clone(),
        trajectory,
        accepted_steps: out.accepted,
        rejected_steps: out.rejected,
    })
}

#[derive(Debug, Clone)]
pub struct Holonomy {
    /// Path-ordered exponential in the frame `{|D_lambda n(x_0)>}`.
    pub g: CMat,
    /// Quantum geometric tensor at the basepoint.
    pub h0: Qgt,
    pub basepoint: Vec<f64>,
}

impl Holonomy {
    /// `max |G^dagger h G - h| / max |h|`.
    pub fn unitarity_residual(&self) -> f64 {
        let h = &self.h0.h;
        let d = self.g.adjoint() * h * &self.g - h;
        let scale = h
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
    }
}

pub fn holonomy(tracker: &Tracker, path: &ParamPath) -> Result<Holonomy> {
    if !path.is_closed() {
        return Err(Error::Config("holonomy needs a closed path".into()));
    }
    let n = tracker.n_params();
    let out = transport_matrix(tracker, path, &CMat::identity(n, n), &[1.0])?;
    let basepoint = path.point(0.0);
    Ok(Holonomy {
        g: out.states[0].clone(),
        h0: qgt_at(tracker, &basepoint)?,
        basepoint,
    })
}
