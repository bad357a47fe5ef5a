//! Parameter paths `s in [0, 1] -> x(s)` with first and second derivatives.
//!
//! JSON form:
//!
//! ```json
//! { "kind": "polyline", "samples": [[x1, x2], ...], "closed": false, "interpolation": "cubic" }
//! { "kind": "expr", "exprs": ["0.3 + 0.1*sin(2*PI*s)", "0.5"], "closed": true }
//! ```
//!
//! Polyline samples sit at uniform `s`. Cubic interpolation (the default) is
//! natural for open paths and periodic for closed ones; linear interpolation
//! marks every interior sample as a breakpoint. Expressions are in the single
//! variable `s` and are differentiated symbolically.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use exmex::{Differentiate, Express, FlatEx};
use serde::{Deserialize, Serialize};

use crate::numerics::spline::CubicSpline;
use crate::numerics::stencil::{D1_O4, D2_O4};
use crate::{Error, Result};

/// Position, velocity `dx/ds` and acceleration `d^2x/ds^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

type JetFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

#[derive(Clone)]
pub struct ParamPath {
    dim: usize,
    closed: bool,
    breakpoints: Vec<f64>,
    jet: JetFn,
}

impl fmt::Debug for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamPath")
            .field("dim", &self.dim)
            .field("closed", &self.closed)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

/// `s^5 (126 - 420 s + 540 s^2 - 315 s^3 + 70 s^4)`: a ramp from 0 to 1 whose
/// first four derivatives vanish at both ends.
pub fn smoothstep(s: f64) -> [f64; 3] {
    let p = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];
    let mut v = [0.0; 3];
    for (k, &c) in p.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let k = k as i32;
        v[0] += c * s.powi(k);
        v[1] += c * k as f64 * s.powi(k - 1);
        v[2] += c * (k * (k - 1)) as f64 * s.powi(k - 2);
    }
    v
}

impl ParamPath {
    /// Path from a closure returning position and derivatives.
    pub fn from_jet(
        dim: usize,
        closed: bool,
        f: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            closed,
            breakpoints: Vec::new(),
            jet: Arc::new(f),
        }
    }

    /// Path from a position closure; derivatives by fourth-order differences with step `1e-3`.
    pub fn from_fn(
        dim: usize,
        closed: bool,
        f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let h = 1e-3;
        Self::from_jet(dim, closed, move |s| {
            let x = f(s);
            let mut v = vec![0.0; x.len()];
            let mut a = vec![0.0; x.len()];
            for &(o, w) in &D2_O4 {
                let y = if o == 0.0 { x.clone() } else { f(s + o * h) };
                for i in 0..x.len() {
                    a[i] += w * y[i] / (h * h);
                }
            }
            for &(o, w) in &D1_O4 {
                let y = f(s + o * h);
                for i in 0..x.len() {
                    v[i] += w * y[i] / h;
                }
            }
            Jet { x, v, a }
        })
    }

    pub fn constant(x: Vec<f64>) -> Self {
        let n = x.len();
        Self::from_jet(n, true, move |_| Jet {
            x: x.clone(),
            v: vec![0.0; n],
            a: vec![0.0; n],
        })
    }

    /// Straight segment `a -> b` at constant speed.
    pub fn line(a: Vec<f64>, b: Vec<f64>) -> Self {
        let n = a.len();
        let d: Vec<f64> = b.iter().zip(&a).map(|(b, a)| b - a).collect();
        Self::from_jet(n, false, move |s| Jet {
            x: a.iter().zip(&d).map(|(a, d)| a + s * d).collect(),
            v: d.clone(),
            a: vec![0.0; n],
        })
    }

    /// Segment `a -> b` traversed with [`smoothstep`] timing, so every
    /// velocity and acceleration vanishes at the ends.
    pub fn ramp(a: Vec<f64>, b: Vec<f64>) -> Self {
        let n = a.len();
        let d: Vec<f64> = b.iter().zip(&a).map(|(b, a)| b - a).collect();
        Self::from_jet(n, false, move |s| {
            let [r, dr, ddr] = smoothstep(s);
            Jet {
                x: a.iter().zip(&d).map(|(a, d)| a + r * d).collect(),
                v: d.iter().map(|d| dr * d).collect(),
                a: d.iter().map(|d| ddr * d).collect(),
            }
        })
    }

    /// Closed ellipse `c + u cos(2 pi s) + v sin(2 pi s)`.
    pub fn ellipse(c: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Self {
        let n = c.len();
        let w = std::f64::consts::TAU;
        Self::from_jet(n, true, move |s| {
            let (sn, cs) = (w * s).sin_cos();
            Jet {
                x: (0..n).map(|i| c[i] + u[i] * cs + v[i] * sn).collect(),
                v: (0..n).map(|i| w * (-u[i] * sn + v[i] * cs)).collect(),
                a: (0..n).map(|i| -w * w * (u[i] * cs + v[i] * sn)).collect(),
            }
        })
    }

    /// Cubic interpolation through samples at uniform `s` (periodic when closed).
    pub fn spline(samples: &[Vec<f64>], closed: bool) -> Result<Self> {
        let (dim, knots) = check_samples(samples, closed)?;
        let splines = (0..dim)
            .map(|i| {
                let vals: Vec<f64> = samples.iter().map(|p| p[i]).collect();
                if closed {
                    CubicSpline::periodic(knots.clone(), vals)
                } else {
                    CubicSpline::natural(knots.clone(), vals)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_jet(dim, closed, move |s| {
            let s = if closed { s.rem_euclid(1.0) } else { s };
            let mut j = Jet {
                x: Vec::with_capacity(dim),
                v: Vec::with_capacity(dim),
                a: Vec::with_capacity(dim),
            };
            for sp in &splines {
                let [x, v, a] = sp.eval(s);
                j.x.push(x);
                j.v.push(v);
                j.a.push(a);
            }
            j
        }))
    }

    /// Piecewise-linear interpolation through samples at uniform `s`.
    pub fn polyline(samples: &[Vec<f64>], closed: bool) -> Result<Self> {
        let (dim, knots) = check_samples(samples, closed)?;
        let pts = samples.to_vec();
        let segs = pts.len() - 1;
        let breakpoints = knots[1..segs].to_vec();
        let mut p = Self::from_jet(dim, closed, move |s| {
            let s = if closed { s.rem_euclid(1.0) } else { s };
            let k = ((s * segs as f64).floor() as isize).clamp(0, segs as isize - 1) as usize;
            let t = s * segs as f64 - k as f64;
            Jet {
                x: (0..dim)
                    .map(|i| pts[k][i] + t * (pts[k + 1][i] - pts[k][i]))
                    .collect(),
                v: (0..dim)
                    .map(|i| segs as f64 * (pts[k + 1][i] - pts[k][i]))
                    .collect(),
                a: vec![0.0; dim],
            }
        });
        p.breakpoints = breakpoints;
        Ok(p)
    }

    /// Path from expressions in the variable `s`.
    pub fn expr(exprs: &[String], closed: bool) -> Result<Self> {
        let parse = |e: &str| -> Result<[Option<FlatEx<f64>>; 3]> {
            let f = exmex::parse::<f64>(e)
                .map_err(|err| Error::Config(format!("expression {e:?}: {err}")))?;
            let names = f.var_names().to_vec();
            if names.iter().any(|n| n != "s") {
                return Err(Error::Config(format!(
                    "expression {e:?} may only use the variable s"
                )));
            }
            if names.is_empty() {
                return Ok([Some(f), None, None]);
            }
            let d1 = f
                .clone()
                .partial(0)
                .map_err(|err| Error::Config(format!("{err}")))?;
            let d2 = d1
                .clone()
                .partial(0)
                .map_err(|err| Error::Config(format!("{err}")))?;
            Ok([Some(f), Some(d1), Some(d2)])
        };
        let compiled = exprs.iter().map(|e| parse(e)).collect::<Result<Vec<_>>>()?;
        let ev = |f: &Option<FlatEx<f64>>, s: f64| {
            f.as_ref()
                .map_or(0.0, |f| f.eval_relaxed(&[s]).unwrap_or(f64::NAN))
        };
        let dim = exprs.len();
        let p = Self::from_jet(dim, closed, move |s| Jet {
            x: compiled.iter().map(|c| ev(&c[0], s)).collect(),
            v: compiled.iter().map(|c| ev(&c[1], s)).collect(),
            a: compiled.iter().map(|c| ev(&c[2], s)).collect(),
        });
        p.check_closed()?;
        Ok(p)
    }

    fn check_closed(&self) -> Result<()> {
        if self.closed {
            let (a, b) = (self.point(0.0), self.point(1.0));
            let gap = a
                .iter()
                .zip(&b)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap > 1e-12 * a.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
                return Err(Error::Config(format!(
                    "closed path has x(0) != x(1) (gap {gap:e})"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Interior `s` values where the velocity may jump.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn jet(&self, s: f64) -> Jet {
        (self.jet)(s)
    }

    pub fn point(&self, s: f64) -> Vec<f64> {
        self.jet(s).x
    }

    pub fn velocity(&self, s: f64) -> Vec<f64> {
        self.jet(s).v
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let j = self.jet.clone();
        Self {
            dim: self.dim,
            closed: self.closed,
            breakpoints: self.breakpoints.iter().rev().map(|b| 1.0 - b).collect(),
            jet: Arc::new(move |s| {
                let r = j(1.0 - s);
                Jet {
                    x: r.x,
                    v: r.v.iter().map(|v| -v).collect(),
                    a: r.a,
                }
            }),
        }
    }

    /// `x(sigma(s))` for a monotone map `sigma` of `[0, 1]` onto itself given
    /// with its first two derivatives.
    pub fn reparametrized(&self, sigma: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        let j = self.jet.clone();
        Self {
            dim: self.dim,
            closed: self.closed,
            breakpoints: Vec::new(),
            jet: Arc::new(move |s| {
                let [t, dt, ddt] = sigma(s);
                let r = j(t);
                Jet {
                    v: r.v.iter().map(|v| v * dt).collect(),
                    a: r.a
                        .iter()
                        .zip(&r.v)
                        .map(|(a, v)| a * dt * dt + v * ddt)
                        .collect(),
                    x: r.x,
                }
            }),
        }
    }

    /// Apply a map `x -> y` with Jacobian and Hessian to every point.
    pub fn mapped(
        &self,
        dim: usize,
        map: impl Fn(&[f64]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) + Send + Sync + 'static,
    ) -> Self {
        let j = self.jet.clone();
        Self {
            dim,
            closed: self.closed,
            breakpoints: self.breakpoints.clone(),
            jet: Arc::new(move |s| {
                let r = j(s);
                let (y, jac, hess) = map(&r.x);
                let n = r.x.len();
                let v = (0..dim)
                    .map(|i| (0..n).map(|k| jac[i][k] * r.v[k]).sum())
                    .collect();
                let a = (0..dim)
                    .map(|i| {
                        (0..n).map(|k| jac[i][k] * r.a[k]).sum::<f64>()
                            + (0..n)
                                .flat_map(|k| (0..n).map(move |l| (k, l)))
                                .map(|(k, l)| hess[i][k][l] * r.v[k] * r.v[l])
                                .sum::<f64>()
                    })
                    .collect();
                Jet { x: y, v, a }
            }),
        }
    }
}

fn check_samples(samples: &[Vec<f64>], closed: bool) -> Result<(usize, Vec<f64>)> {
    if samples.len() < 2 {
        return Err(Error::Config("path needs at least 2 samples".into()));
    }
    let dim = samples[0].len();
    if dim == 0
        || samples
            .iter()
            .any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::Config(
            "path samples must be finite with equal length".into(),
        ));
    }
    if closed {
        let gap = samples[0]
            .iter()
            .zip(samples.last().unwrap())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 1e-12 {
            return Err(Error::Config(
                "closed path: first and last samples must coincide".into(),
            ));
        }
    }
    let m = samples.len() - 1;
    Ok((dim, (0..=m).map(|i| i as f64 / m as f64).collect()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub kind: String,
    #[serde(default)]
    pub samples: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub exprs: Option<Vec<String>>,
    #[serde(default)]
    pub closed: bool,
    #[serde(default)]
    pub interpolation: Option<String>,
}

impl PathConfig {
    pub fn build(&self) -> Result<ParamPath> {
        match self.kind.as_str() {
            "polyline" => {
                let samples = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::Config("polyline path needs \"samples\"".into()))?;
                match self.interpolation.as_deref().unwrap_or("cubic") {
                    "cubic" => ParamPath::spline(samples, self.closed),
                    "linear" => ParamPath::polyline(samples, self.closed),
                    other => Err(Error::Config(format!("unknown interpolation {other:?}"))),
                }
            }
            "expr" => {
                let exprs = self
                    .exprs
                    .as_ref()
                    .ok_or_else(|| Error::Config("expr path needs \"exprs\"".into()))?;
                ParamPath::expr(exprs, self.closed)
            }
            other => Err(Error::Config(format!("unknown path kind {other:?}"))),
        }
    }
}

pub fn parse_path(json: &str) -> Result<ParamPath> {
    let cfg: PathConfig =
        serde_json::from_str(json).map_err(|e| Error::Config(format!("path file: {e}")))?;
    cfg.build()
}

pub fn load_path(path: &Path) -> Result<ParamPath> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_path(&text)
}
