//! One-shot verification suite over the identity, transport and convergence checks.

use std::sync::Arc;

use qgeo::apt::{corrections, recurrence, DrivenSystem};
use qgeo::geometry::{compatibility_from, local_geometry, qgt_at, qgt_derivatives};
use qgeo::models::{load_model, ThreeState, Tracker};
use qgeo::oracle::order_scan;
use qgeo::path::{load_path, ParamPath};
use qgeo::transport::{holonomy, transport};
use qgeo::{CVec, RMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{Format, Global, VerifyArgs};
use crate::commands::tracker_for;
use crate::error::CliError;
use crate::output::{emit, num, resolve_format, to_json_string};

const ALGEBRAIC: f64 = 1e-10;
const ONE_FD: f64 = 1e-6;
const CLOSED_FORM: f64 = 1e-8;
const TRANSPORT: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    /// `value <= threshold`.
    Max,
    /// `value >= threshold`.
    Min,
}

#[derive(Debug)]
struct Check {
    name: String,
    value: f64,
    threshold: f64,
    bound: Bound,
    status: Status,
    note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Check {
    fn json(&self) -> Value {
        json!({
            "name": self.name,
            "value": num(self.value),
            "threshold": num(self.threshold),
            "bound": match self.bound { Bound::Max => "max", Bound::Min => "min" },
            "status": match self.status { Status::Pass => "pass", Status::Fail => "fail", Status::Skipped => "skipped" },
            "note": self.note,
        })
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn run(
        &mut self,
        name: &str,
        threshold: f64,
        bound: Bound,
        f: impl FnOnce() -> qgeo::Result<(f64, String)>,
    ) {
        let check = match f() {
            Ok((value, note)) => {
                let ok = match bound {
                    Bound::Max => value <= threshold,
                    Bound::Min => value >= threshold,
                };
                Check {
                    name: name.into(),
                    value,
                    threshold,
                    bound,
                    status: if ok { Status::Pass } else { Status::Fail },
                    note,
                }
            }
            Err(e) => Check {
                name: name.into(),
                value: f64::NAN,
                threshold,
                bound,
                status: Status::Fail,
                note: e.to_string(),
            },
        };
        log::info!(
            "{} {}",
            check.name,
            if check.status == Status::Pass {
                "pass"
            } else {
                "FAIL"
            }
        );
        self.checks.push(check);
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.checks.push(Check {
            name: name.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            bound: Bound::Max,
            status: Status::Skipped,
            note: why.into(),
        });
    }
}

fn random_canonical(r: &mut ChaCha8Rng) -> Vec<f64> {
    let p1 = r.gen_range(0.2..0.8);
    let p2 = r.gen_range(-0.6..0.6) * p1;
    vec![
        r.gen_range(0.0..std::f64::consts::TAU),
        r.gen_range(0.0..std::f64::consts::TAU),
        p1,
        p2,
    ]
}

/// Metric of the canonical three-level state.
fn g_canonical(x: &[f64]) -> RMat {
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

fn b_canonical() -> RMat {
    let mut b = RMat::zeros(4, 4);
    b[(0, 2)] = -1.0;
    b[(1, 3)] = -1.0;
    b[(2, 0)] = 1.0;
    b[(3, 1)] = 1.0;
    b
}

fn max_abs(m: &RMat) -> f64 {
    m.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Two-parameter slice of the three-level model with invertible QGT.
fn embedded_family() -> ThreeState {
    let linear = RMat::from_row_slice(4, 2, &[1.0, 0.3, 0.2, 1.0, 0.1, 0.05, 0.05, 0.12]);
    let sine = RMat::from_row_slice(4, 2, &[0.0, 0.2, 0.1, 0.0, 0.02, 0.0, 0.0, 0.03]);
    ThreeState::embedded(1.0, vec![0.3, 0.7, 0.55, 0.15], linear, sine)
}

fn identity_checks(suite: &mut Suite, tracker: &Tracker, points: &[Vec<f64>]) {
    let mut reports = Vec::new();
    let mut herm = 0.0f64;
    let mut failure = None;
    for x in points {
        let res = local_geometry(tracker, x).and_then(|geo| {
            let dh = qgt_derivatives(tracker, x)?;
            let h = &geo.qgt.h;
            herm = herm.max(
                (h - h.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            );
            Ok(compatibility_from(&geo, &dh))
        });
        match res {
            Ok(r) => reports.push(r),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let n = points.len();
    let pick = |f: fn(&qgeo::geometry::CompatibilityReport) -> f64| -> qgeo::Result<(f64, String)> {
        if let Some(e) = &failure {
            return Err(e.clone());
        }
        Ok((
            reports.iter().map(f).fold(0.0, f64::max),
            format!("max over {n} points"),
        ))
    };
    suite.run("qgt_hermiticity", ALGEBRAIC, Bound::Max, || {
        pick(|_| 0.0).map(|(_, note)| (herm, note))
    });
    suite.run("upsilon_symmetry", ONE_FD, Bound::Max, || {
        pick(|r| r.symmetry)
    });
    suite.run("identity_dh", ONE_FD, Bound::Max, || pick(|r| r.identity));
    suite.run("identity_real_part", ONE_FD, Bound::Max, || {
        pick(|r| r.real_part)
    });
    suite.run("identity_imag_part", ONE_FD, Bound::Max, || {
        pick(|r| r.imag_part)
    });
}

fn closed_form_checks(
    suite: &mut Suite,
    tracker: &Tracker,
    points: &[Vec<f64>],
    r: &mut ChaCha8Rng,
) {
    suite.run("closed_form_g_B", CLOSED_FORM, Bound::Max, || {
        let mut err = 0.0f64;
        for x in points {
            let q = qgt_at(tracker, x)?;
            err = err
                .max(max_abs(&(&q.g - g_canonical(x))))
                .max(max_abs(&(&q.b - b_canonical())));
        }
        Ok((err, format!("max over {} points", points.len())))
    });
    let samples: Vec<(f64, f64)> = (0..points.len())
        .map(|_| (r.gen_range(0.0..6.0), r.gen_range(0.05..0.95)))
        .collect();
    suite.run("two_level_reduction", CLOSED_FORM, Bound::Max, || {
        let mut linear = RMat::zeros(4, 2);
        linear[(1, 0)] = 1.0;
        linear[(3, 1)] = 1.0;
        let slice = Tracker::new(
            Arc::new(ThreeState::embedded(
                1.0,
                vec![0.0, 0.0, 1.0, 0.0],
                linear,
                RMat::zeros(4, 2),
            )),
            0,
        )
        .with_settings(tracker.settings);
        let mut err = 0.0f64;
        for &(q, p) in &samples {
            let g = qgt_at(&slice, &[q / 2.0, 2.0 * p - 1.0])?.g;
            err = err
                .max((g[(0, 0)] / 4.0 - p * (1.0 - p)).abs())
                .max(g[(0, 1)].abs())
                .max((4.0 * g[(1, 1)] - 1.0 / (4.0 * p * (1.0 - p))).abs());
        }
        Ok((
            err,
            "slice q1 = 0, p1 = 1 against the two-level metric".into(),
        ))
    });
}

fn transport_checks(suite: &mut Suite, tracker: &Tracker, loops: &[ParamPath], r: &mut ChaCha8Rng) {
    let n = tracker.n_params();
    let kets: Vec<(CVec, CVec)> = loops
        .iter()
        .map(|_| {
            let mut v = || {
                CVec::from_fn(n, |_, _| {
                    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
                })
            };
            (v(), v())
        })
        .collect();
    suite.run("transport_compatibility", TRANSPORT, Bound::Max, || {
        let mut worst = 0.0f64;
        for (lp, (u, v)) in loops.iter().zip(&kets) {
            let tu = transport(tracker, lp, u, 2)?.final_components.v;
            let tv = transport(tracker, lp, v, 2)?.final_components.v;
            let h0 = qgt_at(tracker, &lp.point(0.0))?;
            let scale = h0.inner(u, u).re.sqrt() * h0.inner(v, v).re.sqrt();
            worst = worst.max((h0.inner(&tu, &tv) - h0.inner(u, v)).norm() / scale);
        }
        Ok((
            worst,
            format!("relative change of h(u, v) over {} loops", loops.len()),
        ))
    });
    suite.run("holonomy_unitarity", TRANSPORT, Bound::Max, || {
        let mut worst = 0.0f64;
        for lp in loops {
            worst = worst.max(holonomy(tracker, lp)?.unitarity_residual());
        }
        Ok((worst, "max |G^+ h G - h| / max |h|".into()))
    });
}

fn driven_checks(suite: &mut Suite, system: qgeo::Result<DrivenSystem>) {
    let system = match system {
        Ok(s) => s,
        Err(e) => {
            for name in [
                "recurrence_vs_closed_form",
                "convergence_p0",
                "convergence_p1",
                "convergence_p2",
            ] {
                suite.run(name, f64::NAN, Bound::Max, || Err(e.clone()));
            }
            return;
        }
    };
    suite.run("recurrence_vs_closed_form", ONE_FD, Bound::Max, || {
        let mut worst = 0.0f64;
        for k in 0..10 {
            let s = 0.05 + 0.1 * k as f64;
            let a = recurrence(&system, s, 3)?;
            let b = corrections(&system, s, 3)?;
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((&x.ket - &y.ket).norm());
            }
        }
        Ok((
            worst,
            "max |n_k(recurrence) - n_k(closed form)|, k <= 3, over 10 points".into(),
        ))
    });
    let ts = [25.0, 50.0, 100.0, 200.0];
    let samples = [0.25, 0.5, 0.75, 1.0];
    for p in 0..=2 {
        suite.run(
            &format!("convergence_p{p}"),
            p as f64 + 0.7,
            Bound::Min,
            || {
                let fit = order_scan(&system, p, &ts, &samples)?;
                match (fit.slope, fit.r2) {
                    (Some(s), Some(r2)) if r2 >= qgeo::oracle::R2_MIN => {
                        Ok((s, format!("log-log slope, r2 = {r2:.5}")))
                    }
                    (Some(s), Some(r2)) => Err(qgeo::Error::FitRejected { r2, slope: s }),
                    _ => Ok((f64::INFINITY, "errors at the noise floor".into())),
                }
            },
        );
    }
}

pub fn run(global: &Global, a: &VerifyArgs) -> Result<(), CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(global.seed);
    let settings = crate::commands::settings(global)?;
    let mut suite = Suite { checks: Vec::new() };
    let npts = a.points.max(1);
    let ramp = || ParamPath::ramp(vec![0.2, 0.4, 0.35, 0.1], vec![1.4, -0.5, 0.6, -0.15]);

    match &a.model {
        None => {
            let canonical =
                Tracker::new(Arc::new(ThreeState::canonical(1.0)), a.level).with_settings(settings);
            let points: Vec<Vec<f64>> = (0..npts).map(|_| random_canonical(&mut r)).collect();
            identity_checks(&mut suite, &canonical, &points);
            closed_form_checks(&mut suite, &canonical, &points, &mut r);
            let embedded =
                Tracker::new(Arc::new(embedded_family()), a.level).with_settings(settings);
            let loops: Vec<ParamPath> = (0..npts.min(5))
                .map(|_| {
                    let c = vec![r.gen_range(-0.15..0.15), r.gen_range(-0.15..0.15)];
                    let u = vec![r.gen_range(0.05..0.3), r.gen_range(-0.1..0.1)];
                    let v = vec![r.gen_range(-0.1..0.1), r.gen_range(0.05..0.3)];
                    ParamPath::ellipse(c, u, v)
                })
                .collect();
            transport_checks(&mut suite, &embedded, &loops, &mut r);
            let path = match &a.path {
                Some(p) => load_path(p)?,
                None => ramp(),
            };
            driven_checks(&mut suite, DrivenSystem::new(canonical, path, 50.0, 1.0));
        }
        Some(model) => {
            let (cfg, family) = load_model(model)?;
            let tracker = tracker_for(global, &cfg, family, a.level)?;
            let path = match &a.path {
                Some(p) => load_path(p)?,
                None if cfg.kind == "builtin:three_state" && cfg.embedding.is_none() => ramp(),
                None => {
                    return Err(CliError::Usage(
                        "--path is required with a custom model".into(),
                    ))
                }
            };
            if path.dim() != tracker.n_params() {
                return Err(CliError::Usage(format!(
                    "path has dimension {}, model has {} parameters",
                    path.dim(),
                    tracker.n_params()
                )));
            }
            let points: Vec<Vec<f64>> = (0..npts)
                .map(|k| path.point((k as f64 + 0.5) / npts as f64))
                .collect();
            identity_checks(&mut suite, &tracker, &points);
            if cfg.kind == "builtin:three_state" && cfg.embedding.is_none() {
                closed_form_checks(&mut suite, &tracker, &points, &mut r);
            } else {
                suite.skip(
                    "closed_form_g_B",
                    "closed forms exist for the canonical three-state model only",
                );
                suite.skip(
                    "two_level_reduction",
                    "closed forms exist for the canonical three-state model only",
                );
            }
            if path.is_closed() {
                transport_checks(&mut suite, &tracker, std::slice::from_ref(&path), &mut r);
            } else {
                suite.skip("transport_compatibility", "needs a closed path");
                suite.skip("holonomy_unitarity", "needs a closed path");
            }
            driven_checks(&mut suite, DrivenSystem::new(tracker, path, 50.0, 1.0));
        }
    }

    let failed = suite
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .count();
    let text = match resolve_format(global, a.out.as_deref()) {
        Format::Json => to_json_string(&json!({
            "command": "verify",
            "seed": global.seed,
            "checks": suite.checks.iter().map(Check::json).collect::<Vec<_>>(),
            "failed": failed,
            "pass": failed == 0,
        })),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "status", "value", "threshold", "bound", "note"])?;
            for c in &suite.checks {
                let j = c.json();
                w.write_record([
                    c.name.as_str(),
                    j["status"].as_str().unwrap_or_default(),
                    &crate::output::fmt_f64(c.value),
                    &crate::output::fmt_f64(c.threshold),
                    j["bound"].as_str().unwrap_or_default(),
                    &c.note,
                ])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?)
                .expect("CSV is UTF-8")
        }
    };
    if a.out.is_some() || global.format.is_some() || global.csv {
        emit(a.out.as_ref(), &text)?;
    }
    if a.out.is_some() || (global.format.is_none() && !global.csv) {
        for c in &suite.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let cmp = match c.bound {
                Bound::Max => "<=",
                Bound::Min => ">=",
            };
            println!(
                "{tag} {:<26} {:>12.4e} ({cmp} {:.1e})  {}",
                c.name, c.value, c.threshold, c.note
            );
        }
        println!("{} checks, {failed} failed", suite.checks.len());
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}
