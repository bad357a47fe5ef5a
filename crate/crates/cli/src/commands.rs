//! Thin wrappers over the library operations.

use std::path::Path;

use qgeo::apt::{response, solve, DrivenSystem, Route, P_MAX};
use qgeo::geometry::{compatibility_from, local_geometry, qgt_derivatives};
use qgeo::models::{load_model, ModelConfig, Settings, Tracker};
use qgeo::oracle::{check_t_values, order_scan};
use qgeo::path::{load_path, ParamPath};
use qgeo::transport::{geometric_phase, holonomy as holonomy_of, transport as transport_of};
use qgeo::{CVec, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    AptArgs, ConvergenceArgs, GeometryArgs, Global, HolonomyArgs, ModelArgs, RouteArg,
    TransportArgs,
};
use crate::error::{io_error, CliError};
use crate::output::{cmat, ctensor3, cvec, emit_value, num, reals, rmat, Table};

/// Library settings with the tolerance flags applied.
pub fn settings(global: &Global) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    let flags = [
        ("--gap-tol", global.gap_tol, &mut s.gap_tol),
        ("--fd-step", global.fd_step, &mut s.fd_step),
        ("--tol-ode", global.tol_ode, &mut s.tol_ode),
        ("--cond-max", global.cond_max, &mut s.cond_max),
    ];
    for (name, value, slot) in flags {
        if let Some(v) = value {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
            *slot = v;
        }
    }
    Ok(s)
}

pub fn tracker_for(
    global: &Global,
    cfg: &ModelConfig,
    family: std::sync::Arc<dyn qgeo::models::HamiltonianFamily>,
    level: usize,
) -> Result<Tracker, CliError> {
    if level >= cfg.dim {
        return Err(CliError::Usage(format!(
            "level {level} out of range for dimension {}",
            cfg.dim
        )));
    }
    Ok(Tracker::new(family, level).with_settings(settings(global)?))
}

fn load_tracker(global: &Global, m: &ModelArgs) -> Result<(ModelConfig, Tracker), CliError> {
    let (cfg, family) = load_model(&m.model)?;
    let tracker = tracker_for(global, &cfg, family, m.level)?;
    log::info!(
        "model {} ({} parameters, dimension {}), level {}",
        cfg.kind,
        cfg.parameters,
        cfg.dim,
        m.level
    );
    Ok((cfg, tracker))
}

fn load_path_for(tracker: &Tracker, file: &Path) -> Result<ParamPath, CliError> {
    let path = load_path(file)?;
    if path.dim() != tracker.n_params() {
        return Err(CliError::Usage(format!(
            "path {} has dimension {}, model has {} parameters",
            file.display(),
            path.dim(),
            tracker.n_params()
        )));
    }
    Ok(path)
}

/// `start:end:step` (inclusive end) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse sample list {spec:?}"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            let mut v: Vec<f64> = (0..=n).map(|k| a + k as f64 * step).collect();
            if let Some(last) = v.last_mut() {
                if (b - *last).abs() < 1e-9 * step {
                    *last = b;
                }
            }
            v
        }
        [_] => spec.split(',').map(parse).collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

fn parse_path_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let v = parse_grid(spec)?;
    if v.iter().any(|s| !(0.0..=1.0).contains(s)) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!(
            "path parameters must increase within [0, 1]: {spec:?}"
        )));
    }
    Ok(v)
}

/// Points from CSV rows; a non-numeric first row is taken as a header.
pub fn read_points(file: &Path, n_params: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| io_error(file, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) if p.len() == n_params => points.push(p),
            Ok(p) => {
                return Err(CliError::Usage(format!(
                    "{}: row {} has {} values, expected {n_params}",
                    file.display(),
                    i + 1,
                    p.len()
                )))
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Usage(format!(
                    "{}: row {} is not numeric",
                    file.display(),
                    i + 1
                )))
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Usage(format!("{}: no points", file.display())));
    }
    Ok(points)
}

fn index_names(prefix: &str, dims: &[usize]) -> Vec<String> {
    let mut out = vec![String::new()];
    for &d in dims {
        out = out
            .iter()
            .flat_map(|p| {
                (0..d).map(move |i| {
                    if p.is_empty() {
                        i.to_string()
                    } else {
                        format!("{p},{i}")
                    }
                })
            })
            .collect();
    }
    out.into_iter().map(|i| format!("{prefix}[{i}]")).collect()
}

pub fn geometry(global: &Global, a: &GeometryArgs) -> Result<(), CliError> {
    let (cfg, tracker) = load_tracker(global, &a.model)?;
    let points = read_points(&a.points, tracker.n_params())?;
    let n = tracker.n_params();
    let values: Vec<Value> = points
        .par_iter()
        .map(|x| {
            let geo = local_geometry(&tracker, x)?;
            let dh = qgt_derivatives(&tracker, x)?;
            let rep = compatibility_from(&geo, &dh);
            let h = &geo.qgt.h;
            let herm = (h - h.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let second = match geo.christoffel(tracker.settings.cond_max) {
                Ok(c) => ctensor3(&c.second),
                Err(qgeo::Error::SingularQgt { .. }) => Value::Null,
                Err(e) => return Err(e),
            };
            let value = json!({
                "point": reals(x),
                "energy": num(geo.frame.energy()),
                "gap": num(geo.frame.gap),
                "h": cmat(h),
                "g": rmat(&geo.qgt.g),
                "B": rmat(&geo.qgt.b),
                "upsilon": ctensor3(&geo.first),
                "upsilon_second": second,
                "qgt_condition": num(geo.qgt.condition_number()),
                "residuals": {
                    "hermiticity": num(herm),
                    "identity": num(rep.identity),
                    "real_part": num(rep.real_part),
                    "imag_part": num(rep.imag_part),
                    "symmetry": num(rep.symmetry),
                    "normal_part": num(rep.normal_part),
                },
            });
            Ok(value)
        })
        .collect::<Result<_, qgeo::Error>>()?;
    let doc = json!({ "command": "geometry", "model": cfg.kind, "level": a.model.level, "points": values });
    emit_value(global, a.out.as_ref(), &doc, || geometry_table(n, &doc))
}

/// Row-major flattening of every tensor, one row per point.
fn geometry_table(n: usize, doc: &Value) -> Table {
    let mut header: Vec<String> = (0..n).map(|i| format!("x[{i}]")).collect();
    header.extend(["energy".to_string(), "gap".to_string()]);
    for name in ["h_re", "h_im"] {
        header.extend(index_names(name, &[n, n]));
    }
    header.extend(index_names("g", &[n, n]));
    header.extend(index_names("B", &[n, n]));
    for name in ["upsilon_re", "upsilon_im"] {
        header.extend(index_names(name, &[n, n, n]));
    }
    let res = [
        "hermiticity",
        "identity",
        "real_part",
        "imag_part",
        "symmetry",
        "normal_part",
    ];
    header.extend(res.iter().map(|r| format!("residual_{r}")));
    let mut table = Table::new(header);
    let flat = |v: &Value, out: &mut Vec<f64>| {
        fn walk(v: &Value, out: &mut Vec<f64>) {
            match v {
                Value::Array(a) => a.iter().for_each(|x| walk(x, out)),
                other => out.push(other.as_f64().unwrap_or(f64::NAN)),
            }
        }
        walk(v, out)
    };
    for p in doc["points"].as_array().into_iter().flatten() {
        let mut row = Vec::new();
        flat(&p["point"], &mut row);
        flat(&p["energy"], &mut row);
        flat(&p["gap"], &mut row);
        flat(&p["h"]["re"], &mut row);
        flat(&p["h"]["im"], &mut row);
        flat(&p["g"], &mut row);
        flat(&p["B"], &mut row);
        flat(&p["upsilon"]["re"], &mut row);
        flat(&p["upsilon"]["im"], &mut row);
        for r in res {
            flat(&p["residuals"][r], &mut row);
        }
        table.push(row);
    }
    table
}

/// `[[re, im], ...]` or `[x, ...]`, optionally under a `"components"` key.
pub fn parse_ket(text: &str) -> Result<CVec, CliError> {
    let bad = |why: &str| CliError::Usage(format!("ket file: {why}"));
    let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
    let arr = match &v {
        Value::Object(o) => o
            .get("components")
            .ok_or_else(|| bad("missing \"components\""))?,
        other => other,
    };
    let items = arr.as_array().ok_or_else(|| bad("expected an array"))?;
    let comps: Option<Vec<C64>> = items
        .iter()
        .map(|c| match c {
            Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
            other => other.as_f64().map(|x| C64::new(x, 0.0)),
        })
        .collect();
    let comps = comps.ok_or_else(|| bad("components must be numbers or [re, im] pairs"))?;
    if comps.is_empty() || comps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(bad("components must be finite"));
    }
    Ok(CVec::from_vec(comps))
}

pub fn transport(global: &Global, a: &TransportArgs) -> Result<(), CliError> {
    let (_, tracker) = load_tracker(global, &a.model)?;
    let path = load_path_for(&tracker, &a.path)?;
    let text = std::fs::read_to_string(&a.ket).map_err(|e| io_error(&a.ket, e))?;
    let v0 = parse_ket(&text)?;
    if v0.len() != tracker.n_params() {
        return Err(CliError::Usage(format!(
            "ket has {} components, model has {} parameters",
            v0.len(),
            tracker.n_params()
        )));
    }
    let res = transport_of(&tracker, &path, &v0, a.samples)?;
    log::info!(
        "transport: {} accepted, {} rejected steps",
        res.accepted_steps,
        res.rejected_steps
    );
    let traj: Vec<Value> = res
        .trajectory
        .iter()
        .map(|c| json!({ "s": num(c.s), "v": cvec(&c.v) }))
        .collect();
    let doc = json!({
        "command": "transport",
        "initial": cvec(&v0),
        "final": cvec(&res.final_components.v),
        "trajectory": traj,
        "accepted_steps": res.accepted_steps,
        "rejected_steps": res.rejected_steps,
    });
    let n = v0.len();
    emit_value(global, a.out.as_ref(), &doc, || {
        let mut header = vec!["s".to_string()];
        for k in 0..n {
            header.extend([format!("v[{k}]_re"), format!("v[{k}]_im")]);
        }
        let mut t = Table::new(header);
        for c in &res.trajectory {
            let mut row = vec![c.s];
            row.extend(c.v.iter().flat_map(|z| [z.re, z.im]));
            t.push(row);
        }
        t
    })
}

pub fn holonomy(global: &Global, a: &HolonomyArgs) -> Result<(), CliError> {
    let (_, tracker) = load_tracker(global, &a.model)?;
    let path = load_path_for(&tracker, &a.loop_)?;
    let h = holonomy_of(&tracker, &path)?;
    let phase = geometric_phase(&tracker, &path)?;
    let doc = json!({
        "command": "holonomy",
        "basepoint": reals(&h.basepoint),
        "G": cmat(&h.g),
        "h0": cmat(&h.h0.h),
        "unitarity_residual": num(h.unitarity_residual()),
        "geometric_phase": { "gamma": num(phase.gamma), "raw": num(phase.raw), "winding": phase.winding },
    });
    emit_value(global, a.out.as_ref(), &doc, || {
        let mut t = Table::new(vec!["row".into(), "col".into(), "re".into(), "im".into()]);
        for i in 0..h.g.nrows() {
            for j in 0..h.g.ncols() {
                t.push(vec![i as f64, j as f64, h.g[(i, j)].re, h.g[(i, j)].im]);
            }
        }
        t
    })
}

fn driven(
    global: &Global,
    m: &ModelArgs,
    file: &Path,
    total_time: f64,
    hbar: f64,
) -> Result<DrivenSystem, CliError> {
    let (_, tracker) = load_tracker(global, m)?;
    let path = load_path_for(&tracker, file)?;
    Ok(DrivenSystem::new(tracker, path, total_time, hbar)?)
}

pub fn apt(global: &Global, a: &AptArgs) -> Result<(), CliError> {
    let route = match a.route {
        RouteArg::Recurrence => Route::Recurrence,
        RouteArg::Closed => Route::ClosedForm,
    };
    let max = if route == Route::ClosedForm { 3 } else { P_MAX };
    if a.order > max {
        return Err(CliError::Usage(format!(
            "order {} exceeds {max} for this route",
            a.order
        )));
    }
    let grid = parse_path_grid(&a.times)?;
    let system = driven(global, &a.model, &a.path, a.total_time, a.hbar)?;
    let sol = solve(&system, a.order, &grid, route)?;
    let responses: Vec<_> = grid
        .par_iter()
        .map(|&s| response(&system, s))
        .collect::<Result<_, _>>()?;
    let samples: Vec<Value> = sol
        .samples
        .iter()
        .zip(&responses)
        .map(|(smp, r)| {
            let orders: Vec<Value> = smp
                .orders
                .iter()
                .map(|o| {
                    json!({
                        "order": o.order,
                        "beta": num(o.beta),
                        "alpha": num(o.alpha.unwrap_or(f64::NAN)),
                        "alpha_dot": num(o.alpha_dot),
                        "beta_dot": num(o.beta_dot),
                        "ket": cvec(&o.ket),
                    })
                })
                .collect();
            json!({
                "s": num(smp.s),
                "t": num(smp.t),
                "phi": num(smp.phi),
                "gamma": num(smp.gamma),
                "energy": num(smp.energy),
                "eigenstate": cvec(&smp.n0),
                "state": cvec(&smp.state),
                "orders": orders,
                "response": {
                    "mass2": rmat(&r.mass2),
                    "energy3": num(r.energy3),
                    "en3_terms": reals(&r.en3_terms),
                },
            })
        })
        .collect();
    let doc = json!({
        "command": "apt",
        "order": a.order,
        "route": match route { Route::Recurrence => "recurrence", Route::ClosedForm => "closed" },
        "T": num(a.total_time),
        "hbar": num(a.hbar),
        "epsilon": num(system.epsilon()),
        "samples": samples,
    });
    let dim = system.tracker.dim();
    emit_value(global, a.out.as_ref(), &doc, || {
        let mut header: Vec<String> = ["s", "t", "phi", "gamma", "energy", "energy3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for k in 1..=a.order {
            header.extend([format!("beta_{k}"), format!("alpha_{k}")]);
        }
        for i in 0..dim {
            header.extend([format!("state[{i}]_re"), format!("state[{i}]_im")]);
        }
        let mut t = Table::new(header);
        for (smp, r) in sol.samples.iter().zip(&responses) {
            let mut row = vec![smp.s, smp.t, smp.phi, smp.gamma, smp.energy, r.energy3];
            for o in &smp.orders {
                row.extend([o.beta, o.alpha.unwrap_or(f64::NAN)]);
            }
            row.extend(smp.state.iter().flat_map(|z| [z.re, z.im]));
            t.push(row);
        }
        t
    })
}

pub fn convergence(global: &Global, a: &ConvergenceArgs) -> Result<(), CliError> {
    if a.order > P_MAX {
        return Err(CliError::Usage(format!(
            "order {} exceeds {P_MAX}",
            a.order
        )));
    }
    let ts = parse_grid(&a.total_times)?;
    check_t_values(&ts)?;
    let samples = parse_path_grid(&a.times)?;
    let system = driven(global, &a.model, &a.path, ts[0], a.hbar)?;
    let fit = order_scan(&system, a.order, &ts, &samples)?;
    let pass = fit.passes(0.7);
    let opt = |v: Option<f64>| v.map_or(Value::Null, num);
    let doc = json!({
        "command": "convergence",
        "p": fit.p,
        "T_values": reals(&fit.t_values),
        "epsilons": reals(&fit.epsilons),
        "errors": reals(&fit.errors),
        "errors_phase_min": reals(&fit.errors_phase_min),
        "slope": opt(fit.slope),
        "slope_phase_min": opt(fit.slope_phase_min),
        "r2": opt(fit.r2),
        "required_slope": num(fit.p as f64 + 0.7),
        "max_norm_drift": num(fit.max_norm_drift),
        "pass": pass,
    });
    emit_value(global, a.out.as_ref(), &doc, || {
        let mut t = Table::new(vec![
            "T".into(),
            "epsilon".into(),
            "error".into(),
            "error_phase_min".into(),
        ]);
        for i in 0..fit.t_values.len() {
            t.push(vec![
                fit.t_values[i],
                fit.epsilons[i],
                fit.errors[i],
                fit.errors_phase_min[i],
            ]);
        }
        t
    })?;
    match (fit.slope, fit.r2) {
        (Some(s), Some(r2)) => log::info!(
            "order {}: slope {s:.3}, r2 {r2:.5}, {}",
            fit.p,
            if pass { "pass" } else { "FAIL" }
        ),
        _ => log::info!("order {}: errors at the noise floor", fit.p),
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(1))
    }
}
