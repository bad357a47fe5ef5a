//! Adaptive Gauss-Legendre quadrature for vector-valued integrands.

use super::gauss::GaussLegendre;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Points of the rule on each panel.
    pub points: usize,
    /// Relative noise level of the integrand values; panels whose refinement
    /// changes less than `noise * \int |f|` are accepted.
    pub noise: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_depth: 24,
            points: 8,
            noise: 1e-14,
        }
    }
}

/// Panel estimate and `\int |f|` (max over components).
fn panel<F>(rule: &GaussLegendre, f: &mut F, a: f64, b: f64) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let h = b - a;
    let mut acc: Vec<f64> = Vec::new();
    let mut mag: Vec<f64> = Vec::new();
    for (c, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(a + c * h)?;
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
            mag = vec![0.0; v.len()];
        }
        if v.len() != acc.len() {
            return Err(Error::Dimension("integrand changed length".into()));
        }
        for ((s, m), x) in acc.iter_mut().zip(mag.iter_mut()).zip(&v) {
            *s += w * h * x;
            *m += w * h.abs() * x.abs();
        }
    }
    Ok((acc, norm(&mag)))
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: Vec<f64>,
    tol: f64,
    depth: u32,
    opts: &QuadOptions,
) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let m = 0.5 * (a + b);
    let (left, ml) = panel(rule, f, a, m)?;
    let (right, mr) = panel(rule, f, m, b)?;
    let sum: Vec<f64> = left.iter().zip(&right).map(|(x, y)| x + y).collect();
    let diff = diff_norm(&sum, &whole);
    if diff <= tol || diff <= opts.noise * (ml + mr) || depth >= opts.max_depth {
        return Ok(sum);
    }
    let l = recurse(rule, f, a, m, left, 0.5 * tol, depth + 1, opts)?;
    let r = recurse(rule, f, m, b, right, 0.5 * tol, depth + 1, opts)?;
    Ok(l.iter().zip(&r).map(|(x, y)| x + y).collect())
}

/// `\int_a^b f`, componentwise.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let rule = GaussLegendre::new(opts.points);
    let (whole, _) = panel(&rule, &mut f, a, b)?;
    let tol = opts.abs_tol.max(opts.rel_tol * norm(&whole));
    recurse(&rule, &mut f, a, b, whole, tol, 0, opts)
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(integrate(|x| Ok(vec![f(x)?]), a, b, opts)?[0])
}

/// Running integrals `\int_{knots[0]}^{knots[k]} f` for every knot.
pub fn cumulative<F>(mut f: F, knots: &[f64], opts: &QuadOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(knots.len());
    let mut acc: Option<Vec<f64>> = None;
    for w in knots.windows(2) {
        let part = integrate(&mut f, w[0], w[1], opts)?;
        let a = acc.get_or_insert_with(|| vec![0.0; part.len()]);
        for (s, p) in a.iter_mut().zip(&part) {
            *s += p;
        }
        out.push(a.clone());
    }
    let len = out.first().map_or(0, Vec::len);
    if !knots.is_empty() {
        out.insert(0, vec![0.0; len]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_and_peaked_integrands() {
        let o = QuadOptions::default();
        let v = integrate_scalar(|x| Ok(x.sin()), 0.0, std::f64::consts::PI, &o).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_scalar(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, &o).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let knots = [0.0, 0.5, 1.0, 2.0];
        let c = cumulative(|x| Ok(vec![x, x * x]), &knots, &QuadOptions::default()).unwrap();
        for (k, t) in knots.iter().enumerate() {
            assert!((c[k][0] - t * t / 2.0).abs() < 1e-13);
            assert!((c[k][1] - t * t * t / 3.0).abs() < 1e-13);
        }
    }
}
