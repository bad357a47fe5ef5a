//! Cubic interpolating splines on uniform or non-uniform knots, natural or periodic.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

/// Solve a tridiagonal system in place (Thomas algorithm).
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

impl CubicSpline {
    /// Natural spline (zero second derivative at both ends).
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check(&knots, &values)?;
        let n = knots.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let (mut a, mut b, mut c, mut d) =
                (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
            for i in 1..n - 1 {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                a[i - 1] = h0;
                b[i - 1] = 2.0 * (h0 + h1);
                c[i - 1] = h1;
                d[i - 1] =
                    6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            let x = thomas(&a, &b, &c, &d);
            m[1..n - 1].copy_from_slice(&x);
        }
        Ok(Self { knots, values, m })
    }

    /// Periodic spline; requires `values[0] == values[last]`.
    pub fn periodic(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check(&knots, &values)?;
        let n = knots.len();
        if n < 3 {
            return Err(Error::Config(
                "periodic spline needs at least 3 knots".into(),
            ));
        }
        if (values[0] - values[n - 1]).abs() > 1e-12 * values[0].abs().max(1.0) {
            return Err(Error::Config("periodic spline endpoints differ".into()));
        }
        // Unknowns m_0..m_{k-1} with m_k = m_0, k = n - 1 intervals; dense cyclic solve.
        let k = n - 1;
        let h = |i: usize| knots[i + 1] - knots[i];
        let mut mat = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut rhs = nalgebra::DVector::<f64>::zeros(k);
        for i in 0..k {
            let ip = (i + k - 1) % k;
            let h0 = h(ip);
            let h1 = h(i);
            let y_prev = values[ip];
            let y_next = values[i + 1];
            mat[(i, ip)] += h0;
            mat[(i, i)] += 2.0 * (h0 + h1);
            mat[(i, (i + 1) % k)] += h1;
            rhs[i] = 6.0 * ((y_next - values[i]) / h1 - (values[i] - y_prev) / h0);
        }
        let sol = mat
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Config("singular periodic spline system".into()))?;
        let mut m: Vec<f64> = sol.iter().copied().collect();
        m.push(m[0]);
        Ok(Self { knots, values, m })
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value and first two derivatives at `x` (cubic extrapolation outside the knots).
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let i = self.interval(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let v = a * y0 + b * y1 + ((a.powi(3) - a) * m0 + (b.powi(3) - b) * m1) * h * h / 6.0;
        let d =
            (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let dd = a * m0 + b * m1;
        [v, d, dd]
    }
}

fn check(knots: &[f64], values: &[f64]) -> Result<()> {
    if knots.len() != values.len() || knots.len() < 2 {
        return Err(Error::Config(
            "spline needs >= 2 knots with matching values".into(),
        ));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "spline knots must be strictly increasing".into(),
        ));
    }
    Ok(())
}
