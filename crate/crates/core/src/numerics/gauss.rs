//! Gauss-Legendre nodes and weights on [0, 1] and the matching collocation tableau.

use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    /// `n`-point rule mapped to [0, 1], nodes ascending.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
        Self {
            nodes: idx.iter().map(|&i| nodes[i]).collect(),
            weights: idx.iter().map(|&i| weights[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Collocation matrix `a_ij = \int_0^{c_i} L_j`, with `L_j` the Lagrange basis on the nodes.
    pub fn collocation_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let c = &self.nodes;
        let lagrange = |j: usize, t: f64| {
            (0..n)
                .filter(|&k| k != j)
                .map(|k| (t - c[k]) / (c[j] - c[k]))
                .product::<f64>()
        };
        DMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|q| c[i] * self.weights[q] * lagrange(j, c[i] * c[q]))
                .sum()
        })
    }

    /// Integrate `f` over `[a, b]` with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * f(a + c * h))
            .sum::<f64>()
            * h
    }
}
