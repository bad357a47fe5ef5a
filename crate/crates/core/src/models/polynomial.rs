//! Matrix-polynomial families `H(x) = sum_k M_k prod_mu (x^mu)^{a_k,mu}`.

use super::HamiltonianFamily;
use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: CMat,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct MatrixPolynomial {
    dim: usize,
    n_params: usize,
    delta: f64,
    terms: Vec<Term>,
}

impl MatrixPolynomial {
    pub fn new(dim: usize, n_params: usize, delta: f64, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.coeff.nrows() != dim || t.coeff.ncols() != dim {
                return Err(Error::Config(format!("term matrix must be {dim}x{dim}")));
            }
            if t.powers.len() != n_params {
                return Err(Error::Config(format!(
                    "term powers must have length {n_params}"
                )));
            }
        }
        if !(delta > 0.0) {
            return Err(Error::Config("delta must be positive".into()));
        }
        Ok(Self {
            dim,
            n_params,
            delta,
            terms,
        })
    }

    fn monomial(x: &[f64], powers: &[u32], skip: Option<usize>) -> f64 {
        powers
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(i, &p)| x[i].powi(p as i32))
            .product()
    }
}

impl HamiltonianFamily for MatrixPolynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn energy_scale(&self) -> f64 {
        self.delta
    }

    fn eval(&self, x: &[f64]) -> Result<CMat> {
        let mut h = CMat::zeros(self.dim, self.dim);
        for t in &self.terms {
            h += &t.coeff * C64::new(Self::monomial(x, &t.powers, None), 0.0);
        }
        Ok(h)
    }

    fn grad(&self, x: &[f64], mu: usize) -> Option<Result<CMat>> {
        let mut h = CMat::zeros(self.dim, self.dim);
        for t in &self.terms {
            let p = t.powers[mu];
            if p == 0 {
                continue;
            }
            let f = p as f64 * x[mu].powi(p as i32 - 1) * Self::monomial(x, &t.powers, Some(mu));
            h += &t.coeff * C64::new(f, 0.0);
        }
        Some(Ok(h))
    }
}
