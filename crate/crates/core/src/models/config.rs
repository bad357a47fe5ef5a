//! JSON model configuration.
//!
//! ```json
//! { "dim": 3, "parameters": 4, "kind": "builtin:three_state", "delta": 1.0 }
//! { "dim": 2, "parameters": 2, "kind": "builtin:two_level", "chart": "qp", "delta": 1.0 }
//! { "dim": 2, "parameters": 1, "kind": "matrix_polynomial", "delta": 1.0,
//!   "terms": [ { "coeff": [[[1,0],[0,0]],[[0,0],[-1,0]]], "powers": [1] } ] }
//! ```
//!
//! The three-state model additionally accepts an `"embedding"` object
//! `{ "offset": [4], "linear": [[4 x n]], "sine": [[4 x n]] }` mapping `n`
//! parameters to canonical coordinates.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Chart, HamiltonianFamily, MatrixPolynomial, Term, ThreeState, TwoLevel};
use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    pub parameters: usize,
    pub kind: String,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
    #[serde(default)]
    pub chart: Option<Chart>,
    #[serde(default)]
    pub embedding: Option<Embedding>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Rows of `[re, im]` pairs.
    pub coeff: Vec<Vec<[f64; 2]>>,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Embedding {
    pub offset: Vec<f64>,
    pub linear: Vec<Vec<f64>>,
    #[serde(default)]
    pub sine: Option<Vec<Vec<f64>>>,
}

fn rows_to_matrix(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    what: &str,
) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl ModelConfig {
    pub fn build(&self) -> Result<Arc<dyn HamiltonianFamily>> {
        if !(self.delta > 0.0) {
            return Err(Error::Config("delta must be positive".into()));
        }
        let expect = |dim: usize, params: Option<usize>| -> Result<()> {
            if self.dim != dim || params.is_some_and(|p| p != self.parameters) {
                return Err(Error::Config(format!(
                    "kind {} needs dim = {dim}{}",
                    self.kind,
                    params
                        .map(|p| format!(", parameters = {p}"))
                        .unwrap_or_default()
                )));
            }
            Ok(())
        };
        match self.kind.as_str() {
            "builtin:three_state" => {
                let family = match &self.embedding {
                    None => {
                        expect(3, Some(4))?;
                        ThreeState::canonical(self.delta)
                    }
                    Some(e) => {
                        expect(3, None)?;
                        let n = self.parameters;
                        if e.offset.len() != 4 {
                            return Err(Error::Config(
                                "embedding offset must have length 4".into(),
                            ));
                        }
                        let linear = rows_to_matrix(&e.linear, 4, n, "embedding linear")?;
                        let sine = match &e.sine {
                            Some(s) => rows_to_matrix(s, 4, n, "embedding sine")?,
                            None => DMatrix::zeros(4, n),
                        };
                        ThreeState::embedded(self.delta, e.offset.clone(), linear, sine)
                    }
                };
                Ok(Arc::new(family))
            }
            "builtin:two_level" => {
                expect(2, Some(2))?;
                Ok(Arc::new(TwoLevel::new(
                    self.delta,
                    self.chart.unwrap_or(Chart::Qp),
                )))
            }
            "matrix_polynomial" => {
                let terms = self
                    .terms
                    .iter()
                    .map(|t| {
                        if t.coeff.len() != self.dim || t.coeff.iter().any(|r| r.len() != self.dim)
                        {
                            return Err(Error::Config(format!(
                                "term matrix must be {0}x{0}",
                                self.dim
                            )));
                        }
                        let coeff = CMat::from_fn(self.dim, self.dim, |i, j| {
                            C64::new(t.coeff[i][j][0], t.coeff[i][j][1])
                        });
                        Ok(Term {
                            coeff,
                            powers: t.powers.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Arc::new(MatrixPolynomial::new(
                    self.dim,
                    self.parameters,
                    self.delta,
                    terms,
                )?))
            }
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

pub fn parse_model(json: &str) -> Result<(ModelConfig, Arc<dyn HamiltonianFamily>)> {
    let cfg: ModelConfig =
        serde_json::from_str(json).map_err(|e| Error::Config(format!("model file: {e}")))?;
    let family = cfg.build()?;
    Ok((cfg, family))
}

pub fn load_model(path: &Path) -> Result<(ModelConfig, Arc<dyn HamiltonianFamily>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}
