use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SignedGraph;
use crate::error::{Error, Result};

/// Erdős–Rényi-style signed ensemble.
///
/// Magnitudes are uniform on `(weight_low, weight_high]`; each present edge
/// is negated independently with probability `negative_prob`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphParams {
    pub n: usize,
    pub edge_prob: f64,
    pub negative_prob: f64,
    #[serde(default)]
    pub weight_low: f64,
    #[serde(default = "default_high")]
    pub weight_high: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_high() -> f64 {
    1.0
}

fn default_attempts() -> usize {
    100
}

impl RandomGraphParams {
    pub fn new(n: usize, edge_prob: f64, negative_prob: f64) -> Self {
        RandomGraphParams {
            n,
            edge_prob,
            negative_prob,
            weight_low: 0.0,
            weight_high: default_high(),
            max_attempts: default_attempts(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewVertices(self.n));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "edge_prob {} not in (0, 1]",
                self.edge_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.negative_prob) {
            return Err(Error::InvalidParameter(format!(
                "negative_prob {} not in [0, 1]",
                self.negative_prob
            )));
        }
        if !(self.weight_low >= 0.0
            && self.weight_low < self.weight_high
            && self.weight_high.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "weight range ({}, {}]",
                self.weight_low, self.weight_high
            )));
        }
        Ok(())
    }
}

/// Draws a connected signed graph; the seed fixes the whole stream, including
/// rejected disconnected draws.
pub fn random_signed_graph(params: &RandomGraphParams, seed: u64) -> Result<SignedGraph> {
    params.validate()?;
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.max_attempts {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let present = rng.random::<f64>() < params.edge_prob;
                let u = rng.random::<f64>();
                let negative = rng.random::<f64>() < params.negative_prob;
                if present {
                    let mag = params.weight_high - (params.weight_high - params.weight_low) * u;
                    let w = if negative { -mag } else { mag };
                    a[(i, j)] = w;
                    a[(j, i)] = w;
                }
            }
        }
        match SignedGraph::from_adjacency(a) {
            Ok(g) => return Ok(g),
            Err(Error::DisconnectedGraph(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::CannotConnect(params.max_attempts))
}

/// Keeps `|A|` and redraws signs: each edge negative with probability `beta`.
pub fn resign(base: &SignedGraph, beta: f64, seed: u64) -> Result<SignedGraph> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta {beta} not in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = base.n();
    let mut a = base.weights().abs();
    for i in 0..n {
        for j in (i + 1)..n {
            let negative = rng.random::<f64>() < beta;
            if negative {
                a[(i, j)] = -a[(i, j)];
                a[(j, i)] = a[(i, j)];
            }
        }
    }
    SignedGraph::from_adjacency(a)
}
