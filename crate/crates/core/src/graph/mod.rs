//! Undirected, connected signed graphs and their canonical matrices.
//!
//! A [`SignedGraph`] owns the symmetric signed adjacency `A` and the absolute
//! degrees `δᵢ = Σⱼ |aᵢⱼ|`. Everything else (signed Laplacian, normalized
//! Laplacian, interaction matrix) is derived on demand by [`SignedGraph::operators`].

mod io;
mod random;

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_edge_csv, read_graph_file, read_graph_json, write_graph_json, GraphFile};
pub use random::{random_signed_graph, resign, RandomGraphParams};

/// A ±1 vector, the diagonal of a signature (gauge) matrix `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::BadSignatureEntry(i));
        }
        Ok(Signature(entries))
    }

    /// The identity signature `𝟙`.
    pub fn ones(n: usize) -> Self {
        Signature(vec![1; n])
    }

    /// Signature of a real vector, with `sign(0) = +1`.
    pub fn from_signs(x: &[f64]) -> Self {
        Signature(x.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        Signature(self.0.iter().map(|&s| -s).collect())
    }

    /// Representative of `{s, -s}` with first entry `+1`.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(&-1) => self.negated(),
            _ => self.clone(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }
}

impl TryFrom<Vec<i8>> for Signature {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        Signature::new(v)
    }
}

impl From<Signature> for Vec<i8> {
    fn from(s: Signature) -> Self {
        s.0
    }
}

/// Symmetric signed weighted adjacency with zero diagonal, connected, plus
/// absolute degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    weights: DMatrix<f64>,
    degrees: DVector<f64>,
}

/// The matrices derived from a signed graph.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    /// `L = Δ − A`
    pub laplacian: DMatrix<f64>,
    /// `ℒ = I − Δ⁻¹A`
    pub normalized_laplacian: DMatrix<f64>,
    /// `H = Δ⁻¹A`
    pub interaction: DMatrix<f64>,
    /// `H_s = Δ^{-1/2} A Δ^{-1/2}`, similar to `H`.
    pub symmetrized_interaction: DMatrix<f64>,
}

/// Result of the sign-consistent 2-coloring test.
#[derive(Debug, Clone, PartialEq)]
pub struct Balance {
    pub balanced: bool,
    /// A signature `s` with `sᵢsⱼ·sign(aᵢⱼ) > 0` on every edge, `s₀ = +1`.
    pub signature: Option<Signature>,
}

impl SignedGraph {
    /// Builds a graph from an undirected edge list `(i, j, w)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewVertices(n));
        }
        let mut a = DMatrix::<f64>::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::VertexOutOfRange(i, j, n));
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight(i, j));
            }
            if w == 0.0 {
                return Err(Error::ZeroWeight(i, j));
            }
            if a[(i, j)] != 0.0 {
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        Self::from_adjacency(a)
    }

    /// Validates a dense adjacency matrix. Symmetry must be exact.
    pub fn from_adjacency(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "adjacency is {}x{}",
                n,
                weights.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::TooFewVertices(n));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::SelfLoop(i));
            }
            for j in (i + 1)..n {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::NonFiniteWeight(i, j));
                }
                if w != weights[(j, i)] {
                    return Err(Error::AsymmetricAdjacency(i, j));
                }
            }
        }
        let degrees = DVector::from_iterator(
            n,
            (0..n).map(|i| weights.row(i).iter().map(|w| w.abs()).sum::<f64>()),
        );
        let graph = SignedGraph { weights, degrees };
        if let Some(v) = graph.first_unreachable() {
            return Err(Error::DisconnectedGraph(v));
        }
        Ok(graph)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && self.weights[(i, j)] != 0.0 {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.max()
    }

    /// Undirected edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Whether `Δ = δI` to within a relative tolerance, i.e. `ℒ` is symmetric.
    pub fn is_degree_regular(&self, rel_tol: f64) -> bool {
        let lo = self.degrees.min();
        let hi = self.degrees.max();
        hi - lo <= rel_tol * hi
    }

    /// `H = Δ⁻¹A`.
    pub fn interaction(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.weights[(i, j)] / self.degrees[i])
    }

    /// `H_s = Δ^{-1/2} A Δ^{-1/2}`.
    pub fn symmetrized_interaction(&self) -> DMatrix<f64> {
        let n = self.n();
        let d = &self.degrees;
        // a_ij / sqrt(δᵢδⱼ) is symmetric bit for bit.
        DMatrix::from_fn(n, n, |i, j| self.weights[(i, j)] / (d[i] * d[j]).sqrt())
    }

    pub fn operators(&self) -> OperatorBundle {
        let n = self.n();
        let interaction = self.interaction();
        let laplacian = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.degrees[i]
            } else {
                -self.weights[(i, j)]
            }
        });
        let normalized_laplacian = DMatrix::<f64>::identity(n, n) - &interaction;
        OperatorBundle {
            laplacian,
            normalized_laplacian,
            interaction,
            symmetrized_interaction: self.symmetrized_interaction(),
        }
    }

    /// Exact balance test by BFS 2-coloring on edge signs, `O(n²)` on the
    /// dense storage.
    pub fn structural_balance(&self) -> Balance {
        let n = self.n();
        let mut color = vec![0i8; n];
        color[0] = 1;
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                let w = self.weights[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let want = if w > 0.0 { color[i] } else { -color[i] };
                if color[j] == 0 {
                    color[j] = want;
                    queue.push_back(j);
                } else if color[j] != want {
                    return Balance {
                        balanced: false,
                        signature: None,
                    };
                }
            }
        }
        Balance {
            balanced: true,
            signature: Some(Signature(color)),
        }
    }

    pub fn is_structurally_balanced(&self) -> bool {
        self.structural_balance().balanced
    }

    /// Signature that satisfies every edge of a BFS spanning tree rooted at 0.
    /// Equals the balancing signature when the graph is balanced.
    pub fn spanning_tree_signature(&self) -> Signature {
        let n = self.n();
        let mut color = vec![0i8; n];
        color[0] = 1;
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                let w = self.weights[(i, j)];
                if w != 0.0 && color[j] == 0 {
                    color[j] = if w > 0.0 { color[i] } else { -color[i] };
                    queue.push_back(j);
                }
            }
        }
        Signature(color)
    }

    /// Gauge transformation `A ↦ SAS`.
    pub fn switch(&self, s: &Signature) -> Result<SignedGraph> {
        let n = self.n();
        if s.len() != n {
            return Err(Error::BadSignatureLength {
                expected: n,
                got: s.len(),
            });
        }
        let weights = DMatrix::from_fn(n, n, |i, j| s.sign(i) * self.weights[(i, j)] * s.sign(j));
        Ok(SignedGraph {
            weights,
            degrees: self.degrees.clone(),
        })
    }

    /// Symmetric diagonal scaling `a′ᵢⱼ = dᵢ aᵢⱼ dⱼ` so that every absolute row
    /// sum equals `target`. Signs and symmetry are preserved.
    ///
    /// The scaling exists only when `|A|` has total support; for example a
    /// star cannot be regularized and yields [`Error::NoConvergence`].
    pub fn regularize_degrees(
        &self,
        target: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<SignedGraph> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter(format!("target degree {target}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {tol}")));
        }
        let n = self.n();
        let abs = self.weights.abs();
        let mut d = vec![1.0; n];
        let row_sums = |d: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| d[i] * (0..n).map(|j| abs[(i, j)] * d[j]).sum::<f64>())
                .collect()
        };
        for _ in 0..max_iter {
            let r = row_sums(&d);
            let dev = r.iter().map(|ri| (ri - target).abs()).fold(0.0, f64::max);
            if dev <= tol {
                let weights = DMatrix::from_fn(n, n, |i, j| {
                    if i <= j {
                        d[i] * self.weights[(i, j)] * d[j]
                    } else {
                        d[j] * self.weights[(j, i)] * d[i]
                    }
                });
                return SignedGraph::from_adjacency(weights);
            }
            for i in 0..n {
                d[i] *= (target / r[i]).sqrt();
            }
        }
        Err(Error::NoConvergence("degree regularization", max_iter))
    }
}
