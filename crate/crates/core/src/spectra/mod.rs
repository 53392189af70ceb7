//! Spectra of the normalized signed Laplacian and the bifurcation thresholds
//! derived from them.
//!
//! `ℒ = I − Δ⁻¹A` is not symmetric in general, but it is similar to
//! `I − H_s` with `H_s = Δ^{-1/2} A Δ^{-1/2}`, so its spectrum is real and
//! is computed with a symmetric solver.
//!
//! | threshold | definition |
//! |-----------|------------|
//! | `π₁`  | `1 / (1 − λ₁(ℒ))`, first pitchfork at the origin |
//! | `π₂`  | `1 / (1 − λ₂(ℒ))`, second pitchfork (`+∞` when `λ₂ ≥ 1`) |
//! | `π₁,d` | root of `λₙ(Δ − πA) = 2/ε` for the Euler map with step `ε` |

mod eigh;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use eigh::{eigh, eigh_with, eigvalsh, Eigh, EighMethod, JACOBI_MAX_N};

use crate::error::{Error, Result};
use crate::graph::SignedGraph;

/// Relative gap under which two eigenvalues count as one repeated eigenvalue.
pub const SIMPLE_GAP: f64 = 1e-8;

/// Bisection tolerance on `π` for the discrete-time threshold.
pub const PI1D_TOL: f64 = 1e-10;

const MAX_BRACKET_DOUBLINGS: usize = 200;

/// Eigenvalues of `ℒ` in nondecreasing order via `eig(ℒ) = 1 − eig(H_s)`.
pub fn normalized_laplacian_spectrum(g: &SignedGraph) -> Result<Vec<f64>> {
    let mu = eigvalsh(&g.symmetrized_interaction())?;
    Ok(mu.iter().rev().map(|m| 1.0 - m).collect())
}

/// `1 / (1 − λ)` when `λ < 1`, `None` (an infinite threshold) otherwise.
pub fn threshold_from_eigenvalue(lambda: f64) -> Option<f64> {
    (lambda < 1.0).then(|| 1.0 / (1.0 - lambda))
}

/// `L_π = Δ − πA`.
pub fn shifted_laplacian(g: &SignedGraph, pi: f64) -> DMatrix<f64> {
    let n = g.n();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            g.degrees()[i]
        } else {
            -pi * g.weight(i, j)
        }
    })
}

/// Largest eigenvalue of `Δ − πA`.
pub fn shifted_laplacian_max(g: &SignedGraph, pi: f64) -> Result<f64> {
    let vals = eigvalsh(&shifted_laplacian(g, pi))?;
    Ok(*vals.last().expect("graph has at least two vertices"))
}

fn check_step(g: &SignedGraph, eps: f64, limit: f64) -> Result<()> {
    let product = eps * g.max_degree();
    if !(eps > 0.0) || !(product < limit) {
        return Err(Error::StepTooLarge {
            eps,
            product,
            limit,
        });
    }
    Ok(())
}

/// The unique `π > 0` with `λₙ(Δ − πA) = 2/ε`, by bisection on the convex map
/// `π ↦ λₙ(Δ − πA)` with a geometrically grown bracket.
pub fn solve_pi1d(g: &SignedGraph, eps: f64) -> Result<f64> {
    check_step(g, eps, 2.0)?;
    let target = 2.0 / eps;
    let f = |pi: f64| shifted_laplacian_max(g, pi).map(|v| v - target);
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while f(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::BracketFailure(doublings));
        }
    }
    while hi - lo > PI1D_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ordered spectrum of `ℒ` and the thresholds it determines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    #[serde(rename = "lambda")]
    pub eigenvalues: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub pi1: f64,
    /// `None` when `λ₂ ≥ 1`: the second threshold is at `+∞`.
    pub pi2: Option<f64>,
    pub pi2_infinite: bool,
    pub pi1d: Option<f64>,
    pub eps_step: Option<f64>,
    pub max_degree: f64,
}

impl SpectralSummary {
    /// Builds the summary from an already computed spectrum.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, max_degree: f64) -> Self {
        let n = eigenvalues.len();
        assert!(n >= 2, "spectral summary needs at least two eigenvalues");
        let lambda1 = eigenvalues[0];
        let lambda2 = eigenvalues[1];
        let pi2 = threshold_from_eigenvalue(lambda2);
        SpectralSummary {
            lambda1,
            lambda2,
            lambda_n: eigenvalues[n - 1],
            pi1: threshold_from_eigenvalue(lambda1).unwrap_or(f64::INFINITY),
            pi2,
            pi2_infinite: pi2.is_none(),
            pi1d: None,
            eps_step: None,
            max_degree,
            eigenvalues,
        }
    }

    /// `π₂` as a float, `+∞` when infinite.
    pub fn pi2_value(&self) -> f64 {
        self.pi2.unwrap_or(f64::INFINITY)
    }

    /// Whether the `k`-th smallest eigenvalue (0-based) is simple.
    pub fn is_simple(&self, k: usize) -> bool {
        let ev = &self.eigenvalues;
        let gap = |a: f64, b: f64| (a - b).abs() > SIMPLE_GAP * a.abs().max(b.abs()).max(1.0);
        (k == 0 || gap(ev[k], ev[k - 1])) && (k + 1 >= ev.len() || gap(ev[k], ev[k + 1]))
    }
}

/// Spectrum, `π₁`, `π₂`, and `π₁,d` when a step size is given
/// (`ε·maxᵢδᵢ < 2` required).
pub fn thresholds(g: &SignedGraph, eps_step: Option<f64>) -> Result<SpectralSummary> {
    if let Some(eps) = eps_step {
        check_step(g, eps, 2.0)?;
    }
    let mut s =
        SpectralSummary::from_eigenvalues(normalized_laplacian_spectrum(g)?, g.max_degree());
    if let Some(eps) = eps_step {
        s.pi1d = Some(solve_pi1d(g, eps)?);
        s.eps_step = Some(eps);
    }
    Ok(s)
}
