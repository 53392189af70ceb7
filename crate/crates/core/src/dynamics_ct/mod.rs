//! Continuous-time opinion dynamics
//!
//! ```text
//! ẋ = Δ(−x + πHψ(x)) = −Δx + πAψ(x)
//! ```
//!
//! with Jacobian `J(x) = −Δ(I − πHΨ′(x))`, `Ψ′ = diag(ψ′(xᵢ))`.

mod equilibria;
mod integrate;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use equilibria::{
    find_equilibria, newton_solve, EquilibriumOptions, EquilibriumRecord, EquilibriumSet,
};
pub(crate) use integrate::write_state_csv;
pub use integrate::{integrate, IntegrateOptions, Trajectory};

use crate::error::Result;
use crate::frustration::FrustrationResult;
use crate::graph::SignedGraph;
use crate::nonlinearity::NonlinearityProfile;
use crate::spectra::eigvalsh;

/// Band around `πλₙ = 1` reported as marginal.
pub const STABILITY_MARGIN: f64 = 1e-8;

/// `Φ(x) = −x + πHψ(x)`; equilibria are its zeros.
pub fn equilibrium_map(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
) -> Vec<f64> {
    let psi = profile.apply(x);
    let a = g.weights();
    let d = g.degrees();
    (0..g.n())
        .map(|i| {
            let s: f64 = (0..g.n()).map(|j| a[(i, j)] * psi[j]).sum();
            -x[i] + pi * s / d[i]
        })
        .collect()
}

/// `Δ(−x + πHψ(x))`. In debug builds the result is cross-checked against the
/// unnormalized form `−Δx + πAψ(x)`.
pub fn vector_field(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
) -> Vec<f64> {
    let phi = equilibrium_map(g, profile, pi, x);
    let d = g.degrees();
    let f: Vec<f64> = phi.iter().zip(d.iter()).map(|(p, di)| di * p).collect();
    #[cfg(debug_assertions)]
    {
        let other = vector_field_unnormalized(g, profile, pi, x);
        for i in 0..f.len() {
            let scale = d[i] * (x[i].abs() + pi);
            debug_assert!(
                !f[i].is_finite() || (f[i] - other[i]).abs() <= 1e-12 * scale.max(1.0),
                "vector field forms disagree at {i}: {} vs {}",
                f[i],
                other[i]
            );
        }
    }
    f
}

/// `−Δx + πAψ(x)`.
pub fn vector_field_unnormalized(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
) -> Vec<f64> {
    let psi = DVector::from_vec(profile.apply(x));
    let api = g.weights() * psi;
    (0..g.n())
        .map(|i| -g.degrees()[i] * x[i] + pi * api[i])
        .collect()
}

/// `−Δ + πAΨ′(x)`.
pub fn jacobian(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
) -> DMatrix<f64> {
    let dpsi = profile.apply_derivative(x);
    let n = g.n();
    DMatrix::from_fn(n, n, |i, j| {
        let off = pi * g.weight(i, j) * dpsi[j];
        if i == j {
            off - g.degrees()[i]
        } else {
            off
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

/// `πλₙ(Ψ′^{1/2} H_s Ψ′^{1/2})` and the resulting verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stability: Stability,
    pub leading: f64,
}

/// Stable iff `πλₙ(Ψ′^{1/2} H_s Ψ′^{1/2}) < 1`; the symmetric matrix is
/// similar to `HΨ′`, so the spectrum is real.
pub fn classify_stability(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
) -> Result<StabilityReport> {
    let r: Vec<f64> = profile
        .apply_derivative(x)
        .iter()
        .map(|d| d.sqrt())
        .collect();
    let hs = g.symmetrized_interaction();
    let n = g.n();
    let m = DMatrix::from_fn(n, n, |i, j| r[i] * hs[(i, j)] * r[j]);
    let m = (&m + m.transpose()) * 0.5;
    let top = *eigvalsh(&m)?.last().expect("n >= 2");
    let leading = pi * top;
    let stability = if leading < 1.0 - STABILITY_MARGIN {
        Stability::Stable
    } else if leading > 1.0 + STABILITY_MARGIN {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    Ok(StabilityReport { stability, leading })
}

/// `V(x) = Σᵢ ∫₀^{xᵢ} ψᵢ`.
pub fn lyapunov_value(profile: &NonlinearityProfile, x: &[f64]) -> f64 {
    profile.lyapunov(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub pi: f64,
    /// `π(n − 2ε)`.
    pub bound: f64,
    pub frustration: f64,
    pub exact_frustration: bool,
    pub norms: Vec<f64>,
    pub within: Vec<bool>,
    pub all_within: bool,
}

pub const NORM_BOUND_TOL: f64 = 1e-6;

/// `‖x*‖₁ ≤ π(n − 2ε)` for each equilibrium of the set.
pub fn check_norm_bound(
    g: &SignedGraph,
    pi: f64,
    set: &EquilibriumSet,
    fr: &FrustrationResult,
) -> NormBoundReport {
    let states: Vec<&[f64]> = set.records.iter().map(|r| r.state.as_slice()).collect();
    check_norm_bound_states(g, pi, &states, fr)
}

/// As [`check_norm_bound`] for arbitrary states (e.g. fixed points of the
/// Euler map).
pub fn check_norm_bound_states(
    g: &SignedGraph,
    pi: f64,
    states: &[&[f64]],
    fr: &FrustrationResult,
) -> NormBoundReport {
    let bound = pi * (g.n() as f64 - 2.0 * fr.value);
    let norms: Vec<f64> = states
        .iter()
        .map(|x| x.iter().map(|v| v.abs()).sum())
        .collect();
    let within: Vec<bool> = norms.iter().map(|&v| v <= bound + NORM_BOUND_TOL).collect();
    NormBoundReport {
        pi,
        bound,
        frustration: fr.value,
        exact_frustration: fr.exact,
        all_within: within.iter().all(|&w| w),
        norms,
        within,
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
