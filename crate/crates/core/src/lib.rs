//! Collective decision-making dynamics on signed networks.
//!
//! Agents on an undirected, connected signed graph evolve as
//!
//! ```text
//! ẋ = −Δx + πAψ(x)                      (continuous time)
//! x⁺ = (I − εΔ)x + επAψ(x)              (explicit Euler map, step ε)
//! ```
//!
//! where `A` is the signed adjacency matrix, `Δ` the diagonal of absolute
//! degrees, `ψ` an odd saturating sigmoid and `π ≥ 0` the social effort.
//! The origin loses stability at thresholds read off the spectrum of the
//! normalized signed Laplacian `ℒ = I − Δ⁻¹A`, and how far above `π = 1`
//! they sit is controlled by the frustration index of the graph.
//!
//! Modules:
//!
//! - [`graph`]: construction, validation, switching, degree regularization,
//!   seeded random ensembles, file formats.
//! - [`spectra`]: symmetric eigensolvers and the thresholds `π₁`, `π₂`, `π₁,d`.
//! - [`frustration`]: exact and heuristic frustration index, threshold bounds.
//! - [`nonlinearity`]: sigmoid profiles and their validation.
//! - [`dynamics_ct`]: vector field, Jacobian, RK4 integration, equilibria,
//!   stability, Lyapunov function, equilibrium norm bound.
//! - [`dynamics_dt`]: the Euler map, fixed point / period-2 detection and
//!   first-bifurcation classification.
//! - [`sweep`]: parameter sweeps, branch bookkeeping and onset estimates.
//! - [`cli`]: experiment configs and the `sigdyn` command-line front end.

pub mod cli;
pub mod dynamics_ct;
pub mod dynamics_dt;
pub mod error;
pub mod frustration;
pub mod graph;
pub mod nonlinearity;
pub mod output;
pub mod spectra;
pub mod sweep;

pub use error::{Error, Result};
pub use graph::{Signature, SignedGraph};
