//! Explicit Euler map of the continuous-time model with step `ε`:
//!
//! ```text
//! x_{k+1} = (I − εΔ)x_k + επAψ(x_k)
//! ```
//!
//! Its fixed points are exactly the continuous-time equilibria. Besides the
//! pitchfork at `π₁`, the origin can lose stability through a flip at `π₁,d`,
//! where a period-2 orbit is born.

use serde::{Deserialize, Serialize};

use crate::dynamics_ct::newton_solve;
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::nonlinearity::NonlinearityProfile;
use crate::spectra::SpectralSummary;

/// States with `‖x‖∞` at or below this count as the origin.
pub const ZERO_TOL: f64 = 1e-6;

/// Relative tolerance under which `π₁` and `π₁,d` coincide.
pub const DEGENERATE_TOL: f64 = 1e-8;

pub fn step(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    eps: f64,
    x: &[f64],
) -> Vec<f64> {
    let psi = profile.apply(x);
    let a = g.weights();
    let d = g.degrees();
    (0..g.n())
        .map(|i| {
            let s: f64 = (0..g.n()).map(|j| a[(i, j)] * psi[j]).sum();
            (1.0 - eps * d[i]) * x[i] + eps * pi * s
        })
        .collect()
}

/// Which results apply for a given step: global stability of the origin
/// below both thresholds needs `ε·maxδ ≤ 1`, the period-2 necessary
/// condition only `ε·maxδ < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRegime {
    pub eps_max_degree: f64,
    pub contractive: bool,
    pub flip_valid: bool,
}

pub fn step_regime(g: &SignedGraph, eps: f64) -> StepRegime {
    let p = eps * g.max_degree();
    StepRegime {
        eps_max_degree: p,
        contractive: p <= 1.0,
        flip_valid: p < 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtKind {
    FixedPoint,
    Period2,
    Undecided,
}

impl DtKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DtKind::FixedPoint => "fixed_point",
            DtKind::Period2 => "period2",
            DtKind::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtOutcome {
    pub kind: DtKind,
    /// Fixed point, or the iterate with even index of a 2-cycle, or the last
    /// iterate when undecided.
    pub state: Vec<f64>,
    /// The odd-index iterate of a 2-cycle.
    pub partner: Option<Vec<f64>>,
    pub iterations: usize,
    pub pi: f64,
    pub eps_step: f64,
    /// `‖x_even − x_odd‖∞ / 2` for a 2-cycle, 0 otherwise.
    pub amplitude: f64,
}

impl DtOutcome {
    pub fn is_nonzero_fixed_point(&self) -> bool {
        self.kind == DtKind::FixedPoint
            && inf_dist(&self.state, &vec![0.0; self.state.len()]) > ZERO_TOL
    }

    /// A necessary condition broken by this outcome, if any: nonzero fixed
    /// points need `π > π₁`, 2-cycles need `π > π₁,d`.
    pub fn necessary_condition_violation(&self, s: &SpectralSummary) -> Option<String> {
        if self.is_nonzero_fixed_point() && self.pi <= s.pi1 {
            return Some(format!(
                "nonzero fixed point at pi = {} <= pi1 = {}",
                self.pi, s.pi1
            ));
        }
        if self.kind == DtKind::Period2 {
            if let Some(pi1d) = s.pi1d {
                if self.pi <= pi1d {
                    return Some(format!(
                        "period-2 orbit at pi = {} <= pi1d = {}",
                        self.pi, pi1d
                    ));
                }
            }
        }
        None
    }
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Iterates the map, stopping at a fixed point (`‖x_{k+1} − x_k‖∞ ≤ tol`) or
/// a 2-cycle (over the last four iterates, both `‖x_{k+2} − x_k‖∞ ≤ tol`
/// while `‖x_{k+1} − x_k‖∞ > 10·tol`, with amplitude above [`ZERO_TOL`] so a
/// slowly decaying alternation is not mistaken for a cycle).
pub fn simulate(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    eps: f64,
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<DtOutcome> {
    profile.check_size(g.n())?;
    if x0.len() != g.n() {
        return Err(Error::ProfileSize {
            expected: g.n(),
            got: x0.len(),
        });
    }
    if !(eps > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need eps > 0 and tol > 0, got {eps}, {tol}"
        )));
    }
    // window[3] is the newest iterate.
    let mut window: Vec<Vec<f64>> = Vec::with_capacity(4);
    window.push(x0.to_vec());
    let outcome = |kind, state: Vec<f64>, partner: Option<Vec<f64>>, iterations| {
        let amplitude = partner
            .as_ref()
            .map_or(0.0, |p: &Vec<f64>| 0.5 * inf_dist(&state, p));
        DtOutcome {
            kind,
            state,
            partner,
            iterations,
            pi,
            eps_step: eps,
            amplitude,
        }
    };
    for k in 1..=max_iters {
        let next = step(g, profile, pi, eps, window.last().expect("non-empty"));
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState(k));
        }
        if inf_dist(&next, window.last().expect("non-empty")) <= tol {
            return Ok(outcome(DtKind::FixedPoint, next, None, k));
        }
        if window.len() == 4 {
            window.remove(0);
        }
        window.push(next);
        if window.len() == 4 {
            let two_step =
                inf_dist(&window[2], &window[0]) <= tol && inf_dist(&window[3], &window[1]) <= tol;
            let separated = inf_dist(&window[3], &window[2]) > 10.0 * tol
                && inf_dist(&window[2], &window[1]) > 10.0 * tol;
            if two_step && separated && 0.5 * inf_dist(&window[3], &window[2]) > ZERO_TOL {
                let (even, odd) = if k % 2 == 0 {
                    (window[3].clone(), window[2].clone())
                } else {
                    (window[2].clone(), window[3].clone())
                };
                return Ok(outcome(DtKind::Period2, even, Some(odd), k));
            }
        }
    }
    let last = window.pop().expect("non-empty");
    Ok(outcome(DtKind::Undecided, last, None, max_iters))
}

/// The first `iters` iterates including `x0`, for trajectory output.
pub fn iterate(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    eps: f64,
    x0: &[f64],
    iters: usize,
) -> Result<Vec<Vec<f64>>> {
    profile.check_size(g.n())?;
    let mut out = vec![x0.to_vec()];
    for k in 1..=iters {
        let next = step(g, profile, pi, eps, out.last().expect("non-empty"));
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState(k));
        }
        out.push(next);
    }
    Ok(out)
}

/// Refines a detected fixed point with Newton on the shared equilibrium
/// equation; returns `None` if Newton fails from there.
pub fn polish_fixed_point(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    newton_solve(g, profile, pi, x, tol, 100).map(|(x, _)| x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FirstBifurcation {
    Pitchfork {
        at: f64,
    },
    PeriodDoubling {
        at: f64,
    },
    /// `π₁ = π₁,d`: both at once, not analysed further.
    Degenerate {
        at: f64,
    },
}

/// Pitchfork at `π₁` when `π₁ < π₁,d`, period doubling at `π₁,d` when
/// `π₁,d < π₁`. Requires the summary to carry `π₁,d` and `ε·maxδ ≤ 1`.
pub fn classify_first_bifurcation(s: &SpectralSummary) -> Result<FirstBifurcation> {
    let (pi1d, eps) = match (s.pi1d, s.eps_step) {
        (Some(p), Some(e)) => (p, e),
        _ => return Err(Error::MissingPi1d),
    };
    let product = eps * s.max_degree;
    if product > 1.0 {
        return Err(Error::StepTooLarge {
            eps,
            product,
            limit: 1.0,
        });
    }
    let pi1 = s.pi1;
    Ok(if (pi1 - pi1d).abs() <= DEGENERATE_TOL * pi1.max(pi1d) {
        FirstBifurcation::Degenerate { at: pi1 }
    } else if pi1 < pi1d {
        FirstBifurcation::Pitchfork { at: pi1 }
    } else {
        FirstBifurcation::PeriodDoubling { at: pi1d }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics_ct::{find_equilibria, EquilibriumOptions};
    use crate::graph::{random_signed_graph, RandomGraphParams};
    use crate::spectra::{shifted_laplacian, thresholds};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn negative_triangle() -> SignedGraph {
        SignedGraph::from_edges(3, &[(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)]).unwrap()
    }

    #[test]
    fn origin_is_fixed() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        assert_eq!(step(&g, &p, 2.0, 0.3, &[0.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn linearization_at_origin() {
        let g = random_signed_graph(&RandomGraphParams::new(7, 0.6, 0.4), 2).unwrap();
        let p = NonlinearityProfile::tanh(7);
        let (pi, eps) = (1.4, 0.9 / g.max_degree());
        let expected = DMatrix::<f64>::identity(7, 7) - shifted_laplacian(&g, pi) * eps;
        let h = 1e-6;
        for c in 0..7 {
            let mut e = vec![0.0; 7];
            e[c] = h;
            let fp = step(&g, &p, pi, eps, &e);
            e[c] = -h;
            let fm = step(&g, &p, pi, eps, &e);
            for r in 0..7 {
                assert_abs_diff_eq!(
                    (fp[r] - fm[r]) / (2.0 * h),
                    expected[(r, c)],
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let set = find_equilibria(&g, &p, 4.0, &EquilibriumOptions::with_seeds(50, 1)).unwrap();
        for r in &set.records {
            let nx = step(&g, &p, 4.0, 0.3, &r.state);
            assert!(inf_dist(&nx, &r.state) <= 1e-10);
        }
    }

    #[test]
    fn triangle_regimes() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let s = thresholds(&g, Some(0.45)).unwrap();
        assert!(matches!(
            classify_first_bifurcation(&s).unwrap(),
            FirstBifurcation::PeriodDoubling { at } if (at - 11.0 / 9.0).abs() < 1e-6
        ));
        let x0 = [0.3, -0.1, 0.25];
        let o = simulate(&g, &p, 1.6, 0.45, &x0, 10_000, 1e-10).unwrap();
        assert_eq!(o.kind, DtKind::Period2);
        assert!(o.amplitude > 0.1);
        assert!(o.necessary_condition_violation(&s).is_none());
        let o = simulate(&g, &p, 1.1, 0.45, &x0, 10_000, 1e-10).unwrap();
        assert_eq!(o.kind, DtKind::FixedPoint);
        assert!(o.state.iter().all(|v| v.abs() <= 1e-8));
    }

    #[test]
    fn balanced_graphs_pitchfork_first() {
        for seed in 0..10 {
            let g = random_signed_graph(&RandomGraphParams::new(8, 0.5, 0.0), seed).unwrap();
            let s = thresholds(&g, Some(0.95 / g.max_degree())).unwrap();
            assert!(matches!(
                classify_first_bifurcation(&s).unwrap(),
                FirstBifurcation::Pitchfork { .. }
            ));
        }
    }

    #[test]
    fn missing_threshold_and_large_step() {
        let g = negative_triangle();
        assert!(matches!(
            classify_first_bifurcation(&thresholds(&g, None).unwrap()),
            Err(Error::MissingPi1d)
        ));
        assert!(matches!(
            classify_first_bifurcation(&thresholds(&g, Some(0.6)).unwrap()),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn nonzero_fixed_point_above_pi1() {
        let g = random_signed_graph(&RandomGraphParams::new(10, 0.5, 0.3), 7).unwrap();
        let p = NonlinearityProfile::tanh(10);
        let eps = 0.5 / g.max_degree();
        let s = thresholds(&g, Some(eps)).unwrap();
        assert!(s.pi1 < s.pi1d.unwrap());
        let pi = 1.1 * s.pi1;
        let x0: Vec<f64> = (0..10).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let o = simulate(&g, &p, pi, eps, &x0, 200_000, 1e-12).unwrap();
        assert!(o.is_nonzero_fixed_point());
        let set = find_equilibria(&g, &p, pi, &EquilibriumOptions::with_seeds(20, 0)).unwrap();
        assert!(set
            .nontrivial()
            .any(|r| inf_dist(&r.state, &o.state) <= 1e-8));
    }
}
