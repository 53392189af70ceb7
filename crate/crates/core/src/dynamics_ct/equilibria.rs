use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::csv_err;
use super::{classify_stability, equilibrium_map, inf_norm, Stability};
use crate::error::Result;
use crate::graph::SignedGraph;
use crate::nonlinearity::NonlinearityProfile;
use crate::output::fmt_f64;
use crate::spectra::eigh;

const MAX_BACKTRACKS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOptions {
    /// Random seeds drawn uniformly from `‖x‖₁ ≤ πn`.
    pub n_seeds: usize,
    pub seed: u64,
    #[serde(default)]
    pub warm_starts: Vec<Vec<f64>>,
    /// Convergence threshold on `‖f(x)‖∞`.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// States closer than this in the ∞-norm are one equilibrium.
    pub dedup_radius: f64,
    /// Number of leading eigenvectors of `H` used as deterministic seed
    /// directions, each at every amplitude in `seed_amplitudes`.
    pub spectral_directions: usize,
    pub seed_amplitudes: Vec<f64>,
    pub classify: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            n_seeds: 64,
            seed: 0,
            warm_starts: Vec::new(),
            newton_tol: 1e-10,
            max_iter: 100,
            dedup_radius: 1e-5,
            spectral_directions: 3,
            seed_amplitudes: vec![0.01, 0.1, 0.5, 1.0, 2.0],
            classify: true,
        }
    }
}

impl EquilibriumOptions {
    pub fn with_seeds(n_seeds: usize, seed: u64) -> Self {
        EquilibriumOptions {
            n_seeds,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub state: Vec<f64>,
    /// `‖f(x*)‖∞`.
    pub residual: f64,
    pub stability: Option<Stability>,
    /// `πλₙ(Ψ′^{1/2}H_sΨ′^{1/2})`; stable below 1.
    pub leading: Option<f64>,
    pub norm1: f64,
    pub norm2: f64,
    /// Index of the record holding `−x*` (itself for the origin).
    pub mirror: Option<usize>,
}

impl EquilibriumRecord {
    fn new(state: Vec<f64>, residual: f64) -> Self {
        let norm1 = state.iter().map(|v| v.abs()).sum();
        let norm2 = state.iter().map(|v| v * v).sum::<f64>().sqrt();
        EquilibriumRecord {
            state,
            residual,
            stability: None,
            leading: None,
            norm1,
            norm2,
            mirror: None,
        }
    }

    pub fn is_origin(&self, radius: f64) -> bool {
        inf_norm(&self.state) <= radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub pi: f64,
    pub records: Vec<EquilibriumRecord>,
    pub seeds_used: usize,
    pub converged_fraction: f64,
    pub dedup_radius: f64,
}

impl EquilibriumSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn nontrivial(&self) -> impl Iterator<Item = &EquilibriumRecord> {
        let r = self.dedup_radius;
        self.records.iter().filter(move |rec| !rec.is_origin(r))
    }

    /// Adds the records of `other` that are not already present and refreshes
    /// the mirror links.
    pub fn merge(&mut self, other: EquilibriumSet) {
        let r = self.dedup_radius;
        for rec in other.records {
            if !self.records.iter().any(|x| within(&x.state, &rec.state, r)) {
                self.records.push(rec);
            }
        }
        self.seeds_used += other.seeds_used;
        link_mirrors(&mut self.records, r);
    }

    /// `pi,branch_id,norm2,norm1,stability` rows, one per record.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["pi", "branch_id", "norm2", "norm1", "stability"])
            .map_err(csv_err)?;
        for (k, r) in self.records.iter().enumerate() {
            let st = r.stability.map_or("unknown", Stability::as_str);
            out.write_record([
                fmt_f64(self.pi),
                k.to_string(),
                fmt_f64(r.norm2),
                fmt_f64(r.norm1),
                st.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Precomputed `H = Δ⁻¹A` and degrees for Newton's method.
struct NewtonSystem<'a> {
    g: &'a SignedGraph,
    profile: &'a NonlinearityProfile,
    h: DMatrix<f64>,
    pi: f64,
}

impl NewtonSystem<'_> {
    fn phi(&self, x: &[f64]) -> Vec<f64> {
        equilibrium_map(self.g, self.profile, self.pi, x)
    }

    fn residual(&self, phi: &[f64]) -> f64 {
        phi.iter()
            .zip(self.g.degrees().iter())
            .fold(0.0f64, |m, (p, d)| m.max((p * d).abs()))
    }

    fn solve(&self, x0: &[f64], tol: f64, max_iter: usize) -> Option<(Vec<f64>, f64)> {
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut phi = self.phi(&x);
        for _ in 0..=max_iter {
            let res = self.residual(&phi);
            if !res.is_finite() {
                return None;
            }
            if res <= tol {
                return Some((x, res));
            }
            let dpsi = self.profile.apply_derivative(&x);
            let jac = DMatrix::from_fn(n, n, |i, j| {
                let v = self.pi * self.h[(i, j)] * dpsi[j];
                if i == j {
                    v - 1.0
                } else {
                    v
                }
            });
            let rhs = -DVector::from_column_slice(&phi);
            let dx = jac.lu().solve(&rhs)?;
            let m0 = norm2(&phi);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + t * d).collect();
                let trial_phi = self.phi(&trial);
                if norm2(&trial_phi) < (1.0 - 1e-4 * t) * m0 {
                    x = trial;
                    phi = trial_phi;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        None
    }
}

fn within(a: &[f64], b: &[f64], radius: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= radius)
}

fn link_mirrors(records: &mut [EquilibriumRecord], radius: f64) {
    for k in 0..records.len() {
        let neg: Vec<f64> = records[k].state.iter().map(|v| -v).collect();
        records[k].mirror = records.iter().position(|r| within(&r.state, &neg, radius));
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Damped Newton on `Φ(x) = −x + πHψ(x)` from a single start.
/// Returns the root and `‖f‖∞` on convergence.
pub fn newton_solve(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Option<(Vec<f64>, f64)> {
    let sys = NewtonSystem {
        g,
        profile,
        h: g.interaction(),
        pi,
    };
    sys.solve(x0, tol, max_iter)
}

/// Leading eigenvectors of `H` (largest eigenvalues first), scaled to unit
/// ∞-norm.
fn spectral_directions(g: &SignedGraph, k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let e = eigh(&g.symmetrized_interaction())?;
    let n = g.n();
    Ok((0..k.min(n))
        .map(|c| {
            let col = e.vectors.column(n - 1 - c);
            let u: Vec<f64> = (0..n).map(|i| col[i] / g.degrees()[i].sqrt()).collect();
            let s = inf_norm(&u);
            u.iter().map(|v| v / s).collect()
        })
        .collect())
}

/// Uniform sample from the ℓ₁ ball of radius `r`.
fn l1_ball_sample(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    (0..n)
        .map(|i| {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            s * r * e[i] / total
        })
        .collect()
}

/// Newton from the origin, warm starts, leading-eigenvector seeds and random
/// seeds in `‖x‖₁ ≤ πn`; roots are deduplicated (first found wins) and closed
/// under `x ↦ −x`.
pub fn find_equilibria(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumSet> {
    profile.check_size(g.n())?;
    let n = g.n();
    let mut seeds: Vec<Vec<f64>> = vec![vec![0.0; n]];
    seeds.extend(opts.warm_starts.iter().filter(|w| w.len() == n).cloned());
    for dir in spectral_directions(g, opts.spectral_directions)? {
        for &a in &opts.seed_amplitudes {
            seeds.push(dir.iter().map(|v| a * v).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let radius = pi.abs().max(1e-3) * n as f64;
    for _ in 0..opts.n_seeds {
        seeds.push(l1_ball_sample(&mut rng, n, radius));
    }

    let sys = NewtonSystem {
        g,
        profile,
        h: g.interaction(),
        pi,
    };
    let roots: Vec<Option<(Vec<f64>, f64)>> = seeds
        .par_iter()
        .map(|s| sys.solve(s, opts.newton_tol, opts.max_iter))
        .collect();
    let converged = roots.iter().filter(|r| r.is_some()).count();

    let close = |a: &[f64], b: &[f64]| within(a, b, opts.dedup_radius);
    let mut records: Vec<EquilibriumRecord> = vec![EquilibriumRecord::new(vec![0.0; n], 0.0)];
    for (x, res) in roots.into_iter().flatten() {
        if !records.iter().any(|r| close(&r.state, &x)) {
            records.push(EquilibriumRecord::new(x, res));
        }
    }
    let found = records.len();
    for k in 0..found {
        let neg: Vec<f64> = records[k].state.iter().map(|v| -v).collect();
        if !records.iter().any(|r| close(&r.state, &neg)) {
            let res = records[k].residual;
            records.push(EquilibriumRecord::new(neg, res));
        }
    }
    link_mirrors(&mut records, opts.dedup_radius);
    if opts.classify {
        let reports: Vec<Result<_>> = records
            .par_iter()
            .map(|r| classify_stability(g, profile, pi, &r.state))
            .collect();
        for (r, rep) in records.iter_mut().zip(reports) {
            let rep = rep?;
            r.stability = Some(rep.stability);
            r.leading = Some(rep.leading);
        }
    }
    Ok(EquilibriumSet {
        pi,
        records,
        seeds_used: seeds.len(),
        converged_fraction: converged as f64 / seeds.len() as f64,
        dedup_radius: opts.dedup_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{alpha_oracle, negative_triangle};
    use super::super::vector_field;
    use super::*;
    use crate::graph::{random_signed_graph, RandomGraphParams};
    use crate::spectra::thresholds;

    #[test]
    fn below_pi1_only_origin() {
        let g = random_signed_graph(&RandomGraphParams::new(10, 0.5, 0.3), 6).unwrap();
        let p = NonlinearityProfile::tanh(10);
        let t = thresholds(&g, None).unwrap();
        let set =
            find_equilibria(&g, &p, 0.9 * t.pi1, &EquilibriumOptions::with_seeds(100, 1)).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.records[0].stability, Some(Stability::Stable));
        assert_eq!(set.records[0].mirror, Some(0));
    }

    #[test]
    fn three_equilibria_in_window() {
        let g = random_signed_graph(&RandomGraphParams::new(12, 0.5, 0.3), 9).unwrap();
        assert!(!g.is_structurally_balanced());
        let p = NonlinearityProfile::tanh(12);
        let t = thresholds(&g, None).unwrap();
        assert!(t.is_simple(0) && t.is_simple(1));
        let pi = 0.5 * (t.pi1 + t.pi2_value());
        let set = find_equilibria(&g, &p, pi, &EquilibriumOptions::with_seeds(200, 2)).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.records[0].stability, Some(Stability::Unstable));
        for r in set.nontrivial() {
            assert_eq!(r.stability, Some(Stability::Stable));
            assert!(r.residual <= 1e-10);
            let back = newton_solve(
                &g,
                &p,
                pi,
                &r.state.iter().map(|v| -v).collect::<Vec<_>>(),
                1e-10,
                50,
            )
            .unwrap();
            assert!(back
                .0
                .iter()
                .zip(&r.state)
                .all(|(a, b)| (a + b).abs() <= 1e-9));
        }
        assert_eq!(set.records[1].mirror, Some(2));
    }

    #[test]
    fn triangle_thirteen_equilibria() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let set = find_equilibria(&g, &p, 4.0, &EquilibriumOptions::with_seeds(400, 3)).unwrap();
        assert_eq!(set.len(), 13);
        let a = alpha_oracle(4.0);
        let target = [a, -a, 0.0];
        assert!(set.records.iter().any(|r| r
            .state
            .iter()
            .zip(&target)
            .all(|(x, y)| (x - y).abs() <= 1e-8)));
        for r in &set.records {
            assert!(inf_norm(&vector_field(&g, &p, 4.0, &r.state)) <= 1e-8);
        }
    }

    #[test]
    fn balanced_equilibria_in_signature_orthant() {
        let g = random_signed_graph(&RandomGraphParams::new(9, 0.6, 0.0), 3).unwrap();
        let s = crate::graph::Signature::new(vec![1, -1, 1, -1, -1, 1, 1, 1, -1]).unwrap();
        let g = g.switch(&s).unwrap();
        let p = NonlinearityProfile::tanh(9);
        let t = thresholds(&g, None).unwrap();
        let pi = 0.5 * (t.pi1 + t.pi2_value());
        let set = find_equilibria(&g, &p, pi, &EquilibriumOptions::with_seeds(50, 0)).unwrap();
        assert_eq!(set.len(), 3);
        for r in set.nontrivial() {
            let orient = r.state[0].signum();
            for i in 0..9 {
                assert!(orient * s.sign(i) * r.state[i] > 0.0);
            }
        }
    }

    #[test]
    fn csv_rows() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let set = find_equilibria(&g, &p, 1.0, &EquilibriumOptions::with_seeds(5, 0)).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pi,branch_id,norm2,norm1,stability\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
