//! Frustration index `ε(G)` of a signed graph and the bounds built on it.
//!
//! For a signature `s`, the energy is the normalized weight of the edges left
//! frustrated after switching by `s`:
//!
//! ```text
//! E(s) = ½ Σ_{i≠j} [|ℒ| + SℒS]ᵢⱼ = (n − sᵀ M s) / 2,   M = (H + Hᵀ)/2
//! ```
//!
//! and `ε(G) = min_s E(s)`. Flipping `sᵢ` changes the energy by
//! `2 sᵢ (M s)ᵢ`, which both the exhaustive and the heuristic search use to
//! evaluate moves in `O(n)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Signature, SignedGraph};
use crate::spectra;

/// Default vertex cap for exhaustive enumeration.
pub const EXACT_CAP: usize = 24;

const FORMULA_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;
const MAX_SIGN_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrustrationResult {
    pub value: f64,
    pub signature: Signature,
    /// Optimality certificate: true only for exhaustive search.
    pub exact: bool,
    pub restarts: usize,
    /// Energies visited by the greedy descent of the winning restart.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energy_trace: Vec<f64>,
}

/// `(H + Hᵀ)/2`.
fn coupling(g: &SignedGraph) -> DMatrix<f64> {
    let h = g.interaction();
    (&h + h.transpose()) * 0.5
}

fn check_len(g: &SignedGraph, s: &Signature) -> Result<()> {
    if s.len() != g.n() {
        return Err(Error::BadSignatureLength {
            expected: g.n(),
            got: s.len(),
        });
    }
    Ok(())
}

/// Energy of a signature, evaluated with both the Laplacian form and the
/// quadratic form; they must agree to `1e-12`.
pub fn energy(g: &SignedGraph, s: &Signature) -> Result<f64> {
    check_len(g, s)?;
    let n = g.n();
    let l = g.operators().normalized_laplacian;
    let mut laplacian_form = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                laplacian_form += l[(i, j)].abs() + s.sign(i) * l[(i, j)] * s.sign(j);
            }
        }
    }
    laplacian_form *= 0.5;
    let quadratic_form = quadratic_energy(&coupling(g), s);
    if (laplacian_form - quadratic_form).abs() > FORMULA_TOL * (n as f64).max(1.0) {
        return Err(Error::FormulaMismatch(laplacian_form, quadratic_form));
    }
    Ok(laplacian_form)
}

fn quadratic_energy(m: &DMatrix<f64>, s: &Signature) -> f64 {
    let n = m.nrows();
    let mut q = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * s.sign(j);
        }
        q += s.sign(i) * row;
    }
    0.5 * (n as f64 - q)
}

/// Local fields `h = M s`, kept in sync with single flips.
struct FlipState<'a> {
    m: &'a DMatrix<f64>,
    s: Vec<f64>,
    field: Vec<f64>,
    energy: f64,
}

impl<'a> FlipState<'a> {
    fn new(m: &'a DMatrix<f64>, s: &[f64]) -> Self {
        let n = m.nrows();
        let field: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)] * s[j]).sum())
            .collect();
        let q: f64 = (0..n).map(|i| s[i] * field[i]).sum();
        FlipState {
            m,
            s: s.to_vec(),
            field,
            energy: 0.5 * (n as f64 - q),
        }
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        2.0 * self.s[i] * self.field[i]
    }

    #[inline]
    fn flip(&mut self, i: usize) {
        self.energy += self.delta(i);
        let old = self.s[i];
        let col = self.m.column(i);
        for (f, &mij) in self.field.iter_mut().zip(col.iter()) {
            *f -= 2.0 * old * mij;
        }
        self.s[i] = -old;
    }

    fn signature(&self) -> Signature {
        Signature::from_signs(&self.s)
    }
}

/// Exhaustive minimum over all `2^(n−1)` signatures with `s₀ = +1`.
/// Ties are broken towards the lexicographically smallest signature
/// (`−1 < +1`).
pub fn frustration_exact(g: &SignedGraph) -> Result<FrustrationResult> {
    frustration_exact_with_cap(g, EXACT_CAP)
}

pub fn frustration_exact_with_cap(g: &SignedGraph, cap: usize) -> Result<FrustrationResult> {
    let n = g.n();
    if n > cap || n > 40 {
        return Err(Error::TooLargeForExact { n, cap });
    }
    let m = coupling(g);
    let free = n - 1;
    // Top bits fix a chunk; each chunk walks a Gray code over the low bits.
    let chunk_bits = free.min(6);
    let low_bits = free - chunk_bits;
    let best = (0u64..(1u64 << chunk_bits))
        .into_par_iter()
        .map(|chunk| {
            let mut s = vec![1.0; n];
            for b in 0..chunk_bits {
                if chunk >> b & 1 == 1 {
                    s[1 + low_bits + b] = -1.0;
                }
            }
            let mut st = FlipState::new(&m, &s);
            let mut best_e = st.energy;
            let mut best_s = st.signature();
            for k in 1u64..(1u64 << low_bits) {
                let bit = k.trailing_zeros() as usize;
                st.flip(1 + bit);
                consider(&mut best_e, &mut best_s, st.energy, &st);
            }
            (best_e, best_s)
        })
        .reduce_with(|a, b| {
            if b.0 < a.0 - TIE_TOL || ((b.0 - a.0).abs() <= TIE_TOL && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one chunk");
    let signature = best.1;
    Ok(FrustrationResult {
        value: energy(g, &signature)?,
        signature,
        exact: true,
        restarts: 0,
        energy_trace: Vec::new(),
    })
}

#[inline]
fn consider(best_e: &mut f64, best_s: &mut Signature, e: f64, st: &FlipState<'_>) {
    if e < *best_e - TIE_TOL {
        *best_e = e;
        *best_s = st.signature();
    } else if (e - *best_e).abs() <= TIE_TOL {
        let cand = st.signature();
        if cand < *best_s {
            *best_e = best_e.min(e);
            *best_s = cand;
        }
    }
}

/// Sign iteration `u ← sign(M u)` to a fixed point (or a 2-cycle), then
/// best-improvement single-flip descent. Restart 0 starts from the BFS
/// spanning-tree signature, the others from uniform random signatures.
pub fn frustration_heuristic(
    g: &SignedGraph,
    restarts: usize,
    seed: u64,
) -> Result<FrustrationResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter(
            "heuristic needs at least one restart".into(),
        ));
    }
    let n = g.n();
    let m = coupling(g);
    let tree = g.spanning_tree_signature().to_f64();
    let runs: Vec<(f64, Signature, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                tree.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add(r as u64)
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                (0..n)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect()
            };
            let u = sign_iteration(&m, start);
            let mut st = FlipState::new(&m, &u);
            let trace = greedy_descent(&mut st);
            (st.energy, st.signature().canonical(), trace)
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 < best.0 - TIE_TOL || ((run.0 - best.0).abs() <= TIE_TOL && run.1 < best.1) {
            best = run;
        }
    }
    let signature = best.1.clone();
    Ok(FrustrationResult {
        value: energy(g, &signature)?,
        signature,
        exact: false,
        restarts,
        energy_trace: best.2.clone(),
    })
}

fn sign_iteration(m: &DMatrix<f64>, mut u: Vec<f64>) -> Vec<f64> {
    let n = u.len();
    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..MAX_SIGN_ITERATIONS {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let f: f64 = (0..n).map(|j| m[(i, j)] * u[j]).sum();
                if f < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        if next == u || prev.as_ref() == Some(&next) {
            return next;
        }
        prev = Some(std::mem::replace(&mut u, next));
    }
    u
}

/// Flips the most improving vertex until no flip lowers the energy. Returns
/// the strictly decreasing energy trace.
fn greedy_descent(st: &mut FlipState<'_>) -> Vec<f64> {
    let n = st.s.len();
    let mut trace = vec![st.energy];
    let thresh = -1e-13 * (n as f64).max(1.0);
    loop {
        let (best_i, best_d) =
            (0..n)
                .map(|i| (i, st.delta(i)))
                .fold(
                    (usize::MAX, 0.0),
                    |acc, (i, d)| if d < acc.1 { (i, d) } else { acc },
                );
        if best_i == usize::MAX || best_d >= thresh {
            return trace;
        }
        st.flip(best_i);
        trace.push(st.energy);
    }
}

/// Exhaustive when `n ≤ cap`, heuristic otherwise.
pub fn frustration_auto(
    g: &SignedGraph,
    cap: usize,
    restarts: usize,
    seed: u64,
) -> Result<FrustrationResult> {
    if g.n() <= cap {
        frustration_exact_with_cap(g, cap)
    } else {
        frustration_heuristic(g, restarts, seed)
    }
}

/// `1 ≤ π₁ ≤ min{n/(n−2ε), π₂}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pi1: f64,
    pub pi2: Option<f64>,
    pub frustration_bound: f64,
    pub upper: f64,
    pub lower: f64,
    pub holds: bool,
    /// Whether `Δ = δI`; otherwise the bound is checked empirically only.
    pub symmetric_l: bool,
    pub exact_frustration: bool,
}

pub const BOUND_TOL: f64 = 1e-8;

pub fn check_pi1_bounds(g: &SignedGraph, fr: &FrustrationResult) -> Result<BoundReport> {
    let summary = spectra::thresholds(g, None)?;
    bound_report(g, &summary, fr)
}

/// As [`check_pi1_bounds`] with a precomputed spectral summary.
pub fn bound_report(
    g: &SignedGraph,
    summary: &spectra::SpectralSummary,
    fr: &FrustrationResult,
) -> Result<BoundReport> {
    let n = g.n() as f64;
    let denom = n - 2.0 * fr.value;
    if denom <= 0.0 {
        return Err(Error::DegenerateBound(denom));
    }
    let frustration_bound = n / denom;
    let upper = frustration_bound.min(summary.pi2_value());
    let pi1 = summary.pi1;
    Ok(BoundReport {
        pi1,
        pi2: summary.pi2,
        frustration_bound,
        upper,
        lower: 1.0,
        holds: pi1 >= 1.0 - BOUND_TOL && pi1 <= upper + BOUND_TOL,
        symmetric_l: g.is_degree_regular(1e-9),
        exact_frustration: fr.exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_signed_graph, RandomGraphParams};
    use approx::assert_abs_diff_eq;

    fn negative_triangle() -> SignedGraph {
        SignedGraph::from_edges(3, &[(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)]).unwrap()
    }

    /// Independent oracle: enumerate every signature (no `s₀` fixing, no
    /// incremental updates) and evaluate the Laplacian form directly.
    fn brute_force(g: &SignedGraph) -> f64 {
        let n = g.n();
        let l = g.operators().normalized_laplacian;
        (0u32..(1 << n))
            .map(|mask| {
                let s: Vec<f64> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                let mut e = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            e += l[(i, j)].abs() + s[i] * l[(i, j)] * s[j];
                        }
                    }
                }
                0.5 * e
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn triangle_energies() {
        let g = negative_triangle();
        // All three edges frustrated: six ordered pairs, each |ℒᵢⱼ|+ℒᵢⱼ = 1.
        assert_abs_diff_eq!(
            energy(&g, &Signature::ones(3)).unwrap(),
            3.0,
            epsilon = 1e-15
        );
        let s = Signature::new(vec![1, 1, -1]).unwrap();
        assert_abs_diff_eq!(energy(&g, &s).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(brute_force(&g), 1.0);
    }

    #[test]
    fn balanced_signature_has_zero_energy() {
        let g = random_signed_graph(&RandomGraphParams::new(9, 0.5, 0.0), 1).unwrap();
        let s = Signature::new(vec![1, -1, 1, 1, -1, -1, 1, -1, 1]).unwrap();
        let sw = g.switch(&s).unwrap();
        let bal = sw.structural_balance().signature.unwrap();
        assert_abs_diff_eq!(energy(&sw, &bal).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_triangle_and_edge() {
        let r = frustration_exact(&negative_triangle()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-15);
        assert!(r.exact);
        let plus = r.signature.as_slice().iter().filter(|&&x| x == 1).count();
        assert!(plus == 1 || plus == 2);
        // Lexicographically smallest among s₀ = +1 minimizers.
        assert_eq!(r.signature.as_slice(), &[1, -1, -1]);

        let edge = SignedGraph::from_edges(2, &[(0, 1, -1.0)]).unwrap();
        assert_eq!(frustration_exact(&edge).unwrap().value, 0.0);
    }

    #[test]
    fn exact_matches_brute_force() {
        for seed in 0..12 {
            let n = 3 + (seed as usize % 8);
            let g = random_signed_graph(&RandomGraphParams::new(n, 0.6, 0.45), seed).unwrap();
            let r = frustration_exact(&g).unwrap();
            assert_abs_diff_eq!(r.value, brute_force(&g), epsilon = 1e-12);
            assert_eq!(r.value == 0.0, g.is_structurally_balanced());
        }
    }

    #[test]
    fn exact_rejects_large_graphs() {
        let g = random_signed_graph(&RandomGraphParams::new(25, 0.3, 0.5), 0).unwrap();
        assert!(matches!(
            frustration_exact(&g),
            Err(Error::TooLargeForExact { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn heuristic_on_small_cases() {
        let r = frustration_heuristic(&negative_triangle(), 8, 3).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-15);
        assert!(!r.exact);
        for seed in 0..5 {
            let g = random_signed_graph(&RandomGraphParams::new(14, 0.4, 0.0), seed).unwrap();
            assert_eq!(frustration_heuristic(&g, 1, seed).unwrap().value.abs(), 0.0);
        }
    }

    #[test]
    fn heuristic_trace_strictly_decreasing_and_never_below_exact() {
        for seed in 0..10 {
            let g = random_signed_graph(&RandomGraphParams::new(12, 0.5, 0.4), seed).unwrap();
            let h = frustration_heuristic(&g, 10, seed).unwrap();
            for w in h.energy_trace.windows(2) {
                assert!(w[1] < w[0]);
            }
            let e = frustration_exact(&g).unwrap();
            assert!(h.value >= e.value - 1e-12);
        }
    }

    #[test]
    fn quadratic_identity_at_optimum() {
        let g = random_signed_graph(&RandomGraphParams::new(10, 0.5, 0.5), 5).unwrap();
        let r = frustration_exact(&g).unwrap();
        let m = coupling(&g);
        let s = r.signature.to_f64();
        let q: f64 = (0..10)
            .map(|i| s[i] * (0..10).map(|j| m[(i, j)] * s[j]).sum::<f64>())
            .sum();
        assert_abs_diff_eq!(2.0 * r.value, 10.0 - q, epsilon = 1e-12);
    }

    #[test]
    fn bound_on_triangle() {
        let g = negative_triangle();
        let r = check_pi1_bounds(&g, &frustration_exact(&g).unwrap()).unwrap();
        assert_abs_diff_eq!(r.pi1, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.frustration_bound, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.upper, 2.0, epsilon = 1e-12);
        assert!(r.holds && r.symmetric_l);
    }

    #[test]
    fn bound_is_tight_for_balanced() {
        let g = random_signed_graph(&RandomGraphParams::new(8, 0.6, 0.0), 2).unwrap();
        let r = check_pi1_bounds(&g, &frustration_exact(&g).unwrap()).unwrap();
        assert_abs_diff_eq!(r.upper, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pi1, 1.0, epsilon = 1e-10);
        assert!(r.holds);
    }

    #[test]
    fn degenerate_bound() {
        let g = negative_triangle();
        let fake = FrustrationResult {
            value: 1.5,
            signature: Signature::ones(3),
            exact: false,
            restarts: 1,
            energy_trace: vec![],
        };
        assert!(matches!(
            check_pi1_bounds(&g, &fake),
            Err(Error::DegenerateBound(_))
        ));
    }
}
