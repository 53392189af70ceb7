//! Oracles shared by the integration targets.

#![allow(dead_code)]

use sigdyn::graph::{random_signed_graph, RandomGraphParams};
use sigdyn::SignedGraph;

/// Unit-weight triangle with every edge negative.
pub fn negative_triangle() -> SignedGraph {
    SignedGraph::from_edges(3, &[(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)]).unwrap()
}

/// Root of `tanh(a)/a = 2/pi` on `a > 0` by bisection (needs `pi > 2`).
pub fn triangle_alpha(pi: f64) -> f64 {
    let g = |a: f64| a.tanh() / a - 2.0 / pi;
    bisect(g, 1e-9, pi)
}

/// The second orbit type of the triangle at `pi`: `(b, b, c)` with
/// `c = -pi tanh(b)` and `b = -(pi/2)(tanh b + tanh c)`, `b > 0`.
pub fn triangle_beta_gamma(pi: f64) -> (f64, f64) {
    let g = |b: f64| b + 0.5 * pi * (b.tanh() + (-pi * b.tanh()).tanh());
    let b = bisect(g, 1e-9, pi);
    (b, -pi * b.tanh())
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All six permutations of a 3-vector.
pub fn permutations3(v: [f64; 3]) -> Vec<[f64; 3]> {
    const P: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    P.iter().map(|p| [v[p[0]], v[p[1]], v[p[2]]]).collect()
}

/// Brute-force frustration straight from the weights:
/// `min_s Σ_{i,j} |a_ij| [s_i a_ij s_j < 0] / δ_i` over ordered pairs.
pub fn brute_force_frustration(g: &SignedGraph) -> f64 {
    let n = g.n();
    assert!(n <= 20);
    let w = g.weights();
    let d = g.degrees();
    let mut best = f64::INFINITY;
    for mask in 0u64..(1u64 << n) {
        let s = |i: usize| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = w[(i, j)];
                if s(i) * a * s(j) < 0.0 {
                    e += a.abs() / d[i];
                }
            }
        }
        best = best.min(e);
    }
    best
}

/// Seeded unbalanced graphs; `beta` cycles over `betas`.
pub fn unbalanced_graphs(
    count: usize,
    n: usize,
    p: f64,
    betas: &[f64],
    first_seed: u64,
) -> Vec<(u64, SignedGraph)> {
    let mut out = Vec::with_capacity(count);
    let mut seed = first_seed;
    while out.len() < count {
        let beta = betas[out.len() % betas.len()];
        let g = random_signed_graph(&RandomGraphParams::new(n, p, beta), seed).unwrap();
        if !g.is_structurally_balanced() {
            out.push((seed, g));
        }
        seed += 1;
    }
    out
}

pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
