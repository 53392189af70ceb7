//! Equilibrium norms against the frustration ceiling pi(n - 2 eps) on a
//! family of graphs sharing |A| with increasingly negative signs.
//!
//!     cargo run --release --example norm_bound

use sigdyn::dynamics_ct::{check_norm_bound, find_equilibria, EquilibriumOptions};
use sigdyn::frustration::frustration_auto;
use sigdyn::graph::{random_signed_graph, resign, RandomGraphParams};
use sigdyn::nonlinearity::NonlinearityProfile;

fn main() -> sigdyn::Result<()> {
    let base = random_signed_graph(&RandomGraphParams::new(30, 0.8, 0.0), 3)?;
    let p = NonlinearityProfile::tanh(base.n());
    for (k, beta) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        let g = resign(&base, beta, k as u64)?;
        let fr = frustration_auto(&g, 24, 64, 1)?;
        let mut worst: f64 = 0.0;
        for pi in [2.0, 4.0, 8.0] {
            let set = find_equilibria(&g, &p, pi, &EquilibriumOptions::with_seeds(32, 5))?;
            let r = check_norm_bound(&g, pi, &set, &fr);
            assert!(r.all_within || !fr.exact);
            worst = r.norms.iter().fold(worst, |m, v| m.max(v / pi));
        }
        println!(
            "beta = {beta:.2}: frustration {:.3} ({}), ceiling n - 2eps = {:.3}, max |x*|_1 / pi = {:.3}",
            fr.value,
            if fr.exact { "exact" } else { "heuristic" },
            g.n() as f64 - 2.0 * fr.value,
            worst
        );
    }
    Ok(())
}
