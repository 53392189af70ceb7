//! Euler map on the all-negative triangle: with a large step the origin
//! loses stability through period doubling before the pitchfork threshold.
//!
//!     cargo run --example discrete_time

use sigdyn::dynamics_dt::{classify_first_bifurcation, simulate, step_regime};
use sigdyn::nonlinearity::NonlinearityProfile;
use sigdyn::spectra::thresholds;
use sigdyn::SignedGraph;

fn main() -> sigdyn::Result<()> {
    let g = SignedGraph::from_edges(3, &[(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)])?;
    let p = NonlinearityProfile::tanh(3);
    for eps in [0.3, 0.45] {
        let s = thresholds(&g, Some(eps))?;
        let regime = step_regime(&g, eps);
        println!(
            "eps = {eps}: eps*max_degree = {:.2}, pi1 = {:.4}, pi1d = {:.4}, first bifurcation {:?}",
            regime.eps_max_degree,
            s.pi1,
            s.pi1d.unwrap_or(f64::NAN),
            classify_first_bifurcation(&s)?
        );
        for pi in [1.1, 1.6, 2.5] {
            let o = simulate(&g, &p, pi, eps, &[0.4, -0.1, 0.2], 100_000, 1e-12)?;
            println!(
                "  pi = {pi}: {:<11} after {:>6} iterations, amplitude {:.4}",
                o.kind.as_str(),
                o.iterations,
                o.amplitude
            );
        }
    }
    Ok(())
}
