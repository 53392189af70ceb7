//! The all-negative triangle: a trajectory at pi = 4 and the full set of 13
//! equilibria with their stability.
//!
//!     cargo run --example triangle_equilibria [-- trajectory.csv]

use sigdyn::dynamics_ct::{find_equilibria, integrate, EquilibriumOptions, IntegrateOptions};
use sigdyn::nonlinearity::NonlinearityProfile;
use sigdyn::SignedGraph;

fn main() -> sigdyn::Result<()> {
    let g = SignedGraph::from_edges(3, &[(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)])?;
    let p = NonlinearityProfile::tanh(3);
    let pi = 4.0;

    let opts = IntegrateOptions {
        stop_tol: Some(1e-10),
        record_every: 10,
        ..Default::default()
    };
    let tr = integrate(&g, &p, pi, &[0.3, -0.2, 0.05], 200.0, 0.01, opts)?;
    println!(
        "trajectory settles at {:.6?} (t = {:.2})",
        tr.final_state(),
        tr.final_time()
    );
    if let Some(path) = std::env::args().nth(1) {
        tr.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }

    let set = find_equilibria(&g, &p, pi, &EquilibriumOptions::with_seeds(200, 1))?;
    println!("{} equilibria at pi = {pi}:", set.len());
    for (k, r) in set.records.iter().enumerate() {
        println!(
            "  {k:>2} {:>+9.5} {:>+9.5} {:>+9.5}  |x|_1 = {:.5}  {:<8} mirror = {:?}",
            r.state[0],
            r.state[1],
            r.state[2],
            r.norm1,
            r.stability.map_or("?", |s| s.as_str()),
            r.mirror
        );
    }
    Ok(())
}
