//! Bifurcation diagram of a random unbalanced graph: continuous-time
//! equilibria and Euler-map attractors over a grid of pi.
//!
//!     cargo run --release --example bifurcation_sweep [-- out_dir]

use std::path::PathBuf;

use sigdyn::graph::{random_signed_graph, RandomGraphParams};
use sigdyn::nonlinearity::NonlinearityProfile;
use sigdyn::sweep::{sweep_ct, sweep_dt, PiGrid, SweepOptions};

fn main() -> sigdyn::Result<()> {
    let g = random_signed_graph(&RandomGraphParams::new(20, 0.5, 0.25), 42)?;
    let p = NonlinearityProfile::tanh(g.n());
    let opts = SweepOptions::default();

    let ct = sweep_ct(&g, &p, &PiGrid::range(0.01, 0.01, 4.0)?, &opts)?;
    let t = &ct.thresholds;
    println!("pi1 = {:.4}, pi2 = {:.4}", t.pi1, t.pi2_value());
    println!("continuous time onsets: {:?}", ct.onsets);

    let eps = 0.9 / g.max_degree();
    let dt = sweep_dt(&g, &p, &PiGrid::dt_default(), eps, &opts)?;
    println!(
        "pi1d = {:.4} at eps = {eps:.4}",
        dt.thresholds.pi1d.unwrap_or(f64::NAN)
    );
    println!("map onsets: {:?}", dt.onsets);
    println!("necessary-condition violations: {}", dt.violations.len());

    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/sweep".into()),
    );
    std::fs::create_dir_all(&out)?;
    ct.write_csv(std::fs::File::create(out.join("ct.csv"))?)?;
    dt.write_csv(std::fs::File::create(out.join("dt.csv"))?)?;
    println!(
        "wrote {}/ct.csv and {}/dt.csv",
        out.display(),
        out.display()
    );
    Ok(())
}
