//! Spectrum of the normalized signed Laplacian and the thresholds it fixes,
//! for a balanced graph, the same graph after switching, and a frustrated one.
//!
//!     cargo run --example spectra_thresholds

use sigdyn::graph::{random_signed_graph, RandomGraphParams};
use sigdyn::spectra::thresholds;
use sigdyn::{Signature, SignedGraph};

fn report(label: &str, g: &SignedGraph) -> sigdyn::Result<()> {
    let s = thresholds(g, Some(0.5 / g.max_degree()))?;
    let bal = g.structural_balance();
    println!("{label}");
    println!(
        "  n = {}, edges = {}, balanced = {}",
        g.n(),
        g.edge_count(),
        bal.balanced
    );
    println!(
        "  lambda1 = {:.6}, lambda2 = {:.6}, lambda_n = {:.6}",
        s.lambda1, s.lambda2, s.lambda_n
    );
    println!(
        "  pi1 = {:.6}, pi2 = {}, pi1d = {:.6}",
        s.pi1,
        s.pi2.map_or("inf".into(), |v| format!("{v:.6}")),
        s.pi1d.unwrap_or(f64::NAN)
    );
    if let Some(sig) = bal.signature {
        println!("  balancing signature {:?}", sig.as_slice());
    }
    Ok(())
}

fn main() -> sigdyn::Result<()> {
    let positive = random_signed_graph(&RandomGraphParams::new(10, 0.5, 0.0), 1)?;
    report("all-positive graph", &positive)?;

    let sig = Signature::new(vec![1, -1, 1, 1, -1, -1, 1, -1, 1, 1])?;
    report("after switching by a signature", &positive.switch(&sig)?)?;

    let frustrated = random_signed_graph(&RandomGraphParams::new(10, 0.5, 0.4), 1)?;
    report("random signs", &frustrated)?;

    let triangle = SignedGraph::from_edges(3, &[(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)])?;
    report("all-negative triangle", &triangle)?;
    Ok(())
}
