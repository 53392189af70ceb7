//! Driving the command-line pipeline from code: build an experiment config,
//! run it, and print the summary the binary would print.
//!
//!     cargo run --example experiment_config

use sigdyn::cli::{run, ExperimentConfig, GeneratorSpec, GraphSource, Mode, SCHEMA_VERSION};

fn main() {
    let cfg = ExperimentConfig {
        schema: SCHEMA_VERSION,
        mode: Some(Mode::Analyze),
        graph: Some(GraphSource::Generate(GeneratorSpec {
            n: 16,
            edge_prob: 0.6,
            negative_prob: 0.3,
            weight_low: None,
            weight_high: None,
            max_attempts: None,
            seed: 8,
            regularize: Some(1.0),
        })),
        eps_step: Some(0.3),
        ..Default::default()
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&cfg).expect("config serializes")
    );
    match run(&cfg) {
        Ok(report) => print!("{}", report.summary),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
