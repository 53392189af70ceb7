//! Admissible sigmoids: built-in maps pass the validator, a map with slope 2
//! at the origin does not.
//!
//!     cargo run --example nonlinearities

use std::sync::Arc;

use sigdyn::nonlinearity::{
    make_profile, validate_sigmoid, GridSpec, NonlinearityProfile, Rational, Sigmoid, Tanh,
};

#[derive(Debug)]
struct Steep;

impl Sigmoid for Steep {
    fn value(&self, x: f64) -> f64 {
        (2.0 * x).tanh()
    }
    fn derivative(&self, x: f64) -> f64 {
        2.0 / (2.0 * x).cosh().powi(2)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        -8.0 * (2.0 * x).tanh() / (2.0 * x).cosh().powi(2)
    }
    fn inverse(&self, y: f64) -> f64 {
        0.5 * y.atanh()
    }
    fn name(&self) -> String {
        "tanh(2x)".into()
    }
}

fn main() -> sigdyn::Result<()> {
    let maps: Vec<Arc<dyn Sigmoid>> = vec![
        Arc::new(Tanh),
        Arc::new(Rational::new(1.0)?),
        Arc::new(Rational::new(3.0)?),
        Arc::new(Steep),
    ];
    for m in &maps {
        let r = validate_sigmoid(m.as_ref(), GridSpec::default());
        println!(
            "{:<24} passed = {:<5} {:?}",
            m.name(),
            r.passed(),
            r.failures
        );
    }

    let mixed = NonlinearityProfile::heterogeneous(vec![
        Arc::new(Tanh),
        Arc::new(Rational::new(2.0)?),
        Arc::new(Tanh),
    ]);
    let x = [0.5, -1.0, 2.0];
    println!("heterogeneous psi(x) = {:?}", mixed.apply(&x));
    println!("V(x) = {:.6}", mixed.lyapunov(&x));

    let p = make_profile("rational", Some("k=2"), 3)?;
    println!("rational k=2 psi'(x) = {:?}", p.apply_derivative(&x));
    Ok(())
}
