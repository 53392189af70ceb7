use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{inf_norm, vector_field};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::nonlinearity::NonlinearityProfile;
use crate::output::fmt_f64;

const MAX_REFINE_DEPTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Stop once `‖f(x)‖∞` falls below this.
    pub stop_tol: Option<f64>,
    /// Step-doubling error tolerance; a step whose estimate exceeds it is
    /// split in halves recursively.
    pub refine_tol: Option<f64>,
    /// Keep every k-th state (the last state is always kept).
    pub record_every: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            stop_tol: None,
            refine_tol: None,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub pi: f64,
    pub step: f64,
    pub method: String,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Whether the run stopped early on `stop_tol`.
    pub converged: bool,
    pub steps_taken: usize,
    pub refinements: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds the initial time")
    }

    /// `t,x1,…,xn` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_state_csv(w, "t", &self.times, &self.states)
    }
}

pub(crate) fn write_state_csv<W: Write>(
    w: W,
    index: &str,
    idx: &[f64],
    states: &[Vec<f64>],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let n = states.first().map_or(0, Vec::len);
    let mut header = vec![index.to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    out.write_record(&header).map_err(csv_err)?;
    for (t, x) in idx.iter().zip(states) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(x.iter().map(|&v| fmt_f64(v)));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            context: "csv output".into(),
            message: format!("{other:?}"),
        },
    }
}

fn rk4(g: &SignedGraph, p: &NonlinearityProfile, pi: f64, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let k1 = vector_field(g, p, pi, x);
    let tmp: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k1[i]).collect();
    let k2 = vector_field(g, p, pi, &tmp);
    let tmp: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k2[i]).collect();
    let k3 = vector_field(g, p, pi, &tmp);
    let tmp: Vec<f64> = (0..n).map(|i| x[i] + h * k3[i]).collect();
    let k4 = vector_field(g, p, pi, &tmp);
    (0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn refined_step(
    g: &SignedGraph,
    p: &NonlinearityProfile,
    pi: f64,
    x: &[f64],
    h: f64,
    tol: f64,
    depth: u32,
    refinements: &mut usize,
) -> Vec<f64> {
    let full = rk4(g, p, pi, x, h);
    let mid = rk4(g, p, pi, x, 0.5 * h);
    let half = rk4(g, p, pi, &mid, 0.5 * h);
    let err = full
        .iter()
        .zip(&half)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / 15.0;
    if err <= tol || depth >= MAX_REFINE_DEPTH {
        return half;
    }
    *refinements += 1;
    let mid = refined_step(g, p, pi, x, 0.5 * h, tol, depth + 1, refinements);
    refined_step(g, p, pi, &mid, 0.5 * h, tol, depth + 1, refinements)
}

/// Classic RK4 with fixed step `h` on `[0, horizon]`.
pub fn integrate(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    pi: f64,
    x0: &[f64],
    horizon: f64,
    h: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    profile.check_size(g.n())?;
    if x0.len() != g.n() {
        return Err(Error::ProfileSize {
            expected: g.n(),
            got: x0.len(),
        });
    }
    if !(h > 0.0 && horizon > 0.0 && h.is_finite() && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and T > 0, got h = {h}, T = {horizon}"
        )));
    }
    let steps = (horizon / h).round().max(1.0) as usize;
    let every = opts.record_every.max(1);
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut refinements = 0;
    let mut converged = false;
    let mut taken = 0;
    let mut last_recorded = 0;
    for k in 1..=steps {
        if let Some(tol) = opts.stop_tol {
            if inf_norm(&vector_field(g, profile, pi, &x)) < tol {
                converged = true;
                break;
            }
        }
        x = match opts.refine_tol {
            Some(tol) => refined_step(g, profile, pi, &x, h, tol, 0, &mut refinements),
            None => rk4(g, profile, pi, &x, h),
        };
        taken = k;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState(k));
        }
        if k % every == 0 {
            times.push(k as f64 * h);
            states.push(x.clone());
            last_recorded = k;
        }
    }
    if last_recorded != taken {
        times.push(taken as f64 * h);
        states.push(x);
    }
    let method = if opts.refine_tol.is_some() {
        "rk4-step-doubling"
    } else {
        "rk4"
    };
    Ok(Trajectory {
        pi,
        step: h,
        method: method.into(),
        times,
        states,
        converged,
        steps_taken: taken,
        refinements,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::negative_triangle;
    use super::*;
    use crate::graph::{random_signed_graph, RandomGraphParams};
    use crate::spectra::thresholds;

    #[test]
    fn decays_below_pi1() {
        let g = random_signed_graph(&RandomGraphParams::new(8, 0.5, 0.3), 2).unwrap();
        let p = NonlinearityProfile::tanh(8);
        let x0: Vec<f64> = (0..8).map(|i| (i as f64 * 0.9).sin() * 3.0).collect();
        let opts = IntegrateOptions {
            stop_tol: Some(1e-9),
            ..Default::default()
        };
        let t = integrate(&g, &p, 0.5, &x0, 500.0, 0.05, opts).unwrap();
        assert!(t.converged);
        assert!(inf_norm(t.final_state()) <= 1e-6);
        assert_eq!(t.times.len(), t.states.len());
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let g = random_signed_graph(&RandomGraphParams::new(6, 0.7, 0.4), 4).unwrap();
        let p = NonlinearityProfile::tanh(6);
        let pi = 1.3 * thresholds(&g, None).unwrap().pi1;
        let x0 = vec![0.4, -0.3, 0.2, 0.9, -0.5, 0.1];
        let run = |h: f64| integrate(&g, &p, pi, &x0, 2.0, h, IntegrateOptions::default()).unwrap();
        let (a, b, c) = (run(0.1), run(0.05), run(0.025));
        let d1 = a
            .final_state()
            .iter()
            .zip(b.final_state())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let d2 = b
            .final_state()
            .iter()
            .zip(c.final_state())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let ratio = d1 / d2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn refinement_rescues_large_steps() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let x0 = [1.0, -0.5, 0.2];
        assert!(matches!(
            integrate(&g, &p, 1.0, &x0, 1500.0, 3.0, IntegrateOptions::default()),
            Err(Error::NonFiniteState(_))
        ));
        let opts = IntegrateOptions {
            refine_tol: Some(1e-8),
            ..Default::default()
        };
        let t = integrate(&g, &p, 1.0, &x0, 30.0, 3.0, opts).unwrap();
        assert!(t.refinements > 0);
        assert!(inf_norm(t.final_state()) < 1e-3);
    }

    #[test]
    fn csv_layout() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let t = integrate(
            &g,
            &p,
            1.0,
            &[0.1, 0.2, 0.3],
            0.2,
            0.1,
            IntegrateOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,x3");
        assert_eq!(lines.len(), 4);
    }
}
