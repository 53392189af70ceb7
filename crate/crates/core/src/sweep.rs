//! Sweeps over the social effort `π`: equilibrium branches of the
//! continuous-time model, attractors of the Euler map, branch labels, and
//! numerical onset estimates.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics_ct::{find_equilibria, EquilibriumOptions, EquilibriumSet, Stability};
use crate::dynamics_dt::{polish_fixed_point, simulate, DtKind, DtOutcome, ZERO_TOL};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::nonlinearity::NonlinearityProfile;
use crate::output::fmt_f64;
use crate::spectra::{thresholds, SpectralSummary};

/// Strictly increasing grid of `π` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PiGrid(Vec<f64>);

impl PiGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty pi grid".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "pi grid values must be finite and >= 0".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "pi grid must be strictly increasing".into(),
            ));
        }
        Ok(PiGrid(values))
    }

    /// `start, start + step, …` up to `end` inclusive (within a 1e-9 step
    /// fraction), computed as `start + k·step` to avoid drift.
    pub fn range(start: f64, step: f64, end: f64) -> Result<Self> {
        if !(step > 0.0 && end >= start) {
            return Err(Error::InvalidParameter(format!(
                "bad grid {start}:{step}:{end}"
            )));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        PiGrid::new((0..count).map(|k| start + k as f64 * step).collect())
    }

    /// Parses `start:step:end`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let nums: std::result::Result<Vec<f64>, _> =
            parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        match (parts.len(), nums) {
            (3, Ok(v)) => PiGrid::range(v[0], v[1], v[2]),
            _ => Err(Error::InvalidParameter(format!(
                "grid `{spec}` is not start:step:end"
            ))),
        }
    }

    pub fn ct_default() -> Self {
        PiGrid::range(0.005, 0.005, 4.0).expect("valid default grid")
    }

    pub fn dt_default() -> Self {
        PiGrid::range(0.01, 0.01, 3.0).expect("valid default grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for PiGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        PiGrid::new(v)
    }
}

impl From<PiGrid> for Vec<f64> {
    fn from(g: PiGrid) -> Self {
        g.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub seeds_per_point: usize,
    pub seed: u64,
    pub newton_tol: f64,
    pub dedup_radius: f64,
    pub spectral_directions: usize,
    /// Second, serial pass seeding each point from the previous one.
    pub warm: bool,
    /// Largest ∞-distance at which a state continues an existing branch,
    /// relative to `max(1, ‖branch‖∞)`.
    pub match_radius: f64,
    pub dt_max_iters: usize,
    pub dt_tol: f64,
    /// Box half-width for random initial conditions of the map.
    pub dt_init_box: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            seeds_per_point: 16,
            seed: 0,
            newton_tol: 1e-10,
            dedup_radius: 1e-5,
            spectral_directions: 3,
            warm: true,
            match_radius: 0.25,
            dt_max_iters: 20_000,
            dt_tol: 1e-10,
            dt_init_box: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Equilibrium,
    FixedPoint,
    Period2,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::Equilibrium => "equilibrium",
            BranchKind::FixedPoint => "fixed_point",
            BranchKind::Period2 => "period2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    /// 0 for the origin, `+b` / `−b` for the two members of a mirrored pair.
    pub branch: i64,
    pub kind: BranchKind,
    pub state: Vec<f64>,
    /// Odd-index iterate of a 2-cycle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<Vec<f64>>,
    pub norm1: f64,
    pub norm2: f64,
    pub stability: Option<Stability>,
    /// `‖x_even − x_odd‖∞ / 2` for 2-cycles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl BranchRecord {
    fn new(kind: BranchKind, state: Vec<f64>, stability: Option<Stability>) -> Self {
        let (norm1, norm2) = norms(&state);
        BranchRecord {
            branch: 0,
            kind,
            state,
            partner: None,
            norm1,
            norm2,
            stability,
            amplitude: None,
        }
    }

    fn is_origin(&self) -> bool {
        self.kind != BranchKind::Period2 && inf_norm(&self.state) <= ZERO_TOL
    }
}

fn norms(x: &[f64]) -> (f64, f64) {
    (
        x.iter().map(|v| v.abs()).sum(),
        x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    )
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn neg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -v).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub pi: f64,
    pub records: Vec<BranchRecord>,
    /// Distinct equilibria (continuous time) or distinct fixed points reached,
    /// origin included.
    pub equilibria: usize,
    pub cycles: usize,
    pub undecided: usize,
    pub seeds: usize,
}

impl SweepPoint {
    fn has_nontrivial(&self) -> bool {
        self.records
            .iter()
            .any(|r| r.kind != BranchKind::Period2 && !r.is_origin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnsetKind {
    /// First nontrivial equilibrium or fixed point.
    Nontrivial,
    /// First point with more than three equilibria.
    Multi,
    /// First 2-cycle.
    Cycle,
}

impl OnsetKind {
    fn label(self) -> &'static str {
        match self {
            OnsetKind::Nontrivial => "nontrivial",
            OnsetKind::Multi => "multi",
            OnsetKind::Cycle => "cycle",
        }
    }
}

/// Midpoint of the grid cell in which the indicator first switches on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Onset {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Cell width.
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Onsets {
    pub nontrivial: Option<Onset>,
    pub multi: Option<Onset>,
    pub cycle: Option<Onset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Ct,
    Dt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub eps_step: Option<f64>,
    pub thresholds: SpectralSummary,
    pub points: Vec<SweepPoint>,
    pub onsets: Onsets,
    /// Broken necessary conditions (map only).
    pub violations: Vec<String>,
}

/// Per-point counts without states, for JSON summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub mode: SweepMode,
    pub eps_step: Option<f64>,
    pub thresholds: SpectralSummary,
    pub onsets: Onsets,
    pub grid_points: usize,
    pub pi_min: f64,
    pub pi_max: f64,
    pub branches: usize,
    pub violations: Vec<String>,
    pub counts: Vec<PointCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCount {
    pub pi: f64,
    pub equilibria: usize,
    pub cycles: usize,
    pub undecided: usize,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.pi).collect()
    }

    pub fn summary(&self) -> SweepSummary {
        let branches = self
            .points
            .iter()
            .flat_map(|p| {
                p.records
                    .iter()
                    .map(|r| (r.kind == BranchKind::Period2, r.branch.abs()))
            })
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        SweepSummary {
            mode: self.mode,
            eps_step: self.eps_step,
            thresholds: self.thresholds.clone(),
            onsets: self.onsets,
            grid_points: self.points.len(),
            pi_min: self.points.first().map_or(f64::NAN, |p| p.pi),
            pi_max: self.points.last().map_or(f64::NAN, |p| p.pi),
            branches,
            violations: self.violations.clone(),
            counts: self
                .points
                .iter()
                .map(|p| PointCount {
                    pi: p.pi,
                    equilibria: p.equilibria,
                    cycles: p.cycles,
                    undecided: p.undecided,
                })
                .collect(),
        }
    }

    /// `pi,branch,norm1,norm2,stability,kind`; a 2-cycle contributes one row
    /// per iterate.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        out.write_record(["pi", "branch", "norm1", "norm2", "stability", "kind"])
            .map_err(io)?;
        for p in &self.points {
            for r in &p.records {
                let st = r.stability.map_or("unknown", Stability::as_str);
                let mut rows = vec![(r.norm1, r.norm2)];
                if let Some(q) = &r.partner {
                    rows.push(norms(q));
                }
                for (n1, n2) in rows {
                    out.write_record([
                        fmt_f64(p.pi),
                        r.branch.to_string(),
                        fmt_f64(n1),
                        fmt_f64(n2),
                        st.to_string(),
                        r.kind.as_str().to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Midpoint of the first grid cell across which the requested indicator
/// switches from off to on.
pub fn estimate_onset(r: &SweepResult, which: OnsetKind) -> Result<Onset> {
    let on: Vec<bool> = r
        .points
        .iter()
        .map(|p| match which {
            OnsetKind::Nontrivial => p.has_nontrivial(),
            OnsetKind::Multi => p.equilibria > 3,
            OnsetKind::Cycle => p.cycles > 0,
        })
        .collect();
    match on.iter().position(|&b| b) {
        Some(k) if k > 0 => {
            let (lo, hi) = (r.points[k - 1].pi, r.points[k].pi);
            Ok(Onset {
                value: 0.5 * (lo + hi),
                lo,
                hi,
                error_bound: hi - lo,
            })
        }
        _ => Err(Error::NoTransition(which.label())),
    }
}

fn all_onsets(r: &SweepResult) -> Onsets {
    Onsets {
        nontrivial: estimate_onset(r, OnsetKind::Nontrivial).ok(),
        multi: estimate_onset(r, OnsetKind::Multi).ok(),
        cycle: estimate_onset(r, OnsetKind::Cycle).ok(),
    }
}

fn point_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Continuous-time sweep: a cold pass of [`find_equilibria`] at every grid
/// point, then a serial warm pass seeding each point with the equilibria of
/// the previous one.
pub fn sweep_ct(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    grid: &PiGrid,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let summary = thresholds(g, None)?;
    let eq_opts = |k: usize| EquilibriumOptions {
        n_seeds: opts.seeds_per_point,
        seed: point_seed(opts.seed, k),
        newton_tol: opts.newton_tol,
        dedup_radius: opts.dedup_radius,
        spectral_directions: opts.spectral_directions,
        ..Default::default()
    };
    let mut sets: Vec<EquilibriumSet> = grid
        .values()
        .par_iter()
        .enumerate()
        .map(|(k, &pi)| find_equilibria(g, profile, pi, &eq_opts(k)))
        .collect::<Result<_>>()?;
    if opts.warm {
        for k in 1..sets.len() {
            let warm: Vec<Vec<f64>> = sets[k - 1].nontrivial().map(|r| r.state.clone()).collect();
            if warm.is_empty() {
                continue;
            }
            let o = EquilibriumOptions {
                n_seeds: 0,
                spectral_directions: 0,
                warm_starts: warm,
                ..eq_opts(k)
            };
            let extra = find_equilibria(g, profile, grid.values()[k], &o)?;
            sets[k].merge(extra);
        }
    }
    let mut points: Vec<SweepPoint> = sets
        .into_iter()
        .map(|s| SweepPoint {
            pi: s.pi,
            equilibria: s.len(),
            cycles: 0,
            undecided: 0,
            seeds: s.seeds_used,
            records: s
                .records
                .into_iter()
                .map(|r| BranchRecord::new(BranchKind::Equilibrium, r.state, r.stability))
                .collect(),
        })
        .collect();
    label_branches(&mut points, opts.match_radius);
    let mut r = SweepResult {
        mode: SweepMode::Ct,
        eps_step: None,
        thresholds: summary,
        points,
        onsets: Onsets::default(),
        violations: Vec::new(),
    };
    r.onsets = all_onsets(&r);
    Ok(r)
}

/// Attractors of the Euler map found from a set of initial conditions,
/// deduplicated.
struct Attractors {
    fixed: Vec<Vec<f64>>,
    cycles: Vec<(Vec<f64>, Vec<f64>, f64)>,
    undecided: usize,
    violations: Vec<String>,
}

impl Attractors {
    fn add(
        &mut self,
        o: DtOutcome,
        g: &SignedGraph,
        profile: &NonlinearityProfile,
        s: &SpectralSummary,
        opts: &SweepOptions,
    ) {
        match o.kind {
            DtKind::Undecided => self.undecided += 1,
            DtKind::FixedPoint => {
                let mut x = o.state.clone();
                if let Some(p) = polish_fixed_point(g, profile, o.pi, &x, opts.newton_tol) {
                    if inf_dist(&p, &x) <= 1e-6 {
                        x = p;
                    }
                }
                if inf_norm(&x) <= ZERO_TOL {
                    x.iter_mut().for_each(|v| *v = 0.0);
                }
                let polished = DtOutcome {
                    state: x.clone(),
                    ..o
                };
                if let Some(v) = polished.necessary_condition_violation(s) {
                    self.violations.push(v);
                }
                if !self
                    .fixed
                    .iter()
                    .any(|f| inf_dist(f, &x) <= opts.dedup_radius)
                {
                    self.fixed.push(x);
                }
            }
            DtKind::Period2 => {
                if let Some(v) = o.necessary_condition_violation(s) {
                    self.violations.push(v);
                }
                let odd = o.partner.clone().expect("2-cycle carries its partner");
                let same = |(e, d, _): &(Vec<f64>, Vec<f64>, f64)| {
                    (inf_dist(e, &o.state) <= 1e-6 && inf_dist(d, &odd) <= 1e-6)
                        || (inf_dist(e, &odd) <= 1e-6 && inf_dist(d, &o.state) <= 1e-6)
                };
                if !self.cycles.iter().any(same) {
                    self.cycles.push((o.state, odd, o.amplitude));
                }
            }
        }
    }
}

/// Euler-map sweep: at every grid point the map is iterated from random
/// initial conditions in `[−b, b]ⁿ` (and, in the warm pass, from the
/// attractors of the previous point); fixed points and 2-cycles are recorded,
/// and each outcome is checked against the necessary conditions
/// `π > π₁` (nonzero fixed point) and `π > π₁,d` (2-cycle).
pub fn sweep_dt(
    g: &SignedGraph,
    profile: &NonlinearityProfile,
    grid: &PiGrid,
    eps: f64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let summary = thresholds(g, Some(eps))?;
    let n = g.n();
    let run = |pi: f64, starts: &[Vec<f64>]| -> Result<Attractors> {
        let mut acc = Attractors {
            fixed: Vec::new(),
            cycles: Vec::new(),
            undecided: 0,
            violations: Vec::new(),
        };
        for x0 in starts {
            let o = simulate(g, profile, pi, eps, x0, opts.dt_max_iters, opts.dt_tol)?;
            acc.add(o, g, profile, &summary, opts);
        }
        Ok(acc)
    };
    let starts = |k: usize| -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(point_seed(opts.seed, k));
        (0..opts.seeds_per_point.max(1))
            .map(|_| {
                (0..n)
                    .map(|_| rng.random_range(-opts.dt_init_box..=opts.dt_init_box))
                    .collect()
            })
            .collect()
    };
    let mut cells: Vec<(Attractors, usize)> = grid
        .values()
        .par_iter()
        .enumerate()
        .map(|(k, &pi)| {
            let s = starts(k);
            run(pi, &s).map(|a| (a, s.len()))
        })
        .collect::<Result<_>>()?;
    if opts.warm {
        for k in 1..cells.len() {
            let mut warm: Vec<Vec<f64>> = cells[k - 1]
                .0
                .fixed
                .iter()
                .filter(|x| inf_norm(x) > ZERO_TOL)
                .cloned()
                .collect();
            warm.extend(cells[k - 1].0.cycles.iter().map(|c| c.0.clone()));
            if warm.is_empty() {
                continue;
            }
            let extra = run(grid.values()[k], &warm)?;
            let (cell, seeds) = &mut cells[k];
            *seeds += warm.len();
            cell.undecided += extra.undecided;
            cell.violations.extend(extra.violations);
            for x in extra.fixed {
                if !cell
                    .fixed
                    .iter()
                    .any(|f| inf_dist(f, &x) <= opts.dedup_radius)
                {
                    cell.fixed.push(x);
                }
            }
            for c in extra.cycles {
                let dup = cell.cycles.iter().any(|(e, d, _)| {
                    (inf_dist(e, &c.0) <= 1e-6 && inf_dist(d, &c.1) <= 1e-6)
                        || (inf_dist(e, &c.1) <= 1e-6 && inf_dist(d, &c.0) <= 1e-6)
                });
                if !dup {
                    cell.cycles.push(c);
                }
            }
        }
    }
    let mut violations = Vec::new();
    let mut points = Vec::with_capacity(cells.len());
    for ((cell, seeds), &pi) in cells.into_iter().zip(grid.values()) {
        violations.extend(cell.violations);
        let has_origin = cell.fixed.iter().any(|x| inf_norm(x) <= ZERO_TOL);
        let mut records: Vec<BranchRecord> = cell
            .fixed
            .into_iter()
            .map(|x| BranchRecord::new(BranchKind::FixedPoint, x, Some(Stability::Stable)))
            .collect();
        let fixed_count = records.len() + usize::from(!has_origin);
        let cycles = cell.cycles.len();
        for (e, o, amp) in cell.cycles {
            let mut r = BranchRecord::new(BranchKind::Period2, e, Some(Stability::Stable));
            r.partner = Some(o);
            r.amplitude = Some(amp);
            records.push(r);
        }
        points.push(SweepPoint {
            pi,
            records,
            equilibria: fixed_count,
            cycles,
            undecided: cell.undecided,
            seeds,
        });
    }
    label_branches(&mut points, opts.match_radius);
    let mut r = SweepResult {
        mode: SweepMode::Dt,
        eps_step: Some(eps),
        thresholds: summary,
        points,
        onsets: Onsets::default(),
        violations,
    };
    r.onsets = all_onsets(&r);
    Ok(r)
}

/// Nearest-representative branch bookkeeping with `x ↦ −x` folding. Fixed
/// states and 2-cycles use separate id spaces.
fn label_branches(points: &mut [SweepPoint], match_radius: f64) {
    let mut state_reps: Vec<Vec<f64>> = Vec::new();
    let mut cycle_reps: Vec<Vec<f64>> = Vec::new();
    for p in points.iter_mut() {
        let mut used_state = vec![false; state_reps.len()];
        let mut used_cycle = vec![false; cycle_reps.len()];
        let mut labels: Vec<i64> = vec![0; p.records.len()];
        for k in 0..p.records.len() {
            let r = &p.records[k];
            if r.is_origin() {
                continue;
            }
            let cycle = r.kind == BranchKind::Period2;
            // Mirror already labelled at this point?
            let mirror = (0..k).find(|&j| {
                let q = &p.records[j];
                (q.kind == BranchKind::Period2) == cycle
                    && labels[j] != 0
                    && inf_dist(&q.state, &neg(&r.state)) <= 1e-6
                    || cycle
                        && q.kind == BranchKind::Period2
                        && labels[j] != 0
                        && q.partner
                            .as_ref()
                            .is_some_and(|o| inf_dist(o, &neg(&r.state)) <= 1e-6)
            });
            if let Some(j) = mirror {
                labels[k] = -labels[j];
                continue;
            }
            let (reps, used) = if cycle {
                (&mut cycle_reps, &mut used_cycle)
            } else {
                (&mut state_reps, &mut used_state)
            };
            let mut candidates = vec![(r.state.clone(), 1i64)];
            candidates.push((neg(&r.state), -1));
            if let Some(o) = &r.partner {
                candidates.push((o.clone(), 1));
                candidates.push((neg(o), -1));
            }
            let mut best: Option<(usize, i64, f64)> = None;
            for (b, rep) in reps.iter().enumerate() {
                if used[b] {
                    continue;
                }
                for (c, sign) in &candidates {
                    let d = inf_dist(c, rep);
                    if d <= match_radius * inf_norm(rep).max(1.0) && best.is_none_or(|x| d < x.2) {
                        best = Some((b, *sign, d));
                    }
                }
            }
            let (b, sign) = match best {
                Some((b, sign, _)) => (b, sign),
                None => {
                    reps.push(r.state.clone());
                    used.push(false);
                    (reps.len() - 1, 1)
                }
            };
            used[b] = true;
            reps[b] = if sign > 0 {
                r.state.clone()
            } else {
                neg(&r.state)
            };
            labels[k] = sign * (b as i64 + 1);
        }
        for (r, l) in p.records.iter_mut().zip(labels) {
            r.branch = l;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_signed_graph, RandomGraphParams};

    fn negative_triangle() -> SignedGraph {
        SignedGraph::from_edges(3, &[(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)]).unwrap()
    }

    fn synthetic(counts: &[(f64, usize)]) -> SweepResult {
        let g = negative_triangle();
        let points = counts
            .iter()
            .map(|&(pi, c)| {
                let mut records = vec![BranchRecord::new(
                    BranchKind::Equilibrium,
                    vec![0.0; 3],
                    None,
                )];
                for k in 1..c {
                    records.push(BranchRecord::new(
                        BranchKind::Equilibrium,
                        vec![k as f64, 0.0, 0.0],
                        None,
                    ));
                }
                SweepPoint {
                    pi,
                    records,
                    equilibria: c,
                    cycles: 0,
                    undecided: 0,
                    seeds: 1,
                }
            })
            .collect();
        SweepResult {
            mode: SweepMode::Ct,
            eps_step: None,
            thresholds: thresholds(&g, None).unwrap(),
            points,
            onsets: Onsets::default(),
            violations: vec![],
        }
    }

    #[test]
    fn grid_construction() {
        let g = PiGrid::ct_default();
        assert_eq!(g.len(), 800);
        assert!((g.values()[799] - 4.0).abs() < 1e-12);
        assert_eq!(PiGrid::dt_default().len(), 300);
        assert_eq!(PiGrid::parse("1:0.25:9").unwrap().len(), 33);
        assert!(PiGrid::new(vec![1.0, 1.0]).is_err());
        assert!(PiGrid::parse("1:2").is_err());
    }

    #[test]
    fn synthetic_onset() {
        let r = synthetic(&[(1.89, 1), (1.90, 1), (1.91, 3), (1.92, 3)]);
        let o = estimate_onset(&r, OnsetKind::Nontrivial).unwrap();
        assert!((o.value - 1.905).abs() < 1e-12);
        assert!((o.error_bound - 0.01).abs() < 1e-12);
        assert!(matches!(
            estimate_onset(&r, OnsetKind::Multi),
            Err(Error::NoTransition("multi"))
        ));
        let r = synthetic(&[(1.0, 3), (1.1, 5)]);
        assert!(estimate_onset(&r, OnsetKind::Nontrivial).is_err());
    }

    #[test]
    fn ct_sweep_below_pi1_is_flat() {
        let g = random_signed_graph(&RandomGraphParams::new(8, 0.6, 0.3), 1).unwrap();
        let p = NonlinearityProfile::tanh(8);
        let pi1 = thresholds(&g, None).unwrap().pi1;
        let grid = PiGrid::range(0.05, 0.05, 0.95 * pi1).unwrap();
        let r = sweep_ct(&g, &p, &grid, &SweepOptions::default()).unwrap();
        assert!(r
            .points
            .iter()
            .all(|p| p.equilibria == 1 && p.records[0].branch == 0));
        assert!(r.onsets.nontrivial.is_none());
    }

    #[test]
    fn ct_sweep_finds_pitchforks() {
        let g = random_signed_graph(&RandomGraphParams::new(10, 0.5, 0.3), 9).unwrap();
        let p = NonlinearityProfile::tanh(10);
        let t = thresholds(&g, None).unwrap();
        let pi2 = t.pi2_value();
        let grid = PiGrid::range(0.9 * t.pi1, 0.005, pi2 + 0.05).unwrap();
        let r = sweep_ct(&g, &p, &grid, &SweepOptions::default()).unwrap();
        for p in &r.points {
            assert_eq!(p.equilibria % 2, 1);
        }
        let a = r.onsets.nontrivial.unwrap();
        assert!(a.lo < t.pi1 && t.pi1 <= a.hi, "{a:?} vs {}", t.pi1);
        let b = r.onsets.multi.unwrap();
        assert!(
            (b.value - pi2).abs() <= 2.0 * b.error_bound,
            "{b:?} vs {pi2}"
        );
        // The pair born at the first pitchfork keeps one label along the sweep.
        let labels: std::collections::BTreeSet<i64> = r
            .points
            .iter()
            .filter(|p| p.pi > t.pi1 && p.pi < pi2)
            .flat_map(|p| p.records.iter().map(|r| r.branch))
            .collect();
        assert_eq!(labels.into_iter().collect::<Vec<_>>(), vec![-1, 0, 1]);
    }

    #[test]
    fn dt_sweep_on_triangle() {
        let g = negative_triangle();
        let p = NonlinearityProfile::tanh(3);
        let grid = PiGrid::range(0.5, 0.05, 1.9).unwrap();
        let opts = SweepOptions {
            seeds_per_point: 6,
            ..Default::default()
        };
        let r = sweep_dt(&g, &p, &grid, 0.45, &opts).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        let c = r.onsets.cycle.unwrap();
        assert!(c.lo < 11.0 / 9.0 && 11.0 / 9.0 <= c.hi, "{c:?}");
        assert!(r.onsets.nontrivial.is_none());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pi,branch,norm1,norm2,stability,kind\n"));
        assert!(text.contains("period2"));
    }

    #[test]
    fn dt_sweep_below_both_thresholds() {
        let g = random_signed_graph(&RandomGraphParams::new(8, 0.6, 0.3), 4).unwrap();
        let p = NonlinearityProfile::tanh(8);
        let eps = 0.9 / g.max_degree();
        let s = thresholds(&g, Some(eps)).unwrap();
        let top = 0.95 * s.pi1.min(s.pi1d.unwrap());
        let grid = PiGrid::range(0.1, 0.1, top).unwrap();
        let r = sweep_dt(&g, &p, &grid, eps, &SweepOptions::default()).unwrap();
        for p in &r.points {
            assert_eq!(p.records.len(), 1);
            assert!(p.records[0].is_origin());
        }
    }
}
