//! Edge domination dynamics.
//!
//! `K` classes of particles random-walk a weighted graph. A particle crossing
//! edge `{i, j}` survives with probability `1 - lambda * sigma`, where `sigma`
//! is the share of the edge's recent surviving traffic that belongs to other
//! classes. The deterministic system tracks, per class, a distribution `nu`
//! over vertices and the surviving flow on every directed slot; the
//! [`stochastic`] module simulates individual particles and serves as a
//! reference for it.

pub mod stochastic;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Topology, WeightedGraph};

/// Consecutive quiet steps required before [`run`] declares convergence.
pub const CONVERGENCE_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitionConfig {
    /// Number of competing classes `K`.
    pub class_count: usize,
    /// Competition strength in `[0, 1]`; 0 disables absorption.
    pub lambda: f64,
    /// Step budget `T`.
    pub max_steps: usize,
    /// L1 threshold on the change of `nu` used by the stopping rule.
    pub convergence_tol: f64,
    pub seed: u64,
    /// Explicit start vertex per class; overrides the seeded draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_vertices: Option<Vec<usize>>,
}

impl CompetitionConfig {
    pub fn new(class_count: usize, lambda: f64) -> Self {
        Self {
            class_count,
            lambda,
            max_steps: 500,
            convergence_tol: 1e-8,
            seed: 0,
            seed_vertices: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_steps(mut self, steps: usize) -> Self {
        self.max_steps = steps;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.convergence_tol = tol;
        self
    }

    pub fn with_seed_vertices(mut self, vertices: Vec<usize>) -> Self {
        self.seed_vertices = Some(vertices);
        self
    }

    pub fn validate(&self) -> Result<()> {
        // K = 1 is accepted for degenerate pipelines (K = C = 1).
        if self.class_count == 0 {
            return Err(Error::param("class count K must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::param(format!(
                "lambda must be in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::param("max steps T must be >= 1"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::param(format!(
                "convergence tolerance must be > 0, got {}",
                self.convergence_tol
            )));
        }
        if let Some(v) = &self.seed_vertices {
            if v.len() != self.class_count {
                return Err(Error::param(format!(
                    "{} seed vertices given for {} classes",
                    v.len(),
                    self.class_count
                )));
            }
        }
        Ok(())
    }
}

/// State of the deterministic system at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// `nu[c][i]`: mass of class `c` at vertex `i`; each row sums to 1.
    pub nu: Vec<Vec<f64>>,
    /// `flows[c][s]`: surviving class-`c` flow through directed slot `s`
    /// during the last step.
    pub flows: Vec<Vec<f64>>,
    pub step: usize,
    /// Start vertex of every class.
    pub seed_vertices: Vec<usize>,
}

impl SystemState {
    pub fn class_count(&self) -> usize {
        self.nu.len()
    }

    /// Debug/fixture export with the non-zero flows keyed by vertex pair.
    pub fn snapshot(&self, g: &WeightedGraph) -> StateSnapshot {
        let mut flows = Vec::new();
        for (class, row) in self.flows.iter().enumerate() {
            for i in 0..g.vertex_count() {
                for s in g.slot_range(i) {
                    if row[s] != 0.0 {
                        flows.push(FlowEntry {
                            class,
                            i,
                            j: g.slot_target(s),
                            value: row[s],
                        });
                    }
                }
            }
        }
        StateSnapshot {
            step: self.step,
            nu: self.nu.clone(),
            flows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub class: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub step: usize,
    pub nu: Vec<Vec<f64>>,
    pub flows: Vec<FlowEntry>,
}

/// Transition probabilities of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTransition {
    /// Per directed slot.
    pub probs: Vec<f64>,
    /// Per undirected edge id.
    pub subordination: Vec<f64>,
}

impl ClassTransition {
    /// Sum of the outgoing probabilities of `v`.
    pub fn row_sum(&self, g: &WeightedGraph, v: usize) -> f64 {
        g.slot_range(v).map(|s| self.probs[s]).sum()
    }
}

fn check_graph(g: &WeightedGraph) -> Result<()> {
    if let Some(&v) = g.isolated_vertices().first() {
        return Err(Error::Simulation(format!(
            "vertex {v} is isolated; the walk is undefined there"
        )));
    }
    Ok(())
}

fn check_state(g: &WeightedGraph, state: &SystemState, cfg: &CompetitionConfig) -> Result<()> {
    let ok = state.nu.len() == cfg.class_count
        && state.flows.len() == cfg.class_count
        && state.nu.iter().all(|r| r.len() == g.vertex_count())
        && state.flows.iter().all(|r| r.len() == g.slot_count());
    if ok {
        Ok(())
    } else {
        Err(Error::param(
            "state dimensions do not match the graph and class count",
        ))
    }
}

/// Start vertices: explicit list from the config, otherwise `K` distinct
/// vertices drawn with the seeded RNG.
pub(crate) fn choose_seed_vertices(n: usize, cfg: &CompetitionConfig) -> Result<Vec<usize>> {
    if cfg.class_count > n {
        return Err(Error::param(format!(
            "class count K = {} exceeds vertex count {n}",
            cfg.class_count
        )));
    }
    match &cfg.seed_vertices {
        Some(v) => {
            if let Some(&bad) = v.iter().find(|&&x| x >= n) {
                return Err(Error::Index { vertex: bad, vertex_count: n });
            }
            Ok(v.clone())
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(sample(&mut rng, n, cfg.class_count).into_vec())
        }
    }
}

/// `nu(0)`: a delta per class on its start vertex; no flows.
pub fn initial_state(g: &WeightedGraph, cfg: &CompetitionConfig) -> Result<SystemState> {
    cfg.validate()?;
    let n = g.vertex_count();
    let seeds = choose_seed_vertices(n, cfg)?;
    let nu = seeds
        .iter()
        .map(|&v| {
            let mut row = vec![0.0; n];
            row[v] = 1.0;
            row
        })
        .collect();
    Ok(SystemState {
        nu,
        flows: vec![vec![0.0; g.slot_count()]; cfg.class_count],
        step: 0,
        seed_vertices: seeds,
    })
}

/// Per-edge, per-class flow in both directions, laid out `[edge * K + class]`.
pub(crate) fn edge_class_flows(g: &WeightedGraph, flows: &[Vec<f64>]) -> Vec<f64> {
    let k = flows.len();
    let mut acc = vec![0.0; g.edge_count() * k];
    for (c, row) in flows.iter().enumerate() {
        for (s, &f) in row.iter().enumerate() {
            acc[g.slot_edge(s) * k + c] += f;
        }
    }
    acc
}

/// Subordination of class `c` on one edge, given all classes' flows on it.
#[inline]
pub(crate) fn subordination_from(per_class: &[f64], c: usize) -> f64 {
    let total: f64 = per_class.iter().sum();
    if total > 0.0 {
        1.0 - per_class[c] / total
    } else {
        1.0 / per_class.len() as f64
    }
}

/// Current relative subordination of class `c` on edge `{i, j}`.
pub fn subordination(
    g: &WeightedGraph,
    state: &SystemState,
    c: usize,
    i: usize,
    j: usize,
) -> Result<f64> {
    let s = g
        .slot(i, j)
        .ok_or_else(|| Error::param(format!("{{{i},{j}}} is not an edge")))?;
    if c >= state.class_count() {
        return Err(Error::param(format!("class {c} out of range")));
    }
    let r = g.reverse_slot(s);
    let per_class: Vec<f64> = state.flows.iter().map(|f| f[s] + f[r]).collect();
    Ok(subordination_from(&per_class, c))
}

fn fill_probs(
    g: &WeightedGraph,
    edge_flows: &[f64],
    k: usize,
    lambda: f64,
    c: usize,
    probs: &mut [f64],
) {
    for i in 0..g.vertex_count() {
        let inv_strength = 1.0 / g.strength(i);
        for s in g.slot_range(i) {
            let e = g.slot_edge(s);
            let sigma = subordination_from(&edge_flows[e * k..(e + 1) * k], c);
            probs[s] = g.slot_weight(s) * inv_strength * (1.0 - lambda * sigma);
        }
    }
}

/// Transition matrix `P^c` of the current state.
pub fn build_transition(
    g: &WeightedGraph,
    state: &SystemState,
    cfg: &CompetitionConfig,
    c: usize,
) -> Result<ClassTransition> {
    check_graph(g)?;
    check_state(g, state, cfg)?;
    if c >= cfg.class_count {
        return Err(Error::param(format!("class {c} out of range")));
    }
    let k = cfg.class_count;
    let edge_flows = edge_class_flows(g, &state.flows);
    let mut probs = vec![0.0; g.slot_count()];
    fill_probs(g, &edge_flows, k, cfg.lambda, c, &mut probs);
    let subordination = (0..g.edge_count())
        .map(|e| subordination_from(&edge_flows[e * k..(e + 1) * k], c))
        .collect();
    Ok(ClassTransition {
        probs,
        subordination,
    })
}

/// One synchronous step of every class; transitions come from the input state.
pub fn step(g: &WeightedGraph, state: &SystemState, cfg: &CompetitionConfig) -> Result<SystemState> {
    cfg.validate()?;
    check_graph(g)?;
    check_state(g, state, cfg)?;
    advance(g, state, cfg)
}

fn advance(g: &WeightedGraph, state: &SystemState, cfg: &CompetitionConfig) -> Result<SystemState> {
    let k = cfg.class_count;
    let n = g.vertex_count();
    let edge_flows = edge_class_flows(g, &state.flows);
    let mut probs = vec![0.0; g.slot_count()];
    let mut nu = Vec::with_capacity(k);
    let mut flows = Vec::with_capacity(k);
    for c in 0..k {
        fill_probs(g, &edge_flows, k, cfg.lambda, c, &mut probs);
        let mass = &state.nu[c];
        let mut raw = vec![0.0; n];
        let mut flow = vec![0.0; g.slot_count()];
        for i in 0..n {
            let m = mass[i];
            if m == 0.0 {
                continue;
            }
            for s in g.slot_range(i) {
                let f = m * probs[s];
                flow[s] = f;
                raw[g.slot_target(s)] += f;
            }
        }
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!(
                "class {c} lost all of its mass at step {}",
                state.step + 1
            )));
        }
        raw.iter_mut().for_each(|x| *x /= total);
        nu.push(raw);
        flows.push(flow);
    }
    Ok(SystemState {
        nu,
        flows,
        step: state.step + 1,
        seed_vertices: state.seed_vertices.clone(),
    })
}

/// Sum over classes of the L1 distance between two distributions.
pub fn l1_change(a: &SystemState, b: &SystemState) -> f64 {
    a.nu.iter()
        .zip(&b.nu)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SystemState,
    /// `true` when the stopping rule fired before the step budget ran out.
    pub converged: bool,
}

/// Iterates [`step`] until `T` steps or until the L1 change of `nu` stays
/// below the tolerance for [`CONVERGENCE_WINDOW`] consecutive steps.
pub fn run(g: &WeightedGraph, cfg: &CompetitionConfig) -> Result<SystemState> {
    run_outcome(g, cfg).map(|o| o.state)
}

pub fn run_outcome(g: &WeightedGraph, cfg: &CompetitionConfig) -> Result<RunOutcome> {
    let state = initial_state(g, cfg)?;
    run_from(g, cfg, state)
}

/// Continues the dynamics from an arbitrary valid state.
pub fn run_from(
    g: &WeightedGraph,
    cfg: &CompetitionConfig,
    mut state: SystemState,
) -> Result<RunOutcome> {
    cfg.validate()?;
    check_graph(g)?;
    check_state(g, &state, cfg)?;
    let mut quiet = 0;
    while state.step < cfg.max_steps {
        let next = advance(g, &state, cfg)?;
        if l1_change(&state, &next) < cfg.convergence_tol {
            quiet += 1;
        } else {
            quiet = 0;
        }
        state = next;
        if quiet >= CONVERGENCE_WINDOW {
            return Ok(RunOutcome {
                state,
                converged: true,
            });
        }
    }
    Ok(RunOutcome {
        state,
        converged: false,
    })
}
