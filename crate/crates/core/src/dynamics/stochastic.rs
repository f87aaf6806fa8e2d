//! Particle-level simulation of the competition.
//!
//! Every active particle picks a neighbor with probability `w_ij / sum_k w_ik`
//! and survives the crossing with probability `1 - lambda * sigma`, where
//! `sigma` is computed from the previous step's surviving traversals. Absorbed
//! particles are replaced in proportion to where the class's particles
//! currently are, so a class never holds more than its initial count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{choose_seed_vertices, subordination_from, CompetitionConfig};
use crate::error::{Error, Result};
use crate::graph::{Topology, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticState {
    /// `counts[c][i]`: active class-`c` particles at vertex `i`.
    pub counts: Vec<Vec<u64>>,
    /// `traversals[c][s]`: particles that crossed slot `s` and survived in the
    /// last step.
    pub traversals: Vec<Vec<u64>>,
    /// Particles generated at each vertex in the last step.
    pub generated: Vec<Vec<u64>>,
    /// Particles absorbed while leaving each vertex in the last step.
    pub absorbed: Vec<Vec<u64>>,
    /// Initial particle count per class.
    pub initial_total: Vec<u64>,
    pub step: usize,
    pub seed_vertices: Vec<usize>,
}

impl StochasticState {
    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    pub fn active(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    /// Traversal counts as reals, shaped like
    /// [`SystemState::flows`](super::SystemState::flows).
    pub fn traversal_flows(&self) -> Vec<Vec<f64>> {
        self.traversals
            .iter()
            .map(|row| row.iter().map(|&x| x as f64).collect())
            .collect()
    }
}

fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map(|b| b.sample(rng)).unwrap_or(0)
}

/// Splits `n` trials over categories with the given (unnormalized) weights
/// using conditional binomials. The result always sums to `n`.
pub fn multinomial<R: Rng>(rng: &mut R, n: u64, weights: &[f64]) -> Vec<u64> {
    let mut out = vec![0; weights.len()];
    let mut remaining = n;
    let mut mass: f64 = weights.iter().sum();
    for (k, &w) in weights.iter().enumerate() {
        if remaining == 0 || mass <= 0.0 {
            break;
        }
        let x = if k + 1 == weights.len() {
            remaining
        } else {
            binomial(rng, remaining, w / mass)
        };
        out[k] = x;
        remaining -= x;
        mass -= w;
    }
    out
}

/// Expected number of particles regenerated at each vertex: `rho_i * deficit`
/// when the class is below its initial count, otherwise zero.
pub fn expected_regeneration(counts: &[u64], initial_total: u64) -> Vec<f64> {
    let active: u64 = counts.iter().sum();
    if active == 0 || active >= initial_total {
        return vec![0.0; counts.len()];
    }
    let deficit = (initial_total - active) as f64;
    counts
        .iter()
        .map(|&x| x as f64 / active as f64 * deficit)
        .collect()
}

/// Draws the regenerated particles for one class; total equals the deficit.
pub fn regenerate<R: Rng>(rng: &mut R, counts: &[u64], initial_total: u64) -> Vec<u64> {
    let active: u64 = counts.iter().sum();
    if active == 0 || active >= initial_total {
        return vec![0; counts.len()];
    }
    let weights: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
    multinomial(rng, initial_total - active, &weights)
}

/// `n0` particles per class on the class's start vertex.
pub fn stochastic_initial_state(
    g: &WeightedGraph,
    cfg: &CompetitionConfig,
    n0: u64,
) -> Result<StochasticState> {
    cfg.validate()?;
    if n0 == 0 {
        return Err(Error::param("initial particle count must be >= 1"));
    }
    let n = g.vertex_count();
    let k = cfg.class_count;
    let seeds = choose_seed_vertices(n, cfg)?;
    let counts = seeds
        .iter()
        .map(|&v| {
            let mut row = vec![0; n];
            row[v] = n0;
            row
        })
        .collect();
    Ok(StochasticState {
        counts,
        traversals: vec![vec![0; g.slot_count()]; k],
        generated: vec![vec![0; n]; k],
        absorbed: vec![vec![0; n]; k],
        initial_total: vec![n0; k],
        step: 0,
        seed_vertices: seeds,
    })
}

/// One step: walk, survive or be absorbed, then regenerate.
pub fn stochastic_step<R: Rng>(
    g: &WeightedGraph,
    state: &StochasticState,
    cfg: &CompetitionConfig,
    rng: &mut R,
) -> Result<StochasticState> {
    let n = g.vertex_count();
    let k = cfg.class_count;
    if let Some(&v) = g.isolated_vertices().first() {
        return Err(Error::Simulation(format!(
            "vertex {v} is isolated; the walk is undefined there"
        )));
    }

    let previous: Vec<Vec<f64>> = state.traversal_flows();
    let edge_flows = super::edge_class_flows(g, &previous);

    let mut counts = Vec::with_capacity(k);
    let mut traversals = Vec::with_capacity(k);
    let mut generated = Vec::with_capacity(k);
    let mut absorbed = Vec::with_capacity(k);

    for c in 0..k {
        let mut arrivals = vec![0u64; n];
        let mut crossed = vec![0u64; g.slot_count()];
        let mut lost = vec![0u64; n];
        for i in 0..n {
            let m = state.counts[c][i];
            if m == 0 {
                continue;
            }
            let slots = g.slot_range(i);
            let weights: Vec<f64> = slots.clone().map(|s| g.slot_weight(s)).collect();
            let chosen = multinomial(rng, m, &weights);
            for (s, x) in slots.zip(chosen) {
                if x == 0 {
                    continue;
                }
                let e = g.slot_edge(s);
                let sigma = subordination_from(&edge_flows[e * k..(e + 1) * k], c);
                let survived = binomial(rng, x, 1.0 - cfg.lambda * sigma);
                crossed[s] = survived;
                lost[i] += x - survived;
                arrivals[g.slot_target(s)] += survived;
            }
        }

        let mut born = vec![0u64; n];
        if arrivals.iter().all(|&x| x == 0) {
            // Extinct class: restart from its start vertex.
            let v = state.seed_vertices[c];
            arrivals[v] = 1;
            born[v] = 1;
        }
        let regen = regenerate(rng, &arrivals, state.initial_total[c]);
        for i in 0..n {
            born[i] += regen[i];
            arrivals[i] += regen[i];
        }
        counts.push(arrivals);
        traversals.push(crossed);
        generated.push(born);
        absorbed.push(lost);
    }

    Ok(StochasticState {
        counts,
        traversals,
        generated,
        absorbed,
        initial_total: state.initial_total.clone(),
        step: state.step + 1,
        seed_vertices: state.seed_vertices.clone(),
    })
}

/// Runs `cfg.max_steps` particle steps with `n0` particles per class.
pub fn stochastic_run(g: &WeightedGraph, cfg: &CompetitionConfig, n0: u64) -> Result<StochasticState> {
    let mut state = stochastic_initial_state(g, cfg, n0)?;
    // Separate stream from the start-vertex draw.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    for _ in 0..cfg.max_steps {
        state = stochastic_step(g, &state, cfg, &mut rng)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barbell() -> WeightedGraph {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        edges.push((4, 5, 1.0));
        WeightedGraph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [0, 1, 7, 1000] {
            let x = multinomial(&mut rng, n, &[0.2, 0.0, 1.3, 0.5]);
            assert_eq!(x.iter().sum::<u64>(), n);
            assert_eq!(x[1], 0);
        }
    }

    #[test]
    fn no_competition_means_no_absorption() {
        let g = barbell();
        let cfg = CompetitionConfig::new(2, 0.0).with_seed(5).with_max_steps(1);
        let mut state = stochastic_initial_state(&g, &cfg, 300).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            state = stochastic_step(&g, &state, &cfg, &mut rng).unwrap();
            for c in 0..2 {
                assert_eq!(state.active(c), 300);
                assert!(state.absorbed[c].iter().all(|&a| a == 0));
                assert!(state.generated[c].iter().all(|&a| a == 0));
            }
        }
    }

    #[test]
    fn bookkeeping_identity_and_cap() {
        let g = barbell();
        let cfg = CompetitionConfig::new(2, 0.8).with_seed(11);
        let mut state = stochastic_initial_state(&g, &cfg, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..60 {
            let next = stochastic_step(&g, &state, &cfg, &mut rng).unwrap();
            for c in 0..2 {
                assert!(next.active(c) <= 200);
                for i in 0..g.vertex_count() {
                    let mut lhs = state.counts[c][i] as i64 + next.generated[c][i] as i64
                        - next.absorbed[c][i] as i64;
                    for s in g.slot_range(i) {
                        let r = g.reverse_slot(s);
                        lhs += next.traversals[c][r] as i64 - next.traversals[c][s] as i64;
                    }
                    assert_eq!(lhs, next.counts[c][i] as i64);
                }
            }
            state = next;
        }
    }

    #[test]
    fn regeneration_expectation() {
        let counts = [3u64, 0, 5, 2];
        let expected = expected_regeneration(&counts, 16);
        for (e, want) in expected.iter().zip([1.8, 0.0, 3.0, 1.2]) {
            assert!((e - want).abs() < 1e-12);
        }
        assert_eq!(expected_regeneration(&counts, 10), vec![0.0; 4]);

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = 10_000;
        let mut sum = [0u64; 4];
        for _ in 0..draws {
            let r = regenerate(&mut rng, &counts, 16);
            assert_eq!(r.iter().sum::<u64>(), 6);
            for (acc, x) in sum.iter_mut().zip(r) {
                *acc += x;
            }
        }
        for (i, &s) in sum.iter().enumerate() {
            let mean = s as f64 / draws as f64;
            assert!((mean - expected[i]).abs() < 0.05, "vertex {i}: {mean}");
        }
    }

    #[test]
    fn extinct_class_restarts_at_start_vertex() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let cfg = CompetitionConfig::new(2, 1.0).with_seed_vertices(vec![0, 1]);
        let mut state = stochastic_initial_state(&g, &cfg, 10).unwrap();
        // class 1 owns the edge completely, so every class-0 particle dies
        state.traversals[1][g.slot(1, 0).unwrap()] = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = stochastic_step(&g, &state, &cfg, &mut rng).unwrap();
        assert_eq!(next.absorbed[0][0], 10);
        assert_eq!(next.counts[0], vec![10, 0]);
        assert_eq!(next.generated[0][0], 10);
    }

    #[test]
    fn seeded_runs_repeat() {
        let g = barbell();
        let cfg = CompetitionConfig::new(2, 0.5).with_seed(3).with_max_steps(20);
        let a = stochastic_run(&g, &cfg, 100).unwrap();
        let b = stochastic_run(&g, &cfg, 100).unwrap();
        assert_eq!(a, b);
        assert!(stochastic_run(&g, &cfg, 0).is_err());
    }
}
