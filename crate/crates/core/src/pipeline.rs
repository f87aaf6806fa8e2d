//! End-to-end clustering: dynamics, unfolding, density communities, reduction.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{assign_communities, unfold, Partition};
use crate::dynamics::{run_outcome, CompetitionConfig, SystemState};
use crate::error::{Error, Result};
use crate::eval::adjusted_rand_index;
use crate::graph::{NeighborhoodParams, PointDataset, WeightedGraph};
use crate::knn::{build_knn_graph_with, Weighting};
use crate::merge::{modularity, reduce, MergeTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub competition: CompetitionConfig,
    pub neighborhood: NeighborhoodParams,
    /// Final number of clusters `C`.
    pub target_clusters: usize,
    /// Neighbors per point when the input is a point cloud.
    pub knn: Option<usize>,
    pub weighting: Weighting,
    /// Evaluate modularity on the unweighted topology during reduction.
    pub unweighted_q: bool,
}

impl PipelineConfig {
    pub fn new(competition: CompetitionConfig, order: usize, target_clusters: usize) -> Result<Self> {
        let cfg = Self {
            competition,
            neighborhood: NeighborhoodParams::new(order)?,
            target_clusters,
            knn: None,
            weighting: Weighting::Gaussian,
            unweighted_q: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.competition.validate()?;
        if self.target_clusters == 0 {
            return Err(Error::param("target cluster count C must be >= 1"));
        }
        if self.competition.class_count < self.target_clusters {
            return Err(Error::param(format!(
                "class count K = {} is below the target C = {}; K must over-estimate C",
                self.competition.class_count, self.target_clusters
            )));
        }
        Ok(())
    }
}

/// Outcome of one [`cluster`] call.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// Final partition with exactly `C` communities.
    pub partition: Partition,
    /// Partition produced by density assignment, before reduction.
    pub initial: Partition,
    pub trace: MergeTrace,
    pub state: SystemState,
    pub converged: bool,
    /// Modularity of the final partition on the input graph.
    pub modularity: f64,
}

/// Runs the whole technique on a graph.
pub fn cluster(g: &WeightedGraph, cfg: &PipelineConfig) -> Result<Clustering> {
    cfg.validate()?;
    let outcome = run_outcome(g, &cfg.competition)?;
    finish(g, cfg, outcome.state, outcome.converged)
}

fn finish(
    g: &WeightedGraph,
    cfg: &PipelineConfig,
    state: SystemState,
    converged: bool,
) -> Result<Clustering> {
    let unfoldings = unfold(g, &state);
    let initial = assign_communities(&unfoldings, cfg.neighborhood)?;
    if initial.community_count() < cfg.target_clusters {
        return Err(Error::Degenerate(format!(
            "dynamics produced {} communities, fewer than the target {}",
            initial.community_count(),
            cfg.target_clusters
        )));
    }
    let (partition, trace) = if cfg.unweighted_q {
        reduce(&g.unweighted(), &initial, cfg.target_clusters)?
    } else {
        reduce(g, &initial, cfg.target_clusters)?
    };
    let modularity = modularity(g, &partition)?;
    Ok(Clustering {
        partition,
        initial,
        trace,
        state,
        converged,
        modularity,
    })
}

/// Builds the k-NN graph for `data` and clusters it.
pub fn cluster_points(data: &PointDataset, cfg: &PipelineConfig) -> Result<(WeightedGraph, Clustering)> {
    let k = cfg
        .knn
        .ok_or_else(|| Error::param("point input requires a k-NN value"))?;
    let g = build_knn_graph_with(data, k, cfg.weighting)?;
    let c = cluster(&g, cfg)?;
    Ok((g, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub knn_values: Vec<usize>,
    pub class_count_values: Vec<usize>,
    pub order_values: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            knn_values: (1..=30).collect(),
            class_count_values: (2..=30).collect(),
            order_values: (1..=4).collect(),
            seeds: vec![0],
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.knn_values.is_empty()
            || self.class_count_values.is_empty()
            || self.order_values.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::param("every sweep axis needs at least one value"));
        }
        Ok(())
    }
}

/// Settings shared by every sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub target_clusters: usize,
    pub lambda: f64,
    pub max_steps: usize,
    pub convergence_tol: f64,
    pub weighting: Weighting,
    pub unweighted_q: bool,
}

impl SweepSettings {
    pub fn new(target_clusters: usize) -> Self {
        Self {
            target_clusters,
            lambda: 0.5,
            max_steps: 500,
            convergence_tol: 1e-8,
            weighting: Weighting::Gaussian,
            unweighted_q: false,
        }
    }
}

pub enum SweepInput<'a> {
    Points(&'a PointDataset),
    Graph(&'a WeightedGraph),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellParams {
    /// `None` for graph input.
    pub knn: Option<usize>,
    pub classes: usize,
    pub order: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub params: CellParams,
    /// Seed actually handed to the dynamics.
    pub run_seed: u64,
    pub ari: Option<f64>,
    pub modularity: f64,
    pub converged: bool,
    pub partition: Partition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub params: CellParams,
    pub error: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepReport {
    /// Sorted by ARI (or modularity without ground truth), best first.
    pub cells: Vec<SweepCell>,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    /// Label-free selection: highest final modularity, ties by parameters.
    pub fn best_by_modularity(&self) -> Option<&SweepCell> {
        self.cells.iter().min_by(|a, b| {
            b.modularity
                .total_cmp(&a.modularity)
                .then_with(|| a.params.cmp(&b.params))
        })
    }

    pub fn best_by_ari(&self) -> Option<&SweepCell> {
        self.cells.iter().min_by(|a, b| cmp_ari(a, b))
    }
}

fn cmp_ari(a: &SweepCell, b: &SweepCell) -> Ordering {
    let key = |c: &SweepCell| c.ari.unwrap_or(f64::NEG_INFINITY);
    key(b)
        .total_cmp(&key(a))
        .then_with(|| a.params.cmp(&b.params))
}

/// Dynamics seed of a sweep cell: the base seed mixed with an FNV-1a hash of
/// the parameters that drive the dynamics (`knn`, `K`).
pub fn cell_seed(base: u64, knn: Option<usize>, classes: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in [knn.map_or(u64::MAX, |k| k as u64), classes as u64] {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    base ^ h
}

/// Evaluates [`cluster`] over the Cartesian product of the grid.
///
/// Cells sharing `(knn, K, seed)` share one dynamics run. Cells that fail
/// (e.g. too few communities emerge) are reported in `failures`.
pub fn sweep(
    input: SweepInput<'_>,
    grid: &SweepGrid,
    settings: &SweepSettings,
    truth: Option<&[usize]>,
) -> Result<SweepReport> {
    grid.validate()?;
    let (graphs, n): (Vec<(Option<usize>, WeightedGraph)>, usize) = match input {
        SweepInput::Points(data) => (
            grid.knn_values
                .iter()
                .map(|&k| Ok((Some(k), build_knn_graph_with(data, k, settings.weighting)?)))
                .collect::<Result<_>>()?,
            data.len(),
        ),
        SweepInput::Graph(g) => (vec![(None, g.clone())], crate::graph::Topology::vertex_count(g)),
    };
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::param(format!(
                "{} ground-truth labels for {n} vertices",
                t.len()
            )));
        }
    }
    for &o in &grid.order_values {
        NeighborhoodParams::new(o)?;
    }

    let mut jobs = Vec::new();
    for (gi, (knn, _)) in graphs.iter().enumerate() {
        for &classes in &grid.class_count_values {
            for &seed in &grid.seeds {
                jobs.push((gi, *knn, classes, seed));
            }
        }
    }

    let results: Vec<Vec<std::result::Result<SweepCell, SweepFailure>>> = jobs
        .par_iter()
        .map(|&(gi, knn, classes, seed)| {
            let g = &graphs[gi].1;
            let run_seed = cell_seed(seed, knn, classes);
            let competition = CompetitionConfig {
                class_count: classes,
                lambda: settings.lambda,
                max_steps: settings.max_steps,
                convergence_tol: settings.convergence_tol,
                seed: run_seed,
                seed_vertices: None,
            };
            let params_for = |order| CellParams {
                knn,
                classes,
                order,
                seed,
            };
            let dynamics = competition
                .validate()
                .and_then(|_| run_outcome(g, &competition));
            grid.order_values
                .iter()
                .map(|&order| {
                    let params = params_for(order);
                    let fail = |e: Error| SweepFailure {
                        params: params.clone(),
                        error: e.to_string(),
                    };
                    let outcome = dynamics.as_ref().map_err(|e| SweepFailure {
                        params: params.clone(),
                        error: e.to_string(),
                    })?;
                    let cfg = PipelineConfig {
                        competition: competition.clone(),
                        neighborhood: NeighborhoodParams::new(order).map_err(fail)?,
                        target_clusters: settings.target_clusters,
                        knn,
                        weighting: settings.weighting,
                        unweighted_q: settings.unweighted_q,
                    };
                    cfg.validate().map_err(fail)?;
                    let c = finish(g, &cfg, outcome.state.clone(), outcome.converged).map_err(fail)?;
                    let ari = match truth {
                        Some(t) => Some(adjusted_rand_index(t, c.partition.labels()).map_err(fail)?),
                        None => None,
                    };
                    Ok(SweepCell {
                        params,
                        run_seed,
                        ari,
                        modularity: c.modularity,
                        converged: c.converged,
                        partition: c.partition,
                    })
                })
                .collect()
        })
        .collect();

    let mut report = SweepReport::default();
    for r in results.into_iter().flatten() {
        match r {
            Ok(cell) => report.cells.push(cell),
            Err(f) => report.failures.push(f),
        }
    }
    if truth.is_some() {
        report.cells.sort_by(cmp_ari);
    } else {
        report.cells.sort_by(|a, b| {
            b.modularity
                .total_cmp(&a.modularity)
                .then_with(|| a.params.cmp(&b.params))
        });
    }
    report.failures.sort_by(|a, b| a.params.cmp(&b.params));
    Ok(report)
}
