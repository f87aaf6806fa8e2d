//! Per-class unfoldings and density-based community assignment.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::graph::{induced_edge_count, neighborhood_vertices, NeighborhoodParams, Topology, WeightedGraph};
use crate::merge::MergeTrace;

/// Unweighted subgraph holding the edges one class dominates.
#[derive(Debug, Clone, PartialEq)]
pub struct Unfolding {
    class_id: usize,
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Unfolding {
    fn new(class_id: usize, vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); vertex_count];
        for &(i, j) in &edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut targets = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for mut list in adj {
            list.sort_unstable();
            targets.extend(list);
            offsets.push(targets.len());
        }
        Self {
            class_id,
            vertex_count,
            edges,
            offsets,
            targets,
        }
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    /// Edges of the source graph owned by this class (`i < j`).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

impl Topology for Unfolding {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Class owning each edge: argmax over classes of the flow in both
/// directions, lowest class index on ties. Edge ids follow `g.edges()`.
pub fn dominant_classes(g: &WeightedGraph, flows: &[Vec<f64>]) -> Vec<usize> {
    let k = flows.len();
    let per_edge = crate::dynamics::edge_class_flows(g, flows);
    per_edge
        .chunks(k.max(1))
        .map(|row| {
            let mut best = 0;
            for (c, &f) in row.iter().enumerate() {
                if f > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Splits the edges of `g` into one unfolding per class.
pub fn unfold(g: &WeightedGraph, state: &SystemState) -> Vec<Unfolding> {
    let owner = dominant_classes(g, &state.flows);
    let mut per_class = vec![Vec::new(); state.class_count()];
    for (&edge, &c) in g.edges().iter().zip(&owner) {
        per_class[c].push(edge);
    }
    per_class
        .into_iter()
        .enumerate()
        .map(|(c, edges)| Unfolding::new(c, g.vertex_count(), edges))
        .collect()
}

/// Edge-list export with a `# class c` header before every unfolding.
pub fn write_unfoldings<W: Write>(unfoldings: &[Unfolding], mut out: W) -> Result<()> {
    for u in unfoldings {
        writeln!(out, "# class {}", u.class_id)?;
        for &(i, j) in &u.edges {
            writeln!(out, "{i} {j} 1")?;
        }
    }
    Ok(())
}

/// Density membership of one vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub scores: Vec<f64>,
    /// `false` when the vertex has no edge in any of its neighborhoods.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipScores {
    pub rows: Vec<ScoreRow>,
}

/// Share of the edges around `j` (within BFS radius `order`) that each
/// unfolding holds.
pub fn density_scores(
    unfoldings: &[Unfolding],
    j: usize,
    params: NeighborhoodParams,
) -> Result<ScoreRow> {
    let counts = unfoldings
        .iter()
        .map(|u| {
            let hood = neighborhood_vertices(u, j, params)?;
            Ok(induced_edge_count(u, &hood) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return Ok(ScoreRow {
            scores: vec![0.0; unfoldings.len()],
            resolved: false,
        });
    }
    Ok(ScoreRow {
        scores: counts.iter().map(|c| c / total).collect(),
        resolved: true,
    })
}

pub fn membership_scores(
    unfoldings: &[Unfolding],
    params: NeighborhoodParams,
) -> Result<MembershipScores> {
    let n = unfoldings.first().map_or(0, |u| u.vertex_count);
    let rows = (0..n)
        .into_par_iter()
        .map(|j| density_scores(unfoldings, j, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(MembershipScores { rows })
}

/// Hard vertex labeling with contiguous community ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    community_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<MergeTrace>,
}

impl Partition {
    /// Relabels arbitrary ids to `0..m` in order of first appearance.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self {
            labels,
            community_count: map.len(),
            provenance: None,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of vertices in each community.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// `vertex,label` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "vertex,label")?;
        for (v, l) in self.labels.iter().enumerate() {
            writeln!(out, "{v},{l}")?;
        }
        Ok(())
    }
}

/// Assigns every vertex to the unfolding where its neighborhood is densest.
///
/// Vertices without any neighborhood edge take the majority label of their
/// already labeled neighbors, spreading outwards from labeled vertices in
/// BFS order.
pub fn assign_communities(unfoldings: &[Unfolding], params: NeighborhoodParams) -> Result<Partition> {
    let scores = membership_scores(unfoldings, params)?;
    assign_from_scores(unfoldings, &scores)
}

pub fn assign_from_scores(unfoldings: &[Unfolding], scores: &MembershipScores) -> Result<Partition> {
    let n = scores.rows.len();
    let k = unfoldings.len();
    let mut label: Vec<Option<usize>> = scores
        .rows
        .iter()
        .map(|row| {
            row.resolved.then(|| {
                let mut best = 0;
                for (c, &s) in row.scores.iter().enumerate() {
                    if s > row.scores[best] {
                        best = c;
                    }
                }
                best
            })
        })
        .collect();
    if n > 0 && label.iter().all(Option::is_none) {
        return Err(Error::Simulation(
            "no vertex has a dominated edge nearby; run the dynamics first".into(),
        ));
    }

    // neighbors in the union of the unfoldings, i.e. the source graph
    let neighbors = |v: usize| unfoldings.iter().flat_map(move |u| u.neighbors(v).iter().copied());

    let mut queue: VecDeque<usize> = (0..n).filter(|&v| label[v].is_some()).collect();
    while let Some(v) = queue.pop_front() {
        for u in neighbors(v) {
            if label[u].is_some() {
                continue;
            }
            let mut votes = vec![0usize; k];
            for w in neighbors(u) {
                if let Some(l) = label[w] {
                    votes[l] += 1;
                }
            }
            let mut best = 0;
            for (c, &x) in votes.iter().enumerate() {
                if x > votes[best] {
                    best = c;
                }
            }
            label[u] = Some(best);
            queue.push_back(u);
        }
    }
    // Only vertices with no edges at all remain; they join class 0.
    let raw: Vec<usize> = label.into_iter().map(|l| l.unwrap_or(0)).collect();
    Ok(Partition::from_labels(&raw))
}
