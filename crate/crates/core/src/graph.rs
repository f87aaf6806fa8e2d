//! Weighted undirected graphs and neighborhood queries.
//!
//! [`WeightedGraph`] stores its adjacency in compressed sparse row form. Every
//! undirected edge `{i, j}` owns two directed *slots* (`i -> j` and `j -> i`),
//! which is the layout the dynamics use for per-direction flows.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Read-only adjacency view shared by [`WeightedGraph`] and
/// [`Unfolding`](crate::community::Unfolding).
pub trait Topology {
    fn vertex_count(&self) -> usize;

    fn edge_count(&self) -> usize;

    /// Sorted neighbor list of `v`.
    fn neighbors(&self, v: usize) -> &[usize];
}

/// Simple, undirected graph with strictly positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    /// Canonical edge list, `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    slot_edge: Vec<usize>,
    reverse: Vec<usize>,
    strength: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph from `(i, j, weight)` triples.
    ///
    /// Rejects self-loops, repeated edges, out-of-range endpoints and
    /// non-positive or non-finite weights.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if vertex_count == 0 {
            return Err(Error::param("graph must have at least one vertex"));
        }
        let mut canon: Vec<((usize, usize), f64)> = Vec::new();
        for (i, j, w) in edges {
            for v in [i, j] {
                if v >= vertex_count {
                    return Err(Error::Index { vertex: v, vertex_count });
                }
            }
            if i == j {
                return Err(Error::param(format!("self-loop on vertex {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::param(format!(
                    "edge {{{i},{j}}} has non-positive weight {w}"
                )));
            }
            canon.push(((i.min(j), i.max(j)), w));
        }
        canon.sort_by_key(|a| a.0);
        if let Some(w) = canon.windows(2).find(|w| w[0].0 == w[1].0) {
            let (i, j) = w[0].0;
            return Err(Error::param(format!("parallel edge {{{i},{j}}}")));
        }

        let edges: Vec<(usize, usize)> = canon.iter().map(|e| e.0).collect();
        let weights: Vec<f64> = canon.iter().map(|e| e.1).collect();

        let mut degree = vec![0usize; vertex_count];
        for &(i, j) in &edges {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }

        // Directed slots sorted by (source, target); neighbor lists end up sorted.
        let mut directed: Vec<(usize, usize, usize)> = Vec::with_capacity(2 * edges.len());
        for (e, &(i, j)) in edges.iter().enumerate() {
            directed.push((i, j, e));
            directed.push((j, i, e));
        }
        directed.sort_unstable();
        let targets: Vec<usize> = directed.iter().map(|d| d.1).collect();
        let slot_edge: Vec<usize> = directed.iter().map(|d| d.2).collect();

        let mut reverse = vec![0usize; directed.len()];
        let mut first_slot = vec![usize::MAX; edges.len()];
        for (s, &e) in slot_edge.iter().enumerate() {
            if first_slot[e] == usize::MAX {
                first_slot[e] = s;
            } else {
                reverse[s] = first_slot[e];
                reverse[first_slot[e]] = s;
            }
        }

        let mut strength = vec![0.0; vertex_count];
        for (&(i, j), &w) in edges.iter().zip(&weights) {
            strength[i] += w;
            strength[j] += w;
        }

        Ok(Self {
            vertex_count,
            edges,
            weights,
            offsets,
            targets,
            slot_edge,
            reverse,
            strength,
        })
    }

    /// Same topology with every weight set to 1.
    pub fn unweighted(&self) -> Self {
        let mut g = self.clone();
        g.weights.iter_mut().for_each(|w| *w = 1.0);
        g.strength = (0..g.vertex_count)
            .map(|v| (g.offsets[v + 1] - g.offsets[v]) as f64)
            .collect();
        g
    }

    /// Canonical edge list (`i < j`), indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of edge `{i, j}`, or `None` if the edge does not exist.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.slot(i, j).map(|s| self.weights[self.slot_edge[s]])
    }

    /// Directed slot index of `i -> j`.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.vertex_count {
            return None;
        }
        let range = self.slot_range(i);
        self.targets[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| range.start + k)
    }

    /// Directed slots leaving `v`.
    pub fn slot_range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn slot_count(&self) -> usize {
        self.targets.len()
    }

    pub fn slot_target(&self, s: usize) -> usize {
        self.targets[s]
    }

    pub fn slot_edge(&self, s: usize) -> usize {
        self.slot_edge[s]
    }

    pub fn slot_weight(&self, s: usize) -> f64 {
        self.weights[self.slot_edge[s]]
    }

    /// The slot `j -> i` for slot `i -> j`.
    pub fn reverse_slot(&self, s: usize) -> usize {
        self.reverse[s]
    }

    /// Weighted degree `sum_k w_ik`.
    pub fn strength(&self, v: usize) -> f64 {
        self.strength[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Vertices with no incident edge.
    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count).filter(|&v| self.degree(v) == 0).collect()
    }

    /// Parses the `i j w` edge-list format. Lines starting with `#` are skipped;
    /// a missing weight column means weight 1.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut triples = Vec::new();
        let mut max_vertex = None;
        for (row, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::Parse {
                    row: row + 1,
                    column: fields.len().min(3) + 1,
                    message: format!("expected `i j w`, got {} fields", fields.len()),
                });
            }
            let vertex = |col: usize| -> Result<usize> {
                fields[col].parse().map_err(|_| Error::Parse {
                    row: row + 1,
                    column: col + 1,
                    message: format!("`{}` is not a vertex index", fields[col]),
                })
            };
            let (i, j) = (vertex(0)?, vertex(1)?);
            let w = match fields.get(2) {
                Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                    row: row + 1,
                    column: 3,
                    message: format!("`{s}` is not a number"),
                })?,
                None => 1.0,
            };
            max_vertex = Some(max_vertex.unwrap_or(0).max(i).max(j));
            triples.push((i, j, w));
        }
        let n = max_vertex
            .map(|m| m + 1)
            .ok_or_else(|| Error::param("edge list contains no edges"))?;
        Self::from_edges(n, triples)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# vertices {} edges {}", self.vertex_count, self.edges.len())?;
        for (&(i, j), w) in self.edges.iter().zip(&self.weights) {
            writeln!(out, "{i} {j} {w}")?;
        }
        Ok(())
    }
}

impl Topology for WeightedGraph {
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

/// Point cloud with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDataset {
    points: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
}

impl PointDataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(first) = points.first() {
            if let Some((row, p)) = points.iter().enumerate().find(|(_, p)| p.len() != first.len())
            {
                return Err(Error::param(format!(
                    "point {row} has dimension {}, expected {}",
                    p.len(),
                    first.len()
                )));
            }
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::param(format!(
                    "{} labels for {} points",
                    l.len(),
                    points.len()
                )));
            }
        }
        Ok(Self { points, labels })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

/// BFS radius used for density membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodParams {
    order: usize,
}

impl NeighborhoodParams {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("neighborhood order must be >= 1"));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl Default for NeighborhoodParams {
    fn default() -> Self {
        Self { order: 1 }
    }
}

/// All vertices within BFS distance `order` of `j`, including `j`, sorted.
pub fn neighborhood_vertices<G: Topology + ?Sized>(
    g: &G,
    j: usize,
    params: NeighborhoodParams,
) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    if j >= n {
        return Err(Error::Index { vertex: j, vertex_count: n });
    }
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::from([j]);
    let mut reached = vec![j];
    dist[j] = 0;
    while let Some(v) = queue.pop_front() {
        if dist[v] == params.order() {
            continue;
        }
        for &u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                reached.push(u);
                queue.push_back(u);
            }
        }
    }
    reached.sort_unstable();
    Ok(reached)
}

/// Number of edges with both endpoints in `vs`.
pub fn induced_edge_count<G: Topology + ?Sized>(g: &G, vs: &[usize]) -> usize {
    let mut inside = vec![false; g.vertex_count()];
    for &v in vs {
        inside[v] = true;
    }
    vs.iter()
        .filter(|&&v| inside[v])
        .map(|&v| {
            // count each edge from its smaller endpoint
            g.neighbors(v).iter().filter(|&&u| u > v && inside[u]).count()
        })
        .sum()
}
