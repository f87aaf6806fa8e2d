//! k-nearest-neighbor graph construction from point clouds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{PointDataset, WeightedGraph};

/// Distance to similarity mapping for k-NN edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// `exp(-d^2 / (2 s^2))` with `s` the mean k-th neighbor distance.
    #[default]
    Gaussian,
    /// Every edge has weight 1.
    Unit,
    /// `1 / (1 + d / s)` with the same bandwidth `s`.
    Inverse,
}

impl Weighting {
    fn weight(self, distance: f64, bandwidth: f64) -> f64 {
        if bandwidth == 0.0 {
            return 1.0;
        }
        match self {
            Weighting::Gaussian => (-(distance * distance) / (2.0 * bandwidth * bandwidth)).exp(),
            Weighting::Unit => 1.0,
            Weighting::Inverse => 1.0 / (1.0 + distance / bandwidth),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Gaussian => "gaussian",
            Weighting::Unit => "unit",
            Weighting::Inverse => "inverse",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Weighting::Gaussian),
            "unit" => Ok(Weighting::Unit),
            "inverse" => Ok(Weighting::Inverse),
            other => Err(Error::param(format!(
                "unknown weighting `{other}` (expected gaussian, unit or inverse)"
            ))),
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Indices and distances of the `k` nearest points to `i`, ties broken by
/// smaller index.
fn nearest(points: &[Vec<f64>], i: usize, k: usize) -> Vec<(f64, usize)> {
    let mut cand: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| (euclidean(&points[i], p), j))
        .collect();
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_dist);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_dist);
    cand
}

/// Union k-NN graph with Gaussian weights.
pub fn build_knn_graph(data: &PointDataset, k: usize) -> Result<WeightedGraph> {
    build_knn_graph_with(data, k, Weighting::Gaussian)
}

/// Union k-NN graph: `{i, j}` is an edge when either point is among the other's
/// `k` nearest neighbors.
pub fn build_knn_graph_with(
    data: &PointDataset,
    k: usize,
    weighting: Weighting,
) -> Result<WeightedGraph> {
    let n = data.len();
    if n < 2 {
        return Err(Error::param(format!(
            "k-NN graph needs at least 2 points, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must be in [1, {}], got {k}", n - 1)));
    }
    let points = data.points();
    let lists: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| nearest(points, i, k))
        .collect();

    let bandwidth = lists.iter().map(|l| l[k - 1].0).sum::<f64>() / n as f64;

    let mut pairs: Vec<(usize, usize, f64)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |&(d, j)| (i.min(j), i.max(j), d)))
        .collect();
    pairs.sort_unstable_by_key(|a| (a.0, a.1));
    pairs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    WeightedGraph::from_edges(
        n,
        pairs
            .into_iter()
            .map(|(i, j, d)| (i, j, weighting.weight(d, bandwidth))),
    )
}
