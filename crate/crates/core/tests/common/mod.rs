#![allow(dead_code)]

use edgedom::graph::WeightedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn clique_edges(base: usize, size: usize) -> Vec<(usize, usize, f64)> {
    let mut e = Vec::new();
    for i in 0..size {
        for j in i + 1..size {
            e.push((base + i, base + j, 1.0));
        }
    }
    e
}

/// Two 5-cliques joined by the edge 4-5.
pub fn barbell() -> WeightedGraph {
    let mut e = clique_edges(0, 5);
    e.extend(clique_edges(5, 5));
    e.push((4, 5, 1.0));
    WeightedGraph::from_edges(10, e).unwrap()
}

/// `count` cliques of `size` vertices arranged in a ring, neighbors joined by
/// one edge. Labels are the clique index.
pub fn ring_of_cliques(count: usize, size: usize) -> (WeightedGraph, Vec<usize>) {
    let mut e = Vec::new();
    for c in 0..count {
        e.extend(clique_edges(c * size, size));
        if count > 1 && (count > 2 || c == 0) {
            let next = (c + 1) % count;
            e.push((c * size, next * size + 1, 1.0));
        }
    }
    let labels = (0..count * size).map(|v| v / size).collect();
    (WeightedGraph::from_edges(count * size, e).unwrap(), labels)
}

/// Connected random graph: a random spanning tree plus extra edges, weights in
/// `[0.1, 5)`.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(i, j)| (i, j, rng.random_range(0.1..5.0)))
        .collect();
    WeightedGraph::from_edges(n, edges).unwrap()
}

/// Random graph with an exact number of distinct edges on `n` vertices.
/// Every vertex gets at least one edge through a leading perfect matching.
pub fn random_with_edges(n: usize, m: usize, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = std::collections::BTreeSet::new();
    for v in (0..n - 1).step_by(2) {
        pairs.insert((v, v + 1));
    }
    if n % 2 == 1 {
        pairs.insert((0, n - 1));
    }
    while pairs.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    WeightedGraph::from_edges(n, pairs.into_iter().map(|(i, j)| (i, j, 1.0))).unwrap()
}

/// Adjusted Rand index straight from pair counting over all `C(n, 2)` pairs.
pub fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut same_a, mut same_b, mut pairs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            pairs += 1.0;
            if sa && sb {
                both += 1.0;
            }
            if sa {
                same_a += 1.0;
            }
            if sb {
                same_b += 1.0;
            }
        }
    }
    let expected = same_a * same_b / pairs;
    let max = 0.5 * (same_a + same_b);
    if (max - expected).abs() < 1e-12 {
        return if both == max { 1.0 } else { 0.0 };
    }
    (both - expected) / (max - expected)
}

pub fn same_up_to_relabeling(a: &[usize], b: &[usize]) -> bool {
    let mut fwd = std::collections::HashMap::new();
    let mut back = std::collections::HashMap::new();
    a.iter().zip(b).all(|(&x, &y)| {
        *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x
    })
}

/// Newman-Girvan modularity from its definition, double loop over vertex
/// pairs of a dense weight matrix.
pub fn modularity_by_definition(g: &WeightedGraph, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut a = vec![vec![0.0; n]; n];
    for (&(i, j), &w) in g.edges().iter().zip(g.edge_weights()) {
        a[i][j] = w;
        a[j][i] = w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// All set partitions of `n` elements into at most `max_blocks` blocks, as
/// restricted-growth label strings.
pub fn set_partitions(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn grow(cur: &mut Vec<usize>, n: usize, max_blocks: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..(used + 1).min(max_blocks) {
            cur.push(l);
            grow(cur, n, max_blocks, used.max(l + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, max_blocks, 0, &mut out);
    out
}
