//! Spec examples checked against independent oracles: brute-force scans,
//! definitions evaluated directly, and the particle simulation.

mod common;

use std::collections::BTreeSet;

use edgedom::community::{dominant_classes, unfold, Partition};
use edgedom::datasets::{generate, karate_club, Shape};
use edgedom::dynamics::stochastic::stochastic_run;
use edgedom::dynamics::{initial_state, run, run_outcome, CompetitionConfig};
use edgedom::eval::adjusted_rand_index;
use edgedom::graph::{induced_edge_count, neighborhood_vertices, NeighborhoodParams, Topology, WeightedGraph};
use edgedom::knn::build_knn_graph;
use edgedom::merge::{adjacent_pairs, merge_bound, modularity, reduce};
use edgedom::pipeline::{sweep, SweepGrid, SweepInput, SweepSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{barbell, clique_edges, modularity_by_definition, random_connected, ring_of_cliques, same_up_to_relabeling};

/// Zachary's 78 ties, typed in independently of the crate's copy.
const ZACHARY: [(usize, usize); 78] = [
    (1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4), (1, 5), (1, 6), (1, 7), (5, 7),
    (6, 7), (1, 8), (2, 8), (3, 8), (4, 8), (1, 9), (3, 9), (3, 10), (1, 11), (5, 11),
    (6, 11), (1, 12), (1, 13), (4, 13), (1, 14), (2, 14), (3, 14), (4, 14), (6, 17), (7, 17),
    (1, 18), (2, 18), (1, 20), (2, 20), (1, 22), (2, 22), (24, 26), (25, 26), (3, 28), (24, 28),
    (25, 28), (3, 29), (24, 30), (27, 30), (2, 31), (9, 31), (1, 32), (25, 32), (26, 32), (29, 32),
    (3, 33), (9, 33), (15, 33), (16, 33), (19, 33), (21, 33), (23, 33), (24, 33), (30, 33), (31, 33),
    (32, 33), (9, 34), (10, 34), (14, 34), (15, 34), (16, 34), (19, 34), (20, 34), (21, 34), (23, 34),
    (24, 34), (27, 34), (28, 34), (29, 34), (30, 34), (31, 34), (32, 34), (33, 34),
];

/// Zero-based ties.
fn zachary() -> Vec<(usize, usize)> {
    ZACHARY.iter().map(|&(a, b)| (a - 1, b - 1)).collect()
}

#[test]
fn karate_graph_matches_reference_list() {
    let karate = karate_club();
    let g = karate.graph().unwrap();
    let mut reference = zachary();
    reference.sort_unstable();
    assert_eq!(g.edges(), reference.as_slice());
    assert!(g.edge_weights().iter().all(|&w| w == 1.0));
    let truth = karate.ground_truth.as_ref().unwrap();
    assert_eq!(truth.iter().collect::<BTreeSet<_>>().len(), 2);
}

#[test]
fn karate_neighborhood_of_vertex_zero() {
    let g = karate_club().graph().unwrap().clone();
    let n0 = neighborhood_vertices(&g, 0, NeighborhoodParams::new(1).unwrap()).unwrap();
    let degree = zachary().iter().filter(|&&(a, b)| a == 0 || b == 0).count();
    assert_eq!(degree, 16);
    assert_eq!(n0.len(), degree + 1);

    let mut brute = 0;
    for &(a, b) in &zachary() {
        if n0.contains(&a) && n0.contains(&b) {
            brute += 1;
        }
    }
    assert_eq!(induced_edge_count(&g, &n0), brute);
}

#[test]
fn karate_seed_vertices_are_distinct() {
    let g = karate_club().graph().unwrap().clone();
    for seed in 0..100 {
        let s = initial_state(&g, &CompetitionConfig::new(2, 0.5).with_seed(seed)).unwrap();
        assert_ne!(s.seed_vertices[0], s.seed_vertices[1], "seed {seed}");
    }
}

#[test]
fn karate_historical_split_modularity() {
    let karate = karate_club();
    let g = karate.graph().unwrap();
    let truth = karate.ground_truth.as_ref().unwrap();

    // Oracle straight from the reference list, independent of WeightedGraph.
    let mut a = [[0.0f64; 34]; 34];
    for (i, j) in zachary() {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..34 {
        for j in 0..34 {
            if truth[i] == truth[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q /= two_m;

    assert!((q - 0.371).abs() < 0.01, "oracle Q = {q}");
    let lib = modularity(g, &Partition::from_labels(truth)).unwrap();
    assert!((lib - q).abs() < 1e-12);
}

#[test]
fn disjoint_cliques_modularity_is_half() {
    let mut e = clique_edges(0, 5);
    e.extend(clique_edges(5, 5));
    let g = WeightedGraph::from_edges(10, e).unwrap();
    let labels: Vec<usize> = (0..10).map(|v| v / 5).collect();
    let q = modularity(&g, &Partition::from_labels(&labels)).unwrap();
    assert!((q - 0.5).abs() < 1e-12);
    assert!((modularity_by_definition(&g, &labels) - 0.5).abs() < 1e-12);
}

#[test]
fn adjacent_pairs_match_edge_scan() {
    for seed in 0..20 {
        let g = random_connected(20, 15, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..20).map(|_| rng.random_range(0..5)).collect();
        let p = Partition::from_labels(&labels);
        let l = p.labels();
        let mut brute = BTreeSet::new();
        for i in 0..20 {
            for j in 0..20 {
                if g.weight(i, j).is_some() && l[i] != l[j] {
                    brute.insert((l[i].min(l[j]), l[i].max(l[j])));
                }
            }
        }
        assert_eq!(adjacent_pairs(&g, &p).unwrap(), brute, "seed {seed}");
    }
}

#[test]
fn path_of_three_cliques_merges_the_better_pair() {
    for (ab, bc) in [(1, 3), (3, 1), (2, 2)] {
        let mut e = clique_edges(0, 5);
        e.extend(clique_edges(5, 5));
        e.extend(clique_edges(10, 5));
        for t in 0..ab {
            e.push((t, 5 + t, 1.0));
        }
        for t in 0..bc {
            e.push((5 + t, 10 + t, 1.0));
        }
        let g = WeightedGraph::from_edges(15, e).unwrap();
        let start: Vec<usize> = (0..15).map(|v| v / 5).collect();
        let option = |x: usize, y: usize| {
            let merged: Vec<usize> = start.iter().map(|&l| if l == y { x } else { l }).collect();
            (modularity_by_definition(&g, &merged), merged)
        };
        let (q_ab, merged_ab) = option(0, 1);
        let (q_bc, merged_bc) = option(1, 2);
        // A tie goes to the lexicographically smaller pair (A, B).
        let expected = if q_ab >= q_bc - 1e-12 { merged_ab } else { merged_bc };

        let (r, trace) = reduce(&g, &Partition::from_labels(&start), 2).unwrap();
        assert!(same_up_to_relabeling(r.labels(), &expected), "ab={ab} bc={bc}");
        assert!((trace.final_modularity() - q_ab.max(q_bc)).abs() < 1e-12);
        assert!(trace.evaluations <= merge_bound(3, 2));
    }
}

#[test]
fn thirty_communities_reduce_within_bound() {
    let (g, labels) = ring_of_cliques(30, 4);
    let (r, trace) = reduce(&g, &Partition::from_labels(&labels), 2).unwrap();
    assert_eq!(merge_bound(30, 2), 462);
    assert_eq!(r.community_count(), 2);
    assert!(trace.evaluations <= 462, "{} evaluations", trace.evaluations);
    // Cliques stay whole.
    for c in 0..30 {
        let l = r.labels()[4 * c];
        assert!((4 * c..4 * c + 4).all(|v| r.labels()[v] == l));
    }
}

/// Union k-NN edges from a full sort of every distance row.
fn brute_knn_edges(points: &[Vec<f64>], k: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for (i, p) in points.iter().enumerate() {
        let mut row: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2), j))
            .collect();
        row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &row[..k] {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    edges
}

#[test]
fn spirals_knn_graph_keeps_arms_apart() {
    for seed in [7, 11, 23] {
        let d = generate(Shape::Spirals, 500, seed).unwrap();
        let points = d.points().unwrap().points();
        let truth = d.ground_truth.as_ref().unwrap();
        let g = build_knn_graph(d.points().unwrap(), 5).unwrap();
        let brute = brute_knn_edges(points, 5);
        assert_eq!(g.edges(), brute.iter().copied().collect::<Vec<_>>().as_slice());
        let cross = brute.iter().filter(|&&(i, j)| truth[i] != truth[j]).count();
        assert!((cross as f64) < 0.02 * brute.len() as f64, "seed {seed}: {cross} cross edges");
    }
}

#[test]
fn spirals_classes_never_touch() {
    for seed in [0, 7, 99] {
        let d = generate(Shape::Spirals, 500, seed).unwrap();
        let p = d.points().unwrap().points();
        let truth = d.ground_truth.as_ref().unwrap();
        let mut closest = f64::INFINITY;
        for i in 0..p.len() {
            for j in 0..p.len() {
                if truth[i] != truth[j] {
                    closest = closest.min(((p[i][0] - p[j][0]).powi(2) + (p[i][1] - p[j][1]).powi(2)).sqrt());
                }
            }
        }
        // Arms sit pi apart radially; noise cannot close that gap.
        assert!(closest > 1.0, "seed {seed}: {closest}");
    }
}

#[test]
fn karate_converges_for_most_seeds() {
    let g = karate_club().graph().unwrap().clone();
    let converged = (0..20)
        .filter(|&seed| {
            run_outcome(&g, &CompetitionConfig::new(2, 0.5).with_seed(seed))
                .unwrap()
                .converged
        })
        .count();
    assert!(converged >= 18, "{converged}/20 converged");
}

#[test]
fn karate_unfoldings_follow_the_factions() {
    let karate = karate_club();
    let g = karate.graph().unwrap();
    let truth = karate.ground_truth.as_ref().unwrap();
    // Seeds on the two leaders.
    let cfg = CompetitionConfig::new(2, 0.5).with_seed_vertices(vec![0, 33]);
    let state = run(g, &cfg).unwrap();
    let owner = dominant_classes(g, &state.flows);
    let mut internal = 0;
    let mut agree = 0;
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        if truth[i] == truth[j] {
            internal += 1;
            if owner[e] == truth[i] {
                agree += 1;
            }
        }
    }
    assert!(agree as f64 >= 0.95 * internal as f64, "{agree}/{internal}");
    assert_eq!(unfold(g, &state).len(), 2);
}

/// Per class, each edge's share of that class's two-way flow.
fn edge_shares(g: &WeightedGraph, flows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    flows
        .iter()
        .map(|row| {
            let per_edge: Vec<f64> = g
                .edges()
                .iter()
                .map(|&(i, j)| {
                    let s = g.slot(i, j).unwrap();
                    row[s] + row[g.reverse_slot(s)]
                })
                .collect();
            let total: f64 = per_edge.iter().sum();
            per_edge.iter().map(|x| x / total).collect()
        })
        .collect()
}

#[test]
fn particles_average_to_deterministic_flows() {
    let g = barbell();
    let steps = 25;
    let base = CompetitionConfig::new(2, 0.5)
        .with_seed_vertices(vec![0, 9])
        .with_max_steps(steps);
    let oracle = edge_shares(&g, &run(&g, &base.clone().with_tol(1e-300)).unwrap().flows);

    let runs = 200;
    let mut mean = vec![vec![0.0; g.edge_count()]; 2];
    for r in 0..runs {
        let state = stochastic_run(&g, &base.clone().with_seed(r), 1000).unwrap();
        for (acc, shares) in mean.iter_mut().zip(edge_shares(&g, &state.traversal_flows())) {
            for (a, s) in acc.iter_mut().zip(shares) {
                *a += s / runs as f64;
            }
        }
    }
    let worst = mean
        .iter()
        .flatten()
        .zip(oracle.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "L-inf distance {worst}");
}

#[test]
fn sweep_seeds_agree_when_partitions_do() {
    let karate = karate_club();
    let truth = karate.ground_truth.clone().unwrap();
    let grid = SweepGrid {
        knn_values: vec![1],
        class_count_values: vec![3],
        order_values: vec![1],
        seeds: vec![0, 1, 2, 3, 4, 5],
    };
    let report = sweep(
        SweepInput::Graph(karate.graph().unwrap()),
        &grid,
        &SweepSettings::new(2),
        Some(&truth),
    )
    .unwrap();
    for a in &report.cells {
        for b in &report.cells {
            if same_up_to_relabeling(a.partition.labels(), b.partition.labels()) {
                assert_eq!(a.ari, b.ari);
            }
        }
    }
}

#[test]
fn karate_grid_top_result_is_exact() {
    let karate = karate_club();
    let truth = karate.ground_truth.clone().unwrap();
    let grid = SweepGrid {
        knn_values: vec![1],
        class_count_values: (2..=10).collect(),
        order_values: vec![1, 2],
        seeds: vec![0, 1, 2],
    };
    let report = sweep(
        SweepInput::Graph(karate.graph().unwrap()),
        &grid,
        &SweepSettings::new(2),
        Some(&truth),
    )
    .unwrap();
    let top = &report.cells[0];
    assert_eq!(top.ari, Some(1.0));
    assert_eq!(adjusted_rand_index(top.partition.labels(), &truth).unwrap(), 1.0);
    for cell in &report.cells {
        assert_eq!(cell.partition.community_count(), 2);
    }
}
