//! Edge domination: a particle competition system on weighted graphs.
//!
//! Classes of particles random-walk a graph and compete for its edges; the
//! edges each class ends up dominating describe its "unfolding" of the
//! network. Vertices join the class whose unfolding is densest around them,
//! which gives communities; for data clustering the dynamics run with more
//! classes than wanted and the resulting communities are greedily merged by
//! modularity.
//!
//! ```
//! use edgedom::datasets::karate_club;
//! use edgedom::dynamics::CompetitionConfig;
//! use edgedom::pipeline::{cluster, PipelineConfig};
//!
//! let karate = karate_club();
//! let g = karate.graph().unwrap();
//! let cfg = PipelineConfig::new(CompetitionConfig::new(2, 0.5).with_seed(1), 1, 2).unwrap();
//! let result = cluster(g, &cfg).unwrap();
//! assert_eq!(result.partition.community_count(), 2);
//! ```

pub mod community;
pub mod datasets;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod graph;
pub mod knn;
pub mod merge;
pub mod pipeline;

pub use community::{assign_communities, unfold, Partition, Unfolding};
pub use dynamics::{run, step, CompetitionConfig, SystemState};
pub use error::{Error, Result};
pub use graph::{NeighborhoodParams, PointDataset, Topology, WeightedGraph};
pub use knn::{build_knn_graph, Weighting};
pub use merge::{modularity, reduce, MergeTrace};
pub use pipeline::{cluster, PipelineConfig};
