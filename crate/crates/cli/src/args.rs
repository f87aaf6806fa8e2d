use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgedom::datasets::Shape;
use edgedom::Weighting;

#[derive(Debug, Parser)]
#[command(name = "edgedom", version, about = "Community detection and clustering by edge domination")]
pub struct Cli {
    /// Maximum number of worker threads for sweeps.
    #[arg(long, global = true, value_parser = at_least_one)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a k-NN graph from a point CSV.
    Graph(GraphArgs),
    /// Run the particle dynamics and dump the final state.
    Simulate(SimulateArgs),
    /// Detect communities (one per class, before any merging).
    Communities(CommunitiesArgs),
    /// Full clustering pipeline: dynamics, communities, modularity merging.
    Cluster(ClusterArgs),
    /// Grid search over k, K, o and seeds.
    Sweep(SweepArgs),
    /// ARI between two labelings, or a Friedman / Bonferroni-Dunn report.
    Eval(EvalArgs),
    /// Generate a synthetic 2-D dataset.
    Gen(GenArgs),
    /// Run the karate club benchmark.
    Karate(KarateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// `.csv` files are point clouds, anything else an edge list.
    Auto,
    Points,
    Edges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Gaussian,
    Unit,
    Inverse,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Gaussian => Weighting::Gaussian,
            WeightingArg::Unit => Weighting::Unit,
            WeightingArg::Inverse => Weighting::Inverse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Banana,
    Highleyman,
    Lithuanian,
    Spirals,
}

impl From<ShapeArg> for Shape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Banana => Shape::Banana,
            ShapeArg::Highleyman => Shape::Highleyman,
            ShapeArg::Lithuanian => Shape::Lithuanian,
            ShapeArg::Spirals => Shape::Spirals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PublishedTable {
    Real,
    Artificial,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Point CSV or `i j w` edge list.
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = InputKind::Auto)]
    pub input_kind: InputKind,

    /// Label column of a point CSV (defaults to `label` when present).
    #[arg(long)]
    pub label_column: Option<String>,

    /// Encode non-numeric CSV columns as ordinal integers.
    #[arg(long)]
    pub categorical: bool,

    /// Ground-truth labels for an edge-list input: one label per line or
    /// `vertex,label` rows.
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Neighbors per point when the input is a point cloud (k).
    #[arg(long, value_parser = at_least_one)]
    pub knn: Option<usize>,

    /// k-NN edge weighting.
    #[arg(long, value_enum, default_value_t = WeightingArg::Gaussian)]
    pub weighting: WeightingArg,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Competition strength lambda in [0, 1].
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub lambda: f64,

    /// Maximum number of steps (T).
    #[arg(long, default_value_t = 500, value_parser = at_least_one)]
    pub steps: usize,

    /// Convergence tolerance on the L1 change of the distributions (epsilon).
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,

    /// Random seed for the class start vertices.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write results here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Also write an SVG picture of the result.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Point CSV.
    pub input: PathBuf,

    #[arg(long, value_parser = at_least_one)]
    pub knn: usize,

    #[arg(long, value_enum, default_value_t = WeightingArg::Gaussian)]
    pub weighting: WeightingArg,

    #[arg(long)]
    pub label_column: Option<String>,

    #[arg(long)]
    pub categorical: bool,

    /// Write results here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// `edges` writes the `i j w` edge list; `json` a JSON object.
    #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
    pub format: GraphFormat,

    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Edges,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Number of particle classes (K).
    #[arg(long, value_parser = at_least_one)]
    pub classes: usize,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_parser = at_least_one)]
    pub classes: usize,

    /// Neighborhood order (o).
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub order: usize,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    /// Write the per-class unfoldings as an edge list with `# class c` headers.
    #[arg(long)]
    pub unfoldings: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_parser = at_least_one)]
    pub classes: usize,

    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub order: usize,

    /// Final number of clusters (C).
    #[arg(long, value_parser = at_least_one)]
    pub target: usize,

    /// Merge on the unweighted topology.
    #[arg(long)]
    pub unweighted_q: bool,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Point CSV or `i j w` edge list.
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = InputKind::Auto)]
    pub input_kind: InputKind,

    #[arg(long)]
    pub label_column: Option<String>,

    #[arg(long)]
    pub categorical: bool,

    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Comma-separated k values (point input only).
    #[arg(long, value_delimiter = ',', value_parser = at_least_one)]
    pub knn: Vec<usize>,

    #[arg(long, value_delimiter = ',', value_parser = at_least_one, required = true)]
    pub classes: Vec<usize>,

    #[arg(long, value_delimiter = ',', value_parser = at_least_one, default_value = "1")]
    pub order: Vec<usize>,

    #[arg(long, value_parser = at_least_one)]
    pub target: usize,

    /// Number of seeds per cell, counting up from --seed.
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub seeds: usize,

    #[arg(long, value_enum, default_value_t = WeightingArg::Gaussian)]
    pub weighting: WeightingArg,

    #[arg(long)]
    pub unweighted_q: bool,

    /// Directory receiving one `vertex,label` CSV per cell.
    #[arg(long)]
    pub labels_dir: Option<PathBuf>,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels (one per line or `vertex,label`); requires --truth.
    #[arg(long, requires = "truth", conflicts_with_all = ["table", "published"])]
    pub pred: Option<PathBuf>,

    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Score table CSV: header `dataset,<technique>...`, one row per dataset.
    #[arg(long, conflicts_with = "published")]
    pub table: Option<PathBuf>,

    /// Use one of the embedded published tables.
    #[arg(long, value_enum)]
    pub published: Option<PublishedTable>,

    /// Significance level: 0.05 or 0.10.
    #[arg(long, default_value_t = 0.05, value_parser = open_unit_interval)]
    pub alpha: f64,

    /// Control technique for the post-hoc test (defaults to the last column).
    #[arg(long)]
    pub control: Option<String>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeArg,

    /// Number of points (even, at least 4).
    #[arg(long, value_parser = at_least_one)]
    pub n: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,

    /// `csv` writes `x0,x1,label` rows; `json` a JSON object.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KarateArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub classes: usize,

    #[arg(long, value_delimiter = ',', value_parser = at_least_one, default_value = "1,2")]
    pub order: Vec<usize>,

    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub target: usize,

    /// Number of seeds, counting up from --seed.
    #[arg(long, default_value_t = 20, value_parser = at_least_one)]
    pub seeds: usize,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

fn at_least_one(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if v == 0 {
        return Err("must be at least 1".into());
    }
    Ok(v)
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("{v} is outside [0, 1]"));
    }
    Ok(v)
}

fn open_unit_interval(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if !(v > 0.0 && v < 1.0) {
        return Err(format!("{v} is outside (0, 1)"));
    }
    Ok(v)
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v <= 0.0 {
        return Err(format!("{v} must be > 0"));
    }
    Ok(v)
}
