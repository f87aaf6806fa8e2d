use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use edgedom::datasets::{load_csv_with, CsvOptions};
use edgedom::knn::build_knn_graph_with;
use edgedom::{PointDataset, Topology, Weighting, WeightedGraph};

use crate::args::{InputArgs, InputKind};
use crate::Failure;

pub enum Source {
    Points(PointDataset),
    Graph(WeightedGraph),
}

pub struct Loaded {
    pub source: Source,
    pub truth: Option<Vec<usize>>,
}

impl Loaded {
    pub fn len(&self) -> usize {
        match &self.source {
            Source::Points(p) => p.len(),
            Source::Graph(g) => g.vertex_count(),
        }
    }

    pub fn points(&self) -> Option<&PointDataset> {
        match &self.source {
            Source::Points(p) => Some(p),
            Source::Graph(_) => None,
        }
    }

    /// The graph to simulate on: the input graph itself, or the k-NN graph of
    /// the points.
    pub fn graph(&self, knn: Option<usize>, weighting: Weighting) -> Result<WeightedGraph, Failure> {
        match &self.source {
            Source::Graph(g) => {
                if knn.is_some() {
                    eprintln!("warning: --knn ignored for graph input");
                }
                Ok(g.clone())
            }
            Source::Points(p) => {
                let k = knn.ok_or_else(|| Failure::usage("point input needs --knn"))?;
                Ok(build_knn_graph_with(p, k, weighting)?)
            }
        }
    }
}

pub struct Request<'a> {
    pub path: &'a Path,
    pub kind: InputKind,
    pub label_column: Option<&'a str>,
    pub categorical: bool,
    pub truth: Option<&'a Path>,
}

impl<'a> From<&'a InputArgs> for Request<'a> {
    fn from(a: &'a InputArgs) -> Self {
        Self {
            path: &a.input,
            kind: a.input_kind,
            label_column: a.label_column.as_deref(),
            categorical: a.categorical,
            truth: a.truth.as_deref(),
        }
    }
}

pub fn load(req: Request<'_>) -> Result<Loaded, Failure> {
    let is_points = match req.kind {
        InputKind::Points => true,
        InputKind::Edges => false,
        InputKind::Auto => req
            .path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    };
    let mut loaded = if is_points {
        let opts = CsvOptions {
            label_column: req.label_column.map(str::to_string),
            ordinal_categorical: req.categorical,
        };
        let ds = load_csv_with(req.path, &opts).map_err(|e| with_path(e, req.path))?;
        for w in &ds.warnings {
            eprintln!("warning: {w}");
        }
        let points = ds
            .points()
            .cloned()
            .ok_or_else(|| Failure::data("CSV did not yield points"))?;
        Loaded {
            source: Source::Points(points),
            truth: ds.ground_truth,
        }
    } else {
        let file = File::open(req.path).map_err(|e| io_failure(e, req.path))?;
        let g = WeightedGraph::read_edge_list(BufReader::new(file)).map_err(|e| with_path(e, req.path))?;
        Loaded {
            source: Source::Graph(g),
            truth: None,
        }
    };
    if let Some(t) = req.truth {
        loaded.truth = Some(read_labels(t)?);
    }
    if let Some(t) = &loaded.truth {
        if t.len() != loaded.len() {
            return Err(Failure::data(format!(
                "{} ground-truth labels for {} vertices",
                t.len(),
                loaded.len()
            )));
        }
    }
    Ok(loaded)
}

fn with_path(e: edgedom::Error, path: &Path) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn io_failure(e: std::io::Error, path: &Path) -> Failure {
    Failure::data(format!("{}: {e}", path.display()))
}

/// Reads a labeling: one integer per line, or `vertex,label` rows (the
/// partition export format). A non-numeric first line is a header.
pub fn read_labels(path: &Path) -> Result<Vec<usize>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(e, path))?;
    let mut labels = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = *fields.last().unwrap_or(&"");
        match field.parse::<usize>() {
            Ok(l) => {
                if fields.len() == 2 && fields[0].parse::<usize>().ok() != Some(labels.len()) {
                    return Err(Failure::data(format!(
                        "{}: row {}: vertices must be listed in order 0, 1, 2, ...",
                        path.display(),
                        row + 1
                    )));
                }
                labels.push(l);
            }
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(Failure::data(format!(
                    "{}: row {}: `{field}` is not a label",
                    path.display(),
                    row + 1
                )))
            }
        }
    }
    Ok(labels)
}

/// Writes `content` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| io_failure(e, p)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(content.as_bytes()).and_then(|_| out.flush()) {
                // A closed pipe (e.g. `| head`) is not an error for the caller.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}
