//! Benchmark inputs: the karate club network, synthetic 2-D shape families and
//! CSV ingestion.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{PointDataset, WeightedGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Points(PointDataset),
    Graph(WeightedGraph),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Embedded,
    Generated { seed: u64 },
    Ingested { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub name: String,
    pub payload: Payload,
    pub ground_truth: Option<Vec<usize>>,
    pub provenance: Provenance,
    /// Non-fatal issues found while loading (e.g. constant columns).
    pub warnings: Vec<String>,
}

impl NamedDataset {
    pub fn points(&self) -> Option<&PointDataset> {
        match &self.payload {
            Payload::Points(p) => Some(p),
            Payload::Graph(_) => None,
        }
    }

    pub fn graph(&self) -> Option<&WeightedGraph> {
        match &self.payload {
            Payload::Graph(g) => Some(g),
            Payload::Points(_) => None,
        }
    }
}

const KARATE_EDGES: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32),
    (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31),
    (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33),
    (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
];

/// Members aligned with the instructor (vertex 0). Everyone else sides with
/// the president (vertex 33). Vertex 8 is counted with the president's
/// faction, where its ties place it.
const KARATE_INSTRUCTOR_FACTION: [usize; 16] = [0, 1, 2, 3, 4, 5, 6, 7, 10, 11, 12, 13, 16, 17, 19, 21];

/// Zachary's karate club: 34 members, 78 unit-weight ties, two factions.
pub fn karate_club() -> NamedDataset {
    let g = WeightedGraph::from_edges(34, KARATE_EDGES.iter().map(|&(i, j)| (i, j, 1.0)))
        .expect("embedded karate edge list is simple");
    let truth = (0..34)
        .map(|v| usize::from(!KARATE_INSTRUCTOR_FACTION.contains(&v)))
        .collect();
    NamedDataset {
        name: "karate".into(),
        payload: Payload::Graph(g),
        ground_truth: Some(truth),
        provenance: Provenance::Embedded,
        warnings: Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Two banana-shaped arcs.
    Banana,
    /// Two Gaussians with very different covariances.
    Highleyman,
    /// Two overlapping elongated blobs.
    Lithuanian,
    /// Two interleaved Archimedean spirals.
    Spirals,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Banana, Shape::Highleyman, Shape::Lithuanian, Shape::Spirals];
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Banana => "banana",
            Shape::Highleyman => "highleyman",
            Shape::Lithuanian => "lithuanian",
            Shape::Spirals => "spirals",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.to_string() == s)
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown shape `{s}` (expected banana, highleyman, lithuanian or spirals)"
                ))
            })
    }
}

fn gaussian(rng: &mut ChaCha8Rng, mean: [f64; 2], std: [f64; 2]) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    vec![
        mean[0] + std[0] * unit.sample(rng),
        mean[1] + std[1] * unit.sample(rng),
    ]
}

fn banana(rng: &mut ChaCha8Rng, half: usize) -> Vec<Vec<f64>> {
    let r = 5.0;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut pts = Vec::with_capacity(2 * half);
    for _ in 0..half {
        let a = 0.125 * PI + rng.random::<f64>() * 1.25 * PI;
        pts.push(vec![r * a.sin() + unit.sample(rng), r * a.cos() + unit.sample(rng)]);
    }
    for _ in 0..half {
        let b = 0.375 * PI - rng.random::<f64>() * 1.25 * PI;
        pts.push(vec![
            r * b.sin() + unit.sample(rng) - 0.75 * r,
            r * b.cos() + unit.sample(rng) - 0.75 * r,
        ]);
    }
    pts
}

fn highleyman(rng: &mut ChaCha8Rng, half: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = (0..half).map(|_| gaussian(rng, [1.0, 1.0], [1.0, 0.5])).collect();
    pts.extend((0..half).map(|_| gaussian(rng, [2.0, 0.0], [0.1, 2.0])));
    pts
}

fn lithuanian(rng: &mut ChaCha8Rng, half: usize) -> Vec<Vec<f64>> {
    // Long axis at 30 degrees; the classes are offset along the short axis.
    let (c, s) = ((PI / 6.0).cos(), (PI / 6.0).sin());
    let mut pts = Vec::with_capacity(2 * half);
    for class in 0..2 {
        let offset = if class == 0 { -1.1 } else { 1.1 };
        for _ in 0..half {
            let p = gaussian(rng, [0.0, offset], [3.0, 0.7]);
            pts.push(vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]);
        }
    }
    pts
}

fn spirals(rng: &mut ChaCha8Rng, half: usize) -> Vec<Vec<f64>> {
    let noise = Normal::new(0.0, 0.1).expect("valid std");
    let (start, end) = (PI, 4.0 * PI);
    let mut pts = Vec::with_capacity(2 * half);
    for class in 0..2 {
        let phase = class as f64 * PI;
        for i in 0..half {
            // one point per equal arc-length stratum: no gaps wide enough to bridge the arms
            let u = (i as f64 + rng.random::<f64>()) / half as f64;
            let t = (start * start + u * (end * end - start * start)).sqrt();
            pts.push(vec![
                t * (t + phase).cos() + noise.sample(rng),
                t * (t + phase).sin() + noise.sample(rng),
            ]);
        }
    }
    pts
}

/// `n` two-dimensional points in two equally sized labeled classes.
pub fn generate(shape: Shape, n: usize, seed: u64) -> Result<NamedDataset> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::param(format!(
            "point count must be even and >= 4, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n / 2;
    let points = match shape {
        Shape::Banana => banana(&mut rng, half),
        Shape::Highleyman => highleyman(&mut rng, half),
        Shape::Lithuanian => lithuanian(&mut rng, half),
        Shape::Spirals => spirals(&mut rng, half),
    };
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= half)).collect();
    Ok(NamedDataset {
        name: shape.to_string(),
        payload: Payload::Points(PointDataset::new(points, Some(labels.clone()))?),
        ground_truth: Some(labels),
        provenance: Provenance::Generated { seed },
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvOptions {
    /// Column holding integer class labels. Defaults to `label` when the
    /// header has one.
    pub label_column: Option<String>,
    /// Encode non-numeric columns as ordinal integers (distinct values in
    /// sorted order) instead of failing.
    pub ordinal_categorical: bool,
}

/// Loads a numeric CSV file, z-score normalizing every feature column.
pub fn load_csv<P: AsRef<Path>>(path: P, label_column: Option<&str>) -> Result<NamedDataset> {
    let opts = CsvOptions {
        label_column: label_column.map(str::to_string),
        ordinal_categorical: false,
    };
    load_csv_with(path, &opts)
}

pub fn load_csv_with<P: AsRef<Path>>(path: P, opts: &CsvOptions) -> Result<NamedDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut ds = read_csv(file, opts)?;
    ds.name = path
        .file_stem()
        .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
    ds.provenance = Provenance::Ingested {
        path: path.display().to_string(),
    };
    Ok(ds)
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        row,
        column: 0,
        message: e.to_string(),
    }
}

/// Parses CSV text from any reader; see [`load_csv_with`].
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<NamedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect());
    }
    let header = match records.first() {
        Some(first) if first.iter().any(|c| c.parse::<f64>().is_err()) => {
            Some(records.remove(0))
        }
        _ => None,
    };
    let first_data_row = if header.is_some() { 2 } else { 1 };
    if records.len() < 2 {
        return Err(Error::param(format!(
            "need at least 2 data rows for a k-NN graph, found {}",
            records.len()
        )));
    }
    let width = records[0].len();
    if let Some((r, rec)) = records.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::Parse {
            row: r + first_data_row,
            column: rec.len(),
            message: format!("expected {width} columns"),
        });
    }

    let label_idx = match (&opts.label_column, &header) {
        (Some(name), Some(h)) => Some(h.iter().position(|c| c == name).ok_or_else(|| {
            Error::param(format!("label column `{name}` not found in header"))
        })?),
        (Some(name), None) => {
            return Err(Error::param(format!(
                "label column `{name}` requested but the file has no header"
            )))
        }
        (None, Some(h)) => h.iter().position(|c| c == "label"),
        (None, None) => None,
    };

    let feature_cols: Vec<usize> = (0..width).filter(|&c| Some(c) != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::param("no feature columns"));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(feature_cols.len());
    for &c in &feature_cols {
        let parsed: std::result::Result<Vec<f64>, usize> = records
            .iter()
            .enumerate()
            .map(|(r, rec)| rec[c].parse::<f64>().map_err(|_| r))
            .collect();
        match parsed {
            Ok(col) => columns.push(col),
            Err(_) if opts.ordinal_categorical => {
                let mut levels: Vec<&str> = records.iter().map(|r| r[c].as_str()).collect();
                levels.sort_unstable();
                levels.dedup();
                columns.push(
                    records
                        .iter()
                        .map(|r| levels.binary_search(&r[c].as_str()).unwrap() as f64)
                        .collect(),
                );
            }
            Err(r) => {
                return Err(Error::Parse {
                    row: r + first_data_row,
                    column: c + 1,
                    message: format!("`{}` is not numeric", records[r][c]),
                })
            }
        }
    }

    let mut warnings = Vec::new();
    for (col, &c) in columns.iter_mut().zip(&feature_cols) {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let std = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        if std == 0.0 {
            let name = header.as_ref().map_or_else(|| format!("{}", c + 1), |h| h[c].clone());
            warnings.push(format!("column {name} is constant; normalized to zeros"));
            col.iter_mut().for_each(|x| *x = 0.0);
        } else {
            col.iter_mut().for_each(|x| *x = (*x - mean) / std);
        }
    }

    let ground_truth = match label_idx {
        Some(li) => {
            let raw = records
                .iter()
                .enumerate()
                .map(|(r, rec)| {
                    rec[li].parse::<i64>().map_err(|_| Error::Parse {
                        row: r + first_data_row,
                        column: li + 1,
                        message: format!("label `{}` is not an integer", rec[li]),
                    })
                })
                .collect::<Result<Vec<i64>>>()?;
            let mut levels = raw.clone();
            levels.sort_unstable();
            levels.dedup();
            Some(
                raw.iter()
                    .map(|x| levels.binary_search(x).unwrap())
                    .collect::<Vec<usize>>(),
            )
        }
        None => None,
    };

    let points = (0..records.len())
        .map(|r| columns.iter().map(|col| col[r]).collect())
        .collect();
    Ok(NamedDataset {
        name: "csv".into(),
        payload: Payload::Points(PointDataset::new(points, ground_truth.clone())?),
        ground_truth,
        provenance: Provenance::Embedded,
        warnings,
    })
}

/// Writes points as CSV (`x0,x1,...[,label]`), readable by [`load_csv`].
pub fn write_csv<W: Write>(data: &PointDataset, mut out: W) -> Result<()> {
    let dim = data.dimension();
    let mut header: Vec<String> = (0..dim).map(|d| format!("x{d}")).collect();
    if data.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, p) in data.points().iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
        if let Some(l) = data.labels() {
            row.push(l[i].to_string());
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
