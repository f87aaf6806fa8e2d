use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use edgedom::community::{assign_communities, dominant_classes, unfold, write_unfoldings};
use edgedom::datasets::{generate, karate_club, write_csv};
use edgedom::dynamics::{run_outcome, CompetitionConfig, FlowEntry};
use edgedom::eval::{
    adjusted_rand_index, published_artificial_table, published_real_report, EvalReport, ARTIFICIAL_DATASETS,
    PUBLISHED_CD, TECHNIQUES,
};
use edgedom::merge::{modularity, MergeStep};
use edgedom::pipeline::{cell_seed, cluster, sweep, PipelineConfig, SweepCell, SweepGrid, SweepInput, SweepSettings};
use edgedom::{NeighborhoodParams, Partition, Topology, Weighting, WeightedGraph};
use serde::Serialize;

use crate::args::*;
use crate::input::{emit, load, read_labels, Loaded, Request, Source};
use crate::{svg, Failure};

pub fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Graph(a) => graph(a),
        Command::Simulate(a) => simulate(a),
        Command::Communities(a) => communities(a),
        Command::Cluster(a) => cluster_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Eval(a) => eval(a),
        Command::Gen(a) => gen(a),
        Command::Karate(a) => karate(a),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn competition(classes: usize, d: &DynamicsArgs, seed: u64) -> CompetitionConfig {
    CompetitionConfig::new(classes, d.lambda)
        .with_seed(seed)
        .with_max_steps(d.steps)
        .with_tol(d.tol)
}

fn ari(truth: Option<&[usize]>, labels: &[usize]) -> Result<Option<f64>, Failure> {
    truth.map(|t| adjusted_rand_index(t, labels)).transpose().map_err(Failure::from)
}

/// Vertex positions for drawings: the points themselves, or a layout.
fn positions(input: &Loaded, g: &WeightedGraph) -> Vec<[f64; 2]> {
    match input.points() {
        Some(p) => svg::planar(p.points()),
        None => svg::layout(g),
    }
}

fn write_plot(path: Option<&PathBuf>, make: impl FnOnce() -> String) -> Result<(), Failure> {
    if let Some(p) = path {
        std::fs::write(p, make()).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn partition_csv(p: &Partition) -> Result<String, Failure> {
    let mut buf = Vec::new();
    p.write_csv(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

#[derive(Serialize)]
struct GraphJson {
    vertices: usize,
    knn: usize,
    weighting: Weighting,
    /// `[i, j, w]` triples.
    edges: Vec<(usize, usize, f64)>,
}

fn graph(a: GraphArgs) -> Result<(), Failure> {
    let input = load(Request {
        path: &a.input,
        kind: InputKind::Points,
        label_column: a.label_column.as_deref(),
        categorical: a.categorical,
        truth: None,
    })?;
    let g = input.graph(Some(a.knn), a.weighting.into())?;
    let text = match a.format {
        GraphFormat::Edges => {
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
        GraphFormat::Json => to_json(&GraphJson {
            vertices: g.vertex_count(),
            knn: a.knn,
            weighting: a.weighting.into(),
            edges: g
                .edges()
                .iter()
                .zip(g.edge_weights())
                .map(|(&(i, j), &w)| (i, j, w))
                .collect(),
        })?,
    };
    emit(a.out.as_ref(), &text)?;
    write_plot(a.plot.as_ref(), || {
        svg::graph(&g, &positions(&input, &g), &vec![0; g.edge_count()], input.truth.as_deref())
    })
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    converged: bool,
    seed_vertices: &'a [usize],
    step: usize,
    nu: &'a [Vec<f64>],
    flows: &'a [FlowEntry],
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let input = load(Request::from(&a.input))?;
    let g = input.graph(a.input.knn, a.input.weighting.into())?;
    let cfg = competition(a.classes, &a.dynamics, a.dynamics.seed);
    let outcome = run_outcome(&g, &cfg)?;
    let snap = outcome.state.snapshot(&g);
    let text = match a.output.format {
        Format::Json => to_json(&SimulateJson {
            converged: outcome.converged,
            seed_vertices: &outcome.state.seed_vertices,
            step: snap.step,
            nu: &snap.nu,
            flows: &snap.flows,
        })?,
        Format::Csv => {
            let mut s = String::from("class,i,j,value\n");
            for f in &snap.flows {
                let _ = writeln!(s, "{},{},{},{}", f.class, f.i, f.j, f.value);
            }
            s
        }
    };
    emit(a.output.out.as_ref(), &text)?;
    write_plot(a.output.plot.as_ref(), || {
        svg::graph(&g, &positions(&input, &g), &dominant_classes(&g, &outcome.state.flows), None)
    })
}

#[derive(Serialize)]
struct CommunitiesJson<'a> {
    vertices: usize,
    edges: usize,
    classes: usize,
    order: usize,
    seed: u64,
    converged: bool,
    steps: usize,
    communities: usize,
    sizes: Vec<usize>,
    modularity: f64,
    ari: Option<f64>,
    labels: &'a [usize],
}

fn communities(a: CommunitiesArgs) -> Result<(), Failure> {
    let input = load(Request::from(&a.input))?;
    let g = input.graph(a.input.knn, a.input.weighting.into())?;
    let params = NeighborhoodParams::new(a.order)?;
    let cfg = competition(a.classes, &a.dynamics, a.dynamics.seed);
    let outcome = run_outcome(&g, &cfg)?;
    let unfoldings = unfold(&g, &outcome.state);
    let partition = assign_communities(&unfoldings, params)?;
    if let Some(path) = &a.unfoldings {
        let mut buf = Vec::new();
        write_unfoldings(&unfoldings, &mut buf)?;
        std::fs::write(path, buf).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    }
    let text = match a.output.format {
        Format::Json => to_json(&CommunitiesJson {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            classes: a.classes,
            order: a.order,
            seed: a.dynamics.seed,
            converged: outcome.converged,
            steps: outcome.state.step,
            communities: partition.community_count(),
            sizes: partition.sizes(),
            modularity: modularity(&g, &partition)?,
            ari: ari(input.truth.as_deref(), partition.labels())?,
            labels: partition.labels(),
        })?,
        Format::Csv => partition_csv(&partition)?,
    };
    emit(a.output.out.as_ref(), &text)?;
    write_plot(a.output.plot.as_ref(), || {
        svg::graph(
            &g,
            &positions(&input, &g),
            &dominant_classes(&g, &outcome.state.flows),
            Some(partition.labels()),
        )
    })
}

#[derive(Serialize)]
struct ClusterJson<'a> {
    vertices: usize,
    edges: usize,
    knn: Option<usize>,
    classes: usize,
    order: usize,
    target: usize,
    lambda: f64,
    seed: u64,
    run_seed: u64,
    converged: bool,
    steps: usize,
    initial_communities: usize,
    initial_modularity: f64,
    modularity: f64,
    ari: Option<f64>,
    evaluations: usize,
    merges: &'a [MergeStep],
    sizes: Vec<usize>,
    labels: &'a [usize],
}

fn cluster_cmd(a: ClusterArgs) -> Result<(), Failure> {
    let input = load(Request::from(&a.input))?;
    let knn = match input.source {
        Source::Points(_) => a.input.knn,
        Source::Graph(_) => None,
    };
    let g = input.graph(a.input.knn, a.input.weighting.into())?;
    // Same seed mixing as a sweep cell, so single runs reproduce sweep rows.
    let run_seed = cell_seed(a.dynamics.seed, knn, a.classes);
    let mut cfg = PipelineConfig::new(competition(a.classes, &a.dynamics, run_seed), a.order, a.target)?;
    cfg.knn = knn;
    cfg.weighting = a.input.weighting.into();
    cfg.unweighted_q = a.unweighted_q;
    let c = cluster(&g, &cfg)?;
    let text = match a.output.format {
        Format::Json => to_json(&ClusterJson {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            knn,
            classes: a.classes,
            order: a.order,
            target: a.target,
            lambda: a.dynamics.lambda,
            seed: a.dynamics.seed,
            run_seed,
            converged: c.converged,
            steps: c.state.step,
            initial_communities: c.initial.community_count(),
            initial_modularity: c.trace.initial_modularity,
            modularity: c.modularity,
            ari: ari(input.truth.as_deref(), c.partition.labels())?,
            evaluations: c.trace.evaluations,
            merges: &c.trace.steps,
            sizes: c.partition.sizes(),
            labels: c.partition.labels(),
        })?,
        Format::Csv => partition_csv(&c.partition)?,
    };
    emit(a.output.out.as_ref(), &text)?;
    write_plot(a.output.plot.as_ref(), || match input.points() {
        Some(p) => svg::scatter(p.points(), Some(c.partition.labels())),
        None => svg::graph(
            &g,
            &svg::layout(&g),
            &dominant_classes(&g, &c.state.flows),
            Some(c.partition.labels()),
        ),
    })
}

#[derive(Serialize)]
struct SweepRow {
    knn: Option<usize>,
    #[serde(rename = "K")]
    classes: usize,
    o: usize,
    seed: u64,
    ari: Option<f64>,
    q: Option<f64>,
    labels_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn labels_file_name(cell: &SweepCell) -> String {
    let p = &cell.params;
    let knn = p.knn.map_or_else(|| "graph".to_string(), |k| format!("knn{k}"));
    format!("{knn}_K{}_o{}_seed{}.csv", p.classes, p.order, p.seed)
}

fn sweep_cmd(a: SweepArgs) -> Result<(), Failure> {
    let input = load(Request {
        path: &a.input,
        kind: a.input_kind,
        label_column: a.label_column.as_deref(),
        categorical: a.categorical,
        truth: a.truth.as_deref(),
    })?;
    let knn_values = match &input.source {
        Source::Points(_) if a.knn.is_empty() => return Err(Failure::usage("point input needs --knn")),
        Source::Points(_) => a.knn.clone(),
        Source::Graph(_) => {
            if !a.knn.is_empty() {
                eprintln!("warning: --knn ignored for graph input");
            }
            vec![0]
        }
    };
    let grid = SweepGrid {
        knn_values,
        class_count_values: a.classes.clone(),
        order_values: a.order.clone(),
        seeds: (0..a.seeds as u64).map(|i| a.dynamics.seed + i).collect(),
    };
    let mut settings = SweepSettings::new(a.target);
    settings.lambda = a.dynamics.lambda;
    settings.max_steps = a.dynamics.steps;
    settings.convergence_tol = a.dynamics.tol;
    settings.weighting = a.weighting.into();
    settings.unweighted_q = a.unweighted_q;
    let sweep_input = match &input.source {
        Source::Points(p) => SweepInput::Points(p),
        Source::Graph(g) => SweepInput::Graph(g),
    };
    let report = sweep(sweep_input, &grid, &settings, input.truth.as_deref())?;

    if let Some(dir) = &a.labels_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    }
    let mut rows = Vec::with_capacity(report.cells.len() + report.failures.len());
    for cell in &report.cells {
        let labels_file = match &a.labels_dir {
            Some(dir) => {
                let path = dir.join(labels_file_name(cell));
                std::fs::write(&path, partition_csv(&cell.partition)?)
                    .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
                Some(path.display().to_string())
            }
            None => None,
        };
        rows.push((
            cell.params.clone(),
            SweepRow {
                knn: cell.params.knn,
                classes: cell.params.classes,
                o: cell.params.order,
                seed: cell.params.seed,
                ari: cell.ari,
                q: Some(cell.modularity),
                labels_file,
                error: None,
            },
        ));
    }
    for f in &report.failures {
        rows.push((
            f.params.clone(),
            SweepRow {
                knn: f.params.knn,
                classes: f.params.classes,
                o: f.params.order,
                seed: f.params.seed,
                ari: None,
                q: None,
                labels_file: None,
                error: Some(f.error.clone()),
            },
        ));
    }
    rows.sort_by(|x, y| x.0.cmp(&y.0));

    let mut text = String::new();
    match a.output.format {
        Format::Json => {
            for (_, row) in &rows {
                text.push_str(&serde_json::to_string(row)?);
                text.push('\n');
            }
        }
        Format::Csv => {
            text.push_str("knn,K,o,seed,ari,q,labels_file,error\n");
            let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
            for (_, r) in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    r.knn.map_or_else(String::new, |k| k.to_string()),
                    r.classes,
                    r.o,
                    r.seed,
                    opt(r.ari),
                    opt(r.q),
                    r.labels_file.as_deref().unwrap_or(""),
                    r.error.as_deref().map(|e| e.replace(',', ";")).unwrap_or_default()
                );
            }
        }
    }
    emit(a.output.out.as_ref(), &text)?;

    let best = if input.truth.is_some() {
        report.best_by_ari()
    } else {
        report.best_by_modularity()
    };
    match best {
        Some(b) => eprintln!(
            "{} cells, {} failed; best: knn={:?} K={} o={} seed={} ari={:?} q={:.4}",
            report.cells.len() + report.failures.len(),
            report.failures.len(),
            b.params.knn,
            b.params.classes,
            b.params.order,
            b.params.seed,
            b.ari,
            b.modularity
        ),
        None => eprintln!("all {} cells failed", report.failures.len()),
    }
    if let Some(b) = best {
        write_plot(a.output.plot.as_ref(), || match &input.source {
            Source::Points(p) => svg::scatter(p.points(), Some(b.partition.labels())),
            Source::Graph(g) => svg::graph(g, &svg::layout(g), &vec![0; g.edge_count()], Some(b.partition.labels())),
        })?;
    }
    if report.cells.is_empty() {
        return Err(Failure {
            code: 3,
            message: "no sweep cell produced a clustering".into(),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct AriJson {
    n: usize,
    ari: f64,
}

#[derive(Serialize)]
struct EvalJson<'a> {
    #[serde(flatten)]
    report: &'a EvalReport,
    significantly_different: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    published_cd: Option<f64>,
}

/// Dataset names, technique names and the score rows.
type ScoreTable = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

fn read_score_table(path: &Path) -> Result<ScoreTable, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() < 3 {
        return Err(Failure::data(format!(
            "{}: need a dataset column and at least two techniques",
            path.display()
        )));
    }
    let techniques = headers.iter().skip(1).map(str::to_string).collect();
    let (mut datasets, mut table) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        datasets.push(rec.get(0).unwrap_or_default().to_string());
        let scores = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(col, v)| {
                v.parse::<f64>().map_err(|_| {
                    Failure::data(format!(
                        "{}: row {}, column {}: `{v}` is not a number",
                        path.display(),
                        row + 2,
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        table.push(scores);
    }
    Ok((datasets, techniques, table))
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    if let Some(pred) = &a.pred {
        let truth = a.truth.as_ref().ok_or_else(|| Failure::usage("--pred needs --truth"))?;
        let (p, t) = (read_labels(pred)?, read_labels(truth)?);
        if p.len() != t.len() {
            return Err(Failure::data(format!("{} predicted labels vs {} true labels", p.len(), t.len())));
        }
        let value = adjusted_rand_index(&t, &p)?;
        let text = match a.output.format {
            Format::Json => to_json(&AriJson { n: p.len(), ari: value })?,
            Format::Csv => format!("n,ari\n{},{value}\n", p.len()),
        };
        return emit(a.output.out.as_ref(), &text);
    }

    let (datasets, techniques, table, published) = match (&a.table, a.published) {
        (Some(path), _) => {
            let (d, t, s) = read_score_table(path)?;
            (d, t, s, None)
        }
        (None, Some(PublishedTable::Artificial)) => (
            ARTIFICIAL_DATASETS.iter().map(|s| s.to_string()).collect(),
            TECHNIQUES.iter().map(|s| s.to_string()).collect(),
            published_artificial_table(),
            None,
        ),
        (None, _) => {
            let r = published_real_report(a.alpha)?;
            (r.datasets, r.techniques, r.ari_table, Some(PUBLISHED_CD))
        }
    };
    let control = match &a.control {
        Some(name) => techniques
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| Failure::usage(format!("unknown control technique `{name}`")))?,
        None => techniques.len() - 1,
    };
    let report = EvalReport::new(datasets, techniques, table, a.alpha, control)?;
    let text = match a.output.format {
        Format::Json => to_json(&EvalJson {
            report: &report,
            significantly_different: report
                .significantly_different()
                .into_iter()
                .map(|t| report.techniques[t].as_str())
                .collect(),
            published_cd: published,
        })?,
        Format::Csv => {
            let mut s = String::from("technique,avg_rank\n");
            for (t, r) in report.techniques.iter().zip(&report.avg_ranks) {
                let _ = writeln!(s, "{},{r}", t.replace(',', ";"));
            }
            s
        }
    };
    emit(a.output.out.as_ref(), &text)?;
    write_plot(a.output.plot.as_ref(), || report.rank_plot_svg())
}

#[derive(Serialize)]
struct GenJson<'a> {
    shape: String,
    n: usize,
    seed: u64,
    points: &'a [Vec<f64>],
    labels: Option<&'a [usize]>,
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let ds = generate(a.shape.into(), a.n, a.seed)?;
    let points = ds.points().ok_or_else(|| Failure::data("generator produced no points"))?;
    let text = match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(points, &mut buf)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
        Format::Json => to_json(&GenJson {
            shape: ds.name.clone(),
            n: points.len(),
            seed: a.seed,
            points: points.points(),
            labels: points.labels(),
        })?,
    };
    emit(a.out.as_ref(), &text)?;
    write_plot(a.plot.as_ref(), || svg::scatter(points.points(), points.labels()))
}

#[derive(Serialize)]
struct KarateRun {
    seed: u64,
    o: usize,
    ari: Option<f64>,
    q: f64,
    converged: bool,
}

#[derive(Serialize)]
struct KarateBest<'a> {
    seed: u64,
    o: usize,
    ari: Option<f64>,
    q: f64,
    converged: bool,
    labels: &'a [usize],
}

impl<'a> From<&'a SweepCell> for KarateBest<'a> {
    fn from(c: &'a SweepCell) -> Self {
        Self {
            seed: c.params.seed,
            o: c.params.order,
            ari: c.ari,
            q: c.modularity,
            converged: c.converged,
            labels: c.partition.labels(),
        }
    }
}

#[derive(Serialize)]
struct KarateJson<'a> {
    dataset: &'a str,
    vertices: usize,
    edges: usize,
    classes: usize,
    target: usize,
    lambda: f64,
    /// Highest final modularity, chosen without looking at the ground truth.
    best: Option<KarateBest<'a>>,
    best_by_ari: Option<KarateBest<'a>>,
    failed: usize,
    runs: Vec<KarateRun>,
}

fn karate(a: KarateArgs) -> Result<(), Failure> {
    let ds = karate_club();
    let g = ds.graph().ok_or_else(|| Failure::data("karate club graph missing"))?;
    let truth = ds.ground_truth.as_deref();
    let grid = SweepGrid {
        knn_values: vec![0],
        class_count_values: vec![a.classes],
        order_values: a.order.clone(),
        seeds: (0..a.seeds as u64).map(|i| a.dynamics.seed + i).collect(),
    };
    let mut settings = SweepSettings::new(a.target);
    settings.lambda = a.dynamics.lambda;
    settings.max_steps = a.dynamics.steps;
    settings.convergence_tol = a.dynamics.tol;
    let report = sweep(SweepInput::Graph(g), &grid, &settings, truth)?;
    let mut runs: Vec<&SweepCell> = report.cells.iter().collect();
    runs.sort_by(|x, y| x.params.cmp(&y.params));
    let best = report.best_by_modularity();
    let text = match a.output.format {
        Format::Json => to_json(&KarateJson {
            dataset: &ds.name,
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            classes: a.classes,
            target: a.target,
            lambda: a.dynamics.lambda,
            best: best.map(KarateBest::from),
            best_by_ari: report.best_by_ari().map(KarateBest::from),
            failed: report.failures.len(),
            runs: runs
                .iter()
                .map(|c| KarateRun {
                    seed: c.params.seed,
                    o: c.params.order,
                    ari: c.ari,
                    q: c.modularity,
                    converged: c.converged,
                })
                .collect(),
        })?,
        Format::Csv => {
            let mut s = String::from("seed,o,ari,q,converged\n");
            for c in &runs {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    c.params.seed,
                    c.params.order,
                    c.ari.map_or_else(String::new, |x| x.to_string()),
                    c.modularity,
                    c.converged
                );
            }
            s
        }
    };
    emit(a.output.out.as_ref(), &text)?;
    if let (Some(path), Some(b)) = (a.output.plot.as_ref(), best) {
        // Re-run the chosen cell to recover its edge domination.
        let mut cfg = PipelineConfig::new(competition(a.classes, &a.dynamics, b.run_seed), b.params.order, a.target)?;
        cfg.knn = None;
        let c = cluster(g, &cfg)?;
        let owners = dominant_classes(g, &c.state.flows);
        write_plot(Some(path), || svg::graph(g, &svg::layout(g), &owners, Some(c.partition.labels())))?;
    }
    if report.cells.is_empty() {
        return Err(Failure {
            code: 3,
            message: "no run produced a clustering".into(),
        });
    }
    Ok(())
}
