use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use sdpath::oracle::euclid_lower_bound;
use sdpath::query::Preprocessed;
use sdpath::{
    node_bound, verify_descending, Discretization, Error, GeomParams, NodeId, NodeKind, Path, Point3,
    QueryAnswer, Solver, TerminalKind, VertexId,
};
use serde::Serialize;

use crate::input::{generate_family, load_terrain, resolve_source, PointArg};
use crate::output::{emit, to_json};
use crate::{Command, Family, FormatArg, SolveArgs};

/// A result that breaks a guarantee the library is supposed to uphold.
#[derive(Debug)]
pub struct InvariantViolation(pub String);

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "internal invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantViolation {}

pub fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Info { terrain, epsilon, out } => {
            let t = load_terrain(&terrain.terrain, terrain.seed)?;
            let report = info(&t, epsilon)?;
            emit(&to_json(&report)?, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            family,
            param,
            seed,
            format,
            out,
        } => {
            let name = family_name(family);
            let t = generate_family(name, |default| Ok(param.unwrap_or(default)), seed)?;
            let bytes = match format {
                FormatArg::Json => to_json(&t.to_json())?,
                FormatArg::Off => t.to_off().into_bytes(),
            };
            emit(&bytes, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Discretize { terrain, epsilon, out } => {
            let t = load_terrain(&terrain.terrain, terrain.seed)?;
            let params = t.geometry_params()?;
            let d = Discretization::new(&t, &params, epsilon)?;
            emit(&to_json(&discretization(&d))?, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => solve(args, false),
        Command::Query(args) => solve(args, true),
        Command::Verify { terrain, path, out } => {
            let t = load_terrain(&terrain.terrain, terrain.seed)?;
            let data = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let p = Path::from_json(&data)?;
            let report = verify_descending(&t, &p);
            let ok = report.ok;
            emit(
                &to_json(&VerifyOut {
                    ok,
                    length: p.length,
                    first_violation: report.first_violation.map(|v| v.to_string()),
                })?,
                out.as_deref(),
            )?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bench {
            terrains,
            epsilons,
            targets,
            solver,
            edge_chords,
            seed,
            out,
        } => {
            let csv = bench(&terrains, &epsilons, &targets, solver.into(), edge_chords, seed)?;
            emit(&csv, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Ramp => "ramp",
        Family::Skinny => "skinny",
        Family::Nearlevel => "nearlevel",
        Family::Random => "random",
        Family::TwoFace => "two-face",
        Family::Pit => "pit",
        Family::Isoline => "isoline",
        Family::Triangle => "triangle",
    }
}

#[derive(Serialize)]
struct InfoOut {
    vertices: usize,
    edges: usize,
    faces: usize,
    #[serde(flatten)]
    params: GeomParams,
    epsilon: f64,
    delta: f64,
    node_count: usize,
    /// Per-edge bound c.
    edge_bound: f64,
    /// Total bound 3 n c.
    node_bound: f64,
}

fn info(t: &sdpath::Terrain, epsilon: f64) -> Result<InfoOut> {
    let params = t.geometry_params()?;
    let d = Discretization::new(t, &params, epsilon)?;
    let n = t.vertex_count();
    let c = node_bound(&params, epsilon, n);
    Ok(InfoOut {
        vertices: n,
        edges: t.edge_count(),
        faces: t.face_count(),
        params,
        epsilon,
        delta: d.delta(),
        node_count: d.node_count(),
        edge_bound: c,
        node_bound: 3.0 * n as f64 * c,
    })
}

#[derive(Serialize)]
struct NodeOut {
    id: NodeId,
    point: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<VertexId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<usize>,
}

#[derive(Serialize)]
struct DiscretizationOut {
    epsilon: Option<f64>,
    delta: f64,
    edge_bound: f64,
    node_count: usize,
    edge_node_counts: Vec<usize>,
    nodes: Vec<NodeOut>,
}

fn discretization(d: &Discretization) -> DiscretizationOut {
    let nodes = d
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| {
            let (vertex, edge) = match n.kind {
                NodeKind::Vertex(v) => (Some(v), None),
                NodeKind::Steiner { edge, .. } => (None, Some(edge)),
            };
            NodeOut {
                id,
                point: arr(&n.pos),
                vertex,
                edge,
            }
        })
        .collect();
    DiscretizationOut {
        epsilon: d.epsilon(),
        delta: d.delta(),
        edge_bound: d.bound(),
        node_count: d.node_count(),
        edge_node_counts: d.edge_node_counts(),
        nodes,
    }
}

fn arr(p: &Point3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

#[derive(Serialize)]
struct VerifyOut {
    ok: bool,
    length: f64,
    first_violation: Option<String>,
}

#[derive(Serialize)]
struct AnswerOut {
    target: String,
    point: [f64; 3],
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terminal_kind: Option<TerminalKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    last_hop: Option<NodeId>,
}

#[derive(Serialize)]
struct SolveOut {
    source: SourceOut,
    solver: Solver,
    edge_chords: bool,
    epsilon: f64,
    delta: f64,
    params: GeomParams,
    node_count: usize,
    tree: TreeOut,
    answers: Vec<AnswerOut>,
}

#[derive(Serialize)]
struct SourceOut {
    vertex: VertexId,
    point: [f64; 3],
}

#[derive(Serialize)]
struct TreeOut {
    settled: usize,
    heap_pushes: usize,
    reachable: usize,
}

fn solve(args: SolveArgs, answers_only: bool) -> Result<ExitCode> {
    let t = load_terrain(&args.terrain.terrain, args.terrain.seed)?;
    let parsed = args
        .targets
        .iter()
        .map(|s| PointArg::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let (t, source) = resolve_source(t, args.source.as_deref())?;
    let points = parsed.iter().map(|s| s.resolve(&t)).collect::<Result<Vec<_>>>()?;
    let solver: Solver = args.solver.into();
    let pre = Preprocessed::build(t, source, args.epsilon, solver, args.edge_chords)?;
    let s = *pre.terrain.vertex(source);

    let mut answers = Vec::with_capacity(points.len());
    let mut infeasible = false;
    for (arg, v) in args.targets.iter().zip(&points) {
        let answer = match pre.query(v) {
            Ok(a) => {
                check_answer(&pre, &s, v, &a)?;
                AnswerOut {
                    target: arg.clone(),
                    point: arr(v),
                    status: "ok",
                    points: Some(a.path.points.iter().map(arr).collect()),
                    length: Some(a.length),
                    terminal_kind: Some(a.terminal_kind),
                    last_hop: a.last_hop,
                }
            }
            Err(Error::NoDescendingPath) => {
                infeasible = true;
                AnswerOut {
                    target: arg.clone(),
                    point: arr(v),
                    status: "no-descending-path",
                    points: None,
                    length: None,
                    terminal_kind: None,
                    last_hop: None,
                }
            }
            Err(e) => return Err(e).with_context(|| format!("target {arg}")),
        };
        answers.push(answer);
    }

    let bytes = if answers_only {
        if answers.len() == 1 {
            to_json(&answers[0])?
        } else {
            to_json(&answers)?
        }
    } else {
        let tree = &pre.tree;
        to_json(&SolveOut {
            source: SourceOut {
                vertex: source,
                point: arr(&s),
            },
            solver,
            edge_chords: args.edge_chords,
            epsilon: args.epsilon,
            delta: pre.disc.delta(),
            params: pre.params,
            node_count: pre.disc.node_count(),
            tree: TreeOut {
                settled: tree.settled_count(),
                heap_pushes: tree.heap_pushes(),
                reachable: tree.dists().iter().filter(|d| d.is_finite()).count(),
            },
            answers,
        })?
    };
    emit(&bytes, args.out.as_deref())?;
    Ok(if infeasible { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn check_answer(pre: &Preprocessed, s: &Point3, v: &Point3, a: &QueryAnswer) -> Result<()> {
    let report = verify_descending(&pre.terrain, &a.path);
    if let Some(violation) = report.first_violation {
        return Err(InvariantViolation(format!("answer path is not descending: {violation}")).into());
    }
    if a.length < euclid_lower_bound(s, v) - 1e-9 {
        return Err(InvariantViolation(format!("answer length {} is below |sv|", a.length)).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    terrain: String,
    n: usize,
    x: f64,
    epsilon: f64,
    nodes: usize,
    settled: usize,
    preprocess_s: f64,
    node_query_s: Option<f64>,
    interior_query_s: Option<f64>,
    approx_ratio: Option<f64>,
}

fn bench(
    terrains: &[String],
    epsilons: &[f64],
    targets: &[String],
    solver: Solver,
    edge_chords: bool,
    seed: u64,
) -> Result<Vec<u8>> {
    let parsed = targets.iter().map(|s| PointArg::parse(s)).collect::<Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    if parsed.is_empty() {
        w.write_record([
            "terrain",
            "n",
            "x",
            "epsilon",
            "nodes",
            "settled",
            "preprocess_s",
            "node_query_s",
            "interior_query_s",
            "approx_ratio",
        ])?;
        return Ok(w.into_inner()?);
    }
    let finest = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    for name in terrains {
        let t = load_terrain(name, seed)?;
        let (t, source) = resolve_source(t, None)?;
        let points = parsed.iter().map(|s| s.resolve(&t)).collect::<Result<Vec<_>>>()?;
        let baseline = run_queries(&t, source, finest, solver, edge_chords, &points)?.lengths;
        for &eps in epsilons {
            let run = run_queries(&t, source, eps, solver, edge_chords, &points)?;
            let ratios: Vec<f64> = run
                .lengths
                .iter()
                .zip(&baseline)
                .filter_map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) if *b > 0.0 => Some(a / b),
                    _ => None,
                })
                .collect();
            w.serialize(BenchRow {
                terrain: name.clone(),
                n: t.vertex_count(),
                x: run.x,
                epsilon: eps,
                nodes: run.nodes,
                settled: run.settled,
                preprocess_s: run.preprocess_s,
                node_query_s: mean(&run.node_times),
                interior_query_s: mean(&run.interior_times),
                approx_ratio: mean(&ratios),
            })?;
        }
    }
    Ok(w.into_inner()?)
}

struct BenchRun {
    x: f64,
    nodes: usize,
    settled: usize,
    preprocess_s: f64,
    node_times: Vec<f64>,
    interior_times: Vec<f64>,
    lengths: Vec<Option<f64>>,
}

fn run_queries(
    t: &sdpath::Terrain,
    source: VertexId,
    eps: f64,
    solver: Solver,
    edge_chords: bool,
    points: &[Point3],
) -> Result<BenchRun> {
    let started = Instant::now();
    let pre = Preprocessed::build(t.clone(), source, eps, solver, edge_chords)?;
    let preprocess_s = started.elapsed().as_secs_f64();
    let mut run = BenchRun {
        x: pre.params.x,
        nodes: pre.disc.node_count(),
        settled: pre.tree.settled_count(),
        preprocess_s,
        node_times: Vec::new(),
        interior_times: Vec::new(),
        lengths: Vec::with_capacity(points.len()),
    };
    for v in points {
        let started = Instant::now();
        let answer = pre.query(v);
        let dt = started.elapsed().as_secs_f64();
        match answer {
            Ok(a) => {
                match a.terminal_kind {
                    TerminalKind::TreeNode => run.node_times.push(dt),
                    TerminalKind::InteriorPoint => run.interior_times.push(dt),
                }
                run.lengths.push(Some(a.length));
            }
            Err(Error::NoDescendingPath) => run.lengths.push(None),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(run)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}
