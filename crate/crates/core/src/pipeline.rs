//! End-to-end orchestration: inputs, modeling, configuration, analytics and
//! export, with per-stage timing and counts.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::{parse_blueprint, Blueprint, RouteMetric, WanParadigm};
use crate::export::{
    export_graph, export_network_config, export_whitelist, save_model, ExportError, GraphFormat,
    WhitelistFormat,
};
use crate::grid_io::{parse_grid, PowerGridModel};
use crate::model::{InfrastructureModel, ModelError, Stage};
use crate::planning::{PlanningReport, Rate};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Overrides the blueprint's WAN paradigm.
    pub paradigm: Option<WanParadigm>,
    /// Overrides the blueprint's route metric.
    pub route_metric: Option<RouteMetric>,
    /// Last stage to run.
    pub stage: Stage,
    /// Worker threads for per-station and per-flow work; `None` uses all cores.
    pub jobs: Option<usize>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            paradigm: None,
            route_metric: None,
            stage: Stage::Analytics,
            jobs: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("inputs: {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("export: {0}")]
    Export(#[from] ExportError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl PipelineError {
    /// Input/output problems as opposed to errors raised by a stage.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            PipelineError::Read { .. } | PipelineError::Write { .. } | PipelineError::Pool(_)
        )
    }

    pub fn stage_name(&self) -> &'static str {
        match self {
            PipelineError::Read { .. } | PipelineError::Input { .. } => "inputs",
            PipelineError::Model(e) => e.stage().as_str(),
            PipelineError::Export(_) | PipelineError::Write { .. } => "export",
            PipelineError::Pool(_) => "setup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub millis: f64,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub grid: String,
    pub blueprint: String,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PipelineReport {
    pub fn total_millis(&self) -> f64 {
        self.stages.iter().fold(0.0, |acc, s| acc + s.millis)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid: {}", self.grid)?;
        writeln!(f, "blueprint: {}", self.blueprint)?;
        writeln!(
            f,
            "{:<15} {:>10} {:>7} {:>7}",
            "stage", "ms", "nodes", "edges"
        )?;
        for s in &self.stages {
            writeln!(
                f,
                "{:<15} {:>10.2} {:>7} {:>7}",
                s.stage, s.millis, s.nodes, s.edges
            )?;
        }
        writeln!(f, "{:<15} {:>10.2}", "total", self.total_millis())?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for o in &self.outputs {
            writeln!(f, "wrote {o}")?;
        }
        Ok(())
    }
}

/// The report so far and the error that stopped the run.
#[derive(Debug)]
pub struct PipelineFailure {
    pub report: Box<PipelineReport>,
    pub error: PipelineError,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.error.stage_name(), self.error)
    }
}

impl std::error::Error for PipelineFailure {}

/// `path` itself if it exists, otherwise `path` with `ext` appended.
pub fn resolve_input(path: &Path, ext: &str) -> PathBuf {
    if path.exists() || path.extension().is_some() {
        return path.to_path_buf();
    }
    let mut with = path.as_os_str().to_owned();
    with.push(".");
    with.push(ext);
    let with = PathBuf::from(with);
    if with.exists() {
        with
    } else {
        path.to_path_buf()
    }
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_grid(path: &Path) -> Result<PowerGridModel, PipelineError> {
    let path = resolve_input(path, "json");
    parse_grid(&read(&path)?).map_err(|e| PipelineError::Input {
        path,
        message: e.to_string(),
    })
}

pub fn load_blueprint(path: &Path) -> Result<Blueprint, PipelineError> {
    let path = resolve_input(path, "toml");
    parse_blueprint(&read(&path)?).map_err(|e| PipelineError::Input {
        path,
        message: e.to_string(),
    })
}

pub fn apply_overrides(bp: &mut Blueprint, opts: &PipelineOptions) {
    if let Some(p) = opts.paradigm {
        bp.wan.paradigm = p;
    }
    if let Some(m) = opts.route_metric {
        bp.route_metric = m;
    }
}

/// Rendered output files for a model, named relative to the output directory.
pub fn render_outputs(model: &InfrastructureModel) -> Result<Vec<(String, String)>, ExportError> {
    let mut files = vec![
        (
            "graph.dot".to_string(),
            export_graph(model, GraphFormat::Dot),
        ),
        (
            "graph.graphml".to_string(),
            export_graph(model, GraphFormat::GraphMl),
        ),
    ];
    if model.stage >= Stage::Configuration {
        let rules = &model.network.as_ref().expect("configured").whitelist;
        files.push(("netconfig.json".into(), export_network_config(model)?));
        files.push((
            "whitelist.csv".into(),
            export_whitelist(rules, WhitelistFormat::Csv),
        ));
        files.push((
            "whitelist.rules".into(),
            export_whitelist(rules, WhitelistFormat::Rules),
        ));
        files.push(("model.json".into(), save_model(model)));
    }
    if let Some(p) = &model.planning {
        files.push(("planning.txt".into(), planning_text(p)));
        files.push(("planning.csv".into(), planning_csv(p)));
    }
    Ok(files)
}

pub fn planning_text(p: &PlanningReport) -> String {
    let mut out = String::new();
    let mean = p.flows.iter().map(|f| f.mean_bps).sum::<Rate>().to_f64();
    let burst = p.flows.iter().map(|f| f.burst_bps).sum::<Rate>().to_f64();
    let _ = writeln!(out, "flows: {}", p.flows.len());
    let _ = writeln!(out, "total mean demand: {mean:.3} bit/s");
    let _ = writeln!(out, "total burst demand: {burst:.3} bit/s");
    let busiest = p.loads.iter().max_by(|a, b| {
        a.utilization
            .total_cmp(&b.utilization)
            .then(b.link.cmp(&a.link))
    });
    if let Some(l) = busiest {
        let _ = writeln!(
            out,
            "highest utilization: {} ({:.6})",
            l.link, l.utilization
        );
    }
    let _ = writeln!(out, "capacity violations: {}", p.violations.len());
    for v in &p.violations {
        let _ = writeln!(
            out,
            "  {} burst {:.3} bit/s > limit {:.3} bit/s",
            v.link,
            v.burst_bps.to_f64(),
            v.limit_bps
        );
    }
    let _ = writeln!(out, "reinforcement proposals: {}", p.proposals.len());
    for pr in &p.proposals {
        let _ = writeln!(
            out,
            "  add {} ({:.3} km) relieving {} by {:.3} bit/s",
            pr.candidate,
            pr.distance_km,
            pr.violated_link,
            pr.load_reduction_bps.to_f64()
        );
    }
    for n in &p.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn planning_csv(p: &PlanningReport) -> String {
    let mut out = String::from("link,mean_bps,burst_bps,mean_a_to_b,mean_b_to_a,utilization\n");
    for l in &p.loads {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            l.link, l.mean_bps, l.burst_bps, l.mean_a_to_b, l.mean_b_to_a, l.utilization
        );
    }
    out
}

fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, PipelineError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| PipelineError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn record(
    report: &mut PipelineReport,
    stage: &str,
    start: Instant,
    model: Option<&InfrastructureModel>,
) {
    let (nodes, edges) = model.map_or((0, 0), |m| (m.graph.nodes.len(), m.graph.edges.len()));
    report.stages.push(StageRecord {
        stage: stage.to_string(),
        millis: start.elapsed().as_secs_f64() * 1e3,
        nodes,
        edges,
    });
}

/// In-memory run over parsed inputs, recording each stage into `report`.
pub fn run_stages(
    grid: &PowerGridModel,
    bp: &Blueprint,
    opts: &PipelineOptions,
    report: &mut PipelineReport,
) -> Result<InfrastructureModel, PipelineError> {
    with_pool(opts.jobs, || {
        let t = Instant::now();
        let mut model = InfrastructureModel::build(grid, bp)?;
        record(report, "modeling", t, Some(&model));
        if opts.stage >= Stage::Configuration {
            let t = Instant::now();
            model.configure(bp, bp.route_metric)?;
            record(report, "configuration", t, Some(&model));
        }
        if opts.stage >= Stage::Analytics {
            let t = Instant::now();
            model.analyze(bp)?;
            record(report, "analytics", t, Some(&model));
        }
        report.warnings.extend(model.notes.iter().cloned());
        if let Some(p) = &model.planning {
            report.warnings.extend(p.notes.iter().cloned());
            report.warnings.extend(
                p.violations
                    .iter()
                    .map(|v| format!("capacity violation on {}", v.link)),
            );
        }
        Ok(model)
    })?
}

/// Reads inputs, runs all stages up to `opts.stage` and writes the exports
/// plus `report.json` into `out_dir`.
pub fn run_pipeline(
    grid_path: &Path,
    blueprint_path: &Path,
    out_dir: &Path,
    opts: &PipelineOptions,
) -> Result<(InfrastructureModel, PipelineReport), PipelineFailure> {
    let mut report = PipelineReport {
        grid: grid_path.display().to_string(),
        blueprint: blueprint_path.display().to_string(),
        ..Default::default()
    };
    match run_inner(grid_path, blueprint_path, out_dir, opts, &mut report) {
        Ok(model) => Ok((model, report)),
        Err(error) => {
            report.error = Some(format!("{}: {error}", error.stage_name()));
            if fs::create_dir_all(out_dir).is_ok() {
                let _ = fs::write(out_dir.join("report.json"), report.to_json());
            }
            Err(PipelineFailure {
                report: Box::new(report),
                error,
            })
        }
    }
}

fn run_inner(
    grid_path: &Path,
    blueprint_path: &Path,
    out_dir: &Path,
    opts: &PipelineOptions,
    report: &mut PipelineReport,
) -> Result<InfrastructureModel, PipelineError> {
    let t = Instant::now();
    let grid = load_grid(grid_path)?;
    let mut bp = load_blueprint(blueprint_path)?;
    apply_overrides(&mut bp, opts);
    record(report, "inputs", t, None);

    let model = run_stages(&grid, &bp, opts, report)?;

    let t = Instant::now();
    let files = render_outputs(&model)?;
    fs::create_dir_all(out_dir).map_err(|source| PipelineError::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;
    for (name, body) in &files {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|source| PipelineError::Write { path, source })?;
        report.outputs.push(name.clone());
    }
    report.outputs.push("report.json".into());
    record(report, "export", t, Some(&model));
    let path = out_dir.join("report.json");
    fs::write(&path, report.to_json()).map_err(|source| PipelineError::Write { path, source })?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub grid: String,
    pub repetitions: usize,
    pub mean_ms: f64,
    /// Population standard deviation; zero for a single repetition.
    pub std_ms: f64,
    pub nodes: usize,
    /// Whether the node count was identical in every repetition.
    pub stable: bool,
}

/// Mean and spread of the full in-memory pipeline, including export
/// rendering, over `repetitions` runs per grid.
pub fn benchmark(
    grids: &[(String, PowerGridModel)],
    bp: &Blueprint,
    repetitions: usize,
    opts: &PipelineOptions,
) -> Result<Vec<BenchmarkRow>, PipelineError> {
    let mut rows = Vec::new();
    for (name, grid) in grids {
        let mut times = Vec::with_capacity(repetitions);
        let mut counts = Vec::with_capacity(repetitions);
        for _ in 0..repetitions.max(1) {
            let t = Instant::now();
            let mut scratch = PipelineReport::default();
            let model = run_stages(grid, bp, opts, &mut scratch)?;
            render_outputs(&model)?;
            times.push(t.elapsed().as_secs_f64() * 1e3);
            counts.push(model.graph.nodes.len());
        }
        let n = times.len() as f64;
        let mean = times.iter().sum::<f64>() / n;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
        rows.push(BenchmarkRow {
            grid: name.clone(),
            repetitions: times.len(),
            mean_ms: mean,
            std_ms: var.sqrt(),
            nodes: counts[0],
            stable: counts.iter().all(|&c| c == counts[0]),
        });
    }
    Ok(rows)
}

pub fn benchmark_table(rows: &[BenchmarkRow]) -> String {
    let mut out = format!(
        "{:<24} {:>5} {:>12} {:>12} {:>7}\n",
        "grid", "reps", "mean_ms", "std_ms", "nodes"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<24} {:>5} {:>12.3} {:>12.3} {:>7}",
            r.grid, r.repetitions, r.mean_ms, r.std_ms, r.nodes
        );
    }
    out
}
