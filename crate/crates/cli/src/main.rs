use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgim::blueprint::{RouteMetric, WanParadigm};
use sgim::export::{
    export_graph, export_network_config, export_whitelist, load_model, save_model, ExportError,
    GraphFormat, WhitelistFormat,
};
use sgim::grid_io::{read_grid_document, validate_grid, PowerGridModel};
use sgim::pipeline::{
    apply_overrides, benchmark, benchmark_table, load_blueprint, load_grid, planning_text,
    resolve_input, run_pipeline, PipelineError, PipelineOptions,
};
use sgim::Stage;

/// Smart-grid ICT/OT infrastructure model generator.
#[derive(Parser)]
#[command(name = "sgim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, configure and analyze a model and write all exports.
    Generate(RunArgs),
    /// Check a grid (and optionally a blueprint) without building anything.
    Validate {
        grid: PathBuf,
        blueprint: Option<PathBuf>,
    },
    /// Run through analytics and print the planning report.
    Plan(RunArgs),
    /// Convert a saved model document into one export format.
    Export {
        model: PathBuf,
        /// dot, graphml, netconfig, csv, rules or model.
        #[arg(long, default_value = "netconfig")]
        format: String,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the full pipeline over several grids.
    Benchmark {
        #[arg(required = true)]
        grids: Vec<PathBuf>,
        #[arg(long, short)]
        blueprint: PathBuf,
        #[arg(long, short, default_value_t = 10)]
        repetitions: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    grid: PathBuf,
    blueprint: PathBuf,
    #[arg(short, long, env = "SGIM_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Last stage to run: modeling, configuration or analytics.
    #[arg(long, default_value = "analytics")]
    stage: Stage,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// WAN paradigm overriding the blueprint: fiber, plc or mobile.
    #[arg(long)]
    paradigm: Option<WanParadigm>,
    /// Route metric overriding the blueprint: latency, hops or inverse_bandwidth.
    #[arg(long)]
    route_metric: Option<RouteMetric>,
    /// Reserved; the pipeline is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, short)]
    jobs: Option<usize>,
}

impl CommonArgs {
    fn options(&self, stage: Stage) -> PipelineOptions {
        PipelineOptions {
            paradigm: self.paradigm,
            route_metric: self.route_metric,
            stage,
            jobs: self.jobs,
        }
    }
}

enum Failure {
    Stage(String),
    Usage(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_io() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Stage(format!("{} failed: {e}", e.stage_name()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Stage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate(args) => generate(&args, args.stage).map(|_| ()),
        Command::Plan(args) => {
            let stage = args.stage.max(Stage::Analytics);
            let model = generate(&args, stage)?;
            if let Some(p) = &model.planning {
                print!("{}", planning_text(p));
            }
            Ok(())
        }
        Command::Validate { grid, blueprint } => validate(&grid, blueprint.as_deref()),
        Command::Export {
            model,
            format,
            output,
        } => export(&model, &format, output.as_deref()),
        Command::Benchmark {
            grids,
            blueprint,
            repetitions,
            common,
        } => {
            let mut bp = load_blueprint(&blueprint)?;
            let opts = common.options(Stage::Analytics);
            apply_overrides(&mut bp, &opts);
            let loaded = grids
                .iter()
                .map(|p| Ok((display_name(p), load_grid(p)?)))
                .collect::<Result<Vec<(String, PowerGridModel)>, PipelineError>>()?;
            let rows = benchmark(&loaded, &bp, repetitions, &opts)?;
            print!("{}", benchmark_table(&rows));
            Ok(())
        }
    }
}

fn display_name(p: &Path) -> String {
    p.file_stem().map_or_else(
        || p.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn generate(args: &RunArgs, stage: Stage) -> Result<sgim::InfrastructureModel, Failure> {
    let opts = args.common.options(stage);
    match run_pipeline(&args.grid, &args.blueprint, &args.out_dir, &opts) {
        Ok((model, report)) => {
            print!("{report}");
            Ok(model)
        }
        Err(failure) => {
            eprint!("{}", failure.report);
            Err(failure.error.into())
        }
    }
}

fn validate(grid: &Path, blueprint: Option<&Path>) -> Result<(), Failure> {
    let path = resolve_input(grid, "json");
    let raw = fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed: PowerGridModel = read_grid_document(&raw)
        .map_err(|e| Failure::Stage(format!("inputs: {}: {e}", path.display())))?;
    let findings = validate_grid(&parsed);
    for f in &findings {
        println!("{}: {f}", path.display());
    }
    let mut ok = findings.is_empty();
    if let Some(bp) = blueprint {
        match load_blueprint(bp) {
            Ok(_) => {}
            Err(e) if e.is_io() => return Err(e.into()),
            Err(e) => {
                println!("{e}");
                ok = false;
            }
        }
    }
    if ok {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::Stage("inputs: validation failed".into()))
    }
}

fn export(model_path: &Path, format: &str, output: Option<&Path>) -> Result<(), Failure> {
    let raw = fs::read_to_string(model_path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", model_path.display())))?;
    let stage_err = |e: ExportError| Failure::Stage(format!("export: {e}"));
    let model = load_model(&raw).map_err(stage_err)?;
    let body = match format {
        "netconfig" => export_network_config(&model).map_err(stage_err)?,
        "model" => save_model(&model),
        other => {
            if let Ok(g) = other.parse::<GraphFormat>() {
                export_graph(&model, g)
            } else {
                let w: WhitelistFormat = other
                    .parse()
                    .map_err(|_| Failure::Usage(format!("unknown export format {other:?}")))?;
                let rules = model
                    .network
                    .as_ref()
                    .map(|n| n.whitelist.as_slice())
                    .ok_or_else(|| {
                        stage_err(ExportError::Incomplete(vec![Stage::Configuration]))
                    })?;
                export_whitelist(rules, w)
            }
        }
    };
    match output {
        Some(path) => fs::write(path, body)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}
