use std::fs;
use std::path::PathBuf;

use sgim::blueprint::{default_blueprint, WanParadigm};
use sgim::export::load_model;
use sgim::grid_io::fixtures;
use sgim::pipeline::*;
use sgim::Stage;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn listing(dir: &std::path::Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn full_run_writes_every_artifact() {
    let out = tempfile::tempdir().unwrap();
    let (model, report) = run_pipeline(
        &fixture("grid_cigre_mv"),
        &fixture("blueprint_default"),
        out.path(),
        &PipelineOptions::default(),
    )
    .unwrap();
    assert_eq!(
        listing(out.path()),
        [
            "graph.dot",
            "graph.graphml",
            "model.json",
            "netconfig.json",
            "planning.csv",
            "planning.txt",
            "report.json",
            "whitelist.csv",
            "whitelist.rules",
        ]
    );
    let stages: Vec<&str> = report.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(
        stages,
        ["inputs", "modeling", "configuration", "analytics", "export"]
    );
    let last = report.stages.last().unwrap();
    assert_eq!(
        (last.nodes, last.edges),
        (model.graph.nodes.len(), model.graph.edges.len())
    );
    assert_eq!(last.nodes, 195);

    let saved = load_model(&fs::read_to_string(out.path().join("model.json")).unwrap()).unwrap();
    assert_eq!(saved, model);
    let on_disk: PipelineReport =
        serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(on_disk, report);
    assert!(on_disk.error.is_none());
}

#[test]
fn counts_never_decrease_through_the_stages() {
    for grid in [
        fixtures::grid_4bus(),
        fixtures::grid_12bus(),
        fixtures::grid_cigre_mv(),
    ] {
        let mut report = PipelineReport::default();
        run_stages(
            &grid,
            &default_blueprint(),
            &PipelineOptions::default(),
            &mut report,
        )
        .unwrap();
        for w in report.stages.windows(2) {
            assert!(
                w[0].nodes <= w[1].nodes && w[0].edges <= w[1].edges,
                "{}",
                grid.name
            );
        }
    }
}

#[test]
fn modeling_stage_writes_only_graphs() {
    let out = tempfile::tempdir().unwrap();
    let opts = PipelineOptions {
        stage: Stage::Modeling,
        ..Default::default()
    };
    let (model, _) = run_pipeline(
        &fixture("grid_4bus"),
        &fixture("blueprint_default"),
        out.path(),
        &opts,
    )
    .unwrap();
    assert!(model.network.is_none());
    assert_eq!(
        listing(out.path()),
        ["graph.dot", "graph.graphml", "report.json"]
    );
    let dot = fs::read_to_string(out.path().join("graph.dot")).unwrap();
    assert!(!dot.contains("10."));
}

#[test]
fn missing_grid_names_the_path() {
    let out = tempfile::tempdir().unwrap();
    let err = run_pipeline(
        &fixture("no_such_grid"),
        &fixture("blueprint_default"),
        out.path(),
        &PipelineOptions::default(),
    )
    .unwrap_err();
    assert!(err.error.is_io());
    assert_eq!(err.error.stage_name(), "inputs");
    assert!(err.to_string().contains("no_such_grid"), "{err}");
}

#[test]
fn stage_failure_keeps_a_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("grid_4bus.json")).unwrap();
    let grid = dir.path().join("open_feeder.json");
    fs::write(&grid, text.replace("\"closed\": true", "\"closed\": false")).unwrap();
    let out = dir.path().join("out");
    let opts = PipelineOptions {
        paradigm: Some(WanParadigm::Plc),
        ..Default::default()
    };
    let err = run_pipeline(&grid, &fixture("blueprint_default"), &out, &opts).unwrap_err();
    assert!(!err.error.is_io(), "{err}");
    assert_eq!(err.error.stage_name(), "modeling", "{err}");
    let stages: Vec<&str> = err.report.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(stages, ["inputs"]);
    let on_disk: PipelineReport =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(on_disk.error.unwrap().starts_with("modeling:"));
}

#[test]
fn paradigm_override_reaches_the_model() {
    let out = tempfile::tempdir().unwrap();
    let opts = PipelineOptions {
        paradigm: Some(WanParadigm::Plc),
        stage: Stage::Modeling,
        ..Default::default()
    };
    let (model, _) = run_pipeline(
        &fixture("grid_4bus"),
        &fixture("blueprint_default"),
        out.path(),
        &opts,
    )
    .unwrap();
    assert!(model
        .graph
        .edges
        .keys()
        .any(|id| model.graph.edges[id].link_class.as_deref() == Some("plc_bb")));
}

#[test]
fn benchmark_reports_mean_spread_and_counts() {
    let grids = vec![
        ("grid_4bus".to_string(), fixtures::grid_4bus()),
        ("grid_12bus".to_string(), fixtures::grid_12bus()),
    ];
    let rows = benchmark(&grids, &default_blueprint(), 1, &PipelineOptions::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.nodes).collect::<Vec<_>>(), [38, 124]);
    assert!(rows
        .iter()
        .all(|r| r.std_ms == 0.0 && r.repetitions == 1 && r.stable));

    let rows = benchmark(
        &grids[..1],
        &default_blueprint(),
        4,
        &PipelineOptions::default(),
    )
    .unwrap();
    assert_eq!(rows[0].repetitions, 4);
    assert!(rows[0].stable && rows[0].mean_ms > 0.0);
    let table = benchmark_table(&rows);
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn job_count_does_not_change_outputs() {
    let grid = fixtures::grid_cigre_mv();
    let run = |jobs| {
        let opts = PipelineOptions {
            jobs: Some(jobs),
            ..Default::default()
        };
        let model = run_stages(
            &grid,
            &default_blueprint(),
            &opts,
            &mut PipelineReport::default(),
        )
        .unwrap();
        render_outputs(&model).unwrap()
    };
    assert_eq!(run(1), run(4));
}
