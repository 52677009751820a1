mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sgim::blueprint::{default_blueprint, DeviceKind, InterfaceRule, WanParadigm, Zone};
use sgim::grid_io::{fixtures, Point};
use sgim::topology::*;

fn with_paradigm(p: WanParadigm) -> sgim::Blueprint {
    let mut bp = default_blueprint();
    bp.wan.paradigm = p;
    bp
}

#[test]
fn golden_node_counts() {
    let bp = default_blueprint();
    let cases = [
        (fixtures::grid_4bus(), 38, 5),
        (fixtures::grid_12bus(), 124, 13),
        (fixtures::grid_cigre_mv(), 195, 16),
    ];
    for (grid, nodes, stations) in cases {
        let t = build_topology(&grid, &bp).unwrap();
        assert_eq!(t.graph.nodes.len(), nodes, "{}", grid.name);
        assert_eq!(t.stations.len(), stations, "{}", grid.name);
    }
}

#[test]
fn twelve_bus_grid_gets_one_rtu_per_station() {
    let t = build_topology(&fixtures::grid_12bus(), &default_blueprint()).unwrap();
    assert_eq!(t.graph.devices_of(DeviceKind::Rtu).count(), 12);
    assert_eq!(t.graph.devices_of(DeviceKind::ScadaHost).count(), 1);
}

#[test]
fn four_bus_layout() {
    let t = build_topology(&fixtures::grid_4bus(), &default_blueprint()).unwrap();
    let ids: Vec<&str> = t.stations.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["control_center", "st_b0", "st_b1", "st_b2", "st_b3"]);
    let b0 = &t.stations[1];
    assert!(b0.primary_members.contains("transformer/t1"));
    assert_eq!(b0.class, "primary_substation");
    let b2 = &t.stations[3];
    assert_eq!(
        b2.feeders,
        vec![Feeder {
            branch: "l2_3".into(),
            bus: "b2".into()
        }]
    );
    let g = &t.graph;
    assert!(g.node("st_b2/ied_protection_switch_s1").is_some());
    assert!(g.node("st_b3/ied_control_generator_g3").is_some());
    let pi = &g.edges["pi/st_b1/ied_measurement_branch_l1_2"];
    assert_eq!(pi.b, "bus/b1");
    assert!(g.edges.contains_key("pl/st_b0/router--st_b1/router"));
    assert!(g
        .edges
        .contains_key("pl/control_center/router--st_b0/router"));
    assert_eq!(g.count_edges(EdgeKind::LogicalConnection), 17);
}

#[test]
fn every_field_device_has_one_process_interface() {
    for grid in [
        fixtures::grid_4bus(),
        fixtures::grid_12bus(),
        fixtures::grid_cigre_mv(),
    ] {
        let t = build_topology(&grid, &default_blueprint()).unwrap();
        let mut pis: BTreeMap<&str, usize> = BTreeMap::new();
        for e in t.graph.edges_of_kind(EdgeKind::ProcessInterface) {
            *pis.entry(e.a.as_str()).or_default() += 1;
            assert!(!t.graph.nodes[&e.b].kind.is_device());
        }
        for n in t.graph.devices() {
            let expected = usize::from(n.zone == Zone::Field);
            assert_eq!(
                pis.get(n.id.as_str()).copied().unwrap_or(0),
                expected,
                "{}",
                n.id
            );
        }
    }
}

#[test]
fn closed_coupler_merges_buses_open_does_not() {
    let mut grid = fixtures::grid_4bus();
    grid.switches.push(sgim::grid_io::Switch {
        id: "c1".into(),
        bus: "b2".into(),
        element: "b3".into(),
        et: sgim::grid_io::SwitchTarget::Bus,
        closed: true,
    });
    grid.normalize();
    let t = build_topology(&grid, &default_blueprint()).unwrap();
    let st = t.stations.iter().find(|s| s.id == "st_b2").unwrap();
    assert_eq!(
        st.bus_group,
        BTreeSet::from(["b2".to_string(), "b3".to_string()])
    );
    assert!(!t.stations.iter().any(|s| s.id == "st_b3"));

    grid.switches
        .iter_mut()
        .find(|s| s.id == "c1")
        .unwrap()
        .closed = false;
    let t = build_topology(&grid, &default_blueprint()).unwrap();
    assert!(t.stations.iter().any(|s| s.id == "st_b3"));
}

#[test]
fn plc_without_an_electrical_path_is_disconnected() {
    let mut grid = fixtures::grid_4bus();
    grid.switches[0].closed = false;
    let err = build_topology(&grid, &with_paradigm(WanParadigm::Plc)).unwrap_err();
    match err {
        TopologyError::Disconnected(st) => assert_eq!(st, vec!["st_b3".to_string()]),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn fixed_interface_count_is_enforced() {
    let mut bp = default_blueprint();
    let sw = bp
        .device_templates
        .iter_mut()
        .find(|t| t.kind == DeviceKind::Switch)
        .unwrap();
    sw.interfaces = InterfaceRule::Fixed(2);
    let err = build_topology(&fixtures::grid_4bus(), &bp).unwrap_err();
    assert!(
        matches!(err, TopologyError::InterfaceLimit { allowed: 2, .. }),
        "{err}"
    );
}

#[test]
fn paradigms_differ_only_in_the_wan() {
    let grid = fixtures::grid_12bus();
    let lan_of = |p| {
        let t = build_topology(&grid, &with_paradigm(p)).unwrap();
        t.graph
            .nodes
            .values()
            .filter(|n| {
                !matches!(
                    n.kind.device(),
                    Some(DeviceKind::Router | DeviceKind::Modem | DeviceKind::BaseStation)
                )
            })
            .filter(|n| !n.id.starts_with("wan/"))
            .map(|n| n.id.clone())
            .collect::<BTreeSet<_>>()
    };
    assert_eq!(lan_of(WanParadigm::Fiber), lan_of(WanParadigm::Plc));
    assert_eq!(lan_of(WanParadigm::Fiber), lan_of(WanParadigm::Mobile));
}

#[test]
fn mobile_wan_reaches_core_through_base_stations() {
    let t = build_topology(&fixtures::grid_12bus(), &with_paradigm(WanParadigm::Mobile)).unwrap();
    let g = &t.graph;
    let bs: Vec<&Node> = g.devices_of(DeviceKind::BaseStation).collect();
    let field = t.stations.iter().filter(|s| !s.is_control_center()).count();
    assert_eq!(
        bs.len(),
        field.div_ceil(default_blueprint().wan.mobile.cell_size)
    );
    let core = g.node("wan/core").expect("core node");
    for b in &bs {
        assert!(g.link_between(&b.id, &core.id).is_some());
    }
}

#[test]
fn build_is_independent_of_thread_count() {
    let grid = fixtures::grid_cigre_mv();
    let bp = default_blueprint();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| build_topology(&grid, &bp).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.graph, four.graph);
    assert_eq!(one.stations, four.stations);
}

fn nearest_cell(cells: &[sgim::topology::Cell], p: Point) -> usize {
    let mut best = 0;
    for (k, c) in cells.iter().enumerate() {
        if p.distance(&c.position) < p.distance(&cells[best].position) {
            best = k;
        }
    }
    best
}

proptest! {
    #[test]
    fn mobile_cells_partition_points(
        xy in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..15),
        cell_size in 1usize..6,
    ) {
        let points: Vec<(String, Point)> = xy
            .iter()
            .enumerate()
            .map(|(i, (x, y))| (format!("p{i:02}"), Point::new(*x, *y)))
            .collect();
        let cells = mobile_cells(&points, cell_size);
        prop_assert_eq!(cells.len(), points.len().div_ceil(cell_size));
        let mut seen = BTreeSet::new();
        for (k, c) in cells.iter().enumerate() {
            for m in &c.members {
                prop_assert!(seen.insert(m.clone()));
                let p = points.iter().find(|(id, _)| id == m).unwrap().1;
                prop_assert_eq!(nearest_cell(&cells, p), k);
            }
        }
        prop_assert_eq!(seen.len(), points.len());
    }

    #[test]
    fn random_grids_build_connected_graphs(grid in common::arb_grid(8), p in 0usize..3) {
        let paradigm = [WanParadigm::Fiber, WanParadigm::Plc, WanParadigm::Mobile][p];
        let t = build_topology(&grid, &with_paradigm(paradigm)).unwrap();
        let g = &t.graph;
        let scada = g.devices_of(DeviceKind::ScadaHost).next().unwrap();
        let reach = g.reachable(&scada.id, EdgeKind::PhysicalLink);
        for n in g.devices() {
            prop_assert!(reach.contains(&n.id), "{} unreachable", n.id);
        }
        for e in g.edges_of_kind(EdgeKind::PhysicalLink) {
            prop_assert!(g.nodes[&e.a].kind.is_device() && g.nodes[&e.b].kind.is_device());
            prop_assert!(e.a < e.b);
        }
        let rtus = g.devices_of(DeviceKind::Rtu).count();
        let field = t.stations.iter().filter(|s| !s.is_control_center()).count();
        prop_assert_eq!(rtus, field);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn fiber_wan_is_a_minimum_spanning_tree(grid in common::arb_grid(7)) {
        let (built, oracle) = common::checks::fiber_weight_and_oracle(&grid);
        prop_assert!((built - oracle).abs() <= 1e-9 * oracle.max(1.0), "{built} vs {oracle}");
    }
}
