//! Whole-model assertions shared by the integration and acceptance tests.

use std::collections::{BTreeMap, BTreeSet};

use sgim::blueprint::{default_blueprint, RouteMetric, WanParadigm};
use sgim::datapoint::{DataPoint, DataPointMap, PointIdentity};
use sgim::net_config::simulate_forwarding;
use sgim::topology::{EdgeKind, Station};
use sgim::{InfrastructureModel, PowerGridModel, Stage};

use super::oracles::{bellman_ford, descendants, exhaustive_mst_weight, metric_weight};

pub const PARADIGMS: [WanParadigm; 3] = [WanParadigm::Fiber, WanParadigm::Plc, WanParadigm::Mobile];
pub const METRICS: [RouteMetric; 3] = [
    RouteMetric::Latency,
    RouteMetric::Hops,
    RouteMetric::InverseBandwidth,
];

pub fn fixture_grids() -> [PowerGridModel; 3] {
    [
        sgim::grid_io::fixtures::grid_4bus(),
        sgim::grid_io::fixtures::grid_12bus(),
        sgim::grid_io::fixtures::grid_cigre_mv(),
    ]
}

pub fn configured(
    grid: &PowerGridModel,
    paradigm: WanParadigm,
    metric: RouteMetric,
) -> InfrastructureModel {
    let mut bp = default_blueprint();
    bp.wan.paradigm = paradigm;
    InfrastructureModel::generate(grid, &bp, metric, Stage::Configuration).unwrap()
}

/// Delivers every logical connection in both directions and compares the
/// taken path with an exhaustive shortest-path computation.
pub fn check_forwarding(m: &InfrastructureModel, metric: RouteMetric) {
    let net = m.network.as_ref().unwrap();
    let g = &m.graph;
    for cp in &net.paths {
        for (src, dst, computed) in [
            (&cp.master, &cp.slave, &cp.forward),
            (&cp.slave, &cp.master, &cp.reverse),
        ] {
            let last = computed.links.last().unwrap();
            let addr = net.interface_on_link(dst, last).unwrap().ip().unwrap();
            let taken = simulate_forwarding(g, &net.interfaces, &net.routing, metric, src, addr)
                .unwrap_or_else(|e| panic!("{}: {e}", cp.connection));
            assert_eq!(&taken, computed, "{}", cp.connection);
            let unique: BTreeSet<&String> = taken.nodes.iter().collect();
            assert_eq!(unique.len(), taken.nodes.len(), "loop on {}", cp.connection);
            let weight: u64 = taken
                .links
                .iter()
                .map(|l| metric_weight(g, l, metric))
                .sum();
            let best = bellman_ford(g, src, metric)[dst.as_str()];
            assert_eq!(weight, best, "{}", cp.connection);
            assert_eq!(taken.weight, best);
        }
    }
}

/// Unique addresses and MACs, each address inside its subnet, both ends
/// of every link in one subnet and disjoint prefixes inside the pool.
pub fn check_addressing(m: &InfrastructureModel) {
    let net = m.network.as_ref().unwrap();
    let g = &m.graph;
    let mut seen_ip = BTreeSet::new();
    let mut seen_mac = BTreeSet::new();
    for i in net.interfaces.values() {
        let a = i.address.expect("every interface addressed");
        assert!(seen_ip.insert(a.addr()), "duplicate {a}");
        assert!(seen_mac.insert(i.mac.clone()), "duplicate {}", i.mac);
        let sn = net
            .subnets
            .iter()
            .find(|s| Some(&s.id) == i.subnet.as_ref())
            .unwrap();
        assert!(sn.prefix.unwrap().contains(&a.addr()));
        assert!(sn.members.contains(&i.id));
    }
    for e in g.edges_of_kind(EdgeKind::PhysicalLink) {
        let ia = net.interface_on_link(&e.a, &e.id).unwrap();
        let ib = net.interface_on_link(&e.b, &e.id).unwrap();
        assert_eq!(ia.subnet, ib.subnet, "{}", e.id);
    }
    let prefixes: Vec<_> = net.subnets.iter().map(|s| s.prefix.unwrap()).collect();
    for (i, a) in prefixes.iter().enumerate() {
        assert!(default_blueprint().address_pool.contains(a));
        for b in &prefixes[i + 1..] {
            assert!(!a.contains(b) && !b.contains(a));
        }
    }
}

/// Every master holds exactly the points of the field devices below it,
/// and addresses are unique at every device.
pub fn check_union(g: &sgim::topology::InfrastructureGraph, map: &DataPointMap) {
    let field: BTreeSet<String> = g
        .devices()
        .filter(|n| {
            g.edges_of_kind(EdgeKind::ProcessInterface)
                .any(|e| e.a == n.id)
        })
        .map(|n| n.id.clone())
        .collect();
    for master in g
        .logical_connections()
        .map(|e| e.a.clone())
        .collect::<BTreeSet<_>>()
    {
        let mut expected: BTreeSet<PointIdentity> = BTreeSet::new();
        for d in descendants(g, &master) {
            if field.contains(&d) {
                expected.extend(map.points(&d).iter().map(DataPoint::identity));
            }
        }
        let held: Vec<PointIdentity> = map
            .points(&master)
            .iter()
            .map(DataPoint::identity)
            .collect();
        let held_set: BTreeSet<PointIdentity> = held.iter().cloned().collect();
        assert_eq!(held.len(), held_set.len(), "{master} holds duplicates");
        assert_eq!(held_set, expected, "{master}");
    }
    for (device, pts) in &map.devices {
        let addrs: BTreeSet<(u32, u32)> = pts.iter().map(DataPoint::address).collect();
        assert_eq!(addrs.len(), pts.len(), "{device}");
    }
}

/// Total length of the built fiber WAN and of the exhaustive optimum.
pub fn fiber_weight_and_oracle(grid: &PowerGridModel) -> (f64, f64) {
    let mut bp = default_blueprint();
    bp.wan.paradigm = WanParadigm::Fiber;
    let t = sgim::topology::build_topology(grid, &bp).unwrap();
    let field: Vec<&Station> = t
        .stations
        .iter()
        .filter(|s| !s.is_control_center() && s.gateway.is_some())
        .collect();
    let gateways: BTreeSet<&str> = field.iter().filter_map(|s| s.gateway.as_deref()).collect();
    let built: f64 = t
        .graph
        .edges_of_kind(EdgeKind::PhysicalLink)
        .filter(|e| e.link_class.as_deref() == Some(bp.wan.fiber.link_class.as_str()))
        .filter(|e| gateways.contains(e.a.as_str()) && gateways.contains(e.b.as_str()))
        .map(|e| e.distance_km.unwrap())
        .sum();
    let mut edges = Vec::new();
    for i in 0..field.len() {
        for j in i + 1..field.len() {
            edges.push((i, j, field[i].coordinates.distance(&field[j].coordinates)));
        }
    }
    let oracle = exhaustive_mst_weight(field.len(), &edges).unwrap();
    (built, oracle)
}

/// The whitelist's (src, dst, port) set against the logical connections.
pub fn check_whitelist(m: &InfrastructureModel) {
    let net = m.network.as_ref().unwrap();
    let bp = default_blueprint();
    let addr_of = |node: &str| -> BTreeSet<std::net::Ipv4Addr> {
        net.interfaces_of(node).filter_map(|i| i.ip()).collect()
    };
    let rules: BTreeSet<_> = net
        .whitelist
        .iter()
        .map(|r| (r.src, r.dst, r.port))
        .collect();
    let mut expected = BTreeSet::new();
    for lc in m.graph.logical_connections() {
        let port = bp.protocol(lc.protocol.as_deref().unwrap()).unwrap().port as u16;
        let (src, dst) = (addr_of(&lc.a), addr_of(&lc.b));
        assert_eq!((src.len(), dst.len()), (1, 1), "{}", lc.id);
        expected.insert((*src.first().unwrap(), *dst.first().unwrap(), port));
    }
    assert_eq!(rules, expected);
    assert_eq!(
        net.whitelist.len(),
        m.graph.count_edges(EdgeKind::LogicalConnection)
    );
}

/// Per-link loads for an arbitrary subset of a configured model's flows,
/// recomputed by summing over every (flow, link) pair.
pub fn check_load_sums(m: &InfrastructureModel, pick: &[usize]) {
    use num_rational::Ratio;
    use sgim::planning::{accumulate_link_loads, estimate_device_traffic};

    let net = m.network.as_ref().unwrap();
    let points = m.datapoints.as_ref().unwrap();
    let mut all = Vec::new();
    let mut paths = BTreeMap::new();
    for cp in &net.paths {
        all.push(estimate_device_traffic(
            &cp.connection,
            points.points(&cp.slave),
            1.0,
            10,
            0.1,
        ));
        paths.insert(cp.connection.clone(), cp.reverse.clone());
    }
    let chosen: BTreeSet<usize> = pick.iter().map(|k| k % all.len()).collect();
    let flows: Vec<_> = chosen.iter().map(|&k| all[k].clone()).collect();
    assert!(flows.len() <= 20);
    let loads = accumulate_link_loads(&m.graph, &flows, &paths).unwrap();
    assert_eq!(loads.len(), m.graph.count_edges(EdgeKind::PhysicalLink));
    for l in &loads {
        let mut mean = Ratio::from_integer(0i128);
        let mut burst = Ratio::from_integer(0i128);
        for f in &flows {
            for hop in &paths[&f.connection].links {
                if *hop == l.link {
                    mean += f.mean_bps.0;
                    burst += f.burst_bps.0;
                }
            }
        }
        assert_eq!(l.mean_bps.0, mean, "{}", l.link);
        assert_eq!(l.burst_bps.0, burst, "{}", l.link);
        assert_eq!(
            (l.mean_a_to_b + l.mean_b_to_a).0,
            l.mean_bps.0,
            "{}",
            l.link
        );
    }
}
