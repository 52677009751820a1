use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::builder::{lan_switch_id, station_class, station_zone};
use super::graph::{Edge, EdgeKind, InfrastructureGraph, Node};
use super::mst::{minimum_spanning_tree, WeightedEdge};
use super::{Station, TopologyError};
use crate::blueprint::{
    Blueprint, DeviceKind, FiberCandidates, InterfaceRule, Placement, WanParadigm, Zone,
};
use crate::grid_io::{Point, PowerGridModel};

/// One mobile radio cell: a base station placed at a seed station and the
/// stations whose modems it serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub base_station: String,
    pub seed: String,
    pub position: Point,
    pub members: Vec<String>,
}

/// Partitions `points` into `ceil(n / cell_size)` cells.
///
/// Seeds are picked farthest-point first, starting from the smallest id;
/// distance ties go to the smaller id. Base stations are numbered by seed
/// id and every point joins its nearest base station, ties to the lower
/// number.
pub fn mobile_cells(points: &[(String, Point)], cell_size: usize) -> Vec<Cell> {
    let mut pts: Vec<&(String, Point)> = points.iter().collect();
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    if pts.is_empty() {
        return Vec::new();
    }
    let count = pts.len().div_ceil(cell_size.max(1));
    let mut seeds: Vec<usize> = vec![0];
    while seeds.len() < count {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, p)) in pts.iter().enumerate() {
            if seeds.contains(&i) {
                continue;
            }
            let d = seeds
                .iter()
                .map(|&s| p.distance(&pts[s].1))
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        seeds.push(best.expect("fewer seeds than points").0);
    }
    seeds.sort();
    let mut cells: Vec<Cell> = seeds
        .iter()
        .enumerate()
        .map(|(k, &s)| Cell {
            base_station: format!("wan/base_station_{}", k + 1),
            seed: pts[s].0.clone(),
            position: pts[s].1,
            members: Vec::new(),
        })
        .collect();
    for (id, p) in &pts {
        let mut best = 0;
        for k in 1..cells.len() {
            if p.distance(&cells[k].position) < p.distance(&cells[best].position) {
                best = k;
            }
        }
        cells[best].members.push(id.clone());
    }
    cells
}

fn wan_node(id: &str, template: &str, bp: &Blueprint) -> Result<Node, TopologyError> {
    let kind = bp
        .device_template(template)
        .ok_or_else(|| TopologyError::UnknownTemplate(template.to_string()))?
        .kind;
    Ok(Node::device(
        id.to_string(),
        kind,
        Zone::Station,
        None,
        template,
    ))
}

fn station_link(a: &Station, b: &Station, class: &str) -> Edge {
    let mut e = Edge::physical(
        a.gateway.as_deref().expect("gateway placed"),
        b.gateway.as_deref().expect("gateway placed"),
        class,
    );
    e.distance_km = Some(a.coordinates.distance(&b.coordinates));
    e
}

fn add_link(g: &mut InfrastructureGraph, e: Edge) -> Result<(), TopologyError> {
    if g.edges.contains_key(&e.id) {
        return Ok(());
    }
    g.add_edge(e)
}

/// Station gateways, the paradigm-specific WAN, the control
/// center uplink and a connectivity check. Interface limits are enforced on
/// the finished physical graph.
pub fn build_wan(
    g: &mut InfrastructureGraph,
    grid: &PowerGridModel,
    stations: &mut [Station],
    bp: &Blueprint,
) -> Result<(), TopologyError> {
    let paradigm = bp.wan.paradigm;
    let gateway_template = match paradigm {
        WanParadigm::Fiber => &bp.wan.fiber.gateway,
        WanParadigm::Plc => &bp.wan.plc.gateway,
        WanParadigm::Mobile => &bp.wan.mobile.gateway,
    };

    for s in stations.iter_mut() {
        let switch = lan_switch_id(s, bp);
        if !g.nodes.contains_key(&switch) {
            continue;
        }
        let class = station_class(bp, s);
        let once_of = |kind: DeviceKind| {
            class.devices.iter().find(|d| {
                d.placement == Placement::Once
                    && bp.device_template(&d.template).map(|t| t.kind) == Some(kind)
            })
        };
        if let Some(router) = once_of(DeviceKind::Router) {
            s.gateway = Some(format!("{}/{}", s.id, router.template));
            continue;
        }
        let id = format!("{}/{gateway_template}", s.id);
        if !g.nodes.contains_key(&id) {
            let mut node = wan_node(&id, gateway_template, bp)?;
            node.zone = station_zone(s);
            node.station = Some(s.id.clone());
            g.add_node(node)?;
            let attach = once_of(DeviceKind::Firewall)
                .map(|fw| format!("{}/{}", s.id, fw.template))
                .unwrap_or(switch);
            g.add_edge(Edge::physical(&id, &attach, &bp.lan.link_class))?;
        }
        s.gateway = Some(id);
    }

    let field: Vec<&Station> = stations
        .iter()
        .filter(|s| !s.is_control_center() && s.gateway.is_some())
        .collect();
    let cc = stations.iter().find(|s| s.is_control_center());

    match paradigm {
        WanParadigm::Fiber => {
            let by_gateway: BTreeMap<&str, &Station> = field
                .iter()
                .map(|s| (s.gateway.as_deref().unwrap(), *s))
                .collect();
            let pairs: BTreeSet<(&str, &str)> = match bp.wan.fiber.candidates {
                FiberCandidates::Complete => field
                    .iter()
                    .flat_map(|a| field.iter().map(move |b| (a.id.as_str(), b.id.as_str())))
                    .filter(|(a, b)| a < b)
                    .collect(),
                FiberCandidates::ElectricalParallel => {
                    let all = grid
                        .branches
                        .iter()
                        .map(|b| (b.from_bus.as_str(), b.to_bus.as_str()))
                        .chain(
                            grid.transformers
                                .iter()
                                .map(|t| (t.hv_bus.as_str(), t.lv_bus.as_str())),
                        );
                    contracted_pairs(&field, all)
                }
            };
            let by_id: BTreeMap<&str, &Station> =
                field.iter().map(|s| (s.id.as_str(), *s)).collect();
            let candidates: Vec<WeightedEdge> = pairs
                .iter()
                .map(|(a, b)| {
                    let e = station_link(by_id[a], by_id[b], &bp.wan.fiber.link_class);
                    WeightedEdge {
                        id: e.id,
                        a: e.a,
                        b: e.b,
                        weight: e.distance_km.unwrap(),
                    }
                })
                .collect();
            let nodes: Vec<String> = by_gateway.keys().map(|k| k.to_string()).collect();
            for w in minimum_spanning_tree(&nodes, &candidates)? {
                let e = station_link(
                    by_gateway[w.a.as_str()],
                    by_gateway[w.b.as_str()],
                    &bp.wan.fiber.link_class,
                );
                add_link(g, e)?;
            }
        }
        WanParadigm::Plc => {
            let closed = grid
                .branches
                .iter()
                .filter(|b| !grid.is_branch_open(&b.id))
                .map(|b| (b.from_bus.as_str(), b.to_bus.as_str()))
                .chain(
                    grid.transformers
                        .iter()
                        .map(|t| (t.hv_bus.as_str(), t.lv_bus.as_str())),
                );
            let by_id: BTreeMap<&str, &Station> =
                field.iter().map(|s| (s.id.as_str(), *s)).collect();
            for (a, b) in contracted_pairs(&field, closed) {
                add_link(g, station_link(by_id[a], by_id[b], &bp.wan.plc.link_class))?;
            }
        }
        WanParadigm::Mobile => {
            let m = &bp.wan.mobile;
            let points: Vec<(String, Point)> = field
                .iter()
                .map(|s| (s.id.clone(), s.coordinates))
                .collect();
            let cells = mobile_cells(&points, m.cell_size);
            let core = "wan/core";
            g.add_node(wan_node(core, &m.core, bp)?)?;
            let by_id: BTreeMap<&str, &Station> =
                field.iter().map(|s| (s.id.as_str(), *s)).collect();
            for cell in &cells {
                g.add_node(wan_node(&cell.base_station, &m.base_station, bp)?)?;
                g.add_edge(Edge::physical(
                    &cell.base_station,
                    core,
                    &m.backbone_link_class,
                ))?;
                for member in &cell.members {
                    let s = by_id[member.as_str()];
                    let mut e = Edge::physical(
                        s.gateway.as_deref().unwrap(),
                        &cell.base_station,
                        &m.radio_link_class,
                    );
                    e.distance_km = Some(s.coordinates.distance(&cell.position));
                    g.add_edge(e)?;
                }
            }
            if let Some(gw) = cc.and_then(|c| c.gateway.as_deref()) {
                g.add_edge(Edge::physical(gw, core, &m.backbone_link_class))?;
            }
        }
    }

    if paradigm != WanParadigm::Mobile {
        if let Some(cc) = cc.filter(|c| c.gateway.is_some()) {
            let mut uplinks: Vec<&Station> = field
                .iter()
                .copied()
                .filter(|s| station_class(bp, s).wan_uplink)
                .collect();
            if uplinks.is_empty() {
                uplinks = field
                    .iter()
                    .copied()
                    .filter(|s| s.bus_group.contains(&grid.external_grid))
                    .collect();
            }
            for s in uplinks {
                add_link(g, station_link(cc, s, &bp.wan.uplink_link_class))?;
            }
        }
    }

    check_connectivity(g, stations)?;
    check_interface_limits(g, bp)
}

/// Station pairs joined by at least one of the given bus pairs.
fn contracted_pairs<'a>(
    field: &[&'a Station],
    bus_pairs: impl Iterator<Item = (&'a str, &'a str)>,
) -> BTreeSet<(&'a str, &'a str)> {
    let station_of: BTreeMap<&str, &str> = field
        .iter()
        .flat_map(|s| s.bus_group.iter().map(move |b| (b.as_str(), s.id.as_str())))
        .collect();
    bus_pairs
        .filter_map(|(a, b)| {
            let (sa, sb) = (*station_of.get(a)?, *station_of.get(b)?);
            match sa.cmp(sb) {
                std::cmp::Ordering::Less => Some((sa, sb)),
                std::cmp::Ordering::Greater => Some((sb, sa)),
                std::cmp::Ordering::Equal => None,
            }
        })
        .collect()
}

fn check_connectivity(g: &InfrastructureGraph, stations: &[Station]) -> Result<(), TopologyError> {
    let Some(root) = stations
        .iter()
        .filter_map(|s| s.gateway.as_deref())
        .min_by_key(|gw| !gw.starts_with(super::CONTROL_CENTER))
    else {
        return Ok(());
    };
    let reached = g.reachable(root, EdgeKind::PhysicalLink);
    let mut unreachable: BTreeSet<String> = BTreeSet::new();
    for d in g.devices() {
        if !reached.contains(&d.id) {
            unreachable.insert(d.station.clone().unwrap_or_else(|| d.id.clone()));
        }
    }
    if unreachable.is_empty() {
        Ok(())
    } else {
        Err(TopologyError::Disconnected(
            unreachable.into_iter().collect(),
        ))
    }
}

/// Rejects devices whose physical degree exceeds a fixed interface count.
pub fn check_interface_limits(
    g: &InfrastructureGraph,
    bp: &Blueprint,
) -> Result<(), TopologyError> {
    let mut degree: BTreeMap<&str, usize> = BTreeMap::new();
    for e in g.edges_of_kind(EdgeKind::PhysicalLink) {
        *degree.entry(e.a.as_str()).or_default() += 1;
        *degree.entry(e.b.as_str()).or_default() += 1;
    }
    for n in g.devices() {
        let Some(t) = n.template.as_deref().and_then(|t| bp.device_template(t)) else {
            continue;
        };
        if let InterfaceRule::Fixed(allowed) = t.interfaces {
            let d = degree.get(n.id.as_str()).copied().unwrap_or(0);
            if d > allowed as usize {
                return Err(TopologyError::InterfaceLimit {
                    node: n.id.clone(),
                    allowed,
                    degree: d,
                });
            }
        }
    }
    Ok(())
}
