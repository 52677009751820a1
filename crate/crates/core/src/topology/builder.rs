use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{Edge, EdgeKind, InfrastructureGraph, Node, WiredElement};
use super::{build_wan, Feeder, Station, TopologyError, UnionFind, CONTROL_CENTER};
use crate::blueprint::{
    resolve_station_template, Blueprint, DeviceKind, Placement, PrimaryCategory, StationClass,
    StationProfile, Zone,
};
use crate::grid_io::{bus_coordinates, bus_depths, Point, PowerGridModel, SwitchTarget};

pub(crate) fn primary_id(category: PrimaryCategory, id: &str) -> String {
    format!("{category}/{id}")
}

/// Nodes, edges and report notes produced by one per-station step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fragment {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub notes: Vec<String>,
}

impl InfrastructureGraph {
    /// Inserts a fragment's nodes, then its edges.
    pub fn merge(&mut self, fragment: Fragment) -> Result<Vec<String>, TopologyError> {
        for n in fragment.nodes {
            self.add_node(n)?;
        }
        for e in fragment.edges {
            self.add_edge(e)?;
        }
        Ok(fragment.notes)
    }
}

/// Result of the whole modeling phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub graph: InfrastructureGraph,
    pub stations: Vec<Station>,
    pub notes: Vec<String>,
}

/// One process-zone node per bus, transformer, load, generator and
/// switch; electrical edges for closed branches, transformer windings and
/// element attachments. The grid is expected to be validated.
pub fn instantiate_primary_objects(grid: &PowerGridModel) -> InfrastructureGraph {
    use PrimaryCategory as C;
    let mut g = InfrastructureGraph::default();
    let mut node = |cat, id: &str| {
        let n = Node::primary(primary_id(cat, id), cat);
        g.nodes.insert(n.id.clone(), n);
    };
    for b in &grid.buses {
        node(C::Bus, &b.id);
    }
    for t in &grid.transformers {
        node(C::Transformer, &t.id);
    }
    for l in &grid.loads {
        node(C::Load, &l.id);
    }
    for x in &grid.generators {
        node(C::Generator, &x.id);
    }
    for s in &grid.switches {
        node(C::Switch, &s.id);
    }

    let mut edge = |id: String, a: String, b: String| {
        g.edges
            .insert(id.clone(), Edge::new(id, a, b, EdgeKind::Electrical));
    };
    let bus = |id: &str| primary_id(C::Bus, id);
    for br in &grid.branches {
        if !grid.is_branch_open(&br.id) {
            edge(
                format!("el/branch/{}", br.id),
                bus(&br.from_bus),
                bus(&br.to_bus),
            );
        }
    }
    for t in &grid.transformers {
        let tid = primary_id(C::Transformer, &t.id);
        edge(format!("el/{tid}/hv"), bus(&t.hv_bus), tid.clone());
        edge(format!("el/{tid}/lv"), bus(&t.lv_bus), tid);
    }
    for l in &grid.loads {
        let id = primary_id(C::Load, &l.id);
        edge(format!("el/{id}"), bus(&l.bus), id);
    }
    for x in &grid.generators {
        let id = primary_id(C::Generator, &x.id);
        edge(format!("el/{id}"), bus(&x.bus), id);
    }
    for s in &grid.switches {
        let id = primary_id(C::Switch, &s.id);
        edge(format!("el/{id}"), bus(&s.bus), id.clone());
        if s.et == SwitchTarget::Bus && s.closed {
            edge(format!("el/{id}/coupled"), bus(&s.element), id);
        }
    }
    g
}

/// Buses joined by closed couplers form a station together with
/// their loads, generators, switches and the transformers whose HV side
/// they hold. Adds the synthetic control center and tags primary nodes
/// with their station. Returned stations are sorted by id.
pub fn aggregate_stations(
    g: &mut InfrastructureGraph,
    grid: &PowerGridModel,
    bp: &Blueprint,
) -> Result<Vec<Station>, TopologyError> {
    use PrimaryCategory as C;
    let index: BTreeMap<&str, usize> = grid
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let mut uf = UnionFind::new(grid.buses.len());
    for (a, b) in grid.closed_couplers() {
        if let (Some(&a), Some(&b)) = (index.get(a), index.get(b)) {
            uf.union(a, b);
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (bus, i) in &index {
        groups
            .entry(uf.find(*i))
            .or_default()
            .insert(bus.to_string());
    }

    let coords = bus_coordinates(grid);
    let depths = bus_depths(grid);
    let mut station_of_bus: BTreeMap<String, String> = BTreeMap::new();
    let mut stations: Vec<Station> = Vec::new();
    for group in groups.into_values() {
        let id = format!("st_{}", group.first().expect("groups are non-empty"));
        for b in &group {
            station_of_bus.insert(b.clone(), id.clone());
        }
        let mut members: BTreeSet<String> = group.iter().map(|b| primary_id(C::Bus, b)).collect();
        members.extend(
            grid.transformers
                .iter()
                .filter(|t| group.contains(&t.hv_bus))
                .map(|t| primary_id(C::Transformer, &t.id)),
        );
        members.extend(
            grid.loads
                .iter()
                .filter(|x| group.contains(&x.bus))
                .map(|x| primary_id(C::Load, &x.id)),
        );
        members.extend(
            grid.generators
                .iter()
                .filter(|x| group.contains(&x.bus))
                .map(|x| primary_id(C::Generator, &x.id)),
        );
        members.extend(
            grid.switches
                .iter()
                .filter(|x| group.contains(&x.bus))
                .map(|x| primary_id(C::Switch, &x.id)),
        );
        let profile = StationProfile::from_bus_group(grid, &group);
        let class =
            resolve_station_template(bp, &profile).map_err(|source| TopologyError::Resolve {
                station: id.clone(),
                source,
            })?;
        let n = group.len() as f64;
        let (sx, sy) = group
            .iter()
            .map(|b| coords[b])
            .fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        stations.push(Station {
            id,
            class: class.name.clone(),
            primary_members: members,
            bus_group: group,
            coordinates: Point::new(sx / n, sy / n),
            feeders: Vec::new(),
            gateway: None,
        });
    }

    let depth = |b: &str| depths.get(b).copied().unwrap_or(usize::MAX);
    let mut feeders: BTreeMap<String, Vec<Feeder>> = BTreeMap::new();
    for br in &grid.branches {
        let (Some(sf), Some(st)) = (
            station_of_bus.get(&br.from_bus),
            station_of_bus.get(&br.to_bus),
        ) else {
            continue;
        };
        if sf == st {
            continue;
        }
        let (station, bus) = if depth(&br.from_bus) <= depth(&br.to_bus) {
            (sf, &br.from_bus)
        } else {
            (st, &br.to_bus)
        };
        feeders.entry(station.clone()).or_default().push(Feeder {
            branch: br.id.clone(),
            bus: bus.clone(),
        });
    }
    for s in &mut stations {
        s.feeders = feeders.remove(&s.id).unwrap_or_default();
        s.feeders.sort();
        for m in &s.primary_members {
            if let Some(n) = g.nodes.get_mut(m) {
                n.station = Some(s.id.clone());
            }
        }
    }

    stations.push(Station {
        id: CONTROL_CENTER.to_string(),
        class: bp.control_center_class().name.clone(),
        primary_members: BTreeSet::new(),
        bus_group: BTreeSet::new(),
        coordinates: coords
            .get(&grid.external_grid)
            .copied()
            .unwrap_or(Point::new(0.0, 0.0)),
        feeders: Vec::new(),
        gateway: None,
    });
    stations.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(stations)
}

pub(crate) fn station_class<'a>(bp: &'a Blueprint, station: &Station) -> &'a StationClass {
    bp.station_class(&station.class)
        .expect("station class resolved from this blueprint")
}

pub(crate) fn station_zone(station: &Station) -> Zone {
    if station.is_control_center() {
        Zone::Operation
    } else {
        Zone::Station
    }
}

fn template_kind(bp: &Blueprint, name: &str) -> Result<DeviceKind, TopologyError> {
    bp.device_template(name)
        .map(|t| t.kind)
        .ok_or_else(|| TopologyError::UnknownTemplate(name.to_string()))
}

/// Field IEDs per placement rule, each wired to its primary
/// element by a process-interface edge. Feeder devices attach to the
/// station-side bus and record the branch as their wired element.
pub fn place_field_devices(
    _g: &InfrastructureGraph,
    station: &Station,
    bp: &Blueprint,
) -> Result<Fragment, TopologyError> {
    let class = station_class(bp, station);
    let mut frag = Fragment::default();
    for dp in &class.devices {
        let kind = template_kind(bp, &dp.template)?;
        let Some(category) = dp.placement.category() else {
            continue;
        };
        if !kind.is_ied() {
            continue;
        }
        let elements: Vec<(String, String)> = match (dp.placement, category) {
            (_, PrimaryCategory::Branch) => station
                .feeders
                .iter()
                .map(|f| (f.branch.clone(), primary_id(PrimaryCategory::Bus, &f.bus)))
                .collect(),
            _ => {
                let prefix = format!("{category}/");
                station
                    .primary_members
                    .iter()
                    .filter_map(|m| {
                        m.strip_prefix(&prefix)
                            .map(|id| (id.to_string(), m.clone()))
                    })
                    .collect()
            }
        };
        if elements.is_empty() {
            frag.notes.push(format!(
                "{}: {} {} found no {category} elements",
                station.id, dp.template, dp.placement
            ));
        }
        for (element, primary) in elements {
            let id = format!("{}/{}_{}_{}", station.id, dp.template, category, element);
            let mut node = Node::device(
                id.clone(),
                kind,
                Zone::Field,
                Some(station.id.clone()),
                &dp.template,
            );
            node.wired = Some(WiredElement { category, element });
            node.point_filter = dp.points.clone();
            frag.nodes.push(node);
            frag.edges.push(Edge::new(
                format!("pi/{id}"),
                id,
                primary,
                EdgeKind::ProcessInterface,
            ));
        }
    }
    Ok(frag)
}

pub(crate) fn lan_switch_id(station: &Station, bp: &Blueprint) -> String {
    format!("{}/{}", station.id, bp.lan.switch)
}

/// A star switch linking every field device of the station. The
/// switch is placed whenever the station has field devices or station-level
/// devices to attach.
pub fn build_station_lan(
    g: &InfrastructureGraph,
    station: &Station,
    bp: &Blueprint,
) -> Result<Fragment, TopologyError> {
    let class = station_class(bp, station);
    let field: Vec<&Node> = g
        .devices()
        .filter(|n| n.station.as_deref() == Some(&station.id) && n.zone == Zone::Field)
        .collect();
    let has_once = class.devices.iter().any(|d| d.placement == Placement::Once);
    let mut frag = Fragment::default();
    if field.is_empty() && !has_once {
        frag.notes
            .push(format!("{}: no devices, LAN omitted", station.id));
        return Ok(frag);
    }
    let switch = lan_switch_id(station, bp);
    frag.nodes.push(Node::device(
        switch.clone(),
        template_kind(bp, &bp.lan.switch)?,
        station_zone(station),
        Some(station.id.clone()),
        &bp.lan.switch,
    ));
    for d in field {
        frag.edges
            .push(Edge::physical(&d.id, &switch, &bp.lan.link_class));
    }
    Ok(frag)
}

/// Station-level devices placed once (RTU, or SCADA host, firewall
/// and router at the control center). Endpoints and the firewall attach to
/// the switch; a router sits behind the firewall when there is one.
pub fn place_rtu(
    _g: &InfrastructureGraph,
    station: &Station,
    bp: &Blueprint,
) -> Result<Fragment, TopologyError> {
    let class = station_class(bp, station);
    let switch = lan_switch_id(station, bp);
    let once: Vec<(&str, DeviceKind)> = class
        .devices
        .iter()
        .filter(|d| d.placement == Placement::Once)
        .map(|d| Ok((d.template.as_str(), template_kind(bp, &d.template)?)))
        .collect::<Result<_, TopologyError>>()?;
    let firewall = once
        .iter()
        .find(|(_, k)| *k == DeviceKind::Firewall)
        .map(|(t, _)| format!("{}/{t}", station.id));

    let mut frag = Fragment::default();
    for (template, kind) in once {
        let id = format!("{}/{template}", station.id);
        frag.nodes.push(Node::device(
            id.clone(),
            kind,
            station_zone(station),
            Some(station.id.clone()),
            template,
        ));
        let uplink = match (&firewall, kind) {
            (Some(fw), DeviceKind::Router) => fw.clone(),
            _ => switch.clone(),
        };
        frag.edges
            .push(Edge::physical(&id, &uplink, &bp.lan.link_class));
    }
    Ok(frag)
}

/// Runs a per-station step over all stations in parallel and merges the
/// fragments in station order.
pub fn run_station_step<F>(
    g: &mut InfrastructureGraph,
    stations: &[Station],
    bp: &Blueprint,
    step: F,
) -> Result<Vec<String>, TopologyError>
where
    F: Fn(&InfrastructureGraph, &Station, &Blueprint) -> Result<Fragment, TopologyError> + Sync,
{
    let frozen: &InfrastructureGraph = g;
    let fragments: Vec<Fragment> = stations
        .par_iter()
        .map(|s| step(frozen, s, bp))
        .collect::<Result<_, _>>()?;
    let mut notes = Vec::new();
    for f in fragments {
        notes.extend(g.merge(f)?);
    }
    Ok(notes)
}

/// One logical connection per protocol zone pair between session
/// endpoints. Operation-zone masters reach every slave; other masters only
/// slaves in their own station.
pub fn add_logical_connections(
    g: &mut InfrastructureGraph,
    bp: &Blueprint,
) -> Result<usize, TopologyError> {
    let endpoints: Vec<(String, Zone, Option<String>)> = g
        .devices()
        .filter(|n| n.kind.is_endpoint())
        .map(|n| (n.id.clone(), n.zone, n.station.clone()))
        .collect();
    let mut added = 0;
    for p in &bp.protocols {
        for (mz, sz) in &p.pairs {
            for (m, _, mst) in endpoints.iter().filter(|e| e.1 == *mz) {
                for (s, _, sst) in endpoints.iter().filter(|e| e.1 == *sz) {
                    if *mz != Zone::Operation && mst != sst {
                        continue;
                    }
                    let mut e = Edge::new(
                        format!("lc/{m}--{s}"),
                        m.clone(),
                        s.clone(),
                        EdgeKind::LogicalConnection,
                    );
                    e.protocol = Some(p.name.clone());
                    g.add_edge(e)?;
                    added += 1;
                }
            }
        }
    }
    Ok(added)
}

/// Primary objects, stations, devices, LAN, WAN and logical connections.
pub fn build_topology(grid: &PowerGridModel, bp: &Blueprint) -> Result<Topology, TopologyError> {
    let mut g = instantiate_primary_objects(grid);
    let mut stations = aggregate_stations(&mut g, grid, bp)?;
    let mut notes = run_station_step(&mut g, &stations, bp, place_field_devices)?;
    notes.extend(run_station_step(&mut g, &stations, bp, build_station_lan)?);
    notes.extend(run_station_step(&mut g, &stations, bp, place_rtu)?);
    build_wan(&mut g, grid, &mut stations, bp)?;
    add_logical_connections(&mut g, bp)?;
    Ok(Topology {
        graph: g,
        stations,
        notes,
    })
}
