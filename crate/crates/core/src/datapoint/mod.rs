//! Process data points: binding to primary elements, IEC 60870 style
//! addressing at field level and identity-preserving inheritance up the
//! master/slave hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::{Blueprint, DeviceKind, Direction, PrimaryCategory, Zone};
use crate::topology::{station_ordinals, EdgeKind, InfrastructureGraph, Station};

/// First IOA of the monitoring band.
pub const MONITORING_IOA_BASE: u32 = 100;
/// First IOA of the control band.
pub const CONTROL_IOA_BASE: u32 = 2000;

#[derive(Debug, Error, PartialEq)]
pub enum DataPointError {
    #[error("no data point template for attribute {0}")]
    MissingTemplate(String),
    #[error("device {device}: address (coa {coa}, ioa {ioa}) assigned twice")]
    Collision { device: String, coa: u32, ioa: u32 },
    #[error("station {station}: monitoring addresses reach the control band")]
    BandOverflow { station: String },
    #[error("device {0} holds no data point map")]
    UnknownDevice(String),
}

/// Primary element attribute a point reads or writes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    pub category: PrimaryCategory,
    pub element: String,
    pub attribute: String,
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}.{}", self.category, self.element, self.attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPoint {
    pub coa: u32,
    pub ioa: u32,
    pub type_id: String,
    pub cot: String,
    pub direction: Direction,
    pub size_bytes: u32,
    pub source: SourceRef,
    /// Kind of the field device the point originates from.
    pub origin_kind: DeviceKind,
    pub owner: String,
    /// Devices the point passed through, field device first, owner last.
    pub lineage: Vec<String>,
}

/// What stays fixed while a point is inherited.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointIdentity {
    pub coa: u32,
    pub ioa: u32,
    pub type_id: String,
    pub source: SourceRef,
}

impl DataPoint {
    pub fn identity(&self) -> PointIdentity {
        PointIdentity {
            coa: self.coa,
            ioa: self.ioa,
            type_id: self.type_id.clone(),
            source: self.source.clone(),
        }
    }

    pub fn address(&self) -> (u32, u32) {
        (self.coa, self.ioa)
    }

    /// Copy held by `owner`, one level further up.
    fn inherited_by(&self, owner: &str) -> DataPoint {
        let mut p = self.clone();
        p.owner = owner.to_string();
        p.lineage.push(owner.to_string());
        p
    }
}

/// Per-device point lists plus a reverse index from source to the field
/// devices that serve it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DataPointMap {
    /// Points of every device, sorted by `(coa, ioa)`.
    pub devices: BTreeMap<String, Vec<DataPoint>>,
    /// Keyed by the display form of [`SourceRef`].
    pub reverse: BTreeMap<String, Vec<String>>,
}

impl DataPointMap {
    pub fn points(&self, device: &str) -> &[DataPoint] {
        self.devices.get(device).map_or(&[], |v| v.as_slice())
    }

    pub fn total_points(&self) -> usize {
        self.devices.values().map(Vec::len).sum()
    }

    fn insert_checked(
        &mut self,
        device: &str,
        mut points: Vec<DataPoint>,
    ) -> Result<(), DataPointError> {
        points.sort_by_key(DataPoint::address);
        for w in points.windows(2) {
            if w[0].address() == w[1].address() {
                return Err(DataPointError::Collision {
                    device: device.to_string(),
                    coa: w[0].coa,
                    ioa: w[0].ioa,
                });
            }
        }
        self.devices.insert(device.to_string(), points);
        Ok(())
    }

    fn rebuild_reverse(&mut self) {
        let mut reverse: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (device, points) in &self.devices {
            for p in points.iter().filter(|p| p.lineage.len() == 1) {
                reverse
                    .entry(p.source.to_string())
                    .or_default()
                    .insert(device.clone());
            }
        }
        self.reverse = reverse
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect();
    }
}

/// A primary attribute available to a field device.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Binding {
    pub device: String,
    pub source: SourceRef,
    pub direction: Direction,
}

/// Attributes each field device can serve through its process
/// interface. Placement point filters apply, and control attributes only
/// bind to devices whose template allows commands.
pub fn bind_primary_data(
    g: &InfrastructureGraph,
    bp: &Blueprint,
) -> BTreeMap<String, Vec<Binding>> {
    let templates = bp.datapoints_by_category();
    let mut out = BTreeMap::new();
    for node in g.devices() {
        let Some(wired) = &node.wired else { continue };
        let linked = g
            .edges
            .get(&format!("pi/{}", node.id))
            .is_some_and(|e| e.kind == EdgeKind::ProcessInterface);
        if !linked {
            out.insert(node.id.clone(), Vec::new());
            continue;
        }
        let allows_commands = node
            .template
            .as_deref()
            .and_then(|t| bp.device_template(t))
            .is_some_and(|t| t.allows_commands());
        let bindings: Vec<Binding> = templates
            .get(&wired.category)
            .into_iter()
            .flatten()
            .filter(|t| {
                node.point_filter
                    .as_ref()
                    .is_none_or(|f| f.iter().any(|a| a == t.attribute()))
            })
            .filter(|t| t.direction == Direction::Monitoring || allows_commands)
            .map(|t| Binding {
                device: node.id.clone(),
                source: SourceRef {
                    category: wired.category,
                    element: wired.element.clone(),
                    attribute: t.attribute().to_string(),
                },
                direction: t.direction,
            })
            .collect();
        out.insert(node.id.clone(), bindings);
    }
    out
}

/// Field-level points. COA is the station ordinal; IOAs count up
/// per station from the monitoring and control bases, walking devices in
/// id order so that addresses stay unique within each COA.
pub fn assign_field_datapoints(
    g: &InfrastructureGraph,
    stations: &[Station],
    bindings: &BTreeMap<String, Vec<Binding>>,
    bp: &Blueprint,
) -> Result<DataPointMap, DataPointError> {
    let ordinals = station_ordinals(stations);
    let mut counters: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
    let mut map = DataPointMap::default();
    for (device, list) in bindings {
        let node = g.node(device);
        let station = node.and_then(|n| n.station.as_deref()).unwrap_or("");
        let origin_kind = node
            .and_then(|n| n.kind.device())
            .unwrap_or(DeviceKind::IedMeasurement);
        let coa = ordinals.get(station).copied().unwrap_or(0);
        let (mon, ctl) = counters
            .entry(station)
            .or_insert((MONITORING_IOA_BASE, CONTROL_IOA_BASE));
        let mut points = Vec::with_capacity(list.len());
        for b in list {
            let key = format!("{}.{}", b.source.category, b.source.attribute);
            let t = bp
                .datapoint(&key)
                .ok_or_else(|| DataPointError::MissingTemplate(key.clone()))?;
            let ioa = match t.direction {
                Direction::Monitoring => {
                    if *mon >= CONTROL_IOA_BASE {
                        return Err(DataPointError::BandOverflow {
                            station: station.to_string(),
                        });
                    }
                    *mon += 1;
                    *mon - 1
                }
                Direction::Control => {
                    *ctl += 1;
                    *ctl - 1
                }
            };
            points.push(DataPoint {
                coa,
                ioa,
                type_id: t.type_id.clone(),
                cot: t.cot.clone(),
                direction: t.direction,
                size_bytes: t.size_bytes,
                source: b.source.clone(),
                origin_kind,
                owner: device.clone(),
                lineage: vec![device.clone()],
            });
        }
        map.insert_checked(device, points)?;
    }
    map.rebuild_reverse();
    Ok(map)
}

/// Every master holds the union of its slaves' points,
/// unchanged apart from owner and lineage. Masters are processed from the
/// lowest zone up so each slave is complete before it is read.
pub fn inherit_datapoints(
    g: &InfrastructureGraph,
    field: &DataPointMap,
) -> Result<DataPointMap, DataPointError> {
    let mut slaves: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for c in g.logical_connections() {
        slaves.entry(&c.a).or_default().push(&c.b);
    }
    let mut masters: Vec<(Zone, &str)> = slaves
        .keys()
        .map(|m| (g.node(m).map_or(Zone::Process, |n| n.zone), *m))
        .collect();
    masters.sort();

    let mut map = field.clone();
    for (_, master) in masters {
        let mut points: Vec<DataPoint> = map.points(master).to_vec();
        for s in &slaves[master] {
            points.extend(map.points(s).iter().map(|p| p.inherited_by(master)));
        }
        map.insert_checked(master, points)?;
    }
    map.rebuild_reverse();
    Ok(map)
}

/// Which foreign points a SCADA view imports. A point is selected when its
/// primary category or its originating device kind is listed; an empty
/// selector selects nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selector {
    #[serde(default)]
    pub categories: BTreeSet<PrimaryCategory>,
    #[serde(default)]
    pub device_kinds: BTreeSet<DeviceKind>,
}

impl Selector {
    pub fn matches(&self, p: &DataPoint) -> bool {
        self.categories.contains(&p.source.category) || self.device_kinds.contains(&p.origin_kind)
    }
}

/// Extends `scada`'s view in `primary` with the selected points of
/// `other_scada` in `other`, COAs shifted by `stride`.
pub fn merge_scada_views(
    primary: &DataPointMap,
    scada: &str,
    other: &DataPointMap,
    other_scada: &str,
    selector: &Selector,
    stride: u32,
) -> Result<DataPointMap, DataPointError> {
    let own = primary
        .devices
        .get(scada)
        .ok_or_else(|| DataPointError::UnknownDevice(scada.to_string()))?;
    let foreign = other
        .devices
        .get(other_scada)
        .ok_or_else(|| DataPointError::UnknownDevice(other_scada.to_string()))?;
    let mut points = own.clone();
    for p in foreign.iter().filter(|p| selector.matches(p)) {
        let mut q = p.inherited_by(scada);
        q.coa += stride;
        points.push(q);
    }
    let mut out = primary.clone();
    out.insert_checked(scada, points)?;
    Ok(out)
}

/// Bindings, field points and inheritance up every master chain.
pub fn configure_datapoints(
    g: &InfrastructureGraph,
    stations: &[Station],
    bp: &Blueprint,
) -> Result<DataPointMap, DataPointError> {
    let bindings = bind_primary_data(g, bp);
    let field = assign_field_datapoints(g, stations, &bindings, bp)?;
    inherit_datapoints(g, &field)
}
