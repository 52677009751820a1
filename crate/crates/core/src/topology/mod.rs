//! Bottom-up modeling: primary objects, stations, OT devices, station LANs
//! and the WAN, merged into one [`InfrastructureGraph`].

mod builder;
mod graph;
mod mst;
mod wan;

pub use builder::{
    add_logical_connections, aggregate_stations, build_station_lan, build_topology,
    instantiate_primary_objects, place_field_devices, place_rtu, run_station_step, Fragment,
    Topology,
};
pub use graph::{Edge, EdgeKind, InfrastructureGraph, LinkParams, Node, NodeKind, WiredElement};
pub use mst::{minimum_spanning_tree, MstError, WeightedEdge};
pub use wan::{build_wan, check_interface_limits, mobile_cells, Cell};

pub(crate) use mst::UnionFind;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::ResolveError;
use crate::grid_io::Point;

/// Id of the synthetic station hosting the SCADA side.
pub const CONTROL_CENTER: &str = "control_center";

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(String),
    #[error("edge {edge} references unknown node {node}")]
    UnknownNode { edge: String, node: String },
    #[error("station {station}: {source}")]
    Resolve {
        station: String,
        #[source]
        source: ResolveError,
    },
    #[error("device template {0:?} not found in blueprint")]
    UnknownTemplate(String),
    #[error("node {node} has {degree} physical links but its template allows {allowed}")]
    InterfaceLimit {
        node: String,
        allowed: u32,
        degree: usize,
    },
    #[error("WAN leaves stations unreachable from the control center: {0:?}")]
    Disconnected(Vec<String>),
    #[error("fiber candidates are disconnected: {0}")]
    Mst(#[from] MstError),
}

/// A branch leaving a station away from the external grid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Feeder {
    pub branch: String,
    /// Station-side bus.
    pub bus: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: String,
    pub class: String,
    pub primary_members: BTreeSet<String>,
    pub bus_group: BTreeSet<String>,
    /// Centroid of the member buses.
    pub coordinates: Point,
    #[serde(default)]
    pub feeders: Vec<Feeder>,
    /// WAN-facing device, set during WAN construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway: Option<String>,
}

impl Station {
    pub fn is_control_center(&self) -> bool {
        self.id == CONTROL_CENTER
    }
}

/// 1-based ordinal of every non-control-center station in id order.
pub fn station_ordinals(stations: &[Station]) -> BTreeMap<String, u32> {
    let mut ids: Vec<&str> = stations
        .iter()
        .filter(|s| !s.is_control_center())
        .map(|s| s.id.as_str())
        .collect();
    ids.sort();
    ids.into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_string(), i as u32 + 1))
        .collect()
}
