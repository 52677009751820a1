use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::blueprint::{DeviceKind, PrimaryCategory, Zone};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Primary(PrimaryCategory),
    Device(DeviceKind),
}

impl NodeKind {
    pub fn device(&self) -> Option<DeviceKind> {
        match self {
            NodeKind::Device(d) => Some(*d),
            NodeKind::Primary(_) => None,
        }
    }

    pub fn is_device(&self) -> bool {
        matches!(self, NodeKind::Device(_))
    }

    pub fn is_l3(&self) -> bool {
        self.device().is_some_and(|d| d.is_l3())
    }

    pub fn is_endpoint(&self) -> bool {
        self.device().is_some_and(|d| d.is_endpoint())
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Primary(c) => write!(f, "{c}"),
            NodeKind::Device(d) => write!(f, "{d}"),
        }
    }
}

/// Primary element a field device is wired to through its process interface.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WiredElement {
    pub category: PrimaryCategory,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub station: Option<String>,
    pub zone: Zone,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wired: Option<WiredElement>,
    /// Attribute filter on the data points bound through `wired`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_filter: Option<Vec<String>>,
}

impl Node {
    pub fn primary(id: String, category: PrimaryCategory) -> Self {
        Node {
            id,
            kind: NodeKind::Primary(category),
            station: None,
            zone: Zone::Process,
            template: None,
            wired: None,
            point_filter: None,
        }
    }

    pub fn device(
        id: String,
        kind: DeviceKind,
        zone: Zone,
        station: Option<String>,
        template: &str,
    ) -> Self {
        Node {
            id,
            kind: NodeKind::Device(kind),
            station,
            zone,
            template: Some(template.to_string()),
            wired: None,
            point_filter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Electrical,
    /// Field device to the primary element it senses or actuates.
    ProcessInterface,
    PhysicalLink,
    LogicalConnection,
}

impl EdgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::Electrical => "electrical",
            EdgeKind::ProcessInterface => "process_interface",
            EdgeKind::PhysicalLink => "physical_link",
            EdgeKind::LogicalConnection => "logical_connection",
        }
    }
}

/// Quality parameters of a physical link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub bandwidth_bps: f64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub loss_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    /// Master for logical connections, the device for process interfaces,
    /// the lexicographically smaller end for physical links.
    pub a: String,
    pub b: String,
    pub kind: EdgeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<LinkParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    /// Planar length for WAN links laid by distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
}

impl Edge {
    pub fn new(id: String, a: String, b: String, kind: EdgeKind) -> Self {
        Edge {
            id,
            a,
            b,
            kind,
            link_class: None,
            params: None,
            protocol: None,
            distance_km: None,
        }
    }

    /// A physical link with endpoints ordered and a canonical id.
    pub fn physical(a: &str, b: &str, link_class: &str) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut e = Edge::new(
            format!("pl/{a}--{b}"),
            a.to_string(),
            b.to_string(),
            EdgeKind::PhysicalLink,
        );
        e.link_class = Some(link_class.to_string());
        e
    }

    pub fn other(&self, node: &str) -> Option<&str> {
        if self.a == node {
            Some(&self.b)
        } else if self.b == node {
            Some(&self.a)
        } else {
            None
        }
    }
}

/// Typed graph of primary objects, devices and their relations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "GraphRepr", into = "GraphRepr")]
pub struct InfrastructureGraph {
    pub nodes: BTreeMap<String, Node>,
    pub edges: BTreeMap<String, Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl From<GraphRepr> for InfrastructureGraph {
    fn from(r: GraphRepr) -> Self {
        InfrastructureGraph {
            nodes: r.nodes.into_iter().map(|n| (n.id.clone(), n)).collect(),
            edges: r.edges.into_iter().map(|e| (e.id.clone(), e)).collect(),
        }
    }
}

impl From<InfrastructureGraph> for GraphRepr {
    fn from(g: InfrastructureGraph) -> Self {
        GraphRepr {
            nodes: g.nodes.into_values().collect(),
            edges: g.edges.into_values().collect(),
        }
    }
}

impl InfrastructureGraph {
    pub fn add_node(&mut self, node: Node) -> Result<(), TopologyError> {
        if self.nodes.contains_key(&node.id) {
            return Err(TopologyError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), TopologyError> {
        for end in [&edge.a, &edge.b] {
            if !self.nodes.contains_key(end) {
                return Err(TopologyError::UnknownNode {
                    edge: edge.id.clone(),
                    node: end.clone(),
                });
            }
        }
        if self.edges.contains_key(&edge.id) {
            return Err(TopologyError::DuplicateEdge(edge.id));
        }
        self.edges.insert(edge.id.clone(), edge);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.values().filter(move |e| e.kind == kind)
    }

    pub fn count_edges(&self, kind: EdgeKind) -> usize {
        self.edges_of_kind(kind).count()
    }

    /// Per node, the `(edge id, neighbour id)` pairs over edges of `kind`,
    /// sorted by edge id. Every node appears, possibly with no entries.
    pub fn adjacency(&self, kind: EdgeKind) -> BTreeMap<&str, Vec<(&str, &str)>> {
        let mut adj: BTreeMap<&str, Vec<(&str, &str)>> = self
            .nodes
            .keys()
            .map(|k| (k.as_str(), Vec::new()))
            .collect();
        for e in self.edges_of_kind(kind) {
            adj.get_mut(e.a.as_str())
                .expect("edge endpoint exists")
                .push((&e.id, &e.b));
            adj.get_mut(e.b.as_str())
                .expect("edge endpoint exists")
                .push((&e.id, &e.a));
        }
        for list in adj.values_mut() {
            list.sort();
        }
        adj
    }

    /// Nodes reachable from `start` over edges of `kind`.
    pub fn reachable(&self, start: &str, kind: EdgeKind) -> BTreeSet<String> {
        let adj = self.adjacency(kind);
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        if adj.contains_key(start) {
            seen.insert(start.to_string());
            queue.push_back(start);
        }
        while let Some(n) = queue.pop_front() {
            for (_, m) in &adj[n] {
                if seen.insert(m.to_string()) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    pub fn devices(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.kind.is_device())
    }

    pub fn devices_of(&self, kind: DeviceKind) -> impl Iterator<Item = &Node> {
        self.nodes
            .values()
            .filter(move |n| n.kind == NodeKind::Device(kind))
    }

    pub fn logical_connections(&self) -> impl Iterator<Item = &Edge> {
        self.edges_of_kind(EdgeKind::LogicalConnection)
    }

    /// Physical link between two nodes, if any.
    pub fn link_between(&self, a: &str, b: &str) -> Option<&Edge> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .get(&format!("pl/{a}--{b}"))
            .filter(|e| e.kind == EdgeKind::PhysicalLink)
            .or_else(|| {
                self.edges_of_kind(EdgeKind::PhysicalLink)
                    .find(|e| e.a == a && e.b == b)
            })
    }
}
