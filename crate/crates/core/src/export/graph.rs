use std::fmt::Write;
use std::str::FromStr;

use super::ExportError;
use crate::blueprint::Zone;
use crate::model::InfrastructureModel;
use crate::topology::{Edge, EdgeKind, Node, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    GraphMl,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Dot => "dot",
            GraphFormat::GraphMl => "graphml",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "graphml" => Ok(GraphFormat::GraphMl),
            other => Err(ExportError::UnknownFormat {
                what: "graph",
                token: other.to_string(),
            }),
        }
    }
}

pub fn export_graph(model: &InfrastructureModel, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => dot(model),
        GraphFormat::GraphMl => graphml(model),
    }
}

fn zone_color(zone: Zone) -> &'static str {
    match zone {
        Zone::Process => "#f4d03f",
        Zone::Field => "#58d68d",
        Zone::Station => "#5dade2",
        Zone::Operation => "#ec7063",
    }
}

fn node_shape(kind: NodeKind) -> &'static str {
    use crate::blueprint::DeviceKind::*;
    match kind {
        NodeKind::Primary(_) => "ellipse",
        NodeKind::Device(Switch) => "box",
        NodeKind::Device(Router | Modem | BaseStation | Firewall) => "diamond",
        NodeKind::Device(Rtu | ScadaHost) => "doubleoctagon",
        NodeKind::Device(_) => "octagon",
    }
}

fn edge_style(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Electrical => "color=\"#7f8c8d\", penwidth=2",
        EdgeKind::ProcessInterface => "color=\"#27ae60\", style=dotted",
        EdgeKind::PhysicalLink => "color=\"#2c3e50\"",
        EdgeKind::LogicalConnection => "color=\"#c0392b\", style=dashed, constraint=false",
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot(model: &InfrastructureModel) -> String {
    let g = &model.graph;
    let mut out = String::from("graph infrastructure {\n  graph [overlap=false, splines=true];\n");
    for n in g.nodes.values() {
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{}\", kind=\"{}\", zone=\"{}\", shape={}, style=filled, fillcolor=\"{}\"];",
            dot_escape(&n.id),
            dot_escape(&n.id),
            n.kind,
            n.zone,
            node_shape(n.kind),
            zone_color(n.zone)
        );
    }
    for e in g.edges.values() {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [id=\"{}\", kind=\"{}\", {}];",
            dot_escape(&e.a),
            dot_escape(&e.b),
            dot_escape(&e.id),
            e.kind.as_str(),
            edge_style(e.kind)
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const NODE_KEYS: [&str; 5] = ["kind", "zone", "station", "template", "color"];
const EDGE_KEYS: [&str; 5] = [
    "kind",
    "link_class",
    "protocol",
    "bandwidth_bps",
    "latency_ms",
];

fn node_data(n: &Node) -> [Option<String>; 5] {
    [
        Some(n.kind.to_string()),
        Some(n.zone.to_string()),
        n.station.clone(),
        n.template.clone(),
        Some(zone_color(n.zone).to_string()),
    ]
}

fn edge_data(e: &Edge) -> [Option<String>; 5] {
    [
        Some(e.kind.as_str().to_string()),
        e.link_class.clone(),
        e.protocol.clone(),
        e.params.map(|p| p.bandwidth_bps.to_string()),
        e.params.map(|p| p.latency_ms.to_string()),
    ]
}

fn graphml(model: &InfrastructureModel) -> String {
    let g = &model.graph;
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
    );
    for k in NODE_KEYS {
        let _ = writeln!(
            out,
            "  <key id=\"n_{k}\" for=\"node\" attr.name=\"{k}\" attr.type=\"string\"/>"
        );
    }
    for k in EDGE_KEYS {
        let ty = if k.ends_with("_bps") || k.ends_with("_ms") {
            "double"
        } else {
            "string"
        };
        let _ = writeln!(
            out,
            "  <key id=\"e_{k}\" for=\"edge\" attr.name=\"{k}\" attr.type=\"{ty}\"/>"
        );
    }
    out.push_str("  <graph id=\"infrastructure\" edgedefault=\"undirected\">\n");
    for n in g.nodes.values() {
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(&n.id));
        for (k, v) in NODE_KEYS.iter().zip(node_data(n)) {
            if let Some(v) = v {
                let _ = writeln!(out, "      <data key=\"n_{k}\">{}</data>", xml_escape(&v));
            }
        }
        out.push_str("    </node>\n");
    }
    for e in g.edges.values() {
        let _ = writeln!(
            out,
            "    <edge id=\"{}\" source=\"{}\" target=\"{}\">",
            xml_escape(&e.id),
            xml_escape(&e.a),
            xml_escape(&e.b)
        );
        for (k, v) in EDGE_KEYS.iter().zip(edge_data(e)) {
            if let Some(v) = v {
                let _ = writeln!(out, "      <data key=\"e_{k}\">{}</data>", xml_escape(&v));
            }
        }
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
