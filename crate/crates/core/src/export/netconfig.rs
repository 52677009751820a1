use serde_json::{json, Map, Value};

use super::ExportError;
use crate::model::{InfrastructureModel, Stage};
use crate::topology::EdgeKind;

pub const NETCONFIG_SCHEMA: &str = "netconfig-v1";

/// Simulator-oriented network configuration document (`netconfig-v1`).
/// Keys are sorted at every level.
pub fn export_network_config(model: &InfrastructureModel) -> Result<String, ExportError> {
    let (Some(net), Some(points)) = (&model.network, &model.datapoints) else {
        return Err(ExportError::Incomplete(vec![Stage::Configuration]));
    };
    if let Some(i) = net.interfaces.values().find(|i| i.address.is_none()) {
        return Err(ExportError::Unaddressed(i.id.clone()));
    }
    let g = &model.graph;

    let nodes: Vec<Value> = g
        .devices()
        .map(|n| {
            let interfaces: Vec<Value> = net
                .interfaces_of(&n.id)
                .map(|i| {
                    json!({
                        "id": i.id,
                        "index": i.index,
                        "link": i.link,
                        "mac": i.mac,
                        "address": i.address.map(|a| a.to_string()),
                        "subnet": i.subnet,
                    })
                })
                .collect();
            let table: Vec<Value> = points
                .points(&n.id)
                .iter()
                .map(|p| {
                    json!({
                        "coa": p.coa,
                        "ioa": p.ioa,
                        "type_id": p.type_id,
                        "cot": p.cot,
                        "direction": p.direction.as_str(),
                        "size_bytes": p.size_bytes,
                        "source": p.source.to_string(),
                    })
                })
                .collect();
            let mut obj = Map::new();
            obj.insert("id".into(), json!(n.id));
            obj.insert("kind".into(), json!(n.kind.to_string()));
            obj.insert("zone".into(), json!(n.zone.as_str()));
            obj.insert("station".into(), json!(n.station));
            obj.insert("template".into(), json!(n.template));
            obj.insert("interfaces".into(), Value::Array(interfaces));
            obj.insert("data_points".into(), Value::Array(table));
            if let Some(gw) = net.routing.default_gateways.get(&n.id) {
                obj.insert("default_gateway".into(), json!(gw.to_string()));
            }
            Value::Object(obj)
        })
        .collect();

    let links: Vec<Value> = g
        .edges_of_kind(EdgeKind::PhysicalLink)
        .map(|e| {
            let p = e.params.unwrap_or(crate::topology::LinkParams {
                bandwidth_bps: 0.0,
                latency_ms: 0.0,
                jitter_ms: 0.0,
                loss_rate: 0.0,
            });
            json!({
                "id": e.id,
                "a": e.a,
                "b": e.b,
                "link_class": e.link_class,
                "bandwidth_bps": p.bandwidth_bps,
                "latency_ms": p.latency_ms,
                "jitter_ms": p.jitter_ms,
                "loss_rate": p.loss_rate,
                "distance_km": e.distance_km,
            })
        })
        .collect();

    let mut routes = Map::new();
    for r in &net.routing.routes {
        let entry = routes
            .entry(r.owner.clone())
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(v) = entry {
            v.push(json!({
                "destination": r.destination.to_string(),
                "next_hop": r.next_hop.to_string(),
                "interface": r.interface,
                "metric": r.metric,
            }));
        }
    }

    let mut applications = Vec::new();
    for rule in &net.whitelist {
        applications.push(json!({
            "connection": rule.connection,
            "protocol": rule.protocol,
            "port": rule.port,
            "master": { "node": rule.src_node, "address": rule.src.to_string() },
            "slave": { "node": rule.dst_node, "address": rule.dst.to_string() },
            "data_point_table": rule.dst_node,
        }));
    }

    let subnets: Vec<Value> = net
        .subnets
        .iter()
        .map(|s| {
            json!({
                "id": s.id,
                "prefix": s.prefix.map(|p| p.to_string()),
                "members": s.members,
            })
        })
        .collect();

    let doc = json!({
        "schema": NETCONFIG_SCHEMA,
        "grid_fingerprint": model.grid_fingerprint,
        "blueprint_fingerprint": model.blueprint_fingerprint,
        "route_metric": net.route_metric,
        "nodes": nodes,
        "links": links,
        "subnets": subnets,
        "routes": routes,
        "applications": applications,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json value serializes");
    s.push('\n');
    Ok(s)
}
