use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use super::{NetConfigError, NetworkConfiguration};
use crate::blueprint::Blueprint;
use crate::datapoint::DataPointMap;
use crate::topology::InfrastructureGraph;

/// `(COA, IOA, TypeID)` of one exchanged data point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub coa: u32,
    pub ioa: u32,
    pub type_id: String,
}

/// Session establishment direction; replies on an established session are
/// implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleDirection {
    MasterToSlave,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhitelistRule {
    pub connection: String,
    pub src_node: String,
    pub dst_node: String,
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
    pub protocol: String,
    pub port: u16,
    pub direction: RuleDirection,
    /// Points held by the slave, i.e. everything the session may carry.
    pub points: Vec<Triple>,
}

/// One rule per logical connection, sorted by `(src, dst, port)`.
pub fn derive_whitelist(
    g: &InfrastructureGraph,
    net: &NetworkConfiguration,
    points: &DataPointMap,
    bp: &Blueprint,
) -> Result<Vec<WhitelistRule>, NetConfigError> {
    let mut rules = Vec::new();
    for c in g.logical_connections() {
        let paths = net
            .paths_for(&c.id)
            .ok_or_else(|| NetConfigError::NoPath(c.id.clone()))?;
        let fwd = &paths.forward;
        let addr = |node: &str, link: Option<&String>| {
            link.and_then(|l| net.interface_on_link(node, l))
                .and_then(|i| i.ip())
                .ok_or_else(|| NetConfigError::Unaddressed(node.to_string()))
        };
        let protocol = c.protocol.clone().unwrap_or_default();
        let port = bp.protocol(&protocol).map_or(0, |p| p.port as u16);
        let mut triples: Vec<Triple> = points
            .points(&c.b)
            .iter()
            .map(|p| Triple {
                coa: p.coa,
                ioa: p.ioa,
                type_id: p.type_id.clone(),
            })
            .collect();
        triples.sort();
        rules.push(WhitelistRule {
            connection: c.id.clone(),
            src_node: c.a.clone(),
            dst_node: c.b.clone(),
            src: addr(&c.a, fwd.links.first())?,
            dst: addr(&c.b, fwd.links.last())?,
            protocol,
            port,
            direction: RuleDirection::MasterToSlave,
            points: triples,
        });
    }
    rules.sort_by(|x, y| {
        (x.src, x.dst, x.port, &x.connection).cmp(&(y.src, y.dst, y.port, &y.connection))
    });
    Ok(rules)
}
