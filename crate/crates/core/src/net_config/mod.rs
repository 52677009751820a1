//! Configuration of the communication network: link parameters,
//! interfaces, layer-2 subnets, addresses, static routes and whitelist
//! rules.

mod addressing;
mod routing;
mod whitelist;

pub use addressing::{allocate_addresses, init_interfaces, split_subnets, Interface, Subnet};
pub(crate) use routing::PhysicalNet;
pub use routing::{
    compute_routes, install_routes, link_weight, simulate_forwarding, ConnectionPaths,
    ForwardingError, Path, Route, RoutingTables,
};
pub use whitelist::{derive_whitelist, RuleDirection, Triple, WhitelistRule};

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::{Blueprint, RouteMetric};
use crate::topology::{EdgeKind, InfrastructureGraph, LinkParams};

#[derive(Debug, Error, PartialEq)]
pub enum NetConfigError {
    #[error("physical link {edge} has no link class")]
    MissingLinkClass { edge: String },
    #[error("physical link {edge} references unknown link class {class:?}")]
    UnknownLinkClass { edge: String, class: String },
    #[error("physical link {0} is not parameterized")]
    Unparameterized(String),
    #[error("address pool exhausted: {scope} needs {required}, {available} available")]
    PoolExhausted {
        scope: String,
        required: usize,
        available: usize,
    },
    #[error("no physical path for connection {0}")]
    NoPath(String),
    #[error("conflicting routes on {owner} to {destination}: via {existing} and via {new}")]
    RouteConflict {
        owner: String,
        destination: String,
        existing: Ipv4Addr,
        new: Ipv4Addr,
    },
    #[error("host {host} would need several default gateways: {candidates:?}")]
    AmbiguousGateway {
        host: String,
        candidates: Vec<Ipv4Addr>,
    },
    #[error("interface of {0} is missing an address")]
    Unaddressed(String),
}

/// Everything derived in the configuration phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfiguration {
    pub route_metric: RouteMetric,
    pub interfaces: BTreeMap<String, Interface>,
    pub subnets: Vec<Subnet>,
    pub paths: Vec<ConnectionPaths>,
    pub routing: RoutingTables,
    #[serde(default)]
    pub whitelist: Vec<WhitelistRule>,
}

impl NetworkConfiguration {
    /// Interfaces of one node in index order.
    pub fn interfaces_of(&self, node: &str) -> impl Iterator<Item = &Interface> + '_ {
        let node = node.to_string();
        let prefix = format!("{node}/if");
        self.interfaces
            .range(prefix.clone()..)
            .take_while(move |(k, _)| k.starts_with(&prefix))
            .map(|(_, i)| i)
            .filter(move |i| i.node == node)
    }

    pub fn interface_on_link(&self, node: &str, link: &str) -> Option<&Interface> {
        self.interfaces_of(node).find(|i| i.link == link)
    }

    pub fn paths_for(&self, connection: &str) -> Option<&ConnectionPaths> {
        self.paths
            .binary_search_by(|p| p.connection.as_str().cmp(connection))
            .ok()
            .map(|i| &self.paths[i])
    }
}

/// Copies link-class quality parameters onto every physical link.
pub fn parameterize_links(
    g: &mut InfrastructureGraph,
    bp: &Blueprint,
) -> Result<(), NetConfigError> {
    for e in g.edges.values_mut() {
        if e.kind != EdgeKind::PhysicalLink {
            continue;
        }
        let class = e
            .link_class
            .as_deref()
            .ok_or_else(|| NetConfigError::MissingLinkClass { edge: e.id.clone() })?;
        let lc = bp
            .link_class(class)
            .ok_or_else(|| NetConfigError::UnknownLinkClass {
                edge: e.id.clone(),
                class: class.to_string(),
            })?;
        e.params = Some(LinkParams {
            bandwidth_bps: lc.bandwidth_bps,
            latency_ms: lc.latency_ms,
            jitter_ms: lc.jitter_ms,
            loss_rate: lc.loss_rate,
        });
    }
    Ok(())
}

/// Link parameters, interfaces, subnets, addresses and routes for a
/// finished topology. The whitelist is derived separately once data
/// points exist.
pub fn configure_network(
    g: &mut InfrastructureGraph,
    bp: &Blueprint,
    metric: RouteMetric,
) -> Result<NetworkConfiguration, NetConfigError> {
    parameterize_links(g, bp)?;
    let mut interfaces = init_interfaces(g);
    let mut subnets = split_subnets(g, &mut interfaces);
    allocate_addresses(&mut subnets, &mut interfaces, bp.address_pool)?;
    let paths = compute_routes(g, metric)?;
    let routing = install_routes(g, &interfaces, &paths, metric)?;
    Ok(NetworkConfiguration {
        route_metric: metric,
        interfaces,
        subnets,
        paths,
        routing,
        whitelist: Vec::new(),
    })
}
