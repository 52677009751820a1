use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Interface, NetConfigError};
use crate::blueprint::RouteMetric;
use crate::topology::{Edge, EdgeKind, InfrastructureGraph};

/// A physical path; `links[i]` joins `nodes[i]` and `nodes[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<String>,
    pub links: Vec<String>,
    pub weight: u64,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.links.len()
    }
}

/// Both directions of one logical connection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionPaths {
    pub connection: String,
    pub master: String,
    pub slave: String,
    pub forward: Path,
    pub reverse: Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub owner: String,
    pub destination: Ipv4Net,
    pub next_hop: Ipv4Addr,
    /// Egress interface id.
    pub interface: String,
    /// Remaining path weight to the destination.
    pub metric: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingTables {
    /// Host routes on layer-3 nodes, sorted by owner then destination.
    pub routes: Vec<Route>,
    /// Default gateway of every end host that needs one.
    pub default_gateways: BTreeMap<String, Ipv4Addr>,
}

impl RoutingTables {
    pub fn lookup(&self, owner: &str, destination: Ipv4Addr) -> Option<&Route> {
        let dest = Ipv4Net::new(destination, 32).expect("host prefix");
        self.routes
            .binary_search_by(|r| (r.owner.as_str(), r.destination).cmp(&(owner, dest)))
            .ok()
            .map(|i| &self.routes[i])
    }

    pub fn routes_of<'a>(&'a self, owner: &'a str) -> impl Iterator<Item = &'a Route> + 'a {
        self.routes.iter().filter(move |r| r.owner == owner)
    }
}

/// Integer weight of a parameterized link: microseconds of latency, one per
/// hop, or picoseconds per bit.
pub fn link_weight(edge: &Edge, metric: RouteMetric) -> Result<u64, NetConfigError> {
    let p = edge
        .params
        .ok_or_else(|| NetConfigError::Unparameterized(edge.id.clone()))?;
    Ok(match metric {
        RouteMetric::Latency => (p.latency_ms * 1000.0).round() as u64,
        RouteMetric::Hops => 1,
        RouteMetric::InverseBandwidth => (1e12 / p.bandwidth_bps).round() as u64,
    })
}

/// Weighted physical adjacency; end hosts never forward.
pub(crate) struct PhysicalNet<'a> {
    adj: BTreeMap<&'a str, Vec<(&'a str, &'a str, u64)>>,
    hosts: BTreeSet<&'a str>,
}

impl<'a> PhysicalNet<'a> {
    pub fn new(g: &'a InfrastructureGraph, metric: RouteMetric) -> Result<Self, NetConfigError> {
        let mut adj: BTreeMap<&str, Vec<(&str, &str, u64)>> = BTreeMap::new();
        for e in g.edges_of_kind(EdgeKind::PhysicalLink) {
            let w = link_weight(e, metric)?;
            adj.entry(&e.a).or_default().push((&e.b, &e.id, w));
            adj.entry(&e.b).or_default().push((&e.a, &e.id, w));
        }
        let hosts = g
            .devices()
            .filter(|n| n.kind.is_endpoint())
            .map(|n| n.id.as_str())
            .collect();
        Ok(PhysicalNet { adj, hosts })
    }

    pub fn can_transit(&self, node: &str) -> bool {
        !self.hosts.contains(node)
    }

    /// Minimum `(weight, hops, node sequence)` paths from `source`, with
    /// intermediate nodes restricted by `transit`.
    pub fn shortest_from(
        &self,
        source: &'a str,
        transit: impl Fn(&str) -> bool,
    ) -> BTreeMap<&'a str, Path> {
        type Key<'k> = (u64, usize, Vec<&'k str>, Vec<&'k str>);
        let mut done: BTreeMap<&str, Path> = BTreeMap::new();
        let mut heap: BinaryHeap<Reverse<Key>> = BinaryHeap::new();
        heap.push(Reverse((0, 0, vec![source], Vec::new())));
        while let Some(Reverse((w, h, nodes, links))) = heap.pop() {
            let at = *nodes.last().expect("non-empty path");
            if done.contains_key(at) {
                continue;
            }
            done.insert(
                at,
                Path {
                    nodes: nodes.iter().map(|s| s.to_string()).collect(),
                    links: links.iter().map(|s| s.to_string()).collect(),
                    weight: w,
                },
            );
            if at != source && !transit(at) {
                continue;
            }
            for (next, link, lw) in self.adj.get(at).into_iter().flatten() {
                if done.contains_key(next) {
                    continue;
                }
                let mut n = nodes.clone();
                n.push(next);
                let mut l = links.clone();
                l.push(link);
                heap.push(Reverse((w + lw, h + 1, n, l)));
            }
        }
        done
    }

    fn weight_of(&self, a: &str, link: &str) -> u64 {
        self.adj[a]
            .iter()
            .find(|(_, l, _)| *l == link)
            .map(|(_, _, w)| *w)
            .expect("link incident to node")
    }
}

/// Optimal physical path for both directions of every logical connection,
/// sorted by connection id. Ties in weight go to fewer hops, then to the
/// lexicographically smallest node sequence.
pub fn compute_routes(
    g: &InfrastructureGraph,
    metric: RouteMetric,
) -> Result<Vec<ConnectionPaths>, NetConfigError> {
    let net = PhysicalNet::new(g, metric)?;
    let conns: Vec<&Edge> = g.logical_connections().collect();
    let sources: BTreeSet<&str> = conns
        .iter()
        .flat_map(|c| [c.a.as_str(), c.b.as_str()])
        .collect();
    let trees: BTreeMap<&str, BTreeMap<&str, Path>> = sources
        .into_par_iter()
        .map(|s| (s, net.shortest_from(s, |n| net.can_transit(n))))
        .collect();
    conns
        .iter()
        .map(|c| {
            let get = |from: &str, to: &str| {
                trees[from]
                    .get(to)
                    .cloned()
                    .ok_or_else(|| NetConfigError::NoPath(c.id.clone()))
            };
            Ok(ConnectionPaths {
                connection: c.id.clone(),
                master: c.a.clone(),
                slave: c.b.clone(),
                forward: get(&c.a, &c.b)?,
                reverse: get(&c.b, &c.a)?,
            })
        })
        .collect()
}

fn interface_index(interfaces: &BTreeMap<String, Interface>) -> BTreeMap<(&str, &str), &Interface> {
    interfaces
        .values()
        .map(|i| ((i.node.as_str(), i.link.as_str()), i))
        .collect()
}

/// Materializes paths as host routes on every layer-3 node they cross and
/// a default gateway on end hosts. The next hop is the address of the next
/// layer-3 node, or of the destination itself, across the intervening
/// layer-2 segment.
pub fn install_routes(
    g: &InfrastructureGraph,
    interfaces: &BTreeMap<String, Interface>,
    paths: &[ConnectionPaths],
    metric: RouteMetric,
) -> Result<RoutingTables, NetConfigError> {
    let by_link = interface_index(interfaces);
    let iface = |node: &str, link: &str| -> Result<&Interface, NetConfigError> {
        by_link
            .get(&(node, link))
            .copied()
            .filter(|i| i.address.is_some())
            .ok_or_else(|| NetConfigError::Unaddressed(node.to_string()))
    };
    let is_l3 = |n: &str| g.node(n).is_some_and(|n| n.kind.is_l3());

    let mut routes: BTreeMap<(String, Ipv4Net), Route> = BTreeMap::new();
    let mut gateways: BTreeMap<String, BTreeSet<Ipv4Addr>> = BTreeMap::new();
    for cp in paths {
        for path in [&cp.forward, &cp.reverse] {
            let k = path.nodes.len() - 1;
            if k == 0 {
                continue;
            }
            let dst = iface(&path.nodes[k], &path.links[k - 1])?
                .ip()
                .expect("addressed");
            let dst_net = Ipv4Net::new(dst, 32).expect("host prefix");
            let stops: Vec<usize> = (1..=k)
                .filter(|&j| j == k || is_l3(&path.nodes[j]))
                .collect();
            if !is_l3(&path.nodes[0]) && stops[0] < k {
                let j = stops[0];
                let gw = iface(&path.nodes[j], &path.links[j - 1])?
                    .ip()
                    .expect("addressed");
                gateways
                    .entry(path.nodes[0].clone())
                    .or_default()
                    .insert(gw);
            }
            let mut suffix = vec![0u64; k + 1];
            for i in (0..k).rev() {
                suffix[i] = suffix[i + 1] + link_weight(&g.edges[&path.links[i]], metric)?;
            }
            for i in (0..k).filter(|&i| is_l3(&path.nodes[i])) {
                let j = *stops
                    .iter()
                    .find(|&&j| j > i)
                    .expect("destination is a stop");
                let next_hop = iface(&path.nodes[j], &path.links[j - 1])?
                    .ip()
                    .expect("addressed");
                let egress = iface(&path.nodes[i], &path.links[i])?;
                let owner = path.nodes[i].clone();
                let route = Route {
                    owner: owner.clone(),
                    destination: dst_net,
                    next_hop,
                    interface: egress.id.clone(),
                    metric: suffix[i],
                };
                match routes.get(&(owner.clone(), dst_net)) {
                    Some(existing) if existing.next_hop != next_hop => {
                        return Err(NetConfigError::RouteConflict {
                            owner,
                            destination: dst_net.to_string(),
                            existing: existing.next_hop,
                            new: next_hop,
                        })
                    }
                    Some(_) => {}
                    None => {
                        routes.insert((owner, dst_net), route);
                    }
                }
            }
        }
    }
    let mut default_gateways = BTreeMap::new();
    for (host, set) in gateways {
        if set.len() > 1 {
            return Err(NetConfigError::AmbiguousGateway {
                host,
                candidates: set.into_iter().collect(),
            });
        }
        default_gateways.insert(host, set.into_iter().next().expect("non-empty"));
    }
    Ok(RoutingTables {
        routes: routes.into_values().collect(),
        default_gateways,
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum ForwardingError {
    #[error("unknown destination address {0}")]
    UnknownDestination(Ipv4Addr),
    #[error("{at} has no route to {destination}")]
    NoRoute { at: String, destination: Ipv4Addr },
    #[error("{host} has no default gateway")]
    NoGateway { host: String },
    #[error("layer-2 segment from {from} to {to} is not connected")]
    Segment { from: String, to: String },
    #[error("forwarding loop at {0}")]
    Loop(String),
}

/// Delivers a packet hop by hop using only the installed tables, with
/// layer-2 segments crossed on their shortest switch path. Returns the
/// physical path taken.
pub fn simulate_forwarding(
    g: &InfrastructureGraph,
    interfaces: &BTreeMap<String, Interface>,
    tables: &RoutingTables,
    metric: RouteMetric,
    source: &str,
    destination: Ipv4Addr,
) -> Result<Path, ForwardingError> {
    let net = PhysicalNet::new(g, metric).expect("links parameterized");
    let by_addr: BTreeMap<Ipv4Addr, &Interface> = interfaces
        .values()
        .filter_map(|i| i.ip().map(|a| (a, i)))
        .collect();
    let dst_if = by_addr
        .get(&destination)
        .copied()
        .ok_or(ForwardingError::UnknownDestination(destination))?;
    let is_l3 = |n: &str| g.node(n).is_some_and(|n| n.kind.is_l3());
    let attached = |node: &str, subnet: &Option<String>| {
        interfaces
            .values()
            .find(|i| i.node == node && i.subnet == *subnet)
    };

    let mut path = Path {
        nodes: vec![source.to_string()],
        links: Vec::new(),
        weight: 0,
    };
    let mut seen: BTreeSet<String> = BTreeSet::from([source.to_string()]);
    let mut cur = source.to_string();
    while cur != dst_if.node {
        let (target, egress): (Ipv4Addr, &Interface) = if let Some(i) =
            attached(&cur, &dst_if.subnet)
        {
            (destination, i)
        } else if is_l3(&cur) {
            let r = tables
                .lookup(&cur, destination)
                .ok_or_else(|| ForwardingError::NoRoute {
                    at: cur.clone(),
                    destination,
                })?;
            (r.next_hop, &interfaces[&r.interface])
        } else {
            let gw = tables
                .default_gateways
                .get(&cur)
                .ok_or_else(|| ForwardingError::NoGateway { host: cur.clone() })?;
            let gw_if = by_addr[gw];
            let out = attached(&cur, &gw_if.subnet)
                .ok_or_else(|| ForwardingError::NoGateway { host: cur.clone() })?;
            (*gw, out)
        };
        let target_if = by_addr
            .get(&target)
            .copied()
            .ok_or(ForwardingError::UnknownDestination(target))?;

        // Leave through the egress link, then switch to the target.
        let first = g.edges[&egress.link]
            .other(&cur)
            .expect("egress on own link")
            .to_string();
        let mut seg_nodes = vec![first.clone()];
        let mut seg_links = vec![egress.link.clone()];
        let mut seg_weight = net.weight_of(&cur, &egress.link);
        if first != target_if.node {
            let l2 = |n: &str| !is_l3(n) && net.can_transit(n);
            if !l2(&first) {
                return Err(ForwardingError::Segment {
                    from: cur.clone(),
                    to: target_if.node.clone(),
                });
            }
            let tree = net.shortest_from(g.nodes.get_key_value(&first).expect("node exists").0, l2);
            let p = tree
                .get(target_if.node.as_str())
                .filter(|p| p.links.last() == Some(&target_if.link))
                .ok_or_else(|| ForwardingError::Segment {
                    from: cur.clone(),
                    to: target_if.node.clone(),
                })?;
            seg_nodes.extend(p.nodes[1..].iter().cloned());
            seg_links.extend(p.links.iter().cloned());
            seg_weight += p.weight;
        }
        for n in &seg_nodes {
            if !seen.insert(n.clone()) {
                return Err(ForwardingError::Loop(n.clone()));
            }
        }
        path.nodes.extend(seg_nodes);
        path.links.extend(seg_links);
        path.weight += seg_weight;
        cur = target_if.node.clone();
    }
    Ok(path)
}
