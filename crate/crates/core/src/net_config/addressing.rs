use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::NetConfigError;
use crate::topology::{EdgeKind, InfrastructureGraph, UnionFind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    /// `<node>/if<index>`.
    pub id: String,
    pub node: String,
    pub index: u32,
    /// Physical link this interface terminates.
    pub link: String,
    pub mac: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subnet: Option<String>,
    /// Host address with the subnet prefix length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<Ipv4Net>,
}

impl Interface {
    pub fn ip(&self) -> Option<Ipv4Addr> {
        self.address.map(|a| a.addr())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subnet {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<Ipv4Net>,
    /// Member interface ids, sorted.
    pub members: Vec<String>,
}

/// Locally administered unicast MAC from a hash of `(node, index, probe)`.
fn mac_for(node: &str, index: u32, probe: u32) -> [u8; 6] {
    let mut h = Sha256::new();
    h.update(node.as_bytes());
    h.update([0]);
    h.update(index.to_be_bytes());
    h.update(probe.to_be_bytes());
    let d = h.finalize();
    let mut mac = [0u8; 6];
    mac.copy_from_slice(&d[..6]);
    mac[0] = (mac[0] & 0b1111_1100) | 0b0000_0010;
    mac
}

fn format_mac(mac: [u8; 6]) -> String {
    mac.iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(":")
}

/// One interface per incident physical link, indexed in link-id
/// order, with deterministic MACs unique across the model.
pub fn init_interfaces(g: &InfrastructureGraph) -> BTreeMap<String, Interface> {
    let mut incident: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in g.edges_of_kind(EdgeKind::PhysicalLink) {
        incident.entry(&e.a).or_default().push(&e.id);
        incident.entry(&e.b).or_default().push(&e.id);
    }
    let mut used = BTreeSet::new();
    let mut out = BTreeMap::new();
    for (node, mut links) in incident {
        links.sort();
        for (i, link) in links.into_iter().enumerate() {
            let index = i as u32;
            let mut probe = 0;
            let mac = loop {
                let m = mac_for(node, index, probe);
                if used.insert(m) {
                    break m;
                }
                probe += 1;
            };
            let id = format!("{node}/if{index}");
            out.insert(
                id.clone(),
                Interface {
                    id,
                    node: node.to_string(),
                    index,
                    link: link.to_string(),
                    mac: format_mac(mac),
                    subnet: None,
                    address: None,
                },
            );
        }
    }
    out
}

/// Layer-2 subnets are the components left after deleting layer-3
/// nodes. An L3 interface joins the component on the far side of its link;
/// a link between two L3 nodes is a subnet of its own. Subnets are named
/// after their smallest member interface and returned sorted by id.
pub fn split_subnets(
    g: &InfrastructureGraph,
    interfaces: &mut BTreeMap<String, Interface>,
) -> Vec<Subnet> {
    let is_l3 = |n: &str| g.node(n).is_some_and(|n| n.kind.is_l3());
    let nodes: Vec<&str> = g.nodes.keys().map(String::as_str).collect();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut uf = UnionFind::new(nodes.len());
    for e in g.edges_of_kind(EdgeKind::PhysicalLink) {
        if !is_l3(&e.a) && !is_l3(&e.b) {
            uf.union(index[e.a.as_str()], index[e.b.as_str()]);
        }
    }

    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Key<'a> {
        Component(usize),
        PointToPoint(&'a str),
    }
    let mut groups: BTreeMap<Key, Vec<String>> = BTreeMap::new();
    for iface in interfaces.values() {
        let link = &g.edges[&iface.link];
        let far = link.other(&iface.node).expect("interface on its own link");
        let key = match (is_l3(&iface.node), is_l3(far)) {
            (false, _) => Key::Component(uf.find(index[iface.node.as_str()])),
            (true, false) => Key::Component(uf.find(index[far])),
            (true, true) => Key::PointToPoint(&link.id),
        };
        groups.entry(key).or_default().push(iface.id.clone());
    }

    let mut subnets: Vec<Subnet> = groups
        .into_values()
        .map(|mut members| {
            members.sort();
            Subnet {
                id: format!("sn/{}", members[0]),
                prefix: None,
                members,
            }
        })
        .collect();
    subnets.sort_by(|a, b| a.id.cmp(&b.id));
    for s in &subnets {
        for m in &s.members {
            interfaces.get_mut(m).expect("member exists").subnet = Some(s.id.clone());
        }
    }
    subnets
}

/// Subnet `k` gets the `k`-th /24 of the pool; members get hosts
/// `.1` upwards in interface-id order.
pub fn allocate_addresses(
    subnets: &mut [Subnet],
    interfaces: &mut BTreeMap<String, Interface>,
    pool: Ipv4Net,
) -> Result<(), NetConfigError> {
    let available = 1usize << (24 - pool.prefix_len().min(24));
    if subnets.len() > available {
        return Err(NetConfigError::PoolExhausted {
            scope: format!("{} subnets", pool),
            required: subnets.len(),
            available,
        });
    }
    let mut blocks = pool.subnets(24).expect("pool prefix is at most /24");
    for s in subnets.iter_mut() {
        if s.members.len() > 254 {
            return Err(NetConfigError::PoolExhausted {
                scope: format!("hosts of {}", s.id),
                required: s.members.len(),
                available: 254,
            });
        }
        let block = blocks.next().expect("count checked");
        let base = u32::from(block.network());
        for (i, m) in s.members.iter().enumerate() {
            let addr = Ipv4Addr::from(base + i as u32 + 1);
            interfaces.get_mut(m).expect("member exists").address =
                Some(Ipv4Net::new(addr, 24).expect("valid prefix"));
        }
        s.prefix = Some(block);
    }
    Ok(())
}
