//! Independent reference computations used to check the library.

use std::collections::{BTreeMap, BTreeSet};

use sgim::blueprint::RouteMetric;
use sgim::topology::{EdgeKind, InfrastructureGraph};

/// Minimum spanning-tree weight by enumerating every `(n-1)`-edge subset.
pub fn exhaustive_mst_weight(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    if n <= 1 {
        return Some(0.0);
    }
    let k = n - 1;
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..k).collect();
    if edges.len() < k {
        return None;
    }
    loop {
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        let mut acyclic = true;
        let mut w = 0.0;
        for &i in &pick {
            let (a, b, ew) = edges[i];
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra == rb {
                acyclic = false;
                break;
            }
            parent[ra] = rb;
            w += ew;
        }
        if acyclic && best.is_none_or(|b| w < b) {
            best = Some(w);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < edges.len() - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Link weight recomputed from the stored parameters.
pub fn metric_weight(g: &InfrastructureGraph, link: &str, metric: RouteMetric) -> u64 {
    let p = g.edges[link].params.expect("parameterized link");
    match metric {
        RouteMetric::Hops => 1,
        RouteMetric::Latency => (p.latency_ms * 1000.0).round() as u64,
        RouteMetric::InverseBandwidth => (1e12 / p.bandwidth_bps).round() as u64,
    }
}

/// Bellman-Ford distances from `source` over physical links; end hosts
/// other than the source never relay.
pub fn bellman_ford(
    g: &InfrastructureGraph,
    source: &str,
    metric: RouteMetric,
) -> BTreeMap<String, u64> {
    let links: Vec<(String, String, u64)> = g
        .edges_of_kind(EdgeKind::PhysicalLink)
        .map(|e| (e.a.clone(), e.b.clone(), metric_weight(g, &e.id, metric)))
        .collect();
    let relays = |n: &str| n == source || !g.nodes[n].kind.is_endpoint();
    let mut dist: BTreeMap<String, u64> = BTreeMap::from([(source.to_string(), 0)]);
    for _ in 0..g.nodes.len() {
        let mut changed = false;
        for (a, b, w) in &links {
            for (x, y) in [(a, b), (b, a)] {
                let Some(&dx) = dist.get(x) else { continue };
                if !relays(x) {
                    continue;
                }
                let cand = dx + w;
                if dist.get(y).is_none_or(|&dy| cand < dy) {
                    dist.insert(y.clone(), cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Devices below `master` along master-to-slave logical connections.
pub fn descendants(g: &InfrastructureGraph, master: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![master.to_string()];
    while let Some(m) = stack.pop() {
        for e in g.edges_of_kind(EdgeKind::LogicalConnection) {
            if e.a == m && out.insert(e.b.clone()) {
                stack.push(e.b.clone());
            }
        }
    }
    out
}
