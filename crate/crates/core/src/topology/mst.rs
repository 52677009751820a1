use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub id: String,
    pub a: String,
    pub b: String,
    pub weight: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("candidate graph is disconnected: components {components:?}")]
pub struct MstError {
    pub components: Vec<Vec<String>>,
}

/// Disjoint-set forest over dense indices.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over `candidates` spanning `nodes`.
///
/// Edges are scanned by `(weight, id)`, which yields a minimum-weight tree
/// whose sorted edge-id sequence is lexicographically smallest among all
/// minimum trees. Returned edges are sorted by id. Candidates touching
/// unknown nodes and self-loops are ignored.
pub fn minimum_spanning_tree(
    nodes: &[String],
    candidates: &[WeightedEdge],
) -> Result<Vec<WeightedEdge>, MstError> {
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut order: Vec<&WeightedEdge> = candidates
        .iter()
        .filter(|e| {
            e.a != e.b && index.contains_key(e.a.as_str()) && index.contains_key(e.b.as_str())
        })
        .collect();
    order.sort_by(|x, y| x.weight.total_cmp(&y.weight).then_with(|| x.id.cmp(&y.id)));

    let mut uf = UnionFind::new(nodes.len());
    let mut tree = Vec::new();
    for e in order {
        if uf.union(index[e.a.as_str()], index[e.b.as_str()]) {
            tree.push(e.clone());
        }
    }

    if !nodes.is_empty() && tree.len() + 1 < index.len() {
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (name, i) in &index {
            groups
                .entry(uf.find(*i))
                .or_default()
                .push(name.to_string());
        }
        let mut components: Vec<Vec<String>> = groups.into_values().collect();
        components.sort();
        return Err(MstError { components });
    }
    tree.sort_by(|x, y| x.id.cmp(&y.id));
    Ok(tree)
}
