//! Network planning over a finished model: traffic estimation, link load
//! accumulation, capacity checks and greedy reinforcement.
//!
//! Rates are exact rationals in bit/s so that sums over flows can be
//! compared without rounding. Capacity checks compare against the
//! floating-point bandwidth and threshold of the blueprint.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::{Blueprint, Direction, RouteMetric};
use crate::datapoint::DataPoint;
use crate::net_config::PhysicalNet;
use crate::net_config::{link_weight, ConnectionPaths, NetConfigError, Path};
use crate::topology::{Edge, EdgeKind, InfrastructureGraph, Station};

/// Exact rate in bit/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rate(pub Ratio<i128>);

impl Rate {
    pub fn zero() -> Self {
        Rate(Ratio::from_integer(0))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl std::ops::Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Rate {
    fn add_assign(&mut self, rhs: Rate) {
        self.0 += rhs.0;
    }
}

impl std::ops::Sub for Rate {
    type Output = Rate;
    fn sub(self, rhs: Rate) -> Rate {
        Rate(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Rate {
    fn sum<I: Iterator<Item = Rate>>(iter: I) -> Rate {
        iter.fold(Rate::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |_| format!("invalid rate {s:?}");
        match s.split_once('/') {
            Some((n, d)) => {
                let d: i128 = d.parse().map_err(bad)?;
                if d == 0 {
                    return Err(format!("invalid rate {s:?}"));
                }
                Ok(Rate(Ratio::new(n.parse().map_err(bad)?, d)))
            }
            None => Ok(Rate(Ratio::from_integer(s.parse().map_err(bad)?))),
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Seconds as whole microseconds, at least one.
fn micros(seconds: f64) -> i128 {
    ((seconds * 1e6).round() as i128).max(1)
}

fn bits_per_second(bytes: u64, seconds: f64) -> Rate {
    Rate(Ratio::new(bytes as i128 * 8 * 1_000_000, micros(seconds)))
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanningError {
    #[error("flow {0} has no path")]
    NoPath(String),
    #[error(transparent)]
    Net(#[from] NetConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDemand {
    pub connection: String,
    pub bytes_per_cycle: u64,
    pub cycle_seconds: f64,
    pub mean_bps: Rate,
    pub burst_bps: Rate,
}

/// Demand of one slave's points towards its master: monitoring points each
/// cycle, and in the burst case every point within one burst window.
pub fn estimate_device_traffic(
    connection: &str,
    points: &[DataPoint],
    cycle_seconds: f64,
    overhead_bytes: u32,
    burst_window_seconds: f64,
) -> FlowDemand {
    let per_point = |p: &DataPoint| u64::from(p.size_bytes) + u64::from(overhead_bytes);
    let bytes_per_cycle: u64 = points
        .iter()
        .filter(|p| p.direction == Direction::Monitoring)
        .map(per_point)
        .sum();
    let all_bytes: u64 = points.iter().map(per_point).sum();
    let mean_bps = bits_per_second(bytes_per_cycle, cycle_seconds);
    let burst_bps = bits_per_second(all_bytes, burst_window_seconds).max(mean_bps);
    FlowDemand {
        connection: connection.to_string(),
        bytes_per_cycle,
        cycle_seconds,
        mean_bps,
        burst_bps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkLoad {
    pub link: String,
    pub mean_bps: Rate,
    pub burst_bps: Rate,
    /// Share of `mean_bps` flowing from the link's `a` end to its `b` end.
    pub mean_a_to_b: Rate,
    pub mean_b_to_a: Rate,
    pub utilization: f64,
}

/// Sums flow demands over the physical links of each flow's path. Every
/// physical link of the graph appears, loaded or not.
pub fn accumulate_link_loads(
    g: &InfrastructureGraph,
    flows: &[FlowDemand],
    paths: &BTreeMap<String, Path>,
) -> Result<Vec<LinkLoad>, PlanningError> {
    let mut acc: BTreeMap<&str, (Rate, Rate, Rate, Rate)> = g
        .edges_of_kind(EdgeKind::PhysicalLink)
        .map(|e| (e.id.as_str(), Default::default()))
        .collect();
    for f in flows {
        let path = paths
            .get(&f.connection)
            .ok_or_else(|| PlanningError::NoPath(f.connection.clone()))?;
        for (i, link) in path.links.iter().enumerate() {
            let Some(slot) = acc.get_mut(link.as_str()) else {
                return Err(PlanningError::NoPath(f.connection.clone()));
            };
            slot.0 += f.mean_bps;
            slot.1 += f.burst_bps;
            if g.edges[link].a == path.nodes[i] {
                slot.2 += f.mean_bps;
            } else {
                slot.3 += f.mean_bps;
            }
        }
    }
    Ok(acc
        .into_iter()
        .map(|(link, (mean, burst, ab, ba))| {
            let bw = g.edges[link]
                .params
                .map_or(f64::INFINITY, |p| p.bandwidth_bps);
            LinkLoad {
                link: link.to_string(),
                mean_bps: mean,
                burst_bps: burst,
                mean_a_to_b: ab,
                mean_b_to_a: ba,
                utilization: mean.to_f64() / bw,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub link: String,
    pub burst_bps: Rate,
    pub limit_bps: f64,
}

/// Links whose burst load strictly exceeds `bandwidth × threshold`.
pub fn check_capacity(
    g: &InfrastructureGraph,
    loads: &[LinkLoad],
    threshold: f64,
) -> Vec<Violation> {
    loads
        .iter()
        .filter_map(|l| {
            let bw = g.edges.get(&l.link)?.params?.bandwidth_bps;
            let limit = bw * threshold;
            (l.burst_bps.to_f64() > limit).then(|| Violation {
                link: l.link.clone(),
                burst_bps: l.burst_bps,
                limit_bps: limit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub violated_link: String,
    /// Id of the proposed physical link between two station gateways.
    pub candidate: String,
    pub a: String,
    pub b: String,
    pub distance_km: f64,
    pub link_class: String,
    pub load_reduction_bps: Rate,
}

/// Greedy single-link augmentation. For every violated link, each absent
/// gateway-to-gateway link is tried in turn; paths of the flows crossing
/// the violated link are recomputed and the candidate with the largest
/// burst reduction wins, ties going to the shorter and then the smaller
/// id. Returns proposals sorted by reduction, largest first, and notes for
/// violations no single link relieves.
#[allow(clippy::too_many_arguments)]
pub fn suggest_reinforcement(
    g: &InfrastructureGraph,
    stations: &[Station],
    flows: &[FlowDemand],
    paths: &BTreeMap<String, Path>,
    violations: &[Violation],
    metric: RouteMetric,
    link_class: &str,
    bp: &Blueprint,
) -> Result<(Vec<Proposal>, Vec<String>), PlanningError> {
    let mut proposals = Vec::new();
    let mut notes = Vec::new();
    let Some(lc) = bp.link_class(link_class) else {
        notes.push(format!("reinforcement link class {link_class:?} unknown"));
        return Ok((proposals, notes));
    };
    let gateways: Vec<&Station> = stations.iter().filter(|s| s.gateway.is_some()).collect();
    let flow_by_id: BTreeMap<&str, &FlowDemand> =
        flows.iter().map(|f| (f.connection.as_str(), f)).collect();

    for v in violations {
        let crossing: Vec<(&str, &Path)> = paths
            .iter()
            .filter(|(_, p)| p.links.contains(&v.link))
            .map(|(c, p)| (c.as_str(), p))
            .collect();
        let before: Rate = crossing
            .iter()
            .filter_map(|(c, _)| flow_by_id.get(c).map(|f| f.burst_bps))
            .sum();
        let mut best: Option<(Rate, f64, String, &Station, &Station)> = None;
        for (i, a) in gateways.iter().enumerate() {
            for b in &gateways[i + 1..] {
                let (ga, gb) = (a.gateway.as_deref().unwrap(), b.gateway.as_deref().unwrap());
                if g.link_between(ga, gb).is_some() {
                    continue;
                }
                let mut trial = g.clone();
                let mut e = Edge::physical(ga, gb, link_class);
                e.params = Some(crate::topology::LinkParams {
                    bandwidth_bps: lc.bandwidth_bps,
                    latency_ms: lc.latency_ms,
                    jitter_ms: lc.jitter_ms,
                    loss_rate: lc.loss_rate,
                });
                let id = e.id.clone();
                trial.edges.insert(id.clone(), e);
                let net = PhysicalNet::new(&trial, metric)?;
                let mut after = Rate::zero();
                let mut trees: BTreeMap<&str, BTreeMap<&str, Path>> = BTreeMap::new();
                for (c, p) in &crossing {
                    let src = trial.nodes.get_key_value(&p.nodes[0]).unwrap().0.as_str();
                    let dst = p.nodes.last().unwrap().as_str();
                    let tree = trees
                        .entry(src)
                        .or_insert_with(|| net.shortest_from(src, |n| net.can_transit(n)));
                    if tree.get(dst).is_some_and(|np| np.links.contains(&v.link)) {
                        after += flow_by_id.get(c).map_or(Rate::zero(), |f| f.burst_bps);
                    }
                }
                let reduction = before - after;
                if reduction <= Rate::zero() {
                    continue;
                }
                let dist = a.coordinates.distance(&b.coordinates);
                let better = match &best {
                    None => true,
                    Some((r, d, bid, _, _)) => {
                        reduction > *r
                            || (reduction == *r && (dist < *d || (dist == *d && id < *bid)))
                    }
                };
                if better {
                    best = Some((reduction, dist, id, a, b));
                }
            }
        }
        match best {
            Some((reduction, dist, id, a, b)) => proposals.push(Proposal {
                violated_link: v.link.clone(),
                candidate: id,
                a: a.gateway.clone().unwrap(),
                b: b.gateway.clone().unwrap(),
                distance_km: dist,
                link_class: link_class.to_string(),
                load_reduction_bps: reduction,
            }),
            None => notes.push(format!(
                "violation on {} cannot be relieved by a single added link",
                v.link
            )),
        }
    }
    proposals.sort_by(|x, y| {
        y.load_reduction_bps
            .cmp(&x.load_reduction_bps)
            .then_with(|| x.candidate.cmp(&y.candidate))
            .then_with(|| x.violated_link.cmp(&y.violated_link))
    });
    Ok((proposals, notes))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanningReport {
    pub flows: Vec<FlowDemand>,
    pub loads: Vec<LinkLoad>,
    pub violations: Vec<Violation>,
    pub proposals: Vec<Proposal>,
    pub notes: Vec<String>,
}

/// Flow per logical connection from slave to master along the reverse path.
pub fn plan(
    g: &InfrastructureGraph,
    stations: &[Station],
    paths: &[ConnectionPaths],
    points: &crate::datapoint::DataPointMap,
    bp: &Blueprint,
    metric: RouteMetric,
) -> Result<PlanningReport, PlanningError> {
    let pc = &bp.planning;
    let mut flows = Vec::new();
    let mut by_conn = BTreeMap::new();
    for cp in paths {
        let cycle = g
            .edges
            .get(&cp.connection)
            .and_then(|e| e.protocol.as_deref())
            .and_then(|p| bp.protocol(p))
            .map_or(1.0, |p| p.cycle_seconds);
        flows.push(estimate_device_traffic(
            &cp.connection,
            points.points(&cp.slave),
            cycle,
            pc.per_point_overhead_bytes,
            pc.burst_window_seconds,
        ));
        by_conn.insert(cp.connection.clone(), cp.reverse.clone());
    }
    let loads = accumulate_link_loads(g, &flows, &by_conn)?;
    let violations = check_capacity(g, &loads, pc.capacity_threshold);
    let (proposals, notes) = if violations.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        suggest_reinforcement(
            g,
            stations,
            &flows,
            &by_conn,
            &violations,
            metric,
            &bp.wan.fiber.link_class,
            bp,
        )?
    };
    Ok(PlanningReport {
        flows,
        loads,
        violations,
        proposals,
        notes,
    })
}

/// Weight of a path under `metric`, recomputed from link parameters.
pub fn path_weight(
    g: &InfrastructureGraph,
    path: &Path,
    metric: RouteMetric,
) -> Result<u64, NetConfigError> {
    path.links
        .iter()
        .map(|l| link_weight(&g.edges[l], metric))
        .sum()
}
