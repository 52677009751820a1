use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::model::{Point, PowerGridModel};

/// Bus coordinates, synthesized where the document gives none.
///
/// Missing positions come from BFS layering over the physical grid (all
/// branches, transformers and couplers regardless of switch state) starting
/// at the external-grid bus: layer depth is `x`, rank within the layer is `y`,
/// unit spacing. Components unreachable from the external grid are laid out
/// afterwards from their smallest bus id.
pub fn bus_coordinates(grid: &PowerGridModel) -> BTreeMap<String, Point> {
    let mut adjacency: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for bus in &grid.buses {
        adjacency.entry(bus.id.as_str()).or_default();
    }
    let mut connect = |a: &'_ str, b: &'_ str| {
        if let (Some(a), Some(b)) = (
            grid.bus(a).map(|x| x.id.as_str()),
            grid.bus(b).map(|x| x.id.as_str()),
        ) {
            adjacency.entry(a).or_default().insert(b);
            adjacency.entry(b).or_default().insert(a);
        }
    };
    for br in &grid.branches {
        connect(&br.from_bus, &br.to_bus);
    }
    for t in &grid.transformers {
        connect(&t.hv_bus, &t.lv_bus);
    }
    for s in grid
        .switches
        .iter()
        .filter(|s| s.et == super::model::SwitchTarget::Bus)
    {
        connect(&s.bus, &s.element);
    }

    let mut synthesized: BTreeMap<&str, Point> = BTreeMap::new();
    let mut layer_fill: BTreeMap<usize, usize> = BTreeMap::new();
    let mut roots: Vec<&str> = Vec::new();
    if adjacency.contains_key(grid.external_grid.as_str()) {
        roots.push(grid.external_grid.as_str());
    }
    roots.extend(adjacency.keys().copied());

    for root in roots {
        if synthesized.contains_key(root) {
            continue;
        }
        let mut queue = VecDeque::from([(root, 0usize)]);
        let mut seen = BTreeSet::from([root]);
        while let Some((bus, depth)) = queue.pop_front() {
            let rank = layer_fill.entry(depth).or_insert(0);
            synthesized.insert(bus, Point::new(depth as f64, *rank as f64));
            *rank += 1;
            for next in &adjacency[bus] {
                if !synthesized.contains_key(next) && seen.insert(next) {
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }

    grid.buses
        .iter()
        .map(|b| {
            let p = b.coords.unwrap_or(synthesized[b.id.as_str()]);
            (b.id.clone(), p)
        })
        .collect()
}

/// BFS hop depth of every bus from the external grid over all branches and
/// transformers, ignoring switch state. Unreachable buses are absent.
pub fn bus_depths(grid: &PowerGridModel) -> BTreeMap<String, usize> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for br in &grid.branches {
        adjacency.entry(&br.from_bus).or_default().push(&br.to_bus);
        adjacency.entry(&br.to_bus).or_default().push(&br.from_bus);
    }
    for t in &grid.transformers {
        adjacency.entry(&t.hv_bus).or_default().push(&t.lv_bus);
        adjacency.entry(&t.lv_bus).or_default().push(&t.hv_bus);
    }
    for s in grid
        .switches
        .iter()
        .filter(|s| s.et == super::model::SwitchTarget::Bus)
    {
        adjacency.entry(&s.bus).or_default().push(&s.element);
        adjacency.entry(&s.element).or_default().push(&s.bus);
    }
    let mut depth = BTreeMap::new();
    let mut queue = VecDeque::new();
    depth.insert(grid.external_grid.clone(), 0usize);
    queue.push_back(grid.external_grid.as_str());
    while let Some(bus) = queue.pop_front() {
        let d = depth[bus];
        if let Some(next) = adjacency.get(bus) {
            for n in next {
                if !depth.contains_key(*n) {
                    depth.insert(n.to_string(), d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_io::fixtures;

    #[test]
    fn synthesized_layout_is_layered_from_external_grid() {
        let grid = fixtures::grid_4bus();
        assert!(grid.buses.iter().all(|b| b.coords.is_none()));
        let coords = bus_coordinates(&grid);
        assert_eq!(coords[&grid.external_grid], Point::new(0.0, 0.0));
        let distinct: BTreeSet<(u64, u64)> = coords
            .values()
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect();
        assert_eq!(distinct.len(), coords.len());
    }

    #[test]
    fn given_coordinates_are_kept() {
        let grid = fixtures::grid_cigre_mv();
        let coords = bus_coordinates(&grid);
        for bus in &grid.buses {
            assert_eq!(Some(coords[&bus.id]), bus.coords);
        }
    }
}
