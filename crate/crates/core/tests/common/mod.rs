#![allow(dead_code)]

use proptest::prelude::*;
use sgim::grid_io::{
    Branch, BranchKind, Bus, Generator, Load, Point, PowerGridModel, Switch, SwitchTarget,
    Transformer,
};

/// Small radial grid behind one transformer, with optional meshing
/// branches, bus couplers and line switches.
pub fn arb_grid(max_buses: usize) -> impl Strategy<Value = PowerGridModel> {
    (2usize..=max_buses, 0usize..3, 0usize..3).prop_flat_map(|(n, n_mesh, n_coupler)| {
        (
            proptest::collection::vec(any::<usize>(), n),
            proptest::collection::vec((any::<usize>(), any::<usize>()), n_mesh),
            proptest::collection::vec((any::<usize>(), any::<bool>()), n_coupler),
            proptest::collection::vec((0u8..3, 0u8..2, any::<bool>()), n),
            proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0), n),
        )
            .prop_map(move |(parents, mesh, couplers, attach, xy)| {
                build(n, &parents, &mesh, &couplers, &attach, &xy)
            })
    })
}

fn build(
    n: usize,
    parents: &[usize],
    mesh: &[(usize, usize)],
    couplers: &[(usize, bool)],
    attach: &[(u8, u8, bool)],
    xy: &[(f64, f64)],
) -> PowerGridModel {
    let bus = |i: usize| format!("b{i:02}");
    let mut g = PowerGridModel {
        name: "random".into(),
        buses: (0..n)
            .map(|i| Bus {
                id: bus(i),
                vn_kv: if i == 0 { 110.0 } else { 20.0 },
                coords: Some(Point::new(xy[i].0, xy[i].1)),
            })
            .collect(),
        branches: vec![],
        transformers: vec![Transformer {
            id: "t1".into(),
            hv_bus: bus(0),
            lv_bus: bus(1),
            tap_pos: 0,
            tap_min: -5,
            tap_max: 5,
        }],
        loads: vec![],
        generators: vec![],
        switches: vec![],
        external_grid: bus(0),
    };
    for (i, parent) in parents.iter().enumerate().take(n).skip(2) {
        let p = 1 + parent % (i - 1);
        g.branches.push(Branch {
            id: format!("l{p:02}_{i:02}"),
            kind: BranchKind::Cable,
            from_bus: bus(p),
            to_bus: bus(i),
            length_km: 1.0,
        });
    }
    if n > 3 {
        for (k, (a, b)) in mesh.iter().enumerate() {
            let (a, b) = (1 + a % (n - 1), 1 + b % (n - 1));
            if a != b {
                g.branches.push(Branch {
                    id: format!("m{k}"),
                    kind: BranchKind::Line,
                    from_bus: bus(a),
                    to_bus: bus(b),
                    length_km: 2.0,
                });
            }
        }
    }
    for (k, (a, closed)) in couplers.iter().enumerate() {
        if n > 2 {
            let a = 1 + a % (n - 2);
            g.switches.push(Switch {
                id: format!("c{k}"),
                bus: bus(a),
                element: bus(a + 1),
                et: SwitchTarget::Bus,
                closed: *closed,
            });
        }
    }
    for (i, (loads, gens, switched)) in attach.iter().enumerate().skip(1) {
        for k in 0..*loads {
            g.loads.push(Load {
                id: format!("ld{i:02}_{k}"),
                bus: bus(i),
                p_mw: 0.5,
                q_mvar: 0.1,
            });
        }
        for k in 0..*gens {
            g.generators.push(Generator {
                id: format!("g{i:02}_{k}"),
                bus: bus(i),
                p_mw: 0.3,
            });
        }
        if *switched {
            if let Some(br) = g.branches.iter().find(|b| b.to_bus == bus(i)) {
                g.switches.push(Switch {
                    id: format!("s{i:02}"),
                    bus: br.from_bus.clone(),
                    element: br.id.clone(),
                    et: SwitchTarget::Line,
                    closed: true,
                });
            }
        }
    }
    g.normalize();
    g
}

pub mod checks;
pub mod oracles;
