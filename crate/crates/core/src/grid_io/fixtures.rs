//! Benchmark grids bundled with the crate.

use super::{parse_grid, PowerGridModel};

pub const GRID_4BUS: &str = include_str!("../../../../fixtures/grid_4bus.json");
pub const GRID_12BUS: &str = include_str!("../../../../fixtures/grid_12bus.json");
pub const GRID_CIGRE_MV: &str = include_str!("../../../../fixtures/grid_cigre_mv.json");

pub fn grid_4bus() -> PowerGridModel {
    parse_grid(GRID_4BUS).expect("bundled 4-bus fixture parses")
}

pub fn grid_12bus() -> PowerGridModel {
    parse_grid(GRID_12BUS).expect("bundled 12-bus fixture parses")
}

pub fn grid_cigre_mv() -> PowerGridModel {
    parse_grid(GRID_CIGRE_MV).expect("bundled CIGRE MV fixture parses")
}

/// `(name, document)` for every bundled grid, smallest first.
pub fn all() -> [(&'static str, &'static str); 3] {
    [
        ("grid_4bus", GRID_4BUS),
        ("grid_12bus", GRID_12BUS),
        ("grid_cigre_mv", GRID_CIGRE_MV),
    ]
}
