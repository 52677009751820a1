use serde::{Deserialize, Serialize};

use crate::fingerprint;

/// Planar position in km-scale units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: String,
    /// Nominal voltage in kV.
    pub vn_kv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Line,
    Cable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub id: String,
    pub kind: BranchKind,
    pub from_bus: String,
    pub to_bus: String,
    pub length_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transformer {
    pub id: String,
    pub hv_bus: String,
    pub lv_bus: String,
    pub tap_pos: i32,
    pub tap_min: i32,
    pub tap_max: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub id: String,
    pub bus: String,
    pub p_mw: f64,
    pub q_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    pub p_mw: f64,
}

/// What a switch is mounted on: the end of a branch or a second bus (coupler).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchTarget {
    Line,
    Bus,
}

fn closed_by_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Switch {
    pub id: String,
    pub bus: String,
    /// Branch id for `et = "line"`, second bus id for `et = "bus"`.
    pub element: String,
    pub et: SwitchTarget,
    #[serde(default = "closed_by_default")]
    pub closed: bool,
}

/// An electrical distribution grid in the interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerGridModel {
    #[serde(default)]
    pub name: String,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub transformers: Vec<Transformer>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub switches: Vec<Switch>,
    /// Bus id of the upstream (HV) grid connection point.
    pub external_grid: String,
}

impl PowerGridModel {
    /// Sorts every element table by ascending id.
    pub fn normalize(&mut self) {
        self.buses.sort_by(|a, b| a.id.cmp(&b.id));
        self.branches.sort_by(|a, b| a.id.cmp(&b.id));
        self.transformers.sort_by(|a, b| a.id.cmp(&b.id));
        self.loads.sort_by(|a, b| a.id.cmp(&b.id));
        self.generators.sort_by(|a, b| a.id.cmp(&b.id));
        self.switches.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn branch(&self, id: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    /// A branch is open when any switch mounted on it is open.
    pub fn is_branch_open(&self, branch_id: &str) -> bool {
        self.switches
            .iter()
            .any(|s| s.et == SwitchTarget::Line && s.element == branch_id && !s.closed)
    }

    /// Closed bus couplers as (bus, bus) pairs.
    pub fn closed_couplers(&self) -> impl Iterator<Item = (&str, &str)> {
        self.switches
            .iter()
            .filter(|s| s.et == SwitchTarget::Bus && s.closed)
            .map(|s| (s.bus.as_str(), s.element.as_str()))
    }

    /// Pretty JSON in the interchange format.
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid model serializes")
    }

    /// SHA-256 over the canonical document of the normalized model.
    pub fn fingerprint(&self) -> String {
        let mut normalized = self.clone();
        normalized.normalize();
        fingerprint(&normalized)
    }
}
