//! The declarative architecture template (component, communication and
//! information layer content) that drives model generation.

mod kinds;
mod predicate;

pub use kinds::{
    DeviceKind, Direction, FiberCandidates, PrimaryCategory, RouteMetric, WanParadigm, Zone,
};
pub use predicate::{Predicate, StationProfile};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint;

#[derive(Debug, Error, PartialEq)]
pub enum BlueprintError {
    #[error("malformed blueprint: {0}")]
    Syntax(String),
    #[error("unresolved blueprint reference: {0}")]
    Unresolved(String),
    #[error("blueprint invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ResolveError {
    #[error("station has no primary elements")]
    EmptyStation,
    #[error("no station class matches station {0}")]
    NoMatch(String),
}

/// Where a device template is instantiated within a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Placement {
    /// One device per station.
    Once,
    /// One device per branch leaving the station away from the external grid.
    PerFeeder,
    /// One device per primary element of the category.
    PerElement(PrimaryCategory),
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Once => f.write_str("once"),
            Placement::PerFeeder => f.write_str("per_feeder"),
            Placement::PerElement(c) => write!(f, "per_element({c})"),
        }
    }
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "once" => Ok(Placement::Once),
            "per_feeder" => Ok(Placement::PerFeeder),
            _ => s
                .strip_prefix("per_element(")
                .and_then(|rest| rest.strip_suffix(')'))
                .ok_or_else(|| format!("unknown placement rule {s:?}"))
                .and_then(|c| c.trim().parse().map(Placement::PerElement)),
        }
    }
}

impl TryFrom<String> for Placement {
    type Error = String;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Placement> for String {
    fn from(p: Placement) -> Self {
        p.to_string()
    }
}

impl Placement {
    /// Primary category the placed device is wired to, if any.
    pub fn category(&self) -> Option<PrimaryCategory> {
        match self {
            Placement::Once => None,
            Placement::PerFeeder => Some(PrimaryCategory::Branch),
            Placement::PerElement(c) => Some(*c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InterfaceRule {
    Degree,
    Fixed(u32),
}

impl fmt::Display for InterfaceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceRule::Degree => f.write_str("degree"),
            InterfaceRule::Fixed(n) => write!(f, "fixed({n})"),
        }
    }
}

impl TryFrom<String> for InterfaceRule {
    type Error = String;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        let v = value.trim();
        if v == "degree" {
            return Ok(InterfaceRule::Degree);
        }
        v.strip_prefix("fixed(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|n| n.trim().parse().ok())
            .map(InterfaceRule::Fixed)
            .ok_or_else(|| format!("unknown interface rule {v:?}"))
    }
}

impl From<InterfaceRule> for String {
    fn from(r: InterfaceRule) -> Self {
        r.to_string()
    }
}

fn default_interfaces() -> InterfaceRule {
    InterfaceRule::Degree
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DevicePlacement {
    pub template: String,
    pub placement: Placement,
    /// Restricts the bound data points to these attributes of the wired element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationClass {
    pub name: String,
    /// Higher priorities are tried first.
    pub priority: i32,
    #[serde(rename = "match")]
    pub match_rule: Predicate,
    #[serde(default)]
    pub control_center: bool,
    /// Stations of this class connect the control center to the WAN.
    #[serde(default)]
    pub wan_uplink: bool,
    #[serde(default)]
    pub devices: Vec<DevicePlacement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceTemplate {
    pub name: String,
    pub kind: DeviceKind,
    #[serde(default = "default_interfaces")]
    pub interfaces: InterfaceRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allows_commands: Option<bool>,
}

impl DeviceTemplate {
    pub fn allows_commands(&self) -> bool {
        self.allows_commands
            .unwrap_or_else(|| self.kind.allows_commands_by_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub name: String,
    pub port: u32,
    pub cycle_seconds: f64,
    /// `(master zone, slave zone)` pairs this protocol connects.
    pub pairs: Vec<(Zone, Zone)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkClass {
    pub name: String,
    pub bandwidth_bps: f64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub loss_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPointTemplate {
    pub name: String,
    /// `<category>.<attribute>`, e.g. `transformer.tap_position`.
    pub primary_category: String,
    pub direction: Direction,
    pub type_id: String,
    pub cot: String,
    pub size_bytes: u32,
    pub protocol: String,
}

impl DataPointTemplate {
    pub fn category(&self) -> Option<PrimaryCategory> {
        self.primary_category
            .split_once('.')
            .and_then(|(c, _)| c.parse().ok())
    }

    pub fn attribute(&self) -> &str {
        self.primary_category
            .split_once('.')
            .map(|(_, a)| a)
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub gateway: String,
    pub link_class: String,
    #[serde(default)]
    pub candidates: FiberCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlcConfig {
    pub gateway: String,
    pub link_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileConfig {
    pub gateway: String,
    pub base_station: String,
    pub core: String,
    pub cell_size: usize,
    pub radio_link_class: String,
    pub backbone_link_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WanConfig {
    pub paradigm: WanParadigm,
    pub uplink_link_class: String,
    pub fiber: FiberConfig,
    pub plc: PlcConfig,
    pub mobile: MobileConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanConfig {
    pub switch: String,
    pub link_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanningConfig {
    #[serde(default = "PlanningConfig::default_overhead")]
    pub per_point_overhead_bytes: u32,
    #[serde(default = "PlanningConfig::default_burst_window")]
    pub burst_window_seconds: f64,
    #[serde(default = "PlanningConfig::default_threshold")]
    pub capacity_threshold: f64,
    #[serde(default = "PlanningConfig::default_stride")]
    pub merge_coa_stride: u32,
}

impl PlanningConfig {
    fn default_overhead() -> u32 {
        10
    }
    fn default_burst_window() -> f64 {
        0.1
    }
    fn default_threshold() -> f64 {
        0.8
    }
    fn default_stride() -> u32 {
        1000
    }
}

impl Default for PlanningConfig {
    fn default() -> Self {
        Self {
            per_point_overhead_bytes: Self::default_overhead(),
            burst_window_seconds: Self::default_burst_window(),
            capacity_threshold: Self::default_threshold(),
            merge_coa_stride: Self::default_stride(),
        }
    }
}

/// Type identifiers admissible per direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeIdTable {
    pub monitoring: BTreeSet<String>,
    pub control: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blueprint {
    pub name: String,
    pub address_pool: Ipv4Net,
    #[serde(default)]
    pub route_metric: RouteMetric,
    pub wan: WanConfig,
    pub lan: LanConfig,
    #[serde(default)]
    pub planning: PlanningConfig,
    pub type_ids: TypeIdTable,
    pub station_classes: Vec<StationClass>,
    pub device_templates: Vec<DeviceTemplate>,
    pub protocols: Vec<ProtocolSpec>,
    pub link_classes: Vec<LinkClass>,
    pub datapoints: Vec<DataPointTemplate>,
}

/// Parses and validates a TOML blueprint; declarations come back sorted by name.
pub fn parse_blueprint(raw: &str) -> Result<Blueprint, BlueprintError> {
    let mut bp: Blueprint =
        toml::from_str(raw).map_err(|e| BlueprintError::Syntax(e.to_string()))?;
    bp.normalize();
    bp.validate()?;
    Ok(bp)
}

/// The bundled voltage-control blueprint.
pub const DEFAULT_BLUEPRINT: &str = include_str!("../../../../fixtures/blueprint_default.toml");

pub fn default_blueprint() -> Blueprint {
    parse_blueprint(DEFAULT_BLUEPRINT).expect("bundled blueprint parses")
}

impl Blueprint {
    fn normalize(&mut self) {
        self.station_classes.sort_by(|a, b| a.name.cmp(&b.name));
        for class in &mut self.station_classes {
            class.devices.sort();
        }
        self.device_templates.sort_by(|a, b| a.name.cmp(&b.name));
        self.protocols.sort_by(|a, b| a.name.cmp(&b.name));
        for p in &mut self.protocols {
            p.pairs.sort();
        }
        self.link_classes.sort_by(|a, b| a.name.cmp(&b.name));
        self.datapoints
            .sort_by(|a, b| a.primary_category.cmp(&b.primary_category));
    }

    pub fn validate(&self) -> Result<(), BlueprintError> {
        use BlueprintError::{Invariant, Unresolved};

        fn unique<'a>(
            what: &str,
            names: impl Iterator<Item = &'a str>,
        ) -> Result<(), BlueprintError> {
            let mut seen = BTreeSet::new();
            for n in names {
                if !seen.insert(n) {
                    return Err(Invariant(format!("duplicate {what} {n:?}")));
                }
            }
            Ok(())
        }
        unique(
            "station class",
            self.station_classes.iter().map(|c| c.name.as_str()),
        )?;
        unique(
            "device template",
            self.device_templates.iter().map(|c| c.name.as_str()),
        )?;
        unique("protocol", self.protocols.iter().map(|c| c.name.as_str()))?;
        unique(
            "link class",
            self.link_classes.iter().map(|c| c.name.as_str()),
        )?;
        unique(
            "data point template",
            self.datapoints.iter().map(|c| c.primary_category.as_str()),
        )?;

        if self.address_pool.prefix_len() > 24 {
            return Err(Invariant(format!(
                "address pool {} must be /24 or larger",
                self.address_pool
            )));
        }

        let cc = self
            .station_classes
            .iter()
            .filter(|c| c.control_center)
            .count();
        if cc != 1 {
            return Err(Invariant(format!(
                "exactly one control_center station class required, found {cc}"
            )));
        }
        let mut priorities = BTreeSet::new();
        for class in &self.station_classes {
            if !priorities.insert(class.priority) {
                return Err(Invariant(format!(
                    "station class {:?} shares priority {} with another class",
                    class.name, class.priority
                )));
            }
            for dp in &class.devices {
                let template = self.device_template(&dp.template).ok_or_else(|| {
                    Unresolved(format!(
                        "station class {:?} references device template {:?}",
                        class.name, dp.template
                    ))
                })?;
                let station_level = matches!(
                    template.kind,
                    DeviceKind::Rtu
                        | DeviceKind::ScadaHost
                        | DeviceKind::Router
                        | DeviceKind::Firewall
                );
                match (dp.placement, template.kind.is_ied(), station_level) {
                    (Placement::Once, _, true) => {}
                    (Placement::PerFeeder | Placement::PerElement(_), true, _) => {}
                    _ => {
                        return Err(Invariant(format!(
                            "placement {} not allowed for {} template {:?} in class {:?}",
                            dp.placement, template.kind, template.name, class.name
                        )))
                    }
                }
                if let Some(points) = &dp.points {
                    let category = dp.placement.category().ok_or_else(|| {
                        Invariant(format!(
                            "point filter on unwired placement of {:?}",
                            dp.template
                        ))
                    })?;
                    for attr in points {
                        let key = format!("{category}.{attr}");
                        if self.datapoint(&key).is_none() {
                            return Err(Unresolved(format!(
                                "class {:?} filters on data point {key:?}",
                                class.name
                            )));
                        }
                    }
                }
            }
        }

        for t in &self.device_templates {
            if t.interfaces == InterfaceRule::Fixed(0) {
                return Err(Invariant(format!(
                    "device template {:?} has zero interfaces",
                    t.name
                )));
            }
        }

        for lc in &self.link_classes {
            if lc.bandwidth_bps.is_nan() || lc.bandwidth_bps <= 0.0 {
                return Err(Invariant(format!(
                    "link class {:?}: bandwidth must be positive",
                    lc.name
                )));
            }
            if lc.latency_ms.is_nan()
                || lc.latency_ms < 0.0
                || lc.jitter_ms.is_nan()
                || lc.jitter_ms < 0.0
            {
                return Err(Invariant(format!(
                    "link class {:?}: latency and jitter must be non-negative",
                    lc.name
                )));
            }
            if !(0.0..=1.0).contains(&lc.loss_rate) {
                return Err(Invariant(format!(
                    "link class {:?}: loss rate {} outside [0, 1]",
                    lc.name, lc.loss_rate
                )));
            }
        }

        let mut all_pairs = BTreeSet::new();
        for p in &self.protocols {
            if !(1..=65535).contains(&p.port) {
                return Err(Invariant(format!(
                    "protocol {:?}: port {} outside [1, 65535]",
                    p.name, p.port
                )));
            }
            if p.cycle_seconds.is_nan() || p.cycle_seconds <= 0.0 {
                return Err(Invariant(format!(
                    "protocol {:?}: cycle must be positive",
                    p.name
                )));
            }
            for (master, slave) in &p.pairs {
                if master <= slave {
                    return Err(Invariant(format!(
                        "protocol {:?}: master zone {master} must be above slave zone {slave}",
                        p.name
                    )));
                }
                if !all_pairs.insert((*master, *slave)) {
                    return Err(Invariant(format!(
                        "zone pair ({master}, {slave}) assigned to more than one protocol"
                    )));
                }
            }
        }

        for dp in &self.datapoints {
            if dp.category().is_none() || dp.attribute().is_empty() {
                return Err(Unresolved(format!(
                    "data point {:?} names unknown primary category {:?}",
                    dp.name, dp.primary_category
                )));
            }
            if self.protocol(&dp.protocol).is_none() {
                return Err(Unresolved(format!(
                    "data point {:?} references protocol {:?}",
                    dp.name, dp.protocol
                )));
            }
            let table = match dp.direction {
                Direction::Monitoring => &self.type_ids.monitoring,
                Direction::Control => &self.type_ids.control,
            };
            if !table.contains(&dp.type_id) {
                return Err(Invariant(format!(
                    "data point {:?}: type id {} is not a declared {} type",
                    dp.name, dp.type_id, dp.direction
                )));
            }
        }

        let need_class = |name: &str| {
            self.link_class(name)
                .map(|_| ())
                .ok_or_else(|| Unresolved(format!("link class {name:?}")))
        };
        need_class(&self.lan.link_class)?;
        need_class(&self.wan.uplink_link_class)?;
        need_class(&self.wan.fiber.link_class)?;
        need_class(&self.wan.plc.link_class)?;
        need_class(&self.wan.mobile.radio_link_class)?;
        need_class(&self.wan.mobile.backbone_link_class)?;

        let need_kind = |name: &str, kinds: &[DeviceKind]| {
            let t = self
                .device_template(name)
                .ok_or_else(|| Unresolved(format!("device template {name:?}")))?;
            if kinds.contains(&t.kind) {
                Ok(())
            } else {
                Err(Invariant(format!(
                    "device template {name:?} has kind {}, expected one of {kinds:?}",
                    t.kind
                )))
            }
        };
        need_kind(&self.lan.switch, &[DeviceKind::Switch])?;
        let gateways = [DeviceKind::Router, DeviceKind::Modem];
        need_kind(&self.wan.fiber.gateway, &gateways)?;
        need_kind(&self.wan.plc.gateway, &gateways)?;
        need_kind(&self.wan.mobile.gateway, &gateways)?;
        need_kind(&self.wan.mobile.base_station, &[DeviceKind::BaseStation])?;
        need_kind(&self.wan.mobile.core, &[DeviceKind::Router])?;
        if self.wan.mobile.cell_size == 0 {
            return Err(Invariant("mobile cell size must be at least 1".into()));
        }

        let pl = &self.planning;
        if pl.burst_window_seconds.is_nan() || pl.burst_window_seconds <= 0.0 {
            return Err(Invariant("burst window must be positive".into()));
        }
        if pl.capacity_threshold.is_nan() || pl.capacity_threshold <= 0.0 {
            return Err(Invariant("capacity threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn device_template(&self, name: &str) -> Option<&DeviceTemplate> {
        self.device_templates.iter().find(|t| t.name == name)
    }

    pub fn link_class(&self, name: &str) -> Option<&LinkClass> {
        self.link_classes.iter().find(|t| t.name == name)
    }

    pub fn protocol(&self, name: &str) -> Option<&ProtocolSpec> {
        self.protocols.iter().find(|t| t.name == name)
    }

    pub fn station_class(&self, name: &str) -> Option<&StationClass> {
        self.station_classes.iter().find(|t| t.name == name)
    }

    /// Data point template by `<category>.<attribute>` key.
    pub fn datapoint(&self, key: &str) -> Option<&DataPointTemplate> {
        self.datapoints.iter().find(|t| t.primary_category == key)
    }

    pub fn control_center_class(&self) -> &StationClass {
        self.station_classes
            .iter()
            .find(|c| c.control_center)
            .expect("validated blueprint has a control center class")
    }

    /// Protocol serving a (master zone, slave zone) pair.
    pub fn protocol_for(&self, master: Zone, slave: Zone) -> Option<&ProtocolSpec> {
        self.protocols
            .iter()
            .find(|p| p.pairs.contains(&(master, slave)))
    }

    /// Data point templates grouped by primary category.
    pub fn datapoints_by_category(&self) -> BTreeMap<PrimaryCategory, Vec<&DataPointTemplate>> {
        let mut map: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for dp in &self.datapoints {
            if let Some(c) = dp.category() {
                map.entry(c).or_default().push(dp);
            }
        }
        map
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(self)
    }
}

/// Highest-priority non-control-center class whose match rule holds.
pub fn resolve_station_template<'a>(
    bp: &'a Blueprint,
    station: &StationProfile,
) -> Result<&'a StationClass, ResolveError> {
    if station.is_empty() {
        return Err(ResolveError::EmptyStation);
    }
    let mut classes: Vec<&StationClass> = bp
        .station_classes
        .iter()
        .filter(|c| !c.control_center)
        .collect();
    classes.sort_by_key(|c| std::cmp::Reverse(c.priority));
    classes
        .into_iter()
        .find(|c| c.match_rule.eval(station))
        .ok_or_else(|| ResolveError::NoMatch(format!("{:?}", station.element_counts)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(cats: &[PrimaryCategory], hv: bool) -> StationProfile {
        StationProfile {
            element_counts: cats.iter().map(|c| (*c, 1)).collect(),
            hv_connects_external_grid: hv,
        }
    }

    #[test]
    fn default_blueprint_contents() {
        let bp = default_blueprint();
        let classes: Vec<_> = bp.station_classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            classes,
            [
                "control_center",
                "primary_substation",
                "secondary_substation"
            ]
        );
        assert_eq!(bp.protocols.len(), 1);
        assert_eq!(bp.protocols[0].name, "iec60870-104");
        assert_eq!(bp.protocols[0].port, 2404);
        assert_eq!(bp.wan.paradigm, WanParadigm::Fiber);
        let lan = bp.link_class("lan_1g").unwrap();
        assert_eq!(lan.bandwidth_bps, 1e9);
        assert_eq!(lan.latency_ms, 0.1);
    }

    #[test]
    fn unresolved_device_template() {
        let raw = DEFAULT_BLUEPRINT.replacen(
            "{ template = \"rtu\", placement = \"once\" }",
            "{ template = \"ied_x\", placement = \"once\" }",
            1,
        );
        let err = parse_blueprint(&raw).unwrap_err();
        assert!(
            matches!(err, BlueprintError::Unresolved(ref m) if m.contains("ied_x")),
            "{err}"
        );
    }

    #[test]
    fn loss_rate_out_of_range() {
        let raw = DEFAULT_BLUEPRINT.replacen("loss_rate = 0.01", "loss_rate = 1.5", 1);
        assert!(matches!(
            parse_blueprint(&raw).unwrap_err(),
            BlueprintError::Invariant(_)
        ));
    }

    #[test]
    fn missing_control_center() {
        let raw = DEFAULT_BLUEPRINT.replacen("control_center = true", "control_center = false", 1);
        assert!(matches!(
            parse_blueprint(&raw).unwrap_err(),
            BlueprintError::Invariant(_)
        ));
    }

    #[test]
    fn control_type_must_be_a_command_token() {
        let raw = DEFAULT_BLUEPRINT.replacen(
            "direction = \"control\"\ntype_id = \"C_SE_NC_1\"",
            "direction = \"control\"\ntype_id = \"M_ME_NC_1\"",
            1,
        );
        assert!(matches!(
            parse_blueprint(&raw).unwrap_err(),
            BlueprintError::Invariant(_)
        ));
    }

    #[test]
    fn bad_port_and_syntax() {
        let raw = DEFAULT_BLUEPRINT.replacen("port = 2404", "port = 70000", 1);
        assert!(matches!(
            parse_blueprint(&raw).unwrap_err(),
            BlueprintError::Invariant(_)
        ));
        assert!(matches!(
            parse_blueprint("name = ").unwrap_err(),
            BlueprintError::Syntax(_)
        ));
    }

    #[test]
    fn resolution_by_priority() {
        let bp = default_blueprint();
        let ps = resolve_station_template(
            &bp,
            &profile(&[PrimaryCategory::Bus, PrimaryCategory::Transformer], true),
        )
        .unwrap();
        assert_eq!(ps.name, "primary_substation");
        let ss = resolve_station_template(
            &bp,
            &profile(&[PrimaryCategory::Bus, PrimaryCategory::Transformer], false),
        )
        .unwrap();
        assert_eq!(ss.name, "secondary_substation");
        assert_eq!(
            resolve_station_template(&bp, &StationProfile::default()).unwrap_err(),
            ResolveError::EmptyStation
        );
    }

    #[test]
    fn generator_only_station_is_der() {
        let mut bp = default_blueprint();
        let mut der = bp.station_class("secondary_substation").unwrap().clone();
        der.name = "der".into();
        der.priority = 15;
        der.match_rule = Predicate::parse("has(generator) and not has(load)").unwrap();
        bp.station_classes.push(der);
        let class = resolve_station_template(
            &bp,
            &profile(&[PrimaryCategory::Bus, PrimaryCategory::Generator], false),
        )
        .unwrap();
        assert_eq!(class.name, "der");
    }

    #[test]
    fn no_match_without_catch_all() {
        let raw = DEFAULT_BLUEPRINT.replacen("match = \"true\"", "match = \"has(load)\"", 1);
        let bp = parse_blueprint(&raw).unwrap();
        assert!(matches!(
            resolve_station_template(&bp, &profile(&[PrimaryCategory::Bus], false)),
            Err(ResolveError::NoMatch(_))
        ));
    }

    #[test]
    fn declaration_order_does_not_matter() {
        let original = default_blueprint();
        // Reverse the order of the `[[link_classes]]` blocks in the document.
        let (head, tail) = DEFAULT_BLUEPRINT.split_once("[[link_classes]]").unwrap();
        let (links, rest) = tail.split_once("# ----").unwrap();
        let mut blocks: Vec<&str> = links.split("[[link_classes]]").collect();
        blocks.reverse();
        let permuted = format!(
            "{head}[[link_classes]]{}\n# ----{rest}",
            blocks.join("\n[[link_classes]]")
        );
        assert_ne!(permuted, DEFAULT_BLUEPRINT);
        assert_eq!(parse_blueprint(&permuted).unwrap(), original);
    }

    #[test]
    fn placement_round_trip() {
        for p in [
            Placement::Once,
            Placement::PerFeeder,
            Placement::PerElement(PrimaryCategory::Transformer),
        ] {
            assert_eq!(p.to_string().parse::<Placement>().unwrap(), p);
        }
        assert!("per_element(turbine)".parse::<Placement>().is_err());
    }
}
