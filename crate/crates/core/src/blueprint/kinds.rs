use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// SGAM zones, ordered bottom-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Process,
    Field,
    Station,
    Operation,
}

impl Zone {
    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::Process => "process",
            Zone::Field => "field",
            Zone::Station => "station",
            Zone::Operation => "operation",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    IedControl,
    IedMeasurement,
    IedProtection,
    Rtu,
    Switch,
    Router,
    Modem,
    BaseStation,
    ScadaHost,
    Firewall,
}

impl DeviceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DeviceKind::IedControl => "ied_control",
            DeviceKind::IedMeasurement => "ied_measurement",
            DeviceKind::IedProtection => "ied_protection",
            DeviceKind::Rtu => "rtu",
            DeviceKind::Switch => "switch",
            DeviceKind::Router => "router",
            DeviceKind::Modem => "modem",
            DeviceKind::BaseStation => "base_station",
            DeviceKind::ScadaHost => "scada_host",
            DeviceKind::Firewall => "firewall",
        }
    }

    pub fn is_ied(&self) -> bool {
        matches!(
            self,
            DeviceKind::IedControl | DeviceKind::IedMeasurement | DeviceKind::IedProtection
        )
    }

    /// Devices that terminate protocol sessions (masters or slaves).
    pub fn is_endpoint(&self) -> bool {
        self.is_ied() || matches!(self, DeviceKind::Rtu | DeviceKind::ScadaHost)
    }

    /// Devices that forward on layer 3 and therefore split layer-2 subnets.
    pub fn is_l3(&self) -> bool {
        matches!(
            self,
            DeviceKind::Router | DeviceKind::Modem | DeviceKind::Firewall
        )
    }

    pub fn allows_commands_by_default(&self) -> bool {
        matches!(
            self,
            DeviceKind::IedControl
                | DeviceKind::IedProtection
                | DeviceKind::Rtu
                | DeviceKind::ScadaHost
        )
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Categories of primary (electrical) elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimaryCategory {
    Bus,
    Branch,
    Transformer,
    Load,
    Generator,
    Switch,
}

impl PrimaryCategory {
    pub const ALL: [PrimaryCategory; 6] = [
        PrimaryCategory::Bus,
        PrimaryCategory::Branch,
        PrimaryCategory::Transformer,
        PrimaryCategory::Load,
        PrimaryCategory::Generator,
        PrimaryCategory::Switch,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PrimaryCategory::Bus => "bus",
            PrimaryCategory::Branch => "branch",
            PrimaryCategory::Transformer => "transformer",
            PrimaryCategory::Load => "load",
            PrimaryCategory::Generator => "generator",
            PrimaryCategory::Switch => "switch",
        }
    }
}

impl fmt::Display for PrimaryCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrimaryCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PrimaryCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown primary category {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Monitoring,
    Control,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Monitoring => "monitoring",
            Direction::Control => "control",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WanParadigm {
    Mobile,
    Plc,
    #[default]
    Fiber,
}

impl FromStr for WanParadigm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mobile" => Ok(WanParadigm::Mobile),
            "plc" => Ok(WanParadigm::Plc),
            "fiber" => Ok(WanParadigm::Fiber),
            other => Err(format!("unknown WAN paradigm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberCandidates {
    #[default]
    Complete,
    ElectricalParallel,
}

/// Edge weight used for route computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteMetric {
    #[default]
    Latency,
    Hops,
    InverseBandwidth,
}

impl FromStr for RouteMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "latency" => Ok(RouteMetric::Latency),
            "hops" => Ok(RouteMetric::Hops),
            "inverse_bandwidth" => Ok(RouteMetric::InverseBandwidth),
            other => Err(format!("unknown route metric {other:?}")),
        }
    }
}
