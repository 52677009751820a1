//! The complete infrastructure model and the staged transitions that fill it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::{Blueprint, RouteMetric};
use crate::datapoint::{configure_datapoints, DataPointError, DataPointMap};
use crate::grid_io::PowerGridModel;
use crate::net_config::{
    configure_network, derive_whitelist, NetConfigError, NetworkConfiguration,
};
use crate::planning::{plan, PlanningError, PlanningReport};
use crate::topology::{build_topology, InfrastructureGraph, Station, TopologyError};

/// How far a model has been carried through the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Modeling,
    Configuration,
    Analytics,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Modeling, Stage::Configuration, Stage::Analytics];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Modeling => "modeling",
            Stage::Configuration => "configuration",
            Stage::Analytics => "analytics",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| {
                format!("unknown stage {s:?} (expected modeling, configuration or analytics)")
            })
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("modeling: {0}")]
    Topology(#[from] TopologyError),
    #[error("configuration: {0}")]
    Network(#[from] NetConfigError),
    #[error("configuration: {0}")]
    DataPoint(#[from] DataPointError),
    #[error("analytics: {0}")]
    Planning(#[from] PlanningError),
    #[error("{stage} requires a model at stage {required}, found {found}")]
    StageOrder {
        stage: Stage,
        required: Stage,
        found: Stage,
    },
}

impl ModelError {
    /// The pipeline stage the error belongs to.
    pub fn stage(&self) -> Stage {
        match self {
            ModelError::Topology(_) => Stage::Modeling,
            ModelError::Network(_) | ModelError::DataPoint(_) => Stage::Configuration,
            ModelError::Planning(_) => Stage::Analytics,
            ModelError::StageOrder { stage, .. } => *stage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfrastructureModel {
    pub grid_fingerprint: String,
    pub blueprint_fingerprint: String,
    pub stage: Stage,
    pub graph: InfrastructureGraph,
    pub stations: Vec<Station>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkConfiguration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datapoints: Option<DataPointMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planning: Option<PlanningReport>,
}

impl InfrastructureModel {
    /// Modeling phase: primary objects, stations, devices, WAN and logical connections.
    pub fn build(grid: &PowerGridModel, bp: &Blueprint) -> Result<Self, ModelError> {
        let topo = build_topology(grid, bp)?;
        Ok(InfrastructureModel {
            grid_fingerprint: grid.fingerprint(),
            blueprint_fingerprint: bp.fingerprint(),
            stage: Stage::Modeling,
            graph: topo.graph,
            stations: topo.stations,
            notes: topo.notes,
            network: None,
            datapoints: None,
            planning: None,
        })
    }

    /// Configuration phase: link parameters, addressing, routes, data points
    /// and whitelist.
    pub fn configure(&mut self, bp: &Blueprint, metric: RouteMetric) -> Result<(), ModelError> {
        self.expect(Stage::Configuration, Stage::Modeling)?;
        let mut net = configure_network(&mut self.graph, bp, metric)?;
        let points = configure_datapoints(&self.graph, &self.stations, bp)?;
        net.whitelist = derive_whitelist(&self.graph, &net, &points, bp)?;
        self.network = Some(net);
        self.datapoints = Some(points);
        self.stage = Stage::Configuration;
        Ok(())
    }

    /// Analytics phase: traffic, link loads, capacity and reinforcement.
    pub fn analyze(&mut self, bp: &Blueprint) -> Result<(), ModelError> {
        self.expect(Stage::Analytics, Stage::Configuration)?;
        let (Some(net), Some(points)) = (&self.network, &self.datapoints) else {
            return Err(ModelError::StageOrder {
                stage: Stage::Analytics,
                required: Stage::Configuration,
                found: Stage::Modeling,
            });
        };
        let report = plan(
            &self.graph,
            &self.stations,
            &net.paths,
            points,
            bp,
            net.route_metric,
        )?;
        self.planning = Some(report);
        self.stage = Stage::Analytics;
        Ok(())
    }

    /// Runs every phase up to and including `until`.
    pub fn generate(
        grid: &PowerGridModel,
        bp: &Blueprint,
        metric: RouteMetric,
        until: Stage,
    ) -> Result<Self, ModelError> {
        let mut m = Self::build(grid, bp)?;
        if until >= Stage::Configuration {
            m.configure(bp, metric)?;
        }
        if until >= Stage::Analytics {
            m.analyze(bp)?;
        }
        Ok(m)
    }

    fn expect(&self, stage: Stage, required: Stage) -> Result<(), ModelError> {
        if self.stage == required {
            Ok(())
        } else {
            Err(ModelError::StageOrder {
                stage,
                required,
                found: self.stage,
            })
        }
    }
}
