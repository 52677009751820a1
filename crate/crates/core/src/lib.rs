//! Generator for integrated smart-grid infrastructure models.
//!
//! An electrical distribution grid ([`grid_io`]) and an architecture
//! [`blueprint`] are combined into one typed graph of primary equipment,
//! ICT/OT devices, physical links and protocol-level connections
//! ([`topology`]). The graph is then configured: link parameters,
//! interfaces, subnets, addresses and static routes ([`net_config`]),
//! process data points with hierarchical inheritance ([`datapoint`]) and
//! whitelist rules. [`planning`] runs traffic and capacity analytics over
//! the finished model and [`export`] writes simulator- and analysis-ready
//! documents. [`pipeline`] chains all stages.

pub mod blueprint;
pub mod datapoint;
pub mod export;
pub mod grid_io;
pub mod model;
pub mod net_config;
pub mod pipeline;
pub mod planning;
pub mod topology;

pub use blueprint::{parse_blueprint, Blueprint};
pub use grid_io::{parse_grid, PowerGridModel};
pub use model::{InfrastructureModel, Stage};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the canonical (sorted-key) JSON form of a value.
pub(crate) fn fingerprint<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).expect("value serializes");
    sha256_hex(canonical.to_string().as_bytes())
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
