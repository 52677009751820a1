//! Deterministic serialization of a model: graph files, the network
//! configuration document, whitelist files and the lossless model document.
//!
//! Every collection is emitted in id order, so identical models produce
//! byte-identical output.

mod document;
mod graph;
mod netconfig;
mod whitelist;

pub use document::{check_fingerprints, load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use graph::{export_graph, GraphFormat};
pub use netconfig::{export_network_config, NETCONFIG_SCHEMA};
pub use whitelist::{export_whitelist, WhitelistFormat, CSV_HEADER};

use thiserror::Error;

use crate::model::Stage;

#[derive(Debug, Error, PartialEq)]
pub enum ExportError {
    #[error("unknown {what} format {token:?}")]
    UnknownFormat { what: &'static str, token: String },
    #[error("model is incomplete, missing stages: {}", .0.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "))]
    Incomplete(Vec<Stage>),
    #[error("interface {0} has no address")]
    Unaddressed(String),
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("model document format {found:?} is not {expected:?}")]
    Format { expected: String, found: String },
    #[error("model document version {found} is not supported (expected {expected})")]
    Version { expected: u32, found: u64 },
    #[error("model document checksum mismatch: content was modified")]
    Checksum,
}
