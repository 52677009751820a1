//! Electrical grid interchange format: parsing, validation, layout and the
//! bundled benchmark grids.

pub mod fixtures;
mod layout;
mod model;
mod validate;

pub use layout::{bus_coordinates, bus_depths};
pub use model::{
    Branch, BranchKind, Bus, Generator, Load, Point, PowerGridModel, Switch, SwitchTarget,
    Transformer,
};
pub use validate::{validate_grid, Finding, Rule};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("malformed grid document: {0}")]
    Syntax(String),
    #[error("grid reference error: {}", join(.0))]
    Reference(Vec<Finding>),
    #[error("grid domain error: {}", join(.0))]
    Domain(Vec<Finding>),
}

fn join(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses a grid document without checking its invariants.
pub fn read_grid_document(raw: &str) -> Result<PowerGridModel, GridError> {
    let mut grid: PowerGridModel =
        serde_json::from_str(raw).map_err(|e| GridError::Syntax(e.to_string()))?;
    grid.normalize();
    Ok(grid)
}

/// Parses and validates a grid document; element tables come back sorted by id.
pub fn parse_grid(raw: &str) -> Result<PowerGridModel, GridError> {
    let grid = read_grid_document(raw)?;
    let findings = validate_grid(&grid);
    let (reference, domain): (Vec<_>, Vec<_>) =
        findings.into_iter().partition(|f| f.rule.is_reference());
    if !reference.is_empty() {
        return Err(GridError::Reference(reference));
    }
    if !domain.is_empty() {
        return Err(GridError::Domain(domain));
    }
    Ok(grid)
}
