use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{PowerGridModel, SwitchTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    EmptyGrid,
    DuplicateId,
    DanglingRef,
    SwitchEndpoint,
    NonpositiveVoltage,
    NegativeLength,
    TapRange,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::EmptyGrid => "empty-grid",
            Rule::DuplicateId => "duplicate-id",
            Rule::DanglingRef => "dangling-ref",
            Rule::SwitchEndpoint => "switch-endpoint",
            Rule::NonpositiveVoltage => "nonpositive-voltage",
            Rule::NegativeLength => "negative-length",
            Rule::TapRange => "tap-range",
        }
    }

    /// Reference rules make the model structurally unusable; the rest are domain rules.
    pub fn is_reference(&self) -> bool {
        matches!(
            self,
            Rule::EmptyGrid | Rule::DanglingRef | Rule::SwitchEndpoint
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub rule: Rule,
    pub element: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.element, self.message)
    }
}

/// Checks every grid invariant and returns the findings sorted by rule and element.
pub fn validate_grid(grid: &PowerGridModel) -> Vec<Finding> {
    let mut findings: Vec<Finding> = Vec::new();
    macro_rules! push {
        ($rule:expr, $element:expr, $message:expr $(,)?) => {
            findings.push(Finding {
                rule: $rule,
                element: $element.to_string(),
                message: $message,
            })
        };
    }

    if grid.buses.is_empty() {
        push!(Rule::EmptyGrid, "buses", "grid has no buses".into());
    }

    let check_unique = |category: &str, ids: Vec<&str>, findings: &mut Vec<Finding>| {
        let mut seen = BTreeMap::new();
        for id in ids {
            *seen.entry(id).or_insert(0usize) += 1;
        }
        for (id, n) in seen.into_iter().filter(|(_, n)| *n > 1) {
            findings.push(Finding {
                rule: Rule::DuplicateId,
                element: id.to_string(),
                message: format!("{category} id {id:?} used {n} times"),
            });
        }
    };
    check_unique(
        "bus",
        grid.buses.iter().map(|b| b.id.as_str()).collect(),
        &mut findings,
    );
    check_unique(
        "branch",
        grid.branches.iter().map(|b| b.id.as_str()).collect(),
        &mut findings,
    );
    check_unique(
        "transformer",
        grid.transformers.iter().map(|b| b.id.as_str()).collect(),
        &mut findings,
    );
    check_unique(
        "load",
        grid.loads.iter().map(|b| b.id.as_str()).collect(),
        &mut findings,
    );
    check_unique(
        "generator",
        grid.generators.iter().map(|b| b.id.as_str()).collect(),
        &mut findings,
    );
    check_unique(
        "switch",
        grid.switches.iter().map(|b| b.id.as_str()).collect(),
        &mut findings,
    );

    let buses: BTreeSet<&str> = grid.buses.iter().map(|b| b.id.as_str()).collect();
    let dangling = |owner: &str, bus: &str| {
        (!buses.contains(bus)).then(|| Finding {
            rule: Rule::DanglingRef,
            element: owner.to_string(),
            message: format!("references unknown bus {bus:?}"),
        })
    };
    if !grid.buses.is_empty() {
        findings.extend(dangling("external_grid", &grid.external_grid));
    }
    for br in &grid.branches {
        findings.extend(dangling(&br.id, &br.from_bus));
        findings.extend(dangling(&br.id, &br.to_bus));
    }
    for t in &grid.transformers {
        findings.extend(dangling(&t.id, &t.hv_bus));
        findings.extend(dangling(&t.id, &t.lv_bus));
    }
    for l in &grid.loads {
        findings.extend(dangling(&l.id, &l.bus));
    }
    for g in &grid.generators {
        findings.extend(dangling(&g.id, &g.bus));
    }
    for s in &grid.switches {
        findings.extend(dangling(&s.id, &s.bus));
        match s.et {
            SwitchTarget::Bus => findings.extend(dangling(&s.id, &s.element)),
            SwitchTarget::Line => match grid.branch(&s.element) {
                None => push!(
                    Rule::DanglingRef,
                    &s.id,
                    format!("references unknown branch {:?}", s.element),
                ),
                Some(br) if br.from_bus != s.bus && br.to_bus != s.bus => push!(
                    Rule::SwitchEndpoint,
                    &s.id,
                    format!("bus {:?} is not an end of branch {:?}", s.bus, br.id),
                ),
                Some(_) => {}
            },
        }
    }

    for b in &grid.buses {
        if b.vn_kv.is_nan() || b.vn_kv <= 0.0 {
            push!(
                Rule::NonpositiveVoltage,
                &b.id,
                format!("nominal voltage {} kV is not positive", b.vn_kv),
            );
        }
    }
    for br in &grid.branches {
        if br.length_km.is_nan() || br.length_km < 0.0 {
            push!(
                Rule::NegativeLength,
                &br.id,
                format!("length {} km is negative", br.length_km),
            );
        }
    }
    for t in &grid.transformers {
        if t.tap_min > t.tap_max || t.tap_pos < t.tap_min || t.tap_pos > t.tap_max {
            push!(
                Rule::TapRange,
                &t.id,
                format!(
                    "tap position {} outside [{}, {}]",
                    t.tap_pos, t.tap_min, t.tap_max
                ),
            );
        }
    }

    findings.sort();
    findings.dedup();
    findings
}
