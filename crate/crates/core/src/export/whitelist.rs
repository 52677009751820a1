use std::fmt::Write;
use std::str::FromStr;

use super::ExportError;
use crate::net_config::{RuleDirection, WhitelistRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhitelistFormat {
    /// Comma-separated table with a header row.
    Csv,
    /// Firewall-style `allow` lines followed by a default deny.
    Rules,
}

impl WhitelistFormat {
    pub fn extension(self) -> &'static str {
        match self {
            WhitelistFormat::Csv => "csv",
            WhitelistFormat::Rules => "rules",
        }
    }
}

impl FromStr for WhitelistFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" | "tabular" => Ok(WhitelistFormat::Csv),
            "rules" | "rule-text" => Ok(WhitelistFormat::Rules),
            other => Err(ExportError::UnknownFormat {
                what: "whitelist",
                token: other.to_string(),
            }),
        }
    }
}

pub const CSV_HEADER: &str = "src,dst,port,protocol,direction,src_node,dst_node,connection,points";

fn sorted(rules: &[WhitelistRule]) -> Vec<&WhitelistRule> {
    let mut v: Vec<&WhitelistRule> = rules.iter().collect();
    v.sort_by(|a, b| {
        (a.src, a.dst, a.port, &a.connection).cmp(&(b.src, b.dst, b.port, &b.connection))
    });
    v
}

fn direction(r: &WhitelistRule) -> &'static str {
    match r.direction {
        RuleDirection::MasterToSlave => "master_to_slave",
    }
}

fn points_field(r: &WhitelistRule) -> String {
    r.points
        .iter()
        .map(|t| format!("{}:{}:{}", t.coa, t.ioa, t.type_id))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn export_whitelist(rules: &[WhitelistRule], format: WhitelistFormat) -> String {
    let mut out = String::new();
    match format {
        WhitelistFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in sorted(rules) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.src,
                    r.dst,
                    r.port,
                    r.protocol,
                    direction(r),
                    r.src_node,
                    r.dst_node,
                    r.connection,
                    points_field(r)
                );
            }
        }
        WhitelistFormat::Rules => {
            for r in sorted(rules) {
                let _ = writeln!(
                    out,
                    "allow tcp from {} to {} port {} established-reply # {} {} points={}",
                    r.src,
                    r.dst,
                    r.port,
                    r.connection,
                    r.protocol,
                    r.points.len()
                );
            }
            out.push_str("deny ip from any to any\n");
        }
    }
    out
}
