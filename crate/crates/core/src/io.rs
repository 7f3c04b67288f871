//! JSON market and claim files.
//!
//! Rationals are strings: an integer (`"3"`), a fraction with positive
//! denominator (`"1/3"`) or a finite decimal (`"0.25"`), all read exactly.
//! Unknown fields are rejected so that typos surface as errors.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{Claim, Generator, MarketModel, MeasureFamily, Node, NodeId, OptionQuote, ScenarioTree, ValidationReport};
use crate::rational::Rational;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MarketFile {
    pub schema_version: u64,
    pub tree: TreeFile,
    #[serde(default)]
    pub options: Vec<OptionQuote>,
    pub measures: Vec<Generator>,
    pub leaf_order: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ClaimFile {
    pub schema_version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub payoff: Vec<Rational>,
}

fn parse_error(path: &str, message: impl Into<String>) -> Error {
    let mut rep = ValidationReport::default();
    rep.push(path, message);
    Error::Parse(rep)
}

/// Checks the version before the strict decode, then reports the first
/// decode error at its JSON path.
fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| parse_error("$", e.to_string()))?;
    match value.get("schemaVersion") {
        None => return Err(parse_error("schemaVersion", "missing field")),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(parse_error(
                "schemaVersion",
                format!("unsupported schema version {v}, expected {SCHEMA_VERSION}"),
            ))
        }
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        parse_error(&path, e.into_inner().to_string())
    })
}

impl MarketFile {
    pub fn into_model(self) -> MarketModel {
        let periods = self.tree.nodes.iter().map(|n| n.time).max().unwrap_or(0);
        let assets = self
            .tree
            .nodes
            .iter()
            .find(|n| n.parent.is_none())
            .map_or(0, |n| n.prices.len());
        MarketModel {
            tree: ScenarioTree { nodes: self.tree.nodes, periods, assets, leaf_order: self.leaf_order },
            options: self.options,
            measures: MeasureFamily { generators: self.measures },
        }
    }

    pub fn from_model(m: &MarketModel) -> Self {
        MarketFile {
            schema_version: SCHEMA_VERSION,
            tree: TreeFile { nodes: m.tree.nodes.clone() },
            options: m.options.clone(),
            measures: m.measures.generators.clone(),
            leaf_order: m.tree.leaf_order.clone(),
        }
    }
}

/// Reads and validates a market file. The horizon is the largest node
/// time and the asset count is the length of the root's price vector.
pub fn parse_market(bytes: &[u8]) -> Result<MarketModel> {
    let file: MarketFile = decode(bytes)?;
    let m = file.into_model();
    m.ensure_valid()?;
    Ok(m)
}

pub fn write_market(m: &MarketModel) -> String {
    serde_json::to_string_pretty(&MarketFile::from_model(m)).expect("market files always serialize")
}

pub fn parse_claim(bytes: &[u8]) -> Result<Claim> {
    let file: ClaimFile = decode(bytes)?;
    Ok(Claim::new(file.payoff))
}

pub fn write_claim(f: &Claim) -> String {
    let file = ClaimFile { schema_version: SCHEMA_VERSION, name: None, payoff: f.payoff.clone() };
    serde_json::to_string_pretty(&file).expect("claim files always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m1, m2, m3, m4, single_leaf, two_period};
    use crate::rational::q;

    const M1: &str = r#"{
        "schemaVersion": 1,
        "tree": {"nodes": [
            {"id": 0, "time": 0, "parent": null, "prices": ["1"]},
            {"id": 1, "time": 1, "parent": 0, "prices": ["2"]},
            {"id": 2, "time": 1, "parent": 0, "prices": ["0.5"]}
        ]},
        "options": [],
        "measures": [
            {"name": "delta1", "weights": ["1", "0"]},
            {"name": "delta2", "weights": ["0", "1"]}
        ],
        "leafOrder": [1, 2]
    }"#;

    fn only_violation(e: Error) -> (String, String) {
        match e {
            Error::Parse(rep) | Error::InvalidMarket(rep) => {
                let v = rep.violations.into_iter().next().unwrap();
                (v.path, v.message)
            }
            other => panic!("expected a located error, got {other:?}"),
        }
    }

    #[test]
    fn reads_the_binomial_market() {
        let m = parse_market(M1.as_bytes()).unwrap();
        assert_eq!(m.tree.nodes.len(), 3);
        assert_eq!(m.num_leaves(), 2);
        assert_eq!(m, m1());
    }

    #[test]
    fn decimals_are_exact() {
        let text = M1.replace(r#""options": []"#, r#""options": [{"name": "d", "payoff": ["1", "0"], "bid": "0.25", "ask": "1/2"}]"#);
        let m = parse_market(text.as_bytes()).unwrap();
        assert_eq!(m.options[0].bid, q(1, 4));
    }

    #[test]
    fn located_errors() {
        let text = M1.replacen(r#""prices": ["1"]"#, r#""prices": ["1/0"]"#, 1);
        let (path, msg) = only_violation(parse_market(text.as_bytes()).unwrap_err());
        assert_eq!(path, "tree.nodes[0].prices[0]");
        assert!(msg.contains("zero denominator"), "{msg}");

        let text = M1.replacen(r#""parent": 0"#, r#""parnet": 0"#, 1);
        let (path, msg) = only_violation(parse_market(text.as_bytes()).unwrap_err());
        assert!(path.starts_with("tree.nodes[1]"), "{path}");
        assert!(msg.contains("parnet"), "{msg}");

        let text = M1.replace(r#""1", "0""#, r#""1/2", "1/3""#);
        let (path, msg) = only_violation(parse_market(text.as_bytes()).unwrap_err());
        assert_eq!(path, "measures[0].weights");
        assert_eq!(msg, "measure sums to 5/6 ≠ 1");

        let (path, _) = only_violation(parse_market(b"{").unwrap_err());
        assert_eq!(path, "$");
        let text = M1.replace(r#""schemaVersion": 1"#, r#""schemaVersion": 2"#);
        let (path, _) = only_violation(parse_market(text.as_bytes()).unwrap_err());
        assert_eq!(path, "schemaVersion");
    }

    #[test]
    fn round_trips() {
        for m in [m1(), m2(), m3(), m4(), single_leaf(), two_period()] {
            let text = write_market(&m);
            assert_eq!(parse_market(text.as_bytes()).unwrap(), m);
            assert_eq!(write_market(&parse_market(text.as_bytes()).unwrap()), text);
        }
        let f = Claim::new(vec![q(1, 3), q(-2, 1)]);
        assert_eq!(parse_claim(write_claim(&f).as_bytes()).unwrap(), f);
    }

    #[test]
    fn claims() {
        let f = parse_claim(br#"{"schemaVersion": 1, "name": "call", "payoff": ["1", "0"]}"#).unwrap();
        assert_eq!(f.payoff, vec![q(1, 1), q(0, 1)]);
        assert!(parse_claim(br#"{"schemaVersion": 1, "payof": []}"#).is_err());
    }
}
