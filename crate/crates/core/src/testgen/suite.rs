//! Whole-set suite assembly: per-rule cases, global deduplication, scenario
//! annotation, deterministic ordering, and the emitted file formats.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::knowledge::SymbolLibrary;
use crate::trl::RuleSet;

use super::scenario::{build_scenarios, Scenario};
use super::{generate_cases, GenStrategy, Polarity, TestCase, TestgenError, ValueDomains};

/// A generated suite: ordered cases, the scenario partition, and the
/// per-rule errors that did not stop the run.
#[derive(Clone, Debug)]
pub struct Suite {
    pub cases: Vec<TestCase>,
    pub scenarios: Vec<Scenario>,
    pub errors: Vec<(u64, TestgenError)>,
}

impl Suite {
    pub fn scenario_of(&self, rule_id: u64) -> Option<u64> {
        self.scenarios.iter().find(|s| s.member_rules.contains(&rule_id)).map(|s| s.id)
    }

    /// The suite as a JSON array of flat objects.
    pub fn to_suite_json(&self) -> String {
        let array: Vec<serde_json::Value> = self.cases.iter().map(|c| c.to_flat_json()).collect();
        let mut text = serde_json::to_string_pretty(&array).expect("suite serializes");
        text.push('\n');
        text
    }

    /// Sidecar metadata mapping case ids to provenance.
    pub fn to_sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct SidecarCase<'a> {
            id: u64,
            rule_id: u64,
            scenario_id: u64,
            polarity: Polarity,
            variant: usize,
            #[serde(skip_serializing_if = "Option::is_none")]
            mutated_atom: Option<&'a str>,
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            schema_version: u32,
            cases: Vec<SidecarCase<'a>>,
        }
        let sidecar = Sidecar {
            schema_version: crate::knowledge::SCHEMA_VERSION,
            cases: self
                .cases
                .iter()
                .map(|c| SidecarCase {
                    id: c.id,
                    rule_id: c.provenance.rule_id,
                    scenario_id: self.scenario_of(c.provenance.rule_id).unwrap_or(0),
                    polarity: c.polarity,
                    variant: c.provenance.variant,
                    mutated_atom: c.provenance.mutated_atom.as_deref(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        text.push('\n');
        text
    }
}

/// Generate cases for every rule, deduplicate globally on
/// `(assignments, expected)`, and order deterministically by
/// (scenario, rule, polarity). Per-rule failures are collected, not fatal.
pub fn generate_suite(
    rules: &RuleSet,
    symbols: &SymbolLibrary,
    domains: &ValueDomains,
    strategy: &GenStrategy,
) -> Suite {
    let scenarios = build_scenarios(rules);
    let enriched = domains.clone().with_observed(rules);
    let scenario_of: BTreeMap<u64, u64> = scenarios
        .iter()
        .flat_map(|s| s.member_rules.iter().map(move |r| (*r, s.id)))
        .collect();
    let doc_index: BTreeMap<u64, usize> = rules.rules.iter().enumerate().map(|(i, r)| (r.id, i)).collect();

    let mut collected: Vec<TestCase> = Vec::new();
    let mut errors = Vec::new();
    for rule in &rules.rules {
        match generate_cases(rule, symbols, &enriched, strategy) {
            Ok(cases) => {
                for case in cases {
                    let duplicate = collected
                        .iter()
                        .any(|c| c.assignments == case.assignments && c.expected == case.expected);
                    if !duplicate {
                        collected.push(case);
                    }
                }
            }
            Err(e) => errors.push((rule.id, e)),
        }
    }

    collected.sort_by_key(|c| {
        (
            scenario_of.get(&c.provenance.rule_id).copied().unwrap_or(u64::MAX),
            doc_index.get(&c.provenance.rule_id).copied().unwrap_or(usize::MAX),
            c.polarity.rank(),
            c.id,
        )
    });
    for (i, case) in collected.iter_mut().enumerate() {
        case.id = (i + 1) as u64;
    }

    Suite { cases: collected, scenarios, errors }
}

/// Parse a suite JSON array back into flat string maps (used by evaluation).
pub fn parse_flat_cases(text: &str) -> Result<Vec<BTreeMap<String, serde_json::Value>>, serde_json::Error> {
    #[derive(Deserialize)]
    struct Flat(BTreeMap<String, serde_json::Value>);
    let parsed: Vec<Flat> = serde_json::from_str(text)?;
    Ok(parsed.into_iter().map(|f| f.0).collect())
}
