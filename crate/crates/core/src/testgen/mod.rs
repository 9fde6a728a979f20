//! Test case generation from testable rules: equivalence partitioning over
//! every clause, boundary value analysis on numeric and time thresholds,
//! exhaustive enumeration of finite domains, and scenario construction from
//! inter-rule links.

pub mod cases;
pub mod partition;
pub mod scenario;
pub mod suite;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::knowledge::{SemanticType, SymbolLibrary};
use crate::trl::eval::Assignment;
use crate::trl::{AtomicClause, RuleSet};
use crate::value::Value;

pub use cases::{generate_cases, negate_outcome};
pub use partition::{partition_atom, partition_atom_in_context};
pub use scenario::build_scenarios;
pub use suite::{generate_suite, Suite};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TestgenError {
    #[error("atom {atom:?} is unsatisfiable: {reason}")]
    UnsatisfiableAtom { atom: String, reason: String },
    #[error("condition expands to more than {cap} variants")]
    TooManyVariants { cap: usize },
    #[error("atom {atom:?} has no usable value domain: {reason}")]
    NoDomain { atom: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Boundary,
    Negative,
}

impl Polarity {
    pub fn rank(&self) -> u8 {
        match self {
            Polarity::Positive => 0,
            Polarity::Boundary => 1,
            Polarity::Negative => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseProvenance {
    pub rule_id: u64,
    /// Index of the conjunctive variant the case was generated from.
    pub variant: usize,
    /// Rendered literal that a negative case violates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutated_atom: Option<String>,
}

/// A concrete test case: slot assignments for the condition plus the
/// expected result atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub id: u64,
    pub assignments: Assignment,
    pub expected: Assignment,
    pub polarity: Polarity,
    pub provenance: CaseProvenance,
}

impl TestCase {
    /// Flat JSON object: `{"id": n, "<Key>": value, ..., "Result": ...}`.
    pub fn to_flat_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("id".to_string(), self.id.into());
        for (key, value) in &self.assignments {
            obj.insert(key.clone(), value.to_json());
        }
        for (key, value) in &self.expected {
            obj.insert(key.clone(), value.to_json());
        }
        serde_json::Value::Object(obj)
    }
}

/// Equivalence partition of one clause: representative values that satisfy
/// it, values that violate it, and values sitting exactly on its boundary
/// (boundary representatives always satisfy the clause).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub atom: AtomicClause,
    pub kind: PartitionKind,
    pub valid_reps: Vec<Value>,
    pub invalid_reps: Vec<Value>,
    pub boundary_reps: Vec<Value>,
}

impl Partition {
    /// The representative a positive case uses: the first valid value that
    /// is not also a boundary, so boundary cases stay distinct.
    pub fn primary_valid(&self) -> &Value {
        self.valid_reps
            .iter()
            .find(|v| !self.boundary_reps.contains(v))
            .unwrap_or(&self.valid_reps[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    NumericInterval,
    Modulo,
    Enum,
    Time,
    Boolean,
}

/// Per-key value domain configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyDomain {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<Decimal>,
    /// Boundary step for this key; overrides the semantic-type default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<Decimal>,
    /// Declared finite value domain, exhaustively enumerated.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
}

/// Value domains for generation: per-key bounds and granularities, plus
/// values observed across a rule set as the fallback enum domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDomains {
    #[serde(default)]
    pub keys: BTreeMap<String, KeyDomain>,
    /// Observed string values per base key, collected from a rule set.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observed: BTreeMap<String, Vec<String>>,
}

impl ValueDomains {
    /// Finance defaults: non-negative quantities and balances at unit
    /// granularity, prices at cent granularity.
    pub fn finance_defaults() -> Self {
        let mut keys = BTreeMap::new();
        let dec = |s: &str| -> Decimal { s.parse().unwrap() };
        keys.insert(
            "Quantity".to_string(),
            KeyDomain { min: Some(dec("0")), max: None, granularity: Some(dec("1")), values: vec![] },
        );
        keys.insert(
            "Balance".to_string(),
            KeyDomain { min: Some(dec("0")), max: None, granularity: Some(dec("1")), values: vec![] },
        );
        keys.insert(
            "Price".to_string(),
            KeyDomain { min: Some(dec("0")), max: None, granularity: Some(dec("0.01")), values: vec![] },
        );
        ValueDomains { keys, observed: BTreeMap::new() }
    }

    pub fn granularity(&self, base_key: &str) -> Decimal {
        self.keys
            .get(base_key)
            .and_then(|d| d.granularity.clone())
            .unwrap_or_else(Decimal::one)
    }

    /// Seconds between adjacent time representatives.
    pub fn time_granularity_secs(&self) -> i64 {
        60
    }

    pub fn min(&self, base_key: &str) -> Option<Decimal> {
        self.keys.get(base_key).and_then(|d| d.min.clone())
    }

    pub fn max(&self, base_key: &str) -> Option<Decimal> {
        self.keys.get(base_key).and_then(|d| d.max.clone())
    }

    /// Finite string domain for a key: declared config values, else the
    /// symbol library's enum declaration, else values observed in the rule
    /// set, else nothing.
    pub fn enum_values(&self, base_key: &str, symbols: &SymbolLibrary) -> Vec<String> {
        if let Some(d) = self.keys.get(base_key) {
            if !d.values.is_empty() {
                return d.values.clone();
            }
        }
        if let Some(SemanticType::Enum(values)) = symbols.semantic_type(base_key) {
            if !values.is_empty() {
                return values.clone();
            }
        }
        self.observed.get(base_key).cloned().unwrap_or_default()
    }

    /// Collect the string values each base key takes across a rule set, as
    /// the fallback enum domain.
    pub fn with_observed(mut self, rules: &RuleSet) -> Self {
        for rule in &rules.rules {
            for atom in rule.condition.atoms() {
                if let Value::Str(s) = &atom.value {
                    let base = crate::trl::base_key(&atom.key);
                    let list = self.observed.entry(base).or_default();
                    if !list.contains(s) {
                        list.push(s.clone());
                    }
                }
                if let Value::StrList(items) = &atom.value {
                    let base = crate::trl::base_key(&atom.key);
                    let list = self.observed.entry(base).or_default();
                    for s in items {
                        if !list.contains(s) {
                            list.push(s.clone());
                        }
                    }
                }
            }
        }
        self
    }
}

/// Generation strategy knobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenStrategy {
    /// Also emit two-factor negative cases. Off by default: one-factor
    /// keeps suites compact.
    #[serde(default)]
    pub pairwise: bool,
    /// Maximum conjunctive variants a condition may expand to.
    #[serde(default = "default_variant_cap")]
    pub variant_cap: usize,
    /// Expected result value for negated outcomes whose value has no
    /// natural opposite.
    #[serde(default = "default_failure_sentinel")]
    pub failure_sentinel: String,
}

fn default_variant_cap() -> usize {
    64
}

fn default_failure_sentinel() -> String {
    "Failure".to_string()
}

impl Default for GenStrategy {
    fn default() -> Self {
        GenStrategy {
            pairwise: false,
            variant_cap: default_variant_cap(),
            failure_sentinel: default_failure_sentinel(),
        }
    }
}
