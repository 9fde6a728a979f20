//! Executable testability constraints over parsed rules.
//!
//! Each built-in constraint kind maps to a hand-written predicate; the OCL
//! text on a constraint is audit metadata, not executed. Custom constraints
//! are recorded as informational notes and never fail a rule.

pub mod checks;

use serde::{Deserialize, Serialize};

use crate::knowledge::matching::split_words;
use crate::trl::{render_rule, Rule};

pub use checks::{
    assess, check_action_executability, check_determinism, check_non_conflict, check_result_observability,
    check_structural_completeness, exclusion_report, non_conflict_advisories,
};

/// One constraint violation on one rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint_id: String,
    pub rule_id: u64,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offending_atom: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disposition {
    Accepted,
    Refined,
    ExcludedForReview,
}

/// Per-rule testability outcome. `testable` holds exactly when `violations`
/// is empty; a `Refined` disposition always carries the replacement rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub rule_id: u64,
    pub testable: bool,
    pub violations: Vec<Violation>,
    pub disposition: Disposition,
    pub replacement: Option<Rule>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn accepted(rule_id: u64) -> Self {
        Verdict {
            rule_id,
            testable: true,
            violations: Vec::new(),
            disposition: Disposition::Accepted,
            replacement: None,
            notes: Vec::new(),
        }
    }

    /// Flat JSON object for JSONL streaming; the replacement rule is carried
    /// as canonical rule text.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("rule_id".into(), self.rule_id.into());
        obj.insert("testable".into(), self.testable.into());
        obj.insert(
            "disposition".into(),
            serde_json::to_value(self.disposition).expect("disposition serializes"),
        );
        obj.insert(
            "violations".into(),
            serde_json::to_value(&self.violations).expect("violations serialize"),
        );
        if let Some(replacement) = &self.replacement {
            obj.insert("replacement_text".into(), render_rule(replacement).into());
        }
        if !self.notes.is_empty() {
            obj.insert("notes".into(), serde_json::to_value(&self.notes).expect("notes serialize"));
        }
        serde_json::Value::Object(obj)
    }
}

/// Markers that make a value non-deterministic: vague phrasing, references
/// to other provisions, and indeterminate placeholders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaguenessLexicon {
    pub phrases: Vec<String>,
    pub reference_markers: Vec<String>,
    pub indeterminate_value_markers: Vec<String>,
}

impl Default for VaguenessLexicon {
    fn default() -> Self {
        let list = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        VaguenessLexicon {
            phrases: list(&[
                "session",
                "appropriate",
                "as needed",
                "as soon as possible",
                "reasonable",
                "timely",
                "promptly",
                "approximately",
                "relevant",
                "applicable",
                "necessary",
                "periodically",
                "regularly",
                "in principle",
            ]),
            reference_markers: list(&[
                "article",
                "previous",
                "aforementioned",
                "preceding",
                "chapter",
                "annex",
                "paragraph",
                "clause",
                "above",
            ]),
            indeterminate_value_markers: list(&[
                "other",
                "otherwise specified",
                "unless otherwise",
                "etc",
                "and so on",
                "so forth",
                "miscellaneous",
                "unspecified",
                "various",
            ]),
        }
    }
}

impl VaguenessLexicon {
    /// Why a value text is non-deterministic, or `None` when it is concrete.
    /// Camel-case values are split to words first, so `CoreBondTradingSession`
    /// matches the phrase `session`.
    pub fn flag(&self, value_text: &str) -> Option<String> {
        let words = split_words(value_text);
        if words.is_empty() {
            return Some("empty value".to_string());
        }
        let flat = words.join(" ");
        let word_hit = |marker: &str| {
            words.iter().any(|w| {
                w == marker || (w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") && &w[..w.len() - 1] == marker)
            })
        };
        let hit = |markers: &[String]| -> Option<String> {
            markers
                .iter()
                .find(|m| if m.contains(' ') { flat.contains(m.as_str()) } else { word_hit(m) })
                .cloned()
        };
        if let Some(m) = hit(&self.phrases) {
            return Some(format!("vague phrase {m:?}"));
        }
        if let Some(m) = hit(&self.reference_markers) {
            return Some(format!("reference marker {m:?}"));
        }
        if let Some(m) = hit(&self.indeterminate_value_markers) {
            return Some(format!("indeterminate value marker {m:?}"));
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lexicon_flags_known_vagueness() {
        let lex = VaguenessLexicon::default();
        assert!(lex.flag("core bond trading session").unwrap().contains("session"));
        assert!(lex.flag("CoreBondTradingSession").unwrap().contains("session"));
        assert!(lex.flag("unless otherwise specified").is_some());
        assert!(lex.flag("Others").unwrap().contains("other"));
        assert!(lex.flag("Article5").unwrap().contains("article"));
        assert!(lex.flag("").unwrap().contains("empty"));
    }

    #[test]
    fn concrete_values_pass() {
        let lex = VaguenessLexicon::default();
        assert_eq!(lex.flag("100000"), None);
        assert_eq!(lex.flag("BlockTrading"), None);
        assert_eq!(lex.flag("09:30"), None);
        // Word-level matching: no substring false positives.
        assert_eq!(lex.flag("Mothers"), None);
        assert_eq!(lex.flag("Brotherhood"), None);
    }
}
