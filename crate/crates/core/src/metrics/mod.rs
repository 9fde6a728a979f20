//! Evaluation harness: case matching against ground truth with
//! precision/recall/F1, business scenario coverage, token- and word-level
//! text overlap, and usage/cost reporting.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::gateway::UsageStats;
use crate::testgen::scenario::Scenario;
use crate::testgen::TestCase;
use crate::trl::eval::{eval_condition, Assignment};
use crate::trl::lexer::{lex, TokenKind};
use crate::trl::{base_key, RuleSet};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Normalized maps must be equal.
    ExactMap,
    /// Every generated entry must appear in the truth record (truth may
    /// carry extra keys).
    Subset,
}

/// Normalization applied before case comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub mode: MatchMode,
    /// Lowercase keys before comparison.
    pub case_fold_keys: bool,
    /// Strip numeric key suffixes (`Time2` compares as `Time`). Off by
    /// default: suffixed slots are distinct bindings.
    pub strip_key_suffix: bool,
    /// Key synonym folding, applied after case folding.
    #[serde(default)]
    pub synonyms: BTreeMap<String, String>,
    /// Canonicalize numeric values so `"50000"` equals `50000`.
    pub numeric_canonical: bool,
    /// Collapse whitespace runs inside string values.
    pub whitespace_fold: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            mode: MatchMode::ExactMap,
            case_fold_keys: true,
            strip_key_suffix: false,
            synonyms: BTreeMap::new(),
            numeric_canonical: true,
            whitespace_fold: true,
        }
    }
}

pub type FlatCase = BTreeMap<String, serde_json::Value>;

fn normalize_key(key: &str, cfg: &MatchConfig) -> String {
    let mut k = key.trim().to_string();
    if cfg.strip_key_suffix {
        k = base_key(&k);
    }
    if cfg.case_fold_keys {
        k = k.to_lowercase();
    }
    if let Some(canonical) = cfg.synonyms.get(&k) {
        k = canonical.clone();
    }
    k
}

fn normalize_value(value: &serde_json::Value, cfg: &MatchConfig) -> String {
    let text = match value {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::Bool(b) => b.to_string(),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    };
    let text = text.trim().to_string();
    if cfg.numeric_canonical {
        if let Ok(d) = Decimal::from_str(&text) {
            return d.to_string();
        }
    }
    if cfg.whitespace_fold {
        return text.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    text
}

/// Normalized comparison form of a flat case; the `id` field never takes
/// part in matching.
pub fn normalize_case(case: &FlatCase, cfg: &MatchConfig) -> BTreeMap<String, String> {
    case.iter()
        .filter(|(k, _)| k.as_str() != "id")
        .map(|(k, v)| (normalize_key(k, cfg), normalize_value(v, cfg)))
        .collect()
}

/// Result of matching generated cases against ground truth.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Matching {
    /// Pairs of (generated index, truth index).
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_generated: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
    pub generated_total: usize,
    pub truth_total: usize,
    pub warnings: Vec<String>,
}

/// Greedy one-to-one matching on normalized equality. With exact-map
/// equality greedy is optimal (equal forms are interchangeable); subset
/// mode is greedy in document order.
pub fn match_cases(generated: &[FlatCase], truth: &[FlatCase], cfg: &MatchConfig) -> Matching {
    let mut matching = Matching {
        generated_total: generated.len(),
        truth_total: 0,
        ..Default::default()
    };

    let mut truth_forms: Vec<(usize, BTreeMap<String, String>)> = Vec::new();
    for (i, record) in truth.iter().enumerate() {
        if !record.contains_key("id") {
            matching.warnings.push(format!("truth record at index {i} has no id field; skipped"));
            continue;
        }
        truth_forms.push((i, normalize_case(record, cfg)));
    }
    matching.truth_total = truth_forms.len();

    let mut taken = vec![false; truth_forms.len()];
    for (gi, g) in generated.iter().enumerate() {
        let g_form = normalize_case(g, cfg);
        let found = truth_forms.iter().enumerate().find(|(ti, (_, t_form))| {
            if taken[*ti] {
                return false;
            }
            match cfg.mode {
                MatchMode::ExactMap => *t_form == g_form,
                MatchMode::Subset => g_form.iter().all(|(k, v)| t_form.get(k) == Some(v)),
            }
        });
        match found {
            Some((ti, (truth_index, _))) => {
                taken[ti] = true;
                matching.pairs.push((gi, *truth_index));
            }
            None => matching.unmatched_generated.push(gi),
        }
    }
    for (ti, (truth_index, _)) in truth_forms.iter().enumerate() {
        if !taken[ti] {
            matching.unmatched_truth.push(*truth_index);
        }
    }
    matching
}

/// Precision, recall and F1 of a matching. An empty generated set gives
/// zero precision by definition (flagged in the report, not an error).
pub fn precision_recall_f1(matching: &Matching) -> (f64, f64, f64) {
    let m = matching.pairs.len() as f64;
    let p = if matching.generated_total == 0 { 0.0 } else { m / matching.generated_total as f64 };
    let r = if matching.truth_total == 0 { 0.0 } else { m / matching.truth_total as f64 };
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuleCoverage {
    pub rule_id: u64,
    pub covered: bool,
    /// Id of the first generated case whose assignments satisfy the rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covering_case: Option<u64>,
}

/// Business scenario coverage: a rule is covered when some generated case
/// satisfies its condition; a scenario is covered when all member rules
/// are; the ratio is covered scenarios over total. `None` when there are
/// no scenarios (undefined, distinct from zero).
pub fn bsc(
    generated: &[TestCase],
    rules: &RuleSet,
    scenarios: &[Scenario],
) -> (Option<f64>, Vec<RuleCoverage>) {
    let coverage: Vec<RuleCoverage> = rules
        .rules
        .iter()
        .map(|rule| {
            let covering = generated
                .iter()
                .find(|case| eval_condition(&rule.condition, &case.assignments))
                .map(|case| case.id);
            RuleCoverage { rule_id: rule.id, covered: covering.is_some(), covering_case: covering }
        })
        .collect();
    if scenarios.is_empty() {
        return (None, coverage);
    }
    let covered_scenarios = scenarios
        .iter()
        .filter(|s| {
            s.member_rules.iter().all(|id| {
                coverage.iter().find(|c| c.rule_id == *id).map(|c| c.covered).unwrap_or(false)
            })
        })
        .count();
    (Some(covered_scenarios as f64 / scenarios.len() as f64), coverage)
}

/// Reconstruct condition assignments and expected atoms from a flat case
/// map (the suite JSON shape).
pub fn flat_to_assignment(case: &FlatCase) -> (Assignment, Assignment) {
    let mut assignments = Assignment::new();
    let mut expected = Assignment::new();
    for (key, json) in case {
        if key == "id" {
            continue;
        }
        let value = json_to_value(json);
        let base = base_key(key);
        if base == "Result" || base == "ResultStatus" {
            expected.insert(key.clone(), value);
        } else {
            assignments.insert(key.clone(), value);
        }
    }
    (assignments, expected)
}

fn json_to_value(json: &serde_json::Value) -> Value {
    match json {
        serde_json::Value::Number(n) => {
            Decimal::from_str(&n.to_string()).map(Value::Num).unwrap_or_else(|_| Value::Str(n.to_string()))
        }
        serde_json::Value::Bool(b) => Value::Bool(*b),
        serde_json::Value::String(s) => {
            if let Ok(t) = s.parse::<crate::value::TimeOfDay>() {
                return Value::Time(t);
            }
            if let Some((a, b)) = s.split_once('-') {
                if let (Ok(start), Ok(end)) = (a.trim().parse(), b.trim().parse()) {
                    if let Some(r) = crate::value::TimeRange::new(start, end) {
                        return Value::TimeRange(r);
                    }
                }
            }
            if let Ok(d) = Decimal::from_str(s) {
                return Value::Num(d);
            }
            Value::Str(s.clone())
        }
        other => Value::Str(other.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextUnit {
    /// Rule-language lexer tokens.
    Token,
    /// Whitespace/punctuation-separated words, case folded.
    Word,
}

fn token_strings(text: &str) -> Vec<String> {
    let (tokens, _) = lex(text);
    tokens
        .into_iter()
        .filter_map(|t| match t.kind {
            TokenKind::Eof => None,
            TokenKind::Ident(s) => Some(s),
            TokenKind::Number(n) => Some(n.to_string()),
            TokenKind::Time(t) => Some(t.to_string()),
            TokenKind::Str(s) => Some(format!("\"{s}\"")),
            other => Some(other.describe()),
        })
        .collect()
}

fn word_strings(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

fn multiset(items: Vec<String>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for item in items {
        *out.entry(item).or_insert(0) += 1;
    }
    out
}

/// Multiset precision/recall/F1 of generated text against truth text.
pub fn token_prf(generated_text: &str, truth_text: &str, unit: TextUnit) -> (f64, f64, f64) {
    let (gen_items, truth_items) = match unit {
        TextUnit::Token => (token_strings(generated_text), token_strings(truth_text)),
        TextUnit::Word => (word_strings(generated_text), word_strings(truth_text)),
    };
    let gen_total = gen_items.len() as f64;
    let truth_total = truth_items.len() as f64;
    let gen_counts = multiset(gen_items);
    let truth_counts = multiset(truth_items);
    let overlap: usize = gen_counts
        .iter()
        .map(|(token, count)| (*count).min(truth_counts.get(token).copied().unwrap_or(0)))
        .sum();
    let p = if gen_total == 0.0 { 0.0 } else { overlap as f64 / gen_total };
    let r = if truth_total == 0.0 { 0.0 } else { overlap as f64 / truth_total };
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

/// Per-million-token prices for one provider.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceConfig {
    pub prompt_per_million: f64,
    pub completion_per_million: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProviderUsage {
    pub provider: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UsageReport {
    pub per_provider: Vec<ProviderUsage>,
    pub total_prompt_tokens: u64,
    pub total_completion_tokens: u64,
    pub total_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_cost: Option<f64>,
}

/// Totals per provider and overall; cost only where prices are configured.
pub fn usage_report(stats: &[(String, UsageStats)], prices: &BTreeMap<String, PriceConfig>) -> UsageReport {
    let mut per: BTreeMap<String, UsageStats> = BTreeMap::new();
    for (provider, s) in stats {
        let entry = per.entry(provider.clone()).or_default();
        *entry = entry.clone() + s.clone();
    }
    let mut per_provider = Vec::new();
    let (mut tp, mut tc, mut calls) = (0u64, 0u64, 0u64);
    let mut total_cost = None;
    for (provider, s) in per {
        let cost = prices.get(&provider).map(|p| {
            s.prompt_tokens as f64 / 1e6 * p.prompt_per_million
                + s.completion_tokens as f64 / 1e6 * p.completion_per_million
        });
        if let Some(c) = cost {
            total_cost = Some(total_cost.unwrap_or(0.0) + c);
        }
        tp += s.prompt_tokens;
        tc += s.completion_tokens;
        calls += s.calls;
        per_provider.push(ProviderUsage {
            provider,
            prompt_tokens: s.prompt_tokens,
            completion_tokens: s.completion_tokens,
            calls: s.calls,
            cost,
        });
    }
    UsageReport {
        per_provider,
        total_prompt_tokens: tp,
        total_completion_tokens: tc,
        total_calls: calls,
        total_cost,
    }
}

/// Full evaluation report for a generated suite against a truth set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub unmatched_generated: usize,
    pub unmatched_truth: usize,
    /// `None` when no scenarios exist (undefined, distinct from 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bsc: Option<f64>,
    pub per_rule: Vec<RuleCoverage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn build(matching: &Matching, bsc_ratio: Option<f64>, per_rule: Vec<RuleCoverage>) -> Self {
        let (precision, recall, f1) = precision_recall_f1(matching);
        let mut flags = Vec::new();
        if matching.generated_total == 0 {
            flags.push("empty generated set: precision defined as 0".to_string());
        }
        if bsc_ratio.is_none() {
            flags.push("no scenarios: BSC undefined".to_string());
        }
        EvalReport {
            precision,
            recall,
            f1,
            matched: matching.pairs.len(),
            unmatched_generated: matching.unmatched_generated.len(),
            unmatched_truth: matching.unmatched_truth.len(),
            bsc: bsc_ratio,
            per_rule,
            flags,
            warnings: matching.warnings.clone(),
        }
    }

    /// Human-readable summary table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("metric             value\n");
        out.push_str("-----------------  --------\n");
        out.push_str(&format!("precision          {:.4}\n", self.precision));
        out.push_str(&format!("recall             {:.4}\n", self.recall));
        out.push_str(&format!("f1                 {:.4}\n", self.f1));
        match self.bsc {
            Some(b) => out.push_str(&format!("bsc                {b:.4}\n")),
            None => out.push_str("bsc                undefined\n"),
        }
        out.push_str(&format!("matched            {}\n", self.matched));
        out.push_str(&format!("unmatched gen      {}\n", self.unmatched_generated));
        out.push_str(&format!("unmatched truth    {}\n", self.unmatched_truth));
        let covered = self.per_rule.iter().filter(|r| r.covered).count();
        out.push_str(&format!("rules covered      {}/{}\n", covered, self.per_rule.len()));
        for flag in &self.flags {
            out.push_str(&format!("note: {flag}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(pairs: &[(&str, serde_json::Value)]) -> FlatCase {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn j(v: &str) -> serde_json::Value {
        serde_json::Value::String(v.to_string())
    }

    fn jn(n: i64) -> serde_json::Value {
        serde_json::Value::Number(n.into())
    }

    #[test]
    fn identical_lists_fully_match() {
        let cases: Vec<FlatCase> = (0..5)
            .map(|i| flat(&[("id", jn(i)), ("Quantity", jn(100 + i)), ("Result", j("Success"))]))
            .collect();
        let m = match_cases(&cases, &cases, &MatchConfig::default());
        assert_eq!(m.pairs.len(), 5);
        assert_eq!(precision_recall_f1(&m), (1.0, 1.0, 1.0));
    }

    #[test]
    fn numeric_canonicalization_bridges_types() {
        let generated = vec![flat(&[("id", jn(1)), ("Quantity", j("50000")), ("Result", j("Success"))])];
        let truth = vec![flat(&[("id", jn(9)), ("Quantity", jn(50000)), ("Result", j("Success"))])];
        let m = match_cases(&generated, &truth, &MatchConfig::default());
        assert_eq!(m.pairs.len(), 1);
    }

    #[test]
    fn hand_counted_fixture() {
        let generated = vec![
            flat(&[("id", jn(1)), ("A", j("x"))]),
            flat(&[("id", jn(2)), ("A", j("y"))]),
            flat(&[("id", jn(3)), ("A", j("z"))]),
        ];
        let truth = vec![
            flat(&[("id", jn(1)), ("A", j("x"))]),
            flat(&[("id", jn(2)), ("A", j("y"))]),
            flat(&[("id", jn(3)), ("A", j("q"))]),
            flat(&[("id", jn(4)), ("A", j("r"))]),
        ];
        let m = match_cases(&generated, &truth, &MatchConfig::default());
        let (p, r, _) = precision_recall_f1(&m);
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
        assert!((r - 2.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn truth_without_id_skipped_with_warning() {
        let generated = vec![flat(&[("id", jn(1)), ("A", j("x"))])];
        let truth = vec![flat(&[("A", j("x"))])];
        let m = match_cases(&generated, &truth, &MatchConfig::default());
        assert_eq!(m.truth_total, 0);
        assert_eq!(m.pairs.len(), 0);
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn subset_mode_allows_richer_truth() {
        let generated = vec![flat(&[("id", jn(1)), ("A", j("x"))])];
        let truth = vec![flat(&[("id", jn(1)), ("A", j("x")), ("B", j("extra"))])];
        let exact = match_cases(&generated, &truth, &MatchConfig::default());
        assert_eq!(exact.pairs.len(), 0);
        let subset = match_cases(
            &generated,
            &truth,
            &MatchConfig { mode: MatchMode::Subset, ..MatchConfig::default() },
        );
        assert_eq!(subset.pairs.len(), 1);
    }

    #[test]
    fn matching_is_one_to_one() {
        let generated = vec![
            flat(&[("id", jn(1)), ("A", j("x"))]),
            flat(&[("id", jn(2)), ("A", j("x"))]),
        ];
        let truth = vec![flat(&[("id", jn(1)), ("A", j("x"))])];
        let m = match_cases(&generated, &truth, &MatchConfig::default());
        assert_eq!(m.pairs.len(), 1);
        assert!(m.pairs.len() <= m.generated_total.min(m.truth_total));
    }

    #[test]
    fn prf_edge_values() {
        let empty = Matching { generated_total: 0, truth_total: 3, ..Default::default() };
        assert_eq!(precision_recall_f1(&empty), (0.0, 0.0, 0.0));
        let perfect = Matching {
            pairs: vec![(0, 0)],
            generated_total: 1,
            truth_total: 1,
            ..Default::default()
        };
        assert_eq!(precision_recall_f1(&perfect), (1.0, 1.0, 1.0));
    }

    #[test]
    fn token_prf_hand_counted() {
        let (p, r, f1) = token_prf("A = 1 and B = 2", "A = 1 and B = 2", TextUnit::Token);
        assert_eq!((p, r, f1), (1.0, 1.0, 1.0));
        // <a,b,c> vs <b,c,d>: overlap 2 of 3 each.
        let (p, r, f1) = token_prf("Alpha Beta Gamma", "Beta Gamma Delta", TextUnit::Word);
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(token_prf("", "something", TextUnit::Word), (0.0, 0.0, 0.0));
    }

    #[test]
    fn token_unit_uses_lexer_canonical_forms() {
        // Numeric canonicalization through the lexer: 0100 lexes to 100.
        let (p, r, _) = token_prf("Quantity >= 0100", "Quantity >= 100", TextUnit::Token);
        assert_eq!((p, r), (1.0, 1.0));
    }

    #[test]
    fn usage_report_totals_and_cost() {
        let stats = vec![
            ("gpt".to_string(), UsageStats { prompt_tokens: 1000, completion_tokens: 500, calls: 2 }),
            ("gpt".to_string(), UsageStats { prompt_tokens: 200, completion_tokens: 100, calls: 1 }),
            ("grok".to_string(), UsageStats { prompt_tokens: 50, completion_tokens: 20, calls: 1 }),
        ];
        let mut prices = BTreeMap::new();
        prices.insert("gpt".to_string(), PriceConfig { prompt_per_million: 10.0, completion_per_million: 30.0 });
        let report = usage_report(&stats, &prices);
        assert_eq!(report.total_prompt_tokens, 1250);
        assert_eq!(report.total_completion_tokens, 620);
        assert_eq!(report.total_calls, 4);
        let gpt = report.per_provider.iter().find(|p| p.provider == "gpt").unwrap();
        assert_eq!(gpt.prompt_tokens, 1200);
        let expected_cost = 1200.0 / 1e6 * 10.0 + 600.0 / 1e6 * 30.0;
        assert!((gpt.cost.unwrap() - expected_cost).abs() < 1e-12);
        // Unpriced provider contributes tokens but no cost.
        assert!(report.per_provider.iter().find(|p| p.provider == "grok").unwrap().cost.is_none());
        assert!((report.total_cost.unwrap() - expected_cost).abs() < 1e-12);
    }

    #[test]
    fn zero_usage_zero_cost() {
        let report = usage_report(&[], &BTreeMap::new());
        assert_eq!(report.total_prompt_tokens, 0);
        assert_eq!(report.total_cost, None);
    }
}
