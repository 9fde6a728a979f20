//! The five built-in constraint predicates and the per-rule assessment
//! driver.

use std::collections::BTreeMap;

use crate::knowledge::{Category, ConstraintKind, ConstraintSet, SymbolLibrary};
use crate::trl::canon::{canonical_text, canonicalize};
use crate::trl::render::render_atom;
use crate::trl::{base_key, classify_key, AtomicClause, Rule, RuleSet};

use super::{Disposition, VaguenessLexicon, Verdict, Violation};

/// Action values that name a mental state rather than an executable step.
pub const NON_EXECUTABLE_VERBS: [&str; 3] = ["consider", "understand", "know"];

fn violation(constraint_id: &str, rule: &Rule, detail: String, atom: Option<&AtomicClause>) -> Violation {
    Violation {
        constraint_id: constraint_id.to_string(),
        rule_id: rule.id,
        detail,
        offending_atom: atom.map(render_atom),
    }
}

/// Constraint 1: the condition must carry recognizable precondition and
/// operation content and the outcome a recognizable expected result.
pub fn check_structural_completeness(rule: &Rule, symbols: &SymbolLibrary, constraint_id: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    let condition_atoms = rule.condition.atoms();
    let classified: Vec<Option<Category>> =
        condition_atoms.iter().map(|a| classify_key(&a.key, symbols)).collect();
    let has_pre_or_op = classified
        .iter()
        .any(|c| matches!(c, Some(Category::Precondition) | Some(Category::Operation)));
    let has_op = classified.iter().any(|c| matches!(c, Some(Category::Operation)));
    if !has_pre_or_op {
        out.push(violation(
            constraint_id,
            rule,
            "condition has no element classified Precondition or Operation".to_string(),
            None,
        ));
    }
    if !has_op {
        out.push(violation(
            constraint_id,
            rule,
            "condition lacks an Operation element".to_string(),
            None,
        ));
    }
    let outcome_ok = rule
        .outcome
        .atoms()
        .iter()
        .any(|a| matches!(classify_key(&a.key, symbols), Some(Category::ExpectedResult)));
    if !outcome_ok {
        out.push(violation(
            constraint_id,
            rule,
            "outcome lacks an ExpectedResult element".to_string(),
            None,
        ));
    }
    out
}

/// Constraint 2: every value must be concrete — no vague phrases, no
/// references to other provisions, no indeterminate placeholders.
pub fn check_determinism(rule: &Rule, lexicon: &VaguenessLexicon, constraint_id: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    let all_atoms: Vec<&AtomicClause> =
        rule.condition.atoms().into_iter().chain(rule.outcome.atoms()).collect();
    for atom in all_atoms {
        if let Some(reason) = lexicon.flag(&atom.value.raw_text()) {
            out.push(violation(
                constraint_id,
                rule,
                format!("non-deterministic value {:?}: {reason}", atom.value.raw_text()),
                Some(atom),
            ));
        }
    }
    out
}

/// Constraint 3: the condition must contain an executable action element.
pub fn check_action_executability(rule: &Rule, symbols: &SymbolLibrary, constraint_id: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    let action_atoms: Vec<&AtomicClause> = rule
        .condition
        .atoms()
        .into_iter()
        .filter(|a| {
            let base = base_key(&a.key);
            base == "Action" || symbols.is_actionlike(&base)
        })
        .collect();
    if action_atoms.is_empty() {
        out.push(violation(
            constraint_id,
            rule,
            "condition contains no action element (Action or an action-like key)".to_string(),
            None,
        ));
        return out;
    }
    for atom in action_atoms {
        let words = crate::knowledge::matching::split_words(&atom.value.raw_text());
        if let Some(bad) = words.iter().find(|w| NON_EXECUTABLE_VERBS.contains(&w.as_str())) {
            out.push(violation(
                constraint_id,
                rule,
                format!("action value {:?} is not executable ({bad:?} names a mental state)", atom.value.raw_text()),
                Some(atom),
            ));
        }
    }
    out
}

/// Constraint 4: the outcome must bind `Result` or `ResultStatus` to a
/// concrete literal.
pub fn check_result_observability(rule: &Rule, _symbols: &SymbolLibrary, constraint_id: &str) -> Vec<Violation> {
    let observable = rule.outcome.atoms().iter().any(|a| {
        let base = base_key(&a.key);
        (base == "Result" || base == "ResultStatus") && !a.value.raw_text().trim().is_empty()
    });
    if observable {
        Vec::new()
    } else {
        vec![violation(
            constraint_id,
            rule,
            "outcome binds neither Result nor ResultStatus to a concrete literal".to_string(),
            None,
        )]
    }
}

fn result_atoms_text(rule: &Rule) -> Vec<String> {
    let canon = canonicalize(&rule.outcome);
    let mut atoms: Vec<String> = canon
        .atoms()
        .into_iter()
        .filter(|a| {
            let base = base_key(&a.key);
            base == "Result" || base == "ResultStatus"
        })
        .map(render_atom)
        .collect();
    atoms.sort();
    atoms
}

/// Constraint 5: rules with the same canonical condition must agree on
/// their result atoms. Violations land on both rules of a conflicting pair.
pub fn check_non_conflict(rules: &RuleSet, constraint_id: &str) -> Vec<Violation> {
    conflict_scan(rules, constraint_id).0
}

/// Same-condition pairs that differ only in non-result outcome atoms; these
/// are reported for review but do not make a rule untestable.
pub fn non_conflict_advisories(rules: &RuleSet) -> Vec<String> {
    conflict_scan(rules, "").1
}

fn conflict_scan(rules: &RuleSet, constraint_id: &str) -> (Vec<Violation>, Vec<String>) {
    let mut violations = Vec::new();
    let mut advisories = Vec::new();
    // Bucket on canonical condition text so the pairwise scan only touches
    // rules that can actually conflict.
    let mut buckets: BTreeMap<String, Vec<&Rule>> = BTreeMap::new();
    for rule in &rules.rules {
        buckets.entry(canonical_text(&rule.condition)).or_default().push(rule);
    }
    for (_, bucket) in buckets {
        for i in 0..bucket.len() {
            for j in i + 1..bucket.len() {
                let (a, b) = (bucket[i], bucket[j]);
                if result_atoms_text(a) != result_atoms_text(b) {
                    let detail_a = format!(
                        "same condition as rule {} but conflicting result atoms ({} vs {})",
                        b.id,
                        result_atoms_text(a).join(" and "),
                        result_atoms_text(b).join(" and "),
                    );
                    let detail_b = format!(
                        "same condition as rule {} but conflicting result atoms ({} vs {})",
                        a.id,
                        result_atoms_text(b).join(" and "),
                        result_atoms_text(a).join(" and "),
                    );
                    violations.push(Violation {
                        constraint_id: constraint_id.to_string(),
                        rule_id: a.id,
                        detail: detail_a,
                        offending_atom: None,
                    });
                    violations.push(Violation {
                        constraint_id: constraint_id.to_string(),
                        rule_id: b.id,
                        detail: detail_b,
                        offending_atom: None,
                    });
                } else if canonical_text(&a.outcome) != canonical_text(&b.outcome) {
                    advisories.push(format!(
                        "rules {} and {} share a condition and result but differ in other outcome atoms",
                        a.id, b.id
                    ));
                }
            }
        }
    }
    (violations, advisories)
}

/// Run every enabled constraint independently over every rule. Testable
/// rules come back `Accepted`; the rest are `ExcludedForReview` (refinement
/// may upgrade them later). Custom constraints never fail a rule; they are
/// recorded as notes.
pub fn assess(
    rules: &RuleSet,
    constraints: &ConstraintSet,
    symbols: &SymbolLibrary,
    lexicon: &VaguenessLexicon,
) -> Vec<Verdict> {
    let mut conflict_by_rule: BTreeMap<u64, Vec<Violation>> = BTreeMap::new();
    if let Some(c) = constraints.constraints.iter().find(|c| c.kind == ConstraintKind::NonConflict) {
        for v in check_non_conflict(rules, &c.id) {
            conflict_by_rule.entry(v.rule_id).or_default().push(v);
        }
    }

    rules
        .rules
        .iter()
        .map(|rule| {
            let mut violations = Vec::new();
            let mut notes = Vec::new();
            for constraint in &constraints.constraints {
                match constraint.kind {
                    ConstraintKind::StructuralCompleteness => {
                        violations.extend(check_structural_completeness(rule, symbols, &constraint.id))
                    }
                    ConstraintKind::Determinism => {
                        violations.extend(check_determinism(rule, lexicon, &constraint.id))
                    }
                    ConstraintKind::ActionExecutability => {
                        violations.extend(check_action_executability(rule, symbols, &constraint.id))
                    }
                    ConstraintKind::ResultObservability => {
                        violations.extend(check_result_observability(rule, symbols, &constraint.id))
                    }
                    ConstraintKind::NonConflict => {
                        violations.extend(conflict_by_rule.get(&rule.id).cloned().unwrap_or_default())
                    }
                    ConstraintKind::Custom => notes.push(format!(
                        "custom constraint {:?} ({}) recorded, not machine-checked",
                        constraint.id, constraint.name
                    )),
                }
            }
            let testable = violations.is_empty();
            Verdict {
                rule_id: rule.id,
                testable,
                disposition: if testable { Disposition::Accepted } else { Disposition::ExcludedForReview },
                violations,
                replacement: None,
                notes,
            }
        })
        .collect()
}

/// Plain-text review report grouping excluded rules by violated constraint.
pub fn exclusion_report(verdicts: &[Verdict]) -> String {
    let mut by_constraint: BTreeMap<&str, Vec<&Violation>> = BTreeMap::new();
    for verdict in verdicts.iter().filter(|v| v.disposition == Disposition::ExcludedForReview) {
        for violation in &verdict.violations {
            by_constraint.entry(violation.constraint_id.as_str()).or_default().push(violation);
        }
    }
    if by_constraint.is_empty() {
        return "no rules excluded for review\n".to_string();
    }
    let mut out = String::from("rules excluded for review, grouped by violated constraint\n");
    for (constraint, violations) in by_constraint {
        out.push_str(&format!("\n[{constraint}]\n"));
        for v in violations {
            match &v.offending_atom {
                Some(atom) => out.push_str(&format!("  rule {}: {} (at {atom})\n", v.rule_id, v.detail)),
                None => out.push_str(&format!("  rule {}: {}\n", v.rule_id, v.detail)),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::builtin::{finance_constraints, finance_symbols};
    use crate::trl::parse_rules;

    fn parse(source: &str) -> RuleSet {
        let (set, diags) = parse_rules(source, &finance_symbols(), false, "test");
        assert!(!crate::trl::has_errors(&diags), "{diags:?}");
        set
    }

    fn rule(source: &str) -> Rule {
        parse(source).rules[0].clone()
    }

    #[test]
    fn complete_rule_is_structurally_sound() {
        let r = rule(
            "rule 1\nif TradingInstrument = Security and TradingMethod = BlockTrading and Action = Trade and Quantity >= 50000\nthen Result = Success",
        );
        assert!(check_structural_completeness(&r, &finance_symbols(), "c1").is_empty());
    }

    #[test]
    fn unknown_outcome_key_is_incomplete() {
        let r = rule("rule 1\nif Action = Trade and Quantity > 5 then Grade = High");
        let vs = check_structural_completeness(&r, &finance_symbols(), "c1");
        assert_eq!(vs.len(), 1);
        assert!(vs[0].detail.contains("ExpectedResult"));
    }

    #[test]
    fn missing_operation_is_named() {
        let r = rule("rule 1\nif Actor = Client and Event = OrderReceived then Result = Success");
        let vs = check_structural_completeness(&r, &finance_symbols(), "c1");
        assert_eq!(vs.len(), 1);
        assert!(vs[0].detail.contains("Operation"));
    }

    #[test]
    fn vague_session_value_flagged() {
        let r = rule("rule 1\nif Action = Trade and Time = \"core bond trading session\" then Result = Success");
        let vs = check_determinism(&r, &VaguenessLexicon::default(), "c2");
        assert_eq!(vs.len(), 1);
        assert!(vs[0].detail.contains("session"));
        assert!(vs[0].offending_atom.as_deref().unwrap().contains("Time"));
    }

    #[test]
    fn concrete_numerals_pass_determinism() {
        let r = rule("rule 1\nif Quantity >= 1000 then Result = Success");
        assert!(check_determinism(&r, &VaguenessLexicon::default(), "c2").is_empty());
    }

    #[test]
    fn indeterminate_marker_flagged() {
        let r = rule("rule 1\nif Constraint = \"unless otherwise specified\" and Action = Trade then Result = Success");
        let vs = check_determinism(&r, &VaguenessLexicon::default(), "c2");
        assert_eq!(vs.len(), 1);
    }

    #[test]
    fn action_presence_and_verb_list() {
        let symbols = finance_symbols();
        let ok = rule("rule 1\nif Action = Trade and Quantity > 1 then Result = Success");
        assert!(check_action_executability(&ok, &symbols, "c3").is_empty());

        let missing = rule("rule 2\nif Actor = Client and Quantity > 1 then Result = Success");
        let vs = check_action_executability(&missing, &symbols, "c3");
        assert_eq!(vs.len(), 1);
        assert!(vs[0].detail.contains("no action element"));

        let mental = rule("rule 3\nif Action = Understand then Result = Success");
        let vs = check_action_executability(&mental, &symbols, "c3");
        assert_eq!(vs.len(), 1);
        assert!(vs[0].detail.contains("not executable"));
    }

    #[test]
    fn actionlike_keys_satisfy_executability() {
        // TradingMethod is action-like in the finance library, so rules
        // without a literal Action atom still pass.
        let r = rule("rule 1\nif TradingMethod = MatchingExecution and Quantity % 1000 = 0 then Result = Success");
        assert!(check_action_executability(&r, &finance_symbols(), "c3").is_empty());
    }

    #[test]
    fn result_observability() {
        let symbols = finance_symbols();
        let ok = rule("rule 1\nif Action = Trade then Result = Success");
        assert!(check_result_observability(&ok, &symbols, "c4").is_empty());

        let both = rule("rule 2\nif Action = Trade then Result = Success and ResultStatus = TransactionSuccess");
        assert!(check_result_observability(&both, &symbols, "c4").is_empty());

        let none = rule("rule 3\nif Action = Trade then Constraint = ManualMethod");
        assert_eq!(check_result_observability(&none, &symbols, "c4").len(), 1);
    }

    #[test]
    fn conflicting_results_flag_both_rules() {
        let set = parse(
            "rule 1\nif Action = Trade and Quantity > 5 then Result = Success\n\
             rule 2\nif Quantity > 5 and Action = Trade then Result = Failure",
        );
        let vs = check_non_conflict(&set, "c5");
        assert_eq!(vs.len(), 2);
        let mut ids: Vec<u64> = vs.iter().map(|v| v.rule_id).collect();
        ids.sort();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn identical_duplicates_do_not_conflict() {
        let set = parse(
            "rule 1\nif Action = Trade then Result = Success\n\
             rule 2\nif Action = Trade then Result = Success",
        );
        assert!(check_non_conflict(&set, "c5").is_empty());
    }

    #[test]
    fn reordered_conditions_with_equal_outcomes_do_not_conflict() {
        let set = parse(
            "rule 1\nif Action = Trade and Price > 1 then Result = Success and ResultStatus = Done\n\
             rule 2\nif Price > 1 and Action = Trade then ResultStatus = Done and Result = Success",
        );
        assert!(check_non_conflict(&set, "c5").is_empty());
    }

    #[test]
    fn non_result_outcome_difference_is_advisory() {
        let set = parse(
            "rule 1\nif Action = Trade then Result = Success and Constraint = A\n\
             rule 2\nif Action = Trade then Result = Success and Constraint = B",
        );
        assert!(check_non_conflict(&set, "c5").is_empty());
        assert_eq!(non_conflict_advisories(&set).len(), 1);
    }

    #[test]
    fn assess_composes_all_constraints() {
        let set = parse(
            "rule 1\nif Action = Trade and Quantity >= 1000 then Result = Success\n\
             rule 2\nif Action = Trade and Time = \"core bond trading session\" then Result = Success",
        );
        let verdicts = assess(&set, &finance_constraints(), &finance_symbols(), &VaguenessLexicon::default());
        assert_eq!(verdicts.len(), 2);
        assert!(verdicts[0].testable);
        assert_eq!(verdicts[0].disposition, Disposition::Accepted);
        assert!(!verdicts[1].testable);
        assert_eq!(verdicts[1].violations.len(), 1);
        assert_eq!(verdicts[1].violations[0].constraint_id, "element-determinism");
        assert_eq!(verdicts[1].disposition, Disposition::ExcludedForReview);
    }

    #[test]
    fn constraint_independence() {
        // Removing one constraint never changes another's violations.
        let set = parse("rule 1\nif Actor = Client and Time = \"core session\" then Grade = High");
        let full = finance_constraints();
        let verdict_full = &assess(&set, &full, &finance_symbols(), &VaguenessLexicon::default())[0];
        let mut reduced = full.clone();
        reduced.constraints.retain(|c| c.kind != ConstraintKind::Determinism);
        let verdict_reduced = &assess(&set, &reduced, &finance_symbols(), &VaguenessLexicon::default())[0];
        let filter = |v: &Verdict, id: &str| -> Vec<Violation> {
            v.violations.iter().filter(|x| x.constraint_id == id).cloned().collect()
        };
        assert_eq!(filter(verdict_full, "structural-completeness"), filter(verdict_reduced, "structural-completeness"));
        assert_eq!(filter(verdict_full, "action-executability"), filter(verdict_reduced, "action-executability"));
        assert!(filter(verdict_reduced, "element-determinism").is_empty());
    }

    #[test]
    fn custom_constraints_note_not_fail() {
        let set = parse("rule 1\nif Action = Trade and Quantity > 1 then Result = Success");
        let mut constraints = finance_constraints();
        constraints.constraints.push(crate::knowledge::TestabilityConstraint::new(
            "latency",
            "Latency Bound",
            ConstraintKind::Custom,
            "context Rule inv: response < 5s",
        ));
        let verdicts = assess(&set, &constraints, &finance_symbols(), &VaguenessLexicon::default());
        assert!(verdicts[0].testable);
        assert_eq!(verdicts[0].notes.len(), 1);
    }

    #[test]
    fn exclusion_report_groups_by_constraint() {
        let set = parse(
            "rule 1\nif Actor = Client then Result = Success\n\
             rule 2\nif Action = Trade and Time = \"core session\" then Result = Success",
        );
        let verdicts = assess(&set, &finance_constraints(), &finance_symbols(), &VaguenessLexicon::default());
        let report = exclusion_report(&verdicts);
        assert!(report.contains("[element-determinism]"));
        assert!(report.contains("[structural-completeness]"));
        assert!(report.contains("rule 2"));
    }
}
