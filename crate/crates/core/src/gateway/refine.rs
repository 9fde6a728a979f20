//! The verification-feedback-refinement loops.
//!
//! Formalization: prompt, parse, and when the parse reports errors, re-prompt
//! with the diagnostics appended until the output is clean or the iteration
//! budget runs out. Testability refinement: one violated constraint per
//! prompt, re-check locally, accept the first fully passing rewrite.

use crate::knowledge::{ConstraintKind, ConstraintSet, Representation, SymbolLibrary};
use crate::testability::{
    check_action_executability, check_determinism, check_non_conflict, check_result_observability,
    check_structural_completeness, Disposition, VaguenessLexicon, Verdict, Violation,
};
use crate::trl::{has_errors, parse_rules, render_rule, ParseDiagnostic, Rule, RuleSet};

use super::explicate::{extract_code_block, render_symbols};
use super::prompt::{build_prompt, PromptInputs, PromptTemplate, TemplateId};
use super::provider::Completer;
use super::{GatewayError, UsageStats};

#[derive(Debug)]
pub struct FormalizeOutcome {
    pub rules: RuleSet,
    pub diagnostics: Vec<ParseDiagnostic>,
    pub usage: UsageStats,
    /// Completions issued (at most `max_iters`).
    pub attempts: usize,
}

/// The rule text a completion carries: the first fenced code block when
/// present, the raw text otherwise.
fn completion_rules_text(completion: &str) -> String {
    extract_code_block(completion, &["", "trl", "text"]).unwrap_or_else(|| completion.to_string())
}

fn render_feedback(diagnostics: &[ParseDiagnostic]) -> String {
    let mut out = String::from("### Grammar violations to fix\n");
    for (i, d) in diagnostics.iter().filter(|d| d.is_error()).enumerate() {
        out.push_str(&format!("{}. line {}, column {}: {}", i + 1, d.line, d.column, d.message));
        if !d.expected.is_empty() {
            out.push_str(&format!(" (expected {})", d.expected.join(", ")));
        }
        out.push('\n');
    }
    out
}

/// Formalize one natural-language rule block with iterative grammar
/// feedback. Returns the best attempt (fewest error diagnostics, earliest
/// wins ties); iteration exhaustion is not an error, the surviving
/// diagnostics signal it.
pub fn formalize_with_feedback(
    provider: &dyn Completer,
    knowledge: &Representation,
    rule_text: &str,
    max_iters: usize,
    strict_keys: bool,
) -> Result<FormalizeOutcome, GatewayError> {
    assert!(max_iters >= 1, "max_iters must be at least 1");
    let template = PromptTemplate::default_for(TemplateId::Formalize);
    let base_prompt = build_prompt(
        &template,
        &PromptInputs {
            symbols: Some(render_symbols(&knowledge.symbols)),
            syntax: Some(knowledge.syntax_text.clone()),
            input_rule: Some(rule_text.to_string()),
            ..Default::default()
        },
    )?;

    let mut usage = UsageStats::default();
    let mut best: Option<(usize, RuleSet, Vec<ParseDiagnostic>)> = None;
    let mut prompt = base_prompt.clone();
    let mut attempts = 0;

    for _ in 0..max_iters {
        attempts += 1;
        let completion = provider.complete(&prompt)?;
        usage.accumulate(&completion.usage);
        let text = completion_rules_text(&completion.text);
        let (rules, diagnostics) = parse_rules(&text, &knowledge.symbols, strict_keys, provider.name());
        let error_count = diagnostics.iter().filter(|d| d.is_error()).count();
        let better = match &best {
            None => true,
            Some((best_errors, _, _)) => error_count < *best_errors,
        };
        if better {
            best = Some((error_count, rules, diagnostics.clone()));
        }
        if error_count == 0 {
            break;
        }
        prompt = format!(
            "{base_prompt}\n\n### Previous attempt\n```\n{text}\n```\n\n{}",
            render_feedback(&diagnostics)
        );
    }

    let (_, rules, diagnostics) = best.expect("at least one attempt ran");
    Ok(FormalizeOutcome { rules, diagnostics, usage, attempts })
}

/// All local checks for one candidate rule, in the context of its rule set
/// (the conflict check needs the siblings).
pub fn local_violations(
    rule: &Rule,
    siblings: &RuleSet,
    constraints: &ConstraintSet,
    symbols: &SymbolLibrary,
    lexicon: &VaguenessLexicon,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    for constraint in &constraints.constraints {
        match constraint.kind {
            ConstraintKind::StructuralCompleteness => {
                violations.extend(check_structural_completeness(rule, symbols, &constraint.id))
            }
            ConstraintKind::Determinism => violations.extend(check_determinism(rule, lexicon, &constraint.id)),
            ConstraintKind::ActionExecutability => {
                violations.extend(check_action_executability(rule, symbols, &constraint.id))
            }
            ConstraintKind::ResultObservability => {
                violations.extend(check_result_observability(rule, symbols, &constraint.id))
            }
            ConstraintKind::NonConflict => {
                let mut probe = RuleSet::new(
                    siblings.rules.iter().filter(|r| r.id != rule.id).cloned().collect(),
                    &siblings.source_name,
                );
                probe.rules.push(rule.clone());
                violations.extend(
                    check_non_conflict(&probe, &constraint.id).into_iter().filter(|v| v.rule_id == rule.id),
                );
            }
            ConstraintKind::Custom => {}
        }
    }
    violations
}

/// Targeted refinement of an untestable rule: one violated constraint per
/// prompt, first fully passing rewrite wins. With no violations the rule is
/// accepted without any model call; when every attempt fails the rule is
/// excluded for review with its original violations preserved.
#[allow(clippy::too_many_arguments)]
pub fn judge_and_refine(
    provider: &dyn Completer,
    constraints: &ConstraintSet,
    rule: &Rule,
    local: &[Violation],
    max_iters: usize,
    symbols: &SymbolLibrary,
    lexicon: &VaguenessLexicon,
    siblings: &RuleSet,
) -> Result<(Verdict, UsageStats), GatewayError> {
    let mut usage = UsageStats::default();
    if local.is_empty() {
        let verdict = Verdict::accepted(rule.id);
        return Ok((verdict, usage));
    }

    let template = PromptTemplate::default_for(TemplateId::Testability);
    let mut current = rule.clone();
    let mut current_violations = local.to_vec();

    for _ in 0..max_iters {
        let Some(first) = current_violations.first() else { break };
        let constraint = constraints
            .constraints
            .iter()
            .find(|c| c.id == first.constraint_id)
            .cloned()
            .unwrap_or_else(|| {
                crate::knowledge::TestabilityConstraint::new(&first.constraint_id, &first.constraint_id, ConstraintKind::Custom, "")
            });
        let criteria = format!(
            "{} ({})\n{}\n\nDetected violations:\n{}",
            constraint.name,
            constraint.id,
            constraint.ocl_text,
            current_violations
                .iter()
                .filter(|v| v.constraint_id == first.constraint_id)
                .map(|v| format!("- {}", v.detail))
                .collect::<Vec<_>>()
                .join("\n"),
        );
        let prompt = build_prompt(
            &template,
            &PromptInputs {
                constraints: Some(criteria),
                input_rule: Some(render_rule(&current)),
                ..Default::default()
            },
        )?;
        let completion = provider.complete(&prompt)?;
        usage.accumulate(&completion.usage);

        let text = completion_rules_text(&completion.text);
        let (parsed, diagnostics) = parse_rules(&text, symbols, false, provider.name());
        if has_errors(&diagnostics) || parsed.rules.len() != 1 {
            // Unparseable refinement: a failed attempt, keep going.
            continue;
        }
        let mut candidate = parsed.rules.into_iter().next().expect("one rule");
        candidate.id = rule.id;
        let candidate_violations = local_violations(&candidate, siblings, constraints, symbols, lexicon);
        if candidate_violations.is_empty() {
            let verdict = Verdict {
                rule_id: rule.id,
                testable: true,
                violations: Vec::new(),
                disposition: Disposition::Refined,
                replacement: Some(candidate),
                notes: Vec::new(),
            };
            return Ok((verdict, usage));
        }
        // Adopt strictly better rewrites as the new refinement base.
        if candidate_violations.len() < current_violations.len() {
            current = candidate;
            current_violations = candidate_violations;
        }
    }

    let verdict = Verdict {
        rule_id: rule.id,
        testable: false,
        violations: local.to_vec(),
        disposition: Disposition::ExcludedForReview,
        replacement: None,
        notes: Vec::new(),
    };
    Ok((verdict, usage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::provider::ScriptedProvider;
    use crate::knowledge::builtin::{finance_constraints, finance_representation, finance_symbols};

    fn representation() -> Representation {
        finance_representation()
    }

    const SEVEN_RULES: &str = r#"rule 1
if TradingInstrument = Bond and TradingMethod = MatchingExecution and BondType = CashBond and Quantity % 100000 = 0
then Result = Success
rule 2
if TradingInstrument = Bond and TradingMethod = MatchingExecution and BondType = CashBond and Action = Sell and Balance < 100000 and Action = SingleSubmission
then Result = Success
rule 3
if TradingInstrument = Bond and TradingMethod = MatchingExecution and BondType = GeneralPledgedRepo and Quantity % 1000 = 0
then Result = Success
rule 4
if TradingInstrument = Bond and TradingMethod = ClickExecution and Quantity % 100000 = 0
then Result = Success
rule 5
if TradingInstrument = Bond and (TradingMethod = InquiryExecution or TradingMethod = CompetitivePurchase) and Quantity >= 100000 and Quantity % 1000 = 0
then Result = Success
rule 6
if TradingInstrument = Bond and TradingMethod = NegotiatedExecution and BondType = CashBond and Quantity >= 1000 and Quantity % 100 = 0
then Result = Success
rule 7
if TradingInstrument = Bond and TradingMethod = NegotiatedExecution and BondType = GeneralPledgedRepo and Quantity % 1000 = 0
then Result = Success"#;

    #[test]
    fn malformed_then_valid_takes_two_calls() {
        let provider = ScriptedProvider::new(
            "mock",
            vec![
                "```\nrule 1\nif Quantity >= then Result = Success\n```".to_string(),
                "```\nrule 1\nif Quantity >= 1000 then Result = Success\n```".to_string(),
            ],
        );
        let outcome = formalize_with_feedback(&provider, &representation(), "quantity at least 1000", 3, false).unwrap();
        assert_eq!(outcome.attempts, 2);
        assert_eq!(outcome.usage.calls, 2);
        assert_eq!(outcome.rules.rules.len(), 1);
        assert!(!has_errors(&outcome.diagnostics));
    }

    #[test]
    fn clean_first_completion_takes_one_call() {
        let provider = ScriptedProvider::new(
            "mock",
            vec!["rule 1\nif Quantity >= 1000 then Result = Success".to_string()],
        );
        let outcome = formalize_with_feedback(&provider, &representation(), "input", 3, false).unwrap();
        assert_eq!(outcome.attempts, 1);
        assert_eq!(outcome.rules.rules.len(), 1);
    }

    #[test]
    fn never_recovering_stops_at_max_iters_with_diagnostics() {
        let bad = "```\nrule 1\nif Quantity > then Result = Success\n```".to_string();
        let provider = ScriptedProvider::new("mock", vec![bad.clone(), bad.clone(), bad.clone(), bad]);
        let outcome = formalize_with_feedback(&provider, &representation(), "input", 3, false).unwrap();
        assert_eq!(outcome.attempts, 3);
        assert!(has_errors(&outcome.diagnostics));
        assert!(outcome.rules.rules.is_empty());
    }

    #[test]
    fn feedback_prompt_lists_diagnostics() {
        // The second scripted response only parses if the loop actually
        // re-prompted; assert the feedback heading is in the second prompt
        // via a provider that echoes prompts into a log.
        struct EchoProvider {
            inner: ScriptedProvider,
            prompts: std::sync::Mutex<Vec<String>>,
        }
        impl Completer for EchoProvider {
            fn name(&self) -> &str {
                self.inner.name()
            }
            fn complete(&self, prompt: &str) -> Result<super::super::provider::Completion, GatewayError> {
                self.prompts.lock().unwrap().push(prompt.to_string());
                self.inner.complete(prompt)
            }
        }
        let provider = EchoProvider {
            inner: ScriptedProvider::new(
                "mock",
                vec![
                    "rule 1\nif Quantity 1000 then Result = Success".to_string(),
                    "rule 1\nif Quantity >= 1000 then Result = Success".to_string(),
                ],
            ),
            prompts: std::sync::Mutex::new(Vec::new()),
        };
        let outcome = formalize_with_feedback(&provider, &representation(), "input", 3, false).unwrap();
        assert_eq!(outcome.attempts, 2);
        let prompts = provider.prompts.lock().unwrap();
        assert!(prompts[1].contains("Grammar violations to fix"));
        assert!(prompts[1].contains("missing comparator"));
        assert!(prompts[1].contains("Previous attempt"));
    }

    #[test]
    fn seven_rule_block_parses_in_one_shot() {
        let provider = ScriptedProvider::new("mock", vec![format!("```\n{SEVEN_RULES}\n```")]);
        let outcome = formalize_with_feedback(&provider, &representation(), "bond submission quantities", 3, false).unwrap();
        assert_eq!(outcome.rules.rules.len(), 7, "{:?}", outcome.diagnostics);
        assert_eq!(outcome.attempts, 1);
    }

    #[test]
    fn refinement_concretizes_vague_time() {
        let symbols = finance_symbols();
        let lexicon = VaguenessLexicon::default();
        let constraints = finance_constraints();
        let (set, _) = parse_rules(
            "rule 1\nif TradingInstrument = Bond and Action = Trade and Time = \"core bond trading session\" then Result = Success",
            &symbols,
            false,
            "t",
        );
        let rule = set.rules[0].clone();
        let local = local_violations(&rule, &set, &constraints, &symbols, &lexicon);
        assert_eq!(local.len(), 1);

        let provider = ScriptedProvider::new(
            "mock",
            vec!["false: the session is vague\n```\nrule 1\nif TradingInstrument = Bond and Action = Trade and Time in [09:30-11:30, 13:00-15:00] then Result = Success\n```".to_string()],
        );
        let (verdict, usage) =
            judge_and_refine(&provider, &constraints, &rule, &local, 3, &symbols, &lexicon, &set).unwrap();
        assert!(verdict.testable);
        assert_eq!(verdict.disposition, Disposition::Refined);
        assert!(verdict.replacement.is_some());
        assert_eq!(usage.calls, 1);
        let replacement = verdict.replacement.unwrap();
        assert!(render_rule(&replacement).contains("09:30-11:30"));
    }

    #[test]
    fn zero_violations_means_zero_calls() {
        let symbols = finance_symbols();
        let (set, _) = parse_rules("rule 1\nif Action = Trade and Quantity > 1 then Result = Success", &symbols, false, "t");
        let provider = ScriptedProvider::new("mock", vec![]);
        let (verdict, usage) = judge_and_refine(
            &provider,
            &finance_constraints(),
            &set.rules[0],
            &[],
            3,
            &symbols,
            &VaguenessLexicon::default(),
            &set,
        )
        .unwrap();
        assert!(verdict.testable);
        assert_eq!(verdict.disposition, Disposition::Accepted);
        assert_eq!(usage.calls, 0);
    }

    #[test]
    fn exhausted_refinement_preserves_violations() {
        let symbols = finance_symbols();
        let lexicon = VaguenessLexicon::default();
        let constraints = finance_constraints();
        let (set, _) = parse_rules(
            "rule 1\nif Action = Trade and Time = \"core session\" then Result = Success",
            &symbols,
            false,
            "t",
        );
        let rule = set.rules[0].clone();
        let local = local_violations(&rule, &set, &constraints, &symbols, &lexicon);
        // Scripted refinements never fix the vagueness.
        let still_bad =
            "```\nrule 1\nif Action = Trade and Time = \"another session\" then Result = Success\n```".to_string();
        let provider = ScriptedProvider::new("mock", vec![still_bad.clone(), still_bad.clone(), still_bad]);
        let (verdict, usage) =
            judge_and_refine(&provider, &constraints, &rule, &local, 3, &symbols, &lexicon, &set).unwrap();
        assert!(!verdict.testable);
        assert_eq!(verdict.disposition, Disposition::ExcludedForReview);
        assert_eq!(verdict.violations, local);
        assert_eq!(usage.calls, 3);
    }
}
