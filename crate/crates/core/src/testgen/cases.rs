//! Concrete case generation for one rule.
//!
//! Per conjunctive variant: one positive case with every slot at its primary
//! valid representative, one boundary case per boundary representative, and
//! one negative case per invalid representative of each literal
//! (one-factor-at-a-time: only that literal's slot moves). Negative
//! candidates that would still satisfy the whole condition through another
//! or-branch are dropped, so the negated expectation stays truthful.

use crate::knowledge::SymbolLibrary;
use crate::trl::eval::{eval_condition, expand_variants, slot_names, Assignment, ExpandError, Literal};
use crate::trl::render::render_atom;
use crate::trl::{base_key, Rule};
use crate::value::Value;

use super::{CaseProvenance, GenStrategy, Partition, Polarity, TestCase, TestgenError, ValueDomains};
use super::partition::partition_atom_in_context;

/// Flip an expected outcome for a negative case: `Result` swaps Success and
/// Failure, other result values map to the failure sentinel, and everything
/// else is dropped from the negated expectation.
pub fn negate_outcome(expected: &Assignment, failure_sentinel: &str) -> Assignment {
    let flip = |v: &Value| -> Value {
        match v {
            Value::Str(s) if s == "Success" => Value::Str("Failure".to_string()),
            Value::Str(s) if s == "Failure" => Value::Str("Success".to_string()),
            _ => Value::Str(failure_sentinel.to_string()),
        }
    };
    let find = |base: &str| -> Option<(&String, &Value)> {
        expected.iter().find(|(k, _)| base_key(k) == base)
    };
    let mut out = Assignment::new();
    if let Some((slot, value)) = find("Result").or_else(|| find("ResultStatus")) {
        out.insert(slot.clone(), flip(value));
    } else {
        out.insert("Result".to_string(), Value::Str(failure_sentinel.to_string()));
    }
    out
}

/// Expected-result slots of a rule's outcome, under the same slotting the
/// condition uses.
pub fn outcome_assignment(rule: &Rule) -> Assignment {
    let literals: Vec<Literal> =
        rule.outcome.atoms().into_iter().map(|a| Literal { atom: a.clone(), negated: false }).collect();
    let slots = slot_names(&literals);
    literals
        .iter()
        .zip(slots)
        .map(|(l, slot)| (slot, l.atom.value.clone()))
        .collect()
}

struct VariantPlan {
    literals: Vec<Literal>,
    slots: Vec<String>,
    partitions: Vec<Partition>,
}

fn plan_variant(
    literals: Vec<Literal>,
    symbols: &SymbolLibrary,
    domains: &ValueDomains,
) -> Result<VariantPlan, TestgenError> {
    let slots = slot_names(&literals);
    let mut partitions = Vec::with_capacity(literals.len());
    for (i, literal) in literals.iter().enumerate() {
        let companions: Vec<Literal> = literals
            .iter()
            .enumerate()
            .filter(|(j, other)| *j != i && slots[*j] == slots[i] && other.atom.key == literal.atom.key)
            .map(|(_, other)| other.clone())
            .collect();
        partitions.push(partition_atom_in_context(&literal.atom, literal.negated, &companions, symbols, domains)?);
    }
    Ok(VariantPlan { literals, slots, partitions })
}

impl VariantPlan {
    /// Positive assignment: first literal of each slot supplies the slot's
    /// primary representative (companion filtering makes any literal's
    /// choice satisfy the whole slot).
    fn positive_assignment(&self) -> Assignment {
        let mut out = Assignment::new();
        for (i, slot) in self.slots.iter().enumerate() {
            if !out.contains_key(slot.as_str()) {
                out.insert(slot.clone(), self.partitions[i].primary_valid().clone());
            }
        }
        out
    }

    fn literal_label(&self, i: usize) -> String {
        let rendered = render_atom(&self.literals[i].atom);
        if self.literals[i].negated {
            format!("not {rendered}")
        } else {
            rendered
        }
    }
}

/// Generate the case set for one rule. The rule should already have passed
/// testability assessment; untestable rules still generate, but vague
/// values come through literally.
pub fn generate_cases(
    rule: &Rule,
    symbols: &SymbolLibrary,
    domains: &ValueDomains,
    strategy: &GenStrategy,
) -> Result<Vec<TestCase>, TestgenError> {
    let variants = expand_variants(&rule.condition, strategy.variant_cap)
        .map_err(|ExpandError::TooManyVariants { cap }| TestgenError::TooManyVariants { cap })?;
    let expected = outcome_assignment(rule);
    let negated_expectation = negate_outcome(&expected, &strategy.failure_sentinel);

    let mut cases: Vec<TestCase> = Vec::new();
    let mut push_unique = |case: TestCase, cases: &mut Vec<TestCase>| {
        let duplicate = cases.iter().any(|c| c.assignments == case.assignments && c.expected == case.expected);
        if !duplicate {
            cases.push(case);
        }
    };

    for (vi, literals) in variants.into_iter().enumerate() {
        let plan = plan_variant(literals, symbols, domains)?;
        let positive = plan.positive_assignment();

        push_unique(
            TestCase {
                id: 0,
                assignments: positive.clone(),
                expected: expected.clone(),
                polarity: Polarity::Positive,
                provenance: CaseProvenance { rule_id: rule.id, variant: vi, mutated_atom: None },
            },
            &mut cases,
        );

        for (i, partition) in plan.partitions.iter().enumerate() {
            for boundary in &partition.boundary_reps {
                let slot = &plan.slots[i];
                if positive.get(slot.as_str()) == Some(boundary) {
                    continue;
                }
                let mut assignments = positive.clone();
                assignments.insert(slot.clone(), boundary.clone());
                push_unique(
                    TestCase {
                        id: 0,
                        assignments,
                        expected: expected.clone(),
                        polarity: Polarity::Boundary,
                        provenance: CaseProvenance { rule_id: rule.id, variant: vi, mutated_atom: None },
                    },
                    &mut cases,
                );
            }
        }

        for (i, partition) in plan.partitions.iter().enumerate() {
            for invalid in &partition.invalid_reps {
                let mut assignments = positive.clone();
                assignments.insert(plan.slots[i].clone(), invalid.clone());
                // Another or-branch may still accept these assignments; such
                // a case would carry a false Failure expectation.
                if eval_condition(&rule.condition, &assignments) {
                    continue;
                }
                push_unique(
                    TestCase {
                        id: 0,
                        assignments,
                        expected: negated_expectation.clone(),
                        polarity: Polarity::Negative,
                        provenance: CaseProvenance {
                            rule_id: rule.id,
                            variant: vi,
                            mutated_atom: Some(plan.literal_label(i)),
                        },
                    },
                    &mut cases,
                );
            }
        }

        if strategy.pairwise {
            for i in 0..plan.literals.len() {
                for j in i + 1..plan.literals.len() {
                    if plan.slots[i] == plan.slots[j] {
                        continue;
                    }
                    let (Some(inv_i), Some(inv_j)) =
                        (plan.partitions[i].invalid_reps.first(), plan.partitions[j].invalid_reps.first())
                    else {
                        continue;
                    };
                    let mut assignments = positive.clone();
                    assignments.insert(plan.slots[i].clone(), inv_i.clone());
                    assignments.insert(plan.slots[j].clone(), inv_j.clone());
                    if eval_condition(&rule.condition, &assignments) {
                        continue;
                    }
                    push_unique(
                        TestCase {
                            id: 0,
                            assignments,
                            expected: negated_expectation.clone(),
                            polarity: Polarity::Negative,
                            provenance: CaseProvenance {
                                rule_id: rule.id,
                                variant: vi,
                                mutated_atom: Some(format!(
                                    "{} and {}",
                                    plan.literal_label(i),
                                    plan.literal_label(j)
                                )),
                            },
                        },
                        &mut cases,
                    );
                }
            }
        }
    }

    for (i, case) in cases.iter_mut().enumerate() {
        case.id = (i + 1) as u64;
    }
    Ok(cases)
}
