//! Union aggregation of representations and constraint sets.
//!
//! Unlike meta-model purification, representations and constraint sets are
//! unioned rather than majority-filtered: a missing comparison key or a
//! missing constraint silently weakens every downstream check, so
//! completeness wins over frequency.

use super::matching::{normalize_name, SynonymMap};
use super::{
    Category, ConstraintKind, ConstraintSet, Representation, SemanticType, SymbolKey, SymbolLibrary,
    TestabilityConstraint, COMPARATOR_SYMBOLS,
};

/// A semantic-type disagreement found while unioning symbol libraries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeConflict {
    pub key: String,
    pub category: Category,
    pub kept: String,
    pub discarded: String,
}

impl std::fmt::Display for TypeConflict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "key {:?} in {}: conflicting types, kept {} over {}",
            self.key,
            self.category.name(),
            self.kept,
            self.discarded
        )
    }
}

fn widen(existing: &mut SymbolKey, incoming: &SymbolKey, category: Category, conflicts: &mut Vec<TypeConflict>) {
    existing.actionlike |= incoming.actionlike;
    existing.shared |= incoming.shared;
    if existing.sem_type == incoming.sem_type {
        return;
    }
    // Two enum declarations merge their value domains.
    if let (SemanticType::Enum(a), SemanticType::Enum(b)) = (&mut existing.sem_type, &incoming.sem_type) {
        for v in b {
            if !a.contains(v) {
                a.push(v.clone());
            }
        }
        return;
    }
    let (kept, discarded) = if incoming.sem_type.width_rank() > existing.sem_type.width_rank() {
        let old = existing.sem_type.clone();
        existing.sem_type = incoming.sem_type.clone();
        (incoming.sem_type.clone(), old)
    } else {
        (existing.sem_type.clone(), incoming.sem_type.clone())
    };
    conflicts.push(TypeConflict {
        key: existing.name.clone(),
        category,
        kept: kept.type_name().to_string(),
        discarded: discarded.type_name().to_string(),
    });
}

/// Union of symbol libraries per category, first-seen order, deduplicated by
/// normalized name. The grammar text is re-rendered from the unioned
/// vocabulary; productions other than the element lists never change.
pub fn aggregate_representations(reps: &[Representation]) -> Result<(Representation, Vec<TypeConflict>), String> {
    if reps.is_empty() {
        return Err("no representations to aggregate".to_string());
    }
    let synonyms = SynonymMap::new();
    let mut out = SymbolLibrary::empty();
    let mut conflicts = Vec::new();
    for rep in reps {
        for category in Category::ALL {
            for key in rep.symbols.keys(category) {
                let normalized = normalize_name(&key.name, &synonyms);
                let keys = out.keys_mut(category);
                match keys.iter_mut().find(|k| normalize_name(&k.name, &synonyms) == normalized) {
                    Some(existing) => widen(existing, key, category, &mut conflicts),
                    None => keys.push(key.clone()),
                }
            }
        }
    }
    let syntax_text = render_grammar(&out);
    Ok((Representation { symbols: out, syntax_text, provenance: "aggregated".to_string() }, conflicts))
}

/// Union of constraint sets, deduplicated by `(kind, normalized name)`.
/// Custom constraints are never dropped. Output ordering is kind order,
/// then first-seen order within a kind.
pub fn aggregate_constraints(sets: &[ConstraintSet]) -> Result<ConstraintSet, String> {
    if sets.is_empty() {
        return Err("no constraint sets to aggregate".to_string());
    }
    let synonyms = SynonymMap::new();
    let mut collected: Vec<TestabilityConstraint> = Vec::new();
    for set in sets {
        for c in &set.constraints {
            let duplicate = c.kind != ConstraintKind::Custom
                && collected.iter().any(|seen| {
                    seen.kind == c.kind && normalize_name(&seen.name, &synonyms) == normalize_name(&c.name, &synonyms)
                });
            if !duplicate {
                collected.push(c.clone());
            }
        }
    }
    let kind_rank = |k: ConstraintKind| -> usize {
        match k {
            ConstraintKind::StructuralCompleteness => 0,
            ConstraintKind::Determinism => 1,
            ConstraintKind::ActionExecutability => 2,
            ConstraintKind::ResultObservability => 3,
            ConstraintKind::NonConflict => 4,
            ConstraintKind::Custom => 5,
        }
    };
    let mut indexed: Vec<(usize, usize, TestabilityConstraint)> =
        collected.into_iter().enumerate().map(|(i, c)| (kind_rank(c.kind), i, c)).collect();
    indexed.sort_by_key(|(rank, seen, _)| (*rank, *seen));
    // A union can collide on ids from different sources; suffix later copies.
    let mut ids = std::collections::BTreeSet::new();
    let mut constraints = Vec::new();
    for (_, _, mut c) in indexed {
        while !ids.insert(c.id.clone()) {
            c.id.push('*');
        }
        constraints.push(c);
    }
    Ok(ConstraintSet { constraints, provenance: "aggregated".to_string() })
}

fn quoted_list(keys: &[SymbolKey], indent: &str) -> String {
    let mut out = String::new();
    let mut line_len = 0usize;
    for (i, k) in keys.iter().enumerate() {
        let token = format!("\"{}\"", k.name);
        if i == 0 {
            out.push_str(&token);
            line_len = token.len();
        } else if line_len + token.len() + 3 > 60 {
            out.push_str(&format!("\n{indent}| {token}"));
            line_len = token.len() + 2;
        } else {
            out.push_str(&format!(" | {token}"));
            line_len += token.len() + 3;
        }
    }
    out
}

/// The fixed grammar skeleton with the element productions rendered from a
/// symbol library. Only the key vocabulary varies; the rule structure,
/// comparators and value forms are constant so the parser stays sound.
pub fn render_grammar(symbols: &SymbolLibrary) -> String {
    let comparators = COMPARATOR_SYMBOLS
        .iter()
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(" | ");
    format!(
        r#"Rule ::= "IF" <Precondition> "AND" <Operation> "THEN" <ExpectedOutcome>

Precondition ::= <AtomicPrecondition> | <CompoundPrecondition>
AtomicPrecondition ::= <PreconditionElement> <Comparator> <Value>
CompoundPrecondition ::= "(" <Precondition> ")"
                    | <Precondition> "AND" <Precondition>
                    | <Precondition> "OR" <Precondition>
                    | "NOT" <Precondition>

Operation ::= <AtomicOperation> | <CompoundOperation>
AtomicOperation ::= <OperationElement> <Comparator> <Value>
CompoundOperation ::= "(" <Operation> ")"
                 | <Operation> "AND" <Operation>
                 | <Operation> "OR" <Operation>
                 | "NOT" <Operation>

ExpectedOutcome ::= <AtomicOutcome> | <CompoundOutcome>
AtomicOutcome ::= <ResultElement> <Comparator> <Value>
CompoundOutcome ::= "(" <ExpectedOutcome> ")"
                  | <ExpectedOutcome> "AND" <ExpectedOutcome>

ModuloClause ::= <OperationElement> "%" <NumberLiteral> <Comparator> <Value>

PreconditionElement ::= {pre}

OperationElement ::= {op}

ResultElement ::= {res}

Comparator ::= {comparators}

Value ::= <StringLiteral> | <NumberLiteral> | <BooleanLiteral> | <TimeLiteral> | <TimeRangeSet>
StringLiteral ::= "\"" [^"]* "\""
NumberLiteral ::= [0-9]+ ("." [0-9]+)?
BooleanLiteral ::= "true" | "false"

TimeLiteral ::= [0-9]{{1,2}} ":" [0-9]{{2}} (":" [0-9]{{2}})?
TimeRange ::= <TimeLiteral> "-" <TimeLiteral>
TimeRangeSet ::= "[" <TimeRange> ("," <TimeRange>)* "]"
"#,
        pre = quoted_list(&symbols.precondition, "                "),
        op = quoted_list(&symbols.operation, "             "),
        res = quoted_list(&symbols.expected_result, "          "),
        comparators = comparators,
    )
}
