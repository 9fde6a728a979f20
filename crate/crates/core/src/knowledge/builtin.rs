//! Bundled finance knowledge pack.
//!
//! Ships the finance-domain artifacts as defaults so the whole pipeline runs
//! with zero model calls: the three-layer meta-model, the symbol library
//! with its grammar, and the five testability constraints.

use super::aggregate::render_grammar;
use super::{
    Category, ConstraintKind, ConstraintSet, MetaElement, MetaModel, Representation, SymbolKey, SymbolLibrary,
    TestabilityConstraint,
};

/// The three Phase-I artifacts as one loadable unit.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KnowledgePack {
    pub meta_model: MetaModel,
    pub representation: Representation,
    pub constraints: ConstraintSet,
}

pub fn finance_symbols() -> SymbolLibrary {
    SymbolLibrary {
        precondition: vec![
            SymbolKey::text("Actor"),
            SymbolKey::text("TradingInstrument"),
            SymbolKey::text("TradingMarket"),
            SymbolKey::time("Time"),
            SymbolKey::text("Constraint").shared(),
            SymbolKey::text("Event"),
        ],
        operation: vec![
            SymbolKey::text("Action").actionlike(),
            SymbolKey::text("TradingDirection").actionlike(),
            SymbolKey::text("TradingMethod").actionlike(),
            SymbolKey::number("Quantity"),
            SymbolKey::number("Price"),
            SymbolKey::text("OperationPart"),
            SymbolKey::text("Status"),
            SymbolKey::text("Constraint").shared(),
        ],
        expected_result: vec![
            SymbolKey::text("ResultStatus"),
            SymbolKey::text("Result"),
            SymbolKey::text("Constraint").shared(),
        ],
    }
}

pub fn finance_representation() -> Representation {
    let symbols = finance_symbols();
    let syntax_text = render_grammar(&symbols);
    Representation { symbols, syntax_text, provenance: "builtin-finance".to_string() }
}

/// Fifteen distinct leaf keys plus an `Others` bucket per category.
pub fn finance_metamodel() -> MetaModel {
    let el = |name: &str, category: Category, description: &str| {
        let mut e = MetaElement::new(name, category, description);
        e.support = 3;
        e
    };
    let mut elements = vec![
        el("Actor", Category::Precondition, "party performing or affected by the action"),
        el("TradingInstrument", Category::Precondition, "instrument class being traded"),
        el("TradingMarket", Category::Precondition, "market or venue in scope"),
        el("Time", Category::Precondition, "time point or window of applicability"),
        el("Constraint", Category::Precondition, "standing restriction on the rule"),
        el("Event", Category::Precondition, "triggering business event"),
        el("Action", Category::Operation, "behavior the actor performs"),
        el("TradingDirection", Category::Operation, "buy or sell side"),
        el("TradingMethod", Category::Operation, "execution mechanism used"),
        el("Quantity", Category::Operation, "order or submission quantity"),
        el("Price", Category::Operation, "order price or amount"),
        el("OperationPart", Category::Operation, "object the action operates on"),
        el("Status", Category::Operation, "intermediate state produced or required"),
        el("ResultStatus", Category::ExpectedResult, "detailed outcome status"),
        el("Result", Category::ExpectedResult, "overall success or failure"),
    ];
    for category in Category::ALL {
        let mut e = MetaElement::new("Others", category, "low-frequency elements grouped for coverage");
        e.support = 3;
        elements.push(e);
    }
    MetaModel::three_layer(elements, vec![], "builtin-finance")
}

pub fn finance_constraints() -> ConstraintSet {
    let constraints = vec![
        TestabilityConstraint::new(
            "structural-completeness",
            "Structural Completeness",
            ConstraintKind::StructuralCompleteness,
            "context Rule\ninv StructuralCompleteness:\n    not self.Precondition.oclIsUndefined() and\n    not self.Operation.oclIsUndefined() and\n    not self.ExpectedResult.oclIsUndefined()",
        ),
        TestabilityConstraint::new(
            "element-determinism",
            "Deterministic Rule Elements",
            ConstraintKind::Determinism,
            "context Rule\ninv RuleElementDeterministic:\n    self.Precondition->forAll(e | e.concrete() and e.deterministic())\n    self.Operation->forAll(e | e.concrete() and e.deterministic())\n    self.ExpectedResult->forAll(e | e.concrete() and e.deterministic())",
        ),
        TestabilityConstraint::new(
            "action-executability",
            "Action Executability",
            ConstraintKind::ActionExecutability,
            "context Rule\ninv ActionExecutable:\n    self.Operation.Action.notEmpty() and\n    self.Operation.Action.executable()",
        ),
        TestabilityConstraint::new(
            "result-observability",
            "Expected Result Observability",
            ConstraintKind::ResultObservability,
            "context Rule\ninv ExpectedResultObservable:\n    self.ExpectedResult.Result.notEmpty() and\n    self.ExpectedResult.Result.observable()",
        ),
        TestabilityConstraint::new(
            "rule-non-conflict",
            "Unambiguity Outcome",
            ConstraintKind::NonConflict,
            "context Rule\ninv DeterministicOutcome:\n    Rule.allInstances()->forAll(r2 |\n        if r2 <> self and r2.Precondition = self.Precondition and r2.Operation = self.Operation\n        then r2.ExpectedResult.ResultStatus = self.ExpectedResult.ResultStatus\n        else true\n        endif)",
        ),
    ];
    ConstraintSet { constraints, provenance: "builtin-finance".to_string() }
}

pub fn finance_pack() -> KnowledgePack {
    KnowledgePack {
        meta_model: finance_metamodel(),
        representation: finance_representation(),
        constraints: finance_constraints(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_is_structurally_valid() {
        let pack = finance_pack();
        assert!(pack.meta_model.is_canonical(), "{:?}", pack.meta_model.structural_issues());
        assert!(pack.representation.symbols.duplicate_issues().is_empty());
        assert!(pack.constraints.id_issues().is_empty());
        assert_eq!(pack.constraints.constraints.len(), 5);
    }

    #[test]
    fn fifteen_distinct_keys() {
        let symbols = finance_symbols();
        let mut names: Vec<&str> = Category::ALL
            .iter()
            .flat_map(|c| symbols.keys(*c).iter().map(|k| k.name.as_str()))
            .collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 15);
    }

    #[test]
    fn grammar_lists_every_key() {
        let rep = finance_representation();
        for key in ["Actor", "TradingInstrument", "Quantity", "ResultStatus", "Constraint"] {
            assert!(rep.syntax_text.contains(&format!("\"{key}\"")), "grammar missing {key}");
        }
        assert!(rep.syntax_text.contains("Comparator ::="));
    }

    #[test]
    fn constraint_kinds_cover_all_builtins() {
        let set = finance_constraints();
        for kind in ConstraintKind::BUILTIN {
            assert!(set.find(kind).is_some(), "missing constraint kind {kind:?}");
        }
    }
}
