//! The testable requirement language: IF-THEN rules over KEY-OP-VALUE
//! clauses.
//!
//! This module is the built-in checker for the rule grammar: a hand-rolled
//! lexer and recursive-descent parser with positioned diagnostics, a
//! canonical printer, normalization, key classification against a symbol
//! library, and a predicate evaluator used both by test generation oracles
//! and by coverage metrics.
//!
//! All operations are pure functions over immutable values.

pub mod canon;
pub mod classify;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod render;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::value::Value;

pub use canon::{canonicalize, canonicalize_rule};
pub use classify::{base_key, classify_key};
pub use parser::parse_rules;
pub use render::{render_expr, render_rule};

/// Comparison operator of a clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    Eq,
    Neq,
    Gt,
    Ge,
    Lt,
    Le,
    In,
}

impl Comparator {
    pub fn symbol(&self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Neq => "!=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::In => "in",
        }
    }

    pub const ALL: [Comparator; 7] = [
        Comparator::Eq,
        Comparator::Neq,
        Comparator::Gt,
        Comparator::Ge,
        Comparator::Lt,
        Comparator::Le,
        Comparator::In,
    ];

    /// Logical complement for ordered and equality comparators. `In` has no
    /// single-comparator complement.
    pub fn complement(&self) -> Option<Comparator> {
        Some(match self {
            Comparator::Eq => Comparator::Neq,
            Comparator::Neq => Comparator::Eq,
            Comparator::Gt => Comparator::Le,
            Comparator::Ge => Comparator::Lt,
            Comparator::Lt => Comparator::Ge,
            Comparator::Le => Comparator::Gt,
            Comparator::In => return None,
        })
    }
}

/// One KEY-OP-VALUE clause, optionally with a modulus: `Quantity % 1000 = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomicClause {
    pub key: String,
    pub modulus: Option<Decimal>,
    pub comparator: Comparator,
    pub value: Value,
}

impl AtomicClause {
    pub fn new(key: &str, comparator: Comparator, value: Value) -> Self {
        AtomicClause { key: key.to_string(), modulus: None, comparator, value }
    }

    pub fn with_modulus(key: &str, modulus: Decimal, comparator: Comparator, value: Value) -> Self {
        AtomicClause { key: key.to_string(), modulus: Some(modulus), comparator, value }
    }
}

/// A condition or outcome expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(AtomicClause),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn atoms(&self) -> Vec<&AtomicClause> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AtomicClause>) {
        match self {
            Expr::Atom(a) => out.push(a),
            Expr::And(children) | Expr::Or(children) => {
                for c in children {
                    c.collect_atoms(out);
                }
            }
            Expr::Not(inner) => inner.collect_atoms(out),
        }
    }

    pub fn contains_or(&self) -> bool {
        match self {
            Expr::Atom(_) => false,
            Expr::Or(_) => true,
            Expr::And(children) => children.iter().any(Expr::contains_or),
            Expr::Not(inner) => inner.contains_or(),
        }
    }

    pub fn contains_not(&self) -> bool {
        match self {
            Expr::Atom(_) => false,
            Expr::Not(_) => true,
            Expr::And(children) | Expr::Or(children) => children.iter().any(Expr::contains_not),
        }
    }
}

/// A parsed rule: positive id, condition, and an and-only outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: u64,
    pub condition: Expr,
    pub outcome: Expr,
    /// 1-based line range in the source text, when parsed from text.
    pub source_span: Option<(usize, usize)>,
}

impl Rule {
    pub fn new(id: u64, condition: Expr, outcome: Expr) -> Self {
        Rule { id, condition, outcome, source_span: None }
    }

    pub fn outcome_atoms(&self) -> Vec<&AtomicClause> {
        self.outcome.atoms()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub source_name: String,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>, source_name: &str) -> Self {
        RuleSet { rules, source_name: source_name.to_string() }
    }

    pub fn find(&self, id: u64) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A positioned parse diagnostic. These also carry the feedback payload for
/// the model-facing correction loop, so messages name what was expected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<String>,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { line, column, message: message.into(), expected: Vec::new(), severity: Severity::Error }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { line, column, message: message.into(), expected: Vec::new(), severity: Severity::Warning }
    }

    pub fn expecting(mut self, expected: Vec<String>) -> Self {
        self.expected = expected;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

pub fn has_errors(diagnostics: &[ParseDiagnostic]) -> bool {
    diagnostics.iter().any(ParseDiagnostic::is_error)
}
