//! Canonical form for expressions: same-operator nesting flattened, children
//! sorted by rendered text, double negation eliminated. Canonical equality is
//! what conflict detection compares.

use super::render::render_expr;
use super::{Expr, Rule};

pub fn canonicalize(expr: &Expr) -> Expr {
    match expr {
        Expr::Atom(a) => Expr::Atom(a.clone()),
        Expr::Not(inner) => {
            let inner = canonicalize(inner);
            match inner {
                Expr::Not(grand) => *grand,
                other => Expr::Not(Box::new(other)),
            }
        }
        Expr::And(children) => rebuild(children, true),
        Expr::Or(children) => rebuild(children, false),
    }
}

fn rebuild(children: &[Expr], is_and: bool) -> Expr {
    let mut flat = Vec::new();
    for child in children {
        let canon = canonicalize(child);
        match canon {
            Expr::And(grand) if is_and => flat.extend(grand),
            Expr::Or(grand) if !is_and => flat.extend(grand),
            other => flat.push(other),
        }
    }
    flat.sort_by(|a, b| render_expr(a).cmp(&render_expr(b)));
    if flat.len() == 1 {
        return flat.pop().unwrap();
    }
    if is_and {
        Expr::And(flat)
    } else {
        Expr::Or(flat)
    }
}

pub fn canonicalize_rule(rule: &Rule) -> Rule {
    Rule {
        id: rule.id,
        condition: canonicalize(&rule.condition),
        outcome: canonicalize(&rule.outcome),
        source_span: rule.source_span,
    }
}

/// Canonical text of an expression, the equality key for conflict checks.
pub fn canonical_text(expr: &Expr) -> String {
    render_expr(&canonicalize(expr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trl::{AtomicClause, Comparator};
    use crate::value::Value;

    fn atom(key: &str) -> Expr {
        Expr::Atom(AtomicClause::new(key, Comparator::Eq, Value::Str("X".into())))
    }

    #[test]
    fn flattens_nested_same_operator() {
        let e = Expr::And(vec![Expr::And(vec![atom("A"), atom("B")]), atom("C")]);
        let canon = canonicalize(&e);
        assert_eq!(canon, Expr::And(vec![atom("A"), atom("B"), atom("C")]));
    }

    #[test]
    fn commutative_by_sort() {
        let ab = Expr::And(vec![atom("A"), atom("B")]);
        let ba = Expr::And(vec![atom("B"), atom("A")]);
        assert_eq!(canonicalize(&ab), canonicalize(&ba));
    }

    #[test]
    fn double_negation_eliminated() {
        let e = Expr::Not(Box::new(Expr::Not(Box::new(atom("A")))));
        assert_eq!(canonicalize(&e), atom("A"));
        let e = Expr::Not(Box::new(Expr::Not(Box::new(Expr::Not(Box::new(atom("A")))))));
        assert_eq!(canonicalize(&e), Expr::Not(Box::new(atom("A"))));
    }

    #[test]
    fn idempotent() {
        let e = Expr::Or(vec![
            Expr::And(vec![atom("B"), atom("A")]),
            Expr::Not(Box::new(Expr::Not(Box::new(atom("C"))))),
            Expr::Or(vec![atom("E"), atom("D")]),
        ]);
        let once = canonicalize(&e);
        let twice = canonicalize(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn mixed_operators_do_not_flatten_across() {
        let e = Expr::And(vec![Expr::Or(vec![atom("A"), atom("B")]), atom("C")]);
        let canon = canonicalize(&e);
        let Expr::And(children) = &canon else { panic!() };
        assert_eq!(children.len(), 2);
        assert!(matches!(children[0], Expr::Or(_)) || matches!(children[1], Expr::Or(_)));
    }
}
