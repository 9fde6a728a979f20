//! Canonical printer. `parse(render(r))` reproduces `r` up to
//! canonicalization; keywords always render lowercase.

use super::{AtomicClause, Expr, Rule};

pub fn render_atom(atom: &AtomicClause) -> String {
    match &atom.modulus {
        Some(m) => format!("{} % {} {} {}", atom.key, m, atom.comparator.symbol(), atom.value),
        None => format!("{} {} {}", atom.key, atom.comparator.symbol(), atom.value),
    }
}

/// Precedence levels, loosest first: or < and < not/atom.
fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Or(_) => 0,
        Expr::And(_) => 1,
        Expr::Not(_) | Expr::Atom(_) => 2,
    }
}

fn render_child(child: &Expr, parent_prec: u8) -> String {
    let text = render_expr(child);
    if precedence(child) < parent_prec {
        format!("({text})")
    } else {
        text
    }
}

pub fn render_expr(expr: &Expr) -> String {
    match expr {
        Expr::Atom(a) => render_atom(a),
        Expr::And(children) => children.iter().map(|c| render_child(c, 1)).collect::<Vec<_>>().join(" and "),
        Expr::Or(children) => children.iter().map(|c| render_child(c, 0)).collect::<Vec<_>>().join(" or "),
        Expr::Not(inner) => match inner.as_ref() {
            Expr::Atom(a) => format!("not {}", render_atom(a)),
            other => format!("not ({})", render_expr(other)),
        },
    }
}

pub fn render_rule(rule: &Rule) -> String {
    format!("rule {}\nif {}\nthen {}", rule.id, render_expr(&rule.condition), render_expr(&rule.outcome))
}

pub fn render_rule_set(rules: &[Rule]) -> String {
    let mut out = String::new();
    for (i, r) in rules.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&render_rule(r));
    }
    if !rules.is_empty() {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trl::{Comparator, Expr};
    use crate::value::Value;

    fn atom(key: &str, cmp: Comparator, value: &str) -> Expr {
        Expr::Atom(AtomicClause::new(key, cmp, Value::Str(value.into())))
    }

    #[test]
    fn simple_rule_rendering() {
        let rule = Rule::new(
            1,
            Expr::Atom(AtomicClause::new("Quantity", Comparator::Ge, Value::Num("1000".parse().unwrap()))),
            atom("Result", Comparator::Eq, "Success"),
        );
        assert_eq!(render_rule(&rule), "rule 1\nif Quantity >= 1000\nthen Result = Success");
    }

    #[test]
    fn precedence_forces_parentheses() {
        let a = atom("A", Comparator::Eq, "X");
        let b = atom("B", Comparator::Eq, "Y");
        let c = atom("C", Comparator::Eq, "Z");
        // (A or B) and C keeps its parens; A and B or C does not need them.
        let e = Expr::And(vec![Expr::Or(vec![a.clone(), b.clone()]), c.clone()]);
        assert_eq!(render_expr(&e), "(A = X or B = Y) and C = Z");
        let e = Expr::Or(vec![Expr::And(vec![a.clone(), b.clone()]), c.clone()]);
        assert_eq!(render_expr(&e), "A = X and B = Y or C = Z");
        let e = Expr::Not(Box::new(Expr::Or(vec![a.clone(), b])));
        assert_eq!(render_expr(&e), "not (A = X or B = Y)");
        let e = Expr::Not(Box::new(a));
        assert_eq!(render_expr(&e), "not A = X");
    }

    #[test]
    fn modulo_rendering() {
        let e = Expr::Atom(AtomicClause::with_modulus(
            "Quantity",
            "1000".parse().unwrap(),
            Comparator::Eq,
            Value::Num("0".parse().unwrap()),
        ));
        assert_eq!(render_expr(&e), "Quantity % 1000 = 0");
    }
}
