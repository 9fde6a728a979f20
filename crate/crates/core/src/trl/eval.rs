//! Predicate evaluation of conditions over concrete assignments.
//!
//! Conditions are evaluated in disjunctive normal form: a condition holds
//! when at least one conjunctive variant holds. Within a variant, repeated
//! plain-equality clauses on the same key denote *sequential bindings* and
//! read from suffixed slots (`Action`, `Action2`, ...), matching the flat
//! test-case shape; range and modulo clauses on a key constrain the same
//! slot. Test generation uses the identical slotting, so generated cases and
//! this evaluator always agree on which map entry a clause reads.

use indexmap::IndexMap;

use crate::value::Value;

use super::{AtomicClause, Comparator, Expr};

pub type Assignment = IndexMap<String, Value>;

/// An atom with its polarity after negation push-down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub atom: AtomicClause,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("condition expands to more than {cap} conjunctive variants")]
    TooManyVariants { cap: usize },
}

/// Expand a condition into conjunctive variants (DNF), pushing negation down
/// to the atoms.
pub fn expand_variants(expr: &Expr, cap: usize) -> Result<Vec<Vec<Literal>>, ExpandError> {
    fn go(expr: &Expr, negated: bool, cap: usize) -> Result<Vec<Vec<Literal>>, ExpandError> {
        match expr {
            Expr::Atom(a) => Ok(vec![vec![Literal { atom: a.clone(), negated }]]),
            Expr::Not(inner) => go(inner, !negated, cap),
            Expr::And(children) if !negated => product(children, false, cap),
            Expr::Or(children) if negated => product(children, true, cap),
            Expr::Or(children) => union(children, false, cap),
            Expr::And(children) => union(children, true, cap),
        }
    }

    fn union(children: &[Expr], negated: bool, cap: usize) -> Result<Vec<Vec<Literal>>, ExpandError> {
        let mut out = Vec::new();
        for c in children {
            out.extend(go(c, negated, cap)?);
            if out.len() > cap {
                return Err(ExpandError::TooManyVariants { cap });
            }
        }
        Ok(out)
    }

    fn product(children: &[Expr], negated: bool, cap: usize) -> Result<Vec<Vec<Literal>>, ExpandError> {
        let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
        for c in children {
            let child_variants = go(c, negated, cap)?;
            let mut next = Vec::with_capacity(acc.len() * child_variants.len());
            for base in &acc {
                for cv in &child_variants {
                    let mut merged = base.clone();
                    merged.extend(cv.iter().cloned());
                    next.push(merged);
                }
            }
            if next.len() > cap {
                return Err(ExpandError::TooManyVariants { cap });
            }
            acc = next;
        }
        Ok(acc)
    }

    go(expr, false, cap)
}

fn is_binding_eq(l: &Literal) -> bool {
    !l.negated && l.atom.comparator == Comparator::Eq && l.atom.modulus.is_none()
}

/// Assign each literal of a variant the slot it reads from.
///
/// Literals on a key share a slot until a second plain-equality binding with
/// a different value arrives, which opens the next slot (`Key`, `Key2`, ...).
/// Slot names never collide with keys already used in the variant.
pub fn slot_names(variant: &[Literal]) -> Vec<String> {
    struct Slot {
        key: String,
        name: String,
        eq_value: Option<Value>,
    }
    let mut slots: Vec<Slot> = Vec::new();
    let mut used_names: Vec<String> = Vec::new();
    let mut out = Vec::with_capacity(variant.len());

    for literal in variant {
        let key = literal.atom.key.clone();
        let position = slots.iter().rposition(|s| s.key == key);
        let needs_new = match position {
            None => true,
            Some(i) => {
                is_binding_eq(literal)
                    && slots[i].eq_value.as_ref().map(|v| *v != literal.atom.value).unwrap_or(false)
            }
        };
        let slot_index = if needs_new {
            let ordinal = slots.iter().filter(|s| s.key == key).count() + 1;
            let mut n = ordinal;
            let name = loop {
                let candidate = if n == 1 { key.clone() } else { format!("{key}{n}") };
                if !used_names.contains(&candidate) {
                    break candidate;
                }
                n += 1;
            };
            used_names.push(name.clone());
            slots.push(Slot { key: key.clone(), name, eq_value: None });
            slots.len() - 1
        } else {
            position.unwrap()
        };
        if is_binding_eq(literal) && slots[slot_index].eq_value.is_none() {
            slots[slot_index].eq_value = Some(literal.atom.value.clone());
        }
        out.push(slots[slot_index].name.clone());
    }
    out
}

/// Truth of a bare atom against a bound value.
pub fn atom_truth(atom: &AtomicClause, bound: &Value) -> bool {
    if let Some(modulus) = &atom.modulus {
        let (Value::Num(v), Value::Num(target)) = (bound, &atom.value) else {
            return false;
        };
        let remainder = v.rem_floor(modulus);
        return match atom.comparator {
            Comparator::Eq => remainder == *target,
            Comparator::Neq => remainder != *target,
            _ => false,
        };
    }
    match atom.comparator {
        Comparator::Eq => values_equal(bound, &atom.value),
        Comparator::Neq => !values_equal(bound, &atom.value),
        Comparator::Gt | Comparator::Ge | Comparator::Lt | Comparator::Le => {
            let ord = match (bound, &atom.value) {
                (Value::Num(a), Value::Num(b)) => a.cmp(b),
                (Value::Time(a), Value::Time(b)) => a.cmp(b),
                _ => return false,
            };
            match atom.comparator {
                Comparator::Gt => ord.is_gt(),
                Comparator::Ge => ord.is_ge(),
                Comparator::Lt => ord.is_lt(),
                Comparator::Le => ord.is_le(),
                _ => unreachable!(),
            }
        }
        Comparator::In => match (bound, &atom.value) {
            (Value::Time(t), Value::TimeRangeSet(ranges)) => ranges.iter().any(|r| r.contains(*t)),
            (Value::Time(t), Value::TimeRange(r)) => r.contains(*t),
            (Value::Str(s), Value::StrList(items)) => items.contains(s),
            _ => false,
        },
    }
}

/// Equality with one domain-specific reading: a time against a range (or
/// range set) tests containment, which is what `Time = 09:30-11:30` means.
fn values_equal(bound: &Value, target: &Value) -> bool {
    match (bound, target) {
        (Value::Time(t), Value::TimeRange(r)) => r.contains(*t),
        (Value::Time(t), Value::TimeRangeSet(ranges)) => ranges.iter().any(|r| r.contains(*t)),
        (a, b) => a == b,
    }
}

/// A literal against its slot. A missing binding is conservatively false,
/// negated or not: satisfaction is never claimed for unbound keys.
pub fn eval_literal(literal: &Literal, bound: Option<&Value>) -> bool {
    match bound {
        None => false,
        Some(v) => {
            let truth = atom_truth(&literal.atom, v);
            if literal.negated {
                !truth
            } else {
                truth
            }
        }
    }
}

pub fn eval_variant(variant: &[Literal], assignment: &Assignment) -> bool {
    let names = slot_names(variant);
    variant
        .iter()
        .zip(names.iter())
        .all(|(literal, slot)| eval_literal(literal, assignment.get(slot.as_str())))
}

const EVAL_VARIANT_CAP: usize = 256;

/// Whether an assignment satisfies a condition. Conditions too large to
/// expand fall back to direct recursive evaluation without slot semantics.
pub fn eval_condition(expr: &Expr, assignment: &Assignment) -> bool {
    match expand_variants(expr, EVAL_VARIANT_CAP) {
        Ok(variants) => variants.iter().any(|v| eval_variant(v, assignment)),
        Err(_) => eval_plain(expr, assignment),
    }
}

fn eval_plain(expr: &Expr, assignment: &Assignment) -> bool {
    match expr {
        Expr::Atom(a) => assignment.get(a.key.as_str()).map(|v| atom_truth(a, v)).unwrap_or(false),
        Expr::And(children) => children.iter().all(|c| eval_plain(c, assignment)),
        Expr::Or(children) => children.iter().any(|c| eval_plain(c, assignment)),
        Expr::Not(inner) => !eval_plain(inner, assignment),
    }
}
