//! Equivalence partitioning and boundary value analysis for one clause.
//!
//! Representatives are computed arithmetically on an exact lattice: the
//! clause's threshold anchors a grid stepped by the key's granularity, or by
//! the modulus when a modulo clause constrains the same slot. Every
//! candidate is filtered against the *companion* clauses on the same slot,
//! so `Quantity % 1000 = 0` next to `Quantity >= 100000` yields 100000 and
//! 101000 as valid representatives and 100001 as the modulo violation.
//!
//! This module deliberately carries its own little satisfaction check for
//! numeric/string/time clauses instead of calling the shared condition
//! evaluator: the evaluator is the independent oracle that test suites use
//! to verify generated cases, so generation must not lean on it.

use crate::decimal::Decimal;
use crate::knowledge::{SemanticType, SymbolLibrary};
use crate::trl::eval::Literal;
use crate::trl::render::render_atom;
use crate::trl::{base_key, AtomicClause, Comparator};
use crate::value::{TimeOfDay, TimeRange, Value};

use super::{Partition, PartitionKind, TestgenError, ValueDomains};

/// How many lattice steps to probe before declaring a clause unsatisfiable
/// in its context.
const MAX_PROBE_STEPS: usize = 64;

/// Partition a clause in isolation.
pub fn partition_atom(
    atom: &AtomicClause,
    symbols: &SymbolLibrary,
    domains: &ValueDomains,
) -> Result<Partition, TestgenError> {
    partition_atom_in_context(atom, false, &[], symbols, domains)
}

/// Partition a clause given the other literals constraining the same slot.
/// Valid and boundary representatives satisfy the clause *and* all
/// companions; invalid representatives violate only the clause.
pub fn partition_atom_in_context(
    atom: &AtomicClause,
    negated: bool,
    companions: &[Literal],
    symbols: &SymbolLibrary,
    domains: &ValueDomains,
) -> Result<Partition, TestgenError> {
    // A negated ordered/equality literal is the literal over the
    // complemented comparator; `in` complements by swapping labels below.
    if negated {
        if let Some(complement) = atom.comparator.complement() {
            let flipped = AtomicClause {
                key: atom.key.clone(),
                modulus: atom.modulus.clone(),
                comparator: complement,
                value: atom.value.clone(),
            };
            let mut p = partition_atom_in_context(&flipped, false, companions, symbols, domains)?;
            p.atom = atom.clone();
            return Ok(p);
        }
        let p = partition_atom_in_context(atom, false, companions, symbols, domains)?;
        if p.invalid_reps.is_empty() {
            return Err(unsat(atom, "negation has no satisfying representative"));
        }
        return Ok(Partition {
            atom: atom.clone(),
            kind: p.kind,
            valid_reps: p.invalid_reps,
            invalid_reps: p.valid_reps,
            boundary_reps: Vec::new(),
        });
    }

    match semantic_shape(atom, symbols) {
        Shape::Numeric => partition_numeric(atom, companions, domains),
        Shape::Time => partition_time(atom, companions, domains),
        Shape::Boolean => partition_boolean(atom, companions),
        Shape::Stringy => partition_string(atom, companions, symbols, domains),
    }
}

enum Shape {
    Numeric,
    Time,
    Boolean,
    Stringy,
}

fn semantic_shape(atom: &AtomicClause, symbols: &SymbolLibrary) -> Shape {
    if atom.modulus.is_some() {
        return Shape::Numeric;
    }
    match symbols.semantic_type(&base_key(&atom.key)) {
        Some(SemanticType::Number) => Shape::Numeric,
        Some(SemanticType::Time) => Shape::Time,
        Some(SemanticType::Boolean) => Shape::Boolean,
        Some(SemanticType::Text) | Some(SemanticType::Enum(_)) => match &atom.value {
            // Declared text keys still compare numerically when the rule
            // says so.
            Value::Num(_) => Shape::Numeric,
            Value::Time(_) | Value::TimeRange(_) | Value::TimeRangeSet(_) => Shape::Time,
            Value::Bool(_) => Shape::Boolean,
            _ => Shape::Stringy,
        },
        // Unknown key: infer from the value.
        None => match &atom.value {
            Value::Num(_) => Shape::Numeric,
            Value::Time(_) | Value::TimeRange(_) | Value::TimeRangeSet(_) => Shape::Time,
            Value::Bool(_) => Shape::Boolean,
            Value::Str(_) | Value::StrList(_) => Shape::Stringy,
        },
    }
}

fn unsat(atom: &AtomicClause, reason: &str) -> TestgenError {
    TestgenError::UnsatisfiableAtom { atom: render_atom(atom), reason: reason.to_string() }
}

// ---------------------------------------------------------------------------
// Local satisfaction checks (generation-side, independent of the oracle)
// ---------------------------------------------------------------------------

fn sat_numeric(atom: &AtomicClause, negated: bool, x: &Decimal) -> bool {
    let truth = match &atom.modulus {
        Some(m) => {
            let Value::Num(target) = &atom.value else { return false };
            let r = x.rem_floor(m);
            match atom.comparator {
                Comparator::Eq => r == *target,
                Comparator::Neq => r != *target,
                _ => false,
            }
        }
        None => {
            let Value::Num(v) = &atom.value else { return false };
            match atom.comparator {
                Comparator::Eq => x == v,
                Comparator::Neq => x != v,
                Comparator::Gt => x > v,
                Comparator::Ge => x >= v,
                Comparator::Lt => x < v,
                Comparator::Le => x <= v,
                Comparator::In => false,
            }
        }
    };
    truth != negated
}

fn sat_time(atom: &AtomicClause, negated: bool, t: TimeOfDay) -> bool {
    let truth = match (&atom.comparator, &atom.value) {
        (Comparator::Eq, Value::Time(v)) => t == *v,
        (Comparator::Neq, Value::Time(v)) => t != *v,
        (Comparator::Gt, Value::Time(v)) => t > *v,
        (Comparator::Ge, Value::Time(v)) => t >= *v,
        (Comparator::Lt, Value::Time(v)) => t < *v,
        (Comparator::Le, Value::Time(v)) => t <= *v,
        (Comparator::Eq, Value::TimeRange(r)) => r.contains(t),
        (Comparator::Neq, Value::TimeRange(r)) => !r.contains(t),
        (Comparator::In, Value::TimeRange(r)) => r.contains(t),
        (Comparator::Eq, Value::TimeRangeSet(set)) => set.iter().any(|r| r.contains(t)),
        (Comparator::Neq, Value::TimeRangeSet(set)) => !set.iter().any(|r| r.contains(t)),
        (Comparator::In, Value::TimeRangeSet(set)) => set.iter().any(|r| r.contains(t)),
        _ => false,
    };
    truth != negated
}

fn sat_string(atom: &AtomicClause, negated: bool, s: &str) -> bool {
    let truth = match (&atom.comparator, &atom.value) {
        (Comparator::Eq, Value::Str(v)) => s == v,
        (Comparator::Neq, Value::Str(v)) => s != v,
        (Comparator::In, Value::StrList(items)) => items.iter().any(|i| i == s),
        _ => false,
    };
    truth != negated
}

fn sat_bool(atom: &AtomicClause, negated: bool, b: bool) -> bool {
    let truth = match (&atom.comparator, &atom.value) {
        (Comparator::Eq, Value::Bool(v)) => b == *v,
        (Comparator::Neq, Value::Bool(v)) => b != *v,
        _ => false,
    };
    truth != negated
}

fn companions_allow_num(companions: &[Literal], x: &Decimal) -> bool {
    companions.iter().all(|l| sat_numeric(&l.atom, l.negated, x))
}

fn companions_allow_time(companions: &[Literal], t: TimeOfDay) -> bool {
    companions.iter().all(|l| sat_time(&l.atom, l.negated, t))
}

fn companions_allow_str(companions: &[Literal], s: &str) -> bool {
    companions.iter().all(|l| sat_string(&l.atom, l.negated, s))
}

// ---------------------------------------------------------------------------
// Numeric partitions
// ---------------------------------------------------------------------------

struct NumericContext<'a> {
    atom: &'a AtomicClause,
    companions: &'a [Literal],
    min: Option<Decimal>,
    max: Option<Decimal>,
    /// Lattice step: the largest companion modulus, else the granularity.
    step: Decimal,
    /// Lattice residue in [0, step).
    residue: Decimal,
}

impl<'a> NumericContext<'a> {
    fn in_domain(&self, x: &Decimal) -> bool {
        self.min.as_ref().map(|m| x >= m).unwrap_or(true) && self.max.as_ref().map(|m| x <= m).unwrap_or(true)
    }

    fn accepts_valid(&self, x: &Decimal) -> bool {
        self.in_domain(x) && sat_numeric(self.atom, false, x) && companions_allow_num(self.companions, x)
    }

    fn accepts_invalid(&self, x: &Decimal) -> bool {
        self.in_domain(x) && !sat_numeric(self.atom, false, x) && companions_allow_num(self.companions, x)
    }

    fn up(&self, from: &Decimal) -> impl Iterator<Item = Decimal> + '_ {
        let start = from.ceil_to_step(&self.step, &self.residue);
        let step = self.step.clone();
        (0..MAX_PROBE_STEPS).map(move |i| {
            let mut x = start.clone();
            for _ in 0..i {
                x = x + step.clone();
            }
            x
        })
    }

    fn down(&self, from: &Decimal) -> impl Iterator<Item = Decimal> + '_ {
        let start = from.floor_to_step(&self.step, &self.residue);
        let step = self.step.clone();
        (0..MAX_PROBE_STEPS).map(move |i| {
            let mut x = start.clone();
            for _ in 0..i {
                x = x.clone() - step.clone();
            }
            x
        })
    }

    fn first_valid_up(&self, from: &Decimal) -> Option<Decimal> {
        self.up(from).find(|x| self.accepts_valid(x))
    }

    fn first_valid_down(&self, from: &Decimal) -> Option<Decimal> {
        self.down(from).find(|x| self.accepts_valid(x))
    }

    fn first_invalid_up(&self, from: &Decimal) -> Option<Decimal> {
        self.up(from).find(|x| self.accepts_invalid(x))
    }

    fn first_invalid_down(&self, from: &Decimal) -> Option<Decimal> {
        self.down(from).find(|x| self.accepts_invalid(x))
    }
}

fn partition_numeric(
    atom: &AtomicClause,
    companions: &[Literal],
    domains: &ValueDomains,
) -> Result<Partition, TestgenError> {
    let base = base_key(&atom.key);
    let granularity = domains.granularity(&base);

    // The slot's modulo constraints define the lattice. Valid and invalid
    // representatives of a range clause must stay on it so companions hold.
    let mut moduli: Vec<(Decimal, Decimal)> = Vec::new();
    let mut collect = |a: &AtomicClause| {
        if let (Some(m), Value::Num(t)) = (&a.modulus, &a.value) {
            if a.comparator == Comparator::Eq {
                moduli.push((m.clone(), t.clone()));
            }
        }
    };
    collect(atom);
    for l in companions.iter().filter(|l| !l.negated) {
        collect(&l.atom);
    }

    let (step, residue) = match moduli.iter().max_by(|a, b| a.0.cmp(&b.0)) {
        Some((m, t)) => {
            if *t >= *m || t.is_negative() {
                return Err(unsat(atom, "modulo residue outside [0, modulus)"));
            }
            (m.clone(), t.clone())
        }
        None => {
            // Anchor the plain granularity grid at the clause threshold.
            let anchor = match &atom.value {
                Value::Num(v) => v.clone(),
                _ => return Err(unsat(atom, "numeric clause compares against a non-number")),
            };
            (granularity.clone(), anchor.rem_floor(&granularity))
        }
    };

    let ctx = NumericContext {
        atom,
        companions,
        min: domains.min(&base),
        max: domains.max(&base),
        step,
        residue,
    };

    let threshold = match &atom.value {
        Value::Num(v) => v.clone(),
        _ => return Err(unsat(atom, "numeric clause compares against a non-number")),
    };

    let mut valid = Vec::new();
    let mut invalid = Vec::new();
    let mut boundary = Vec::new();

    if atom.modulus.is_some() {
        // Modulo clause: walk the lattice upward from the strongest lower
        // bound (companion bound, domain minimum, or one step).
        let anchor = strongest_lower_bound(companions)
            .or_else(|| ctx.min.clone())
            .unwrap_or_else(|| ctx.step.clone());
        match atom.comparator {
            Comparator::Eq => {
                let first = ctx.first_valid_up(&anchor).ok_or_else(|| {
                    unsat(atom, "no lattice point satisfies the clause and its companions")
                })?;
                let second = first.clone() + ctx.step.clone();
                valid.push(first.clone());
                if ctx.accepts_valid(&second) {
                    valid.push(second);
                }
                // Off-lattice neighbors: multiple plus/minus one granularity.
                for candidate in [first.clone() + granularity.clone(), first.clone() - granularity.clone()] {
                    if ctx.accepts_invalid(&candidate) {
                        invalid.push(candidate);
                        break;
                    }
                }
            }
            Comparator::Neq => {
                // Valid: off-lattice values near the anchor lattice point.
                let on = anchor.ceil_to_step(&ctx.step, &ctx.residue);
                for candidate in [on.clone() + granularity.clone(), on.clone() - granularity.clone()] {
                    if ctx.accepts_valid(&candidate) {
                        valid.push(candidate);
                    }
                }
                if valid.is_empty() {
                    return Err(unsat(atom, "no off-lattice value satisfies the clause"));
                }
                valid.truncate(2);
                if ctx.accepts_invalid(&on) {
                    invalid.push(on);
                }
            }
            _ => return Err(unsat(atom, "modulo clause must use '=' or '!='")),
        }
        return Ok(Partition {
            atom: atom.clone(),
            kind: PartitionKind::Modulo,
            valid_reps: valid.into_iter().map(Value::Num).collect(),
            invalid_reps: invalid.into_iter().map(Value::Num).collect(),
            boundary_reps: boundary.into_iter().map(Value::Num).collect(),
        });
    }

    match atom.comparator {
        Comparator::Ge | Comparator::Gt => {
            let first = ctx
                .first_valid_up(&threshold)
                .ok_or_else(|| unsat(atom, "no value at or above the threshold is admissible"))?;
            boundary.push(first.clone());
            valid.push(first.clone());
            if atom.comparator == Comparator::Ge {
                let next = first.clone() + ctx.step.clone();
                if ctx.accepts_valid(&next) {
                    valid.push(next);
                }
            }
            if let Some(below) = ctx.first_invalid_down(&threshold) {
                invalid.push(below);
            }
        }
        Comparator::Le | Comparator::Lt => {
            let first = ctx
                .first_valid_down(&threshold)
                .ok_or_else(|| unsat(atom, "no value at or below the threshold is admissible"))?;
            boundary.push(first.clone());
            valid.push(first.clone());
            if atom.comparator == Comparator::Le {
                let next = first.clone() - ctx.step.clone();
                if ctx.accepts_valid(&next) {
                    valid.push(next);
                }
            }
            if let Some(above) = ctx.first_invalid_up(&threshold) {
                invalid.push(above);
            }
        }
        Comparator::Eq => {
            if !ctx.accepts_valid(&threshold) {
                return Err(unsat(atom, "the equality value violates a companion clause or the domain"));
            }
            valid.push(threshold.clone());
            if let Some(below) = ctx.first_invalid_down(&threshold) {
                invalid.push(below);
            }
            if let Some(above) = ctx.first_invalid_up(&threshold) {
                invalid.push(above);
            }
        }
        Comparator::Neq => {
            if let Some(above) = ctx.first_valid_up(&(threshold.clone() + ctx.step.clone())) {
                valid.push(above);
            }
            if let Some(below) = ctx.first_valid_down(&(threshold.clone() - ctx.step.clone())) {
                valid.push(below);
            }
            if valid.is_empty() {
                return Err(unsat(atom, "no admissible value differs from the threshold"));
            }
            if ctx.accepts_invalid(&threshold) {
                invalid.push(threshold.clone());
            }
        }
        Comparator::In => return Err(unsat(atom, "'in' is not defined for numbers")),
    }

    // Invalid representatives of the same magnitude as the threshold keep
    // negatives adjacent to the boundary; dedup guards against step == 0
    // style collisions.
    valid.dedup();
    invalid.retain(|x| !valid.contains(x));

    Ok(Partition {
        atom: atom.clone(),
        kind: PartitionKind::NumericInterval,
        valid_reps: valid.into_iter().map(Value::Num).collect(),
        invalid_reps: invalid.into_iter().map(Value::Num).collect(),
        boundary_reps: boundary.into_iter().map(Value::Num).collect(),
    })
}

fn strongest_lower_bound(companions: &[Literal]) -> Option<Decimal> {
    companions
        .iter()
        .filter(|l| !l.negated)
        .filter_map(|l| match (&l.atom.comparator, &l.atom.value, &l.atom.modulus) {
            (Comparator::Ge, Value::Num(v), None) => Some(v.clone()),
            (Comparator::Gt, Value::Num(v), None) => Some(v.clone()),
            _ => None,
        })
        .max()
}

// ---------------------------------------------------------------------------
// Time partitions
// ---------------------------------------------------------------------------

fn partition_time(
    atom: &AtomicClause,
    companions: &[Literal],
    domains: &ValueDomains,
) -> Result<Partition, TestgenError> {
    let delta = domains.time_granularity_secs();
    let accepts_valid = |t: TimeOfDay| sat_time(atom, false, t) && companions_allow_time(companions, t);
    let accepts_invalid = |t: TimeOfDay| !sat_time(atom, false, t) && companions_allow_time(companions, t);

    let mut valid: Vec<TimeOfDay> = Vec::new();
    let mut invalid: Vec<TimeOfDay> = Vec::new();
    let mut boundary: Vec<TimeOfDay> = Vec::new();

    match &atom.value {
        Value::TimeRange(_) | Value::TimeRangeSet(_) => {
            let ranges: Vec<TimeRange> = match &atom.value {
                Value::TimeRange(r) => vec![*r],
                Value::TimeRangeSet(set) => set.clone(),
                _ => unreachable!(),
            };
            match atom.comparator {
                Comparator::Eq | Comparator::In => {
                    for r in &ranges {
                        for candidate in [r.start, r.end, r.midpoint()] {
                            if accepts_valid(candidate) && !valid.contains(&candidate) {
                                valid.push(candidate);
                            }
                        }
                        boundary.extend([r.start, r.end].into_iter().filter(|t| accepts_valid(*t)));
                        for candidate in [r.start.checked_add(-delta), r.end.checked_add(delta)] {
                            if let Some(t) = candidate {
                                if accepts_invalid(t) && !invalid.contains(&t) {
                                    invalid.push(t);
                                }
                            }
                        }
                    }
                }
                Comparator::Neq => {
                    for r in &ranges {
                        for candidate in [r.start.checked_add(-delta), r.end.checked_add(delta)] {
                            if let Some(t) = candidate {
                                if accepts_valid(t) && !valid.contains(&t) {
                                    valid.push(t);
                                }
                            }
                        }
                        for candidate in [r.start, r.end, r.midpoint()] {
                            if accepts_invalid(candidate) && !invalid.contains(&candidate) {
                                invalid.push(candidate);
                            }
                        }
                    }
                }
                _ => return Err(unsat(atom, "time ranges pair with '=', '!=' or 'in'")),
            }
        }
        Value::Time(v) => {
            let probe = |start: TimeOfDay, dir: i64, want_valid: bool| -> Option<TimeOfDay> {
                (0..MAX_PROBE_STEPS as i64)
                    .filter_map(|i| start.checked_add(dir * delta * i))
                    .find(|t| if want_valid { accepts_valid(*t) } else { accepts_invalid(*t) })
            };
            match atom.comparator {
                Comparator::Eq => {
                    if !accepts_valid(*v) {
                        return Err(unsat(atom, "the time value violates a companion clause"));
                    }
                    valid.push(*v);
                    invalid.extend(v.checked_add(-delta).filter(|t| accepts_invalid(*t)));
                    invalid.extend(v.checked_add(delta).filter(|t| accepts_invalid(*t)));
                }
                Comparator::Neq => {
                    valid.extend(v.checked_add(delta).filter(|t| accepts_valid(*t)));
                    valid.extend(v.checked_add(-delta).filter(|t| accepts_valid(*t)));
                    if valid.is_empty() {
                        return Err(unsat(atom, "no admissible time differs from the value"));
                    }
                    if accepts_invalid(*v) {
                        invalid.push(*v);
                    }
                }
                Comparator::Ge | Comparator::Gt => {
                    let start = if atom.comparator == Comparator::Ge { *v } else { v.checked_add(delta).unwrap_or(*v) };
                    let first = probe(start, 1, true).ok_or_else(|| unsat(atom, "no admissible time at or after the threshold"))?;
                    boundary.push(first);
                    valid.push(first);
                    if atom.comparator == Comparator::Ge {
                        if let Some(next) = first.checked_add(delta).filter(|t| accepts_valid(*t)) {
                            valid.push(next);
                        }
                    }
                    // The first violating time: the threshold itself for a
                    // strict bound, one step below otherwise.
                    let inv_start = if atom.comparator == Comparator::Gt { Some(*v) } else { v.checked_add(-delta) };
                    if let Some(below) = inv_start.and_then(|s| probe(s, -1, false)) {
                        invalid.push(below);
                    }
                }
                Comparator::Le | Comparator::Lt => {
                    let start = if atom.comparator == Comparator::Le { *v } else { v.checked_add(-delta).unwrap_or(*v) };
                    let first = probe(start, -1, true).ok_or_else(|| unsat(atom, "no admissible time at or before the threshold"))?;
                    boundary.push(first);
                    valid.push(first);
                    if atom.comparator == Comparator::Le {
                        if let Some(next) = first.checked_add(-delta).filter(|t| accepts_valid(*t)) {
                            valid.push(next);
                        }
                    }
                    let inv_start = if atom.comparator == Comparator::Lt { Some(*v) } else { v.checked_add(delta) };
                    if let Some(above) = inv_start.and_then(|s| probe(s, 1, false)) {
                        invalid.push(above);
                    }
                }
                Comparator::In => return Err(unsat(atom, "'in' requires a time-range set value")),
            }
        }
        _ => return Err(unsat(atom, "time clause compares against a non-time value")),
    }

    if valid.is_empty() {
        return Err(unsat(atom, "no admissible time satisfies the clause"));
    }

    Ok(Partition {
        atom: atom.clone(),
        kind: PartitionKind::Time,
        valid_reps: valid.into_iter().map(Value::Time).collect(),
        invalid_reps: invalid.into_iter().map(Value::Time).collect(),
        boundary_reps: boundary.into_iter().map(Value::Time).collect(),
    })
}

// ---------------------------------------------------------------------------
// Boolean and string partitions
// ---------------------------------------------------------------------------

fn partition_boolean(atom: &AtomicClause, companions: &[Literal]) -> Result<Partition, TestgenError> {
    let mut valid = Vec::new();
    let mut invalid = Vec::new();
    for candidate in [true, false] {
        let companions_ok = companions.iter().all(|l| sat_bool(&l.atom, l.negated, candidate));
        if !companions_ok {
            continue;
        }
        if sat_bool(atom, false, candidate) {
            valid.push(Value::Bool(candidate));
        } else {
            invalid.push(Value::Bool(candidate));
        }
    }
    if valid.is_empty() {
        return Err(unsat(atom, "no boolean value satisfies the clause and its companions"));
    }
    Ok(Partition {
        atom: atom.clone(),
        kind: PartitionKind::Boolean,
        valid_reps: valid,
        invalid_reps: invalid,
        boundary_reps: Vec::new(),
    })
}

fn partition_string(
    atom: &AtomicClause,
    companions: &[Literal],
    symbols: &SymbolLibrary,
    domains: &ValueDomains,
) -> Result<Partition, TestgenError> {
    let base = base_key(&atom.key);
    let domain = domains.enum_values(&base, symbols);
    let accepts_valid = |s: &str| sat_string(atom, false, s) && companions_allow_str(companions, s);
    let accepts_invalid = |s: &str| !sat_string(atom, false, s) && companions_allow_str(companions, s);

    let mut valid: Vec<String> = Vec::new();
    let mut invalid: Vec<String> = Vec::new();

    let push_unique = |list: &mut Vec<String>, s: &str| {
        if !list.iter().any(|x| x == s) {
            list.push(s.to_string());
        }
    };

    match (&atom.comparator, &atom.value) {
        (Comparator::Eq, Value::Str(v)) => {
            if accepts_valid(v) {
                push_unique(&mut valid, v);
            }
            // Exhaustive enumeration of the declared domain; sentinel when
            // no domain is known.
            for candidate in &domain {
                if accepts_invalid(candidate) {
                    push_unique(&mut invalid, candidate);
                }
            }
            if invalid.is_empty() {
                let sentinel = format!("NOT_{v}");
                if accepts_invalid(&sentinel) {
                    invalid.push(sentinel);
                }
            }
        }
        (Comparator::Neq, Value::Str(v)) => {
            for candidate in &domain {
                if accepts_valid(candidate) {
                    push_unique(&mut valid, candidate);
                }
            }
            if valid.is_empty() {
                let sentinel = format!("NOT_{v}");
                if accepts_valid(&sentinel) {
                    valid.push(sentinel);
                }
            }
            if accepts_invalid(v) {
                push_unique(&mut invalid, v);
            }
        }
        (Comparator::In, Value::StrList(items)) => {
            for item in items {
                if accepts_valid(item) {
                    push_unique(&mut valid, item);
                }
            }
            for candidate in &domain {
                if accepts_invalid(candidate) {
                    push_unique(&mut invalid, candidate);
                }
            }
            if invalid.is_empty() {
                if let Some(first) = items.first() {
                    let sentinel = format!("NOT_{first}");
                    if accepts_invalid(&sentinel) {
                        invalid.push(sentinel);
                    }
                }
            }
        }
        _ => {
            return Err(unsat(atom, "string clause must use '=', '!=' or 'in' with a string value"));
        }
    }

    if valid.is_empty() {
        return Err(unsat(atom, "no string value satisfies the clause and its companions"));
    }

    Ok(Partition {
        atom: atom.clone(),
        kind: PartitionKind::Enum,
        valid_reps: valid.into_iter().map(Value::Str).collect(),
        invalid_reps: invalid.into_iter().map(Value::Str).collect(),
        boundary_reps: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::builtin::finance_symbols;
    use crate::knowledge::SymbolKey;

    fn domains() -> ValueDomains {
        ValueDomains::finance_defaults()
    }

    fn num(s: &str) -> Value {
        Value::Num(s.parse().unwrap())
    }

    fn nums(p: &[Value]) -> Vec<String> {
        p.iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn ge_partition_matches_definition() {
        let atom = AtomicClause::new("Quantity", Comparator::Ge, num("100000"));
        let p = partition_atom(&atom, &finance_symbols(), &domains()).unwrap();
        assert_eq!(nums(&p.valid_reps), ["100000", "100001"]);
        assert_eq!(nums(&p.invalid_reps), ["99999"]);
        assert_eq!(nums(&p.boundary_reps), ["100000"]);
        assert_eq!(p.kind, PartitionKind::NumericInterval);
        assert_eq!(p.primary_valid().to_string(), "100001");
    }

    #[test]
    fn gt_lt_eq_partitions() {
        let symbols = finance_symbols();
        let p = partition_atom(&AtomicClause::new("Quantity", Comparator::Gt, num("50000")), &symbols, &domains()).unwrap();
        assert_eq!(nums(&p.valid_reps), ["50001"]);
        assert_eq!(nums(&p.invalid_reps), ["50000"]);

        let p = partition_atom(&AtomicClause::new("Quantity", Comparator::Le, num("100")), &symbols, &domains()).unwrap();
        assert_eq!(nums(&p.valid_reps), ["100", "99"]);
        assert_eq!(nums(&p.invalid_reps), ["101"]);

        let p = partition_atom(&AtomicClause::new("Quantity", Comparator::Eq, num("7")), &symbols, &domains()).unwrap();
        assert_eq!(nums(&p.valid_reps), ["7"]);
        assert_eq!(nums(&p.invalid_reps), ["6", "8"]);
    }

    #[test]
    fn price_granularity_is_a_cent() {
        let atom = AtomicClause::new("Price", Comparator::Ge, num("10"));
        let p = partition_atom(&atom, &finance_symbols(), &domains()).unwrap();
        assert_eq!(nums(&p.invalid_reps), ["9.99"]);
        assert_eq!(nums(&p.valid_reps), ["10", "10.01"]);
    }

    #[test]
    fn modulo_with_companion_bound() {
        let modulo = AtomicClause::with_modulus("Quantity", "1000".parse().unwrap(), Comparator::Eq, num("0"));
        let bound = Literal { atom: AtomicClause::new("Quantity", Comparator::Ge, num("100000")), negated: false };
        let p = partition_atom_in_context(&modulo, false, &[bound], &finance_symbols(), &domains()).unwrap();
        assert_eq!(nums(&p.valid_reps), ["100000", "101000"]);
        assert_eq!(nums(&p.invalid_reps), ["100001"]);
        assert_eq!(p.kind, PartitionKind::Modulo);
    }

    #[test]
    fn bound_with_modulo_companion_stays_on_lattice() {
        let bound = AtomicClause::new("Quantity", Comparator::Ge, num("100000"));
        let modulo = Literal {
            atom: AtomicClause::with_modulus("Quantity", "1000".parse().unwrap(), Comparator::Eq, num("0")),
            negated: false,
        };
        let p = partition_atom_in_context(&bound, false, &[modulo], &finance_symbols(), &domains()).unwrap();
        assert_eq!(nums(&p.valid_reps), ["100000", "101000"]);
        // The nearest violating value that still satisfies the modulo.
        assert_eq!(nums(&p.invalid_reps), ["99000"]);
        assert_eq!(nums(&p.boundary_reps), ["100000"]);
    }

    #[test]
    fn enum_domain_enumerated_exhaustively() {
        let mut symbols = finance_symbols();
        symbols.operation.iter_mut().find(|k| k.name == "TradingMethod").map(|k| {
            k.sem_type = SemanticType::Enum(vec!["BlockTrading".into(), "AuctionTrading".into()]);
            k
        });
        let atom = AtomicClause::new("TradingMethod", Comparator::Eq, Value::Str("BlockTrading".into()));
        let p = partition_atom(&atom, &symbols, &domains()).unwrap();
        assert_eq!(p.valid_reps, vec![Value::Str("BlockTrading".into())]);
        assert_eq!(p.invalid_reps, vec![Value::Str("AuctionTrading".into())]);
        assert_eq!(p.kind, PartitionKind::Enum);
    }

    #[test]
    fn undeclared_domain_falls_back_to_sentinel() {
        let atom = AtomicClause::new("Action", Comparator::Eq, Value::Str("Trade".into()));
        let p = partition_atom(&atom, &finance_symbols(), &domains()).unwrap();
        assert_eq!(p.invalid_reps, vec![Value::Str("NOT_Trade".into())]);
    }

    #[test]
    fn time_range_partition() {
        let r = TimeRange::new("09:30".parse().unwrap(), "11:30".parse().unwrap()).unwrap();
        let atom = AtomicClause::new("Time", Comparator::In, Value::TimeRangeSet(vec![r]));
        let p = partition_atom(&atom, &finance_symbols(), &domains()).unwrap();
        let texts = nums(&p.valid_reps);
        assert!(texts.contains(&"09:30".to_string()));
        assert!(texts.contains(&"11:30".to_string()));
        assert!(texts.contains(&"10:30".to_string()));
        assert_eq!(nums(&p.invalid_reps), ["09:29", "11:31"]);
        assert_eq!(nums(&p.boundary_reps), ["09:30", "11:30"]);
    }

    #[test]
    fn boolean_partition() {
        let atom = AtomicClause::new("Constraint", Comparator::Eq, Value::Bool(true));
        let p = partition_atom(&atom, &finance_symbols(), &domains()).unwrap();
        assert_eq!(p.valid_reps, vec![Value::Bool(true)]);
        assert_eq!(p.invalid_reps, vec![Value::Bool(false)]);
    }

    #[test]
    fn negated_literal_complements() {
        let atom = AtomicClause::new("Quantity", Comparator::Ge, num("100"));
        let p = partition_atom_in_context(&atom, true, &[], &finance_symbols(), &domains()).unwrap();
        // not (>= 100) is (< 100)
        assert_eq!(nums(&p.valid_reps), ["99"]);
        assert_eq!(nums(&p.invalid_reps), ["100"]);
    }

    #[test]
    fn unsatisfiable_atom_is_an_error() {
        // Quantity < 0 with declared min 0.
        let atom = AtomicClause::new("Quantity", Comparator::Lt, num("0"));
        let err = partition_atom(&atom, &finance_symbols(), &domains()).unwrap_err();
        assert!(matches!(err, TestgenError::UnsatisfiableAtom { .. }));
        let text = err.to_string();
        assert!(text.contains("Quantity < 0"), "{text}");
    }

    #[test]
    fn ge_zero_has_no_negative_in_non_negative_domain() {
        let atom = AtomicClause::new("Quantity", Comparator::Ge, num("0"));
        let p = partition_atom(&atom, &finance_symbols(), &domains()).unwrap();
        assert!(p.invalid_reps.is_empty());
        assert!(!p.valid_reps.is_empty());
    }

    #[test]
    fn unknown_key_infers_shape_from_value() {
        let atom = AtomicClause::new("Balance", Comparator::Lt, num("100000"));
        let p = partition_atom(&atom, &SymbolLibrary::empty(), &domains()).unwrap();
        assert_eq!(p.kind, PartitionKind::NumericInterval);
        assert_eq!(nums(&p.valid_reps), ["99999"]);
    }

    #[test]
    fn observed_values_supply_enum_domain() {
        let (set, _) = crate::trl::parse_rules(
            "rule 1\nif TradingMethod = A then Result = Success\nrule 2\nif TradingMethod = B then Result = Success",
            &finance_symbols(),
            false,
            "t",
        );
        let domains = ValueDomains::finance_defaults().with_observed(&set);
        let atom = AtomicClause::new("TradingMethod", Comparator::Eq, Value::Str("A".into()));
        let p = partition_atom(&atom, &finance_symbols(), &domains).unwrap();
        assert_eq!(p.invalid_reps, vec![Value::Str("B".into())]);
    }
}
