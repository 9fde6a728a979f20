//! Recursive-descent parser for rule files.
//!
//! A rule file is a sequence of blocks:
//!
//! ```text
//! # comment
//! rule 1
//! if Quantity % 1000 = 0 and Quantity >= 100000
//! then Result = Success
//! ```
//!
//! Keywords are case-insensitive. One malformed block never aborts the
//! parse: the block is dropped with positioned diagnostics and parsing
//! resumes at the next `rule <n>` header.

use crate::decimal::Decimal;
use crate::knowledge::{SemanticType, SymbolLibrary};
use crate::value::{normalize_ranges, TimeRange, Value};

use super::classify::{base_key, classify_key};
use super::lexer::{keyword_of, lex, Token, TokenKind};
use super::{AtomicClause, Comparator, Expr, ParseDiagnostic, Rule, RuleSet};

const COMPARATOR_EXPECTATION: &str = "comparator ('=', '!=', '>', '>=', '<', '<=', 'in')";

pub fn parse_rules(
    source: &str,
    symbols: &SymbolLibrary,
    strict_keys: bool,
    source_name: &str,
) -> (RuleSet, Vec<ParseDiagnostic>) {
    let (tokens, lex_diagnostics) = lex(source);
    let mut parser = Parser { tokens, pos: 0, diagnostics: Vec::new(), symbols, strict_keys };

    let mut rules: Vec<Rule> = Vec::new();
    loop {
        parser.skip_to_rule_header(true);
        if parser.at_eof() {
            break;
        }
        let before = parser.diagnostics.len();
        let parsed = parser.parse_block();
        let block_has_error = parser.diagnostics[before..].iter().any(ParseDiagnostic::is_error);
        if let Some(rule) = parsed {
            let span = rule.source_span.unwrap_or((0, 0));
            let lex_error_inside = lex_diagnostics
                .iter()
                .any(|d| d.is_error() && d.line >= span.0 && d.line <= span.1);
            if block_has_error || lex_error_inside {
                continue;
            }
            if rules.iter().any(|r| r.id == rule.id) {
                parser.diagnostics.push(ParseDiagnostic::error(
                    span.0,
                    1,
                    format!("duplicate rule id {}", rule.id),
                ));
                continue;
            }
            rules.push(rule);
        }
    }

    let mut diagnostics = lex_diagnostics;
    diagnostics.extend(parser.diagnostics);
    diagnostics.sort_by_key(|d| (d.line, d.column));
    (RuleSet::new(rules, source_name), diagnostics)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    diagnostics: Vec<ParseDiagnostic>,
    symbols: &'a SymbolLibrary,
    strict_keys: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn prev_line(&self) -> usize {
        if self.pos == 0 {
            1
        } else {
            self.tokens[self.pos - 1].line
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Eof)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if keyword_of(s) == Some(kw))
    }

    fn at_rule_header(&self) -> bool {
        if !self.at_keyword("rule") {
            return false;
        }
        matches!(self.tokens.get(self.pos + 1).map(|t| &t.kind), Some(TokenKind::Number(_)))
    }

    fn error_at(&mut self, token: &Token, message: impl Into<String>, expected: Vec<String>) {
        self.diagnostics
            .push(ParseDiagnostic::error(token.line, token.column, message).expecting(expected));
    }

    /// Advance to the next `rule <n>` header. When `diagnose` is set, stray
    /// top-level tokens produce one diagnostic per run of garbage.
    fn skip_to_rule_header(&mut self, diagnose: bool) {
        let mut reported = false;
        while !self.at_eof() && !self.at_rule_header() {
            if diagnose && !reported {
                let t = self.peek().clone();
                self.error_at(
                    &t,
                    format!("expected a rule header, found {}", t.kind.describe()),
                    vec!["'rule <n>'".into()],
                );
                reported = true;
            }
            self.bump();
        }
    }

    fn parse_block(&mut self) -> Option<Rule> {
        let header = self.bump(); // `rule`
        let start_line = header.line;
        let id_token = self.bump();
        let id = match &id_token.kind {
            TokenKind::Number(n) => match decimal_to_rule_id(n) {
                Some(id) => id,
                None => {
                    self.error_at(&id_token, format!("rule id must be a positive integer, got {n}"), vec![]);
                    self.recover();
                    return None;
                }
            },
            other => {
                let descr = other.describe();
                self.error_at(&id_token, format!("expected rule id, found {descr}"), vec!["positive integer".into()]);
                self.recover();
                return None;
            }
        };

        if !self.at_keyword("if") {
            let t = self.peek().clone();
            self.error_at(&t, format!("expected 'if' after rule header, found {}", t.kind.describe()), vec!["'if'".into()]);
            self.recover();
            return None;
        }
        self.bump();

        let condition = match self.parse_or(true) {
            Ok(e) => e,
            Err(()) => {
                self.recover();
                return None;
            }
        };

        if !self.at_keyword("then") {
            let t = self.peek().clone();
            self.error_at(
                &t,
                format!("expected 'then' after the condition, found {}", t.kind.describe()),
                vec!["'then'".into()],
            );
            self.recover();
            return None;
        }
        self.bump();

        if self.at_eof() || self.at_rule_header() {
            let t = self.peek().clone();
            self.error_at(&t, "empty outcome: 'then' must be followed by at least one clause", vec!["clause".into()]);
            return None;
        }

        let outcome = match self.parse_or(false) {
            Ok(e) => e,
            Err(()) => {
                self.recover();
                return None;
            }
        };

        if outcome.contains_or() || outcome.contains_not() {
            self.diagnostics.push(ParseDiagnostic::error(
                start_line,
                1,
                "outcome uses 'or' or 'not'; the grammar only permits \
                 AND-composition there (CompoundOutcome ::= \"(\" <ExpectedOutcome> \")\" \
                 | <ExpectedOutcome> \"AND\" <ExpectedOutcome>)",
            ));
        }

        let end_line = self.prev_line();
        Some(Rule { id, condition, outcome, source_span: Some((start_line, end_line)) })
    }

    fn recover(&mut self) {
        self.skip_to_rule_header(false);
    }

    fn stop_token(&self, in_condition: bool) -> bool {
        if self.at_eof() || self.at_rule_header() {
            return true;
        }
        in_condition && self.at_keyword("then")
    }

    fn parse_or(&mut self, in_condition: bool) -> Result<Expr, ()> {
        let mut children = vec![self.parse_and(in_condition)?];
        while self.at_keyword("or") {
            self.bump();
            children.push(self.parse_and(in_condition)?);
        }
        Ok(if children.len() == 1 { children.pop().unwrap() } else { Expr::Or(children) })
    }

    fn parse_and(&mut self, in_condition: bool) -> Result<Expr, ()> {
        let mut children = vec![self.parse_unary(in_condition)?];
        while self.at_keyword("and") {
            self.bump();
            children.push(self.parse_unary(in_condition)?);
        }
        Ok(if children.len() == 1 { children.pop().unwrap() } else { Expr::And(children) })
    }

    fn parse_unary(&mut self, in_condition: bool) -> Result<Expr, ()> {
        if self.stop_token(in_condition) {
            let t = self.peek().clone();
            self.error_at(&t, format!("expected a clause, found {}", t.kind.describe()), vec![
                "key identifier".into(),
                "'('".into(),
                "'not'".into(),
            ]);
            return Err(());
        }
        if self.at_keyword("not") {
            self.bump();
            let inner = self.parse_unary(in_condition)?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        if matches!(self.peek().kind, TokenKind::LParen) {
            self.bump();
            let inner = self.parse_or(in_condition)?;
            if matches!(self.peek().kind, TokenKind::RParen) {
                self.bump();
            } else {
                let t = self.peek().clone();
                self.error_at(&t, "unbalanced parentheses", vec!["')'".into()]);
                return Err(());
            }
            return Ok(inner);
        }
        self.parse_atom().map(Expr::Atom)
    }

    fn parse_atom(&mut self) -> Result<AtomicClause, ()> {
        let key_token = self.bump();
        let key = match &key_token.kind {
            TokenKind::Ident(name) => {
                if let Some(kw) = keyword_of(name) {
                    self.error_at(
                        &key_token,
                        format!("keyword '{kw}' cannot start a clause"),
                        vec!["key identifier".into()],
                    );
                    return Err(());
                }
                name.clone()
            }
            other => {
                let descr = other.describe();
                self.error_at(&key_token, format!("expected a key identifier, found {descr}"), vec![
                    "key identifier".into(),
                ]);
                return Err(());
            }
        };
        if !key.chars().next().map(|c| c.is_ascii_uppercase()).unwrap_or(false) {
            self.error_at(
                &key_token,
                format!("key {key:?} must be UpperCamelCase"),
                vec!["UpperCamelCase key".into()],
            );
        }

        let mut modulus = None;
        if matches!(self.peek().kind, TokenKind::Percent) {
            self.bump();
            let m_token = self.bump();
            match &m_token.kind {
                TokenKind::Number(n) if !n.is_zero() && !n.is_negative() => modulus = Some(n.clone()),
                other => {
                    let descr = other.describe();
                    self.error_at(&m_token, format!("modulus must be a positive number, found {descr}"), vec![
                        "positive number".into(),
                    ]);
                    return Err(());
                }
            }
        }

        let comparator = match &self.peek().kind {
            TokenKind::Eq => Comparator::Eq,
            TokenKind::Neq => Comparator::Neq,
            TokenKind::Gt => Comparator::Gt,
            TokenKind::Ge => Comparator::Ge,
            TokenKind::Lt => Comparator::Lt,
            TokenKind::Le => Comparator::Le,
            TokenKind::Ident(s) if keyword_of(s) == Some("in") => Comparator::In,
            other => {
                let t = self.peek().clone();
                let descr = other.describe();
                self.error_at(
                    &t,
                    format!("malformed clause: missing comparator after key {key:?}, found {descr}"),
                    vec![COMPARATOR_EXPECTATION.into()],
                );
                return Err(());
            }
        };
        self.bump();

        let value_token_pos = self.peek().clone();
        let value = self.parse_value()?;

        self.validate_atom(&key_token, &key, &modulus, comparator, &value, &value_token_pos);
        Ok(AtomicClause { key, modulus, comparator, value })
    }

    fn validate_atom(
        &mut self,
        key_token: &Token,
        key: &str,
        modulus: &Option<Decimal>,
        comparator: Comparator,
        value: &Value,
        value_token: &Token,
    ) {
        if modulus.is_some() {
            if !matches!(comparator, Comparator::Eq | Comparator::Neq) {
                self.error_at(
                    key_token,
                    format!("modulo clause on {key:?} must use '=' or '!='"),
                    vec!["'='".into(), "'!='".into()],
                );
            }
            if !value.is_numeric() {
                self.error_at(
                    value_token,
                    format!("modulo clause on {key:?} must compare against a number"),
                    vec!["number".into()],
                );
            }
            if let Some(sem) = self.symbols.semantic_type(&base_key(key)) {
                if !matches!(sem, SemanticType::Number) {
                    self.error_at(
                        key_token,
                        format!("modulo requires a numeric key, but {key:?} is declared {}", sem.type_name()),
                        vec![],
                    );
                }
            }
        }

        match comparator {
            Comparator::In => {
                if !matches!(value, Value::TimeRangeSet(_) | Value::StrList(_)) {
                    self.error_at(
                        value_token,
                        format!("'in' requires a time-range set or string list, found {}", value.kind_name()),
                        vec!["'[...]'".into()],
                    );
                }
            }
            _ => {
                if matches!(value, Value::StrList(_)) {
                    self.error_at(
                        value_token,
                        "string lists are only valid with the 'in' comparator",
                        vec![],
                    );
                }
            }
        }

        if classify_key(key, self.symbols).is_none() {
            let message = format!("unknown key {key:?}: not in the symbol library, classified Unknown");
            if self.strict_keys {
                self.diagnostics
                    .push(ParseDiagnostic::error(key_token.line, key_token.column, message));
            } else {
                self.diagnostics
                    .push(ParseDiagnostic::warning(key_token.line, key_token.column, message));
            }
        }
    }

    fn parse_value(&mut self) -> Result<Value, ()> {
        let token = self.bump();
        match token.kind.clone() {
            TokenKind::Number(n) => Ok(Value::Num(n)),
            TokenKind::Str(s) => Ok(quoted_to_value(s)),
            TokenKind::Time(start) => {
                if matches!(self.peek().kind, TokenKind::Dash) {
                    self.bump();
                    let end_token = self.bump();
                    match &end_token.kind {
                        TokenKind::Time(end) => match TimeRange::new(start, *end) {
                            Some(r) => Ok(Value::TimeRange(r)),
                            None => {
                                let end = *end;
                                self.error_at(
                                    &end_token,
                                    format!("time range start {start} must be strictly before end {end}"),
                                    vec![],
                                );
                                Err(())
                            }
                        },
                        other => {
                            let descr = other.describe();
                            self.error_at(&end_token, format!("expected range end time, found {descr}"), vec![
                                "time (HH:MM)".into(),
                            ]);
                            Err(())
                        }
                    }
                } else {
                    Ok(Value::Time(start))
                }
            }
            TokenKind::Ident(s) => match keyword_of(&s) {
                Some("true") => Ok(Value::Bool(true)),
                Some("false") => Ok(Value::Bool(false)),
                Some(kw) => {
                    self.error_at(
                        &token,
                        format!("malformed clause: missing value before keyword '{kw}'"),
                        vec!["value".into()],
                    );
                    Err(())
                }
                None => Ok(Value::Str(s)),
            },
            TokenKind::LBracket => self.parse_bracket_list(&token),
            other => {
                let descr = other.describe();
                self.error_at(&token, format!("malformed clause: expected a value, found {descr}"), vec![
                    "number".into(),
                    "string".into(),
                    "time".into(),
                    "boolean".into(),
                    "'['".into(),
                ]);
                Err(())
            }
        }
    }

    fn parse_bracket_list(&mut self, open: &Token) -> Result<Value, ()> {
        let mut ranges: Vec<TimeRange> = Vec::new();
        let mut strings: Vec<String> = Vec::new();
        loop {
            if matches!(self.peek().kind, TokenKind::RBracket) {
                self.bump();
                break;
            }
            if self.at_eof() {
                self.error_at(open, "unterminated '[' list", vec!["']'".into()]);
                return Err(());
            }
            let item = self.bump();
            match item.kind.clone() {
                TokenKind::Time(start) => {
                    if !matches!(self.peek().kind, TokenKind::Dash) {
                        self.error_at(&item, "expected a time range (start-end) inside '[...]'", vec![
                            "'-'".into(),
                        ]);
                        return Err(());
                    }
                    self.bump();
                    let end_token = self.bump();
                    let TokenKind::Time(end) = end_token.kind.clone() else {
                        let descr = end_token.kind.describe();
                        self.error_at(&end_token, format!("expected range end time, found {descr}"), vec![
                            "time (HH:MM)".into(),
                        ]);
                        return Err(());
                    };
                    match TimeRange::new(start, end) {
                        Some(r) => ranges.push(r),
                        None => {
                            self.error_at(
                                &end_token,
                                format!("time range start {start} must be strictly before end {end}"),
                                vec![],
                            );
                            return Err(());
                        }
                    }
                }
                TokenKind::Ident(s) if keyword_of(&s).is_none() => strings.push(s),
                TokenKind::Str(s) => strings.push(s),
                other => {
                    let descr = other.describe();
                    self.error_at(&item, format!("expected a time range or string inside '[...]', found {descr}"), vec![]);
                    return Err(());
                }
            }
            if matches!(self.peek().kind, TokenKind::Comma) {
                self.bump();
            }
        }
        match (ranges.is_empty(), strings.is_empty()) {
            (true, true) => {
                self.error_at(open, "empty '[...]' list: a set must contain at least one element", vec![]);
                Err(())
            }
            (false, false) => {
                self.error_at(open, "mixed '[...]' list: use either time ranges or strings, not both", vec![]);
                Err(())
            }
            (false, true) => match normalize_ranges(ranges) {
                Ok(sorted) => Ok(Value::TimeRangeSet(sorted)),
                Err((a, b)) => {
                    self.error_at(open, format!("overlapping time ranges {a} and {b}"), vec![]);
                    Err(())
                }
            },
            (true, false) => Ok(Value::StrList(strings)),
        }
    }
}

/// Quoted strings shaped like `HH:MM-HH:MM` read as time ranges, matching
/// the grammar's quoted time literals.
fn quoted_to_value(s: String) -> Value {
    if let Some((a, b)) = s.split_once('-') {
        if let (Ok(start), Ok(end)) = (a.trim().parse(), b.trim().parse()) {
            if let Some(r) = TimeRange::new(start, end) {
                return Value::TimeRange(r);
            }
        }
    }
    Value::Str(s)
}

fn decimal_to_rule_id(n: &Decimal) -> Option<u64> {
    if !n.is_integer() || n.is_negative() || n.is_zero() {
        return None;
    }
    n.to_string().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::builtin::finance_symbols;
    use crate::trl::has_errors;

    fn parse(source: &str) -> (RuleSet, Vec<ParseDiagnostic>) {
        parse_rules(source, &finance_symbols(), false, "test")
    }

    #[test]
    fn minimal_rule() {
        let (set, diags) = parse("rule 1\nif Quantity >= 1000 then Result = Success");
        assert!(!has_errors(&diags), "{diags:?}");
        assert_eq!(set.rules.len(), 1);
        let rule = &set.rules[0];
        assert_eq!(rule.id, 1);
        assert_eq!(
            rule.condition,
            Expr::Atom(AtomicClause::new("Quantity", Comparator::Ge, Value::Num("1000".parse().unwrap())))
        );
        assert_eq!(
            rule.outcome,
            Expr::Atom(AtomicClause::new("Result", Comparator::Eq, Value::Str("Success".into())))
        );
    }

    #[test]
    fn modulo_clause_with_companion_bound() {
        let (set, diags) = parse("rule 1\nif Quantity % 1000 = 0 and Quantity >= 100000\nthen Result = Success");
        assert!(!has_errors(&diags), "{diags:?}");
        let rule = &set.rules[0];
        let Expr::And(children) = &rule.condition else { panic!("expected and") };
        assert_eq!(children.len(), 2);
        let Expr::Atom(modulo) = &children[0] else { panic!() };
        assert_eq!(modulo.modulus, Some("1000".parse().unwrap()));
        assert_eq!(modulo.comparator, Comparator::Eq);
        let Expr::Atom(bound) = &children[1] else { panic!() };
        assert_eq!(bound.comparator, Comparator::Ge);
        assert!(bound.modulus.is_none());
    }

    #[test]
    fn ten_atom_condition_parses() {
        let source = "rule 1\n\
            if Actor = BothParties and Action = Agree and Constraint = ManualMethod and \
            Actor = Client and Time = RepoMaturityDate and Action = WishToContinue and \
            OperationPart = NextPeriodTrade and OperationTarget = SecuritiesCompany and \
            Action = Issue and OperationPart = InitialOrder\n\
            then Result = Success";
        let (set, diags) = parse(source);
        assert!(!has_errors(&diags), "{diags:?}");
        let rule = &set.rules[0];
        assert_eq!(rule.condition.atoms().len(), 10);
        assert_eq!(rule.outcome.atoms().len(), 1);
        // OperationTarget is not in the library: lenient mode warns.
        assert!(diags.iter().any(|d| d.message.contains("OperationTarget")));
    }

    #[test]
    fn strict_keys_rejects_unknown() {
        let source = "rule 1\nif OperationTarget = X then Result = Success";
        let (set, diags) = parse_rules(source, &finance_symbols(), true, "test");
        assert!(set.rules.is_empty());
        assert!(has_errors(&diags));
    }

    #[test]
    fn bad_rule_does_not_poison_neighbors() {
        let source = "rule 1\nif Quantity > then Result = Success\n\
                      rule 2\nif Quantity > 5 then Result = Success";
        let (set, diags) = parse(source);
        assert_eq!(set.rules.len(), 1);
        assert_eq!(set.rules[0].id, 2);
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("missing value")));
    }

    #[test]
    fn missing_comparator_is_diagnosed() {
        let (set, diags) = parse("rule 1\nif Quantity 1000 then Result = Success");
        assert!(set.rules.is_empty());
        let diag = diags.iter().find(|d| d.message.contains("missing comparator")).unwrap();
        assert!(diag.expected.iter().any(|e| e.contains("comparator")));
    }

    #[test]
    fn unbalanced_parens_diagnosed() {
        let (set, diags) = parse("rule 1\nif (Quantity > 5 and Price > 1 then Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("unbalanced parentheses")));
    }

    #[test]
    fn duplicate_ids_drop_the_second() {
        let source = "rule 7\nif Quantity > 5 then Result = Success\n\
                      rule 7\nif Price > 5 then Result = Failure";
        let (set, diags) = parse(source);
        assert_eq!(set.rules.len(), 1);
        assert!(diags.iter().any(|d| d.message.contains("duplicate rule id 7")));
    }

    #[test]
    fn empty_outcome_is_diagnosed() {
        let (set, diags) = parse("rule 1\nif Quantity > 5 then\nrule 2\nif Price > 1 then Result = Success");
        assert_eq!(set.rules.len(), 1);
        assert!(diags.iter().any(|d| d.message.contains("empty outcome")));
    }

    #[test]
    fn outcome_rejects_or_and_not() {
        let (set, diags) = parse("rule 1\nif Quantity > 5 then Result = Success or Result = Failure");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("CompoundOutcome")));
        let (set, diags) = parse("rule 2\nif Quantity > 5 then not Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("CompoundOutcome")));
    }

    #[test]
    fn outcome_allows_and_composition() {
        let (set, diags) = parse("rule 1\nif Quantity > 5 then Result = Success and ResultStatus = TransactionSuccess");
        assert!(!has_errors(&diags));
        assert_eq!(set.rules[0].outcome.atoms().len(), 2);
    }

    #[test]
    fn time_range_set_values() {
        let (set, diags) = parse("rule 1\nif Time in [13:00-14:00, 10:00-12:00] then Result = Success");
        assert!(!has_errors(&diags), "{diags:?}");
        let atoms = set.rules[0].condition.atoms();
        let Value::TimeRangeSet(ranges) = &atoms[0].value else { panic!() };
        assert_eq!(ranges.len(), 2);
        // Normalized to sorted order.
        assert_eq!(ranges[0].start.to_string(), "10:00");
    }

    #[test]
    fn in_requires_set_values() {
        let (set, diags) = parse("rule 1\nif Time in 10:00 then Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("'in' requires")));
    }

    #[test]
    fn overlapping_ranges_rejected() {
        let (set, diags) = parse("rule 1\nif Time in [10:00-12:00, 11:00-13:00] then Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("overlapping")));
    }

    #[test]
    fn modulo_requires_numeric_key_and_eq() {
        let (set, diags) = parse("rule 1\nif Actor % 2 = 0 then Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("numeric key")));
        let (set, diags) = parse("rule 1\nif Quantity % 2 > 0 then Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("'=' or '!='")));
    }

    #[test]
    fn lowercase_key_rejected() {
        let (set, diags) = parse("rule 1\nif quantity > 5 then Result = Success");
        assert!(set.rules.is_empty());
        assert!(diags.iter().any(|d| d.message.contains("UpperCamelCase")));
    }

    #[test]
    fn uppercase_keywords_accepted() {
        let (set, diags) = parse("RULE 1\nIF Quantity >= 1000 AND Price > 0 THEN Result = Success");
        assert!(!has_errors(&diags), "{diags:?}");
        assert_eq!(set.rules.len(), 1);
        assert_eq!(set.rules[0].condition.atoms().len(), 2);
    }

    #[test]
    fn lexer_error_inside_rule_drops_it() {
        let source = "rule 1\nif Time = 25:61 then Result = Success\nrule 2\nif Quantity > 1 then Result = Success";
        let (set, diags) = parse(source);
        assert_eq!(set.rules.len(), 1);
        assert_eq!(set.rules[0].id, 2);
        assert!(has_errors(&diags));
    }

    #[test]
    fn boolean_and_quoted_values() {
        let (set, diags) =
            parse("rule 1\nif Constraint = true and Event = \"order received\" then Result = Success");
        assert!(!has_errors(&diags), "{diags:?}");
        let atoms = set.rules[0].condition.atoms();
        assert_eq!(atoms[0].value, Value::Bool(true));
        assert_eq!(atoms[1].value, Value::Str("order received".into()));
    }

    #[test]
    fn never_panics_on_arbitrary_input() {
        for source in ["", "rule", "rule rule", "if then", "rule 1 if x", "rule 0\nif A > 1 then B = 2", "\u{2028}rule 1"] {
            let (_, _) = parse(source);
        }
    }
}
