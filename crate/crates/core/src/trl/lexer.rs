//! Total lexer for the rule language: never fails, emits diagnostics for
//! what it cannot read and keeps going.

use crate::decimal::Decimal;
use crate::value::TimeOfDay;

use super::{ParseDiagnostic, Severity};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(Decimal),
    Time(TimeOfDay),
    Str(String),
    Percent,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dash,
    Eq,
    Neq,
    Gt,
    Ge,
    Lt,
    Le,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier {s:?}"),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Time(t) => format!("time {t}"),
            TokenKind::Str(s) => format!("string {s:?}"),
            TokenKind::Percent => "'%'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Dash => "'-'".into(),
            TokenKind::Eq => "'='".into(),
            TokenKind::Neq => "'!='".into(),
            TokenKind::Gt => "'>'".into(),
            TokenKind::Ge => "'>='".into(),
            TokenKind::Lt => "'<'".into(),
            TokenKind::Le => "'<='".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

/// True when the identifier is one of the language keywords, which are
/// case-insensitive everywhere.
pub fn keyword_of(ident: &str) -> Option<&'static str> {
    const KEYWORDS: [&str; 9] = ["rule", "if", "then", "and", "or", "not", "in", "true", "false"];
    let lower = ident.to_ascii_lowercase();
    KEYWORDS.iter().find(|k| **k == lower).copied()
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    source: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(source: &'a str) -> Self {
        Cursor { chars: source.chars().collect(), pos: 0, line: 1, column: 1, source }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Lex the whole source. Unknown characters, unterminated strings and
/// out-of-range times become error diagnostics; the token stream always ends
/// with `Eof`.
pub fn lex(source: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut cursor = Cursor::new(source);
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();

    while let Some(c) = cursor.peek() {
        let (line, column) = (cursor.line, cursor.column);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                cursor.bump();
            }
            '#' => {
                while let Some(c) = cursor.peek() {
                    if c == '\n' {
                        break;
                    }
                    cursor.bump();
                }
            }
            '(' => push_simple(&mut cursor, &mut tokens, TokenKind::LParen, line, column),
            ')' => push_simple(&mut cursor, &mut tokens, TokenKind::RParen, line, column),
            '[' => push_simple(&mut cursor, &mut tokens, TokenKind::LBracket, line, column),
            ']' => push_simple(&mut cursor, &mut tokens, TokenKind::RBracket, line, column),
            ',' => push_simple(&mut cursor, &mut tokens, TokenKind::Comma, line, column),
            '-' => push_simple(&mut cursor, &mut tokens, TokenKind::Dash, line, column),
            '%' => push_simple(&mut cursor, &mut tokens, TokenKind::Percent, line, column),
            '=' => {
                cursor.bump();
                if cursor.peek() == Some('=') {
                    // Accept `==` as `=`; model output drifts here.
                    cursor.bump();
                }
                tokens.push(Token { kind: TokenKind::Eq, line, column });
            }
            '!' => {
                cursor.bump();
                if cursor.peek() == Some('=') {
                    cursor.bump();
                    tokens.push(Token { kind: TokenKind::Neq, line, column });
                } else {
                    diagnostics.push(
                        ParseDiagnostic::error(line, column, "stray '!', did you mean '!='?")
                            .expecting(vec!["'!='".into()]),
                    );
                }
            }
            '>' => {
                cursor.bump();
                if cursor.peek() == Some('=') {
                    cursor.bump();
                    tokens.push(Token { kind: TokenKind::Ge, line, column });
                } else {
                    tokens.push(Token { kind: TokenKind::Gt, line, column });
                }
            }
            '<' => {
                cursor.bump();
                if cursor.peek() == Some('=') {
                    cursor.bump();
                    tokens.push(Token { kind: TokenKind::Le, line, column });
                } else {
                    tokens.push(Token { kind: TokenKind::Lt, line, column });
                }
            }
            '"' => {
                cursor.bump();
                let mut text = String::new();
                let mut terminated = false;
                while let Some(c) = cursor.peek() {
                    if c == '"' {
                        cursor.bump();
                        terminated = true;
                        break;
                    }
                    if c == '\n' {
                        break;
                    }
                    text.push(c);
                    cursor.bump();
                }
                if !terminated {
                    diagnostics.push(
                        ParseDiagnostic::error(line, column, "unterminated string literal")
                            .expecting(vec!["closing '\"'".into()]),
                    );
                }
                tokens.push(classify_quoted(text, line, column));
            }
            c if c.is_ascii_digit() => {
                lex_number_or_time(&mut cursor, &mut tokens, &mut diagnostics, line, column);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(c) = cursor.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        cursor.bump();
                    } else {
                        break;
                    }
                }
                tokens.push(Token { kind: TokenKind::Ident(ident), line, column });
            }
            other => {
                cursor.bump();
                diagnostics.push(ParseDiagnostic {
                    line,
                    column,
                    message: format!("unexpected character {other:?}"),
                    expected: Vec::new(),
                    severity: Severity::Error,
                });
            }
        }
    }
    let _ = cursor.source;
    tokens.push(Token { kind: TokenKind::Eof, line: cursor.line, column: cursor.column });
    (tokens, diagnostics)
}

fn push_simple(cursor: &mut Cursor, tokens: &mut Vec<Token>, kind: TokenKind, line: usize, column: usize) {
    cursor.bump();
    tokens.push(Token { kind, line, column });
}

/// Quoted text that reads as a time literal becomes a time token, matching
/// the grammar's quoted `TimeLiteral` form.
fn classify_quoted(text: String, line: usize, column: usize) -> Token {
    if looks_like_time(&text) {
        if let Ok(t) = text.parse::<TimeOfDay>() {
            return Token { kind: TokenKind::Time(t), line, column };
        }
    }
    Token { kind: TokenKind::Str(text), line, column }
}

fn looks_like_time(s: &str) -> bool {
    let parts: Vec<&str> = s.split(':').collect();
    (parts.len() == 2 || parts.len() == 3)
        && parts
            .iter()
            .all(|p| !p.is_empty() && p.len() <= 2 && p.chars().all(|c| c.is_ascii_digit()))
}

fn lex_number_or_time(
    cursor: &mut Cursor,
    tokens: &mut Vec<Token>,
    diagnostics: &mut Vec<ParseDiagnostic>,
    line: usize,
    column: usize,
) {
    // Look ahead for a time shape: 1-2 digits, ':', 2 digits [, ':' 2 digits].
    let mut probe = String::new();
    let mut offset = 0;
    while let Some(c) = cursor.peek_at(offset) {
        if c.is_ascii_digit() || c == ':' {
            probe.push(c);
            offset += 1;
        } else {
            break;
        }
    }
    if probe.contains(':') {
        if looks_like_time(&probe) {
            match probe.parse::<TimeOfDay>() {
                Ok(t) => {
                    for _ in 0..offset {
                        cursor.bump();
                    }
                    tokens.push(Token { kind: TokenKind::Time(t), line, column });
                    return;
                }
                Err(e) => {
                    for _ in 0..offset {
                        cursor.bump();
                    }
                    diagnostics.push(ParseDiagnostic::error(line, column, e.to_string()));
                    tokens.push(Token { kind: TokenKind::Str(probe), line, column });
                    return;
                }
            }
        }
        diagnostics.push(ParseDiagnostic::error(
            line,
            column,
            format!("malformed time literal {probe:?}, expected HH:MM or HH:MM:SS"),
        ));
        for _ in 0..offset {
            cursor.bump();
        }
        tokens.push(Token { kind: TokenKind::Str(probe), line, column });
        return;
    }

    let mut text = String::new();
    let mut seen_point = false;
    while let Some(c) = cursor.peek() {
        if c.is_ascii_digit() {
            text.push(c);
            cursor.bump();
        } else if c == '.' && !seen_point && cursor.peek_at(1).map(|n| n.is_ascii_digit()).unwrap_or(false) {
            seen_point = true;
            text.push(c);
            cursor.bump();
        } else {
            break;
        }
    }
    match text.parse::<Decimal>() {
        Ok(n) => tokens.push(Token { kind: TokenKind::Number(n), line, column }),
        Err(e) => {
            diagnostics.push(ParseDiagnostic::error(line, column, e.to_string()));
            tokens.push(Token { kind: TokenKind::Str(text), line, column });
        }
    }
}
