//! Concrete syntax for formulas.
//!
//! ```text
//! formula := binder | impl
//! binder  := ("mu" | "nu") NAME "." formula        -- scope extends maximally right
//! impl    := or [("->" | "<->") formula]           -- right associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := ("!" | "<>" | "[]") unary | binder | "(" formula ")"
//!          | "true" | "false" | NAME
//! NAME    := [a-z][a-zA-Z0-9_]*
//! ```
//!
//! `!φ`, `->` and `<->` are accepted on input and eliminated by the negation
//! operator, so parsed formulas are always in negation normal form. The
//! printer only emits ASCII; `◇ □ μ ν ¬ ∧ ∨ → ↔ ⊤ ⊥` are accepted as input
//! aliases.

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;

/// Byte offsets into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Mu,
    Nu,
    True,
    False,
    Not,
    Dia,
    Box,
    And,
    Or,
    Implies,
    Iff,
    Dot,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Mu => "`mu`".into(),
            Tok::Nu => "`nu`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::Dia => "`<>`".into(),
            Tok::Box => "`[]`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_lowercase() {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[start..end];
            let tok = match word {
                "mu" => Tok::Mu,
                "nu" => Tok::Nu,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Name(word.to_string()),
            };
            out.push((tok, SourceSpan::new(start, end)));
            continue;
        }
        let rest = &text[start..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("<>") {
            (Tok::Dia, 2)
        } else if rest.starts_with("[]") {
            (Tok::Box, 2)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else {
            let tok = match c {
                '!' | '¬' | '~' => Tok::Not,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '◇' | '◊' => Tok::Dia,
                '□' => Tok::Box,
                'μ' => Tok::Mu,
                'ν' => Tok::Nu,
                '⊤' => Tok::True,
                '⊥' => Tok::False,
                '→' => Tok::Implies,
                '↔' => Tok::Iff,
                _ => {
                    return Err(ParseError {
                        span: SourceSpan::new(start, start + c.len_utf8()),
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (tok, c.len_utf8())
        };
        for _ in 0..rest[..len].chars().count() {
            chars.next();
        }
        out.push((tok, SourceSpan::new(start, start + len)));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    end: usize,
    /// Names bound by enclosing binders, innermost last.
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span_here(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|(_, s)| *s)
            .unwrap_or(SourceSpan::new(self.end, self.end))
    }

    fn prev_end(&self) -> usize {
        self.pos
            .checked_sub(1)
            .and_then(|p| self.toks.get(p))
            .map(|(_, s)| s.end)
            .unwrap_or(0)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            span: self.span_here(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, s)) if *t == tok => {
                let s = *s;
                self.pos += 1;
                Ok(s)
            }
            Some((t, _)) => self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                t.describe()
            )),
            None => self.error(format!("expected {}, found end of input", tok.describe())),
        }
    }

    /// Negating a formula that mentions an enclosing fixpoint variable would
    /// put that variable under a negation.
    fn negated(&self, phi: Formula, span: SourceSpan) -> Result<Formula, ParseError> {
        let free = phi.free_vars();
        if let Some(x) = self.bound.iter().rev().find(|x| free.contains(*x)) {
            return Err(ParseError {
                span,
                message: format!("fixpoint variable `{x}` occurs under a negation"),
            });
        }
        Ok(phi.negate())
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let start = self.span_here();
        let left = self.disjunction()?;
        match self.peek() {
            Some(Tok::Implies) => {
                self.pos += 1;
                let span = start.join(SourceSpan::new(start.start, self.prev_end()));
                let left = self.negated(left, span)?;
                let right = self.formula()?;
                Ok(Formula::or(left, right))
            }
            Some(Tok::Iff) => {
                self.pos += 1;
                let span = SourceSpan::new(start.start, self.prev_end());
                let neg_left = self.negated(left.clone(), span)?;
                let right_start = self.span_here();
                let right = self.formula()?;
                let neg_right = self.negated(
                    right.clone(),
                    SourceSpan::new(right_start.start, self.prev_end()),
                )?;
                Ok(Formula::and(
                    Formula::or(neg_left, right),
                    Formula::or(neg_right, left),
                ))
            }
            _ => Ok(left),
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some((tok, span)) = self.toks.get(self.pos).cloned() else {
            return self.error("expected a formula, found end of input");
        };
        match tok {
            Tok::Not => {
                self.pos += 1;
                let body = self.unary()?;
                self.negated(body, SourceSpan::new(span.start, self.prev_end()))
            }
            Tok::Dia => {
                self.pos += 1;
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::Box => {
                self.pos += 1;
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Mu | Tok::Nu => {
                self.pos += 1;
                let name = match self.toks.get(self.pos) {
                    Some((Tok::Name(n), _)) => n.clone(),
                    _ => return self.error("expected a variable name after binder"),
                };
                self.pos += 1;
                self.expect(Tok::Dot)?;
                self.bound.push(name.clone());
                let body = self.formula();
                self.bound.pop();
                let body = body?;
                Ok(if tok == Tok::Mu {
                    Formula::mu(name, body)
                } else {
                    Formula::nu(name, body)
                })
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::True => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Tok::False => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Tok::Name(n) => {
                self.pos += 1;
                Ok(Formula::Atom(n))
            }
            other => self.error(format!("expected a formula, found {}", other.describe())),
        }
    }
}

/// Parse formula text into negation normal form.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        bound: Vec::new(),
    };
    let phi = parser.formula()?;
    if parser.pos < parser.toks.len() {
        let found = parser.toks[parser.pos].0.describe();
        return parser.error(format!("unexpected {found} after formula"));
    }
    Ok(phi)
}

/// Parse a file of formulas: one per non-empty line, `#` starts a comment.
pub fn parse_formula_list(text: &str) -> Result<Vec<Formula>, (usize, ParseError)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(lineno, line)| parse_formula(line).map_err(|e| (lineno, e)))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Or,
    And,
    Unary,
}

/// Print a formula with minimal parentheses.
pub fn print_formula(phi: &Formula) -> String {
    let mut out = String::new();
    write_formula(phi, Prec::Or, true, &mut out);
    out
}

/// `rightmost`: nothing follows this formula at the current nesting level,
/// so a binder may extend to the end without parentheses.
fn write_formula(phi: &Formula, ctx: Prec, rightmost: bool, out: &mut String) {
    let own = match phi {
        Formula::Or(..) => Prec::Or,
        Formula::And(..) => Prec::And,
        _ => Prec::Unary,
    };
    let binder = phi.is_fixpoint();
    let parens = own < ctx || (binder && !rightmost);
    if parens {
        out.push('(');
    }
    let tail = parens || rightmost;
    match phi {
        Formula::Atom(n) => out.push_str(n),
        Formula::NegAtom(n) => {
            out.push('!');
            out.push_str(n);
        }
        Formula::Top => out.push_str("true"),
        Formula::Bottom => out.push_str("false"),
        Formula::Or(a, b) => {
            write_formula(a, Prec::Or, false, out);
            out.push_str(" | ");
            write_formula(b, Prec::And, tail, out);
        }
        Formula::And(a, b) => {
            write_formula(a, Prec::And, false, out);
            out.push_str(" & ");
            write_formula(b, Prec::Unary, tail, out);
        }
        Formula::Diamond(a) => {
            out.push_str("<>");
            write_formula(a, Prec::Unary, tail, out);
        }
        Formula::Box(a) => {
            out.push_str("[]");
            write_formula(a, Prec::Unary, tail, out);
        }
        Formula::Mu(x, body) | Formula::Nu(x, body) => {
            let kw = phi.as_fixpoint().unwrap().0.keyword();
            out.push_str(kw);
            out.push(' ');
            out.push_str(x);
            out.push_str(". ");
            write_formula(body, Prec::Or, true, out);
        }
    }
    if parens {
        out.push(')');
    }
}
