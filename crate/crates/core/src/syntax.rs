//! Concrete text syntax for formulas.
//!
//! ```text
//! variable   x1, x2, ...
//! atoms      R(x1,x2)   P()   x1=x2   true   false
//! connectives  !  &  |  ->  <->     (tightest to loosest; -> is right-assoc)
//! binders    E x3. φ    A x3. φ    E2 P/1. φ    A2 P/1. φ
//! ```
//!
//! A binder's scope extends as far right as possible. [`print`] emits the
//! fully parenthesized canonical form, which [`parse`] reads back to the same
//! AST.

use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

const RESERVED: [&str; 6] = ["E", "A", "E2", "A2", "true", "false"];

/// True if `name` can be used as a relation symbol in the text syntax.
pub fn is_valid_relation_name(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !RESERVED.contains(&name)
        && parse_var_name(name).is_none()
}

fn parse_var_name(s: &str) -> Option<u32> {
    let digits = s.strip_prefix('x')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    LParen,
    RParen,
    Comma,
    Dot,
    EqSign,
    Slash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DArrow => f.write_str("`<->`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::EqSign => f.write_str("`=`"),
            Tok::Slash => f.write_str("`/`"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, m: String| ParseError {
        column: i + 1,
        message: m,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::EqSign,
            '/' => Tok::Slash,
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 1;
                    Tok::Arrow
                } else {
                    return Err(err(i, "expected `->`".into()));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    i += 2;
                    Tok::DArrow
                } else {
                    return Err(err(i, "expected `<->`".into()));
                }
            }
            c if c.is_ascii_digit() => {
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..=i].iter().collect();
                Tok::Num(
                    s.parse()
                        .map_err(|_| err(start, format!("number {s} out of range")))?,
                )
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_alphanumeric()
                        || chars[i + 1] == '_'
                        || chars[i + 1] == '\'')
                {
                    i += 1;
                }
                Tok::Ident(chars[start..=i].iter().collect())
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| c + 1)
            .unwrap_or(self.end_col)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.error(format!("expected {t}, found {found}")),
                None => self.error(format!("expected {t}, found end of input")),
            }
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::DArrow) {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        match self.peek() {
            Some(Tok::Ident(s)) if s == "E" || s == "A" => {
                let existential = s == "E";
                self.pos += 1;
                let v = self.var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if existential {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                })
            }
            Some(Tok::Ident(s)) if s == "E2" || s == "A2" => {
                let existential = s == "E2";
                self.pos += 1;
                let name = self.relation_name()?;
                self.expect(Tok::Slash)?;
                let arity = match self.peek() {
                    Some(Tok::Num(n)) => *n,
                    _ => return self.error("expected an arity after `/`"),
                };
                self.pos += 1;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if existential {
                    Formula::exists_so(name, arity, body)
                } else {
                    Formula::forall_so(name, arity, body)
                })
            }
            _ => self.primary(),
        }
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => match parse_var_name(s) {
                Some(i) if i >= 1 => {
                    self.pos += 1;
                    Ok(Var::new(i))
                }
                Some(_) => self.error("variable indices start at x1"),
                None => self.error(format!("expected a variable, found `{s}`")),
            },
            Some(t) => self.error(format!("expected a variable, found {t}")),
            None => self.error("expected a variable, found end of input"),
        }
    }

    fn relation_name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if is_valid_relation_name(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => self.error(format!("expected a relation name, found {t}")),
            None => self.error("expected a relation name, found end of input"),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Some(Tok::Ident(s)) if parse_var_name(&s).is_some() => {
                let a = self.var()?;
                self.expect(Tok::EqSign)?;
                let b = self.var()?;
                Ok(Formula::Eq(a, b))
            }
            Some(Tok::Ident(_)) => {
                let name = self.relation_name()?;
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.var()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(Formula::Rel(name, args))
            }
            Some(t) => self.error(format!("unexpected {t}")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses one formula; trailing input is an error.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: src.chars().count() + 1,
    };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return p.error(format!("unexpected {t} after complete formula"));
    }
    Ok(f)
}

/// Canonical fully parenthesized rendering.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    use std::fmt::Write;
    use Formula::*;
    match f {
        Top => out.push_str("true"),
        Bottom => out.push_str("false"),
        Rel(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, v) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push(')');
        }
        Eq(a, b) => {
            let _ = write!(out, "{a}={b}");
        }
        Not(a) => {
            out.push_str("(!");
            write_formula(a, out);
            out.push(')');
        }
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
            let op = match f {
                And(..) => " & ",
                Or(..) => " | ",
                Implies(..) => " -> ",
                _ => " <-> ",
            };
            out.push('(');
            write_formula(a, out);
            out.push_str(op);
            write_formula(b, out);
            out.push(')');
        }
        Exists(v, a) | Forall(v, a) => {
            let q = if matches!(f, Exists(..)) { "E" } else { "A" };
            let _ = write!(out, "({q} {v}. ");
            write_formula(a, out);
            out.push(')');
        }
        ExistsSo(n, k, a) | ForallSo(n, k, a) => {
            let q = if matches!(f, ExistsSo(..)) { "E2" } else { "A2" };
            let _ = write!(out, "({q} {n}/{k}. ");
            write_formula(a, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
