//! Text grammar for expressions and symbol declarations, plus the printer.
//!
//! Precedence from loosest to tightest: `+`/`-`, `*` and juxtaposition, unary
//! minus, `^` with an integer literal exponent, atoms. The printer emits text
//! that parses back to a structurally equal tree.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::error::ExprError;
use crate::expr::{Expr, Func, Node};
use crate::scalar::Scalar;
use crate::symbol::SymbolRegistry;

/// Byte offsets `start..end` into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
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

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected {}, found {found}", expected.join(" or "))]
    Syntax { expected: Vec<String>, found: String },
    #[error("variable z{index} is outside z1..z{m}")]
    OutOfRangeVariable { index: usize, m: usize },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("inadmissible argument: {0}")]
    InadmissibleArgument(String),
    #[error("division is only allowed between two integer literals")]
    Division,
    #[error("invalid exponent: {0}")]
    Exponent(String),
    #[error("expected a constant, found an expression in variables or symbols")]
    NotConstant,
    #[error("{0}")]
    Declaration(String),
}

/// A parse failure with the span of the offending text.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{kind} at {span}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

impl ParseError {
    fn new(kind: ParseErrorKind, span: SourceSpan) -> Self {
        ParseError { kind, span }
    }

    /// Multi-line diagnostic with a caret under the span.
    pub fn render(&self, source: &str) -> String {
        let start = self.span.start.min(source.len());
        let line_start = source[..start].rfind('\n').map_or(0, |p| p + 1);
        let line_end = source[start..].find('\n').map_or(source.len(), |p| start + p);
        let line = &source[line_start..line_end];
        let col = source[line_start..start].chars().count();
        let width = source[start..self.span.end.clamp(start, line_end)].chars().count().max(1);
        format!("error: {}\n  | {}\n  | {}{}", self.kind, line, " ".repeat(col), "^".repeat(width))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("`{n}`"),
            Tok::Decimal(x) => format!("`{x}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, SourceSpan::new(i, i + 1)));
            i += 1;
            continue;
        }
        if b.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let x: f64 = text[start..i].parse().expect("digits with one dot");
                out.push((Tok::Decimal(x), SourceSpan::new(start, i)));
            } else {
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((Tok::Int(n), SourceSpan::new(start, i)));
            }
            continue;
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), SourceSpan::new(start, i)));
            continue;
        }
        let ch = text[i..].chars().next().expect("in bounds");
        let end = i + ch.len_utf8();
        return Err(ParseError::new(
            ParseErrorKind::Syntax {
                expected: vec!["an expression".into()],
                found: format!("`{ch}`"),
            },
            SourceSpan::new(start, end),
        ));
    }
    out.push((Tok::Eof, SourceSpan::new(text.len(), text.len())));
    Ok(out)
}

/// Names that cannot be used for opaque symbols.
pub fn is_reserved_name(name: &str) -> bool {
    matches!(name, "i" | "pi" | "sin" | "cos" | "exp" | "symbol" | "depends" | "shift" | "adds")
        || variable_index(name).is_some()
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('z')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct Parser<'a> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    m: usize,
    symbols: Option<&'a SymbolRegistry>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, m: usize, symbols: Option<&'a SymbolRegistry>) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            m,
            symbols,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.peek().describe(),
            },
            self.span(),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&[&tok.describe()]))
        }
    }

    fn expect_ident(&mut self, word: &str) -> Result<SourceSpan, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == word => Ok(self.bump().1),
            _ => Err(self.unexpected(&[&format!("`{word}`")])),
        }
    }

    fn at_end(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["`+`", "`-`", "`*`", "end of input"]))
        }
    }

    fn sum(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (first, mut span) = self.term()?;
        let mut terms = vec![first];
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let (t, s) = self.term()?;
            span = span.join(s);
            terms.push(if neg { Expr::neg(t) } else { t });
        }
        Ok((Expr::add(terms), span))
    }

    fn starts_implicit_factor(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::LParen)
    }

    fn term(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (first, mut span) = self.unary()?;
        let mut factors = vec![first];
        let mut last_was_literal = self.last_factor_is_literal();
        loop {
            if *self.peek() == Tok::Star {
                self.bump();
            } else if *self.peek() == Tok::Slash {
                return Err(ParseError::new(ParseErrorKind::Division, self.span()));
            } else if !(last_was_literal && self.starts_implicit_factor()) {
                break;
            }
            let (f, s) = self.unary()?;
            span = span.join(s);
            factors.push(f);
            last_was_literal = self.last_factor_is_literal();
        }
        Ok((Expr::mul(factors), span))
    }

    /// Whether the token just consumed ends a bare numeric literal, which is
    /// the only place juxtaposition may start.
    fn last_factor_is_literal(&self) -> bool {
        matches!(self.toks[self.pos.saturating_sub(1)].0, Tok::Int(_) | Tok::Decimal(_))
    }

    fn unary(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        if *self.peek() == Tok::Minus {
            let start = self.bump().1;
            let (e, s) = self.unary()?;
            return Ok((Expr::neg(e), start.join(s)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (mut base, mut span) = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let (tok, s) = self.bump();
            let n = match tok {
                Tok::Int(n) => u32::try_from(&n).map_err(|_| {
                    ParseError::new(ParseErrorKind::Exponent(format!("{n} is too large")), s)
                })?,
                Tok::Minus => {
                    return Err(ParseError::new(
                        ParseErrorKind::Exponent("exponents must be non-negative".into()),
                        s,
                    ))
                }
                other => {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax {
                            expected: vec!["an integer exponent".into()],
                            found: other.describe(),
                        },
                        s,
                    ))
                }
            };
            span = span.join(s);
            base = Expr::pow(base, n);
        }
        Ok((base, span))
    }

    fn atom(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Int(n) => {
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let (den_tok, den_span) = self.bump();
                    let Tok::Int(d) = den_tok else {
                        return Err(ParseError::new(ParseErrorKind::Division, span.join(den_span)));
                    };
                    if d == BigInt::from(0) {
                        return Err(ParseError::new(
                            ParseErrorKind::Syntax {
                                expected: vec!["a non-zero denominator".into()],
                                found: "`0`".into(),
                            },
                            den_span,
                        ));
                    }
                    let r = BigRational::new(n, d);
                    return Ok((Expr::constant(Scalar::rational(r)), span.join(den_span)));
                }
                Ok((Expr::constant(Scalar::from_bigint(n)), span))
            }
            Tok::Decimal(x) => Ok((Expr::constant(Scalar::from_f64(x)), span)),
            Tok::LParen => {
                let (e, _) = self.sum()?;
                let close = self.expect(Tok::RParen)?;
                Ok((e, span.join(close)))
            }
            Tok::Ident(name) => self.identifier(name, span),
            other => Err(ParseError::new(
                ParseErrorKind::Syntax {
                    expected: ["a number", "a variable", "a symbol", "`(`", "`sin`", "`cos`", "`exp`"]
                        .map(String::from)
                        .to_vec(),
                    found: other.describe(),
                },
                span,
            )),
        }
    }

    fn identifier(&mut self, name: String, span: SourceSpan) -> Result<(Expr, SourceSpan), ParseError> {
        let func = match name.as_str() {
            "i" => return Ok((Expr::constant(Scalar::i()), span)),
            "pi" => return Ok((Expr::constant(Scalar::pi()), span)),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(f) = func {
            self.expect(Tok::LParen)?;
            let (arg, _) = self.sum()?;
            let close = self.expect(Tok::RParen)?;
            let full = span.join(close);
            return match Expr::apply(f, arg) {
                Ok(e) => Ok((e, full)),
                Err(ExprError::InadmissibleArgument { reason, .. }) => {
                    Err(ParseError::new(ParseErrorKind::InadmissibleArgument(reason), full))
                }
                Err(other) => Err(ParseError::new(ParseErrorKind::InadmissibleArgument(other.to_string()), full)),
            };
        }
        if let Some(index) = variable_index(&name) {
            if index == 0 || index > self.m {
                return Err(ParseError::new(ParseErrorKind::OutOfRangeVariable { index, m: self.m }, span));
            }
            return Ok((Expr::var(index), span));
        }
        match self.symbols.and_then(|r| r.get(&name)) {
            Some(sym) => {
                if let Some(&j) = sym.depends_on().iter().find(|&&j| j > self.m) {
                    return Err(ParseError::new(ParseErrorKind::OutOfRangeVariable { index: j, m: self.m }, span));
                }
                Ok((Expr::symbol(sym.clone()), span))
            }
            None => Err(ParseError::new(ParseErrorKind::UnknownIdentifier(name), span)),
        }
    }
}

/// Parses an expression over `z1..zm` with the declared symbols.
pub fn parse_expr(text: &str, m: usize, symbols: &SymbolRegistry) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text, m, Some(symbols))?;
    let (e, _) = p.sum()?;
    p.at_end()?;
    Ok(e)
}

/// Parses a constant expression such as `2pi`, `-1/2*pi*i` or `0`.
pub fn parse_scalar(text: &str) -> Result<Scalar, ParseError> {
    let mut p = Parser::new(text, 0, None)?;
    let (e, span) = p.sum()?;
    p.at_end()?;
    constant_of(&e, span)
}

fn constant_of(e: &Expr, span: SourceSpan) -> Result<Scalar, ParseError> {
    e.as_const()
        .cloned()
        .ok_or_else(|| ParseError::new(ParseErrorKind::NotConstant, span))
}

/// One parsed declaration line.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDecl {
    pub name: String,
    pub depends_on: Vec<usize>,
    pub rule: Option<(Vec<Scalar>, Scalar)>,
}

/// Parses `symbol g1 depends [z2,z3] shift (0,2pi,2pi) adds 0`; the
/// `shift ... adds ...` part is optional.
pub fn parse_symbol_decl(line: &str) -> Result<SymbolDecl, ParseError> {
    let mut p = Parser::new(line, 0, None)?;
    p.expect_ident("symbol")?;
    let (tok, span) = p.bump();
    let name = match tok {
        Tok::Ident(n) if !is_reserved_name(&n) => n,
        Tok::Ident(n) => {
            return Err(ParseError::new(
                ParseErrorKind::Declaration(format!("`{n}` is reserved and cannot name a symbol")),
                span,
            ))
        }
        other => {
            return Err(ParseError::new(
                ParseErrorKind::Syntax {
                    expected: vec!["a symbol name".into()],
                    found: other.describe(),
                },
                span,
            ))
        }
    };
    p.expect_ident("depends")?;
    p.expect(Tok::LBracket)?;
    let mut depends_on = Vec::new();
    if *p.peek() != Tok::RBracket {
        loop {
            let (tok, span) = p.bump();
            let index = match &tok {
                Tok::Ident(v) => variable_index(v),
                _ => None,
            };
            match index {
                Some(j) if j >= 2 => depends_on.push(j),
                Some(_) => {
                    return Err(ParseError::new(
                        ParseErrorKind::Declaration("opaque symbols may not depend on z1".into()),
                        span,
                    ))
                }
                None => {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax {
                            expected: vec!["a variable z2, z3, ...".into()],
                            found: tok.describe(),
                        },
                        span,
                    ))
                }
            }
            if *p.peek() == Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect(Tok::RBracket)?;
    let mut rule = None;
    if *p.peek() != Tok::Eof {
        p.expect_ident("shift")?;
        p.expect(Tok::LParen)?;
        let mut shift = Vec::new();
        loop {
            let (e, s) = p.sum()?;
            shift.push(constant_of(&e, s)?);
            if *p.peek() == Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
        p.expect(Tok::RParen)?;
        p.expect_ident("adds")?;
        let (e, s) = p.sum()?;
        rule = Some((shift, constant_of(&e, s)?));
    }
    p.at_end()?;
    Ok(SymbolDecl { name, depends_on, rule })
}

/// Applies declaration lines to a registry; blank lines and `#` comments are
/// skipped. Errors carry spans relative to the whole text.
pub fn parse_symbol_decls(text: &str, registry: &mut SymbolRegistry) -> Result<(), ParseError> {
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let line = raw.trim_end_matches(['\n', '\r']);
        let content = line.split('#').next().unwrap_or("");
        if !content.trim().is_empty() {
            let shifted = |e: ParseError| ParseError {
                kind: e.kind,
                span: SourceSpan::new(e.span.start + offset, e.span.end + offset),
            };
            let decl = parse_symbol_decl(content).map_err(shifted)?;
            let whole = SourceSpan::new(offset, offset + line.len());
            let as_decl_err = |e: ExprError| ParseError::new(ParseErrorKind::Declaration(e.to_string()), whole);
            registry.declare(&decl.name, decl.depends_on.iter().copied()).map_err(as_decl_err)?;
            if let Some((shift, adds)) = decl.rule {
                registry.add_rule(&decl.name, shift, adds).map_err(as_decl_err)?;
            }
        }
        offset += raw.len();
    }
    Ok(())
}

/// Canonical text for an expression; reparses to a structurally equal tree.
pub fn print_expr(e: &Expr) -> String {
    match e.as_const() {
        Some(c) => c.to_string(),
        None => sum_text(e),
    }
}

fn sum_text(e: &Expr) -> String {
    let Node::Add(children) = e.node() else {
        return term_text(e);
    };
    let mut out = String::new();
    for (idx, child) in children.iter().enumerate() {
        if idx == 0 {
            out.push_str(&term_text(child));
            continue;
        }
        match negated(child) {
            Some(inner) => {
                out.push_str(" - ");
                out.push_str(&inner);
            }
            None => {
                out.push_str(" + ");
                out.push_str(&term_text(child));
            }
        }
    }
    out
}

/// If `e` prints naturally as `- x`, the text of `x` as a term.
fn negated(e: &Expr) -> Option<String> {
    match e.node() {
        Node::Mul(cs) if cs.len() == 2 && cs[0].as_const().is_some_and(is_minus_one) => Some(term_text(&cs[1])),
        Node::Const(c) if c.to_string().starts_with('-') => Some(const_atom(&-c)),
        _ => None,
    }
}

fn is_minus_one(c: &Scalar) -> bool {
    *c == Scalar::from_int(-1)
}

fn term_text(e: &Expr) -> String {
    match e.node() {
        Node::Add(_) => format!("({})", sum_text(e)),
        Node::Mul(cs) => {
            if cs.len() == 2 && cs[0].as_const().is_some_and(is_minus_one) {
                return format!("-{}", unary_text(&cs[1]));
            }
            cs.iter().map(factor_text).collect::<Vec<_>>().join("*")
        }
        Node::Const(c) => {
            let s = c.to_string();
            if s.starts_with('-') && is_simple(&(-c).to_string()) {
                s
            } else {
                const_atom(c)
            }
        }
        _ => unary_text(e),
    }
}

/// Text that parses as one unary operand.
fn unary_text(e: &Expr) -> String {
    match e.node() {
        Node::Add(_) | Node::Mul(_) => format!("({})", sum_text(e)),
        Node::Const(c) => const_atom(c),
        Node::Pow(b, n) => format!("{}^{}", atom_text(b), n),
        _ => atom_text(e),
    }
}

fn factor_text(e: &Expr) -> String {
    unary_text(e)
}

fn atom_text(e: &Expr) -> String {
    match e.node() {
        Node::Const(c) => const_atom(c),
        Node::Var(v) => format!("z{}", v.get()),
        Node::Symbol(s) => s.name().to_string(),
        Node::Apply(f, arg) => format!("{}({})", f.name(), sum_text(arg)),
        Node::Add(_) | Node::Mul(_) | Node::Pow(..) => format!("({})", sum_text(e)),
    }
}

fn is_simple(s: &str) -> bool {
    s == "i" || s == "pi" || s.bytes().all(|b| b.is_ascii_digit())
}

fn const_atom(c: &Scalar) -> String {
    let s = c.to_string();
    if is_simple(&s) {
        s
    } else {
        format!("({s})")
    }
}
