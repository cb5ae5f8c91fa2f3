//! Lexer and parser for the `key = value` configuration language.
//!
//! The grammar is documented in `docs/config.md`. This module only builds the
//! untyped value tree; `config` turns it into a [`crate::config::RunConfig`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use qal_core::{Rational, Scalar};

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic { pos, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.pos.line, self.pos.col, self.message)
    }
}

/// All problems found in one configuration, in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num { text: String, imag: bool },
    Str(String),
    Eq,
    Comma,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Slash,
    Minus,
    DotDot,
    Newline,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num { text, imag } => format!("`{text}{}`", if *imag { "i" } else { "" }),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Eq => "`=`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Minus => "`-`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        match c {
            '\n' => {
                out.push((Tok::Newline, pos));
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '=' | ',' | '(' | ')' | '[' | ']' | '/' | '-' => {
                let t = match c {
                    '=' => Tok::Eq,
                    ',' => Tok::Comma,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '/' => Tok::Slash,
                    _ => Tok::Minus,
                };
                out.push((t, pos));
                i += 1;
            }
            '.' if chars.get(i + 1) == Some(&'.') => {
                out.push((Tok::DotDot, pos));
                i += 2;
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        Some('"') => break,
                        Some('\n') | None => return Err(Diagnostic::new(pos, "unterminated string")),
                        Some(&ch) => s.push(ch),
                    }
                    i += 1;
                }
                i += 1;
                out.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if matches!(chars.get(i), Some('e' | 'E')) {
                    let mut j = i + 1;
                    if matches!(chars.get(j), Some('+' | '-')) {
                        j += 1;
                    }
                    if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let imag = chars.get(i) == Some(&'i') && !chars.get(i + 1).is_some_and(|&d| is_ident_continue(d));
                if imag {
                    i += 1;
                } else if chars.get(i).is_some_and(|&d| is_ident_start(d)) {
                    return Err(Diagnostic::new(pos, format!("malformed number `{text}{}`", chars[i])));
                }
                out.push((Tok::Num { text, imag }, pos));
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => return Err(Diagnostic::new(pos, format!("unexpected character `{other}`"))),
        }
        col += i - start;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Untyped configuration value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    /// Exact numeric literal together with its source text.
    Number { value: Scalar, text: String },
    Ident(String),
    Str(String),
    List(Vec<Spanned>),
    Range(i64, i64),
    Call { name: String, args: Vec<Arg> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spanned {
    pub value: Value,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Spanned,
    pub pos: Pos,
}

/// One `key = value` line.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub key_pos: Pos,
    pub value: Spanned,
}

/// Exact value of a decimal literal such as `12`, `0.25` or `1e-8`.
pub fn decimal_rational(text: &str) -> Option<Rational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    if exp.abs() > 400 {
        return None;
    }
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Pos, Diagnostic> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::new(self.pos(), format!("expected {what}, found {}", self.peek().describe()))
    }

    fn recover(&mut self) {
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.bump();
        }
    }

    fn entry(&mut self) -> Result<Entry, Diagnostic> {
        let (key, key_pos) = match self.bump() {
            (Tok::Ident(k), p) => (k, p),
            (t, p) => return Err(Diagnostic::new(p, format!("expected a key, found {}", t.describe()))),
        };
        self.expect(Tok::Eq, "`=` after the key")?;
        let value = self.value()?;
        if !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            return Err(self.unexpected("end of line"));
        }
        Ok(Entry { key, key_pos, value })
    }

    fn value(&mut self) -> Result<Spanned, Diagnostic> {
        let pos = self.pos();
        let value = match self.peek().clone() {
            Tok::LBrack => {
                self.bump();
                let mut items = Vec::new();
                self.skip_newlines();
                while *self.peek() != Tok::RBrack {
                    items.push(self.value()?);
                    self.skip_newlines();
                    if *self.peek() == Tok::Comma {
                        self.bump();
                        self.skip_newlines();
                    } else if *self.peek() != Tok::RBrack {
                        return Err(self.unexpected("`,` or `]`"));
                    }
                }
                self.bump();
                Value::List(items)
            }
            Tok::Str(s) => {
                self.bump();
                Value::Str(s)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    Value::Call { name, args: self.args()? }
                } else {
                    Value::Ident(name)
                }
            }
            Tok::Minus | Tok::Num { .. } => self.number()?,
            _ => return Err(self.unexpected("a value")),
        };
        Ok(Spanned { value, pos })
    }

    fn args(&mut self) -> Result<Vec<Arg>, Diagnostic> {
        let mut args = Vec::new();
        self.skip_newlines();
        while *self.peek() != Tok::RParen {
            let pos = self.pos();
            let named = matches!(self.peek(), Tok::Ident(_)) && self.toks.get(self.i + 1).map(|t| &t.0) == Some(&Tok::Eq);
            let name = if named {
                let Tok::Ident(n) = self.bump().0 else { unreachable!() };
                self.bump();
                Some(n)
            } else {
                None
            };
            let value = self.value()?;
            args.push(Arg { name, value, pos });
            self.skip_newlines();
            if *self.peek() == Tok::Comma {
                self.bump();
                self.skip_newlines();
            } else if *self.peek() != Tok::RParen {
                return Err(self.unexpected("`,` or `)`"));
            }
        }
        self.bump();
        Ok(args)
    }

    fn signed_num(&mut self) -> Result<(bool, String, bool, Pos), Diagnostic> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.bump() {
            (Tok::Num { text, imag }, p) => Ok((neg, text, imag, p)),
            (t, p) => Err(Diagnostic::new(p, format!("expected a number, found {}", t.describe()))),
        }
    }

    fn number(&mut self) -> Result<Value, Diagnostic> {
        let (neg, text, imag, pos) = self.signed_num()?;
        let sign = if neg { "-" } else { "" };
        if *self.peek() == Tok::DotDot {
            self.bump();
            let (neg2, text2, imag2, pos2) = self.signed_num()?;
            let int = |neg: bool, t: &str, imag: bool, p: Pos| -> Result<i64, Diagnostic> {
                let v: i64 = t.parse().ok().filter(|_| !imag).ok_or_else(|| {
                    Diagnostic::new(p, format!("range bounds must be integers, found `{t}`"))
                })?;
                Ok(if neg { -v } else { v })
            };
            return Ok(Value::Range(int(neg, &text, imag, pos)?, int(neg2, &text2, imag2, pos2)?));
        }
        let num = decimal_rational(&text).ok_or_else(|| Diagnostic::new(pos, format!("invalid number `{text}`")))?;
        let mut value = if neg { -num } else { num };
        let mut full = format!("{sign}{text}");
        let mut is_imag = imag;
        if *self.peek() == Tok::Slash {
            self.bump();
            let (dpos, (dtext, dimag)) = match self.bump() {
                (Tok::Num { text, imag }, p) => (p, (text, imag)),
                (t, p) => return Err(Diagnostic::new(p, format!("expected a denominator, found {}", t.describe()))),
            };
            if imag && dimag {
                return Err(Diagnostic::new(dpos, "the imaginary unit may appear only once"));
            }
            let den = decimal_rational(&dtext)
                .filter(|d| !d.is_zero())
                .ok_or_else(|| Diagnostic::new(dpos, format!("invalid denominator `{dtext}`")))?;
            value /= den;
            is_imag |= dimag;
            full = format!("{full}/{dtext}");
        }
        if is_imag {
            full.push('i');
        }
        let scalar = if is_imag { Scalar::new(Rational::zero(), value) } else { Scalar::real(value) };
        Ok(Value::Number { value: scalar, text: full })
    }
}

/// Parses a configuration into its entries, collecting one diagnostic per
/// malformed line.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let toks = lex(text).map_err(|d| ConfigError { diagnostics: vec![d] })?;
    let mut p = Parser { toks, i: 0 };
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            break;
        }
        match p.entry() {
            Ok(e) => entries.push(e),
            Err(d) => {
                diagnostics.push(d);
                p.recover();
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(entries)
    } else {
        Err(ConfigError { diagnostics })
    }
}
