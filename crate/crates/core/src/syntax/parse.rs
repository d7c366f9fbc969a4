//! Concrete syntax.
//!
//! ```text
//! term  := app
//!        | "\" ident ":" type "." term
//!        | "fix" term
//!        | "if" term "then" term "else" "[" ident "]" term
//!        | "let" ident "=" term "in" term
//! app   := atom+
//! atom  := nat-literal | ident | "succ" atom | "coin" "(" rational ")" | "(" term ")"
//! type  := "nat" | type "->" type          (right associative)
//! ```
//!
//! Rationals are written `p/q` or as a bare integer. `let x = M in N` is sugar
//! for `if M then N[0/x] else [z] N[succ z/x]` with `z` fresh, which evaluates
//! `M` once and shares the resulting numeral.

use std::collections::BTreeSet;
use std::fmt;

use num::BigInt;
use thiserror::Error;

use super::{abs, app, coin, fix, fresh_name, ite, num, subst, succ, var, Term, Type};
use crate::rat::{is_probability, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Nat(u64),
    KwIf,
    KwThen,
    KwElse,
    KwFix,
    KwSucc,
    KwCoin,
    KwLet,
    KwIn,
    KwNat,
    Backslash,
    Colon,
    Dot,
    Equals,
    Slash,
    Arrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Nat(n) => write!(f, "numeral `{n}`"),
            Tok::KwIf => write!(f, "`if`"),
            Tok::KwThen => write!(f, "`then`"),
            Tok::KwElse => write!(f, "`else`"),
            Tok::KwFix => write!(f, "`fix`"),
            Tok::KwSucc => write!(f, "`succ`"),
            Tok::KwCoin => write!(f, "`coin`"),
            Tok::KwLet => write!(f, "`let`"),
            Tok::KwIn => write!(f, "`in`"),
            Tok::KwNat => write!(f, "`nat`"),
            Tok::Backslash => write!(f, "`\\`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn next_token(&mut self) -> Result<Spanned, ParseError> {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
        let (line, col) = (self.line, self.col);
        let spanned = |tok| Spanned { tok, line, col };
        let c = match self.peek_char() {
            None => return Ok(spanned(Tok::Eof)),
            Some(c) => c,
        };
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            let text = &self.src[start..self.pos];
            let n: u64 = text
                .parse()
                .map_err(|_| self.error(format!("numeral `{text}` out of range")))?;
            return Ok(spanned(Tok::Nat(n)));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = self.pos;
            while self
                .peek_char()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
            {
                self.bump();
            }
            let text = &self.src[start..self.pos];
            let tok = match text {
                "if" => Tok::KwIf,
                "then" => Tok::KwThen,
                "else" => Tok::KwElse,
                "fix" => Tok::KwFix,
                "succ" => Tok::KwSucc,
                "coin" => Tok::KwCoin,
                "let" => Tok::KwLet,
                "in" => Tok::KwIn,
                "nat" => Tok::KwNat,
                _ => Tok::Ident(text.to_string()),
            };
            return Ok(spanned(tok));
        }
        self.bump();
        let tok = match c {
            '\\' => Tok::Backslash,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '=' => Tok::Equals,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '-' => {
                if self.peek_char() == Some('>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    return Err(ParseError {
                        line,
                        col,
                        msg: "expected `->`".to_string(),
                    });
                }
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        Ok(spanned(tok))
    }
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.idx];
        (s.line, s.col)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].tok.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let lhs = self.ty_atom()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.ty()?;
            Ok(Type::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::KwNat => {
                self.bump();
                Ok(Type::Nat)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => Err(self.error(format!("expected a type, found {other}"))),
        }
    }

    fn rational(&mut self) -> Result<Rat, ParseError> {
        let p = match self.bump() {
            Tok::Nat(n) => n,
            other => return Err(self.error(format!("expected a rational, found {other}"))),
        };
        if *self.peek() == Tok::Slash {
            self.bump();
            let q = match self.bump() {
                Tok::Nat(n) => n,
                other => {
                    return Err(self.error(format!("expected a denominator, found {other}")))
                }
            };
            if q == 0 {
                return Err(self.error("malformed rational: denominator is zero"));
            }
            Ok(Rat::new(BigInt::from(p), BigInt::from(q)))
        } else {
            Ok(Rat::from_integer(BigInt::from(p)))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Backslash => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Colon)?;
                let annot = self.ty()?;
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                Ok(abs(&x, annot, body))
            }
            Tok::KwFix => {
                self.bump();
                let body = self.term()?;
                Ok(fix(body))
            }
            Tok::KwIf => {
                self.bump();
                let scrut = self.term()?;
                self.expect(Tok::KwThen)?;
                let zero = self.term()?;
                self.expect(Tok::KwElse)?;
                self.expect(Tok::LBracket)?;
                let z = self.ident()?;
                self.expect(Tok::RBracket)?;
                let sbr = self.term()?;
                Ok(ite(scrut, zero, &z, sbr))
            }
            Tok::KwLet => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Equals)?;
                let bound = self.term()?;
                self.expect(Tok::KwIn)?;
                let body = self.term()?;
                Ok(desugar_let(&x, bound, &body))
            }
            _ => self.application(),
        }
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            acc = app(acc, arg);
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Nat(_) | Tok::Ident(_) | Tok::KwSucc | Tok::KwCoin | Tok::LParen
        )
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(num(n))
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(var(&x))
            }
            Tok::KwSucc => {
                self.bump();
                let arg = self.atom()?;
                Ok(succ(arg))
            }
            Tok::KwCoin => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (line, col) = self.here();
                let p = self.rational()?;
                if !is_probability(&p) {
                    return Err(ParseError {
                        line,
                        col,
                        msg: format!("coin probability {p} outside [0, 1]"),
                    });
                }
                self.expect(Tok::RParen)?;
                Ok(coin(p))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => Err(self.error(format!("expected a term, found {other}"))),
        }
    }
}

/// `let x = M in N` as the conditional that evaluates `M` once:
/// `if M then N[0/x] else [z] N[succ z/x]`, `z` fresh for `N`.
pub(crate) fn desugar_let(x: &str, bound: Term, body: &Term) -> Term {
    let mut avoid: BTreeSet<String> = body.free_vars();
    avoid.insert(x.to_string());
    let z = fresh_name("z", &avoid);
    ite(
        bound,
        subst(body, &num(0), x),
        &z,
        subst(body, &succ(var(&z)), x),
    )
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    loop {
        let s = lexer.next_token()?;
        let done = s.tok == Tok::Eof;
        toks.push(s);
        if done {
            return Ok(toks);
        }
    }
}

/// Parses a complete term; trailing input is an error.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        idx: 0,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after term", p.peek())));
    }
    Ok(t)
}

/// Parses a type, e.g. `nat -> (nat -> nat) -> nat`.
pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        idx: 0,
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after type", p.peek())));
    }
    Ok(t)
}
