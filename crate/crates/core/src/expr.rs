//! Right-hand sides of tower steps: a small expression language over
//! integers, the residue constant `w`, the base uniformizer `t` and earlier
//! generators `g1, g2, ..`.
//!
//! Precedence, tightest first: `^` (integer exponent, possibly negative),
//! unary `-`, `*`, then binary `+`/`-`.

use std::fmt;

use crate::error::{Error, Result};
use crate::finite_field::{FqElem, FqField};
use crate::laurent::LaurentSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    /// Base uniformizer.
    T,
    /// Generator of step k (1-based).
    Gen(usize),
    /// Root of the residue field modulus.
    W,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Sym { sym: Symbol, pos: usize },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let lit = &text[start..i];
                let v = lit.parse::<i64>().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("integer literal `{lit}` out of range"),
                })?;
                out.push((Tok::Int(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", text[start..].chars().next().unwrap()),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let paren = self.eat(&Tok::LParen);
        let negative = self.eat(&Tok::Minus);
        let k = match self.peek() {
            Some(&Tok::Int(k)) => k,
            _ => return self.err("expected an integer exponent"),
        };
        self.at += 1;
        if paren && !self.eat(&Tok::RParen) {
            return self.err("expected `)` after exponent");
        }
        Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.at += 1;
                Ok(Expr::Int(k))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                let sym = parse_symbol(&name).ok_or(Error::UnknownSymbol {
                    name: name.clone(),
                    pos,
                })?;
                Ok(Expr::Sym { sym, pos })
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(tok) => self.err(format!("unexpected token {tok:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

fn parse_symbol(name: &str) -> Option<Symbol> {
    match name {
        "t" => Some(Symbol::T),
        "w" => Some(Symbol::W),
        _ => {
            let digits = name.strip_prefix('g')?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            match digits.parse::<usize>() {
                Ok(k) if k >= 1 => Some(Symbol::Gen(k)),
                _ => None,
            }
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let e = parser.expr()?;
    if parser.at != parser.toks.len() {
        return parser.err("trailing input");
    }
    Ok(e)
}

/// Intermediate value during evaluation; constants stay exact until they
/// meet a series.
#[derive(Clone)]
enum Value {
    Scalar(FqElem),
    Series(LaurentSeries),
}

impl Expr {
    /// Generator symbols used, with their byte offsets.
    pub fn generators(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Sym {
                sym: Symbol::Gen(k),
                pos,
            } = e
            {
                out.push((*k, *pos));
            }
        });
        out
    }

    fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Neg(a) | Expr::Pow(a, _) => a.walk(visit),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Expr::Int(_) | Expr::Sym { .. } => {}
        }
    }

    /// Fails with `UnknownSymbol` if a generator index exceeds `available`.
    pub fn check_generators(&self, available: usize) -> Result<()> {
        match self.generators().into_iter().find(|&(k, _)| k > available) {
            Some((k, pos)) => Err(Error::UnknownSymbol {
                name: format!("g{k}"),
                pos,
            }),
            None => Ok(()),
        }
    }

    /// Renumbers `gk` to `g(k + offset)`.
    pub fn shift_generators(&self, offset: usize) -> Expr {
        match self {
            Expr::Sym {
                sym: Symbol::Gen(k),
                pos,
            } => Expr::Sym {
                sym: Symbol::Gen(k + offset),
                pos: *pos,
            },
            Expr::Int(_) | Expr::Sym { .. } => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.shift_generators(offset))),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.shift_generators(offset)), *k),
            Expr::Add(a, b) => Expr::Add(
                Box::new(a.shift_generators(offset)),
                Box::new(b.shift_generators(offset)),
            ),
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.shift_generators(offset)),
                Box::new(b.shift_generators(offset)),
            ),
            Expr::Mul(a, b) => Expr::Mul(
                Box::new(a.shift_generators(offset)),
                Box::new(b.shift_generators(offset)),
            ),
        }
    }

    /// Evaluates with `lookup` supplying `t` and the generators; a purely
    /// constant expression becomes a series known to `const_prec`.
    pub fn eval(
        &self,
        field: &crate::finite_field::Fq,
        const_prec: i64,
        lookup: &mut dyn FnMut(Symbol) -> Result<LaurentSeries>,
    ) -> Result<LaurentSeries> {
        Ok(match self.eval_value(field, lookup)? {
            Value::Series(s) => s,
            Value::Scalar(c) => LaurentSeries::new(field, 0, vec![c], const_prec),
        })
    }

    fn eval_value(
        &self,
        field: &FqField,
        lookup: &mut dyn FnMut(Symbol) -> Result<LaurentSeries>,
    ) -> Result<Value> {
        use Value::*;
        Ok(match self {
            Expr::Int(k) => Scalar(field.from_int(*k)),
            Expr::Sym { sym: Symbol::W, .. } => Scalar(field.generator_w()),
            Expr::Sym { sym, .. } => Series(lookup(*sym)?),
            Expr::Neg(a) => match a.eval_value(field, lookup)? {
                Scalar(c) => Scalar(field.neg(c)),
                Series(s) => Series(s.neg()),
            },
            Expr::Pow(a, k) => match a.eval_value(field, lookup)? {
                Scalar(c) => Scalar(field.pow(c, *k)?),
                Series(s) => Series(s.pow(*k)?),
            },
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let x = a.eval_value(field, lookup)?;
                let mut y = b.eval_value(field, lookup)?;
                if matches!(self, Expr::Sub(..)) {
                    y = match y {
                        Scalar(c) => Scalar(field.neg(c)),
                        Series(s) => Series(s.neg()),
                    };
                }
                match (x, y) {
                    (Scalar(c), Scalar(d)) => Scalar(field.add(c, d)),
                    (Scalar(c), Series(s)) | (Series(s), Scalar(c)) => Series(s.add_scalar(c)?),
                    (Series(s), Series(u)) => Series(s.add(&u)?),
                }
            }
            Expr::Mul(a, b) => {
                let x = a.eval_value(field, lookup)?;
                let y = b.eval_value(field, lookup)?;
                match (x, y) {
                    (Scalar(c), Scalar(d)) => Scalar(field.mul(c, d)),
                    (Scalar(c), Series(s)) | (Series(s), Scalar(c)) => Series(s.scale(c)),
                    (Series(s), Series(u)) => Series(s.mul(&u)?),
                }
            }
        })
    }
}

fn fmt_prec(e: &Expr, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
    // levels: 0 sum, 1 product, 2 unary, 3 power, 4 atom
    let mine = match e {
        Expr::Add(..) | Expr::Sub(..) => 0,
        Expr::Mul(..) => 1,
        Expr::Neg(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Int(_) | Expr::Sym { .. } => 4,
    };
    let paren = mine < level;
    if paren {
        write!(f, "(")?;
    }
    match e {
        Expr::Int(k) => write!(f, "{k}")?,
        Expr::Sym { sym, .. } => match sym {
            Symbol::T => write!(f, "t")?,
            Symbol::W => write!(f, "w")?,
            Symbol::Gen(k) => write!(f, "g{k}")?,
        },
        Expr::Neg(a) => {
            write!(f, "-")?;
            fmt_prec(a, f, 2)?;
        }
        Expr::Add(a, b) => {
            fmt_prec(a, f, 0)?;
            write!(f, " + ")?;
            fmt_prec(b, f, 1)?;
        }
        Expr::Sub(a, b) => {
            fmt_prec(a, f, 0)?;
            write!(f, " - ")?;
            fmt_prec(b, f, 1)?;
        }
        Expr::Mul(a, b) => {
            fmt_prec(a, f, 1)?;
            write!(f, "*")?;
            fmt_prec(b, f, 2)?;
        }
        Expr::Pow(a, k) => {
            fmt_prec(a, f, 4)?;
            write!(f, "^{k}")?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, f, 0)
    }
}
