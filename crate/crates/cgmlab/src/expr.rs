//! Tiny expression language for user-supplied chart components.
//!
//! Grammar (standard infix, tightest first): `^` (integer exponent only),
//! unary `−`, `×`/`÷`, `+`/`−`; parentheses; identifiers `u`, `v`, `pi`;
//! functions `sin cos sinh cosh exp log sqrt atan2`.  Deliberately total:
//! no conditionals, no user functions, so jet evaluation is defined
//! everywhere the guards (division, `log`, `sqrt`) pass.

use crate::jet::Jet3;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fun1 {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Const(f64),
    VarU,
    VarV,
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Neg(Box<ExprAst>),
    Pow(Box<ExprAst>, i32),
    Fun1(Fun1, Box<ExprAst>),
    Atan2(Box<ExprAst>, Box<ExprAst>),
}

/// Expression tree node; `offset` is the byte offset of the node's first
/// token in the source, used in parse- and evaluation-error reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub kind: ExprKind,
    pub offset: usize,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' | b',' => {
                let t = match c {
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'^' => Tok::Caret,
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                toks.push((t, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut k = i + 1;
                    if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                        k += 1;
                    }
                    if k < b.len() && b[k].is_ascii_digit() {
                        i = k;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &src[start..i];
                let x: f64 = s.parse().map_err(|_| Error::Parse {
                    offset: start,
                    msg: format!("invalid number literal `{s}`"),
                })?;
                toks.push((Tok::Num(x), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Parse {
                    offset: i,
                    msg: format!("unexpected character `{}`", src[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.1).unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize> {
        match self.bump() {
            Some((t, off)) if t == want => Ok(off),
            Some((t, off)) => Err(Error::Parse {
                offset: off,
                msg: format!("expected {what}, found {t:?}"),
            }),
            None => Err(Error::Parse {
                offset: self.src_len,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((Tok::Plus, _)) => {
                    self.bump();
                    let rhs = self.term()?;
                    let off = lhs.offset;
                    lhs = ExprAst { kind: ExprKind::Add(Box::new(lhs), Box::new(rhs)), offset: off };
                }
                Some((Tok::Minus, _)) => {
                    self.bump();
                    let rhs = self.term()?;
                    let off = lhs.offset;
                    lhs = ExprAst { kind: ExprKind::Sub(Box::new(lhs), Box::new(rhs)), offset: off };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some((Tok::Star, _)) => {
                    self.bump();
                    let rhs = self.unary()?;
                    let off = lhs.offset;
                    lhs = ExprAst { kind: ExprKind::Mul(Box::new(lhs), Box::new(rhs)), offset: off };
                }
                Some((Tok::Slash, _)) => {
                    self.bump();
                    let rhs = self.unary()?;
                    let off = lhs.offset;
                    lhs = ExprAst { kind: ExprKind::Div(Box::new(lhs), Box::new(rhs)), offset: off };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ExprAst> {
        if let Some((Tok::Minus, off)) = self.peek().cloned() {
            self.bump();
            let inner = self.unary()?;
            return Ok(ExprAst { kind: ExprKind::Neg(Box::new(inner)), offset: off });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let exp_off = self.here();
            let n = self.int_exponent()?;
            let off = base.offset;
            return Ok(ExprAst {
                kind: ExprKind::Pow(Box::new(base), n),
                offset: off.min(exp_off),
            });
        }
        Ok(base)
    }

    /// Exponent of `^`: an integer literal, optionally negated or
    /// parenthesized (`x^-2`, `x^(3)`).
    fn int_exponent(&mut self) -> Result<i32> {
        match self.bump() {
            Some((Tok::Minus, _)) => Ok(-self.int_exponent()?),
            Some((Tok::LParen, _)) => {
                let n = self.int_exponent()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(n)
            }
            Some((Tok::Num(x), off)) => {
                if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 {
                    Ok(x as i32)
                } else {
                    Err(Error::Parse {
                        offset: off,
                        msg: format!("exponent must be an integer, got {x}"),
                    })
                }
            }
            Some((t, off)) => Err(Error::Parse {
                offset: off,
                msg: format!("expected integer exponent, found {t:?}"),
            }),
            None => Err(Error::Parse {
                offset: self.src_len,
                msg: "expected integer exponent, found end of input".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<ExprAst> {
        match self.bump() {
            Some((Tok::Num(x), off)) => Ok(ExprAst { kind: ExprKind::Const(x), offset: off }),
            Some((Tok::LParen, _)) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some((Tok::Ident(name), off)) => match name.as_str() {
                "u" => Ok(ExprAst { kind: ExprKind::VarU, offset: off }),
                "v" => Ok(ExprAst { kind: ExprKind::VarV, offset: off }),
                "pi" => Ok(ExprAst { kind: ExprKind::Const(std::f64::consts::PI), offset: off }),
                "atan2" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let a = self.expr()?;
                    self.expect(Tok::Comma, "`,` (atan2 takes two arguments)")?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(ExprAst { kind: ExprKind::Atan2(Box::new(a), Box::new(b)), offset: off })
                }
                _ => {
                    let f = match name.as_str() {
                        "sin" => Fun1::Sin,
                        "cos" => Fun1::Cos,
                        "sinh" => Fun1::Sinh,
                        "cosh" => Fun1::Cosh,
                        "exp" => Fun1::Exp,
                        "log" => Fun1::Log,
                        "sqrt" => Fun1::Sqrt,
                        _ => {
                            return Err(Error::Parse {
                                offset: off,
                                msg: format!("unknown identifier `{name}`"),
                            })
                        }
                    };
                    self.expect(Tok::LParen, "`(`")?;
                    let a = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(ExprAst { kind: ExprKind::Fun1(f, Box::new(a)), offset: off })
                }
            },
            Some((t, off)) => Err(Error::Parse {
                offset: off,
                msg: format!("expected expression, found {t:?}"),
            }),
            None => Err(Error::Parse {
                offset: self.src_len,
                msg: "expected expression, found end of input".into(),
            }),
        }
    }
}

/// Parse an infix expression into an AST. Errors carry the byte offset.
pub fn parse_expression(src: &str) -> Result<ExprAst> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0, src_len: src.len() };
    let e = p.expr()?;
    if let Some((t, off)) = p.peek() {
        return Err(Error::Parse {
            offset: *off,
            msg: format!("unexpected trailing token {t:?}"),
        });
    }
    Ok(e)
}

/// Evaluate an AST to an order-3 jet at chart point `(u, v)`.
///
/// Guards: division by (jet-value) zero, `log` of a non-positive value,
/// `sqrt` of a negative value, `atan2(0, 0)` — all reported with the byte
/// offset of the offending node.
pub fn eval_jet3(ast: &ExprAst, u: f64, v: f64) -> Result<Jet3> {
    fn go(e: &ExprAst, u: f64, v: f64) -> Result<Jet3> {
        let bad = |msg: String| Error::Eval { offset: e.offset, msg };
        Ok(match &e.kind {
            ExprKind::Const(x) => Jet3::constant(*x),
            ExprKind::VarU => Jet3::var_u(u),
            ExprKind::VarV => Jet3::var_v(v),
            ExprKind::Add(a, b) => go(a, u, v)? + go(b, u, v)?,
            ExprKind::Sub(a, b) => go(a, u, v)? - go(b, u, v)?,
            ExprKind::Mul(a, b) => go(a, u, v)? * go(b, u, v)?,
            ExprKind::Div(a, b) => {
                let d = go(b, u, v)?;
                if d.value() == 0.0 {
                    return Err(bad("division by zero".into()));
                }
                go(a, u, v)? / d
            }
            ExprKind::Neg(a) => -go(a, u, v)?,
            ExprKind::Pow(a, n) => {
                let base = go(a, u, v)?;
                if *n < 0 && base.value() == 0.0 {
                    return Err(bad(format!("zero raised to negative power {n}")));
                }
                base.powi(*n)
            }
            ExprKind::Fun1(f, a) => {
                let x = go(a, u, v)?;
                match f {
                    Fun1::Sin => x.sin(),
                    Fun1::Cos => x.cos(),
                    Fun1::Sinh => x.sinh(),
                    Fun1::Cosh => x.cosh(),
                    Fun1::Exp => x.exp(),
                    Fun1::Log => {
                        if x.value() <= 0.0 {
                            return Err(bad(format!("log of non-positive value {}", x.value())));
                        }
                        x.ln()
                    }
                    Fun1::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(bad(format!("sqrt of negative value {}", x.value())));
                        }
                        if x.value() == 0.0 {
                            return Err(bad("sqrt at zero has no jet".into()));
                        }
                        x.sqrt()
                    }
                }
            }
            ExprKind::Atan2(a, b) => {
                let (y, x) = (go(a, u, v)?, go(b, u, v)?);
                if y.value() == 0.0 && x.value() == 0.0 {
                    return Err(bad("atan2(0, 0) is undefined".into()));
                }
                Jet3::atan2(&y, &x)
            }
        })
    }
    go(ast, u, v)
}
