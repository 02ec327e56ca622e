//! The guarded-expression grammar.
//!
//! Expressions are side-effect free and total over declared domains:
//! literals, variable references, comparisons (= ≠ < ≤ > ≥), boolean
//! combinators (and/or/not), and integer + − × with standard precedence.
//! ASCII spellings (`!=`, `<=`, `>=`, `==`, `*`) are accepted alongside the
//! Unicode operators. A primed reference (`mode'`) reads an ordinate value
//! and is legal only where the evaluation scope provides ordinates
//! (safety constraints).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ensemble::Value;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "≠",
            CmpOp::Lt => "<",
            CmpOp::Le => "≤",
            CmpOp::Gt => ">",
            CmpOp::Ge => "≥",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Sym(String),
    Bool(bool),
    /// Unprimed variable reference (stimulus/abscissa scope).
    Var(String),
    /// Primed variable reference (ordinate scope), written `name'`.
    OrdinateVar(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

/// Result of evaluating an expression: a scalar or a boolean.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluated {
    Scalar(Value),
    Bool(bool),
}

impl Evaluated {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Evaluated::Bool(b) => Some(*b),
            Evaluated::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<&Value> {
        match self {
            Evaluated::Scalar(v) => Some(v),
            Evaluated::Bool(_) => None,
        }
    }
}

/// Name resolution for evaluation. `primed` selects the ordinate namespace.
pub trait Scope {
    fn lookup(&self, name: &str, primed: bool) -> Option<Value>;
}

/// Plain stimulus scope over a single choice.
pub struct ChoiceScope<'a>(pub &'a crate::ensemble::Choice);

impl Scope for ChoiceScope<'_> {
    fn lookup(&self, name: &str, primed: bool) -> Option<Value> {
        if primed {
            None
        } else {
            self.0.get(name).cloned()
        }
    }
}

/// Frame scope: unprimed names read the abscissa, primed the ordinate.
pub struct FrameScope<'a> {
    pub abscissa: &'a crate::ensemble::Choice,
    pub ordinate: &'a crate::ensemble::Choice,
}

impl Scope for FrameScope<'_> {
    fn lookup(&self, name: &str, primed: bool) -> Option<Value> {
        if primed {
            self.ordinate.get(name).cloned()
        } else {
            self.abscissa.get(name).cloned()
        }
    }
}

impl Expr {
    pub fn eval(&self, scope: &dyn Scope) -> Result<Evaluated> {
        use Evaluated::*;
        match self {
            Expr::Int(i) => Ok(Scalar(Value::Int(*i))),
            Expr::Sym(s) => Ok(Scalar(Value::Sym(s.clone()))),
            Expr::Bool(b) => Ok(Bool(*b)),
            Expr::Var(name) => scope
                .lookup(name, false)
                .map(Scalar)
                .ok_or_else(|| eval_err(format!("unknown variable `{name}`"))),
            Expr::OrdinateVar(name) => scope
                .lookup(name, true)
                .map(Scalar)
                .ok_or_else(|| eval_err(format!("unknown ordinate variable `{name}'`"))),
            Expr::Not(e) => match e.eval(scope)? {
                Bool(b) => Ok(Bool(!b)),
                Scalar(v) => Err(eval_err(format!("`not` applied to scalar {v}"))),
            },
            Expr::And(a, b) => {
                let left = expect_bool(a.eval(scope)?, "and")?;
                if !left {
                    return Ok(Bool(false));
                }
                Ok(Bool(expect_bool(b.eval(scope)?, "and")?))
            }
            Expr::Or(a, b) => {
                let left = expect_bool(a.eval(scope)?, "or")?;
                if left {
                    return Ok(Bool(true));
                }
                Ok(Bool(expect_bool(b.eval(scope)?, "or")?))
            }
            Expr::Cmp(op, a, b) => {
                let lhs = expect_scalar(a.eval(scope)?, op)?;
                let rhs = expect_scalar(b.eval(scope)?, op)?;
                compare(*op, &lhs, &rhs).map(Bool)
            }
            Expr::Arith(op, a, b) => {
                let lhs = expect_int(a.eval(scope)?)?;
                let rhs = expect_int(b.eval(scope)?)?;
                let out = match op {
                    ArithOp::Add => lhs.checked_add(rhs),
                    ArithOp::Sub => lhs.checked_sub(rhs),
                    ArithOp::Mul => lhs.checked_mul(rhs),
                };
                out.map(|v| Scalar(Value::Int(v)))
                    .ok_or_else(|| eval_err("integer overflow".to_string()))
            }
            Expr::Neg(e) => {
                let v = expect_int(e.eval(scope)?)?;
                v.checked_neg()
                    .map(|v| Scalar(Value::Int(v)))
                    .ok_or_else(|| eval_err("integer overflow".to_string()))
            }
        }
    }

    /// Evaluates as a guard; the expression must produce a boolean.
    pub fn eval_guard(&self, scope: &dyn Scope) -> Result<bool> {
        self.eval(scope)?
            .as_bool()
            .ok_or_else(|| eval_err("guard did not evaluate to a boolean".to_string()))
    }

    /// Evaluates as an assignment; the expression must produce a scalar.
    pub fn eval_scalar(&self, scope: &dyn Scope) -> Result<Value> {
        match self.eval(scope)? {
            Evaluated::Scalar(v) => Ok(v),
            Evaluated::Bool(_) => {
                Err(eval_err("assignment did not evaluate to a scalar".to_string()))
            }
        }
    }

    /// Collects referenced variable names as (name, primed) pairs.
    pub fn references(&self, out: &mut Vec<(String, bool)>) {
        match self {
            Expr::Int(_) | Expr::Sym(_) | Expr::Bool(_) => {}
            Expr::Var(n) => out.push((n.clone(), false)),
            Expr::OrdinateVar(n) => out.push((n.clone(), true)),
            Expr::Not(e) | Expr::Neg(e) => e.references(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.references(out);
                b.references(out);
            }
            Expr::Cmp(_, a, b) | Expr::Arith(_, a, b) => {
                a.references(out);
                b.references(out);
            }
        }
    }
}

fn eval_err(msg: String) -> Error {
    Error::Expr {
        context: "evaluation".into(),
        msg,
    }
}

fn expect_bool(v: Evaluated, op: &str) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| eval_err(format!("`{op}` requires boolean operands")))
}

fn expect_scalar(v: Evaluated, op: &CmpOp) -> Result<Value> {
    match v {
        Evaluated::Scalar(v) => Ok(v),
        Evaluated::Bool(_) => Err(eval_err(format!("`{op}` requires scalar operands"))),
    }
}

fn expect_int(v: Evaluated) -> Result<i64> {
    match v {
        Evaluated::Scalar(Value::Int(i)) => Ok(i),
        Evaluated::Scalar(Value::Sym(s)) => {
            Err(eval_err(format!("arithmetic on symbol '{s}'")))
        }
        Evaluated::Bool(_) => Err(eval_err("arithmetic on boolean".to_string())),
    }
}

fn compare(op: CmpOp, lhs: &Value, rhs: &Value) -> Result<bool> {
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => Ok(match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }),
        (Value::Sym(a), Value::Sym(b)) => match op {
            CmpOp::Eq => Ok(a == b),
            CmpOp::Ne => Ok(a != b),
            _ => Err(eval_err(format!("ordering comparison `{op}` on symbols"))),
        },
        (a, b) => Err(eval_err(format!("comparison of mixed kinds {a} and {b}"))),
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Sym(String),
    Ident(String),
    PrimedIdent(String),
    And,
    Or,
    Not,
    True,
    False,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
        }
    }

    fn err(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: 1,
            col: self.src[..pos].chars().count() + 1,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while let Some(&(pos, ch)) = self.chars.peek() {
            match ch {
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                '(' => {
                    self.chars.next();
                    out.push((pos, Tok::LParen));
                }
                ')' => {
                    self.chars.next();
                    out.push((pos, Tok::RParen));
                }
                '+' => {
                    self.chars.next();
                    out.push((pos, Tok::Plus));
                }
                '-' | '−' => {
                    self.chars.next();
                    out.push((pos, Tok::Minus));
                }
                '*' | '×' => {
                    self.chars.next();
                    out.push((pos, Tok::Star));
                }
                '≠' => {
                    self.chars.next();
                    out.push((pos, Tok::Ne));
                }
                '≤' => {
                    self.chars.next();
                    out.push((pos, Tok::Le));
                }
                '≥' => {
                    self.chars.next();
                    out.push((pos, Tok::Ge));
                }
                '=' => {
                    self.chars.next();
                    if let Some(&(_, '=')) = self.chars.peek() {
                        self.chars.next();
                    }
                    out.push((pos, Tok::Eq));
                }
                '!' => {
                    self.chars.next();
                    match self.chars.peek() {
                        Some(&(_, '=')) => {
                            self.chars.next();
                            out.push((pos, Tok::Ne));
                        }
                        _ => return Err(self.err(pos, "expected `!=`")),
                    }
                }
                '<' => {
                    self.chars.next();
                    if let Some(&(_, '=')) = self.chars.peek() {
                        self.chars.next();
                        out.push((pos, Tok::Le));
                    } else {
                        out.push((pos, Tok::Lt));
                    }
                }
                '>' => {
                    self.chars.next();
                    if let Some(&(_, '=')) = self.chars.peek() {
                        self.chars.next();
                        out.push((pos, Tok::Ge));
                    } else {
                        out.push((pos, Tok::Gt));
                    }
                }
                '\'' => {
                    // quoted symbol literal
                    self.chars.next();
                    let mut sym = String::new();
                    loop {
                        match self.chars.next() {
                            Some((_, '\'')) => break,
                            Some((_, c)) => sym.push(c),
                            None => return Err(self.err(pos, "unterminated symbol literal")),
                        }
                    }
                    out.push((pos, Tok::Sym(sym)));
                }
                c if c.is_ascii_digit() => {
                    let mut num = String::new();
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c.is_ascii_digit() {
                            num.push(c);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    let value: i64 = num
                        .parse()
                        .map_err(|_| self.err(pos, format!("integer literal `{num}` out of range")))?;
                    out.push((pos, Tok::Int(value)));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut ident = String::new();
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            ident.push(c);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    let tok = match ident.as_str() {
                        "and" => Tok::And,
                        "or" => Tok::Or,
                        "not" => Tok::Not,
                        "true" => Tok::True,
                        "false" => Tok::False,
                        _ => {
                            // a trailing prime marks an ordinate reference
                            if let Some(&(_, '\'')) = self.chars.peek() {
                                self.chars.next();
                                Tok::PrimedIdent(ident)
                            } else {
                                Tok::Ident(ident)
                            }
                        }
                    };
                    out.push((pos, tok));
                }
                other => return Err(self.err(pos, format!("unexpected character `{other}`"))),
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Parser (recursive descent, standard precedence)
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let col = match self.toks.get(self.pos) {
            Some((byte, _)) => self.src[..*byte].chars().count() + 1,
            None => self.src.chars().count() + 1,
        };
        Error::Parse {
            line: 1,
            col,
            msg: msg.into(),
        }
    }

    fn parse_or(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_and()?;
        while matches!(self.peek(), Some(Tok::Or)) {
            self.next();
            let rhs = self.parse_and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_not()?;
        while matches!(self.peek(), Some(Tok::And)) {
            self.next();
            let rhs = self.parse_not()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Not)) {
            self.next();
            let inner = self.parse_not()?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.parse_cmp()
    }

    fn parse_cmp(&mut self) -> Result<Expr> {
        let lhs = self.parse_add()?;
        let op = match self.peek() {
            Some(Tok::Eq) => Some(CmpOp::Eq),
            Some(Tok::Ne) => Some(CmpOp::Ne),
            Some(Tok::Lt) => Some(CmpOp::Lt),
            Some(Tok::Le) => Some(CmpOp::Le),
            Some(Tok::Gt) => Some(CmpOp::Gt),
            Some(Tok::Ge) => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.next();
            let rhs = self.parse_add()?;
            return Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_add(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.parse_mul()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_mul(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.next();
            let rhs = self.parse_unary()?;
            lhs = Expr::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            let inner = self.parse_unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Int(i)) => Ok(Expr::Int(i)),
            Some(Tok::Sym(s)) => Ok(Expr::Sym(s)),
            Some(Tok::True) => Ok(Expr::Bool(true)),
            Some(Tok::False) => Ok(Expr::Bool(false)),
            Some(Tok::Ident(name)) => Ok(Expr::Var(name)),
            Some(Tok::PrimedIdent(name)) => Ok(Expr::OrdinateVar(name)),
            Some(Tok::LParen) => {
                let inner = self.parse_or()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        Err(self.err_here("expected `)`"))
                    }
                }
            }
            Some(other) => {
                self.pos -= 1;
                Err(self.err_here(format!("unexpected token {other:?}")))
            }
            None => Err(self.err_here("unexpected end of expression")),
        }
    }
}

/// Parses a single expression string.
pub fn parse(src: &str) -> Result<Expr> {
    let toks = Lexer::new(src).tokens()?;
    if toks.is_empty() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "empty expression".into(),
        });
    }
    let mut parser = Parser { src, toks, pos: 0 };
    let expr = parser.parse_or()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err_here("trailing input after expression"));
    }
    Ok(expr)
}

/// Static name check: every referenced variable must be declared, and primed
/// references are admitted only when `allow_primed`.
pub fn check_references(
    expr: &Expr,
    declared: &std::collections::BTreeSet<String>,
    allow_primed: bool,
    context: &str,
) -> Result<()> {
    let mut refs = Vec::new();
    expr.references(&mut refs);
    for (name, primed) in refs {
        if primed && !allow_primed {
            return Err(Error::Expr {
                context: context.to_string(),
                msg: format!("ordinate reference `{name}'` not allowed here"),
            });
        }
        if !declared.contains(&name) {
            return Err(Error::Expr {
                context: context.to_string(),
                msg: format!("unknown variable `{name}`"),
            });
        }
    }
    Ok(())
}
