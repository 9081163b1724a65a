//! Typed program: every expression is known to be relational, string or
//! numeric, and every identifier has its kind.

use super::ast::{BinaryOp, Pos};
use crate::relation::{BoolOp, CmpOp, Quantifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Min,
    Max,
    Sum,
    Avg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Attr(String, Pos),
    Anon(Pos),
    Str(StrExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelExpr {
    pub kind: RelKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelKind {
    Atom { rel: String, terms: Vec<Term> },
    Predefined { value: bool, terms: Vec<Term> },
    Lexicographic { op: CmpOp, lhs: Term, rhs: Term },
    Regex { pattern: StrExpr, term: Term },
    NumCompare { op: CmpOp, lhs: NumExpr, rhs: NumExpr },
    RelCompare { op: CmpOp, lhs: Box<RelExpr>, rhs: Box<RelExpr> },
    Not(Box<RelExpr>),
    Bool { op: BoolOp, lhs: Box<RelExpr>, rhs: Box<RelExpr> },
    Quantified { kind: Quantifier, attr: String, body: Box<RelExpr> },
    /// `source` and `target` are the free attributes of `body` in order of
    /// first occurrence.
    Closure { fast: bool, source: String, target: String, body: Box<RelExpr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrExpr {
    pub kind: StrKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrKind {
    Lit(String),
    Var(String),
    FromNum(Box<NumExpr>),
    Arg(Box<NumExpr>),
    Concat(Box<StrExpr>, Box<StrExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumExpr {
    pub kind: NumKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumKind {
    Lit(f64),
    Var(String),
    ArgCount,
    ExitStatus,
    FromStr(Box<StrExpr>),
    Count(Box<RelExpr>),
    Aggregate(Aggregate, Box<RelExpr>),
    Neg(Box<NumExpr>),
    /// Arithmetic only: `+ - * / DIV MOD ^`.
    Binary(BinaryOp, Box<NumExpr>, Box<NumExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LhsTerm {
    Attr(String),
    Lit(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintItem {
    Endl,
    RelInfo(RelExpr),
    Tuples { prefix: Option<StrExpr>, rel: RelExpr },
    Str(StrExpr),
    Num(NumExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintTarget {
    Stdout,
    Stderr,
    File(StrExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    RelAssign { rel: String, lhs: Vec<LhsTerm>, value: RelExpr },
    StrAssign { name: String, value: StrExpr },
    NumAssign { name: String, value: NumExpr },
    If { cond: RelExpr, then: Vec<Stmt>, otherwise: Vec<Stmt> },
    While { cond: RelExpr, body: Vec<Stmt> },
    For { var: String, set: RelExpr, body: Vec<Stmt> },
    Print { items: Vec<PrintItem>, target: PrintTarget },
    Exec(StrExpr),
    Exit(NumExpr),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Program {
    /// String literals on the left-hand side of relational assignments, in
    /// program order.
    pub fn lhs_literals(&self) -> Vec<&str> {
        fn walk<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a str>) {
            for s in stmts {
                match &s.kind {
                    StmtKind::RelAssign { lhs, .. } => {
                        out.extend(lhs.iter().filter_map(|t| match t {
                            LhsTerm::Lit(s) => Some(s.as_str()),
                            LhsTerm::Attr(_) => None,
                        }))
                    }
                    StmtKind::If { then, otherwise, .. } => {
                        walk(then, out);
                        walk(otherwise, out);
                    }
                    StmtKind::While { body, .. }
                    | StmtKind::For { body, .. }
                    | StmtKind::Block(body) => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.stmts, &mut out);
        out
    }
}

/// Free attributes in order of first occurrence.
pub fn free_attributes(e: &RelExpr) -> Vec<String> {
    fn add(out: &mut Vec<String>, name: &str) {
        if !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
    }
    fn terms(out: &mut Vec<String>, ts: &[&Term]) {
        for t in ts {
            if let Term::Attr(name, _) = t {
                add(out, name);
            }
        }
    }
    fn walk(e: &RelExpr, out: &mut Vec<String>) {
        match &e.kind {
            RelKind::Atom { terms: ts, .. } | RelKind::Predefined { terms: ts, .. } => {
                terms(out, &ts.iter().collect::<Vec<_>>())
            }
            RelKind::Lexicographic { lhs, rhs, .. } => terms(out, &[lhs, rhs]),
            RelKind::Regex { term, .. } => terms(out, &[term]),
            RelKind::NumCompare { .. } | RelKind::RelCompare { .. } => {}
            RelKind::Not(a) | RelKind::Closure { body: a, .. } => walk(a, out),
            RelKind::Bool { lhs, rhs, .. } => {
                walk(lhs, out);
                walk(rhs, out);
            }
            RelKind::Quantified { attr, body, .. } => {
                let mut inner = Vec::new();
                walk(body, &mut inner);
                for n in inner.iter().filter(|n| *n != attr) {
                    add(out, n);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(e, &mut out);
    out
}
