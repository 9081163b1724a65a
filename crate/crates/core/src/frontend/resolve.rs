//! Identifier kinds, typing of the surface tree, and context conditions.
//!
//! Kinds are fixed at the first occurrence of an identifier, walking the
//! program in textual order. Relational variables are recognized by their
//! term list, so the program can be resolved before the RSF input is read;
//! [`check_rsf_relations`] then rejects RSF relation names the program uses
//! with another kind.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::ast::{self, BinaryOp, Expr, ExprKind, Func, Pos};
use super::ir::*;
use crate::error::Error;
use crate::relation::{BoolOp, CmpOp};

pub const ARG_COUNT: &str = "argCount";
pub const EXIT_STATUS: &str = "exitStatus";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Attribute,
    RelVar,
    StrVar,
    NumVar,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Attribute => "an attribute",
            Kind::RelVar => "a relational variable",
            Kind::StrVar => "a string variable",
            Kind::NumVar => "a numerical variable",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    kinds: HashMap<String, (Kind, Pos)>,
}

impl SymbolTable {
    pub fn kind(&self, name: &str) -> Option<Kind> {
        self.kinds.get(name).map(|&(k, _)| k)
    }
}

/// Rejects RSF relation names that the program uses as something other
/// than a relational variable.
pub fn check_rsf_relations<'a>(
    table: &SymbolTable,
    names: impl IntoIterator<Item = &'a str>,
) -> Result<(), Error> {
    for name in names {
        if let Some(&(kind, pos)) = table.kinds.get(name) {
            if kind != Kind::RelVar {
                return Err(Error::static_error(
                    pos,
                    format!("`{name}` is a relation in the RSF input but {kind} in the program"),
                ));
            }
        }
    }
    Ok(())
}

pub fn resolve(program: &ast::Program) -> Result<(Program, SymbolTable), Error> {
    let mut r = Resolver::default();
    for name in ["TRUE", "FALSE"] {
        r.table.kinds.insert(name.into(), (Kind::RelVar, Pos::default()));
    }
    let stmts = r.block(&program.stmts)?;
    Ok((Program { stmts }, r.table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sort {
    Rel,
    Str,
    Num,
    /// An attribute, `_`, or an identifier of unknown kind.
    Term,
}

#[derive(Default)]
struct Resolver {
    table: SymbolTable,
}

fn attr_set(names: impl IntoIterator<Item = String>) -> String {
    let set: BTreeSet<String> = names.into_iter().collect();
    let list: Vec<String> = set.into_iter().collect();
    format!("{{{}}}", list.join(", "))
}

impl Resolver {
    fn declare(&mut self, name: &str, kind: Kind, pos: Pos) -> Result<(), Error> {
        if name == ARG_COUNT || name == EXIT_STATUS {
            return Err(Error::static_error(
                pos,
                format!("`{name}` is a numerical constant and cannot be used as {kind}"),
            ));
        }
        match self.table.kinds.get(name) {
            None => {
                self.table.kinds.insert(name.to_string(), (kind, pos));
                Ok(())
            }
            Some(&(k, _)) if k == kind => Ok(()),
            Some(&(k, first)) => {
                let origin = if first == Pos::default() {
                    "predefined".to_string()
                } else {
                    format!("first used at {first}")
                };
                Err(Error::static_error(
                    pos,
                    format!("`{name}` is {k} ({origin}) and cannot be used as {kind}"),
                ))
            }
        }
    }

    fn sort(&self, e: &Expr) -> Sort {
        match &e.kind {
            ExprKind::Ident(name) if name == ARG_COUNT || name == EXIT_STATUS => Sort::Num,
            ExprKind::Ident(name) => match self.table.kind(name) {
                Some(Kind::StrVar) => Sort::Str,
                Some(Kind::NumVar) => Sort::Num,
                Some(Kind::RelVar) => Sort::Rel,
                Some(Kind::Attribute) | None => Sort::Term,
            },
            ExprKind::Anon => Sort::Term,
            ExprKind::Str(_) | ExprKind::Arg(_) => Sort::Str,
            ExprKind::Num(_) | ExprKind::Neg(_) => Sort::Num,
            ExprKind::Call { .. }
            | ExprKind::InfixAtom { .. }
            | ExprKind::Regex { .. }
            | ExprKind::Compare { .. }
            | ExprKind::Not(_)
            | ExprKind::Quantified { .. }
            | ExprKind::Closure { .. } => Sort::Rel,
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinaryOp::And | BinaryOp::Or | BinaryOp::Implies | BinaryOp::Iff => Sort::Rel,
                BinaryOp::Add if self.sort(lhs) == Sort::Str || self.sort(rhs) == Sort::Str => {
                    Sort::Str
                }
                _ => Sort::Num,
            },
            ExprKind::Func { func: Func::String, .. } => Sort::Str,
            ExprKind::Func { .. } => Sort::Num,
        }
    }

    fn term(&mut self, e: &Expr) -> Result<Term, Error> {
        match &e.kind {
            ExprKind::Anon => Ok(Term::Anon(e.pos)),
            ExprKind::Ident(name) => match self.table.kind(name) {
                Some(Kind::StrVar) => Ok(Term::Str(StrExpr {
                    kind: StrKind::Var(name.clone()),
                    pos: e.pos,
                })),
                _ => {
                    self.declare(name, Kind::Attribute, e.pos)?;
                    Ok(Term::Attr(name.clone(), e.pos))
                }
            },
            _ if self.sort(e) == Sort::Str => Ok(Term::Str(self.str_expr(e)?)),
            _ => Err(Error::static_error(
                e.pos,
                format!("expected a term (attribute, `_` or string), found `{e}`"),
            )),
        }
    }

    fn str_expr(&mut self, e: &Expr) -> Result<StrExpr, Error> {
        let kind = match &e.kind {
            ExprKind::Str(s) => StrKind::Lit(s.clone()),
            ExprKind::Ident(name) => {
                self.declare(name, Kind::StrVar, e.pos)?;
                StrKind::Var(name.clone())
            }
            ExprKind::Func { func: Func::String, arg } => {
                StrKind::FromNum(Box::new(self.num_expr(arg)?))
            }
            ExprKind::Arg(n) => StrKind::Arg(Box::new(self.num_expr(n)?)),
            ExprKind::Binary { op: BinaryOp::Add, lhs, rhs } => StrKind::Concat(
                Box::new(self.str_expr(lhs)?),
                Box::new(self.str_expr(rhs)?),
            ),
            _ => {
                return Err(Error::static_error(
                    e.pos,
                    format!("expected a string expression, found `{e}`"),
                ))
            }
        };
        Ok(StrExpr { kind, pos: e.pos })
    }

    fn num_expr(&mut self, e: &Expr) -> Result<NumExpr, Error> {
        let kind = match &e.kind {
            ExprKind::Num(n) => NumKind::Lit(*n),
            ExprKind::Ident(name) if name == ARG_COUNT => NumKind::ArgCount,
            ExprKind::Ident(name) if name == EXIT_STATUS => NumKind::ExitStatus,
            ExprKind::Ident(name) => {
                self.declare(name, Kind::NumVar, e.pos)?;
                NumKind::Var(name.clone())
            }
            ExprKind::Neg(a) => NumKind::Neg(Box::new(self.num_expr(a)?)),
            ExprKind::Binary { op, lhs, rhs }
                if !matches!(
                    op,
                    BinaryOp::And | BinaryOp::Or | BinaryOp::Implies | BinaryOp::Iff
                ) && self.sort(e) == Sort::Num =>
            {
                NumKind::Binary(
                    *op,
                    Box::new(self.num_expr(lhs)?),
                    Box::new(self.num_expr(rhs)?),
                )
            }
            ExprKind::Func { func, arg } => match func {
                Func::Number => NumKind::FromStr(Box::new(self.str_expr(arg)?)),
                Func::Count => NumKind::Count(Box::new(self.rel_expr(arg)?)),
                Func::String => {
                    return Err(Error::static_error(
                        e.pos,
                        "expected a numerical expression, found STRING(...)",
                    ))
                }
                Func::Min | Func::Max | Func::Sum | Func::Avg => {
                    let rel = self.rel_expr(arg)?;
                    let free = free_attributes(&rel);
                    if free.len() != 1 {
                        return Err(Error::static_error(
                            e.pos,
                            format!(
                                "{} needs exactly one free attribute, found {}",
                                func.name(),
                                attr_set(free)
                            ),
                        ));
                    }
                    let agg = match func {
                        Func::Min => Aggregate::Min,
                        Func::Max => Aggregate::Max,
                        Func::Sum => Aggregate::Sum,
                        _ => Aggregate::Avg,
                    };
                    NumKind::Aggregate(agg, Box::new(rel))
                }
            },
            _ => {
                return Err(Error::static_error(
                    e.pos,
                    format!("expected a numerical expression, found `{e}`"),
                ))
            }
        };
        Ok(NumExpr { kind, pos: e.pos })
    }

    fn atom(&mut self, name: &str, args: &[&Expr], pos: Pos) -> Result<RelKind, Error> {
        let terms = |r: &mut Self| -> Result<Vec<Term>, Error> {
            args.iter().map(|a| r.term(a)).collect()
        };
        Ok(match name {
            "TRUE" | "FALSE" => RelKind::Predefined {
                value: name == "TRUE",
                terms: terms(self)?,
            },
            _ => {
                self.declare(name, Kind::RelVar, pos)?;
                RelKind::Atom {
                    rel: name.to_string(),
                    terms: terms(self)?,
                }
            }
        })
    }

    fn rel_expr(&mut self, e: &Expr) -> Result<RelExpr, Error> {
        let b = Box::new;
        let kind = match &e.kind {
            ExprKind::Call { name, args } => {
                self.atom(name, &args.iter().collect::<Vec<_>>(), e.pos)?
            }
            ExprKind::InfixAtom { name, lhs, rhs } => self.atom(name, &[lhs, rhs], e.pos)?,
            ExprKind::Regex { pattern, term } => RelKind::Regex {
                pattern: self.str_expr(pattern)?,
                term: self.term(term)?,
            },
            ExprKind::Compare { op, lhs, rhs, .. } => self.compare(*op, lhs, rhs, e.pos)?,
            ExprKind::Not(a) => RelKind::Not(b(self.rel_expr(a)?)),
            ExprKind::Binary { op, lhs, rhs } => {
                let op = match op {
                    BinaryOp::And => BoolOp::And,
                    BinaryOp::Or => BoolOp::Or,
                    BinaryOp::Implies => BoolOp::Implies,
                    BinaryOp::Iff => BoolOp::Iff,
                    _ => {
                        return Err(Error::static_error(
                            e.pos,
                            format!("expected a relational expression, found `{e}`"),
                        ))
                    }
                };
                RelKind::Bool {
                    op,
                    lhs: b(self.rel_expr(lhs)?),
                    rhs: b(self.rel_expr(rhs)?),
                }
            }
            ExprKind::Quantified { kind, attr, attr_pos, body } => {
                self.declare(attr, Kind::Attribute, *attr_pos)?;
                RelKind::Quantified {
                    kind: *kind,
                    attr: attr.clone(),
                    body: b(self.rel_expr(body)?),
                }
            }
            ExprKind::Closure { fast, body } => {
                let body = self.rel_expr(body)?;
                let free = free_attributes(&body);
                if free.len() != 2 {
                    let name = if *fast { "TCFAST" } else { "TC" };
                    return Err(Error::static_error(
                        e.pos,
                        format!(
                            "{name} needs exactly two free attributes, found {}",
                            attr_set(free)
                        ),
                    ));
                }
                RelKind::Closure {
                    fast: *fast,
                    source: free[0].clone(),
                    target: free[1].clone(),
                    body: b(body),
                }
            }
            ExprKind::Ident(name) if self.table.kind(name) == Some(Kind::RelVar) => {
                return Err(Error::static_error(
                    e.pos,
                    format!("relational variable `{name}` needs a term list"),
                ))
            }
            _ => {
                return Err(Error::static_error(
                    e.pos,
                    format!("expected a relational expression, found `{e}`"),
                ))
            }
        };
        Ok(RelExpr { kind, pos: e.pos })
    }

    fn compare(&mut self, op: CmpOp, lhs: &Expr, rhs: &Expr, pos: Pos) -> Result<RelKind, Error> {
        let b = Box::new;
        let textual = |s| matches!(s, Sort::Term | Sort::Str);
        Ok(match (self.sort(lhs), self.sort(rhs)) {
            (l, r) if textual(l) && textual(r) => RelKind::Lexicographic {
                op,
                lhs: self.term(lhs)?,
                rhs: self.term(rhs)?,
            },
            (Sort::Num, Sort::Num) => RelKind::NumCompare {
                op,
                lhs: self.num_expr(lhs)?,
                rhs: self.num_expr(rhs)?,
            },
            (Sort::Rel, Sort::Rel) => RelKind::RelCompare {
                op,
                lhs: b(self.rel_expr(lhs)?),
                rhs: b(self.rel_expr(rhs)?),
            },
            (l, r) => {
                let name = |s| match s {
                    Sort::Rel => "a relation",
                    Sort::Str => "a string",
                    Sort::Num => "a number",
                    Sort::Term => "an attribute",
                };
                return Err(Error::static_error(
                    pos,
                    format!("cannot compare {} with {}", name(l), name(r)),
                ));
            }
        })
    }

    fn no_free(&self, cond: &RelExpr, what: &str) -> Result<(), Error> {
        let free = free_attributes(cond);
        if !free.is_empty() {
            return Err(Error::static_error(
                cond.pos,
                format!("{what} condition must not have free attributes, found {}", attr_set(free)),
            ));
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[ast::Stmt]) -> Result<Vec<Stmt>, Error> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: &ast::Stmt) -> Result<Stmt, Error> {
        let kind = match &s.kind {
            ast::StmtKind::RelAssign { rel, terms, value } => {
                if rel == "TRUE" || rel == "FALSE" {
                    return Err(Error::static_error(
                        s.pos,
                        format!("cannot assign to the predefined relation {rel}"),
                    ));
                }
                self.declare(rel, Kind::RelVar, s.pos)?;
                let mut lhs = Vec::new();
                for t in terms {
                    lhs.push(match &t.kind {
                        ExprKind::Str(lit) => LhsTerm::Lit(lit.clone()),
                        ExprKind::Ident(name) => {
                            self.declare(name, Kind::Attribute, t.pos)?;
                            LhsTerm::Attr(name.clone())
                        }
                        _ => {
                            return Err(Error::static_error(
                                t.pos,
                                format!(
                                    "left-hand side terms must be attributes or string literals, found `{t}`"
                                ),
                            ))
                        }
                    });
                }
                let value = self.rel_expr(value)?;
                let lhs_attrs: BTreeSet<String> = lhs
                    .iter()
                    .filter_map(|t| match t {
                        LhsTerm::Attr(a) => Some(a.clone()),
                        LhsTerm::Lit(_) => None,
                    })
                    .collect();
                let free: BTreeSet<String> = free_attributes(&value).into_iter().collect();
                if lhs_attrs != free {
                    return Err(Error::static_error(
                        s.pos,
                        format!(
                            "attributes {} on the left-hand side differ from the free attributes {} of the right-hand side",
                            attr_set(lhs_attrs),
                            attr_set(free)
                        ),
                    ));
                }
                StmtKind::RelAssign {
                    rel: rel.clone(),
                    lhs,
                    value,
                }
            }
            ast::StmtKind::VarAssign { name, value } => {
                let kind = match self.table.kind(name) {
                    Some(k) => k,
                    None => match self.sort(value) {
                        Sort::Str => Kind::StrVar,
                        Sort::Num => Kind::NumVar,
                        Sort::Rel => {
                            return Err(Error::static_error(
                                s.pos,
                                format!("relational assignment needs a term list: {name}(...) := ..."),
                            ))
                        }
                        Sort::Term => {
                            return Err(Error::static_error(
                                value.pos,
                                format!("cannot tell whether `{value}` is a string or a number"),
                            ))
                        }
                    },
                };
                if !matches!(kind, Kind::StrVar | Kind::NumVar) {
                    // Reports the kind conflict.
                    self.declare(name, Kind::StrVar, s.pos)?;
                }
                self.declare(name, kind, s.pos)?;
                if kind == Kind::StrVar {
                    StmtKind::StrAssign {
                        name: name.clone(),
                        value: self.str_expr(value)?,
                    }
                } else {
                    StmtKind::NumAssign {
                        name: name.clone(),
                        value: self.num_expr(value)?,
                    }
                }
            }
            ast::StmtKind::If { cond, then, otherwise } => {
                let cond = self.rel_expr(cond)?;
                self.no_free(&cond, "IF")?;
                StmtKind::If {
                    cond,
                    then: self.block(then)?,
                    otherwise: match otherwise {
                        Some(o) => self.block(o)?,
                        None => Vec::new(),
                    },
                }
            }
            ast::StmtKind::While { cond, body } => {
                let cond = self.rel_expr(cond)?;
                self.no_free(&cond, "WHILE")?;
                StmtKind::While {
                    cond,
                    body: self.block(body)?,
                }
            }
            ast::StmtKind::For { var, set, body } => {
                self.declare(var, Kind::StrVar, s.pos)?;
                let set = self.rel_expr(set)?;
                let free = free_attributes(&set);
                if free.len() != 1 {
                    return Err(Error::static_error(
                        set.pos,
                        format!(
                            "FOR expression needs exactly one free attribute, found {}",
                            attr_set(free)
                        ),
                    ));
                }
                StmtKind::For {
                    var: var.clone(),
                    set,
                    body: self.block(body)?,
                }
            }
            ast::StmtKind::Print { items, target } => {
                let mut out = Vec::new();
                for item in items {
                    out.push(match item {
                        ast::PrintItem::Endl(_) => PrintItem::Endl,
                        ast::PrintItem::RelInfo(e) => PrintItem::RelInfo(self.rel_expr(e)?),
                        ast::PrintItem::Prefixed { prefix, rel } => PrintItem::Tuples {
                            prefix: Some(self.str_expr(prefix)?),
                            rel: self.rel_expr(rel)?,
                        },
                        ast::PrintItem::Value(e) => match self.sort(e) {
                            Sort::Rel => PrintItem::Tuples {
                                prefix: None,
                                rel: self.rel_expr(e)?,
                            },
                            Sort::Num => PrintItem::Num(self.num_expr(e)?),
                            Sort::Str => PrintItem::Str(self.str_expr(e)?),
                            Sort::Term => match &e.kind {
                                ExprKind::Ident(name) if self.table.kind(name).is_none() => {
                                    PrintItem::Str(self.str_expr(e)?)
                                }
                                _ => {
                                    return Err(Error::static_error(
                                        e.pos,
                                        format!("cannot print attribute `{e}`"),
                                    ))
                                }
                            },
                        },
                    });
                }
                let target = match target {
                    ast::PrintTarget::Stdout => PrintTarget::Stdout,
                    ast::PrintTarget::Stderr => PrintTarget::Stderr,
                    ast::PrintTarget::File(e) => PrintTarget::File(self.str_expr(e)?),
                };
                StmtKind::Print { items: out, target }
            }
            ast::StmtKind::Exec(e) => StmtKind::Exec(self.str_expr(e)?),
            ast::StmtKind::Exit(e) => StmtKind::Exit(self.num_expr(e)?),
            ast::StmtKind::Block(b) => StmtKind::Block(self.block(b)?),
        };
        Ok(Stmt { kind, pos: s.pos })
    }
}
