//! Surface syntax tree, as produced by the parser before identifier kinds
//! are known. `Display` prints source text that parses back to the same
//! tree.

use std::fmt;

use crate::relation::{CmpOp, Quantifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Implies,
    Iff,
    Or,
    And,
    Add,
    Sub,
    Mul,
    Div,
    IntDiv,
    Mod,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Implies => "->",
            BinaryOp::Iff => "<->",
            BinaryOp::Or => "|",
            BinaryOp::And => "&",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::IntDiv => "DIV",
            BinaryOp::Mod => "MOD",
            BinaryOp::Pow => "^",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Implies | BinaryOp::Iff => PREC_IMPLIES,
            BinaryOp::Or => PREC_OR,
            BinaryOp::And => PREC_AND,
            BinaryOp::Add | BinaryOp::Sub => PREC_ADD,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::IntDiv | BinaryOp::Mod => PREC_MUL,
            BinaryOp::Pow => PREC_POW,
        }
    }

    pub fn right_assoc(self) -> bool {
        self == BinaryOp::Pow
    }
}

pub const PREC_CMP: u8 = 1;
pub const PREC_IMPLIES: u8 = 2;
pub const PREC_OR: u8 = 3;
pub const PREC_AND: u8 = 4;
pub const PREC_NOT: u8 = 5;
pub const PREC_ADD: u8 = 6;
pub const PREC_MUL: u8 = 7;
pub const PREC_POW: u8 = 8;
pub const PREC_NEG: u8 = 9;
pub const PREC_INFIX: u8 = 10;
pub const PREC_DOLLAR: u8 = 11;
pub const PREC_ATOM: u8 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Number,
    String,
    Count,
    Min,
    Max,
    Sum,
    Avg,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Number => "NUMBER",
            Func::String => "STRING",
            Func::Count => "#",
            Func::Min => "MIN",
            Func::Max => "MAX",
            Func::Sum => "SUM",
            Func::Avg => "AVG",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    /// `_`
    Anon,
    Str(String),
    Num(f64),
    /// `name(args...)`, including `TRUE(...)` and `FALSE(...)`.
    Call { name: String, args: Vec<Expr> },
    /// `lhs name rhs`, short for `name(lhs, rhs)`.
    InfixAtom { name: String, lhs: Box<Expr>, rhs: Box<Expr> },
    /// `@pattern(term)`
    Regex { pattern: Box<Expr>, term: Box<Expr> },
    /// `lhs op rhs`, or `op(lhs, rhs)` when `prefix` is set.
    Compare { op: CmpOp, lhs: Box<Expr>, rhs: Box<Expr>, prefix: bool },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    /// `$n`
    Arg(Box<Expr>),
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    /// `EX(a, b, e)` is stored as `EX(a, EX(b, e))`.
    Quantified { kind: Quantifier, attr: String, attr_pos: Pos, body: Box<Expr> },
    Closure { fast: bool, body: Box<Expr> },
    Func { func: Func, arg: Box<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Compare { prefix: false, .. } => PREC_CMP,
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Not(_) => PREC_NOT,
            ExprKind::Neg(_) => PREC_NEG,
            ExprKind::Arg(_) => PREC_DOLLAR,
            ExprKind::InfixAtom { .. } => PREC_INFIX,
            _ => PREC_ATOM,
        }
    }

    /// Copy with every position reset, for comparing trees by shape.
    pub fn without_positions(&self) -> Expr {
        let b = |e: &Expr| Box::new(e.without_positions());
        let kind = match &self.kind {
            ExprKind::Call { name, args } => ExprKind::Call {
                name: name.clone(),
                args: args.iter().map(Expr::without_positions).collect(),
            },
            ExprKind::InfixAtom { name, lhs, rhs } => ExprKind::InfixAtom {
                name: name.clone(),
                lhs: b(lhs),
                rhs: b(rhs),
            },
            ExprKind::Regex { pattern, term } => ExprKind::Regex {
                pattern: b(pattern),
                term: b(term),
            },
            ExprKind::Compare { op, lhs, rhs, prefix } => ExprKind::Compare {
                op: *op,
                lhs: b(lhs),
                rhs: b(rhs),
                prefix: *prefix,
            },
            ExprKind::Not(e) => ExprKind::Not(b(e)),
            ExprKind::Neg(e) => ExprKind::Neg(b(e)),
            ExprKind::Arg(e) => ExprKind::Arg(b(e)),
            ExprKind::Binary { op, lhs, rhs } => ExprKind::Binary {
                op: *op,
                lhs: b(lhs),
                rhs: b(rhs),
            },
            ExprKind::Quantified { kind, attr, body, .. } => ExprKind::Quantified {
                kind: *kind,
                attr: attr.clone(),
                attr_pos: Pos::default(),
                body: b(body),
            },
            ExprKind::Closure { fast, body } => ExprKind::Closure {
                fast: *fast,
                body: b(body),
            },
            ExprKind::Func { func, arg } => ExprKind::Func {
                func: *func,
                arg: b(arg),
            },
            leaf => leaf.clone(),
        };
        Expr::new(kind, Pos::default())
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

/// Writes `e`, parenthesized when it binds looser than `min`.
fn operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Writes a prefix operator and its operand, separated by a space when
/// the two would otherwise lex as one token (`!=`, `->`).
fn prefixed(f: &mut fmt::Formatter<'_>, op: &str, e: &Expr, min: u8) -> fmt::Result {
    let text = if e.precedence() < min {
        format!("({e})")
    } else {
        e.to_string()
    };
    let glued = matches!((op, text.chars().next()), ("!", Some('=')) | ("-", Some('>')));
    write!(f, "{op}{}{text}", if glued { " " } else { "" })
}

fn write_num(f: &mut fmt::Formatter<'_>, n: f64) -> fmt::Result {
    if n.is_finite() && n.fract() == 0.0 && n.abs() < 1e15 {
        write!(f, "{}", n as i64)
    } else {
        write!(f, "{n:e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Ident(s) => write!(f, "{s}"),
            ExprKind::Anon => write!(f, "_"),
            ExprKind::Str(s) => write!(f, "\"{s}\""),
            ExprKind::Num(n) => write_num(f, *n),
            ExprKind::Call { name, args } => {
                write!(f, "{name}(")?;
                write_list(f, args)?;
                write!(f, ")")
            }
            ExprKind::InfixAtom { name, lhs, rhs } => {
                operand(f, lhs, PREC_DOLLAR)?;
                write!(f, " {name} ")?;
                operand(f, rhs, PREC_DOLLAR)
            }
            ExprKind::Regex { pattern, term } => {
                match pattern.kind {
                    ExprKind::Str(_) | ExprKind::Ident(_) => write!(f, "@{pattern}({term})"),
                    _ => write!(f, "@({pattern})({term})"),
                }
            }
            ExprKind::Compare { op, lhs, rhs, prefix: true } => {
                write!(f, "{}({lhs}, {rhs})", op.symbol())
            }
            ExprKind::Compare { op, lhs, rhs, prefix: false } => {
                operand(f, lhs, PREC_CMP + 1)?;
                write!(f, " {} ", op.symbol())?;
                operand(f, rhs, PREC_CMP + 1)
            }
            ExprKind::Not(e) => prefixed(f, "!", e, PREC_NOT),
            ExprKind::Neg(e) => prefixed(f, "-", e, PREC_NEG),
            ExprKind::Arg(e) => {
                write!(f, "$")?;
                operand(f, e, PREC_DOLLAR)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let (lmin, rmin) = if op.right_assoc() { (p + 1, p) } else { (p, p + 1) };
                operand(f, lhs, lmin)?;
                write!(f, " {} ", op.symbol())?;
                operand(f, rhs, rmin)
            }
            ExprKind::Quantified { kind, attr, body, .. } => {
                let name = match kind {
                    Quantifier::Exists => "EX",
                    Quantifier::Forall => "FA",
                };
                write!(f, "{name}({attr}, {body})")
            }
            ExprKind::Closure { fast, body } => {
                write!(f, "{}({body})", if *fast { "TCFAST" } else { "TC" })
            }
            ExprKind::Func { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintItem {
    Endl(Pos),
    RelInfo(Expr),
    /// `[prefix] rel`
    Prefixed { prefix: Expr, rel: Expr },
    Value(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintTarget {
    Stdout,
    Stderr,
    File(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// `rel(terms) := value;` (a bare `rel(terms);` becomes `:= TRUE(terms)`).
    RelAssign { rel: String, terms: Vec<Expr>, value: Expr },
    /// `name := value;` for string and numeric variables.
    VarAssign { name: String, value: Expr },
    If { cond: Expr, then: Vec<Stmt>, otherwise: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    For { var: String, set: Expr, body: Vec<Stmt> },
    Print { items: Vec<PrintItem>, target: PrintTarget },
    Exec(Expr),
    Exit(Expr),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt]) -> fmt::Result {
    writeln!(f, "{{")?;
    for s in stmts {
        writeln!(f, "{s}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StmtKind::RelAssign { rel, terms, value } => {
                write!(f, "{rel}(")?;
                write_list(f, terms)?;
                write!(f, ") := {value};")
            }
            StmtKind::VarAssign { name, value } => write!(f, "{name} := {value};"),
            StmtKind::If { cond, then, otherwise } => {
                write!(f, "IF {cond} ")?;
                write_block(f, then)?;
                if let Some(e) = otherwise {
                    write!(f, " ELSE ")?;
                    write_block(f, e)?;
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                write!(f, "WHILE {cond} ")?;
                write_block(f, body)
            }
            StmtKind::For { var, set, body } => {
                write!(f, "FOR {var} IN {set} ")?;
                write_block(f, body)
            }
            StmtKind::Print { items, target } => {
                write!(f, "PRINT ")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    match item {
                        PrintItem::Endl(_) => write!(f, "ENDL")?,
                        PrintItem::RelInfo(e) => write!(f, "RELINFO({e})")?,
                        PrintItem::Prefixed { prefix, rel } => write!(f, "[{prefix}] {rel}")?,
                        PrintItem::Value(e) => write!(f, "{e}")?,
                    }
                }
                match target {
                    PrintTarget::Stdout => write!(f, ";"),
                    PrintTarget::Stderr => write!(f, " TO STDERR;"),
                    PrintTarget::File(e) => write!(f, " TO {e};"),
                }
            }
            StmtKind::Exec(e) => write!(f, "EXEC {e};"),
            StmtKind::Exit(e) => write!(f, "EXIT {e};"),
            StmtKind::Block(stmts) => write_block(f, stmts),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stmts {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Stmt {
    pub fn without_positions(&self) -> Stmt {
        let block = |b: &[Stmt]| b.iter().map(Stmt::without_positions).collect::<Vec<_>>();
        let kind = match &self.kind {
            StmtKind::RelAssign { rel, terms, value } => StmtKind::RelAssign {
                rel: rel.clone(),
                terms: terms.iter().map(Expr::without_positions).collect(),
                value: value.without_positions(),
            },
            StmtKind::VarAssign { name, value } => StmtKind::VarAssign {
                name: name.clone(),
                value: value.without_positions(),
            },
            StmtKind::If { cond, then, otherwise } => StmtKind::If {
                cond: cond.without_positions(),
                then: block(then),
                otherwise: otherwise.as_deref().map(block),
            },
            StmtKind::While { cond, body } => StmtKind::While {
                cond: cond.without_positions(),
                body: block(body),
            },
            StmtKind::For { var, set, body } => StmtKind::For {
                var: var.clone(),
                set: set.without_positions(),
                body: block(body),
            },
            StmtKind::Print { items, target } => StmtKind::Print {
                items: items
                    .iter()
                    .map(|i| match i {
                        PrintItem::Endl(_) => PrintItem::Endl(Pos::default()),
                        PrintItem::RelInfo(e) => PrintItem::RelInfo(e.without_positions()),
                        PrintItem::Prefixed { prefix, rel } => PrintItem::Prefixed {
                            prefix: prefix.without_positions(),
                            rel: rel.without_positions(),
                        },
                        PrintItem::Value(e) => PrintItem::Value(e.without_positions()),
                    })
                    .collect(),
                target: match target {
                    PrintTarget::File(e) => PrintTarget::File(e.without_positions()),
                    other => other.clone(),
                },
            },
            StmtKind::Exec(e) => StmtKind::Exec(e.without_positions()),
            StmtKind::Exit(e) => StmtKind::Exit(e.without_positions()),
            StmtKind::Block(b) => StmtKind::Block(block(b)),
        };
        Stmt {
            kind,
            pos: Pos::default(),
        }
    }
}

impl Program {
    pub fn without_positions(&self) -> Program {
        Program {
            stmts: self.stmts.iter().map(Stmt::without_positions).collect(),
        }
    }
}
