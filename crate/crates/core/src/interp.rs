//! Tree-walking execution of a resolved program.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::process::Command;

use regex::Regex;

use crate::error::Error;
use crate::frontend::ast::{BinaryOp, Pos};
use crate::frontend::ir::*;
use crate::frontend::lexer::numeric_prefix;
use crate::relation::{
    self, AttributeOrderLog, ClosureAlgorithm, Relation, RelationEngine, RelationError, TermValue,
};
use crate::rsf::{serialize_tuple, RsfError, RsfStream};

type Result<T> = std::result::Result<T, Error>;

trait At<T> {
    fn at(self, pos: Pos) -> Result<T>;
}

impl<T, E: Into<Error>> At<T> for std::result::Result<T, E> {
    fn at(self, pos: Pos) -> Result<T> {
        self.map_err(|e| e.into().at(pos))
    }
}

/// Groups RSF tuples into stored relations, rejecting a relation whose
/// lines disagree on the number of elements.
pub fn load_relations(
    engine: &RelationEngine,
    stream: &RsfStream,
) -> Result<HashMap<String, Relation>> {
    let mut grouped: HashMap<&str, (usize, Vec<Vec<&str>>)> = HashMap::new();
    for t in &stream.tuples {
        let arity = t.elements.len();
        let (expected, rows) = grouped
            .entry(t.relation.as_str())
            .or_insert_with(|| (arity, Vec::new()));
        if *expected != arity {
            return Err(RsfError::ArityMismatch {
                line: t.line,
                name: t.relation.clone(),
                expected: *expected,
                found: arity,
            }
            .into());
        }
        rows.push(t.elements.iter().map(|e| e.text.as_str()).collect());
    }
    grouped
        .into_iter()
        .map(|(name, (arity, rows))| {
            let rel = engine.from_string_tuples(arity, rows)?;
            Ok((name.to_string(), rel))
        })
        .collect()
}

/// `NUMBER(s)`: an optionally signed numeric literal spanning all of `s`,
/// otherwise 0.
pub fn parse_number(s: &str) -> f64 {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    match numeric_prefix(digits) {
        Some(len) if len == digits.len() => s.parse().unwrap_or(0.0),
        _ => 0.0,
    }
}

/// Integral values print without a fraction; very large or very small
/// magnitudes use exponent notation.
pub fn format_number(v: f64) -> String {
    const EXACT: f64 = 9_007_199_254_740_992.0;
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v.fract() == 0.0 && v.abs() < EXACT {
        format!("{}", v as i64)
    } else if v.abs() >= 1e16 || v.abs() < 1e-5 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

enum Flow {
    Next,
    Exit(i32),
}

pub struct Interpreter<'w> {
    engine: RelationEngine,
    rels: HashMap<String, Relation>,
    strs: HashMap<String, String>,
    nums: HashMap<String, f64>,
    args: Vec<String>,
    exit_status: f64,
    warnings: bool,
    file: String,
    out: &'w mut dyn Write,
    err: &'w mut dyn Write,
    files: HashMap<String, BufWriter<File>>,
    regexes: HashMap<String, Regex>,
    warned: HashSet<Pos>,
}

impl<'w> Interpreter<'w> {
    /// `file` names the program in diagnostics.
    pub fn new(
        engine: RelationEngine,
        rels: HashMap<String, Relation>,
        args: Vec<String>,
        warnings: bool,
        file: &str,
        out: &'w mut dyn Write,
        err: &'w mut dyn Write,
    ) -> Self {
        Interpreter {
            engine,
            rels,
            strs: HashMap::new(),
            nums: HashMap::new(),
            args,
            exit_status: 0.0,
            warnings,
            file: file.to_string(),
            out,
            err,
            files: HashMap::new(),
            regexes: HashMap::new(),
            warned: HashSet::new(),
        }
    }

    pub fn engine(&self) -> &RelationEngine {
        &self.engine
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.rels.get(name)
    }

    /// Runs the program and returns the process exit status.
    pub fn run(&mut self, program: &Program) -> Result<i32> {
        let flow = self.block(&program.stmts);
        let flushed = self.flush_all();
        let status = match flow? {
            Flow::Next => 0,
            Flow::Exit(n) => n,
        };
        flushed?;
        Ok(status)
    }

    fn flush_all(&mut self) -> Result<()> {
        let io = |e: std::io::Error| Error::input(format!("cannot write output: {e}"));
        self.out.flush().map_err(io)?;
        self.err.flush().map_err(io)?;
        for (name, f) in &mut self.files {
            f.flush()
                .map_err(|e| Error::input(format!("cannot write to file {name}: {e}")))?;
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Flow> {
        for s in stmts {
            if let Flow::Exit(n) = self.stmt(s)? {
                return Ok(Flow::Exit(n));
            }
        }
        Ok(Flow::Next)
    }

    fn condition(&mut self, cond: &RelExpr) -> Result<bool> {
        let r = self.rel(cond, &mut AttributeOrderLog::new())?;
        Ok(!r.is_empty())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<Flow> {
        match &s.kind {
            StmtKind::RelAssign { rel, lhs, value } => {
                let value = self.rel(value, &mut AttributeOrderLog::new())?;
                let lhs: Vec<relation::LhsTerm> = lhs
                    .iter()
                    .map(|t| match t {
                        LhsTerm::Attr(a) => relation::LhsTerm::Attr(a.clone()),
                        LhsTerm::Lit(l) => relation::LhsTerm::Const(l.clone()),
                    })
                    .collect();
                let new = match self.engine.assign(self.rels.get(rel), &lhs, &value) {
                    Err(RelationError::ArityMismatch { stored, used }) => {
                        return Err(Error::runtime(
                            s.pos,
                            format!("relation {rel} has arity {stored}, but {used} terms were given"),
                        ))
                    }
                    other => other.at(s.pos)?,
                };
                self.rels.insert(rel.clone(), new);
            }
            StmtKind::StrAssign { name, value } => {
                let v = self.str(value)?;
                self.strs.insert(name.clone(), v);
            }
            StmtKind::NumAssign { name, value } => {
                let v = self.num(value)?;
                self.nums.insert(name.clone(), v);
            }
            StmtKind::If { cond, then, otherwise } => {
                let branch = if self.condition(cond)? { then } else { otherwise };
                return self.block(branch);
            }
            StmtKind::While { cond, body } => {
                while self.condition(cond)? {
                    if let Flow::Exit(n) = self.block(body)? {
                        return Ok(Flow::Exit(n));
                    }
                }
            }
            StmtKind::For { var, set, body } => {
                let r = self.rel(set, &mut AttributeOrderLog::new())?;
                let members = self.engine.unary_strings(&r).at(set.pos)?;
                for m in members {
                    self.strs.insert(var.clone(), m);
                    if let Flow::Exit(n) = self.block(body)? {
                        return Ok(Flow::Exit(n));
                    }
                }
            }
            StmtKind::Print { items, target } => self.print(items, target, s.pos)?,
            StmtKind::Exec(cmd) => {
                let cmd = self.str(cmd)?;
                self.exec(&cmd, s.pos)?;
            }
            StmtKind::Exit(code) => {
                let v = self.num(code)?;
                let n = if v.is_nan() { 0.0 } else { v.trunc().clamp(0.0, 255.0) };
                return Ok(Flow::Exit(n as i32));
            }
            StmtKind::Block(b) => return self.block(b),
        }
        Ok(Flow::Next)
    }

    fn print(&mut self, items: &[PrintItem], target: &PrintTarget, pos: Pos) -> Result<()> {
        let mut text = String::new();
        for item in items {
            match item {
                PrintItem::Endl => text.push('\n'),
                PrintItem::Str(e) => text.push_str(&self.str(e)?),
                PrintItem::Num(e) => text.push_str(&format_number(self.num(e)?)),
                PrintItem::RelInfo(e) => {
                    let r = self.rel(e, &mut AttributeOrderLog::new())?;
                    text.push_str(&self.engine.relinfo(&r).to_string());
                }
                PrintItem::Tuples { prefix, rel } => {
                    let prefix = prefix.as_ref().map(|p| self.str(p)).transpose()?;
                    let r = self.rel(rel, &mut AttributeOrderLog::new())?;
                    let universe = self.engine.universe();
                    for tuple in self.engine.index_tuples(&r) {
                        let elements: Vec<(&str, bool)> = tuple
                            .iter()
                            .map(|&i| (universe.get(i), universe.is_quoted(i)))
                            .collect();
                        text.push_str(&serialize_tuple(prefix.as_deref(), &elements).at(rel.pos)?);
                    }
                }
            }
        }
        let failed = |what: &str, e: std::io::Error| Error::runtime(pos, format!("cannot write to {what}: {e}"));
        match target {
            PrintTarget::Stdout => {
                self.out.write_all(text.as_bytes()).map_err(|e| failed("standard output", e))?;
                self.out.flush().map_err(|e| failed("standard output", e))?;
            }
            PrintTarget::Stderr => {
                self.err.write_all(text.as_bytes()).map_err(|e| failed("standard error", e))?;
                self.err.flush().map_err(|e| failed("standard error", e))?;
            }
            PrintTarget::File(name) => {
                let name = self.str(name)?;
                if !self.files.contains_key(&name) {
                    let f = OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&name)
                        .map_err(|e| failed(&format!("file {name}"), e))?;
                    self.files.insert(name.clone(), BufWriter::new(f));
                }
                let f = self.files.get_mut(&name).expect("opened above");
                f.write_all(text.as_bytes()).map_err(|e| failed(&format!("file {name}"), e))?;
            }
        }
        Ok(())
    }

    fn exec(&mut self, cmd: &str, pos: Pos) -> Result<()> {
        self.flush_all().map_err(|e| e.at(pos))?;
        let output = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .output()
            .map_err(|e| Error::runtime(pos, format!("cannot run shell: {e}")))?;
        let failed = |e: std::io::Error| Error::runtime(pos, format!("cannot forward command output: {e}"));
        self.out.write_all(&output.stdout).map_err(failed)?;
        self.out.flush().map_err(failed)?;
        self.err.write_all(&output.stderr).map_err(failed)?;
        self.err.flush().map_err(failed)?;
        self.exit_status = match output.status.code() {
            Some(c) => c as f64,
            None => {
                #[cfg(unix)]
                {
                    use std::os::unix::process::ExitStatusExt;
                    128.0 + output.status.signal().unwrap_or(0) as f64
                }
                #[cfg(not(unix))]
                {
                    1.0
                }
            }
        };
        Ok(())
    }

    fn term(&mut self, t: &Term) -> Result<TermValue> {
        Ok(match t {
            Term::Attr(name, _) => TermValue::Attr(name.clone()),
            Term::Anon(_) => TermValue::Anonymous,
            Term::Str(e) => TermValue::Const(self.str(e)?),
        })
    }

    fn terms(&mut self, ts: &[Term]) -> Result<Vec<TermValue>> {
        ts.iter().map(|t| self.term(t)).collect()
    }

    fn regex(&mut self, pattern: &str, pos: Pos) -> Result<&Regex> {
        if !self.regexes.contains_key(pattern) {
            let re = Regex::new(pattern).map_err(|e| {
                Error::runtime(pos, format!("invalid regular expression \"{pattern}\": {e}"))
            })?;
            self.regexes.insert(pattern.to_string(), re);
        }
        Ok(&self.regexes[pattern])
    }

    fn rel(&mut self, e: &RelExpr, log: &mut AttributeOrderLog) -> Result<Relation> {
        let pos = e.pos;
        match &e.kind {
            RelKind::Atom { rel, terms } => {
                let terms = self.terms(terms)?;
                let stored = match self.rels.get(rel) {
                    Some(r) if r.arity() != terms.len() => {
                        return Err(Error::runtime(
                            pos,
                            format!(
                                "relation {rel} has arity {}, but {} terms were given",
                                r.arity(),
                                terms.len()
                            ),
                        ))
                    }
                    Some(r) => r.clone(),
                    None => {
                        if self.warnings && self.warned.insert(pos) {
                            let _ = writeln!(
                                self.err,
                                "Warning: {}:{pos}: relation {rel} is undefined and treated as empty.",
                                self.file
                            );
                        }
                        self.engine.empty_stored(terms.len())
                    }
                };
                self.engine.atom(&stored, &terms, log).at(pos)
            }
            RelKind::Predefined { value, terms } => {
                let terms = self.terms(terms)?;
                self.engine.predefined(*value, &terms, log).at(pos)
            }
            RelKind::Lexicographic { op, lhs, rhs } => {
                let (l, r) = (self.term(lhs)?, self.term(rhs)?);
                self.engine.lexicographic(*op, &l, &r, log).at(pos)
            }
            RelKind::Regex { pattern, term } => {
                let pattern = self.str(pattern)?;
                let term = self.term(term)?;
                let re = self.regex(&pattern, pos)?.clone();
                self.engine.select_strings(|s| re.is_match(s), &term, log).at(pos)
            }
            RelKind::NumCompare { op, lhs, rhs } => {
                let (a, b) = (self.num(lhs)?, self.num(rhs)?);
                Ok(self.engine.boolean(op.holds(a, b)))
            }
            RelKind::RelCompare { op, lhs, rhs } => {
                let a = self.rel(lhs, log)?;
                let b = self.rel(rhs, log)?;
                let holds = self.engine.compare(*op, &a, &b).at(pos)?;
                Ok(self.engine.boolean(holds))
            }
            RelKind::Not(a) => {
                let a = self.rel(a, log)?;
                self.engine.negate(&a).at(pos)
            }
            RelKind::Bool { op, lhs, rhs } => {
                let a = self.rel(lhs, log)?;
                let b = self.rel(rhs, log)?;
                self.engine.combine(*op, &a, &b).at(pos)
            }
            RelKind::Quantified { kind, attr, body } => {
                let a = self.rel(body, log)?;
                self.engine.quantify(*kind, attr, &a).at(pos)
            }
            RelKind::Closure { fast, source, target, body } => {
                let a = self.rel(body, log)?;
                let algorithm = if *fast {
                    ClosureAlgorithm::Squaring
                } else {
                    ClosureAlgorithm::Warshall
                };
                self.engine.transitive_closure(&a, source, target, algorithm).at(pos)
            }
        }
    }

    fn str(&mut self, e: &StrExpr) -> Result<String> {
        Ok(match &e.kind {
            StrKind::Lit(s) => s.clone(),
            StrKind::Var(name) => match self.strs.get(name) {
                Some(s) => s.clone(),
                None => {
                    return Err(Error::runtime(
                        e.pos,
                        format!("string variable {name} is used before it is assigned"),
                    ))
                }
            },
            StrKind::FromNum(n) => format_number(self.num(n)?),
            StrKind::Arg(n) => {
                let k = self.num(n)?.round();
                if !(k >= 1.0 && k <= self.args.len() as f64) {
                    return Err(Error::runtime(
                        e.pos,
                        format!(
                            "argument ${} does not exist (argCount = {})",
                            format_number(k),
                            self.args.len()
                        ),
                    ));
                }
                self.args[k as usize - 1].clone()
            }
            StrKind::Concat(a, b) => {
                let mut s = self.str(a)?;
                s.push_str(&self.str(b)?);
                s
            }
        })
    }

    fn num(&mut self, e: &NumExpr) -> Result<f64> {
        let pos = e.pos;
        Ok(match &e.kind {
            NumKind::Lit(v) => *v,
            NumKind::Var(name) => match self.nums.get(name) {
                Some(v) => *v,
                None => {
                    return Err(Error::runtime(
                        pos,
                        format!("numerical variable {name} is used before it is assigned"),
                    ))
                }
            },
            NumKind::ArgCount => self.args.len() as f64,
            NumKind::ExitStatus => self.exit_status,
            NumKind::FromStr(s) => parse_number(&self.str(s)?),
            NumKind::Count(r) => {
                let r = self.rel(r, &mut AttributeOrderLog::new())?;
                self.engine.cardinality(&r) as f64
            }
            NumKind::Aggregate(kind, r) => {
                let r = self.rel(r, &mut AttributeOrderLog::new())?;
                let values: Vec<f64> = self
                    .engine
                    .unary_strings(&r)
                    .at(pos)?
                    .iter()
                    .map(|s| parse_number(s))
                    .collect();
                if values.is_empty() {
                    return Err(Error::runtime(pos, "aggregation over an empty relation"));
                }
                match kind {
                    Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
                    Aggregate::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    Aggregate::Sum => values.iter().sum(),
                    Aggregate::Avg => values.iter().sum::<f64>() / values.len() as f64,
                }
            }
            NumKind::Neg(a) => -self.num(a)?,
            NumKind::Binary(op, a, b) => {
                let (a, b) = (self.num(a)?, self.num(b)?);
                let nonzero = |what: &str| {
                    if b == 0.0 {
                        Err(Error::runtime(pos, format!("{what} by zero")))
                    } else {
                        Ok(())
                    }
                };
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        nonzero("division")?;
                        a / b
                    }
                    BinaryOp::IntDiv => {
                        nonzero("integer division")?;
                        (a / b).trunc()
                    }
                    BinaryOp::Mod => {
                        nonzero("modulo")?;
                        a % b
                    }
                    BinaryOp::Pow => a.powf(b),
                    BinaryOp::And | BinaryOp::Or | BinaryOp::Implies | BinaryOp::Iff => {
                        unreachable!("logical operators are relational")
                    }
                }
            }
        })
    }
}
