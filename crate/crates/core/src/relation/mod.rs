//! Relations over the universe, represented as BDDs.
//!
//! Every attribute occupies one block of `bits_per_attribute` consecutive
//! levels; block `k` covers levels `k*bits .. (k+1)*bits`. Stored relations
//! use blocks `0..arity` (the internal attributes `i1..in`). While a
//! statement is evaluated, each user attribute is given the next free block
//! in the order it is first encountered ([`AttributeOrderLog`]), so
//! operands of `&`, `|`, ... line up without renaming.
//!
//! All relation roots are kept restricted to valid indices (`< |U|`) in
//! every attribute block, so satisfying-assignment counts are tuple counts.

mod closure;
mod encode;
mod universe;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

pub use closure::ClosureAlgorithm;
pub use universe::Universe;

use crate::bdd::{Bdd, BddManager, Level, NodeStats, OutOfMemory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    /// The operator with swapped operands: `a op b == b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn holds<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// An attribute name together with the block it occupies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub block: u32,
}

/// A relation value: attributes sorted by block, and the BDD root.
#[derive(Clone)]
pub struct Relation {
    attrs: Vec<Attribute>,
    root: Bdd,
}

impl Relation {
    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.attrs.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn root(&self) -> &Bdd {
        &self.root
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_false()
    }

    fn block_of(&self, name: &str) -> Option<u32> {
        self.attrs.iter().find(|a| a.name == name).map(|a| a.block)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Relation")
            .field("attrs", &self.attrs)
            .field("root", &self.root)
            .finish()
    }
}

/// User attributes in the order they were first encountered while
/// evaluating one statement; position = block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeOrderLog {
    names: Vec<String>,
}

impl AttributeOrderLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Block of `name`, registering it on first sight.
    pub fn block(&mut self, name: &str) -> u32 {
        match self.names.iter().position(|n| n == name) {
            Some(i) => i as u32,
            None => {
                self.names.push(name.to_string());
                (self.names.len() - 1) as u32
            }
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A term after evaluation of any string expression in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermValue {
    Attr(String),
    Const(String),
    Anonymous,
}

/// Left-hand-side position of a relational assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LhsTerm {
    Attr(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelationError {
    #[error(transparent)]
    OutOfMemory(#[from] OutOfMemory),
    #[error("relation has arity {stored}, but {used} terms were given")]
    ArityMismatch { stored: usize, used: usize },
    #[error("attribute {0} of the right-hand side does not occur on the left-hand side")]
    UnboundAttribute(String),
    #[error("transitive closure needs a binary relation, got attributes {0:?}")]
    NotBinary(Vec<String>),
    #[error("{0} needs a unary relation")]
    NotUnary(&'static str),
}

pub type Result<T, E = RelationError> = std::result::Result<T, E>;

/// The five quantities reported by `PRINT RELINFO(...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelInfo {
    pub tuples: u128,
    pub universe: usize,
    pub nodes: usize,
    pub stats: NodeStats,
    pub attribute_order: Vec<String>,
}

impl fmt::Display for RelInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Number of tuples in the relation: {}", self.tuples)?;
        writeln!(f, "Number of values (universe): {}", self.universe)?;
        writeln!(f, "Number of BDD nodes: {}", self.nodes)?;
        writeln!(
            f,
            "Percentage of free nodes in BDD package: {} / {} = {} %",
            self.stats.free, self.stats.total, self.stats.percent
        )?;
        write!(f, "Attribute order:")?;
        for a in &self.attribute_order {
            write!(f, " {a}")?;
        }
        writeln!(f)
    }
}

pub struct RelationEngine {
    mgr: BddManager,
    universe: Universe,
    domains: RefCell<HashMap<u32, Bdd>>,
    comparators: RefCell<HashMap<CmpOp, Bdd>>,
}

impl RelationEngine {
    pub fn new(universe: Universe, mgr: BddManager) -> Self {
        RelationEngine {
            mgr,
            universe,
            domains: RefCell::default(),
            comparators: RefCell::default(),
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn manager(&self) -> &BddManager {
        &self.mgr
    }

    fn bits(&self) -> u32 {
        self.universe.bits_per_attribute()
    }

    fn n(&self) -> u64 {
        self.universe.len() as u64
    }

    pub fn block_levels(&self, block: u32) -> impl Iterator<Item = Level> {
        let b = self.bits();
        block * b..(block + 1) * b
    }

    fn levels_of(&self, attrs: &[Attribute]) -> Vec<Level> {
        attrs.iter().flat_map(|a| self.block_levels(a.block)).collect()
    }

    /// Level pairs moving each block `from` to `to`.
    fn block_moves(&self, moves: &[(u32, u32)]) -> Vec<(Level, Level)> {
        moves
            .iter()
            .flat_map(|&(from, to)| self.block_levels(from).zip(self.block_levels(to)))
            .collect()
    }

    fn internal_attrs(arity: usize) -> Vec<Attribute> {
        (0..arity)
            .map(|i| Attribute {
                name: format!("i{}", i + 1),
                block: i as u32,
            })
            .collect()
    }

    /// Valid indices in one block.
    pub fn domain_constraint(&self, block: u32) -> Result<Bdd> {
        if let Some(d) = self.domains.borrow().get(&block) {
            return Ok(d.clone());
        }
        let (bits, n) = (self.bits(), self.n());
        let d = self
            .mgr
            .run(|s| encode::interval(s, block * bits, bits, 0, n))?;
        self.domains.borrow_mut().insert(block, d.clone());
        Ok(d)
    }

    fn domain_of(&self, attrs: &[Attribute]) -> Result<Bdd> {
        let mut acc = self.mgr.top();
        for a in attrs {
            acc = self.mgr.and(&acc, &self.domain_constraint(a.block)?)?;
        }
        Ok(acc)
    }

    fn stored(&self, arity: usize, root: Bdd) -> Relation {
        Relation {
            attrs: Self::internal_attrs(arity),
            root,
        }
    }

    pub fn empty_stored(&self, arity: usize) -> Relation {
        self.stored(arity, self.mgr.bot())
    }

    pub fn full_stored(&self, arity: usize) -> Result<Relation> {
        let attrs = Self::internal_attrs(arity);
        let root = self.domain_of(&attrs)?;
        Ok(Relation { attrs, root })
    }

    /// 0-ary `TRUE()` or `FALSE()`.
    pub fn boolean(&self, value: bool) -> Relation {
        self.stored(0, self.mgr.constant(value))
    }

    /// Stored relation holding the given index tuples.
    pub fn from_index_tuples(&self, arity: usize, mut tuples: Vec<Vec<u32>>) -> Result<Relation> {
        tuples.sort_unstable();
        tuples.dedup();
        let bits = self.bits();
        let root = self
            .mgr
            .run(|s| encode::from_sorted_tuples(s, bits, arity, &tuples))?;
        Ok(self.stored(arity, root))
    }

    /// Stored relation holding tuples of universe strings; tuples with a
    /// string outside the universe are dropped.
    pub fn from_string_tuples<S: AsRef<str>>(
        &self,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<S>>,
    ) -> Result<Relation> {
        let indexed = tuples
            .into_iter()
            .filter_map(|t| {
                debug_assert_eq!(t.len(), arity);
                t.iter()
                    .map(|s| self.universe.index_of(s.as_ref()))
                    .collect::<Option<Vec<u32>>>()
            })
            .collect();
        self.from_index_tuples(arity, indexed)
    }

    fn cube(&self, fixed: &[(u32, u32)]) -> Result<Bdd> {
        let bits = self.bits();
        let mut acc = self.mgr.top();
        for &(block, value) in fixed {
            let p = self
                .mgr
                .run(|s| encode::point(s, block * bits, bits, value as u64))?;
            acc = self.mgr.and(&acc, &p)?;
        }
        Ok(acc)
    }

    fn block_equality(&self, a: u32, b: u32) -> Result<Bdd> {
        let (bits, n) = (self.bits(), self.n());
        Ok(self
            .mgr
            .run(|s| encode::compare_blocks(s, bits, n, a, b, CmpOp::Eq))?)
    }

    /// `rel(term, ...)` for a stored relation: constants select, `_`
    /// projects away, a repeated attribute forces equal columns, and the
    /// remaining internal attributes are renamed to user attributes.
    pub fn atom(
        &self,
        stored: &Relation,
        terms: &[TermValue],
        log: &mut AttributeOrderLog,
    ) -> Result<Relation> {
        if stored.arity() != terms.len() {
            return Err(RelationError::ArityMismatch {
                stored: stored.arity(),
                used: terms.len(),
            });
        }
        let bits = self.bits();
        let mut first: Vec<(&str, u32)> = Vec::new();
        let mut fixed = Vec::new();
        let mut missing_constant = false;
        let mut diagonals = Vec::new();
        let mut dropped = Vec::new();
        for (i, t) in terms.iter().enumerate() {
            let i = i as u32;
            match t {
                TermValue::Const(s) => match self.universe.index_of(s) {
                    Some(idx) => fixed.push((i, idx)),
                    None => missing_constant = true,
                },
                TermValue::Anonymous => dropped.push(i),
                TermValue::Attr(name) => match first.iter().find(|(n, _)| n == name) {
                    Some(&(_, j)) => diagonals.push((j, i)),
                    None => {
                        log.block(name);
                        first.push((name, i));
                    }
                },
            }
        }
        let mut attrs: Vec<Attribute> = first
            .iter()
            .map(|&(name, _)| Attribute {
                name: name.to_string(),
                block: log.block(name),
            })
            .collect();
        attrs.sort_by_key(|a| a.block);
        if missing_constant {
            return Ok(Relation {
                attrs,
                root: self.mgr.bot(),
            });
        }

        let mut f = stored.root.clone();
        if !fixed.is_empty() {
            let assignment: Vec<(Level, bool)> = fixed
                .iter()
                .flat_map(|&(block, idx)| {
                    (0..bits).map(move |k| (block * bits + k, (idx >> (bits - 1 - k)) & 1 == 1))
                })
                .collect();
            f = self.mgr.restrict(&f, &assignment)?;
        }
        for &(keep, other) in &diagonals {
            let eq = self.block_equality(keep, other)?;
            let levels: Vec<Level> = self.block_levels(other).collect();
            f = self.mgr.and_exists(&levels, &f, &eq)?;
        }
        if !dropped.is_empty() {
            let levels: Vec<Level> = dropped.iter().flat_map(|&b| self.block_levels(b)).collect();
            f = self.mgr.exists(&levels, &f)?;
        }
        let moves: Vec<(u32, u32)> = first
            .iter()
            .map(|&(name, pos)| (pos, log.block(name)))
            .collect();
        let root = self.mgr.rename(&f, &self.block_moves(&moves))?;
        Ok(Relation { attrs, root })
    }

    /// `TRUE(terms)` / `FALSE(terms)`: the full or empty relation of that
    /// arity, selected through the terms like any stored relation.
    pub fn predefined(
        &self,
        value: bool,
        terms: &[TermValue],
        log: &mut AttributeOrderLog,
    ) -> Result<Relation> {
        let stored = if value {
            self.full_stored(terms.len())?
        } else {
            self.empty_stored(terms.len())
        };
        self.atom(&stored, terms, log)
    }

    fn comparator(&self, op: CmpOp) -> Result<Bdd> {
        if let Some(c) = self.comparators.borrow().get(&op) {
            return Ok(c.clone());
        }
        let (bits, n) = (self.bits(), self.n());
        let c = self
            .mgr
            .run(|s| encode::compare_blocks(s, bits, n, 0, 1, op))?;
        self.comparators.borrow_mut().insert(op, c.clone());
        Ok(c)
    }

    /// The predefined order relations `=`, `!=`, `<`, ... on the universe.
    pub fn lexicographic(
        &self,
        op: CmpOp,
        lhs: &TermValue,
        rhs: &TermValue,
        log: &mut AttributeOrderLog,
    ) -> Result<Relation> {
        let stored = self.stored(2, self.comparator(op)?);
        self.atom(&stored, &[lhs.clone(), rhs.clone()], log)
    }

    /// Universe strings accepted by `matches`, selected through `term`.
    pub fn select_strings(
        &self,
        matches: impl Fn(&str) -> bool,
        term: &TermValue,
        log: &mut AttributeOrderLog,
    ) -> Result<Relation> {
        let hits: Vec<Vec<u32>> = self
            .universe
            .strings()
            .iter()
            .enumerate()
            .filter(|(_, s)| matches(s))
            .map(|(i, _)| vec![i as u32])
            .collect();
        let stored = self.from_index_tuples(1, hits)?;
        self.atom(&stored, std::slice::from_ref(term), log)
    }

    fn merged_attrs(a: &Relation, b: &Relation) -> Vec<Attribute> {
        let mut attrs = a.attrs.clone();
        for x in &b.attrs {
            if !attrs.iter().any(|y| y.name == x.name) {
                attrs.push(x.clone());
            }
        }
        attrs.sort_by_key(|a| a.block);
        attrs
    }

    /// Root of `r` as a relation over `attrs` (a superset of its own),
    /// with the extra attributes ranging over the universe.
    fn extend(&self, r: &Relation, attrs: &[Attribute]) -> Result<Bdd> {
        let extra: Vec<Attribute> = attrs
            .iter()
            .filter(|a| r.block_of(&a.name).is_none())
            .cloned()
            .collect();
        if extra.is_empty() {
            return Ok(r.root.clone());
        }
        Ok(self.mgr.and(&r.root, &self.domain_of(&extra)?)?)
    }

    pub fn combine(&self, op: BoolOp, a: &Relation, b: &Relation) -> Result<Relation> {
        let attrs = Self::merged_attrs(a, b);
        let root = match op {
            BoolOp::And => self.mgr.and(&a.root, &b.root)?,
            BoolOp::Or => {
                let (ea, eb) = (self.extend(a, &attrs)?, self.extend(b, &attrs)?);
                self.mgr.or(&ea, &eb)?
            }
            BoolOp::Implies => {
                let (ea, eb) = (self.extend(a, &attrs)?, self.extend(b, &attrs)?);
                let counter = self.mgr.diff(&ea, &eb)?;
                self.mgr.diff(&self.domain_of(&attrs)?, &counter)?
            }
            BoolOp::Iff => {
                let (ea, eb) = (self.extend(a, &attrs)?, self.extend(b, &attrs)?);
                let differ = self.mgr.xor(&ea, &eb)?;
                self.mgr.diff(&self.domain_of(&attrs)?, &differ)?
            }
        };
        Ok(Relation { attrs, root })
    }

    pub fn negate(&self, a: &Relation) -> Result<Relation> {
        let root = self.mgr.diff(&self.domain_of(&a.attrs)?, &a.root)?;
        Ok(Relation {
            attrs: a.attrs.clone(),
            root,
        })
    }

    /// `EX(attr, a)` / `FA(attr, a)`. Quantifying an attribute that is not
    /// free in `a` leaves `a` unchanged.
    pub fn quantify(&self, kind: Quantifier, attr: &str, a: &Relation) -> Result<Relation> {
        let Some(block) = a.block_of(attr) else {
            return Ok(a.clone());
        };
        match kind {
            Quantifier::Exists => {
                let levels: Vec<Level> = self.block_levels(block).collect();
                let root = self.mgr.exists(&levels, &a.root)?;
                let attrs = a.attrs.iter().filter(|x| x.name != attr).cloned().collect();
                Ok(Relation { attrs, root })
            }
            Quantifier::Forall => {
                let inner = self.negate(a)?;
                let ex = self.quantify(Quantifier::Exists, attr, &inner)?;
                self.negate(&ex)
            }
        }
    }

    /// Relational comparison. Both sides are compared as sets of
    /// assignments to the union of their attributes.
    pub fn compare(&self, op: CmpOp, a: &Relation, b: &Relation) -> Result<bool> {
        let (ea, eb) = if a.attrs == b.attrs {
            (a.root.clone(), b.root.clone())
        } else {
            let attrs = Self::merged_attrs(a, b);
            (self.extend(a, &attrs)?, self.extend(b, &attrs)?)
        };
        let subset = |x: &Bdd, y: &Bdd| -> Result<bool> { Ok(self.mgr.diff(x, y)?.is_false()) };
        Ok(match op {
            CmpOp::Eq => ea == eb,
            CmpOp::Ne => ea != eb,
            CmpOp::Le => subset(&ea, &eb)?,
            CmpOp::Lt => ea != eb && subset(&ea, &eb)?,
            CmpOp::Ge => subset(&eb, &ea)?,
            CmpOp::Gt => ea != eb && subset(&eb, &ea)?,
        })
    }

    pub fn cardinality(&self, a: &Relation) -> u128 {
        self.mgr.sat_count(&a.root, &self.levels_of(&a.attrs))
    }

    /// Tuples as universe indices, columns in attribute (block) order,
    /// rows in ascending lexicographic order.
    pub fn index_tuples(&self, a: &Relation) -> Vec<Vec<u32>> {
        let bits = self.bits() as usize;
        let levels = self.levels_of(&a.attrs);
        let arity = a.arity();
        let mut out = Vec::new();
        self.mgr.for_each_sat(&a.root, &levels, |assignment| {
            let tuple = (0..arity)
                .map(|k| {
                    assignment[k * bits..(k + 1) * bits]
                        .iter()
                        .fold(0u32, |acc, &bit| (acc << 1) | bit as u32)
                })
                .collect();
            out.push(tuple);
        });
        out
    }

    pub fn string_tuples(&self, a: &Relation) -> Vec<Vec<String>> {
        self.index_tuples(a)
            .into_iter()
            .map(|t| t.into_iter().map(|i| self.universe.get(i).to_string()).collect())
            .collect()
    }

    /// Result of assigning `value` to `rel(lhs...)`, given the previous
    /// content `old`. Constant positions only replace the slice of `old`
    /// that agrees with every constant.
    pub fn assign(
        &self,
        old: Option<&Relation>,
        lhs: &[LhsTerm],
        value: &Relation,
    ) -> Result<Relation> {
        let arity = lhs.len();
        let mut placed: Vec<(&str, u32)> = Vec::new();
        let mut diagonals = Vec::new();
        let mut fixed = Vec::new();
        for (i, t) in lhs.iter().enumerate() {
            let i = i as u32;
            match t {
                LhsTerm::Attr(name) => match placed.iter().find(|(n, _)| n == name) {
                    Some(&(_, j)) => diagonals.push((j, i)),
                    None => placed.push((name, i)),
                },
                LhsTerm::Const(s) => match self.universe.index_of(s) {
                    Some(idx) => fixed.push((i, idx)),
                    // Cannot happen for literals collected into the universe.
                    None => return Ok(old.cloned().unwrap_or_else(|| self.empty_stored(arity))),
                },
            }
        }
        let mut moves = Vec::new();
        for a in &value.attrs {
            match placed.iter().find(|(n, _)| *n == a.name) {
                Some(&(_, pos)) => moves.push((a.block, pos)),
                None => return Err(RelationError::UnboundAttribute(a.name.clone())),
            }
        }
        let mut root = self.mgr.rename(&value.root, &self.block_moves(&moves))?;
        // An LHS attribute absent from the value ranges over the universe.
        for &(name, pos) in &placed {
            if value.block_of(name).is_none() {
                root = self.mgr.and(&root, &self.domain_constraint(pos)?)?;
            }
        }
        for &(keep, other) in &diagonals {
            root = self.mgr.and(&root, &self.block_equality(keep, other)?)?;
        }
        if !fixed.is_empty() {
            let cube = self.cube(&fixed)?;
            root = self.mgr.and(&root, &cube)?;
            if let Some(old) = old {
                if old.arity() != arity {
                    return Err(RelationError::ArityMismatch {
                        stored: old.arity(),
                        used: arity,
                    });
                }
                let kept = self.mgr.diff(&old.root, &cube)?;
                root = self.mgr.or(&root, &kept)?;
            }
        }
        Ok(self.stored(arity, root))
    }

    /// Transitive closure of a binary relation, `source` being the
    /// attribute whose values start paths.
    pub fn transitive_closure(
        &self,
        a: &Relation,
        source: &str,
        target: &str,
        algorithm: ClosureAlgorithm,
    ) -> Result<Relation> {
        let (Some(sb), Some(tb)) = (a.block_of(source), a.block_of(target)) else {
            return Err(RelationError::NotBinary(
                a.attrs.iter().map(|x| x.name.clone()).collect(),
            ));
        };
        if a.arity() != 2 || sb == tb {
            return Err(RelationError::NotBinary(
                a.attrs.iter().map(|x| x.name.clone()).collect(),
            ));
        }
        let normalized = self.mgr.rename(&a.root, &self.block_moves(&[(sb, 0), (tb, 1)]))?;
        let closed = match algorithm {
            ClosureAlgorithm::Warshall => self.closure_warshall(normalized)?,
            ClosureAlgorithm::Squaring => self.closure_squaring(normalized)?,
        };
        let root = self.mgr.rename(&closed, &self.block_moves(&[(0, sb), (1, tb)]))?;
        Ok(Relation {
            attrs: a.attrs.clone(),
            root,
        })
    }

    /// Numeric fold over the members of a unary relation.
    pub fn unary_strings(&self, a: &Relation) -> Result<Vec<String>> {
        if a.arity() != 1 {
            return Err(RelationError::NotUnary("aggregation"));
        }
        Ok(self.string_tuples(a).into_iter().map(|mut t| t.remove(0)).collect())
    }

    pub fn relinfo(&self, a: &Relation) -> RelInfo {
        RelInfo {
            tuples: self.cardinality(a),
            universe: self.universe.len(),
            nodes: self.mgr.node_count(&a.root),
            stats: self.mgr.stats(),
            attribute_order: a.attrs.iter().map(|x| x.name.clone()).collect(),
        }
    }
}
