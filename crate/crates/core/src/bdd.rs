//! Reduced ordered binary decision diagrams over a fixed node budget.
//!
//! A [`BddManager`] owns a node arena whose capacity is fixed when the
//! manager is created. Nodes are hash-consed through a unique table, so two
//! [`Bdd`] handles denote the same boolean function iff they point at the
//! same node. There are two terminals and no complement edges.
//!
//! Handles are reference counted against the manager. When an operation
//! runs out of nodes, unreferenced nodes are collected and the operation is
//! retried once before [`OutOfMemory`] is reported.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use rustc_hash::{FxHashMap, FxHashSet};

pub type NodeId = u32;
pub type Level = u32;

pub(crate) const FALSE_ID: NodeId = 0;
pub(crate) const TRUE_ID: NodeId = 1;

const TERMINAL_LEVEL: Level = Level::MAX;
const FREED_LEVEL: Level = Level::MAX - 1;

/// Approximate cost of one node, including its share of the unique table.
pub const BYTES_PER_NODE: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("BDD package out of memory.")]
pub struct OutOfMemory;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BddError {
    #[error(transparent)]
    OutOfMemory(#[from] OutOfMemory),
    #[error("node at level {level} has a child at level {child_level}")]
    Ordering { level: Level, child_level: Level },
}

pub(crate) type OpResult = Result<NodeId, OutOfMemory>;

#[derive(Clone, Copy, Debug)]
struct Node {
    level: Level,
    low: NodeId,
    high: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BinOp {
    And,
    Or,
    Xor,
    /// `a & !b`
    Diff,
}

impl BinOp {
    fn tag(self) -> u32 {
        match self {
            BinOp::And => 2,
            BinOp::Or => 3,
            BinOp::Xor => 4,
            BinOp::Diff => 5,
        }
    }

    fn commutative(self) -> bool {
        !matches!(self, BinOp::Diff)
    }
}

const NOT_TAG: u32 = 1;

#[derive(Clone, Copy, Default)]
struct CacheEntry {
    tag: u32,
    a: NodeId,
    b: NodeId,
    result: NodeId,
}

/// Occupancy of the node arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeStats {
    pub free: usize,
    pub total: usize,
    pub percent: usize,
}

/// Set of levels with O(1) membership.
pub(crate) struct LevelSet {
    member: Vec<bool>,
    max: Option<Level>,
}

impl LevelSet {
    pub(crate) fn new(levels: &[Level]) -> Self {
        let max = levels.iter().copied().max();
        let mut member = vec![false; max.map_or(0, |m| m as usize + 1)];
        for &l in levels {
            member[l as usize] = true;
        }
        LevelSet { member, max }
    }

    fn contains(&self, level: Level) -> bool {
        self.member.get(level as usize).copied().unwrap_or(false)
    }

    /// True when no level at or below `level` is in the set.
    fn beyond(&self, level: Level) -> bool {
        match self.max {
            None => true,
            Some(m) => level > m,
        }
    }
}

pub(crate) struct Store {
    nodes: Vec<Node>,
    refs: Vec<u32>,
    free: Vec<NodeId>,
    unique: FxHashMap<(Level, NodeId, NodeId), NodeId>,
    cache: Vec<CacheEntry>,
    cache_mask: usize,
    capacity: usize,
    live: usize,
    collections: usize,
}

impl Store {
    fn new(capacity: usize) -> Self {
        let cache_size = (capacity / 4).next_power_of_two().clamp(1 << 12, 1 << 22);
        let terminal = Node {
            level: TERMINAL_LEVEL,
            low: FALSE_ID,
            high: FALSE_ID,
        };
        Store {
            nodes: vec![terminal, terminal],
            refs: vec![0, 0],
            free: Vec::new(),
            unique: FxHashMap::default(),
            cache: vec![CacheEntry::default(); cache_size],
            cache_mask: cache_size - 1,
            capacity,
            live: 0,
            collections: 0,
        }
    }

    #[inline]
    pub(crate) fn level(&self, id: NodeId) -> Level {
        self.nodes[id as usize].level
    }

    #[inline]
    fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    #[inline]
    fn is_terminal(id: NodeId) -> bool {
        id <= TRUE_ID
    }

    pub(crate) fn mk(&mut self, level: Level, low: NodeId, high: NodeId) -> OpResult {
        if low == high {
            return Ok(low);
        }
        debug_assert!(level < self.level(low) && level < self.level(high));
        let key = (level, low, high);
        if let Some(&id) = self.unique.get(&key) {
            return Ok(id);
        }
        if self.live >= self.capacity {
            return Err(OutOfMemory);
        }
        let node = Node { level, low, high };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                self.refs.push(0);
                (self.nodes.len() - 1) as NodeId
            }
        };
        self.live += 1;
        self.unique.insert(key, id);
        Ok(id)
    }

    fn cofactors(&self, id: NodeId, level: Level) -> (NodeId, NodeId) {
        let n = self.node(id);
        if n.level == level {
            (n.low, n.high)
        } else {
            (id, id)
        }
    }

    #[inline]
    fn cache_slot(&self, tag: u32, a: NodeId, b: NodeId) -> usize {
        let h = (a as u64)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
            .wrapping_add(tag as u64);
        ((h ^ (h >> 29)) as usize) & self.cache_mask
    }

    fn cache_get(&self, tag: u32, a: NodeId, b: NodeId) -> Option<NodeId> {
        let e = self.cache[self.cache_slot(tag, a, b)];
        (e.tag == tag && e.a == a && e.b == b).then_some(e.result)
    }

    fn cache_put(&mut self, tag: u32, a: NodeId, b: NodeId, result: NodeId) {
        let slot = self.cache_slot(tag, a, b);
        self.cache[slot] = CacheEntry { tag, a, b, result };
    }

    pub(crate) fn not(&mut self, a: NodeId) -> OpResult {
        match a {
            FALSE_ID => return Ok(TRUE_ID),
            TRUE_ID => return Ok(FALSE_ID),
            _ => {}
        }
        if let Some(r) = self.cache_get(NOT_TAG, a, 0) {
            return Ok(r);
        }
        let n = self.node(a);
        let lo = self.not(n.low)?;
        let hi = self.not(n.high)?;
        let r = self.mk(n.level, lo, hi)?;
        self.cache_put(NOT_TAG, a, 0, r);
        Ok(r)
    }

    pub(crate) fn apply(&mut self, op: BinOp, mut a: NodeId, mut b: NodeId) -> OpResult {
        match op {
            BinOp::And => {
                if a == FALSE_ID || b == FALSE_ID {
                    return Ok(FALSE_ID);
                }
                if a == TRUE_ID || a == b {
                    return Ok(b);
                }
                if b == TRUE_ID {
                    return Ok(a);
                }
            }
            BinOp::Or => {
                if a == TRUE_ID || b == TRUE_ID {
                    return Ok(TRUE_ID);
                }
                if a == FALSE_ID || a == b {
                    return Ok(b);
                }
                if b == FALSE_ID {
                    return Ok(a);
                }
            }
            BinOp::Xor => {
                if a == b {
                    return Ok(FALSE_ID);
                }
                if a == FALSE_ID {
                    return Ok(b);
                }
                if b == FALSE_ID {
                    return Ok(a);
                }
                if a == TRUE_ID {
                    return self.not(b);
                }
                if b == TRUE_ID {
                    return self.not(a);
                }
            }
            BinOp::Diff => {
                if a == FALSE_ID || b == TRUE_ID || a == b {
                    return Ok(FALSE_ID);
                }
                if b == FALSE_ID {
                    return Ok(a);
                }
                if a == TRUE_ID {
                    return self.not(b);
                }
            }
        }
        if op.commutative() && a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let tag = op.tag();
        if let Some(r) = self.cache_get(tag, a, b) {
            return Ok(r);
        }
        let top = self.level(a).min(self.level(b));
        let (a0, a1) = self.cofactors(a, top);
        let (b0, b1) = self.cofactors(b, top);
        let lo = self.apply(op, a0, b0)?;
        let hi = self.apply(op, a1, b1)?;
        let r = self.mk(top, lo, hi)?;
        self.cache_put(tag, a, b, r);
        Ok(r)
    }

    pub(crate) fn var(&mut self, level: Level) -> OpResult {
        self.mk(level, FALSE_ID, TRUE_ID)
    }

    /// `if v then p else q` where `v` is the variable at `level`.
    fn ite_var(&mut self, level: Level, p: NodeId, q: NodeId) -> OpResult {
        let v = self.var(level)?;
        let then_part = self.apply(BinOp::And, v, p)?;
        let else_part = self.apply(BinOp::Diff, q, v)?;
        self.apply(BinOp::Or, then_part, else_part)
    }

    pub(crate) fn exists(&mut self, a: NodeId, set: &LevelSet) -> OpResult {
        let mut memo = FxHashMap::default();
        self.exists_rec(a, set, &mut memo)
    }

    fn exists_rec(
        &mut self,
        a: NodeId,
        set: &LevelSet,
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> OpResult {
        if Self::is_terminal(a) || set.beyond(self.level(a)) {
            return Ok(a);
        }
        if let Some(&r) = memo.get(&a) {
            return Ok(r);
        }
        let n = self.node(a);
        let r = if set.contains(n.level) {
            let lo = self.exists_rec(n.low, set, memo)?;
            if lo == TRUE_ID {
                TRUE_ID
            } else {
                let hi = self.exists_rec(n.high, set, memo)?;
                self.apply(BinOp::Or, lo, hi)?
            }
        } else {
            let lo = self.exists_rec(n.low, set, memo)?;
            let hi = self.exists_rec(n.high, set, memo)?;
            self.mk(n.level, lo, hi)?
        };
        memo.insert(a, r);
        Ok(r)
    }

    /// Relational product: `exists set. (a & b)`.
    pub(crate) fn and_exists(&mut self, a: NodeId, b: NodeId, set: &LevelSet) -> OpResult {
        let mut memo = FxHashMap::default();
        let mut ex_memo = FxHashMap::default();
        self.and_exists_rec(a, b, set, &mut memo, &mut ex_memo)
    }

    fn and_exists_rec(
        &mut self,
        mut a: NodeId,
        mut b: NodeId,
        set: &LevelSet,
        memo: &mut FxHashMap<(NodeId, NodeId), NodeId>,
        ex_memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> OpResult {
        if a == FALSE_ID || b == FALSE_ID {
            return Ok(FALSE_ID);
        }
        if a == TRUE_ID || a == b {
            return self.exists_rec(b, set, ex_memo);
        }
        if b == TRUE_ID {
            return self.exists_rec(a, set, ex_memo);
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let top = self.level(a).min(self.level(b));
        if set.beyond(top) {
            return self.apply(BinOp::And, a, b);
        }
        if let Some(&r) = memo.get(&(a, b)) {
            return Ok(r);
        }
        let (a0, a1) = self.cofactors(a, top);
        let (b0, b1) = self.cofactors(b, top);
        let r = if set.contains(top) {
            let lo = self.and_exists_rec(a0, b0, set, memo, ex_memo)?;
            if lo == TRUE_ID {
                TRUE_ID
            } else {
                let hi = self.and_exists_rec(a1, b1, set, memo, ex_memo)?;
                self.apply(BinOp::Or, lo, hi)?
            }
        } else {
            let lo = self.and_exists_rec(a0, b0, set, memo, ex_memo)?;
            let hi = self.and_exists_rec(a1, b1, set, memo, ex_memo)?;
            self.mk(top, lo, hi)?
        };
        memo.insert((a, b), r);
        Ok(r)
    }

    /// Cofactor with respect to a partial assignment of levels.
    pub(crate) fn restrict(&mut self, a: NodeId, assignment: &[(Level, bool)]) -> OpResult {
        if assignment.is_empty() {
            return Ok(a);
        }
        let max = assignment.iter().map(|&(l, _)| l).max().unwrap_or(0);
        let mut values = vec![None; max as usize + 1];
        for &(l, v) in assignment {
            values[l as usize] = Some(v);
        }
        let mut memo = FxHashMap::default();
        self.restrict_rec(a, &values, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        a: NodeId,
        values: &[Option<bool>],
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> OpResult {
        if Self::is_terminal(a) || self.level(a) as usize >= values.len() {
            return Ok(a);
        }
        if let Some(&r) = memo.get(&a) {
            return Ok(r);
        }
        let n = self.node(a);
        let r = match values[n.level as usize] {
            Some(true) => self.restrict_rec(n.high, values, memo)?,
            Some(false) => self.restrict_rec(n.low, values, memo)?,
            None => {
                let lo = self.restrict_rec(n.low, values, memo)?;
                let hi = self.restrict_rec(n.high, values, memo)?;
                self.mk(n.level, lo, hi)?
            }
        };
        memo.insert(a, r);
        Ok(r)
    }

    pub(crate) fn support(&self, a: NodeId) -> Vec<Level> {
        let mut seen = FxHashSet::default();
        let mut levels = FxHashSet::default();
        let mut stack = vec![a];
        while let Some(id) = stack.pop() {
            if Self::is_terminal(id) || !seen.insert(id) {
                continue;
            }
            let n = self.node(id);
            levels.insert(n.level);
            stack.push(n.low);
            stack.push(n.high);
        }
        let mut levels: Vec<Level> = levels.into_iter().collect();
        levels.sort_unstable();
        levels
    }

    /// Moves every node at level `l` to `map(l)`. The map must be strictly
    /// increasing on the support of `a`.
    fn rename_monotone(&mut self, a: NodeId, map: &FxHashMap<Level, Level>) -> OpResult {
        let mut memo = FxHashMap::default();
        self.rename_monotone_rec(a, map, &mut memo)
    }

    fn rename_monotone_rec(
        &mut self,
        a: NodeId,
        map: &FxHashMap<Level, Level>,
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> OpResult {
        if Self::is_terminal(a) {
            return Ok(a);
        }
        if let Some(&r) = memo.get(&a) {
            return Ok(r);
        }
        let n = self.node(a);
        let lo = self.rename_monotone_rec(n.low, map, memo)?;
        let hi = self.rename_monotone_rec(n.high, map, memo)?;
        let level = map.get(&n.level).copied().unwrap_or(n.level);
        let r = self.mk(level, lo, hi)?;
        memo.insert(a, r);
        Ok(r)
    }

    /// Exchanges the variables at `upper < lower`, assuming no level of the
    /// support lies strictly between them.
    fn swap_levels(&mut self, f: NodeId, upper: Level, lower: Level) -> OpResult {
        let f00 = self.restrict(f, &[(upper, false), (lower, false)])?;
        let f01 = self.restrict(f, &[(upper, false), (lower, true)])?;
        let f10 = self.restrict(f, &[(upper, true), (lower, false)])?;
        let f11 = self.restrict(f, &[(upper, true), (lower, true)])?;
        let when_upper = self.ite_var(lower, f11, f01)?;
        let when_not_upper = self.ite_var(lower, f10, f00)?;
        self.ite_var(upper, when_upper, when_not_upper)
    }

    /// Renames levels according to `pairs` (unlisted levels stay put).
    /// Order-preserving maps are a single traversal; otherwise the support
    /// is bubble-sorted into target order by pairwise variable swaps first.
    pub(crate) fn rename(&mut self, a: NodeId, pairs: &[(Level, Level)]) -> OpResult {
        let map: FxHashMap<Level, Level> = pairs.iter().copied().collect();
        let support = self.support(a);
        let mut targets: Vec<Level> = support
            .iter()
            .map(|l| map.get(l).copied().unwrap_or(*l))
            .collect();
        {
            let mut sorted = targets.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(
                sorted.len(),
                targets.len(),
                "level map is not injective on the support"
            );
        }
        let mut f = a;
        if targets.windows(2).any(|w| w[0] > w[1]) {
            let mut swapped = true;
            while swapped {
                swapped = false;
                for p in 0..targets.len().saturating_sub(1) {
                    if targets[p] > targets[p + 1] {
                        f = self.swap_levels(f, support[p], support[p + 1])?;
                        targets.swap(p, p + 1);
                        swapped = true;
                    }
                }
            }
        }
        let sorted_map: FxHashMap<Level, Level> = support
            .iter()
            .copied()
            .zip(targets.iter().copied())
            .filter(|(s, t)| s != t)
            .collect();
        if sorted_map.is_empty() {
            return Ok(f);
        }
        self.rename_monotone(f, &sorted_map)
    }

    pub(crate) fn sat_count(&self, a: NodeId, levels: &[Level]) -> u128 {
        let mut pos = FxHashMap::default();
        for (i, &l) in levels.iter().enumerate() {
            pos.insert(l, i);
        }
        let k = levels.len();
        let position = |store: &Store, id: NodeId| -> usize {
            if Self::is_terminal(id) {
                k
            } else {
                *pos.get(&store.level(id))
                    .expect("BDD depends on a level outside the counted set")
            }
        };
        let mut memo: FxHashMap<NodeId, u128> = FxHashMap::default();
        fn rec(
            store: &Store,
            id: NodeId,
            memo: &mut FxHashMap<NodeId, u128>,
            position: &dyn Fn(&Store, NodeId) -> usize,
        ) -> u128 {
            match id {
                FALSE_ID => return 0,
                TRUE_ID => return 1,
                _ => {}
            }
            if let Some(&c) = memo.get(&id) {
                return c;
            }
            let n = store.node(id);
            let here = position(store, id);
            let lo = rec(store, n.low, memo, position);
            let hi = rec(store, n.high, memo, position);
            let lo_gap = position(store, n.low) - here - 1;
            let hi_gap = position(store, n.high) - here - 1;
            let c = shl_sat(lo, lo_gap).saturating_add(shl_sat(hi, hi_gap));
            memo.insert(id, c);
            c
        }
        let top = position(self, a);
        shl_sat(rec(self, a, &mut memo, &position), top)
    }

    pub(crate) fn node_count(&self, a: NodeId) -> usize {
        let mut seen = FxHashSet::default();
        let mut stack = vec![a];
        while let Some(id) = stack.pop() {
            if Self::is_terminal(id) || !seen.insert(id) {
                continue;
            }
            let n = self.node(id);
            stack.push(n.low);
            stack.push(n.high);
        }
        seen.len()
    }

    /// Calls `emit` for each assignment to `levels` that satisfies `a`,
    /// in ascending order of the assignment read as a binary number.
    pub(crate) fn for_each_sat(&self, a: NodeId, levels: &[Level], emit: &mut dyn FnMut(&[bool])) {
        let mut bits = Vec::with_capacity(levels.len());
        self.for_each_sat_rec(a, levels, &mut bits, emit);
    }

    fn for_each_sat_rec(
        &self,
        a: NodeId,
        levels: &[Level],
        bits: &mut Vec<bool>,
        emit: &mut dyn FnMut(&[bool]),
    ) {
        if a == FALSE_ID {
            return;
        }
        let depth = bits.len();
        if depth == levels.len() {
            debug_assert_eq!(a, TRUE_ID, "BDD depends on a level outside the enumerated set");
            emit(bits);
            return;
        }
        let level = levels[depth];
        let (lo, hi) = self.cofactors(a, level);
        bits.push(false);
        self.for_each_sat_rec(lo, levels, bits, emit);
        bits.pop();
        bits.push(true);
        self.for_each_sat_rec(hi, levels, bits, emit);
        bits.pop();
    }

    fn collect_garbage(&mut self) {
        let mut marked = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = self
            .refs
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0)
            .map(|(i, _)| i as NodeId)
            .collect();
        while let Some(id) = stack.pop() {
            if Self::is_terminal(id) || marked[id as usize] {
                continue;
            }
            marked[id as usize] = true;
            let n = self.node(id);
            stack.push(n.low);
            stack.push(n.high);
        }
        for id in 2..self.nodes.len() {
            let n = self.nodes[id];
            if marked[id] || n.level == FREED_LEVEL {
                continue;
            }
            self.unique.remove(&(n.level, n.low, n.high));
            self.nodes[id].level = FREED_LEVEL;
            self.free.push(id as NodeId);
            self.live -= 1;
        }
        self.cache.fill(CacheEntry::default());
        self.collections += 1;
    }

    fn inc_ref(&mut self, id: NodeId) {
        self.refs[id as usize] += 1;
    }

    fn dec_ref(&mut self, id: NodeId) {
        let r = &mut self.refs[id as usize];
        debug_assert!(*r > 0);
        *r = r.saturating_sub(1);
    }
}

fn shl_sat(value: u128, shift: usize) -> u128 {
    if value == 0 {
        0
    } else if shift >= 128 || value.leading_zeros() < shift as u32 {
        u128::MAX
    } else {
        value << shift
    }
}

/// Handle to a shared, fixed-capacity node arena.
#[derive(Clone)]
pub struct BddManager {
    store: Rc<RefCell<Store>>,
}

/// A reference-counted root into a [`BddManager`].
pub struct Bdd {
    id: NodeId,
    store: Rc<RefCell<Store>>,
}

impl BddManager {
    pub fn with_capacity(nodes: usize) -> Self {
        BddManager {
            store: Rc::new(RefCell::new(Store::new(nodes))),
        }
    }

    /// Capacity of `floor(megabytes * 2^20 / 24)` nodes.
    pub fn with_megabytes(megabytes: u64) -> Self {
        Self::with_capacity(Self::capacity_for_megabytes(megabytes))
    }

    pub fn capacity_for_megabytes(megabytes: u64) -> usize {
        (megabytes.saturating_mul(1 << 20) / BYTES_PER_NODE) as usize
    }

    fn wrap(&self, store: &mut Store, id: NodeId) -> Bdd {
        store.inc_ref(id);
        Bdd {
            id,
            store: Rc::clone(&self.store),
        }
    }

    /// Runs a raw-node computation whose inputs are all held by live
    /// handles. On exhaustion, collects garbage and retries once.
    pub(crate) fn run(
        &self,
        mut op: impl FnMut(&mut Store) -> OpResult,
    ) -> Result<Bdd, OutOfMemory> {
        let mut store = self.store.borrow_mut();
        let id = match op(&mut store) {
            Ok(id) => id,
            Err(OutOfMemory) => {
                store.collect_garbage();
                op(&mut store)?
            }
        };
        Ok(self.wrap(&mut store, id))
    }

    pub(crate) fn inspect<T>(&self, f: impl FnOnce(&Store) -> T) -> T {
        f(&self.store.borrow())
    }

    pub fn constant(&self, value: bool) -> Bdd {
        let mut store = self.store.borrow_mut();
        self.wrap(&mut store, if value { TRUE_ID } else { FALSE_ID })
    }

    pub fn bot(&self) -> Bdd {
        self.constant(false)
    }

    pub fn top(&self) -> Bdd {
        self.constant(true)
    }

    pub fn var(&self, level: Level) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.var(level))
    }

    pub fn make_node(&self, level: Level, low: &Bdd, high: &Bdd) -> Result<Bdd, BddError> {
        let (low_level, high_level) =
            self.inspect(|s| (s.level(low.id), s.level(high.id)));
        for child_level in [low_level, high_level] {
            if child_level <= level {
                return Err(BddError::Ordering { level, child_level });
            }
        }
        Ok(self.run(|s| s.mk(level, low.id, high.id))?)
    }

    pub fn not(&self, a: &Bdd) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.not(a.id))
    }

    pub fn and(&self, a: &Bdd, b: &Bdd) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.apply(BinOp::And, a.id, b.id))
    }

    pub fn or(&self, a: &Bdd, b: &Bdd) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.apply(BinOp::Or, a.id, b.id))
    }

    pub fn xor(&self, a: &Bdd, b: &Bdd) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.apply(BinOp::Xor, a.id, b.id))
    }

    /// `a & !b`
    pub fn diff(&self, a: &Bdd, b: &Bdd) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.apply(BinOp::Diff, a.id, b.id))
    }

    pub fn exists(&self, levels: &[Level], a: &Bdd) -> Result<Bdd, OutOfMemory> {
        let set = LevelSet::new(levels);
        self.run(|s| s.exists(a.id, &set))
    }

    pub fn forall(&self, levels: &[Level], a: &Bdd) -> Result<Bdd, OutOfMemory> {
        let set = LevelSet::new(levels);
        self.run(|s| {
            let na = s.not(a.id)?;
            let ex = s.exists(na, &set)?;
            s.not(ex)
        })
    }

    pub fn and_exists(&self, levels: &[Level], a: &Bdd, b: &Bdd) -> Result<Bdd, OutOfMemory> {
        let set = LevelSet::new(levels);
        self.run(|s| s.and_exists(a.id, b.id, &set))
    }

    pub fn restrict(&self, a: &Bdd, assignment: &[(Level, bool)]) -> Result<Bdd, OutOfMemory> {
        self.run(|s| s.restrict(a.id, assignment))
    }

    /// Moves the variables of `a` according to `(from, to)` pairs.
    ///
    /// # Panics
    /// If the resulting map is not injective on the support of `a`.
    pub fn rename(&self, a: &Bdd, pairs: &[(Level, Level)]) -> Result<Bdd, OutOfMemory> {
        if pairs.iter().all(|(f, t)| f == t) {
            return Ok(a.clone());
        }
        self.run(|s| s.rename(a.id, pairs))
    }

    pub fn support(&self, a: &Bdd) -> Vec<Level> {
        self.inspect(|s| s.support(a.id))
    }

    /// Number of assignments to `levels` satisfying `a`, saturating at
    /// `u128::MAX`. `levels` must be sorted and cover the support of `a`.
    pub fn sat_count(&self, a: &Bdd, levels: &[Level]) -> u128 {
        self.inspect(|s| s.sat_count(a.id, levels))
    }

    /// Internal nodes reachable from `a`; terminals are not counted.
    pub fn node_count(&self, a: &Bdd) -> usize {
        self.inspect(|s| s.node_count(a.id))
    }

    pub fn for_each_sat(&self, a: &Bdd, levels: &[Level], mut emit: impl FnMut(&[bool])) {
        self.inspect(|s| s.for_each_sat(a.id, levels, &mut emit))
    }

    pub fn stats(&self) -> NodeStats {
        self.inspect(|s| {
            let total = s.capacity;
            let free = total - s.live;
            let percent = if total == 0 { 0 } else { free * 100 / total };
            NodeStats {
                free,
                total,
                percent,
            }
        })
    }

    pub fn capacity(&self) -> usize {
        self.inspect(|s| s.capacity)
    }

    pub fn allocated(&self) -> usize {
        self.inspect(|s| s.live)
    }

    pub fn collections(&self) -> usize {
        self.inspect(|s| s.collections)
    }

    pub fn collect_garbage(&self) {
        self.store.borrow_mut().collect_garbage();
    }
}

impl fmt::Debug for BddManager {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.store.borrow();
        f.debug_struct("BddManager")
            .field("capacity", &s.capacity)
            .field("allocated", &s.live)
            .finish()
    }
}

impl Bdd {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn is_false(&self) -> bool {
        self.id == FALSE_ID
    }

    pub fn is_true(&self) -> bool {
        self.id == TRUE_ID
    }
}

impl Clone for Bdd {
    fn clone(&self) -> Self {
        self.store.borrow_mut().inc_ref(self.id);
        Bdd {
            id: self.id,
            store: Rc::clone(&self.store),
        }
    }
}

impl Drop for Bdd {
    fn drop(&mut self) {
        if let Ok(mut s) = self.store.try_borrow_mut() {
            s.dec_ref(self.id);
        }
    }
}

impl PartialEq for Bdd {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && Rc::ptr_eq(&self.store, &other.store)
    }
}

impl Eq for Bdd {}

impl fmt::Debug for Bdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            FALSE_ID => write!(f, "Bdd(FALSE)"),
            TRUE_ID => write!(f, "Bdd(TRUE)"),
            id => write!(f, "Bdd(#{id})"),
        }
    }
}
