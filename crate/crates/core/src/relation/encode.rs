//! Raw-node constructors for attribute blocks.
//!
//! A block of `bits` levels starting at `base` holds one big-endian index.

use crate::bdd::{Level, OpResult, Store, FALSE_ID, TRUE_ID};

use super::CmpOp;

/// Indices in `[lo, hi)` within one block.
pub(crate) fn interval(store: &mut Store, base: Level, bits: u32, lo: u64, hi: u64) -> OpResult {
    fn rec(store: &mut Store, level: Level, rem: u32, lo: u64, hi: u64) -> OpResult {
        let size = 1u64 << rem;
        let hi = hi.min(size);
        if lo >= hi {
            return Ok(FALSE_ID);
        }
        if lo == 0 && hi == size {
            return Ok(TRUE_ID);
        }
        let half = size / 2;
        let low = rec(store, level + 1, rem - 1, lo, hi.min(half))?;
        let high = rec(
            store,
            level + 1,
            rem - 1,
            lo.saturating_sub(half),
            hi.saturating_sub(half),
        )?;
        store.mk(level, low, high)
    }
    rec(store, base, bits, lo, hi)
}

/// The single index `value`.
pub(crate) fn point(store: &mut Store, base: Level, bits: u32, value: u64) -> OpResult {
    interval(store, base, bits, value, value + 1)
}

/// `{ y < n | value op y }` over one block.
fn relative_to(
    store: &mut Store,
    base: Level,
    bits: u32,
    n: u64,
    value: u64,
    op: CmpOp,
) -> OpResult {
    match op {
        CmpOp::Eq => interval(store, base, bits, value, (value + 1).min(n)),
        CmpOp::Ne => {
            let below = interval(store, base, bits, 0, value.min(n))?;
            let above = interval(store, base, bits, value + 1, n)?;
            store.apply(crate::bdd::BinOp::Or, below, above)
        }
        // value < y
        CmpOp::Lt => interval(store, base, bits, value + 1, n),
        CmpOp::Le => interval(store, base, bits, value, n),
        // value > y
        CmpOp::Gt => interval(store, base, bits, 0, value.min(n)),
        CmpOp::Ge => interval(store, base, bits, 0, (value + 1).min(n)),
    }
}

/// `x op y` for `x` in block `first`, `y` in block `second`, both
/// restricted to `[0, n)`. Needs one threshold sub-diagram per value of
/// the upper block, so O(n * bits) nodes.
pub(crate) fn compare_blocks(
    store: &mut Store,
    bits: u32,
    n: u64,
    first: u32,
    second: u32,
    op: CmpOp,
) -> OpResult {
    assert_ne!(first, second);
    if first > second {
        return compare_blocks(store, bits, n, second, first, op.flip());
    }
    let upper = first * bits;
    let lower = second * bits;
    fn rec(
        store: &mut Store,
        bits: u32,
        n: u64,
        upper: Level,
        lower: Level,
        depth: u32,
        prefix: u64,
        op: CmpOp,
    ) -> OpResult {
        if (prefix << (bits - depth)) >= n {
            return Ok(FALSE_ID);
        }
        if depth == bits {
            return relative_to(store, lower, bits, n, prefix, op);
        }
        let lo = rec(store, bits, n, upper, lower, depth + 1, prefix << 1, op)?;
        let hi = rec(store, bits, n, upper, lower, depth + 1, (prefix << 1) | 1, op)?;
        store.mk(upper + depth, lo, hi)
    }
    rec(store, bits, n, upper, lower, 0, 0, op)
}

/// Relation over blocks `0..arity` holding exactly `tuples`, which must be
/// sorted lexicographically and deduplicated.
pub(crate) fn from_sorted_tuples(
    store: &mut Store,
    bits: u32,
    arity: usize,
    tuples: &[Vec<u32>],
) -> OpResult {
    fn rec(
        store: &mut Store,
        bits: u32,
        total: u32,
        level: Level,
        tuples: &[Vec<u32>],
    ) -> OpResult {
        if tuples.is_empty() {
            return Ok(FALSE_ID);
        }
        if level == total {
            return Ok(TRUE_ID);
        }
        let block = (level / bits) as usize;
        let shift = bits - 1 - level % bits;
        let split = tuples.partition_point(|t| (t[block] >> shift) & 1 == 0);
        let lo = rec(store, bits, total, level + 1, &tuples[..split])?;
        let hi = rec(store, bits, total, level + 1, &tuples[split..])?;
        store.mk(level, lo, hi)
    }
    debug_assert!(tuples.windows(2).all(|w| w[0] < w[1]));
    rec(store, bits, bits * arity as u32, 0, tuples)
}
