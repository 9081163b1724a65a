//! Transitive closure of a binary relation stored in blocks 0 (source)
//! and 1 (target).

use crate::bdd::{Bdd, Level};

use super::{RelationEngine, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureAlgorithm {
    /// One pass per node that has both incoming and outgoing arcs.
    Warshall,
    /// Repeated `R := R | R.R` until nothing changes.
    Squaring,
}

impl RelationEngine {
    fn block_assignment(&self, block: u32, value: u32) -> Vec<(Level, bool)> {
        let bits = self.bits();
        self.block_levels(block)
            .enumerate()
            .map(|(k, level)| (level, (value >> (bits - 1 - k as u32)) & 1 == 1))
            .collect()
    }

    fn unary_indices(&self, f: &Bdd, block: u32) -> Vec<u32> {
        let levels: Vec<Level> = self.block_levels(block).collect();
        let mut out = Vec::new();
        self.manager().for_each_sat(f, &levels, |bits| {
            out.push(bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32));
        });
        out
    }

    pub(super) fn closure_warshall(&self, r: Bdd) -> Result<Bdd> {
        let mgr = self.manager();
        let src: Vec<Level> = self.block_levels(0).collect();
        let dst: Vec<Level> = self.block_levels(1).collect();
        // Only a node with an incoming and an outgoing arc can be the inner
        // node of a path.
        let has_out = mgr.exists(&dst, &r)?;
        let has_in = mgr.exists(&src, &r)?;
        let has_in = mgr.rename(&has_in, &self.block_moves(&[(1, 0)]))?;
        let pivots = mgr.and(&has_out, &has_in)?;
        drop((has_out, has_in));
        let mut result = r;
        for p in self.unary_indices(&pivots, 0) {
            let reaching = mgr.restrict(&result, &self.block_assignment(1, p))?;
            if reaching.is_false() {
                continue;
            }
            let reached = mgr.restrict(&result, &self.block_assignment(0, p))?;
            let through = mgr.and(&reaching, &reached)?;
            result = mgr.or(&result, &through)?;
        }
        Ok(result)
    }

    pub(super) fn closure_squaring(&self, r: Bdd) -> Result<Bdd> {
        let mgr = self.manager();
        let middle: Vec<Level> = self.block_levels(1).collect();
        let shift = self.block_moves(&[(0, 1), (1, 2)]);
        let back = self.block_moves(&[(2, 1)]);
        let mut result = r;
        loop {
            let shifted = mgr.rename(&result, &shift)?;
            let joined = mgr.and_exists(&middle, &result, &shifted)?;
            let step = mgr.rename(&joined, &back)?;
            let next = mgr.or(&result, &step)?;
            if next == result {
                return Ok(result);
            }
            result = next;
        }
    }
}
