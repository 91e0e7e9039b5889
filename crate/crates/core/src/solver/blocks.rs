use std::ops::Range;

use crate::error::{Error, Result};

/// Factorization `N_b * N_f = N_P` of the state nodes into contiguous blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPlan {
    blocks: usize,
    block_len: usize,
}

impl BlockPlan {
    /// Number of blocks `N_b`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Nodes per block `N_f`.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn nodes(&self) -> usize {
        self.blocks * self.block_len
    }

    /// Node index range of block `b`.
    pub fn range(&self, b: usize) -> Range<usize> {
        b * self.block_len..(b + 1) * self.block_len
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.blocks).map(|b| self.range(b))
    }
}

/// Splits `nodes` state nodes into `blocks` contiguous blocks.
pub fn partition(nodes: usize, blocks: usize) -> Result<BlockPlan> {
    if nodes == 0 || blocks == 0 || !nodes.is_multiple_of(blocks) {
        return Err(Error::NotADivisor { nodes, blocks });
    }
    Ok(BlockPlan { blocks, block_len: nodes / blocks })
}

/// All divisors of `n` in increasing order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}
