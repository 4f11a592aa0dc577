//! Ordered set partitions of column indices.
//!
//! Canonical order: an ordered partition `(I_1, ..., I_m)` is identified with
//! the sequence of its block bitmasks, and partitions are listed in
//! lexicographic order of that sequence, where each block is compared by the
//! integer value of its mask. Equivalently, a depth-first search that picks
//! `I_1` among the non-empty subsets of all columns in increasing mask order,
//! then `I_2` among the non-empty subsets of what is left, and so on. Every
//! search in this crate walks the same order, so "the first certificate" is
//! well defined and prefix pruning never reorders results.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported column count; blocks are stored as `u64` masks.
pub const MAX_COLUMNS: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
    num_columns: usize,
}

impl OrderedPartition {
    /// Validates that `blocks` (0-based) partition `0..num_columns` into
    /// non-empty blocks. Indices inside each block are sorted.
    pub fn new(blocks: Vec<Vec<usize>>, num_columns: usize) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let mut seen = vec![false; num_columns];
        let mut sorted = Vec::with_capacity(blocks.len());
        for (t, mut block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {} is empty", t + 1)));
            }
            block.sort_unstable();
            for &i in &block {
                if i >= num_columns {
                    return Err(Error::InvalidPartition(format!(
                        "column {} out of range 1..={num_columns}",
                        i + 1
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!(
                        "column {} appears twice",
                        i + 1
                    )));
                }
                seen[i] = true;
            }
            sorted.push(block);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "column {} is not covered",
                missing + 1
            )));
        }
        Ok(OrderedPartition {
            blocks: sorted,
            num_columns,
        })
    }

    /// Same as [`OrderedPartition::new`] with 1-based indices.
    pub fn from_one_based(blocks: &[Vec<usize>], num_columns: usize) -> Result<Self> {
        let shifted = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&i| {
                        i.checked_sub(1).ok_or_else(|| {
                            Error::InvalidPartition("column index 0 in 1-based input".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shifted, num_columns)
    }

    pub(crate) fn from_masks(masks: &[u64], num_columns: usize) -> Self {
        let blocks = masks.iter().map(|&m| mask_to_indices(m)).collect();
        OrderedPartition {
            blocks,
            num_columns,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.num_columns
    }

    /// Block position of every column.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_columns];
        for (t, b) in self.blocks.iter().enumerate() {
            for &i in b {
                out[i] = t;
            }
        }
        out
    }

    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|i| i + 1).collect())
            .collect()
    }

    /// Relabels columns: column `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&i| perm[i]).collect())
            .collect();
        Self::new(blocks, self.num_columns)
    }
}

/// 1-based, e.g. `{1,3} {2}`.
impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .one_based()
            .iter()
            .map(|b| {
                let ids: Vec<String> = b.iter().map(ToString::to_string).collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub(crate) fn mask_to_indices(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out.push(i);
        m &= m - 1;
    }
    out
}

pub(crate) fn full_mask(v: usize) -> u64 {
    if v == 64 {
        u64::MAX
    } else {
        (1u64 << v) - 1
    }
}

/// The next non-empty submask of `set` after `current`, in increasing
/// numeric order, or `None` after the last one. Start with `current = 0`.
pub(crate) fn next_submask(set: u64, current: u64) -> Option<u64> {
    let next = current.wrapping_sub(set) & set;
    (next != 0).then_some(next)
}

pub(crate) fn check_width(v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::Unsupported("matrix has no columns".into()));
    }
    if v > MAX_COLUMNS {
        return Err(Error::Oversized(format!(
            "{v} columns; at most {MAX_COLUMNS} are supported"
        )));
    }
    Ok(())
}

/// Number of ordered set partitions of an `n`-set, if it fits in a `u128`.
pub fn fubini(n: usize) -> Option<u128> {
    // a(n) = sum_{k=1..n} C(n, k) a(n - k), a(0) = 1
    let mut a: Vec<u128> = vec![1];
    for m in 1..=n {
        let mut binom: u128 = 1;
        let mut total: u128 = 0;
        for k in 1..=m {
            binom = binom.checked_mul((m - k + 1) as u128)? / k as u128;
            total = total.checked_add(binom.checked_mul(a[m - k])?)?;
        }
        a.push(total);
    }
    Some(a[n])
}

/// Signals that an enumeration or search stopped at its budget before it
/// could finish. The result is undecided, never a silent truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CapExceeded {
    pub cap: u64,
}

impl fmt::Display for CapExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cap of {} exceeded", self.cap)
    }
}

/// Iterator over all ordered partitions of `0..v` in canonical order.
///
/// With a cap, at most `cap` partitions are produced; if more exist the
/// iterator then yields a single `Err(CapExceeded)` and stops.
pub struct OrderedPartitions {
    v: usize,
    stack: Vec<(u64, u64)>,
    started: bool,
    done: bool,
    cap: Option<u64>,
    emitted: u64,
}

pub fn enumerate_ordered_partitions(v: usize, cap: Option<u64>) -> Result<OrderedPartitions> {
    check_width(v)?;
    Ok(OrderedPartitions {
        v,
        stack: Vec::new(),
        started: false,
        done: false,
        cap,
        emitted: 0,
    })
}

impl OrderedPartitions {
    fn advance(&mut self) -> Option<OrderedPartition> {
        if !self.started {
            self.started = true;
            self.stack.push((full_mask(self.v), 0));
        }
        loop {
            let (set, cur) = *self.stack.last()?;
            match next_submask(set, cur) {
                None => {
                    self.stack.pop();
                }
                Some(block) => {
                    self.stack.last_mut().expect("non-empty").1 = block;
                    let rest = set & !block;
                    if rest == 0 {
                        let masks: Vec<u64> = self.stack.iter().map(|&(_, b)| b).collect();
                        return Some(OrderedPartition::from_masks(&masks, self.v));
                    }
                    self.stack.push((rest, 0));
                }
            }
        }
    }
}

impl Iterator for OrderedPartitions {
    type Item = std::result::Result<OrderedPartition, CapExceeded>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let Some(p) = self.advance() else {
            self.done = true;
            return None;
        };
        if let Some(cap) = self.cap {
            if self.emitted >= cap {
                self.done = true;
                return Some(Err(CapExceeded { cap }));
            }
        }
        self.emitted += 1;
        Some(Ok(p))
    }
}
