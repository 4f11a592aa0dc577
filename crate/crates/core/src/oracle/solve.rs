//! Bounded positive integer points of `A_1 x_1 + ... + A_k x_k = 0`.
//!
//! The kernel of the stacked matrix is parametrised by its free coordinates
//! (read off the reduced row echelon form), so each pivot coordinate is a
//! fixed rational combination of free ones. Free coordinates range over
//! `1..=N`, which covers every kernel point in the box exactly once.
//!
//! Under a colouring, the values of each free coordinate are grouped by the
//! colours they force: their own, and those of pivots that depend on that
//! coordinate alone. A group is skipped as a whole when it clashes with the
//! colours already fixed, or when it leaves some later coordinate without a
//! compatible group.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rref, QMatrix};

/// `x[var] = (sum of coeff * y[free position]) / den`.
struct PivotExpr {
    var: usize,
    coeffs: Vec<(usize, i128)>,
    den: i128,
}

impl PivotExpr {
    fn eval(&self, y: &[u64]) -> Option<u64> {
        let num: i128 = self.coeffs.iter().map(|&(k, c)| c * y[k] as i128).sum();
        (num % self.den == 0)
            .then(|| num / self.den)
            .and_then(|v| u64::try_from(v).ok())
    }

    fn last(&self) -> usize {
        self.coeffs
            .iter()
            .map(|&(k, _)| k)
            .max()
            .expect("non-constant pivot")
    }
}

pub(crate) struct Kernel {
    num_vars: usize,
    block_of: Vec<usize>,
    num_blocks: usize,
    free: Vec<usize>,
    pivots: Vec<PivotExpr>,
    /// Some pivot is identically zero, so no positive point exists.
    degenerate: bool,
}

impl Kernel {
    pub(crate) fn new(mats: &[&QMatrix]) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::Dimension("no matrices given".into()));
        }
        let m = QMatrix::hstack(mats)?;
        let block_of: Vec<usize> = mats
            .iter()
            .enumerate()
            .flat_map(|(t, a)| std::iter::repeat_n(t, a.cols()))
            .collect();
        let red = rref(&m);
        let mut is_pivot = vec![false; m.cols()];
        for &p in &red.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..m.cols()).filter(|&j| !is_pivot[j]).collect();
        let mut pivots = Vec::with_capacity(red.pivots.len());
        let mut degenerate = false;
        for (row, &var) in red.pivots.iter().enumerate() {
            let den = free
                .iter()
                .map(|&f| red.matrix[(row, f)].denom().clone())
                .fold(num_bigint::BigInt::from(1), |acc, d| acc.lcm(&d));
            let mut coeffs = Vec::new();
            for (k, &f) in free.iter().enumerate() {
                let c = &red.matrix[(row, f)];
                if c.is_zero() {
                    continue;
                }
                let scaled = -(c.numer() * (&den / c.denom()));
                let c = scaled.to_i128().ok_or_else(|| {
                    Error::Oversized("kernel coefficient does not fit in 128 bits".into())
                })?;
                coeffs.push((k, c));
            }
            if coeffs.is_empty() {
                degenerate = true;
            }
            let den = den.to_i128().ok_or_else(|| {
                Error::Oversized("kernel denominator does not fit in 128 bits".into())
            })?;
            pivots.push(PivotExpr { var, coeffs, den });
        }
        Ok(Kernel {
            num_vars: m.cols(),
            block_of,
            num_blocks: mats.len(),
            free,
            pivots,
            degenerate,
        })
    }

    pub(crate) fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub(crate) fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    /// Calls `visit` on every kernel point with entries in `1..=bound` that
    /// is monochromatic on each block under `colours` (indexed by value; a
    /// `None` colour makes a value unusable). Without colours, every bounded
    /// point is visited.
    pub(crate) fn for_each_point<F>(
        &self,
        bound: u64,
        colours: Option<&[Option<u64>]>,
        mut visit: F,
    ) -> Result<()>
    where
        F: FnMut(&[u64]) -> ControlFlow<()>,
    {
        if self.degenerate || self.free.is_empty() || bound == 0 {
            return Ok(());
        }
        if bound > i64::MAX as u64 / 4 {
            return Err(Error::Oversized(format!("bound {bound} is too large")));
        }
        let nf = self.free.len();
        let mut univariate: Vec<Vec<&PivotExpr>> = vec![Vec::new(); nf];
        let mut checks: Vec<Vec<&PivotExpr>> = vec![Vec::new(); nf];
        for p in &self.pivots {
            if p.coeffs.len() == 1 {
                univariate[p.coeffs[0].0].push(p);
            } else {
                checks[p.last()].push(p);
            }
        }

        let mut groups: Vec<Vec<Group>> = Vec::with_capacity(nf);
        let mut y = vec![0u64; nf];
        for k in 0..nf {
            let mut by_sig: BTreeMap<Vec<(usize, u64)>, Vec<u64>> = BTreeMap::new();
            'values: for val in 1..=bound {
                y[k] = val;
                let mut sig: BTreeMap<usize, u64> = BTreeMap::new();
                if let Some(c) = colours {
                    match c[val as usize] {
                        Some(col) => {
                            sig.insert(self.block_of[self.free[k]], col);
                        }
                        None => continue,
                    }
                }
                for p in &univariate[k] {
                    let Some(x) = p.eval(&y).filter(|x| (1..=bound).contains(x)) else {
                        continue 'values;
                    };
                    if let Some(c) = colours {
                        let Some(col) = c[x as usize] else {
                            continue 'values;
                        };
                        if *sig.entry(self.block_of[p.var]).or_insert(col) != col {
                            continue 'values;
                        }
                    }
                }
                by_sig
                    .entry(sig.into_iter().collect())
                    .or_default()
                    .push(val);
            }
            if by_sig.is_empty() {
                return Ok(());
            }
            groups.push(
                by_sig
                    .into_iter()
                    .map(|(constraint, values)| Group { constraint, values })
                    .collect(),
            );
        }

        let mut walk = Walk {
            kernel: self,
            bound,
            colours,
            groups: &groups,
            checks: &checks,
            y: vec![0; nf],
            block_colour: vec![None; self.num_blocks],
            x: vec![0; self.num_vars],
        };
        let _ = walk.dfs(0, &mut visit);
        Ok(())
    }
}

struct Group {
    constraint: Vec<(usize, u64)>,
    values: Vec<u64>,
}

struct Walk<'a> {
    kernel: &'a Kernel,
    bound: u64,
    colours: Option<&'a [Option<u64>]>,
    groups: &'a [Vec<Group>],
    checks: &'a [Vec<&'a PivotExpr>],
    y: Vec<u64>,
    block_colour: Vec<Option<u64>>,
    x: Vec<u64>,
}

impl Walk<'_> {
    fn compatible(&self, g: &Group) -> bool {
        g.constraint
            .iter()
            .all(|&(b, c)| self.block_colour[b].is_none_or(|have| have == c))
    }

    /// Fixes the colours in `constraint`, returning the blocks newly set.
    fn fix(&mut self, constraint: &[(usize, u64)]) -> Vec<usize> {
        let mut set = Vec::new();
        for &(b, c) in constraint {
            if self.block_colour[b].is_none() {
                self.block_colour[b] = Some(c);
                set.push(b);
            }
        }
        set
    }

    fn unfix(&mut self, blocks: &[usize]) {
        for &b in blocks {
            self.block_colour[b] = None;
        }
    }

    fn dfs<F>(&mut self, k: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u64]) -> ControlFlow<()>,
    {
        let nf = self.kernel.free.len();
        if k == nf {
            for (pos, &f) in self.kernel.free.iter().enumerate() {
                self.x[f] = self.y[pos];
            }
            for p in &self.kernel.pivots {
                self.x[p.var] = p.eval(&self.y).expect("pivot checked during the walk");
            }
            return visit(&self.x);
        }
        for g in &self.groups[k] {
            if !self.compatible(g) {
                continue;
            }
            let fixed = self.fix(&g.constraint);
            let ahead_ok = (k + 1..nf).all(|j| self.groups[j].iter().any(|h| self.compatible(h)));
            if ahead_ok {
                for &val in &g.values {
                    self.y[k] = val;
                    let Some(set) = self.check_pivots(k) else {
                        continue;
                    };
                    let flow = self.dfs(k + 1, visit);
                    self.unfix(&set);
                    if flow.is_break() {
                        self.unfix(&fixed);
                        return flow;
                    }
                }
            }
            self.unfix(&fixed);
        }
        ControlFlow::Continue(())
    }

    /// Evaluates the pivots completed at position `k`; on success returns the
    /// blocks whose colour they fixed.
    fn check_pivots(&mut self, k: usize) -> Option<Vec<usize>> {
        let mut set = Vec::new();
        let checks = self.checks;
        for p in &checks[k] {
            let ok = p
                .eval(&self.y)
                .filter(|x| (1..=self.bound).contains(x))
                .and_then(|x| match self.colours {
                    None => Some(()),
                    Some(c) => {
                        let col = c[x as usize]?;
                        let b = self.kernel.block_of[p.var];
                        match self.block_colour[b] {
                            Some(have) => (have == col).then_some(()),
                            None => {
                                self.block_colour[b] = Some(col);
                                set.push(b);
                                Some(())
                            }
                        }
                    }
                });
            if ok.is_none() {
                self.unfix(&set);
                return None;
            }
        }
        Some(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(mats: &[&QMatrix], bound: u64) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        Kernel::new(mats)
            .unwrap()
            .for_each_point(bound, None, |x| {
                out.push(x.to_vec());
                ControlFlow::Continue(())
            })
            .unwrap();
        out.sort();
        out
    }

    #[test]
    fn schur_points_match_brute_force() {
        let a = QMatrix::from_ints(&[[1, 1, -1]]);
        let mut brute = Vec::new();
        for x in 1..=6u64 {
            for y in 1..=6u64 {
                for z in 1..=6u64 {
                    if x + y == z {
                        brute.push(vec![x, y, z]);
                    }
                }
            }
        }
        assert_eq!(points(&[&a], 6), brute);
    }

    #[test]
    fn rational_pivots_need_integrality() {
        // x1 = y1, x2 = y2 / 2.
        let a = QMatrix::from_ints(&[[1, 0], [0, 2]]);
        let neg_i = QMatrix::identity(2).negated();
        let pts = points(&[&a, &neg_i], 4);
        assert_eq!(
            pts,
            vec![
                vec![1, 1, 1, 2],
                vec![1, 2, 1, 4],
                vec![2, 1, 2, 2],
                vec![2, 2, 2, 4],
                vec![3, 1, 3, 2],
                vec![3, 2, 3, 4],
                vec![4, 1, 4, 2],
                vec![4, 2, 4, 4]
            ]
        );
    }

    #[test]
    fn no_positive_points() {
        assert!(points(&[&QMatrix::from_ints(&[[1, 1]])], 10).is_empty());
        assert!(points(&[&QMatrix::from_ints(&[[1, 0], [0, 1]])], 10).is_empty());
    }
}
