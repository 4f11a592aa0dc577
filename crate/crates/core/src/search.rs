//! Depth-first search for an ordered partition (and positive scalars) under
//! which a scaled matrix meets the columns condition.
//!
//! Blocks are chosen in canonical order (see [`crate::partition`]). The
//! equalities contributed by `I_1, ..., I_t` depend only on those blocks, so a
//! prefix whose system is already infeasible is cut together with every
//! partition extending it. Each candidate block costs one node of budget.
//!
//! With more than one thread, the subtrees under each choice of `I_1` run in
//! parallel with the full budget each, and the results are then folded in
//! canonical order so that verdict, partition, scalars and node count are
//! exactly those of the sequential search.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feasibility::{
    block_equalities, solve_positive, AffineSystem, Equality, Feasibility, PositiveSolution,
    ScalingTemplate,
};
use crate::linalg::{residual_functionals, QVector};
use crate::partition::{check_width, full_mask, mask_to_indices, next_submask, OrderedPartition};
use crate::rational::Rational;

pub const DEFAULT_MAX_NODES: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Candidate blocks examined before the search gives up as undecided.
    pub max_nodes: u64,
    /// Worker threads; 0 or 1 runs on the calling thread.
    pub threads: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_nodes: DEFAULT_MAX_NODES,
            threads: 1,
        }
    }
}

impl SearchLimits {
    pub fn with_max_nodes(max_nodes: u64) -> Self {
        SearchLimits {
            max_nodes,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        partition: OrderedPartition,
        solution: PositiveSolution,
        nodes: u64,
    },
    /// The whole space was covered without success.
    Exhausted {
        nodes: u64,
    },
    CapExceeded {
        cap: u64,
    },
}

enum Step {
    Found(Vec<u64>, PositiveSolution),
    Exhausted,
    Exceeded,
    Cancelled,
}

struct Budget {
    used: u64,
    max: u64,
}

struct Searcher<'a> {
    template: &'a ScalingTemplate,
    all: u64,
    /// Lowest task index that has found a partition; later tasks may stop.
    cancel: &'a AtomicUsize,
}

/// Images of the remaining columns under the residual functionals of the
/// columns already placed.
struct Level {
    width: usize,
    proj: Vec<Option<QVector>>,
}

impl Searcher<'_> {
    fn level(&self, remaining: u64) -> Result<Level> {
        let t = self.template;
        let earlier: Vec<QVector> = mask_to_indices(self.all & !remaining)
            .into_iter()
            .map(|i| t.columns()[i].clone())
            .collect();
        let r = residual_functionals(&earlier, t.dim())?;
        let mut proj = vec![None; t.num_columns()];
        for i in mask_to_indices(remaining) {
            proj[i] = Some(r.mul_vec(&t.columns()[i])?);
        }
        Ok(Level {
            width: r.rows(),
            proj,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        block: u64,
        remaining: u64,
        level: &Level,
        current: &PositiveSolution,
        blocks: &mut Vec<u64>,
        eqs: &mut Vec<Equality>,
        budget: &mut Budget,
        task: usize,
    ) -> Result<Step> {
        budget.used += 1;
        if budget.used > budget.max {
            return Ok(Step::Exceeded);
        }
        let t = self.template;
        let idx = mask_to_indices(block);
        let new = block_equalities(t, level.width, &idx, |i| {
            level.proj[i]
                .as_ref()
                .expect("projection of a remaining column")
        });

        if new.is_empty() {
            return self.descend(block, remaining, current.clone(), blocks, eqs, budget, task);
        }
        if t.num_vars() == 0 {
            // Only constants: any surviving row reads 0 = nonzero.
            return Ok(Step::Exhausted);
        }
        let mark = eqs.len();
        eqs.extend(new);
        let sys = AffineSystem::positive(t.num_vars(), eqs.clone());
        let step = match solve_positive(&sys) {
            Ok(Feasibility::Feasible(s)) => {
                self.descend(block, remaining, s, blocks, eqs, budget, task)
            }
            Ok(Feasibility::Infeasible(_)) => Ok(Step::Exhausted),
            Err(e) => Err(e),
        };
        eqs.truncate(mark);
        step
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        block: u64,
        remaining: u64,
        solution: PositiveSolution,
        blocks: &mut Vec<u64>,
        eqs: &mut Vec<Equality>,
        budget: &mut Budget,
        task: usize,
    ) -> Result<Step> {
        let rest = remaining & !block;
        blocks.push(block);
        let step = if rest == 0 {
            Ok(Step::Found(blocks.clone(), solution))
        } else {
            self.dfs(rest, &solution, blocks, eqs, budget, task)
        };
        blocks.pop();
        step
    }

    fn dfs(
        &self,
        remaining: u64,
        current: &PositiveSolution,
        blocks: &mut Vec<u64>,
        eqs: &mut Vec<Equality>,
        budget: &mut Budget,
        task: usize,
    ) -> Result<Step> {
        let level = self.level(remaining)?;
        let mut cur = 0;
        while let Some(block) = next_submask(remaining, cur) {
            cur = block;
            if self.cancel.load(Ordering::Relaxed) < task {
                return Ok(Step::Cancelled);
            }
            match self.visit(block, remaining, &level, current, blocks, eqs, budget, task)? {
                Step::Exhausted => {}
                other => return Ok(other),
            }
        }
        Ok(Step::Exhausted)
    }
}

fn root_solution(num_vars: usize) -> PositiveSolution {
    PositiveSolution {
        values: vec![Rational::from_integer(1.into()); num_vars],
        unique: num_vars == 0,
    }
}

/// Searches for the first ordered partition, in canonical order, for which
/// some strictly positive assignment of the template's unknowns makes the
/// scaled matrix satisfy the columns condition.
pub fn search_partition(t: &ScalingTemplate, limits: &SearchLimits) -> Result<SearchOutcome> {
    let v = t.num_columns();
    check_width(v)?;
    let all = full_mask(v);
    let cancel = AtomicUsize::new(usize::MAX);
    let searcher = Searcher {
        template: t,
        all,
        cancel: &cancel,
    };
    let root = root_solution(t.num_vars());
    let cap = limits.max_nodes;
    let finish = |masks: Vec<u64>, solution, nodes| SearchOutcome::Found {
        partition: OrderedPartition::from_masks(&masks, v),
        solution,
        nodes,
    };

    if limits.threads <= 1 {
        let mut budget = Budget { used: 0, max: cap };
        let step = searcher.dfs(all, &root, &mut Vec::new(), &mut Vec::new(), &mut budget, 0)?;
        return Ok(match step {
            Step::Found(masks, s) => finish(masks, s, budget.used),
            Step::Exhausted => SearchOutcome::Exhausted { nodes: budget.used },
            Step::Exceeded => SearchOutcome::CapExceeded { cap },
            Step::Cancelled => return Err(Error::Internal("sequential search cancelled".into())),
        });
    }

    let level = searcher.level(all)?;
    let mut firsts = Vec::new();
    let mut cur = 0;
    while let Some(block) = next_submask(all, cur) {
        cur = block;
        firsts.push(block);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(limits.threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let results: Vec<Result<(Step, u64)>> = pool.install(|| {
        firsts
            .par_iter()
            .enumerate()
            .map(|(task, &block)| {
                if cancel.load(Ordering::Relaxed) < task {
                    return Ok((Step::Cancelled, 0));
                }
                let mut budget = Budget { used: 0, max: cap };
                let step = searcher.visit(
                    block,
                    all,
                    &level,
                    &root,
                    &mut Vec::new(),
                    &mut Vec::new(),
                    &mut budget,
                    task,
                )?;
                if matches!(step, Step::Found(..)) {
                    cancel.fetch_min(task, Ordering::Relaxed);
                }
                Ok((step, budget.used))
            })
            .collect()
    });

    let mut acc: u64 = 0;
    for r in results {
        let (step, used) = r?;
        match step {
            Step::Found(masks, s) => {
                return Ok(if acc + used <= cap {
                    finish(masks, s, acc + used)
                } else {
                    SearchOutcome::CapExceeded { cap }
                });
            }
            Step::Exhausted => {
                acc += used;
                if acc > cap {
                    return Ok(SearchOutcome::CapExceeded { cap });
                }
            }
            Step::Exceeded => return Ok(SearchOutcome::CapExceeded { cap }),
            Step::Cancelled => {
                return Err(Error::Internal(
                    "task cancelled before the first success".into(),
                ))
            }
        }
    }
    Ok(SearchOutcome::Exhausted { nodes: acc })
}
