//! Finite-scale checks by colouring: monochromatic solutions under a given
//! colouring, exhaustive verification over all colourings of `1..=N`, and
//! searches for colourings with no bounded monochromatic solution.
//!
//! Negative results hold only up to the stated bound.

pub mod colouring;
mod solve;

use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::Rational;

pub use colouring::{g_p, gamma_p_colour, tau_p, Colouring, GammaColour};
use solve::Kernel;

/// Largest number of colourings an exhaustive check will walk.
pub const MAX_COLOURINGS: u128 = 10_000_000;

/// Cap on the bounded solutions held in memory by the exhaustive checks.
pub const MAX_SOLUTIONS: usize = 5_000_000;

/// One monochromatic vector per matrix, solving `sum A_t x_t = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionWitness {
    pub vectors: Vec<Vec<u64>>,
    pub colours: Vec<u64>,
}

impl SolutionWitness {
    /// Re-checks the equation in exact arithmetic and every colour directly.
    pub fn verify(&self, mats: &[&QMatrix], colouring: &Colouring) -> bool {
        if mats.len() != self.vectors.len() || mats.len() != self.colours.len() {
            return false;
        }
        let Some(rows) = mats.first().map(|m| m.rows()) else {
            return false;
        };
        let mut total = vec![Rational::from_integer(0.into()); rows];
        for ((a, x), &c) in mats.iter().zip(&self.vectors).zip(&self.colours) {
            if a.rows() != rows || a.cols() != x.len() {
                return false;
            }
            if x.iter().any(|&e| e == 0 || colouring.colour(e) != Some(c)) {
                return false;
            }
            let xq: Vec<Rational> = x
                .iter()
                .map(|&e| Rational::from_integer(e.into()))
                .collect();
            match a.mul_vec(&xq) {
                Ok(ax) => total.iter_mut().zip(ax).for_each(|(s, v)| *s += v),
                Err(_) => return false,
            }
        }
        total.iter().all(|q| *q == Rational::from_integer(0.into()))
    }
}

/// A colouring of `1..=bound` with `colours` colours admitting no
/// monochromatic solution with entries in `1..=bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessColouring {
    pub bound: u64,
    pub colours: u64,
    pub table: Vec<u64>,
}

impl WitnessColouring {
    /// `x colour` per line, for `x = 1..=bound`.
    pub fn to_text(&self) -> String {
        self.table
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{} {c}\n", i + 1))
            .collect()
    }

    pub fn as_colouring(&self) -> Colouring {
        Colouring::Table(self.table.clone())
    }

    /// The colour classes, each listing its integers in increasing order.
    pub fn classes(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.colours as usize];
        for (i, &c) in self.table.iter().enumerate() {
            out[c as usize].push(i as u64 + 1);
        }
        out.retain(|c| !c.is_empty());
        out
    }
}

fn split(kernel: &Kernel, x: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); kernel.num_blocks()];
    for (&b, &e) in kernel.block_of().iter().zip(x) {
        out[b].push(e);
    }
    out
}

fn colour_table(colouring: &Colouring, bound: u64) -> Result<Vec<Option<u64>>> {
    if bound > 1 << 26 {
        return Err(Error::Oversized(format!("bound {bound} is above 2^26")));
    }
    Ok((0..=bound).map(|x| colouring.colour(x)).collect())
}

/// A solution with entries in `1..=bound`, each `x_t` monochromatic under
/// `colouring`, if one exists.
pub fn find_monochromatic_solution(
    mats: &[&QMatrix],
    colouring: &Colouring,
    bound: u64,
) -> Result<Option<SolutionWitness>> {
    let kernel = Kernel::new(mats)?;
    let colours = colour_table(colouring, bound)?;
    let mut found = None;
    kernel.for_each_point(bound, Some(&colours), |x| {
        found = Some(x.to_vec());
        ControlFlow::Break(())
    })?;
    Ok(found.map(|x| {
        let vectors = split(&kernel, &x);
        let colours = vectors
            .iter()
            .map(|v| colours[v[0] as usize].expect("coloured entry"))
            .collect();
        SolutionWitness { vectors, colours }
    }))
}

/// Every solution with entries in `1..=bound`, as the concatenated vector
/// `(x_1, ..., x_k)`.
pub fn bounded_solutions(mats: &[&QMatrix], bound: u64) -> Result<Vec<Vec<u64>>> {
    let kernel = Kernel::new(mats)?;
    let mut out = Vec::new();
    let mut overflow = false;
    kernel.for_each_point(bound, None, |x| {
        if out.len() == MAX_SOLUTIONS {
            overflow = true;
            return ControlFlow::Break(());
        }
        out.push(x.to_vec());
        ControlFlow::Continue(())
    })?;
    if overflow {
        return Err(Error::Oversized(format!(
            "more than {MAX_SOLUTIONS} solutions below {bound}"
        )));
    }
    Ok(out)
}

fn check_colouring_size(colours: u64, bound: u64) -> Result<()> {
    if colours == 0 || bound == 0 {
        return Err(Error::Unsupported(
            "need at least one colour and bound >= 1".into(),
        ));
    }
    let fits = u32::try_from(bound)
        .ok()
        .and_then(|n| u128::from(colours).checked_pow(n))
        .is_some_and(|total| total <= MAX_COLOURINGS);
    if !fits {
        return Err(Error::Oversized(format!(
            "{colours}^{bound} colourings exceeds {MAX_COLOURINGS}"
        )));
    }
    Ok(())
}

/// All bounded solutions, with the matrix each coordinate belongs to.
struct SolutionSet {
    block_of: Vec<usize>,
    num_blocks: usize,
    solutions: Vec<Vec<u64>>,
}

impl SolutionSet {
    fn new(mats: &[&QMatrix], bound: u64) -> Result<Self> {
        let kernel = Kernel::new(mats)?;
        Ok(SolutionSet {
            block_of: kernel.block_of().to_vec(),
            num_blocks: kernel.num_blocks(),
            solutions: bounded_solutions(mats, bound)?,
        })
    }

    fn monochromatic(&self, x: &[u64], colour_of: impl Fn(u64) -> u64) -> bool {
        let mut seen: Vec<Option<u64>> = vec![None; self.num_blocks];
        for (&b, &e) in self.block_of.iter().zip(x) {
            let c = colour_of(e);
            match seen[b] {
                Some(s) if s != c => return false,
                _ => seen[b] = Some(c),
            }
        }
        true
    }
}

/// Whether every colouring of `1..=bound` with `colours` colours admits a
/// monochromatic solution inside `1..=bound`. Walks all `colours^bound`
/// colourings.
pub fn verify_all_colourings(mats: &[&QMatrix], colours: u64, bound: u64) -> Result<bool> {
    check_colouring_size(colours, bound)?;
    let set = SolutionSet::new(mats, bound)?;
    let n = bound as usize;
    let mut table = vec![0u64; n];
    loop {
        let hit = set
            .solutions
            .iter()
            .any(|x| set.monochromatic(x, |e| table[e as usize - 1]));
        if !hit {
            return Ok(false);
        }
        // Next colouring, odometer style.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(true);
            }
            table[i] += 1;
            if table[i] < colours {
                break;
            }
            table[i] = 0;
            i += 1;
        }
    }
}

/// A colouring of `1..=bound` with at most `colours` colours and no
/// monochromatic solution inside `1..=bound`, if one exists.
///
/// Integers are coloured in increasing order; `1` gets colour 0 and each
/// integer may open at most one new colour, so colourings equal up to
/// renaming are tried once. A colour is rejected for `x` when some solution
/// whose largest entry is `x` would become monochromatic.
pub fn search_witness_colouring(
    mats: &[&QMatrix],
    colours: u64,
    bound: u64,
) -> Result<Option<WitnessColouring>> {
    check_colouring_size(colours, bound)?;
    let set = SolutionSet::new(mats, bound)?;
    let n = bound as usize;
    let mut by_max: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, x) in set.solutions.iter().enumerate() {
        let m = *x.iter().max().expect("non-empty solution") as usize;
        by_max[m].push(i);
    }

    fn place(
        x: usize,
        n: usize,
        colours: u64,
        used: u64,
        table: &mut Vec<u64>,
        set: &SolutionSet,
        by_max: &[Vec<usize>],
    ) -> bool {
        if x > n {
            return true;
        }
        for c in 0..colours.min(used + 1) {
            table.push(c);
            let clash = by_max[x]
                .iter()
                .any(|&s| set.monochromatic(&set.solutions[s], |e| table[e as usize - 1]));
            if !clash && place(x + 1, n, colours, used.max(c + 1), table, set, by_max) {
                return true;
            }
            table.pop();
        }
        false
    }

    let mut table = Vec::with_capacity(n);
    Ok(
        place(1, n, colours, 0, &mut table, &set, &by_max).then_some(WitnessColouring {
            bound,
            colours,
            table,
        }),
    )
}

/// Runs the search under `x -> colouring(factor * x)` and checks that the
/// solution found, multiplied by `factor`, is a solution monochromatic under
/// `colouring` itself. Vacuously true when no solution is found.
pub fn dilation_check(
    mats: &[&QMatrix],
    colouring: &Colouring,
    factor: u64,
    bound: u64,
) -> Result<bool> {
    let psi = colouring.clone().dilated(factor)?;
    let Some(w) = find_monochromatic_solution(mats, &psi, bound)? else {
        return Ok(true);
    };
    let scaled = SolutionWitness {
        vectors: w
            .vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&e| e.checked_mul(factor))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Oversized("dilated entry overflows".into()))?,
        colours: w.colours.clone(),
    };
    Ok(w.verify(mats, &psi) && scaled.verify(mats, colouring))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schur() -> QMatrix {
        QMatrix::from_ints(&[[1, 1, -1]])
    }

    #[test]
    fn one_colour_finds_a_schur_triple() {
        let c = Colouring::modulo(1).unwrap();
        let w = find_monochromatic_solution(&[&schur()], &c, 3)
            .unwrap()
            .unwrap();
        assert!(w.verify(&[&schur()], &c));
        let x = &w.vectors[0];
        assert_eq!(x[0] + x[1], x[2]);
    }

    #[test]
    fn start_parity_defeats_diag_pair() {
        let diag = QMatrix::from_ints(&[[1, 0], [0, 2]]);
        let neg_i = QMatrix::identity(2).negated();
        let c = Colouring::start_parity(2).unwrap();
        for bound in [1, 2, 7, 100, 1 << 12] {
            assert!(find_monochromatic_solution(&[&diag, &neg_i], &c, bound)
                .unwrap()
                .is_none());
        }
        // Without the colour constraint there are plenty of solutions.
        let one = Colouring::modulo(1).unwrap();
        assert!(find_monochromatic_solution(&[&diag, &neg_i], &one, 4)
            .unwrap()
            .is_some());
    }

    #[test]
    fn non_integer_b_pair_has_mod_2_solution() {
        let a = QMatrix::from_ints(&[[4, -4, 2], [5, -5, 3]]);
        let neg_i = QMatrix::identity(2).negated();
        let c = Colouring::modulo(2).unwrap();
        let w = find_monochromatic_solution(&[&a, &neg_i], &c, 40)
            .unwrap()
            .unwrap();
        assert!(w.verify(&[&a, &neg_i], &c));
    }

    #[test]
    fn schur_exhaustive_checks() {
        assert!(verify_all_colourings(&[&schur()], 2, 5).unwrap());
        assert!(!verify_all_colourings(&[&schur()], 2, 4).unwrap());
        let w = search_witness_colouring(&[&schur()], 2, 4)
            .unwrap()
            .unwrap();
        assert_eq!(w.classes(), vec![vec![1, 4], vec![2, 3]]);
        assert!(search_witness_colouring(&[&schur()], 2, 5)
            .unwrap()
            .is_none());
        assert!(verify_all_colourings(&[&schur()], 1, 2).unwrap());
    }

    #[test]
    fn unsolvable_system_has_trivial_witness() {
        let a = QMatrix::from_ints(&[[1, 1]]);
        let w = search_witness_colouring(&[&a], 1, 10).unwrap().unwrap();
        assert_eq!(w.table, vec![0; 10]);
        assert!(!verify_all_colourings(&[&a], 1, 10).unwrap());
    }

    #[test]
    fn oversized_instances_are_rejected() {
        assert!(verify_all_colourings(&[&schur()], 2, 40).is_err());
        assert!(search_witness_colouring(&[&schur()], 3, 30).is_err());
        assert!(verify_all_colourings(&[&schur()], 0, 3).is_err());
    }

    #[test]
    fn dilation() {
        let m2 = Colouring::modulo(2).unwrap();
        assert!(dilation_check(&[&schur()], &m2, 3, 12).unwrap());
        assert!(dilation_check(&[&schur()], &m2, 1, 12).unwrap());
        assert!(dilation_check(&[&QMatrix::from_ints(&[[1, 1]])], &m2, 5, 12).unwrap());
    }

    #[test]
    fn witness_text_format() {
        let w = WitnessColouring {
            bound: 3,
            colours: 2,
            table: vec![0, 1, 1],
        };
        assert_eq!(w.to_text(), "1 0\n2 1\n3 1\n");
        assert_eq!(
            Colouring::table_from_text(&w.to_text()).unwrap(),
            w.as_colouring()
        );
    }

    #[test]
    fn tampered_witness_fails() {
        let c = Colouring::modulo(1).unwrap();
        let mut w = find_monochromatic_solution(&[&schur()], &c, 3)
            .unwrap()
            .unwrap();
        w.vectors[0][2] += 1;
        assert!(!w.verify(&[&schur()], &c));
    }
}
