//! Columns condition for matrices whose columns carry unknown positive scalars.
//!
//! A [`ScalingTemplate`] lists columns, each either fixed or multiplied by one
//! of `k` unknowns. For a candidate ordered partition, [`build_system`]
//! produces the affine equalities the unknowns must satisfy for the scaled
//! matrix to meet the columns condition with that partition, and
//! [`solve_positive`] decides whether a strictly positive rational solution
//! exists.
//!
//! The system stays affine because a nonzero scalar never changes the span of
//! a column: "the sum of block `t` lies in the span of the earlier scaled
//! columns" is the same as `R_t * (scaled block sum) = 0`, where `R_t` is the
//! annihilator of the *unscaled* earlier columns and is known in advance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::columns::check_partition;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, residual_functionals, rref, QMatrix, QVector};
use crate::partition::{enumerate_ordered_partitions, CapExceeded, OrderedPartition};
use crate::rational::{self, Rational};

/// How one column of a template is scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scale {
    Fixed,
    Var(usize),
}

/// How a whole matrix enters a template built with [`ScalingTemplate::from_blocks`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockScale {
    /// Columns kept as they are.
    Fixed,
    /// One fresh unknown shared by every column of the matrix.
    Shared,
    /// One fresh unknown per column.
    PerColumn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingTemplate {
    dim: usize,
    columns: Vec<QVector>,
    scales: Vec<Scale>,
    num_vars: usize,
}

impl ScalingTemplate {
    pub fn new(dim: usize, columns: Vec<QVector>, scales: Vec<Scale>) -> Result<Self> {
        if columns.len() != scales.len() {
            return Err(Error::InvalidTemplate(format!(
                "{} columns but {} scale entries",
                columns.len(),
                scales.len()
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::Dimension(format!(
                "column of length {} in a template of dimension {dim}",
                c.len()
            )));
        }
        let vars: BTreeSet<usize> = scales
            .iter()
            .filter_map(|s| match s {
                Scale::Var(g) => Some(*g),
                Scale::Fixed => None,
            })
            .collect();
        let num_vars = vars.iter().next_back().map_or(0, |&g| g + 1);
        if vars.len() != num_vars {
            return Err(Error::InvalidTemplate(
                "every variable id below the largest must scale some column".into(),
            ));
        }
        Ok(ScalingTemplate {
            dim,
            columns,
            scales,
            num_vars,
        })
    }

    /// All columns fixed.
    pub fn unscaled(m: &QMatrix) -> Self {
        ScalingTemplate {
            dim: m.rows(),
            columns: m.columns(),
            scales: vec![Scale::Fixed; m.cols()],
            num_vars: 0,
        }
    }

    /// Concatenates matrices with equal row counts, allocating unknowns in
    /// block order.
    pub fn from_blocks(blocks: &[(&QMatrix, BlockScale)]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidTemplate("no matrices".into()))?;
        let dim = first.0.rows();
        let mut columns = Vec::new();
        let mut scales = Vec::new();
        let mut next_var = 0;
        for (t, (m, how)) in blocks.iter().enumerate() {
            if m.rows() != dim {
                return Err(Error::Dimension(format!(
                    "matrix {} has {} rows, expected {dim}",
                    t + 1,
                    m.rows()
                )));
            }
            match how {
                BlockScale::Fixed => scales.extend(std::iter::repeat_n(Scale::Fixed, m.cols())),
                BlockScale::Shared => {
                    scales.extend(std::iter::repeat_n(Scale::Var(next_var), m.cols()));
                    next_var += 1;
                }
                BlockScale::PerColumn => {
                    scales.extend((0..m.cols()).map(|j| Scale::Var(next_var + j)));
                    next_var += m.cols();
                }
            }
            columns.extend(m.columns());
        }
        Self::new(dim, columns, scales)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn columns(&self) -> &[QVector] {
        &self.columns
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    /// The matrix with every variable column multiplied by its value.
    pub fn assemble(&self, values: &[Rational]) -> Result<QMatrix> {
        if values.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "{} values for {} variables",
                values.len(),
                self.num_vars
            )));
        }
        let cols: Vec<QVector> = self
            .columns
            .iter()
            .zip(&self.scales)
            .map(|(c, s)| match s {
                Scale::Fixed => c.clone(),
                Scale::Var(g) => c.iter().map(|x| x * &values[*g]).collect(),
            })
            .collect();
        QMatrix::from_columns(self.dim, &cols)
    }
}

/// `coeffs . x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equality {
    #[serde(serialize_with = "ser_qvec")]
    pub coeffs: QVector,
    #[serde(serialize_with = "ser_q")]
    pub rhs: Rational,
}

impl Equality {
    fn is_trivial(&self) -> bool {
        self.rhs.is_zero() && linalg::is_zero_vector(&self.coeffs)
    }

    fn holds_at(&self, x: &[Rational]) -> bool {
        dot(&self.coeffs, x) == self.rhs
    }
}

/// Affine equalities over `num_vars` unknowns plus strict positivity of the
/// flagged unknowns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineSystem {
    pub num_vars: usize,
    pub equalities: Vec<Equality>,
    pub positive: Vec<bool>,
}

impl AffineSystem {
    /// A system with every unknown required strictly positive.
    pub fn positive(num_vars: usize, equalities: Vec<Equality>) -> Self {
        AffineSystem {
            num_vars,
            equalities,
            positive: vec![true; num_vars],
        }
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.equalities.iter().all(|e| e.holds_at(x))
            && x.iter()
                .zip(&self.positive)
                .all(|(v, &pos)| !pos || v.is_positive())
    }

    fn validate(&self) -> Result<()> {
        if self.positive.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "positivity flags for {} of {} variables",
                self.positive.len(),
                self.num_vars
            )));
        }
        if let Some(e) = self
            .equalities
            .iter()
            .find(|e| e.coeffs.len() != self.num_vars)
        {
            return Err(Error::Dimension(format!(
                "equality with {} coefficients over {} variables",
                e.coeffs.len(),
                self.num_vars
            )));
        }
        Ok(())
    }
}

fn ser_q<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::to_canonical(q))
}

fn ser_qvec<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational::to_canonical))
}

/// A strictly positive exact solution. `unique` is set when the system pins
/// every unknown; otherwise the positive solutions form a continuum and
/// `values` is the canonical representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveSolution {
    pub values: QVector,
    pub unique: bool,
}

/// Infeasibility proof for `E x = f, x_i > 0 (i in P)`: multipliers `lambda`
/// on the equalities and `mu >= 0` on the positivity constraints with
/// `lambda E + mu = 0`, and either `mu != 0` with `lambda . f >= 0`, or
/// `mu = 0` with `lambda . f != 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasWitness {
    pub equality_multipliers: QVector,
    pub positivity_multipliers: QVector,
}

impl FarkasWitness {
    /// Checks the witness against `sys` from scratch.
    pub fn certifies(&self, sys: &AffineSystem) -> bool {
        let lambda = &self.equality_multipliers;
        let mu = &self.positivity_multipliers;
        if lambda.len() != sys.equalities.len() || mu.len() != sys.num_vars {
            return false;
        }
        if mu
            .iter()
            .zip(&sys.positive)
            .any(|(m, &pos)| m.is_negative() || (!pos && !m.is_zero()))
        {
            return false;
        }
        for (j, m) in mu.iter().enumerate().take(sys.num_vars) {
            let combined: Rational = sys
                .equalities
                .iter()
                .zip(lambda)
                .map(|(e, l)| l * &e.coeffs[j])
                .sum::<Rational>()
                + m;
            if !combined.is_zero() {
                return false;
            }
        }
        let lf: Rational = sys
            .equalities
            .iter()
            .zip(lambda)
            .map(|(e, l)| l * &e.rhs)
            .sum();
        if linalg::is_zero_vector(mu) {
            !lf.is_zero()
        } else {
            !lf.is_negative()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(PositiveSolution),
    Infeasible(FarkasWitness),
}

/// Builds the system for template `t` and ordered partition `p`.
///
/// Block `I_1` contributes one equality per row of `sum_{i in I_1} s_i c_i = 0`;
/// each later block `I_t` contributes `R_t * sum_{i in I_t} s_i c_i = 0`, with
/// `R_t` the residual functionals of the unscaled columns of the earlier
/// blocks. Trivial `0 = 0` rows are dropped. Valid for nonzero scalars.
pub fn build_system(t: &ScalingTemplate, p: &OrderedPartition) -> Result<AffineSystem> {
    if p.num_columns() != t.num_columns() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} columns for a template with {}",
            p.num_columns(),
            t.num_columns()
        )));
    }
    let mut earlier: Vec<QVector> = Vec::new();
    let mut equalities = Vec::new();
    for block in p.blocks() {
        let r = residual_functionals(&earlier, t.dim)?;
        let proj: BTreeMap<usize, QVector> = block
            .iter()
            .map(|&i| Ok((i, r.mul_vec(&t.columns[i])?)))
            .collect::<Result<_>>()?;
        equalities.extend(block_equalities(t, r.rows(), block, |i| &proj[&i]));
        earlier.extend(block.iter().map(|&i| t.columns[i].clone()));
    }
    Ok(AffineSystem::positive(t.num_vars, equalities))
}

/// Equalities for one block, given each column's image under the current
/// residual functionals (vectors of length `width`).
pub(crate) fn block_equalities<'a, F>(
    t: &ScalingTemplate,
    width: usize,
    block: &[usize],
    projected: F,
) -> Vec<Equality>
where
    F: Fn(usize) -> &'a QVector,
{
    let mut out = Vec::with_capacity(width);
    for row in 0..width {
        let mut coeffs = vec![Rational::zero(); t.num_vars];
        let mut rhs = Rational::zero();
        for &i in block {
            let x = &projected(i)[row];
            if x.is_zero() {
                continue;
            }
            match t.scales[i] {
                Scale::Fixed => rhs -= x,
                Scale::Var(g) => coeffs[g] += x,
            }
        }
        let eq = Equality { coeffs, rhs };
        if !eq.is_trivial() {
            out.push(eq);
        }
    }
    out
}

/// A strictly positive solution of `sys`, if one exists.
pub fn feasible_positive(sys: &AffineSystem) -> Result<Option<PositiveSolution>> {
    Ok(match solve_positive(sys)? {
        Feasibility::Feasible(s) => Some(s),
        Feasibility::Infeasible(_) => None,
    })
}

/// `sum coeffs_j y_j + constant > 0` (or `>= 0`), remembering which original
/// constraints it combines.
#[derive(Clone, Debug)]
struct Inequality {
    coeffs: QVector,
    constant: Rational,
    strict: bool,
    lambda: QVector,
    mu: QVector,
}

impl Inequality {
    fn constant_holds(&self) -> bool {
        if self.strict {
            self.constant.is_positive()
        } else {
            !self.constant.is_negative()
        }
    }

    fn scale(&mut self, s: &Rational) {
        for x in self
            .coeffs
            .iter_mut()
            .chain(self.lambda.iter_mut())
            .chain(self.mu.iter_mut())
        {
            *x *= s;
        }
        self.constant *= s;
    }

    fn combine(a: &Inequality, wa: &Rational, b: &Inequality, wb: &Rational) -> Inequality {
        let mix = |x: &[Rational], y: &[Rational]| -> QVector {
            x.iter().zip(y).map(|(p, q)| p * wa + q * wb).collect()
        };
        Inequality {
            coeffs: mix(&a.coeffs, &b.coeffs),
            constant: &a.constant * wa + &b.constant * wb,
            strict: a.strict || b.strict,
            lambda: mix(&a.lambda, &b.lambda),
            mu: mix(&a.mu, &b.mu),
        }
    }
}

/// Drops satisfied constant rows and dominated rows (same direction, weaker
/// constant). A violated constant row is returned as the contradiction.
fn prune(list: Vec<Inequality>) -> std::result::Result<Vec<Inequality>, Box<Inequality>> {
    let mut best: BTreeMap<QVector, Inequality> = BTreeMap::new();
    for mut ineq in list {
        let Some(lead) = ineq.coeffs.iter().find(|c| !c.is_zero()).cloned() else {
            if ineq.constant_holds() {
                continue;
            }
            return Err(Box::new(ineq));
        };
        ineq.scale(&lead.abs().recip());
        let dominated = best.get(&ineq.coeffs).is_some_and(|kept| {
            kept.constant < ineq.constant
                || (kept.constant == ineq.constant && (kept.strict || !ineq.strict))
        });
        if !dominated {
            best.insert(ineq.coeffs.clone(), ineq);
        }
    }
    Ok(best.into_values().collect())
}

/// Decides strict positive feasibility exactly.
///
/// Equalities are eliminated first by Gauss-Jordan reduction (tracking each
/// reduced row as a combination of the input rows); the pivot unknowns are
/// then expressed through the free ones, and Fourier-Motzkin elimination runs
/// over the free unknowns with strictness carried through every combination.
/// On success, free unknowns are fixed by back substitution, each taking the
/// simplest admissible rational (1 whenever 1 is admissible). On failure the
/// contradiction is returned as a [`FarkasWitness`].
pub fn solve_positive(sys: &AffineSystem) -> Result<Feasibility> {
    sys.validate()?;
    let n = sys.num_vars;
    let q = sys.equalities.len();

    // [E | f | I]
    let mut aug = QMatrix::zeros(q, n + 1 + q);
    for (i, e) in sys.equalities.iter().enumerate() {
        for j in 0..n {
            aug[(i, j)] = e.coeffs[j].clone();
        }
        aug[(i, n)] = e.rhs.clone();
        aug[(i, n + 1 + i)] = Rational::one();
    }
    let red = rref(&aug);

    struct PivotRow {
        var: usize,
        row: usize,
    }
    let mut pivot_rows = Vec::new();
    let mut is_pivot = vec![false; n];
    for (row, &p) in red.pivots.iter().enumerate() {
        if p < n {
            is_pivot[p] = true;
            pivot_rows.push(PivotRow { var: p, row });
        } else if p == n {
            let lambda = red.matrix.row(row)[n + 1..].to_vec();
            return Ok(Feasibility::Infeasible(FarkasWitness {
                equality_multipliers: lambda,
                positivity_multipliers: vec![Rational::zero(); n],
            }));
        }
    }
    let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let nf = free.len();

    let mut initial = Vec::new();
    for pr in &pivot_rows {
        if !sys.positive[pr.var] {
            continue;
        }
        let row = red.matrix.row(pr.row);
        let mut mu = vec![Rational::zero(); n];
        mu[pr.var] = Rational::one();
        initial.push(Inequality {
            coeffs: free.iter().map(|&f| -row[f].clone()).collect(),
            constant: row[n].clone(),
            strict: true,
            lambda: row[n + 1..].iter().map(|x| -x.clone()).collect(),
            mu,
        });
    }
    for (pos, &f) in free.iter().enumerate() {
        if !sys.positive[f] {
            continue;
        }
        let mut coeffs = vec![Rational::zero(); nf];
        coeffs[pos] = Rational::one();
        let mut mu = vec![Rational::zero(); n];
        mu[f] = Rational::one();
        initial.push(Inequality {
            coeffs,
            constant: Rational::zero(),
            strict: true,
            lambda: vec![Rational::zero(); q],
            mu,
        });
    }

    let infeasible = |ineq: Inequality| {
        Feasibility::Infeasible(FarkasWitness {
            equality_multipliers: ineq.lambda,
            positivity_multipliers: ineq.mu,
        })
    };

    let mut current = match prune(initial) {
        Ok(c) => c,
        Err(bad) => return Ok(infeasible(*bad)),
    };
    let mut stages: Vec<Vec<Inequality>> = Vec::with_capacity(nf);
    for var in 0..nf {
        let mut next = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for ineq in &current {
            let c = &ineq.coeffs[var];
            if c.is_positive() {
                pos.push(ineq);
            } else if c.is_negative() {
                neg.push(ineq);
            } else {
                next.push(ineq.clone());
            }
        }
        for p in &pos {
            for m in &neg {
                let a = p.coeffs[var].clone();
                let b = -m.coeffs[var].clone();
                next.push(Inequality::combine(p, &b, m, &a));
            }
        }
        stages.push(current);
        current = match prune(next) {
            Ok(c) => c,
            Err(bad) => return Ok(infeasible(*bad)),
        };
    }
    debug_assert!(current.is_empty());

    let mut y = vec![Rational::zero(); nf];
    for var in (0..nf).rev() {
        let mut lower: Option<(Rational, bool)> = None;
        let mut upper: Option<(Rational, bool)> = None;
        for ineq in &stages[var] {
            let c = &ineq.coeffs[var];
            if c.is_zero() {
                continue;
            }
            let rest: Rational = &ineq.constant
                + (var + 1..nf)
                    .map(|j| &ineq.coeffs[j] * &y[j])
                    .sum::<Rational>();
            let bound = -rest / c;
            if c.is_positive() {
                let tighter = match &lower {
                    None => true,
                    Some((l, ls)) => bound > *l || (bound == *l && ineq.strict && !ls),
                };
                if tighter {
                    lower = Some((bound, ineq.strict));
                }
            } else {
                let tighter = match &upper {
                    None => true,
                    Some((h, hs)) => bound < *h || (bound == *h && ineq.strict && !hs),
                };
                if tighter {
                    upper = Some((bound, ineq.strict));
                }
            }
        }
        y[var] = rational::simplest_between(
            lower.as_ref().map(|(v, s)| (v, *s)),
            upper.as_ref().map(|(v, s)| (v, *s)),
        )
        .ok_or_else(|| Error::Internal("empty range during back substitution".into()))?;
    }

    let mut x = vec![Rational::zero(); n];
    for (pos, &f) in free.iter().enumerate() {
        x[f] = y[pos].clone();
    }
    for pr in &pivot_rows {
        let row = red.matrix.row(pr.row);
        let mut val = row[n].clone();
        for (pos, &f) in free.iter().enumerate() {
            val -= &row[f] * &y[pos];
        }
        x[pr.var] = val;
    }
    if !sys.is_satisfied_by(&x) {
        return Err(Error::Internal(
            "back-substituted point violates the system".into(),
        ));
    }
    Ok(Feasibility::Feasible(PositiveSolution {
        values: x,
        unique: nf == 0,
    }))
}

/// A set of rationals that is either finite or cofinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarSet {
    Finite(BTreeSet<Rational>),
    /// Every rational except the listed ones.
    AllExcept(BTreeSet<Rational>),
}

impl ScalarSet {
    pub fn empty() -> Self {
        ScalarSet::Finite(BTreeSet::new())
    }

    pub fn all() -> Self {
        ScalarSet::AllExcept(BTreeSet::new())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            ScalarSet::Finite(s) => s.contains(x),
            ScalarSet::AllExcept(s) => !s.contains(x),
        }
    }

    pub fn union(&self, other: &ScalarSet) -> ScalarSet {
        use ScalarSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a.union(b).cloned().collect()),
            (AllExcept(a), AllExcept(b)) => AllExcept(a.intersection(b).cloned().collect()),
            (AllExcept(a), Finite(b)) | (Finite(b), AllExcept(a)) => {
                AllExcept(a.difference(b).cloned().collect())
            }
        }
    }

    /// Whether the set has a strictly positive member.
    pub fn has_positive(&self) -> bool {
        match self {
            ScalarSet::Finite(s) => s.iter().any(Signed::is_positive),
            ScalarSet::AllExcept(_) => true,
        }
    }
}

impl fmt::Display for ScalarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<Rational>| {
            s.iter()
                .map(rational::to_canonical)
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            ScalarSet::Finite(s) => write!(f, "{{{}}}", list(s)),
            ScalarSet::AllExcept(s) if s.is_empty() => write!(f, "all rationals"),
            ScalarSet::AllExcept(s) => write!(f, "all rationals except {{{}}}", list(s)),
        }
    }
}

/// Every value (of any sign) of the template's single unknown for which the
/// scaled matrix meets the columns condition with partition `p`. A template
/// without unknowns yields either everything or nothing.
pub fn enumerate_feasible_scalars(t: &ScalingTemplate, p: &OrderedPartition) -> Result<ScalarSet> {
    if t.num_vars > 1 {
        return Err(Error::Unsupported(format!(
            "scalar enumeration needs at most one unknown, template has {}",
            t.num_vars
        )));
    }
    let sys = build_system(t, p)?;
    if t.num_vars == 0 {
        return Ok(if sys.equalities.is_empty() {
            ScalarSet::all()
        } else {
            ScalarSet::empty()
        });
    }

    // Nonzero values: the system is exact for them.
    let mut candidate: Option<Rational> = None;
    let mut consistent = true;
    for e in &sys.equalities {
        let a = &e.coeffs[0];
        if a.is_zero() {
            consistent = false;
            break;
        }
        let x = &e.rhs / a;
        match &candidate {
            None => candidate = Some(x),
            Some(c) if *c == x => {}
            Some(_) => {
                consistent = false;
                break;
            }
        }
    }
    let zero = Rational::zero();
    let mut set = match (consistent, candidate) {
        (false, _) => ScalarSet::empty(),
        (true, None) => ScalarSet::AllExcept([zero.clone()].into()),
        (true, Some(c)) if c.is_zero() => ScalarSet::empty(),
        (true, Some(c)) => ScalarSet::Finite([c].into()),
    };

    // Zero kills the scaled columns and shrinks spans, so test it directly.
    let at_zero = t.assemble(std::slice::from_ref(&zero))?;
    if check_partition(&at_zero, p)?.is_some() {
        set = set.union(&ScalarSet::Finite([zero].into()));
    }
    Ok(set)
}

/// Union of [`enumerate_feasible_scalars`] over every ordered partition of
/// the template's columns, visiting at most `cap` partitions.
pub fn feasible_scalars_all_partitions(
    t: &ScalingTemplate,
    cap: Option<u64>,
) -> Result<std::result::Result<ScalarSet, CapExceeded>> {
    let mut acc = ScalarSet::empty();
    for p in enumerate_ordered_partitions(t.num_columns(), cap)? {
        match p {
            Ok(p) => acc = acc.union(&enumerate_feasible_scalars(t, &p)?),
            Err(cap) => return Ok(Err(cap)),
        }
    }
    Ok(Ok(acc))
}
