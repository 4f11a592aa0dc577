//! The columns condition: checking a given ordered partition, searching for
//! one, independent certificate verification, and the first-entries matrix
//! built from a certificate.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::feasibility::ScalingTemplate;
use crate::linalg::{is_zero_vector, span_membership, sum_vectors, QMatrix, QVector};
use crate::partition::OrderedPartition;
use crate::rational::Rational;
use crate::search::{search_partition, SearchLimits, SearchOutcome};

/// An ordered partition together with, for every block after the first,
/// the coefficients on earlier columns that reproduce the block's column sum.
///
/// `witnesses[t - 1]` belongs to block `t` (0-based, `t >= 1`) and maps
/// earlier column indices to their coefficients; omitted columns count as 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub partition: OrderedPartition,
    pub witnesses: Vec<BTreeMap<usize, Rational>>,
}

fn block_sum(a: &QMatrix, block: &[usize]) -> QVector {
    let cols: Vec<QVector> = block.iter().map(|&i| a.column(i)).collect();
    sum_vectors(a.rows(), &cols)
}

fn require_width(a: &QMatrix, p: &OrderedPartition) -> Result<()> {
    if p.num_columns() != a.cols() {
        return Err(Error::Dimension(format!(
            "partition covers {} columns but the matrix has {}",
            p.num_columns(),
            a.cols()
        )));
    }
    Ok(())
}

/// A certificate if `p` witnesses the columns condition for `a`.
pub fn check_partition(a: &QMatrix, p: &OrderedPartition) -> Result<Option<Certificate>> {
    require_width(a, p)?;
    let blocks = p.blocks();
    if !is_zero_vector(&block_sum(a, &blocks[0])) {
        return Ok(None);
    }
    let mut earlier: Vec<usize> = blocks[0].clone();
    let mut witnesses = Vec::with_capacity(blocks.len() - 1);
    for block in &blocks[1..] {
        earlier.sort_unstable();
        let basis: Vec<QVector> = earlier.iter().map(|&i| a.column(i)).collect();
        let Some(coeffs) = span_membership(&basis, &block_sum(a, block))? else {
            return Ok(None);
        };
        let w: BTreeMap<usize, Rational> = earlier
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&i, c)| (i, c))
            .collect();
        witnesses.push(w);
        earlier.extend(block);
    }
    Ok(Some(Certificate {
        partition: p.clone(),
        witnesses,
    }))
}

/// Checks every claim of `cert` against `a` directly.
pub fn verify_certificate(a: &QMatrix, cert: &Certificate) -> bool {
    let p = &cert.partition;
    if p.num_columns() != a.cols() || cert.witnesses.len() + 1 != p.len() {
        return false;
    }
    let blocks = p.blocks();
    if !is_zero_vector(&block_sum(a, &blocks[0])) {
        return false;
    }
    let position = p.block_of();
    for (t, w) in cert.witnesses.iter().enumerate() {
        let t = t + 1;
        let mut combo = vec![Rational::zero(); a.rows()];
        for (&i, c) in w {
            if i >= a.cols() || position[i] >= t {
                return false;
            }
            for (r, x) in combo.iter_mut().enumerate() {
                *x += c * &a[(r, i)];
            }
        }
        if combo != block_sum(a, &blocks[t]) {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnsCondition {
    Satisfied {
        certificate: Certificate,
        nodes: u64,
    },
    Fails {
        nodes: u64,
    },
    Undecided {
        cap: u64,
    },
}

/// The first certificate in canonical order, or a definite failure after an
/// exhaustive search, or undecided when the node budget runs out.
pub fn decide_columns_condition(a: &QMatrix, limits: &SearchLimits) -> Result<ColumnsCondition> {
    let t = ScalingTemplate::unscaled(a);
    Ok(match search_partition(&t, limits)? {
        SearchOutcome::Found {
            partition, nodes, ..
        } => {
            let certificate = check_partition(a, &partition)?.ok_or_else(|| {
                Error::Internal(format!(
                    "search returned {partition}, which fails the check"
                ))
            })?;
            ColumnsCondition::Satisfied { certificate, nodes }
        }
        SearchOutcome::Exhausted { nodes } => ColumnsCondition::Fails { nodes },
        SearchOutcome::CapExceeded { cap } => ColumnsCondition::Undecided { cap },
    })
}

/// A matrix whose rows are nonzero, with positive first nonzero entries that
/// agree whenever they sit in the same column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstEntriesMatrix(QMatrix);

impl FirstEntriesMatrix {
    pub fn new(g: QMatrix) -> Result<Self> {
        if first_entries_shape(&g).is_none() {
            return Err(Error::InvalidCertificate(
                "not a first-entries matrix".into(),
            ));
        }
        Ok(FirstEntriesMatrix(g))
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> QMatrix {
        self.0
    }

    pub fn is_unital(&self) -> bool {
        first_entries_shape(&self.0) == Some(true)
    }
}

/// `Some(unital)` if `g` is a first-entries matrix, `None` otherwise.
pub fn first_entries_shape(g: &QMatrix) -> Option<bool> {
    let mut first: Vec<Option<&Rational>> = vec![None; g.cols()];
    let mut unital = true;
    for r in 0..g.rows() {
        let (c, x) = g.row(r).iter().enumerate().find(|(_, x)| !x.is_zero())?;
        if !x.is_positive() {
            return None;
        }
        match first[c] {
            Some(y) if y != x => return None,
            _ => first[c] = Some(x),
        }
        unital &= x.is_one();
    }
    Some(unital)
}

/// The `v x m` matrix `G` with `A G = 0`: row `i` in block `t` has 1 in
/// column `t`, and `-w_s(i)` in each later column `s` whose witness uses `i`.
pub fn first_entries_from_certificate(
    a: &QMatrix,
    cert: &Certificate,
) -> Result<FirstEntriesMatrix> {
    if !verify_certificate(a, cert) {
        return Err(Error::InvalidCertificate(
            "certificate does not verify against the matrix".into(),
        ));
    }
    let m = cert.partition.len();
    let mut g = QMatrix::zeros(a.cols(), m);
    for (t, block) in cert.partition.blocks().iter().enumerate() {
        for &i in block {
            g[(i, t)] = Rational::one();
        }
    }
    for (s, w) in cert.witnesses.iter().enumerate() {
        for (&i, c) in w {
            g[(i, s + 1)] = -c.clone();
        }
    }
    FirstEntriesMatrix::new(g)
}

/// The common value `c > 0` of every row's first nonzero entry, when all rows
/// are nonzero and such a value exists.
pub fn is_first_entries_sufficient(a: &QMatrix) -> Option<Rational> {
    let mut common: Option<&Rational> = None;
    for r in 0..a.rows() {
        let x = a.row(r).iter().find(|x| !x.is_zero())?;
        if !x.is_positive() || common.is_some_and(|c| c != x) {
            return None;
        }
        common = Some(x);
    }
    common.cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn schur() -> QMatrix {
        QMatrix::from_ints(&[[1, 1, -1]])
    }

    fn vdw() -> QMatrix {
        QMatrix::from_ints(&[[-1, 1, 0, 0, -1], [0, -1, 1, 0, -1], [0, 0, -1, 1, -1]])
    }

    fn part(blocks: &[&[usize]], v: usize) -> OrderedPartition {
        let b: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        OrderedPartition::from_one_based(&b, v).unwrap()
    }

    #[test]
    fn schur_partition_certifies() {
        let cert = check_partition(&schur(), &part(&[&[1, 3], &[2]], 3))
            .unwrap()
            .unwrap();
        assert_eq!(cert.witnesses.len(), 1);
        assert_eq!(cert.witnesses[0], BTreeMap::from([(0, int(1))]));
        assert!(verify_certificate(&schur(), &cert));
        assert!(check_partition(&schur(), &part(&[&[1, 2], &[3]], 3))
            .unwrap()
            .is_none());
    }

    #[test]
    fn vdw_witnesses_reproduce_last_column() {
        let a = vdw();
        let cert = check_partition(&a, &part(&[&[1, 2, 3, 4], &[5]], 5))
            .unwrap()
            .unwrap();
        assert!(verify_certificate(&a, &cert));

        // Another valid witness for the same block: 1, 0, -1, -2.
        let mut other = cert.clone();
        other.witnesses[0] = BTreeMap::from([(0, int(1)), (2, int(-1)), (3, int(-2))]);
        assert!(verify_certificate(&a, &other));
    }

    #[test]
    fn tampering_is_detected() {
        let a = schur();
        let mut cert = check_partition(&a, &part(&[&[1, 3], &[2]], 3))
            .unwrap()
            .unwrap();
        cert.witnesses[0].insert(0, int(2));
        assert!(!verify_certificate(&a, &cert));

        // A witness may not reference its own block or a later one.
        let mut cert = check_partition(&a, &part(&[&[1, 3], &[2]], 3))
            .unwrap()
            .unwrap();
        cert.witnesses[0] = BTreeMap::from([(1, int(1))]);
        assert!(!verify_certificate(&a, &cert));

        let cert = check_partition(&a, &part(&[&[1, 3], &[2]], 3))
            .unwrap()
            .unwrap();
        assert!(!verify_certificate(
            &QMatrix::from_ints(&[[1, 1, 1]]),
            &cert
        ));
    }

    #[test]
    fn first_entries_for_schur() {
        let a = schur();
        let cert = check_partition(&a, &part(&[&[1, 3], &[2]], 3))
            .unwrap()
            .unwrap();
        let g = first_entries_from_certificate(&a, &cert).unwrap();
        assert_eq!(g.matrix(), &QMatrix::from_ints(&[[1, -1], [0, 1], [1, 0]]));
        assert!(g.is_unital());
        assert!(a.mul(g.matrix()).unwrap().is_zero());
    }

    #[test]
    fn single_block_gives_all_ones_column() {
        let a = QMatrix::from_ints(&[[1, -1], [2, -2]]);
        let cert = check_partition(&a, &part(&[&[1, 2]], 2)).unwrap().unwrap();
        let g = first_entries_from_certificate(&a, &cert).unwrap();
        assert_eq!(g.matrix(), &QMatrix::from_ints(&[[1], [1]]));
    }

    #[test]
    fn vdw_first_entries() {
        let a = vdw();
        let cert = check_partition(&a, &part(&[&[1, 2, 3, 4], &[5]], 5))
            .unwrap()
            .unwrap();
        let g = first_entries_from_certificate(&a, &cert).unwrap();
        assert_eq!((g.matrix().rows(), g.matrix().cols()), (5, 2));
        assert!(g.is_unital());
        assert!(a.mul(g.matrix()).unwrap().is_zero());
    }

    #[test]
    fn first_entries_rejects_bad_certificate() {
        let a = schur();
        let mut cert = check_partition(&a, &part(&[&[1, 3], &[2]], 3))
            .unwrap()
            .unwrap();
        cert.witnesses[0].insert(0, int(5));
        assert!(first_entries_from_certificate(&a, &cert).is_err());
    }

    #[test]
    fn shape_checks() {
        assert_eq!(
            first_entries_shape(&QMatrix::from_ints(&[[1, 0], [0, 2], [1, 5]])),
            Some(false)
        );
        assert_eq!(
            first_entries_shape(&QMatrix::from_ints(&[[1, 0], [0, 1], [1, 5]])),
            Some(true)
        );
        assert_eq!(
            first_entries_shape(&QMatrix::from_ints(&[[1, 0], [2, 1]])),
            None
        );
        assert_eq!(first_entries_shape(&QMatrix::from_ints(&[[0, 0]])), None);
        assert_eq!(first_entries_shape(&QMatrix::from_ints(&[[0, -1]])), None);
    }

    #[test]
    fn glance_condition() {
        let schur_ipr = QMatrix::from_ints(&[[1, 0], [0, 1], [1, 1]]);
        assert_eq!(is_first_entries_sufficient(&schur_ipr), Some(int(1)));
        assert_eq!(
            is_first_entries_sufficient(&QMatrix::from_ints(&[[1, 0], [0, 2]])),
            None
        );
        assert_eq!(
            is_first_entries_sufficient(&QMatrix::from_ints(&[[0]])),
            None
        );
        assert_eq!(
            is_first_entries_sufficient(&QMatrix::from_ints(&[[3, -1], [0, 3]])),
            Some(int(3))
        );
    }

    #[test]
    fn decide_known_examples() {
        let limits = SearchLimits::default();
        match decide_columns_condition(&schur(), &limits).unwrap() {
            ColumnsCondition::Satisfied { certificate, .. } => {
                assert_eq!(certificate.partition.one_based(), vec![vec![1, 3], vec![2]]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            decide_columns_condition(&QMatrix::from_ints(&[[1, 1]]), &limits).unwrap(),
            ColumnsCondition::Fails { .. }
        ));
        let ext = QMatrix::from_ints(&[
            [1, 1, 0, -1, 0, 0, 0],
            [1, 0, 1, 0, -1, 0, 0],
            [0, 1, 1, 0, 0, -1, 0],
            [1, 1, 1, 0, 0, 0, -1],
        ]);
        let stated = part(&[&[1, 4, 5, 7], &[2, 6], &[3]], 7);
        assert!(check_partition(&ext, &stated).unwrap().is_some());
        match decide_columns_condition(&ext, &limits).unwrap() {
            ColumnsCondition::Satisfied { certificate, .. } => {
                assert!(verify_certificate(&ext, &certificate));
            }
            other => panic!("{other:?}"),
        }
    }
}
