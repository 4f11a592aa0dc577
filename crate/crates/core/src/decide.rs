//! Decision procedures: kernel, multiply, doubly kernel, doubly image and
//! image partition regularity, all reduced to a scaled columns-condition
//! search.

use num_traits::{Signed, Zero};

use crate::columns::{check_partition, verify_certificate, Certificate};
use crate::error::{Error, Result};
use crate::feasibility::{BlockScale, ScalingTemplate};
use crate::linalg::{is_zero_vector, sum_vectors, QMatrix, QVector};
use crate::partition::{check_width, full_mask, mask_to_indices, next_submask};
use crate::rational::{is_integral, Rational};
use crate::search::{search_partition, SearchLimits, SearchOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    /// The node budget ran out first.
    Undecided {
        cap: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    /// Named positive scalars in report order, e.g. `c2, c3` or `b`.
    pub scalars: Vec<(String, Rational)>,
    /// Whether the scalars are forced by the certificate's partition; absent
    /// when there are no scalars.
    pub unique: Option<bool>,
    pub certificate: Option<Certificate>,
    /// The scaled matrix the certificate refers to.
    pub assembled: Option<QMatrix>,
    /// Candidate blocks examined.
    pub nodes: u64,
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    pub fn scalar(&self, name: &str) -> Option<&Rational> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, q)| q)
    }
}

fn decide_template(
    t: &ScalingTemplate,
    names: Vec<String>,
    limits: &SearchLimits,
) -> Result<Decision> {
    debug_assert_eq!(names.len(), t.num_vars());
    let undecided = |verdict, nodes| Decision {
        verdict,
        scalars: Vec::new(),
        unique: None,
        certificate: None,
        assembled: None,
        nodes,
    };
    match search_partition(t, limits)? {
        SearchOutcome::Found {
            partition,
            solution,
            nodes,
        } => {
            let assembled = t.assemble(&solution.values)?;
            let certificate = check_partition(&assembled, &partition)?
                .filter(|c| verify_certificate(&assembled, c))
                .ok_or_else(|| {
                    Error::Internal(format!(
                        "scaled matrix fails the found partition {partition}"
                    ))
                })?;
            if !solution.values.iter().all(Signed::is_positive) {
                return Err(Error::Internal(
                    "search returned a non-positive scalar".into(),
                ));
            }
            Ok(Decision {
                verdict: Verdict::Yes,
                unique: (t.num_vars() > 0).then_some(solution.unique),
                scalars: names.into_iter().zip(solution.values).collect(),
                certificate: Some(certificate),
                assembled: Some(assembled),
                nodes,
            })
        }
        SearchOutcome::Exhausted { nodes } => Ok(undecided(Verdict::No, nodes)),
        SearchOutcome::CapExceeded { cap } => Ok(undecided(Verdict::Undecided { cap }, cap)),
    }
}

/// Kernel partition regularity of `a`, i.e. the columns condition.
pub fn is_kpr(a: &QMatrix, limits: &SearchLimits) -> Result<Decision> {
    decide_template(&ScalingTemplate::unscaled(a), Vec::new(), limits)
}

/// Whether positive `c_2, ..., c_k` exist with `(A_1 c_2 A_2 ... c_k A_k)`
/// kernel partition regular. `A_1` stays unscaled.
pub fn multiply_kpr(mats: &[&QMatrix], limits: &SearchLimits) -> Result<Decision> {
    if mats.len() < 2 {
        return Err(Error::Dimension(format!(
            "multiply KPR needs at least two matrices, got {}",
            mats.len()
        )));
    }
    let mut blocks = vec![(mats[0], BlockScale::Fixed)];
    blocks.extend(mats[1..].iter().map(|&m| (m, BlockScale::Shared)));
    let t = ScalingTemplate::from_blocks(&blocks)?;
    let names = (2..=mats.len()).map(|i| format!("c{i}")).collect();
    decide_template(&t, names, limits)
}

pub fn doubly_kpr(a: &QMatrix, b: &QMatrix, limits: &SearchLimits) -> Result<Decision> {
    multiply_kpr(&[a, b], limits)
}

/// Doubly image partition regularity: `(A  -b I_u)` kernel partition
/// regular for some positive `b`, reported as scalar `b`.
pub fn doubly_ipr(a: &QMatrix, limits: &SearchLimits) -> Result<Decision> {
    let neg_i = QMatrix::identity(a.rows()).negated();
    let mut d = doubly_kpr(a, &neg_i, limits)?;
    for (name, _) in &mut d.scalars {
        *name = "b".into();
    }
    Ok(d)
}

/// Image partition regularity: `(A diag(e)  -I_u)` kernel partition regular
/// for some positive `e_1, ..., e_v`.
pub fn is_ipr(a: &QMatrix, limits: &SearchLimits) -> Result<Decision> {
    let neg_i = QMatrix::identity(a.rows()).negated();
    let t =
        ScalingTemplate::from_blocks(&[(a, BlockScale::PerColumn), (&neg_i, BlockScale::Fixed)])?;
    let names = (1..=a.cols()).map(|j| format!("e{j}")).collect();
    decide_template(&t, names, limits)
}

/// The first nonempty set of columns (in increasing mask order) summing to
/// zero, 0-based.
pub fn zero_column_subset_exists(a: &QMatrix) -> Result<Option<Vec<usize>>> {
    check_width(a.cols())?;
    let cols: Vec<QVector> = a.columns();
    let all = full_mask(a.cols());
    let mut cur = 0;
    while let Some(mask) = next_submask(all, cur) {
        cur = mask;
        let idx = mask_to_indices(mask);
        if is_zero_vector(&sum_vectors(a.rows(), idx.iter().map(|&i| &cols[i]))) {
            return Ok(Some(idx));
        }
    }
    Ok(None)
}

/// What the doubly-IPR decision says about integrality of `b` for an integer
/// matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerBReport {
    /// The matrix is not doubly IPR, so there is no `b` to examine.
    NotDoublyIpr {
        decision: Decision,
    },
    Undecided {
        decision: Decision,
    },
    /// Some columns sum to zero; `b` may legitimately be a non-integer.
    HypothesisFails {
        zero_subset: Vec<usize>,
        decision: Decision,
    },
    Holds {
        decision: Decision,
        b: Rational,
        b_is_positive_integer: bool,
        /// A row `t` (0-based) whose identity column lies in the first block.
        row: Option<usize>,
        /// `sum of a[t][j]` over the columns `j` of `A` in the first block.
        row_sum: Option<Rational>,
        /// `b == row_sum`.
        identity_holds: bool,
    },
}

pub fn integer_b_analysis(a: &QMatrix, limits: &SearchLimits) -> Result<IntegerBReport> {
    if !a.is_integral() {
        return Err(Error::Unsupported(
            "integer-b analysis needs an integer matrix".into(),
        ));
    }
    let zero_subset = zero_column_subset_exists(a)?;
    let decision = doubly_ipr(a, limits)?;
    match decision.verdict {
        Verdict::No => return Ok(IntegerBReport::NotDoublyIpr { decision }),
        Verdict::Undecided { .. } => return Ok(IntegerBReport::Undecided { decision }),
        Verdict::Yes => {}
    }
    if let Some(zero_subset) = zero_subset {
        return Ok(IntegerBReport::HypothesisFails {
            zero_subset,
            decision,
        });
    }
    let b = decision
        .scalar("b")
        .cloned()
        .ok_or_else(|| Error::Internal("doubly IPR decision without b".into()))?;
    let cert = decision
        .certificate
        .as_ref()
        .ok_or_else(|| Error::Internal("doubly IPR decision without certificate".into()))?;
    let v = a.cols();
    let first = &cert.partition.blocks()[0];
    let row = first.iter().find(|&&i| i >= v).map(|&i| i - v);
    let row_sum = row.map(|t| {
        first
            .iter()
            .filter(|&&j| j < v)
            .fold(Rational::zero(), |acc, &j| acc + &a[(t, j)])
    });
    let identity_holds = row_sum.as_ref() == Some(&b);
    Ok(IntegerBReport::Holds {
        b_is_positive_integer: b.is_positive() && is_integral(&b),
        b,
        row,
        row_sum,
        identity_holds,
        decision,
    })
}

/// `b I_v` stacked over `A`.
pub fn stacked_with_scaled_identity(a: &QMatrix, b: &Rational) -> Result<QMatrix> {
    let top = QMatrix::identity(a.cols()).scaled(b);
    QMatrix::vstack(&[&top, a])
}
