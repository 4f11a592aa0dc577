//! JSON forms of certificates, decisions and related reports.
//!
//! Rationals are strings in lowest terms (`"p/q"`, or `"p"` for integers)
//! and column and block indices are 1-based. Key order is fixed, so equal
//! values always serialise to identical bytes.

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::columns::Certificate;
use crate::decide::{Decision, IntegerBReport, Verdict};
use crate::error::{Error, Result};
use crate::feasibility::ScalarSet;
use crate::linalg::QMatrix;
use crate::partition::OrderedPartition;
use crate::rational::{parse_json_field, to_canonical, Rational};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDto {
    partition: Vec<Vec<usize>>,
    witnesses: Vec<WitnessDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessDto {
    block: usize,
    column: usize,
    coeff: String,
}

fn certificate_dto(cert: &Certificate) -> CertificateDto {
    let witnesses = cert
        .witnesses
        .iter()
        .enumerate()
        .flat_map(|(t, w)| {
            w.iter().map(move |(&i, c)| WitnessDto {
                block: t + 2,
                column: i + 1,
                coeff: to_canonical(c),
            })
        })
        .collect();
    CertificateDto {
        partition: cert.partition.one_based(),
        witnesses,
    }
}

pub fn certificate_to_json(cert: &Certificate) -> Value {
    serde_json::to_value(certificate_dto(cert)).expect("certificate serialises")
}

/// Parses a certificate. The column count is taken from the partition; the
/// result still has to be checked against a matrix.
pub fn certificate_from_json(text: &str) -> Result<Certificate> {
    let dto: CertificateDto = serde_json::from_str(text)
        .map_err(|e| Error::InvalidCertificate(format!("malformed certificate JSON: {e}")))?;
    let v: usize = dto.partition.iter().map(Vec::len).sum();
    let partition = OrderedPartition::from_one_based(&dto.partition, v)?;
    let m = partition.len();
    let mut witnesses: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); m - 1];
    for w in dto.witnesses {
        if w.block < 2 || w.block > m {
            return Err(Error::InvalidCertificate(format!(
                "witness block {} outside 2..={m}",
                w.block
            )));
        }
        if w.column < 1 || w.column > v {
            return Err(Error::InvalidCertificate(format!(
                "witness column {} outside 1..={v}",
                w.column
            )));
        }
        let coeff = parse_json_field(&w.coeff, "witness coefficient")?;
        if witnesses[w.block - 2].insert(w.column - 1, coeff).is_some() {
            return Err(Error::InvalidCertificate(format!(
                "column {} listed twice for block {}",
                w.column, w.block
            )));
        }
    }
    Ok(Certificate {
        partition,
        witnesses,
    })
}

pub fn matrix_to_json(m: &QMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|q| Value::String(to_canonical(q)))
                        .collect(),
                )
            })
            .collect(),
    )
}

struct Scalars<'a>(&'a [(String, Rational)]);

impl Serialize for Scalars<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (name, q) in self.0 {
            map.serialize_entry(name, &to_canonical(q))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct DecisionDto<'a> {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalars: Option<Scalars<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unique: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assembled: Option<Value>,
    nodes: u64,
}

pub fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Yes => "YES",
        Verdict::No => "NO",
        Verdict::Undecided { .. } => "UNDECIDED",
    }
}

pub fn decision_to_json(d: &Decision) -> Value {
    let dto = DecisionDto {
        verdict: verdict_name(&d.verdict),
        cap: match d.verdict {
            Verdict::Undecided { cap } => Some(cap),
            _ => None,
        },
        scalars: (!d.scalars.is_empty()).then_some(Scalars(&d.scalars)),
        unique: d.unique,
        certificate: d.certificate.as_ref().map(certificate_dto),
        assembled: d.assembled.as_ref().map(matrix_to_json),
        nodes: d.nodes,
    };
    serde_json::to_value(dto).expect("decision serialises")
}

pub fn scalar_set_to_json(s: &ScalarSet) -> Value {
    let (kind, values) = match s {
        ScalarSet::Finite(v) => ("finite", v),
        ScalarSet::AllExcept(v) => ("all_except", v),
    };
    serde_json::json!({
        "kind": kind,
        "values": values.iter().map(to_canonical).collect::<Vec<_>>(),
    })
}

pub fn integer_b_to_json(r: &IntegerBReport) -> Value {
    let zero_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    match r {
        IntegerBReport::NotDoublyIpr { decision } => serde_json::json!({
            "status": "not_doubly_ipr",
            "decision": decision_to_json(decision),
        }),
        IntegerBReport::Undecided { decision } => serde_json::json!({
            "status": "undecided",
            "decision": decision_to_json(decision),
        }),
        IntegerBReport::HypothesisFails {
            zero_subset,
            decision,
        } => serde_json::json!({
            "status": "hypothesis_fails",
            "zero_subset": zero_based(zero_subset),
            "decision": decision_to_json(decision),
        }),
        IntegerBReport::Holds {
            decision,
            b,
            b_is_positive_integer,
            row,
            row_sum,
            identity_holds,
        } => serde_json::json!({
            "status": "hypothesis_holds",
            "b": to_canonical(b),
            "b_is_positive_integer": b_is_positive_integer,
            "row": row.map(|t| t + 1),
            "row_sum": row_sum.as_ref().map(to_canonical),
            "identity_holds": identity_holds,
            "decision": decision_to_json(decision),
        }),
    }
}

/// Compact single-line rendering used for byte-stable output.
pub fn to_line(v: &Value) -> String {
    serde_json::to_string(v).expect("value serialises")
}
