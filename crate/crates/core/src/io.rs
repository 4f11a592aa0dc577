//! Matrix text format: one row per line, whitespace-separated entries, each
//! an optionally signed integer or `p/q` with `q > 0`. Blank lines and lines
//! starting with `#` are ignored.

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational;

pub fn parse_matrix(text: &str) -> Result<QMatrix> {
    let mut rows = Vec::new();
    let mut width: Option<(usize, usize)> = None;
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| rational::parse(tok).map_err(|msg| Error::Parse { line: line_no, msg }))
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some((row.len(), line_no)),
            Some((w, first)) if w != row.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("row has {} entries but line {first} has {w}", row.len()),
                });
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no matrix rows".into(),
        });
    }
    QMatrix::from_rows(rows)
}
