//! Colourings of the positive integers.

use std::fmt;

use crate::error::{Error, Result};

/// Largest `t` with `p^t <= x`.
pub fn g_p(x: u64, p: u64) -> Result<u32> {
    if x < 1 || p < 2 {
        return Err(Error::Unsupported(format!(
            "g_p needs x >= 1 and p >= 2, got x={x}, p={p}"
        )));
    }
    Ok(x.ilog(p))
}

/// Base-`p` digit of `x` at position `j` (zero above the leading digit).
pub fn tau_p(j: u32, x: u64, p: u64) -> u64 {
    match p.checked_pow(j) {
        Some(pj) => (x / pj) % p,
        None => 0,
    }
}

/// Start-position parity, leading digit and second digit of `x` in base `p`.
/// Numbers with a single digit get second digit 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaColour {
    pub parity: u64,
    pub lead: u64,
    pub second: u64,
}

impl GammaColour {
    /// Packs the triple into one id: `parity * p^2 + lead * p + second`.
    pub fn id(&self, p: u64) -> u64 {
        self.parity * p * p + self.lead * p + self.second
    }
}

pub fn gamma_p_colour(x: u64, p: u64) -> Result<GammaColour> {
    let g = g_p(x, p)?;
    Ok(GammaColour {
        parity: u64::from(g % 2),
        lead: tau_p(g, x, p),
        second: g.checked_sub(1).map_or(0, |j| tau_p(j, x, p)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Colouring {
    /// `x mod m`.
    Modulo(u64),
    /// The gamma colouring in base `p`.
    BaseStart(u64),
    /// Parity of the position of the leading digit in the given base.
    StartParity(u64),
    /// Explicit colours of `1..=len`; undefined beyond.
    Table(Vec<u64>),
    /// `x -> base(factor * x)`.
    Dilated { base: Box<Colouring>, factor: u64 },
}

impl Colouring {
    pub fn modulo(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Unsupported("modulus must be positive".into()));
        }
        Ok(Colouring::Modulo(m))
    }

    pub fn base_start(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Unsupported(format!(
                "base must be at least 2, got {p}"
            )));
        }
        Ok(Colouring::BaseStart(p))
    }

    pub fn start_parity(base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::Unsupported(format!(
                "base must be at least 2, got {base}"
            )));
        }
        Ok(Colouring::StartParity(base))
    }

    pub fn dilated(self, factor: u64) -> Result<Self> {
        if factor == 0 {
            return Err(Error::Unsupported(
                "dilation factor must be positive".into(),
            ));
        }
        Ok(Colouring::Dilated {
            base: Box::new(self),
            factor,
        })
    }

    /// Reads `x colour` lines for `x = 1, 2, ...` in order. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn table_from_text(text: &str) -> Result<Self> {
        let mut table = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: n + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [x, c] = fields[..] else {
                return Err(bad(format!("expected `x colour`, found `{line}`")));
            };
            let x: u64 = x
                .parse()
                .map_err(|_| bad(format!("malformed integer `{x}`")))?;
            let c: u64 = c
                .parse()
                .map_err(|_| bad(format!("malformed colour `{c}`")))?;
            if x != table.len() as u64 + 1 {
                return Err(bad(format!(
                    "expected entry for {}, found {x}",
                    table.len() + 1
                )));
            }
            table.push(c);
        }
        if table.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty colouring table".into(),
            });
        }
        Ok(Colouring::Table(table))
    }

    /// Colour of `x >= 1`, or `None` outside a table's domain.
    pub fn colour(&self, x: u64) -> Option<u64> {
        if x == 0 {
            return None;
        }
        match self {
            Colouring::Modulo(m) => Some(x % m),
            Colouring::BaseStart(p) => gamma_p_colour(x, *p).ok().map(|g| g.id(*p)),
            Colouring::StartParity(b) => Some(u64::from(x.ilog(*b) % 2)),
            Colouring::Table(t) => t.get((x - 1) as usize).copied(),
            Colouring::Dilated { base, factor } => base.colour(x.checked_mul(*factor)?),
        }
    }
}

impl fmt::Display for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Colouring::Modulo(m) => write!(f, "mod:{m}"),
            Colouring::BaseStart(p) => write!(f, "gamma:{p}"),
            Colouring::StartParity(b) => write!(f, "startparity:{b}"),
            Colouring::Table(t) => write!(f, "table of {} entries", t.len()),
            Colouring::Dilated { base, factor } => write!(f, "{base} dilated by {factor}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_p_values() {
        assert_eq!(g_p(67_100_200, 10).unwrap(), 7);
        assert_eq!(g_p(1, 7).unwrap(), 0);
        assert_eq!(g_p(8, 2).unwrap(), 3);
        assert_eq!(g_p(u64::MAX, 2).unwrap(), 63);
        assert!(g_p(0, 10).is_err());
        assert!(g_p(5, 1).is_err());
    }

    #[test]
    fn gamma_worked_digits() {
        let s = gamma_p_colour(67_100_200, 10).unwrap();
        assert_eq!((s.parity, s.lead, s.second), (1, 6, 7));
        let t = gamma_p_colour(3_040_567, 10).unwrap();
        assert_eq!((t.parity, t.lead, t.second), (0, 3, 0));
        for p in 2..20 {
            let sq = gamma_p_colour(p * p, p).unwrap();
            assert_eq!((sq.parity, sq.lead, sq.second), (0, 1, 0));
        }
        let single = gamma_p_colour(7, 10).unwrap();
        assert_eq!((single.parity, single.lead, single.second), (0, 7, 0));
    }

    #[test]
    fn gamma_colour_count() {
        // Reachable ids for numbers with at least two digits: 2 p (p - 1).
        for p in [2u64, 3, 5] {
            let ids: std::collections::BTreeSet<u64> = (p..p.pow(5))
                .map(|x| gamma_p_colour(x, p).unwrap().id(p))
                .collect();
            assert_eq!(ids.len() as u64, 2 * p * (p - 1));
        }
    }

    #[test]
    fn colourings_evaluate() {
        assert_eq!(Colouring::modulo(3).unwrap().colour(7), Some(1));
        let sp = Colouring::start_parity(2).unwrap();
        assert_eq!(sp.colour(1), Some(0));
        assert_eq!(sp.colour(3), Some(1));
        assert_eq!(sp.colour(4), Some(0));
        assert_ne!(sp.colour(5), sp.colour(10));
        let t = Colouring::table_from_text("1 0\n2 1\n# c\n\n3 1\n").unwrap();
        assert_eq!(t.colour(3), Some(1));
        assert_eq!(t.colour(4), None);
        let d = Colouring::modulo(2).unwrap().dilated(3).unwrap();
        assert_eq!(d.colour(1), Some(1));
        assert_eq!(d.colour(2), Some(0));
        assert!(Colouring::modulo(0).is_err());
        assert!(Colouring::start_parity(1).is_err());
    }

    #[test]
    fn table_parse_errors_carry_lines() {
        match Colouring::table_from_text("1 0\n3 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(Colouring::table_from_text("1 x\n").is_err());
        assert!(Colouring::table_from_text("1\n").is_err());
        assert!(Colouring::table_from_text("# nothing\n").is_err());
    }
}
