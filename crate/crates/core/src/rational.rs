//! Exact rational scalars.
//!
//! `Rational` is an arbitrary-precision fraction that is always kept in lowest
//! terms with a positive denominator. Its canonical text form is `p/q`, or just
//! `p` when the denominator is one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The fraction `n/d` in lowest terms. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form (`p/q`, or `p` for integers).
pub fn to_canonical(q: &Rational) -> String {
    q.to_string()
}

/// Parses an optionally signed integer or a `p/q` token with `q > 0`.
pub fn parse(token: &str) -> std::result::Result<Rational, String> {
    fn parse_int(s: &str, signed: bool) -> Option<BigInt> {
        let digits = if signed {
            s.strip_prefix(['+', '-']).unwrap_or(s)
        } else {
            s
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let s = s.strip_prefix('+').unwrap_or(s);
        s.parse().ok()
    }

    match token.split_once('/') {
        None => parse_int(token, true)
            .map(Rational::from_integer)
            .ok_or_else(|| format!("malformed number `{token}`")),
        Some((p, q)) => {
            let num =
                parse_int(p, true).ok_or_else(|| format!("malformed numerator in `{token}`"))?;
            let den =
                parse_int(q, false).ok_or_else(|| format!("malformed denominator in `{token}`"))?;
            if den.is_zero() {
                return Err(format!("zero denominator in `{token}`"));
            }
            Ok(Rational::new(num, den))
        }
    }
}

pub(crate) fn parse_json_field(token: &str, what: &str) -> Result<Rational> {
    parse(token).map_err(|msg| Error::InvalidCertificate(format!("{what}: {msg}")))
}

pub fn is_positive(q: &Rational) -> bool {
    q.is_positive()
}

pub fn is_integral(q: &Rational) -> bool {
    q.denom().is_one()
}

/// The simplest rational strictly or weakly between two optional bounds:
/// an integer of least absolute value if one fits, otherwise the fraction of
/// least denominator (Stern-Brocot descent). Returns `None` for an empty range.
///
/// A bound is `(value, strict)`.
pub fn simplest_between(
    lower: Option<(&Rational, bool)>,
    upper: Option<(&Rational, bool)>,
) -> Option<Rational> {
    let admits = |x: &Rational| -> bool {
        let lo_ok = match lower {
            None => true,
            Some((l, strict)) => {
                if strict {
                    x > l
                } else {
                    x >= l
                }
            }
        };
        let hi_ok = match upper {
            None => true,
            Some((h, strict)) => {
                if strict {
                    x < h
                } else {
                    x <= h
                }
            }
        };
        lo_ok && hi_ok
    };

    if let (Some((l, ls)), Some((h, hs))) = (lower, upper) {
        if l > h || (l == h && (ls || hs)) {
            return None;
        }
    }

    // Integers first, preferring small magnitude.
    let zero = Rational::zero();
    if admits(&zero) {
        return Some(zero);
    }
    let candidate = match (lower, upper) {
        (Some((l, strict)), _) if l.is_positive() || (l.is_zero() && strict) => {
            let f = l.floor();
            if strict || &f != l {
                f + Rational::one()
            } else {
                f
            }
        }
        (_, Some((h, strict))) if h.is_negative() || (h.is_zero() && strict) => {
            let c = h.ceil();
            if strict || &c != h {
                c - Rational::one()
            } else {
                c
            }
        }
        _ => unreachable!("range excludes zero so it lies on one side of it"),
    };
    if admits(&candidate) {
        return Some(candidate);
    }

    // No integer fits: the range sits inside (n, n + 1) for n = floor(lower).
    // Write x = n + 1/y with y > 1 and recurse on the reciprocal range.
    let (l, ls) = lower.expect("a range without integers is bounded below");
    let (h, hs) = upper.expect("a range without integers is bounded above");
    let n = l.floor();
    let lo_off = l - &n;
    let hi_off = h - &n;
    // y in (1/hi_off, 1/lo_off); lo_off may be zero (then unbounded above).
    let y_lo = hi_off.recip();
    let y_hi = if lo_off.is_zero() {
        None
    } else {
        Some(lo_off.recip())
    };
    let y = simplest_between(Some((&y_lo, hs)), y_hi.as_ref().map(|v| (v, ls)))?;
    Some(n + y.recip())
}
