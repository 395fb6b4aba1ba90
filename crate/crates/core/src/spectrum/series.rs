//! Exact truncated power series of `E` and `E^(k)`.

use std::fmt;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Limits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// `(1 - (1-X) prod_{m>=0} (1 - X^(2^m))) / 2X`
    E,
    /// `(1 + X^(2^k) - (1-X) prod_{m<k} (1 - X^(2^m))) / (2X (1 + X^(2^k)))`
    Ek(u32),
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKind::E => f.write_str("E"),
            SeriesKind::Ek(k) => write!(f, "E^({k})"),
        }
    }
}

/// Coefficients `c_0 .. c_N` of a rational power series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesQ {
    pub kind: SeriesKind,
    pub coeffs: Vec<Rational>,
}

impl SeriesQ {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The coefficients as symbols in {-1, 0, 1}, or `None` if one is not.
    pub fn as_symbols(&self) -> Option<Vec<i8>> {
        self.coeffs
            .iter()
            .map(|c| {
                if *c == 1 {
                    Some(1)
                } else if *c == -1 {
                    Some(-1)
                } else if c.is_zero() {
                    Some(0)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// `x^(2^m)` exponent, or `None` beyond `limit`.
fn pow2_within(m: u32, limit: usize) -> Option<usize> {
    if m >= usize::BITS - 1 {
        return None;
    }
    let e = 1usize << m;
    (e <= limit).then_some(e)
}

/// `(1 - X) prod_{m < m_end} (1 - X^(2^m))` truncated after degree `len - 1`.
fn signed_product(m_end: Option<u32>, len: usize) -> Vec<Integer> {
    let mut acc = vec![Integer::new(); len];
    acc[0] = Integer::from(1);
    if len > 1 {
        acc[1] = Integer::from(-1);
    }
    let mut m = 0;
    while m_end.is_none_or(|end| m < end) {
        let Some(e) = pow2_within(m, len - 1) else {
            break;
        };
        for i in (e..len).rev() {
            let t = acc[i - e].clone();
            acc[i] -= t;
        }
        m += 1;
    }
    acc
}

pub fn e_series(kind: SeriesKind, order: usize, limits: &Limits) -> Result<SeriesQ> {
    if order < 1 {
        return Err(Error::Unsupported("series order must be at least 1".into()));
    }
    if order > limits.max_series_order {
        return Err(Error::ResourceLimit {
            what: "series order",
            value: order as u64,
            limit: limits.max_series_order as u64,
        });
    }
    let len = order + 2;
    let (mut num, k) = match kind {
        SeriesKind::E => (signed_product(None, len), None),
        SeriesKind::Ek(k) => (signed_product(Some(k), len), Some(k)),
    };
    for c in num.iter_mut() {
        *c = Integer::from(-&*c);
    }
    num[0] += 1;
    let shift = k.and_then(|k| pow2_within(k, len - 1));
    // X^(2^k) beyond the truncation contributes nothing
    if let Some(e) = shift {
        num[e] += 1;
    }
    debug_assert!(num[0].is_zero());
    let mut coeffs: Vec<Rational> = num[1..].iter().map(|c| Rational::from((c.clone(), 2))).collect();
    if let Some(e) = shift {
        // divide by 1 + X^e
        for i in e..coeffs.len() {
            let t = coeffs[i - e].clone();
            coeffs[i] -= t;
        }
    }
    coeffs.truncate(order + 1);
    Ok(SeriesQ { kind, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &SeriesQ) -> Vec<i64> {
        s.coeffs.iter().map(|c| c.numer().to_i64().unwrap() / c.denom().to_i64().unwrap()).collect()
    }

    #[test]
    fn e_prefix() {
        let s = e_series(SeriesKind::E, 6, &Limits::default()).unwrap();
        assert_eq!(ints(&s), vec![1, 0, -1, 1, -1, 0, 1]);
    }

    #[test]
    fn e0_is_geometric() {
        let s = e_series(SeriesKind::Ek(0), 4, &Limits::default()).unwrap();
        assert_eq!(ints(&s), vec![1, -1, 1, -1, 1]);
        let s = e_series(SeriesKind::Ek(1), 6, &Limits::default()).unwrap();
        assert_eq!(ints(&s), vec![1, 0, -1, 0, 1, 0, -1]);
    }

    #[test]
    fn leading_coefficient_is_one() {
        for kind in [SeriesKind::E, SeriesKind::Ek(0), SeriesKind::Ek(3), SeriesKind::Ek(40)] {
            let s = e_series(kind, 50, &Limits::default()).unwrap();
            assert_eq!(s.coeffs[0], 1);
            assert!(s.as_symbols().is_some(), "{kind}");
        }
    }

    #[test]
    fn large_k_agrees_with_e_on_prefix() {
        let e = e_series(SeriesKind::E, 60, &Limits::default()).unwrap();
        let ek = e_series(SeriesKind::Ek(7), 60, &Limits::default()).unwrap();
        assert_eq!(e.coeffs, ek.coeffs);
    }

    #[test]
    fn order_cap() {
        let limits = Limits {
            max_series_order: 10,
            ..Limits::default()
        };
        assert!(matches!(e_series(SeriesKind::E, 11, &limits), Err(Error::ResourceLimit { .. })));
        assert!(e_series(SeriesKind::E, 0, &limits).is_err());
    }
}
