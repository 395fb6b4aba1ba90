//! The substitution `iota(0) = 1, iota(1) = 100`, its fixed point `omega`, and
//! the coding `Phi(t_0 t_1 ...) = 1 0^t_0 -1 0^t_1 1 0^t_2 ...`.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::Limits;
use crate::spectrum::series::{e_series, SeriesKind};

fn iota(word: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(word.len() * 2);
    for &c in word {
        if c == 0 {
            out.push(1);
        } else {
            out.extend_from_slice(&[1, 0, 0]);
        }
    }
    out
}

/// `A_0 = 1`, `A_n = iota(A_{n-1})`; `A_{-1}` is taken to be `0`.
pub fn substitution_word(n: i64, limits: &Limits) -> Result<Vec<u8>> {
    if n < -1 {
        return Err(Error::Unsupported(format!("substitution level {n}")));
    }
    if n > limits.max_substitution_level as i64 {
        return Err(Error::ResourceLimit {
            what: "substitution level",
            value: n as u64,
            limit: limits.max_substitution_level as u64,
        });
    }
    let mut w = vec![0u8];
    for _ in -1..n {
        w = iota(&w);
    }
    Ok(w)
}

/// First `len` letters of `omega = lim A_n`.
pub fn omega_prefix(len: usize, limits: &Limits) -> Result<Vec<u8>> {
    let mut w = vec![1u8];
    let mut level = 0;
    while w.len() < len {
        level += 1;
        if level > limits.max_substitution_level {
            return Err(Error::ResourceLimit {
                what: "substitution level",
                value: level as u64,
                limit: limits.max_substitution_level as u64,
            });
        }
        w = iota(&w);
    }
    w.truncate(len);
    Ok(w)
}

/// `Phi(t)` of a finite word, starting with sign `sign`; returns the symbols
/// and the sign that the next block would carry.
fn phi_block(t: &[u8], mut sign: i8) -> (Vec<i8>, i8) {
    let mut out = Vec::new();
    for &ti in t {
        out.push(sign);
        out.extend(std::iter::repeat_n(0, ti as usize));
        sign = -sign;
    }
    (out, sign)
}

/// A sequence over {1, 0, -1}: a prefix, then optionally a period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedSequence {
    pub label: String,
    pub prefix: Vec<i8>,
    /// Repeated forever after the prefix; `None` if only the prefix is known.
    pub period: Option<Vec<i8>>,
}

impl CodedSequence {
    /// The first `n` symbols (fewer if only a shorter prefix is known).
    pub fn symbols(&self, n: usize) -> Vec<i8> {
        let mut out: Vec<i8> = self.prefix.iter().take(n).copied().collect();
        if let Some(p) = &self.period {
            let mut i = 0;
            while out.len() < n {
                out.push(p[i % p.len()]);
                i += 1;
            }
        }
        out
    }

    pub fn is_complete(&self, n: usize) -> bool {
        self.period.is_some() || self.prefix.len() >= n
    }
}

fn symbol_str(s: i8) -> &'static str {
    match s {
        1 => "1",
        0 => "0",
        _ => "1\u{304}",
    }
}

impl fmt::Display for CodedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.prefix {
            f.write_str(symbol_str(s))?;
        }
        match &self.period {
            Some(p) => {
                f.write_str("(")?;
                for &s in p {
                    f.write_str(symbol_str(s))?;
                }
                f.write_str(")^inf")
            }
            None => f.write_str("..."),
        }
    }
}

/// `Phi(t)` for a finite prefix `t` of some {0,1}-word.
pub fn phi_code(t: &[u8], label: &str) -> CodedSequence {
    CodedSequence {
        label: label.to_string(),
        prefix: phi_block(t, 1).0,
        period: None,
    }
}

/// `Phi(a^inf)`.
pub fn phi_periodic(a: &[u8], label: &str) -> CodedSequence {
    let (mut block, sign) = phi_block(a, 1);
    if sign < 0 {
        // odd number of letters: the signs line up again after two copies
        let (second, _) = phi_block(a, -1);
        block.extend(second);
    }
    CodedSequence {
        label: label.to_string(),
        prefix: Vec::new(),
        period: Some(block),
    }
}

/// At least `len` symbols of `Phi(omega)`.
pub fn phi_omega(len: usize, limits: &Limits) -> Result<CodedSequence> {
    let w = omega_prefix(len, limits)?;
    let mut c = phi_code(&w, "Phi(omega)");
    c.prefix.truncate(len);
    Ok(c)
}

/// `Phi(A_n^inf)`.
pub fn phi_substitution(n: i64, limits: &Limits) -> Result<CodedSequence> {
    let a = substitution_word(n, limits)?;
    Ok(phi_periodic(&a, &format!("Phi(A_{n}^inf)")))
}

/// First index `n <= order` where the coefficients of `E` differ from the
/// symbols of `Phi(omega)`, or where `E^(k)` differs from `Phi(A_{k-1}^inf)`.
pub fn series_coding_mismatch(kind: SeriesKind, order: usize, limits: &Limits) -> Result<Option<usize>> {
    let series = e_series(kind, order, limits)?;
    let code = match kind {
        SeriesKind::E => phi_omega(order + 1, limits)?,
        SeriesKind::Ek(k) => phi_substitution(k as i64 - 1, limits)?,
    };
    let symbols = code.symbols(order + 1);
    for (n, c) in series.coeffs.iter().enumerate() {
        if symbols.get(n).is_none_or(|&s| *c != s) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(w: &[u8]) -> String {
        w.iter().map(|b| char::from(b'0' + b)).collect()
    }

    #[test]
    fn substitution_words() {
        let l = Limits::default();
        assert_eq!(bits(&substitution_word(-1, &l).unwrap()), "0");
        assert_eq!(bits(&substitution_word(0, &l).unwrap()), "1");
        assert_eq!(bits(&substitution_word(1, &l).unwrap()), "100");
        assert_eq!(bits(&substitution_word(2, &l).unwrap()), "10011");
        assert!(substitution_word(99, &l).is_err());
    }

    #[test]
    fn omega() {
        let l = Limits::default();
        assert_eq!(bits(&omega_prefix(11, &l).unwrap()), "10011100100");
        let a5 = substitution_word(5, &l).unwrap();
        assert_eq!(omega_prefix(a5.len(), &l).unwrap(), a5);
    }

    #[test]
    fn phi_of_omega() {
        let c = phi_omega(7, &Limits::default()).unwrap();
        assert_eq!(c.symbols(7), vec![1, 0, -1, 1, -1, 0, 1]);
        assert_eq!(c.to_string(), "101\u{304}11\u{304}01...");
    }

    #[test]
    fn phi_periodic_words() {
        let c = phi_periodic(&[0], "x");
        assert_eq!(c.period.as_deref(), Some(&[1, -1][..]));
        let c = phi_periodic(&[1], "x");
        assert_eq!(c.symbols(6), vec![1, 0, -1, 0, 1, 0]);
        let c = phi_periodic(&[1, 0], "x");
        assert_eq!(c.period.as_deref(), Some(&[1, 0, -1][..]));
    }

    #[test]
    fn series_match_codings() {
        let l = Limits::default();
        assert_eq!(series_coding_mismatch(SeriesKind::E, 200, &l).unwrap(), None);
        for k in 0..=4 {
            assert_eq!(series_coding_mismatch(SeriesKind::Ek(k), 200, &l).unwrap(), None, "k={k}");
        }
    }

    #[test]
    fn unshifted_indexing_does_not_match() {
        // E^(k) against Phi(A_k^inf) fails already for k = 0
        let l = Limits::default();
        let series = e_series(SeriesKind::Ek(0), 10, &l).unwrap();
        let code = phi_substitution(0, &l).unwrap().symbols(11);
        let sym = series.as_symbols().unwrap();
        assert_ne!(sym, code);
    }
}
