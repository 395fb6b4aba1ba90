//! Exact integer polynomials, the standing-assumption checks and the
//! construction of `f = P^(k+1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rug::{Complex, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Resource caps shared by the pipelines.
#[derive(Clone, Debug)]
pub struct Limits {
    pub max_k: u32,
    pub max_series_order: usize,
    pub max_substitution_level: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_k: 8,
            max_series_order: 1 << 14,
            max_substitution_level: 24,
        }
    }
}

/// `P(X) = a_0 + a_1 X + ... + a_d X^d` with `d >= 1`, `a_d >= 1`, `a_0 != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<Integer>,
}

impl IntPolynomial {
    /// Builds from ascending coefficients, trimming high zeros and flipping the
    /// overall sign so that the leading coefficient is positive.
    pub fn new(mut coeffs: Vec<Integer>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        if coeffs.len() == 1 {
            return Err(Error::ConstantPolynomial);
        }
        if coeffs[0].is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        if coeffs.last().unwrap().cmp0().is_lt() {
            for c in coeffs.iter_mut() {
                *c = Integer::from(-&*c);
            }
        }
        Ok(IntPolynomial { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &Integer {
        self.coeffs.last().unwrap()
    }

    pub fn constant(&self) -> &Integer {
        &self.coeffs[0]
    }

    pub fn is_monic(&self) -> bool {
        *self.leading() == 1
    }

    pub fn content(&self) -> Integer {
        self.coeffs
            .iter()
            .fold(Integer::new(), |g, c| g.gcd(c))
    }

    pub fn derivative(&self) -> Vec<Integer> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| Integer::from(c * j as u32))
            .collect()
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        eval_int_at_rational(&self.coeffs, x)
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(z.prec());
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Ascending coefficients of `P^e`.
    pub fn pow_coeffs(&self, e: u32) -> Vec<Integer> {
        let mut acc = vec![Integer::from(1)];
        for _ in 0..e {
            acc = mul_int(&acc, &self.coeffs);
        }
        acc
    }

    /// Coefficients of `X^d P(1/X)`.
    pub fn reversed_coeffs(&self) -> Vec<Integer> {
        self.coeffs.iter().rev().cloned().collect()
    }

    fn as_rational(&self) -> Vec<Rational> {
        self.coeffs.iter().map(Rational::from).collect()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.cmp0().is_lt();
            let mag = Integer::from(c.abs_ref());
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            match e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != 1 {
                        write!(f, "{mag}")?;
                    }
                    f.write_str("X")?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_polynomial(s)
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let coeffs = strings
            .iter()
            .map(|s| s.parse::<Integer>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        IntPolynomial::new(coeffs).map_err(serde::de::Error::custom)
    }
}

/// Parses `c0,c1,...,cd` (ascending) or a sparse expression such as
/// `X^3+2X^2+6X-2`.
pub fn parse_polynomial(text: &str) -> Result<IntPolynomial> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let fail = |reason: &str| Error::Parse {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    if compact.is_empty() {
        return Err(fail("empty input"));
    }
    if compact.contains(',') || compact.chars().all(|c| c.is_ascii_digit() || c == '-' || c == '+') {
        let coeffs = compact
            .split(',')
            .map(|t| {
                t.trim_start_matches('+')
                    .parse::<Integer>()
                    .map_err(|_| fail(&format!("`{t}` is not an integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        return IntPolynomial::new(coeffs);
    }

    let mut var: Option<char> = None;
    let mut terms: BTreeMap<usize, Integer> = BTreeMap::new();
    let chars: Vec<char> = compact.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let mut sign = 1i32;
        if chars[i] == '+' || chars[i] == '-' {
            if chars[i] == '-' {
                sign = -1;
            }
            i += 1;
        } else if i != 0 {
            return Err(fail("expected `+` or `-` between terms"));
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let coeff_text: String = chars[start..i].iter().collect();
        if i < chars.len() && chars[i] == '*' {
            if coeff_text.is_empty() {
                return Err(fail("`*` without a coefficient"));
            }
            i += 1;
        }
        let mut exponent = 0usize;
        if i < chars.len() && chars[i].is_alphabetic() {
            let v = chars[i];
            match var {
                None => var = Some(v),
                Some(w) if w != v => return Err(fail("more than one variable")),
                _ => {}
            }
            i += 1;
            exponent = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let es = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if es == i {
                    return Err(fail("missing exponent after `^`"));
                }
                let et: String = chars[es..i].iter().collect();
                exponent = et.parse().map_err(|_| fail("exponent too large"))?;
            }
        } else if coeff_text.is_empty() {
            return Err(fail("empty term"));
        }
        let mut c = if coeff_text.is_empty() {
            Integer::from(1)
        } else {
            coeff_text.parse::<Integer>().map_err(|_| fail("bad coefficient"))?
        };
        if sign < 0 {
            c = -c;
        }
        *terms.entry(exponent).or_default() += c;
    }
    let degree = terms.keys().next_back().copied().unwrap_or(0);
    let mut coeffs = vec![Integer::new(); degree + 1];
    for (e, c) in terms {
        coeffs[e] = c;
    }
    IntPolynomial::new(coeffs)
}

/// `f = P^(k+1)` with the derived constants used throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceSpec {
    pub base: IntPolynomial,
    pub k: u32,
    /// `A_0 .. A_D`, ascending.
    pub coeffs: Vec<Integer>,
    pub degree: usize,
    pub monic: bool,
    /// `max_j |A_j|`
    pub a_max: Integer,
    /// `(|A_0| + ... + |A_D|) / 2`
    pub b: Rational,
}

impl RecurrenceSpec {
    pub fn abs_coeff_sum(&self) -> Integer {
        self.coeffs.iter().map(|c| Integer::from(c.abs_ref())).sum()
    }

    pub fn multiplicity(&self) -> u32 {
        self.k + 1
    }
}

pub fn power_to_f(p: &IntPolynomial, k: u32, limits: &Limits) -> Result<RecurrenceSpec> {
    if k > limits.max_k {
        return Err(Error::ResourceLimit {
            what: "k",
            value: k as u64,
            limit: limits.max_k as u64,
        });
    }
    let coeffs = p.pow_coeffs(k + 1);
    let a_max = coeffs
        .iter()
        .map(|c| Integer::from(c.abs_ref()))
        .max()
        .unwrap();
    let abs_sum: Integer = coeffs.iter().map(|c| Integer::from(c.abs_ref())).sum();
    Ok(RecurrenceSpec {
        base: p.clone(),
        k,
        degree: coeffs.len() - 1,
        monic: p.is_monic(),
        a_max,
        b: Rational::from((abs_sum, 2)),
        coeffs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub content_ok: bool,
    pub a0_nonzero: bool,
    pub squarefree: bool,
    pub has_expanding_root: bool,
    pub monic: bool,
    pub notes: Vec<String>,
}

impl ValidationReport {
    /// All standing assumptions hold; downstream modules accept the polynomial.
    pub fn usable(&self) -> bool {
        self.content_ok && self.a0_nonzero && self.squarefree && self.has_expanding_root
    }
}

/// Checks the standing assumptions. Root moduli come from `root_hint` when
/// supplied, otherwise the roots of the squarefree part are computed.
pub fn validate_assumptions(
    p: &IntPolynomial,
    root_hint: Option<&crate::roots::RootClassification>,
) -> ValidationReport {
    let mut notes = Vec::new();
    let content_ok = p.content() == 1;
    if !content_ok {
        notes.push(format!("content gcd(a_0..a_d) = {} != 1", p.content()));
    }
    let a0_nonzero = !p.constant().is_zero();
    let g = gcd_rational(&p.as_rational(), &to_rational(&p.derivative()));
    let squarefree = g.len() == 1;
    if !squarefree {
        notes.push(format!(
            "gcd(P, P') has degree {}; P has repeated roots and is unusable downstream",
            g.len() - 1
        ));
    }

    let has_expanding_root = match root_hint {
        Some(class) => class.p > 0,
        None => {
            let sqf = if squarefree {
                Some(p.clone())
            } else {
                squarefree_part(p)
            };
            match sqf {
                Some(q) => match crate::roots::find_roots(&q, crate::numeric::Precision::digits(40)) {
                    Ok(roots) => roots.iter().any(|r| r.modulus > 1),
                    Err(e) => {
                        notes.push(format!("root computation failed: {e}"));
                        false
                    }
                },
                // the squarefree part is linear and handled exactly below
                None => false,
            }
        }
    };
    if !has_expanding_root {
        notes.push("no root of modulus > 1".to_string());
    }
    if p.degree() >= 2 {
        if let Some(r) = rational_root(p) {
            notes.push(format!(
                "P has the rational root {r}; P is reducible over Q (assumption 3 checked for P as a whole)"
            ));
        }
    }
    ValidationReport {
        content_ok,
        a0_nonzero,
        squarefree,
        has_expanding_root,
        monic: p.is_monic(),
        notes,
    }
}

/// `gcd(P, P')` is constant.
pub fn is_squarefree(p: &IntPolynomial) -> bool {
    gcd_rational(&p.as_rational(), &to_rational(&p.derivative())).len() == 1
}

/// Degree of `gcd(P(z), z^d P(1/z))` over Q. Zero certifies that no root lies
/// on the unit circle.
pub fn unit_circle_factor_test(p: &IntPolynomial) -> usize {
    let g = gcd_rational(&p.as_rational(), &to_rational(&p.reversed_coeffs()));
    g.len() - 1
}

/// A rational root of `p`, by the rational root test. Skipped (returns `None`)
/// when `|a_0|` or `a_d` is too large to enumerate divisors cheaply.
pub fn rational_root(p: &IntPolynomial) -> Option<Rational> {
    let a0 = Integer::from(p.constant().abs_ref());
    let ad = p.leading().clone();
    let num_div = small_divisors(&a0)?;
    let den_div = small_divisors(&ad)?;
    for q in &den_div {
        for n in &num_div {
            for sign in [1i32, -1] {
                let r = Rational::from((Integer::from(n * sign), q.clone()));
                if p.eval_rational(&r) == 0 {
                    return Some(r);
                }
            }
        }
    }
    None
}

fn small_divisors(n: &Integer) -> Option<Vec<Integer>> {
    let v = n.to_u64().filter(|&v| v <= 1_000_000_000_000)?;
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= v {
        if v % i == 0 {
            out.push(Integer::from(i));
            if i * i != v {
                out.push(Integer::from(v / i));
            }
        }
        i += 1;
    }
    Some(out)
}

fn squarefree_part(p: &IntPolynomial) -> Option<IntPolynomial> {
    let pr = p.as_rational();
    let g = gcd_rational(&pr, &to_rational(&p.derivative()));
    let (q, _) = divrem_rational(&pr, &g);
    let ints = primitive_integer(&q);
    IntPolynomial::new(ints).ok()
}

fn primitive_integer(q: &[Rational]) -> Vec<Integer> {
    let lcm = q
        .iter()
        .fold(Integer::from(1), |l, c| l.lcm(c.denom()));
    let ints: Vec<Integer> = q
        .iter()
        .map(|c| c.numer() * Integer::from(&lcm / c.denom()))
        .collect();
    let content = ints.iter().fold(Integer::new(), |g, c| g.gcd(c));
    ints.into_iter().map(|c| c / &content).collect()
}

fn to_rational(c: &[Integer]) -> Vec<Rational> {
    c.iter().map(Rational::from).collect()
}

pub(crate) fn mul_int(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let mut out = vec![Integer::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Integer::from(x * y);
        }
    }
    out
}

pub(crate) fn eval_int_at_rational(coeffs: &[Integer], x: &Rational) -> Rational {
    let mut acc = Rational::new();
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

fn trim_rational(mut a: Vec<Rational>) -> Vec<Rational> {
    while a.len() > 1 && a.last().is_some_and(|c| *c == 0) {
        a.pop();
    }
    a
}

fn divrem_rational(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim_rational(b.to_vec());
    let mut r = trim_rational(a.to_vec());
    if r.len() < b.len() {
        return (vec![Rational::new()], r);
    }
    let lead = b.last().unwrap().clone();
    let mut q = vec![Rational::new(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !(r.len() == 1 && r[0] == 0) {
        let shift = r.len() - b.len();
        let factor = Rational::from(r.last().unwrap() / &lead);
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= Rational::from(&factor * c);
        }
        q[shift] = factor;
        r.pop();
        r = trim_rational(r);
        if r.is_empty() {
            r.push(Rational::new());
        }
    }
    (q, r)
}

/// Monic gcd over Q.
fn gcd_rational(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = trim_rational(a.to_vec());
    let mut y = trim_rational(b.to_vec());
    while !(y.len() == 1 && y[0] == 0) {
        let (_, r) = divrem_rational(&x, &y);
        x = y;
        y = r;
    }
    let lead = x.last().unwrap().clone();
    x.into_iter().map(|c| c / &lead).collect()
}
