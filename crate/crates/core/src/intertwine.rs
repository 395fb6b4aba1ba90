//! Orbits `x_n(g) = sum_i g_i(n) alpha_i^n`, their integer codings
//! `s_m = sum_j A_j u(x_{m+j})`, the reconstruction `eps_m = sum_n rho_{m-n} s_n`
//! and the decoding of finitely supported integer words back into weights.

use std::fmt;
use std::str::FromStr;

use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cabs, cpow, decimal, dist_to_half_integer, round_half_down, Enclosure, Precision};
use crate::poly::{IntPolynomial, RecurrenceSpec};
use crate::rho::{RhoKernel, RhoTable};
use crate::roots::{refine, RootClassification, RootRecord};

const MAX_ESCALATIONS: u32 = 3;

/// Weights `g_1 .. g_p` (ascending coefficients, degree at most `k`) attached
/// to the expanding roots. Real roots carry real polynomials; the weights of
/// a conjugate pair of roots are conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct XiElement {
    pub k: u32,
    pub g: Vec<Vec<Complex>>,
}

impl XiElement {
    pub fn new(class: &RootClassification, k: u32, g: Vec<Vec<Complex>>) -> Result<Self> {
        if g.len() != class.p {
            return Err(Error::InvalidXi(format!("expected {} weights, got {}", class.p, g.len())));
        }
        for (i, gi) in g.iter().enumerate() {
            if gi.len() > k as usize + 1 {
                return Err(Error::InvalidXi(format!("weight {i} has degree above {k}")));
            }
            let root = &class.roots[i];
            if root.is_real() && gi.iter().any(|c| !c.imag().is_zero()) {
                return Err(Error::InvalidXi(format!("weight {i} belongs to a real root and must be real")));
            }
            if let Some(j) = root.conj_partner {
                let gj = &g[j];
                let len = gi.len().max(gj.len());
                for l in 0..len {
                    let a = gi.get(l).cloned().unwrap_or_else(|| Complex::new(64));
                    let b = gj.get(l).cloned().unwrap_or_else(|| Complex::new(64));
                    let conj = Complex::with_val(a.prec(), a.conj_ref());
                    if conj != b {
                        return Err(Error::InvalidXi(format!(
                            "weights {i} and {j} of a conjugate root pair are not conjugate"
                        )));
                    }
                }
            }
        }
        let mut g = g;
        for gi in g.iter_mut() {
            gi.resize(k as usize + 1, Complex::new(64));
        }
        Ok(XiElement { k, g })
    }

    /// Builds an element from free real parameters: `k+1` reals per real root,
    /// then `2(k+1)` reals (real, imaginary parts) per upper-half-plane root;
    /// the conjugate weights are filled in.
    pub fn from_parameters(class: &RootClassification, k: u32, params: &[Float]) -> Result<Self> {
        let len = k as usize + 1;
        let needed = class.r1 * len + class.r2 * 2 * len;
        if params.len() != needed {
            return Err(Error::InvalidXi(format!(
                "expected {needed} parameters, got {}",
                params.len()
            )));
        }
        let bits = params.iter().map(|x| x.prec()).max().unwrap_or(64);
        let mut g = vec![Vec::new(); class.p];
        let mut it = params.iter();
        for gi in g.iter_mut().take(class.r1) {
            for _ in 0..len {
                gi.push(Complex::with_val(bits, it.next().unwrap()));
            }
        }
        for i in class.r1..class.p {
            let root = &class.roots[i];
            if !root.value.imag().is_sign_positive() {
                continue;
            }
            let j = root.conj_partner.expect("paired root");
            let mut gi = Vec::with_capacity(len);
            for _ in 0..len {
                let re = it.next().unwrap();
                let im = it.next().unwrap();
                gi.push(Complex::with_val(bits, (re, im)));
            }
            g[j] = gi.iter().map(|c| Complex::with_val(bits, c.conj_ref())).collect();
            g[i] = gi;
        }
        XiElement::new(class, k, g)
    }

    /// The element whose orbit satisfies `x_0 = -1/2`: `(-1/2, 0, ...)` when
    /// `alpha_1` is real, `(-1/4, -1/4, 0, ...)` otherwise.
    pub fn half_witness(class: &RootClassification) -> Result<Self> {
        if class.p == 0 {
            return Err(Error::Hypothesis("no expanding root".into()));
        }
        let mut g = vec![vec![Complex::new(64)]; class.p];
        if class.roots[0].is_real() {
            g[0][0] = Complex::with_val(64, -0.5);
        } else {
            let j = class.roots[0].conj_partner.expect("paired root");
            g[0][0] = Complex::with_val(64, -0.25);
            g[j][0] = Complex::with_val(64, -0.25);
        }
        XiElement::new(class, 0, g)
    }

    pub fn zero(class: &RootClassification, k: u32) -> Self {
        XiElement {
            k,
            g: vec![vec![Complex::new(64); k as usize + 1]; class.p],
        }
    }

    pub fn eval(&self, i: usize, n: i64, bits: u32) -> Complex {
        let x = Float::with_val(bits, n);
        let mut acc = Complex::new(bits);
        for c in self.g[i].iter().rev() {
            acc *= &x;
            acc += c;
        }
        acc
    }

    /// `sum_i sum_l |g_il|`
    pub fn weight(&self, bits: u32) -> Float {
        let mut s = Float::new(bits);
        for gi in &self.g {
            for c in gi {
                s += cabs(c);
            }
        }
        s
    }

    /// `x_0 = sum_i g_i(0)` exactly (binary floating coefficients are exact
    /// dyadic rationals and conjugate imaginary parts cancel).
    pub fn exact_x0(&self) -> Rational {
        let mut s = Rational::new();
        for gi in &self.g {
            if let Some(r) = gi[0].real().to_rational() {
                s += r;
            }
        }
        s
    }

    /// The common value when every weight is the same real constant.
    pub fn common_constant(&self) -> Option<Rational> {
        let first = self.g.first()?;
        if first.iter().skip(1).any(|c| !c.is_zero()) || !first[0].imag().is_zero() {
            return None;
        }
        for gi in &self.g {
            if gi[0] != first[0] || gi.iter().skip(1).any(|c| !c.is_zero()) {
                return None;
            }
        }
        first[0].real().to_rational()
    }

    pub fn report(&self, digits: u32) -> Vec<Vec<[String; 2]>> {
        self.g
            .iter()
            .map(|gi| {
                gi.iter()
                    .map(|c| [decimal(c.real(), digits), decimal(c.imag(), digits)])
                    .collect()
            })
            .collect()
    }
}

/// Exact power sum `sum_i alpha_i^n` over all roots of `P`, any integer `n`.
pub fn power_sum(p: &IntPolynomial, n: i64) -> Rational {
    let coeffs: Vec<Integer> = if n >= 0 {
        p.coeffs().to_vec()
    } else {
        p.reversed_coeffs()
    };
    let d = coeffs.len() - 1;
    let lead = Rational::from(&coeffs[d]);
    // monic-normalized c_0 .. c_{d-1}
    let c: Vec<Rational> = coeffs[..d].iter().map(|a| Rational::from(a) / &lead).collect();
    let m = n.unsigned_abs() as usize;
    let mut ps: Vec<Rational> = vec![Rational::from(d as u32)];
    for t in 1..=m {
        let mut s = Rational::new();
        for i in 1..t.min(d + 1) {
            s += Rational::from(&c[d - i] * &ps[t - i]);
        }
        if t <= d {
            s += Rational::from(&c[d - t] * t as u32);
        }
        ps.push(-s);
    }
    ps.pop().unwrap()
}

/// Orbit values and their integer coding on a window.
#[derive(Clone, Debug)]
pub struct OrbitSample {
    /// `x`, `u`, `eps` cover `n_lo ..= n_hi + D`; `s` covers `n_lo ..= n_hi`.
    pub n_lo: i64,
    pub n_hi: i64,
    pub x: Vec<Float>,
    pub x_error: Vec<Float>,
    pub u: Vec<Integer>,
    pub eps: Vec<Float>,
    pub s: Vec<Integer>,
    /// Smallest distance of an `x_n` to `Z + 1/2` (zero if an exact half-integer occurred).
    pub rounding_margin: Float,
    /// Indices where `x_n` is exactly a half-integer.
    pub exact_half: Vec<i64>,
    /// `max_m |sum_j A_j x_{m+j}|`
    pub recurrence_defect: Float,
    /// `max_m |s_m + sum_j A_j eps_{m+j}|`
    pub coding_defect: Float,
    pub precision: Precision,
}

impl OrbitSample {
    pub fn x_at(&self, n: i64) -> Option<&Float> {
        self.x.get(usize::try_from(n - self.n_lo).ok()?)
    }

    pub fn eps_at(&self, n: i64) -> Option<&Float> {
        self.eps.get(usize::try_from(n - self.n_lo).ok()?)
    }

    pub fn s_at(&self, m: i64) -> Option<&Integer> {
        self.s.get(usize::try_from(m - self.n_lo).ok()?)
    }

    /// Largest `|eps_n|` over `lo..=hi`.
    pub fn max_norm(&self, lo: i64, hi: i64) -> Float {
        let bits = self.precision.bits();
        let mut m = Float::new(bits);
        for n in lo..=hi {
            if let Some(e) = self.eps_at(n) {
                let a = Float::with_val(bits, e.abs_ref());
                if a > m {
                    m = a;
                }
            }
        }
        m
    }

    pub fn to_csv(&self) -> String {
        let digits = self.precision.get();
        let mut out = String::from("n,x,u,eps,s\n");
        for (i, x) in self.x.iter().enumerate() {
            let n = self.n_lo + i as i64;
            let s = self.s.get(i).map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{n},{},{},{},{s}\n",
                decimal(x, digits),
                self.u[i],
                decimal(&self.eps[i], digits)
            ));
        }
        out
    }
}

fn log10_bound(weight: f64, roots: &[RootRecord], p: usize, k: u32, n: i64) -> f64 {
    let mut worst: f64 = 0.0;
    for r in &roots[..p] {
        let lm = r.modulus.to_f64().log10();
        worst = worst.max(lm * n as f64);
    }
    worst + weight.max(1.0).log10() + k as f64 * ((1 + n.unsigned_abs()) as f64).log10()
}

/// Digits needed so that orbit values up to index `n` keep `base` digits
/// after the decimal point.
pub fn digits_for_window(class: &RootClassification, weight: f64, k: u32, n_lo: i64, n_hi: i64, base: Precision) -> Precision {
    let mag = log10_bound(weight, &class.roots, class.p, k, n_hi).max(log10_bound(weight, &class.roots, class.p, k, n_lo));
    base.boosted(mag.max(0.0).ceil() as u32 + 5)
}

fn refined_class(p: &IntPolynomial, class: &RootClassification, prec: Precision) -> Result<RootClassification> {
    if prec <= class.precision {
        return Ok(class.clone());
    }
    let roots = refine(p, &class.roots, prec)?;
    let mut c = class.clone();
    c.roots = roots;
    c.precision = prec;
    Ok(c)
}

/// Samples `x_n(g)` on `n_lo ..= n_hi + D` and codes it.
pub fn orbit_sample(
    spec: &RecurrenceSpec,
    class: &RootClassification,
    g: &XiElement,
    n_lo: i64,
    n_hi: i64,
) -> Result<OrbitSample> {
    if n_hi < n_lo {
        return Err(Error::InsufficientWindow(format!("empty window [{n_lo}, {n_hi}]")));
    }
    if g.g.len() != class.p {
        return Err(Error::InvalidXi("weights do not match the expanding roots".into()));
    }
    let big_d = spec.degree as i64;
    let top = n_hi + big_d;
    let weight = g.weight(64).to_f64();
    let mut prec = digits_for_window(class, weight, g.k, n_lo, top, class.precision);
    let exact_const = if class.p == class.degree() { g.common_constant() } else { None };

    let mut last_bad = n_lo;
    for _ in 0..=MAX_ESCALATIONS {
        let c = refined_class(&spec.base, class, prec)?;
        let bits = prec.bits();
        let mut xs = Vec::new();
        let mut errs = Vec::new();
        let mut us = Vec::new();
        let mut es = Vec::new();
        let mut margin: Option<Float> = None;
        let mut exact_half = Vec::new();
        let mut ambiguous = None;
        for n in n_lo..=top {
            let exact = if n == 0 {
                Some(g.exact_x0())
            } else {
                exact_const.as_ref().map(|c| c * power_sum(&spec.base, n))
            };
            let (x, err) = orbit_value(&c, g, n, bits);
            let (u, e, dist) = match exact {
                Some(q) => {
                    let half = Rational::from((1, 2));
                    let u = Rational::from(&q + &half).floor().numer().clone();
                    let e = Rational::from(&q - &u);
                    let dist = Rational::from(&e + &half).abs();
                    let dist = dist.min(&half - Rational::from(e.abs_ref()));
                    if dist == 0 {
                        exact_half.push(n);
                    }
                    (u, Float::with_val(bits, &e), Float::with_val(bits, &dist))
                }
                None => {
                    let dist = dist_to_half_integer(&x);
                    if dist <= err {
                        ambiguous = Some(n);
                        break;
                    }
                    let (u, e) = round_half_down(&x);
                    (u, e, dist)
                }
            };
            margin = Some(match margin {
                Some(m) if m <= dist => m,
                _ => dist,
            });
            xs.push(x);
            errs.push(err);
            us.push(u);
            es.push(e);
        }
        if let Some(n) = ambiguous {
            last_bad = n;
            prec = prec.boosted(prec.get());
            continue;
        }
        let mut s = Vec::new();
        let mut rec_defect = Float::new(bits);
        let mut code_defect = Float::new(bits);
        let bound = Rational::from(&spec.b);
        for m in 0..=(n_hi - n_lo) as usize {
            let mut sm = Integer::new();
            let mut xsum = Float::new(bits);
            let mut esum = Float::new(bits);
            for (j, a) in spec.coeffs.iter().enumerate() {
                sm += Integer::from(a * &us[m + j]);
                xsum += Float::with_val(bits, a * &xs[m + j]);
                esum += Float::with_val(bits, a * &es[m + j]);
            }
            if Rational::from(sm.abs_ref()) > bound {
                return Err(Error::PrecisionExhausted(format!(
                    "symbol s_{} = {sm} exceeds the bound B",
                    n_lo + m as i64
                )));
            }
            let xd = xsum.abs();
            if xd > rec_defect {
                rec_defect = xd;
            }
            let cd = (esum + &sm).abs();
            if cd > code_defect {
                code_defect = cd;
            }
            s.push(sm);
        }
        return Ok(OrbitSample {
            n_lo,
            n_hi,
            x: xs,
            x_error: errs,
            u: us,
            eps: es,
            s,
            rounding_margin: margin.unwrap_or_else(|| Float::new(bits)),
            exact_half,
            recurrence_defect: rec_defect,
            coding_defect: code_defect,
            precision: prec,
        });
    }
    Err(Error::HalfIntegerAmbiguity { n: last_bad })
}

/// `x_n(g)` and an error bound.
fn orbit_value(class: &RootClassification, g: &XiElement, n: i64, bits: u32) -> (Float, Float) {
    let mut total = Complex::new(bits);
    let mut err = Float::new(bits);
    let rounding = Float::with_val(bits, 1) >> (bits as i32 - 40);
    for (i, r) in class.roots[..class.p].iter().enumerate() {
        let gi = g.eval(i, n, bits);
        if gi.is_zero() {
            continue;
        }
        let term = Complex::with_val(bits, &gi * cpow(&r.value, n));
        let mag = cabs(&term);
        // relative effect of the root radius on alpha^n
        let rel = Float::with_val(bits, &r.error * (n.unsigned_abs() + 1)) / &r.modulus * 2u32;
        err += Float::with_val(bits, &mag * (rel + &rounding));
        total += term;
    }
    (total.real().clone(), err)
}

/// Right tail of an element of `Omega_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    Zero,
    Periodic(Vec<Integer>),
    /// Unknown symbols bounded by the given value in absolute value.
    Bounded(Integer),
}

/// An integer sequence vanishing to the left of `support_start`, with an
/// explicit head and a tail after it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaSequence {
    pub support_start: i64,
    pub head: Vec<Integer>,
    pub tail: Tail,
}

impl OmegaSequence {
    pub fn zero() -> Self {
        OmegaSequence {
            support_start: 0,
            head: Vec::new(),
            tail: Tail::Zero,
        }
    }

    pub fn delta(n: i64) -> Self {
        OmegaSequence {
            support_start: n,
            head: vec![Integer::from(1)],
            tail: Tail::Zero,
        }
    }

    pub fn from_i64(support_start: i64, head: &[i64], tail: Tail) -> Self {
        OmegaSequence {
            support_start,
            head: head.iter().map(|&v| Integer::from(v)).collect(),
            tail,
        }
    }

    /// First index after the head.
    pub fn head_end(&self) -> i64 {
        self.support_start + self.head.len() as i64
    }

    /// `t_n`, or `None` in a bounded (unknown) tail.
    pub fn get(&self, n: i64) -> Option<Integer> {
        if n < self.support_start {
            return Some(Integer::new());
        }
        let end = self.head_end();
        if n < end {
            return Some(self.head[(n - self.support_start) as usize].clone());
        }
        match &self.tail {
            Tail::Zero => Some(Integer::new()),
            Tail::Periodic(w) => Some(w[((n - end) as usize) % w.len()].clone()),
            Tail::Bounded(_) => None,
        }
    }

    pub fn max_abs(&self) -> Integer {
        let mut m = self.head.iter().map(|v| Integer::from(v.abs_ref())).max().unwrap_or_default();
        match &self.tail {
            Tail::Zero => {}
            Tail::Periodic(w) => {
                for v in w {
                    let a = Integer::from(v.abs_ref());
                    if a > m {
                        m = a;
                    }
                }
            }
            Tail::Bounded(b) => {
                if *b > m {
                    m = b.clone();
                }
            }
        }
        m
    }

    /// First and last index of a nonzero head entry.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.head.iter().position(|v| !v.is_zero())?;
        let last = self.head.iter().rposition(|v| !v.is_zero())?;
        Some((self.support_start + first as i64, self.support_start + last as i64))
    }
}

impl fmt::Display for OmegaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Integer]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let head_end = self.head_end();
        if head_end < 0 && matches!(self.tail, Tail::Bounded(_)) {
            // unknown entries cannot be padded up to index 0
            write!(f, "0^inf @{} [{}]", self.support_start, list(&self.head))?;
        } else {
            let start = self.support_start.min(0);
            let end = head_end.max(0);
            let mut left = Vec::new();
            let mut right = Vec::new();
            for n in start..end {
                let v = self.get(n).unwrap_or_default();
                if n < 0 {
                    left.push(v);
                } else {
                    right.push(v);
                }
            }
            f.write_str("0^inf [")?;
            f.write_str(&list(&left))?;
            if !left.is_empty() {
                f.write_str(" ")?;
            }
            f.write_str("|")?;
            if !right.is_empty() {
                f.write_str(" ")?;
            }
            f.write_str(&list(&right))?;
            f.write_str("]")?;
        }
        match &self.tail {
            Tail::Zero => Ok(()),
            Tail::Periodic(w) => {
                // the period restarts where the printed head ends
                let shift = (head_end.max(0) - head_end) as usize % w.len();
                let mut w = w.clone();
                w.rotate_left(shift);
                write!(f, " (period: {})", list(&w))
            }
            Tail::Bounded(b) => write!(f, " (bounded: {b})"),
        }
    }
}

impl FromStr for OmegaSequence {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidSequence(format!("{why} in `{text}`"));
        let body = text.trim();
        let body = body.strip_prefix("0^inf").unwrap_or(body).trim_start();
        // `@n [a b ...]`: explicit start index, no `|` marker
        let (explicit_start, body) = match body.strip_prefix('@') {
            Some(rest) => {
                let open = rest.find('[').ok_or_else(|| bad("missing `[`"))?;
                let n: i64 = rest[..open].trim().parse().map_err(|_| bad("bad start index"))?;
                (Some(n), &rest[open..])
            }
            None => (None, body),
        };
        let open = body.find('[').ok_or_else(|| bad("missing `[`"))?;
        let close = body.find(']').ok_or_else(|| bad("missing `]`"))?;
        if open != 0 || close < open {
            return Err(bad("malformed brackets"));
        }
        let inner = &body[1..close];
        let rest = body[close + 1..].trim();
        let (left, right) = match explicit_start {
            Some(_) if inner.contains('|') => return Err(bad("`|` together with an explicit start")),
            Some(_) => ("", inner),
            None => inner.split_once('|').ok_or_else(|| bad("missing `|` marking index 0"))?,
        };
        let parse_list = |s: &str| -> Result<Vec<Integer>> {
            s.split_whitespace()
                .map(|t| t.parse::<Integer>().map_err(|_| bad(&format!("`{t}` is not an integer"))))
                .collect()
        };
        let left = parse_list(left)?;
        let right = parse_list(right)?;
        let tail = if rest.is_empty() {
            Tail::Zero
        } else {
            let r = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| bad("tail must be parenthesized"))?
                .trim();
            if let Some(w) = r.strip_prefix("period:") {
                let w = parse_list(w)?;
                if w.is_empty() {
                    return Err(bad("empty period"));
                }
                Tail::Periodic(w)
            } else if let Some(b) = r.strip_prefix("bounded:") {
                Tail::Bounded(b.trim().parse().map_err(|_| bad("bad bound"))?)
            } else {
                return Err(bad("unknown tail"));
            }
        };
        let support_start = explicit_start.unwrap_or(-(left.len() as i64));
        let mut head = left;
        head.extend(right);
        Ok(OmegaSequence {
            support_start,
            head,
            tail,
        })
    }
}

/// Result of [`encode`].
#[derive(Clone, Debug)]
pub struct Encoding {
    pub sequence: OmegaSequence,
    pub sample: OrbitSample,
    /// `u_n = 0` is certified for every `n <= zero_below`.
    pub zero_below: i64,
}

/// Smallest `m >= 0` such that `|x_{-m'}(g)| < 1/2` for every `m' >= m`.
fn left_zero_start(class: &RootClassification, g: &XiElement) -> Result<u64> {
    let bits = class.bits();
    let w = g.weight(bits);
    if w.is_zero() {
        return Ok(0);
    }
    // |x_{-m}| <= w (1+m)^k beta1^(-m), decreasing once the term ratio is < 1
    let beta1 = Float::with_val(bits, &class.beta1 - class.roots[..class.p].iter().map(|r| r.error.clone()).fold(Float::new(bits), |a, b| a.max(&b)));
    let q = Float::with_val(bits, beta1.recip_ref());
    let k = g.k;
    for m in 0..100_000u64 {
        let growth = Float::with_val(bits, Float::with_val(bits, m + 2) / (m + 1));
        let ratio = Float::with_val(bits, growth.pow_u(k)) * &q;
        if ratio >= 1 {
            continue;
        }
        let b = Float::with_val(bits, &w * Float::with_val(bits, m + 1).pow_u(k)) * Float::with_val(bits, q.pow_u_big(m));
        if b < 0.5 {
            return Ok(m);
        }
    }
    Err(Error::InsufficientWindow("orbit does not decay to the left".into()))
}

trait PowU {
    fn pow_u(&self, e: u32) -> Float;
    fn pow_u_big(&self, e: u64) -> Float;
}

impl PowU for Float {
    fn pow_u(&self, e: u32) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(e))
    }
    fn pow_u_big(&self, e: u64) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(&Integer::from(e)))
    }
}

/// Codes `x(g)` into its symbol sequence on `[M, n_hi]`, where `M` is below the
/// certified left end of the support; symbols after `n_hi` are unknown.
pub fn encode(spec: &RecurrenceSpec, class: &RootClassification, g: &XiElement, n_hi: i64) -> Result<Encoding> {
    let m0 = left_zero_start(class, g)? as i64;
    let big_d = spec.degree as i64;
    let zero_below = -m0;
    let start = (-m0 - big_d).min(n_hi);
    let sample = orbit_sample(spec, class, g, start, n_hi)?;
    let sequence = OmegaSequence {
        support_start: start,
        head: sample.s.clone(),
        tail: Tail::Bounded(spec.b.clone().ceil().numer().clone()),
    };
    Ok(Encoding {
        sequence,
        sample,
        zero_below,
    })
}

/// `eps_m = sum_n rho_{m-n} t_n` with a bound on everything not summed
/// explicitly. The kernel, when given, evaluates a periodic tail in closed form.
pub fn reconstruct_epsilon(
    table: &RhoTable,
    t: &OmegaSequence,
    m: i64,
    kernel: Option<&RhoKernel>,
) -> Result<(Float, Float)> {
    let bits = table.bits();
    let mut value = Float::new(bits);
    let mut err = Float::new(bits);
    for (i, tn) in t.head.iter().enumerate() {
        if tn.is_zero() {
            continue;
        }
        let n = t.support_start + i as i64;
        let abs_t = Float::with_val(bits, tn).abs();
        match table.get(m - n) {
            Some(r) => {
                value += Float::with_val(bits, r * tn);
                err += Float::with_val(bits, table.error(m - n).unwrap() * &abs_t);
            }
            None => err += table.abs_bound(m - n) * &abs_t,
        }
    }
    let end = t.head_end();
    match &t.tail {
        Tail::Zero => {}
        Tail::Bounded(b) => {
            // n >= end means index m - n <= m - end
            let s = table.sum_below(m - end + 1)?;
            err += s * Float::with_val(bits, b);
        }
        Tail::Periodic(w) => {
            let period = w.len() as i64;
            match kernel {
                Some(kern) => {
                    let kb = kern.bits();
                    let mut v = Float::new(kb);
                    let mut mag = Float::new(kb);
                    for (i, wi) in w.iter().enumerate() {
                        if wi.is_zero() {
                            continue;
                        }
                        let c = kern.congruent_sum_upto(m - end - i as i64, period)?;
                        mag += Float::with_val(kb, c.abs_ref()) * Float::with_val(kb, wi).abs();
                        v += Float::with_val(kb, &c * wi);
                    }
                    value += Float::with_val(bits, &v);
                    err += Float::with_val(bits, &mag * &kern.precision().slack()) * (period as u32 + 1);
                }
                None => {
                    // explicit sum over the table window, tail bound beyond it
                    let wmax = Float::with_val(bits, t.max_abs());
                    let mut n = end;
                    while m - n >= table.n_min {
                        let tn = &w[((n - end) % period) as usize];
                        if !tn.is_zero() {
                            match table.get(m - n) {
                                Some(r) => {
                                    value += Float::with_val(bits, r * tn);
                                    err += Float::with_val(bits, table.error(m - n).unwrap() * Float::with_val(bits, tn).abs());
                                }
                                None => err += table.abs_bound(m - n) * Float::with_val(bits, tn).abs(),
                            }
                        }
                        n += 1;
                    }
                    err += table.sum_below(m - n + 1)? * &wmax;
                }
            }
        }
    }
    Ok((value, err))
}

/// Outcome of [`decode_omega0`].
#[derive(Clone, Debug)]
pub struct Decoded {
    pub h: XiElement,
    /// `max_m ||x_m(h) - (B_f t)_m||` over the verification window.
    pub defect: Float,
    pub window: (i64, i64),
    pub precision: Precision,
}

/// Finds `h` with `eps(x_m(h)) = (B_f t)_m (mod 1)` for a finitely supported
/// `t`, and verifies the congruence on `[M - 5, M + 50]`.
pub fn decode_omega0(kernel: &RhoKernel, t: &OmegaSequence) -> Result<Decoded> {
    let spec = kernel.spec();
    if !spec.monic {
        return Err(Error::NotMonic);
    }
    if t.tail != Tail::Zero {
        return Err(Error::InvalidSequence("decoding needs a finitely supported word".into()));
    }
    let class = kernel.classification();
    let start = t.support_start;
    let window = (start - 5, start + 50);
    let span = (t.head_end() - start).max(1) + 60;
    let max_log = class.roots.iter().map(|r| r.modulus.to_f64().log10().abs()).fold(0.0, f64::max);
    let tmax = t.max_abs().to_f64().max(1.0).log10();
    let extra = (max_log * (span + start.abs()) as f64 + tmax).ceil() as u32 + 10;
    let fine = kernel.boosted(extra)?;
    let fclass = fine.classification();
    let bits = fine.bits();
    let k = spec.k as usize;

    let mut g = vec![vec![Complex::new(bits); k + 1]; fclass.p];
    for (j, gj) in g.iter_mut().enumerate() {
        let jet = &fine.jets()[j];
        let inv = Complex::with_val(bits, fclass.roots[j].value.recip_ref());
        for (idx, tn) in t.head.iter().enumerate() {
            if tn.is_zero() {
                continue;
            }
            let n = start + idx as i64;
            let w = Complex::with_val(bits, cpow(&inv, n) * tn);
            for i in 0..=k {
                let mut coef = Complex::new(bits);
                for l in i..=k {
                    let b = Integer::from(Integer::binomial_u(l as u32, i as u32))
                        * Integer::from(-n).pow_small((l - i) as u32);
                    coef += Complex::with_val(bits, &jet.r_coeffs[l] * &Float::with_val(bits, &b));
                }
                gj[i] += coef * &w;
            }
        }
    }
    // exact conjugate symmetry
    for j in 0..fclass.p {
        if let Some(pj) = fclass.roots[j].conj_partner {
            if fclass.roots[j].value.imag().is_sign_positive() {
                g[pj] = g[j].iter().map(|c| Complex::with_val(bits, c.conj_ref())).collect();
            }
        } else {
            for c in g[j].iter_mut() {
                *c.mut_imag() = Float::new(bits);
            }
        }
    }
    let h = XiElement { k: spec.k, g };

    let mut defect = Float::new(bits);
    for m in window.0..=window.1 {
        let (x, _) = orbit_value(fclass, &h, m, bits);
        let mut b = Float::new(bits);
        for (idx, tn) in t.head.iter().enumerate() {
            if !tn.is_zero() {
                b += fine.rho(m - start - idx as i64)? * tn;
            }
        }
        let diff = Float::with_val(bits, &x - &b);
        let (_, e) = round_half_down(&diff);
        let e = e.abs();
        if e > defect {
            defect = e;
        }
    }
    Ok(Decoded {
        h,
        defect,
        window,
        precision: fine.precision(),
    })
}

trait PowSmall {
    fn pow_small(self, e: u32) -> Integer;
}

impl PowSmall for Integer {
    fn pow_small(self, e: u32) -> Integer {
        use rug::ops::Pow;
        self.pow(e)
    }
}

/// `(max |(A_f B_f) - I|, max |(B_f A_f) - I|)` over `lo..=hi` squared.
pub fn matrix_identity_window_defect(table: &RhoTable, lo: i64, hi: i64) -> Result<(Float, Float)> {
    let bits = table.bits();
    let big_d = table.degree() as i64;
    let need_lo = lo - hi - big_d;
    let need_hi = hi - lo + big_d;
    if table.n_min > need_lo || table.n_max < need_hi {
        return Err(Error::InsufficientWindow(format!(
            "matrix window needs rho on [{need_lo}, {need_hi}]"
        )));
    }
    let mut ab = Float::new(bits);
    let mut ba = Float::new(bits);
    for m in lo..=hi {
        for n in lo..=hi {
            // (A B)_{m,n} = sum_{j=m}^{m+D} -A_{j-m} rho_{j-n}
            let mut s = Float::new(bits);
            for (h, a) in table.coeffs.iter().enumerate() {
                s -= Float::with_val(bits, a * table.rho(m + h as i64 - n)?);
            }
            // (B A)_{m,n} = sum_{j=n-D}^{n} rho_{m-j} (-A_{n-j})
            let mut t = Float::new(bits);
            for (h, a) in table.coeffs.iter().enumerate() {
                t -= Float::with_val(bits, a * table.rho(m - n + h as i64)?);
            }
            if m == n {
                s -= 1u32;
                t -= 1u32;
            }
            let s = s.abs();
            let t = t.abs();
            if s > ab {
                ab = s;
            }
            if t > ba {
                ba = t;
            }
        }
    }
    Ok((ab, ba))
}

/// `|det W|` of the generalized Vandermonde matrix with columns
/// `(m^n alpha_l^m)_m` and whether it is certified nonzero.
pub fn vandermonde_nonvanishing(class: &RootClassification, k: u32) -> (Float, bool) {
    let bits = class.bits();
    let d = class.degree();
    let size = (k as usize + 1) * d;
    let mut w: Vec<Vec<Complex>> = vec![vec![Complex::new(bits); size]; size];
    for (l, r) in class.roots.iter().enumerate() {
        for n in 0..=k as usize {
            let col = l * (k as usize + 1) + n;
            for (m, row) in w.iter_mut().enumerate() {
                let mn = if n == 0 { Integer::from(1) } else { Integer::from(m).pow_small(n as u32) };
                row[col] = cpow(&r.value, m as i64) * Float::with_val(bits, &mn);
            }
        }
    }
    let hadamard = w.iter().fold(Float::with_val(bits, 1), |acc, row| {
        let norm = row.iter().fold(Float::new(bits), |s, c| s + Float::with_val(bits, c.norm_ref())).sqrt();
        acc * norm
    });
    let det = complex_det(w);
    let modulus = cabs(&det);
    let worst_root = class.roots.iter().map(|r| r.error.clone()).fold(Float::new(bits), |a, b| a.max(&b));
    let rel = Float::with_val(bits, 1) >> (bits as i32 - 40);
    let err = hadamard * (rel + worst_root * (size as u32 * size as u32));
    let ok = modulus > err;
    (modulus, ok)
}

fn complex_det(mut a: Vec<Vec<Complex>>) -> Complex {
    let n = a.len();
    let bits = a[0][0].prec().0;
    let mut det = Complex::with_val(bits, 1);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| cabs(&a[i][col]).partial_cmp(&cabs(&a[j][col])).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if a[pivot][col].is_zero() {
            return Complex::new(bits);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for row in col + 1..n {
            let factor = Complex::with_val(bits, &a[row][col] / &p);
            for c in col..n {
                let t = Complex::with_val(bits, &factor * &a[col][c]);
                a[row][c] -= t;
            }
        }
    }
    det
}

/// Checks the isolated-point implication on an orbit window: if every
/// `||x_n||` stays below `1 / (2 sum |A_j|)`, then every interior `s_m`
/// vanishes and the reconstructed values near the end of the window are
/// enclosed around 0.
#[derive(Clone, Debug, Serialize)]
pub struct IsolatedPointReport {
    pub threshold: String,
    pub max_norm: String,
    pub below_threshold: bool,
    pub interior_symbols_zero: bool,
    pub limsup_enclosure: [String; 2],
    pub limsup_contains_zero: bool,
}

pub fn isolated_point_check(
    spec: &RecurrenceSpec,
    table: &RhoTable,
    sample: &OrbitSample,
) -> Result<IsolatedPointReport> {
    let bits = table.bits();
    let total = spec.abs_coeff_sum();
    let threshold = Float::with_val(bits, 1) / Float::with_val(bits, Integer::from(&total * 2u32));
    let lo = sample.n_lo.max(0);
    let hi = sample.n_hi + spec.degree as i64;
    let max_norm = sample.max_norm(lo, hi);
    let below = max_norm < threshold;
    let interior_zero = (lo..=sample.n_hi).all(|m| sample.s_at(m).is_none_or(|s| s.is_zero()));

    let seq = OmegaSequence {
        support_start: sample.n_lo,
        head: sample.s.clone(),
        tail: Tail::Bounded(spec.b.clone().ceil().numer().clone()),
    };
    let a = lo + (sample.n_hi - lo) / 2;
    let b = sample.n_hi - (sample.n_hi - lo) / 4;
    let mut enc_lo: Option<Float> = None;
    let mut enc_hi = Float::new(bits);
    for m in a..=b {
        let (v, e) = reconstruct_epsilon(table, &seq, m, None)?;
        let v = v.abs();
        let l = Float::with_val(bits, &v - &e);
        let l = if l < 0 { Float::new(bits) } else { l };
        let h = v + e;
        enc_lo = Some(match enc_lo {
            Some(x) if x <= l => x,
            _ => l,
        });
        if h > enc_hi {
            enc_hi = h;
        }
    }
    let enc = Enclosure::new(enc_lo.unwrap_or_else(|| Float::new(bits)), enc_hi);
    let digits = table.precision.get();
    Ok(IsolatedPointReport {
        threshold: decimal(&threshold, digits),
        max_norm: decimal(&max_norm, digits),
        below_threshold: below,
        interior_symbols_zero: interior_zero,
        limsup_contains_zero: enc.lo().is_zero(),
        limsup_enclosure: enc.to_strings(digits),
    })
}
