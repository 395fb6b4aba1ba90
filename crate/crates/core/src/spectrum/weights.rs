//! The weights `mu_j = -a_0^{-1} H_d^(j)(alpha^{-1})`, the pairing
//! `(t)_mu = sum_j mu_j t_j`, and the values `e`, `e_k`.

use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cabs, poly_geometric_tail, Enclosure};
use crate::poly::{IntPolynomial, Limits};
use crate::roots::RootClassification;
use crate::spectrum::coding::CodedSequence;
use crate::spectrum::homsym::hom_sym_all;
use crate::spectrum::series::{e_series, SeriesKind};

/// `H_d^(0..=n)(alpha_1^{-1}, ..., alpha_d^{-1})` exactly: the coefficients of
/// `a_0 / P(X) = prod_i 1 / (1 - X / alpha_i)`.
pub fn hom_sym_at_inverse_roots(p: &IntPolynomial, n: usize) -> Vec<Rational> {
    let a = p.coeffs();
    let a0 = Rational::from(&a[0]);
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::from(1));
    for m in 1..=n {
        let mut s = Rational::new();
        for (j, aj) in a.iter().enumerate().skip(1).take(m) {
            s += Rational::from(aj * &b[m - j]);
        }
        b.push(-(s / &a0));
    }
    b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCase {
    /// `mu_0 >= 2 mu_1 >= 4 mu_2 >= ... > 0`
    Positive,
    /// the mirrored chain of negative weights
    Negative,
}

#[derive(Clone, Debug)]
pub struct MuWeights {
    pub mu: Vec<Rational>,
    pub case: SignCase,
    /// The chain holds for every `j < N`.
    pub monotone: bool,
    pub first_failure: Option<usize>,
    /// Upper bound for `max_i |alpha_i|^{-1}`.
    pub q: Float,
    pub a0_abs: Integer,
    pub d: usize,
    /// Largest difference between the exact `H^(j)` and the Lagrange form on
    /// the computed roots, `j <= 40`.
    pub lagrange_defect: Float,
}

impl MuWeights {
    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    /// Bound on `sum_{j >= from} |mu_j|`, using
    /// `|H^(j)| <= binom(j+d-1, d-1) q^j <= (1+j)^(d-1) q^j`.
    pub fn tail_bound(&self, from: usize) -> Option<Float> {
        let t = poly_geometric_tail(self.d as u32 - 1, &self.q, from as u64)?;
        Some(t / Float::with_val(self.q.prec(), &self.a0_abs))
    }
}

pub fn mu_weights(p: &IntPolynomial, class: &RootClassification, n: usize) -> Result<MuWeights> {
    if !class.expansive {
        return Err(Error::NotExpansive);
    }
    let bits = class.bits();
    let h = hom_sym_at_inverse_roots(p, n);
    let a0 = Rational::from(p.constant());
    let mu: Vec<Rational> = h.iter().map(|x| -Rational::from(x / &a0)).collect();
    let case = if mu[0] > 0 { SignCase::Positive } else { SignCase::Negative };
    let mut first_failure = None;
    for j in 0..n {
        let half = Rational::from(&mu[j] / 2u32);
        let ok = match case {
            SignCase::Positive => mu[j + 1] > 0 && mu[j + 1] <= half,
            SignCase::Negative => mu[j + 1] < 0 && mu[j + 1] >= half,
        };
        if !ok {
            first_failure = Some(j);
            break;
        }
    }

    let inv: Vec<Complex> = class.roots.iter().map(|r| Complex::with_val(bits, r.value.recip_ref())).collect();
    let checked = n.min(40);
    let numeric = hom_sym_all(checked, &inv);
    let mut defect = Float::new(bits);
    for (j, hj) in numeric.iter().enumerate() {
        let diff = cabs(&Complex::with_val(bits, hj - &Float::with_val(bits, &h[j])));
        if diff > defect {
            defect = diff;
        }
    }

    let min_mod = class
        .roots
        .iter()
        .map(|r| Float::with_val(bits, &r.modulus - &r.error))
        .fold(Float::with_val(bits, f64::INFINITY), |a, b| a.min(&b));
    let q = Float::with_val(bits, min_mod.recip_ref());
    Ok(MuWeights {
        mu,
        case,
        monotone: first_failure.is_none(),
        first_failure,
        q,
        a0_abs: p.constant().clone().abs(),
        d: p.degree(),
        lagrange_defect: defect,
    })
}

/// `s +- tail`, converting `s` with enough bits that rounding stays below the tail.
fn rational_enclosure(s: &Rational, tail: Float, min_bits: u32) -> Enclosure {
    let need = tail.get_exp().map_or(0, |e| (-e).max(0) as u32) + 64;
    let bits = min_bits.max(need);
    let mid = Float::with_val(bits, s);
    let rad = Float::with_val(bits, &tail) + Float::with_val(bits, mid.abs_ref()) / Float::with_val(bits, Float::i_exp(1, bits as i32 - 8));
    Enclosure::from_mid_rad(&mid, &rad)
}

/// `sum_j mu_j t_j` as an enclosure; terms beyond the computed weights or the
/// known symbols are charged to the tail bound.
pub fn evaluate_mu_pairing(code: &CodedSequence, mu: &MuWeights) -> Result<Enclosure> {
    let bits = mu.q.prec();
    let symbols = code.symbols(mu.mu.len());
    let mut s = Rational::new();
    for (m, &t) in mu.mu.iter().zip(symbols.iter()) {
        match t {
            1 => s += m,
            -1 => s -= m,
            _ => {}
        }
    }
    let tail = mu
        .tail_bound(symbols.len())
        .ok_or_else(|| Error::InsufficientTail("weights do not decay fast enough for a tail bound".into()))?;
    Ok(rational_enclosure(&s, tail, bits))
}

/// `|a_0|^{-1} sum_n c_n H_d^(n)(alpha^{-1})` for the series of `kind`.
pub fn evaluate_series(kind: SeriesKind, mu: &MuWeights, limits: &Limits) -> Result<Enclosure> {
    let order = mu.order();
    let series = e_series(kind, order, limits)?;
    if series.coeffs.iter().any(|c| c.clone().abs() > 1) {
        return Err(Error::Unsupported(format!("{kind} has a coefficient above 1")));
    }
    let bits = mu.q.prec();
    // sum c_n H^(n) / |a_0| = -sign(a_0) sum c_n mu_n
    let mut s = Rational::new();
    for (c, m) in series.coeffs.iter().zip(mu.mu.iter()) {
        s += Rational::from(c * m);
    }
    if mu.case == SignCase::Negative {
        s = -s;
    }
    let tail = mu
        .tail_bound(order + 1)
        .ok_or_else(|| Error::InsufficientTail("weights do not decay fast enough for a tail bound".into()))?;
    Ok(rational_enclosure(&s, tail, bits))
}

/// `e` and `e_0 .. e_K`.
pub fn evaluate_e(mu: &MuWeights, k_max: u32, limits: &Limits) -> Result<(Enclosure, Vec<Enclosure>)> {
    let e = evaluate_series(SeriesKind::E, mu, limits)?;
    let ek = (0..=k_max)
        .map(|k| evaluate_series(SeriesKind::Ek(k), mu, limits))
        .collect::<Result<Vec<_>>>()?;
    Ok((e, ek))
}
