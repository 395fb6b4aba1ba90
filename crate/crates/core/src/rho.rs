//! The coefficients `rho_n` of the inverse of the banded matrix built from
//! `f = P^(k+1)`, computed from residues of `z^(n-1) / f(z)` at the roots.
//!
//! For `n >= 1` the value is minus the residue sum over the non-expanding
//! roots; for `n <= D-1` it is the residue sum over the expanding roots. On the
//! overlap both are evaluated and compared.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cabs, cpow, decimal, poly_geometric_tail, Enclosure, Precision};
use crate::poly::{IntPolynomial, RecurrenceSpec};
use crate::roots::{classify_roots, refine, RootClassification};
use crate::spectrum::homsym::hom_sym;

/// Truncated Taylor data of a pole of `1/f` of order `k+1`.
#[derive(Clone, Debug)]
pub struct ResidueJet {
    pub center: Complex,
    pub order: u32,
    /// Taylor coefficients `g_0 .. g_k` of `(z - alpha)^(k+1) / f(z)` at `alpha`.
    pub g: Vec<Complex>,
    /// `c_0 .. c_k` with `Res(z^(n-1)/f, alpha) = (sum_l c_l n^l) alpha^n`.
    pub r_coeffs: Vec<Complex>,
}

impl ResidueJet {
    pub fn new(p: &IntPolynomial, alpha: &Complex, k: u32, index: usize) -> Result<Self> {
        let bits = alpha.prec().0;
        let k = k as usize;
        // Taylor coefficients of P at alpha by repeated synthetic division;
        // q(z) = P(z)/(z - alpha) has coefficients p_1, p_2, ...
        let mut b: Vec<Complex> = p.coeffs().iter().map(|c| Complex::with_val(bits, c)).collect();
        let mut taylor = Vec::with_capacity(k + 2);
        for _ in 0..(k + 2).min(p.degree() + 1) {
            let mut quotient = vec![Complex::new(bits); b.len().saturating_sub(1)];
            let mut acc = Complex::new(bits);
            for i in (0..b.len()).rev() {
                acc *= alpha;
                acc += &b[i];
                if i > 0 {
                    quotient[i - 1] = acc.clone();
                }
            }
            taylor.push(acc);
            b = quotient;
        }
        taylor.resize(k + 2, Complex::new(bits));
        let q: Vec<Complex> = taylor[1..].to_vec();

        let scale = p
            .coeffs()
            .iter()
            .fold(Float::new(bits), |s, c| s + Float::with_val(bits, c).abs())
            * Float::with_val(bits, cabs(alpha) + 1u32).pow(p.degree() as u32);
        if cabs(&q[0]) <= Float::with_val(bits, &scale >> (bits as i32 / 2)) {
            return Err(Error::DegenerateJet { index });
        }

        let mut qpow = vec![Complex::with_val(bits, 1)];
        qpow.resize(k + 1, Complex::new(bits));
        for _ in 0..=k {
            qpow = mul_truncated(&qpow, &q, k + 1);
        }
        let g = reciprocal_series(&qpow, k + 1);

        // Res(n) = sum_i binom(n-1, i) alpha^(n-1-i) g_{k-i}
        let inv = Complex::with_val(bits, alpha.recip_ref());
        let mut r_coeffs = vec![Complex::new(bits); k + 1];
        let mut inv_pow = inv.clone();
        for i in 0..=k {
            let binom = binomial_shifted_poly(i);
            let w = Complex::with_val(bits, &inv_pow * &g[k - i]);
            for (l, c) in binom.iter().enumerate() {
                r_coeffs[l] += Complex::with_val(bits, &w * &Float::with_val(bits, c));
            }
            inv_pow *= &inv;
        }
        Ok(ResidueJet {
            center: alpha.clone(),
            order: k as u32 + 1,
            g,
            r_coeffs,
        })
    }

    /// `r(n)` such that the residue equals `r(n) alpha^n`.
    pub fn r_at(&self, n: i64) -> Complex {
        let bits = self.center.prec().0;
        let x = Float::with_val(bits, n);
        let mut acc = Complex::new(bits);
        for c in self.r_coeffs.iter().rev() {
            acc *= &x;
            acc += c;
        }
        acc
    }

    pub fn residue(&self, n: i64) -> Complex {
        let rn = self.r_at(n);
        rn * cpow(&self.center, n)
    }

    /// The same residue from `(1/k!) d^k/dz^k (z^(n-1) g(z))` term by term.
    pub fn residue_by_derivative(&self, n: i64) -> Complex {
        let bits = self.center.prec().0;
        let k = self.order as usize - 1;
        let mut total = Complex::new(bits);
        for i in 0..=k {
            let b = binomial_at(n - 1, i);
            let term = cpow(&self.center, n - 1 - i as i64) * &self.g[k - i];
            total += term * Float::with_val(bits, &b);
        }
        total
    }

    /// `sum_l |c_l|`, so that `|r(n)| <= coeff_bound * (1+|n|)^k`.
    pub fn coeff_bound(&self) -> Float {
        let bits = self.center.prec().0;
        self.r_coeffs
            .iter()
            .fold(Float::new(bits), |s, c| s + cabs(c))
    }

    /// `sum_{t >= 0} r(start + t*step) alpha^(start + t*step)`, which converges
    /// when `|alpha^step| < 1`.
    pub fn progression_sum(&self, start: i64, step: i64) -> Complex {
        let bits = self.center.prec().0;
        let z = cpow(&self.center, step);
        let k = self.r_coeffs.len() - 1;
        // r(start + t*step) = sum_i b_i t^i
        let mut b = vec![Complex::new(bits); k + 1];
        for (l, c) in self.r_coeffs.iter().enumerate() {
            for i in 0..=l {
                let coef = Integer::from(Integer::binomial_u(l as u32, i as u32))
                    * Integer::from(start).pow((l - i) as u32)
                    * Integer::from(step).pow(i as u32);
                b[i] += Complex::with_val(bits, c * &Float::with_val(bits, &coef));
            }
        }
        let one_minus = Complex::with_val(bits, 1) - &z;
        let inv = Complex::with_val(bits, one_minus.recip_ref());
        let mut total = Complex::new(bits);
        for (i, bi) in b.iter().enumerate() {
            // sum_t t^i z^t = sum_s S(i,s) s! z^s / (1-z)^(s+1)
            let mut li = Complex::new(bits);
            let mut zs = Complex::with_val(bits, 1);
            let mut invs = inv.clone();
            for s in 0..=i {
                let w = stirling2(i, s) * Integer::from(Integer::factorial(s as u32));
                li += Complex::with_val(bits, &zs * &invs) * Float::with_val(bits, &w);
                zs *= &z;
                invs *= &inv;
            }
            total += li * bi;
        }
        total * cpow(&self.center, start)
    }
}

fn stirling2(n: usize, k: usize) -> Integer {
    let mut row = vec![Integer::from(1)];
    for i in 1..=n {
        let mut next = vec![Integer::new(); i + 1];
        for j in 1..=i {
            let carry = if j < row.len() { Integer::from(&row[j] * j as u32) } else { Integer::new() };
            next[j] = carry + &row[j - 1];
        }
        row = next;
    }
    row.get(k).cloned().unwrap_or_default()
}

/// Coefficients in `n` of `binom(n-1, i) = (n-1)(n-2)...(n-i)/i!`.
fn binomial_shifted_poly(i: usize) -> Vec<Rational> {
    let mut poly = vec![Rational::from(1)];
    for t in 1..=i as i64 {
        let mut next = vec![Rational::new(); poly.len() + 1];
        for (e, c) in poly.iter().enumerate() {
            next[e + 1] += c;
            next[e] -= Rational::from(c * t);
        }
        poly = next;
    }
    let fact = Integer::from(Integer::factorial(i as u32));
    poly.into_iter().map(|c| c / &fact).collect()
}

/// `binom(x, i)` for any integer `x`.
fn binomial_at(x: i64, i: usize) -> Rational {
    let mut acc = Rational::from(1);
    for t in 0..i as i64 {
        acc *= Rational::from((x - t, t + 1));
    }
    acc
}

fn mul_truncated(a: &[Complex], b: &[Complex], len: usize) -> Vec<Complex> {
    let bits = a[0].prec().0;
    let mut out = vec![Complex::new(bits); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += Complex::with_val(bits, x * y);
        }
    }
    out
}

fn reciprocal_series(a: &[Complex], len: usize) -> Vec<Complex> {
    let bits = a[0].prec().0;
    let inv0 = Complex::with_val(bits, a[0].recip_ref());
    let mut out = vec![inv0.clone()];
    for m in 1..len {
        let mut s = Complex::new(bits);
        for i in 1..=m.min(a.len() - 1) {
            s += Complex::with_val(bits, &a[i] * &out[m - i]);
        }
        out.push(-(s * &inv0));
    }
    out
}

/// Residue data for every root of `P`, shared by all `rho` evaluations.
#[derive(Clone, Debug)]
pub struct RhoKernel {
    spec: RecurrenceSpec,
    class: RootClassification,
    jets: Vec<ResidueJet>,
}

impl RhoKernel {
    pub fn new(spec: &RecurrenceSpec, class: &RootClassification) -> Result<Self> {
        if !class.hyperbolic {
            return Err(Error::Unsupported(
                "rho is only computed when no root lies on the unit circle".into(),
            ));
        }
        let jets = class
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| ResidueJet::new(&spec.base, &r.value, spec.k, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(RhoKernel {
            spec: spec.clone(),
            class: class.clone(),
            jets,
        })
    }

    pub fn spec(&self) -> &RecurrenceSpec {
        &self.spec
    }

    pub fn classification(&self) -> &RootClassification {
        &self.class
    }

    pub fn jets(&self) -> &[ResidueJet] {
        &self.jets
    }

    pub fn precision(&self) -> Precision {
        self.class.precision
    }

    pub fn bits(&self) -> u32 {
        self.class.precision.bits()
    }

    /// The same kernel with roots re-polished to `extra` more digits.
    pub fn boosted(&self, extra: u32) -> Result<RhoKernel> {
        let prec = self.precision().boosted(extra);
        let roots = refine(&self.spec.base, &self.class.roots, prec)?;
        let tol = crate::numeric::pow10(-(prec.get() as i64) / 4, prec.bits());
        let unit = crate::poly::unit_circle_factor_test(&self.spec.base);
        let class = classify_roots(&roots, &tol, unit, prec)?.with_k(self.spec.k);
        RhoKernel::new(&self.spec, &class)
    }

    pub fn residue(&self, j: usize, n: i64) -> Complex {
        self.jets[j].residue(n)
    }

    /// Residue sum and sum of moduli over roots `range`.
    fn side(&self, range: std::ops::Range<usize>, n: i64) -> (Complex, Float) {
        let bits = self.bits();
        let mut sum = Complex::new(bits);
        let mut mag = Float::new(bits);
        for j in range {
            let r = self.jets[j].residue(n);
            mag += cabs(&r);
            sum += r;
        }
        (sum, mag)
    }

    pub fn expanding_residue_sum(&self, n: i64) -> Complex {
        self.side(0..self.class.p, n).0
    }

    /// `rho_n` and an error bound for it.
    pub fn rho_with_error(&self, n: i64) -> Result<(Float, Float)> {
        let bits = self.bits();
        let p = self.class.p;
        let d = self.class.degree();
        let big_d = self.spec.degree as i64;
        let tol = self.precision().tolerance();
        let (value, mag) = if n >= 1 {
            let (s, m) = self.side(p..d, n);
            let v = -s;
            if n < big_d {
                let (other, m2) = self.side(0..p, n);
                let diff = cabs(&Complex::with_val(bits, &v - &other));
                let scale = Float::with_val(bits, &m + &m2).max(&Float::with_val(bits, 1));
                if diff > Float::with_val(bits, &tol * &scale) {
                    return Err(Error::InconsistentOverlap {
                        n,
                        difference: decimal(&diff, 6),
                    });
                }
            }
            (v, m)
        } else {
            self.side(0..p, n)
        };
        let scale = Float::with_val(bits, &mag).max(&Float::with_val(bits, 1));
        if Float::with_val(bits, value.imag().abs_ref()) > Float::with_val(bits, &tol * &scale) {
            return Err(Error::PrecisionExhausted(format!(
                "imaginary part of rho_{n} is not negligible"
            )));
        }
        let err = Float::with_val(bits, &mag * &self.relative_error(n));
        Ok((value.real().clone(), err))
    }

    /// Relative error of a residue at `n`: rounding plus the effect of the
    /// certified root radii.
    fn relative_error(&self, n: i64) -> Float {
        let bits = self.bits();
        let mut worst = Float::new(bits);
        let d = self.class.degree();
        let big_d = self.spec.degree as u64;
        for j in 0..d {
            let rj = &self.class.roots[j];
            let mut sens = Float::with_val(bits, n.unsigned_abs() + big_d + 1) / &rj.modulus;
            for i in 0..d {
                if i != j {
                    let gap = cabs(&Complex::with_val(bits, &rj.value - &self.class.roots[i].value));
                    sens += Float::with_val(bits, big_d) / gap;
                }
            }
            let e = Float::with_val(bits, &sens * &rj.error) * 2u32;
            if e > worst {
                worst = e;
            }
        }
        let rounding = Float::with_val(bits, 1) >> (bits as i32 - 40);
        worst + rounding
    }

    /// `rho_n`; on an overlap disagreement the roots are refined once.
    pub fn rho(&self, n: i64) -> Result<Float> {
        match self.rho_with_error(n) {
            Ok((v, _)) => Ok(v),
            Err(Error::InconsistentOverlap { .. }) => {
                let fine = self.boosted(self.precision().get())?;
                let (v, _) = fine.rho_with_error(n)?;
                Ok(Float::with_val(self.bits(), v))
            }
            Err(e) => Err(e),
        }
    }

    /// `sum_{n <= r, n = r mod L} rho_n`.
    pub fn congruent_sum_upto(&self, r: i64, period: i64) -> Result<Float> {
        let bits = self.bits();
        let n0 = if r <= 0 { r } else { r - period * ((r + period - 1) / period) };
        let mut total = Complex::new(bits);
        for j in 0..self.class.p {
            total += self.jets[j].progression_sum(n0, -period);
        }
        let mut out = self.real_part(total)?;
        let mut n = n0 + period;
        while n <= r {
            out += self.rho(n)?;
            n += period;
        }
        Ok(out)
    }

    /// `sum_{n = r mod L} rho_n` over all integers.
    pub fn congruent_sum_all(&self, r: i64, period: i64) -> Result<Float> {
        let bits = self.bits();
        let n0 = r.rem_euclid(period) - if r.rem_euclid(period) == 0 { 0 } else { period };
        let n1 = n0 + period;
        let mut total = Complex::new(bits);
        for j in 0..self.class.p {
            total += self.jets[j].progression_sum(n0, -period);
        }
        for j in self.class.p..self.class.degree() {
            total -= self.jets[j].progression_sum(n1, period);
        }
        self.real_part(total)
    }

    fn real_part(&self, z: Complex) -> Result<Float> {
        let bits = self.bits();
        let scale = cabs(&z).max(&Float::with_val(bits, 1));
        if Float::with_val(bits, z.imag().abs_ref())
            > Float::with_val(bits, &self.precision().tolerance() * &scale)
        {
            return Err(Error::PrecisionExhausted("periodic sum is not real".into()));
        }
        Ok(z.real().clone())
    }
}

/// `rho_n` for the given recurrence and root classification.
pub fn rho_value(spec: &RecurrenceSpec, class: &RootClassification, n: i64) -> Result<Float> {
    RhoKernel::new(spec, class)?.rho(n)
}

/// Residue at `alpha_j` of `z^(n-1)/f(z)`.
pub fn residue_at_root(spec: &RecurrenceSpec, class: &RootClassification, j: usize, n: i64) -> Result<Complex> {
    let root = class
        .roots
        .get(j)
        .ok_or_else(|| Error::Unsupported(format!("no root with index {j}")))?;
    Ok(ResidueJet::new(&spec.base, &root.value, spec.k, j)?.residue(n))
}

/// `-(1/a_0) H_d^(-n)(1/alpha_1, ..., 1/alpha_d)`, valid for expansive `P`,
/// `k = 0` and `n <= 0`.
pub fn rho_expansive(p: &IntPolynomial, n: i64, class: &RootClassification) -> Result<Float> {
    if !class.expansive {
        return Err(Error::NotExpansive);
    }
    if n > 0 {
        return Err(Error::Unsupported("closed form needs n <= 0".into()));
    }
    let bits = class.bits();
    let inv: Vec<Complex> = class
        .roots
        .iter()
        .map(|r| Complex::with_val(bits, r.value.recip_ref()))
        .collect();
    let h = hom_sym((-n) as usize, &inv);
    let a0 = Float::with_val(bits, p.constant());
    Ok(-(Float::with_val(bits, h.real()) / a0))
}

/// `|rho_n| <= constant * (1+m)^poly_order * rate^m` with `m = |n|` on one side.
#[derive(Clone, Debug)]
pub struct TailBound {
    pub rate: Float,
    pub constant: Float,
    pub poly_order: u32,
}

impl TailBound {
    pub fn at(&self, m: u64) -> Float {
        let bits = self.rate.prec();
        if self.constant.is_zero() {
            return Float::new(bits);
        }
        let growth = Float::with_val(bits, m + 1).pow(self.poly_order);
        let decay = Float::with_val(bits, (&self.rate).pow(&Integer::from(m)));
        Float::with_val(bits, &self.constant * &growth) * decay
    }

    /// Bound on `sum_{m' >= m} |rho|` along this side.
    pub fn sum_from(&self, m: u64) -> Option<Float> {
        if self.constant.is_zero() {
            return Some(Float::new(self.rate.prec()));
        }
        poly_geometric_tail(self.poly_order, &self.rate, m).map(|t| t * &self.constant)
    }

    pub fn report(&self, digits: u32) -> TailReport {
        TailReport {
            rate: decimal(&self.rate, digits),
            constant: decimal(&self.constant, digits),
            poly_order: self.poly_order,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub rate: String,
    pub constant: String,
    pub poly_order: u32,
}

fn tail_bounds(kernel: &RhoKernel) -> (TailBound, TailBound) {
    let bits = kernel.bits();
    let class = kernel.classification();
    let k = kernel.spec().k;
    let inflate = Float::with_val(bits, 1) + (Float::with_val(bits, 1) >> 32);
    let mut c_neg = Float::new(bits);
    let mut rate_neg = Float::new(bits);
    for (j, r) in class.roots[..class.p].iter().enumerate() {
        c_neg += kernel.jets[j].coeff_bound();
        let lo = Float::with_val(bits, &r.modulus - &r.error);
        let q = Float::with_val(bits, lo.recip_ref());
        if q > rate_neg {
            rate_neg = q;
        }
    }
    let mut c_pos = Float::new(bits);
    let mut rate_pos = Float::new(bits);
    for (j, r) in class.roots.iter().enumerate().skip(class.p) {
        c_pos += kernel.jets[j].coeff_bound();
        let hi = Float::with_val(bits, &r.modulus + &r.error);
        if hi > rate_pos {
            rate_pos = hi;
        }
    }
    (
        TailBound {
            rate: rate_neg,
            constant: c_neg * &inflate,
            poly_order: k,
        },
        TailBound {
            rate: rate_pos,
            constant: c_pos * &inflate,
            poly_order: k,
        },
    )
}

/// `rho_n` on a window with certified bounds beyond it.
#[derive(Clone, Debug)]
pub struct RhoTable {
    pub n_min: i64,
    pub n_max: i64,
    pub precision: Precision,
    pub k: u32,
    pub coeffs: Vec<Integer>,
    values: Vec<Float>,
    errors: Vec<Float>,
    /// Bounds `|rho_{-m}|` for `m >= 0`.
    pub tail_negative: TailBound,
    /// Bounds `|rho_m|` for `m >= 1`.
    pub tail_positive: TailBound,
    pub abs_sum: Enclosure,
    /// `true` when `rho_n = 0` for all `n >= 1` (no non-expanding root).
    pub vanishes_right: bool,
}

pub fn build_rho_table(kernel: &RhoKernel, n_min: i64, n_max: i64) -> Result<RhoTable> {
    if n_min > 0 || n_max < 0 {
        return Err(Error::InsufficientWindow(format!(
            "window [{n_min}, {n_max}] must contain 0"
        )));
    }
    let bits = kernel.bits();
    let pairs: Vec<(Float, Float)> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| kernel.rho_with_error(n).or_else(|e| match e {
            Error::InconsistentOverlap { .. } => {
                let v = kernel.rho(n)?;
                let err = Float::with_val(bits, &v).abs() >> (bits as i32 / 2);
                Ok((v, err))
            }
            other => Err(other),
        }))
        .collect::<Result<Vec<_>>>()?;
    let (values, errors): (Vec<Float>, Vec<Float>) = pairs.into_iter().unzip();
    let (tail_negative, tail_positive) = tail_bounds(kernel);

    let mut sum = Float::new(bits);
    let mut err = Float::new(bits);
    for (v, e) in values.iter().zip(&errors) {
        sum += Float::with_val(bits, v.abs_ref());
        err += e;
    }
    let count = values.len() as u32 + 1;
    err += Float::with_val(bits, &sum * count) >> (bits as i32 - 8);
    let left = tail_negative
        .sum_from((1 - n_min) as u64)
        .ok_or_else(|| Error::InsufficientWindow("left window too short for the tail bound".into()))?;
    let right = tail_positive
        .sum_from((n_max + 1) as u64)
        .ok_or_else(|| Error::InsufficientWindow("right window too short for the tail bound".into()))?;
    let lo = Float::with_val(bits, &sum - &err);
    let hi = Float::with_val(bits, &sum + &err) + left + right;
    let lo = if lo < 0 { Float::new(bits) } else { lo };
    Ok(RhoTable {
        n_min,
        n_max,
        precision: kernel.precision(),
        k: kernel.spec().k,
        coeffs: kernel.spec().coeffs.clone(),
        values,
        errors,
        tail_negative,
        tail_positive,
        abs_sum: Enclosure::new(lo, hi),
        vanishes_right: kernel.classification().p == kernel.classification().degree(),
    })
}

impl RhoTable {
    pub fn get(&self, n: i64) -> Option<&Float> {
        if n < self.n_min || n > self.n_max {
            None
        } else {
            Some(&self.values[(n - self.n_min) as usize])
        }
    }

    pub fn rho(&self, n: i64) -> Result<&Float> {
        self.get(n).ok_or_else(|| {
            Error::InsufficientWindow(format!(
                "rho_{n} outside the table window [{}, {}]",
                self.n_min, self.n_max
            ))
        })
    }

    /// Error bound of the stored `rho_n`.
    pub fn error(&self, n: i64) -> Option<&Float> {
        if n < self.n_min || n > self.n_max {
            None
        } else {
            Some(&self.errors[(n - self.n_min) as usize])
        }
    }

    pub fn max_error(&self) -> Float {
        self.errors
            .iter()
            .fold(Float::new(self.bits()), |a, b| if *b > a { b.clone() } else { a })
    }

    pub fn bits(&self) -> u32 {
        self.precision.bits()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Bound on `|rho_n|` for any `n`, from the table or the tails.
    pub fn abs_bound(&self, n: i64) -> Float {
        match self.get(n) {
            Some(v) => {
                Float::with_val(self.bits(), v.abs_ref()) + &self.errors[(n - self.n_min) as usize]
            }
            None if n <= 0 => self.tail_negative.at(n.unsigned_abs()),
            None => self.tail_positive.at(n as u64),
        }
    }

    /// Bound on `sum_{n < lo} |rho_n|` (requires `lo <= n_min + 1`, `lo <= 1`).
    pub fn sum_below(&self, lo: i64) -> Result<Float> {
        let bits = self.bits();
        let mut s = Float::new(bits);
        let start = lo.min(self.n_min + 1);
        for n in start..lo {
            s += self.abs_bound(n);
        }
        // n < start <= n_min + 1: n <= n_min, covered by the tail from 1 - start
        let m = (1 - start).max(0) as u64;
        let tail = self
            .tail_negative
            .sum_from(m)
            .ok_or_else(|| Error::InsufficientTail("negative tail does not converge from here".into()))?;
        Ok(s + tail)
    }

    /// Bound on `sum_{n > hi} |rho_n|`.
    pub fn sum_above(&self, hi: i64) -> Result<Float> {
        let bits = self.bits();
        let mut s = Float::new(bits);
        let stop = hi.max(self.n_max - 1).max(0);
        for n in hi + 1..=stop {
            s += self.abs_bound(n);
        }
        let tail = self
            .tail_positive
            .sum_from((stop + 1) as u64)
            .ok_or_else(|| Error::InsufficientTail("positive tail does not converge from here".into()))?;
        Ok(s + tail)
    }

    pub fn to_csv(&self) -> String {
        let digits = self.precision.get();
        let mut out = String::from("n,rho,abs_rho\n");
        for (i, v) in self.values.iter().enumerate() {
            let n = self.n_min + i as i64;
            out.push_str(&format!(
                "{n},{},{}\n",
                decimal(v, digits),
                decimal(&Float::with_val(v.prec(), v.abs_ref()), digits)
            ));
        }
        out
    }

    pub fn report(&self) -> RhoTableReport {
        let digits = self.precision.get();
        RhoTableReport {
            n_min: self.n_min,
            n_max: self.n_max,
            precision_digits: digits,
            k: self.k,
            abs_sum: self.abs_sum.to_strings(digits),
            max_value_error: decimal(&self.max_error(), 6),
            tail_negative: self.tail_negative.report(digits),
            tail_positive: self.tail_positive.report(digits),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoTableReport {
    pub n_min: i64,
    pub n_max: i64,
    pub precision_digits: u32,
    pub k: u32,
    pub abs_sum: [String; 2],
    pub max_value_error: String,
    pub tail_negative: TailReport,
    pub tail_positive: TailReport,
}

/// `max_n |sum_j -A_j rho_{j+n} - [n = 0]|` over `lo..=hi`.
pub fn convolution_identity_defect(table: &RhoTable, lo: i64, hi: i64) -> Result<Float> {
    let bits = table.bits();
    let big_d = table.degree() as i64;
    if lo < table.n_min || hi + big_d > table.n_max {
        return Err(Error::InsufficientWindow(format!(
            "need rho on [{lo}, {}], table has [{}, {}]",
            hi + big_d,
            table.n_min,
            table.n_max
        )));
    }
    let mut worst = Float::new(bits);
    for n in lo..=hi {
        let mut s = Float::new(bits);
        for (j, a) in table.coeffs.iter().enumerate() {
            s -= Float::with_val(bits, a * table.rho(j as i64 + n)?);
        }
        if n == 0 {
            s -= 1u32;
        }
        let s = s.abs();
        if s > worst {
            worst = s;
        }
    }
    Ok(worst)
}

/// Exact coefficients of `1 / (1 + A_{D-1} w + ... + A_0 w^D)` up to `w^len-1`.
pub fn reversed_series(spec: &RecurrenceSpec, len: usize) -> Result<Vec<Integer>> {
    if !spec.monic {
        return Err(Error::NotMonic);
    }
    let rev: Vec<Integer> = spec.coeffs.iter().rev().cloned().collect();
    let mut e: Vec<Integer> = Vec::with_capacity(len);
    for m in 0..len {
        let mut s = Integer::from(u32::from(m == 0));
        for i in 1..=m.min(rev.len() - 1) {
            s -= Integer::from(&rev[i] * &e[m - i]);
        }
        e.push(s);
    }
    Ok(e)
}

/// Residue of `z^(n-1)/f(z)` at infinity, exactly, and whether `rho_n` minus
/// the expanding residue sum agrees with it numerically.
pub fn residue_at_infinity_integrality(kernel: &RhoKernel, n: i64) -> Result<(Integer, bool)> {
    let spec = kernel.spec();
    let big_d = spec.degree as i64;
    let value = if n < big_d {
        Integer::new()
    } else {
        let e = reversed_series(spec, (n - big_d + 1) as usize)?;
        Integer::from(-&e[(n - big_d) as usize])
    };
    if !spec.monic {
        return Err(Error::NotMonic);
    }
    // the numeric side needs enough digits to resolve integers of this size
    let magnitude = Float::with_val(64, Float::with_val(64, &Integer::from(value.abs_ref())) + 2u32).log10().to_f64();
    let growth = kernel
        .classification()
        .roots
        .iter()
        .map(|r| r.modulus.to_f64().log10().max(0.0))
        .fold(0.0, f64::max)
        * n.unsigned_abs() as f64;
    let needed = (magnitude.max(growth) as u32) + kernel.precision().get() / 2 + 10;
    let local;
    let kern = if needed > kernel.precision().get() {
        local = kernel.boosted(needed - kernel.precision().get())?;
        &local
    } else {
        kernel
    };
    let bits = kern.bits();
    let rho = kern.rho(n)?;
    let exp = kern.expanding_residue_sum(n);
    let lhs = Complex::with_val(bits, -&exp) + &rho;
    let diff = cabs(&Complex::with_val(bits, &lhs - &value));
    Ok((value, diff < kern.precision().tolerance()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{power_to_f, Limits};
    use crate::roots::analyze;
    use rug::float::Constant;

    fn setup(c: &[i64], k: u32, digits: u32) -> RhoKernel {
        let p = IntPolynomial::from_i64(c).unwrap();
        let spec = power_to_f(&p, k, &Limits::default()).unwrap();
        let class = analyze(&p, Precision::digits(digits)).unwrap().with_k(k);
        RhoKernel::new(&spec, &class).unwrap()
    }

    /// Trapezoidal rule on |z| = 1; exponentially accurate for hyperbolic f.
    fn quadrature_rho(spec: &RecurrenceSpec, n: i64, nodes: u32, bits: u32) -> Float {
        let pi = Float::with_val(bits, Constant::Pi);
        let mut total = Complex::new(bits);
        for t in 0..nodes {
            let theta = Float::with_val(bits, &pi * 2u32) * t / nodes;
            let (s, c) = theta.sin_cos(Float::new(bits));
            let z = Complex::with_val(bits, (c, s));
            let mut fz = Complex::new(bits);
            for a in spec.coeffs.iter().rev() {
                fz *= &z;
                fz += a;
            }
            total += cpow(&z, n) / fz;
        }
        -(Float::with_val(bits, total.real()) / nodes)
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() < tol
    }

    #[test]
    fn linear_examples() {
        let kern = setup(&[-2, 1], 0, 60);
        assert!(close(&kern.residue(0, 0).real().clone(), 0.5, 1e-60));
        assert_eq!(kern.rho(0).unwrap(), 0.5);
        assert_eq!(kern.rho(-1).unwrap(), 0.25);
        assert_eq!(kern.rho(1).unwrap(), 0);
    }

    #[test]
    fn quadratic_examples() {
        let kern = setup(&[82, -20, 1], 0, 60);
        let bits = kern.bits();
        let r0 = kern.rho(0).unwrap();
        let expected = Float::with_val(bits, -1) / 82u32;
        assert!(Float::with_val(bits, &r0 - &expected).abs() < 1e-55);
        assert_eq!(kern.rho(1).unwrap(), 0);
        assert_eq!(kern.rho(7).unwrap(), 0);
        // 1/f'(alpha_1) = 1/(6 sqrt 2)
        let res = kern.residue(0, 1);
        assert!(close(res.real(), 1.0 / (6.0 * 2f64.sqrt()), 1e-15));
    }

    #[test]
    fn double_pole_residue() {
        let kern = setup(&[-2, 1], 1, 60);
        let r = kern.residue(0, 3);
        assert!(close(r.real(), 4.0, 1e-50));
        for n in -5..6 {
            let a = kern.jets()[0].residue(n);
            let b = kern.jets()[0].residue_by_derivative(n);
            assert!(cabs(&Complex::with_val(a.prec().0, &a - &b)) < 1e-50, "n={n}");
        }
    }

    #[test]
    fn agrees_with_quadrature() {
        for (c, k) in [(&[-2i64, 6, 2, 1][..], 0u32), (&[-2, 6, 2, 1], 1), (&[82, -20, 1], 0), (&[82, -20, 1], 1)] {
            let kern = setup(c, k, 40);
            let bits = kern.bits();
            for n in [-6i64, -1, 0, 1, 2, 5] {
                let v = kern.rho(n).unwrap();
                let q = quadrature_rho(kern.spec(), n, 600, bits);
                let diff = Float::with_val(bits, &v - &q).abs();
                assert!(diff < 1e-30, "{c:?} k={k} n={n}: {v} vs {q}");
            }
        }
    }

    #[test]
    fn cubic_reference_values() {
        let kern = setup(&[-2, 6, 2, 1], 0, 60);
        assert!(close(&kern.rho(0).unwrap(), 0.052046029743373944, 1e-16));
        assert!(close(&kern.rho(1).unwrap(), -0.133_966_268_855_810_8, 1e-16));
        assert!(close(&kern.rho(-1).unwrap(), 0.0021396715568043546, 1e-17));
        assert!(close(&kern.rho(-2).unwrap(), -0.008_518_090_014_118_393, 1e-17));
    }

    #[test]
    fn expansive_closed_form() {
        let p = IntPolynomial::from_i64(&[82, -20, 1]).unwrap();
        let kern = setup(&[82, -20, 1], 0, 60);
        let class = kern.classification();
        let bits = kern.bits();
        let v = rho_expansive(&p, -1, class).unwrap();
        let expected = Float::with_val(bits, -10) / 3362u32;
        assert!(Float::with_val(bits, &v - &expected).abs() < 1e-55);
        for n in -60..=0 {
            let a = kern.rho(n).unwrap();
            let b = rho_expansive(&p, n, class).unwrap();
            assert!(Float::with_val(bits, &a - &b).abs() < 1e-50, "n={n}");
        }
        let lin = IntPolynomial::from_i64(&[-2, 1]).unwrap();
        let lk = setup(&[-2, 1], 0, 60);
        assert_eq!(rho_expansive(&lin, -3, lk.classification()).unwrap(), 0.0625);
        let cubic = setup(&[-2, 6, 2, 1], 0, 40);
        let cp = IntPolynomial::from_i64(&[-2, 6, 2, 1]).unwrap();
        assert_eq!(rho_expansive(&cp, 0, cubic.classification()), Err(Error::NotExpansive));
    }

    #[test]
    fn table_abs_sum_closed_forms() {
        let kern = setup(&[82, -20, 1], 0, 60);
        let t = build_rho_table(&kern, -200, 5).unwrap();
        let bits = t.bits();
        let target = Float::with_val(bits, 1) / 63u32;
        assert!(t.abs_sum.contains(&target));
        assert!(t.abs_sum.width() < 1e-30);

        let kern = setup(&[-2, 1], 0, 60);
        let t = build_rho_table(&kern, -100, 5).unwrap();
        assert!(t.abs_sum.contains(&Float::with_val(bits, 1)));
    }

    #[test]
    fn tails_dominate_values() {
        for (c, k) in [(&[-2i64, 6, 2, 1][..], 0u32), (&[-2, 6, 2, 1], 1), (&[82, -20, 1], 1)] {
            let kern = setup(c, k, 40);
            let t = build_rho_table(&kern, -80, 80).unwrap();
            for n in -80..=80i64 {
                if n.abs() < t.degree() as i64 {
                    continue;
                }
                let v = Float::with_val(t.bits(), t.get(n).unwrap().abs_ref());
                let bound = if n <= 0 { t.tail_negative.at(n.unsigned_abs()) } else { t.tail_positive.at(n as u64) };
                assert!(v <= bound, "{c:?} k={k} n={n}");
            }
        }
    }

    #[test]
    fn convolution_identity() {
        for (c, k, digits) in [(&[-2i64, 1][..], 0u32, 60u32), (&[82, -20, 1], 0, 60), (&[-2, 6, 2, 1], 1, 60)] {
            let kern = setup(c, k, digits);
            let d = kern.spec().degree as i64;
            let t = build_rho_table(&kern, -50, 50 + d).unwrap();
            let defect = convolution_identity_defect(&t, -50, 50).unwrap();
            assert!(defect < 1e-45, "{c:?}: {defect}");
            assert!(convolution_identity_defect(&t, -50, 51).is_err());
        }
    }

    #[test]
    fn residue_at_infinity() {
        let kern = setup(&[-2, 1], 0, 60);
        let (v, ok) = residue_at_infinity_integrality(&kern, 1).unwrap();
        assert_eq!(v, -1);
        assert!(ok);
        let kern = setup(&[82, -20, 1], 0, 60);
        for n in [-3, 0, 1] {
            let (v, ok) = residue_at_infinity_integrality(&kern, n).unwrap();
            assert_eq!(v, 0);
            assert!(ok);
        }
        // 1/(1 - 20w + 82w^2) = 1 + 20w + 318w^2 + ...
        let (v, ok) = residue_at_infinity_integrality(&kern, 2).unwrap();
        assert_eq!(v, -1);
        assert!(ok);
        let (v, ok) = residue_at_infinity_integrality(&kern, 4).unwrap();
        assert_eq!(v, -318);
        assert!(ok);
        let (_, ok) = residue_at_infinity_integrality(&kern, 40).unwrap();
        assert!(ok);
        let kern = setup(&[-2, 6, 2, 1], 1, 40);
        for n in 6..12 {
            assert!(residue_at_infinity_integrality(&kern, n).unwrap().1);
        }
    }

    #[test]
    fn periodic_sums_match_truncation() {
        for c in [&[-2i64, 6, 2, 1][..], &[82, -20, 1]] {
            let kern = setup(c, 0, 40);
            let bits = kern.bits();
            for period in [1i64, 3, 7] {
                for r in [-5i64, 0, 2, 9] {
                    let mut upto = Float::new(bits);
                    let mut all = Float::new(bits);
                    let mut n = r.rem_euclid(period) - 400 * period;
                    while n <= 400 {
                        let v = kern.rho(n).unwrap();
                        if n <= r {
                            upto += &v;
                        }
                        all += v;
                        n += period;
                    }
                    let a = kern.congruent_sum_upto(r, period).unwrap();
                    let b = kern.congruent_sum_all(r, period).unwrap();
                    assert!(Float::with_val(bits, &a - &upto).abs() < 1e-30, "{c:?} L={period} r={r}");
                    assert!(Float::with_val(bits, &b - &all).abs() < 1e-30, "{c:?} L={period} r={r}");
                }
            }
        }
    }

    #[test]
    fn non_hyperbolic_refused() {
        let p = IntPolynomial::from_i64(&[1, 0, 1]).unwrap();
        let spec = power_to_f(&p, 0, &Limits::default()).unwrap();
        let class = analyze(&p, Precision::digits(40)).unwrap();
        assert!(matches!(RhoKernel::new(&spec, &class), Err(Error::Unsupported(_))));
    }
}
