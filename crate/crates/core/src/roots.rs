//! Certified root finding (Aberth–Ehrlich iteration with Newton polish) and
//! the expanding/contracting classification of the roots.

use std::cmp::Ordering;

use rug::float::Constant;
use rug::{Complex, Float};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cabs, decimal, Precision};
use crate::poly::{unit_circle_factor_test, IntPolynomial};

const MAX_DOUBLINGS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootClass {
    Expanding,
    Contracting,
    UnitAmbiguous,
}

#[derive(Clone, Debug)]
pub struct RootRecord {
    pub value: Complex,
    pub modulus: Float,
    /// Radius of a disk around `value` certified to contain exactly this root.
    pub error: Float,
    pub multiplicity_in_f: u32,
    pub klass: RootClass,
    pub conj_partner: Option<usize>,
}

impl RootRecord {
    pub fn is_real(&self) -> bool {
        self.value.imag().is_zero()
    }

    pub fn bits(&self) -> u32 {
        self.value.prec().0
    }

    /// `floor(log10(error))`, or `None` for an exact root.
    pub fn error_exponent(&self) -> Option<i64> {
        if self.error.is_zero() {
            None
        } else {
            let l = Float::with_val(64, self.error.log10_ref());
            Some(l.floor().to_f64() as i64)
        }
    }

    pub fn report(&self, digits: u32) -> RootReport {
        RootReport {
            re: decimal(self.value.real(), digits),
            im: decimal(self.value.imag(), digits),
            modulus: decimal(&self.modulus, digits),
            class: self.klass,
            error_exponent: self.error_exponent(),
            conj_partner: self.conj_partner,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub re: String,
    pub im: String,
    pub modulus: String,
    pub class: RootClass,
    pub error_exponent: Option<i64>,
    pub conj_partner: Option<usize>,
}

/// Roots of `P` to `precision` decimal digits, ordered: real expanding roots,
/// upper-half-plane expanding roots, their conjugates (same order), then the
/// non-expanding roots in the same three groups. Within a group roots are
/// sorted by decreasing modulus.
pub fn find_roots(p: &IntPolynomial, precision: Precision) -> Result<Vec<RootRecord>> {
    if !crate::poly::is_squarefree(p) {
        return Err(Error::NotSquarefree);
    }
    let exact_unit = unit_circle_factor_test(p);
    let target = precision.tolerance();
    let mut bits = precision.bits();
    let mut last_radius = String::from("inf");
    for attempt in 0..=MAX_DOUBLINGS {
        let approx = aberth(p, bits);
        if let Some(mut roots) = certify(p, approx, bits) {
            let worst = roots
                .iter()
                .map(|r| r.error.clone())
                .fold(Float::new(bits), |a, b| if b > a { b } else { a });
            last_radius = decimal(&worst, 6);
            let unresolved = exact_unit == 0
                && roots.iter().any(|r| r.klass == RootClass::UnitAmbiguous);
            if worst < target && !(unresolved && attempt < MAX_DOUBLINGS) {
                order_roots(&mut roots);
                return Ok(roots);
            }
        }
        bits *= 2;
    }
    Err(Error::NonConvergence {
        max_radius: last_radius,
    })
}

/// Re-polishes `roots` at a higher precision keeping their order and pairing.
pub fn refine(p: &IntPolynomial, roots: &[RootRecord], precision: Precision) -> Result<Vec<RootRecord>> {
    let bits = precision.bits();
    let mut zs: Vec<Complex> = roots
        .iter()
        .map(|r| Complex::with_val(bits, &r.value))
        .collect();
    for _ in 0..64 {
        let mut moved = false;
        for z in zs.iter_mut() {
            let (v, dv) = eval_with_derivative(p, z);
            if dv.is_zero() {
                continue;
            }
            let step = Complex::with_val(bits, &v / &dv);
            let scale = cabs(z).max(&Float::with_val(bits, 1));
            if cabs(&step) > Float::with_val(bits, &scale >> (bits as i32 - 8)) {
                moved = true;
            }
            *z -= step;
        }
        if !moved {
            break;
        }
    }
    match certify(p, zs.clone(), bits) {
        Some(mut fresh) if fresh.iter().all(|r| r.error < precision.tolerance()) => {
            // certify() re-pairs conjugates; restore the caller's order by
            // matching each old root to its nearest new disk.
            let mut out = Vec::with_capacity(roots.len());
            for old in roots {
                let (idx, _) = fresh
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (i, cabs(&Complex::with_val(bits, &r.value - &old.value))))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
                    .unwrap();
                let mut r = fresh.swap_remove(idx);
                r.multiplicity_in_f = old.multiplicity_in_f;
                if old.klass == RootClass::UnitAmbiguous {
                    r.klass = RootClass::UnitAmbiguous;
                }
                out.push(r);
            }
            fix_partners(&mut out);
            Ok(out)
        }
        _ => Err(Error::PrecisionExhausted(format!(
            "could not refine roots to {precision}"
        ))),
    }
}

fn aberth(p: &IntPolynomial, bits: u32) -> Vec<Complex> {
    let d = p.degree();
    let lead = Float::with_val(bits, p.leading());
    let mut radius = Float::with_val(bits, 0);
    for c in &p.coeffs()[..d] {
        let r = Float::with_val(bits, c) / &lead;
        let r = r.abs();
        if r > radius {
            radius = r;
        }
    }
    radius += 1u32;
    let pi = Float::with_val(bits, Constant::Pi);
    let mut zs: Vec<Complex> = (0..d)
        .map(|i| {
            // fixed offset keeps starting points off the real axis
            let mut theta = Float::with_val(bits, &pi * 2u32);
            theta *= i as f64 + 0.25;
            theta /= d as u32;
            theta += 0.4;
            let (s, c) = theta.sin_cos(Float::new(bits));
            Complex::with_val(bits, (Float::with_val(bits, &c * &radius), Float::with_val(bits, &s * &radius)))
        })
        .collect();
    let max_iter = 200 + 20 * d;
    let threshold_shift = bits as i32 - 12;
    for _ in 0..max_iter {
        let mut converged = true;
        for i in 0..d {
            let (v, dv) = eval_with_derivative(p, &zs[i]);
            if v.is_zero() {
                continue;
            }
            if dv.is_zero() {
                zs[i] += Complex::with_val(bits, (1e-3, 1e-3));
                converged = false;
                continue;
            }
            let ratio = Complex::with_val(bits, &v / &dv);
            let mut sum = Complex::new(bits);
            for j in 0..d {
                if j != i {
                    let diff = Complex::with_val(bits, &zs[i] - &zs[j]);
                    if !diff.is_zero() {
                        sum += Complex::with_val(bits, diff.recip_ref());
                    }
                }
            }
            let denom = Complex::with_val(bits, 1) - Complex::with_val(bits, &ratio * &sum);
            let step = if denom.is_zero() {
                ratio
            } else {
                Complex::with_val(bits, &ratio / &denom)
            };
            let scale = cabs(&zs[i]).max(&Float::with_val(bits, 1));
            if cabs(&step) > Float::with_val(bits, &scale >> threshold_shift) {
                converged = false;
            }
            zs[i] -= step;
        }
        if converged {
            break;
        }
    }
    // Newton polish
    for _ in 0..3 {
        for z in zs.iter_mut() {
            let (v, dv) = eval_with_derivative(p, z);
            if !dv.is_zero() {
                *z -= Complex::with_val(bits, &v / &dv);
            }
        }
    }
    zs
}

fn eval_with_derivative(p: &IntPolynomial, z: &Complex) -> (Complex, Complex) {
    let bits = z.prec().0;
    let mut v = Complex::new(bits);
    let mut dv = Complex::new(bits);
    for c in p.coeffs().iter().rev() {
        dv *= z;
        dv += &v;
        v *= z;
        v += c;
    }
    (v, dv)
}

/// Bound on the rounding error of Horner evaluation of `P` and `P'` at `z`.
fn eval_error(p: &IntPolynomial, z: &Complex) -> (Float, Float) {
    let bits = z.prec().0;
    let r = cabs(z);
    let mut s = Float::new(bits);
    let mut ds = Float::new(bits);
    for c in p.coeffs().iter().rev() {
        ds *= &r;
        ds += &s;
        s *= &r;
        s += Float::with_val(bits, c).abs();
    }
    let d = p.degree() as u32 + 1;
    let unit = Float::with_val(bits, 1) >> (bits as i32 - 4);
    let f = Float::with_val(bits, &unit * (8 * d));
    (
        Float::with_val(bits, &s * &f),
        Float::with_val(bits, &ds * &f),
    )
}

/// Turns approximations into certified records or `None` when the disks are
/// not pairwise disjoint.
fn certify(p: &IntPolynomial, mut zs: Vec<Complex>, bits: u32) -> Option<Vec<RootRecord>> {
    let d = zs.len();
    let mut radii = Vec::with_capacity(d);
    for z in &zs {
        radii.push(inclusion_radius(p, z)?);
    }
    disjoint(&zs, &radii)?;

    // Real roots: the disk meets its mirror image and the mirror meets no
    // other disk, so the root inside equals its own conjugate.
    let mut real = vec![false; d];
    for i in 0..d {
        let im = Float::with_val(bits, zs[i].imag().abs_ref());
        if im <= radii[i] {
            let mirror = Complex::with_val(bits, zs[i].conj_ref());
            let clash = (0..d).any(|j| {
                j != i && cabs(&Complex::with_val(bits, &mirror - &zs[j]))
                    <= Float::with_val(bits, &radii[i] + &radii[j])
            });
            if clash {
                return None;
            }
            real[i] = true;
        }
    }
    let mut partner: Vec<Option<usize>> = vec![None; d];
    for i in 0..d {
        if real[i] || partner[i].is_some() || zs[i].imag().is_sign_negative() {
            continue;
        }
        let mirror = Complex::with_val(bits, zs[i].conj_ref());
        let mut found = None;
        for j in 0..d {
            if j != i && !real[j] && partner[j].is_none()
                && cabs(&Complex::with_val(bits, &mirror - &zs[j]))
                    <= Float::with_val(bits, &radii[i] + &radii[j])
            {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        let j = found?;
        partner[i] = Some(j);
        partner[j] = Some(i);
    }
    if (0..d).any(|i| !real[i] && partner[i].is_none()) {
        return None;
    }

    for i in 0..d {
        if real[i] {
            *zs[i].mut_imag() = Float::new(bits);
        } else if let Some(j) = partner[i] {
            if zs[i].imag().is_sign_positive() {
                let mut avg = Complex::with_val(bits, zs[j].conj_ref());
                avg += &zs[i];
                avg /= 2u32;
                zs[i] = avg;
                zs[j] = Complex::with_val(bits, zs[i].conj_ref());
            }
        }
    }
    // symmetrization can move a centre by at most the disk radius; recompute
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let r = inclusion_radius(p, &zs[i])?;
        let r = r.max(&radii[i]);
        let r = Float::with_val(bits, &r * 2u32);
        let modulus = cabs(&zs[i]);
        let klass = side_of_unit_circle(&modulus, &r);
        out.push(RootRecord {
            value: zs[i].clone(),
            modulus,
            error: r,
            multiplicity_in_f: 1,
            klass,
            conj_partner: partner[i],
        });
    }
    let radii: Vec<Float> = out.iter().map(|r| r.error.clone()).collect();
    let centers: Vec<Complex> = out.iter().map(|r| r.value.clone()).collect();
    disjoint(&centers, &radii)?;
    Some(out)
}

fn side_of_unit_circle(modulus: &Float, radius: &Float) -> RootClass {
    let bits = modulus.prec();
    if Float::with_val(bits, modulus - radius) > 1 {
        RootClass::Expanding
    } else if Float::with_val(bits, modulus + radius) < 1 {
        RootClass::Contracting
    } else {
        RootClass::UnitAmbiguous
    }
}

/// `d (|P(z)| + e) / (|P'(z)| - e')`: a disk of this radius around `z`
/// contains a root of `P`.
fn inclusion_radius(p: &IntPolynomial, z: &Complex) -> Option<Float> {
    let bits = z.prec().0;
    let (v, dv) = eval_with_derivative(p, z);
    let (e, de) = eval_error(p, z);
    let num = Float::with_val(bits, cabs(&v) + &e) * p.degree() as u32;
    let den = Float::with_val(bits, cabs(&dv) - &de);
    if den <= 0 {
        return None;
    }
    Some(num / den)
}

fn disjoint(zs: &[Complex], radii: &[Float]) -> Option<()> {
    let bits = zs.first().map_or(64, |z| z.prec().0);
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            let dist = cabs(&Complex::with_val(bits, &zs[i] - &zs[j]));
            if dist <= Float::with_val(bits, &radii[i] + &radii[j]) {
                return None;
            }
        }
    }
    Some(())
}

fn group(r: &RootRecord) -> u8 {
    let outer = if r.klass == RootClass::Expanding { 0 } else { 3 };
    let inner = if r.is_real() {
        0
    } else if r.value.imag().is_sign_positive() {
        1
    } else {
        2
    };
    outer + inner
}

fn order_roots(roots: &mut Vec<RootRecord>) {
    // conjugates sort by their upper partner so pairs line up
    let key = |r: &RootRecord| -> (u8, Float, Float) {
        let bits = r.bits();
        let re = Float::with_val(bits, r.value.real());
        let im = Float::with_val(bits, r.value.imag().abs_ref());
        let _ = im;
        (group(r), r.modulus.clone(), re)
    };
    roots.sort_by(|a, b| {
        let (ga, ma, ra) = key(a);
        let (gb, mb, rb) = key(b);
        ga.cmp(&gb)
            .then_with(|| mb.partial_cmp(&ma).unwrap_or(Ordering::Equal))
            .then_with(|| rb.partial_cmp(&ra).unwrap_or(Ordering::Equal))
            .then_with(|| {
                let ia = Float::with_val(a.bits(), a.value.imag().abs_ref());
                let ib = Float::with_val(b.bits(), b.value.imag().abs_ref());
                ib.partial_cmp(&ia).unwrap_or(Ordering::Equal)
            })
    });
    fix_partners(roots);
}

fn fix_partners(roots: &mut [RootRecord]) {
    let n = roots.len();
    for i in 0..n {
        roots[i].conj_partner = None;
    }
    for i in 0..n {
        if roots[i].is_real() || roots[i].conj_partner.is_some() {
            continue;
        }
        for j in 0..n {
            if j != i
                && roots[j].conj_partner.is_none()
                && *roots[j].value.real() == *roots[i].value.real()
                && *roots[j].value.imag() == -roots[i].value.imag().clone()
            {
                roots[i].conj_partner = Some(j);
                roots[j].conj_partner = Some(i);
                break;
            }
        }
    }
}

/// Root partition and the derived constants.
#[derive(Clone, Debug)]
pub struct RootClassification {
    pub roots: Vec<RootRecord>,
    pub precision: Precision,
    pub p: usize,
    pub r1: usize,
    pub r2: usize,
    pub r1p: usize,
    pub r2p: usize,
    /// `min |alpha_i|` over expanding roots (`+inf` when there is none).
    pub beta1: Float,
    /// `min 1/|alpha_i|` over non-expanding roots, `+inf` when `p = d`.
    pub beta2: Float,
    pub beta: Float,
    pub beta_tilde: Float,
    pub hyperbolic: bool,
    pub expansive: bool,
    pub beta1_unique: bool,
    pub beta2_unique: bool,
    pub notes: Vec<String>,
}

impl RootClassification {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn expanding(&self) -> &[RootRecord] {
        &self.roots[..self.p]
    }

    pub fn non_expanding(&self) -> &[RootRecord] {
        &self.roots[self.p..]
    }

    pub fn bits(&self) -> u32 {
        self.precision.bits()
    }

    /// Sets the multiplicity of every root in `f = P^(k+1)`.
    pub fn with_k(mut self, k: u32) -> Self {
        for r in &mut self.roots {
            r.multiplicity_in_f = k + 1;
        }
        self
    }

    pub fn report(&self) -> ClassificationReport {
        let digits = self.precision.get();
        ClassificationReport {
            roots: self.roots.iter().map(|r| r.report(digits)).collect(),
            p: self.p,
            r1: self.r1,
            r2: self.r2,
            r1p: self.r1p,
            r2p: self.r2p,
            beta1: decimal(&self.beta1, digits),
            beta2: decimal(&self.beta2, digits),
            beta: decimal(&self.beta, digits),
            beta_tilde: decimal(&self.beta_tilde, digits),
            hyperbolic: self.hyperbolic,
            expansive: self.expansive,
            beta1_unique: self.beta1_unique,
            beta2_unique: self.beta2_unique,
            notes: self.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub roots: Vec<RootReport>,
    pub p: usize,
    pub r1: usize,
    pub r2: usize,
    pub r1p: usize,
    pub r2p: usize,
    pub beta1: String,
    pub beta2: String,
    pub beta: String,
    pub beta_tilde: String,
    pub hyperbolic: bool,
    pub expansive: bool,
    pub beta1_unique: bool,
    pub beta2_unique: bool,
    pub notes: Vec<String>,
}

/// Partitions certified roots. With `exact_unit_degree = 0` no root lies on
/// the unit circle and every root is classified by its modulus. Otherwise a
/// root within `tolerance` of the circle becomes unit-ambiguous.
pub fn classify_roots(
    roots: &[RootRecord],
    tolerance: &Float,
    exact_unit_degree: usize,
    precision: Precision,
) -> Result<RootClassification> {
    let bits = precision.bits();
    let mut notes = Vec::new();
    let mut rs: Vec<RootRecord> = roots.to_vec();
    for (i, r) in rs.iter_mut().enumerate() {
        let klass = side_of_unit_circle(&r.modulus, &r.error);
        r.klass = match klass {
            RootClass::UnitAmbiguous if exact_unit_degree == 0 => {
                if r.modulus > 1 {
                    RootClass::Expanding
                } else {
                    RootClass::Contracting
                }
            }
            RootClass::UnitAmbiguous => {
                let gap = Float::with_val(bits, &r.modulus - 1u32).abs();
                if gap < *tolerance {
                    notes.push(format!("root {i} is ambiguous: within tolerance of |z| = 1"));
                    RootClass::UnitAmbiguous
                } else {
                    return Err(Error::AmbiguousUnitRoot { index: i });
                }
            }
            other => other,
        };
    }
    order_roots(&mut rs);
    let d = rs.len();
    let p = rs.iter().filter(|r| r.klass == RootClass::Expanding).count();
    let r1 = rs[..p].iter().filter(|r| r.is_real()).count();
    let r2 = (p - r1) / 2;
    let r1p = rs[p..].iter().filter(|r| r.is_real()).count();
    let r2p = (d - p - r1p) / 2;
    let hyperbolic = rs.iter().all(|r| r.klass != RootClass::UnitAmbiguous);
    let expansive = p == d && hyperbolic;

    let inf = Float::with_val(bits, rug::float::Special::Infinity);
    let tol = precision.tolerance();
    let min_with_count = |vals: Vec<Float>| -> (Float, bool) {
        let m = vals.iter().fold(inf.clone(), |a, b| if *b < a { b.clone() } else { a });
        let count = vals
            .iter()
            .filter(|v| Float::with_val(bits, *v - &m).abs() < tol)
            .count();
        (m, count == 1)
    };
    let (beta1, beta1_unique) = min_with_count(rs[..p].iter().map(|r| r.modulus.clone()).collect());
    let (beta2, beta2_unique) = min_with_count(
        rs[p..]
            .iter()
            .map(|r| Float::with_val(bits, r.modulus.recip_ref()))
            .collect(),
    );
    let beta = if beta1 <= beta2 { beta1.clone() } else { beta2.clone() };
    let beta_tilde = if beta1 >= beta2 { beta1.clone() } else { beta2.clone() };
    if p == 0 {
        notes.push("no expanding root".to_string());
    }
    Ok(RootClassification {
        roots: rs,
        precision,
        p,
        r1,
        r2,
        r1p,
        r2p,
        beta1,
        beta2,
        beta,
        beta_tilde,
        hyperbolic,
        expansive,
        beta1_unique,
        beta2_unique,
        notes,
    })
}

/// Roots plus classification with the default tolerance `10^(-digits/4)`.
pub fn analyze(p: &IntPolynomial, precision: Precision) -> Result<RootClassification> {
    let roots = find_roots(p, precision)?;
    let tol = crate::numeric::pow10(-(precision.get() as i64) / 4, precision.bits());
    classify_roots(&roots, &tol, unit_circle_factor_test(p), precision)
}

/// `prod alpha_i` and `sum alpha_i` compared with Vieta; returns the larger
/// of the two discrepancies.
pub fn vieta_defect(p: &IntPolynomial, roots: &[RootRecord]) -> Float {
    let bits = roots[0].bits();
    let d = p.degree();
    let mut prod = Complex::with_val(bits, 1);
    let mut sum = Complex::new(bits);
    for r in roots {
        prod *= &r.value;
        sum += &r.value;
    }
    let lead = Float::with_val(bits, p.leading());
    let mut expected_prod = Float::with_val(bits, p.constant()) / &lead;
    if d % 2 == 1 {
        expected_prod = -expected_prod;
    }
    let expected_sum = -(Float::with_val(bits, &p.coeffs()[d - 1]) / &lead);
    let a = cabs(&Complex::with_val(bits, &prod - &expected_prod));
    let b = cabs(&Complex::with_val(bits, &sum - &expected_sum));
    a.max(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c).unwrap()
    }

    fn f(x: &Float) -> f64 {
        x.to_f64()
    }

    #[test]
    fn quadratic_roots_match_closed_form() {
        let prec = Precision::DEFAULT;
        let roots = find_roots(&poly(&[82, -20, 1]), prec).unwrap();
        let bits = prec.bits();
        let s = Float::with_val(bits, 18u32).sqrt();
        let a1 = Float::with_val(bits, &s + 10u32);
        let a2 = Float::with_val(bits, 10u32 - &s);
        assert!(roots[0].is_real() && roots[1].is_real());
        let e1 = Float::with_val(bits, roots[0].value.real() - &a1).abs();
        let e2 = Float::with_val(bits, roots[1].value.real() - &a2).abs();
        assert!(e1 < prec.tolerance() && e2 < prec.tolerance());
        assert!(e1 <= roots[0].error && e2 <= roots[1].error);
    }

    #[test]
    fn cubic_roots_and_pairing() {
        let prec = Precision::DEFAULT;
        let roots = find_roots(&poly(&[-2, 6, 2, 1]), prec).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(!roots[0].is_real() && roots[0].value.imag().is_sign_positive());
        assert_eq!(roots[0].conj_partner, Some(1));
        assert_eq!(*roots[1].value.imag(), -roots[0].value.imag().clone());
        assert_eq!(*roots[1].value.real(), *roots[0].value.real());
        assert!((f(roots[0].value.real()) + 1.14953128864899).abs() < 1e-12);
        assert!((f(roots[0].value.imag()) - 2.31649334040767).abs() < 1e-12);
        assert!(roots[2].is_real());
        assert!((f(roots[2].value.real()) - 0.299062577297983).abs() < 1e-13);
    }

    #[test]
    fn linear_root_is_exact() {
        let roots = find_roots(&poly(&[-2, 1]), Precision::digits(40)).unwrap();
        assert_eq!(*roots[0].value.real(), 2);
        assert!(roots[0].is_real());
        assert!(roots[0].error < Precision::digits(40).tolerance());
    }

    #[test]
    fn classification_examples() {
        let prec = Precision::DEFAULT;
        let c = analyze(&poly(&[82, -20, 1]), prec).unwrap();
        assert_eq!((c.p, c.r1, c.r2), (2, 2, 0));
        assert!(c.expansive && c.hyperbolic);
        assert!(c.beta2.is_infinite());
        assert_eq!(c.beta, c.beta1);
        assert!((f(&c.beta1) - 5.757359312880715).abs() < 1e-12);

        let c = analyze(&poly(&[-2, 6, 2, 1]), prec).unwrap();
        assert_eq!((c.p, c.r1, c.r2, c.r1p, c.r2p), (2, 0, 1, 1, 0));
        assert!(c.hyperbolic && !c.expansive);
        assert!((f(&c.beta1) - 2.5861).abs() < 1e-4);
        assert!((f(&c.beta2) - 3.3437).abs() < 1e-4);
        assert!(!c.beta1_unique);
        assert!(c.beta2_unique);
        assert_eq!(c.beta, c.beta1);
        assert_eq!(c.beta_tilde, c.beta2);

        let c = analyze(&poly(&[1, 0, 1]), prec).unwrap();
        assert!(!c.hyperbolic && !c.expansive);
        assert_eq!(c.p, 0);
    }

    #[test]
    fn unit_band_smaller_than_error_is_an_error() {
        let prec = Precision::digits(30);
        let mut roots = find_roots(&poly(&[1, 0, 1]), prec).unwrap();
        for r in roots.iter_mut() {
            r.error = Float::with_val(prec.bits(), 1e-3);
        }
        let tiny = Float::with_val(prec.bits(), 1e-40);
        // modulus is exactly 1 here, so a tiny band still catches it
        assert!(classify_roots(&roots, &tiny, 2, prec).is_ok());
        for r in roots.iter_mut() {
            r.modulus = Float::with_val(prec.bits(), 1.0005);
        }
        assert!(matches!(
            classify_roots(&roots, &tiny, 2, prec),
            Err(Error::AmbiguousUnitRoot { .. })
        ));
    }

    #[test]
    fn vieta_holds() {
        for c in [&[82i64, -20, 1][..], &[-2, 6, 2, 1], &[3, -1, 0, 4, 2, 1], &[5, -5, 1]] {
            let p = poly(c);
            let prec = Precision::DEFAULT;
            let roots = find_roots(&p, prec).unwrap();
            assert!(vieta_defect(&p, &roots) < prec.tolerance(), "{c:?}");
        }
    }

    #[test]
    fn doubling_precision_stays_inside_disks() {
        let p = poly(&[-2, 6, 2, 1]);
        let lo = find_roots(&p, Precision::digits(40)).unwrap();
        let hi = refine(&p, &lo, Precision::digits(80)).unwrap();
        for (a, b) in lo.iter().zip(&hi) {
            let bits = b.bits();
            let diff = cabs(&Complex::with_val(bits, &a.value - &b.value));
            assert!(diff <= a.error);
        }
    }

    #[test]
    fn repeated_roots_rejected() {
        assert!(matches!(
            find_roots(&poly(&[1, 2, 1]), Precision::DEFAULT),
            Err(Error::NotSquarefree)
        ));
    }
}
