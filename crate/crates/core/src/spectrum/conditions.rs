//! Certified checks of the hypotheses behind the spectrum results.

use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;

use crate::error::Result;
use crate::numeric::{cabs, decimal, Enclosure, Verdict};
use crate::poly::RecurrenceSpec;
use crate::rho::RhoTable;
use crate::roots::RootClassification;
use crate::spectrum::weights::{mu_weights, SignCase};

#[derive(Clone, Debug)]
pub struct Condition {
    pub verdict: Verdict,
    /// Left-hand side of the inequality.
    pub value: Option<Enclosure>,
    pub threshold: Rational,
    /// `threshold - value` at the unfavorable endpoint (positive when the
    /// inequality `value < threshold` holds with room).
    pub margin: Option<Float>,
    pub note: String,
}

impl Condition {
    fn not_applicable(note: impl Into<String>) -> Self {
        Condition {
            verdict: Verdict::NotApplicable,
            value: None,
            threshold: Rational::new(),
            margin: None,
            note: note.into(),
        }
    }

    /// `value < threshold` (or `<=` when `inclusive`), decided conservatively.
    fn below(value: Enclosure, threshold: Rational, inclusive: bool, note: impl Into<String>) -> Self {
        let bits = value.hi().prec();
        let t = Float::with_val(bits, &threshold);
        let verdict = match (value.hi().partial_cmp(&t), value.lo().partial_cmp(&t)) {
            (Some(std::cmp::Ordering::Less), _) => Verdict::Holds,
            (Some(std::cmp::Ordering::Equal), _) if inclusive && value.lo() == value.hi() => Verdict::Holds,
            (_, Some(std::cmp::Ordering::Greater)) => Verdict::Fails,
            (_, Some(std::cmp::Ordering::Equal)) if !inclusive => Verdict::Fails,
            _ => Verdict::Undecided,
        };
        let margin = Float::with_val(bits, &t - value.hi());
        Condition {
            verdict,
            value: Some(value),
            threshold,
            margin: Some(margin),
            note: note.into(),
        }
    }

    pub fn report(&self, digits: u32) -> ConditionReport {
        ConditionReport {
            verdict: self.verdict,
            value: self.value.as_ref().map(|v| v.to_strings(digits)),
            threshold: self.threshold.to_string(),
            margin: self.margin.as_ref().map(|m| decimal(m, digits)),
            note: self.note.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub value: Option<[String; 2]>,
    pub threshold: String,
    pub margin: Option<String>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct Conditions {
    /// `mu_0 >= 2 mu_1 >= 4 mu_2 >= ... > 0` or the mirrored chain.
    pub assum_disc1: Condition,
    /// All roots real, above 1, with `sum 1/alpha_i <= 1/2`.
    pub cor: Condition,
    /// `ceil((beta - 1)/2) sum |rho_n| < 1/2`
    pub eqn319: Condition,
    /// `ceil((beta_tilde - 1)/2) sum |rho_n| < 1/2`
    pub newbeta: Condition,
    /// `ceil((beta - 1)/2) sum_j 1 / (||alpha_j| - 1| prod_{i != j} |alpha_j - alpha_i|) < 1/2`
    pub suff: Condition,
    pub k: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub assum_disc1: ConditionReport,
    pub cor: ConditionReport,
    pub eqn319: ConditionReport,
    pub newbeta: ConditionReport,
    pub suff: ConditionReport,
    pub k: u32,
}

impl Conditions {
    pub fn report(&self, digits: u32) -> ConditionsReport {
        ConditionsReport {
            assum_disc1: self.assum_disc1.report(digits),
            cor: self.cor.report(digits),
            eqn319: self.eqn319.report(digits),
            newbeta: self.newbeta.report(digits),
            suff: self.suff.report(digits),
            k: self.k,
        }
    }
}

fn root_radius(class: &RootClassification) -> Float {
    let bits = class.bits();
    class
        .roots
        .iter()
        .map(|r| r.error.clone())
        .fold(Float::new(bits), |a, b| a.max(&b))
}

/// Enclosure of `beta` (finite) from root moduli; radius covers `1/|alpha|`.
fn beta_enclosure(beta: &Float, class: &RootClassification) -> Option<Enclosure> {
    if beta.is_infinite() {
        return None;
    }
    let bits = class.bits();
    let scale = Float::with_val(bits, beta * beta).max(&Float::with_val(bits, 1));
    let rad = root_radius(class) * scale * 4u32;
    Some(Enclosure::from_mid_rad(beta, &rad))
}

/// `ceil((x - 1)/2)`, if constant over the enclosure.
fn ceil_half(x: &Enclosure) -> Option<Integer> {
    let f = |v: &Float| -> Integer {
        let t = Float::with_val(v.prec(), v - 1u32) / 2u32;
        t.ceil().to_integer().unwrap()
    };
    let a = f(x.lo());
    (a == f(x.hi())).then_some(a)
}

fn scaled_sum_condition(label: &str, beta: &Float, class: &RootClassification, table: &RhoTable) -> Condition {
    let Some(b) = beta_enclosure(beta, class) else {
        return Condition::not_applicable(format!("{label} is infinite (one side of the unit circle has no roots)"));
    };
    let Some(c) = ceil_half(&b) else {
        return Condition {
            verdict: Verdict::Undecided,
            value: None,
            threshold: Rational::from((1, 2)),
            margin: None,
            note: format!("{label} is too close to an odd integer to fix the ceiling"),
        };
    };
    let factor = Float::with_val(table.bits(), &c);
    let value = table.abs_sum.scale(&factor);
    Condition::below(value, Rational::from((1, 2)), false, format!("ceil(({label} - 1)/2) = {c}, table k = {}", table.k))
}

pub fn check_conditions(spec: &RecurrenceSpec, class: &RootClassification, table: &RhoTable) -> Result<Conditions> {
    let p = &spec.base;
    let bits = class.bits();
    let half = Rational::from((1, 2));

    // cor: exact sum of inverse roots -a_1/a_0
    let cor = if !p.is_monic() {
        Condition::not_applicable("P is not monic")
    } else if class.r1 != class.degree() || class.roots.iter().any(|r| !r.is_real() || *r.value.real() <= 1) {
        Condition::not_applicable("not every root is real and greater than 1")
    } else {
        let a = p.coeffs();
        let a1 = a.get(1).cloned().unwrap_or_default();
        let s = -Rational::from((a1, a[0].clone()));
        let v = Float::with_val(bits, &s);
        let verdict = Verdict::from_bool(s <= half);
        Condition {
            verdict,
            value: Some(Enclosure::point(&v)),
            threshold: half.clone(),
            margin: Some(Float::with_val(bits, Rational::from(&half - &s))),
            note: format!("sum 1/alpha_i = {s}"),
        }
    };

    let assum_disc1 = if !p.is_monic() || !class.expansive {
        Condition::not_applicable("needs a monic expansive P")
    } else {
        let w = mu_weights(p, class, 200)?;
        let case = match w.case {
            SignCase::Positive => "positive",
            SignCase::Negative => "negative (mirrored)",
        };
        let (verdict, note) = if let Some(j) = w.first_failure {
            (Verdict::Fails, format!("{case} case, chain breaks at j = {j}"))
        } else if cor.verdict == Verdict::Holds {
            (Verdict::Holds, format!("{case} case, chain checked for j <= 200; all j follow from sum 1/alpha_i <= 1/2 with positive roots"))
        } else {
            (Verdict::Undecided, format!("{case} case, chain holds for j <= 200 but no tail argument is available"))
        };
        Condition {
            verdict,
            value: None,
            threshold: half.clone(),
            margin: None,
            note,
        }
    };

    let eqn319 = scaled_sum_condition("beta", &class.beta, class, table);
    let newbeta = scaled_sum_condition("beta_tilde", &class.beta_tilde, class, table);

    let suff = match beta_enclosure(&class.beta, class).and_then(|b| ceil_half(&b)) {
        None => Condition::not_applicable("beta not available"),
        Some(c) => {
            let mut s = Float::new(bits);
            for (j, rj) in class.roots.iter().enumerate() {
                let mut den = Float::with_val(bits, &rj.modulus - 1u32).abs();
                for (i, ri) in class.roots.iter().enumerate() {
                    if i != j {
                        den *= cabs(&Complex::with_val(bits, &rj.value - &ri.value));
                    }
                }
                s += den.recip();
            }
            let v = s * Float::with_val(bits, &c);
            let rad = Float::with_val(bits, &v * class.precision.tolerance());
            Condition::below(Enclosure::from_mid_rad(&v, &rad), half.clone(), false, format!("ceil((beta - 1)/2) = {c}"))
        }
    };

    Ok(Conditions {
        assum_disc1,
        cor,
        eqn319,
        newbeta,
        suff,
        k: spec.k,
    })
}
