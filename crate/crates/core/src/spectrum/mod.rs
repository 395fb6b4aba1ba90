//! Discrete part of the spectrum, the hypotheses behind it, and witnesses of
//! the accumulation at 1/2.

pub mod coding;
pub mod conditions;
pub mod homsym;
pub mod realize;
pub mod series;
pub mod subsum;
pub mod weights;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{decimal, Enclosure, Verdict};
use crate::poly::{Limits, RecurrenceSpec};
use crate::rho::{RhoKernel, RhoTable};
use crate::roots::RootClassification;

use coding::{phi_omega, phi_substitution};
use conditions::{check_conditions, Conditions, ConditionsReport};
use weights::{evaluate_e, evaluate_mu_pairing, mu_weights, MuWeights, SignCase};

/// Statements whose hypotheses are certified for this input.
pub fn applicable_theorems(spec: &RecurrenceSpec, class: &RootClassification, cond: &Conditions) -> Vec<String> {
    let mut out = Vec::new();
    let monic = spec.base.is_monic();
    if monic && class.hyperbolic {
        out.push("0 is an isolated point of the spectrum".to_string());
        out.push("1/2 is an accumulation point of the spectrum".to_string());
    }
    if monic && !class.hyperbolic {
        out.push("the spectrum is dense in [0, 1/2]".to_string());
    }
    let single_beta = (class.beta == class.beta1 && class.beta1_unique) || (class.beta == class.beta2 && class.beta2_unique);
    if monic && cond.k == 0 && cond.eqn319.verdict == Verdict::Holds {
        if single_beta {
            out.push("proper intervals [c_i, d_i] in the spectrum with c_i -> 1/2".to_string());
        } else {
            out.push("sum condition holds but beta is attained at more than one root; interval statement not applicable".to_string());
        }
    }
    if monic && cond.k == 0 && cond.newbeta.verdict == Verdict::Holds && class.beta1_unique && class.beta2_unique {
        out.push("[v, 1/2] is contained in the spectrum for some v < 1/2".to_string());
    }
    if cond.assum_disc1.verdict == Verdict::Holds || cond.cor.verdict == Verdict::Holds {
        out.push("e = E_d(1/alpha)/|a_0| is the minimal limit point; below it the spectrum is {e_k}".to_string());
    }
    out
}

#[derive(Clone, Debug)]
pub struct DiscreteSpectrum {
    pub e: Enclosure,
    pub e_k: Vec<Enclosure>,
    pub mu: MuWeights,
    pub conditions: Conditions,
    pub applicable_theorems: Vec<String>,
    pub order: usize,
    /// `|(Phi(omega))_mu|`
    pub phi_omega: Enclosure,
    /// `|(Phi(A_{k-1}^inf))_mu|`
    pub phi_ak: Vec<Enclosure>,
    /// `e_0 < e_1 < ... < e_K < e` with disjoint enclosures, all below 1/2.
    pub ordered: bool,
}

fn abs_of(x: Enclosure) -> Enclosure {
    x.abs()
}

fn gap(a: &Enclosure, b: &Enclosure) -> Float {
    let bits = a.lo().prec().max(b.lo().prec());
    Float::with_val(bits, a.mid() - b.mid()).abs()
}

fn overlaps(a: &Enclosure, b: &Enclosure) -> bool {
    !a.disjoint(b)
}

pub fn discrete_spectrum(kernel: &RhoKernel, table: &RhoTable, k_max: u32, order: usize, limits: &Limits) -> Result<DiscreteSpectrum> {
    let spec = kernel.spec();
    let class = kernel.classification();
    if !spec.base.is_monic() {
        return Err(Error::NotMonic);
    }
    if !class.expansive {
        return Err(Error::NotExpansive);
    }
    let conditions = check_conditions(spec, class, table)?;
    let ok = |v: Verdict| v == Verdict::Holds;
    if !ok(conditions.assum_disc1.verdict) && !ok(conditions.cor.verdict) {
        let msg = format!(
            "assum_disc1: {} ({}); cor: {} ({})",
            conditions.assum_disc1.verdict, conditions.assum_disc1.note, conditions.cor.verdict, conditions.cor.note
        );
        return if conditions.assum_disc1.verdict == Verdict::Undecided || conditions.cor.verdict == Verdict::Undecided {
            Err(Error::Undecided(msg))
        } else {
            Err(Error::Hypothesis(msg))
        };
    }

    let half = Float::with_val(64, 0.5);
    let mut order = order.max(16);
    loop {
        let mu = mu_weights(&spec.base, class, order)?;
        let (e, e_k) = evaluate_e(&mu, k_max, limits)?;
        let mut ordered = e_k.windows(2).all(|w| w[0].strictly_below(&w[1]));
        ordered &= e_k.last().is_none_or(|x| x.strictly_below(&e));
        ordered &= e.hi() < &half;
        let doubled = order * 2;
        if !ordered && doubled <= limits.max_series_order {
            order = doubled;
            continue;
        }
        let omega = phi_omega(order + 1, limits)?;
        let phi_omega = abs_of(evaluate_mu_pairing(&omega, &mu)?);
        let phi_ak = (0..=k_max)
            .map(|k| Ok(abs_of(evaluate_mu_pairing(&phi_substitution(k as i64 - 1, limits)?, &mu)?)))
            .collect::<Result<Vec<_>>>()?;
        let applicable = applicable_theorems(spec, class, &conditions);
        return Ok(DiscreteSpectrum {
            e,
            e_k,
            mu,
            conditions,
            applicable_theorems: applicable,
            order,
            phi_omega,
            phi_ak,
            ordered,
        });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub e: [String; 2],
    pub e_k: Vec<[String; 2]>,
    pub mu: Vec<String>,
    pub mu_case: SignCase,
    pub mu_monotone: bool,
    pub conditions: ConditionsReport,
    pub applicable_theorems: Vec<String>,
    pub ordered: bool,
    pub cross_check: CrossCheck,
    pub series_order: usize,
    pub tail_bound: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    /// `| e - |(Phi(omega))_mu| |`
    pub e_vs_phi_omega: String,
    pub e_vs_phi_omega_consistent: bool,
    /// `| e_k - |(Phi(A_{k-1}^inf))_mu| |`
    pub e_k_vs_phi: Vec<String>,
    pub e_k_vs_phi_consistent: bool,
}

impl DiscreteSpectrum {
    pub fn report(&self, digits: u32) -> SpectrumReport {
        let tail = self.mu.tail_bound(self.order + 1).unwrap_or_else(|| Float::with_val(64, f64::INFINITY));
        SpectrumReport {
            e: self.e.to_strings(digits),
            e_k: self.e_k.iter().map(|x| x.to_strings(digits)).collect(),
            mu: self
                .mu
                .mu
                .iter()
                .map(|m| decimal(&Float::with_val(self.mu.q.prec(), m), digits))
                .collect(),
            mu_case: self.mu.case,
            mu_monotone: self.mu.monotone,
            conditions: self.conditions.report(digits),
            applicable_theorems: self.applicable_theorems.clone(),
            ordered: self.ordered,
            cross_check: CrossCheck {
                e_vs_phi_omega: decimal(&gap(&self.e, &self.phi_omega), 6),
                e_vs_phi_omega_consistent: overlaps(&self.e, &self.phi_omega),
                e_k_vs_phi: self.e_k.iter().zip(&self.phi_ak).map(|(a, b)| decimal(&gap(a, b), 6)).collect(),
                e_k_vs_phi_consistent: self.e_k.iter().zip(&self.phi_ak).all(|(a, b)| overlaps(a, b)),
            },
            series_order: self.order,
            tail_bound: decimal(&tail, 6),
        }
    }

    pub fn to_csv(&self, digits: u32) -> String {
        let mut out = String::from("k,e_k_lo,e_k_hi\n");
        for (k, x) in self.e_k.iter().enumerate() {
            let [lo, hi] = x.to_strings(digits);
            out.push_str(&format!("{k},{lo},{hi}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Precision;
    use crate::poly::{power_to_f, IntPolynomial};
    use crate::rho::build_rho_table;
    use crate::roots::analyze;

    fn run(c: &[i64], k_max: u32) -> Result<DiscreteSpectrum> {
        let p = IntPolynomial::from_i64(c).unwrap();
        let spec = power_to_f(&p, 0, &Limits::default()).unwrap();
        let class = analyze(&p, Precision::DEFAULT).unwrap();
        let kernel = RhoKernel::new(&spec, &class).unwrap();
        let table = build_rho_table(&kernel, -100, 100).unwrap();
        discrete_spectrum(&kernel, &table, k_max, 200, &Limits::default())
    }

    #[test]
    fn quadratic_report() {
        let s = run(&[82, -20, 1], 6).unwrap();
        assert!(s.ordered);
        let r = s.report(30);
        assert!(r.cross_check.e_vs_phi_omega_consistent);
        assert!(r.cross_check.e_k_vs_phi_consistent);
        assert_eq!(r.e_k.len(), 7);
        assert!(s.to_csv(20).starts_with("k,e_k_lo,e_k_hi\n0,"));
    }

    #[test]
    fn linear_report() {
        let s = run(&[-2, 1], 3).unwrap();
        assert!(s.ordered);
        let third = Float::with_val(1024, 1) / 3u32;
        assert!(s.e_k[0].contains(&third));
    }

    #[test]
    fn refused_without_hypothesis() {
        assert!(matches!(run(&[5, -5, 1], 3), Err(Error::Hypothesis(_))));
        assert!(matches!(run(&[-2, 6, 2, 1], 3), Err(Error::NotExpansive)));
    }
}
