//! Periodic symbol words whose reconstructed limsup approaches 1/2.

use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intertwine::{encode, XiElement};
use crate::numeric::{decimal, dist_to_integer, Enclosure};
use crate::rho::RhoKernel;

/// `max_n ||sum_m rho_{n-m} s_m||` for the bi-infinite periodic word with the
/// given period, and the position attaining it.
pub fn periodic_limsup(kernel: &RhoKernel, period: &[Integer]) -> Result<(Enclosure, usize)> {
    let len = period.len();
    if len == 0 {
        return Err(Error::InvalidSequence("empty period".into()));
    }
    let bits = kernel.bits();
    let l = len as i64;
    // sum over all n = r mod L depends only on r mod L
    let classes = (0..l)
        .map(|r| kernel.congruent_sum_all(r, l))
        .collect::<Result<Vec<_>>>()?;
    let weight = period.iter().fold(Integer::new(), |acc, w| acc + w.clone().abs());
    let rad = Float::with_val(bits, &weight) * kernel.precision().slack() * 1000u32;
    let mut best = Float::new(bits);
    let mut arg = 0;
    for n in 0..len {
        let mut v = Float::new(bits);
        for (pos, w) in period.iter().enumerate() {
            if !w.is_zero() {
                let r = (n as i64 - pos as i64).rem_euclid(l) as usize;
                v += Float::with_val(bits, &classes[r] * w);
            }
        }
        let d = dist_to_integer(&v);
        if d > best {
            best = d;
            arg = n;
        }
    }
    let lo = Float::with_val(bits, &best - &rad).max(&Float::new(bits));
    let hi = Float::with_val(bits, &best + &rad).min(&Float::with_val(bits, 0.5));
    Ok((Enclosure::new(lo, hi), arg))
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub value: Enclosure,
    /// Position in the period where the maximum is attained.
    pub argmax: usize,
    /// `t_{-R} .. t_R 0^a 1 0^b`
    pub period: Vec<Integer>,
    pub r: u32,
    pub a: u32,
    pub b: u32,
    pub below_half: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationReport {
    pub value: [String; 2],
    pub argmax: usize,
    pub period: Vec<String>,
    pub r: u32,
    pub a: u32,
    pub b: u32,
    pub below_half: bool,
    pub gap_to_half: String,
}

impl Realization {
    pub fn report(&self, digits: u32) -> RealizationReport {
        let half = Float::with_val(self.value.hi().prec(), 0.5);
        RealizationReport {
            value: self.value.to_strings(digits),
            argmax: self.argmax,
            period: self.period.iter().map(|v| v.to_string()).collect(),
            r: self.r,
            a: self.a,
            b: self.b,
            below_half: self.below_half,
            gap_to_half: decimal(&Float::with_val(half.prec(), &half - self.value.hi()), digits),
        }
    }
}

/// Builds `s = 0^inf (t_{-R} .. t_R 0^a 1 0^b)^inf` from the symbols `t` of the
/// orbit with `x_0 = -1/2` and returns its limsup value.
pub fn realize_near_half(kernel: &RhoKernel, r: u32, a: u32, b: u32) -> Result<Realization> {
    let class = kernel.classification();
    let g0 = XiElement::half_witness(class)?;
    let enc = encode(kernel.spec(), class, &g0, r as i64)?;
    let r_i = r as i64;
    let mut period: Vec<Integer> = (-r_i..=r_i)
        .map(|n| enc.sequence.get(n).expect("inside the encoded window"))
        .collect();
    period.extend(std::iter::repeat_n(Integer::new(), a as usize));
    period.push(Integer::from(1));
    period.extend(std::iter::repeat_n(Integer::new(), b as usize));
    let (value, argmax) = periodic_limsup(kernel, &period)?;
    let below_half = *value.hi() < 0.5;
    Ok(Realization {
        value,
        argmax,
        period,
        r,
        a,
        b,
        below_half,
    })
}
