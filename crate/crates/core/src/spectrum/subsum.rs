//! Sufficient check that bounded integer combinations of a tail of `|rho|`
//! fill an interval around 0: `r_n <= 2A sum_{m>n} r_m` for every `n >= start`.

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cabs, decimal};
use crate::rho::{RhoKernel, RhoTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `r_n = |rho_{-n}|`
    Left,
    /// `r_n = |rho_n|`
    Right,
}

#[derive(Clone, Debug)]
pub struct SubsumCheck {
    pub holds: bool,
    pub first_violation: Option<u64>,
    /// Indices up to here were checked against the table.
    pub window_end: u64,
    /// From here on the dominant-root bound covers the criterion.
    pub tail_from: Option<u64>,
    /// `lim r_{n+1} / r_n`, when a single real root dominates.
    pub ratio_limit: Option<Float>,
    /// `a = 1 + floor(1/ratio)` and `A = floor(a/2)` from the ratio limit.
    pub lemma_a: Option<Integer>,
    pub lemma_coefficient: Option<Integer>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsumReport {
    pub holds: bool,
    pub first_violation: Option<u64>,
    pub window_end: u64,
    pub tail_from: Option<u64>,
    pub ratio_limit: Option<String>,
    pub lemma_a: Option<String>,
    pub lemma_coefficient: Option<String>,
}

impl SubsumCheck {
    pub fn report(&self, digits: u32) -> SubsumReport {
        SubsumReport {
            holds: self.holds,
            first_violation: self.first_violation,
            window_end: self.window_end,
            tail_from: self.tail_from,
            ratio_limit: self.ratio_limit.as_ref().map(|q| decimal(q, digits)),
            lemma_a: self.lemma_a.as_ref().map(|a| a.to_string()),
            lemma_coefficient: self.lemma_coefficient.as_ref().map(|a| a.to_string()),
        }
    }
}

/// Dominant root on one side: ratio `q = lim r_{n+1}/r_n` and the bound
/// `delta(n)` on the relative size of the other terms.
struct Dominant {
    q: Float,
    /// `(|c_j / c_1|, ratio_j)` with `ratio_j < 1`: `delta(n) = sum |c_j/c_1| ratio_j^n`
    others: Vec<(Float, Float)>,
}

impl Dominant {
    fn delta(&self, n: u64) -> Float {
        let bits = self.q.prec();
        let mut s = Float::new(bits);
        for (c, r) in &self.others {
            let p = Float::with_val(bits, r.pow(&Integer::from(n)));
            s += Float::with_val(bits, c * &p);
        }
        s
    }
}

fn dominant(kernel: &RhoKernel, side: Side) -> Option<Dominant> {
    let class = kernel.classification();
    if kernel.spec().k != 0 {
        return None;
    }
    let bits = kernel.bits();
    let idx: Vec<usize> = match side {
        Side::Left => (0..class.p).collect(),
        Side::Right => (class.p..class.degree()).collect(),
    };
    // left: smallest modulus dominates alpha^{-n}; right: largest modulus dominates alpha^n
    let key = |i: &usize| class.roots[*i].modulus.clone();
    let best = match side {
        Side::Left => idx.iter().copied().min_by(|a, b| key(a).partial_cmp(&key(b)).unwrap())?,
        Side::Right => idx.iter().copied().max_by(|a, b| key(a).partial_cmp(&key(b)).unwrap())?,
    };
    let root = &class.roots[best];
    let unique = match side {
        Side::Left => class.beta1_unique,
        Side::Right => class.beta2_unique,
    };
    if !unique || !root.is_real() {
        return None;
    }
    let c1 = cabs(&kernel.jets()[best].r_coeffs[0]);
    let q = match side {
        Side::Left => Float::with_val(bits, root.modulus.recip_ref()),
        Side::Right => root.modulus.clone(),
    };
    let mut others = Vec::new();
    for &j in &idx {
        if j == best {
            continue;
        }
        let cj = cabs(&kernel.jets()[j].r_coeffs[0]);
        let ratio = match side {
            Side::Left => Float::with_val(bits, &root.modulus / &class.roots[j].modulus),
            Side::Right => Float::with_val(bits, &class.roots[j].modulus / &root.modulus),
        };
        if ratio >= 1 {
            return None;
        }
        others.push((cj / &c1, ratio));
    }
    Some(Dominant { q, others })
}

pub fn subsum_interval_check(kernel: &RhoKernel, table: &RhoTable, a: u32, side: Side, start: u64) -> Result<SubsumCheck> {
    let bits = table.bits();
    let start = if side == Side::Right { start.max(1) } else { start };
    let end: u64 = match side {
        Side::Left => (-table.n_min) as u64,
        Side::Right => table.n_max.max(0) as u64,
    };
    if end < start + 2 {
        return Err(Error::InsufficientWindow("table does not reach past the start index".into()));
    }
    let index = |n: u64| -> i64 {
        match side {
            Side::Left => -(n as i64),
            Side::Right => n as i64,
        }
    };
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for n in start..=end {
        let v = Float::with_val(bits, table.get(index(n)).unwrap().abs_ref());
        let e = table.error(index(n)).unwrap().clone();
        let lo = Float::with_val(bits, &v - &e);
        lower.push(if lo < 0 { Float::new(bits) } else { lo });
        upper.push(v + e);
    }

    let dom = dominant(kernel, side);
    let (ratio_limit, lemma_a, lemma_coefficient) = match &dom {
        Some(d) => {
            let beta = Float::with_val(bits, d.q.recip_ref());
            let a_int = beta.floor().to_integer().unwrap() + 1u32;
            let big_a = Integer::from(&a_int / 2u32);
            (Some(d.q.clone()), Some(a_int), Some(big_a))
        }
        None => (None, None, None),
    };
    let base = SubsumCheck {
        holds: false,
        first_violation: None,
        window_end: end,
        tail_from: None,
        ratio_limit,
        lemma_a,
        lemma_coefficient,
    };

    if lower.iter().all(|x| x.is_zero()) && upper.iter().all(|x| x.is_zero()) {
        return Err(Error::Hypothesis("the sequence vanishes on this side".into()));
    }
    let two_a = Float::with_val(bits, 2 * a);
    // suffix sums of lower bounds inside the window
    let len = upper.len();
    let mut suffix = vec![Float::new(bits); len + 1];
    for i in (0..len).rev() {
        suffix[i] = Float::with_val(bits, &suffix[i + 1] + &lower[i]);
    }

    // indices where the dominant bound takes over
    let cut = match &dom {
        Some(d) => {
            let one = Float::with_val(bits, 1);
            let factor = Float::with_val(bits, &d.q / Float::with_val(bits, &one - &d.q)) * &two_a;
            let mut found = None;
            for n in start..=end {
                let delta = d.delta(n);
                if delta >= 1 {
                    continue;
                }
                let lhs = Float::with_val(bits, &one + &delta);
                let rhs = Float::with_val(bits, &factor * Float::with_val(bits, &one - &delta));
                if lhs <= rhs {
                    found = Some(n);
                    break;
                }
            }
            found
        }
        None => None,
    };

    let window_stop = cut.unwrap_or(end + 1);
    let beyond = tail_upper(table, side, end);
    for (i, n) in (start..window_stop).enumerate() {
        let rhs = Float::with_val(bits, &two_a * &suffix[i + 1]);
        if upper[i] <= rhs {
            continue;
        }
        let rhs_max = Float::with_val(bits, &two_a * Float::with_val(bits, suffix_upper(&upper, i + 1) + &beyond));
        if lower[i] > rhs_max {
            return Ok(SubsumCheck {
                first_violation: Some(n),
                ..base
            });
        }
        return Err(Error::InsufficientTail(format!(
            "criterion at n = {n} is not decided by the window"
        )));
    }
    match cut {
        Some(c) => Ok(SubsumCheck {
            holds: true,
            tail_from: Some(c),
            ..base
        }),
        None => Err(Error::InsufficientTail(
            "no single real dominant root on this side to cover indices beyond the window".into(),
        )),
    }
}

fn suffix_upper(upper: &[Float], from: usize) -> Float {
    let bits = upper[0].prec();
    upper[from..].iter().fold(Float::new(bits), |s, x| s + x)
}

fn tail_upper(table: &RhoTable, side: Side, end: u64) -> Float {
    let r = match side {
        Side::Left => table.sum_below(-(end as i64)),
        Side::Right => table.sum_above(end as i64),
    };
    r.unwrap_or_else(|_| Float::with_val(table.bits(), f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Precision;
    use crate::poly::{power_to_f, IntPolynomial, Limits};
    use crate::rho::build_rho_table;
    use crate::roots::analyze;

    fn kernel(c: &[i64]) -> (RhoKernel, RhoTable) {
        let p = IntPolynomial::from_i64(c).unwrap();
        let spec = power_to_f(&p, 0, &Limits::default()).unwrap();
        let class = analyze(&p, Precision::DEFAULT).unwrap();
        let k = RhoKernel::new(&spec, &class).unwrap();
        let t = build_rho_table(&k, -80, 80).unwrap();
        (k, t)
    }

    #[test]
    fn geometric_boundary() {
        let (k, t) = kernel(&[-2, 1]);
        let r = subsum_interval_check(&k, &t, 1, Side::Left, 0).unwrap();
        assert!(r.holds);
        assert_eq!(r.lemma_coefficient, Some(Integer::from(1)));
    }

    #[test]
    fn quadratic_with_remark_coefficient() {
        let (k, t) = kernel(&[82, -20, 1]);
        let r = subsum_interval_check(&k, &t, 3, Side::Left, 0).unwrap();
        assert!(r.holds);
        assert_eq!(r.lemma_coefficient, Some(Integer::from(3)));
        let r = subsum_interval_check(&k, &t, 1, Side::Left, 0).unwrap();
        assert!(!r.holds);
        assert_eq!(r.first_violation, Some(0));
    }

    #[test]
    fn zero_coefficient_never_holds() {
        let (k, t) = kernel(&[82, -20, 1]);
        let r = subsum_interval_check(&k, &t, 0, Side::Left, 5).unwrap();
        assert!(!r.holds);
        assert_eq!(r.first_violation, Some(5));
    }

    #[test]
    fn vanishing_side_is_refused() {
        let (k, t) = kernel(&[82, -20, 1]);
        assert!(subsum_interval_check(&k, &t, 3, Side::Right, 1).is_err());
    }

    #[test]
    fn cubic_right_side() {
        // single real contracting root 0.299..: ratio limit 0.299, 2A q/(1-q) with A = 2 is 1.7
        let (k, t) = kernel(&[-2, 6, 2, 1]);
        let r = subsum_interval_check(&k, &t, 2, Side::Right, 1).unwrap();
        assert_eq!(r.lemma_coefficient, Some(Integer::from(2)));
        assert!(r.holds);
        // left side is dominated by a complex pair
        assert!(subsum_interval_check(&k, &t, 3, Side::Left, 0).is_err() || !subsum_interval_check(&k, &t, 3, Side::Left, 0).unwrap().holds);
    }
}
