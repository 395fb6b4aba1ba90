//! Working-precision bookkeeping, enclosures and decimal output.
//!
//! All floating-point work runs on MPFR/MPC values. A [`Precision`] is a
//! number of decimal digits the caller wants to trust; the working bit count
//! adds [`GUARD_BITS`] on top so that accumulated rounding stays below the
//! advertised slack.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::{AddAssignRound, SubAssignRound};
use rug::{Complex, Float, Integer};
use serde::Serialize;

pub const GUARD_BITS: u32 = 64;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Decimal digits of trusted precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(60);
    pub const MIN: u32 = 30;

    pub fn digits(digits: u32) -> Self {
        Precision(digits.max(1))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn bits(self) -> u32 {
        (self.0 as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    pub fn boosted(self, extra_digits: u32) -> Self {
        Precision(self.0 + extra_digits)
    }

    pub fn max(self, other: Precision) -> Self {
        Precision(self.0.max(other.0))
    }

    /// `10^(-digits/2)`: the threshold below which a discrepancy is treated as
    /// numerically negligible.
    pub fn tolerance(self) -> Float {
        pow10(-(self.0 as i64 + 1) / 2, self.bits())
    }

    /// `10^(-digits)`: per-value error allowance used when turning computed
    /// values into enclosures.
    pub fn slack(self) -> Float {
        pow10(-(self.0 as i64), self.bits())
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits", self.0)
    }
}

pub fn pow10(exp: i64, bits: u32) -> Float {
    let ten = Float::with_val(bits, 10);
    if exp >= 0 {
        Float::with_val(bits, ten.pow_ref(exp as i32))
    } else {
        let p = Float::with_val(bits, ten.pow_ref((-exp) as i32));
        Float::with_val(bits, 1) / p
    }
}

trait PowRef {
    fn pow_ref(&self, e: i32) -> Float;
}

impl PowRef for Float {
    fn pow_ref(&self, e: i32) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(e))
    }
}

/// Integer power of a complex number, negative exponents allowed.
pub fn cpow(z: &Complex, n: i64) -> Complex {
    use rug::ops::Pow;
    let prec = z.prec();
    if let Ok(e) = i32::try_from(n) {
        Complex::with_val(prec, z.pow(e))
    } else {
        let e = Integer::from(n);
        Complex::with_val(prec, z.pow(&e))
    }
}

/// Magnitude of a complex value as a real.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Nearest-integer split with `eps` in `[-1/2, 1/2)`.
pub fn round_half_down(x: &Float) -> (Integer, Float) {
    let half = Float::with_val(x.prec(), 0.5);
    let shifted = Float::with_val(x.prec(), x + &half);
    let u = shifted
        .floor()
        .to_integer()
        .expect("finite value in nearest-integer split");
    let eps = Float::with_val(x.prec(), x - &u);
    (u, eps)
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: &Float) -> Float {
    let (_, eps) = round_half_down(x);
    eps.abs()
}

/// Distance from `x` to the nearest half-integer `Z + 1/2`.
pub fn dist_to_half_integer(x: &Float) -> Float {
    let half = Float::with_val(x.prec(), 0.5);
    let shifted = Float::with_val(x.prec(), x - &half);
    dist_to_integer(&shifted)
}

/// Decimal rendering with `digits` significant digits.
pub fn decimal(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_positive() { "inf".into() } else { "-inf".into() };
    }
    x.to_string_radix(10, Some(digits.max(2) as usize))
}

/// A closed real interval `[lo, hi]` with outward-rounded endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    lo: Float,
    hi: Float,
}

impl Enclosure {
    pub fn new(lo: Float, hi: Float) -> Self {
        debug_assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi }
    }

    /// `[mid - rad, mid + rad]`, rounding outward.
    pub fn from_mid_rad(mid: &Float, rad: &Float) -> Self {
        let prec = mid.prec().max(rad.prec());
        let mut lo = Float::with_val(prec, mid);
        lo.sub_assign_round(rad, Round::Down);
        let mut hi = Float::with_val(prec, mid);
        hi.add_assign_round(rad, Round::Up);
        Enclosure { lo, hi }
    }

    pub fn point(x: &Float) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x.clone(),
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn mid(&self) -> Float {
        let prec = self.lo.prec().max(self.hi.prec());
        Float::with_val(prec, &self.lo + &self.hi) / 2u32
    }

    pub fn width(&self) -> Float {
        let prec = self.lo.prec().max(self.hi.prec());
        let mut w = Float::with_val(prec, &self.hi);
        w.sub_assign_round(&self.lo, Round::Up);
        w
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Strictly below `other` with no overlap.
    pub fn strictly_below(&self, other: &Enclosure) -> bool {
        self.hi < other.lo
    }

    pub fn disjoint(&self, other: &Enclosure) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    /// Tri-state comparison against a threshold: `Some(Less)` when the whole
    /// enclosure lies below `x`, `Some(Greater)` when it lies at or above,
    /// `None` when `x` is inside.
    pub fn compare(&self, x: &Float) -> Option<Ordering> {
        if &self.hi < x {
            Some(Ordering::Less)
        } else if &self.lo >= x {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn scale(&self, factor: &Float) -> Enclosure {
        let prec = self.lo.prec().max(factor.prec());
        let a = Float::with_val(prec, &self.lo * factor);
        let b = Float::with_val(prec, &self.hi * factor);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let eps = Float::with_val(prec, lo.abs_ref()).max(&Float::with_val(prec, hi.abs_ref()))
            >> (prec as i32 - 4);
        Enclosure::from_bounds_padded(lo, hi, &eps)
    }

    fn from_bounds_padded(mut lo: Float, mut hi: Float, pad: &Float) -> Enclosure {
        lo.sub_assign_round(pad, Round::Down);
        hi.add_assign_round(pad, Round::Up);
        Enclosure { lo, hi }
    }

    pub fn abs(&self) -> Enclosure {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            Enclosure {
                lo: Float::with_val(self.hi.prec(), -&self.hi),
                hi: Float::with_val(self.lo.prec(), -&self.lo),
            }
        } else {
            let lo_abs = Float::with_val(self.lo.prec(), -&self.lo);
            let hi = if lo_abs > self.hi { lo_abs } else { self.hi.clone() };
            Enclosure {
                lo: Float::new(self.lo.prec()),
                hi,
            }
        }
    }

    pub fn to_strings(&self, digits: u32) -> [String; 2] {
        [decimal(&self.lo, digits), decimal(&self.hi, digits)]
    }
}

/// Outcome of a certified condition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
    NotApplicable,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Undecided => "undecided",
            Verdict::NotApplicable => "not_applicable",
        };
        f.write_str(s)
    }
}

/// Upper bound for `sum_{m >= start} (1+m)^k q^m` with `0 < q < 1`, or `None`
/// when the term ratio at `start` is not below one.
pub fn poly_geometric_tail(k: u32, q: &Float, start: u64) -> Option<Float> {
    let prec = q.prec();
    let m = Float::with_val(prec, start);
    let growth = Float::with_val(prec, &m + 2u32) / Float::with_val(prec, &m + 1u32);
    let ratio = Float::with_val(prec, growth.pow_ref(k as i32)) * q;
    if ratio >= 1 {
        return None;
    }
    let first = Float::with_val(prec, Float::with_val(prec, &m + 1u32).pow_ref(k as i32))
        * Float::with_val(prec, q.pow_ref(start.min(i32::MAX as u64) as i32));
    let one_minus = Float::with_val(prec, 1u32) - ratio;
    let mut bound = first / one_minus;
    // outward nudge for the divisions above
    let nudge = Float::with_val(prec, &bound >> (prec as i32 - 8));
    bound += nudge;
    Some(bound)
}
