//! Complete homogeneous symmetric polynomials `H_r^(m)`.

use rug::{Complex, Rational};

/// Minimal field interface so the same recurrences run on exact rationals
/// and on MPC complex values.
pub trait Field: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
}

impl Field for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn one_like(&self) -> Self {
        Rational::from(1)
    }
    fn add(&self, other: &Self) -> Self {
        Rational::from(self + other)
    }
    fn sub(&self, other: &Self) -> Self {
        Rational::from(self - other)
    }
    fn mul(&self, other: &Self) -> Self {
        Rational::from(self * other)
    }
    fn div(&self, other: &Self) -> Self {
        Rational::from(self / other)
    }
}

impl Field for Complex {
    fn zero_like(&self) -> Self {
        Complex::new(self.prec())
    }
    fn one_like(&self) -> Self {
        Complex::with_val(self.prec(), 1)
    }
    fn add(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self + other)
    }
    fn sub(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self - other)
    }
    fn mul(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self * other)
    }
    fn div(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self / other)
    }
}

/// `H^(0) .. H^(m_max)` in the variables `xs`, by the recurrence
/// `H_r^(m) = H_{r-1}^(m) + x_r H_r^(m-1)`.
pub fn hom_sym_all<T: Field>(m_max: usize, xs: &[T]) -> Vec<T> {
    let seed = &xs[0];
    let mut h = vec![seed.zero_like(); m_max + 1];
    h[0] = seed.one_like();
    for x in xs {
        for j in 1..=m_max {
            let t = x.mul(&h[j - 1]);
            h[j] = h[j].add(&t);
        }
    }
    h
}

/// `H_r^(m)(xs)` with `r = xs.len()`.
pub fn hom_sym<T: Field>(m: usize, xs: &[T]) -> T {
    hom_sym_all(m, xs).pop().unwrap()
}

/// The Lagrange form `sum_i x_i^m prod_{j != i} x_i / (x_i - x_j)`.
/// Requires pairwise distinct `xs`.
pub fn hom_sym_lagrange<T: Field>(m: usize, xs: &[T]) -> T {
    lagrange_combination(xs, |x| power(x, m))
}

/// `sum_i (prod_{j != i} x_i / (x_i - x_j)) F(x_i)`.
pub fn lagrange_combination<T: Field>(xs: &[T], mut value: impl FnMut(&T) -> T) -> T {
    let mut total = xs[0].zero_like();
    for (i, xi) in xs.iter().enumerate() {
        let mut w = xi.one_like();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                w = w.mul(&xi.div(&xi.sub(xj)));
            }
        }
        total = total.add(&w.mul(&value(xi)));
    }
    total
}

fn power<T: Field>(x: &T, m: usize) -> T {
    let mut acc = x.one_like();
    for _ in 0..m {
        acc = acc.mul(x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn small_values() {
        let xs = [q(1, 1), q(2, 1), q(3, 1)];
        assert_eq!(hom_sym(2, &xs), 25);
        assert_eq!(hom_sym(0, &xs), 1);
        assert_eq!(hom_sym(1, &[q(1, 3), q(2, 5)]), q(11, 15));
        assert_eq!(hom_sym_lagrange(2, &xs), 25);
        assert_eq!(hom_sym_lagrange(0, &xs), 1);
    }

    #[test]
    fn complex_agrees_with_rational() {
        let bits = 200;
        let xs = [Complex::with_val(bits, (0.5, 0.25)), Complex::with_val(bits, (0.5, -0.25)), Complex::with_val(bits, 0.125)];
        let h = hom_sym(5, &xs);
        let l = hom_sym_lagrange(5, &xs);
        let diff = Complex::with_val(bits, &h - &l);
        assert!(diff.abs().real().to_f64() < 1e-50);
        assert!(h.imag().to_f64().abs() < 1e-50);
    }
}
