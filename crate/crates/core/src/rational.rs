//! Exact scalar arithmetic.
//!
//! Every polynomial and coefficient computation in this crate runs over
//! arbitrary-precision rationals; floating point appears only at LMI assembly.
//! [`Rational`] is `num_rational::BigRational`, which keeps the invariants we
//! rely on (positive denominator, fully reduced after every operation).

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `numer / denom` as a rational. Panics on zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Binomial coefficient `C(n, k)` for integer `n >= 0`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Round-trip a rational into an `f64`.
///
/// `num_rational` handles magnitudes beyond the `f64` integer range; values in
/// this crate stay far inside it, so the conversion never legitimately fails.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 5), BigInt::from(1));
        assert_eq!(binomial(3, 4), BigInt::from(0));
        assert_eq!(binomial(171, 2), BigInt::from(14535));
    }

    #[test]
    fn factorial_small_values() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(1), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
    }

    proptest! {
        // Arithmetic keeps rationals normalized: positive denominator and
        // gcd(numer, denom) = 1.
        #[test]
        fn arithmetic_stays_reduced(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let x = ratio(a, b);
            let y = ratio(c, d);
            for v in [&x + &y, &x - &y, &x * &y] {
                prop_assert!(v.denom() > &BigInt::zero());
                let g = num_integer::gcd(v.numer().clone(), v.denom().clone());
                prop_assert_eq!(g, BigInt::one());
            }
        }

        #[test]
        fn to_f64_matches_direct_division(a in -1000i64..1000, b in 1i64..1000) {
            let r = ratio(a, b);
            prop_assert_eq!(to_f64(&r), a as f64 / b as f64);
        }
    }
}
