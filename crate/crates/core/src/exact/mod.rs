//! Exact rational arithmetic, polynomial algebra, rigorous transcendental
//! enclosures and monotone root isolation.
//!
//! Everything downstream reduces to this module: rationals are always in
//! lowest terms (guaranteed by the backing big-rational type), polynomials
//! carry exact coefficients, and transcendental values are only ever handled
//! as intervals with rational endpoints and proven tail bounds.

mod enclosure;
mod piecewise;
mod poly;
mod roots;

pub use enclosure::{
    exp_rat, log_enc, log_rat, pi, sqrt_enc, sqrt_rat, with_escalation, Enclosure, Precision,
};
pub use piecewise::{PiecewiseError, PiecewisePoly};
pub use poly::Poly;
pub use roots::isolate_increasing_root;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always normalized to lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("beta integral requires positive integer arguments")]
    BetaNonPositive,
    #[error("logarithm requires a positive argument")]
    LogNonPositive,
    #[error("square root requires a nonnegative argument")]
    SqrtNegative,
    #[error("no sign change on the bracket [{lo}, {hi}]")]
    BadBracket { lo: String, hi: String },
    #[error("undecided after escalating precision to {cap} bits")]
    PrecisionExhausted { cap: u32 },
}

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_of(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Integer power of a rational, supporting negative exponents.
pub fn rat_pow(base: &Rational, exp: i64) -> Rational {
    if exp == 0 {
        return Rational::one();
    }
    let e = exp.unsigned_abs() as u32;
    let n = num::pow::pow(base.numer().clone(), e as usize);
    let d = num::pow::pow(base.denom().clone(), e as usize);
    if exp > 0 {
        Rational::new(n, d)
    } else {
        Rational::new(d, n)
    }
}

pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

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

/// Euler beta integral at positive integers: `B(a, b) = (a-1)!(b-1)!/(a+b-1)!`,
/// the exact value of `\int_0^1 t^{a-1}(1-t)^{b-1} dt`.
pub fn beta_int(a: u64, b: u64) -> Result<Rational, ExactError> {
    if a == 0 || b == 0 {
        return Err(ExactError::BetaNonPositive);
    }
    Ok(Rational::new(
        factorial(a - 1) * factorial(b - 1),
        factorial(a + b - 1),
    ))
}

/// Largest integer `<= x`.
pub fn floor_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// True if `x` is an integer.
pub fn is_integer(x: &Rational) -> bool {
    x.denom().is_one()
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_examples() {
        assert_eq!(beta_int(2, 3).unwrap(), ratio(1, 12));
        assert_eq!(beta_int(5, 4).unwrap(), ratio(1, 280));
        assert_eq!(beta_int(1, 1).unwrap(), rat(1));
        assert_eq!(beta_int(0, 3), Err(ExactError::BetaNonPositive));
    }

    #[test]
    fn beta_against_polynomial_integration() {
        // Independent oracle: expand t^{a-1}(1-t)^{b-1} and integrate exactly.
        for a in 1..=12u64 {
            for b in 1..=12u64 {
                let mut p = Poly::monomial(rat(1), (a - 1) as usize);
                let one_minus_t = Poly::new(vec![rat(1), rat(-1)]);
                p = &p * &one_minus_t.pow(b as u32 - 1);
                assert_eq!(p.integrate(&rat(0), &rat(1)), beta_int(a, b).unwrap());
            }
        }
    }

    #[test]
    fn rational_powers() {
        assert_eq!(rat_pow(&ratio(2, 3), 3), ratio(8, 27));
        assert_eq!(rat_pow(&ratio(2, 3), -2), ratio(9, 4));
        assert_eq!(rat_pow(&rat(7), 0), rat(1));
    }

    #[test]
    fn binomial_table() {
        assert_eq!(binomial(7, 3), int(35));
        assert_eq!(binomial(7, 0), int(1));
        assert_eq!(binomial(3, 5), int(0));
        assert_eq!(factorial(6), int(720));
    }
}
