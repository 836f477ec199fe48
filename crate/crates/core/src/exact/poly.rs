use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use super::{rat, Rational};

/// Univariate polynomial with exact rational coefficients.
///
/// Coefficients are stored by ascending degree with no trailing zeros; the
/// zero polynomial is the empty coefficient vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// `c * x^degree`
    pub fn monomial(c: Rational, degree: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Poly { coeffs }
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Poly::monomial(Rational::one(), 1)
    }

    /// `x + c` as a convenience for linear factors.
    pub fn x_plus(c: Rational) -> Self {
        Poly::new(vec![c, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * rat(k as i64))
            .collect();
        Poly::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / rat((k + 1) as i64));
        }
        Poly::new(coeffs)
    }

    /// Exact definite integral over `[a, b]`.
    pub fn integrate(&self, a: &Rational, b: &Rational) -> Rational {
        let f = self.antiderivative();
        f.eval(b) - f.eval(a)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|k| k * c).collect())
    }

    /// Composition with a linear polynomial: returns `p(a*x + b)`.
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> Poly {
        let linear = Poly::new(vec![b.clone(), a.clone()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &linear) + &Poly::constant(c.clone());
        }
        acc
    }

    /// `p(x + h)`, the Taylor shift used to rebase expansions around a point.
    pub fn shift(&self, h: &Rational) -> Poly {
        self.compose_linear(&Rational::one(), h)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Poly::new(coeffs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Poly::new(coeffs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{}", a)?,
                1 if a.is_one() => write!(f, "x")?,
                1 => write!(f, "{}*x", a)?,
                _ if a.is_one() => write!(f, "x^{}", k)?,
                _ => write!(f, "{}*x^{}", a, k)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use proptest::prelude::*;

    #[test]
    fn eval_and_calculus() {
        // p = 1 - 2x + 3x^2
        let p = Poly::new(vec![rat(1), rat(-2), rat(3)]);
        assert_eq!(p.eval(&rat(2)), rat(9));
        assert_eq!(p.derivative(), Poly::new(vec![rat(-2), rat(6)]));
        assert_eq!(
            p.antiderivative(),
            Poly::new(vec![rat(0), rat(1), rat(-1), rat(1)])
        );
        assert_eq!(p.integrate(&rat(0), &rat(1)), rat(1));
    }

    #[test]
    fn shift_rebases_expansions() {
        // (x - 2)^3 expanded around 0, then shifted back by 2, is x^3.
        let p = Poly::x_plus(rat(-2)).pow(3);
        assert_eq!(p.shift(&rat(2)), Poly::monomial(rat(1), 3));
        let q = Poly::new(vec![rat(5), ratio(1, 2)]);
        assert_eq!(q.compose_linear(&rat(-1), &rat(2)).eval(&rat(2)), q.eval(&rat(0)));
    }

    #[test]
    fn display_is_readable() {
        let p = Poly::new(vec![ratio(-1, 2), rat(0), rat(1)]);
        assert_eq!(format!("{}", p), "x^2 - 1/2");
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((-40i64..40, 1i64..12), 0..13)
            .prop_map(|cs| Poly::new(cs.into_iter().map(|(n, d)| ratio(n, d)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        // derivative(antiderivative(p)) == p, exactly.
        #[test]
        fn calculus_round_trip(p in arb_poly()) {
            prop_assert_eq!(p.antiderivative().derivative(), p.clone());
        }

        #[test]
        fn ring_laws_sampled(p in arb_poly(), q in arb_poly(), x in -20i64..20) {
            let x = rat(x);
            prop_assert_eq!((&p + &q).eval(&x), p.eval(&x) + q.eval(&x));
            prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
        }
    }
}
