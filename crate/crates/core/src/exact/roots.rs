use num::{Signed, Zero};

use super::{rat, Enclosure, ExactError, Rational};

/// Isolate the unique root of a strictly increasing function by exact-sign
/// bisection.
///
/// `f` must be evaluable exactly (rational in, rational out) with
/// `f(lo) <= 0 <= f(hi)`; the returned enclosure has width at most `width`
/// and collapses to a point whenever bisection lands on an exact root.
pub fn isolate_increasing_root(
    f: impl Fn(&Rational) -> Rational,
    lo: &Rational,
    hi: &Rational,
    width: &Rational,
) -> Result<Enclosure, ExactError> {
    assert!(width.is_positive(), "root isolation needs a positive width");
    let flo = f(lo);
    if flo.is_zero() {
        return Ok(Enclosure::point(lo.clone()));
    }
    let fhi = f(hi);
    if fhi.is_zero() {
        return Ok(Enclosure::point(hi.clone()));
    }
    if flo.is_positive() || fhi.is_negative() || lo >= hi {
        return Err(ExactError::BadBracket {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / rat(2);
        let fm = f(&mid);
        if fm.is_zero() {
            return Ok(Enclosure::point(mid));
        } else if fm.is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Enclosure::new(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat_pow, ratio, Poly};

    #[test]
    fn isolates_sqrt_two() {
        let f = Poly::new(vec![rat(-2), rat(0), rat(1)]);
        let w = ratio(1, 1 << 20);
        let enc = isolate_increasing_root(|x| f.eval(x), &rat(0), &rat(2), &w).unwrap();
        assert!(enc.width() <= w);
        // Exact sandwich: lo^2 <= 2 <= hi^2.
        assert!(&(enc.lo() * enc.lo()) <= &rat(2));
        assert!(&(enc.hi() * enc.hi()) >= &rat(2));
    }

    #[test]
    fn collapses_on_exact_root() {
        let f = Poly::new(vec![rat(-8), rat(0), rat(0), rat(1)]);
        let enc = isolate_increasing_root(|x| f.eval(x), &rat(0), &rat(4), &ratio(1, 1024)).unwrap();
        assert_eq!(enc, Enclosure::point(rat(2)));
    }

    #[test]
    fn rejects_bad_brackets() {
        let f = |x: &Rational| x.clone();
        assert!(isolate_increasing_root(f, &rat(1), &rat(2), &ratio(1, 4)).is_err());
        assert!(isolate_increasing_root(f, &rat(-3), &rat(-2), &ratio(1, 4)).is_err());
    }

    #[test]
    fn tight_widths_are_reachable() {
        let f = Poly::new(vec![rat(-5), rat(0), rat(1)]);
        let w = rat_pow(&rat(2), -60);
        let enc = isolate_increasing_root(|x| f.eval(x), &rat(2), &rat(3), &w).unwrap();
        assert!(enc.width() <= w);
        assert!(&(enc.lo() * enc.lo()) < &rat(5) && &(enc.hi() * enc.hi()) > &rat(5));
    }
}
