use std::fmt;

use num::{One, Signed, Zero};

use super::{abs, int, rat, rat_pow, ratio, ExactError, Rational};

/// Closed interval `[lo, hi]` with exact rational endpoints, used to enclose
/// values that are not rational (exp, log, sqrt, pi and arithmetic over
/// them).  All operations are outward-exact: endpoints are computed in exact
/// arithmetic, so no rounding direction bookkeeping is needed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Enclosure {
    lo: Rational,
    hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "inverted enclosure [{}, {}]", lo, hi);
        Enclosure { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rat(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// The whole interval lies strictly below `x`.
    pub fn strictly_below(&self, x: &Rational) -> bool {
        self.hi < *x
    }

    /// The whole interval lies strictly above `x`.
    pub fn strictly_above(&self, x: &Rational) -> bool {
        self.lo > *x
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(-&self.hi, -&self.lo)
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Enclosure::new(lo, hi)
    }

    /// Multiplication by an exact rational.
    pub fn mul_rat(&self, c: &Rational) -> Enclosure {
        if c.is_negative() {
            Enclosure::new(&self.hi * c, &self.lo * c)
        } else {
            Enclosure::new(&self.lo * c, &self.hi * c)
        }
    }

    pub fn add_rat(&self, c: &Rational) -> Enclosure {
        Enclosure::new(&self.lo + c, &self.hi + c)
    }

    /// Reciprocal; requires the interval not to contain 0.
    pub fn recip(&self) -> Enclosure {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing 0"
        );
        Enclosure::new(rat(1) / &self.hi, rat(1) / &self.lo)
    }

    pub fn div(&self, other: &Enclosure) -> Enclosure {
        self.mul(&other.recip())
    }

    pub fn powi(&self, k: u32) -> Enclosure {
        let mut acc = Enclosure::point(rat(1));
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
        )
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Precision request for enclosure computations, in bits: target widths are
/// on the order of `2^-bits` relative to the magnitude of the result.
#[derive(Clone, Copy, Debug)]
pub struct Precision {
    pub start: u32,
    pub cap: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            start: 64,
            cap: 4096,
        }
    }
}

impl Precision {
    pub fn bits(bits: u32) -> Self {
        Precision {
            start: bits,
            cap: bits.max(4096),
        }
    }
}

/// Run a decision procedure at increasing precision until it returns a
/// value, doubling the bit count each round up to the cap.
pub fn with_escalation<T>(
    p: Precision,
    mut f: impl FnMut(u32) -> Option<T>,
) -> Result<T, ExactError> {
    let mut bits = p.start.max(8);
    loop {
        if let Some(v) = f(bits) {
            return Ok(v);
        }
        if bits >= p.cap {
            return Err(ExactError::PrecisionExhausted { cap: p.cap });
        }
        bits = (bits * 2).min(p.cap);
    }
}

fn two_pow(bits: u32) -> Rational {
    Rational::new(int(1), num::pow::pow(int(2), bits as usize))
}

/// Rigorous enclosure of `e^x` for rational `x`.
///
/// Argument reduction `e^x = (e^{x/2^k})^{2^k}` brings the exponent into
/// `[-1/2, 1/2]`; the reduced value is enclosed by a truncated Taylor series
/// with a geometric majorant for the tail, and the reduction is undone by
/// exact interval squaring.  The final width is at most
/// `2^-bits * max(1, e^x)` up to a small constant.
pub fn exp_rat(x: &Rational, bits: u32) -> Enclosure {
    if x.is_zero() {
        return Enclosure::point(rat(1));
    }
    let mut k: u32 = 0;
    let half = ratio(1, 2);
    let mut scaled = abs(x);
    while scaled > half {
        scaled /= rat(2);
        k += 1;
    }
    let m = x / rat_pow(&rat(2), k as i64);
    // Guard bits for the k squarings plus slack.
    let guard = bits + k + 8;
    let tol = two_pow(guard);

    let mut sum = Rational::one();
    let mut term = Rational::one();
    let mut i: u32 = 0;
    loop {
        i += 1;
        term = term * &m / rat(i as i64);
        sum += &term;
        // Tail after the i-th term is bounded by |t_{i+1}| / (1 - |m|/(i+2))
        // and |m| <= 1/2, so a factor of 2 is a safe majorant ratio bound.
        let next = abs(&term) * abs(&m) / rat((i + 1) as i64);
        let rem = &next * rat(2);
        if rem <= tol {
            let mut enc = Enclosure::new(&sum - &rem, &sum + &rem);
            for _ in 0..k {
                enc = enc.mul(&enc.clone());
            }
            debug_assert!(enc.lo.is_positive());
            return enc;
        }
    }
}

/// Enclosure of `atanh(u)` for |u| <= 1/3 via the odd Taylor series with a
/// geometric tail bound.
fn atanh_small(u: &Rational, tol: &Rational) -> Enclosure {
    if u.is_zero() {
        return Enclosure::point(rat(0));
    }
    let u2 = u * u;
    let mut sum = u.clone();
    let mut pow = u.clone();
    let mut i: u32 = 0;
    loop {
        i += 1;
        pow = &pow * &u2;
        sum += &pow / rat((2 * i + 1) as i64);
        // Tail: sum_{j>i} |u|^{2j+1}/(2j+1) <= |u|^{2i+3}/((2i+3)(1-u^2)),
        // and 1/(1-u^2) <= 9/8 for |u| <= 1/3.
        let rem = abs(&(&pow * &u2)) / rat((2 * i + 3) as i64) * ratio(9, 8);
        if &rem <= tol {
            return Enclosure::new(&sum - &rem, &sum + &rem);
        }
    }
}

/// Rigorous enclosure of `log x` for rational `x > 0`.
///
/// Reduces to `y in [3/4, 3/2)` by powers of two, then uses
/// `log y = 2 atanh((y-1)/(y+1))` together with an enclosure of `log 2`.
pub fn log_rat(x: &Rational, bits: u32) -> Result<Enclosure, ExactError> {
    if !x.is_positive() {
        return Err(ExactError::LogNonPositive);
    }
    let mut y = x.clone();
    let mut s: i64 = 0;
    let hi_cut = ratio(3, 2);
    let lo_cut = ratio(3, 4);
    while y >= hi_cut {
        y /= rat(2);
        s += 1;
    }
    while y < lo_cut {
        y *= rat(2);
        s -= 1;
    }
    let scale = rat(s.unsigned_abs().max(1) as i64);
    let tol = two_pow(bits + 4) / &scale;
    let u = (&y - rat(1)) / (&y + rat(1));
    let main = atanh_small(&u, &tol).mul_rat(&rat(2));
    if s == 0 {
        return Ok(main);
    }
    let log2 = atanh_small(&ratio(1, 3), &tol).mul_rat(&rat(2));
    Ok(main.add(&log2.mul_rat(&rat(s))))
}

/// Enclosure of `log` over a positive interval: the hull of the endpoint
/// logarithms (log is monotone).
pub fn log_enc(x: &Enclosure, bits: u32) -> Result<Enclosure, ExactError> {
    let lo = log_rat(x.lo(), bits)?;
    let hi = log_rat(x.hi(), bits)?;
    Ok(Enclosure::new(lo.lo().clone(), hi.hi().clone()))
}

/// Rigorous enclosure of `sqrt(x)` for rational `x >= 0` by exact bisection
/// on `t^2 = x`; collapses to a point when `x` is a perfect square.
pub fn sqrt_rat(x: &Rational, bits: u32) -> Result<Enclosure, ExactError> {
    if x.is_negative() {
        return Err(ExactError::SqrtNegative);
    }
    if x.is_zero() {
        return Ok(Enclosure::point(rat(0)));
    }
    {
        let rn = x.numer().sqrt();
        let rd = x.denom().sqrt();
        if &(&rn * &rn) == x.numer() && &(&rd * &rd) == x.denom() {
            return Ok(Enclosure::point(Rational::new(rn, rd)));
        }
    }
    // Scale into [1/2, 2) so the bisection bracket is short.
    let mut y = x.clone();
    let mut t: i64 = 0;
    let two = rat(2);
    let half = ratio(1, 2);
    while y >= two {
        y /= rat(4);
        t += 1;
    }
    while y < half {
        y *= rat(4);
        t -= 1;
    }
    let rescale = rat_pow(&rat(2), t);
    let tol = two_pow(bits + 1);
    let mut lo = ratio(1, 2);
    let mut hi = ratio(3, 2);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / rat(2);
        let sq = &mid * &mid;
        if sq == y {
            lo = mid.clone();
            hi = mid;
            break;
        } else if sq < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Enclosure::new(lo * &rescale, hi * &rescale))
}

/// Enclosure of `sqrt` over a nonnegative interval.
pub fn sqrt_enc(x: &Enclosure, bits: u32) -> Result<Enclosure, ExactError> {
    let lo = sqrt_rat(x.lo(), bits)?;
    let hi = sqrt_rat(x.hi(), bits)?;
    Ok(Enclosure::new(lo.lo().clone(), hi.hi().clone()))
}

/// Enclosure of `atan(1/q)` for integer `q >= 2` via the alternating series;
/// the remainder is bounded by the first omitted term.
fn atan_inv(q: i64, tol: &Rational) -> Enclosure {
    let u = ratio(1, q);
    let u2 = &u * &u;
    let mut sum = u.clone();
    let mut pow = u;
    let mut i: u32 = 0;
    loop {
        i += 1;
        pow = &pow * &u2;
        let term = &pow / rat((2 * i + 1) as i64);
        if i % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        let rem = abs(&(&pow * &u2)) / rat((2 * i + 3) as i64);
        if &rem <= tol {
            return Enclosure::new(&sum - &rem, &sum + &rem);
        }
    }
}

/// Rigorous enclosure of pi from Machin's formula
/// `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi(bits: u32) -> Enclosure {
    let tol = two_pow(bits + 8);
    let a = atan_inv(5, &tol).mul_rat(&rat(16));
    let b = atan_inv(239, &tol).mul_rat(&rat(4));
    a.sub(&b)
}
