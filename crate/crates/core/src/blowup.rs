//! Volume-loss models attached to weighted blowups of projective space along
//! complete-intersection subvarieties.
//!
//! A model packages the dimension `n`, the degree `d` of the centre, the
//! blowup weight `ell`, the log discrepancy `A` of the induced divisorial
//! valuation, and two continuous piecewise polynomials `loss` and
//! `loss_integral` with `loss_integral' = loss`.  The defining property used
//! downstream: the anticanonical volume decays along the valuation at least
//! as fast as `V - loss(x)`, so the threshold equation built from `loss`
//! bounds the volume of any K-semistable degeneration in the family.
//!
//! Every model is constructed twice, from independent closed forms, and the
//! two representations are compared coefficient by coefficient; a mismatch
//! aborts construction.

use num::{Signed, Zero};
use thiserror::Error;

use crate::exact::{binomial, factorial, rat, rat_of, rat_pow, PiecewisePoly, Poly, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlowupError {
    #[error("dimension must be at least 3, got {0}")]
    BadDimension(u32),
    #[error("degree must satisfy 2 <= d <= n+1, got d={d} for n={n}")]
    BadDegree { n: u32, d: u32 },
    #[error("weight must be 1 or 2 for certified models, got {0}")]
    BadWeight(u32),
    #[error("representation cross-check failed for {0}")]
    RepresentationMismatch(String),
    #[error("monotonicity check failed for {0}")]
    NotIncreasing(String),
}

/// Common interface for anything the threshold solver can consume.
pub trait LossModel {
    /// Log discrepancy `A` of the valuation.
    fn log_discrepancy(&self) -> &Rational;
    /// Upper bound `loss(x)` for the anticanonical volume drop at time `x`.
    fn loss(&self) -> &PiecewisePoly;
    /// Antiderivative of `loss` vanishing at 0.
    fn loss_integral(&self) -> &PiecewisePoly;
    fn label(&self) -> String;

    /// Residual of the threshold equation: `(x - A) loss(x) - loss_integral(x)`.
    /// Strictly increasing past `A` wherever `loss` is, with the threshold as
    /// its unique root above `A`.
    fn residual(&self) -> PiecewisePoly {
        let factor = Poly::x_plus(-self.log_discrepancy().clone());
        self.loss().mul_poly(&factor).sub(self.loss_integral())
    }
}

/// Weighted blowup model for a degree-`d` complete-intersection centre of
/// codimension 2 inside projective `n`-space, blown up with weight `ell`.
#[derive(Clone, Debug)]
pub struct BlowupModel {
    pub n: u32,
    pub d: u32,
    pub ell: u32,
    pub log_discrepancy: Rational,
    pub loss: PiecewisePoly,
    pub loss_integral: PiecewisePoly,
    /// Volume value the certification compares against: `2 n^n`.
    pub target: Rational,
    /// Weights above 2 are outside the certified range and only allowed for
    /// exploration; certificates must never be built from such models.
    pub exploratory: bool,
}

impl LossModel for BlowupModel {
    fn log_discrepancy(&self) -> &Rational {
        &self.log_discrepancy
    }
    fn loss(&self) -> &PiecewisePoly {
        &self.loss
    }
    fn loss_integral(&self) -> &PiecewisePoly {
        &self.loss_integral
    }
    fn label(&self) -> String {
        format!("blowup(n={}, d={}, ell={})", self.n, self.d, self.ell)
    }
}

/// `2 n^n` as an exact rational.
pub fn volume_target(n: u32) -> Rational {
    rat(2) * rat_pow(&rat(n as i64), n as i64)
}

/// Build the certified model for `2 <= d <= n+1`, `ell in {1, 2}`.
pub fn build_model(n: u32, d: u32, ell: u32) -> Result<BlowupModel, BlowupError> {
    if !(ell == 1 || ell == 2) {
        return Err(BlowupError::BadWeight(ell));
    }
    build_model_inner(n, d, ell, false)
}

/// Same construction with weights `ell >= 3` admitted.  The resulting model
/// is flagged `exploratory` and rejected by the certificate layer.
pub fn build_model_exploratory(n: u32, d: u32, ell: u32) -> Result<BlowupModel, BlowupError> {
    if ell == 0 {
        return Err(BlowupError::BadWeight(ell));
    }
    build_model_inner(n, d, ell, ell > 2)
}

fn build_model_inner(n: u32, d: u32, ell: u32, exploratory: bool) -> Result<BlowupModel, BlowupError> {
    if n < 3 {
        return Err(BlowupError::BadDimension(n));
    }
    if d < 2 || d > n + 1 {
        return Err(BlowupError::BadDegree { n, d });
    }
    let log_discrepancy = rat((d as i64 - 2) + ell as i64 * (n as i64 - d as i64 + 1));
    let (loss, loss_integral) = if d == 2 {
        closed_forms_deg2(n, ell)
    } else {
        two_piece_forms(n, d, ell)?
    };
    verify_derivative(&loss, &loss_integral)?;
    verify_increasing(&loss, n, d)?;
    Ok(BlowupModel {
        n,
        d,
        ell,
        log_discrepancy,
        loss,
        loss_integral,
        target: volume_target(n),
        exploratory,
    })
}

/// Degree 2 centre: a single smooth piece on all of `[0, oo)`,
/// `loss = 2n ell^{1-n} x^{n-1}` with integral `2 ell^{1-n} x^n`.
fn closed_forms_deg2(n: u32, ell: u32) -> (PiecewisePoly, PiecewisePoly) {
    let scale = rat_pow(&rat(ell as i64), 1 - n as i64);
    let loss = Poly::monomial(rat(2 * n as i64) * &scale, n as usize - 1);
    let integral = Poly::monomial(rat(2) * scale, n as usize);
    (PiecewisePoly::single(loss), PiecewisePoly::single(integral))
}

/// Degrees `3 <= d <= n+1`: a monomial form on `[0, d]` glued to a binomial
/// expansion around `d` on `[d, oo)`, the latter cross-checked against an
/// independent beta-integral representation.
fn two_piece_forms(
    n: u32,
    d: u32,
    ell: u32,
) -> Result<(PiecewisePoly, PiecewisePoly), BlowupError> {
    let r = n + 1 - d; // codimension-type index of the binomial expansion
    let scale = rat_pow(&rat(ell as i64), -(r as i64));

    // Piece on [0, d]: x^{n-1} (dn - (d-2) x), integral x^n (d(n+1) - (d-2)x)/(n+1).
    let low = Poly::new(poly_coeffs(&[
        (n as usize - 1, rat((d * n) as i64)),
        (n as usize, rat(-((d - 2) as i64))),
    ]))
    .scale(&scale);
    let low_int = Poly::new(poly_coeffs(&[
        (n as usize, rat((d * (n + 1)) as i64) / rat((n + 1) as i64)),
        (n as usize + 1, rat(-((d - 2) as i64)) / rat((n + 1) as i64)),
    ]))
    .scale(&scale);

    // Piece on [d, oo): binomial expansion around x = d.
    let mut high = Poly::zero();
    for j in 0..=r {
        let c = rat_of(binomial(n as u64, j as u64))
            * rat((n + 2 - d - j) as i64)
            * rat_pow(&rat(d as i64), (n - j) as i64);
        high = &high + &Poly::monomial(c, j as usize);
    }
    let mut high_int = Poly::zero();
    for j in 0..=r + 1 {
        let c = rat_of(binomial(n as u64 + 1, j as u64))
            * rat((n + 3 - d - j) as i64)
            / rat((n + 1) as i64)
            * rat_pow(&rat(d as i64), (n + 1 - j) as i64);
        high_int = &high_int + &Poly::monomial(c, j as usize);
    }
    // Rebase from powers of (x - d) to the monomial basis.
    let dd = rat(d as i64);
    let high = high.shift(&-&dd).scale(&scale);
    let high_int = high_int.shift(&-&dd).scale(&scale);

    // Independent representation: beta-type integrals in the auxiliary
    // variable, expanded exactly.
    let int_loss = beta_integral_form(n, d, r).scale(&scale);
    let int_loss_integral = beta_integral_form_integral(n, d, r).scale(&scale);
    if high != int_loss {
        return Err(BlowupError::RepresentationMismatch(format!(
            "loss upper piece (n={}, d={}, ell={})",
            n, d, ell
        )));
    }
    if high_int != int_loss_integral {
        return Err(BlowupError::RepresentationMismatch(format!(
            "loss integral upper piece (n={}, d={}, ell={})",
            n, d, ell
        )));
    }
    // Spot identity: value at the gluing point is d^n (n - d + 2), scaled.
    let expect = &scale * rat_pow(&dd, n as i64) * rat((n + 2 - d) as i64);
    if high.eval(&dd) != expect {
        return Err(BlowupError::RepresentationMismatch(format!(
            "gluing value (n={}, d={})",
            n, d
        )));
    }

    let loss = PiecewisePoly::new(vec![(rat(0), low), (dd.clone(), high)])
        .map_err(|e| BlowupError::RepresentationMismatch(format!("loss continuity: {}", e)))?;
    let loss_integral = PiecewisePoly::new(vec![(rat(0), low_int), (dd, high_int)])
        .map_err(|e| {
            BlowupError::RepresentationMismatch(format!("loss integral continuity: {}", e))
        })?;
    Ok((loss, loss_integral))
}

fn poly_coeffs(terms: &[(usize, Rational)]) -> Vec<Rational> {
    let deg = terms.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let mut coeffs = vec![Rational::zero(); deg + 1];
    for (k, c) in terms {
        coeffs[*k] = c.clone();
    }
    coeffs
}

/// `n!/((d-3)! m!) * \int_0^d z^{d-3}(d-z)(x-z)^m dz` expanded as an exact
/// polynomial in `x`, for `m = r` (loss) or `m = r+1` (its integral).
fn beta_integral_poly(n: u32, d: u32, m: u32) -> Poly {
    let pref = Rational::new(factorial(n as u64), factorial(d as u64 - 3) * factorial(m as u64));
    let mut p = Poly::zero();
    for j in 0..=m {
        // \int_0^d z^{d-3+j}(d-z) dz = d^{d-1+j} / ((d-2+j)(d-1+j))
        let weight = rat_pow(&rat(d as i64), (d + j - 1) as i64)
            / (rat((d + j - 2) as i64) * rat((d + j - 1) as i64));
        let sign = if j % 2 == 0 { rat(1) } else { rat(-1) };
        let c = rat_of(binomial(m as u64, j as u64)) * sign * weight;
        p = &p + &Poly::monomial(c, (m - j) as usize);
    }
    p.scale(&pref)
}

fn beta_integral_form(n: u32, d: u32, r: u32) -> Poly {
    beta_integral_poly(n, d, r)
}

fn beta_integral_form_integral(n: u32, d: u32, r: u32) -> Poly {
    beta_integral_poly(n, d, r + 1)
}

fn verify_derivative(loss: &PiecewisePoly, integral: &PiecewisePoly) -> Result<(), BlowupError> {
    let derived = integral.derivative_pieces();
    let pieces = loss.pieces();
    if derived.len() != pieces.len() {
        return Err(BlowupError::RepresentationMismatch("piece count".into()));
    }
    for ((b1, p), (b2, q)) in derived.iter().zip(pieces) {
        if b1 != b2 || p != q {
            return Err(BlowupError::RepresentationMismatch(
                "loss_integral' != loss".into(),
            ));
        }
    }
    Ok(())
}

/// The loss must be strictly increasing on `[0, d]`, and on all of `[0, oo)`
/// when `d <= n` (for `d = n+1` it is constant past the gluing point).
fn verify_increasing(loss: &PiecewisePoly, n: u32, d: u32) -> Result<(), BlowupError> {
    for (i, (b, p)) in loss.pieces().iter().enumerate() {
        let dp = p.derivative();
        // For these models the derivative of each piece has no sign change on
        // the piece: check positivity of the derivative at the endpoints and
        // of all binomial-basis coefficients around the left endpoint.
        let shifted = dp.shift(b);
        let coeffs_nonneg = shifted.coeffs().iter().all(|c| !c.is_negative());
        if i + 1 == loss.pieces().len() {
            if d <= n && !(coeffs_nonneg && shifted.eval(&rat(1)).is_positive()) {
                return Err(BlowupError::NotIncreasing(format!("tail piece (n={n}, d={d})")));
            }
        } else {
            let right = &loss.pieces()[i + 1].0;
            let mid = (b + right) / rat(2);
            if !(dp.eval(&mid).is_positive() && !dp.eval(right).is_negative()) {
                return Err(BlowupError::NotIncreasing(format!("piece {i} (n={n}, d={d})")));
            }
        }
    }
    Ok(())
}

/// Singular degree-2 model: the centre acquires an ordinary double point and
/// the loss steepens past `x = 2`, splitting into
/// `2n x^{n-1}` on `[0, 2]` and `(2n-1) x^{n-1} + 2^{n-1}` on `[2, oo)`.
/// The smooth comparison function `2n x^{n-1}` is kept alongside.
#[derive(Clone, Debug)]
pub struct SingularDeg2Model {
    pub n: u32,
    pub log_discrepancy: Rational,
    pub loss: PiecewisePoly,
    pub loss_integral: PiecewisePoly,
    /// Smooth comparison loss dominating `loss`, sharing the same valuation.
    pub comparison: PiecewisePoly,
    pub comparison_integral: PiecewisePoly,
    pub target: Rational,
}

impl LossModel for SingularDeg2Model {
    fn log_discrepancy(&self) -> &Rational {
        &self.log_discrepancy
    }
    fn loss(&self) -> &PiecewisePoly {
        &self.loss
    }
    fn loss_integral(&self) -> &PiecewisePoly {
        &self.loss_integral
    }
    fn label(&self) -> String {
        format!("singular-deg2(n={})", self.n)
    }
}

pub fn build_singular_deg2(n: u32) -> Result<SingularDeg2Model, BlowupError> {
    if n < 3 {
        return Err(BlowupError::BadDimension(n));
    }
    let nn = n as usize;
    let low = Poly::monomial(rat(2 * n as i64), nn - 1);
    let high = &Poly::monomial(rat(2 * n as i64 - 1), nn - 1)
        + &Poly::constant(rat_pow(&rat(2), n as i64 - 1));
    let loss = PiecewisePoly::new(vec![(rat(0), low.clone()), (rat(2), high.clone())])
        .map_err(|e| BlowupError::RepresentationMismatch(format!("singular continuity: {}", e)))?;
    let comparison = PiecewisePoly::single(low);

    verify_singular_sections(n, &high)?;

    Ok(SingularDeg2Model {
        n,
        log_discrepancy: rat(n as i64 - 1),
        loss_integral: loss.antiderivative(),
        loss,
        comparison_integral: comparison.antiderivative(),
        comparison,
        target: volume_target(n),
    })
}

/// Check the exact section-count identities behind the singular model:
/// on `[0, 2]` the graded piece is `b_1 = 2n x^{n-1} - x^n`, and on `[2, oo)`
/// it is `b_1' = 2n x^{n-1} - x^n + (x-2)^n`; both equal their double-integral
/// forms `n(n-1) \int (2-z)(x-z)^{n-2} dz` over `[0, x]` resp. `[0, 2]`.
/// The loss pieces must dominate them.
fn verify_singular_sections(n: u32, high: &Poly) -> Result<(), BlowupError> {
    let nn = n as usize;
    let b1 = &Poly::monomial(rat(2 * n as i64), nn - 1) - &Poly::monomial(rat(1), nn);
    let b1_prime = &b1 + &Poly::x_plus(rat(-2)).pow(n);

    // Substituting w = x - z turns the inner integral into
    // \int_0^x (2 - x + w) w^{n-2} dw = (2 - x) x^{n-1}/(n-1) + x^n/n.
    let scale = rat((n * (n - 1)) as i64);
    let swing = &Poly::new(vec![rat(2), rat(-1)])
        * &Poly::monomial(rat(1) / rat(n as i64 - 1), nn - 1);
    let from_integral = (&swing + &Poly::monomial(rat(1) / rat(n as i64), nn)).scale(&scale);
    if from_integral != b1 {
        return Err(BlowupError::RepresentationMismatch(format!(
            "singular b1 (n={})",
            n
        )));
    }

    // \int_0^2 (2-z)(x-z)^{n-2} dz expanded exactly in x.
    let mut fixed = Poly::zero();
    for j in 0..=(nn - 2) {
        // coefficient of x^{n-2-j}: C(n-2, j) (-1)^j \int_0^2 (2-z) z^j dz
        //                        = C(n-2, j) (-1)^j 2^{j+2}/((j+1)(j+2))
        let c = rat_of(binomial(n as u64 - 2, j as u64))
            * (if j % 2 == 0 { rat(1) } else { rat(-1) })
            * rat_pow(&rat(2), j as i64 + 2)
            / (rat(j as i64 + 1) * rat(j as i64 + 2));
        fixed = &fixed + &Poly::monomial(c, nn - 2 - j);
    }
    let fixed = fixed.scale(&scale);
    if fixed != b1_prime {
        return Err(BlowupError::RepresentationMismatch(format!(
            "singular b1' (n={})",
            n
        )));
    }

    // Domination of the section count by the loss piece past 2: the
    // difference has value 2^n at x = 2 and nonnegative coefficients once
    // rebased there, hence stays positive.
    let diff = (high - &b1_prime).shift(&rat(2));
    if diff.eval(&rat(0)) != rat_pow(&rat(2), n as i64)
        || diff.coeffs().iter().any(|c| c.is_negative())
    {
        return Err(BlowupError::RepresentationMismatch(format!(
            "singular domination (n={})",
            n
        )));
    }
    Ok(())
}

/// Elementary curve-count bound for a degree-`d_z` centre of codimension `r`:
/// `delta^{-r} (r+1)^r C(n, r) d_z`.
pub fn trivial_normal_bound(n: u32, r: u32, d_z: &Rational, delta: &Rational) -> Rational {
    assert!(r >= 1 && r <= n, "codimension out of range");
    assert!(delta.is_positive(), "delta must be positive");
    rat_pow(delta, -(r as i64))
        * rat_pow(&rat(r as i64 + 1), r as i64)
        * rat_of(binomial(n as u64, r as u64))
        * d_z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn deg2_closed_forms() {
        let m = build_model(5, 2, 1).unwrap();
        assert_eq!(m.loss.pieces().len(), 1);
        assert_eq!(m.loss.pieces()[0].1, Poly::monomial(rat(10), 4));
        assert_eq!(m.log_discrepancy, rat(4));
        let m2 = build_model(5, 2, 2).unwrap();
        assert_eq!(m2.loss.pieces()[0].1, Poly::monomial(ratio(10, 16), 4));
        assert_eq!(m2.log_discrepancy, rat(8));
    }

    #[test]
    fn representative_model_values() {
        // n=7, d=7, ell=2: lower piece is x^6 (49 - 5x)/2.
        let m = build_model(7, 7, 2).unwrap();
        let p = &m.loss.pieces()[0].1;
        assert_eq!(p.coeff(6), ratio(49, 2));
        assert_eq!(p.coeff(7), ratio(-5, 2));
        // Value at the gluing point: 7^7 * 2 / 2.
        assert_eq!(m.loss.eval(&rat(7)), rat_pow(&rat(7), 7));
        assert_eq!(m.log_discrepancy, rat(7));
    }

    #[test]
    fn top_degree_piece_is_constant() {
        for n in 3..=9u32 {
            let m = build_model(n, n + 1, 1).unwrap();
            let tail = &m.loss.pieces()[1].1;
            assert_eq!(tail.degree(), Some(0));
            assert_eq!(tail.coeff(0), rat_pow(&rat(n as i64 + 1), n as i64));
            assert_eq!(m.log_discrepancy, rat(n as i64 - 1));
        }
    }

    #[test]
    fn degree_n_tail_is_the_affine_form() {
        // d = n: tail piece must equal n^n (x + 2 - n) / ell.
        for n in 3..=10u32 {
            for ell in [1u32, 2] {
                let m = build_model(n, n, ell).unwrap();
                let expect = Poly::x_plus(rat(2 - n as i64))
                    .scale(&(rat_pow(&rat(n as i64), n as i64) / rat(ell as i64)));
                assert_eq!(m.loss.pieces()[1].1, expect);
            }
        }
    }

    #[test]
    fn both_representations_agree_across_range() {
        // The constructor cross-checks binomial vs integral forms; exercise it.
        for n in 3..=12u32 {
            for d in 3..=n + 1 {
                for ell in [1u32, 2] {
                    build_model(n, d, ell).unwrap();
                }
            }
        }
    }

    #[test]
    fn residual_shape() {
        let m = build_model(6, 4, 2).unwrap();
        let psi = m.residual();
        let a = &m.log_discrepancy;
        // Residual at A is -loss_integral(A) < 0.
        assert_eq!(psi.eval(a), -m.loss_integral.eval(a));
        assert!(psi.eval(a).is_negative());
        // Piecewise derivative identity: residual' = (x - A) loss'.
        let dpsi = psi.derivative_pieces();
        for (i, (b, p)) in m.loss.pieces().iter().enumerate() {
            let expect = &p.derivative() * &Poly::x_plus(-a.clone());
            assert_eq!(dpsi[i].1, expect, "piece {} at {}", i, b);
        }
    }

    #[test]
    fn exploratory_weights_are_flagged() {
        assert!(build_model(6, 4, 3).is_err());
        let m = build_model_exploratory(6, 4, 3).unwrap();
        assert!(m.exploratory);
        assert!(!build_model_exploratory(6, 4, 2).unwrap().exploratory);
        assert!(build_model_exploratory(6, 4, 0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(build_model(2, 2, 1), Err(BlowupError::BadDimension(2))));
        assert!(matches!(build_model(5, 7, 1), Err(BlowupError::BadDegree { .. })));
        assert!(matches!(build_model(5, 1, 1), Err(BlowupError::BadDegree { .. })));
    }

    #[test]
    fn singular_model_checks_out() {
        for n in 3..=12u32 {
            let m = build_singular_deg2(n).unwrap();
            assert_eq!(m.log_discrepancy, rat(n as i64 - 1));
            // Continuity at 2 and domination by the smooth comparison.
            let two = rat(2);
            assert_eq!(m.loss.eval(&two), m.comparison.eval(&two));
            for x in [ratio(5, 2), rat(3), rat(7)] {
                assert!(m.loss.eval(&x) < m.comparison.eval(&x), "x={} n={}", x, n);
            }
            for x in [rat(0), rat(1), two] {
                assert_eq!(m.loss.eval(&x), m.comparison.eval(&x));
            }
        }
    }

    #[test]
    fn singular_deg2_example_values() {
        let m = build_singular_deg2(3).unwrap();
        assert_eq!(m.loss.eval(&rat(2)), rat(24));
        assert_eq!(m.loss.pieces()[1].1, Poly::new(vec![rat(4), rat(0), rat(5)]));
        assert_eq!(m.loss_integral.eval(&rat(2)), rat(16));
    }

    #[test]
    fn normal_bound_values() {
        assert_eq!(trivial_normal_bound(3, 1, &rat(9), &rat(1)), rat(54));
        assert_eq!(trivial_normal_bound(4, 2, &rat(1), &rat(1)), rat(54));
        assert_eq!(
            trivial_normal_bound(3, 1, &rat(2), &ratio(1, 2)),
            rat(24)
        );
    }
}
