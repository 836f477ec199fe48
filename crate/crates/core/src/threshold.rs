//! Threshold equation solving.
//!
//! For a loss model with log discrepancy `A`, the threshold `T` is the unique
//! solution above `A` of `(T - A) loss(T) = loss_integral(T)`.  The value
//! `loss(T)` is then an upper bound for the anticanonical volume of every
//! K-semistable variety the model degenerates: in transform language,
//! `loss(T) = (F)^{-1}(A)` where `F(V) = (1/V) \int_0^{loss^{-1}(V)} (V - loss(x)) dx`
//! is strictly increasing in `V`.  Both routes are implemented independently
//! and cross-checked.

use num::{Signed, Zero};
use thiserror::Error;

use crate::blowup::LossModel;
use crate::exact::{
    isolate_increasing_root, rat, rat_pow, ratio, sqrt_rat, Enclosure, ExactError, PiecewisePoly,
    Poly, Rational,
};

/// Default bisection width `2^-40`.
pub fn default_width() -> Rational {
    rat_pow(&rat(2), -40)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("log discrepancy must be positive, got {0}")]
    NonPositiveDiscrepancy(String),
    #[error("residual never becomes positive within 2^20 * A for {0}")]
    NoSignChange(String),
    #[error("closed form available only for d = n or d = n-1 with ell in {{1,2}}")]
    UnsupportedClosedForm,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact-sign bisection on the residual.
    Bisection,
    /// Quadratic closed form, a shifted square root.
    ClosedFormSqrt,
    /// Depressed cubic in the shifted variable, root isolated by bisection.
    CubicBisection,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bisection => "bisection",
            Method::ClosedFormSqrt => "closed-form-sqrt",
            Method::CubicBisection => "cubic-bisection",
        }
    }
}

/// Solved threshold with the induced volume bound `loss(T)`.
#[derive(Clone, Debug)]
pub struct ThresholdResult {
    pub label: String,
    pub threshold: Enclosure,
    pub bound: Enclosure,
    pub method: Method,
    pub width: Rational,
}

/// Minimal stand-alone loss model given by closed forms, used for the
/// classical comparison functions.
#[derive(Clone, Debug)]
pub struct CustomModel {
    label: String,
    log_discrepancy: Rational,
    loss: PiecewisePoly,
    loss_integral: PiecewisePoly,
}

impl CustomModel {
    pub fn new(label: impl Into<String>, log_discrepancy: Rational, loss: PiecewisePoly) -> Self {
        CustomModel {
            label: label.into(),
            log_discrepancy,
            loss_integral: loss.antiderivative(),
            loss,
        }
    }

    /// Loss `x^n` with `A = n`: the extremal model of the general volume
    /// bound, with threshold `n + 1` and volume bound `(n+1)^n`.
    pub fn extremal(n: u32) -> Self {
        CustomModel::new(
            format!("extremal(n={})", n),
            rat(n as i64),
            PiecewisePoly::single(Poly::monomial(rat(1), n as usize)),
        )
    }

    /// Loss `2n x^{n-1}` with `A = n - 1`: the product-type degeneration,
    /// with threshold `n` and volume bound `2 n^n` on the nose.
    pub fn product(n: u32) -> Self {
        CustomModel::new(
            format!("product(n={})", n),
            rat(n as i64 - 1),
            PiecewisePoly::single(Poly::monomial(rat(2 * n as i64), n as usize - 1)),
        )
    }
}

impl LossModel for CustomModel {
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
        self.label.clone()
    }
}

/// Solve the threshold equation by exact-sign bisection.
///
/// Starts just above `A`, doubles the upper probe until the residual turns
/// positive, then bisects to the requested width.  An exact root hit
/// collapses the enclosure to a point.
pub fn solve<M: LossModel>(model: &M, width: &Rational) -> Result<ThresholdResult, ThresholdError> {
    let a = model.log_discrepancy().clone();
    if !a.is_positive() {
        return Err(ThresholdError::NonPositiveDiscrepancy(a.to_string()));
    }
    let residual = model.residual();
    let lo = &a + ratio(1, 1024);
    let at_lo = residual.eval(&lo);
    let threshold = if at_lo.is_zero() {
        Enclosure::point(lo)
    } else {
        // Find a sign change by doubling the offset above A.
        let cutoff = rat_pow(&rat(2), 20) * &a;
        let mut offset = rat(1);
        let hi = loop {
            let hi = &a + &offset;
            let val = residual.eval(&hi);
            if val.is_zero() {
                return finish(model, Enclosure::point(hi), width.clone());
            }
            if val.is_positive() {
                break hi;
            }
            if offset > cutoff {
                return Err(ThresholdError::NoSignChange(model.label()));
            }
            offset *= rat(2);
        };
        isolate_increasing_root(|x| residual.eval(x), &lo, &hi, width)?
    };
    finish(model, threshold, width.clone())
}

fn finish<M: LossModel>(
    model: &M,
    threshold: Enclosure,
    width: Rational,
) -> Result<ThresholdResult, ThresholdError> {
    // The loss is nondecreasing on the bracket, so its enclosure is the
    // image of the endpoints.
    let bound = Enclosure::new(
        model.loss().eval(threshold.lo()),
        model.loss().eval(threshold.hi()),
    );
    Ok(ThresholdResult {
        label: model.label(),
        threshold,
        bound,
        method: Method::Bisection,
        width,
    })
}

/// Closed-form thresholds for the two top-degree families.
///
/// * `d = n`: `T = (n - 2) + ell + sqrt(ell^2 + 2(n-2)/(n+1))`, i.e.
///   `(n-1) + sqrt(3(n-1)/(n+1))` for `ell = 1` and `n + sqrt(6n/(n+1))`
///   for `ell = 2`.
/// * `d = n - 1`: with `t = T - (n-1)`, the equation reduces to the cubic
///   `t^3 + 3t^2 = 12(n-1)^2/(n(n+1))` for `ell = 1` and
///   `t^3 - 12t = 6(n-1)(5n+1)/(n(n+1))` for `ell = 2`; the relevant root
///   (`t > 0` resp. `t > 2`) is isolated by exact bisection.
pub fn closed_form(n: u32, d: u32, ell: u32, bits: u32) -> Result<ThresholdResult, ThresholdError> {
    if !(ell == 1 || ell == 2) || n < 4 || (d != n && d != n - 1) {
        return Err(ThresholdError::UnsupportedClosedForm);
    }
    let nr = rat(n as i64);
    let width = rat_pow(&rat(2), -(bits.min(1 << 16) as i64));
    let (threshold, method) = if d == n {
        let disc = if ell == 1 {
            rat(3) * (&nr - rat(1)) / (&nr + rat(1))
        } else {
            rat(6) * &nr / (&nr + rat(1))
        };
        let shift = if ell == 1 { &nr - rat(1) } else { nr.clone() };
        let root = sqrt_rat(&disc, bits)?;
        (root.add_rat(&shift), Method::ClosedFormSqrt)
    } else {
        let cubic = if ell == 1 {
            // t^3 + 3 t^2 - q with q = 12 (n-1)^2 / (n (n+1)).
            let q = rat(12) * rat_pow(&(&nr - rat(1)), 2) / (&nr * (&nr + rat(1)));
            Poly::new(vec![-q, rat(0), rat(3), rat(1)])
        } else {
            // t^3 - 12 t - c with c = 6 (n-1)(5n+1) / (n (n+1)).
            let c = rat(6) * (&nr - rat(1)) * (rat(5) * &nr + rat(1)) / (&nr * (&nr + rat(1)));
            Poly::new(vec![-c, rat(-12), rat(0), rat(1)])
        };
        let (blo, bhi) = if ell == 1 { (rat(0), rat(4)) } else { (rat(2), rat(8)) };
        let root = isolate_increasing_root(|x| cubic.eval(x), &blo, &bhi, &width)?;
        (root.add_rat(&(&nr - rat(1))), Method::CubicBisection)
    };
    let model = crate::blowup::build_model(n, d, ell)
        .expect("closed-form parameters are always constructible");
    let bound = Enclosure::new(
        model.loss.eval(threshold.lo()),
        model.loss.eval(threshold.hi()),
    );
    Ok(ThresholdResult {
        label: model.label(),
        threshold,
        bound,
        method,
        width,
    })
}

/// Evaluate the volume transform `F(V) = (1/V) \int_0^{loss^{-1}(V)} (V - loss(x)) dx`
/// rigorously at a rational `V` in the image of the loss.
///
/// Exact piecewise integration gives `F(V) = t - loss_integral(t)/V` at
/// `t = loss^{-1}(V)`; `t` is enclosed by root isolation and the interval
/// image is pinched using the derivative bound `1 - loss(t1)/V` on the
/// rising side (the derivative vanishes at the root).
pub fn volume_transform<M: LossModel>(
    model: &M,
    v: &Rational,
    width: &Rational,
) -> Result<Enclosure, ThresholdError> {
    assert!(v.is_positive(), "transform argument must be positive");
    let loss = model.loss();
    // Bracket loss^{-1}(V) by doubling.
    let mut hi = rat(1);
    while &loss.eval(&hi) < v {
        hi *= rat(2);
    }
    let lo = rat(0);
    let t = isolate_increasing_root(|x| loss.eval(x) - v, &lo, &hi, width)?;
    let integral = model.loss_integral();
    let g = |t: &Rational| t - integral.eval(t) / v;
    let g1 = g(t.lo());
    let g2 = g(t.hi());
    if t.width().is_zero() {
        return Ok(Enclosure::point(g1));
    }
    let slope = (rat(1) - loss.eval(t.lo()) / v).max(rat(0));
    let lo_f = g1.clone().min(g2.clone());
    let hi_f = g1.max(g2) + t.width() * slope;
    Ok(Enclosure::new(lo_f, hi_f))
}

/// Invert the volume transform by monotone search: the unique `V` with
/// `F(V) = a`.  Independent of (and cross-checked against) the threshold
/// route, which computes the same value as `loss(T)`.
pub fn invert_volume_transform<M: LossModel>(
    model: &M,
    a: &Rational,
    width: &Rational,
) -> Result<Enclosure, ThresholdError> {
    assert!(a.is_positive(), "transform inversion needs a positive target");
    let probe_width = width / rat(1024);
    // F(loss(a)) = a - loss_integral(a)/loss(a) < a gives a lower start.
    let mut v_lo = model.loss().eval(a);
    assert!(
        v_lo.is_positive(),
        "loss must be positive at the target discrepancy"
    );
    let mut v_hi = &v_lo * rat(2);
    loop {
        let f = volume_transform(model, &v_hi, &probe_width)?;
        if f.strictly_above(a) {
            break;
        }
        v_hi *= rat(2);
    }
    while &v_hi - &v_lo > width * (rat(1).max(v_lo.clone())) {
        let mid = (&v_lo + &v_hi) / rat(2);
        let f = volume_transform(model, &mid, &probe_width)?;
        if f.width().is_zero() && f.lo() == a {
            return Ok(Enclosure::point(mid));
        }
        if f.strictly_below(a) {
            v_lo = mid;
        } else if f.strictly_above(a) {
            v_hi = mid;
        } else {
            // Undecided at this probe: the true value is within the probe's
            // blur of mid; return the bracket, still a sound enclosure.
            break;
        }
    }
    Ok(Enclosure::new(v_lo, v_hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::{build_model, build_singular_deg2};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn extremal_model_collapses_to_exact_threshold() {
        for n in 3..=10u32 {
            let r = solve(&CustomModel::extremal(n), &default_width()).unwrap();
            assert_eq!(r.threshold, Enclosure::point(rat(n as i64 + 1)), "n={}", n);
            assert_eq!(
                r.bound,
                Enclosure::point(rat_pow(&rat(n as i64 + 1), n as i64))
            );
        }
    }

    #[test]
    fn product_model_hits_two_n_to_the_n() {
        for n in 3..=10u32 {
            let r = solve(&CustomModel::product(n), &default_width()).unwrap();
            assert_eq!(r.threshold, Enclosure::point(rat(n as i64)));
            assert_eq!(r.bound, Enclosure::point(crate::blowup::volume_target(n)));
            // The degree-2 blowup model with ell = 1 is the same function.
            let m = build_model(n, 2, 1).unwrap();
            let rb = solve(&m, &default_width()).unwrap();
            assert_eq!(rb.threshold, r.threshold);
        }
    }

    #[test]
    fn quintic_example_contains_golden_value() {
        // n=5, d=5, ell=2: T = 5 + sqrt(5).
        let m = build_model(5, 5, 2).unwrap();
        let r = solve(&m, &default_width()).unwrap();
        let expect = sqrt_rat(&rat(5), 80).unwrap().add_rat(&rat(5));
        assert!(r.threshold.intersects(&expect));
        assert!(r.threshold.width() <= default_width());
        let cf = closed_form(5, 5, 2, 60).unwrap();
        assert!(cf.threshold.intersects(&expect));
        assert_eq!(cf.method, Method::ClosedFormSqrt);
    }

    #[test]
    fn closed_forms_agree_with_bisection() {
        for n in 4..=12u32 {
            for ell in [1u32, 2] {
                for d in [n, n - 1] {
                    let m = build_model(n, d, ell).unwrap();
                    let by_bisection = solve(&m, &default_width()).unwrap();
                    let by_formula = closed_form(n, d, ell, 48).unwrap();
                    assert!(
                        by_bisection.threshold.intersects(&by_formula.threshold),
                        "n={} d={} ell={}: {} vs {}",
                        n,
                        d,
                        ell,
                        by_bisection.threshold,
                        by_formula.threshold
                    );
                    assert!(by_bisection.bound.intersects(&by_formula.bound));
                }
            }
        }
    }

    #[test]
    fn cubic_family_example() {
        // n=4, d=3, ell=2: t^3 - 12t - 189/10 = 0, T near 7.0785.
        let cf = closed_form(4, 3, 2, 48).unwrap();
        assert_eq!(cf.method, Method::CubicBisection);
        assert!(cf.threshold.lo() > &ratio(7078, 1000));
        assert!(cf.threshold.hi() < &ratio(7079, 1000));
    }

    #[test]
    fn residual_sign_pattern_around_threshold() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(4..=9u32);
            let d = rng.gen_range(2..=n);
            let ell = rng.gen_range(1..=2u32);
            let m = build_model(n, d, ell).unwrap();
            let r = solve(&m, &default_width()).unwrap();
            let residual = m.residual();
            let a = &m.log_discrepancy;
            let span = r.threshold.lo() - a;
            for k in 1..=20i64 {
                let below = a + &span * ratio(k, 21);
                assert!(
                    !residual.eval(&below).is_positive(),
                    "residual should be <= 0 at {} for {}",
                    below,
                    m.label()
                );
                let above = r.threshold.hi() + ratio(k, 5);
                assert!(
                    residual.eval(&above).is_positive(),
                    "residual should be > 0 at {} for {}",
                    above,
                    m.label()
                );
            }
        }
    }

    #[test]
    fn saturating_family_has_flat_residual_past_threshold() {
        // For d = n + 1 the loss saturates at (n+1)^n from x = n+1 on, so
        // the residual vanishes identically there; the solver still pins the
        // threshold to the exact infimum n + 1.
        for n in 3..=8u32 {
            let m = build_model(n, n + 1, 1).unwrap();
            let r = solve(&m, &default_width()).unwrap();
            assert_eq!(r.threshold, Enclosure::point(rat(n as i64 + 1)));
            assert_eq!(
                r.bound,
                Enclosure::point(rat_pow(&rat(n as i64 + 1), n as i64))
            );
            let residual = m.residual();
            for k in 0..5i64 {
                assert!(residual.eval(&(rat(n as i64 + 1) + rat(k))).is_zero());
            }
        }
    }

    #[test]
    fn transform_inverse_agrees_with_threshold_route() {
        for (n, d, ell) in [(4u32, 3u32, 1u32), (5, 4, 2), (6, 6, 2), (7, 3, 2)] {
            let m = build_model(n, d, ell).unwrap();
            let r = solve(&m, &default_width()).unwrap();
            let v = invert_volume_transform(&m, &m.log_discrepancy, &rat_pow(&rat(2), -24))
                .unwrap();
            assert!(
                v.intersects(&r.bound),
                "n={} d={} ell={}: {} vs {}",
                n,
                d,
                ell,
                v,
                r.bound
            );
        }
    }

    #[test]
    fn transform_handoff_is_exact_on_product_model() {
        // F(n 2^n) for the product comparison: loss^{-1} = 2 exactly, value
        // 2 - 2/n = 2(n-1)/n, strictly below A = n-1 for n >= 3.
        for n in 3..=12u32 {
            let m = CustomModel::product(n);
            let v = rat(n as i64) * rat_pow(&rat(2), n as i64);
            let f = volume_transform(&m, &v, &default_width()).unwrap();
            let expect = rat(2) * rat(n as i64 - 1) / rat(n as i64);
            assert_eq!(f, Enclosure::point(expect.clone()));
            assert!(expect < rat(n as i64 - 1));
        }
    }

    #[test]
    fn comparison_principle_for_singular_model() {
        for n in 3..=8u32 {
            let singular = build_singular_deg2(n).unwrap();
            let r = solve(&singular, &default_width()).unwrap();
            let target = crate::blowup::volume_target(n);
            assert!(r.bound.strictly_below(&target), "n={}", n);
            // The smooth comparison attains the target exactly.
            let smooth = solve(&CustomModel::product(n), &default_width()).unwrap();
            assert_eq!(smooth.bound, Enclosure::point(target));
        }
    }

    #[test]
    fn singular_n3_values() {
        // Threshold solves 5T^3 - 15T^2 - 4 = 0 past the kink, T ~ 3.0843.
        let m = build_singular_deg2(3).unwrap();
        let r = solve(&m, &default_width()).unwrap();
        assert!(r.threshold.lo() > &ratio(3084, 1000));
        assert!(r.threshold.hi() < &ratio(3085, 1000));
        assert!(r.bound.lo() > &ratio(515, 10) && r.bound.hi() < &ratio(516, 10));
    }

    #[test]
    fn no_sign_change_is_reported() {
        // Constant loss c gives residual (x - A)c - cx = -Ac < 0 forever.
        let degenerate = CustomModel::new(
            "degenerate",
            rat(1),
            PiecewisePoly::single(Poly::constant(rat(1))),
        );
        let err = solve(&degenerate, &default_width());
        assert!(matches!(err, Err(ThresholdError::NoSignChange(_))));
    }

    #[test]
    fn rejects_nonpositive_discrepancy() {
        let m = CustomModel::new("bad", rat(0), PiecewisePoly::single(Poly::x()));
        assert!(matches!(
            solve(&m, &default_width()),
            Err(ThresholdError::NonPositiveDiscrepancy(_))
        ));
    }

    #[test]
    fn solve_respects_width_request() {
        let m = build_model(6, 4, 2).unwrap();
        for bits in [10i64, 20, 40, 60] {
            let w = rat_pow(&rat(2), -bits);
            let r = solve(&m, &w).unwrap();
            assert!(r.threshold.width() <= w);
        }
    }

    #[test]
    fn random_rational_grid_on_bound_enclosure() {
        // bound endpoints must straddle the true loss(T): loss is increasing,
        // so evaluating the residual at the bound preimages keeps signs.
        let m = build_model(8, 5, 2).unwrap();
        let r = solve(&m, &default_width()).unwrap();
        let residual = m.residual();
        assert!(!residual.eval(r.threshold.lo()).is_positive());
        assert!(!residual.eval(r.threshold.hi()).is_negative());
    }
}
