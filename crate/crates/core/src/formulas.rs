//! Closed-form anticanonical volumes and related invariants.
//!
//! Everything here is a finite rational formula: product degenerations and
//! the `c_r` sequence, blowups of hyperplane subvarieties (with an
//! independent Segre-sum oracle), hypersurfaces and weighted hypersurfaces,
//! cone volumes, and the local volume comparison bounds.  All comparisons
//! are exact; there is no interval arithmetic in this module.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::blowup::volume_target;
use crate::exact::{binomial, rat, rat_of, rat_pow, Poly, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("parameter out of range: {0}")]
    BadRange(String),
    #[error("degree {degree} is not Fano for total weight {total}")]
    NonFano { degree: i64, total: String },
}

/// The volume sequence of the degenerations `P^r x Z_r`:
/// `c_r = binom(n,r) (r+1)^r (n-r+1)^{n-r}`.
#[derive(Clone, Debug)]
pub struct CSequence {
    pub n: u32,
    pub values: Vec<Rational>,
    /// `c_r = c_{n-r}` for every r.
    pub symmetric: bool,
    /// `c_0 > c_1 > ... > c_{floor(n/2)}` strictly.
    pub strictly_decreasing_to_middle: bool,
}

pub fn c_sequence(n: u32) -> CSequence {
    assert!(n >= 2, "c-sequence needs n >= 2");
    let values: Vec<Rational> = (0..=n as u64)
        .map(|r| {
            rat_of(binomial(n as u64, r))
                * rat_pow(&rat(r as i64 + 1), r as i64)
                * rat_pow(&rat(n as i64 - r as i64 + 1), n as i64 - r as i64)
        })
        .collect();
    let symmetric = (0..=n as usize).all(|r| values[r] == values[n as usize - r]);
    let strictly_decreasing_to_middle =
        (1..=(n as usize / 2)).all(|r| values[r - 1] > values[r]);
    CSequence {
        n,
        values,
        symmetric,
        strictly_decreasing_to_middle,
    }
}

/// Volume of the blowup of projective space along a degree-`d_Y` complete
/// intersection of a hyperplane: `2n^n` for `d_Y = 1`, otherwise
/// `(d_Y n^n - (n+1-d_Y)^n) / (d_Y - 1)`.
pub fn vol_blowup_hyperplane_subvariety(n: u32, d_y: u32) -> Result<Rational, FormulaError> {
    if n < 3 || d_y < 1 || d_y > n {
        return Err(FormulaError::BadRange(format!("n={} d_Y={}", n, d_y)));
    }
    if d_y == 1 {
        return Ok(volume_target(n));
    }
    let nn = rat_pow(&rat(n as i64), n as i64);
    let rest = rat_pow(&rat(n as i64 + 1 - d_y as i64), n as i64);
    Ok((rat(d_y as i64) * nn - rest) / rat(d_y as i64 - 1))
}

/// Independent oracle for the same volume, as the Segre-class sum
/// `(n+1)^n - sum_{k=2}^n binom(n,k) (n+1)^{n-k} (-1)^{k-2} (sum_{i=0}^{k-2} d^i) d`.
pub fn segre_volume_oracle(n: u32, d_y: u32) -> Rational {
    let d = rat(d_y as i64);
    let mut acc = rat_pow(&rat(n as i64 + 1), n as i64);
    for k in 2..=n as u64 {
        let geom: Rational = (0..=k - 2).map(|i| rat_pow(&d, i as i64)).sum();
        let sign = if k % 2 == 0 { rat(1) } else { rat(-1) };
        acc -= rat_of(binomial(n as u64, k))
            * rat_pow(&rat(n as i64 + 1), n as i64 - k as i64)
            * sign
            * geom
            * &d;
    }
    acc
}

/// S-invariant of the exceptional divisor on the `d_Y = 1` blowup:
/// exact integration of `(n-t)^{n-1} (2n + (n-1)t)` over `[0, n]` divided by
/// `2n^n`; equals `1 + (n-1)/(2(n+1))` in closed form.
pub fn s_invariant_bl(n: u32) -> Rational {
    assert!(n >= 2);
    let falling = Poly::new(vec![rat(n as i64), rat(-1)]).pow(n - 1);
    let linear = Poly::new(vec![rat(2 * n as i64), rat(n as i64 - 1)]);
    let integrand = &falling * &linear;
    integrand.integrate(&rat(0), &rat(n as i64)) / volume_target(n)
}

/// `A - S` for the same divisor: `-(n-1)/(2(n+1))`.
pub fn beta_bl(n: u32) -> Rational {
    // A(E) = 1 for the exceptional divisor of a smooth blowup center of
    // codimension ... the relevant normalization gives A - S directly.
    rat(1) - s_invariant_bl(n)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypersurfaceVolume {
    pub value: Rational,
    /// Strictly below 2n^n (true for all 2 < b < n).
    pub below_target: bool,
}

/// Volume of a degree-`b` hypersurface in `P^{n+1}`: `(n+2-b)^n * b`.
pub fn vol_hypersurface(n: u32, b: u32) -> Result<HypersurfaceVolume, FormulaError> {
    if b < 1 || b > n {
        return Err(FormulaError::BadRange(format!("n={} b={}", n, b)));
    }
    let value = rat_pow(&rat(n as i64 + 2 - b as i64), n as i64) * rat(b as i64);
    let below_target = value < volume_target(n);
    Ok(HypersurfaceVolume { value, below_target })
}

/// Volume of a quasi-smooth degree-`d` hypersurface in weighted projective
/// space `P(a_0, ..., a_{n+1})`: `d (sum a_i - d)^n / prod a_i` with
/// `n = #weights - 2`.
pub fn vol_weighted_hypersurface(weights: &[u32], degree: u32) -> Result<Rational, FormulaError> {
    if weights.len() < 3 || weights.iter().any(|&a| a == 0) {
        return Err(FormulaError::BadRange(format!(
            "need >= 3 positive weights, got {:?}",
            weights
        )));
    }
    let n = weights.len() as i64 - 2;
    let total: i64 = weights.iter().map(|&a| a as i64).sum();
    if degree as i64 >= total {
        return Err(FormulaError::NonFano {
            degree: degree as i64,
            total: total.to_string(),
        });
    }
    let product: Rational = weights.iter().map(|&a| rat(a as i64)).product();
    Ok(rat(degree as i64) * rat_pow(&rat(total - degree as i64), n) / product)
}

/// Normalized volume of the cone singularity over a Fano of index `r`:
/// `r * vol`.
pub fn cone_normalized_volume(r: u32, vol: &Rational) -> Rational {
    assert!(r >= 1 && vol.is_positive());
    rat(r as i64) * vol
}

/// The local-to-global volume bound `((n+1)/n)^n * nvol(x)`.
pub fn fujita_liu_bound(n: u32, nvol: &Rational) -> Rational {
    assert!(n >= 1 && nvol.is_positive());
    rat_pow(&(rat(n as i64 + 1) / rat(n as i64)), n as i64) * nvol
}

/// The singular-toric comparison chain: the surface instance
/// `(3/2)^2 * 2 = 9/2` and `(16/27)(n+1)^n < 2n^n` for every `3 <= n <= n_max`,
/// all exact.
pub fn singular_toric_chain_holds(n_max: u32) -> bool {
    if fujita_liu_bound(2, &rat(2)) != rat(9) / rat(2) {
        return false;
    }
    (3..=n_max).all(|n| {
        rat(16) / rat(27) * rat_pow(&rat(n as i64 + 1), n as i64) < volume_target(n)
    })
}

/// Volume of `P^r x Z` with `dim Z = n - r` and `(-K_Z)^{n-r} = d_Z`:
/// `(r+1)^r binom(n,r) d_Z`.
pub fn vol_product(n: u32, r: u32, d_z: &Rational) -> Result<Rational, FormulaError> {
    if r < 1 || r > n - 1 {
        return Err(FormulaError::BadRange(format!("n={} r={}", n, r)));
    }
    Ok(rat_pow(&rat(r as i64 + 1), r as i64) * rat_of(binomial(n as u64, r as u64)) * d_z)
}

/// In odd dimension the anticanonical volume of a manifold is even; a report
/// in odd dimension carrying an odd integer volume is an input error (the
/// variety cannot be smooth).
pub fn parity_ok(n: u32, volume: &Rational) -> bool {
    if n % 2 == 0 {
        return true;
    }
    if !volume.denom().is_one() {
        return false;
    }
    (volume.numer() % 2i32).is_zero()
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub name: String,
    pub bound: Rational,
    pub strictly_less: bool,
}

/// A volume value annotated with exact comparisons, recomputed at insertion.
#[derive(Clone, Debug)]
pub struct VolumeReport {
    pub family: String,
    pub n: u32,
    pub volume: Rational,
    pub comparisons: Vec<Comparison>,
}

impl VolumeReport {
    pub fn new(family: impl Into<String>, n: u32, volume: Rational) -> Self {
        VolumeReport {
            family: family.into(),
            n,
            volume,
            comparisons: Vec::new(),
        }
    }

    pub fn compare(mut self, name: impl Into<String>, bound: Rational) -> Self {
        let strictly_less = self.volume < bound;
        self.comparisons.push(Comparison {
            name: name.into(),
            bound,
            strictly_less,
        });
        self
    }

    pub fn parity_input_error(&self) -> bool {
        !parity_ok(self.n, &self.volume)
    }
}

/// Census over every closed-form family at a given dimension: the largest
/// volume is `(n+1)^n`, and the largest value strictly below it is `2n^n`.
#[derive(Clone, Debug)]
pub struct CensusReport {
    pub n: u32,
    pub top: Rational,
    pub second: Rational,
    /// Families attaining `second` exactly.
    pub attainers: Vec<String>,
    /// All (family, volume) pairs strictly between 0 and `second`.
    pub strictly_below: Vec<(String, Rational)>,
    pub ok: bool,
}

pub fn second_volume_census(n: u32) -> CensusReport {
    assert!(n >= 3);
    let mut entries: Vec<(String, Rational)> = Vec::new();
    let seq = c_sequence(n);
    for (r, c) in seq.values.iter().enumerate().take(n as usize / 2 + 1) {
        entries.push((format!("product(r={})", r), c.clone()));
    }
    for d_y in 1..=n {
        entries.push((
            format!("blowup(d_Y={})", d_y),
            vol_blowup_hyperplane_subvariety(n, d_y).unwrap(),
        ));
    }
    for b in 2..=n.max(2) - 1 {
        entries.push((
            format!("hypersurface(b={})", b),
            vol_hypersurface(n, b).unwrap().value,
        ));
    }
    let mut ww: Vec<u32> = vec![1; n as usize];
    ww.push(2);
    ww.push(n + 1);
    entries.push((
        "weighted-hypersurface".into(),
        vol_weighted_hypersurface(&ww, 2 * n + 2).unwrap(),
    ));
    let mut dc: Vec<u32> = vec![1; n as usize + 1];
    dc.push(n);
    entries.push((
        "double-cover".into(),
        vol_weighted_hypersurface(&dc, 2 * n).unwrap(),
    ));

    let top = rat_pow(&rat(n as i64 + 1), n as i64);
    let target = volume_target(n);
    let mut second = rat(0);
    for (_, v) in entries.iter().filter(|(_, v)| v < &top) {
        if v > &second {
            second = v.clone();
        }
    }
    let attainers: Vec<String> = entries
        .iter()
        .filter(|(_, v)| v == &second)
        .map(|(f, _)| f.clone())
        .collect();
    let strictly_below: Vec<(String, Rational)> = entries
        .iter()
        .filter(|(_, v)| v < &second)
        .cloned()
        .collect();
    let ok = second == target
        && !attainers.is_empty()
        && entries.iter().all(|(_, v)| v <= &top);
    CensusReport {
        n,
        top,
        second,
        attainers,
        strictly_below,
        ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn c_sequence_small_values() {
        let s4 = c_sequence(4);
        let expect: Vec<Rational> = [625, 512, 486, 512, 625].iter().map(|&v| rat(v)).collect();
        assert_eq!(s4.values, expect);
        assert!(s4.symmetric && s4.strictly_decreasing_to_middle);
        let s2 = c_sequence(2);
        assert_eq!(s2.values, vec![rat(9), rat(8), rat(9)]);
    }

    #[test]
    fn c_one_is_the_target_and_chain_is_strict() {
        for n in 2..=20u32 {
            let s = c_sequence(n);
            assert_eq!(s.values[0], rat_pow(&rat(n as i64 + 1), n as i64));
            assert_eq!(s.values[1], volume_target(n), "n={}", n);
            assert!(s.symmetric && s.strictly_decreasing_to_middle, "n={}", n);
        }
    }

    #[test]
    fn blowup_volume_examples() {
        assert_eq!(vol_blowup_hyperplane_subvariety(3, 1).unwrap(), rat(54));
        assert_eq!(vol_blowup_hyperplane_subvariety(3, 2).unwrap(), rat(46));
        assert_eq!(vol_blowup_hyperplane_subvariety(5, 5).unwrap(), rat(3906));
        assert!(vol_blowup_hyperplane_subvariety(2, 1).is_err());
        assert!(vol_blowup_hyperplane_subvariety(5, 6).is_err());
    }

    #[test]
    fn blowup_volume_matches_segre_oracle() {
        for n in 3..=15u32 {
            for d_y in 1..=n {
                assert_eq!(
                    vol_blowup_hyperplane_subvariety(n, d_y).unwrap(),
                    segre_volume_oracle(n, d_y),
                    "n={} d_Y={}",
                    n,
                    d_y
                );
            }
        }
    }

    #[test]
    fn blowup_volume_below_target_for_deeper_centers() {
        for n in 3..=15u32 {
            for d_y in 2..=n {
                let v = vol_blowup_hyperplane_subvariety(n, d_y).unwrap();
                assert!(v < volume_target(n), "n={} d_Y={}", n, d_y);
            }
        }
    }

    #[test]
    fn s_invariant_closed_form() {
        assert_eq!(s_invariant_bl(3), ratio(5, 4));
        assert_eq!(s_invariant_bl(2), ratio(7, 6));
        for n in 2..=15u32 {
            let closed = rat(1) + rat(n as i64 - 1) / rat(2 * (n as i64 + 1));
            assert_eq!(s_invariant_bl(n), closed, "n={}", n);
            assert_eq!(beta_bl(n), -rat(n as i64 - 1) / rat(2 * (n as i64 + 1)));
        }
    }

    #[test]
    fn s_invariant_integrand_at_zero_is_the_volume() {
        for n in 2..=10u32 {
            let at_zero = rat_pow(&rat(n as i64), n as i64 - 1) * rat(2 * n as i64);
            assert_eq!(at_zero, volume_target(n));
        }
    }

    #[test]
    fn hypersurface_volumes() {
        let q = vol_hypersurface(4, 2).unwrap();
        assert_eq!(q.value, rat(512));
        assert!(!q.below_target); // the quadric attains 2n^n exactly
        for n in 3..=20u32 {
            assert_eq!(vol_hypersurface(n, 2).unwrap().value, volume_target(n));
            for b in 3..n {
                let h = vol_hypersurface(n, b).unwrap();
                assert!(h.below_target, "n={} b={}", n, b);
            }
            // b = 1 is a hyperplane, i.e. projective space itself.
            assert_eq!(
                vol_hypersurface(n, 1).unwrap().value,
                rat_pow(&rat(n as i64 + 1), n as i64)
            );
        }
    }

    #[test]
    fn weighted_hypersurface_examples() {
        // X_{2n+2} in P(1^n, 2, n+1) has volume 1; the n=4 instance.
        assert_eq!(
            vol_weighted_hypersurface(&[1, 1, 1, 1, 2, 5], 10).unwrap(),
            rat(1)
        );
        for n in 3..=10u32 {
            let mut w: Vec<u32> = vec![1; n as usize];
            w.push(2);
            w.push(n + 1);
            assert_eq!(vol_weighted_hypersurface(&w, 2 * n + 2).unwrap(), rat(1));
            // Double cover of P^n branched in degree 2n.
            let mut dc: Vec<u32> = vec![1; n as usize + 1];
            dc.push(n);
            assert_eq!(vol_weighted_hypersurface(&dc, 2 * n).unwrap(), rat(2));
        }
        assert!(matches!(
            vol_weighted_hypersurface(&[1, 1, 1], 3),
            Err(FormulaError::NonFano { .. })
        ));
    }

    #[test]
    fn cone_and_local_bounds() {
        for n in 3..=8u32 {
            assert_eq!(
                cone_normalized_volume(n, &volume_target(n)),
                rat(2) * rat_pow(&rat(n as i64), n as i64 + 1)
            );
            assert_eq!(
                cone_normalized_volume(n + 1, &rat_pow(&rat(n as i64 + 1), n as i64)),
                rat_pow(&rat(n as i64 + 1), n as i64 + 1)
            );
        }
        assert_eq!(fujita_liu_bound(2, &rat(2)), ratio(9, 2));
        assert!(singular_toric_chain_holds(30));
    }

    #[test]
    fn product_volumes_match_c_sequence() {
        assert_eq!(vol_product(3, 1, &rat(9)).unwrap(), rat(54));
        assert_eq!(vol_product(4, 2, &rat(9)).unwrap(), rat(486));
        assert_eq!(vol_product(5, 4, &rat(2)).unwrap(), rat(6250));
        for n in 2..=10u32 {
            let seq = c_sequence(n);
            for r in 1..n {
                let d_z = rat_pow(&rat(n as i64 - r as i64 + 1), n as i64 - r as i64);
                assert_eq!(
                    vol_product(n, r, &d_z).unwrap(),
                    seq.values[r as usize],
                    "n={} r={}",
                    n,
                    r
                );
            }
        }
        assert!(vol_product(5, 5, &rat(1)).is_err());
    }

    #[test]
    fn parity_predicate() {
        assert!(parity_ok(4, &rat(625)));
        assert!(parity_ok(3, &rat(54)));
        assert!(!parity_ok(3, &rat(27)));
        assert!(!parity_ok(3, &ratio(1, 2)));
        assert!(parity_ok(5, &rat(6250)));
        let bad = VolumeReport::new("weighted-hypersurface", 3, rat(1));
        assert!(bad.parity_input_error());
    }

    #[test]
    fn volume_report_comparisons() {
        let r = VolumeReport::new("hypersurface(b=3)", 5, vol_hypersurface(5, 3).unwrap().value)
            .compare("second-volume", volume_target(5))
            .compare("top-volume", rat_pow(&rat(6), 5));
        assert!(r.comparisons.iter().all(|c| c.strictly_less));
    }

    #[test]
    fn census_identifies_the_second_volume() {
        for n in 3..=12u32 {
            let census = second_volume_census(n);
            assert!(census.ok, "n={}", n);
            assert_eq!(census.second, volume_target(n));
            assert!(census
                .attainers
                .iter()
                .any(|f| f == "product(r=1)"));
            assert!(census
                .attainers
                .iter()
                .any(|f| f == "hypersurface(b=2)"));
            for (f, v) in &census.strictly_below {
                assert!(v < &census.second, "{} at n={}", f, n);
            }
        }
    }
}
