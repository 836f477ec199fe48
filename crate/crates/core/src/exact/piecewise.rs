use num::{Signed, Zero};
use thiserror::Error;

use super::{Poly, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PiecewiseError {
    #[error("a piecewise polynomial needs at least one piece")]
    Empty,
    #[error("the first breakpoint must be 0, got {0}")]
    BadOrigin(String),
    #[error("breakpoints must be strictly increasing at index {0}")]
    Unsorted(usize),
    #[error("pieces disagree at breakpoint {at}: {left} vs {right}")]
    Discontinuous {
        at: String,
        left: String,
        right: String,
    },
}

/// Continuous piecewise polynomial on `[0, oo)`.
///
/// Each entry `(b_i, p_i)` means the function equals `p_i` on
/// `[b_i, b_{i+1}]` (the last piece extends to infinity).  Construction
/// verifies exact agreement of adjacent pieces at every interior breakpoint,
/// so values are well defined; evaluation at a breakpoint uses the
/// right-hand piece.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PiecewisePoly {
    pieces: Vec<(Rational, Poly)>,
}

impl PiecewisePoly {
    pub fn new(pieces: Vec<(Rational, Poly)>) -> Result<Self, PiecewiseError> {
        if pieces.is_empty() {
            return Err(PiecewiseError::Empty);
        }
        if !pieces[0].0.is_zero() {
            return Err(PiecewiseError::BadOrigin(pieces[0].0.to_string()));
        }
        for i in 1..pieces.len() {
            if pieces[i].0 <= pieces[i - 1].0 {
                return Err(PiecewiseError::Unsorted(i));
            }
            let b = &pieces[i].0;
            let left = pieces[i - 1].1.eval(b);
            let right = pieces[i].1.eval(b);
            if left != right {
                return Err(PiecewiseError::Discontinuous {
                    at: b.to_string(),
                    left: left.to_string(),
                    right: right.to_string(),
                });
            }
        }
        Ok(PiecewisePoly { pieces })
    }

    pub fn single(p: Poly) -> Self {
        PiecewisePoly {
            pieces: vec![(Rational::zero(), p)],
        }
    }

    pub fn pieces(&self) -> &[(Rational, Poly)] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.pieces.iter().map(|(b, _)| b)
    }

    /// Index of the piece governing `x` (the right-hand piece at a
    /// breakpoint).  Requires `x >= 0`.
    pub fn piece_index(&self, x: &Rational) -> usize {
        debug_assert!(!x.is_negative());
        let mut idx = 0;
        for (i, (b, _)) in self.pieces.iter().enumerate() {
            if b <= x {
                idx = i;
            } else {
                break;
            }
        }
        idx
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.pieces[self.piece_index(x)].1.eval(x)
    }

    /// Piecewise derivative as raw pieces.  The result need not be
    /// continuous, so it is not a `PiecewisePoly`.
    pub fn derivative_pieces(&self) -> Vec<(Rational, Poly)> {
        self.pieces
            .iter()
            .map(|(b, p)| (b.clone(), p.derivative()))
            .collect()
    }

    /// Continuous antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> PiecewisePoly {
        let mut out: Vec<(Rational, Poly)> = Vec::with_capacity(self.pieces.len());
        let mut carry = Rational::zero();
        for (i, (b, p)) in self.pieces.iter().enumerate() {
            let mut q = p.antiderivative();
            if i == 0 {
                // q(0) = 0 already.
            } else {
                let c = &carry - q.eval(b);
                q = &q + &Poly::constant(c);
            }
            if i + 1 < self.pieces.len() {
                carry = q.eval(&self.pieces[i + 1].0);
            }
            out.push((b.clone(), q));
        }
        PiecewisePoly::new(out).expect("antiderivative is continuous by construction")
    }

    /// Exact integral over `[a, b]` with `0 <= a <= b`.
    pub fn integrate(&self, a: &Rational, b: &Rational) -> Rational {
        assert!(!a.is_negative() && a <= b, "integration bounds out of order");
        let f = self.antiderivative();
        f.eval(b) - f.eval(a)
    }

    pub fn scale(&self, c: &Rational) -> PiecewisePoly {
        PiecewisePoly {
            pieces: self
                .pieces
                .iter()
                .map(|(b, p)| (b.clone(), p.scale(c)))
                .collect(),
        }
    }

    /// Multiply every piece by a fixed polynomial; preserves continuity.
    pub fn mul_poly(&self, q: &Poly) -> PiecewisePoly {
        PiecewisePoly {
            pieces: self
                .pieces
                .iter()
                .map(|(b, p)| (b.clone(), p * q))
                .collect(),
        }
    }

    /// Pointwise difference on the merged breakpoint partition.
    pub fn sub(&self, other: &PiecewisePoly) -> PiecewisePoly {
        let mut bps: Vec<Rational> = self
            .breakpoints()
            .chain(other.breakpoints())
            .cloned()
            .collect();
        bps.sort();
        bps.dedup();
        let pieces = bps
            .into_iter()
            .map(|b| {
                let p = &self.pieces[self.piece_index(&b)].1;
                let q = &other.pieces[other.piece_index(&b)].1;
                (b, p - q)
            })
            .collect();
        PiecewisePoly::new(pieces).expect("difference of continuous functions is continuous")
    }
}
