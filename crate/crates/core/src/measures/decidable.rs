//! Almost decidable sets built from finite unions of closed intervals.

use std::fmt;

use super::interval::complement_of_closed;
use super::{Interval, Sigma01Set, Span, Stage};
use crate::error::{Error, Result};
use crate::kernel::{CauchyReal, Rational};

/// Precision up to which endpoints are compared before giving up.
const SEPARATION_PRECISION: u32 = 60;

/// A pair `(U, V)` of effectively open sets with `U ⊆ A ⊆ R \ V`,
/// `μ(U ∪ V) = μ(R)` and `U ∪ V` dense.
#[derive(Clone)]
pub struct AlmostDecidablePair {
    pub u: Sigma01Set,
    pub v: Sigma01Set,
}

impl fmt::Debug for AlmostDecidablePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AlmostDecidablePair {{ u: {:?}, v: {:?} }}",
            self.u, self.v
        )
    }
}

/// Closed interval `[lo, hi]`; a missing end is infinite.
#[derive(Clone, Debug)]
pub struct BoxInterval {
    pub lo: Option<CauchyReal>,
    pub hi: Option<CauchyReal>,
}

impl BoxInterval {
    pub fn new(lo: Option<CauchyReal>, hi: Option<CauchyReal>) -> BoxInterval {
        BoxInterval { lo, hi }
    }

    pub fn rational(lo: Rational, hi: Rational) -> BoxInterval {
        BoxInterval::new(
            Some(CauchyReal::from_rational(lo)),
            Some(CauchyReal::from_rational(hi)),
        )
    }

    /// The closure of a span.
    pub fn from_span(s: &Span) -> BoxInterval {
        BoxInterval::new(
            s.lo.clone().map(CauchyReal::from_rational),
            s.hi.clone().map(CauchyReal::from_rational),
        )
    }

    fn endpoints(&self) -> impl Iterator<Item = &CauchyReal> {
        self.lo.iter().chain(self.hi.iter())
    }
}

fn describe(x: &CauchyReal) -> String {
    match x.exact() {
        Some(q) => q.to_string(),
        None => format!("≈{}", x.approx(20)),
    }
}

/// `Some(true)` if `x < y`, `Some(false)` if `x > y`, `None` if not separated.
fn compare(x: &CauchyReal, y: &CauchyReal) -> Option<bool> {
    if let (Some(a), Some(b)) = (x.exact(), y.exact()) {
        return (a != b).then(|| a < b);
    }
    (0..=SEPARATION_PRECISION).find_map(|p| {
        if x.upper(p) < y.lower(p) {
            Some(true)
        } else if y.upper(p) < x.lower(p) {
            Some(false)
        } else {
            None
        }
    })
}

/// The almost decidable pair for `A = ∪ [lo_j, hi_j]`, given sorted disjoint
/// intervals whose endpoints carry no atom of `μ`.
///
/// `U` enumerates interiors approximated from inside, `V` the gaps between
/// and around the intervals approximated from outside.
pub fn almost_decidable_box(
    mu: &super::CMeasure,
    intervals: &[BoxInterval],
) -> Result<AlmostDecidablePair> {
    let atoms = mu.atoms().ok_or(Error::NoAtomCertificate)?;
    for e in intervals.iter().flat_map(BoxInterval::endpoints) {
        for (x, w) in atoms.iter().filter(|(_, w)| w.is_positive()) {
            if compare(e, x).is_none() {
                return Err(Error::NotContinuitySet {
                    endpoint: describe(e),
                    reason: format!("atom of weight {w} at {}", describe(x)),
                });
            }
        }
    }
    for iv in intervals {
        if let (Some(a), Some(b)) = (&iv.lo, &iv.hi) {
            if compare(a, b) == Some(false) {
                return Err(Error::InvalidArgument(format!(
                    "reversed interval [{}, {}]",
                    describe(a),
                    describe(b)
                )));
            }
        }
    }
    for w in intervals.windows(2) {
        let ok = match (&w[0].hi, &w[1].lo) {
            (Some(b), Some(a)) => compare(b, a) == Some(true),
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidArgument(
                "intervals must be sorted and pairwise disjoint".into(),
            ));
        }
    }

    let exact: Option<Vec<Span>> = intervals
        .iter()
        .map(|iv| {
            let lo = match &iv.lo {
                Some(x) => Some(x.exact()?.clone()),
                None => None,
            };
            let hi = match &iv.hi {
                Some(x) => Some(x.exact()?.clone()),
                None => None,
            };
            Some(Span::new(lo, hi))
        })
        .collect();
    if let Some(closed) = exact {
        let interiors: Vec<Span> = closed
            .iter()
            .filter(|s| !s.is_empty_open())
            .cloned()
            .collect();
        let u = Sigma01Set::from_spans(interiors)?;
        let v = Sigma01Set::from_spans(complement_of_closed(&closed))?;
        return Ok(AlmostDecidablePair { u, v });
    }

    let ivs_u = intervals.to_vec();
    let u = Sigma01Set::from_stages(move |s| {
        let reach = Rational::pow2(s as i64);
        let out = ivs_u
            .iter()
            .filter_map(|iv| {
                let lo = iv.lo.as_ref().map_or(-&reach, |a| a.upper(s as u32));
                let hi = iv.hi.as_ref().map_or(reach.clone(), |b| b.lower(s as u32));
                (lo < hi).then(|| Interval::new(lo, hi))
            })
            .collect();
        Stage::More(out)
    });
    let ivs_v = intervals.to_vec();
    let v = Sigma01Set::from_stages(move |s| {
        let reach = Rational::pow2(s as i64);
        let p = s as u32;
        let mut gaps: Vec<(Rational, Rational)> = Vec::new();
        let mut left: Option<Rational> = Some(-&reach);
        for iv in &ivs_v {
            if let Some(l) = left.take() {
                if let Some(a) = &iv.lo {
                    gaps.push((l, a.lower(p)));
                }
            }
            left = iv.hi.as_ref().map(|b| b.upper(p));
        }
        if let Some(l) = left {
            gaps.push((l, reach.clone()));
        }
        Stage::More(
            gaps.into_iter()
                .filter(|(a, b)| a < b)
                .map(|(a, b)| Interval::new(a, b))
                .collect(),
        )
    });
    Ok(AlmostDecidablePair { u, v })
}
