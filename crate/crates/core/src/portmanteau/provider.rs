//! Liminf witnesses for open sets and limsup witnesses for closed sets.

use std::fmt;
use std::sync::Arc;

use crate::functions::{indicator_approx, polygonal_as_bcf, RationalPolygonal};
use crate::kernel::{eps, Answer, LiminfWitness, LimsupWitness, Rational};
use crate::measures::{integrate, mass_closed, CMeasure, Pi01Set, Sigma01Set};
use crate::weakconv::{family_ewlimit, EWLimit, Family, MeasureSeq};

type OpenFn = dyn Fn(&Sigma01Set) -> LiminfWitness + Send + Sync;
type ClosedFn = dyn Fn(&Pi01Set) -> LimsupWitness + Send + Sync;

/// Witnesses that `liminf μ_n(U) >= μ(U)` for open `U` and
/// `limsup μ_n(C) <= μ(C)` for closed `C`.
#[derive(Clone)]
pub struct WitnessProvider {
    pub seq: MeasureSeq,
    pub limit: CMeasure,
    open: Arc<OpenFn>,
    closed: Arc<ClosedFn>,
}

impl WitnessProvider {
    pub fn new(
        seq: MeasureSeq,
        limit: CMeasure,
        for_open: impl Fn(&Sigma01Set) -> LiminfWitness + Send + Sync + 'static,
        for_closed: impl Fn(&Pi01Set) -> LimsupWitness + Send + Sync + 'static,
    ) -> WitnessProvider {
        WitnessProvider {
            seq,
            limit,
            open: Arc::new(for_open),
            closed: Arc::new(for_closed),
        }
    }

    pub fn for_open(&self, u: &Sigma01Set) -> LiminfWitness {
        (self.open)(u)
    }

    pub fn for_closed(&self, c: &Pi01Set) -> LimsupWitness {
        (self.closed)(c)
    }

    /// Same provider with every answer passed through `f`.
    pub fn map_answers(&self, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> WitnessProvider {
        let f = Arc::new(f);
        let (p1, p2, f1, f2) = (self.clone(), self.clone(), f.clone(), f);
        WitnessProvider::new(
            self.seq.clone(),
            self.limit.clone(),
            move |u| {
                let f = f1.clone();
                p1.for_open(u).map_answers(move |n| f(n))
            },
            move |c| {
                let f = f2.clone();
                p2.for_closed(c).map_answers(move |n| f(n))
            },
        )
    }
}

impl fmt::Debug for WitnessProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "WitnessProvider {{ seq: {:?}, limit: {:?} }}",
            self.seq, self.limit
        )
    }
}

/// `N` with `2^-N < d`, for `d > 0`.
pub(crate) fn precision_below(d: &Rational) -> u32 {
    (1 - d.floor_log2()).max(0) as u32
}

/// Liminf witness for `μ_n(U)`.
///
/// For `r` in the left cut of `μ(U)` it searches `k0` with a certified
/// `∫ t_{k0} dμ > r + 2^-N0`, `t_{k0}` the indicator approximation of `U`,
/// and answers the modulus of `t_{k0}` at `N0`: then
/// `μ_n(U) >= ∫ t_{k0} dμ_n > r`. Each candidate `k0` costs one unit of budget.
pub fn open_witness(e: &EWLimit, u: &Sigma01Set) -> LiminfWitness {
    let (e, u) = (e.clone(), u.clone());
    let mass = e.limit.mass_open(&u);
    LiminfWitness::new(move |r, budget| {
        if r.is_negative() {
            return Answer::Answered(0);
        }
        if u.known_empty() {
            return Answer::Pending;
        }
        crate::answered!(mass.cut_member(r, budget));
        for k0 in 0..budget.min(u32::MAX as u64) as u32 {
            let t = polygonal_as_bcf(indicator_approx(&u, k0));
            let p = k0 + 2;
            let lower = crate::answered!(integrate(&e.limit, &t).try_approx(p, budget)) - eps(p);
            if lower > *r {
                let n0 = precision_below(&(lower - r));
                return e.modulus_for(&t, 1).query(n0, budget);
            }
        }
        Answer::Pending
    })
}

/// Limsup witness for `μ_n(C)` by complements: with `δ = r - μ(C)` certified
/// positive, `μ_n(R \ C) > r'` and `|μ_n(R) - μ(R)| < δ/2` give `μ_n(C) < r`.
pub fn closed_witness(e: &EWLimit, c: &Pi01Set) -> LimsupWitness {
    let (e, c) = (e.clone(), c.clone());
    let mass = mass_closed(&e.limit, &c);
    let outside = open_witness(&e, c.complement());
    let one = polygonal_as_bcf(RationalPolygonal::constant(Rational::one()));
    LimsupWitness::new(move |r, budget| {
        if c.known_empty() {
            return if r.is_positive() {
                Answer::Answered(0)
            } else {
                Answer::Pending
            };
        }
        let i = crate::answered!(mass.cut_member(r, budget));
        let delta = r - mass.upper(i);
        let p = (Rational::int(8) / &delta).ceil_log2().max(0) as u32;
        let t = crate::answered!(e.limit.total_mass().try_approx(p, budget));
        let r_open = t + eps(p) - r + &delta / Rational::int(2);
        let n1 = crate::answered!(outside.query(&r_open, budget));
        let m = (Rational::int(2) / &delta).ceil_log2().max(0) as u32;
        let n2 = crate::answered!(e.modulus_for(&one, 1).query(m, budget));
        Answer::Answered(n1.max(n2))
    })
}

/// Provider built from an effective weak limit.
pub fn provider_from_ewlimit(e: &EWLimit) -> WitnessProvider {
    let (e1, e2) = (e.clone(), e.clone());
    WitnessProvider::new(
        e.seq.clone(),
        e.limit.clone(),
        move |u| open_witness(&e1, u),
        move |c| closed_witness(&e2, c),
    )
}

/// Provider reading thresholds off a family's closed forms on sets with
/// exact spans, and falling back to [`open_witness`] / [`closed_witness`].
pub fn family_provider(fam: Arc<dyn Family>) -> WitnessProvider {
    let e = family_ewlimit(fam.clone());
    let (f1, f2, e1, e2) = (fam.clone(), fam, e.clone(), e.clone());
    WitnessProvider::new(
        e.seq.clone(),
        e.limit.clone(),
        move |u| match u.exact_spans() {
            Some(spans) => {
                let (fam, spans) = (f1.clone(), spans.to_vec());
                LiminfWitness::new(move |r, _| {
                    fam.open_threshold(&spans, r)
                        .map_or(Answer::Pending, Answer::Answered)
                })
            }
            None => open_witness(&e1, u),
        },
        move |c| match c.exact_spans() {
            Some(spans) => {
                let (fam, spans) = (f2.clone(), spans.to_vec());
                LimsupWitness::new(move |r, _| {
                    fam.closed_threshold(&spans, r)
                        .map_or(Answer::Pending, Answer::Answered)
                })
            }
            None => closed_witness(&e2, c),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Span;
    use crate::weakconv::{ShiftingAtom, TruncatedLebesgue};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn s1() -> Arc<dyn Family> {
        Arc::new(ShiftingAtom::new(r(0, 1), r(1, 1), r(1, 1)).unwrap())
    }

    fn s2() -> Arc<dyn Family> {
        Arc::new(TruncatedLebesgue::new("1 - 2^-n".parse().unwrap(), r(1, 1)).unwrap())
    }

    fn open(lo: i64, hi: i64, d: i64) -> Sigma01Set {
        Sigma01Set::from_spans(vec![Span::finite(r(lo, d), r(hi, d))]).unwrap()
    }

    fn closed(lo: i64, hi: i64, d: i64) -> Pi01Set {
        Pi01Set::from_closed_spans(vec![Span::finite(r(lo, d), r(hi, d))]).unwrap()
    }

    #[test]
    fn open_witness_examples() {
        let fam = s2();
        let e = family_ewlimit(fam.clone());
        let u = open(0, 1, 1);
        let w = open_witness(&e, &u);
        let n0 = w.query(&r(3, 4), 10_000).ok().unwrap();
        assert!((n0..n0 + 33).all(|n| fam.at(n).mass_open(u.exact_spans().unwrap()) > r(3, 4)));
        assert_eq!(w.query(&r(2, 1), 10_000), Answer::Pending);
        assert_eq!(w.query(&r(1, 1), 10_000), Answer::Pending);

        let e1 = family_ewlimit(s1());
        let u = open(-1, 1, 1);
        let n0 = open_witness(&e1, &u).query(&r(1, 2), 10_000).ok().unwrap();
        assert!((n0..n0 + 33).all(|n| s1().at(n).mass_open(u.exact_spans().unwrap()) > r(1, 2)));
    }

    #[test]
    fn closed_witness_examples() {
        let fam = s2();
        let e = family_ewlimit(fam.clone());
        let c = closed(3, 8, 4);
        let n0 = closed_witness(&e, &c)
            .query(&r(9, 16), 10_000)
            .ok()
            .unwrap();
        assert!((n0..n0 + 33).all(|n| fam.at(n).mass_closed(c.exact_spans().unwrap()) < r(9, 16)));
        assert_eq!(
            closed_witness(&e, &c).query(&r(1, 4), 10_000),
            Answer::Pending
        );
        assert_eq!(
            closed_witness(&e, &Pi01Set::empty()).query(&r(1, 8), 10),
            Answer::Answered(0)
        );
        let e1 = family_ewlimit(s1());
        let point = Pi01Set::from_closed_spans(vec![Span::point(r(0, 1))]).unwrap();
        assert_eq!(
            closed_witness(&e1, &point).query(&r(2, 1), 10_000),
            Answer::Answered(0)
        );
    }

    #[test]
    fn family_provider_agrees_with_closed_forms() {
        let p = family_provider(s2());
        let u = open(0, 1, 1);
        assert_eq!(p.for_open(&u).query(&r(3, 4), 1), Answer::Answered(3));
        let shifted = p.map_answers(|n| n + 1);
        assert_eq!(shifted.for_open(&u).query(&r(3, 4), 1), Answer::Answered(4));
    }
}
