//! Effectively open and effectively closed subsets of the line.

use std::fmt;
use std::sync::{Arc, Mutex};

use super::interval::{
    complement_of_closed, complement_of_open, merge_closed, merge_intervals, merge_open,
};
use super::{Interval, Span};
use crate::error::{Error, Result};
use crate::kernel::Rational;

/// Output of one enumeration stage.
pub enum Stage {
    /// Intervals emitted at this stage (possibly none).
    More(Vec<Interval>),
    /// The enumeration has ended; no interval follows.
    Done,
}

type StageGen = dyn FnMut(usize) -> Stage + Send;

struct Enumeration {
    gen: Box<StageGen>,
    stages: Vec<Arc<Vec<Interval>>>,
    merged: Vec<Arc<Vec<Interval>>>,
    done: bool,
}

impl Enumeration {
    fn fill(&mut self, s: usize) {
        while self.stages.len() <= s && !self.done {
            match (self.gen)(self.stages.len()) {
                Stage::More(ivs) => {
                    let prev = self.merged.last().map(|m| m.as_slice()).unwrap_or(&[]);
                    let merged = merge_intervals(prev.iter().cloned().chain(ivs.iter().cloned()));
                    self.stages.push(Arc::new(ivs));
                    self.merged.push(Arc::new(merged));
                }
                Stage::Done => self.done = true,
            }
        }
    }
}

/// An effectively open set `U`, the union of a staged enumeration of rational
/// open intervals.
///
/// Stages are memoized. The set may carry its exact description as disjoint
/// open spans, which exact measures use to answer without enumerating.
#[derive(Clone)]
pub struct Sigma01Set(Arc<SigmaInner>);

struct SigmaInner {
    en: Mutex<Enumeration>,
    exact: Option<Vec<Span>>,
    known_empty: bool,
}

impl Sigma01Set {
    /// Set enumerated stage by stage; `Stage::Done` marks a finite enumeration.
    pub fn from_stages(gen: impl FnMut(usize) -> Stage + Send + 'static) -> Sigma01Set {
        Sigma01Set::build(Box::new(gen), None, false)
    }

    /// Set with one optional interval per position.
    pub fn from_enumeration(
        mut e: impl FnMut(usize) -> Option<Interval> + Send + 'static,
    ) -> Sigma01Set {
        Sigma01Set::from_stages(move |i| Stage::More(e(i).into_iter().collect()))
    }

    fn build(gen: Box<StageGen>, exact: Option<Vec<Span>>, known_empty: bool) -> Sigma01Set {
        let en = Enumeration {
            gen,
            stages: Vec::new(),
            merged: Vec::new(),
            done: false,
        };
        Sigma01Set(Arc::new(SigmaInner {
            en: Mutex::new(en),
            exact,
            known_empty,
        }))
    }

    pub fn empty() -> Sigma01Set {
        Sigma01Set::build(Box::new(|_| Stage::Done), Some(Vec::new()), true)
    }

    pub fn whole() -> Sigma01Set {
        Sigma01Set::from_spans(vec![Span::whole()]).unwrap()
    }

    /// Finite union of spans. Bounded spans are emitted at stage 0; an
    /// unbounded one is enumerated as intervals growing by powers of two.
    pub fn from_spans(spans: Vec<Span>) -> Result<Sigma01Set> {
        let merged = merge_open(spans);
        let bounded: Vec<Interval> = merged
            .iter()
            .filter(|s| s.is_bounded())
            .map(|s| Interval::new(s.lo.clone().unwrap(), s.hi.clone().unwrap()))
            .collect();
        let rays: Vec<Span> = merged.iter().filter(|s| !s.is_bounded()).cloned().collect();
        let empty = merged.is_empty();
        let gen = move |s: usize| {
            if rays.is_empty() && s > 0 {
                return Stage::Done;
            }
            let mut out = if s == 0 { bounded.clone() } else { Vec::new() };
            let reach = Rational::pow2(s as i64);
            for r in &rays {
                out.push(grow_ray(r, &reach));
            }
            Stage::More(out)
        };
        Ok(Sigma01Set::build(Box::new(gen), Some(merged), empty))
    }

    /// Attaches an exact description, which must equal the enumerated union.
    pub fn with_exact(self, spans: Vec<Span>) -> Sigma01Set {
        let inner = Arc::try_unwrap(self.0)
            .ok()
            .expect("with_exact on a shared set");
        let merged = merge_open(spans);
        let known_empty = merged.is_empty();
        Sigma01Set(Arc::new(SigmaInner {
            en: inner.en,
            exact: Some(merged),
            known_empty,
        }))
    }

    /// Identity of the shared descriptor, for memoization.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Exact disjoint open spans, when known.
    pub fn exact_spans(&self) -> Option<&[Span]> {
        self.0.exact.as_deref()
    }

    /// True when the set is certified empty.
    pub fn known_empty(&self) -> bool {
        self.0.known_empty
    }

    /// Intervals emitted at stage `s` (empty past the end).
    pub fn stage(&self, s: usize) -> Arc<Vec<Interval>> {
        let mut en = self.0.en.lock().unwrap();
        en.fill(s);
        en.stages.get(s).cloned().unwrap_or_default()
    }

    /// Disjoint sorted union of stages `0..=s`.
    pub fn merged_prefix(&self, s: usize) -> Arc<Vec<Interval>> {
        let mut en = self.0.en.lock().unwrap();
        en.fill(s);
        match en.merged.get(s).or(en.merged.last()) {
            Some(m) => m.clone(),
            None => Arc::new(Vec::new()),
        }
    }

    /// True when the enumeration is known to end by stage `s`.
    pub fn is_finished_by(&self, s: usize) -> bool {
        let mut en = self.0.en.lock().unwrap();
        en.fill(s + 1);
        en.done && en.stages.len() <= s + 1
    }

    /// The first `k` items of the flattened enumeration, where every stage is
    /// followed by one separator item. Only intervals are returned.
    pub fn first_intervals(&self, k: usize) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut taken = 0usize;
        let mut s = 0usize;
        while taken < k {
            let stage = {
                let mut en = self.0.en.lock().unwrap();
                en.fill(s);
                match en.stages.get(s) {
                    Some(st) => st.clone(),
                    None => break,
                }
            };
            for iv in stage.iter() {
                if taken == k {
                    return out;
                }
                out.push(iv.clone());
                taken += 1;
            }
            taken += 1;
            s += 1;
        }
        out
    }

    /// Certified membership of a rational by stage `s`.
    pub fn contains_by(&self, x: &Rational, s: usize) -> bool {
        self.merged_prefix(s).iter().any(|iv| iv.contains(x))
    }
}

fn grow_ray(r: &Span, reach: &Rational) -> Interval {
    match (&r.lo, &r.hi) {
        (None, None) => Interval::new(-reach, reach.clone()),
        (Some(l), None) => Interval::new(l.clone(), l + reach),
        (None, Some(h)) => Interval::new(h - reach, h.clone()),
        (Some(_), Some(_)) => unreachable!("bounded span treated as ray"),
    }
}

impl fmt::Debug for Sigma01Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.exact {
            Some(spans) => write!(f, "Sigma01Set{spans:?}"),
            None => f.write_str("Sigma01Set(enumerated)"),
        }
    }
}

/// An effectively closed set `C`, given by an effectively open complement.
#[derive(Clone)]
pub struct Pi01Set {
    complement: Sigma01Set,
    exact: Option<Vec<Span>>,
    known_empty: bool,
}

impl Pi01Set {
    /// `C = R \ U`.
    pub fn from_complement(u: Sigma01Set) -> Pi01Set {
        let exact = u.exact_spans().map(complement_of_open);
        let known_empty = exact.as_ref().is_some_and(|e| e.is_empty());
        Pi01Set {
            complement: u,
            exact,
            known_empty,
        }
    }

    /// Finite union of closed spans (points allowed).
    pub fn from_closed_spans(spans: Vec<Span>) -> Result<Pi01Set> {
        let merged = merge_closed(spans);
        let u = Sigma01Set::from_spans(complement_of_closed(&merged))?;
        Ok(Pi01Set {
            complement: u,
            known_empty: merged.is_empty(),
            exact: Some(merged),
        })
    }

    pub fn empty() -> Pi01Set {
        Pi01Set::from_complement(Sigma01Set::whole())
    }

    pub fn whole() -> Pi01Set {
        Pi01Set::from_complement(Sigma01Set::empty())
    }

    /// Closure of a finite union of open spans; fails on an empty span.
    pub fn closure_of(spans: &[Span]) -> Result<Pi01Set> {
        if let Some(s) = spans.iter().find(|s| s.is_empty_open()) {
            return Err(Error::InvalidArgument(format!("empty span {s:?}")));
        }
        Pi01Set::from_closed_spans(spans.to_vec())
    }

    pub fn complement(&self) -> &Sigma01Set {
        &self.complement
    }

    pub fn exact_spans(&self) -> Option<&[Span]> {
        self.exact.as_deref()
    }

    /// True when `C` is certified empty.
    pub fn known_empty(&self) -> bool {
        self.known_empty
    }

    /// Marks the set as certified empty (the complement must cover `R`).
    pub fn assert_empty(mut self) -> Pi01Set {
        self.known_empty = true;
        self.exact = Some(Vec::new());
        self
    }
}

impl fmt::Debug for Pi01Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(spans) => write!(f, "Pi01Set{spans:?}"),
            None => f.write_str("Pi01Set(enumerated complement)"),
        }
    }
}

/// A fixed bijection from `N` onto all rational open intervals.
///
/// `i` is split by the Cantor pairing into `(m, n)`; the interval is
/// `(q_m, q_m + p_n)` with `q` from [`rational_enumeration`] and `p` from
/// [`positive_rational_enumeration`].
pub fn interval_enumeration(i: u64) -> Interval {
    let (m, n) = unpair(i);
    let lo = rational_enumeration(m);
    let len = positive_rational_enumeration(n);
    let hi = &lo + &len;
    Interval::new(lo, hi)
}

/// Inverse of [`interval_enumeration`].
pub fn interval_index(iv: &Interval) -> u64 {
    pair(rational_index(&iv.lo), positive_rational_index(&iv.len()))
}

/// Cantor pairing.
pub fn pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

/// Inverse Cantor pairing.
pub fn unpair(z: u64) -> (u64, u64) {
    let w = (((8 * z as u128 + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    let mut w = w;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let b = z - w * (w + 1) / 2;
    (w - b, b)
}

/// Bijection `N -> Q_{>0}` via the Calkin-Wilf sequence.
pub fn positive_rational_enumeration(n: u64) -> Rational {
    // Calkin-Wilf: node n+1 in breadth-first order; path bits from the binary expansion.
    let m = n + 1;
    let bits = 64 - m.leading_zeros();
    let (mut a, mut b) = (1i64, 1i64);
    for k in (0..bits - 1).rev() {
        if (m >> k) & 1 == 1 {
            a += b;
        } else {
            b += a;
        }
    }
    Rational::new(a, b)
}

/// Inverse of [`positive_rational_enumeration`]; panics unless `q > 0` fits in `i64`.
pub fn positive_rational_index(q: &Rational) -> u64 {
    assert!(q.is_positive());
    let (mut a, mut b): (i64, i64) = (
        q.numer().try_into().expect("numerator too large"),
        q.denom().try_into().expect("denominator too large"),
    );
    let mut path: Vec<u64> = Vec::new();
    while (a, b) != (1, 1) {
        if a > b {
            path.push(1);
            a -= b;
        } else {
            path.push(0);
            b -= a;
        }
    }
    let mut m = 1u64;
    for bit in path.into_iter().rev() {
        m = (m << 1) | bit;
    }
    m - 1
}

/// Bijection `N -> Q`: `0 -> 0`, odd `2j+1 -> q_j`, even `2j+2 -> -q_j`.
pub fn rational_enumeration(m: u64) -> Rational {
    if m == 0 {
        return Rational::zero();
    }
    let q = positive_rational_enumeration((m - 1) / 2);
    if m % 2 == 1 {
        q
    } else {
        -q
    }
}

pub fn rational_index(q: &Rational) -> u64 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        2 * positive_rational_index(q) + 1
    } else {
        2 * positive_rational_index(&-q) + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn spans_enumerate_rays() {
        let u = Sigma01Set::from_spans(vec![
            Span::finite(r(0, 1), r(1, 1)),
            Span::new(Some(r(3, 1)), None),
        ])
        .unwrap();
        assert!(u.contains_by(&r(1, 2), 0));
        assert!(!u.contains_by(&r(100, 1), 3));
        assert!(u.contains_by(&r(100, 1), 7));
        assert!(!u.contains_by(&r(2, 1), 20));
        assert!(!u.is_finished_by(10));
        let v = Sigma01Set::from_spans(vec![Span::finite(r(0, 1), r(1, 1))]).unwrap();
        assert!(v.is_finished_by(0));
        assert!(Sigma01Set::empty().known_empty());
        assert!(Sigma01Set::empty().first_intervals(10).is_empty());
    }

    #[test]
    fn flattened_prefix_counts_separators() {
        let u = Sigma01Set::from_enumeration(|i| {
            Some(Interval::new(r(i as i64, 1), r(i as i64 + 1, 1)))
        });
        assert_eq!(u.first_intervals(0).len(), 0);
        assert_eq!(u.first_intervals(1).len(), 1);
        assert_eq!(u.first_intervals(5).len(), 3);
        let never = Sigma01Set::from_stages(|_| Stage::More(Vec::new()));
        assert!(never.first_intervals(50).is_empty());
    }

    #[test]
    fn closed_sets() {
        let c = Pi01Set::from_closed_spans(vec![Span::finite(r(0, 1), r(1, 2))]).unwrap();
        assert!(c.complement().contains_by(&r(-1, 1), 3));
        assert!(!c.complement().contains_by(&r(0, 1), 30));
        assert!(Pi01Set::empty().known_empty());
        let cl = Pi01Set::closure_of(&[Span::finite(r(0, 1), r(1, 1))]).unwrap();
        assert_eq!(cl.exact_spans().unwrap(), &[Span::finite(r(0, 1), r(1, 1))]);
    }

    #[test]
    fn interval_enumeration_is_deterministic_and_injective() {
        assert_eq!(interval_enumeration(0), Interval::new(r(0, 1), r(1, 1)));
        let mut seen = HashSet::new();
        for i in 0..10_000u64 {
            let iv = interval_enumeration(i);
            assert_eq!(interval_index(&iv), i);
            assert!(seen.insert(iv));
        }
    }

    #[test]
    fn unit_interval_has_small_index() {
        let target = Interval::new(r(0, 1), r(1, 1));
        let found = (0..1_000_000u64).find(|&i| interval_enumeration(i) == target);
        assert_eq!(found, Some(0));
        let half = Interval::new(r(1, 3), r(1, 2));
        let i = interval_index(&half);
        assert!(i <= 1_000_000);
        assert_eq!(interval_enumeration(i), half);
    }
}
