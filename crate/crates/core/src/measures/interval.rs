//! Rational intervals, possibly unbounded, and finite unions of them.

use std::cmp::Ordering;
use std::fmt;

use crate::kernel::Rational;

/// A finite open interval `(lo, hi)` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    /// Panics unless `lo < hi`.
    pub fn new(lo: Rational, hi: Rational) -> Interval {
        assert!(lo < hi, "empty interval ({lo}, {hi})");
        Interval { lo, hi }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo < *x && *x < self.hi
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn span(&self) -> Span {
        Span::new(Some(self.lo.clone()), Some(self.hi.clone()))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// An interval with optional endpoints; `None` is `-inf` for `lo` and `+inf` for `hi`.
///
/// Whether the finite endpoints belong to the span depends on context:
/// open unions and closed unions use the same type.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

fn cmp_lo(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Less,
        (_, None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

fn cmp_hi(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Greater,
        (_, None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// Compares a right end with a left end: is `hi < lo`, `hi == lo` or `hi > lo`?
fn cmp_hi_lo(hi: &Option<Rational>, lo: &Option<Rational>) -> Ordering {
    match (hi, lo) {
        (None, _) | (_, None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

impl Span {
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Span {
        Span { lo, hi }
    }

    pub fn finite(lo: Rational, hi: Rational) -> Span {
        Span::new(Some(lo), Some(hi))
    }

    pub fn whole() -> Span {
        Span::new(None, None)
    }

    pub fn point(x: Rational) -> Span {
        Span::new(Some(x.clone()), Some(x))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    /// Interior membership: `lo < x < hi`.
    pub fn contains_open(&self, x: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|l| l < x) && self.hi.as_ref().is_none_or(|h| x < h)
    }

    /// Closed membership: `lo <= x <= hi`.
    pub fn contains_closed(&self, x: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|l| l <= x) && self.hi.as_ref().is_none_or(|h| x <= h)
    }

    /// True when the open span is empty (`lo >= hi`).
    pub fn is_empty_open(&self) -> bool {
        cmp_hi_lo(&self.hi, &self.lo) != Ordering::Greater
    }

    /// True when the closed span is empty (`lo > hi`).
    pub fn is_empty_closed(&self) -> bool {
        cmp_hi_lo(&self.hi, &self.lo) == Ordering::Less
    }

    /// Intersection with `[c, d]` as a finite pair, or `None` if empty.
    pub fn clip(&self, c: &Rational, d: &Rational) -> Option<(Rational, Rational)> {
        let lo = match &self.lo {
            Some(l) if l > c => l.clone(),
            _ => c.clone(),
        };
        let hi = match &self.hi {
            Some(h) if h < d => h.clone(),
            _ => d.clone(),
        };
        (lo < hi).then_some((lo, hi))
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(l) => write!(f, "<{l}, ")?,
            None => f.write_str("<-inf, ")?,
        }
        match &self.hi {
            Some(h) => write!(f, "{h}>"),
            None => f.write_str("+inf>"),
        }
    }
}

fn sorted(spans: impl IntoIterator<Item = Span>) -> Vec<Span> {
    let mut v: Vec<Span> = spans.into_iter().collect();
    v.sort_by(|a, b| cmp_lo(&a.lo, &b.lo).then_with(|| cmp_hi(&a.hi, &b.hi)));
    v
}

/// Disjoint, sorted form of a union of open spans. Touching spans stay
/// separate because the shared endpoint is not covered.
pub fn merge_open(spans: impl IntoIterator<Item = Span>) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::new();
    for s in sorted(spans).into_iter().filter(|s| !s.is_empty_open()) {
        match out.last_mut() {
            Some(last) if cmp_hi_lo(&last.hi, &s.lo) == Ordering::Greater => {
                if cmp_hi(&s.hi, &last.hi) == Ordering::Greater {
                    last.hi = s.hi;
                }
            }
            _ => out.push(s),
        }
    }
    out
}

/// Disjoint, sorted form of a union of closed spans; touching spans merge.
pub fn merge_closed(spans: impl IntoIterator<Item = Span>) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::new();
    for s in sorted(spans).into_iter().filter(|s| !s.is_empty_closed()) {
        match out.last_mut() {
            Some(last) if cmp_hi_lo(&last.hi, &s.lo) != Ordering::Less => {
                if cmp_hi(&s.hi, &last.hi) == Ordering::Greater {
                    last.hi = s.hi;
                }
            }
            _ => out.push(s),
        }
    }
    out
}

/// Complement of a merged open union, as merged closed spans (points included).
pub fn complement_of_open(merged: &[Span]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut cursor: Option<Option<Rational>> = Some(None);
    for s in merged {
        if let Some(start) = cursor.take() {
            if s.lo.is_some() {
                let piece = Span::new(start, s.lo.clone());
                if !piece.is_empty_closed() {
                    out.push(piece);
                }
            }
        }
        cursor = s.hi.clone().map(Some);
    }
    if let Some(start) = cursor {
        out.push(Span::new(start, None));
    }
    out
}

/// Complement of a merged closed union, as merged open spans.
pub fn complement_of_closed(merged: &[Span]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut cursor: Option<Option<Rational>> = Some(None);
    for s in merged {
        if let Some(start) = cursor.take() {
            if s.lo.is_some() {
                let piece = Span::new(start, s.lo.clone());
                if !piece.is_empty_open() {
                    out.push(piece);
                }
            }
        }
        cursor = s.hi.clone().map(Some);
    }
    if let Some(start) = cursor {
        out.push(Span::new(start, None));
    }
    out
}

/// Merges finite open intervals into disjoint sorted form.
pub fn merge_intervals(intervals: impl IntoIterator<Item = Interval>) -> Vec<Interval> {
    merge_open(intervals.into_iter().map(|i| i.span()))
        .into_iter()
        .map(|s| Interval {
            lo: s.lo.unwrap(),
            hi: s.hi.unwrap(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn fs(a: i64, b: i64) -> Span {
        Span::finite(r(a, 1), r(b, 1))
    }

    #[test]
    fn open_merge_keeps_touching_apart() {
        let m = merge_open(vec![fs(2, 3), fs(0, 1), fs(1, 2), fs(0, 2)]);
        assert_eq!(m, vec![fs(0, 2), fs(2, 3)]);
        let m = merge_open(vec![
            Span::new(None, Some(r(1, 1))),
            fs(0, 5),
            Span::new(Some(r(4, 1)), None),
        ]);
        assert_eq!(m, vec![Span::whole()]);
    }

    #[test]
    fn closed_merge_joins_touching() {
        let m = merge_closed(vec![fs(1, 2), fs(0, 1), Span::point(r(5, 1))]);
        assert_eq!(m, vec![fs(0, 2), Span::point(r(5, 1))]);
    }

    #[test]
    fn complements() {
        let open = merge_open(vec![fs(0, 1), fs(1, 2)]);
        let c = complement_of_open(&open);
        assert_eq!(
            c,
            vec![
                Span::new(None, Some(r(0, 1))),
                Span::point(r(1, 1)),
                Span::new(Some(r(2, 1)), None)
            ]
        );
        let back = complement_of_closed(&merge_closed(c));
        assert_eq!(back, open);
        assert_eq!(complement_of_open(&[Span::whole()]), vec![]);
        assert_eq!(complement_of_closed(&[]), vec![Span::whole()]);
    }
}
