//! Sequences of exact measures whose weak limits come with analytic moduli.

use std::fmt;
use std::sync::Arc;

use super::{EWLimit, Formula, MeasureSeq};
use crate::error::{Error, Result};
use crate::functions::{BCFunction, RationalPolygonal};
use crate::kernel::{eps, gallop, Answer, Modulus, Rational};
use crate::measures::{complement_of_closed, CMeasure, ExactMeasure, Span};

/// Tests spent by threshold searches.
const SEARCH_TESTS: u64 = 256;

/// Prefix on which formula-driven families are validated.
const CHECKED_PREFIX: u64 = 256;

/// Past this index, tail gaps of families that shrink monotonically are
/// bounded by their value here.
const GAP_CUTOFF: u64 = 4096;

/// A sequence `μ_n` of exact measures with exact weak limit `μ` and explicit
/// convergence bounds.
pub trait Family: Send + Sync + fmt::Debug {
    /// `μ_n`.
    fn at(&self, n: u64) -> ExactMeasure;

    /// `μ`.
    fn limit(&self) -> ExactMeasure;

    /// A bound `e(n)` with `|∫ f dμ_m - ∫ f dμ| <= e(n)` for every `m >= n`;
    /// `k` is the precision handed to enclosures of `f`.
    fn tail_gap(&self, f: &BCFunction, n: u64, k: u32) -> Rational;

    /// For `r < μ(U)`, an `n0` with `μ_n(U) > r` for all `n >= n0`; `U` is a
    /// disjoint union of open spans. `None` otherwise.
    fn open_threshold(&self, u: &[Span], r: &Rational) -> Option<u64>;

    /// For `r > μ(C)`, an `n0` with `μ_n(C) < r` for all `n >= n0`; `C` is a
    /// disjoint union of closed spans. `None` otherwise.
    fn closed_threshold(&self, c: &[Span], r: &Rational) -> Option<u64>;
}

fn open_span_at<'a>(spans: &'a [Span], x: &Rational) -> Option<&'a Span> {
    spans.iter().find(|s| s.contains_open(x))
}

fn enclosure_width(f: &BCFunction, a: &Rational, b: &Rational, k: u32) -> Rational {
    let (lo, hi) = if a <= b {
        f.enclose(a, b, k)
    } else {
        f.enclose(b, a, k)
    };
    hi - lo
}

fn enclosure_abs(f: &BCFunction, a: &Rational, b: &Rational, k: u32) -> Rational {
    let (lo, hi) = f.enclose(a, b, k);
    Rational::max_of(&lo.abs(), &hi.abs()).clone()
}

/// First `n` answered by a galloping search, or `None`.
fn first(pred: impl FnMut(u64) -> bool) -> Option<u64> {
    gallop(pred, SEARCH_TESTS).ok()
}

/// `w δ_{x_n}` with `x_n = x + s/(n + 1)`, converging to `w δ_x`.
#[derive(Clone, Debug)]
pub struct ShiftingAtom {
    pub x: Rational,
    pub s: Rational,
    pub w: Rational,
}

impl ShiftingAtom {
    pub fn new(x: Rational, s: Rational, w: Rational) -> Result<ShiftingAtom> {
        if w.is_negative() {
            return Err(Error::InvalidArgument(format!("negative atom weight {w}")));
        }
        Ok(ShiftingAtom { x, s, w })
    }

    pub fn location(&self, n: u64) -> Rational {
        &self.x + &self.s / Rational::from(n + 1)
    }

    /// First `n` from which every `x_m` lies in the open span around `x`.
    fn entry(&self, span: &Span) -> u64 {
        let gap = if self.s.is_positive() {
            span.hi.as_ref().map(|h| h - &self.x)
        } else if self.s.is_negative() {
            span.lo.as_ref().map(|l| &self.x - l)
        } else {
            None
        };
        match gap {
            Some(g) => (self.s.abs() / g).floor_i64() as u64,
            None => 0,
        }
    }
}

impl Family for ShiftingAtom {
    fn at(&self, n: u64) -> ExactMeasure {
        ExactMeasure::atom(self.location(n), self.w.clone()).unwrap()
    }

    fn limit(&self) -> ExactMeasure {
        ExactMeasure::atom(self.x.clone(), self.w.clone()).unwrap()
    }

    fn tail_gap(&self, f: &BCFunction, n: u64, k: u32) -> Rational {
        &self.w * enclosure_width(f, &self.x, &self.location(n), k)
    }

    fn open_threshold(&self, u: &[Span], r: &Rational) -> Option<u64> {
        if r.is_negative() {
            return Some(0);
        }
        let span = open_span_at(u, &self.x)?;
        (*r < self.w).then(|| self.entry(span))
    }

    fn closed_threshold(&self, c: &[Span], r: &Rational) -> Option<u64> {
        if *r > self.w {
            return Some(0);
        }
        if !r.is_positive() || c.iter().any(|s| s.contains_closed(&self.x)) {
            return None;
        }
        let gaps = complement_of_closed(c);
        Some(self.entry(open_span_at(&gaps, &self.x)?))
    }
}

/// `w` times the uniform probability on `[x, x + s 2^-n]`, converging to `w δ_x`.
#[derive(Clone, Debug)]
pub struct CollapsingUniform {
    pub x: Rational,
    pub s: Rational,
    pub w: Rational,
}

impl CollapsingUniform {
    pub fn new(x: Rational, s: Rational, w: Rational) -> Result<CollapsingUniform> {
        if !s.is_positive() || w.is_negative() {
            return Err(Error::InvalidArgument(format!(
                "collapsing uniform needs s > 0 and w >= 0, got s = {s}, w = {w}"
            )));
        }
        Ok(CollapsingUniform { x, s, w })
    }

    fn right_end(&self, n: u64) -> Rational {
        &self.x + &self.s * Rational::pow2(-(n as i64))
    }

    fn entry(&self, span: &Span) -> Option<u64> {
        match &span.hi {
            None => Some(0),
            Some(h) => first(|n| self.right_end(n) < *h),
        }
    }
}

impl Family for CollapsingUniform {
    fn at(&self, n: u64) -> ExactMeasure {
        let width = &self.s * Rational::pow2(-(n as i64));
        let density = RationalPolygonal::constant(&self.w / &width);
        ExactMeasure::density(density, self.x.clone(), self.right_end(n)).unwrap()
    }

    fn limit(&self) -> ExactMeasure {
        ExactMeasure::atom(self.x.clone(), self.w.clone()).unwrap()
    }

    fn tail_gap(&self, f: &BCFunction, n: u64, k: u32) -> Rational {
        &self.w * enclosure_width(f, &self.x, &self.right_end(n.min(GAP_CUTOFF)), k)
    }

    fn open_threshold(&self, u: &[Span], r: &Rational) -> Option<u64> {
        if r.is_negative() {
            return Some(0);
        }
        let span = open_span_at(u, &self.x)?;
        if *r >= self.w {
            return None;
        }
        self.entry(span)
    }

    fn closed_threshold(&self, c: &[Span], r: &Rational) -> Option<u64> {
        if *r > self.w {
            return Some(0);
        }
        if !r.is_positive() || c.iter().any(|s| s.contains_closed(&self.x)) {
            return None;
        }
        let gaps = complement_of_closed(c);
        self.entry(open_span_at(&gaps, &self.x)?)
    }
}

/// Lebesgue measure on `[0, q_n]` converging to Lebesgue measure on `[0, L]`.
///
/// Requires `q_n >= 0`, `|q_n - L|` nonincreasing, and `q_n - L` of one
/// sign; these are checked on a finite prefix when the family is built.
#[derive(Clone, Debug)]
pub struct TruncatedLebesgue {
    pub q: Formula,
    pub limit: Rational,
    below: Option<bool>,
}

impl TruncatedLebesgue {
    pub fn new(q: Formula, limit: Rational) -> Result<TruncatedLebesgue> {
        if limit.is_negative() {
            return Err(Error::InvalidArgument(format!(
                "negative truncation limit {limit}"
            )));
        }
        let mut prev: Option<Rational> = None;
        let (mut below, mut above) = (false, false);
        for n in 0..=CHECKED_PREFIX {
            let v = q.eval(n)?;
            if v.is_negative() {
                return Err(Error::InvalidArgument(format!("q_{n} = {v} is negative")));
            }
            below |= v < limit;
            above |= v > limit;
            let e = (&v - &limit).abs();
            if prev.as_ref().is_some_and(|p| e > *p) {
                return Err(Error::InvalidArgument(format!(
                    "|q_n - {limit}| increases at n = {n}"
                )));
            }
            prev = Some(e);
        }
        if below && above {
            return Err(Error::InvalidArgument(format!(
                "q_n crosses the limit {limit}"
            )));
        }
        let below = (below || above).then_some(below);
        Ok(TruncatedLebesgue { q, limit, below })
    }

    fn q_at(&self, n: u64) -> Rational {
        self.q
            .eval(n)
            .unwrap_or_else(|e| panic!("q_n undefined at n = {n}: {e}"))
    }

    /// Upper bound on `|q_n - limit|`, which is assumed nonincreasing.
    fn distance(&self, n: u64) -> Rational {
        (self.q_at(n.min(GAP_CUTOFF)) - &self.limit).abs()
    }

    fn lebesgue(hi: Rational) -> ExactMeasure {
        ExactMeasure::density(
            RationalPolygonal::constant(Rational::one()),
            Rational::zero(),
            hi,
        )
        .unwrap()
    }
}

impl Family for TruncatedLebesgue {
    fn at(&self, n: u64) -> ExactMeasure {
        TruncatedLebesgue::lebesgue(self.q_at(n))
    }

    fn limit(&self) -> ExactMeasure {
        TruncatedLebesgue::lebesgue(self.limit.clone())
    }

    fn tail_gap(&self, f: &BCFunction, n: u64, k: u32) -> Rational {
        let e = self.distance(n);
        if e.is_zero() {
            return e;
        }
        let (lo, hi) = match self.below {
            Some(true) => (&self.limit - &e, self.limit.clone()),
            Some(false) => (self.limit.clone(), &self.limit + &e),
            None => (&self.limit - &e, &self.limit + &e),
        };
        e * enclosure_abs(f, &lo, &hi, k)
    }

    fn open_threshold(&self, u: &[Span], r: &Rational) -> Option<u64> {
        if r.is_negative() {
            return Some(0);
        }
        let a = self.limit().mass_open(u);
        if *r >= a {
            return None;
        }
        let margin = a - r;
        first(|n| self.distance(n) < margin)
    }

    fn closed_threshold(&self, c: &[Span], r: &Rational) -> Option<u64> {
        let a = self.limit().mass_closed(c);
        if *r <= a {
            return None;
        }
        let margin = r - a;
        first(|n| self.distance(n) < margin)
    }
}

/// `μ_n = μ` for all `n`.
#[derive(Clone, Debug)]
pub struct Constant(pub ExactMeasure);

impl Family for Constant {
    fn at(&self, _n: u64) -> ExactMeasure {
        self.0.clone()
    }

    fn limit(&self) -> ExactMeasure {
        self.0.clone()
    }

    fn tail_gap(&self, _f: &BCFunction, _n: u64, _k: u32) -> Rational {
        Rational::zero()
    }

    fn open_threshold(&self, u: &[Span], r: &Rational) -> Option<u64> {
        (*r < self.0.mass_open(u)).then_some(0)
    }

    fn closed_threshold(&self, c: &[Span], r: &Rational) -> Option<u64> {
        (*r > self.0.mass_closed(c)).then_some(0)
    }
}

/// `Σ w_j μ^j_n` with nonnegative weights.
#[derive(Clone, Debug)]
pub struct Mixture {
    parts: Vec<(Arc<dyn Family>, Rational)>,
}

impl Mixture {
    pub fn new(parts: Vec<(Arc<dyn Family>, Rational)>) -> Result<Mixture> {
        if let Some((_, w)) = parts.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::InvalidArgument(format!(
                "negative mixture weight {w}"
            )));
        }
        Ok(Mixture {
            parts: parts.into_iter().filter(|(_, w)| w.is_positive()).collect(),
        })
    }

    fn weight(&self) -> Rational {
        self.parts.iter().map(|(_, w)| w.clone()).sum()
    }

    /// Splits the margin `m` evenly: component `j` gets `a_j ± m / W`, so
    /// the weighted thresholds sum to `a ± m`.
    fn split(
        &self,
        a: impl Fn(&dyn Family) -> Rational,
        shift: &Rational,
        threshold: impl Fn(&dyn Family, &Rational) -> Option<u64>,
    ) -> Option<u64> {
        let mut n0 = 0;
        for (fam, _) in &self.parts {
            let rj = a(fam.as_ref()) + shift;
            n0 = n0.max(threshold(fam.as_ref(), &rj)?);
        }
        Some(n0)
    }
}

impl Family for Mixture {
    fn at(&self, n: u64) -> ExactMeasure {
        ExactMeasure::sum(self.parts.iter().map(|(f, w)| f.at(n).scale(w)))
    }

    fn limit(&self) -> ExactMeasure {
        ExactMeasure::sum(self.parts.iter().map(|(f, w)| f.limit().scale(w)))
    }

    fn tail_gap(&self, f: &BCFunction, n: u64, k: u32) -> Rational {
        self.parts
            .iter()
            .map(|(fam, w)| w * fam.tail_gap(f, n, k))
            .sum()
    }

    fn open_threshold(&self, u: &[Span], r: &Rational) -> Option<u64> {
        if r.is_negative() {
            return Some(0);
        }
        let a = self.limit().mass_open(u);
        if *r >= a {
            return None;
        }
        let shift = -((a - r) / self.weight());
        self.split(
            |f| f.limit().mass_open(u),
            &shift,
            |f, rj| f.open_threshold(u, rj),
        )
    }

    fn closed_threshold(&self, c: &[Span], r: &Rational) -> Option<u64> {
        let a = self.limit().mass_closed(c);
        if *r <= a {
            return None;
        }
        if self.parts.is_empty() {
            return Some(0);
        }
        let shift = (r - a) / self.weight();
        self.split(
            |f| f.limit().mass_closed(c),
            &shift,
            |f, rj| f.closed_threshold(c, rj),
        )
    }
}

/// The weak limit of a family with moduli read off its tail gaps:
/// `g_f(k)` is the first `n` found with `e(n) < 2^-k`.
pub fn family_ewlimit(fam: Arc<dyn Family>) -> EWLimit {
    let f2 = fam.clone();
    let seq = MeasureSeq::new(move |n| CMeasure::from_exact(f2.at(n)));
    let limit = CMeasure::from_exact(fam.limit());
    EWLimit::new(seq, limit, move |f: &BCFunction, _b| {
        let (fam, f) = (fam.clone(), f.clone());
        Modulus::new(move |k, budget| {
            let target = eps(k);
            match gallop(
                |n| fam.tail_gap(&f, n, k + 3) < target,
                budget.min(SEARCH_TESTS),
            ) {
                Answer::Answered(n) => Answer::Answered(n),
                Answer::Pending => Answer::Pending,
            }
        })
    })
}
