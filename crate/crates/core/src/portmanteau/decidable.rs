//! Moduli on almost decidable sets, and limsup witnesses recovered from them.

use crate::error::{Error, Result};
use crate::kernel::{wit_to_mod, Answer, CauchyReal, LimsupWitness, Modulus, Rational};
use crate::measures::{
    almost_decidable_box, interval_enumeration, mass_closed, merge_closed, merge_open,
    AlmostDecidablePair, BoxInterval, CMeasure, Interval, Pi01Set, Span,
};

use super::provider::precision_below;
use super::WitnessProvider;

/// Radii tried per scale in [`closed_witness_from_ad`].
const RADIUS_TWEAKS: i64 = 8;

/// Scales `2^-j` tried in [`closed_witness_from_ad`].
const RADIUS_SCALES: u32 = 48;

/// Largest round of [`closed_witness_from_ad`]: `2^ROUNDS` intervals.
const ROUNDS: u32 = 24;

/// Modulus for `μ_n(A) -> μ(A)`, `A` almost decidable with pair `(U, V)`:
/// `μ_n(U) <= μ_n(A) <= μ_n(R \ V)` and both bounds converge to `μ(A)`.
pub fn ad_modulus(p: &WitnessProvider, a: &AlmostDecidablePair) -> Modulus {
    let g1 = p.for_open(&a.u);
    let closed = Pi01Set::from_complement(a.v.clone());
    let g2 = p.for_closed(&closed);
    let value = CauchyReal::from_squeeze(p.limit.mass_open(&a.u), mass_closed(&p.limit, &closed));
    wit_to_mod(&g1, &g2, &value)
}

fn disjoint_exact(iv: &Interval, closed: &[Span]) -> bool {
    closed.iter().all(|s| {
        let left_of = s.hi.as_ref().is_some_and(|h| *h <= iv.lo);
        let right_of = s.lo.as_ref().is_some_and(|l| *l >= iv.hi);
        left_of || right_of
    })
}

fn disjoint_by(iv: &Interval, c: &Pi01Set, stage: usize) -> bool {
    match c.exact_spans() {
        Some(spans) => disjoint_exact(iv, spans),
        None => c
            .complement()
            .merged_prefix(stage)
            .iter()
            .any(|u| u.lo <= iv.lo && iv.hi <= u.hi),
    }
}

/// `C_k`: the complement of the union of the first `count` enumerated
/// intervals certified disjoint from `C` by `stage`, as closed spans.
fn outer_approximation(c: &Pi01Set, count: u64, stage: usize) -> Vec<Span> {
    let removed = (0..count)
        .map(interval_enumeration)
        .filter(|iv| disjoint_by(iv, c, stage))
        .map(|iv| iv.span());
    crate::measures::complement_of_open(&merge_open(removed))
}

/// Closed `R`-neighbourhood of a union of closed spans.
fn neighbourhood(spans: &[Span], r: &Rational) -> Vec<Span> {
    merge_closed(
        spans
            .iter()
            .map(|s| Span::new(s.lo.as_ref().map(|l| l - r), s.hi.as_ref().map(|h| h + r))),
    )
}

fn boxes(spans: &[Span]) -> Vec<BoxInterval> {
    spans.iter().map(BoxInterval::from_span).collect()
}

/// Limsup witness for `μ_n(C)` from moduli on almost decidable sets.
///
/// For `r` in the right cut of `μ(C)`: round `m` removes from `R` the first
/// `2^m` enumerated rational intervals certified disjoint from `C`, giving a
/// closed `C_k ⊇ C`, until `μ(C_k) < r` is certified. Then radii
/// `R = 2^-j (1 + t/8)` are tried until the closed neighbourhood `B_R` of
/// `C_k` has no atom on its boundary and `μ(B_R) < r`; with
/// `2^-N0 < r - μ(B_R)` the answer is `adm(B_R)(N0)`, so that
/// `μ_n(C) <= μ_n(B_R) < r`. Each interval and each radius costs one unit.
pub fn closed_witness_from_ad(
    adm: impl Fn(&AlmostDecidablePair) -> Modulus + Send + Sync + 'static,
    mu: &CMeasure,
    c: &Pi01Set,
) -> Result<LimsupWitness> {
    if mu.atoms().is_none() {
        return Err(Error::NoAtomCertificate);
    }
    let (mu, c) = (mu.clone(), c.clone());
    let mass = mass_closed(&mu, &c);
    Ok(LimsupWitness::new(move |r, budget| {
        if c.known_empty() {
            return if r.is_positive() {
                Answer::Answered(0)
            } else {
                Answer::Pending
            };
        }
        crate::answered!(mass.cut_member(r, budget));
        let mut used = 0u64;
        for m in 0..=ROUNDS {
            let count = 1u64 << m;
            used = used.saturating_add(count);
            if used > budget {
                return Answer::Pending;
            }
            let ck = outer_approximation(&c, count, m as usize);
            let upper = mass_closed(&mu, &Pi01Set::from_closed_spans(ck.clone()).unwrap())
                .upper(m as usize);
            if upper >= *r {
                continue;
            }
            for j in 0..RADIUS_SCALES {
                for t in 0..RADIUS_TWEAKS {
                    used += 1;
                    if used > budget {
                        return Answer::Pending;
                    }
                    let radius =
                        crate::kernel::eps(j) * Rational::new(RADIUS_TWEAKS + t, RADIUS_TWEAKS);
                    let ball = neighbourhood(&ck, &radius);
                    let Ok(pair) = almost_decidable_box(&mu, &boxes(&ball)) else {
                        continue;
                    };
                    let upper = mass_closed(&mu, &Pi01Set::from_closed_spans(ball).unwrap())
                        .upper(m as usize + j as usize);
                    if upper < *r {
                        return adm(&pair).query(precision_below(&(r - upper)), budget);
                    }
                    break;
                }
            }
            return Answer::Pending;
        }
        Answer::Pending
    }))
}
