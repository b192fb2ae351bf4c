//! Open superlevel sets `{f > t}` and closed superlevel sets `{f >= t}`.

use std::collections::VecDeque;

use super::interval::complement_of_open;
use super::{Interval, Pi01Set, Sigma01Set, Stage};
use crate::functions::{BCFunction, BcfImpl};
use crate::kernel::Rational;

/// Cells examined per stage are `CELLS_PER_STAGE * (s + 1)`.
const CELLS_PER_STAGE: usize = 16;

/// `{x : f(x) > t}`.
///
/// Polygonal `f` gives the exact spans. Otherwise cells of a dyadic bisection
/// tree over a growing window are examined lowest level first; a cell `[c, d]`
/// is emitted as `(c - δ, d + δ)`, `δ = (d - c)/4`, once the enclosure on the
/// widened cell lies above `t`, and dropped once the enclosure on the cell
/// lies at or below `t`.
pub fn superlevel_open(f: &BCFunction, t: &Rational) -> Sigma01Set {
    if *t >= Rational::from(f.bound()) {
        return Sigma01Set::empty();
    }
    if let Some(p) = f.as_polygonal() {
        return Sigma01Set::from_spans(p.superlevel(t)).unwrap();
    }
    let (f, t) = (f.clone(), t.clone());
    // (left end, level): the cell is [c, c + 2^-level]
    let mut queue: VecDeque<(Rational, u32)> =
        VecDeque::from([(Rational::int(-1), 0), (Rational::zero(), 0)]);
    let mut fresh: Vec<(Rational, u32)> = Vec::new();
    Sigma01Set::from_stages(move |s| {
        if s > 0 {
            let r = s as i64;
            fresh.push((Rational::int(-r - 1), 0));
            fresh.push((Rational::int(r), 0));
        }
        // lowest level first: new unit cells jump the queue
        for cell in fresh.drain(..).rev() {
            queue.push_front(cell);
        }
        let mut out = Vec::new();
        let mut children = Vec::new();
        for _ in 0..CELLS_PER_STAGE * (s + 1) {
            let Some((c, level)) = queue.pop_front() else {
                break;
            };
            let w = Rational::pow2(-(level as i64));
            let d = &c + &w;
            let delta = &w / Rational::int(4);
            let k = level + 3;
            let (lo, _) = f.enclose(&(&c - &delta), &(&d + &delta), k);
            if lo > t {
                out.push(Interval::new(&c - &delta, &d + &delta));
                continue;
            }
            let (_, hi) = f.enclose(&c, &d, k);
            if hi <= t {
                continue;
            }
            let mid = Rational::midpoint(&c, &d);
            children.push((c, level + 1));
            children.push((mid, level + 1));
        }
        queue.extend(children);
        Stage::More(out)
    })
}

/// `{x : f(x) >= t}`, with complement `{-f > -t}`.
pub fn closed_superlevel(f: &BCFunction, t: &Rational) -> Pi01Set {
    let b = Rational::from(f.bound());
    if *t > b {
        return Pi01Set::empty();
    }
    if *t <= -&b {
        return Pi01Set::whole();
    }
    if let Some(p) = f.as_polygonal() {
        let below = p.sublevel(t);
        let closed = complement_of_open(&below);
        return Pi01Set::from_closed_spans(closed).unwrap();
    }
    Pi01Set::from_complement(superlevel_open(&BCFunction::new(Negated(f.clone())), &-t))
}

struct Negated(BCFunction);

impl BcfImpl for Negated {
    fn approx(&self, q: &Rational, k: u32) -> Rational {
        -self.0.approx(q, k)
    }

    fn bound(&self) -> u64 {
        self.0.bound()
    }

    fn cont_mod(&self, a: u64, k: u32) -> u32 {
        self.0.cont_mod(a, k)
    }

    fn enclose(&self, c: &Rational, d: &Rational, k: u32) -> (Rational, Rational) {
        let (lo, hi) = self.0.enclose(c, d, k);
        (-hi, -lo)
    }
}
