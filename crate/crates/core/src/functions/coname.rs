//! Compact-open names: enumerations of pairs `(I, J)` with `f[I] ⊆ J`.

use std::fmt;

use super::{BCFunction, RationalPolygonal};
use crate::kernel::{eps, Answer, CauchyReal, Rational};

/// A compact rational interval `I = [lo, hi]` and an open rational interval
/// `J = (j_lo, j_hi)` with `f[I] ⊆ J`.
#[derive(Clone, PartialEq, Eq)]
pub struct CoPair {
    pub lo: Rational,
    pub hi: Rational,
    pub j_lo: Rational,
    pub j_hi: Rational,
}

impl CoPair {
    pub fn j_width(&self) -> Rational {
        &self.j_hi - &self.j_lo
    }

    pub fn j_mid(&self) -> Rational {
        Rational::midpoint(&self.j_lo, &self.j_hi)
    }
}

impl fmt::Debug for CoPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "([{}, {}] -> ({}, {}))",
            self.lo, self.hi, self.j_lo, self.j_hi
        )
    }
}

/// Compact-open name of a bounded continuous function.
///
/// Stage `d` lists, for each level `ℓ = 0..=d`, the grid cells
/// `[j 2^-(ℓ+1), j 2^-(ℓ+1) + 2^-ℓ]` contained in `[-(d+1), d+1]`, in
/// increasing `j`. A cell is paired with its enclosure widened by
/// `2^-(d+2)` on both sides. Every listed pair is valid, and for every grid
/// cell `I` and open `J ⊇ f[I]` some later stage lists `(I, J')` with `J' ⊆ J`.
#[derive(Clone)]
pub struct COName {
    f: BCFunction,
}

/// Compact-open name of `f`.
pub fn co_name_of(f: &BCFunction) -> COName {
    COName { f: f.clone() }
}

impl COName {
    /// The grid cell of index `j` at `level`.
    pub fn cell(level: u32, j: i64) -> (Rational, Rational) {
        let lo = Rational::from(j) * Rational::pow2(-(level as i64) - 1);
        let hi = &lo + Rational::pow2(-(level as i64));
        (lo, hi)
    }

    /// Inclusive range of `j` listed at `stage` for `level`.
    pub fn j_range(stage: u32, level: u32) -> (i64, i64) {
        let scale = 1i64 << (level + 1);
        let r = stage as i64 + 1;
        (-r * scale, r * scale - 2)
    }

    /// The pair listed at `stage` for cell `(level, j)`; `level <= stage` and
    /// `j` must lie in [`j_range`](Self::j_range).
    pub fn lookup(&self, level: u32, j: i64, stage: u32) -> CoPair {
        debug_assert!(level <= stage);
        let (lo, hi) = COName::cell(level, j);
        let (flo, fhi) = self.f.enclose(&lo, &hi, stage + 2);
        let eta = eps(stage + 2);
        CoPair {
            j_lo: flo - &eta,
            j_hi: fhi + &eta,
            lo,
            hi,
        }
    }

    /// The enumeration in order.
    pub fn iter(&self) -> impl Iterator<Item = CoPair> + '_ {
        (0u32..).flat_map(move |d| {
            (0..=d).flat_map(move |l| {
                let (a, b) = COName::j_range(d, l);
                (a..=b).map(move |j| self.lookup(l, j, d))
            })
        })
    }

    /// Position of `(level, j)` at `stage` in the enumeration.
    pub fn index_of(level: u32, j: i64, stage: u32) -> u64 {
        let mut idx = 0u64;
        for d in 0..stage {
            for l in 0..=d {
                let (a, b) = COName::j_range(d, l);
                idx += (b - a + 1) as u64;
            }
        }
        for l in 0..level {
            let (a, b) = COName::j_range(stage, l);
            idx += (b - a + 1) as u64;
        }
        idx + (j - COName::j_range(stage, level).0) as u64
    }

    pub fn function(&self) -> &BCFunction {
        &self.f
    }
}

impl fmt::Debug for COName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "COName({:?})", self.f)
    }
}

/// `f(x)` to within `2^-k` from a name: stage by stage, take the cell at
/// each level whose interior certifiably contains `x` and return the
/// midpoint of the first `J` narrower than `2^-k`. The budget counts lookups.
pub fn eval_from_co_name(rho: &COName, x: &CauchyReal, k: u32, budget: u64) -> Answer<Rational> {
    let target = eps(k);
    let mut used = 0u64;
    for d in 0u32.. {
        for l in 0..=d {
            if used >= budget {
                return Answer::Pending;
            }
            let q = x.approx(l + 3);
            let j = ((&q - eps(l + 2)) * Rational::pow2(l as i64 + 1)).floor_i64();
            let (a, b) = COName::j_range(d, l);
            if j < a || j > b {
                continue;
            }
            used += 1;
            let p = rho.lookup(l, j, d);
            if p.j_width() < target {
                return Answer::Answered(p.j_mid());
            }
        }
    }
    unreachable!()
}

/// Polygonal `ψ` with `|f - ψ| < ε` on `[-a, a]`.
///
/// Unit cells covering `[-a, a]` are bisected until each cell's `J` is
/// narrower than `ε/2`. Vertices sit at cell endpoints, valued at the
/// midpoint of `J` of the cell to their right (the last one to its left),
/// which keeps the error below `3ε/4`. The budget counts lookups.
pub fn polygonal_approx(
    rho: &COName,
    a: u64,
    epsilon: &Rational,
    budget: u64,
) -> Answer<RationalPolygonal> {
    assert!(
        epsilon.is_positive(),
        "polygonal_approx needs a positive tolerance"
    );
    let half = epsilon / Rational::int(2);
    let d0 = (Rational::int(8) / epsilon).ceil_log2().max(0) as u32;
    let d0 = d0.max(a as u32);
    let mut todo: Vec<(u32, i64)> = (-(a as i64)..a as i64)
        .rev()
        .map(|c| (0u32, 2 * c))
        .collect();
    let mut accepted: Vec<CoPair> = Vec::new();
    let mut used = 0u64;
    while let Some((l, j)) = todo.pop() {
        if used >= budget {
            return Answer::Pending;
        }
        used += 1;
        let p = rho.lookup(l, j, d0.max(l));
        if p.j_width() < half {
            accepted.push(p);
        } else {
            // children in left-to-right order on the stack
            todo.push((l + 1, 2 * j + 2));
            todo.push((l + 1, 2 * j));
        }
    }
    if accepted.is_empty() {
        let p = rho.lookup(0, -1, d0);
        return Answer::Answered(RationalPolygonal::constant(p.j_mid()));
    }
    let mut xs = Vec::with_capacity(accepted.len() + 1);
    let mut ys = Vec::with_capacity(accepted.len() + 1);
    for p in &accepted {
        xs.push(p.lo.clone());
        ys.push(p.j_mid());
    }
    let last = accepted.last().unwrap();
    xs.push(last.hi.clone());
    ys.push(last.j_mid());
    Answer::Answered(RationalPolygonal::from_sorted(xs, ys).simplified())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{polygonal_as_bcf, tent_function};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn clamp01() -> RationalPolygonal {
        RationalPolygonal::new(vec![(r(0, 1), r(0, 1)), (r(1, 1), r(1, 1))]).unwrap()
    }

    #[test]
    fn enumeration_is_sound_and_indexed() {
        let p = clamp01();
        let rho = co_name_of(&polygonal_as_bcf(p.clone()));
        let mut listed = rho.iter();
        let mut counter = 0u64;
        for d in 0..4u32 {
            for l in 0..=d {
                let (a, b) = COName::j_range(d, l);
                for j in a..=b {
                    let pair = listed.next().unwrap();
                    assert_eq!(pair, rho.lookup(l, j, d));
                    assert_eq!(COName::index_of(l, j, d), counter);
                    let (lo, hi) = p.enclose(&pair.lo, &pair.hi);
                    assert!(pair.j_lo < lo && hi < pair.j_hi, "{pair:?}");
                    assert!(
                        pair.lo >= Rational::int(-(d as i64) - 1)
                            && pair.hi <= Rational::int(d as i64 + 1)
                    );
                    counter += 1;
                }
            }
        }
    }

    #[test]
    fn named_examples() {
        let zero = co_name_of(&polygonal_as_bcf(RationalPolygonal::constant(r(0, 1))));
        let p = zero.lookup(2, 3, 4);
        assert_eq!((p.j_lo, p.j_hi), (-eps(6), eps(6)));

        let clamp = co_name_of(&polygonal_as_bcf(clamp01()));
        let p = clamp.lookup(2, 0, 2);
        assert_eq!((p.lo.clone(), p.hi.clone()), (r(0, 1), r(1, 4)));
        assert!(p.j_lo >= r(-1, 8) && p.j_hi <= r(3, 8));

        let tent = co_name_of(&polygonal_as_bcf(tent_function(1)));
        let p = tent.lookup(0, -1, 3);
        assert_eq!((p.lo.clone(), p.hi.clone()), (r(-1, 2), r(1, 2)));
        assert!(p.j_lo >= r(1, 2) && p.j_hi <= r(3, 2));
    }

    #[test]
    fn evaluation() {
        let five = co_name_of(&polygonal_as_bcf(RationalPolygonal::constant(r(5, 1))));
        let x = CauchyReal::new(|k| r(1, 3) + eps(k + 1));
        let v = eval_from_co_name(&five, &x, 3, 1000).ok().unwrap();
        assert!((v - r(5, 1)).abs() <= r(1, 8));
        let clamp = co_name_of(&polygonal_as_bcf(clamp01()));
        let v = eval_from_co_name(&clamp, &CauchyReal::from_rational(r(1, 2)), 4, 1000)
            .ok()
            .unwrap();
        assert!((v - r(1, 2)).abs() <= r(1, 16));
        assert_eq!(eval_from_co_name(&clamp, &x, 4, 0), Answer::Pending);
        let opaque = co_name_of(&polygonal_as_bcf(clamp01()).opaque());
        let v = eval_from_co_name(&opaque, &CauchyReal::from_rational(r(2, 3)), 6, 10_000)
            .ok()
            .unwrap();
        assert!((v - r(2, 3)).abs() <= eps(6));
    }

    fn sup_error(f: &RationalPolygonal, psi: &RationalPolygonal, a: i64) -> Rational {
        (-a * 256..=a * 256)
            .map(|n| Rational::new(n, 256))
            .map(|x| (f.eval(&x) - psi.eval(&x)).abs())
            .max()
            .unwrap()
    }

    #[test]
    fn polygonal_approximation() {
        let f = clamp01();
        let psi = polygonal_approx(
            &co_name_of(&polygonal_as_bcf(f.clone())),
            2,
            &r(1, 8),
            10_000,
        )
        .ok()
        .unwrap();
        assert!(sup_error(&f, &psi, 2) < r(1, 8));

        let c = RationalPolygonal::constant(r(7, 3));
        let psi = polygonal_approx(
            &co_name_of(&polygonal_as_bcf(c.clone())),
            2,
            &r(1, 8),
            10_000,
        )
        .ok()
        .unwrap();
        assert!(psi.ys().iter().all(|y| (y - r(7, 3)).abs() < r(1, 8)));

        let t = tent_function(1);
        let psi = polygonal_approx(
            &co_name_of(&polygonal_as_bcf(t.clone())),
            3,
            &r(1, 16),
            10_000,
        )
        .ok()
        .unwrap();
        assert!(sup_error(&t, &psi, 3) < r(1, 16));

        let opaque = co_name_of(&polygonal_as_bcf(t.clone()).opaque());
        let psi = polygonal_approx(&opaque, 3, &r(1, 16), 1_000_000)
            .ok()
            .unwrap();
        assert!(sup_error(&t, &psi, 3) < r(1, 16));
        assert_eq!(polygonal_approx(&opaque, 3, &r(1, 16), 3), Answer::Pending);
    }
}
