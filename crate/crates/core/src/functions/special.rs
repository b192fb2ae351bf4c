//! Cut-off, tent, normalisation and indicator-approximation functions.

use super::{polygonal_as_bcf, BCFunction, BcfImpl, RationalPolygonal};
use crate::kernel::{eps, Rational};
use crate::measures::{Interval, Sigma01Set};

/// `w_{a,k}`: `0` on `[-a, a]`, linear ramps to `1` on `[a, a + 2^-k]` and
/// `[-a - 2^-k, -a]`, `1` outside.
pub fn w_function(a: u64, k: u32) -> RationalPolygonal {
    assert!(a >= 1, "w_function needs a >= 1");
    let a = Rational::from(a);
    let b = &a + eps(k);
    let (zero, one) = (Rational::zero(), Rational::one());
    RationalPolygonal::from_sorted(
        vec![-&b, -&a, a, b],
        vec![one.clone(), zero.clone(), zero, one],
    )
}

/// `T_a`: `1` on `[-a, a]`, linear to `0` at `±(a + 1)`, `0` outside.
pub fn tent_function(a: u64) -> RationalPolygonal {
    assert!(a >= 1, "tent_function needs a >= 1");
    let a = Rational::from(a);
    let b = &a + Rational::one();
    let (zero, one) = (Rational::zero(), Rational::one());
    RationalPolygonal::from_sorted(
        vec![-&b, -&a, a, b],
        vec![zero.clone(), one.clone(), one, zero],
    )
}

/// Scale and offset of the normalisation `h = s * f + o` for bound `b`.
fn h_coefficients(b: u64) -> (Rational, Rational) {
    let s = Rational::new(1, 2 * (b as i64 + 1));
    (s, Rational::new(1, 2))
}

/// `h = (f + B + 1) / (2(B + 1))`, which lies strictly between `0` and `1` when `|f| <= B`.
pub fn normalize_h(f: &BCFunction, b: u64) -> BCFunction {
    let (s, o) = h_coefficients(b);
    if let Some(p) = f.as_polygonal() {
        return polygonal_as_bcf(p.affine(&s, &o));
    }
    BCFunction::new(Normalized {
        f: f.clone(),
        s,
        o,
        shift: (2 * (b + 1)).ilog2(),
    })
}

/// Inverse of [`normalize_h`]: `f = 2(B + 1) h - (B + 1)`.
pub fn denormalize_h(h_value: &Rational, b: u64) -> Rational {
    let b1 = Rational::from(b + 1);
    Rational::int(2) * &b1 * h_value - b1
}

struct Normalized {
    f: BCFunction,
    s: Rational,
    o: Rational,
    shift: u32,
}

impl BcfImpl for Normalized {
    fn approx(&self, q: &Rational, k: u32) -> Rational {
        &self.s * self.f.approx(q, k) + &self.o
    }

    fn bound(&self) -> u64 {
        1
    }

    fn cont_mod(&self, a: u64, k: u32) -> u32 {
        self.f.cont_mod(a, k.saturating_sub(self.shift))
    }

    fn enclose(&self, c: &Rational, d: &Rational, k: u32) -> (Rational, Rational) {
        let (lo, hi) = self.f.enclose(c, d, k);
        (&self.s * lo + &self.o, &self.s * hi + &self.o)
    }
}

/// Trapezoid that is `1` on `[c + δ, d - δ]`, `0` outside `(c, d)`, with
/// `δ = min(2^-k, (d - c)/4)`.
pub fn trapezoid(iv: &Interval, k: u32) -> RationalPolygonal {
    let quarter = iv.len() / Rational::int(4);
    let delta = Rational::min_of(&eps(k), &quarter).clone();
    let (zero, one) = (Rational::zero(), Rational::one());
    RationalPolygonal::from_sorted(
        vec![
            iv.lo.clone(),
            &iv.lo + &delta,
            &iv.hi - &delta,
            iv.hi.clone(),
        ],
        vec![zero.clone(), one.clone(), one, zero],
    )
}

/// Pointwise maximum of the trapezoids of `intervals` at shrink level `k`.
pub fn trapezoid_max(intervals: &[Interval], k: u32) -> RationalPolygonal {
    intervals
        .iter()
        .map(|iv| trapezoid(iv, k))
        .fold(RationalPolygonal::constant(Rational::zero()), |acc, t| {
            acc.pointwise_max(&t)
        })
}

/// `t_k`: maximum of trapezoids over the first `k` enumerated intervals of `U`.
/// Non-decreasing in `k` with supremum `1_U`.
pub fn indicator_approx(u: &Sigma01Set, k: u32) -> RationalPolygonal {
    trapezoid_max(&u.first_intervals(k as usize), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Span;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn grid(lo: i64, hi: i64, den: i64) -> impl Iterator<Item = Rational> {
        (lo * den..=hi * den).map(move |n| Rational::new(n, den))
    }

    #[test]
    fn w_values() {
        let w = w_function(2, 0);
        for x in grid(-2, 2, 16) {
            assert_eq!(w.eval(&x), r(0, 1));
        }
        assert_eq!(w.eval(&r(3, 1)), r(1, 1));
        assert_eq!(w_function(1, 2).eval(&(r(1, 1) + eps(3))), r(1, 2));
    }

    #[test]
    fn tent_values() {
        let t = tent_function(1);
        assert_eq!(t.eval(&r(0, 1)), r(1, 1));
        assert_eq!(t.eval(&r(2, 1)), r(0, 1));
        assert_eq!(t.eval(&r(3, 2)), r(1, 2));
    }

    #[test]
    fn sandwiches() {
        let ind = |b: bool| if b { Rational::one() } else { Rational::zero() };
        for a in 1..=8u64 {
            let (w, t) = (w_function(a, 0), tent_function(a));
            let (ar, a1) = (Rational::from(a), Rational::from(a + 1));
            for x in grid(-(a as i64) - 3, a as i64 + 3, 32) {
                let in_a = x.abs() <= ar;
                let in_a1 = x.abs() <= a1;
                let wv = w.eval(&x);
                assert!(ind(!in_a1) <= wv && wv <= ind(!in_a), "w a={a} x={x}");
                let tv = t.eval(&x);
                assert!(ind(in_a) <= tv && tv <= ind(in_a1), "T a={a} x={x}");
            }
        }
    }

    #[test]
    fn normalisation() {
        let zero = polygonal_as_bcf(RationalPolygonal::constant(r(0, 1)));
        assert_eq!(normalize_h(&zero, 1).approx(&r(7, 3), 0), r(1, 2));
        let top = polygonal_as_bcf(RationalPolygonal::constant(r(3, 1)));
        assert_eq!(normalize_h(&top, 3).approx(&r(0, 1), 0), r(7, 8));
        let clamp = polygonal_as_bcf(
            RationalPolygonal::new(vec![(r(-1, 1), r(-1, 1)), (r(1, 1), r(1, 1))]).unwrap(),
        );
        let h = normalize_h(&clamp, 1);
        assert_eq!(h.approx(&r(1, 1), 0), r(3, 4));
        for x in grid(-2, 2, 8) {
            let hv = h.approx(&x, 0);
            assert!(hv.is_positive() && hv < Rational::one());
            assert_eq!(denormalize_h(&hv, 1), clamp.approx(&x, 0));
        }
        let g = normalize_h(&clamp.opaque(), 1);
        assert!(g.as_polygonal().is_none());
        assert!((g.approx(&r(1, 2), 4) - r(5, 8)).abs() <= eps(4));
        assert!(g.cont_mod(2, 5) >= 3);
    }

    #[test]
    fn indicator_shapes() {
        let u = Sigma01Set::from_spans(vec![Span::finite(r(0, 1), r(1, 1))]).unwrap();
        let t = indicator_approx(&u, 3);
        assert_eq!(t.eval(&r(1, 2)), r(1, 1));
        assert_eq!(t.eval(&r(0, 1)), r(0, 1));
        assert_eq!(
            indicator_approx(&Sigma01Set::empty(), 5),
            RationalPolygonal::constant(r(0, 1))
        );
        assert_eq!(indicator_approx(&u, 0).eval(&r(1, 2)), r(0, 1));
    }

    #[test]
    fn indicator_monotone_and_dominated() {
        let u = Sigma01Set::from_spans(vec![
            Span::finite(r(1, 4), r(1, 2)),
            Span::finite(r(3, 4), r(2, 1)),
            Span::new(Some(r(3, 1)), None),
        ])
        .unwrap();
        let exact = u.exact_spans().unwrap().to_vec();
        for k in 0..8u32 {
            let (a, b) = (indicator_approx(&u, k), indicator_approx(&u, k + 1));
            for x in grid(-1, 6, 64) {
                let inside = exact.iter().any(|s| s.contains_open(&x));
                assert!(a.eval(&x) <= b.eval(&x), "k={k} x={x}");
                assert!(
                    b.eval(&x)
                        <= if inside {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                );
            }
        }
    }
}
