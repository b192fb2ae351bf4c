//! Bounded continuous functions presented by rational approximation, a bound and a
//! modulus of continuity.

use std::fmt;
use std::sync::Arc;

use super::RationalPolygonal;
use crate::kernel::{eps, Rational};

/// Evaluation descriptor of a bounded continuous `f: R -> R`.
///
/// Contract:
/// * `|approx(q, k) - f(q)| <= 2^-k`;
/// * `|f| <= bound()`;
/// * for `x, y` in `[-a, a]`, `|x - y| <= 2^-cont_mod(a, k)` implies `|f(x) - f(y)| <= 2^-k`.
pub trait BcfImpl: Send + Sync {
    fn approx(&self, q: &Rational, k: u32) -> Rational;

    fn bound(&self) -> u64;

    fn cont_mod(&self, a: u64, k: u32) -> u32;

    /// Rational `(lo, hi)` with `lo <= f <= hi` on `[c, d]`, and `hi - lo` at most
    /// the oscillation of `f` on `[c, d]` plus `2^-(k-2)`.
    fn enclose(&self, c: &Rational, d: &Rational, k: u32) -> (Rational, Rational) {
        default_enclose(self, c, d, k)
    }

    fn as_polygonal(&self) -> Option<&RationalPolygonal> {
        None
    }
}

/// Enclosure from `approx` and `cont_mod`: cover `[c, d]` by cells of width
/// `2^-m` with `m = cont_mod(a, k+1)` and widen each centre value by `2^-k`.
pub fn default_enclose<F: BcfImpl + ?Sized>(
    f: &F,
    c: &Rational,
    d: &Rational,
    k: u32,
) -> (Rational, Rational) {
    let a = Rational::max_of(&c.abs(), &d.abs()).ceil_i64().max(0) as u64;
    let m = f.cont_mod(a, k + 1);
    let width = eps(m);
    let cells = ((d - c) / &width).ceil_i64().max(1);
    let step = (d - c) / Rational::int(cells);
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    let half = &step / Rational::int(2);
    let mut left = c.clone();
    for _ in 0..cells {
        let v = f.approx(&(&left + &half), k + 1);
        let (l, h) = (&v - eps(k), &v + eps(k));
        if lo.as_ref().is_none_or(|x| l < *x) {
            lo = Some(l);
        }
        if hi.as_ref().is_none_or(|x| h > *x) {
            hi = Some(h);
        }
        left += &step;
    }
    (lo.unwrap(), hi.unwrap())
}

/// Shared handle to a bounded continuous function.
#[derive(Clone)]
pub struct BCFunction(Arc<dyn BcfImpl>);

impl BCFunction {
    pub fn new(f: impl BcfImpl + 'static) -> BCFunction {
        BCFunction(Arc::new(f))
    }

    /// Builds a function from its three components.
    pub fn from_parts(
        approx: impl Fn(&Rational, u32) -> Rational + Send + Sync + 'static,
        bound: u64,
        cont_mod: impl Fn(u64, u32) -> u32 + Send + Sync + 'static,
    ) -> BCFunction {
        BCFunction::new(Parts {
            approx: Box::new(approx),
            bound,
            cont_mod: Box::new(cont_mod),
        })
    }

    pub fn approx(&self, q: &Rational, k: u32) -> Rational {
        self.0.approx(q, k)
    }

    pub fn bound(&self) -> u64 {
        self.0.bound()
    }

    pub fn cont_mod(&self, a: u64, k: u32) -> u32 {
        self.0.cont_mod(a, k)
    }

    pub fn enclose(&self, c: &Rational, d: &Rational, k: u32) -> (Rational, Rational) {
        self.0.enclose(c, d, k)
    }

    pub fn as_polygonal(&self) -> Option<&RationalPolygonal> {
        self.0.as_polygonal()
    }

    /// Identity of the shared function object.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    /// The same function seen only through `approx`, `bound` and `cont_mod`.
    pub fn opaque(&self) -> BCFunction {
        let (f, g) = (self.clone(), self.clone());
        BCFunction::from_parts(
            move |q, k| f.approx(q, k),
            self.bound(),
            move |a, k| g.cont_mod(a, k),
        )
    }
}

impl fmt::Debug for BCFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_polygonal() {
            Some(p) => write!(f, "BCFunction({p:?})"),
            None => write!(f, "BCFunction(bound {})", self.bound()),
        }
    }
}

type ApproxFn = dyn Fn(&Rational, u32) -> Rational + Send + Sync;
type ContModFn = dyn Fn(u64, u32) -> u32 + Send + Sync;

struct Parts {
    approx: Box<ApproxFn>,
    bound: u64,
    cont_mod: Box<ContModFn>,
}

impl BcfImpl for Parts {
    fn approx(&self, q: &Rational, k: u32) -> Rational {
        (self.approx)(q, k)
    }

    fn bound(&self) -> u64 {
        self.bound
    }

    fn cont_mod(&self, a: u64, k: u32) -> u32 {
        (self.cont_mod)(a, k)
    }
}

struct Polygonal {
    p: RationalPolygonal,
    bound: u64,
    slope_log2: i64,
}

impl BcfImpl for Polygonal {
    fn approx(&self, q: &Rational, _k: u32) -> Rational {
        self.p.eval(q)
    }

    fn bound(&self) -> u64 {
        self.bound
    }

    fn cont_mod(&self, _a: u64, k: u32) -> u32 {
        if self.slope_log2 == i64::MIN {
            0
        } else {
            (k as i64 + self.slope_log2).max(0) as u32
        }
    }

    fn enclose(&self, c: &Rational, d: &Rational, _k: u32) -> (Rational, Rational) {
        self.p.enclose(c, d)
    }

    fn as_polygonal(&self) -> Option<&RationalPolygonal> {
        Some(&self.p)
    }
}

/// Exact evaluation; `B = ceil(max |y_i|)`; `cont_mod(a, k) = k + ceil(log2 L)`
/// for the maximal absolute slope `L` (and `0` for constants).
pub fn polygonal_as_bcf(p: RationalPolygonal) -> BCFunction {
    let slope = p.max_abs_slope();
    let slope_log2 = if slope.is_zero() {
        i64::MIN
    } else {
        slope.ceil_log2()
    };
    BCFunction::new(Polygonal {
        bound: p.bound(),
        p,
        slope_log2,
    })
}

impl From<RationalPolygonal> for BCFunction {
    fn from(p: RationalPolygonal) -> BCFunction {
        polygonal_as_bcf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::tent_function;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn polygonal_adapter() {
        let t = polygonal_as_bcf(tent_function(1));
        assert_eq!(t.approx(&r(0, 1), 5), r(1, 1));
        let c = polygonal_as_bcf(RationalPolygonal::constant(r(5, 1)));
        assert_eq!(c.bound(), 5);
        assert_eq!(c.cont_mod(3, 7), 0);
        let s = polygonal_as_bcf(
            RationalPolygonal::new(vec![(r(0, 1), r(0, 1)), (r(1, 4), r(1, 1))]).unwrap(),
        );
        for k in 0..10 {
            assert_eq!(s.cont_mod(1, k), k + 2);
        }
    }

    #[test]
    fn default_enclosure_is_sound() {
        let z = RationalPolygonal::new(vec![
            (r(-1, 1), r(0, 1)),
            (r(-1, 2), r(1, 1)),
            (r(0, 1), r(0, 1)),
            (r(1, 2), r(1, 1)),
            (r(1, 1), r(0, 1)),
        ])
        .unwrap();
        let f = polygonal_as_bcf(z.clone()).opaque();
        assert!(f.as_polygonal().is_none());
        for (c, d) in [(r(-1, 1), r(1, 1)), (r(1, 8), r(3, 8)), (r(2, 1), r(5, 2))] {
            let (lo, hi) = f.enclose(&c, &d, 6);
            let (elo, ehi) = z.enclose(&c, &d);
            assert!(lo <= elo && ehi <= hi);
            assert!(&hi - &lo <= &ehi - &elo + eps(4));
        }
    }
}
