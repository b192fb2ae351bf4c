//! Piecewise-linear functions with rational vertices and constant extension.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::Rational;
use crate::measures::Span;

/// Piecewise-linear function through `(x_i, y_i)`, constant `y_0` left of `x_0`
/// and constant `y_m` right of `x_m`.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalPolygonal {
    xs: Arc<[Rational]>,
    ys: Arc<[Rational]>,
}

impl RationalPolygonal {
    /// Fails unless the list is nonempty with strictly increasing `x`.
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<RationalPolygonal> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "polygonal function needs a vertex".into(),
            ));
        }
        if let Some(w) = points.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(format!(
                "breakpoints not strictly increasing at {} -> {}",
                w[0].0, w[1].0
            )));
        }
        let (xs, ys): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        Ok(RationalPolygonal {
            xs: xs.into(),
            ys: ys.into(),
        })
    }

    /// Like [`new`](Self::new) for points already known to be valid.
    pub(crate) fn from_sorted(xs: Vec<Rational>, ys: Vec<Rational>) -> RationalPolygonal {
        debug_assert!(!xs.is_empty() && xs.len() == ys.len());
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        RationalPolygonal {
            xs: xs.into(),
            ys: ys.into(),
        }
    }

    pub fn constant(c: Rational) -> RationalPolygonal {
        RationalPolygonal::from_sorted(vec![Rational::zero()], vec![c])
    }

    pub fn xs(&self) -> &[Rational] {
        &self.xs
    }

    pub fn ys(&self) -> &[Rational] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.xs.iter().zip(self.ys.iter())
    }

    /// Index of the last breakpoint `<= x`, or `None` when `x < x_0`.
    fn segment(&self, x: &Rational) -> Option<usize> {
        match self.xs.binary_search(x) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let m = self.xs.len() - 1;
        match self.segment(x) {
            None => self.ys[0].clone(),
            Some(i) if i == m => self.ys[m].clone(),
            Some(i) => {
                let (x0, x1, y0, y1) = (&self.xs[i], &self.xs[i + 1], &self.ys[i], &self.ys[i + 1]);
                if x == x0 {
                    return y0.clone();
                }
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Exact `(min, max)` of the function on `[c, d]`.
    pub fn enclose(&self, c: &Rational, d: &Rational) -> (Rational, Rational) {
        assert!(c <= d, "enclose on reversed interval");
        let mut lo = self.eval(c);
        let mut hi = lo.clone();
        let mut take = |v: Rational| {
            if v < lo {
                lo = v;
            } else if v > hi {
                hi = v;
            }
        };
        take(self.eval(d));
        let start = self.xs.partition_point(|x| x <= c);
        let end = self.xs.partition_point(|x| x < d);
        for y in &self.ys[start..end.max(start)] {
            take(y.clone());
        }
        (lo, hi)
    }

    pub fn max_abs_slope(&self) -> Rational {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| ((&y[1] - &y[0]) / (&x[1] - &x[0])).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// `max |y_i|`, the supremum of `|f|`.
    pub fn sup_abs(&self) -> Rational {
        self.ys.iter().map(Rational::abs).max().unwrap()
    }

    /// Least integer bound on `|f|`.
    pub fn bound(&self) -> u64 {
        self.sup_abs().ceil_i64() as u64
    }

    /// `x -> a * f(x) + b`.
    pub fn affine(&self, a: &Rational, b: &Rational) -> RationalPolygonal {
        let ys = self.ys.iter().map(|y| a * y + b).collect();
        RationalPolygonal {
            xs: self.xs.clone(),
            ys,
        }
    }

    /// Pointwise `min(max(f, lo), hi)`, with crossing points inserted.
    pub fn clamp_values(&self, lo: &Rational, hi: &Rational) -> RationalPolygonal {
        let neg = Rational::int(-1);
        let zero = Rational::zero();
        let above = self.pointwise_max(&RationalPolygonal::constant(lo.clone()));
        above
            .affine(&neg, &zero)
            .pointwise_max(&RationalPolygonal::constant(-hi))
            .affine(&neg, &zero)
    }

    /// `f - g` as an exact polygonal function.
    pub fn sub(&self, other: &RationalPolygonal) -> RationalPolygonal {
        self.combine(other, |a, b| a - b)
    }

    /// Pointwise `max(f, g)`, with crossing points inserted as breakpoints.
    pub fn pointwise_max(&self, other: &RationalPolygonal) -> RationalPolygonal {
        let xs = merged_breakpoints(self, other);
        let mut out_x = Vec::with_capacity(xs.len());
        let mut out_y = Vec::with_capacity(xs.len());
        let mut prev: Option<(Rational, Rational)> = None;
        for x in xs {
            let d = self.eval(&x) - other.eval(&x);
            if let Some((px, pd)) = &prev {
                if (pd.is_positive() && d.is_negative()) || (pd.is_negative() && d.is_positive()) {
                    let t = pd / &(pd - &d);
                    let cx = px + &(t * (&x - px));
                    out_y.push(self.eval(&cx));
                    out_x.push(cx);
                }
            }
            out_y.push(Rational::max_of(&self.eval(&x), &other.eval(&x)).clone());
            out_x.push(x.clone());
            prev = Some((x, d));
        }
        RationalPolygonal::from_sorted(out_x, out_y).simplified()
    }

    fn combine(
        &self,
        other: &RationalPolygonal,
        op: impl Fn(Rational, Rational) -> Rational,
    ) -> RationalPolygonal {
        let xs = merged_breakpoints(self, other);
        let ys = xs.iter().map(|x| op(self.eval(x), other.eval(x))).collect();
        RationalPolygonal::from_sorted(xs, ys)
    }

    /// Drops breakpoints that are collinear with their neighbours and
    /// constant tails that repeat the extension value.
    pub fn simplified(&self) -> RationalPolygonal {
        let n = self.xs.len();
        let mut keep: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            if keep.is_empty() || i == n - 1 {
                keep.push(i);
                continue;
            }
            let a = *keep.last().unwrap();
            let (xa, ya) = (&self.xs[a], &self.ys[a]);
            let (xb, yb) = (&self.xs[i], &self.ys[i]);
            let (xc, yc) = (&self.xs[i + 1], &self.ys[i + 1]);
            if (yb - ya) * (xc - xb) != (yc - yb) * (xb - xa) {
                keep.push(i);
            }
        }
        // collapse constant ends
        while keep.len() > 1 && self.ys[keep[0]] == self.ys[keep[1]] {
            keep.remove(0);
        }
        while keep.len() > 1 && self.ys[keep[keep.len() - 1]] == self.ys[keep[keep.len() - 2]] {
            keep.pop();
        }
        let xs = keep.iter().map(|&i| self.xs[i].clone()).collect();
        let ys = keep.iter().map(|&i| self.ys[i].clone()).collect();
        RationalPolygonal::from_sorted(xs, ys)
    }

    /// `{x : f(x) > t}` as disjoint sorted open spans.
    pub fn superlevel(&self, t: &Rational) -> Vec<Span> {
        let above: Vec<bool> = self.ys.iter().map(|y| y > t).collect();
        let m = self.xs.len() - 1;
        let crossing = |i: usize| {
            // point in (x_i, x_{i+1}] or [x_i, x_{i+1}) where the segment meets t
            let (x0, x1, y0, y1) = (&self.xs[i], &self.xs[i + 1], &self.ys[i], &self.ys[i + 1]);
            x0 + (t - y0) * (x1 - x0) / (y1 - y0)
        };
        let mut spans = Vec::new();
        let mut open: Option<Option<Rational>> = if above[0] { Some(None) } else { None };
        for i in 0..m {
            match (above[i], above[i + 1]) {
                (true, false) => {
                    let end = crossing(i);
                    spans.push(Span::new(open.take().unwrap(), Some(end)));
                }
                (false, true) => {
                    open = Some(Some(crossing(i)));
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            spans.push(Span::new(start, None));
        }
        spans
    }

    /// `{x : f(x) < t}` as disjoint sorted open spans.
    pub fn sublevel(&self, t: &Rational) -> Vec<Span> {
        self.affine(&Rational::int(-1), &Rational::zero())
            .superlevel(&-t)
    }

    /// Exact `∫_c^d f(x) dx` for `c <= d`.
    pub fn integral(&self, c: &Rational, d: &Rational) -> Rational {
        assert!(c <= d);
        let mut pts = vec![c.clone()];
        pts.extend(self.xs.iter().filter(|x| *x > c && *x < d).cloned());
        pts.push(d.clone());
        pts.windows(2)
            .map(|w| (&w[1] - &w[0]) * (self.eval(&w[0]) + self.eval(&w[1])) / Rational::int(2))
            .sum()
    }
}

fn merged_breakpoints(f: &RationalPolygonal, g: &RationalPolygonal) -> Vec<Rational> {
    let mut xs: Vec<Rational> = f.xs.iter().chain(g.xs.iter()).cloned().collect();
    xs.sort();
    xs.dedup();
    xs
}

impl fmt::Debug for RationalPolygonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Polygonal[")?;
        for (i, (x, y)) in self.points().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        f.write_str("]")
    }
}
