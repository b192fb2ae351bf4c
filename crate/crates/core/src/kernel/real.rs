//! Reals as query descriptors: Cauchy names and monotone semicomputable streams.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{Answer, Rational};
use crate::error::{Error, Result};

/// Budget value meaning "no limit".
pub const UNBOUNDED: u64 = u64::MAX;

type CauchyGen = dyn Fn(u32, u64) -> Answer<Rational> + Send + Sync;

/// A real `x` given by `approx(k)` with `|approx(k) - x| <= 2^-k`.
///
/// Answers are memoized. A *partial* real may answer `Pending` under a
/// finite budget (used for gated demonstrations); all other constructors
/// produce total reals.
#[derive(Clone)]
pub struct CauchyReal(Arc<CauchyInner>);

struct CauchyInner {
    gen: Box<CauchyGen>,
    memo: Mutex<HashMap<u32, Rational>>,
    exact: Option<Rational>,
}

impl CauchyReal {
    fn build(gen: Box<CauchyGen>, exact: Option<Rational>) -> CauchyReal {
        CauchyReal(Arc::new(CauchyInner {
            gen,
            memo: Mutex::new(HashMap::new()),
            exact,
        }))
    }

    pub fn from_rational(q: Rational) -> CauchyReal {
        let v = q.clone();
        CauchyReal::build(Box::new(move |_, _| Answer::Answered(v.clone())), Some(q))
    }

    pub fn new(f: impl Fn(u32) -> Rational + Send + Sync + 'static) -> CauchyReal {
        CauchyReal::build(Box::new(move |k, _| Answer::Answered(f(k))), None)
    }

    /// A real whose approximations may be unavailable within a budget.
    pub fn partial(f: impl Fn(u32, u64) -> Answer<Rational> + Send + Sync + 'static) -> CauchyReal {
        CauchyReal::build(Box::new(f), None)
    }

    /// Adapter for names with `|q_n - q_{n+1}| < 2^-n`: `approx(k) = q_{k+2}`.
    ///
    /// The consecutive-difference contract is checked on `q_0 .. q_{prefix}`.
    pub fn from_consecutive_name(
        q: impl Fn(u32) -> Rational + Send + Sync + 'static,
        prefix: u32,
    ) -> Result<CauchyReal> {
        let mut prev = q(0);
        for n in 0..prefix {
            let next = q(n + 1);
            let diff = (&prev - &next).abs();
            if diff >= Rational::pow2(-(n as i64)) {
                return Err(Error::MalformedName { index: n, diff });
            }
            prev = next;
        }
        Ok(CauchyReal::new(move |k| q(k + 2)))
    }

    /// Real squeezed between a left-c.e. and a right-c.e. stream with the same limit.
    pub fn from_squeeze(left: LeftCEReal, right: RightCEReal) -> CauchyReal {
        CauchyReal::partial(move |k, budget| {
            let eps = Rational::pow2(-(k as i64));
            let mut i = 0usize;
            loop {
                let (l, u) = (left.lower(i), right.upper(i));
                if &u - &l <= eps {
                    return Answer::Answered(Rational::midpoint(&l, &u));
                }
                if i as u64 >= budget || (left.is_final_at(i) && right.is_final_at(i)) {
                    return Answer::Pending;
                }
                i += 1;
            }
        })
    }

    pub fn try_approx(&self, k: u32, budget: u64) -> Answer<Rational> {
        if let Some(q) = &self.0.exact {
            return Answer::Answered(q.clone());
        }
        if let Some(q) = self.0.memo.lock().unwrap().get(&k) {
            return Answer::Answered(q.clone());
        }
        let ans = (self.0.gen)(k, budget);
        if let Answer::Answered(q) = &ans {
            self.0
                .memo
                .lock()
                .unwrap()
                .entry(k)
                .or_insert_with(|| q.clone());
        }
        ans
    }

    /// `approx(k)` with `|approx(k) - x| <= 2^-k`.
    ///
    /// # Panics
    /// Panics if the real is partial and cannot answer without a budget.
    pub fn approx(&self, k: u32) -> Rational {
        match self.try_approx(k, UNBOUNDED) {
            Answer::Answered(q) => q,
            Answer::Pending => panic!("approximation of a partial real is unavailable"),
        }
    }

    /// Certified lower bound `approx(k) - 2^-k`.
    pub fn lower(&self, k: u32) -> Rational {
        match &self.0.exact {
            Some(q) => q.clone(),
            None => self.approx(k) - Rational::pow2(-(k as i64)),
        }
    }

    /// Certified upper bound `approx(k) + 2^-k`.
    pub fn upper(&self, k: u32) -> Rational {
        match &self.0.exact {
            Some(q) => q.clone(),
            None => self.approx(k) + Rational::pow2(-(k as i64)),
        }
    }

    /// `upper(k)` under a budget.
    pub fn try_upper(&self, k: u32, budget: u64) -> Answer<Rational> {
        match &self.0.exact {
            Some(q) => Answer::Answered(q.clone()),
            None => self
                .try_approx(k, budget)
                .map(|q| q + Rational::pow2(-(k as i64))),
        }
    }

    /// The exact value when the real was built from a rational.
    pub fn exact(&self) -> Option<&Rational> {
        self.0.exact.as_ref()
    }

    /// `sum_i c_i x_i` for rational coefficients.
    pub fn linear(terms: Vec<(Rational, CauchyReal)>) -> CauchyReal {
        if terms.iter().all(|(_, x)| x.exact().is_some()) {
            let v = terms.iter().map(|(c, x)| c * x.exact().unwrap()).sum();
            return CauchyReal::from_rational(v);
        }
        let weight: Rational =
            terms.iter().map(|(c, _)| c.abs()).sum::<Rational>() + Rational::one();
        let shift = weight.ceil_log2().max(0) as u32;
        CauchyReal::partial(move |k, budget| {
            let mut acc = Rational::zero();
            for (c, x) in &terms {
                if c.is_zero() {
                    continue;
                }
                acc += c * crate::answered!(x.try_approx(k + shift, budget));
            }
            Answer::Answered(acc)
        })
    }

    pub fn scale(&self, c: &Rational) -> CauchyReal {
        CauchyReal::linear(vec![(c.clone(), self.clone())])
    }

    pub fn add(&self, other: &CauchyReal) -> CauchyReal {
        CauchyReal::linear(vec![
            (Rational::one(), self.clone()),
            (Rational::one(), other.clone()),
        ])
    }

    pub fn sub(&self, other: &CauchyReal) -> CauchyReal {
        CauchyReal::linear(vec![
            (Rational::one(), self.clone()),
            (Rational::int(-1), other.clone()),
        ])
    }
}

impl fmt::Debug for CauchyReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.exact {
            Some(q) => write!(f, "CauchyReal({q})"),
            None => f.write_str("CauchyReal(..)"),
        }
    }
}

/// One element of a monotone stream.
pub enum Step {
    /// A further approximation; more may follow.
    Value(Rational),
    /// The stream has reached its limit and stays constant from here on.
    Final(Rational),
}

type StreamGen = dyn FnMut(usize) -> Step + Send;

struct StreamState {
    gen: Box<StreamGen>,
    values: Vec<Rational>,
    done: bool,
}

impl StreamState {
    fn fill(&mut self, i: usize, better: fn(&Rational, &Rational) -> bool) {
        while self.values.len() <= i && !self.done {
            let idx = self.values.len();
            let (v, fin) = match (self.gen)(idx) {
                Step::Value(v) => (v, false),
                Step::Final(v) => (v, true),
            };
            let v = match self.values.last() {
                Some(prev) if !better(&v, prev) => prev.clone(),
                _ => v,
            };
            self.values.push(v);
            self.done = fin;
        }
    }

    fn get(&self, i: usize) -> Rational {
        self.values[i.min(self.values.len() - 1)].clone()
    }
}

macro_rules! monotone_stream {
    ($name:ident, $accessor:ident, $better:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone)]
        pub struct $name(Arc<Mutex<StreamState>>);

        impl $name {
            pub fn new(gen: impl FnMut(usize) -> Step + Send + 'static) -> $name {
                $name(Arc::new(Mutex::new(StreamState {
                    gen: Box::new(gen),
                    values: Vec::new(),
                    done: false,
                })))
            }

            pub fn constant(q: Rational) -> $name {
                $name::new(move |_| Step::Final(q.clone()))
            }

            /// The `i`-th element; memoized, monotone in `i`.
            pub fn $accessor(&self, i: usize) -> Rational {
                let mut st = self.0.lock().unwrap();
                st.fill(i, $better);
                st.get(i)
            }

            /// True when the element at `i` is known to be the limit.
            pub fn is_final_at(&self, i: usize) -> bool {
                let st = self.0.lock().unwrap();
                st.done && i + 1 >= st.values.len()
            }

            /// The limit, if the stream has announced it.
            pub fn final_value(&self) -> Option<Rational> {
                let st = self.0.lock().unwrap();
                if st.done {
                    st.values.last().cloned()
                } else {
                    None
                }
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let st = self.0.lock().unwrap();
                write!(
                    f,
                    "{}({:?}{})",
                    stringify!($name),
                    st.values.last(),
                    if st.done { ", final" } else { "" }
                )
            }
        }
    };
}

monotone_stream!(
    LeftCEReal,
    lower,
    |new, prev| new > prev,
    "A left-c.e. real: nondecreasing rationals `lower(i)` with supremum `x`."
);

monotone_stream!(
    RightCEReal,
    upper,
    |new, prev| new < prev,
    "A right-c.e. real: nonincreasing rationals `upper(i)` with infimum `x`."
);

impl LeftCEReal {
    /// Searches `i <= budget` with `lower(i) > r`. `Pending` is not a negative answer.
    pub fn cut_member(&self, r: &Rational, budget: u64) -> Answer<usize> {
        let mut i = 0usize;
        loop {
            if self.lower(i) > *r {
                return Answer::Answered(i);
            }
            if i as u64 >= budget || self.is_final_at(i) {
                return Answer::Pending;
            }
            i += 1;
        }
    }
}

impl RightCEReal {
    /// Searches `i <= budget` with `upper(i) < r`.
    pub fn cut_member(&self, r: &Rational, budget: u64) -> Answer<usize> {
        let mut i = 0usize;
        loop {
            if self.upper(i) < *r {
                return Answer::Answered(i);
            }
            if i as u64 >= budget || self.is_final_at(i) {
                return Answer::Pending;
            }
            i += 1;
        }
    }
}

/// Constant Cauchy name of `q`.
pub fn cauchy_from_rational(q: Rational) -> CauchyReal {
    CauchyReal::from_rational(q)
}

/// Cauchy real from a name with `|q_n - q_{n+1}| < 2^-n`, prefix-checked.
pub fn cauchy_from_consecutive_name(
    q: impl Fn(u32) -> Rational + Send + Sync + 'static,
    prefix: u32,
) -> Result<CauchyReal> {
    CauchyReal::from_consecutive_name(q, prefix)
}

/// `Answered(i)` iff some `lower(i) > r` with `i <= budget`.
pub fn cut_member(x: &LeftCEReal, r: &Rational, budget: u64) -> Answer<usize> {
    x.cut_member(r, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn constant_names() {
        assert_eq!(cauchy_from_rational(q(0, 1)).approx(10), q(0, 1));
        assert_eq!(cauchy_from_rational(q(3, 4)).approx(0), q(3, 4));
        let x = cauchy_from_rational(q(-2, 1));
        assert!((x.approx(5) - q(-2, 1)).abs() <= Rational::pow2(-5));
    }

    #[test]
    fn consecutive_name_shift() {
        let x = cauchy_from_consecutive_name(|n| Rational::one() - Rational::pow2(-(n as i64)), 40)
            .unwrap();
        assert_eq!(x.approx(3), q(31, 32));
        assert!((x.approx(3) - Rational::one()).abs() <= Rational::pow2(-3));
        let z = cauchy_from_consecutive_name(|_| Rational::zero(), 40).unwrap();
        assert_eq!(z.approx(7), Rational::zero());
    }

    #[test]
    fn consecutive_name_violation() {
        let err = cauchy_from_consecutive_name(|n| if n % 2 == 0 { q(1, 1) } else { q(-1, 1) }, 8)
            .unwrap_err();
        assert!(matches!(err, Error::MalformedName { index: 0, .. }));
    }

    #[test]
    fn cut_membership() {
        let x = LeftCEReal::new(|i| Step::Value(Rational::one() - Rational::pow2(-(i as i64))));
        assert_eq!(cut_member(&x, &q(1, 2), 4), Answer::Answered(2));
        assert_eq!(cut_member(&x, &q(2, 1), 50), Answer::Pending);
        let z = LeftCEReal::constant(Rational::zero());
        assert_eq!(cut_member(&z, &q(-1, 1), 0), Answer::Answered(0));
        assert_eq!(cut_member(&z, &q(0, 1), 1_000_000), Answer::Pending);
    }

    #[test]
    fn streams_are_monotone_and_memoized() {
        let calls = Arc::new(Mutex::new(0usize));
        let c = calls.clone();
        let x = LeftCEReal::new(move |i| {
            *c.lock().unwrap() += 1;
            Step::Value(if i % 2 == 0 { q(i as i64, 1) } else { q(-5, 1) })
        });
        let vals: Vec<_> = (0..6).map(|i| x.lower(i)).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        x.lower(3);
        assert_eq!(*calls.lock().unwrap(), 6);
        let y = RightCEReal::new(|i| Step::Value(q(1, 1 + i as i64)));
        assert!(y.upper(4) <= y.upper(3));
    }

    #[test]
    fn linear_combination() {
        let x = CauchyReal::new(|k| {
            Rational::one() / Rational::int(3) + Rational::pow2(-(k as i64) - 1)
        });
        let y = x.scale(&q(3, 1)).sub(&CauchyReal::from_rational(q(1, 1)));
        for k in 0..12 {
            assert!(y.approx(k).abs() <= Rational::pow2(-(k as i64)));
        }
    }

    #[test]
    fn squeeze_real() {
        let l = LeftCEReal::new(|i| Step::Value(q(1, 2) - Rational::pow2(-(i as i64))));
        let u = RightCEReal::new(|i| Step::Value(q(1, 2) + Rational::pow2(-(i as i64))));
        let x = CauchyReal::from_squeeze(l, u);
        for k in 0..20 {
            assert!((x.approx(k) - q(1, 2)).abs() <= Rational::pow2(-(k as i64)));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cauchy_consistency(n in -1000i64..1000, d in 1i64..1000, j in 0u32..=20, k in 0u32..=20) {
                let x = q(n, d);
                let t = x.clone();
                let c = CauchyReal::new(move |k| {
                    let s = Rational::pow2(-(k as i64) - 1);
                    if k % 2 == 0 { &t + &s } else { &t - &s }
                });
                let gap = (c.approx(j) - c.approx(k)).abs();
                prop_assert!(gap <= Rational::pow2(-(j as i64)) + Rational::pow2(-(k as i64)));
                prop_assert!((c.approx(k) - &x).abs() <= Rational::pow2(-(k as i64)));
            }
        }
    }
}
