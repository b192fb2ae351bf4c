//! Convergence certificates: moduli, liminf/limsup witnesses, and their combination.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{Answer, CauchyReal, Rational};
use crate::error::{Error, Result};

/// Default cap on the escalating budget used by [`Modulus::at`].
pub const DEFAULT_BUDGET_CAP: u64 = 1 << 26;

/// First budget tried by escalating loops.
const START_BUDGET: u64 = 64;

type ModulusFn = dyn Fn(u32, u64) -> Answer<u64> + Send + Sync;

/// A modulus of convergence `g` for some `a_n -> a`: `n >= g(k)` implies `|a_n - a| < 2^-k`.
#[derive(Clone)]
pub struct Modulus(Arc<ModulusInner>);

struct ModulusInner {
    f: Box<ModulusFn>,
    memo: Mutex<HashMap<u32, u64>>,
    cap: u64,
}

impl Modulus {
    /// A modulus whose values are searched for under a budget.
    pub fn new(f: impl Fn(u32, u64) -> Answer<u64> + Send + Sync + 'static) -> Modulus {
        Modulus(Arc::new(ModulusInner {
            f: Box::new(f),
            memo: Mutex::new(HashMap::new()),
            cap: DEFAULT_BUDGET_CAP,
        }))
    }

    /// A modulus that always answers.
    pub fn total(f: impl Fn(u32) -> u64 + Send + Sync + 'static) -> Modulus {
        Modulus::new(move |k, _| Answer::Answered(f(k)))
    }

    pub fn zero() -> Modulus {
        Modulus::total(|_| 0)
    }

    /// Same modulus with a different escalation cap.
    pub fn with_cap(&self, cap: u64) -> Modulus {
        let inner = self.clone();
        let mut m = Modulus::new(move |k, b| inner.query(k, b));
        Arc::get_mut(&mut m.0).unwrap().cap = cap;
        m
    }

    /// `g(k)` within `budget`; answered values are memoized.
    pub fn query(&self, k: u32, budget: u64) -> Answer<u64> {
        if let Some(v) = self.0.memo.lock().unwrap().get(&k) {
            return Answer::Answered(*v);
        }
        let ans = (self.0.f)(k, budget);
        if let Answer::Answered(v) = ans {
            self.0.memo.lock().unwrap().entry(k).or_insert(v);
        }
        ans
    }

    /// `g(k)`, escalating the budget up to the cap.
    pub fn at(&self, k: u32) -> Result<u64> {
        self.at_within(k, self.0.cap)
    }

    /// `g(k)`, escalating the budget up to `cap`.
    pub fn at_within(&self, k: u32, cap: u64) -> Result<u64> {
        let mut budget = START_BUDGET.min(cap);
        loop {
            if let Answer::Answered(v) = self.query(k, budget) {
                return Ok(v);
            }
            if budget >= cap {
                return Err(Error::BudgetExhausted {
                    context: "modulus",
                    cap,
                });
            }
            budget = budget.saturating_mul(4).min(cap);
        }
    }

    /// `k -> max(self(k), other(k))`.
    pub fn max(&self, other: &Modulus) -> Modulus {
        let (a, b) = (self.clone(), other.clone());
        Modulus::new(move |k, budget| {
            let x = crate::answered!(a.query(k, budget));
            let y = crate::answered!(b.query(k, budget));
            Answer::Answered(x.max(y))
        })
    }

    /// `k -> self(k + shift)`.
    pub fn shifted(&self, shift: u32) -> Modulus {
        let a = self.clone();
        Modulus::new(move |k, budget| a.query(k + shift, budget))
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let memo = self.0.memo.lock().unwrap();
        let mut known: Vec<_> = memo.iter().collect();
        known.sort();
        write!(f, "Modulus{known:?}")
    }
}

type WitnessFn = dyn Fn(&Rational, u64) -> Answer<u64> + Send + Sync;

struct WitnessInner {
    f: Box<WitnessFn>,
    memo: Mutex<HashMap<Rational, u64>>,
}

impl WitnessInner {
    fn query(&self, r: &Rational, budget: u64) -> Answer<u64> {
        if let Some(v) = self.memo.lock().unwrap().get(r) {
            return Answer::Answered(*v);
        }
        let ans = (self.f)(r, budget);
        if let Answer::Answered(v) = ans {
            self.memo.lock().unwrap().entry(r.clone()).or_insert(v);
        }
        ans
    }
}

macro_rules! witness_type {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone)]
        pub struct $name(Arc<WitnessInner>);

        impl $name {
            pub fn new(f: impl Fn(&Rational, u64) -> Answer<u64> + Send + Sync + 'static) -> $name {
                $name(Arc::new(WitnessInner {
                    f: Box::new(f),
                    memo: Mutex::new(HashMap::new()),
                }))
            }

            /// Threshold `n0` for `r`, or `Pending` within `budget`.
            pub fn query(&self, r: &Rational, budget: u64) -> Answer<u64> {
                self.0.query(r, budget)
            }

            /// Same witness with every answer passed through `f`.
            pub fn map_answers(&self, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> $name {
                let w = self.clone();
                $name::new(move |r, b| w.query(r, b).map(&f))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(
                    f,
                    "{}({} answers)",
                    stringify!($name),
                    self.0.memo.lock().unwrap().len()
                )
            }
        }
    };
}

witness_type!(
    LiminfWitness,
    "Witness that `liminf a_n >= a`: an answer `n0` for `r` means `r < a_n` for all `n >= n0`; \
     answers exist exactly for `r` in the left cut of `a`."
);

witness_type!(
    LimsupWitness,
    "Witness that `limsup a_n <= a`: an answer `n0` for `r` means `r > a_n` for all `n >= n0`; \
     answers exist exactly for `r` in the right cut of `a`."
);

/// Combines a liminf and a limsup witness for the same sequence and limit `a` into a modulus.
///
/// For precision `k` it takes `q = a.approx(k+3)`, `r1 = q - 3*2^-(k+3)` and
/// `r2 = q + 3*2^-(k+3)`; then `r1 < a < r2`, `r2 - r1 < 2^-k`, and
/// `g(k) = max(g1(r1), g2(r2))`.
pub fn wit_to_mod(g1: &LiminfWitness, g2: &LimsupWitness, a: &CauchyReal) -> Modulus {
    let (g1, g2, a) = (g1.clone(), g2.clone(), a.clone());
    Modulus::new(move |k, budget| {
        let q = crate::answered!(a.try_approx(k + 3, budget));
        let slack = Rational::new(3, 1) * Rational::pow2(-(k as i64) - 3);
        let n1 = crate::answered!(g1.query(&(&q - &slack), budget));
        let n2 = crate::answered!(g2.query(&(&q + &slack), budget));
        Answer::Answered(n1.max(n2))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence_gives_zero() {
        let c = Rational::new(2, 3);
        let (c1, c2) = (c.clone(), c.clone());
        let g1 = LiminfWitness::new(move |r, _| {
            if *r < c1 {
                Answer::Answered(0)
            } else {
                Answer::Pending
            }
        });
        let g2 = LimsupWitness::new(move |r, _| {
            if *r > c2 {
                Answer::Answered(0)
            } else {
                Answer::Pending
            }
        });
        let g = wit_to_mod(&g1, &g2, &CauchyReal::from_rational(c));
        for k in 0..20 {
            assert_eq!(g.at(k).unwrap(), 0);
        }
    }

    /// `a_n = 1/(n+1) -> 0` with `g1(r) = 0` for `r < 0` and `g2(r) = ceil(1/r)`.
    #[test]
    fn harmonic_sequence() {
        let g1 = LiminfWitness::new(|r, _| {
            if r.is_negative() {
                Answer::Answered(0)
            } else {
                Answer::Pending
            }
        });
        let g2 = LimsupWitness::new(|r, _| {
            if r.is_positive() {
                Answer::Answered(r.recip().ceil_i64() as u64)
            } else {
                Answer::Pending
            }
        });
        let g = wit_to_mod(&g1, &g2, &CauchyReal::from_rational(Rational::zero()));
        for k in 0..=12u32 {
            let n0 = g.at(k).unwrap();
            for n in n0..n0 + 64 {
                assert!(
                    Rational::new(1, n as i64 + 1) < Rational::pow2(-(k as i64)),
                    "k={k} n={n}"
                );
            }
        }
    }

    #[test]
    fn pending_propagates_to_budget_error() {
        let g1 = LiminfWitness::new(|_, _| Answer::Pending);
        let g2 = LimsupWitness::new(|_, _| Answer::Answered(0));
        let g =
            wit_to_mod(&g1, &g2, &CauchyReal::from_rational(Rational::zero())).with_cap(1 << 10);
        assert!(matches!(g.at(3), Err(Error::BudgetExhausted { .. })));
        assert_eq!(g.query(3, 10_000), Answer::Pending);
    }

    #[test]
    fn witness_answers_are_stable() {
        let hits = Arc::new(Mutex::new(0));
        let h = hits.clone();
        let w = LiminfWitness::new(move |_, _| {
            *h.lock().unwrap() += 1;
            Answer::Answered(7)
        });
        let r = Rational::new(1, 3);
        assert_eq!(w.query(&r, 1), Answer::Answered(7));
        assert_eq!(w.query(&r, 1), Answer::Answered(7));
        assert_eq!(*hits.lock().unwrap(), 1);
    }
}
