//! Exact rationals, effective reals, and convergence certificates.

mod rational;
mod real;
mod witness;

pub use rational::{ParseRationalError, Rational};
pub use real::{
    cauchy_from_consecutive_name, cauchy_from_rational, cut_member, CauchyReal, LeftCEReal,
    RightCEReal, Step, UNBOUNDED,
};
pub use witness::{wit_to_mod, LiminfWitness, LimsupWitness, Modulus, DEFAULT_BUDGET_CAP};

/// Result of a budgeted semi-decision: `Pending` is never a negative answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer<T> {
    Answered(T),
    Pending,
}

impl<T> Answer<T> {
    pub fn is_answered(&self) -> bool {
        matches!(self, Answer::Answered(_))
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Answer<U> {
        match self {
            Answer::Answered(v) => Answer::Answered(f(v)),
            Answer::Pending => Answer::Pending,
        }
    }

    pub fn ok(self) -> Option<T> {
        match self {
            Answer::Answered(v) => Some(v),
            Answer::Pending => None,
        }
    }
}

/// Unwraps an [`Answer`], returning `Pending` from the enclosing function otherwise.
#[macro_export]
macro_rules! answered {
    ($e:expr) => {
        match $e {
            $crate::kernel::Answer::Answered(v) => v,
            $crate::kernel::Answer::Pending => return $crate::kernel::Answer::Pending,
        }
    };
}

/// `2^-k` as a rational.
pub fn eps(k: u32) -> Rational {
    Rational::pow2(-(k as i64))
}

/// Galloping search for an `n` with `pred(n)`, for predicates that stay true
/// once true: tests `0`, then `1, 2, 4, ...`, then bisects. Each test costs one
/// unit of `budget`.
pub fn gallop(mut pred: impl FnMut(u64) -> bool, budget: u64) -> Answer<u64> {
    let mut used = 0u64;
    let mut test = |n: u64, used: &mut u64| -> Option<bool> {
        if *used >= budget {
            return None;
        }
        *used += 1;
        Some(pred(n))
    };
    match test(0, &mut used) {
        None => return Answer::Pending,
        Some(true) => return Answer::Answered(0),
        Some(false) => {}
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    loop {
        match test(hi, &mut used) {
            None => return Answer::Pending,
            Some(true) => break,
            Some(false) => {
                lo = hi;
                if hi >= 1 << 62 {
                    return Answer::Pending;
                }
                hi *= 2;
            }
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match test(mid, &mut used) {
            None => return Answer::Answered(hi),
            Some(true) => hi = mid,
            Some(false) => lo = mid,
        }
    }
    Answer::Answered(hi)
}
