//! Truncated Lebesgue measures whose limit is only enumerated through a gate.
//!
//! `α = Σ_i b_i 2^-i` is revealed one binary digit (token) at a time, and
//! `q_n` is the sum of the first `n` tokens, so `0 <= α - q_n < 2^-n`. The
//! terms `μ_n = λ(· ∩ [0, q_n])` are always available; the limit
//! `μ = λ(· ∩ [0, α])` only sees the tokens released so far. Its total mass
//! answers `approx(k)` with `q_k` once `k` tokens are out, and its open-set
//! masses are lower bounds `λ(U ∩ [0, q_i])` that stop growing while the gate
//! is closed.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;

use crate::functions::{polygonal_as_bcf, RationalPolygonal};
use crate::kernel::{eps, Answer, CauchyReal, LeftCEReal, Modulus, Rational, Step};
use crate::measures::{CMeasure, ExactMeasure, Sigma01Set};
use crate::weakconv::{EWLimit, MeasureSeq};

/// Number of tokens released to the limit.
#[derive(Clone, Debug, Default)]
pub struct Gate(Arc<AtomicU64>);

impl Gate {
    pub fn closed_at(tokens: u64) -> Gate {
        Gate(Arc::new(AtomicU64::new(tokens)))
    }

    pub fn released(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }

    pub fn advance_to(&self, tokens: u64) {
        self.0.fetch_max(tokens, Ordering::SeqCst);
    }

    pub fn open(&self) {
        self.advance_to(u64::MAX);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `1/√2 = 0.1011010100000100...` in binary.
    SqrtHalf,
    /// `1/2`, revealed by its first token.
    Half,
}

impl Target {
    pub fn parse(s: &str) -> Option<Target> {
        match s {
            "sqrt-half" => Some(Target::SqrtHalf),
            "half" => Some(Target::Half),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::SqrtHalf => "sqrt-half",
            Target::Half => "half",
        }
    }

    /// Binary digit `b_i`, `i >= 1`.
    pub fn bit(self, i: u64) -> bool {
        match self {
            // floor(2^i / √2) = isqrt(2^(2i-1))
            Target::SqrtHalf => (BigInt::from(1) << (2 * i - 1) as usize).sqrt().bit(0),
            Target::Half => i == 1,
        }
    }
}

struct Inner {
    target: Target,
    gate: Gate,
    prefix: Mutex<Vec<Rational>>,
}

#[derive(Clone)]
pub struct GatedTarget(Arc<Inner>);

impl std::fmt::Debug for GatedTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "GatedTarget({}, released {})",
            self.0.target.name(),
            self.0.gate.released()
        )
    }
}

impl GatedTarget {
    pub fn new(target: Target, gate: Gate) -> GatedTarget {
        GatedTarget(Arc::new(Inner {
            target,
            gate,
            prefix: Mutex::new(vec![Rational::zero()]),
        }))
    }

    pub fn gate(&self) -> &Gate {
        &self.0.gate
    }

    pub fn target(&self) -> Target {
        self.0.target
    }

    /// `q_n`, the sum of the first `n` tokens.
    pub fn q(&self, n: u64) -> Rational {
        let mut prefix = self.0.prefix.lock().unwrap();
        while prefix.len() as u64 <= n {
            let i = prefix.len() as u64;
            let next = if self.0.target.bit(i) {
                prefix.last().unwrap() + eps(i as u32)
            } else {
                prefix.last().unwrap().clone()
            };
            prefix.push(next);
        }
        prefix[n as usize].clone()
    }

    /// `q` after the released tokens only.
    pub fn released_q(&self, n: u64) -> Rational {
        self.q(n.min(self.0.gate.released()))
    }

    pub fn term(&self, n: u64) -> ExactMeasure {
        ExactMeasure::density(
            RationalPolygonal::constant(Rational::one()),
            Rational::zero(),
            self.q(n),
        )
        .expect("q_n is nonnegative")
    }

    pub fn seq(&self) -> MeasureSeq {
        let t = self.clone();
        MeasureSeq::new(move |n| CMeasure::from_exact(t.term(n)))
    }

    /// The limit as seen through the gate.
    pub fn limit(&self) -> CMeasure {
        let t = self.clone();
        let total = CauchyReal::partial(move |k, _| {
            if u64::from(k) <= t.0.gate.released() {
                Answer::Answered(t.q(k.into()))
            } else {
                Answer::Pending
            }
        });
        let t = self.clone();
        let open = move |u: &Sigma01Set| {
            let (t, u) = (t.clone(), u.clone());
            LeftCEReal::new(move |i| {
                let m = ExactMeasure::density(
                    RationalPolygonal::constant(Rational::one()),
                    Rational::zero(),
                    t.released_q(i as u64),
                )
                .expect("q_n is nonnegative");
                Step::Value(match u.exact_spans() {
                    Some(spans) => m.mass_open(spans),
                    None => m.mass_intervals(&u.merged_prefix(i)),
                })
            })
        };
        CMeasure::new(total, open)
            .with_atoms(vec![])
            .with_support(1)
    }

    /// Direct moduli from `|∫ f dμ_n - ∫ f dμ| <= B (α - q_n) < B 2^-n`;
    /// they need no released tokens.
    pub fn ewlimit(&self) -> EWLimit {
        EWLimit::new(self.seq(), self.limit(), |_, b| {
            let shift = Rational::from(b.max(1)).ceil_log2().max(0) as u64;
            Modulus::total(move |k| u64::from(k) + shift)
        })
    }

    /// `(L, r)` with `|∫ f dμ - L| <= r`, read off the first `bits` tokens.
    pub fn limit_enclosure(&self, f: &RationalPolygonal, bits: u32) -> (Rational, Rational) {
        let q = self.q(bits.into());
        let value = f.integral(&Rational::zero(), &q);
        (value, f.sup_abs() * eps(bits))
    }

    /// `|∫ f dμ_n - ∫ f dμ| < 2^-k` certified for all `n` in `window`.
    pub fn check_window(
        &self,
        f: &RationalPolygonal,
        k: u32,
        window: impl IntoIterator<Item = u64>,
    ) -> Option<u64> {
        let (value, radius) = self.limit_enclosure(f, ENCLOSURE_BITS);
        window.into_iter().find(|&n| {
            (f.integral(&Rational::zero(), &self.q(n)) - &value).abs() + &radius >= eps(k)
        })
    }
}

/// Tokens used for the exact enclosure of the limit integrals.
pub const ENCLOSURE_BITS: u32 = 256;

/// `clamp(x, 0, 1)` as a bounded continuous function.
pub fn clamp01() -> crate::functions::BCFunction {
    polygonal_as_bcf(
        RationalPolygonal::new(vec![
            (Rational::zero(), Rational::zero()),
            (Rational::one(), Rational::one()),
        ])
        .unwrap(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::co_name_of;
    use crate::weakconv::uniformize;

    #[test]
    fn sqrt_half_digits() {
        let bits: String = (1..=16)
            .map(|i| if Target::SqrtHalf.bit(i) { '1' } else { '0' })
            .collect();
        assert_eq!(bits, "1011010100000100");
        let t = GatedTarget::new(Target::SqrtHalf, Gate::closed_at(3));
        assert_eq!(t.q(3), Rational::new(5, 8));
        let q = t.q(40);
        assert!(&q * &q * Rational::int(2) < Rational::one());
        let hi = &q + eps(40);
        assert!(&hi * &hi * Rational::int(2) > Rational::one());
    }

    #[test]
    fn closed_gate_freezes_the_limit() {
        let t = GatedTarget::new(Target::SqrtHalf, Gate::closed_at(3));
        let total = t.limit().mass_open(&Sigma01Set::whole());
        assert_eq!(total.lower(3), Rational::new(5, 8));
        assert_eq!(total.lower(20), Rational::new(5, 8));
        let uw = uniformize(&t.ewlimit());
        let g = uw.modulus_for_name(&co_name_of(&clamp01()), 1);
        assert_eq!(g.query(10, 10_000), Answer::Pending);
        t.gate().open();
        let n0 = g
            .query(10, 10_000)
            .ok()
            .expect("answers once the gate is open");
        assert_eq!(
            t.check_window(&clamp01().as_polygonal().unwrap().clone(), 10, n0..=n0 + 32),
            None
        );
        assert!(t.limit().mass_open(&Sigma01Set::whole()).lower(20) > Rational::new(5, 8));
    }

    #[test]
    fn half_is_a_constant_truncation() {
        let gate = Gate::default();
        gate.open();
        let t = GatedTarget::new(Target::Half, gate);
        assert!((1..40).all(|n| t.q(n) == Rational::new(1, 2)));
        let g = uniformize(&t.ewlimit()).modulus_for_name(&co_name_of(&clamp01()), 1);
        assert!(matches!(g.query(10, 10_000), Answer::Answered(_)));
    }
}
