//! Tail bounds, polygonal reduction, uniformization and limit extraction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::functions::RationalPolygonal;
use crate::functions::{
    co_name_of, polygonal_approx, polygonal_as_bcf, tent_function, w_function, BCFunction, COName,
};
use crate::kernel::{eps, Answer, CauchyReal, Modulus, Rational, DEFAULT_BUDGET_CAP, UNBOUNDED};
use crate::measures::{integrate, integrate_checked, measure_from_integrator, CMeasure};

use super::{EWLimit, MeasureSeq, UEWLimit};

/// Largest `a'` tried by [`tail_bound`].
const MAX_RADIUS: u64 = 1 << 20;

/// `(a, n0)` with `μ_n(R \ [-a, a]) < 2^-N` for all `n >= n0` and
/// `μ(R \ [-a, a]) < 2^-N`.
///
/// Tries `a' = 1, 2, 4, ...` until the certified upper estimate of
/// `∫ w_{a',0} dμ` is below `2^-(N+1)`, then takes `a = a' + 1` and `n0` from
/// the modulus of `w_{a',0}` at `N + 1`. Since `w_{a',0} >= 1` off `[-a, a]`,
/// the two halves add up to the bound.
pub fn tail_bound(e: &EWLimit, n: u32) -> Result<(u64, u64)> {
    tail_bound_within(e, n, DEFAULT_BUDGET_CAP)
}

/// [`tail_bound`] with every computation against `μ` capped at `cap`.
pub fn tail_bound_within(e: &EWLimit, n: u32, cap: u64) -> Result<(u64, u64)> {
    let target = eps(n + 1);
    let mut a1 = 1u64;
    while a1 <= MAX_RADIUS {
        let w = polygonal_as_bcf(w_function(a1, 0));
        let upper = integrate_checked(&e.limit, &w, n + 3, cap)? + eps(n + 3);
        if upper < target {
            let n0 = e.modulus_for(&w, 1).at_within(n + 1, cap)?;
            return Ok((a1 + 1, n0));
        }
        a1 *= 2;
    }
    Err(Error::BudgetExhausted {
        context: "tail_bound",
        cap: MAX_RADIUS,
    })
}

fn log2_ceil_int(b: u64) -> u32 {
    Rational::from(b.max(1)).ceil_log2().max(0) as u32
}

/// `(a, n1, ψ)` with `ψ` rational polygonal on `[-a, a]`, `|ψ| <= B`, and
/// `|∫ (f - ψ) dμ| < 2^-N`, `|∫ (f - ψ) dμ_n| < 2^-N` for `n >= n1`.
///
/// The tail outside `[-a, a]` is bounded below `2^-(N+2)/B` so that
/// `|f - ψ| <= 2B` contributes under `2^-(N+1)`; inside, `|f - ψ| < ε` with
/// `ε = 2^-(N+1)/(1 + ∫ T_a dμ)` and `μ_n([-a, a]) <= ∫ T_a dμ_n < ∫ T_a dμ + 1`.
pub fn polygonal_reduction(
    e: &EWLimit,
    rho: &COName,
    b: u64,
    n: u32,
) -> Result<(u64, u64, RationalPolygonal)> {
    polygonal_reduction_within(e, rho, b, n, DEFAULT_BUDGET_CAP)
}

/// [`polygonal_reduction`] with every computation against `μ` and the
/// sequence capped at `cap`; the lookups of `ρ` keep the default cap.
pub fn polygonal_reduction_within(
    e: &EWLimit,
    rho: &COName,
    b: u64,
    n: u32,
    cap: u64,
) -> Result<(u64, u64, RationalPolygonal)> {
    let (a, n0) = tail_bound_within(e, n + 2 + log2_ceil_int(b), cap)?;
    let tent = polygonal_as_bcf(tent_function(a));
    let nt = e.modulus_for(&tent, 1).at_within(0, cap)?;
    let tent_mass = integrate_checked(&e.limit, &tent, 4, cap)? + eps(4);
    let epsilon = eps(n + 1) / (Rational::one() + tent_mass);
    let mut budget = 1u64 << 12;
    let psi = loop {
        if let Answer::Answered(p) = polygonal_approx(rho, a, &epsilon, budget) {
            break p;
        }
        if budget >= DEFAULT_BUDGET_CAP {
            return Err(Error::BudgetExhausted {
                context: "polygonal_reduction",
                cap: DEFAULT_BUDGET_CAP,
            });
        }
        budget = (budget * 4).min(DEFAULT_BUDGET_CAP);
    };
    let bb = Rational::from(b);
    Ok((a, n0.max(nt), psi.clamp_values(&-&bb, &bb)))
}

/// Name-uniform moduli: `G(N) = max(n1, n2)` with `(a, n1, ψ)` from
/// [`polygonal_reduction`] at `N + 2` and `n2` from the modulus of `ψ` at
/// `N + 1`, splitting the gap as `2^-(N+2) + 2^-(N+1) + 2^-(N+2)`.
///
/// The query budget caps the computations against the limit and the
/// sequence. Reductions are cached per precision once found.
pub fn uniformize(e: &EWLimit) -> UEWLimit {
    let e2 = e.clone();
    UEWLimit::new(e.seq.clone(), e.limit.clone(), move |rho, b| {
        let (e, rho) = (e2.clone(), rho.clone());
        let found: Arc<Mutex<HashMap<u32, (u64, RationalPolygonal)>>> = Arc::default();
        Modulus::new(move |k, budget| {
            let cap = if budget == UNBOUNDED {
                DEFAULT_BUDGET_CAP
            } else {
                budget
            };
            let g = || -> Result<u64> {
                let cached = found.lock().unwrap().get(&k).cloned();
                let (n1, psi) = match cached {
                    Some(hit) => hit,
                    None => {
                        let (_, n1, psi) = polygonal_reduction_within(&e, &rho, b, k + 2, cap)?;
                        found.lock().unwrap().insert(k, (n1, psi.clone()));
                        (n1, psi)
                    }
                };
                let n2 = e
                    .modulus_for(&polygonal_as_bcf(psi), b + 1)
                    .at_within(k + 1, cap)?;
                Ok(n1.max(n2))
            };
            g().map_or(Answer::Pending, Answer::Answered)
        })
    })
}

/// Descriptor moduli from name moduli: `g_{f,B} = G_{ρ(f),B}`.
pub fn restrict(uw: &UEWLimit) -> EWLimit {
    let uw2 = uw.clone();
    EWLimit::new(uw.seq.clone(), uw.limit.clone(), move |f, b| {
        uw2.modulus_for_name(&co_name_of(f), b)
    })
}

/// The weak limit as a measure: `∫ f dμ` is approximated by
/// `∫ f dμ_{g(k+1)}` to `2^-(k+1)`, and the total mass is `∫ 1 dμ`.
pub fn limit_measure(
    seq: MeasureSeq,
    modulus_for: impl Fn(&BCFunction, u64) -> Modulus + Send + Sync + 'static,
) -> CMeasure {
    let itg = move |f: &BCFunction| {
        let g = modulus_for(f, f.bound());
        let (seq, f) = (seq.clone(), f.clone());
        CauchyReal::partial(move |k, budget| {
            let n = crate::answered!(g.query(k + 1, budget));
            integrate(&seq.at(n), &f).try_approx(k + 1, budget)
        })
    };
    let total = itg(&polygonal_as_bcf(RationalPolygonal::constant(
        Rational::one(),
    )));
    measure_from_integrator(itg, total)
}
