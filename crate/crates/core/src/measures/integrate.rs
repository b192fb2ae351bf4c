//! Integration of bounded continuous functions against computable measures.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{closed_superlevel, mass_closed, superlevel_open, CMeasure, Sigma01Set};
use crate::error::{Error, Result};
use crate::functions::{indicator_approx, normalize_h, polygonal_as_bcf, BCFunction};
use crate::kernel::{eps, Answer, CauchyReal, LeftCEReal, Rational, RightCEReal, Step, UNBOUNDED};

/// `∫ f dμ` for bounded continuous `f`.
///
/// Exact measures against polygonal `f` are integrated exactly. Otherwise
/// functions with values in `[0, 1]` go through [`integrate_unit`], and any
/// other `f` with `|f| <= B` through `h = (f + B + 1)/(2(B + 1))`:
/// `∫ f dμ = 2(B + 1) ∫ h dμ - (B + 1) μ(R)`.
pub fn integrate(mu: &CMeasure, f: &BCFunction) -> CauchyReal {
    if let Some(p) = f.as_polygonal() {
        if let Some(v) = mu.exact_integral(p) {
            return CauchyReal::from_rational(v);
        }
        let (lo, hi) = (p.ys().iter().min().unwrap(), p.ys().iter().max().unwrap());
        if !lo.is_negative() && *hi <= Rational::one() {
            return integrate_unit(mu, f);
        }
    }
    let b = f.bound();
    let b1 = Rational::from(b + 1);
    let h = integrate_unit(mu, &normalize_h(f, b));
    CauchyReal::linear(vec![
        (Rational::int(2) * &b1, h),
        (-b1, mu.total_mass().clone()),
    ])
}

/// `∫ f dμ` for `0 <= f <= 1` by a two-sided squeeze of `t -> μ({f > t})` on `[0, 1]`.
///
/// On a cell `[a, b]` of a partition of `[0, 1]` the integral of
/// `t -> μ({f > t})` lies between `(b - a)` times a lower bound of
/// `μ({f > b})` and `(b - a)` times an upper bound of `μ({f >= a})`. Cells
/// whose two bounds differ by more than `2^-(k+1)` are bisected and every
/// stream advanced, until the bracket is at most `2^-k` wide. The budget
/// counts cell evaluations.
pub fn integrate_unit(mu: &CMeasure, f: &BCFunction) -> CauchyReal {
    let sq = Arc::new(Squeeze {
        mu: mu.clone(),
        f: f.clone(),
        levels: Mutex::new(HashMap::new()),
    });
    CauchyReal::partial(move |k, budget| sq.approx(k, budget))
}

/// `integrate(mu, f).approx(k)` with escalating budget up to `cap`.
pub fn integrate_checked(mu: &CMeasure, f: &BCFunction, k: u32, cap: u64) -> Result<Rational> {
    let itg = integrate(mu, f);
    let mut budget = 64u64.min(cap);
    loop {
        if let Answer::Answered(v) = itg.try_approx(k, budget) {
            return Ok(v);
        }
        if budget >= cap {
            return Err(Error::BudgetExhausted {
                context: "integrate",
                cap,
            });
        }
        budget = budget.saturating_mul(4).min(cap);
    }
}

struct Squeeze {
    mu: CMeasure,
    f: BCFunction,
    levels: Mutex<HashMap<Rational, (LeftCEReal, RightCEReal)>>,
}

impl Squeeze {
    fn level(&self, t: &Rational) -> (LeftCEReal, RightCEReal) {
        if let Some(v) = self.levels.lock().unwrap().get(t) {
            return v.clone();
        }
        let open = self.mu.mass_open(&superlevel_open(&self.f, t));
        let closed = mass_closed(&self.mu, &closed_superlevel(&self.f, t));
        self.levels
            .lock()
            .unwrap()
            .entry(t.clone())
            .or_insert((open, closed))
            .clone()
    }

    fn approx(&self, k: u32, budget: u64) -> Answer<Rational> {
        let target = eps(k);
        let split_gap = eps(k + 1);
        let mut cells: Vec<(Rational, Rational)> = vec![(Rational::zero(), Rational::one())];
        let mut stage = k as usize + 2;
        let mut spent = 0u64;
        loop {
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            let mut next = Vec::with_capacity(cells.len());
            for (a, b) in &cells {
                let below = self.level(b).0.lower(stage);
                let above = self.level(a).1.upper(stage);
                let w = b - a;
                lo += &w * &below;
                hi += &w * &above;
                if &above - &below > split_gap {
                    let m = Rational::midpoint(a, b);
                    next.push((a.clone(), m.clone()));
                    next.push((m, b.clone()));
                } else {
                    next.push((a.clone(), b.clone()));
                }
            }
            spent = spent.saturating_add(cells.len() as u64);
            if &hi - &lo <= target {
                return Answer::Answered(Rational::midpoint(&lo, &hi));
            }
            if budget != UNBOUNDED && spent >= budget {
                return Answer::Pending;
            }
            cells = next;
            stage += 1;
        }
    }
}

/// Measure recovered from its integration functional: `μ(U)` is the
/// supremum over `i` of certified lower bounds of `∫ t_i dμ`, with `t_i`
/// the `i`-th indicator approximation of `U`.
pub fn measure_from_integrator(
    itg: impl Fn(&BCFunction) -> CauchyReal + Send + Sync + 'static,
    total: CauchyReal,
) -> CMeasure {
    let itg = Arc::new(itg);
    CMeasure::new(total, move |u: &Sigma01Set| {
        let (itg, u) = (itg.clone(), u.clone());
        LeftCEReal::new(move |i| {
            let t = polygonal_as_bcf(indicator_approx(&u, i as u32));
            let v = match itg(&t).try_approx(i as u32 + 1, UNBOUNDED) {
                Answer::Answered(v) => v - eps(i as u32 + 1),
                // A partial integral adds nothing at this stage.
                Answer::Pending => Rational::zero(),
            };
            Step::Value(Rational::max_of(&v, &Rational::zero()).clone())
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{tent_function, RationalPolygonal};
    use crate::kernel::CauchyReal;
    use crate::measures::{mixture, point_mass, truncated_lebesgue, Span};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn clamp01() -> BCFunction {
        polygonal_as_bcf(
            RationalPolygonal::new(vec![(r(0, 1), r(0, 1)), (r(1, 1), r(1, 1))]).unwrap(),
        )
    }

    fn lam() -> CMeasure {
        truncated_lebesgue(r(1, 1)).unwrap()
    }

    #[test]
    fn exact_shortcut_examples() {
        assert_eq!(integrate(&lam(), &clamp01()).approx(10), r(1, 2));
        let one = polygonal_as_bcf(RationalPolygonal::constant(r(1, 1)));
        let delta = point_mass(CauchyReal::from_rational(r(0, 1)), r(1, 1)).unwrap();
        assert_eq!(integrate(&delta, &one).approx(3), r(1, 1));
        assert_eq!(
            integrate(&lam(), &polygonal_as_bcf(tent_function(1))).approx(3),
            r(1, 1)
        );
    }

    #[test]
    fn squeeze_matches_exact_values() {
        for k in [0u32, 4, 8, 12] {
            let v = integrate_unit(&lam(), &clamp01()).approx(k);
            assert!((v - r(1, 2)).abs() <= eps(k), "k={k}");
            let v = integrate_unit(&lam(), &polygonal_as_bcf(tent_function(1))).approx(k);
            assert!((v - r(1, 1)).abs() <= eps(k));
        }
        let delta = point_mass(CauchyReal::from_rational(r(1, 3)), r(2, 1)).unwrap();
        let v = integrate_unit(&delta, &clamp01()).approx(10);
        assert!((v - r(2, 3)).abs() <= eps(10));
    }

    #[test]
    fn squeeze_with_generic_pieces() {
        let fuzzy = point_mass(CauchyReal::new(|k| r(1, 3) + eps(k + 1)), r(1, 2)).unwrap();
        let mu = mixture(vec![(fuzzy, r(1, 1)), (lam(), r(1, 2))]).unwrap();
        let v = integrate(&mu, &clamp01()).approx(6);
        assert!((v - r(5, 12)).abs() <= eps(6));
        let opaque = clamp01().opaque();
        let v = integrate(&lam(), &opaque).approx(4);
        assert!((v - r(1, 2)).abs() <= eps(4));
    }

    #[test]
    fn general_functions_use_normalisation() {
        let f = polygonal_as_bcf(
            RationalPolygonal::new(vec![
                (r(-1, 1), r(-1, 2)),
                (r(0, 1), r(2, 1)),
                (r(1, 2), r(1, 4)),
                (r(3, 4), r(1, 1)),
            ])
            .unwrap(),
        );
        let exact = lam().exact_integral(f.as_polygonal().unwrap()).unwrap();
        let mu = mixture(vec![
            (
                point_mass(CauchyReal::new(|_| r(5, 1)), r(1, 1)).unwrap(),
                r(1, 1),
            ),
            (lam(), r(1, 1)),
        ])
        .unwrap();
        let v = integrate(&mu, &f).approx(8);
        assert!((v - (exact + r(1, 1))).abs() <= eps(8));
        assert!(integrate_checked(&lam(), &f.opaque(), 20, 4).is_err());
    }

    #[test]
    fn integrator_round_trip() {
        let l = lam();
        let mu = measure_from_integrator(
            move |f| integrate(&l, f),
            CauchyReal::from_rational(r(1, 1)),
        );
        let u = Sigma01Set::from_spans(vec![Span::finite(r(0, 1), r(1, 2))]).unwrap();
        let s = mu.mass_open(&u);
        assert!(s.lower(12) <= r(1, 2));
        assert!(r(1, 2) - s.lower(12) < eps(9));
        let z = CMeasure::zero();
        let mz = measure_from_integrator(
            move |f| integrate(&z, f),
            CauchyReal::from_rational(r(0, 1)),
        );
        assert_eq!(mz.mass_open(&u).lower(8), r(0, 1));
    }
}
