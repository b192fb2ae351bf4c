//! Integral witnesses from level-set witnesses, and moduli from witness providers.

use crate::functions::{normalize_h, BCFunction};
use crate::kernel::{eps, wit_to_mod, Answer, LiminfWitness, LimsupWitness, Modulus, Rational};
use crate::measures::{
    closed_superlevel, integrate, mass_closed, superlevel_open, CMeasure, Pi01Set, Sigma01Set,
};
use crate::weakconv::EWLimit;

use super::WitnessProvider;

/// Largest `k` of a level tuple.
const MAX_LEVEL_BITS: u32 = 30;

fn level(j: u64, k: u32) -> Rational {
    Rational::from(j) * eps(k)
}

/// `v_j`, `j < 2^k`: certified lower bounds at stage `s` of
/// `μ({f > (j+1) 2^-k})`.
pub fn lower_tuple(mu: &CMeasure, f: &BCFunction, k: u32, s: usize) -> Vec<Rational> {
    (0..1u64 << k)
        .map(|j| mu.mass_open(&superlevel_open(f, &level(j + 1, k))).lower(s))
        .collect()
}

/// `u_j`, `j < 2^k`: certified upper bounds at stage `s` of
/// `μ({f >= j 2^-k})`.
pub fn upper_tuple(mu: &CMeasure, f: &BCFunction, k: u32, s: usize) -> Vec<Rational> {
    (0..1u64 << k)
        .map(|j| mass_closed(mu, &closed_superlevel(f, &level(j, k))).upper(s))
        .collect()
}

/// `2^-k Σ_j t_j`.
pub fn tuple_sum(t: &[Rational], k: u32) -> Rational {
    t.iter().cloned().sum::<Rational>() * eps(k)
}

/// Liminf witness for `∫ f dμ_n`, `0 < f < 1`.
///
/// Round `m` takes `k = m` and stage `m`, at a cost of `2^m` budget units.
/// Once `2^-k Σ v_j = S > r`, the levels are queried at `v_j - (S - r)/2`
/// and the answer is the largest threshold: then
/// `∫ f dμ_n >= 2^-k Σ_j μ_n({f > (j+1) 2^-k}) > r`.
pub fn liminf_integral_witness(p: &WitnessProvider, f: &BCFunction) -> LiminfWitness {
    let (p, f) = (p.clone(), f.clone());
    LiminfWitness::new(move |r, budget| {
        let mut used = 0u64;
        for k in 0..=MAX_LEVEL_BITS {
            used = used.saturating_add(1 << k);
            if used > budget {
                return Answer::Pending;
            }
            let sets: Vec<Sigma01Set> = (0..1u64 << k)
                .map(|j| superlevel_open(&f, &level(j + 1, k)))
                .collect();
            let v: Vec<Rational> = sets
                .iter()
                .map(|u| p.limit.mass_open(u).lower(k as usize))
                .collect();
            let s = tuple_sum(&v, k);
            if s > *r {
                let shift = (s - r) / Rational::int(2);
                let mut n0 = 0;
                for (u, vj) in sets.iter().zip(&v) {
                    let q = vj - &shift;
                    if q.is_negative() {
                        continue;
                    }
                    n0 = n0.max(crate::answered!(p.for_open(u).query(&q, budget)));
                }
                return Answer::Answered(n0);
            }
        }
        Answer::Pending
    })
}

/// Limsup witness for `∫ f dμ_n`, `0 < f < 1`, dual to
/// [`liminf_integral_witness`]: with `2^-k Σ u_j = S < r` the closed levels
/// are queried at `u_j + (r - S)/2`, and
/// `∫ f dμ_n <= 2^-k Σ_j μ_n({f >= j 2^-k}) < r`.
pub fn limsup_integral_witness(p: &WitnessProvider, f: &BCFunction) -> LimsupWitness {
    let (p, f) = (p.clone(), f.clone());
    LimsupWitness::new(move |r, budget| {
        let mut used = 0u64;
        for k in 0..=MAX_LEVEL_BITS {
            used = used.saturating_add(1 << k);
            if used > budget {
                return Answer::Pending;
            }
            let sets: Vec<Pi01Set> = (0..1u64 << k)
                .map(|j| closed_superlevel(&f, &level(j, k)))
                .collect();
            let u: Vec<Rational> = sets
                .iter()
                .map(|c| mass_closed(&p.limit, c).upper(k as usize))
                .collect();
            let s = tuple_sum(&u, k);
            if s < *r {
                let shift = (r - s) / Rational::int(2);
                let mut n0 = 0;
                for (c, uj) in sets.iter().zip(&u) {
                    if c.known_empty() {
                        continue;
                    }
                    n0 = n0.max(crate::answered!(p
                        .for_closed(c)
                        .query(&(uj + &shift), budget)));
                }
                return Answer::Answered(n0);
            }
        }
        Answer::Pending
    })
}

/// Modulus for `μ_n(R) -> μ(R)` from the provider.
pub fn total_mass_modulus(p: &WitnessProvider) -> Modulus {
    let g1 = p.for_open(&Sigma01Set::whole());
    let g2 = p.for_closed(&Pi01Set::whole());
    wit_to_mod(&g1, &g2, p.limit.total_mass())
}

/// Effective weak limit from a witness provider.
///
/// For `|f| <= B`, `h = (f + B + 1)/(2(B + 1))` lies strictly between `0`
/// and `1`, and `∫ f dμ_n - ∫ f dμ` is `2(B + 1)` times the gap for `h`
/// minus `(B + 1)` times the total-mass gap. The modulus is the larger of the
/// `h` modulus at `k + 1 + ⌈log2 2(B+1)⌉` and the total-mass modulus at
/// `k + 1 + ⌈log2 (B+1)⌉`.
pub fn ewc_from_witness_provider(p: &WitnessProvider) -> EWLimit {
    let p2 = p.clone();
    let total = total_mass_modulus(p);
    EWLimit::new(p.seq.clone(), p.limit.clone(), move |f, b| {
        let h = normalize_h(f, b);
        let gh = wit_to_mod(
            &liminf_integral_witness(&p2, &h),
            &limsup_integral_witness(&p2, &h),
            &integrate(&p2.limit, &h),
        );
        let c = Rational::from(2 * (b + 1)).ceil_log2() as u32;
        let c_total = Rational::from(b + 1).ceil_log2() as u32;
        gh.shifted(1 + c).max(&total.shifted(1 + c_total))
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::functions::{polygonal_as_bcf, RationalPolygonal};
    use crate::portmanteau::family_provider;
    use crate::weakconv::{Constant, Family, Mixture, ShiftingAtom, TruncatedLebesgue};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn poly(pts: &[(i64, i64, i64)]) -> RationalPolygonal {
        RationalPolygonal::new(pts.iter().map(|&(x, n, d)| (r(x, 1), r(n, d))).collect()).unwrap()
    }

    fn s2() -> Arc<dyn Family> {
        Arc::new(TruncatedLebesgue::new("1 - 2^-n".parse().unwrap(), r(1, 1)).unwrap())
    }

    fn lam() -> crate::measures::ExactMeasure {
        crate::measures::ExactMeasure::density(
            RationalPolygonal::constant(r(1, 1)),
            r(0, 1),
            r(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn tuples_bracket_the_integral() {
        let f = poly(&[(0, 1, 8), (1, 7, 8)]);
        let mu = CMeasure::from_exact(lam());
        let exact = lam().integral(&f);
        let fb = polygonal_as_bcf(f);
        for k in 0..6 {
            assert!(tuple_sum(&lower_tuple(&mu, &fb, k, 0), k) <= exact);
            assert!(tuple_sum(&upper_tuple(&mu, &fb, k, 0), k) >= exact);
        }
    }

    #[test]
    fn integral_witnesses_on_constant_sequence() {
        let f = poly(&[(0, 1, 8), (1, 7, 8)]);
        let p = family_provider(Arc::new(Constant(lam())));
        let fb = polygonal_as_bcf(f.clone());
        let exact = lam().integral(&f);
        assert_eq!(
            liminf_integral_witness(&p, &fb).query(&(&exact - eps(6)), 1 << 20),
            Answer::Answered(0)
        );
        assert_eq!(
            limsup_integral_witness(&p, &fb).query(&(&exact + eps(6)), 1 << 20),
            Answer::Answered(0)
        );
        assert_eq!(
            liminf_integral_witness(&p, &fb).query(&r(1, 1), 1 << 12),
            Answer::Pending
        );
        assert_eq!(
            limsup_integral_witness(&p, &fb).query(&(&exact - eps(6)), 1 << 12),
            Answer::Pending
        );
    }

    #[test]
    fn integral_witnesses_on_s2() {
        let clamp = polygonal_as_bcf(poly(&[(0, 0, 1), (1, 1, 1)]));
        let h = normalize_h(&clamp, 1);
        let hp = h.as_polygonal().unwrap().clone();
        let fam = s2();
        let p = family_provider(fam.clone());
        let exact = fam.limit().integral(&hp);
        let lo = &exact - eps(5);
        let n0 = liminf_integral_witness(&p, &h)
            .query(&lo, 1 << 20)
            .ok()
            .unwrap();
        assert!((n0..n0 + 33).all(|n| fam.at(n).integral(&hp) > lo));
        let hi = &exact + eps(5);
        let n0 = limsup_integral_witness(&p, &h)
            .query(&hi, 1 << 20)
            .ok()
            .unwrap();
        assert!((n0..n0 + 33).all(|n| fam.at(n).integral(&hp) < hi));
    }

    #[test]
    fn provider_moduli_satisfy_contract() {
        let clamp = poly(&[(0, 0, 1), (1, 1, 1)]);
        let s1: Arc<dyn Family> = Arc::new(ShiftingAtom::new(r(0, 1), r(1, 1), r(1, 1)).unwrap());
        let mix: Arc<dyn Family> =
            Arc::new(Mixture::new(vec![(s1, r(1, 2)), (s2(), r(1, 2))]).unwrap());
        for fam in [s2(), mix] {
            let e = ewc_from_witness_provider(&family_provider(fam.clone()));
            let g = e.modulus_for(&polygonal_as_bcf(clamp.clone()), 1);
            let target = fam.limit().integral(&clamp);
            for k in 1..=6 {
                let n0 = g.at(k).unwrap();
                assert!(
                    (n0..n0 + 33).all(|n| (fam.at(n).integral(&clamp) - &target).abs() < eps(k)),
                    "k={k}"
                );
            }
        }
        let e = ewc_from_witness_provider(&family_provider(Arc::new(Constant(lam()))));
        assert_eq!(e.modulus_for(&polygonal_as_bcf(clamp), 1).at(6).unwrap(), 0);
    }
}
