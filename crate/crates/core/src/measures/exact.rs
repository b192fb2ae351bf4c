//! Measures with exact rational masses: finitely many atoms plus polygonal densities.

use super::{Interval, Span};
use crate::error::{Error, Result};
use crate::functions::RationalPolygonal;
use crate::kernel::Rational;

/// A density `p` restricted to `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityPiece {
    pub p: RationalPolygonal,
    pub lo: Rational,
    pub hi: Rational,
}

/// `Σ w_i δ_{x_i} + Σ p_j(x) 1_{[lo_j, hi_j]}(x) dx`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactMeasure {
    pub atoms: Vec<(Rational, Rational)>,
    pub pieces: Vec<DensityPiece>,
}

impl ExactMeasure {
    pub fn zero() -> ExactMeasure {
        ExactMeasure::default()
    }

    pub fn atom(x: Rational, w: Rational) -> Result<ExactMeasure> {
        if w.is_negative() {
            return Err(Error::InvalidArgument(format!("negative atom weight {w}")));
        }
        let atoms = if w.is_zero() {
            Vec::new()
        } else {
            vec![(x, w)]
        };
        Ok(ExactMeasure {
            atoms,
            pieces: Vec::new(),
        })
    }

    /// Density `p` on `[lo, hi]`; fails if `p` is negative somewhere there.
    pub fn density(p: RationalPolygonal, lo: Rational, hi: Rational) -> Result<ExactMeasure> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "density support [{lo}, {hi}] is reversed"
            )));
        }
        let (min, _) = p.enclose(&lo, &hi);
        if min.is_negative() {
            return Err(Error::InvalidDensity(format!(
                "density takes the value {min} on [{lo}, {hi}]"
            )));
        }
        if lo == hi {
            return Ok(ExactMeasure::zero());
        }
        Ok(ExactMeasure {
            atoms: Vec::new(),
            pieces: vec![DensityPiece { p, lo, hi }],
        })
    }

    pub fn total(&self) -> Rational {
        self.atoms.iter().map(|(_, w)| w.clone()).sum::<Rational>()
            + self
                .pieces
                .iter()
                .map(|d| d.p.integral(&d.lo, &d.hi))
                .sum::<Rational>()
    }

    pub fn scale(&self, c: &Rational) -> ExactMeasure {
        if c.is_zero() {
            return ExactMeasure::zero();
        }
        ExactMeasure {
            atoms: self.atoms.iter().map(|(x, w)| (x.clone(), w * c)).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|d| DensityPiece {
                    p: d.p.affine(c, &Rational::zero()),
                    lo: d.lo.clone(),
                    hi: d.hi.clone(),
                })
                .collect(),
        }
    }

    pub fn sum(parts: impl IntoIterator<Item = ExactMeasure>) -> ExactMeasure {
        let mut out = ExactMeasure::zero();
        for m in parts {
            out.atoms.extend(m.atoms);
            out.pieces.extend(m.pieces);
        }
        out
    }

    fn density_mass(&self, spans: &[Span]) -> Rational {
        let mut total = Rational::zero();
        for d in &self.pieces {
            for s in spans {
                if let Some((a, b)) = s.clip(&d.lo, &d.hi) {
                    total += d.p.integral(&a, &b);
                }
            }
        }
        total
    }

    /// `μ(U)` for a disjoint union of open spans.
    pub fn mass_open(&self, spans: &[Span]) -> Rational {
        let atoms: Rational = self
            .atoms
            .iter()
            .filter(|(x, _)| spans.iter().any(|s| s.contains_open(x)))
            .map(|(_, w)| w.clone())
            .sum();
        atoms + self.density_mass(spans)
    }

    /// `μ(C)` for a disjoint union of closed spans.
    pub fn mass_closed(&self, spans: &[Span]) -> Rational {
        let atoms: Rational = self
            .atoms
            .iter()
            .filter(|(x, _)| spans.iter().any(|s| s.contains_closed(x)))
            .map(|(_, w)| w.clone())
            .sum();
        atoms + self.density_mass(spans)
    }

    /// `μ` of a disjoint union of finite open intervals.
    pub fn mass_intervals(&self, ivs: &[Interval]) -> Rational {
        let spans: Vec<Span> = ivs.iter().map(Interval::span).collect();
        self.mass_open(&spans)
    }

    /// Exact `∫ f dμ` for polygonal `f`; densities use Simpson's rule on the
    /// merged breakpoints, where the integrand is quadratic.
    pub fn integral(&self, f: &RationalPolygonal) -> Rational {
        let mut total: Rational = self.atoms.iter().map(|(x, w)| w * f.eval(x)).sum();
        let (two, six, four) = (Rational::int(2), Rational::int(6), Rational::int(4));
        for d in &self.pieces {
            let mut pts = vec![d.lo.clone(), d.hi.clone()];
            pts.extend(
                d.p.xs()
                    .iter()
                    .chain(f.xs())
                    .filter(|x| **x > d.lo && **x < d.hi)
                    .cloned(),
            );
            pts.sort();
            pts.dedup();
            for w in pts.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let m = (a + b) / &two;
                let g = |x: &Rational| d.p.eval(x) * f.eval(x);
                total += (b - a) * (g(a) + &four * g(&m) + g(b)) / &six;
            }
        }
        total
    }

    /// Atom locations and weights.
    pub fn atom_list(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    /// Least integer `a` with all mass inside `[-a, a]`.
    pub fn support_radius(&self) -> u64 {
        let ends = self
            .atoms
            .iter()
            .map(|(x, _)| x.abs())
            .chain(self.pieces.iter().flat_map(|d| [d.lo.abs(), d.hi.abs()]));
        ends.max().map(|m| m.ceil_i64().max(0) as u64).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn unit() -> ExactMeasure {
        ExactMeasure::density(RationalPolygonal::constant(r(1, 1)), r(0, 1), r(1, 1)).unwrap()
    }

    #[test]
    fn masses() {
        let lam = unit();
        assert_eq!(lam.total(), r(1, 1));
        assert_eq!(lam.mass_open(&[Span::finite(r(0, 1), r(1, 2))]), r(1, 2));
        assert_eq!(lam.mass_open(&[Span::finite(r(2, 1), r(3, 1))]), r(0, 1));
        let tri = RationalPolygonal::new(vec![(r(0, 1), r(2, 1)), (r(1, 2), r(0, 1))]).unwrap();
        assert_eq!(
            ExactMeasure::density(tri, r(0, 1), r(1, 2))
                .unwrap()
                .total(),
            r(1, 2)
        );
        let neg = RationalPolygonal::new(vec![(r(0, 1), r(-1, 1)), (r(1, 1), r(1, 1))]).unwrap();
        assert!(matches!(
            ExactMeasure::density(neg, r(0, 1), r(1, 1)),
            Err(Error::InvalidDensity(_))
        ));
        let mix = ExactMeasure::sum([
            ExactMeasure::atom(r(0, 1), r(1, 2)).unwrap(),
            lam.scale(&r(1, 2)),
        ]);
        assert_eq!(mix.total(), r(1, 1));
        assert_eq!(mix.mass_open(&[Span::finite(r(-1, 1), r(1, 2))]), r(3, 4));
        assert_eq!(mix.mass_closed(&[Span::point(r(0, 1))]), r(1, 2));
        assert_eq!(mix.mass_open(&[Span::new(Some(r(0, 1)), None)]), r(1, 2));
    }

    #[test]
    fn integrals() {
        let lam = unit();
        let clamp = RationalPolygonal::new(vec![(r(0, 1), r(0, 1)), (r(1, 1), r(1, 1))]).unwrap();
        assert_eq!(lam.integral(&clamp), r(1, 2));
        let tri = RationalPolygonal::new(vec![(r(0, 1), r(0, 1)), (r(1, 1), r(2, 1))]).unwrap();
        let m = ExactMeasure::density(tri, r(0, 1), r(1, 1)).unwrap();
        // ∫ 2x · x dx on [0, 1]
        assert_eq!(m.integral(&clamp), r(2, 3));
        assert_eq!(
            ExactMeasure::atom(r(1, 3), r(2, 1))
                .unwrap()
                .integral(&clamp),
            r(2, 3)
        );
    }
}
