//! Computable finite Borel measures on the line.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{ExactMeasure, Pi01Set, Sigma01Set};
use crate::error::Result;
use crate::functions::RationalPolygonal;
use crate::kernel::{CauchyReal, LeftCEReal, Rational, RightCEReal, Step, UNBOUNDED};

type OpenFn = dyn Fn(&Sigma01Set) -> LeftCEReal + Send + Sync;

/// A finite Borel measure `μ` presented by its total mass and by left-c.e.
/// masses of effectively open sets.
///
/// Optional certificates: the complete list of atoms, a support radius, and an
/// exact rational form used for shortcuts and as a test oracle.
#[derive(Clone)]
pub struct CMeasure(Arc<MeasureInner>);

struct MeasureInner {
    total: CauchyReal,
    open: Box<OpenFn>,
    atoms: Option<Vec<(CauchyReal, Rational)>>,
    support: Option<u64>,
    exact: Option<ExactMeasure>,
    cache: Mutex<HashMap<usize, (Sigma01Set, LeftCEReal)>>,
}

impl CMeasure {
    /// Measure from a total mass and an open-set mass procedure.
    pub fn new(
        total: CauchyReal,
        open: impl Fn(&Sigma01Set) -> LeftCEReal + Send + Sync + 'static,
    ) -> CMeasure {
        CMeasure::build(total, Box::new(open), None, None, None)
    }

    fn build(
        total: CauchyReal,
        open: Box<OpenFn>,
        atoms: Option<Vec<(CauchyReal, Rational)>>,
        support: Option<u64>,
        exact: Option<ExactMeasure>,
    ) -> CMeasure {
        CMeasure(Arc::new(MeasureInner {
            total,
            open,
            atoms,
            support,
            exact,
            cache: Mutex::new(HashMap::new()),
        }))
    }

    fn rebuild(self, f: impl FnOnce(&mut MeasureInner)) -> CMeasure {
        let mut inner = match Arc::try_unwrap(self.0) {
            Ok(inner) => inner,
            Err(shared) => {
                let s = shared.clone();
                MeasureInner {
                    total: shared.total.clone(),
                    open: Box::new(move |u| CMeasure(s.clone()).mass_open(u)),
                    atoms: shared.atoms.clone(),
                    support: shared.support,
                    exact: shared.exact.clone(),
                    cache: Mutex::new(HashMap::new()),
                }
            }
        };
        f(&mut inner);
        CMeasure(Arc::new(inner))
    }

    /// Attaches the complete list of atoms (location, weight).
    pub fn with_atoms(self, atoms: Vec<(CauchyReal, Rational)>) -> CMeasure {
        self.rebuild(|m| m.atoms = Some(atoms))
    }

    /// Attaches a radius `a` with `μ(R \ [-a, a]) = 0`.
    pub fn with_support(self, a: u64) -> CMeasure {
        self.rebuild(|m| m.support = Some(a))
    }

    /// Measure with exact masses; all certificates are filled in.
    pub fn from_exact(m: ExactMeasure) -> CMeasure {
        let total = CauchyReal::from_rational(m.total());
        let atoms = m
            .atoms
            .iter()
            .map(|(x, w)| (CauchyReal::from_rational(x.clone()), w.clone()))
            .collect();
        let support = m.support_radius();
        let em = m.clone();
        let open = move |u: &Sigma01Set| {
            if let Some(spans) = u.exact_spans() {
                return LeftCEReal::constant(em.mass_open(spans));
            }
            let (em, u) = (em.clone(), u.clone());
            LeftCEReal::new(move |i| {
                let v = em.mass_intervals(&u.merged_prefix(i));
                if u.is_finished_by(i) {
                    Step::Final(v)
                } else {
                    Step::Value(v)
                }
            })
        };
        CMeasure::build(total, Box::new(open), Some(atoms), Some(support), Some(m))
    }

    pub fn zero() -> CMeasure {
        CMeasure::from_exact(ExactMeasure::zero())
    }

    /// `μ(R)`.
    pub fn total_mass(&self) -> &CauchyReal {
        &self.0.total
    }

    /// `μ(U)` as a left-c.e. real; memoized per set.
    pub fn mass_open(&self, u: &Sigma01Set) -> LeftCEReal {
        if u.known_empty() {
            return LeftCEReal::constant(Rational::zero());
        }
        if let (Some(m), Some(spans)) = (&self.0.exact, u.exact_spans()) {
            return LeftCEReal::constant(m.mass_open(spans));
        }
        let key = u.id();
        if let Some((_, l)) = self.0.cache.lock().unwrap().get(&key) {
            return l.clone();
        }
        let l = (self.0.open)(u);
        self.0
            .cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| (u.clone(), l.clone()))
            .1
            .clone()
    }

    pub fn atoms(&self) -> Option<&[(CauchyReal, Rational)]> {
        self.0.atoms.as_deref()
    }

    pub fn support_radius(&self) -> Option<u64> {
        self.0.support
    }

    pub fn exact(&self) -> Option<&ExactMeasure> {
        self.0.exact.as_ref()
    }

    /// Exact `∫ f dμ` when both the measure and `f` are exact.
    pub fn exact_integral(&self, f: &RationalPolygonal) -> Option<Rational> {
        self.exact().map(|m| m.integral(f))
    }
}

impl fmt::Debug for CMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.exact {
            Some(m) => write!(f, "CMeasure({m:?})"),
            None => write!(f, "CMeasure(total {:?})", self.0.total),
        }
    }
}

/// `μ(C)` as a right-c.e. real: `upper(i) = μ(R)`'s upper bound at `i` minus
/// the lower bound of `μ(R \ C)` at `i`.
pub fn mass_closed(mu: &CMeasure, c: &Pi01Set) -> RightCEReal {
    if c.known_empty() {
        return RightCEReal::constant(Rational::zero());
    }
    if let (Some(m), Some(spans)) = (mu.exact(), c.exact_spans()) {
        return RightCEReal::constant(m.mass_closed(spans));
    }
    let total = mu.total_mass().clone();
    let rest = mu.mass_open(c.complement());
    RightCEReal::new(move |i| {
        // A partial total mass stalls the stream at the best bound available.
        let bound = (0..=i as u32)
            .rev()
            .find_map(|j| total.try_upper(j, UNBOUNDED).ok())
            .expect("total mass has no approximation at precision 0");
        let up = bound - rest.lower(i);
        let v = Rational::max_of(&up, &Rational::zero()).clone();
        if total.exact().is_some() && rest.is_final_at(i) {
            Step::Final(v)
        } else {
            Step::Value(v)
        }
    })
}

/// `w δ_x`. Mass of `U` is `w` once an enumerated interval certifiably
/// contains `x` in its interior.
pub fn point_mass(x: CauchyReal, w: Rational) -> Result<CMeasure> {
    if let Some(q) = x.exact() {
        return Ok(CMeasure::from_exact(ExactMeasure::atom(q.clone(), w)?));
    }
    if w.is_negative() {
        return Err(crate::error::Error::InvalidArgument(format!(
            "negative atom weight {w}"
        )));
    }
    let support = (x.approx(0).abs() + Rational::one()).ceil_i64() as u64;
    let (xc, wc) = (x.clone(), w.clone());
    let open = move |u: &Sigma01Set| {
        let (x, w, u) = (xc.clone(), wc.clone(), u.clone());
        LeftCEReal::new(move |i| {
            let (lo, hi) = (x.lower(i as u32), x.upper(i as u32));
            if u.merged_prefix(i).iter().any(|iv| iv.lo < lo && hi < iv.hi) {
                Step::Final(w.clone())
            } else {
                Step::Value(Rational::zero())
            }
        })
    };
    let total = CauchyReal::from_rational(w.clone());
    Ok(CMeasure::build(
        total,
        Box::new(open),
        Some(vec![(x, w)]),
        Some(support),
        None,
    ))
}

/// Measure with density `p` on `[c, d]`.
pub fn polygonal_density_measure(
    p: RationalPolygonal,
    c: Rational,
    d: Rational,
) -> Result<CMeasure> {
    Ok(CMeasure::from_exact(ExactMeasure::density(p, c, d)?))
}

/// `E -> λ(E ∩ [0, q])`.
pub fn truncated_lebesgue(q: Rational) -> Result<CMeasure> {
    polygonal_density_measure(
        RationalPolygonal::constant(Rational::one()),
        Rational::zero(),
        q,
    )
}

/// `Σ w_j μ_j`.
pub fn mixture(components: Vec<(CMeasure, Rational)>) -> Result<CMeasure> {
    if let Some((_, w)) = components.iter().find(|(_, w)| w.is_negative()) {
        return Err(crate::error::Error::InvalidArgument(format!(
            "negative mixture weight {w}"
        )));
    }
    let components: Vec<_> = components
        .into_iter()
        .filter(|(_, w)| !w.is_zero())
        .collect();
    if components.iter().all(|(m, _)| m.exact().is_some()) {
        let parts = components.iter().map(|(m, w)| m.exact().unwrap().scale(w));
        return Ok(CMeasure::from_exact(ExactMeasure::sum(parts)));
    }
    let total = CauchyReal::linear(
        components
            .iter()
            .map(|(m, w)| (w.clone(), m.total_mass().clone()))
            .collect(),
    );
    let atoms = components
        .iter()
        .map(|(m, w)| {
            m.atoms().map(|a| {
                a.iter()
                    .map(|(x, v)| (x.clone(), v * w))
                    .collect::<Vec<_>>()
            })
        })
        .collect::<Option<Vec<_>>>()
        .map(|v| v.concat());
    let support = components
        .iter()
        .map(|(m, _)| m.support_radius())
        .collect::<Option<Vec<_>>>();
    let support = support.map(|v| v.into_iter().max().unwrap_or(0));
    let comps = components.clone();
    let open = move |u: &Sigma01Set| {
        let streams: Vec<(LeftCEReal, Rational)> = comps
            .iter()
            .map(|(m, w)| (m.mass_open(u), w.clone()))
            .collect();
        LeftCEReal::new(move |i| {
            let v: Rational = streams.iter().map(|(s, w)| w * s.lower(i)).sum();
            if streams.iter().all(|(s, _)| s.is_final_at(i)) {
                Step::Final(v)
            } else {
                Step::Value(v)
            }
        })
    };
    Ok(CMeasure::build(total, Box::new(open), atoms, support, None))
}
