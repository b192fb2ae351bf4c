//! Runs every conversion on one sequence and checks each certificate exactly.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::Error;
use crate::functions::{co_name_of, normalize_h, polygonal_as_bcf, RationalPolygonal};
use crate::kernel::{eps, Answer, LiminfWitness, LimsupWitness, Modulus, Rational};
use crate::measures::{
    almost_decidable_box, BoxInterval, CMeasure, ExactMeasure, Pi01Set, Sigma01Set, Span,
};
use crate::weakconv::{
    limit_measure, polygonal_reduction_within, restrict, tail_bound_within, uniformize, EWLimit,
};

use super::{
    ad_modulus, closed_witness, closed_witness_from_ad, ewc_from_witness_provider, lower_tuple,
    open_witness, provider_from_ewlimit, tuple_sum, uc_modulus_to_ewc, upper_tuple,
    WitnessProvider,
};

/// Precisions of the tail and reduction checks.
pub const REDUCTION_PRECISIONS: [u32; 3] = [2, 4, 6];

/// Stage at which limit-measure lower bounds are read.
const LIMIT_STAGE: usize = 16;

/// Required accuracy of limit-measure lower bounds.
const LIMIT_BITS: u32 = 10;

/// Points of the rational grid inside each cut.
const GRID_POINTS: u32 = 8;

/// Deliberate faults for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Every witness answers one index early.
    OffByOne,
    /// Every modulus answers for `k - 2` when asked for `k`.
    InflatedModulus,
    /// Every lower level tuple entry is raised by `1/4`.
    CorruptedTuple,
}

impl Fault {
    pub const ALL: [Fault; 3] = [
        Fault::OffByOne,
        Fault::InflatedModulus,
        Fault::CorruptedTuple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::OffByOne => "off-by-one",
            Fault::InflatedModulus => "inflated-modulus",
            Fault::CorruptedTuple => "corrupted-tuple",
        }
    }
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Fault, Error> {
        Fault::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fault {s:?}; expected one of off-by-one, inflated-modulus, corrupted-tuple")))
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail(String),
    Budget(String),
    Skipped(String),
}

impl Status {
    pub fn code(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail(_) => "fail",
            Status::Budget(_) => "budget",
            Status::Skipped(_) => "skipped",
        }
    }

    pub fn reason(&self) -> &str {
        match self {
            Status::Pass => "",
            Status::Fail(r) | Status::Budget(r) | Status::Skipped(r) => r,
        }
    }
}

/// One `(arrow, instance)` outcome with the certificates it produced.
#[derive(Clone, Debug)]
pub struct Row {
    pub arrow: &'static str,
    pub instance: String,
    pub status: Status,
    pub transcript: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub subject: String,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn count(&self, code: &str) -> usize {
        self.rows.iter().filter(|r| r.status.code() == code).count()
    }

    /// 0 when nothing failed or ran out of budget, 1 on any violation,
    /// otherwise 2.
    pub fn exit_code(&self) -> i32 {
        if self.count("fail") > 0 {
            1
        } else if self.count("budget") > 0 {
            2
        } else {
            0
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows
            .iter()
            .filter(|r| matches!(r.status, Status::Fail(_)))
    }

    /// `sequence,arrow,instance,status,reason`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sequence,arrow,instance,status,reason\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.subject,
                r.arrow,
                r.instance,
                r.status.code(),
                csv_field(r.status.reason())
            ));
        }
        out
    }

    pub fn transcripts(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "[{} {} {}] {}\n",
                self.subject,
                r.arrow,
                r.instance,
                r.status.code()
            ));
            for line in &r.transcript {
                out.push_str(&format!("  {line}\n"));
            }
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Named test functions and sets. A set is used as an open set, as its
/// closure, and as a box.
#[derive(Clone, Debug, Default)]
pub struct TestItems {
    pub functions: Vec<(String, RationalPolygonal)>,
    pub sets: Vec<(String, Vec<Span>)>,
}

#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub kmax: u32,
    pub window: u64,
    /// Budget for queries expected to answer.
    pub budget: u64,
    /// Budget for queries expected to stay pending.
    pub pending_budget: u64,
    /// Largest `k` of the level tuples.
    pub tuple_bits: u32,
    /// Largest term index the limit-measure arrow integrates against.
    pub max_term: u64,
    pub fault: Option<Fault>,
}

impl Default for HarnessConfig {
    fn default() -> HarnessConfig {
        HarnessConfig {
            kmax: 8,
            window: 32,
            budget: 1 << 24,
            pending_budget: 10_000,
            tuple_bits: 6,
            max_term: 1 << 16,
            fault: None,
        }
    }
}

/// Arrows that need a limit with exact oracles.
pub const ARROWS: [&str; 14] = [
    "ewlimit",
    "uniformize",
    "uc-modulus",
    "provider-modulus",
    "open-witness",
    "closed-witness",
    "provider-open",
    "provider-closed",
    "level-tuples",
    "tail-bound",
    "polygonal-reduction",
    "limit-measure",
    "ad-modulus",
    "closed-from-ad",
];

/// Every row skipped with the same reason.
pub fn skipped_report(subject: &str, reason: &str) -> Report {
    let rows = ARROWS
        .iter()
        .map(|a| Row {
            arrow: a,
            instance: "*".into(),
            status: Status::Skipped(reason.into()),
            transcript: vec![],
        })
        .collect();
    Report {
        subject: subject.into(),
        rows,
    }
}

struct Ctx<'a> {
    e: &'a EWLimit,
    limit: ExactMeasure,
    cfg: &'a HarnessConfig,
}

impl Ctx<'_> {
    fn at(&self, n: u64) -> ExactMeasure {
        self.e
            .seq
            .exact_at(n)
            .expect("sequence terms have exact oracles")
    }

    fn window(&self, n0: u64) -> std::ops::RangeInclusive<u64> {
        n0..=n0.saturating_add(self.cfg.window)
    }

    fn fault(&self, f: Fault) -> bool {
        self.cfg.fault == Some(f)
    }

    fn modulus_level(&self, k: u32) -> u32 {
        if self.fault(Fault::InflatedModulus) {
            k.saturating_sub(2)
        } else {
            k
        }
    }

    fn witness_answer(&self, n: u64) -> u64 {
        if self.fault(Fault::OffByOne) {
            n.saturating_sub(1)
        } else {
            n
        }
    }

    /// `|∫ f dμ_n - ∫ f dμ| < 2^-k` on the window of `g(k)`, `k <= kmax`.
    fn check_modulus(&self, g: &Modulus, f: &RationalPolygonal, t: &mut Vec<String>) -> Status {
        let target = self.limit.integral(f);
        for k in 1..=self.cfg.kmax {
            let n0 = match g.at_within(self.modulus_level(k), self.cfg.budget) {
                Ok(n) => n,
                Err(err) => return Status::Budget(format!("k={k}: {err}")),
            };
            t.push(format!("k={k} g={n0}"));
            for n in self.window(n0) {
                let gap = (self.at(n).integral(f) - &target).abs();
                if gap >= eps(k) {
                    return Status::Fail(format!("k={k} n={n} gap={gap}"));
                }
            }
        }
        Status::Pass
    }

    fn grid_below(&self, a: &Rational) -> Vec<Rational> {
        let half = Rational::new(1, 2);
        (0..GRID_POINTS).map(|j| a - (a + &half) * eps(j)).collect()
    }

    fn grid_above(&self, a: &Rational) -> Vec<Rational> {
        let half = Rational::new(1, 2);
        (0..GRID_POINTS).map(|j| a + (a + &half) * eps(j)).collect()
    }

    fn check_liminf(&self, w: &LiminfWitness, spans: &[Span], t: &mut Vec<String>) -> Status {
        let a = self.limit.mass_open(spans);
        for r in self.grid_below(&a) {
            let n0 = match w.query(&r, self.cfg.budget) {
                Answer::Answered(n) => self.witness_answer(n),
                Answer::Pending => {
                    return Status::Budget(format!("r={r} inside the cut is pending"))
                }
            };
            t.push(format!("r={r} n0={n0}"));
            if let Some(n) = self.window(n0).find(|&n| self.at(n).mass_open(spans) <= r) {
                return Status::Fail(format!(
                    "r={r} n0={n0}: mass at n={n} is {}",
                    self.at(n).mass_open(spans)
                ));
            }
        }
        for r in [a.clone(), &a + Rational::new(1, 4)] {
            if let Answer::Answered(n) = w.query(&r, self.cfg.pending_budget) {
                return Status::Fail(format!("r={r} outside the cut answered {n}"));
            }
            t.push(format!("r={r} pending"));
        }
        Status::Pass
    }

    fn check_limsup(&self, w: &LimsupWitness, spans: &[Span], t: &mut Vec<String>) -> Status {
        let a = self.limit.mass_closed(spans);
        for r in self.grid_above(&a) {
            let n0 = match w.query(&r, self.cfg.budget) {
                Answer::Answered(n) => self.witness_answer(n),
                Answer::Pending => {
                    return Status::Budget(format!("r={r} inside the cut is pending"))
                }
            };
            t.push(format!("r={r} n0={n0}"));
            if let Some(n) = self
                .window(n0)
                .find(|&n| self.at(n).mass_closed(spans) >= r)
            {
                return Status::Fail(format!(
                    "r={r} n0={n0}: mass at n={n} is {}",
                    self.at(n).mass_closed(spans)
                ));
            }
        }
        for r in [a.clone(), &a - Rational::new(1, 4)] {
            if let Answer::Answered(n) = w.query(&r, self.cfg.pending_budget) {
                return Status::Fail(format!("r={r} outside the cut answered {n}"));
            }
            t.push(format!("r={r} pending"));
        }
        Status::Pass
    }

    fn check_tuples(&self, f: &RationalPolygonal, t: &mut Vec<String>) -> Status {
        let b = f.bound();
        let h = normalize_h(&polygonal_as_bcf(f.clone()), b);
        let hp = h.as_polygonal().expect("normalized polygonal").clone();
        let mu = CMeasure::from_exact(self.limit.clone());
        let exact = self.limit.integral(&hp);
        for k in 0..=self.cfg.tuple_bits {
            let mut lower = lower_tuple(&mu, &h, k, k as usize);
            if self.fault(Fault::CorruptedTuple) {
                lower.iter_mut().for_each(|v| *v += Rational::new(1, 4));
            }
            let (lo, hi) = (
                tuple_sum(&lower, k),
                tuple_sum(&upper_tuple(&mu, &h, k, k as usize), k),
            );
            t.push(format!("k={k} lower={lo} upper={hi}"));
            if lo > exact || hi < exact {
                return Status::Fail(format!("k={k}: [{lo}, {hi}] misses {exact}"));
            }
        }
        Status::Pass
    }

    fn tail(m: &ExactMeasure, a: u64) -> Rational {
        let a = Rational::from(a);
        m.mass_open(&[Span::new(None, Some(-&a)), Span::new(Some(a), None)])
    }

    fn check_tail(&self, t: &mut Vec<String>) -> Status {
        for n in REDUCTION_PRECISIONS {
            let (a, n0) = match tail_bound_within(self.e, n, self.cfg.budget) {
                Ok(v) => v,
                Err(err) => return Status::Budget(format!("N={n}: {err}")),
            };
            t.push(format!("N={n} a={a} n0={n0}"));
            if Self::tail(&self.limit, a) >= eps(n) {
                return Status::Fail(format!("N={n}: limit tail outside [-{a}, {a}] too large"));
            }
            if let Some(m) = self
                .window(n0)
                .find(|&m| Self::tail(&self.at(m), a) >= eps(n))
            {
                return Status::Fail(format!("N={n}: tail at n={m} too large"));
            }
        }
        Status::Pass
    }

    fn check_reduction(&self, f: &RationalPolygonal, t: &mut Vec<String>) -> Status {
        let rho = co_name_of(&polygonal_as_bcf(f.clone()));
        let b = f.bound();
        for n in REDUCTION_PRECISIONS {
            let (a, n1, psi) = match polygonal_reduction_within(self.e, &rho, b, n, self.cfg.budget)
            {
                Ok(v) => v,
                Err(err) => return Status::Budget(format!("N={n}: {err}")),
            };
            t.push(format!("N={n} a={a} n1={n1} vertices={}", psi.len()));
            let d = f.sub(&psi);
            if psi.sup_abs() > Rational::from(b) {
                return Status::Fail(format!("N={n}: |psi| exceeds {b}"));
            }
            if self.limit.integral(&d).abs() >= eps(n) {
                return Status::Fail(format!("N={n}: limit gap too large"));
            }
            if let Some(m) = self
                .window(n1)
                .find(|&m| self.at(m).integral(&d).abs() >= eps(n))
            {
                return Status::Fail(format!("N={n}: gap at n={m} too large"));
            }
        }
        Status::Pass
    }

    fn check_ad(&self, p: &WitnessProvider, spans: &[Span], t: &mut Vec<String>) -> Status {
        let boxes: Vec<BoxInterval> = spans.iter().map(BoxInterval::from_span).collect();
        let pair = match almost_decidable_box(&p.limit, &boxes) {
            Ok(pair) => pair,
            Err(err) => return Status::Skipped(err.to_string()),
        };
        let (us, vs) = match (pair.u.exact_spans(), pair.v.exact_spans()) {
            (Some(u), Some(v)) => (u.to_vec(), v.to_vec()),
            _ => return Status::Skipped("pair without exact spans".into()),
        };
        let g = ad_modulus(p, &pair);
        let target = self.limit.mass_closed(spans);
        for k in 1..=self.cfg.kmax {
            let n0 = match g.at_within(self.modulus_level(k), self.cfg.budget) {
                Ok(n) => n,
                Err(err) => return Status::Budget(format!("k={k}: {err}")),
            };
            t.push(format!("k={k} g={n0}"));
            for n in self.window(n0) {
                let m = self.at(n);
                let v = m.mass_closed(spans);
                if (&v - &target).abs() >= eps(k) {
                    return Status::Fail(format!("k={k} n={n}: mass {v} vs {target}"));
                }
                if m.mass_open(&us) > v || v > m.total() - m.mass_open(&vs) {
                    return Status::Fail(format!("k={k} n={n}: sandwich violated"));
                }
            }
        }
        Status::Pass
    }

    fn check_limit_measure(
        &self,
        mu: &CMeasure,
        spans: &[Span],
        capped: &AtomicBool,
        t: &mut Vec<String>,
    ) -> Status {
        let u = match Sigma01Set::from_spans(spans.to_vec()) {
            Ok(u) => u,
            Err(err) => return Status::Skipped(err.to_string()),
        };
        let exact = self.limit.mass_open(spans);
        let lower = mu.mass_open(&u).lower(LIMIT_STAGE);
        t.push(format!("stage={LIMIT_STAGE} lower={lower} exact={exact}"));
        if lower > exact {
            Status::Fail(format!("lower bound {lower} exceeds {exact}"))
        } else if &exact - &lower > eps(LIMIT_BITS) && capped.load(Ordering::SeqCst) {
            Status::Budget(format!(
                "integrals need terms beyond n = {}",
                self.cfg.max_term
            ))
        } else if &exact - &lower > eps(LIMIT_BITS) {
            Status::Fail(format!(
                "lower bound {lower} not within 2^-{LIMIT_BITS} of {exact}"
            ))
        } else {
            Status::Pass
        }
    }
}

/// Runs every arrow on `e`, whose sequence terms and limit must be exact.
///
/// `provider` supplies the set witnesses for the arrows starting from
/// witnesses; without it they are derived from `e`.
pub fn portmanteau_harness(
    subject: &str,
    e: &EWLimit,
    provider: Option<&WitnessProvider>,
    items: &TestItems,
    cfg: &HarnessConfig,
) -> Report {
    let Some(limit) = e.limit.exact().cloned() else {
        return skipped_report(subject, "limit has no exact oracle");
    };
    if e.seq.exact_at(0).is_none() {
        return skipped_report(subject, "sequence terms have no exact oracle");
    }
    let ctx = Ctx { e, limit, cfg };
    let mut rows = Vec::new();
    let mut run =
        |arrow: &'static str, instance: &str, check: &mut dyn FnMut(&mut Vec<String>) -> Status| {
            let mut transcript = Vec::new();
            let status = check(&mut transcript);
            rows.push(Row {
                arrow,
                instance: instance.to_string(),
                status,
                transcript,
            });
        };

    let derived = provider_from_ewlimit(e);
    let wp = provider.cloned().unwrap_or_else(|| derived.clone());
    let uniform = restrict(&uniformize(e));
    let e_uc = e.clone();
    let uc = uc_modulus_to_ewc(e.seq.clone(), e.limit.clone(), move |f, b| {
        if f.as_polygonal().is_some() {
            e_uc.modulus_for(f, b)
        } else {
            Modulus::new(|_, _| Answer::Pending)
        }
    });
    let from_provider = ewc_from_witness_provider(&wp);

    for (name, f) in &items.functions {
        let fb = polygonal_as_bcf(f.clone());
        let b = f.bound();
        run("ewlimit", name, &mut |t| {
            ctx.check_modulus(&e.modulus_for(&fb, b), f, t)
        });
        run("uniformize", name, &mut |t| {
            ctx.check_modulus(&uniform.modulus_for(&fb, b), f, t)
        });
        run("uc-modulus", name, &mut |t| {
            ctx.check_modulus(&uc.modulus_for(&fb, b), f, t)
        });
        run("provider-modulus", name, &mut |t| {
            ctx.check_modulus(&from_provider.modulus_for(&fb, b), f, t)
        });
        run("level-tuples", name, &mut |t| ctx.check_tuples(f, t));
        run("polygonal-reduction", name, &mut |t| {
            ctx.check_reduction(f, t)
        });
    }
    run("tail-bound", "*", &mut |t| ctx.check_tail(t));

    let e_limit = e.clone();
    let capped = Arc::new(AtomicBool::new(false));
    let (hit, max_term) = (capped.clone(), cfg.max_term);
    let mu = limit_measure(e.seq.clone(), move |f, b| {
        let (g, hit) = (e_limit.modulus_for(f, b), hit.clone());
        Modulus::new(move |k, budget| match g.query(k, budget) {
            Answer::Answered(n) if n > max_term => {
                hit.store(true, Ordering::SeqCst);
                Answer::Pending
            }
            a => a,
        })
    });
    let p_ad = wp.clone();
    let adm = move |a: &crate::measures::AlmostDecidablePair| ad_modulus(&p_ad, a);
    let adm = Arc::new(adm);
    for (name, spans) in &items.sets {
        let open = Sigma01Set::from_spans(spans.clone());
        let closed = Pi01Set::closure_of(spans);
        let (Ok(open), Ok(closed)) = (open, closed) else {
            run("open-witness", name, &mut |_| {
                Status::Skipped("set is not a valid span list".into())
            });
            continue;
        };
        let closure = closed
            .exact_spans()
            .map(<[Span]>::to_vec)
            .unwrap_or_else(|| spans.clone());
        run("open-witness", name, &mut |t| {
            ctx.check_liminf(&open_witness(e, &open), spans, t)
        });
        run("closed-witness", name, &mut |t| {
            ctx.check_limsup(&closed_witness(e, &closed), &closure, t)
        });
        if provider.is_some() {
            run("provider-open", name, &mut |t| {
                ctx.check_liminf(&wp.for_open(&open), spans, t)
            });
            run("provider-closed", name, &mut |t| {
                ctx.check_limsup(&wp.for_closed(&closed), &closure, t)
            });
        }
        run("limit-measure", name, &mut |t| {
            capped.store(false, Ordering::SeqCst);
            ctx.check_limit_measure(&mu, spans, &capped, t)
        });
        run("ad-modulus", name, &mut |t| ctx.check_ad(&wp, spans, t));
        let adm = adm.clone();
        run("closed-from-ad", name, &mut |t| {
            let adm = adm.clone();
            match closed_witness_from_ad(move |a| adm(a), &wp.limit, &closed) {
                Ok(w) => ctx.check_limsup(&w, &closure, t),
                Err(err) => Status::Skipped(err.to_string()),
            }
        });
    }
    Report {
        subject: subject.into(),
        rows,
    }
}
