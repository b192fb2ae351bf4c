//! Acceptance criteria, checked against exact rational oracles.
//!
//! Runs without the libtest harness so that every criterion prints one
//! `PASS` or `FAIL` line; the process exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use ewc::cli::corpus::{parse_corpus, CorpusSpec, DEFAULT_CORPUS};
use ewc::cli::gated::{clamp01, Gate, GatedTarget, Target};
use ewc::functions::{co_name_of, polygonal_as_bcf, RationalPolygonal};
use ewc::kernel::{eps, Answer, LiminfWitness, LimsupWitness, Rational};
use ewc::measures::{
    almost_decidable_box, integrate, integrate_unit, measure_from_integrator, BoxInterval,
    CMeasure, ExactMeasure, Pi01Set, Sigma01Set, Span,
};
use ewc::portmanteau::{
    ad_modulus, closed_witness, closed_witness_from_ad, ewc_from_witness_provider, family_provider,
    lower_tuple, open_witness, tuple_sum, upper_tuple,
};
use ewc::weakconv::{
    family_ewlimit, polygonal_reduction, restrict, tail_bound, uniformize, Family,
};

const WINDOW: u64 = 32;
const CAP: u64 = 1 << 24;
const PENDING_BUDGET: u64 = 10_000;
const GRID: u32 = 8;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus() -> CorpusSpec {
    parse_corpus(DEFAULT_CORPUS).expect("default corpus parses")
}

fn half() -> Rational {
    Rational::new(1, 2)
}

fn quarter() -> Rational {
    Rational::new(1, 4)
}

/// Points strictly inside the left cut of `a`.
fn below(a: &Rational) -> Vec<Rational> {
    (0..GRID).map(|j| a - (a + half()) * eps(j)).collect()
}

/// Points strictly inside the right cut of `a`.
fn above(a: &Rational) -> Vec<Rational> {
    (0..GRID).map(|j| a + (a + half()) * eps(j)).collect()
}

fn closure(spans: &[Span]) -> (Pi01Set, Vec<Span>) {
    let c = Pi01Set::closure_of(spans).expect("corpus sets are valid");
    let exact = c
        .exact_spans()
        .expect("closures of span lists are exact")
        .to_vec();
    (c, exact)
}

/// Liminf witness contract on the exact terms: answers inside the cut with a
/// window-valid threshold, stays pending at `a` and `a + 1/4`.
fn check_open(
    w: &LiminfWitness,
    fam: &dyn Family,
    spans: &[Span],
    what: &str,
) -> Result<usize, String> {
    let a = fam.limit().mass_open(spans);
    for r in below(&a) {
        let n0 = match w.query(&r, CAP) {
            Answer::Answered(n) => n,
            Answer::Pending => return Err(format!("{what}: pending at r = {r} < {a}")),
        };
        if let Some(n) = (n0..=n0 + WINDOW).find(|&n| fam.at(n).mass_open(spans) <= r) {
            return Err(format!("{what}: r = {r}, n0 = {n0}, but mu_{n}(U) <= r"));
        }
    }
    for r in [a.clone(), &a + quarter()] {
        if w.query(&r, PENDING_BUDGET).is_answered() {
            return Err(format!("{what}: answered r = {r} outside the cut of {a}"));
        }
    }
    Ok(GRID as usize + 2)
}

/// Limsup witness contract on the closed spans `c`.
fn check_closed(
    w: &LimsupWitness,
    fam: &dyn Family,
    c: &[Span],
    what: &str,
) -> Result<usize, String> {
    let a = fam.limit().mass_closed(c);
    for r in above(&a) {
        let n0 = match w.query(&r, CAP) {
            Answer::Answered(n) => n,
            Answer::Pending => return Err(format!("{what}: pending at r = {r} > {a}")),
        };
        if let Some(n) = (n0..=n0 + WINDOW).find(|&n| fam.at(n).mass_closed(c) >= r) {
            return Err(format!("{what}: r = {r}, n0 = {n0}, but mu_{n}(C) >= r"));
        }
    }
    for r in [a.clone(), &a - quarter()] {
        if w.query(&r, PENDING_BUDGET).is_answered() {
            return Err(format!("{what}: answered r = {r} outside the cut of {a}"));
        }
    }
    Ok(GRID as usize + 2)
}

fn modulus_contracts() -> Outcome {
    let spec = corpus();
    let mut cases = 0;
    for (s, fam) in spec.families() {
        let direct = family_ewlimit(fam.clone());
        let routes = [
            ("direct", direct.clone()),
            ("uniform", restrict(&uniformize(&direct))),
            (
                "provider",
                ewc_from_witness_provider(&family_provider(fam.clone())),
            ),
        ];
        for (name, f) in &spec.functions {
            let fb = polygonal_as_bcf(f.clone());
            let limit = fam.limit().integral(f);
            for (route, e) in &routes {
                let g = e.modulus_for(&fb, f.bound());
                for k in 1..=10 {
                    let n0 = g
                        .at_within(k, CAP)
                        .map_err(|err| format!("{s}/{name}/{route} k={k}: {err}"))?;
                    if let Some(n) = (n0..=n0 + WINDOW)
                        .find(|&n| (fam.at(n).integral(f) - &limit).abs() >= eps(k))
                    {
                        return Err(format!(
                            "{s}/{name}/{route} k={k}: g = {n0}, gap at n = {n} not below 2^-{k}"
                        ));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} (sequence, function, route, k) cases"))
}

fn witness_soundness() -> Outcome {
    let spec = corpus();
    let mut checks = 0;
    for (s, fam) in spec.families() {
        let e = family_ewlimit(fam.clone());
        for (name, spans) in &spec.sets {
            let u = Sigma01Set::from_spans(spans.clone()).map_err(|err| err.to_string())?;
            checks += check_open(
                &open_witness(&e, &u),
                fam.as_ref(),
                spans,
                &format!("{s}/{name} open"),
            )?;
            let (c, cs) = closure(spans);
            checks += check_closed(
                &closed_witness(&e, &c),
                fam.as_ref(),
                &cs,
                &format!("{s}/{name} closed"),
            )?;
        }
    }
    Ok(format!("{checks} witness queries"))
}

fn tail(m: &ExactMeasure, a: u64) -> Rational {
    let a = Rational::from(a);
    m.mass_open(&[Span::new(None, Some(-&a)), Span::new(Some(a), None)])
}

fn reductions() -> Outcome {
    let spec = corpus();
    let mut cases = 0;
    for (s, fam) in spec.families() {
        let e = family_ewlimit(fam.clone());
        let limit = fam.limit();
        for n in [2u32, 4, 6] {
            let (a, n0) = tail_bound(&e, n).map_err(|err| format!("{s} tail N={n}: {err}"))?;
            if tail(&limit, a) >= eps(n) {
                return Err(format!(
                    "{s} tail N={n}: limit tail outside [-{a}, {a}] not below 2^-{n}"
                ));
            }
            if let Some(m) = (n0..=n0 + WINDOW).find(|&m| tail(&fam.at(m), a) >= eps(n)) {
                return Err(format!(
                    "{s} tail N={n}: a = {a}, n0 = {n0}, tail of mu_{m} too large"
                ));
            }
            cases += 1;
            for (name, f) in &spec.functions {
                let fb = polygonal_as_bcf(f.clone());
                let b = f.bound();
                let (a, n1, psi) = polygonal_reduction(&e, &co_name_of(&fb), b, n)
                    .map_err(|err| format!("{s}/{name} reduction N={n}: {err}"))?;
                let what = format!("{s}/{name} reduction N={n} (a = {a}, n1 = {n1})");
                if psi.sup_abs() > Rational::from(b) {
                    return Err(format!("{what}: |psi| exceeds {b}"));
                }
                let d = f.sub(&psi);
                if limit.integral(&d).abs() >= eps(n) {
                    return Err(format!("{what}: limit gap not below 2^-{n}"));
                }
                if let Some(m) =
                    (n1..=n1 + WINDOW).find(|&m| fam.at(m).integral(&d).abs() >= eps(n))
                {
                    return Err(format!("{what}: gap at n = {m} not below 2^-{n}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} tail and reduction cases"))
}

fn unit_functions(spec: &CorpusSpec) -> Vec<(&String, &RationalPolygonal)> {
    let (zero, one) = (Rational::zero(), Rational::one());
    spec.functions
        .iter()
        .filter(|(_, f)| f.ys().iter().all(|y| *y >= zero && *y <= one))
        .collect()
}

fn level_set_identity() -> Outcome {
    let spec = corpus();
    let functions = unit_functions(&spec);
    let mut cases = 0;
    for (m, mu) in spec.all_measures() {
        let cm = CMeasure::from_exact(mu.clone());
        for (name, f) in &functions {
            let exact = mu.integral(f);
            let fb = polygonal_as_bcf((*f).clone());
            let v = integrate_unit(&cm, &fb).approx(12);
            if (&v - &exact).abs() > eps(12) {
                return Err(format!("{m}/{name}: squeeze {v} vs exact {exact}"));
            }
            for k in 0..=4 {
                for s in [0usize, 8] {
                    let lo = tuple_sum(&lower_tuple(&cm, &fb, k, s), k);
                    let hi = tuple_sum(&upper_tuple(&cm, &fb, k, s), k);
                    if lo > exact || hi < exact {
                        return Err(format!(
                            "{m}/{name} k={k} s={s}: tuples [{lo}, {hi}] miss {exact}"
                        ));
                    }
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (measure, function) pairs at 2^-12"))
}

/// Stage of the recovered lower streams.
const RECOVERY_STAGE: usize = 16;

fn round_trip() -> Outcome {
    let spec = corpus();
    let mut cases = 0;
    for (m, mu) in spec.all_measures() {
        let cm = CMeasure::from_exact(mu.clone());
        let total = cm.total_mass().clone();
        let rec = measure_from_integrator(move |f| integrate(&cm, f), total);
        for (name, spans) in &spec.sets {
            let exact = mu.mass_open(spans);
            let u = Sigma01Set::from_spans(spans.clone()).map_err(|err| err.to_string())?;
            let lower = rec.mass_open(&u).lower(RECOVERY_STAGE);
            if lower > exact || &exact - &lower > eps(10) {
                return Err(format!("{m}/{name}: recovered {lower} vs exact {exact}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (measure, open set) pairs within 2^-10"))
}

/// Corpus sets whose boxes are almost decidable for the limit.
fn decidable_sets<'a>(spec: &'a CorpusSpec, limit: &CMeasure) -> Vec<(&'a String, &'a Vec<Span>)> {
    spec.sets
        .iter()
        .filter(|(_, spans)| {
            let boxes: Vec<BoxInterval> = spans.iter().map(BoxInterval::from_span).collect();
            almost_decidable_box(limit, &boxes).is_ok()
        })
        .collect()
}

fn almost_decidable() -> Outcome {
    let spec = corpus();
    let mut cases = 0;
    for (s, fam) in spec.families() {
        let p = family_provider(fam.clone());
        let sets = decidable_sets(&spec, &p.limit);
        if sets.len() < 3 {
            return Err(format!("{s}: only {} almost decidable boxes", sets.len()));
        }
        for (name, spans) in sets.into_iter().take(3) {
            let boxes: Vec<BoxInterval> = spans.iter().map(BoxInterval::from_span).collect();
            let pair = almost_decidable_box(&p.limit, &boxes).map_err(|err| err.to_string())?;
            let us = pair
                .u
                .exact_spans()
                .ok_or("pair without exact spans")?
                .to_vec();
            let vs = pair
                .v
                .exact_spans()
                .ok_or("pair without exact spans")?
                .to_vec();
            let g = ad_modulus(&p, &pair);
            let target = fam.limit().mass_closed(spans);
            if fam.limit().mass_open(spans) != target {
                return Err(format!("{s}/{name}: boundary carries limit mass"));
            }
            for k in 1..=10 {
                let n0 = g
                    .at_within(k, CAP)
                    .map_err(|err| format!("{s}/{name} k={k}: {err}"))?;
                for n in n0..=n0 + WINDOW {
                    let m = fam.at(n);
                    let (open, closed) = (m.mass_open(spans), m.mass_closed(spans));
                    if (&open - &target).abs() >= eps(k) || (&closed - &target).abs() >= eps(k) {
                        return Err(format!(
                            "{s}/{name} k={k} n={n}: masses {open}, {closed} vs {target}"
                        ));
                    }
                    if m.mass_open(&us) > open || closed > m.total() - m.mass_open(&vs) {
                        return Err(format!("{s}/{name} k={k} n={n}: sandwich violated"));
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (sequence, box, k) cases"))
}

fn closed_from_ad() -> Outcome {
    let spec = corpus();
    let mut checks = 0;
    for (s, fam) in spec.families() {
        let p = Arc::new(family_provider(fam.clone()));
        for (name, spans) in spec.sets.iter().take(3) {
            let (c, cs) = closure(spans);
            let p2 = p.clone();
            let w = closed_witness_from_ad(move |a| ad_modulus(&p2, a), &p.limit, &c)
                .map_err(|err| format!("{s}/{name}: {err}"))?;
            checks += check_closed(&w, fam.as_ref(), &cs, &format!("{s}/{name}"))?;
        }
    }
    Ok(format!("{checks} witness queries"))
}

fn noncomputable_limit() -> Outcome {
    let stage = 3;
    let t = GatedTarget::new(Target::SqrtHalf, Gate::closed_at(stage));
    let frozen = t.q(stage);
    let stream = t.limit().mass_open(&Sigma01Set::whole());
    for i in 0..24 {
        let v = stream.lower(i);
        if v != t.q((i as u64).min(stage)) {
            return Err(format!("lower({i}) = {v}, expected q_min(i, {stage})"));
        }
    }
    let f = clamp01();
    let k = 10;
    let g = uniformize(&t.ewlimit()).modulus_for_name(&co_name_of(&f), f.bound());
    if g.query(k, PENDING_BUDGET) != Answer::Pending {
        return Err("modulus answered while the gate was closed".into());
    }
    t.gate().open();
    let n0 = match g.query(k, PENDING_BUDGET) {
        Answer::Answered(n) => n,
        Answer::Pending => return Err("modulus still pending after the gate opened".into()),
    };
    let fp = f.as_polygonal().expect("clamp is polygonal").clone();
    if let Some(n) = t.check_window(&fp, k, n0..=n0 + WINDOW) {
        return Err(format!("g = {n0}, gap at n = {n} not below 2^-{k}"));
    }
    Ok(format!(
        "stream frozen at {frozen}, pending then g = {n0} at k = {k}"
    ))
}

fn negative_controls() -> Outcome {
    let run = |extra: &[&str]| -> Result<i32, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_ewc"))
            .args(["portmanteau", "--sequence", "S2"])
            .args(extra)
            .output()
            .map_err(|err| err.to_string())?;
        out.status
            .code()
            .ok_or_else(|| "terminated by a signal".to_string())
    };
    let clean = run(&[])?;
    if clean != 0 {
        return Err(format!("clean run exited {clean}"));
    }
    let mut seen = Vec::new();
    for fault in ["off-by-one", "inflated-modulus", "corrupted-tuple"] {
        let code = run(&["--inject-fault", fault])?;
        if code != 1 {
            return Err(format!("{fault}: exit {code}, expected 1"));
        }
        seen.push(fault);
    }
    Ok(format!(
        "clean exit 0; {} detected with exit 1",
        seen.join(", ")
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("modulus contracts", modulus_contracts),
        ("witness soundness", witness_soundness),
        ("tail bound and polygonal reduction", reductions),
        ("level-set integration", level_set_identity),
        ("integrator round trip", round_trip),
        ("almost decidable moduli", almost_decidable),
        ("closed witnesses from moduli", closed_from_ad),
        ("noncomputable limit", noncomputable_limit),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
