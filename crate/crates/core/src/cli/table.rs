//! Convergence tables: for each precision `k`, the modulus value `g(k)`
//! and the exact gap at `g(k)`, checked on a window of indices.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::corpus::{CorpusSpec, Probe, SequenceDef};
use crate::error::{Error, Result};
use crate::functions::polygonal_as_bcf;
use crate::kernel::{eps, Modulus, Rational};
use crate::measures::{almost_decidable_box, BoxInterval, ExactMeasure, Span};
use crate::portmanteau::{ad_modulus, ewc_from_witness_provider, family_provider};
use crate::weakconv::{family_ewlimit, restrict, uniformize, Family};

/// Where the moduli come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// The family's own closed-form moduli.
    #[default]
    Direct,
    /// Uniformized, then restricted back to descriptors.
    Uniform,
    /// Rebuilt from set witnesses.
    Provider,
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Route> {
        match s {
            "direct" => Ok(Route::Direct),
            "uniform" => Ok(Route::Uniform),
            "provider" => Ok(Route::Provider),
            _ => Err(Error::InvalidArgument(format!(
                "unknown route {s:?}; expected direct, uniform or provider"
            ))),
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::Uniform => "uniform",
            Route::Provider => "provider",
        })
    }
}

/// Rationals are always written `p/q`.
pub fn pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    /// First index of the window where the gap is too large.
    Fail(u64),
    Budget(String),
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub k: u32,
    pub g: Option<u64>,
    pub value: Option<Rational>,
    pub limit: Rational,
    pub gap: Option<Rational>,
    pub status: RowStatus,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub rows: Vec<TableRow>,
}

impl Table {
    pub const HEADER: &'static str = "k,g,value_at_g,limit,gap,status,reason";

    pub fn exit_code(&self) -> i32 {
        if self
            .rows
            .iter()
            .any(|r| matches!(r.status, RowStatus::Fail(_)))
        {
            1
        } else if self
            .rows
            .iter()
            .any(|r| matches!(r.status, RowStatus::Budget(_)))
        {
            2
        } else {
            0
        }
    }

    /// Rows without the header, each prefixed by `prefix` when given.
    pub fn csv_rows(&self, prefix: Option<&str>) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let opt = |v: &Option<Rational>| v.as_ref().map(pq).unwrap_or_default();
            let (status, reason) = match &r.status {
                RowStatus::Pass => ("pass", String::new()),
                RowStatus::Fail(n) => ("fail", format!("gap at n={n} not below 2^-{}", r.k)),
                RowStatus::Budget(why) => ("budget", crate::portmanteau::csv_field(why)),
            };
            if let Some(p) = prefix {
                out.push_str(p);
                out.push(',');
            }
            out.push_str(&format!(
                "{},{},{},{},{},{status},{reason}\n",
                r.k,
                r.g.map(|g| g.to_string()).unwrap_or_default(),
                opt(&r.value),
                pq(&r.limit),
                opt(&r.gap)
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::HEADER, self.csv_rows(None))
    }
}

fn tabulate(
    kmax: u32,
    window: u64,
    modulus: impl Fn(u32) -> std::result::Result<u64, String>,
    value: impl Fn(u64) -> Rational,
    limit: Rational,
) -> Table {
    let rows = (1..=kmax)
        .map(|k| match modulus(k) {
            Err(why) => TableRow {
                k,
                g: None,
                value: None,
                limit: limit.clone(),
                gap: None,
                status: RowStatus::Budget(why),
            },
            Ok(g) => {
                let v = value(g);
                let gap = (&v - &limit).abs();
                let bad =
                    (g..=g.saturating_add(window)).find(|&n| (value(n) - &limit).abs() >= eps(k));
                let status = bad.map_or(RowStatus::Pass, RowStatus::Fail);
                TableRow {
                    k,
                    g: Some(g),
                    value: Some(v),
                    limit: limit.clone(),
                    gap: Some(gap),
                    status,
                }
            }
        })
        .collect();
    Table { rows }
}

fn resolve(g: &Modulus, k: u32, budget: u64) -> std::result::Result<u64, String> {
    g.at_within(k, budget).map_err(|e| e.to_string())
}

fn family_of(spec: &CorpusSpec, sequence: &str) -> Result<Arc<dyn Family>> {
    match spec.sequence(sequence)? {
        SequenceDef::Family(f) => Ok(f.clone()),
        SequenceDef::Gated { .. } => Err(Error::InvalidArgument(format!(
            "sequence {sequence:?} has a gated limit without exact values; see demo-noncomputable"
        ))),
    }
}

/// Table for `∫ f dμ_n -> ∫ f dμ` (function probes) or `μ_n(A) -> μ(A)`
/// for the closed set `A` (set probes, moduli on almost decidable sets).
pub fn run_table(
    spec: &CorpusSpec,
    sequence: &str,
    probe: &Probe,
    kmax: u32,
    window: u64,
    budget: u64,
    route: Route,
) -> Result<Table> {
    let fam = family_of(spec, sequence)?;
    let term = |n: u64| -> ExactMeasure { fam.at(n) };
    match probe {
        Probe::Function(name) => {
            let f = spec.function(name)?.clone();
            let fb = polygonal_as_bcf(f.clone());
            let e = family_ewlimit(fam.clone());
            let e = match route {
                Route::Direct => e,
                Route::Uniform => restrict(&uniformize(&e)),
                Route::Provider => ewc_from_witness_provider(&family_provider(fam.clone())),
            };
            let g = e.modulus_for(&fb, f.bound());
            Ok(tabulate(
                kmax,
                window,
                |k| resolve(&g, k, budget),
                |n| term(n).integral(&f),
                fam.limit().integral(&f),
            ))
        }
        Probe::Set(name) => {
            let spans: Vec<Span> = spec.set(name)?.to_vec();
            let p = family_provider(fam.clone());
            let boxes: Vec<BoxInterval> = spans.iter().map(BoxInterval::from_span).collect();
            let pair = almost_decidable_box(&p.limit, &boxes)?;
            let g = ad_modulus(&p, &pair);
            Ok(tabulate(
                kmax,
                window,
                |k| resolve(&g, k, budget),
                |n| term(n).mass_closed(&spans),
                fam.limit().mass_closed(&spans),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::corpus::{parse_corpus, DEFAULT_CORPUS};

    fn spec() -> CorpusSpec {
        parse_corpus(DEFAULT_CORPUS).unwrap()
    }

    #[test]
    fn s2_clamp_table() {
        let t = run_table(
            &spec(),
            "S2",
            &Probe::Function("clamp".into()),
            8,
            32,
            1 << 20,
            Route::Direct,
        )
        .unwrap();
        assert_eq!(t.rows.len(), 8);
        assert!(t
            .rows
            .iter()
            .all(|r| r.status == RowStatus::Pass && r.limit == Rational::new(1, 2)));
        assert_eq!(t.exit_code(), 0);
        assert!(t.to_csv().lines().nth(1).unwrap().contains(",1/2,"));
    }

    #[test]
    fn s1_tent_gaps_vanish() {
        let t = run_table(
            &spec(),
            "S1",
            &Probe::Function("tent".into()),
            8,
            32,
            1 << 20,
            Route::Direct,
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.gap == Some(Rational::zero())));
    }

    #[test]
    fn constant_sequences_have_zero_gaps() {
        let text = format!(
            "{DEFAULT_CORPUS}\n[sequences.C]\nkind = \"constant\"\nmeasure = \"atom_and_ramp\"\n"
        );
        let spec = parse_corpus(&text).unwrap();
        for route in [Route::Direct, Route::Uniform, Route::Provider] {
            let t = run_table(
                &spec,
                "C",
                &Probe::Function("wave".into()),
                6,
                32,
                1 << 20,
                route,
            )
            .unwrap();
            assert!(
                t.rows
                    .iter()
                    .all(|r| r.gap == Some(Rational::zero()) && r.status == RowStatus::Pass),
                "{route}"
            );
        }
    }

    #[test]
    fn set_tables() {
        let t = run_table(
            &spec(),
            "S2",
            &Probe::Set("middle".into()),
            6,
            32,
            1 << 20,
            Route::Direct,
        )
        .unwrap();
        assert_eq!(t.exit_code(), 0);
        assert!(run_table(
            &spec(),
            "S1",
            &Probe::Set("unit".into()),
            6,
            32,
            1 << 20,
            Route::Direct
        )
        .is_err());
    }
}
