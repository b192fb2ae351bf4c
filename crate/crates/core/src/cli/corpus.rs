//! Corpus documents: named measures, sequences, test functions, test sets and
//! experiments, written in TOML. The grammar is described in `corpus/README.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use super::gated::Target;
use crate::error::{Error, Result};
use crate::functions::{tent_function, w_function, RationalPolygonal};
use crate::kernel::Rational;
use crate::measures::{ExactMeasure, Span};
use crate::weakconv::{
    CollapsingUniform, Constant, Family, Formula, Mixture, ShiftingAtom, TruncatedLebesgue,
};

/// The shipped corpus.
pub const DEFAULT_CORPUS: &str = include_str!("../../corpus/default.toml");

/// Largest precision an experiment may request.
pub const MAX_PRECISION: u32 = 24;

/// Largest validation window an experiment may request.
pub const MAX_WINDOW: u64 = 4096;

#[derive(Clone)]
pub enum SequenceDef {
    Family(Arc<dyn Family>),
    /// Truncated Lebesgue measures towards a gated target, with the number
    /// of tokens initially released.
    Gated {
        target: Target,
        gate: u64,
    },
}

impl fmt::Debug for SequenceDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceDef::Family(fam) => write!(f, "{fam:?}"),
            SequenceDef::Gated { target, gate } => write!(f, "Gated({}, {gate})", target.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Probe {
    Function(String),
    Set(String),
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: String,
    pub sequence: String,
    pub probe: Probe,
    pub k: u32,
    pub window: u64,
}

#[derive(Clone, Debug, Default)]
pub struct CorpusSpec {
    pub measures: BTreeMap<String, ExactMeasure>,
    pub sequences: BTreeMap<String, SequenceDef>,
    pub functions: BTreeMap<String, RationalPolygonal>,
    pub sets: BTreeMap<String, Vec<Span>>,
    pub experiments: Vec<Experiment>,
}

impl CorpusSpec {
    pub fn sequence(&self, name: &str) -> Result<&SequenceDef> {
        self.sequences
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sequence {name:?}")))
    }

    pub fn function(&self, name: &str) -> Result<&RationalPolygonal> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown function {name:?}")))
    }

    pub fn set(&self, name: &str) -> Result<&[Span]> {
        self.sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown set {name:?}")))
    }

    pub fn families(&self) -> impl Iterator<Item = (&String, &Arc<dyn Family>)> {
        self.sequences.iter().filter_map(|(n, s)| match s {
            SequenceDef::Family(f) => Some((n, f)),
            SequenceDef::Gated { .. } => None,
        })
    }

    /// Named measures, then the limits of the sequences with exact limits.
    pub fn all_measures(&self) -> Vec<(String, ExactMeasure)> {
        let mut out: Vec<_> = self
            .measures
            .iter()
            .map(|(n, m)| (n.clone(), m.clone()))
            .collect();
        out.extend(
            self.families()
                .map(|(n, f)| (format!("{n}.limit"), f.limit())),
        );
        out
    }
}

enum Num {
    Int(i64),
    Text(String),
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Num, D::Error> {
        match toml::Value::deserialize(d)? {
            toml::Value::Integer(n) => Ok(Num::Int(n)),
            toml::Value::String(s) => Ok(Num::Text(s)),
            other => Err(serde::de::Error::custom(format!(
                "expected an integer or a rational string such as \"1/2\", found {}",
                other.type_str()
            ))),
        }
    }
}

#[derive(Default)]
struct Doc {
    measures: BTreeMap<String, MeasureDoc>,
    sequences: BTreeMap<String, SequenceDoc>,
    functions: BTreeMap<String, FunctionDoc>,
    sets: BTreeMap<String, SetDoc>,
    experiments: Vec<ExperimentDoc>,
}

fn entries<T: serde::de::DeserializeOwned>(
    section: &str,
    v: toml::Value,
) -> Result<BTreeMap<String, T>> {
    let toml::Value::Table(t) = v else {
        return Err(invalid(section, "expected a table of named entries"));
    };
    t.into_iter()
        .map(|(name, v)| {
            let entry = v
                .try_into()
                .map_err(|e: toml::de::Error| invalid(&format!("{section}.{name}"), e.message()))?;
            Ok((name, entry))
        })
        .collect()
}

impl Doc {
    fn parse(text: &str) -> Result<Doc> {
        let table: toml::Table = toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(e.to_string().trim_end().to_string()))?;
        let mut doc = Doc::default();
        for (section, v) in table {
            match section.as_str() {
                "measures" => doc.measures = entries(&section, v)?,
                "sequences" => doc.sequences = entries(&section, v)?,
                "functions" => doc.functions = entries(&section, v)?,
                "sets" => doc.sets = entries(&section, v)?,
                "experiments" => {
                    let toml::Value::Array(rows) = v else {
                        return Err(invalid(&section, "expected an array of tables"));
                    };
                    for (i, row) in rows.into_iter().enumerate() {
                        let row = row.try_into().map_err(|e: toml::de::Error| {
                            invalid(&format!("experiments[{i}]"), e.message())
                        })?;
                        doc.experiments.push(row);
                    }
                }
                _ => return Err(invalid(&section, "unknown section")),
            }
        }
        Ok(doc)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Part {
    #[serde(alias = "sequence")]
    measure: String,
    weight: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    kind: String,
    x: Option<Num>,
    w: Option<Num>,
    lo: Option<Num>,
    hi: Option<Num>,
    points: Option<Vec<[Num; 2]>>,
    parts: Option<Vec<Part>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDoc {
    kind: String,
    x: Option<Num>,
    s: Option<Num>,
    w: Option<Num>,
    q: Option<String>,
    limit: Option<Num>,
    measure: Option<String>,
    parts: Option<Vec<Part>>,
    alpha: Option<String>,
    gate: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionDoc {
    kind: Option<String>,
    points: Option<Vec<[Num; 2]>>,
    a: Option<u64>,
    k: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDoc {
    intervals: Vec<[Num; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentDoc {
    name: String,
    sequence: String,
    function: Option<String>,
    set: Option<String>,
    k: u32,
    window: Option<u64>,
}

fn invalid(entry: &str, msg: impl fmt::Display) -> Error {
    Error::InvalidArgument(format!("{entry}: {msg}"))
}

fn rational(entry: &str, field: &str, v: &Num) -> Result<Rational> {
    match v {
        Num::Int(n) => Ok(Rational::int(*n)),
        Num::Text(s) => s
            .parse()
            .map_err(|e| invalid(entry, format!("{field}: {e}"))),
    }
}

fn required(entry: &str, field: &str, v: &Option<Num>) -> Result<Rational> {
    match v {
        Some(v) => rational(entry, field, v),
        None => Err(invalid(entry, format!("missing field {field:?}"))),
    }
}

fn optional(entry: &str, field: &str, v: &Option<Num>, default: Rational) -> Result<Rational> {
    v.as_ref()
        .map_or(Ok(default), |v| rational(entry, field, v))
}

/// Endpoint of a set interval: a rational, `-inf` or `inf`.
fn endpoint(entry: &str, v: &Num, lower: bool) -> Result<Option<Rational>> {
    match v {
        Num::Text(s) if s.trim() == "-inf" && lower => Ok(None),
        Num::Text(s) if matches!(s.trim(), "inf" | "+inf") && !lower => Ok(None),
        v => rational(entry, "interval endpoint", v).map(Some),
    }
}

fn points(entry: &str, pts: &[[Num; 2]]) -> Result<RationalPolygonal> {
    let pts = pts
        .iter()
        .map(|[x, y]| Ok((rational(entry, "x", x)?, rational(entry, "y", y)?)))
        .collect::<Result<Vec<_>>>()?;
    RationalPolygonal::new(pts).map_err(|e| invalid(entry, e))
}

fn unsupported(entry: &str, kind: &str) -> Error {
    invalid(entry, format!("unsupported constructor {kind:?}"))
}

fn measure(
    name: &str,
    docs: &BTreeMap<String, MeasureDoc>,
    done: &mut BTreeMap<String, ExactMeasure>,
    visiting: &mut Vec<String>,
) -> Result<ExactMeasure> {
    if let Some(m) = done.get(name) {
        return Ok(m.clone());
    }
    let entry = format!("measures.{name}");
    let e = entry.as_str();
    let doc = docs
        .get(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown measure {name:?}")))?;
    if visiting.iter().any(|v| v == name) {
        return Err(invalid(e, "sum refers to itself"));
    }
    visiting.push(name.to_string());
    let m = match doc.kind.as_str() {
        "atom" => ExactMeasure::atom(
            required(e, "x", &doc.x)?,
            optional(e, "w", &doc.w, Rational::one())?,
        ),
        "density" => {
            let p = match &doc.points {
                Some(pts) => points(e, pts)?,
                None => RationalPolygonal::constant(Rational::one()),
            };
            ExactMeasure::density(p, required(e, "lo", &doc.lo)?, required(e, "hi", &doc.hi)?)
        }
        "sum" => {
            let parts = doc
                .parts
                .as_ref()
                .ok_or_else(|| invalid(e, "missing field \"parts\""))?;
            let mut out = Vec::new();
            for p in parts {
                let m = measure(&p.measure, docs, done, visiting).map_err(|err| invalid(e, err))?;
                let w = rational(e, "weight", &p.weight)?;
                if w.is_negative() {
                    return Err(invalid(e, format!("negative weight {w}")));
                }
                out.push(m.scale(&w));
            }
            Ok(ExactMeasure::sum(out))
        }
        other => return Err(unsupported(e, other)),
    };
    visiting.pop();
    let m = m.map_err(|err| invalid(e, err))?;
    done.insert(name.to_string(), m.clone());
    Ok(m)
}

fn sequence(
    name: &str,
    docs: &BTreeMap<String, SequenceDoc>,
    measures: &BTreeMap<String, ExactMeasure>,
    done: &mut BTreeMap<String, SequenceDef>,
    visiting: &mut Vec<String>,
) -> Result<SequenceDef> {
    if let Some(s) = done.get(name) {
        return Ok(s.clone());
    }
    let entry = format!("sequences.{name}");
    let e = entry.as_str();
    let doc = docs
        .get(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown sequence {name:?}")))?;
    if visiting.iter().any(|v| v == name) {
        return Err(invalid(e, "mixture refers to itself"));
    }
    visiting.push(name.to_string());
    let fam: Arc<dyn Family> = match doc.kind.as_str() {
        "shifting_atom" => Arc::new(
            ShiftingAtom::new(
                required(e, "x", &doc.x)?,
                required(e, "s", &doc.s)?,
                optional(e, "w", &doc.w, Rational::one())?,
            )
            .map_err(|err| invalid(e, err))?,
        ),
        "collapsing_uniform" => Arc::new(
            CollapsingUniform::new(
                required(e, "x", &doc.x)?,
                required(e, "s", &doc.s)?,
                optional(e, "w", &doc.w, Rational::one())?,
            )
            .map_err(|err| invalid(e, err))?,
        ),
        "truncated_lebesgue" => {
            let q: Formula = doc
                .q
                .as_deref()
                .ok_or_else(|| invalid(e, "missing field \"q\""))?
                .parse()
                .map_err(|err| invalid(e, err))?;
            Arc::new(
                TruncatedLebesgue::new(q, required(e, "limit", &doc.limit)?)
                    .map_err(|err| invalid(e, err))?,
            )
        }
        "constant" => {
            let m = doc
                .measure
                .as_deref()
                .ok_or_else(|| invalid(e, "missing field \"measure\""))?;
            Arc::new(Constant(
                measures
                    .get(m)
                    .ok_or_else(|| invalid(e, format!("unknown measure {m:?}")))?
                    .clone(),
            ))
        }
        "mixture" => {
            let parts = doc
                .parts
                .as_ref()
                .ok_or_else(|| invalid(e, "missing field \"parts\""))?;
            let mut out = Vec::new();
            for p in parts {
                let SequenceDef::Family(f) = sequence(&p.measure, docs, measures, done, visiting)
                    .map_err(|err| invalid(e, err))?
                else {
                    return Err(invalid(
                        e,
                        format!("gated sequence {:?} cannot be mixed", p.measure),
                    ));
                };
                out.push((f, rational(e, "weight", &p.weight)?));
            }
            Arc::new(Mixture::new(out).map_err(|err| invalid(e, err))?)
        }
        "gated" => {
            let alpha = doc.alpha.as_deref().unwrap_or("sqrt-half");
            let target = Target::parse(alpha)
                .ok_or_else(|| invalid(e, format!("unknown target {alpha:?}")))?;
            visiting.pop();
            let def = SequenceDef::Gated {
                target,
                gate: doc.gate.unwrap_or(u64::MAX),
            };
            done.insert(name.to_string(), def.clone());
            return Ok(def);
        }
        other => return Err(unsupported(e, other)),
    };
    visiting.pop();
    let def = SequenceDef::Family(fam);
    done.insert(name.to_string(), def.clone());
    Ok(def)
}

fn function(name: &str, doc: &FunctionDoc) -> Result<RationalPolygonal> {
    let entry = format!("functions.{name}");
    let e = entry.as_str();
    match doc.kind.as_deref().unwrap_or("polygonal") {
        "polygonal" => points(
            e,
            doc.points
                .as_deref()
                .ok_or_else(|| invalid(e, "missing field \"points\""))?,
        ),
        "tent" => Ok(tent_function(
            doc.a.ok_or_else(|| invalid(e, "missing field \"a\""))?,
        )),
        "w" => Ok(w_function(
            doc.a.ok_or_else(|| invalid(e, "missing field \"a\""))?,
            doc.k.unwrap_or(0),
        )),
        other => Err(unsupported(e, other)),
    }
}

fn set(name: &str, doc: &SetDoc) -> Result<Vec<Span>> {
    let entry = format!("sets.{name}");
    let e = entry.as_str();
    let mut spans = Vec::new();
    for [lo, hi] in &doc.intervals {
        let span = Span::new(endpoint(e, lo, true)?, endpoint(e, hi, false)?);
        if let (Some(l), Some(h)) = (&span.lo, &span.hi) {
            if l >= h {
                return Err(invalid(e, format!("empty interval ({l}, {h})")));
            }
        }
        spans.push(span);
    }
    Ok(spans)
}

/// Parses and validates a corpus document.
pub fn parse_corpus(text: &str) -> Result<CorpusSpec> {
    let doc = Doc::parse(text)?;
    let mut spec = CorpusSpec::default();
    for name in doc.measures.keys() {
        measure(name, &doc.measures, &mut spec.measures, &mut Vec::new())?;
    }
    for name in doc.sequences.keys() {
        sequence(
            name,
            &doc.sequences,
            &spec.measures,
            &mut spec.sequences,
            &mut Vec::new(),
        )?;
    }
    for (name, f) in &doc.functions {
        spec.functions.insert(name.clone(), function(name, f)?);
    }
    for (name, s) in &doc.sets {
        spec.sets.insert(name.clone(), set(name, s)?);
    }
    for ex in &doc.experiments {
        let e = format!("experiments.{}", ex.name);
        spec.sequence(&ex.sequence)
            .map_err(|err| invalid(&e, err))?;
        let probe = match (&ex.function, &ex.set) {
            (Some(f), None) => {
                spec.function(f).map_err(|err| invalid(&e, err))?;
                Probe::Function(f.clone())
            }
            (None, Some(s)) => {
                spec.set(s).map_err(|err| invalid(&e, err))?;
                Probe::Set(s.clone())
            }
            _ => {
                return Err(invalid(
                    &e,
                    "exactly one of \"function\" and \"set\" is required",
                ))
            }
        };
        if ex.k == 0 || ex.k > MAX_PRECISION {
            return Err(invalid(
                &e,
                format!("precision {} outside 1..={MAX_PRECISION}", ex.k),
            ));
        }
        let window = ex.window.unwrap_or(32);
        if window > MAX_WINDOW {
            return Err(invalid(&e, format!("window {window} exceeds {MAX_WINDOW}")));
        }
        spec.experiments.push(Experiment {
            name: ex.name.clone(),
            sequence: ex.sequence.clone(),
            probe,
            k: ex.k,
            window,
        });
    }
    spec.experiments.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(spec)
}
