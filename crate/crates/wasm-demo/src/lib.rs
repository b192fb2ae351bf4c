//! Browser bindings: modulus tables, exact and squeezed integrals, and the
//! gated-limit transcript, all driven by a corpus document given as text.

use wasm_bindgen::prelude::*;

use ewc::cli::corpus::{parse_corpus, CorpusSpec, Probe, DEFAULT_CORPUS};
use ewc::cli::demo::{demo_noncomputable, DemoConfig};
use ewc::cli::table::{pq, run_table, Route, Table};
use ewc::functions::polygonal_as_bcf;
use ewc::kernel::DEFAULT_BUDGET_CAP;
use ewc::measures::{integrate, CMeasure};

/// Largest precision accepted from the page.
const MAX_K: u32 = 16;

fn corpus(text: &str) -> Result<CorpusSpec, String> {
    parse_corpus(text).map_err(|e| e.to_string())
}

fn report(r: Result<String, String>) -> String {
    r.unwrap_or_else(|e| format!("error: {e}"))
}

/// The shipped corpus, as a starting point for editing.
#[wasm_bindgen]
pub fn default_corpus() -> String {
    DEFAULT_CORPUS.to_string()
}

/// Names in the corpus, one section per line, or the first problem in it.
#[wasm_bindgen]
pub fn corpus_names(text: &str) -> String {
    report(corpus(text).map(|spec| {
        let join = |names: Vec<String>| names.join(" ");
        let measures = spec.all_measures().into_iter().map(|(n, _)| n).collect();
        format!(
            "sequences: {}\nfunctions: {}\nsets: {}\nmeasures: {}",
            join(spec.sequences.keys().cloned().collect()),
            join(spec.functions.keys().cloned().collect()),
            join(spec.sets.keys().cloned().collect()),
            join(measures),
        )
    }))
}

/// CSV table of `g(k)` and the exact gap at `g(k)` for `k = 1..=kmax`.
#[wasm_bindgen]
pub fn modulus_table(text: &str, sequence: &str, function: &str, kmax: u32) -> String {
    report(corpus(text).and_then(|spec| {
        spec.function(function).map_err(|e| e.to_string())?;
        let probe = Probe::Function(function.to_string());
        let k = kmax.clamp(1, MAX_K);
        let table = run_table(
            &spec,
            sequence,
            &probe,
            k,
            32,
            DEFAULT_BUDGET_CAP,
            Route::Direct,
        )
        .map_err(|e| e.to_string())?;
        Ok(format!("{}\n{}", Table::HEADER, table.csv_rows(None)))
    }))
}

/// Exact `∫ f dμ` next to the level-set squeeze at precision `2^-k`.
#[wasm_bindgen]
pub fn integral(text: &str, measure: &str, function: &str, k: u32) -> String {
    report(corpus(text).and_then(|spec| {
        let f = spec.function(function).map_err(|e| e.to_string())?.clone();
        let (_, mu) = spec
            .all_measures()
            .into_iter()
            .find(|(n, _)| n == measure)
            .ok_or_else(|| format!("unknown measure {measure:?}"))?;
        let k = k.min(MAX_K);
        let exact = mu.integral(&f);
        let squeeze = integrate(&CMeasure::from_exact(mu), &polygonal_as_bcf(f).opaque()).approx(k);
        Ok(format!(
            "exact: {}\nsqueeze (2^-{k}): {}",
            pq(&exact),
            pq(&squeeze)
        ))
    }))
}

/// Transcript of the gated sequence with `gate` tokens released, checked at precision `k`.
#[wasm_bindgen]
pub fn gated_demo(gate: u32, k: u32) -> String {
    let cfg = DemoConfig {
        gate: Some(gate as u64),
        k: k.clamp(1, MAX_K),
        ..DemoConfig::default()
    };
    demo_noncomputable(&cfg).text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_lists_its_names() {
        let names = corpus_names(&default_corpus());
        assert!(names.contains("sequences: MIX S1 S2 S3"), "{names}");
        assert!(corpus_names("[sequences.G]\nkind = \"x\"\n").starts_with("error: "));
    }

    #[test]
    fn tables_pass_on_the_default_corpus() {
        let csv = modulus_table(&default_corpus(), "S2", "clamp", 6);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 7, "{csv}");
        assert!(rows[1..].iter().all(|r| r.contains(",pass,")), "{csv}");
        assert!(modulus_table(&default_corpus(), "S9", "clamp", 6).starts_with("error: "));
    }

    #[test]
    fn integrals_agree() {
        let out = integral(&default_corpus(), "unit_lebesgue", "clamp", 10);
        assert!(out.starts_with("exact: 1/2\n"), "{out}");
        assert!(integral(&default_corpus(), "nowhere", "clamp", 10).starts_with("error: "));
    }

    #[test]
    fn demo_transcript_shows_the_gate() {
        let text = gated_demo(3, 8);
        assert!(text.contains("gate closed: pending"), "{text}");
    }
}
