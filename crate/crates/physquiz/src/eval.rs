//! Runs every concept of a snapshot through each pipeline stage and reports
//! which stages succeed, per concept and in aggregate.
//!
//! A concept has a *question* when a question can be generated for every
//! solvable target, and a *correction* when, in addition, the explanation
//! and the internal calculation are consistent. Both are reported in four
//! buckets: question or correction, question and correction, only
//! question, none. Since a correction needs a question here, the last three
//! partition the corpus.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use physquiz_core::dimension::{infer_lhs_dimension, DimensionVector};
use physquiz_core::expr::{evaluate, Assignment};
use physquiz_core::quiz::{generate_question_with_template, known_dimensions, DEFAULT_RANGE};
use physquiz_core::solver::QuizzabilityVerdict;
use physquiz_core::{render_explanation, ConceptRecord, QuizQuestion, Symbol};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 6] = [
    "identifier_semantics_ok",
    "unit_retrieval_ok",
    "translation_ok",
    "rearrangement_ok",
    "substitution_ok",
    "explanation_ok",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFlags {
    pub qid: String,
    pub label: String,
    pub identifier_semantics_ok: bool,
    pub unit_retrieval_ok: bool,
    pub translation_ok: bool,
    pub rearrangement_ok: bool,
    pub substitution_ok: bool,
    pub explanation_ok: bool,
    pub failure_reasons: Vec<String>,
}

impl StageFlags {
    pub fn flags(&self) -> [bool; 6] {
        [
            self.identifier_semantics_ok,
            self.unit_retrieval_ok,
            self.translation_ok,
            self.rearrangement_ok,
            self.substitution_ok,
            self.explanation_ok,
        ]
    }

    pub fn question(&self) -> bool {
        self.substitution_ok
    }

    pub fn correction(&self) -> bool {
        self.explanation_ok
    }
}

/// Share of concepts with a property; `percent` is `None` for an empty
/// corpus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub yes: usize,
    pub percent: Option<f64>,
}

impl Rate {
    fn of(yes: usize, total: usize) -> Self {
        let percent = (total > 0).then(|| (1000.0 * yes as f64 / total as f64).round() / 10.0);
        Rate { yes, percent }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub concepts: usize,
    /// Keyed by the names in [`COLUMNS`].
    pub columns: BTreeMap<String, Rate>,
    pub question_or_correction: Rate,
    pub question_and_correction: Rate,
    pub only_question: Rate,
    pub none: Rate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub seed: u64,
    pub range: [i64; 2],
    pub concepts: Vec<StageFlags>,
    pub aggregates: Aggregates,
}

/// Evaluates one concept; failures are recorded in the flags, never raised.
pub fn evaluate_record(engine: &Engine, record: &ConceptRecord, seed: u64, range: RangeInclusive<i64>) -> StageFlags {
    let mut reasons = Vec::new();
    let translation = engine.translate(record);
    let equation = match &translation.equation {
        Ok(eq) => Some(eq),
        Err(e) => {
            reasons.push(format!("translation: {e}"));
            None
        }
    };

    // identifiers of the parsed formula, or the listed ones when it did not parse
    let symbols: Vec<Symbol> = match equation {
        Some(eq) => eq.identifiers(),
        None => record.identifiers.iter().map(|i| i.symbol.clone()).collect(),
    };
    let mut identifier_semantics_ok = !symbols.is_empty();
    if symbols.is_empty() {
        reasons.push("identifier_semantics: no identifiers".into());
    }
    for symbol in &symbols {
        match record.identifier(symbol) {
            None => reasons.push(format!("identifier_semantics: no entry for {symbol}")),
            Some(info) if info.name.trim().is_empty() => {
                reasons.push(format!("identifier_semantics: {symbol} has no name"))
            }
            Some(_) => continue,
        }
        identifier_semantics_ok = false;
    }

    let dimensions: BTreeMap<Symbol, DimensionVector> = match equation {
        Some(eq) => known_dimensions(record, eq),
        None => record.identifiers.iter().filter_map(|i| i.dimension.map(|d| (i.symbol.clone(), d))).collect(),
    };
    let mut unit_retrieval_ok = !symbols.is_empty();
    for symbol in symbols.iter().filter(|s| !dimensions.contains_key(s)) {
        reasons.push(format!("unit_retrieval: no unit for {symbol}"));
        unit_retrieval_ok = false;
    }

    let rset = match engine.rearrange(record) {
        Ok(rset) => Some(rset),
        Err(EngineError::NotQuizzable(reason)) => {
            reasons.push(format!("rearrangement: {reason}"));
            None
        }
        Err(e) => {
            let parse_verdict = translation.equation.as_ref().err().and_then(QuizzabilityVerdict::from_parse_error);
            reasons.push(match parse_verdict {
                Some(v) => format!("rearrangement: {}", v.reason),
                None if equation.is_none() => "rearrangement: formula not translated".into(),
                None => format!("rearrangement: {e}"),
            });
            None
        }
    };
    let rearrangement_ok = rset.is_some();

    let mut questions: Vec<QuizQuestion> = Vec::new();
    let mut substitution_ok = false;
    if let Some(rset) = &rset {
        substitution_ok = true;
        for target in rset.solved_for.keys() {
            match generate_question_with_template(record, rset, Some(target), range.clone(), seed, &engine.template) {
                Ok(q) => questions.push(q),
                Err(e) => {
                    reasons.push(format!("substitution: {target}: {e}"));
                    substitution_ok = false;
                }
            }
        }
    }

    let mut explanation_ok = substitution_ok;
    if substitution_ok {
        for q in &questions {
            if let Err(problem) = check_explanation(engine, q, &dimensions) {
                reasons.push(format!("explanation: {}: {problem}", q.target.symbol));
                explanation_ok = false;
            }
        }
    }

    StageFlags {
        qid: record.qid.clone(),
        label: record.label.clone(),
        identifier_semantics_ok,
        unit_retrieval_ok,
        translation_ok: equation.is_some(),
        rearrangement_ok,
        substitution_ok,
        explanation_ok,
        failure_reasons: reasons,
    }
}

/// The explanation reproduces the solution, the units of the calculation
/// agree with the unit asked for, and the system's own answer passes.
fn check_explanation(
    engine: &Engine,
    q: &QuizQuestion,
    dimensions: &BTreeMap<Symbol, DimensionVector>,
) -> Result<(), String> {
    let explanation = render_explanation(q);
    match evaluate(&explanation.substituted, &Assignment::new()) {
        Ok(v) if v == q.solution_value => {}
        Ok(v) => return Err(format!("substituted step gives {} not {}", v.to_display_string(), q.solution_display())),
        Err(e) => return Err(format!("substituted step does not evaluate: {e}")),
    }
    if explanation.final_unit != q.solution_unit {
        return Err(format!("explanation unit {} differs from {}", explanation.final_unit, q.solution_unit));
    }
    let computed = infer_lhs_dimension(dimensions, &q.equation.rhs).map_err(|e| e.to_string())?;
    if computed != q.solution_unit.dimension {
        return Err(format!(
            "calculation has dimension {} but {} is stated as {}",
            computed.to_isq_string(),
            q.target.symbol,
            q.solution_unit.dimension.to_isq_string()
        ));
    }
    let report = engine.grade(q, &q.solution_display(), &q.solution_unit.text);
    if !(report.value_correct && report.unit_correct) {
        return Err(format!("own solution is graded wrong: {}", report.messages.join(" ")));
    }
    Ok(())
}

/// Evaluates every record, in parallel, keeping the input order.
pub fn evaluate_corpus(
    engine: &Engine,
    records: &[ConceptRecord],
    seed: u64,
    range: RangeInclusive<i64>,
) -> EvalReport {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(records.len()).max(1);
    let chunk = records.len().div_ceil(workers).max(1);
    let concepts: Vec<StageFlags> = std::thread::scope(|scope| {
        let handles: Vec<_> = records
            .chunks(chunk)
            .map(|part| {
                let range = range.clone();
                scope.spawn(move || {
                    part.iter().map(|r| evaluate_record(engine, r, seed, range.clone())).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    let aggregates = aggregate(&concepts);
    EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        range: [*range.start(), *range.end()],
        concepts,
        aggregates,
    }
}

pub fn evaluate_corpus_default(engine: &Engine, records: &[ConceptRecord]) -> EvalReport {
    evaluate_corpus(engine, records, 0, DEFAULT_RANGE)
}

pub fn aggregate(concepts: &[StageFlags]) -> Aggregates {
    let total = concepts.len();
    let count = |f: &dyn Fn(&StageFlags) -> bool| Rate::of(concepts.iter().filter(|c| f(c)).count(), total);
    let columns = COLUMNS.iter().enumerate().map(|(i, name)| (name.to_string(), count(&|c| c.flags()[i]))).collect();
    Aggregates {
        concepts: total,
        columns,
        question_or_correction: count(&|c| c.question() || c.correction()),
        question_and_correction: count(&|c| c.question() && c.correction()),
        only_question: count(&|c| c.question() && !c.correction()),
        none: count(&|c| !c.question() && !c.correction()),
    }
}

fn percent(rate: &Rate) -> String {
    match rate.percent {
        Some(p) => format!("{p:.1}%"),
        None => "undefined".into(),
    }
}

/// Fixed-width table followed by the aggregate lines.
pub fn render_table(report: &EvalReport) -> String {
    let headers = ["qid", "label", "ident", "units", "transl", "rearr", "subst", "expl"];
    let rows: Vec<Vec<String>> = report
        .concepts
        .iter()
        .map(|c| {
            let mut row = vec![c.qid.clone(), c.label.clone()];
            row.extend(c.flags().iter().map(|&f| if f { "yes" } else { "no" }.to_string()));
            row
        })
        .collect();
    let widths: Vec<usize> = (0..headers.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).chain([headers[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    for row in &rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    let agg = &report.aggregates;
    out += &format!("\nconcepts: {}\n", agg.concepts);
    for name in COLUMNS {
        let rate = &agg.columns[name];
        out += &format!("{name}: {} yes ({}/{})\n", percent(rate), rate.yes, agg.concepts);
    }
    for (name, rate) in [
        ("question or correction", &agg.question_or_correction),
        ("question and correction", &agg.question_and_correction),
        ("only question", &agg.only_question),
        ("none", &agg.none),
    ] {
        out += &format!("{name}: {} ({}/{})\n", percent(rate), rate.yes, agg.concepts);
    }
    out
}

/// One row per concept; failure reasons joined with `; `.
pub fn render_csv(report: &EvalReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["qid", "label"];
    header.extend(COLUMNS);
    header.push("failure_reasons");
    writer.write_record(&header).expect("writing to memory");
    for c in &report.concepts {
        let mut row = vec![c.qid.clone(), c.label.clone()];
        row.extend(c.flags().iter().map(|f| f.to_string()));
        row.push(c.failure_reasons.join("; "));
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flushing to memory")).expect("csv output is UTF-8")
}

pub fn render_json(report: &EvalReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Checked-in stage flags for a corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedFlags {
    pub schema_version: u32,
    pub concepts: Vec<ExpectedConcept>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedConcept {
    pub qid: String,
    pub identifier_semantics_ok: bool,
    pub unit_retrieval_ok: bool,
    pub translation_ok: bool,
    pub rearrangement_ok: bool,
    pub substitution_ok: bool,
    pub explanation_ok: bool,
}

impl ExpectedConcept {
    fn flags(&self) -> [bool; 6] {
        [
            self.identifier_semantics_ok,
            self.unit_retrieval_ok,
            self.translation_ok,
            self.rearrangement_ok,
            self.substitution_ok,
            self.explanation_ok,
        ]
    }
}

impl ExpectedFlags {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Human-readable differences; empty when the report matches.
    pub fn mismatches(&self, report: &EvalReport) -> Vec<String> {
        let mut out = Vec::new();
        for expected in &self.concepts {
            let Some(actual) = report.concepts.iter().find(|c| c.qid == expected.qid) else {
                out.push(format!("{}: missing from the report", expected.qid));
                continue;
            };
            for ((name, want), got) in COLUMNS.iter().zip(expected.flags()).zip(actual.flags()) {
                if want != got {
                    out.push(format!("{} ({}): {name} expected {want}, got {got}", actual.qid, actual.label));
                }
            }
        }
        for actual in &report.concepts {
            if !self.concepts.iter().any(|e| e.qid == actual.qid) {
                out.push(format!("{}: not in the expected flags", actual.qid));
            }
        }
        out
    }
}
