//! Question generation: random givens, question text from a template and a
//! step-by-step explanation of the solution.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concept::{ConceptRecord, IdentifierInfo};
use crate::dimension::{infer_lhs_dimension, DimensionError, DimensionVector, UnitString};
use crate::expr::{
    evaluate, render_equation_infix, render_infix_with, Assignment, Equation, EvalError, Expression, Leaf, Number,
    Symbol,
};
use crate::solver::RearrangementSet;

pub const DEFAULT_TEMPLATE: &str = include_str!("../data/question_template.txt");

/// Draws rejected before giving up.
pub const MAX_RETRIES: u32 = 100;

pub const DEFAULT_RANGE: RangeInclusive<i64> = 1..=10;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template placeholder `{{{0}}}` is not bound")]
    TemplatePlaceholderUnbound(String),
    #[error("template has an unclosed `{{`")]
    UnclosedPlaceholder,
    #[error("template file lacks a `template_version` line")]
    MissingVersion,
    #[error("template text is empty")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QuizError {
    #[error("no rearrangement is available for a question")]
    NoQuizzableRearrangement,
    #[error("the formula cannot be solved for `{0}`")]
    TargetNotSolvable(Symbol),
    #[error("no unit is known for `{0}`")]
    UnitUnavailable(Symbol),
    #[error("no identifier information for `{0}`")]
    MissingIdentifierInfo(Symbol),
    #[error("every one of {0} draws was degenerate")]
    RetriesExhausted(u32),
    #[error("value range is empty")]
    EmptyRange,
    #[error("cannot evaluate the solution: {0}")]
    Evaluation(EvalError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

const PLACEHOLDERS: [&str; 4] = ["concept", "givens", "target_name", "target_symbol"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(&'static str),
}

/// A parsed question template; placeholders are checked when loading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuestionTemplate {
    pub version: u32,
    pieces: Vec<Piece>,
}

impl QuestionTemplate {
    /// Parses a template file (see the bundled default for the format).
    pub fn parse(file: &str) -> Result<Self, TemplateError> {
        let mut lines = file.lines().filter(|l| !l.starts_with('#'));
        let version = loop {
            match lines.next() {
                Some(line) if line.trim().is_empty() => continue,
                Some(line) => {
                    let version = line.trim().strip_prefix("template_version").map(str::trim);
                    break version.and_then(|v| v.parse().ok()).ok_or(TemplateError::MissingVersion)?;
                }
                None => return Err(TemplateError::MissingVersion),
            }
        };
        let body: Vec<&str> = lines.collect();
        let text = body.join("\n");
        let text = text.trim();
        if text.is_empty() {
            return Err(TemplateError::Empty);
        }
        Ok(QuestionTemplate { version, pieces: parse_pieces(text)? })
    }

    pub fn default_template() -> Self {
        QuestionTemplate::parse(DEFAULT_TEMPLATE).expect("bundled template is valid")
    }

    fn fill(&self, values: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
        let mut out = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Text(text) => out.push_str(text),
                Piece::Slot(name) => out.push_str(
                    values.get(name).ok_or_else(|| TemplateError::TemplatePlaceholderUnbound(name.to_string()))?,
                ),
            }
        }
        Ok(out)
    }
}

fn parse_pieces(text: &str) -> Result<Vec<Piece>, TemplateError> {
    let mut pieces = Vec::new();
    let mut literal = String::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if let Some(after) = rest.strip_prefix("{{") {
            literal.push('{');
            rest = after;
        } else if let Some(after) = rest.strip_prefix("}}") {
            literal.push('}');
            rest = after;
        } else if c == '{' {
            let end = rest.find('}').ok_or(TemplateError::UnclosedPlaceholder)?;
            let name = &rest[1..end];
            let slot = PLACEHOLDERS
                .iter()
                .find(|p| **p == name)
                .ok_or_else(|| TemplateError::TemplatePlaceholderUnbound(name.to_string()))?;
            if !literal.is_empty() {
                pieces.push(Piece::Text(core::mem::take(&mut literal)));
            }
            pieces.push(Piece::Slot(slot));
            rest = &rest[end + 1..];
        } else {
            literal.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    if !literal.is_empty() {
        pieces.push(Piece::Text(literal));
    }
    Ok(pieces)
}

/// One given quantity of a question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GivenValue {
    pub info: IdentifierInfo,
    pub value: BigInt,
    pub unit: UnitString,
}

impl GivenValue {
    /// `velocity v = 6 m s^-1`, or `n = 4 (dimensionless)`.
    pub fn describe(&self) -> String {
        let quantity = format!("{} = {}", self.info.symbol, value_with_unit(&self.value.to_string(), &self.unit));
        if self.info.name.is_empty() {
            quantity
        } else {
            format!("{} {}", self.info.name, quantity)
        }
    }
}

fn value_with_unit(value: &str, unit: &UnitString) -> String {
    if unit.dimension.is_dimensionless() {
        format!("{value} (dimensionless)")
    } else {
        format!("{value} {unit}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuizQuestion {
    pub concept_qid: String,
    pub concept_label: String,
    pub target: IdentifierInfo,
    /// The rearrangement solved for the target.
    pub equation: Equation,
    /// Givens in the order their identifiers appear in `equation.rhs`.
    pub givens: Vec<GivenValue>,
    pub question_text: String,
    pub solution_value: Number,
    pub solution_unit: UnitString,
    pub seed: u64,
    pub range: RangeInclusive<i64>,
}

impl QuizQuestion {
    pub fn assignment(&self) -> Assignment {
        self.givens.iter().map(|g| (g.info.symbol.clone(), BigRational::from_integer(g.value.clone()))).collect()
    }

    /// Six significant figures.
    pub fn solution_display(&self) -> String {
        self.solution_value.to_display_string()
    }
}

/// Generates a question with the bundled template.
pub fn generate_question(
    record: &ConceptRecord,
    rset: &RearrangementSet,
    target: Option<&Symbol>,
    range: RangeInclusive<i64>,
    seed: u64,
) -> Result<QuizQuestion, QuizError> {
    generate_question_with_template(record, rset, target, range, seed, &QuestionTemplate::default_template())
}

/// Same inputs, same question: all randomness comes from a ChaCha8 stream
/// seeded with `seed`.
pub fn generate_question_with_template(
    record: &ConceptRecord,
    rset: &RearrangementSet,
    target: Option<&Symbol>,
    range: RangeInclusive<i64>,
    seed: u64,
    template: &QuestionTemplate,
) -> Result<QuizQuestion, QuizError> {
    if range.is_empty() {
        return Err(QuizError::EmptyRange);
    }
    if rset.solved_for.is_empty() {
        return Err(QuizError::NoQuizzableRearrangement);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = match target {
        Some(symbol) => symbol.clone(),
        None => {
            // u64 keeps the draw identical on 32- and 64-bit targets
            let index = rng.gen_range(0..rset.solved_for.len() as u64) as usize;
            rset.solved_for.keys().nth(index).expect("index in range").clone()
        }
    };
    let equation = rset.solved_for.get(&target).ok_or_else(|| QuizError::TargetNotSolvable(target.clone()))?.clone();
    let target_info = record.identifier(&target).ok_or_else(|| QuizError::MissingIdentifierInfo(target.clone()))?;

    let dimensions = known_dimensions(record, &rset.original);
    let rhs_symbols = equation.rhs.free_identifiers();
    let mut given_infos = Vec::with_capacity(rhs_symbols.len());
    for symbol in &rhs_symbols {
        let info = record.identifier(symbol).ok_or_else(|| QuizError::MissingIdentifierInfo(symbol.clone()))?;
        let dimension = dimensions.get(symbol).ok_or_else(|| QuizError::UnitUnavailable(symbol.clone()))?;
        given_infos.push((info, UnitString::from_dimension(*dimension)));
    }
    let solution_dimension = match dimensions.get(&target) {
        Some(d) => *d,
        None => infer_lhs_dimension(&dimensions, &equation.rhs).map_err(|e| match e {
            DimensionError::MissingIdentifierDimension(s) => QuizError::UnitUnavailable(s),
            _ => QuizError::UnitUnavailable(target.clone()),
        })?,
    };

    for _ in 0..MAX_RETRIES {
        let values: Vec<BigInt> = rhs_symbols.iter().map(|_| BigInt::from(rng.gen_range(range.clone()))).collect();
        let assignment: Assignment =
            rhs_symbols.iter().cloned().zip(values.iter().map(|v| BigRational::from_integer(v.clone()))).collect();
        let solution = match evaluate(&equation.rhs, &assignment) {
            Ok(value) => value,
            Err(EvalError::DivisionByZero | EvalError::NonRealResult) => continue,
            Err(other) => return Err(QuizError::Evaluation(other)),
        };
        if !satisfies_original(&rset.original, &assignment, &target, &solution) {
            continue;
        }
        let givens = given_infos
            .iter()
            .zip(values)
            .map(|((info, unit), value)| GivenValue { info: (*info).clone(), value, unit: unit.clone() })
            .collect();
        let mut question = QuizQuestion {
            concept_qid: record.qid.clone(),
            concept_label: record.label.clone(),
            target: target_info.clone(),
            equation,
            givens,
            question_text: String::new(),
            solution_value: solution,
            solution_unit: UnitString::from_dimension(solution_dimension),
            seed,
            range,
        };
        question.question_text = render_question_text_with(&question, template)?;
        return Ok(question);
    }
    Err(QuizError::RetriesExhausted(MAX_RETRIES))
}

/// Dimensions from identifier entries; the formula's own dimension fills in
/// for the original left-hand side.
pub fn known_dimensions(record: &ConceptRecord, original: &Equation) -> BTreeMap<Symbol, DimensionVector> {
    let mut dimensions: BTreeMap<Symbol, DimensionVector> =
        record.identifiers.iter().filter_map(|info| info.dimension.map(|d| (info.symbol.clone(), d))).collect();
    if let (Some(lhs), Some(d)) = (original.lhs_symbol(), &record.formula_dimension) {
        dimensions.insert(lhs.clone(), *d);
    }
    dimensions
}

/// A rearrangement is only valid on part of the original's domain (an
/// inverted square root needs a non-negative operand); reject draws where
/// the solved value does not satisfy the original equation.
fn satisfies_original(original: &Equation, assignment: &Assignment, target: &Symbol, solution: &Number) -> bool {
    if original.lhs_symbol() == Some(target) {
        return true;
    }
    let mut full = assignment.clone();
    full.insert(target.clone(), solution.value.clone());
    let (Ok(lhs), Ok(rhs)) = (evaluate(&original.lhs, &full), evaluate(&original.rhs, &full)) else {
        return false;
    };
    if lhs.approximate || rhs.approximate || solution.approximate {
        let (Some(a), Some(b)) = (lhs.value.to_f64(), rhs.value.to_f64()) else { return false };
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
    } else {
        lhs.value == rhs.value
    }
}

pub fn render_question_text(question: &QuizQuestion) -> Result<String, TemplateError> {
    render_question_text_with(question, &QuestionTemplate::default_template())
}

pub fn render_question_text_with(
    question: &QuizQuestion,
    template: &QuestionTemplate,
) -> Result<String, TemplateError> {
    let givens: Vec<String> = question.givens.iter().map(GivenValue::describe).collect();
    let mut values = BTreeMap::new();
    values.insert("concept", question.concept_label.clone());
    values.insert("givens", join_with_and(&givens));
    values.insert("target_name", question.target.name.clone());
    values.insert("target_symbol", question.target.symbol.to_string());
    template.fill(&values)
}

fn join_with_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationStep {
    pub description: String,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    /// `speed (Q3711325)`.
    pub reference: String,
    pub reference_url: String,
    pub steps: Vec<ExplanationStep>,
    /// The right-hand side with the given values in place of identifiers.
    pub substituted: Expression,
    pub final_value: String,
    pub final_unit: UnitString,
}

/// Symbolic equation, the same equation with values and units, and the result.
pub fn render_explanation(question: &QuizQuestion) -> Explanation {
    let target = &question.target.symbol;
    let by_symbol: BTreeMap<&Symbol, &GivenValue> = question.givens.iter().map(|g| (&g.info.symbol, g)).collect();

    let with_units = render_infix_with(&question.equation.rhs, &|symbol| {
        by_symbol.get(symbol).map(|g| {
            if g.unit.dimension.is_dimensionless() {
                Leaf { text: g.value.to_string(), compound: g.value.is_negative() }
            } else {
                Leaf { text: format!("{} {}", g.value, g.unit), compound: true }
            }
        })
    });
    let substituted = question.equation.rhs.substitute(&|symbol| {
        by_symbol.get(symbol).map(|g| Expression::number(BigRational::from_integer(g.value.clone())))
    });
    let final_value = question.solution_display();
    let approx = if question.solution_value.approximate { "≈" } else { "=" };
    let givens: Vec<String> = question
        .givens
        .iter()
        .map(|g| format!("{} = {}", g.info.symbol, value_with_unit(&g.value.to_string(), &g.unit)))
        .collect();

    let steps = alloc::vec![
        ExplanationStep {
            description: format!("Solve the defining formula of {} for {}", question.concept_label, target),
            rendered: render_equation_infix(&question.equation),
        },
        ExplanationStep {
            description: format!("Substitute {}", join_with_and(&givens)),
            rendered: format!("{target} = {with_units}"),
        },
        ExplanationStep {
            description: "Evaluate".to_string(),
            rendered: format!("{target} {approx} {}", value_with_unit(&final_value, &question.solution_unit)),
        },
    ];
    Explanation {
        reference: format!("{} ({})", question.concept_label, question.concept_qid),
        reference_url: format!("https://www.wikidata.org/wiki/{}", question.concept_qid),
        steps,
        substituted,
        final_value,
        final_unit: question.solution_unit.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::RecordSource;
    use crate::dimension::parse_isq;
    use crate::latex::parse_latex;
    use crate::solver::rearrange_all;
    use alloc::vec;

    fn info(symbol: &str, name: &str, dim: Option<&str>) -> IdentifierInfo {
        IdentifierInfo {
            symbol: symbol.parse().unwrap(),
            name: name.into(),
            qid: None,
            dimension: dim.map(|d| parse_isq(d).unwrap()),
        }
    }

    fn record(latex: &str, formula_dim: Option<&str>, identifiers: Vec<IdentifierInfo>) -> ConceptRecord {
        ConceptRecord {
            qid: "Q1".into(),
            label: "test".into(),
            defining_formula_latex: latex.into(),
            formula_dimension: formula_dim.map(|d| parse_isq(d).unwrap()),
            identifiers,
            source: RecordSource::Fixture,
            retrieved_at: 0,
        }
    }

    fn speed() -> ConceptRecord {
        let mut r = record(
            "v = \\frac{s}{t}",
            Some("L T^-1"),
            vec![
                info("v", "velocity", Some("L T^-1")),
                info("s", "distance", Some("L")),
                info("t", "duration", Some("T")),
            ],
        );
        r.qid = "Q3711325".into();
        r.label = "speed".into();
        r
    }

    fn rset(record: &ConceptRecord) -> RearrangementSet {
        rearrange_all(&parse_latex(&record.defining_formula_latex).unwrap()).unwrap()
    }

    /// Finds a seed whose draw for `target` gives the wanted givens.
    fn question_with(record: &ConceptRecord, target: &str, wanted: &[i64]) -> QuizQuestion {
        let set = rset(record);
        let target: Symbol = target.parse().unwrap();
        (0..100_000)
            .map(|seed| generate_question(record, &set, Some(&target), 1..=10, seed).unwrap())
            .find(|q| q.givens.iter().map(|g| g.value.to_i64().unwrap()).eq(wanted.iter().copied()))
            .expect("some seed draws the wanted values")
    }

    #[test]
    fn speed_distance_question() {
        let q = question_with(&speed(), "s", &[6, 10]);
        assert_eq!(q.solution_value, Number::from_integer(60));
        assert_eq!(q.solution_unit.text, "m");
        assert_eq!(q.equation.to_string(), "s = v * t");
        assert!(q.question_text.contains("velocity v = 6 m s^-1"), "{}", q.question_text);
        assert!(q.question_text.contains("duration t = 10 s"));
        assert!(q.question_text.contains("distance s"));
        assert_eq!(
            q.question_text,
            "Question on speed: given velocity v = 6 m s^-1 and duration t = 10 s, calculate the distance s."
        );

        let e = render_explanation(&q);
        let rendered: Vec<&str> = e.steps.iter().map(|s| s.rendered.as_str()).collect();
        assert_eq!(rendered, ["s = v * t", "s = 6 m s^-1 * 10 s", "s = 60 m"]);
        assert_eq!(e.reference, "speed (Q3711325)");
        assert!(e.steps[1].description.contains("v = 6 m s^-1") && e.steps[1].description.contains("t = 10 s"));
        assert_eq!(evaluate(&e.substituted, &Assignment::new()).unwrap(), q.solution_value);
    }

    #[test]
    fn quotient_and_original_targets() {
        let q = question_with(&speed(), "t", &[9, 3]);
        assert_eq!(render_explanation(&q).steps[1].rendered, "t = 9 m / (3 m s^-1)");
        assert_eq!(q.solution_unit.text, "s");
        let q = question_with(&speed(), "v", &[9, 3]);
        assert_eq!(q.solution_value, Number::from_integer(3));
        assert_eq!(q.solution_unit.text, "m s^-1");
    }

    #[test]
    fn identity_forced_draw() {
        let r = record("x = y", None, vec![info("x", "", Some("L")), info("y", "", Some("L"))]);
        let q = generate_question(&r, &rset(&r), Some(&Symbol::new("x")), 3..=3, 0).unwrap();
        assert_eq!(q.givens[0].value, BigInt::from(3));
        assert_eq!(q.solution_value, Number::from_integer(3));
        let rendered: Vec<String> = render_explanation(&q).steps.into_iter().map(|s| s.rendered).collect();
        assert_eq!(rendered, ["x = y", "x = 3 m", "x = 3 m"]);
    }

    #[test]
    fn dimensionless_givens_are_labelled() {
        let r = record(
            "v = \\frac{c}{n}",
            Some("L T^-1"),
            vec![
                info("v", "speed", Some("L T^-1")),
                info("c", "light speed", Some("L T^-1")),
                info("n", "index", Some("")),
            ],
        );
        let set = rset(&r);
        let q = (0..1000)
            .map(|seed| generate_question(&r, &set, Some(&Symbol::new("v")), 1..=10, seed).unwrap())
            .find(|q| q.givens[1].value == BigInt::from(4))
            .unwrap();
        assert!(q.question_text.contains("index n = 4 (dimensionless)"), "{}", q.question_text);
        let e = render_explanation(&q);
        assert!(e.steps[1].description.contains("n = 4 (dimensionless)"));
        let q = generate_question(&r, &set, Some(&Symbol::new("n")), 1..=10, 3).unwrap();
        assert!(q.solution_unit.dimension.is_dimensionless());
        assert!(render_explanation(&q).steps[2].rendered.ends_with("(dimensionless)"));
    }

    #[test]
    fn degenerate_draws_are_redrawn() {
        let r = record(
            "y = \\frac{1}{a - b}",
            None,
            vec![info("y", "", Some("L^-1")), info("a", "", Some("L")), info("b", "", Some("L"))],
        );
        let set = rset(&r);
        let y = Symbol::new("y");
        // half of all draws from 1..=2 have a = b
        for seed in 0..200 {
            let q = generate_question(&r, &set, Some(&y), 1..=2, seed).unwrap();
            assert_ne!(q.givens[0].value, q.givens[1].value);
        }
        assert_eq!(generate_question(&r, &set, Some(&y), 5..=5, 0), Err(QuizError::RetriesExhausted(MAX_RETRIES)));
    }

    #[test]
    fn unit_unavailable() {
        let r = record(
            "R = \\frac{U}{I}",
            Some("M L^2 T^-3 I^-2"),
            vec![
                info("R", "resistance", Some("M L^2 T^-3 I^-2")),
                info("U", "voltage", None),
                info("I", "current", Some("I")),
            ],
        );
        let set = rset(&r);
        assert_eq!(
            generate_question(&r, &set, Some(&Symbol::new("R")), 1..=10, 0),
            Err(QuizError::UnitUnavailable(Symbol::new("U")))
        );
        // solving for U needs no unit for U itself
        let q = generate_question(&r, &set, Some(&Symbol::new("U")), 1..=10, 0).unwrap();
        assert_eq!(q.solution_unit.dimension, parse_isq("M L^2 T^-3 I^-1").unwrap());
    }

    #[test]
    fn determinism_and_target_choice() {
        let r = speed();
        let set = rset(&r);
        let a = generate_question(&r, &set, None, 1..=10, 42).unwrap();
        let b = generate_question(&r, &set, None, 1..=10, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(render_explanation(&a), render_explanation(&b));
        let mut targets = alloc::collections::BTreeSet::new();
        for seed in 0..64 {
            targets.insert(generate_question(&r, &set, None, 1..=10, seed).unwrap().target.symbol);
        }
        assert_eq!(targets.len(), 3);
    }

    #[test]
    fn templates() {
        let t = QuestionTemplate::default_template();
        assert_eq!(t.version, 1);
        assert_eq!(
            QuestionTemplate::parse("template_version 2\nFind {target_symbol}, {{literally}}."),
            Ok(QuestionTemplate {
                version: 2,
                pieces: vec![
                    Piece::Text("Find ".into()),
                    Piece::Slot("target_symbol"),
                    Piece::Text(", {literally}.".into())
                ]
            })
        );
        assert_eq!(
            QuestionTemplate::parse("template_version 1\nWhat is {unknown}?"),
            Err(TemplateError::TemplatePlaceholderUnbound("unknown".into()))
        );
        assert_eq!(QuestionTemplate::parse("What?"), Err(TemplateError::MissingVersion));
        assert_eq!(QuestionTemplate::parse("template_version 1\n{concept"), Err(TemplateError::UnclosedPlaceholder));
        assert_eq!(QuestionTemplate::parse("# only\ntemplate_version 1\n\n"), Err(TemplateError::Empty));
    }
}
