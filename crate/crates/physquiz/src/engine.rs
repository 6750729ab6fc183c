//! The pipeline from a concept record to a question and its grading, shared
//! by the HTTP API, the command line and the evaluation harness.

use std::ops::RangeInclusive;

use num_rational::BigRational;
use physquiz_core::grader::{grade_with, GradingPolicy};
use physquiz_core::latex::ParseError;
use physquiz_core::quiz::{generate_question_with_template, QuestionTemplate, QuizError};
use physquiz_core::solver::{QuizzabilityReason, QuizzabilityVerdict, SolverError};
use physquiz_core::{
    clean_latex, parse_latex, rearrange_all, CleaningReport, ConceptRecord, Equation, GradeReport, QuizQuestion,
    RearrangementSet, Symbol,
};

/// A cleaned formula and the result of parsing it.
#[derive(Clone, Debug)]
pub struct Translation {
    pub cleaning: CleaningReport,
    pub equation: Result<Equation, ParseError>,
}

pub fn translate(latex: &str, heuristic_derivatives: bool) -> Translation {
    let cleaning = clean_latex(latex, heuristic_derivatives);
    let equation = parse_latex(&cleaning.cleaned);
    Translation { cleaning, equation }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("the defining formula cannot be translated: {0}")]
    Untranslatable(ParseError),
    #[error("the formula is not quizzable: {0}")]
    NotQuizzable(QuizzabilityReason),
    #[error(transparent)]
    Quiz(#[from] QuizError),
}

/// Settings that change what questions look like or how answers are graded.
#[derive(Clone, Debug)]
pub struct Engine {
    pub template: QuestionTemplate,
    pub heuristic_derivatives: bool,
    pub policy: GradingPolicy,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            template: QuestionTemplate::default_template(),
            heuristic_derivatives: false,
            policy: GradingPolicy::default(),
        }
    }
}

impl Engine {
    pub fn with_tolerance(tolerance: BigRational) -> Self {
        Engine { policy: GradingPolicy::relative(tolerance), ..Engine::default() }
    }

    pub fn translate(&self, record: &ConceptRecord) -> Translation {
        translate(&record.defining_formula_latex, self.heuristic_derivatives)
    }

    pub fn rearrange(&self, record: &ConceptRecord) -> Result<RearrangementSet, EngineError> {
        let equation =
            self.translate(record).equation.map_err(|e| match QuizzabilityVerdict::from_parse_error(&e) {
                Some(verdict) => EngineError::NotQuizzable(verdict.reason),
                None => EngineError::Untranslatable(e),
            })?;
        rearrange_all(&equation).map_err(|e| match e {
            SolverError::NotQuizzable(reason) => EngineError::NotQuizzable(reason),
            SolverError::NoRearrangementsFound { .. } => EngineError::Quiz(QuizError::NoQuizzableRearrangement),
        })
    }

    pub fn generate(
        &self,
        record: &ConceptRecord,
        target: Option<&Symbol>,
        range: RangeInclusive<i64>,
        seed: u64,
    ) -> Result<QuizQuestion, EngineError> {
        let rset = self.rearrange(record)?;
        Ok(generate_question_with_template(record, &rset, target, range, seed, &self.template)?)
    }

    pub fn grade(&self, question: &QuizQuestion, value: &str, unit: &str) -> GradeReport {
        grade_with(value, unit, &question.solution_value.value, &question.solution_unit.dimension, &self.policy)
    }
}
