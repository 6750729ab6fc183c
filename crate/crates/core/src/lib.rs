//! Formula engine for generating and grading physics quiz questions.
//!
//! The crate is `no_std` (with `alloc`) and covers everything that does not
//! need IO:
//!
//! - [`expr`]: expression trees, exact evaluation, infix rendering/parsing
//! - [`latex`]: LaTeX cleaning and parsing of defining formulae
//! - [`dimension`]: ISQ dimension vectors, SI unit rendering and unit answers
//! - [`solver`]: quizzability checks and per-identifier rearrangement
//! - [`concept`]: concept records shared with knowledge stores
//! - [`quiz`]: randomized questions, question text and explanations
//! - [`grader`]: value and unit grading of student answers
//!
//! Retrieval, persistence, HTTP and the CLI live in the companion `physquiz`
//! crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// DimensionError carries the two clashing vectors by value.
#![allow(clippy::result_large_err)]

extern crate alloc;

pub mod concept;
pub mod dimension;
pub mod expr;
pub mod grader;
pub mod latex;
pub mod quiz;
pub mod solver;

pub use concept::{ConceptRecord, IdentifierInfo, RecordSource};
pub use dimension::{DimensionVector, UnitString};
pub use expr::{Equation, Expression, Number, Symbol};
pub use grader::{grade, parse_value, GradeReport};
pub use latex::{clean_latex, parse_latex, CleaningReport};
pub use quiz::{generate_question, render_explanation, render_question_text, Explanation, QuizQuestion};
pub use solver::{check_quizzable, count_question_space, rearrange_all, QuizzabilityVerdict, RearrangementSet};
