//! LaTeX front end: a versioned cleaning pass followed by a parser for the
//! supported subset of defining-formula notation.

mod clean;
mod parse;

pub use clean::{clean_latex, CleaningReport, CLEANING_RULES_VERSION};
pub use parse::{is_greek, parse_latex, parse_latex_expression, ParseError};
