//! Answer grading: value and unit are parsed and judged independently.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};

use crate::dimension::{parse_unit_answer, DimensionError, DimensionVector};

pub const VALUE_INCORRECT: &str = "Value incorrect!";
pub const UNIT_INCORRECT: &str = "Unit incorrect!";

/// Largest accepted decimal exponent in `aEb` answers.
const MAX_ANSWER_EXPONENT: u32 = 1000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ValueParseError {
    #[error("empty value")]
    Empty,
    #[error("`{0}` is not a number")]
    NotANumber(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent out of range in `{0}`")]
    ExponentOutOfRange(String),
}

/// Parses an integer, a decimal (`2.5`), a fraction (`5/2`) or scientific
/// notation (`6e1`), with an optional sign, into an exact rational.
pub fn parse_value(text: &str) -> Result<BigRational, ValueParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ValueParseError::Empty);
    }
    let not_a_number = || ValueParseError::NotANumber(text.to_string());
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let value = if let Some((p, q)) = body.split_once('/') {
        let p = parse_digits(p).ok_or_else(not_a_number)?;
        let q = parse_digits(q).ok_or_else(not_a_number)?;
        if q.is_zero() {
            return Err(ValueParseError::ZeroDenominator(text.to_string()));
        }
        BigRational::new(p, q)
    } else {
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let mantissa = parse_decimal(mantissa).ok_or_else(not_a_number)?;
        match exponent {
            None => mantissa,
            Some(e) => {
                let e: i64 = parse_signed_int(e).ok_or_else(not_a_number)?;
                if e.unsigned_abs() > u64::from(MAX_ANSWER_EXPONENT) {
                    return Err(ValueParseError::ExponentOutOfRange(text.to_string()));
                }
                let scale = BigRational::from_integer(Pow::pow(BigInt::from(10), e.unsigned_abs()));
                if e >= 0 {
                    mantissa * scale
                } else {
                    mantissa / scale
                }
            }
        }
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(text: &str) -> Option<BigInt> {
    (!text.is_empty() && text.bytes().all(|b| b.is_ascii_digit())).then(|| text.parse().expect("digits"))
}

fn parse_signed_int(text: &str) -> Option<i64> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// `12`, `12.5`, `.5` or `12.`.
fn parse_decimal(text: &str) -> Option<BigRational> {
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = alloc::format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    Some(BigRational::new(numer, Pow::pow(BigInt::from(10), frac_part.len() as u32)))
}

/// Tolerances for [`grade_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingPolicy {
    /// Relative half-width of the accepted band.
    pub tolerance: BigRational,
    /// Absolute threshold used when the solution is exactly zero.
    pub zero_threshold: BigRational,
}

impl GradingPolicy {
    /// Both thresholds set to `tolerance`.
    pub fn relative(tolerance: BigRational) -> Self {
        GradingPolicy { zero_threshold: tolerance.clone(), tolerance }
    }
}

impl Default for GradingPolicy {
    /// ±1 %.
    fn default() -> Self {
        GradingPolicy::relative(BigRational::new(1.into(), 100.into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradeReport {
    pub value_correct: bool,
    pub unit_correct: bool,
    pub parsed_value: Result<BigRational, ValueParseError>,
    pub parsed_unit: Result<DimensionVector, DimensionError>,
    /// `|answer - solution| / |solution|`; `None` when the value did not
    /// parse or the solution is zero.
    pub relative_error: Option<f64>,
    /// Feedback for the failing fields only.
    pub messages: Vec<String>,
}

/// Grades with the relative `tolerance` (and the same absolute threshold
/// when the solution is zero).
pub fn grade(
    answer_value: &str,
    answer_unit: &str,
    solution_value: &BigRational,
    solution_unit: &DimensionVector,
    tolerance: &BigRational,
) -> GradeReport {
    grade_with(answer_value, answer_unit, solution_value, solution_unit, &GradingPolicy::relative(tolerance.clone()))
}

pub fn grade_with(
    answer_value: &str,
    answer_unit: &str,
    solution_value: &BigRational,
    solution_unit: &DimensionVector,
    policy: &GradingPolicy,
) -> GradeReport {
    let parsed_value = parse_value(answer_value);
    let parsed_unit = parse_unit_answer(answer_unit);

    let (value_correct, relative_error) = match &parsed_value {
        Ok(answer) => {
            let difference = (answer - solution_value).abs();
            if solution_value.is_zero() {
                (difference <= policy.zero_threshold, None)
            } else {
                let magnitude = solution_value.abs();
                let correct = difference <= &policy.tolerance * &magnitude;
                (correct, (difference / magnitude).to_f64())
            }
        }
        Err(_) => (false, None),
    };
    let unit_correct = parsed_unit.as_ref().is_ok_and(|unit| unit == solution_unit);

    let mut messages = Vec::new();
    if !value_correct {
        messages.push(VALUE_INCORRECT.to_string());
    }
    if !unit_correct {
        messages.push(UNIT_INCORRECT.to_string());
    }
    GradeReport { value_correct, unit_correct, parsed_value, parsed_unit, relative_error, messages }
}
