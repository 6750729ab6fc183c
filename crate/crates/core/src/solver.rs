//! Quizzability checks and per-identifier rearrangement by inverting the
//! operator path from the equation root to the target's single occurrence.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::expr::{Equation, Expression, Symbol};
use crate::latex::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuizzabilityReason {
    Ok,
    NoSingleLhsIdentifier,
    RhsIsZero,
    NoFunctionalLinkage,
    MultipleEqualities,
    ContainsDerivative,
    ContainsUnevaluatable,
    TargetOccursMultiply,
}

impl fmt::Display for QuizzabilityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            QuizzabilityReason::Ok => "OK",
            QuizzabilityReason::NoSingleLhsIdentifier => "NoSingleLhsIdentifier",
            QuizzabilityReason::RhsIsZero => "RhsIsZero",
            QuizzabilityReason::NoFunctionalLinkage => "NoFunctionalLinkage",
            QuizzabilityReason::MultipleEqualities => "MultipleEqualities",
            QuizzabilityReason::ContainsDerivative => "ContainsDerivative",
            QuizzabilityReason::ContainsUnevaluatable => "ContainsUnevaluatable",
            QuizzabilityReason::TargetOccursMultiply => "TargetOccursMultiply",
        };
        f.write_str(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizzabilityVerdict {
    pub quizzable: bool,
    pub reason: QuizzabilityReason,
}

impl QuizzabilityVerdict {
    fn of(reason: QuizzabilityReason) -> Self {
        QuizzabilityVerdict { quizzable: reason == QuizzabilityReason::Ok, reason }
    }

    /// Verdict for a formula that failed to parse because it chains several
    /// equalities; other parse errors have no verdict.
    pub fn from_parse_error(error: &ParseError) -> Option<Self> {
        matches!(error, ParseError::MultipleEqualitySigns(_))
            .then(|| QuizzabilityVerdict::of(QuizzabilityReason::MultipleEqualities))
    }
}

/// Decides whether a question can be generated from `eq`.
///
/// Checks run in a fixed order and the first failing one is reported.
pub fn check_quizzable(eq: &Equation) -> QuizzabilityVerdict {
    use QuizzabilityReason::*;
    let Some(target) = eq.lhs_symbol() else {
        return QuizzabilityVerdict::of(NoSingleLhsIdentifier);
    };
    if eq.rhs.is_zero() {
        return QuizzabilityVerdict::of(RhsIsZero);
    }
    if eq.rhs.contains_derivative() {
        return QuizzabilityVerdict::of(ContainsDerivative);
    }
    if eq.rhs.contains_unevaluatable() {
        return QuizzabilityVerdict::of(ContainsUnevaluatable);
    }
    let others = eq.rhs.free_identifiers().into_iter().filter(|s| s != target).count();
    // `p_{tot,1} = p_{tot,2}` states that one quantity is conserved; it
    // relates two values of the same quantity rather than computing one.
    let same_quantity = matches!(&eq.rhs, Expression::Identifier(s) if s.base() == target.base());
    if others == 0 || same_quantity {
        return QuizzabilityVerdict::of(NoFunctionalLinkage);
    }
    if eq.rhs.occurrences(target) > 0 {
        return QuizzabilityVerdict::of(TargetOccursMultiply);
    }
    QuizzabilityVerdict::of(Ok)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipReason {
    MultipleOccurrences(usize),
    /// The operator on the path has no supported inverse.
    UnsupportedInverse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSymbol {
    pub symbol: Symbol,
    pub reason: SkipReason,
}

/// One equation per solvable identifier, each with that identifier alone on
/// the left. The original left-hand symbol maps to the original equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RearrangementSet {
    pub original: Equation,
    pub solved_for: BTreeMap<Symbol, Equation>,
    pub skipped: Vec<SkippedSymbol>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("equation is not quizzable: {0}")]
    NotQuizzable(QuizzabilityReason),
    #[error("no identifier could be isolated")]
    NoRearrangementsFound { skipped: Vec<SkippedSymbol> },
}

/// Solves a quizzable equation for each identifier that occurs exactly once.
pub fn rearrange_all(eq: &Equation) -> Result<RearrangementSet, SolverError> {
    let verdict = check_quizzable(eq);
    if !verdict.quizzable {
        return Err(SolverError::NotQuizzable(verdict.reason));
    }
    let lhs = eq.lhs_symbol().expect("quizzable equations have an identifier lhs").clone();
    let mut solved_for = BTreeMap::new();
    let mut skipped = Vec::new();
    solved_for.insert(lhs.clone(), eq.clone());
    for symbol in eq.rhs.free_identifiers() {
        let count = eq.occurrences(&symbol);
        if count != 1 {
            skipped.push(SkippedSymbol { symbol, reason: SkipReason::MultipleOccurrences(count) });
            continue;
        }
        match isolate(&eq.rhs, &symbol, eq.lhs.clone()) {
            Ok(solution) => {
                solved_for.insert(symbol.clone(), Equation::new(Expression::ident(symbol), solution));
            }
            Err(node) => skipped.push(SkippedSymbol { symbol, reason: SkipReason::UnsupportedInverse(node) }),
        }
    }
    if solved_for.len() == 1 {
        return Err(SolverError::NoRearrangementsFound { skipped });
    }
    Ok(RearrangementSet { original: eq.clone(), solved_for, skipped })
}

/// Walks from `expr` down to the single occurrence of `target`, applying the
/// inverse of each operator to `other` (the opposite side). On failure the
/// name of the blocking node is returned.
fn isolate(expr: &Expression, target: &Symbol, other: Expression) -> Result<Expression, String> {
    let contains = |e: &Expression| e.occurrences(target) > 0;
    match expr {
        Expression::Identifier(s) if s == target => Ok(other),
        Expression::Add(terms) => {
            let (inner, rest) = split_off(terms, contains);
            let mut parts = vec![other];
            parts.extend(rest.into_iter().map(Expression::neg));
            isolate(inner, target, Expression::add(parts))
        }
        Expression::Mul(factors) => {
            let (inner, rest) = split_off(factors, contains);
            // keep `t = s / v` rather than `t = 1 / (v / s)`
            if let Expression::Pow(base, exponent) = inner {
                if let Some(k) = negative_integer(exponent) {
                    let ratio = Expression::div(Expression::mul(rest), other);
                    return isolate(base, target, root(ratio, k));
                }
            }
            isolate(inner, target, Expression::div(other, Expression::mul(rest)))
        }
        Expression::Pow(base, exponent) => {
            if contains(exponent) {
                return Err("exponent".to_string());
            }
            isolate(base, target, invert_power(other, exponent))
        }
        Expression::Neg(inner) => isolate(inner, target, Expression::neg(other)),
        Expression::Sqrt(inner) => isolate(inner, target, Expression::pow(other, Expression::int(2))),
        Expression::Function { name, .. } => Err(name.clone()),
        Expression::Sum { .. } => Err("Sum".to_string()),
        Expression::Derivative { .. } => Err("Derivative".to_string()),
        Expression::Identifier(_) | Expression::Integer(_) | Expression::Rational(_) => {
            unreachable!("path always leads to the target")
        }
    }
}

fn split_off(children: &[Expression], contains: impl Fn(&Expression) -> bool) -> (&Expression, Vec<Expression>) {
    let index = children.iter().position(contains).expect("target occurs in one child");
    let rest = children.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, c)| c.clone()).collect();
    (&children[index], rest)
}

fn negative_integer(exponent: &Expression) -> Option<BigInt> {
    match exponent {
        Expression::Integer(n) if n.is_negative() => Some(-n),
        _ => None,
    }
}

/// Principal `k`-th root.
fn root(value: Expression, k: BigInt) -> Expression {
    if k.is_one() {
        value
    } else if k == BigInt::from(2) {
        Expression::sqrt(value)
    } else {
        Expression::pow(value, Expression::number(BigRational::new(BigInt::one(), k)))
    }
}

/// Inverse of `x^exponent` applied to `value`.
fn invert_power(value: Expression, exponent: &Expression) -> Expression {
    match exponent.as_number() {
        Some(n) if n.is_integer() => {
            let k = n.to_integer();
            if k.is_negative() {
                root(Expression::reciprocal(value), -k)
            } else {
                root(value, k)
            }
        }
        Some(n) => Expression::pow(value, Expression::number(n.recip())),
        None => Expression::pow(value, Expression::div(Expression::int(1), exponent.clone())),
    }
}

/// Number of distinct questions: each rearrangement contributes
/// `|range|^(identifiers on its right-hand side)`. Saturates at `u128::MAX`.
pub fn count_question_space(set: &RearrangementSet, range: RangeInclusive<i64>) -> u128 {
    let width = if range.is_empty() { 0 } else { (*range.end() as i128 - *range.start() as i128 + 1) as u128 };
    set.solved_for.values().fold(0u128, |total, eq| {
        let n = eq.rhs.free_identifiers().len() as u32;
        total.saturating_add(width.saturating_pow(n))
    })
}
