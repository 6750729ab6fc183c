use alloc::collections::BTreeMap;
use alloc::string::String;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::number::{nth_root, pow_integer, round_significant, Number, ROOT_PRECISION_DIGITS};
use super::{Expression, Symbol};

/// Identifier values used for evaluation.
pub type Assignment = BTreeMap<Symbol, BigRational>;

/// Largest integer exponent magnitude evaluated exactly.
const MAX_EXPONENT: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot evaluate {0} node")]
    UnevaluatableNode(String),
    #[error("no value assigned to identifier `{0}`")]
    MissingAssignment(Symbol),
    #[error("result is not a real number")]
    NonRealResult,
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
}

/// Evaluates `expr` exactly under `assignment`.
///
/// Unevaluatable nodes are reported before missing identifiers, and missing
/// identifiers before any arithmetic error, so the error does not depend on
/// evaluation order.
pub fn evaluate(expr: &Expression, assignment: &Assignment) -> Result<Number, EvalError> {
    if let Some(kind) = unevaluatable_kind(expr) {
        return Err(EvalError::UnevaluatableNode(kind.into()));
    }
    if let Some(missing) = expr.free_identifiers().into_iter().find(|s| !assignment.contains_key(s)) {
        return Err(EvalError::MissingAssignment(missing));
    }
    eval_node(expr, assignment)
}

fn unevaluatable_kind(expr: &Expression) -> Option<&'static str> {
    if expr.contains_derivative() {
        Some("Derivative")
    } else if expr.any_node(&|e| matches!(e, Expression::Sum { .. })) {
        Some("Sum")
    } else if expr.any_node(&|e| matches!(e, Expression::Function { .. })) {
        Some("Function")
    } else {
        None
    }
}

fn eval_node(expr: &Expression, assignment: &Assignment) -> Result<Number, EvalError> {
    let mut result = eval_children(expr, assignment)?;
    if result.approximate {
        result.value = round_significant(&result.value, ROOT_PRECISION_DIGITS + 5);
    }
    Ok(result)
}

fn eval_children(expr: &Expression, assignment: &Assignment) -> Result<Number, EvalError> {
    match expr {
        Expression::Integer(n) => Ok(Number::exact(BigRational::from_integer(n.clone()))),
        Expression::Rational(r) => Ok(Number::exact(r.clone())),
        Expression::Identifier(symbol) => assignment
            .get(symbol)
            .cloned()
            .map(Number::exact)
            .ok_or_else(|| EvalError::MissingAssignment(symbol.clone())),
        Expression::Add(children) => {
            let mut total = Number::from_integer(0);
            for child in children {
                total = total.add(&eval_node(child, assignment)?);
            }
            Ok(total)
        }
        Expression::Mul(children) => {
            let mut product = Number::from_integer(1);
            for child in children {
                product = product.mul(&eval_node(child, assignment)?);
            }
            Ok(product)
        }
        Expression::Neg(inner) => Ok(eval_node(inner, assignment)?.neg()),
        Expression::Sqrt(inner) => {
            let radicand = eval_node(inner, assignment)?;
            let root = nth_root(&radicand.value, 2).ok_or(EvalError::NonRealResult)?;
            Ok(Number { approximate: root.approximate || radicand.approximate, ..root })
        }
        Expression::Pow(base, exponent) => {
            let base = eval_node(base, assignment)?;
            let exponent = eval_node(exponent, assignment)?;
            eval_pow(&base, &exponent)
        }
        Expression::Derivative { .. } => Err(EvalError::UnevaluatableNode("Derivative".into())),
        Expression::Sum { .. } => Err(EvalError::UnevaluatableNode("Sum".into())),
        Expression::Function { .. } => Err(EvalError::UnevaluatableNode("Function".into())),
    }
}

fn eval_pow(base: &Number, exponent: &Number) -> Result<Number, EvalError> {
    let unsupported = || EvalError::UnsupportedExponent(exponent.to_display_string());
    if exponent.approximate && !exponent.value.is_integer() {
        return Err(unsupported());
    }
    let numer = exponent.value.numer().to_i64().ok_or_else(unsupported)?;
    let degree = exponent.value.denom().to_u32().ok_or_else(unsupported)?;
    if numer.unsigned_abs() > MAX_EXPONENT || u64::from(degree) > MAX_EXPONENT {
        return Err(unsupported());
    }
    let raised = pow_integer(&base.value, numer).ok_or(EvalError::DivisionByZero)?;
    if degree == 1 {
        return Ok(Number { value: raised, approximate: base.approximate || exponent.approximate });
    }
    if raised.is_negative() && degree % 2 == 0 {
        return Err(EvalError::NonRealResult);
    }
    let root = nth_root(&raised, degree).ok_or(EvalError::NonRealResult)?;
    Ok(Number { approximate: root.approximate || base.approximate, ..root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_bigint::BigInt;

    fn assign(pairs: &[(&str, i64)]) -> Assignment {
        pairs
            .iter()
            .map(|(name, value)| (Symbol::new(*name), BigRational::from_integer(BigInt::from(*value))))
            .collect()
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn speed_quotient() {
        let rhs = Expression::div(Expression::var("s"), Expression::var("t"));
        let value = evaluate(&rhs, &assign(&[("s", 120), ("t", 2)])).unwrap();
        assert_eq!(value, Number::exact(int(60)));
    }

    #[test]
    fn identity() {
        let value = evaluate(&Expression::var("x"), &assign(&[("x", 7)])).unwrap();
        assert_eq!(value.value, int(7));
    }

    #[test]
    fn mass_energy() {
        let rhs =
            Expression::mul(vec![Expression::var("m"), Expression::pow(Expression::var("c"), Expression::int(2))]);
        let value = evaluate(&rhs, &assign(&[("m", 2), ("c", 3)])).unwrap();
        assert_eq!(value.value, int(18));
        assert!(!value.approximate);
    }

    #[test]
    fn division_by_zero() {
        let rhs = Expression::div(Expression::var("s"), Expression::var("t"));
        assert_eq!(evaluate(&rhs, &assign(&[("s", 1), ("t", 0)])), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn missing_assignment_names_symbol() {
        let rhs = Expression::div(Expression::var("s"), Expression::var("t"));
        assert_eq!(evaluate(&rhs, &assign(&[("s", 1)])), Err(EvalError::MissingAssignment(Symbol::new("t"))));
    }

    #[test]
    fn unevaluatable_nodes() {
        let d = Expression::Derivative { dependent: Symbol::new("v"), independent: Symbol::new("t") };
        assert!(matches!(evaluate(&d, &Assignment::new()), Err(EvalError::UnevaluatableNode(_))));
        let f = Expression::Function { name: "sin".into(), args: vec![Expression::var("x")] };
        assert!(matches!(evaluate(&f, &assign(&[("x", 1)])), Err(EvalError::UnevaluatableNode(_))));
    }

    #[test]
    fn sqrt_exact_and_approximate() {
        let exact = evaluate(&Expression::sqrt(Expression::var("x")), &assign(&[("x", 16)])).unwrap();
        assert_eq!(exact, Number::exact(int(4)));
        let approx = evaluate(&Expression::sqrt(Expression::var("x")), &assign(&[("x", 2)])).unwrap();
        assert!(approx.approximate);
        let f = approx.to_f64().unwrap();
        assert!((f - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(
            evaluate(&Expression::sqrt(Expression::var("x")), &assign(&[("x", -4)])),
            Err(EvalError::NonRealResult)
        );
    }

    #[test]
    fn rational_exponent() {
        let third = Expression::Rational(BigRational::new(1.into(), 3.into()));
        let cube_root = Expression::pow(Expression::var("x"), third);
        let value = evaluate(&cube_root, &assign(&[("x", 27)])).unwrap();
        assert_eq!(value, Number::exact(int(3)));
    }
}
