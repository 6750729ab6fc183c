//! Property tests for the expression core: render/parse round trip, exact
//! evaluation against an independent fraction oracle, and the link between
//! `free_identifiers` and `MissingAssignment`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use physquiz_core::expr::{evaluate, parse_infix, render_infix, Assignment, EvalError, Expression, Symbol};
use proptest::prelude::*;

fn symbols() -> Vec<Symbol> {
    vec![
        Symbol::new("a"),
        Symbol::new("b"),
        Symbol::new("x"),
        Symbol::with_subscript("m", "1"),
        Symbol::with_subscript("p", "tot,2"),
        Symbol::new("alpha"),
    ]
}

fn leaf() -> impl Strategy<Value = Expression> {
    prop_oneof![
        (0usize..6).prop_map(|i| Expression::Identifier(symbols()[i].clone())),
        (-12i64..=12).prop_map(Expression::int),
        (1i64..=9, 2i64..=9).prop_map(|(n, d)| Expression::div(Expression::int(n), Expression::int(d))),
    ]
}

/// Trees made only of operations that evaluate exactly.
fn exact_tree() -> impl Strategy<Value = Expression> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expression::add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expression::mul),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::div(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::sub(a, b)),
            inner.clone().prop_map(Expression::neg),
            (inner.clone(), -3i64..=3).prop_map(|(b, e)| Expression::pow(b, Expression::int(e))),
        ]
    })
}

/// Exact trees plus roots, symbolic exponents and calls.
fn any_tree() -> impl Strategy<Value = Expression> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expression::add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expression::mul),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::div(a, b)),
            inner.clone().prop_map(Expression::neg),
            (inner.clone(), -3i64..=3).prop_map(|(b, e)| Expression::pow(b, Expression::int(e))),
            (inner.clone(), inner.clone()).prop_map(|(b, e)| Expression::pow(b, e)),
            inner.clone().prop_map(Expression::sqrt),
            inner.clone().prop_map(Expression::reciprocal),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expression::Function { name: "f".into(), args: vec![a, b] }),
        ]
    })
}

/// Fraction arithmetic on raw (numerator, denominator) pairs, normalised only
/// at the end. Independent of `BigRational` and of the evaluator.
#[derive(Clone, Debug)]
struct Frac(BigInt, BigInt);

impl Frac {
    fn int(n: &BigInt) -> Frac {
        Frac(n.clone(), BigInt::one())
    }
    fn add(&self, o: &Frac) -> Frac {
        Frac(&self.0 * &o.1 + &o.0 * &self.1, &self.1 * &o.1)
    }
    fn mul(&self, o: &Frac) -> Frac {
        Frac(&self.0 * &o.0, &self.1 * &o.1)
    }
    fn neg(&self) -> Frac {
        Frac(-&self.0, self.1.clone())
    }
    fn recip(&self) -> Option<Frac> {
        if self.0.is_zero() {
            None
        } else {
            Some(Frac(self.1.clone(), self.0.clone()))
        }
    }
    fn normalised(&self) -> (BigInt, BigInt) {
        let g = self.0.gcd(&self.1);
        let (mut n, mut d) = (&self.0 / &g, &self.1 / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        (n, d)
    }
}

fn oracle(expr: &Expression, values: &dyn Fn(&Symbol) -> Frac) -> Option<Frac> {
    Some(match expr {
        Expression::Integer(n) => Frac::int(n),
        Expression::Rational(r) => Frac(r.numer().clone(), r.denom().clone()),
        Expression::Identifier(s) => values(s),
        Expression::Add(children) => {
            let mut acc = Frac::int(&BigInt::zero());
            for c in children {
                acc = acc.add(&oracle(c, values)?);
            }
            acc
        }
        Expression::Mul(children) => {
            let mut acc = Frac::int(&BigInt::one());
            for c in children {
                acc = acc.mul(&oracle(c, values)?);
            }
            acc
        }
        Expression::Neg(inner) => oracle(inner, values)?.neg(),
        Expression::Pow(base, exponent) => {
            let base = oracle(base, values)?;
            let Expression::Integer(e) = exponent.as_ref() else { panic!("exact trees only") };
            let e: i64 = e.try_into().unwrap();
            let mut acc = Frac::int(&BigInt::one());
            for _ in 0..e.abs() {
                acc = acc.mul(&base);
            }
            if e < 0 {
                acc.recip()?
            } else {
                acc
            }
        }
        other => panic!("unexpected node {other:?}"),
    })
}

fn assignment_from(values: &[i64]) -> Assignment {
    symbols().into_iter().zip(values).map(|(s, v)| (s, BigRational::from_integer(BigInt::from(*v)))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_round_trips(expr in any_tree()) {
        let text = render_infix(&expr);
        let parsed = parse_infix(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(parsed, expr, "rendered as {}", text);
    }

    #[test]
    fn evaluation_matches_fraction_oracle(
        expr in exact_tree(),
        values in prop::collection::vec(-9i64..=9, 6),
    ) {
        let assignment = assignment_from(&values);
        let lookup = |s: &Symbol| {
            let v = &assignment[s];
            Frac(v.numer().clone(), v.denom().clone())
        };
        match (evaluate(&expr, &assignment), oracle(&expr, &lookup)) {
            (Ok(value), Some(expected)) => {
                prop_assert!(!value.approximate);
                let (n, d) = expected.normalised();
                prop_assert_eq!(value.value, BigRational::new(n, d));
            }
            (Err(EvalError::DivisionByZero), None) => {}
            (got, want) => prop_assert!(false, "evaluator {:?} vs oracle {:?}", got, want),
        }
    }

    #[test]
    fn free_identifiers_are_exactly_the_required_assignments(
        expr in exact_tree(),
        values in prop::collection::vec(1i64..=9, 6),
    ) {
        let free = expr.free_identifiers();
        for symbol in symbols() {
            let mut assignment = assignment_from(&values);
            assignment.remove(&symbol);
            let missing = matches!(
                evaluate(&expr, &assignment),
                Err(EvalError::MissingAssignment(ref s)) if *s == symbol
            );
            prop_assert_eq!(missing, free.contains(&symbol), "symbol {}", symbol);
        }
    }
}
