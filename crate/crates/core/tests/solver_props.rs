//! Solve-then-substitute oracle: every rearrangement, evaluated on random
//! rational inputs, must satisfy the original equation.

use std::cell::Cell;

use num_bigint::BigInt;
use num_rational::BigRational;
use physquiz_core::expr::{evaluate, Assignment, Equation, EvalError, Expression, Symbol};
use physquiz_core::latex::parse_latex;
use physquiz_core::solver::{check_quizzable, rearrange_all, RearrangementSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn slot() -> Expression {
    Expression::var("slot")
}

/// Monomials in positive inputs: products, quotients, powers and roots.
fn monomial() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        4 => Just(slot()),
        1 => (2i64..=9).prop_map(Expression::int),
    ];
    leaf.prop_recursive(3, 10, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expression::mul),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::div(a, b)),
            (inner.clone(), prop_oneof![Just(-2i64), Just(-1), Just(2), Just(3)])
                .prop_map(|(b, e)| Expression::pow(b, Expression::int(e))),
            inner.clone().prop_map(Expression::sqrt),
        ]
    })
}

/// Signed sums of monomials, the shape of the physics formulas the solver
/// targets. Every intermediate value on an isolation path is then positive,
/// so the principal root is always the consistent branch.
fn shape() -> impl Strategy<Value = Expression> {
    prop::collection::vec((monomial(), any::<bool>()), 1..4).prop_map(|terms| {
        Expression::add(terms.into_iter().map(|(t, negate)| if negate { Expression::neg(t) } else { t }).collect())
    })
}

/// `y = shape` with every slot replaced by a fresh identifier.
fn equations() -> impl Strategy<Value = Equation> {
    shape().prop_map(|rhs| {
        let counter = Cell::new(0);
        let rhs = rhs.substitute(&|_| {
            counter.set(counter.get() + 1);
            Some(Expression::ident(Symbol::with_subscript("x", counter.get().to_string())))
        });
        Equation::new(Expression::var("y"), rhs)
    })
}

fn random_positive(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(1..=20)), BigInt::from(rng.gen_range(1..=5)))
}

/// Relative closeness measured against `scale`, the size of the terms that
/// were summed. A sum that cancels to nearly zero leaves only rounding noise
/// from approximate roots, which is tiny next to its terms but not next to
/// itself.
fn close(a: &BigRational, b: &BigRational, scale: f64) -> bool {
    let (a, b) = (num_traits::ToPrimitive::to_f64(a).unwrap(), num_traits::ToPrimitive::to_f64(b).unwrap());
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(scale).max(1e-300)
}

/// Sum of the absolute values of the top-level terms of `expr` at `point`.
fn term_scale(expr: &Expression, point: &Assignment) -> f64 {
    let terms = match expr {
        Expression::Add(terms) => terms.as_slice(),
        other => std::slice::from_ref(other),
    };
    terms.iter().filter_map(|t| evaluate(t, point).ok()?.to_f64()).map(f64::abs).sum()
}

/// Draws a consistent point (random inputs for the original, lhs computed
/// from them), solves each rearrangement from that point and substitutes the
/// result back into the original. Returns how many samples were checked.
///
/// Drawing inputs for the rearranged right-hand side directly can leave the
/// image of the original (`y = sqrt(x) + z` with `y < z`), where no inverse
/// exists.
fn check_set(set: &RearrangementSet, rng: &mut ChaCha8Rng) -> Result<usize, TestCaseError> {
    let original = &set.original;
    let original_lhs = original.lhs_symbol().unwrap();
    let mut checked = 0;
    for (symbol, eq) in &set.solved_for {
        prop_assert_eq!(eq.lhs_symbol(), Some(symbol));
        prop_assert_eq!(eq.rhs.occurrences(symbol), 0, "{} appears on its own rhs", symbol);
        for _ in 0..100 {
            let mut point: Assignment =
                original.rhs.free_identifiers().into_iter().map(|s| (s, random_positive(rng))).collect();
            let y = match evaluate(&original.rhs, &point) {
                Ok(value) => value,
                Err(EvalError::DivisionByZero | EvalError::NonRealResult) => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{original}: {e}"))),
            };
            point.insert(original_lhs.clone(), y.value.clone());
            point.remove(symbol);
            let solved = match evaluate(&eq.rhs, &point) {
                Ok(value) => value,
                Err(EvalError::DivisionByZero) => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{eq} at {point:?}: {e}"))),
            };
            point.insert(symbol.clone(), solved.value.clone());
            let rhs = match evaluate(&original.rhs, &point) {
                Ok(value) => value,
                // a solved value can sit on a pole of the original
                Err(EvalError::DivisionByZero) => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{original} at {point:?}: {e}"))),
            };
            let lhs = &point[original_lhs];
            if y.approximate || solved.approximate || rhs.approximate {
                prop_assert!(close(lhs, &rhs.value, term_scale(&original.rhs, &point)), "{} at {:?}: {} vs {}", eq, point, lhs, rhs.value);
            } else {
                prop_assert_eq!(lhs, &rhs.value, "{} at {:?}", eq, point);
            }
            checked += 1;
        }
    }
    Ok(checked)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rearrangements_satisfy_the_original(eq in equations(), seed in any::<u64>()) {
        if !check_quizzable(&eq).quizzable {
            return Ok(());
        }
        let Ok(set) = rearrange_all(&eq) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        check_set(&set, &mut rng)?;
    }
}

#[test]
fn physics_formulas_satisfy_the_original() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for latex in [
        "v = \\frac{s}{t}",
        "E = m c^2",
        "F = m a",
        "E_k = \\frac{1}{2} m v^2",
        "p = \\frac{F}{A}",
        "F = \\frac{G m_1 m_2}{r^2}",
        "T = 2 \\sqrt{\\frac{l}{g}}",
        "f = \\frac{1}{T}",
        "v = v_0 + a t",
    ] {
        let set = rearrange_all(&parse_latex(latex).unwrap()).unwrap();
        let checked = check_set(&set, &mut rng).unwrap();
        assert!(checked >= 50 * set.solved_for.len(), "{latex}: only {checked} samples");
    }
}
