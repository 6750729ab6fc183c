//! Plain-text infix rendering.
//!
//! Multiplication is always explicit (`m * c^2`) and division is written
//! with `/` (`s / t`). The output re-parses with [`super::parse_infix`] to a
//! structurally equal tree.

use alloc::format;
use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{Equation, Expression, Symbol};

/// Replacement text for an identifier when rendering with values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub text: String,
    /// Multi-token text (such as `6 m s^-1`) that needs parentheses in
    /// power bases and denominators.
    pub compound: bool,
}

type LeafFn<'a> = &'a dyn Fn(&Symbol) -> Option<Leaf>;

pub fn render_infix(expr: &Expression) -> String {
    render_infix_with(expr, &|_| None)
}

/// Renders `expr`, replacing identifiers for which `leaf` returns text.
pub fn render_infix_with(expr: &Expression, leaf: LeafFn<'_>) -> String {
    Renderer { leaf }.top(expr)
}

pub fn render_equation_infix(eq: &Equation) -> String {
    format!("{} = {}", render_infix(&eq.lhs), render_infix(&eq.rhs))
}

struct Renderer<'a> {
    leaf: LeafFn<'a>,
}

impl Renderer<'_> {
    fn top(&self, expr: &Expression) -> String {
        match expr {
            Expression::Add(terms) => self.sum(terms),
            Expression::Neg(inner) => format!("-{}", self.neg_operand(inner)),
            Expression::Mul(factors) => self.product(factors),
            Expression::Pow(_, exponent) if negative_integer(exponent).is_some() => {
                self.product(core::slice::from_ref(expr))
            }
            Expression::Pow(base, exponent) => self.power(base, exponent),
            Expression::Integer(n) => n.to_string(),
            Expression::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
            Expression::Identifier(symbol) => match (self.leaf)(symbol) {
                Some(leaf) => leaf.text,
                None => symbol.to_string(),
            },
            Expression::Sqrt(inner) => format!("sqrt({})", self.top(inner)),
            Expression::Derivative { dependent, independent } => {
                format!("Derivative({dependent}, {independent})")
            }
            Expression::Sum { index, lower, upper, body } => {
                format!("Sum({}, {index}, {}, {})", self.top(body), self.top(lower), self.top(upper))
            }
            Expression::Function { name, args } => {
                let args: alloc::vec::Vec<String> = args.iter().map(|a| self.top(a)).collect();
                format!("{name}({})", args.join(", "))
            }
        }
    }

    fn sum(&self, terms: &[Expression]) -> String {
        let mut out = String::new();
        for (i, term) in terms.iter().enumerate() {
            if i == 0 {
                out.push_str(&self.top(term));
                continue;
            }
            match term {
                Expression::Neg(inner) => {
                    out.push_str(" - ");
                    out.push_str(&self.neg_operand(inner));
                }
                Expression::Integer(n) if n.is_negative() => {
                    out.push_str(&format!(" - {}", -n));
                }
                Expression::Rational(r) if r.is_negative() => {
                    out.push_str(&format!(" - {}/{}", -r.numer(), r.denom()));
                }
                other => {
                    out.push_str(" + ");
                    out.push_str(&self.top(other));
                }
            }
        }
        out
    }

    fn neg_operand(&self, inner: &Expression) -> String {
        match inner {
            Expression::Add(_) | Expression::Neg(_) => format!("({})", self.top(inner)),
            _ => self.top(inner),
        }
    }

    fn product(&self, factors: &[Expression]) -> String {
        let mut out = String::new();
        for (i, factor) in factors.iter().enumerate() {
            let reciprocal = match factor {
                Expression::Pow(base, exponent) => negative_integer(exponent).map(|k| (base, k)),
                _ => None,
            };
            match reciprocal {
                Some((base, k)) => {
                    out.push_str(if i == 0 { "1 / " } else { " / " });
                    if k.is_one() {
                        out.push_str(&self.denominator(base));
                    } else {
                        out.push_str(&self.power(base, &Expression::Integer(k)));
                    }
                }
                None => {
                    if i > 0 {
                        out.push_str(" * ");
                    }
                    out.push_str(&self.factor(factor));
                }
            }
        }
        out
    }

    fn factor(&self, expr: &Expression) -> String {
        let wrap = match expr {
            Expression::Add(_) | Expression::Neg(_) | Expression::Rational(_) => true,
            Expression::Integer(n) => n.is_negative(),
            _ => false,
        };
        self.wrapped(expr, wrap)
    }

    fn denominator(&self, expr: &Expression) -> String {
        let wrap = match expr {
            Expression::Pow(_, exponent) => negative_integer(exponent).is_some(),
            Expression::Identifier(symbol) => self.leaf_is_compound(symbol),
            other => !is_atom(other),
        };
        self.wrapped(expr, wrap)
    }

    fn power(&self, base: &Expression, exponent: &Expression) -> String {
        let base_text = match base {
            Expression::Identifier(symbol) => self.wrapped(base, self.leaf_is_compound(symbol)),
            other => self.wrapped(other, !is_atom(other)),
        };
        let exponent_text = match exponent {
            Expression::Integer(n) if !n.is_negative() => n.to_string(),
            Expression::Identifier(_) => self.top(exponent),
            other => format!("({})", self.top(other)),
        };
        format!("{base_text}^{exponent_text}")
    }

    fn wrapped(&self, expr: &Expression, wrap: bool) -> String {
        if wrap {
            format!("({})", self.top(expr))
        } else {
            self.top(expr)
        }
    }

    fn leaf_is_compound(&self, symbol: &Symbol) -> bool {
        (self.leaf)(symbol).is_some_and(|l| l.compound)
    }
}

/// `k` when `expr` is the integer `-k` with `k > 0`.
fn negative_integer(expr: &Expression) -> Option<BigInt> {
    match expr {
        Expression::Integer(n) if n.is_negative() => Some(-n),
        _ => None,
    }
}

fn is_atom(expr: &Expression) -> bool {
    match expr {
        Expression::Integer(n) => !n.is_negative(),
        Expression::Identifier(_)
        | Expression::Sqrt(_)
        | Expression::Derivative { .. }
        | Expression::Sum { .. }
        | Expression::Function { .. } => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(name: &str) -> Expression {
        Expression::var(name)
    }

    #[test]
    fn quotient() {
        assert_eq!(render_infix(&Expression::div(v("s"), v("t"))), "s / t");
    }

    #[test]
    fn product_with_power() {
        let e = Expression::mul(vec![v("m"), Expression::pow(v("c"), Expression::int(2))]);
        assert_eq!(render_infix(&e), "m * c^2");
    }

    #[test]
    fn subtraction() {
        let e = Expression::add(vec![v("a"), Expression::neg(v("b"))]);
        assert_eq!(render_infix(&e), "a - b");
    }

    #[test]
    fn reciprocal_alone_and_first() {
        assert_eq!(render_infix(&Expression::reciprocal(v("t"))), "1 / t");
        let e = Expression::Mul(vec![Expression::reciprocal(v("t")), v("s")]);
        assert_eq!(render_infix(&e), "1 / t * s");
        let e = Expression::div(v("E"), Expression::pow(v("c"), Expression::int(2)));
        assert_eq!(render_infix(&e), "E / c^2");
    }

    #[test]
    fn grouping() {
        let e = Expression::mul(vec![Expression::add(vec![v("a"), v("b")]), v("c")]);
        assert_eq!(render_infix(&e), "(a + b) * c");
        let e = Expression::div(v("x"), Expression::add(vec![v("a"), Expression::neg(v("b"))]));
        assert_eq!(render_infix(&e), "x / (a - b)");
        let e = Expression::neg(Expression::add(vec![v("a"), v("b")]));
        assert_eq!(render_infix(&e), "-(a + b)");
        let e = Expression::mul(vec![Expression::int(-3), v("x")]);
        assert_eq!(render_infix(&e), "(-3) * x");
    }

    #[test]
    fn roots_and_rational_exponents() {
        let e = Expression::sqrt(Expression::div(v("E"), v("m")));
        assert_eq!(render_infix(&e), "sqrt(E / m)");
        let third = Expression::Rational(num_rational::BigRational::new(1.into(), 3.into()));
        assert_eq!(render_infix(&Expression::pow(v("x"), third)), "x^(1/3)");
    }

    #[test]
    fn leaves_with_units() {
        let e = Expression::mul(vec![v("v"), v("t")]);
        let leaf = |s: &Symbol| {
            Some(match s.base() {
                "v" => Leaf { text: "6 m s^-1".into(), compound: true },
                _ => Leaf { text: "10 s".into(), compound: true },
            })
        };
        assert_eq!(render_infix_with(&e, &leaf), "6 m s^-1 * 10 s");
        let q = Expression::div(v("s"), v("v"));
        assert_eq!(render_infix_with(&q, &leaf), "10 s / (6 m s^-1)");
    }
}
