//! Expression trees, equations and identifier symbols.
//!
//! Trees are built through the canonicalising constructors on
//! [`Expression`] ([`Expression::add`], [`Expression::mul`],
//! [`Expression::div`], ...). They flatten nested sums and products and
//! normalise division to `Mul(a, Pow(b, -1))`, so that parsing a rendered
//! tree yields a structurally equal tree.

mod eval;
mod infix;
mod number;
mod render;

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use eval::{evaluate, Assignment, EvalError};
pub use infix::{parse_equation_infix, parse_infix, InfixError};
pub use number::{format_decimal, nth_root, pow_integer, Number, ROOT_PRECISION_DIGITS};
pub use render::{render_equation_infix, render_infix, render_infix_with, Leaf};

/// An identifier symbol such as `v`, `alpha` or `p_{tot,1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    base: String,
    subscript: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error("identifier symbol has an empty base")]
    EmptyBase,
    #[error("malformed identifier symbol `{0}`")]
    Malformed(String),
}

impl Symbol {
    /// Panics when `base` is empty; use [`Symbol::try_new`] for untrusted input.
    pub fn new(base: impl Into<String>) -> Self {
        Symbol::try_new(base, None).expect("symbol base must be non-empty")
    }

    pub fn with_subscript(base: impl Into<String>, subscript: impl Into<String>) -> Self {
        Symbol::try_new(base, Some(subscript.into())).expect("symbol base must be non-empty")
    }

    pub fn try_new(base: impl Into<String>, subscript: Option<String>) -> Result<Self, SymbolError> {
        let base = base.into();
        if base.is_empty() {
            return Err(SymbolError::EmptyBase);
        }
        let subscript = subscript.filter(|s| !s.is_empty());
        Ok(Symbol { base, subscript })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn subscript(&self) -> Option<&str> {
        self.subscript.as_deref()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        match &self.subscript {
            None => Ok(()),
            Some(sub) if sub.chars().all(|c| c.is_ascii_alphanumeric()) => write!(f, "_{sub}"),
            Some(sub) => write!(f, "_{{{sub}}}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = SymbolError;

    /// Accepts the rendered forms `v`, `m_i`, `p_{tot,1}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let malformed = || SymbolError::Malformed(s.to_owned());
        match s.split_once('_') {
            None => {
                if s.is_empty() || !s.chars().all(char::is_alphanumeric) {
                    return Err(if s.is_empty() { SymbolError::EmptyBase } else { malformed() });
                }
                Symbol::try_new(s, None)
            }
            Some((base, sub)) => {
                if base.is_empty() || !base.chars().all(char::is_alphanumeric) {
                    return Err(malformed());
                }
                let sub = if let Some(inner) = sub.strip_prefix('{') {
                    inner.strip_suffix('}').ok_or_else(malformed)?
                } else {
                    sub
                };
                if sub.is_empty() || sub.contains(['{', '}']) {
                    return Err(malformed());
                }
                Symbol::try_new(base, Some(sub.to_owned()))
            }
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Expression tree node.
///
/// `Add` and `Mul` always hold at least two children when built through the
/// constructors. Division is `Mul(a, Pow(b, -1))`; subtraction is
/// `Add(a, Neg(b))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expression {
    Integer(BigInt),
    /// Non-integral rational constant in lowest terms.
    Rational(BigRational),
    Identifier(Symbol),
    Add(Vec<Expression>),
    Mul(Vec<Expression>),
    Pow(Box<Expression>, Box<Expression>),
    Neg(Box<Expression>),
    Sqrt(Box<Expression>),
    Derivative {
        dependent: Symbol,
        independent: Symbol,
    },
    Sum {
        index: Symbol,
        lower: Box<Expression>,
        upper: Box<Expression>,
        body: Box<Expression>,
    },
    Function {
        name: String,
        args: Vec<Expression>,
    },
}

// Smart constructors named after the node they build.
#[allow(clippy::should_implement_trait)]
impl Expression {
    pub fn int(value: i64) -> Self {
        Expression::Integer(BigInt::from(value))
    }

    pub fn ident(symbol: Symbol) -> Self {
        Expression::Identifier(symbol)
    }

    /// Shorthand for a subscript-free identifier.
    pub fn var(base: &str) -> Self {
        Expression::Identifier(Symbol::new(base))
    }

    /// Integer when the denominator is one, `Rational` otherwise.
    pub fn number(value: BigRational) -> Self {
        if value.is_integer() {
            Expression::Integer(value.to_integer())
        } else {
            Expression::Rational(value)
        }
    }

    pub fn as_number(&self) -> Option<BigRational> {
        match self {
            Expression::Integer(n) => Some(BigRational::from_integer(n.clone())),
            Expression::Rational(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Expression::Integer(_) | Expression::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expression::Integer(n) if n.is_zero())
    }

    fn is_one(&self) -> bool {
        matches!(self, Expression::Integer(n) if n.is_one())
    }

    /// Flattened n-ary sum.
    pub fn add(terms: Vec<Expression>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        for term in terms {
            match term {
                Expression::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expression::int(0),
            1 => flat.pop().expect("length checked"),
            _ => Expression::Add(flat),
        }
    }

    /// `a - b` as `Add(a, Neg(b))`.
    pub fn sub(lhs: Expression, rhs: Expression) -> Self {
        Expression::add(alloc::vec![lhs, Expression::neg(rhs)])
    }

    /// Flattened n-ary product; literal `1` factors are dropped.
    pub fn mul(factors: Vec<Expression>) -> Self {
        let mut flat = Vec::with_capacity(factors.len());
        for factor in factors {
            match factor {
                Expression::Mul(inner) => flat.extend(inner),
                f if f.is_one() => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expression::int(1),
            1 => flat.pop().expect("length checked"),
            _ => Expression::Mul(flat),
        }
    }

    /// Numeric quotients fold to a constant; everything else becomes
    /// `Mul(numerator, reciprocal(denominator))`.
    pub fn div(numerator: Expression, denominator: Expression) -> Self {
        if let (Some(n), Some(d)) = (numerator.as_number(), denominator.as_number()) {
            if !d.is_zero() {
                return Expression::number(n / d);
            }
        }
        Expression::mul(alloc::vec![numerator, Expression::reciprocal(denominator)])
    }

    /// `1 / expr`, pushing the inversion into powers and products.
    pub fn reciprocal(expr: Expression) -> Self {
        match expr {
            Expression::Integer(ref n) if !n.is_zero() => {
                Expression::number(BigRational::from_integer(n.clone()).recip())
            }
            Expression::Rational(r) => Expression::number(r.recip()),
            Expression::Pow(base, exponent) => match *exponent {
                Expression::Integer(n) if (-&n).is_one() => *base,
                Expression::Integer(n) => Expression::Pow(base, Box::new(Expression::Integer(-n))),
                Expression::Rational(r) => Expression::Pow(base, Box::new(Expression::Rational(-r))),
                other => {
                    Expression::Pow(Box::new(Expression::Pow(base, Box::new(other))), Box::new(Expression::int(-1)))
                }
            },
            Expression::Mul(factors) => Expression::mul(factors.into_iter().map(Expression::reciprocal).collect()),
            Expression::Neg(inner) => Expression::neg(Expression::reciprocal(*inner)),
            other => Expression::Pow(Box::new(other), Box::new(Expression::int(-1))),
        }
    }

    /// Power; `x^1` collapses to `x`, numeric bases with integer exponents
    /// fold, and negative integer exponents go through [`Expression::reciprocal`].
    pub fn pow(base: Expression, exponent: Expression) -> Self {
        if let Expression::Integer(n) = &exponent {
            if n.is_one() {
                return base;
            }
            if let (Some(b), Some(e)) = (base.as_number(), num_traits::ToPrimitive::to_i64(n)) {
                if e.unsigned_abs() <= 64 {
                    if let Some(folded) = pow_integer(&b, e) {
                        return Expression::number(folded);
                    }
                }
            }
            if n.is_negative() {
                let positive = Expression::pow(base, Expression::Integer(-n));
                return Expression::reciprocal(positive);
            }
        }
        Expression::Pow(Box::new(base), Box::new(exponent))
    }

    /// Negation; numeric constants fold and double negation cancels.
    pub fn neg(expr: Expression) -> Self {
        match expr {
            Expression::Integer(n) => Expression::Integer(-n),
            Expression::Rational(r) => Expression::Rational(-r),
            Expression::Neg(inner) => *inner,
            other => Expression::Neg(Box::new(other)),
        }
    }

    pub fn sqrt(expr: Expression) -> Self {
        Expression::Sqrt(Box::new(expr))
    }

    /// Identifier symbols in left-to-right first-occurrence order.
    ///
    /// A sum's index symbol is bound inside its body and is not reported
    /// for that body.
    pub fn free_identifiers(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_identifiers(&mut out, &[]);
        out
    }

    fn collect_identifiers(&self, out: &mut Vec<Symbol>, bound: &[&Symbol]) {
        let push = |symbol: &Symbol, out: &mut Vec<Symbol>| {
            if !bound.contains(&symbol) && !out.contains(symbol) {
                out.push(symbol.clone());
            }
        };
        match self {
            Expression::Integer(_) | Expression::Rational(_) => {}
            Expression::Identifier(symbol) => push(symbol, out),
            Expression::Add(children) | Expression::Mul(children) => {
                for child in children {
                    child.collect_identifiers(out, bound);
                }
            }
            Expression::Function { args, .. } => {
                for arg in args {
                    arg.collect_identifiers(out, bound);
                }
            }
            Expression::Pow(base, exponent) => {
                base.collect_identifiers(out, bound);
                exponent.collect_identifiers(out, bound);
            }
            Expression::Neg(inner) | Expression::Sqrt(inner) => inner.collect_identifiers(out, bound),
            Expression::Derivative { dependent, independent } => {
                push(dependent, out);
                push(independent, out);
            }
            Expression::Sum { index, lower, upper, body } => {
                lower.collect_identifiers(out, bound);
                upper.collect_identifiers(out, bound);
                let mut inner_bound: Vec<&Symbol> = bound.to_vec();
                inner_bound.push(index);
                body.collect_identifiers(out, &inner_bound);
            }
        }
    }

    /// Number of `Identifier` occurrences of `symbol` (derivative operands
    /// count as occurrences).
    pub fn occurrences(&self, symbol: &Symbol) -> usize {
        match self {
            Expression::Integer(_) | Expression::Rational(_) => 0,
            Expression::Identifier(s) => usize::from(s == symbol),
            Expression::Add(children) | Expression::Mul(children) => {
                children.iter().map(|c| c.occurrences(symbol)).sum()
            }
            Expression::Function { args, .. } => args.iter().map(|c| c.occurrences(symbol)).sum(),
            Expression::Pow(base, exponent) => base.occurrences(symbol) + exponent.occurrences(symbol),
            Expression::Neg(inner) | Expression::Sqrt(inner) => inner.occurrences(symbol),
            Expression::Derivative { dependent, independent } => {
                usize::from(dependent == symbol) + usize::from(independent == symbol)
            }
            Expression::Sum { index, lower, upper, body } => {
                let in_body = if index == symbol { 0 } else { body.occurrences(symbol) };
                lower.occurrences(symbol) + upper.occurrences(symbol) + in_body
            }
        }
    }

    /// True when any node satisfies `predicate`.
    pub fn any_node(&self, predicate: &dyn Fn(&Expression) -> bool) -> bool {
        if predicate(self) {
            return true;
        }
        match self {
            Expression::Add(children) | Expression::Mul(children) => children.iter().any(|c| c.any_node(predicate)),
            Expression::Function { args, .. } => args.iter().any(|c| c.any_node(predicate)),
            Expression::Pow(base, exponent) => base.any_node(predicate) || exponent.any_node(predicate),
            Expression::Neg(inner) | Expression::Sqrt(inner) => inner.any_node(predicate),
            Expression::Sum { lower, upper, body, .. } => {
                lower.any_node(predicate) || upper.any_node(predicate) || body.any_node(predicate)
            }
            _ => false,
        }
    }

    pub fn contains_derivative(&self) -> bool {
        self.any_node(&|e| matches!(e, Expression::Derivative { .. }))
    }

    /// Sums and function applications (other than square roots).
    pub fn contains_unevaluatable(&self) -> bool {
        self.any_node(&|e| matches!(e, Expression::Sum { .. } | Expression::Function { .. }))
    }

    /// Replaces identifiers found in `values` by numeric constants.
    pub fn substitute(&self, values: &dyn Fn(&Symbol) -> Option<Expression>) -> Expression {
        match self {
            Expression::Identifier(s) => values(s).unwrap_or_else(|| self.clone()),
            Expression::Add(children) => Expression::Add(children.iter().map(|c| c.substitute(values)).collect()),
            Expression::Mul(children) => Expression::Mul(children.iter().map(|c| c.substitute(values)).collect()),
            Expression::Pow(base, exponent) => {
                Expression::Pow(Box::new(base.substitute(values)), Box::new(exponent.substitute(values)))
            }
            Expression::Neg(inner) => Expression::Neg(Box::new(inner.substitute(values))),
            Expression::Sqrt(inner) => Expression::Sqrt(Box::new(inner.substitute(values))),
            Expression::Function { name, args } => {
                Expression::Function { name: name.clone(), args: args.iter().map(|c| c.substitute(values)).collect() }
            }
            other => other.clone(),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_infix(self))
    }
}

/// `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Expression,
    pub rhs: Expression,
}

impl Equation {
    pub fn new(lhs: Expression, rhs: Expression) -> Self {
        Equation { lhs, rhs }
    }

    /// The left-hand side symbol when it is a bare identifier.
    pub fn lhs_symbol(&self) -> Option<&Symbol> {
        match &self.lhs {
            Expression::Identifier(s) => Some(s),
            _ => None,
        }
    }

    /// Identifiers of both sides, left side first.
    pub fn identifiers(&self) -> Vec<Symbol> {
        let mut out = self.lhs.free_identifiers();
        for symbol in self.rhs.free_identifiers() {
            if !out.contains(&symbol) {
                out.push(symbol);
            }
        }
        out
    }

    pub fn occurrences(&self, symbol: &Symbol) -> usize {
        self.lhs.occurrences(symbol) + self.rhs.occurrences(symbol)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_equation_infix(self))
    }
}

impl From<Symbol> for Expression {
    fn from(symbol: Symbol) -> Self {
        Expression::Identifier(symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn free_identifiers_of_quotient() {
        let rhs = Expression::div(Expression::var("s"), Expression::var("t"));
        assert_eq!(rhs.free_identifiers(), vec![Symbol::new("s"), Symbol::new("t")]);
    }

    #[test]
    fn free_identifiers_of_constant() {
        assert!(Expression::int(5).free_identifiers().is_empty());
    }

    #[test]
    fn free_identifiers_of_mass_energy() {
        let rhs =
            Expression::mul(vec![Expression::var("m"), Expression::pow(Expression::var("c"), Expression::int(2))]);
        assert_eq!(rhs.free_identifiers(), vec![Symbol::new("m"), Symbol::new("c")]);
    }

    #[test]
    fn free_identifiers_first_occurrence_order() {
        let e = Expression::add(vec![
            Expression::var("b"),
            Expression::mul(vec![Expression::var("a"), Expression::var("b")]),
        ]);
        assert_eq!(e.free_identifiers(), vec![Symbol::new("b"), Symbol::new("a")]);
    }

    #[test]
    fn sum_index_is_bound() {
        let i = Symbol::new("i");
        let e = Expression::Sum {
            index: i.clone(),
            lower: Box::new(Expression::int(1)),
            upper: Box::new(Expression::var("n")),
            body: Box::new(Expression::mul(vec![Expression::var("i"), Expression::var("x")])),
        };
        assert_eq!(e.free_identifiers(), vec![Symbol::new("n"), Symbol::new("x")]);
    }

    #[test]
    fn division_normalises_to_reciprocal_power() {
        let e = Expression::div(Expression::var("s"), Expression::var("t"));
        assert_eq!(
            e,
            Expression::Mul(vec![
                Expression::var("s"),
                Expression::Pow(Box::new(Expression::var("t")), Box::new(Expression::int(-1))),
            ])
        );
        // dividing by a reciprocal multiplies
        let back = Expression::div(Expression::var("v"), Expression::reciprocal(Expression::var("t")));
        assert_eq!(back, Expression::Mul(vec![Expression::var("v"), Expression::var("t")]));
    }

    #[test]
    fn numeric_division_folds() {
        assert_eq!(
            Expression::div(Expression::int(3), Expression::int(6)),
            Expression::Rational(BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(Expression::div(Expression::int(4), Expression::int(2)), Expression::int(2));
    }

    #[test]
    fn symbol_display_and_parse() {
        let simple = Symbol::with_subscript("m", "i");
        assert_eq!(simple.to_string(), "m_i");
        let compound = Symbol::with_subscript("p", "tot,1");
        assert_eq!(compound.to_string(), "p_{tot,1}");
        assert_eq!("p_{tot,1}".parse::<Symbol>().unwrap(), compound);
        assert_eq!("m_i".parse::<Symbol>().unwrap(), simple);
        assert_eq!("alpha".parse::<Symbol>().unwrap(), Symbol::new("alpha"));
        assert!("".parse::<Symbol>().is_err());
        assert!("_x".parse::<Symbol>().is_err());
    }

    #[test]
    fn trees_are_thread_safe() {
        fn check<T: Send + Sync>() {}
        check::<Expression>();
        check::<Equation>();
    }

    #[test]
    fn symbol_equality_uses_subscript() {
        assert_ne!(Symbol::with_subscript("p", "1"), Symbol::with_subscript("p", "2"));
        assert_ne!(Symbol::new("p"), Symbol::with_subscript("p", "1"));
    }
}
