//! ISQ dimensions, SI unit symbols and dimensional inference.
//!
//! A [`DimensionVector`] holds one rational exponent per SI base dimension.
//! Units are compared by dimension, never by spelling, so `m/s`, `m s^-1`
//! and the ISQ string `L T^-1` are all the same quantity kind.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::iter::Peekable;
use core::str::CharIndices;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::expr::{Expression, Symbol};

/// Versioned derived-unit table; see the file header for the format.
pub const DERIVED_UNITS_TABLE: &str = include_str!("../data/derived_units.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseDimension {
    Length,
    Mass,
    Time,
    Current,
    Temperature,
    Amount,
    Luminosity,
}

impl BaseDimension {
    /// ISQ order: L, M, T, I, Θ, N, J.
    pub const ALL: [BaseDimension; 7] = [
        BaseDimension::Length,
        BaseDimension::Mass,
        BaseDimension::Time,
        BaseDimension::Current,
        BaseDimension::Temperature,
        BaseDimension::Amount,
        BaseDimension::Luminosity,
    ];

    /// Order used when rendering SI symbols: kg, m, s, A, K, mol, cd.
    pub const SI_ORDER: [BaseDimension; 7] = [
        BaseDimension::Mass,
        BaseDimension::Length,
        BaseDimension::Time,
        BaseDimension::Current,
        BaseDimension::Temperature,
        BaseDimension::Amount,
        BaseDimension::Luminosity,
    ];

    pub fn isq_letter(self) -> char {
        match self {
            BaseDimension::Length => 'L',
            BaseDimension::Mass => 'M',
            BaseDimension::Time => 'T',
            BaseDimension::Current => 'I',
            BaseDimension::Temperature => 'Θ',
            BaseDimension::Amount => 'N',
            BaseDimension::Luminosity => 'J',
        }
    }

    pub fn si_symbol(self) -> &'static str {
        match self {
            BaseDimension::Length => "m",
            BaseDimension::Mass => "kg",
            BaseDimension::Time => "s",
            BaseDimension::Current => "A",
            BaseDimension::Temperature => "K",
            BaseDimension::Amount => "mol",
            BaseDimension::Luminosity => "cd",
        }
    }

    fn from_isq_letter(c: char) -> Option<Self> {
        Some(match c {
            'L' => BaseDimension::Length,
            'M' => BaseDimension::Mass,
            'T' => BaseDimension::Time,
            'I' => BaseDimension::Current,
            'Θ' | 'ϴ' | 'θ' => BaseDimension::Temperature,
            'N' => BaseDimension::Amount,
            'J' => BaseDimension::Luminosity,
            _ => return None,
        })
    }

    fn from_si_symbol(symbol: &str) -> Option<Self> {
        BaseDimension::ALL.into_iter().find(|b| b.si_symbol() == symbol)
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DimensionError {
    #[error("unknown ISQ dimension letter `{0}`")]
    UnknownDimensionLetter(char),
    #[error("malformed exponent `{0}`")]
    MalformedExponent(String),
    #[error("non-integer exponent in `{rendered}`")]
    NonIntegerExponent { rendered: String },
    #[error("unknown unit symbol `{0}`")]
    UnknownUnitSymbol(String),
    #[error("malformed unit expression `{0}`")]
    MalformedUnitExpression(String),
    #[error("dimension mismatch in sum: {0} vs {1}")]
    DimensionMismatch(DimensionVector, DimensionVector),
    #[error("no dimension known for identifier `{0}`")]
    MissingIdentifierDimension(Symbol),
    #[error("cannot infer the dimension of {0}")]
    Uninferable(String),
}

/// Exponents over the seven SI base dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DimensionVector {
    exponents: [Rational64; 7],
}

impl Default for DimensionVector {
    fn default() -> Self {
        DimensionVector::dimensionless()
    }
}

impl DimensionVector {
    pub fn dimensionless() -> Self {
        DimensionVector { exponents: [Rational64::zero(); 7] }
    }

    pub fn base(dimension: BaseDimension) -> Self {
        DimensionVector::dimensionless().with(dimension, 1)
    }

    /// Builder-style setter with an integer exponent.
    pub fn with(mut self, dimension: BaseDimension, exponent: i64) -> Self {
        self.exponents[dimension.index()] = Rational64::from_integer(exponent);
        self
    }

    pub fn exponent(&self, dimension: BaseDimension) -> Rational64 {
        self.exponents[dimension.index()]
    }

    pub fn is_dimensionless(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.exponents.iter().all(|e| e.is_integer())
    }

    /// Dimension of a product.
    pub fn add(&self, other: &DimensionVector) -> DimensionVector {
        let mut out = *self;
        for (slot, e) in out.exponents.iter_mut().zip(other.exponents) {
            *slot += e;
        }
        out
    }

    /// Dimension of a quotient.
    pub fn sub(&self, other: &DimensionVector) -> DimensionVector {
        self.add(&other.scale(-Rational64::one()))
    }

    /// Dimension of a power.
    pub fn scale(&self, factor: Rational64) -> DimensionVector {
        let mut out = *self;
        for slot in out.exponents.iter_mut() {
            *slot *= factor;
        }
        out
    }

    /// Non-zero exponents in ISQ order.
    pub fn components(&self) -> impl Iterator<Item = (BaseDimension, Rational64)> + '_ {
        BaseDimension::ALL.into_iter().map(|b| (b, self.exponents[b.index()])).filter(|(_, e)| !e.is_zero())
    }

    /// ISQ form, e.g. `L T^-1`; `1` when dimensionless.
    pub fn to_isq_string(&self) -> String {
        let parts: Vec<String> = self.components().map(|(b, e)| factor_text(&b.isq_letter().to_string(), e)).collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_isq_string())
    }
}

impl Serialize for DimensionVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_isq_string())
    }
}

impl<'de> Deserialize<'de> for DimensionVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_isq(&text).map_err(serde::de::Error::custom)
    }
}

fn factor_text(symbol: &str, exponent: Rational64) -> String {
    if exponent.is_one() {
        symbol.to_string()
    } else if exponent.is_integer() {
        format!("{symbol}^{}", exponent.to_integer())
    } else {
        format!("{symbol}^{}/{}", exponent.numer(), exponent.denom())
    }
}

/// A unit as shown to students together with its dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitString {
    pub text: String,
    pub dimension: DimensionVector,
}

impl UnitString {
    /// Renders the SI form; rational exponents are written verbatim.
    pub fn from_dimension(dimension: DimensionVector) -> Self {
        let text = match to_si_symbols(&dimension) {
            Ok(text) => text,
            Err(DimensionError::NonIntegerExponent { rendered }) => rendered,
            Err(_) => unreachable!("to_si_symbols only fails on rational exponents"),
        };
        UnitString { text, dimension }
    }
}

impl fmt::Display for UnitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Parses an ISQ dimension string such as `L T^-1` or `M L^2 T^-2`.
///
/// Letters may be separated by whitespace, `·` or `*`; repeated letters sum
/// their exponents. Exponents use caret notation (`^-1`, `^{-1}`, `^(1/2)`)
/// or Unicode superscripts (`⁻¹`). The empty string and `1` are
/// dimensionless.
pub fn parse_isq(dim: &str) -> Result<DimensionVector, DimensionError> {
    let trimmed = dim.trim();
    let mut out = DimensionVector::dimensionless();
    if trimmed.is_empty() || trimmed == "1" {
        return Ok(out);
    }
    let mut chars = trimmed.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if c.is_whitespace() || c == '·' || c == '⋅' || c == '*' {
            continue;
        }
        let base = BaseDimension::from_isq_letter(c).ok_or(DimensionError::UnknownDimensionLetter(c))?;
        let exponent = read_exponent(trimmed, &mut chars)?.unwrap_or_else(Rational64::one);
        out.exponents[base.index()] += exponent;
    }
    Ok(out)
}

/// Reads an optional exponent following a symbol.
fn read_exponent(text: &str, chars: &mut Peekable<CharIndices<'_>>) -> Result<Option<Rational64>, DimensionError> {
    match chars.peek().copied() {
        Some((_, '^')) => {
            chars.next();
            let start = chars.peek().map(|&(i, _)| i).unwrap_or(text.len());
            let (body, closed) = match chars.peek().map(|&(_, c)| c) {
                Some(open @ ('{' | '(')) => {
                    let close = if open == '{' { '}' } else { ')' };
                    chars.next();
                    let inner_start = start + open.len_utf8();
                    let mut end = None;
                    for (i, c) in chars.by_ref() {
                        if c == close {
                            end = Some(i);
                            break;
                        }
                    }
                    let end = end.ok_or_else(|| DimensionError::MalformedExponent(text[start..].into()))?;
                    (&text[inner_start..end], true)
                }
                _ => {
                    let mut end = start;
                    let mut first = true;
                    while let Some(&(i, c)) = chars.peek() {
                        let sign = first && (c == '-' || c == '+' || c == '−');
                        if !(sign || c.is_ascii_digit()) {
                            break;
                        }
                        first = false;
                        end = i + c.len_utf8();
                        chars.next();
                    }
                    (&text[start..end], false)
                }
            };
            parse_exponent_text(body, closed).map(Some)
        }
        Some((_, c)) if superscript_value(c).is_some() => {
            let mut body = String::new();
            while let Some(&(_, c)) = chars.peek() {
                match superscript_value(c) {
                    Some(mapped) => {
                        body.push(mapped);
                        chars.next();
                    }
                    None => break,
                }
            }
            parse_exponent_text(&body, false).map(Some)
        }
        _ => Ok(None),
    }
}

fn parse_exponent_text(body: &str, allow_fraction: bool) -> Result<Rational64, DimensionError> {
    let malformed = || DimensionError::MalformedExponent(body.into());
    let normalized = body.trim().replace('−', "-");
    let (numer, denom) = match normalized.split_once('/') {
        Some((n, d)) if allow_fraction => (n.trim(), d.trim()),
        Some(_) => return Err(malformed()),
        None => (normalized.as_str(), "1"),
    };
    let numer = numer.strip_prefix('+').unwrap_or(numer);
    let numer: i64 = numer.parse().map_err(|_| malformed())?;
    let denom: i64 = denom.parse().map_err(|_| malformed())?;
    if denom == 0 {
        return Err(malformed());
    }
    Ok(Rational64::new(numer, denom))
}

fn superscript_value(c: char) -> Option<char> {
    Some(match c {
        '⁰' => '0',
        '¹' => '1',
        '²' => '2',
        '³' => '3',
        '⁴' => '4',
        '⁵' => '5',
        '⁶' => '6',
        '⁷' => '7',
        '⁸' => '8',
        '⁹' => '9',
        '⁻' => '-',
        '⁺' => '+',
        _ => return None,
    })
}

/// Renders SI base symbols in the order kg, m, s, A, K, mol, cd.
///
/// Dimensionless is `1`. Rational exponents produce
/// [`DimensionError::NonIntegerExponent`] carrying the verbatim rendering.
pub fn to_si_symbols(d: &DimensionVector) -> Result<String, DimensionError> {
    let parts: Vec<String> = BaseDimension::SI_ORDER
        .into_iter()
        .map(|b| (b, d.exponent(b)))
        .filter(|(_, e)| !e.is_zero())
        .map(|(b, e)| factor_text(b.si_symbol(), e))
        .collect();
    let rendered = if parts.is_empty() { "1".to_string() } else { parts.join(" ") };
    if d.is_integral() {
        Ok(rendered)
    } else {
        Err(DimensionError::NonIntegerExponent { rendered })
    }
}

/// Derived unit symbols from [`DERIVED_UNITS_TABLE`].
pub fn derived_units() -> Vec<(String, DimensionVector)> {
    parse_derived_table(DERIVED_UNITS_TABLE).expect("bundled derived unit table is valid")
}

/// Parses a derived-unit table in the bundled format.
pub fn parse_derived_table(text: &str) -> Result<Vec<(String, DimensionVector)>, DimensionError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("schema_version") {
            continue;
        }
        let (symbol, dimension) =
            line.split_once(char::is_whitespace).ok_or_else(|| DimensionError::MalformedUnitExpression(line.into()))?;
        out.push((symbol.to_string(), parse_isq(dimension)?));
    }
    Ok(out)
}

fn unit_symbol_dimension(symbol: &str, derived: &[(String, DimensionVector)]) -> Option<DimensionVector> {
    if let Some(base) = BaseDimension::from_si_symbol(symbol) {
        return Some(DimensionVector::base(base));
    }
    derived.iter().find(|(s, _)| s == symbol).map(|(_, d)| *d)
}

/// Parses a student-entered unit such as `m/s`, `kg m s^-2` or `J`.
///
/// Factors are separated by whitespace, `*` or `·`; `/` divides by the next
/// factor (use parentheses to divide by a product, `kg/(m s^2)`). Prefixed
/// units such as `km` are rejected.
pub fn parse_unit_answer(text: &str) -> Result<DimensionVector, DimensionError> {
    let derived = derived_units();
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(DimensionError::MalformedUnitExpression(text.into()));
    }
    let mut parser = UnitParser { text: trimmed, chars: trimmed.char_indices().peekable(), derived: &derived };
    let dimension = parser.product(false)?;
    if parser.chars.peek().is_some() {
        return Err(DimensionError::MalformedUnitExpression(text.into()));
    }
    Ok(dimension)
}

struct UnitParser<'a> {
    text: &'a str,
    chars: Peekable<CharIndices<'a>>,
    derived: &'a [(String, DimensionVector)],
}

impl UnitParser<'_> {
    fn malformed(&self) -> DimensionError {
        DimensionError::MalformedUnitExpression(self.text.into())
    }

    fn skip_separators(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() || c == '*' || c == '·' || c == '⋅' {
                self.chars.next();
            } else {
                break;
            }
        }
    }

    fn product(&mut self, nested: bool) -> Result<DimensionVector, DimensionError> {
        let mut total = DimensionVector::dimensionless();
        let mut factors = 0;
        loop {
            self.skip_separators();
            let divide = match self.chars.peek() {
                None => break,
                Some(&(_, ')')) if nested => break,
                Some(&(_, '/')) => {
                    self.chars.next();
                    self.skip_separators();
                    true
                }
                Some(_) => false,
            };
            if divide && factors == 0 {
                return Err(self.malformed());
            }
            let factor = self.factor()?;
            total = if divide { total.sub(&factor) } else { total.add(&factor) };
            factors += 1;
        }
        if factors == 0 {
            return Err(self.malformed());
        }
        Ok(total)
    }

    fn factor(&mut self) -> Result<DimensionVector, DimensionError> {
        let base = match self.chars.peek().copied() {
            Some((_, '(')) => {
                self.chars.next();
                let inner = self.product(true)?;
                match self.chars.next() {
                    Some((_, ')')) => inner,
                    _ => return Err(self.malformed()),
                }
            }
            Some((_, '1')) => {
                self.chars.next();
                DimensionVector::dimensionless()
            }
            Some((start, c)) if c.is_alphabetic() => {
                let mut end = start;
                while let Some(&(i, c)) = self.chars.peek() {
                    if !c.is_alphabetic() {
                        break;
                    }
                    end = i + c.len_utf8();
                    self.chars.next();
                }
                let symbol = &self.text[start..end];
                unit_symbol_dimension(symbol, self.derived)
                    .ok_or_else(|| DimensionError::UnknownUnitSymbol(symbol.into()))?
            }
            _ => return Err(self.malformed()),
        };
        let exponent = read_exponent(self.text, &mut self.chars).map_err(|_| self.malformed())?;
        Ok(match exponent {
            Some(e) => base.scale(e),
            None => base,
        })
    }
}

/// Dimension of `rhs` given the dimensions of its identifiers.
///
/// Products add exponent vectors, constant powers scale them, and every
/// term of a sum must agree.
pub fn infer_lhs_dimension(
    rhs_dims: &BTreeMap<Symbol, DimensionVector>,
    rhs: &Expression,
) -> Result<DimensionVector, DimensionError> {
    match rhs {
        Expression::Integer(_) | Expression::Rational(_) => Ok(DimensionVector::dimensionless()),
        Expression::Identifier(symbol) => {
            rhs_dims.get(symbol).copied().ok_or_else(|| DimensionError::MissingIdentifierDimension(symbol.clone()))
        }
        Expression::Mul(factors) => {
            let mut total = DimensionVector::dimensionless();
            for factor in factors {
                total = total.add(&infer_lhs_dimension(rhs_dims, factor)?);
            }
            Ok(total)
        }
        Expression::Add(terms) => {
            let mut dims = terms.iter().map(|t| infer_lhs_dimension(rhs_dims, t));
            let first = dims.next().expect("sums have children")?;
            for dim in dims {
                let dim = dim?;
                if dim != first {
                    return Err(DimensionError::DimensionMismatch(first, dim));
                }
            }
            Ok(first)
        }
        Expression::Neg(inner) => infer_lhs_dimension(rhs_dims, inner),
        Expression::Sqrt(inner) => Ok(infer_lhs_dimension(rhs_dims, inner)?.scale(Rational64::new(1, 2))),
        Expression::Pow(base, exponent) => {
            let base_dim = infer_lhs_dimension(rhs_dims, base)?;
            match exponent.as_number() {
                Some(e) => {
                    let factor = to_rational64(&e).ok_or_else(|| DimensionError::Uninferable(rhs.to_string()))?;
                    Ok(base_dim.scale(factor))
                }
                None if base_dim.is_dimensionless() && infer_lhs_dimension(rhs_dims, exponent)?.is_dimensionless() => {
                    Ok(base_dim)
                }
                None => Err(DimensionError::Uninferable(rhs.to_string())),
            }
        }
        Expression::Derivative { dependent, independent } => {
            let lookup = |s: &Symbol| {
                rhs_dims.get(s).copied().ok_or_else(|| DimensionError::MissingIdentifierDimension(s.clone()))
            };
            Ok(lookup(dependent)?.sub(&lookup(independent)?))
        }
        Expression::Sum { body, .. } => infer_lhs_dimension(rhs_dims, body),
        Expression::Function { args, .. } => {
            for arg in args {
                if !infer_lhs_dimension(rhs_dims, arg)?.is_dimensionless() {
                    return Err(DimensionError::Uninferable(rhs.to_string()));
                }
            }
            Ok(DimensionVector::dimensionless())
        }
    }
}

fn to_rational64(value: &num_rational::BigRational) -> Option<Rational64> {
    use num_traits::ToPrimitive;
    let numer = value.numer().to_i64()?;
    let denom = value.denom().to_i64()?;
    let r = Rational64::new(numer, denom);
    (!r.denom().is_negative()).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BaseDimension::*;

    fn velocity() -> DimensionVector {
        DimensionVector::base(Length).with(Time, -1)
    }

    fn energy() -> DimensionVector {
        DimensionVector::base(Mass).with(Length, 2).with(Time, -2)
    }

    #[test]
    fn isq_speed() {
        assert_eq!(parse_isq("L T^-1").unwrap(), velocity());
    }

    #[test]
    fn isq_dimensionless() {
        assert!(parse_isq("").unwrap().is_dimensionless());
        assert!(parse_isq("1").unwrap().is_dimensionless());
    }

    #[test]
    fn isq_energy() {
        assert_eq!(parse_isq("M L^2 T^-2").unwrap(), energy());
    }

    #[test]
    fn isq_variants() {
        assert_eq!(parse_isq("L T⁻¹").unwrap(), velocity());
        assert_eq!(parse_isq("LT^{-1}").unwrap(), velocity());
        assert_eq!(parse_isq("L L T^-1 L^-1").unwrap(), velocity());
        assert_eq!(parse_isq("Θ").unwrap(), DimensionVector::base(Temperature));
        assert_eq!(parse_isq("L^(1/2)").unwrap().exponent(Length), Rational64::new(1, 2));
    }

    #[test]
    fn isq_errors() {
        assert_eq!(parse_isq("L X"), Err(DimensionError::UnknownDimensionLetter('X')));
        assert!(matches!(parse_isq("L^"), Err(DimensionError::MalformedExponent(_))));
        assert!(matches!(parse_isq("L^x"), Err(DimensionError::MalformedExponent(_))));
        assert!(matches!(parse_isq("T^{-1"), Err(DimensionError::MalformedExponent(_))));
    }

    #[test]
    fn si_rendering() {
        assert_eq!(to_si_symbols(&velocity()).unwrap(), "m s^-1");
        assert_eq!(to_si_symbols(&DimensionVector::dimensionless()).unwrap(), "1");
        assert_eq!(to_si_symbols(&energy()).unwrap(), "kg m^2 s^-2");
        let half = DimensionVector::base(Length).scale(Rational64::new(1, 2));
        assert_eq!(to_si_symbols(&half), Err(DimensionError::NonIntegerExponent { rendered: "m^1/2".into() }));
    }

    #[test]
    fn unit_answers() {
        assert_eq!(parse_unit_answer("m s^-1").unwrap(), velocity());
        assert_eq!(parse_unit_answer("m/s").unwrap(), velocity());
        assert_eq!(parse_unit_answer("J").unwrap(), energy());
        assert_eq!(parse_unit_answer("N m").unwrap(), energy());
        assert_eq!(parse_unit_answer("kg*m^2/s^2").unwrap(), energy());
        assert_eq!(parse_unit_answer("kg/(m s^2)").unwrap(), parse_unit_answer("Pa").unwrap());
        assert_eq!(parse_unit_answer("1/s").unwrap(), parse_unit_answer("Hz").unwrap());
        assert!(parse_unit_answer("1").unwrap().is_dimensionless());
    }

    #[test]
    fn unit_answer_errors() {
        assert_eq!(parse_unit_answer("km"), Err(DimensionError::UnknownUnitSymbol("km".into())));
        assert_eq!(parse_unit_answer("M"), Err(DimensionError::UnknownUnitSymbol("M".into())));
        assert!(matches!(parse_unit_answer(""), Err(DimensionError::MalformedUnitExpression(_))));
        assert!(matches!(parse_unit_answer("/s"), Err(DimensionError::MalformedUnitExpression(_))));
        assert!(matches!(parse_unit_answer("m^"), Err(DimensionError::MalformedUnitExpression(_))));
        assert!(matches!(parse_unit_answer("(m"), Err(DimensionError::MalformedUnitExpression(_))));
        assert!(matches!(parse_unit_answer("m)"), Err(DimensionError::MalformedUnitExpression(_))));
    }

    #[test]
    fn derived_table_loads() {
        let table = derived_units();
        let symbols: Vec<&str> = table.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(symbols, ["N", "J", "W", "Pa", "Hz", "C", "V"]);
    }

    fn dims(pairs: &[(&str, DimensionVector)]) -> BTreeMap<Symbol, DimensionVector> {
        pairs.iter().map(|(s, d)| (Symbol::new(*s), *d)).collect()
    }

    #[test]
    fn infer_speed() {
        let rhs = Expression::div(Expression::var("s"), Expression::var("t"));
        let table = dims(&[("s", DimensionVector::base(Length)), ("t", DimensionVector::base(Time))]);
        assert_eq!(infer_lhs_dimension(&table, &rhs).unwrap(), velocity());
    }

    #[test]
    fn infer_identity() {
        let table = dims(&[("x", energy())]);
        assert_eq!(infer_lhs_dimension(&table, &Expression::var("x")).unwrap(), energy());
    }

    #[test]
    fn infer_mass_energy() {
        let rhs = Expression::mul(alloc::vec![
            Expression::var("m"),
            Expression::pow(Expression::var("c"), Expression::int(2)),
        ]);
        let table = dims(&[("m", DimensionVector::base(Mass)), ("c", velocity())]);
        assert_eq!(infer_lhs_dimension(&table, &rhs).unwrap(), energy());
    }

    #[test]
    fn infer_errors() {
        let rhs = Expression::add(alloc::vec![Expression::var("a"), Expression::var("b")]);
        let table = dims(&[("a", DimensionVector::base(Length)), ("b", DimensionVector::base(Time))]);
        assert!(matches!(infer_lhs_dimension(&table, &rhs), Err(DimensionError::DimensionMismatch(..))));
        assert_eq!(
            infer_lhs_dimension(&table, &Expression::var("z")),
            Err(DimensionError::MissingIdentifierDimension(Symbol::new("z")))
        );
    }

    #[test]
    fn infer_sqrt_halves() {
        let table = dims(&[("x", DimensionVector::base(Length).with(Time, -2)), ("y", DimensionVector::base(Length))]);
        let rhs = Expression::sqrt(Expression::mul(alloc::vec![Expression::var("x"), Expression::var("y")]));
        assert_eq!(infer_lhs_dimension(&table, &rhs).unwrap(), velocity());
    }
}
