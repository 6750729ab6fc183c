//! Exact rational values with an "approximate" marker for irrational roots.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

/// Decimal digits kept when an irrational root has to be approximated.
pub const ROOT_PRECISION_DIGITS: u32 = 40;

/// A rational value, flagged when it stands in for an irrational result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Number {
    pub value: BigRational,
    pub approximate: bool,
}

impl Number {
    pub fn exact(value: BigRational) -> Self {
        Number { value, approximate: false }
    }

    pub fn from_integer(n: i64) -> Self {
        Number::exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn add(&self, other: &Number) -> Number {
        Number { value: &self.value + &other.value, approximate: self.approximate || other.approximate }
    }

    pub fn mul(&self, other: &Number) -> Number {
        Number { value: &self.value * &other.value, approximate: self.approximate || other.approximate }
    }

    pub fn neg(&self) -> Number {
        Number { value: -&self.value, approximate: self.approximate }
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.value.to_f64()
    }

    /// Six significant figures, the form shown to students.
    pub fn to_display_string(&self) -> String {
        format_decimal(&self.value, 6)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string())
    }
}

/// Raises `base` to an integer power. `None` on `0^negative`.
pub fn pow_integer(base: &BigRational, exponent: i64) -> Option<BigRational> {
    if exponent < 0 && base.is_zero() {
        return None;
    }
    let magnitude = exponent.unsigned_abs();
    let numer = Pow::pow(base.numer(), magnitude);
    let denom = Pow::pow(base.denom(), magnitude);
    let raised = BigRational::new(numer, denom);
    Some(if exponent < 0 { raised.recip() } else { raised })
}

/// Principal `degree`-th root of a non-negative rational.
///
/// Exact when numerator and denominator are perfect powers; otherwise an
/// approximation truncated to [`ROOT_PRECISION_DIGITS`] decimals, flagged
/// as approximate. Negative radicands with an even degree yield `None`.
pub fn nth_root(value: &BigRational, degree: u32) -> Option<Number> {
    debug_assert!(degree >= 1);
    if degree == 1 {
        return Some(Number::exact(value.clone()));
    }
    if value.is_negative() {
        if degree.is_multiple_of(2) {
            return None;
        }
        return nth_root(&-value, degree).map(|n| n.neg());
    }
    let numer = value.numer().magnitude();
    let denom = value.denom().magnitude();
    let numer_root = numer.nth_root(degree);
    let denom_root = denom.nth_root(degree);
    if Pow::pow(&numer_root, degree) == *numer && Pow::pow(&denom_root, degree) == *denom {
        return Some(Number::exact(BigRational::new(
            BigInt::from_biguint(Sign::Plus, numer_root),
            BigInt::from_biguint(Sign::Plus, denom_root),
        )));
    }
    // root(n / d) = root(n * d^(k-1)) / d, scaled by 10^digits for precision.
    let scale = Pow::pow(BigUint::from(10u32), ROOT_PRECISION_DIGITS);
    let radicand = numer * Pow::pow(denom, degree - 1) * Pow::pow(&scale, degree);
    let root = radicand.nth_root(degree);
    Some(Number {
        value: BigRational::new(
            BigInt::from_biguint(Sign::Plus, root),
            BigInt::from_biguint(Sign::Plus, denom * scale),
        ),
        approximate: true,
    })
}

/// Rounds to roughly `digits` significant decimal digits. Keeps approximate
/// values from growing without bound through nested arithmetic.
pub(crate) fn round_significant(value: &BigRational, digits: u32) -> BigRational {
    if value.is_zero() {
        return value.clone();
    }
    // bit lengths give log10 within one digit, which is all we need here
    let bits = value.numer().bits() as i64 - value.denom().bits() as i64;
    let shift = digits as i64 - bits * 30103 / 100_000;
    let ten = BigInt::from(10);
    let scale = Pow::pow(&ten, shift.unsigned_abs());
    if shift >= 0 {
        BigRational::new((value * &scale).round().to_integer(), scale)
    } else {
        BigRational::from_integer((value / &scale).round().to_integer() * scale)
    }
}

/// Formats a rational with `significant` significant figures.
///
/// Uses plain decimal notation for magnitudes in `[1e-4, 1e15)` and
/// `<mantissa>e<exp>` outside of it. Trailing zeros are trimmed.
pub fn format_decimal(value: &BigRational, significant: u32) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let significant = significant.max(1);
    let negative = value.is_negative();
    let magnitude = value.abs();
    let ten = BigInt::from(10);

    let mut exponent = decimal_exponent(&magnitude);
    let mut digits = round_scaled(&magnitude, significant as i64 - 1 - exponent);
    if digits >= Pow::pow(&ten, significant) {
        exponent += 1;
        digits = round_scaled(&magnitude, significant as i64 - 1 - exponent);
    }
    let mut text = digits.to_string();
    while text.len() < significant as usize {
        text.insert(0, '0');
    }

    let body = if (-4..15).contains(&exponent) {
        plain_decimal(&text, exponent)
    } else {
        let (head, tail) = text.split_at(1);
        let tail = tail.trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}e{exponent}")
        } else {
            format!("{head}.{tail}e{exponent}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// floor(log10(x)) for positive `x`.
fn decimal_exponent(x: &BigRational) -> i64 {
    let numer_digits = x.numer().to_string().len() as i64;
    let denom_digits = x.denom().to_string().len() as i64;
    let mut estimate = numer_digits - denom_digits;
    // The estimate is off by at most one in either direction.
    loop {
        let lower = pow10(estimate);
        if *x < lower {
            estimate -= 1;
            continue;
        }
        if *x >= pow10(estimate + 1) {
            estimate += 1;
            continue;
        }
        return estimate;
    }
}

fn pow10(exponent: i64) -> BigRational {
    let ten = BigRational::from_integer(BigInt::from(10));
    pow_integer(&ten, exponent).expect("ten is non-zero")
}

/// round(x * 10^shift), half away from zero, for positive `x`.
fn round_scaled(x: &BigRational, shift: i64) -> BigInt {
    let scaled = x * pow10(shift);
    let (quotient, remainder) = scaled.numer().div_rem(scaled.denom());
    if remainder.clone() * 2 >= *scaled.denom() {
        quotient + BigInt::one()
    } else {
        quotient
    }
}

fn plain_decimal(digits: &str, exponent: i64) -> String {
    let point = exponent + 1;
    let mut out = if point <= 0 {
        let mut s = String::from("0.");
        for _ in 0..(-point) {
            s.push('0');
        }
        s.push_str(digits);
        s
    } else if point as usize >= digits.len() {
        let mut s = String::from(digits);
        for _ in 0..(point as usize - digits.len()) {
            s.push('0');
        }
        s
    } else {
        let (int_part, frac_part) = digits.split_at(point as usize);
        format!("{int_part}.{frac_part}")
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}
