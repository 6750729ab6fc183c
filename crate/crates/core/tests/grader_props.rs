//! Property tests for grading: the closed tolerance band, fraction/decimal
//! equivalence and independence of the value and unit verdicts.

use num_bigint::BigInt;
use num_rational::BigRational;
use physquiz_core::dimension::{parse_isq, DimensionVector};
use physquiz_core::grader::{grade, parse_value};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact decimal string of `n / (2^a 5^b)`, built digit by digit.
fn terminating_decimal(n: i64, twos: u32, fives: u32) -> (BigRational, String) {
    let k = twos.max(fives);
    // n / (2^a 5^b) = n * 2^(k-a) * 5^(k-b) / 10^k
    let scaled = BigInt::from(n) * BigInt::from(2).pow(k - twos) * BigInt::from(5).pow(k - fives);
    let negative = scaled < BigInt::from(0);
    let digits = if negative { (-&scaled).to_string() } else { scaled.to_string() };
    let digits = format!("{digits:0>width$}", width = k as usize + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - k as usize);
    let text = format!("{}{}{}{}", if negative { "-" } else { "" }, int_part, if k > 0 { "." } else { "" }, frac_part);
    let value = BigRational::new(BigInt::from(n), BigInt::from(2).pow(twos) * BigInt::from(5).pow(fives));
    (value, text)
}

fn solution_units() -> Vec<DimensionVector> {
    ["L", "M", "T", "L T^-1", "M L T^-2", "M L^2 T^-2", ""].iter().map(|s| parse_isq(s).unwrap()).collect()
}

fn as_fraction(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn band_is_closed_and_symmetric(
        sn in 1i64..100_000, sd in 1i64..1000,
        tn in 0i64..50, td in 1i64..1000,
        nudge in 1i64..1_000_000,
    ) {
        let s = r(sn, sd);
        let tau = r(tn, td);
        let unit = parse_isq("L").unwrap();
        let low = &s * (r(1, 1) - &tau);
        let high = &s * (r(1, 1) + &tau);
        let epsilon = r(1, 1_000_000_000) / r(nudge, 1);
        prop_assert!(grade(&as_fraction(&low), "m", &s, &unit, &tau).value_correct);
        prop_assert!(grade(&as_fraction(&high), "m", &s, &unit, &tau).value_correct);
        prop_assert!(!grade(&as_fraction(&(&low - &epsilon)), "m", &s, &unit, &tau).value_correct);
        prop_assert!(!grade(&as_fraction(&(&high + &epsilon)), "m", &s, &unit, &tau).value_correct);
        // the same band mirrored for negative solutions
        let neg = -&s;
        prop_assert!(grade(&as_fraction(&-&high), "m", &neg, &unit, &tau).value_correct);
        prop_assert!(!grade(&as_fraction(&-(&high + &epsilon)), "m", &neg, &unit, &tau).value_correct);
    }

    #[test]
    fn fraction_and_decimal_agree(
        n in -100_000i64..100_000, twos in 0u32..6, fives in 0u32..6,
        sn in -1000i64..1000,
    ) {
        let (value, decimal) = terminating_decimal(n, twos, fives);
        prop_assert_eq!(parse_value(&decimal).unwrap(), value.clone(), "{}", decimal);
        let fraction = as_fraction(&value);
        let s = r(sn, 8);
        let unit = parse_isq("L").unwrap();
        let a = grade(&fraction, "m", &s, &unit, &r(1, 100));
        let b = grade(&decimal, "m", &s, &unit, &r(1, 100));
        prop_assert_eq!(a.value_correct, b.value_correct);
        prop_assert_eq!(a.relative_error, b.relative_error);
    }

    #[test]
    fn verdicts_are_independent(
        value in prop::sample::select(vec!["60", "60.5", "59", "0", "abc", "121/2", "6e1", ""]),
        unit_a in prop::sample::select(vec!["m", "s", "kg", "N", "J", "m/s", "M", "", "?"]),
        unit_b in prop::sample::select(vec!["m", "s", "kg", "N", "J", "m/s", "M", "", "?"]),
        value_b in prop::sample::select(vec!["60", "60.5", "59", "0", "abc", "121/2", "6e1", ""]),
        which in 0usize..7,
    ) {
        let solution_unit = &solution_units()[which];
        let s = r(60, 1);
        let tau = r(1, 100);
        let base = grade(value, unit_a, &s, solution_unit, &tau);
        // changing only the unit keeps the value verdict
        prop_assert_eq!(grade(value, unit_b, &s, solution_unit, &tau).value_correct, base.value_correct);
        // changing only the value keeps the unit verdict
        prop_assert_eq!(grade(value_b, unit_a, &s, solution_unit, &tau).unit_correct, base.unit_correct);
    }
}

#[test]
fn decimal_helper_matches_known_strings() {
    assert_eq!(terminating_decimal(5, 1, 0).1, "2.5");
    assert_eq!(terminating_decimal(-3, 0, 2).1, "-0.12");
    assert_eq!(terminating_decimal(7, 0, 0).1, "7");
    assert_eq!(terminating_decimal(1, 3, 1).1, "0.025");
}
