//! Exact decimal text <-> rational conversion and explicit display rounding.
//!
//! Everything in the engine is a [`BigRational`]. Decimal strings are parsed
//! without ever passing through binary floating point, and rounding happens
//! only when a value is turned back into text.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ParseNumberError;

/// Parses `"60.7"`, `"-1"`, `"1e-3"`, `"2.5E2"` or the exact form `"5/3"`.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseNumberError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseNumberError::new(text, "empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num.trim()).map_err(|e| ParseNumberError::new(text, e))?;
        let d = parse_decimal(den.trim()).map_err(|e| ParseNumberError::new(text, e))?;
        if d.is_zero() {
            return Err(ParseNumberError::new(text, "zero denominator"));
        }
        return Ok(n / d);
    }
    parse_decimal(s).map_err(|e| ParseNumberError::new(text, e))
}

fn parse_decimal(s: &str) -> Result<BigRational, &'static str> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 = s[i + 1..].parse().map_err(|_| "malformed exponent")?;
            (&s[..i], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err("no digits");
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err("invalid digit");
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| "invalid digits")?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - i32::try_from(frac_part.len()).map_err(|_| "too many digits")?;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    Ok(value)
}

/// Rounds `value * 10^places` half away from zero.
///
/// For the non-negative quantities this engine produces that is exactly
/// round-half-up.
pub fn round_half_up_scaled(value: &BigRational, places: u32) -> BigInt {
    let scaled = value * BigRational::from_integer(pow10(places));
    let half = BigRational::new(BigInt::one(), BigInt::from(2u8));
    if scaled.is_negative() {
        -((-scaled) + half).floor().to_integer()
    } else {
        (scaled + half).floor().to_integer()
    }
}

/// Floors `value * 10^places`.
pub fn floor_scaled(value: &BigRational, places: u32) -> BigInt {
    (value * BigRational::from_integer(pow10(places))).floor().to_integer()
}

pub(crate) fn pow10(places: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u8), places as usize)
}

/// Formats an integer count of `10^-places` units as a fixed-point string.
pub fn format_scaled(units: &BigInt, places: u32) -> String {
    let negative = units.is_negative();
    let digits = units.abs().to_string();
    let places = places as usize;
    let mut out = String::with_capacity(digits.len() + 3);
    if negative {
        out.push('-');
    }
    if places == 0 {
        out.push_str(&digits);
        return out;
    }
    if digits.len() <= places {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', places - digits.len()));
        out.push_str(&digits);
    } else {
        let (int, frac) = digits.split_at(digits.len() - places);
        let _ = write!(out, "{int}.{frac}");
    }
    out
}

/// Fixed-point rendering rounded half-up to `places` decimals.
pub fn to_fixed(value: &BigRational, places: u32) -> String {
    format_scaled(&round_half_up_scaled(value, places), places)
}

/// Number of decimals needed to write `value` exactly, or `None` when its
/// decimal expansion does not terminate.
pub fn terminating_places(value: &BigRational) -> Option<u32> {
    let mut den = value.denom().clone();
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    den.is_one().then_some(twos.max(fives))
}

/// Shortest exact decimal string (`"60.7"`, `"51480"`), or `None` for
/// values like 5/6 that have no finite decimal form.
pub fn to_exact_decimal(value: &BigRational) -> Option<String> {
    let places = terminating_places(value)?;
    Some(to_fixed(value, places))
}

/// `"p/q"`, or just `"p"` for integers.
pub fn to_fraction(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Exact decimal when one exists, otherwise the `p/q` form. Lossless.
pub fn to_lossless(value: &BigRational) -> String {
    to_exact_decimal(value).unwrap_or_else(|| to_fraction(value))
}

/// Exact decimal when it fits in `max_places`, otherwise rounded to
/// `max_places`.
pub fn to_readable(value: &BigRational, max_places: u32) -> String {
    match terminating_places(value) {
        Some(p) if p <= max_places => to_fixed(value, p),
        _ => to_fixed(value, max_places),
    }
}

pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}
