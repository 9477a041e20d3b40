//! Exact probability values: parsing, printing and float views.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), k as usize)
}

/// Parses `p/q`, an integer, or a decimal with optional exponent.
pub fn parse_number(text: &str) -> Option<BigRational> {
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_integer(num)?;
        let den = parse_integer(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let shift = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    if shift.unsigned_abs() > 4000 {
        return None;
    }
    let scale = BigRational::from_integer(pow10(shift.unsigned_abs()));
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(if negative { -value } else { value })
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Number of decimal places needed for an exact expansion, if finite.
fn decimal_places(den: &BigInt) -> Option<u32> {
    let mut d = den.clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0u32, 0u32);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    d.is_one().then_some(twos.max(fives))
}

/// Canonical text form: exact decimal when one exists, else `p/q`.
pub fn format_number(r: &BigRational) -> String {
    match decimal_places(r.denom()) {
        Some(0) => r.numer().to_string(),
        Some(k) => {
            let scaled = r.numer() * pow10(k) / r.denom();
            let digits = scaled.abs().to_string();
            let k = k as usize;
            let padded = if digits.len() <= k {
                format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
            } else {
                digits
            };
            let (int_part, frac_part) = padded.split_at(padded.len() - k);
            let sign = if r.is_negative() { "-" } else { "" };
            format!("{sign}{int_part}.{frac_part}")
        }
        None => format!("{}/{}", r.numer(), r.denom()),
    }
}

/// Float view; decimal-representable values go through the correctly
/// rounded decimal parser so `to_f64(from_f64(x)) == x`.
pub fn to_f64(r: &BigRational) -> f64 {
    if decimal_places(r.denom()).is_some() {
        format_number(r).parse().expect("decimal text")
    } else {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact rational equal to the shortest decimal that round-trips `x`.
pub fn from_f64(x: f64) -> BigRational {
    assert!(x.is_finite(), "non-finite probability");
    parse_number(&format!("{x:e}")).expect("formatted float parses")
}

/// Nearest multiple of `10^-digits` (ties away from zero).
pub fn round_to_grid(r: &BigRational, digits: u32) -> BigRational {
    let scale = BigRational::from_integer(pow10(digits));
    let scaled = r * &scale;
    scaled.round() / scale
}
