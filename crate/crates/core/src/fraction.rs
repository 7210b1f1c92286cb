//! Exact fraction strings and conversions between floats and [`Rational`].
//!
//! Fractions are written as `"num/den"` (or a bare integer) and parsed back
//! losslessly. Decimal literals such as `"1e-3"` or `"0.124"` parse to the
//! rational they denote, not to the nearest binary float.

use rug::{Integer, Rational};

use crate::{Error, Result};

/// Formats a rational in lowest terms, `"3/4"` or `"-2"`.
pub fn format(value: &Rational) -> String {
    value.to_string()
}

/// Parses `"num/den"`, a bare integer, or a decimal literal with optional exponent.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let err = || Error::ParseFraction(text.to_string());
    if text.contains('/') {
        let value: Rational = text.parse().map_err(|_| err())?;
        return Ok(value);
    }
    parse_decimal(text).ok_or_else(err)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: Integer = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten_pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    Some(if scale >= 0 {
        Rational::from(numer * ten_pow)
    } else {
        Rational::from((numer, ten_pow))
    })
}

/// The rational denoted by the shortest decimal representation of `x`.
///
/// `0.1_f64` maps to exactly `1/10`, so quantities such as `⌊k²/ε²⌋` come out
/// as a person would compute them by hand.
pub fn from_f64_decimal(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x:e}"))
}

/// The exact binary value of `x`.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}

/// Nearest `f64`, ties to even. `Rational::to_f64` truncates toward zero.
pub fn to_f64(value: &Rational) -> f64 {
    let toward_zero = value.to_f64();
    if !toward_zero.is_finite() {
        return toward_zero;
    }
    let away = if value.is_negative() { toward_zero.next_down() } else { toward_zero.next_up() };
    let (Some(a), Some(b)) = (Rational::from_f64(toward_zero), Rational::from_f64(away)) else {
        return toward_zero;
    };
    let da = Rational::from(value - &a).abs();
    let db = Rational::from(value - &b).abs();
    match da.cmp(&db) {
        std::cmp::Ordering::Less => toward_zero,
        std::cmp::Ordering::Greater => away,
        std::cmp::Ordering::Equal if toward_zero.to_bits() % 2 == 0 => toward_zero,
        std::cmp::Ordering::Equal => away,
    }
}

/// Serde adapter for a single [`Rational`] as a fraction string.
pub mod serde_rational {
    use rug::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as a list of fraction strings.
pub mod serde_rational_vec {
    use rug::Rational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&super::format(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| super::parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse("3/4").unwrap(), Rational::from((3, 4)));
        assert_eq!(parse("6/8").unwrap(), Rational::from((3, 4)));
        assert_eq!(parse("-2").unwrap(), Rational::from(-2));
        assert_eq!(parse("0.124").unwrap(), Rational::from((124, 1000)));
        assert_eq!(parse("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse("2.5E2").unwrap(), Rational::from(250));
        assert_eq!(parse(".5").unwrap(), Rational::from((1, 2)));
        assert!(parse("abc").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn decimal_view_of_floats() {
        assert_eq!(from_f64_decimal(0.1).unwrap(), Rational::from((1, 10)));
        assert_eq!(from_f64_decimal(1e-7).unwrap(), Rational::from((1, 10_000_000)));
        assert_ne!(from_f64_exact(0.1).unwrap(), Rational::from((1, 10)));
        assert!(from_f64_decimal(f64::NAN).is_none());
    }

    #[test]
    fn to_f64_rounds_to_nearest() {
        assert_eq!(to_f64(&Rational::from((1, 10))), 0.1);
        assert_eq!(to_f64(&Rational::from((-1, 10))), -0.1);
        assert_eq!(to_f64(&Rational::from((2, 3))), 2.0 / 3.0);
        assert_eq!(to_f64(&Rational::from(5)), 5.0);
        assert_eq!(to_f64(&Rational::new()), 0.0);
    }

    #[test]
    fn format_round_trips() {
        for text in ["1/3", "-7/2", "5", "0"] {
            assert_eq!(format(&parse(text).unwrap()), text);
        }
    }
}
