//! Exact rational scalars.
//!
//! Every time, cost and ratio in this crate is a [`Rational`]: an
//! arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. Terms such as `(1 + beta)^n` grow quickly and have to compare
//! exactly, so nothing in the core computations goes through floating point.
//!
//! The textual form is `"p"` or `"p/q"` with decimal digits only. Decimal
//! points and exponents are rejected.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use num_rational::BigRational as Rational;

/// Error returned by [`parse_rational`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}: expected \"p\" or \"p/q\" with decimal digits")]
    Syntax(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds `p/q`, reduced to lowest terms.
///
/// Panics if `q == 0`.
pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `base^exp` for a non-negative integer exponent.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    let mut sq = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `"p"`, `"-p"`, `"p/q"` or `"-p/q"`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    if !is_digits(num) || !den.map_or(true, is_digits) {
        return Err(ParseRationalError::Syntax(text.to_string()));
    }
    let mut numer: BigInt = num.parse().expect("digits");
    if negative {
        numer = -numer;
    }
    let denom: BigInt = match den {
        Some(d) => d.parse().expect("digits"),
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical `"p"` / `"p/q"` rendering. Inverse of [`parse_rational`].
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Wrapper that displays a rational in its canonical form.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

/// Divides and rounds to the nearest integer, ties to even.
fn div_round_half_even(numer: &BigInt, denom: &BigInt) -> BigInt {
    debug_assert!(denom.is_positive());
    let (q, r) = numer.div_mod_floor(denom);
    let twice: BigInt = &r * 2u32;
    match twice.cmp(denom) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// Renders `value` as a plain decimal with `digits` significant digits,
/// rounding half to even. Zero renders as `"0"`.
pub fn to_decimal(value: &Rational, digits: u32) -> String {
    assert!(digits > 0, "need at least one significant digit");
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let abs = value.abs();
    let ten = BigInt::from(10);

    // exponent = floor(log10(abs)), found by comparing against powers of ten.
    let mut exponent: i64 = abs.numer().to_string().len() as i64 - abs.denom().to_string().len() as i64;
    let scaled_at = |e: i64| -> Rational {
        if e >= 0 {
            &abs / Rational::from_integer(ten.pow(e as u32))
        } else {
            &abs * Rational::from_integer(ten.pow((-e) as u32))
        }
    };
    loop {
        let s = scaled_at(exponent);
        if s < Rational::one() {
            exponent -= 1;
        } else if s >= Rational::from_integer(ten.clone()) {
            exponent += 1;
        } else {
            break;
        }
    }

    // mantissa = round(abs * 10^(digits-1-exponent))
    let shift = digits as i64 - 1 - exponent;
    let scaled = if shift >= 0 {
        &abs * Rational::from_integer(ten.pow(shift as u32))
    } else {
        &abs / Rational::from_integer(ten.pow((-shift) as u32))
    };
    let mut mantissa = div_round_half_even(scaled.numer(), scaled.denom());
    let mut shift = shift;
    if mantissa.to_string().len() as u32 > digits {
        // Rounding carried into a new digit (e.g. 9.9999999999 -> 10.00000000).
        mantissa = div_round_half_even(&mantissa, &ten);
        shift -= 1;
    }

    let digits_str = mantissa.to_string();
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{digits_str}{zeros}")
    } else {
        let shift = shift as usize;
        if digits_str.len() > shift {
            let split = digits_str.len() - shift;
            format!("{}.{}", &digits_str[..split], &digits_str[split..])
        } else {
            format!("0.{}{}", "0".repeat(shift - digits_str.len()), digits_str)
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Sign-aware check used by validation code.
pub(crate) fn is_negative(value: &Rational) -> bool {
    value.numer().sign() == Sign::Minus
}
