//! Scalar types shared by the exact and floating-point code paths.

use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Exact rational number used by every algebraic operation.
pub type Rational = BigRational;

/// Entrywise tolerance for structural predicates on floating-point matrices.
pub const FLOAT_TOL: f64 = 1e-12;

/// Field elements the game algebra is generic over.
///
/// Rational values compare exactly; floating-point values compare within the
/// supplied tolerance.
pub trait Scalar: Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync {
    fn to_f64(&self) -> f64;

    /// Whether the value is zero, exactly for rationals and within `tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_exact() -> bool;
}

impl Scalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator or denominator too large for a direct conversion
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        true
    }
}

/// Shorthand for the rational `num / den`.
///
/// Panics if `den` is zero.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn rat_vec(values: &[(i64, i64)]) -> Vec<Rational> {
    values.iter().map(|&(n, d)| rat(n, d)).collect()
}

/// Exact conversion of a finite float to a rational.
pub fn rational_from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses an integer (`-3`), fraction (`-9/8`) or decimal (`0.25`, `-1.5e-2`)
/// literal into an exact rational. A leading Unicode minus sign is accepted.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let trimmed = text.trim();
    let normalized = trimmed.replace('\u{2212}', "-");
    let s = normalized.as_str();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e = s[pos + 1..].parse::<i32>().map_err(|_| err())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Formats a rational as `p/q`, or `p` when integral.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
