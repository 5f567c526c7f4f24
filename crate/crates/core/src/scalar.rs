//! Scalar abstraction shared by the exact and floating evaluation paths.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{NumAssign, ToPrimitive, Zero};

/// A field element usable by the symmetric-function engine.
///
/// `EXACT` selects the elimination strategy for determinants: exact types use
/// fraction-free elimination, floating types use partial pivoting driven by
/// [`Scalar::magnitude`].
pub trait Scalar:
    NumAssign + Neg<Output = Self> + Clone + Debug + PartialEq + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_i64(value: i64) -> Self;

    /// Size used for pivot selection and tolerance checks.
    fn magnitude(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_i64(value: i64) -> Self {
        value as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn from_i64(value: i64) -> Self {
        value as f32
    }
    fn magnitude(&self) -> f64 {
        f64::from(self.abs())
    }
}

impl Scalar for Complex<f64> {
    const EXACT: bool = false;
    fn from_i64(value: i64) -> Self {
        Complex::new(value as f64, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for Complex<f32> {
    const EXACT: bool = false;
    fn from_i64(value: i64) -> Self {
        Complex::new(value as f32, 0.0)
    }
    fn magnitude(&self) -> f64 {
        f64::from(self.norm())
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY).max(f64::MIN_POSITIVE)
        }
    }
}

/// Converts an exact rational into a complex double.
pub fn rational_to_c64(value: &BigRational) -> Complex<f64> {
    Complex::new(value.to_f64().unwrap_or(f64::NAN), 0.0)
}

/// Formats a rational as `"num/den"`.
pub fn format_rational(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den.is_zero() {
                None
            } else {
                Some(BigRational::new(num, den))
            }
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_round_trip() {
        let r = BigRational::new(BigInt::from(-6), BigInt::from(4));
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(parse_rational("-3/2"), Some(r));
        assert_eq!(parse_rational("7"), Some(<BigRational as Scalar>::from_i64(7)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn exactness_flags() {
        assert!(<BigRational as Scalar>::EXACT);
        assert!(!<f64 as Scalar>::EXACT);
        assert!(!<Complex<f32> as Scalar>::EXACT);
    }
}
