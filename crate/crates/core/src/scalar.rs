//! Numeric backends.
//!
//! Every lattice computation is generic over [`Scalar`], which is implemented
//! for `f64` (tolerance-based comparisons) and [`Exact`] (arbitrary precision
//! rationals, where every comparison is decidable).

use std::fmt::{Debug, Display};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Exact rational arithmetic.
pub type Exact = BigRational;

/// Default comparison tolerance for float mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Residual threshold for deciding span membership in float mode.
pub const SPAN_TOLERANCE: f64 = 1e-9;

/// Environment variable that overrides [`DEFAULT_TOLERANCE`].
pub const TOLERANCE_ENV: &str = "SPAN_LATTICE_TOLERANCE";

/// The global comparison tolerance, read once from `SPAN_LATTICE_TOLERANCE`.
pub fn tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var(TOLERANCE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t >= 0.0)
            .unwrap_or(DEFAULT_TOLERANCE)
    })
}

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// `true` when equality is decided exactly.
    const EXACT: bool;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// `|self| <= tolerance()` in float mode, `self == 0` in exact mode.
    fn is_negligible(&self) -> bool;

    /// Like [`Scalar::is_negligible`] with the tolerance scaled by `1 + |scale|`.
    fn is_negligible_rel(&self, scale: &Self, tol: f64) -> bool;

    /// Parses decimal (`"0.25"`) or fraction (`"1/4"`) notation.
    fn parse_literal(s: &str) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn pos_part(&self) -> Self {
        if self.is_positive() {
            self.clone()
        } else {
            Self::zero()
        }
    }

    fn floor_value(&self) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= tolerance()
    }

    fn is_negligible_rel(&self, scale: &Self, tol: f64) -> bool {
        self.abs() <= tol * (1.0 + scale.abs())
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?),
            None => s.parse().ok(),
        }
        .filter(|x: &f64| x.is_finite())
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn is_negligible_rel(&self, _scale: &Self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            return (!d.is_zero()).then(|| BigRational::new(n, d));
        }
        parse_decimal(s)
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }
}

/// Decimal text such as `-12.0625` or `3e-2` as an exact rational.
fn parse_decimal(s: &str) -> Option<Exact> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(&all_digits, 10).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut denom = BigInt::one();
    if scale >= 0 {
        numer *= num_traits::pow(ten, scale as usize);
    } else {
        denom = num_traits::pow(ten, (-scale) as usize);
    }
    if negative {
        numer = -numer;
    }
    Some(BigRational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Exact::parse_literal("0.1"), Some(Exact::from_ratio(1, 10)));
        assert_eq!(Exact::parse_literal("-2.5e1"), Some(Exact::from_ratio(-25, 1)));
        assert_eq!(Exact::parse_literal("3/6"), Some(Exact::from_ratio(1, 2)));
        assert_eq!(Exact::parse_literal("1.2.3"), None);
        assert_eq!(Exact::parse_literal("1/0"), None);
        assert_eq!(f64::parse_literal("1/4"), Some(0.25));
        assert_eq!(f64::parse_literal("inf"), None);
    }

    #[test]
    fn negligibility() {
        assert!(1e-13_f64.is_negligible());
        assert!(!1e-6_f64.is_negligible());
        assert!(!Exact::from_ratio(1, 1 << 60).is_negligible());
        assert!(Exact::zero().is_negligible());
    }
}
