//! Exact scalar types.
//!
//! The engine never touches floating point. Game-level code is generic over
//! [`Scalar`], which any exact ordered field satisfies (`Ratio<i64>`,
//! `BigRational`, ...). Mechanism builders use the arbitrary-precision
//! [`Exact`] alias.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Exact = BigRational;

/// An exact, totally ordered field element usable as a utility value.
///
/// `Display` must print integers bare and fractions as `p/q`, and `FromStr`
/// must accept both forms.
pub trait Scalar:
    Clone + Ord + Hash + Num + Signed + FromPrimitive + Debug + Display + FromStr + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("every i64 is representable")
    }

    fn parse_exact(text: &str) -> Result<Self> {
        text.trim()
            .parse::<Self>()
            .map_err(|_| Error::Parse(format!("`{text}` is not an exact rational (expected `p/q` or integer)")))
    }
}

impl<T> Scalar for T where
    T: Clone + Ord + Hash + Num + Signed + FromPrimitive + Debug + Display + FromStr + Send + Sync + 'static
{
}

/// Shorthand constructor `n/d` for [`Exact`]. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Exact {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Exact {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or an integer into lowest terms.
pub fn parse_exact(text: &str) -> Result<Exact> {
    Exact::parse_exact(text)
}

/// `step * floor(value / step)`: the largest grid multiple not exceeding `value`.
pub fn floor_to_grid(value: &Exact, step: &Exact) -> Exact {
    (value / step).floor() * step
}

/// `step * ceil(value / step)`.
pub fn ceil_to_grid(value: &Exact, step: &Exact) -> Exact {
    (value / step).ceil() * step
}

/// True when `value` is a non-negative integer multiple of `step`.
pub fn on_grid(value: &Exact, step: &Exact) -> bool {
    !value.is_negative() && (value / step).is_integer()
}

/// `n!` as an exact scalar.
pub fn factorial(n: usize) -> Exact {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// Lowest-terms numerator/denominator of a rational, for integer reasoning.
pub fn numer_denom(x: &Exact) -> (BigInt, BigInt) {
    (x.numer().clone(), x.denom().clone())
}

pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Exact>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// A scalar extended with a top element, used for minima over empty sets.
///
/// Never participates in arithmetic; only in comparisons.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Extended<T> {
    Finite(T),
    PosInf,
}

impl<T: Ord> PartialOrd for Extended<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ord> Ord for Extended<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::PosInf) => Ordering::Less,
            (Extended::PosInf, Extended::Finite(_)) => Ordering::Greater,
            (Extended::PosInf, Extended::PosInf) => Ordering::Equal,
        }
    }
}

impl<T> Extended<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInf => None,
        }
    }
}

impl<T: Display> Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInf => f.write_str("inf"),
        }
    }
}

impl<T: Scalar> FromStr for Extended<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "inf" {
            Ok(Extended::PosInf)
        } else {
            T::parse_exact(s).map(Extended::Finite)
        }
    }
}

/// Minimum of an iterator, `+inf` when empty.
pub fn ext_min<T: Ord + Clone, I: IntoIterator<Item = T>>(values: I) -> Extended<T> {
    values
        .into_iter()
        .min()
        .map_or(Extended::PosInf, Extended::Finite)
}

/// Convenience: the zero of any scalar.
pub fn zero<T: Scalar>() -> T {
    T::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn display_and_parse_round_trip() {
        for text in ["0", "7", "-3", "3/10", "-9/4"] {
            let x = parse_exact(text).unwrap();
            assert_eq!(x.to_string(), text);
        }
        assert_eq!(parse_exact("6/4").unwrap(), rat(3, 2));
        assert!(parse_exact("1/0x").is_err());
        assert!(parse_exact("0.5").is_err());
    }

    #[test]
    fn grid_helpers() {
        assert_eq!(floor_to_grid(&int(1), &rat(3, 10)), rat(9, 10));
        assert_eq!(ceil_to_grid(&rat(8, 5), &rat(3, 10)), rat(9, 5));
        assert!(on_grid(&rat(3, 4), &rat(1, 4)));
        assert!(!on_grid(&rat(1, 3), &rat(1, 4)));
        assert_eq!(factorial(4), int(24));
    }

    #[test]
    fn extended_orders_infinity_on_top() {
        let a: Extended<Ratio<i64>> = Extended::Finite(Ratio::from_integer(1000));
        assert!(a < Extended::PosInf);
        assert_eq!(ext_min(Vec::<Ratio<i64>>::new()), Extended::PosInf);
        assert_eq!("inf".parse::<Extended<Exact>>().unwrap(), Extended::PosInf);
    }

    #[test]
    fn generic_scalar_covers_small_ratios() {
        fn half<T: Scalar>() -> T {
            T::one() / T::from_int(2)
        }
        assert_eq!(half::<Ratio<i64>>(), Ratio::new(1, 2));
        assert_eq!(half::<Exact>(), rat(1, 2));
    }
}
