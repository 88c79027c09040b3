//! Exact rational helpers shared across the crate.
//!
//! Every finite `f64` is a dyadic rational; converting cost coefficients
//! exactly keeps the whole certified pipeline in arbitrary-precision
//! arithmetic, so integrality tests and objective comparisons need no
//! tolerances.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Converts a finite `f64` to the exact rational it represents.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::Precondition(format!("non-finite value {x} cannot be rationalized")))
}

/// Renders a rational as `num/den` with the denominator always explicit.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer into a rational.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let denom: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(numer, denom))
}

/// True when the rational is exactly 0 or exactly 1.
pub fn is_zero_or_one(r: &BigRational) -> bool {
    r.is_zero() || r.is_one()
}

/// Least common multiple of the denominators of the given rationals.
///
/// Returns 1 for an empty iterator; all inputs are expected in reduced
/// form (as `BigRational` guarantees).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    let mut acc = BigInt::one();
    for v in values {
        acc = num_integer::Integer::lcm(&acc, &v.denom().abs());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_conversion_is_exact() {
        let r = rational_from_f64(0.5).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 2.into()));
        let ln2 = rational_from_f64(std::f64::consts::LN_2).unwrap();
        // Round-tripping through the rational recovers the double bit-exactly.
        let back = ln2.numer().to_string().parse::<f64>().unwrap()
            / ln2.denom().to_string().parse::<f64>().unwrap();
        assert_eq!(back, std::f64::consts::LN_2);
    }

    #[test]
    fn ratio_format_parse_roundtrip() {
        let r = BigRational::new((-3).into(), 4.into());
        assert_eq!(format_ratio(&r), "-3/4");
        assert_eq!(parse_ratio("-3/4").unwrap(), r);
        assert_eq!(parse_ratio("7").unwrap(), BigRational::from_integer(7.into()));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn lcm_of_denominators() {
        let a = BigRational::new(1.into(), 2.into());
        let b = BigRational::new(1.into(), 3.into());
        let c = BigRational::from_integer(5.into());
        assert_eq!(denominator_lcm([&a, &b, &c]), BigInt::from(6));
    }
}
