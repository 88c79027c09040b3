//! Solver-internal rational scalar with an `i128` fast path.
//!
//! Tableau entries are overwhelmingly small rationals (basis
//! subdeterminant denominators); cost-row entries carry dyadic f64
//! denominators. Both usually fit `i128`, so arithmetic runs on machine
//! words with checked overflow, promoting to `BigRational` only when a
//! product or cross sum genuinely outgrows 127 bits. Values demote back
//! after big operations whenever they fit, keeping the fast path hot.
//! Every value is kept reduced with a positive denominator, so
//! comparisons and zero/one tests are cheap.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone)]
pub enum Rat {
    Small(i128, i128),
    Big(Box<BigRational>),
}

use Rat::{Big, Small};

impl Rat {
    pub fn zero() -> Self {
        Small(0, 1)
    }

    pub fn one() -> Self {
        Small(1, 1)
    }

    pub fn from_big(value: &BigRational) -> Self {
        match (value.numer().to_i128(), value.denom().to_i128()) {
            (Some(n), Some(d)) => normalized(n, d),
            _ => Big(Box::new(value.clone())),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Small(n, d) => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Small(n, _) => *n == 0,
            Big(b) => b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Small(n, d) => *n == 1 && *d == 1,
            Big(b) => b.numer() == b.denom(),
        }
    }

    pub fn is_neg_one(&self) -> bool {
        match self {
            Small(n, d) => *n == -1 && *d == 1,
            Big(b) => b.is_negative() && -b.numer() == *b.denom(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Small(n, _) => *n > 0,
            Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Small(n, _) => *n < 0,
            Big(b) => b.is_negative(),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Small(n, d) => Small(-n, *d),
            Big(b) => Big(Box::new(-(**b).clone())),
        }
    }

    pub fn add(&self, other: &Rat) -> Rat {
        if let (Small(an, ad), Small(bn, bd)) = (self, other) {
            if let Some(r) = small_add(*an, *ad, *bn, *bd) {
                return r;
            }
        }
        demote(self.to_big() + other.to_big())
    }

    pub fn sub(&self, other: &Rat) -> Rat {
        if let (Small(an, ad), Small(bn, bd)) = (self, other) {
            if let Some(r) = small_add(*an, *ad, bn.checked_neg().unwrap_or(i128::MAX), *bd) {
                return r;
            }
        }
        demote(self.to_big() - other.to_big())
    }

    pub fn mul(&self, other: &Rat) -> Rat {
        if let (Small(an, ad), Small(bn, bd)) = (self, other) {
            if let Some(r) = small_mul(*an, *ad, *bn, *bd) {
                return r;
            }
        }
        demote(self.to_big() * other.to_big())
    }

    pub fn div(&self, other: &Rat) -> Rat {
        debug_assert!(!other.is_zero(), "division by zero");
        if let (Small(an, ad), Small(bn, bd)) = (self, other) {
            // a/b over c/d is (a*d)/(b*c); the sign moves to the numerator.
            if let Some(r) = small_mul(*an, *ad, *bd, *bn) {
                return r;
            }
        }
        demote(self.to_big() / other.to_big())
    }

    /// `self -= factor * source`, the pivot inner step.
    pub fn sub_mul_assign(&mut self, factor: &Rat, source: &Rat) {
        let product = factor.mul(source);
        *self = self.sub(&product);
    }

    pub fn cmp_value(&self, other: &Rat) -> Ordering {
        if let (Small(an, ad), Small(bn, bd)) = (self, other) {
            if let (Some(lhs), Some(rhs)) = (an.checked_mul(*bd), bn.checked_mul(*ad)) {
                return lhs.cmp(&rhs);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Eq for Rat {}

/// Reduces and fixes the sign convention; `d` must be nonzero.
fn normalized(n: i128, d: i128) -> Rat {
    debug_assert!(d != 0);
    if n == 0 {
        return Small(0, 1);
    }
    let g = n.gcd(&d);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    Small(n, d)
}

fn small_add(an: i128, ad: i128, bn: i128, bd: i128) -> Option<Rat> {
    if bn == i128::MAX {
        return None; // negation overflow sentinel from sub()
    }
    // Common small case: equal denominators.
    if ad == bd {
        return Some(normalized(an.checked_add(bn)?, ad));
    }
    let g = ad.gcd(&bd);
    let (ad_r, bd_r) = (ad / g, bd / g);
    let num = an.checked_mul(bd_r)?.checked_add(bn.checked_mul(ad_r)?)?;
    let den = ad.checked_mul(bd_r)?;
    Some(normalized(num, den))
}

fn small_mul(an: i128, ad: i128, bn: i128, bd: i128) -> Option<Rat> {
    if bd == 0 {
        return None; // division by a value whose numerator is zero
    }
    // Cross-reduce before multiplying to keep factors small.
    let g1 = an.gcd(&bd);
    let g2 = bn.gcd(&ad);
    let num = (an / g1).checked_mul(bn / g2)?;
    let den = (ad / g2).checked_mul(bd / g1)?;
    Some(normalized(num, den))
}

fn demote(value: BigRational) -> Rat {
    match (value.numer().to_i128(), value.denom().to_i128()) {
        (Some(n), Some(d)) => normalized(n, d),
        _ => Big(Box::new(value)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: i128, d: i128) -> Rat {
        normalized(n, d)
    }

    #[test]
    fn arithmetic_matches_bigrational() {
        let cases = [
            (small(1, 2), small(1, 3)),
            (small(-7, 4), small(5, 6)),
            (small(0, 1), small(3, 1)),
            (small(i128::MAX / 2, 3), small(i128::MAX / 3, 5)),
        ];
        for (a, b) in &cases {
            assert_eq!(a.add(b).to_big(), a.to_big() + b.to_big());
            assert_eq!(a.sub(b).to_big(), a.to_big() - b.to_big());
            assert_eq!(a.mul(b).to_big(), a.to_big() * b.to_big());
            if !b.is_zero() {
                assert_eq!(a.div(b).to_big(), a.to_big() / b.to_big());
            }
            assert_eq!(
                a.cmp_value(b),
                a.to_big().cmp(&b.to_big()),
                "comparing {a:?} and {b:?}"
            );
        }
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let huge = small(i128::MAX - 1, 1);
        let product = huge.mul(&huge);
        assert!(matches!(product, Big(_)));
        assert_eq!(product.to_big(), huge.to_big() * huge.to_big());
        // Dividing back demotes to the small representation.
        let back = product.div(&huge);
        assert!(matches!(back, Small(_, _)));
        assert_eq!(back.to_big(), huge.to_big());
    }

    #[test]
    fn predicates() {
        assert!(Rat::zero().is_zero());
        assert!(Rat::one().is_one());
        assert!(small(-1, 1).is_neg_one());
        assert!(small(-1, 2).is_negative());
        assert!(small(3, 2).is_positive());
        assert!(small(2, 4).eq(&small(1, 2)));
    }
}
