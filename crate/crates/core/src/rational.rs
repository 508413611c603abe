//! Exact rational numbers used for every annotation, cost and potential.

use alloc::string::String;
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn is_nonnegative(q: &Rational) -> bool {
    !q.is_negative()
}

/// Parses `n`, `-n` or `n/d` (no surrounding whitespace).
pub fn parse(s: &str) -> Option<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let valid = |part: &str| {
        let digits = part.strip_prefix('-').unwrap_or(part);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !den.is_none_or(|d| valid(d) && !d.starts_with('-')) {
        return None;
    }
    let n = BigInt::from_str(num).ok()?;
    let d = match den {
        Some(d) => BigInt::from_str(d).ok()?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn render(q: &Rational) -> String {
    use alloc::string::ToString;
    q.to_string()
}

/// `n choose k` as an exact rational.
pub fn binomial(n: u64, k: u64) -> Rational {
    if k > n {
        return zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        assert_eq!(parse("3"), Some(int(3)));
        assert_eq!(parse("1/2"), Some(ratio(1, 2)));
        assert_eq!(parse("4/2"), Some(int(2)));
        assert_eq!(parse("-1/3"), Some(ratio(-1, 3)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("1/-2"), None);
        assert_eq!(parse("x"), None);
        assert_eq!(parse(""), None);
        assert_eq!(render(&ratio(6, 4)), "3/2");
        assert_eq!(render(&int(7)), "7");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), int(6));
        assert_eq!(binomial(20, 4), int(4845));
        assert_eq!(binomial(3, 5), int(0));
        assert_eq!(binomial(0, 0), int(1));
    }
}
