//! Exact non-negative rationals and the dyadic denominator classes used to
//! measure how fine-grained a fractional matching is.
//!
//! Every rational `x = p/q` in reduced form has a unique class `n` such that
//! the power-of-two factor of `q` is `2^n`. `S(d)` is the set of multiples of
//! `1/2^d` in `[0, 1]`.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational")]
    Empty,
    #[error("malformed rational '{0}'")]
    Malformed(String),
    #[error("zero denominator in '{0}'")]
    ZeroDenominator(String),
}

/// Even part of a natural number: the largest power of two dividing it.
/// `even_part(0) = 0` by convention.
pub fn even_part(x: &BigUint) -> BigUint {
    match x.trailing_zeros() {
        None => BigUint::zero(),
        Some(tz) => BigUint::one() << tz,
    }
}

/// Odd part of a natural number, `x / even_part(x)`. `odd_part(0) = 1`.
pub fn odd_part(x: &BigUint) -> BigUint {
    match x.trailing_zeros() {
        None => BigUint::one(),
        Some(tz) => x >> tz,
    }
}

/// A non-negative exact rational, always stored reduced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(Ratio<BigUint>);

impl Rat {
    pub fn new(numer: u64, denom: u64) -> Rat {
        assert!(denom != 0, "zero denominator");
        Rat(Ratio::new(BigUint::from(numer), BigUint::from(denom)))
    }

    pub fn from_big(numer: BigUint, denom: BigUint) -> Rat {
        assert!(!denom.is_zero(), "zero denominator");
        Rat(Ratio::new(numer, denom))
    }

    pub fn zero() -> Rat {
        Rat(Ratio::zero())
    }

    pub fn one() -> Rat {
        Rat(Ratio::one())
    }

    pub fn half() -> Rat {
        Rat::new(1, 2)
    }

    /// `i / 2^d`.
    pub fn dyadic(i: u64, d: u32) -> Rat {
        Rat(Ratio::new(BigUint::from(i), BigUint::one() << d))
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `self - other`, or zero when `other > self`.
    pub fn sub_clamped_at_zero(&self, other: &Rat) -> Rat {
        if other >= self {
            Rat::zero()
        } else {
            Rat(&self.0 - &other.0)
        }
    }

    /// `1 - self`, clamped at zero.
    pub fn slack(&self) -> Rat {
        Rat::one().sub_clamped_at_zero(self)
    }

    pub fn halve(&self) -> Rat {
        Rat(&self.0 / Ratio::from_integer(BigUint::from(2u32)))
    }

    pub fn double(&self) -> Rat {
        Rat(&self.0 * Ratio::from_integer(BigUint::from(2u32)))
    }

    pub fn even_denom(&self) -> BigUint {
        even_part(self.denom())
    }

    pub fn odd_denom(&self) -> BigUint {
        odd_part(self.denom())
    }

    /// The unique `n` with `self ∈ R_n`: the number of factors of two in
    /// the reduced denominator.
    pub fn class_index(&self) -> u64 {
        self.denom().trailing_zeros().unwrap_or(0)
    }

    pub fn in_class_range(&self, lo: u64, hi: u64) -> bool {
        (lo..=hi).contains(&self.class_index())
    }

    /// Membership in `S(d) = { i/2^d : 0 <= i <= 2^d }`.
    pub fn in_dyadic_set(&self, d: u32) -> bool {
        self <= &Rat::one()
            && self.denom().count_ones() == 1
            && self.class_index() <= u64::from(d)
    }

    /// Whether the value is one of `0`, `1/2`, `1`.
    pub fn is_half_integral(&self) -> bool {
        self.in_dyadic_set(1)
    }
}

/// `x ∈ S(d)`.
pub fn in_s(x: &Rat, d: u32) -> bool {
    x.in_dyadic_set(d)
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        Rat(&self.0 + &rhs.0)
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat(self.0 + rhs.0)
    }
}

impl<'a> std::iter::Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| &acc + x)
    }
}

impl std::iter::Sum<Rat> for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = RatParseError;

    fn from_str(s: &str) -> Result<Rat, RatParseError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RatParseError::Empty);
        }
        let malformed = || RatParseError::Malformed(s.to_string());
        let parse_nat = |t: &str| -> Result<BigUint, RatParseError> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            t.parse::<BigUint>().map_err(|_| malformed())
        };
        match s.split_once('/') {
            None => Ok(Rat::from_big(parse_nat(s)?, BigUint::one())),
            Some((p, q)) => {
                let q = parse_nat(q)?;
                if q.is_zero() {
                    return Err(RatParseError::ZeroDenominator(s.to_string()));
                }
                Ok(Rat::from_big(parse_nat(p)?, q))
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite or class-bounded set of admissible edge values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueSet {
    /// `S(d)`: multiples of `1/2^d` in `[0, 1]`.
    Dyadic(u32),
    /// `R_{<=n}`: values in `[0, 1]` whose denominator has at most `n`
    /// factors of two.
    ClassAtMost(u64),
}

impl ValueSet {
    pub fn contains(&self, x: &Rat) -> bool {
        match *self {
            ValueSet::Dyadic(d) => x.in_dyadic_set(d),
            ValueSet::ClassAtMost(n) => x <= &Rat::one() && x.class_index() <= n,
        }
    }

    /// The value set the upper-bound algorithm promises for maximum degree
    /// `delta`: `S(floor(delta/2))`, and `S(1)` when `delta <= 2`.
    pub fn for_max_degree(delta: usize) -> ValueSet {
        ValueSet::Dyadic(((delta / 2).max(1)) as u32)
    }

    /// Enumerates a finite set. `None` for the infinite `R_{<=n}`.
    pub fn elements(&self) -> Option<Vec<Rat>> {
        match *self {
            ValueSet::Dyadic(d) => Some((0..=(1u64 << d)).map(|i| Rat::dyadic(i, d)).collect()),
            ValueSet::ClassAtMost(_) => None,
        }
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSet::Dyadic(d) => write!(f, "S({d})"),
            ValueSet::ClassAtMost(n) => write!(f, "R<={n}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unrecognised value set '{0}' (expected S(d) or R<=n)")]
pub struct ValueSetParseError(pub String);

impl FromStr for ValueSet {
    type Err = ValueSetParseError;

    fn from_str(s: &str) -> Result<ValueSet, ValueSetParseError> {
        let err = || ValueSetParseError(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let strip_parens = |body: &str| -> String {
            body.strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .unwrap_or(body)
                .to_string()
        };
        if let Some(rest) = t.strip_prefix('S') {
            let d = strip_parens(rest).parse::<u32>().map_err(|_| err())?;
            if d > 62 {
                return Err(err());
            }
            Ok(ValueSet::Dyadic(d))
        } else if let Some(rest) = t.strip_prefix('R') {
            let inner = strip_parens(rest);
            let n = inner.strip_prefix("<=").ok_or_else(err)?;
            Ok(ValueSet::ClassAtMost(n.parse().map_err(|_| err())?))
        } else {
            Err(err())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn even_and_odd_parts() {
        assert_eq!(even_part(&big(12)), big(4));
        assert_eq!(odd_part(&big(12)), big(3));
        assert_eq!(even_part(&big(0)), big(0));
        assert_eq!(odd_part(&big(0)), big(1));
        assert_eq!(even_part(&big(8)), big(8));
        assert_eq!(odd_part(&big(8)), big(1));
        for x in 1..500u64 {
            assert_eq!(even_part(&big(x)) * odd_part(&big(x)), big(x));
            assert!(odd_part(&big(x)).bit(0));
        }
    }

    #[test]
    fn denominator_parts() {
        assert_eq!(r("1/4").even_denom(), big(4));
        assert_eq!(r("0/1").even_denom(), big(1));
        assert_eq!(r("1/1").even_denom(), big(1));
        assert_eq!(r("1/3").even_denom(), big(1));
        assert_eq!(r("5/12").even_denom(), big(4));
        assert_eq!(r("5/12").odd_denom(), big(3));
    }

    #[test]
    fn classes_match_listed_members() {
        for s in ["0", "1", "1/3", "2/3", "1/5", "2/5", "3/5", "4/5"] {
            assert_eq!(r(s).class_index(), 0, "{s}");
        }
        for s in ["1/2", "1/6", "5/6"] {
            assert_eq!(r(s).class_index(), 1, "{s}");
        }
        for s in ["1/4", "3/4", "1/12", "5/12", "7/12", "11/12"] {
            assert_eq!(r(s).class_index(), 2, "{s}");
        }
        assert!(r("5/6").in_class_range(1, 1));
        assert!(!r("5/6").in_class_range(2, 5));
    }

    #[test]
    fn dyadic_membership() {
        assert!(in_s(&r("3/4"), 2));
        assert!(!in_s(&r("1/3"), 2));
        assert!(!in_s(&r("1/8"), 2));
        assert!(in_s(&r("1"), 0));
        assert!(!in_s(&r("5/4"), 2));
        assert_eq!(ValueSet::Dyadic(2).elements().unwrap().len(), 5);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(&r("1/2") + &r("1/3"), r("5/6"));
        assert_eq!(r("1/2").min(r("3/4")), r("1/2"));
        assert_eq!(r("1/2").sub_clamped_at_zero(&r("3/4")), Rat::zero());
        assert_eq!(r("3/4").sub_clamped_at_zero(&r("1/2")), r("1/4"));
        let s = &r("1/2") + &r("1/6");
        assert_eq!(s, r("2/3"));
        assert_eq!(s.even_denom(), big(1));
        assert_eq!(&r("3/4") + &r("3/4"), r("3/2"));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(r("0").to_string(), "0/1");
        assert_eq!(r("1").to_string(), "1/1");
        assert_eq!(r("2/4").to_string(), "1/2");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("-1/2".parse::<Rat>().is_err());
        assert!("a/b".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
    }

    #[test]
    fn value_set_parse() {
        assert_eq!("S(2)".parse::<ValueSet>().unwrap(), ValueSet::Dyadic(2));
        assert_eq!("R<=0".parse::<ValueSet>().unwrap(), ValueSet::ClassAtMost(0));
        assert_eq!("R(<=3)".parse::<ValueSet>().unwrap(), ValueSet::ClassAtMost(3));
        assert!("T(1)".parse::<ValueSet>().is_err());
        assert_eq!(ValueSet::for_max_degree(1), ValueSet::Dyadic(1));
        assert_eq!(ValueSet::for_max_degree(7), ValueSet::Dyadic(3));
        assert!(!ValueSet::ClassAtMost(0).contains(&Rat::half()));
    }

    fn rat_strategy() -> impl Strategy<Value = Rat> {
        (0u64..200, 1u64..200).prop_map(|(p, q)| Rat::new(p, q))
    }

    proptest! {
        #[test]
        fn even_part_never_grows_under_addition(a in rat_strategy(), b in rat_strategy()) {
            let sum = &a + &b;
            let bound = a.even_denom().max(b.even_denom());
            prop_assert!(sum.even_denom() <= bound);
        }

        #[test]
        fn class_is_unique_and_total(p in 0u64..1000, q in 1u64..1000) {
            prop_assume!(p <= q);
            let x = Rat::new(p, q);
            let n = x.class_index();
            let hits = (0..64).filter(|&k| x.in_class_range(k, k)).count();
            prop_assert_eq!(hits, 1);
            prop_assert_eq!(x.even_denom(), BigUint::one() << n);
        }

        #[test]
        fn dyadic_sets_nest(i in 0u64..=64, d in 0u32..6) {
            let x = Rat::new(i.min(1 << d), 1 << d);
            prop_assert!(x.in_dyadic_set(d));
            prop_assert!(x.in_dyadic_set(d + 1));
            prop_assert!(ValueSet::ClassAtMost(u64::from(d)).contains(&x));
        }
    }
}
