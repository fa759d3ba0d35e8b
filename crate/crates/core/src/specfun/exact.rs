//! Exact scalars: finite sums of rational multiples of half-integer powers of π.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// An integer or half-integer, stored as twice its value.
///
/// Serialized as its display string, `"3/2"` or `"-1"`; numbers are also accepted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    /// The half-integer `twice / 2`.
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    /// Accepts values that are exact multiples of 1/2.
    pub fn from_f64(v: f64) -> Option<Self> {
        let t = 2.0 * v;
        if t.is_finite() && t == t.round() && t.abs() < 1e15 {
            Some(HalfInt(t as i64))
        } else {
            None
        }
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// The integer value, if this is an integer.
    pub fn as_int(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(2))
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl std::str::FromStr for HalfInt {
    type Err = String;

    /// `"3"`, `"3/2"` or a decimal such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("{s:?} is not an integer or half-integer");
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(HalfInt(2 * num)),
                "2" => Ok(HalfInt(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(HalfInt::from_int(n));
        }
        s.parse::<f64>().ok().and_then(HalfInt::from_f64).ok_or_else(bad)
    }
}

impl Serialize for HalfInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Raw::Number(v) => HalfInt::from_f64(v)
                .ok_or_else(|| serde::de::Error::custom(format!("{v} is not an integer or half-integer"))),
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Finite sum `Σ_k q_k π^{k/2}` with rational `q_k`.
///
/// Zero coefficients are never stored, so structural equality is exact equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactScalar {
    terms: BTreeMap<i64, BigRational>,
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        Self::monomial(q, HalfInt::ZERO)
    }

    pub fn int(n: i64) -> Self {
        Self::rational(rat_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::rational(rat(n, d))
    }

    /// `q · π^e`.
    pub fn monomial(q: BigRational, pi_exp: HalfInt) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(pi_exp.twice(), q);
        }
        ExactScalar { terms }
    }

    pub fn pi_pow(e: HalfInt) -> Self {
        Self::monomial(BigRational::one(), e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|q| q.is_one())
    }

    /// Iterates `(π exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (HalfInt, &BigRational)> {
        self.terms.iter().map(|(k, q)| (HalfInt::from_twice(*k), q))
    }

    pub fn pi_exponents(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.terms.keys().map(|k| HalfInt::from_twice(*k))
    }

    /// The rational value when there is no π dependence.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    /// The single `(coefficient, exponent)` pair of a monomial.
    pub fn as_monomial(&self) -> Option<(&BigRational, HalfInt)> {
        if self.terms.len() == 1 {
            let (k, q) = self.terms.iter().next()?;
            Some((q, HalfInt::from_twice(*k)))
        } else {
            None
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ExactScalar {
            terms: self.terms.iter().map(|(k, c)| (*k, c * q)).collect(),
        }
    }

    /// Inverse of a nonzero monomial; sums of several π powers have no inverse here.
    pub fn inv(&self) -> Option<Self> {
        let (q, e) = self.as_monomial()?;
        Some(Self::monomial(q.recip(), -e))
    }

    /// `self / rhs` for a monomial divisor.
    pub fn checked_div(&self, rhs: &ExactScalar) -> Option<Self> {
        Some(self * &rhs.inv()?)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, q)| q.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powf(*k as f64 / 2.0))
            .sum()
    }

    fn add_term(&mut self, k: i64, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }
}

impl From<BigRational> for ExactScalar {
    fn from(q: BigRational) -> Self {
        ExactScalar::rational(q)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::int(n)
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(mut self, rhs: ExactScalar) -> ExactScalar {
        self += &rhs;
        self
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        for (k, q) in &rhs.terms {
            self.add_term(*k, q.clone());
        }
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        for (k, q) in &rhs.terms {
            out.add_term(*k, -q.clone());
        }
        out
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        &self - &rhs
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = ExactScalar::zero();
        for (ka, qa) in &self.terms {
            for (kb, qb) in &rhs.terms {
                out.add_term(ka + kb, qa * qb);
            }
        }
        out
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            terms: self.terms.into_iter().map(|(k, q)| (k, -q)).collect(),
        }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -self.clone()
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "{}", if q.is_negative() { " - " } else { " + " })?;
            } else if q.is_negative() {
                write!(f, "-")?;
            }
            let a = q.abs();
            match *k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "pi^({})", HalfInt::from_twice(*k))?;
                }
            }
        }
        Ok(())
    }
}

/// Serialized as `[{"pi_half_exp": k, "coeff": "p/q"}, ...]`, with `k` twice the π exponent.
impl Serialize for ExactScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (k, q) in &self.terms {
            seq.serialize_element(&ScalarTerm {
                pi_half_exp: *k,
                coeff: q.to_string(),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<ScalarTerm> = Vec::deserialize(d)?;
        let mut out = ExactScalar::zero();
        for t in raw {
            let q: BigRational = t.coeff.parse().map_err(serde::de::Error::custom)?;
            out.add_term(t.pi_half_exp, q);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarTerm {
    pi_half_exp: i64,
    coeff: String,
}

/// Rising factorial `(a)_n = a (a+1) ⋯ (a+n-1)` for rational `a`.
pub fn pochhammer(a: &BigRational, n: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut x = a.clone();
    for _ in 0..n {
        acc *= &x;
        x += BigRational::one();
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}
