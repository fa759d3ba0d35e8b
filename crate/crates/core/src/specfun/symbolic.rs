//! Polynomials in `m`, `log m`, `γ`, `log 2` with [`ExactScalar`] coefficients.
//!
//! The mass `m` may carry half-integer exponents (the large-distance expansion
//! produces `m^{λ-ℓ-1/2}`), and a single `√2` generator is adjoined so that
//! `√(π/2)` and `2^{k/2}` stay exact. `√2 · √2` folds back into the rational
//! coefficient, so the representation stays canonical.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::exact::{rat_int, ExactScalar, HalfInt};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponents of one monomial `√2^s · m^a · (log m)^b · γ^c · (log 2)^d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymMonomial {
    pub m: HalfInt,
    pub log_m: u32,
    pub gamma: u32,
    pub log2: u32,
    pub sqrt2: bool,
}

impl SymMonomial {
    pub fn is_unit(&self) -> bool {
        *self == SymMonomial::default()
    }

    /// Product of exponents; the `bool` reports a `√2·√2 = 2` carry.
    fn mul(&self, o: &SymMonomial) -> (SymMonomial, bool) {
        let carry = self.sqrt2 && o.sqrt2;
        (
            SymMonomial {
                m: self.m + o.m,
                log_m: self.log_m + o.log_m,
                gamma: self.gamma + o.gamma,
                log2: self.log2 + o.log2,
                sqrt2: self.sqrt2 ^ o.sqrt2,
            },
            carry,
        )
    }
}

/// Numeric values for the symbols; `π` is bound through [`ExactScalar::to_f64`].
#[derive(Clone, Copy, Debug)]
pub struct SymbolBinding {
    pub m: f64,
}

impl SymbolBinding {
    pub fn mass(m: f64) -> Self {
        SymbolBinding { m }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SymbolicCoeff {
    terms: BTreeMap<SymMonomial, ExactScalar>,
}

impl SymbolicCoeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(ExactScalar::one())
    }

    pub fn constant(c: ExactScalar) -> Self {
        Self::term(SymMonomial::default(), c)
    }

    pub fn term(mono: SymMonomial, c: ExactScalar) -> Self {
        let mut out = Self::zero();
        out.add_term(mono, c);
        out
    }

    pub fn int(n: i64) -> Self {
        Self::constant(ExactScalar::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(ExactScalar::ratio(n, d))
    }

    pub fn mass_pow(e: HalfInt) -> Self {
        Self::term(SymMonomial { m: e, ..Default::default() }, ExactScalar::one())
    }

    pub fn log_m() -> Self {
        Self::term(SymMonomial { log_m: 1, ..Default::default() }, ExactScalar::one())
    }

    pub fn euler_gamma() -> Self {
        Self::term(SymMonomial { gamma: 1, ..Default::default() }, ExactScalar::one())
    }

    pub fn log2() -> Self {
        Self::term(SymMonomial { log2: 1, ..Default::default() }, ExactScalar::one())
    }

    pub fn sqrt2() -> Self {
        Self::term(SymMonomial { sqrt2: true, ..Default::default() }, ExactScalar::one())
    }

    /// `2^e` for half-integer `e`.
    pub fn pow2(e: HalfInt) -> Self {
        let t = e.twice();
        let whole = t.div_euclid(2);
        let odd = t.rem_euclid(2) == 1;
        let q = if whole >= 0 {
            rat_int(1i64 << whole)
        } else {
            BigRational::one() / rat_int(1i64 << (-whole))
        };
        let mono = SymMonomial { sqrt2: odd, ..Default::default() };
        Self::term(mono, ExactScalar::rational(q))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMonomial, &ExactScalar)> {
        self.terms.iter()
    }

    /// The coefficient of the monomial `1`.
    pub fn constant_part(&self) -> ExactScalar {
        self.terms.get(&SymMonomial::default()).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v * c);
        }
        out
    }

    pub fn scale_rational(&self, q: &BigRational) -> Self {
        self.scale(&ExactScalar::rational(q.clone()))
    }

    /// All π exponents appearing in any coefficient.
    pub fn pi_exponents(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.terms.values().flat_map(|c| c.pi_exponents())
    }

    pub fn eval(&self, b: &SymbolBinding) -> f64 {
        let (lm, l2) = (b.m.ln(), std::f64::consts::LN_2);
        self.terms
            .iter()
            .map(|(k, c)| {
                let mut v = c.to_f64() * b.m.powf(k.m.to_f64());
                v *= lm.powi(k.log_m as i32) * EULER_GAMMA.powi(k.gamma as i32) * l2.powi(k.log2 as i32);
                if k.sqrt2 {
                    v *= std::f64::consts::SQRT_2;
                }
                v
            })
            .sum()
    }

    fn add_term(&mut self, mono: SymMonomial, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono).or_default();
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }
}

impl From<ExactScalar> for SymbolicCoeff {
    fn from(c: ExactScalar) -> Self {
        SymbolicCoeff::constant(c)
    }
}

impl AddAssign<&SymbolicCoeff> for SymbolicCoeff {
    fn add_assign(&mut self, rhs: &SymbolicCoeff) {
        for (k, v) in &rhs.terms {
            self.add_term(*k, v.clone());
        }
    }
}

impl<'a> Add<&'a SymbolicCoeff> for &'a SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn add(self, rhs: &SymbolicCoeff) -> SymbolicCoeff {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn add(mut self, rhs: SymbolicCoeff) -> SymbolicCoeff {
        self += &rhs;
        self
    }
}

impl<'a> Sub<&'a SymbolicCoeff> for &'a SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn sub(self, rhs: &SymbolicCoeff) -> SymbolicCoeff {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, -v);
        }
        out
    }
}

impl Sub for SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn sub(self, rhs: SymbolicCoeff) -> SymbolicCoeff {
        &self - &rhs
    }
}

impl<'a> Mul<&'a SymbolicCoeff> for &'a SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn mul(self, rhs: &SymbolicCoeff) -> SymbolicCoeff {
        let mut out = SymbolicCoeff::zero();
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                let (k, carry) = ka.mul(kb);
                let mut c = va * vb;
                if carry {
                    c = c.scale(&rat_int(2));
                }
                out.add_term(k, c);
            }
        }
        out
    }
}

impl Mul for SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn mul(self, rhs: SymbolicCoeff) -> SymbolicCoeff {
        &self * &rhs
    }
}

impl Neg for SymbolicCoeff {
    type Output = SymbolicCoeff;
    fn neg(self) -> SymbolicCoeff {
        SymbolicCoeff {
            terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect(),
        }
    }
}

impl fmt::Display for SymbolicCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({v})")?;
            if k.sqrt2 {
                write!(f, "*sqrt2")?;
            }
            if k.m != HalfInt::ZERO {
                write!(f, "*m^({})", k.m)?;
            }
            for (name, e) in [("log(m)", k.log_m), ("gamma", k.gamma), ("log2", k.log2)] {
                if e > 0 {
                    write!(f, "*{name}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Serialized as a list of `{"m_half_exp", "log_m", "gamma", "log2", "sqrt2", "coeff"}` records.
impl Serialize for SymbolicCoeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<SymTermRow> = self
            .terms
            .iter()
            .map(|(k, v)| SymTermRow {
                m_half_exp: k.m.twice(),
                log_m: k.log_m,
                gamma: k.gamma,
                log2: k.log2,
                sqrt2: k.sqrt2,
                coeff: v.clone(),
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymbolicCoeff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<SymTermRow> = Vec::deserialize(d)?;
        let mut out = SymbolicCoeff::zero();
        for r in rows {
            let mono = SymMonomial {
                m: HalfInt::from_twice(r.m_half_exp),
                log_m: r.log_m,
                gamma: r.gamma,
                log2: r.log2,
                sqrt2: r.sqrt2,
            };
            out.add_term(mono, r.coeff);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct SymTermRow {
    m_half_exp: i64,
    log_m: u32,
    gamma: u32,
    log2: u32,
    sqrt2: bool,
    coeff: ExactScalar,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        let s = SymbolicCoeff::sqrt2();
        assert_eq!(&s * &s, SymbolicCoeff::int(2));
    }

    #[test]
    fn pow2_half_integer() {
        let a = SymbolicCoeff::pow2(HalfInt::from_twice(3));
        let b = SymbolicCoeff::pow2(HalfInt::from_twice(-3));
        assert_eq!(&a * &b, SymbolicCoeff::one());
        assert!((a.eval(&SymbolBinding::mass(1.0)) - 2f64.powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn eval_binds_constants() {
        let c = &SymbolicCoeff::euler_gamma() + &SymbolicCoeff::log2();
        let v = c.eval(&SymbolBinding::mass(3.0));
        assert!((v - (EULER_GAMMA + std::f64::consts::LN_2)).abs() < 1e-15);
        let lm = SymbolicCoeff::log_m() * SymbolicCoeff::mass_pow(HalfInt::from_int(2));
        assert!((lm.eval(&SymbolBinding::mass(3.0)) - 9.0 * 3f64.ln()).abs() < 1e-13);
    }
}
