//! Weight `-1` Rota–Baxter algebras, `T(x)T(y) = T(xT(y)) + T(T(x)y) - T(xy)`.
//!
//! Two models: Laurent series in `z` with `T` the pole-part projection, and
//! even logarithmic forms over labelled divisors with `T` the projection onto
//! the polar part. [`MultiLogForm`] is the tensor product of log-form algebras
//! living on different spaces.
//!
//! Log-form model: a polar monomial `dlog f_{j_1} ∧ ⋯ ∧ dlog f_{j_r}` (`r` even,
//! `j_1 < ⋯ < j_r`) carries a constant coefficient; the regular part is a
//! polynomial in restriction variables `x_j`. A regular factor multiplies a
//! polar monomial through its value at `x = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use xfeyn_core::specfun::{ExactScalar, HalfInt};

use crate::error::{RenormError, Result};

/// Commutative unital algebra over ℚ.
pub trait CommAlgebra: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, q: &BigRational) -> Self;
    fn vanishes(&self) -> bool;

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    fn negated(&self) -> Self {
        self.scaled(&-<BigRational as One>::one())
    }
}

pub trait RotaBaxter: CommAlgebra {
    fn rb_t(&self) -> Self;
}

/// `a - T(a)`.
pub fn polar_subtract<A: RotaBaxter>(a: &A) -> A {
    a.minus(&a.rb_t())
}

/// `T(x)T(y) - T(xT(y)) - T(T(x)y) + T(xy)`.
pub fn rb_defect<A: RotaBaxter>(x: &A, y: &A) -> A {
    let (tx, ty) = (x.rb_t(), y.rb_t());
    let rhs = x.times(&ty).rb_t().plus(&tx.times(y).rb_t()).minus(&x.times(y).rb_t());
    tx.times(&ty).minus(&rhs)
}

impl CommAlgebra for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, q: &BigRational) -> Self {
        self * q
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, ExactScalar>, key: K, c: &ExactScalar) {
    if c.is_zero() {
        return;
    }
    let slot = map.entry(key).or_default();
    *slot += c;
    if slot.is_zero() {
        map.retain(|_, v| !v.is_zero());
    }
}

// ---------------------------------------------------------------------------
// Laurent series

/// Finite Laurent series `Σ_k c_k z^k` with rational coefficients.
///
/// Products are exact; [`LaurentSeries::truncate`] drops high orders explicitly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    coeffs: BTreeMap<i32, BigRational>,
}

impl LaurentSeries {
    pub fn monomial(q: BigRational, k: i32) -> Self {
        let mut s = LaurentSeries::default();
        s.add_term(k, q);
        s
    }

    pub fn constant(q: BigRational) -> Self {
        Self::monomial(q, 0)
    }

    pub fn z_pow(k: i32) -> Self {
        Self::monomial(<BigRational as One>::one(), k)
    }

    fn add_term(&mut self, k: i32, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_insert_with(<BigRational as Zero>::zero);
        *slot += q;
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i32) -> BigRational {
        self.coeffs.get(&k).cloned().unwrap_or_else(<BigRational as Zero>::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> {
        self.coeffs.iter().map(|(k, q)| (*k, q))
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    /// Drops every power above `order`.
    pub fn truncate(&self, order: i32) -> Self {
        LaurentSeries { coeffs: self.coeffs.range(..=order).map(|(k, q)| (*k, q.clone())).collect() }
    }

    /// Strictly negative powers.
    pub fn pole_part(&self) -> Self {
        LaurentSeries { coeffs: self.coeffs.range(..0).map(|(k, q)| (*k, q.clone())).collect() }
    }

    pub fn has_poles(&self) -> bool {
        self.min_exponent().is_some_and(|k| k < 0)
    }
}

/// `T` on Laurent series: the pole part.
pub fn laurent_t(s: &LaurentSeries) -> LaurentSeries {
    s.pole_part()
}

impl CommAlgebra for LaurentSeries {
    fn zero() -> Self {
        LaurentSeries::default()
    }
    fn one() -> Self {
        LaurentSeries::z_pow(0)
    }
    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, q) in &other.coeffs {
            out.add_term(*k, q.clone());
        }
        out
    }
    fn times(&self, other: &Self) -> Self {
        let mut out = LaurentSeries::default();
        for (a, p) in &self.coeffs {
            for (b, q) in &other.coeffs {
                out.add_term(a + b, p * q);
            }
        }
        out
    }
    fn scaled(&self, q: &BigRational) -> Self {
        let mut out = LaurentSeries::default();
        for (k, c) in &self.coeffs {
            out.add_term(*k, c * q);
        }
        out
    }
    fn vanishes(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl RotaBaxter for LaurentSeries {
    fn rb_t(&self) -> Self {
        laurent_t(self)
    }
}

/// Ascending powers, e.g. `-z^-2+3+1/2*z`.
impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, q)) in self.coeffs.iter().enumerate() {
            if q.is_negative() {
                write!(f, "-")?;
            } else if i > 0 {
                write!(f, "+")?;
            }
            let a = q.abs();
            if *k == 0 {
                write!(f, "{a}")?;
                continue;
            }
            if !a.is_one() {
                write!(f, "{a}*")?;
            }
            match k {
                1 => write!(f, "z")?,
                _ => write!(f, "z^{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for LaurentSeries {
    type Err = RenormError;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || RenormError::Parse(format!("not a Laurent series: {s:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        // split before every sign that does not follow '^'
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^' {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        let mut out = LaurentSeries::default();
        for t in terms {
            let (neg, body) = match t.as_bytes().first() {
                Some(b'-') => (true, &t[1..]),
                Some(b'+') => (false, &t[1..]),
                _ => (false, t),
            };
            let (coeff, power) = match body.find('z') {
                None => (body, 0),
                Some(p) => {
                    let c = body[..p].trim_end_matches('*');
                    let rest = &body[p + 1..];
                    let k = match rest.strip_prefix('^') {
                        Some(e) => e.parse::<i32>().map_err(|_| bad())?,
                        None if rest.is_empty() => 1,
                        None => return Err(bad()),
                    };
                    (c, k)
                }
            };
            let q = if coeff.is_empty() {
                if power == 0 {
                    return Err(bad());
                }
                <BigRational as One>::one()
            } else {
                coeff.parse::<BigRational>().map_err(|_| bad())?
            };
            out.add_term(power, if neg { -q } else { q });
        }
        Ok(out)
    }
}

impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LaurentSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Divisor labels

/// Marked point of a boundary divisor: one of the `k` external points, or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkedPoint {
    Finite(u32),
    Infinity,
}

impl Serialize for MarkedPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MarkedPoint::Finite(c) => s.serialize_u32(*c),
            MarkedPoint::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for MarkedPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(c) => Ok(MarkedPoint::Finite(c)),
            Raw::Str(s) if s == "inf" => Ok(MarkedPoint::Infinity),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unknown marked point {s:?}"))),
        }
    }
}

/// Exceptional divisor of the compactified configuration space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorLabel {
    /// `D_{c,S}`: the points of `S` run into the marked point `c`.
    Boundary { c: MarkedPoint, s: Vec<u32> },
    /// `D_I`: the points of `I` collide.
    Diagonal { i: Vec<u32> },
}

impl fmt::Display for DivisorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        match self {
            DivisorLabel::Boundary { c: MarkedPoint::Finite(c), s } => write!(f, "D({c};{})", list(s)),
            DivisorLabel::Boundary { c: MarkedPoint::Infinity, s } => write!(f, "D(inf;{})", list(s)),
            DivisorLabel::Diagonal { i } => write!(f, "D[{}]", list(i)),
        }
    }
}

fn nonempty_subsets(n: u32) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = (1u64..1 << n)
        .map(|mask| (1..=n).filter(|&i| mask >> (i - 1) & 1 == 1).collect())
        .collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

/// Labels `D_{c,S}` for `c ∈ {1..k, ∞}`, `∅ ≠ S ⊆ {1..n}`, then `D_I` for `|I| > 1`.
pub fn divisor_labels(n: u32, k: u32) -> Vec<DivisorLabel> {
    let subsets = nonempty_subsets(n);
    let points = (1..=k).map(MarkedPoint::Finite).chain([MarkedPoint::Infinity]);
    let mut out: Vec<DivisorLabel> = points
        .flat_map(|c| subsets.iter().map(move |s| DivisorLabel::Boundary { c, s: s.clone() }))
        .collect();
    out.extend(subsets.iter().filter(|s| s.len() > 1).map(|i| DivisorLabel::Diagonal { i: i.clone() }));
    out
}

/// The divisors of one space, indexed by position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorSet {
    pub space: u32,
    pub labels: Vec<DivisorLabel>,
}

impl DivisorSet {
    pub fn new(n: u32, k: u32) -> Self {
        DivisorSet { space: n, labels: divisor_labels(n, k) }
    }

    pub fn index_of(&self, label: &DivisorLabel) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|i| i as u32)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Log forms

/// Monomial `Π x_j^{e_j}` in restriction variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegMonomial(BTreeMap<u32, u32>);

impl RegMonomial {
    pub fn one() -> Self {
        RegMonomial::default()
    }

    pub fn var(j: u32) -> Self {
        RegMonomial(BTreeMap::from([(j, 1)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &BTreeMap<u32, u32> {
        &self.0
    }

    pub fn times(&self, other: &RegMonomial) -> RegMonomial {
        let mut out = self.0.clone();
        for (j, e) in &other.0 {
            *out.entry(*j).or_insert(0) += e;
        }
        RegMonomial(out)
    }
}

/// `dlog_J ∧ dlog_K` as `±dlog_{J∪K}`, or `None` when `J ∩ K ≠ ∅`.
fn merge_polar(j: &[u32], k: &[u32]) -> Option<(Vec<u32>, bool)> {
    let mut inversions = 0usize;
    for a in j {
        for b in k {
            match a.cmp(b) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    let mut merged: Vec<u32> = j.iter().chain(k).copied().collect();
    merged.sort_unstable();
    Some((merged, inversions % 2 == 1))
}

fn check_polar(j: &[u32]) -> Result<()> {
    if j.is_empty() || j.len() % 2 == 1 {
        return Err(RenormError::InvalidForm(format!("polar index set {j:?} must be nonempty of even size")));
    }
    if j.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RenormError::InvalidForm(format!("polar index set {j:?} must be strictly increasing")));
    }
    Ok(())
}

/// Even log form on the space with label `space`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogForm {
    pub space: u32,
    polar: BTreeMap<Vec<u32>, ExactScalar>,
    regular: BTreeMap<RegMonomial, ExactScalar>,
}

/// Forms on a divisor: `dlog` index sets (any parity) with coefficients.
pub type Residue = BTreeMap<Vec<u32>, ExactScalar>;

impl LogForm {
    pub fn zero(space: u32) -> Self {
        LogForm { space, polar: BTreeMap::new(), regular: BTreeMap::new() }
    }

    pub fn constant(space: u32, c: ExactScalar) -> Self {
        Self::regular_term(space, RegMonomial::one(), c)
    }

    pub fn one(space: u32) -> Self {
        Self::constant(space, ExactScalar::one())
    }

    pub fn polar_term(space: u32, j: Vec<u32>, c: ExactScalar) -> Result<Self> {
        check_polar(&j)?;
        let mut out = Self::zero(space);
        add_into(&mut out.polar, j, &c);
        Ok(out)
    }

    pub fn regular_term(space: u32, m: RegMonomial, c: ExactScalar) -> Self {
        let mut out = Self::zero(space);
        add_into(&mut out.regular, m, &c);
        out
    }

    pub fn polar(&self) -> &BTreeMap<Vec<u32>, ExactScalar> {
        &self.polar
    }

    pub fn regular(&self) -> &BTreeMap<RegMonomial, ExactScalar> {
        &self.regular
    }

    pub fn is_zero(&self) -> bool {
        self.polar.is_empty() && self.regular.is_empty()
    }

    /// Value of the regular part at `x = 0`.
    pub fn constant_term(&self) -> ExactScalar {
        self.regular.get(&RegMonomial::one()).cloned().unwrap_or_default()
    }

    /// Every divisor index lies in `set`, and the space labels agree.
    pub fn check_labels(&self, set: &DivisorSet) -> Result<()> {
        if set.space != self.space {
            return Err(RenormError::SpaceMismatch(self.space, set.space));
        }
        let n = set.len() as u32;
        let used = self.polar.keys().flatten().chain(self.regular.keys().flat_map(|m| m.0.keys()));
        match used.copied().find(|&j| j >= n) {
            Some(j) => Err(RenormError::InvalidForm(format!("divisor index {j} outside a set of {n} labels"))),
            None => Ok(()),
        }
    }

    fn same_space(&self, other: &LogForm) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(RenormError::SpaceMismatch(self.space, other.space))
        }
    }

    pub fn add(&self, other: &LogForm) -> Result<LogForm> {
        self.same_space(other)?;
        let mut out = self.clone();
        for (j, c) in &other.polar {
            add_into(&mut out.polar, j.clone(), c);
        }
        for (m, c) in &other.regular {
            add_into(&mut out.regular, m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LogForm) -> Result<LogForm> {
        self.add(&other.scale(&ExactScalar::int(-1)))
    }

    pub fn scale(&self, c: &ExactScalar) -> LogForm {
        let mut out = LogForm::zero(self.space);
        for (j, a) in &self.polar {
            add_into(&mut out.polar, j.clone(), &(a * c));
        }
        for (m, a) in &self.regular {
            add_into(&mut out.regular, m.clone(), &(a * c));
        }
        out
    }

    /// Wedge product on a common space.
    pub fn wedge(&self, other: &LogForm) -> Result<LogForm> {
        self.same_space(other)?;
        let mut out = LogForm::zero(self.space);
        for (j, a) in &self.polar {
            for (k, b) in &other.polar {
                if let Some((jk, odd)) = merge_polar(j, k) {
                    let c = a * b;
                    add_into(&mut out.polar, jk, &if odd { -c } else { c });
                }
            }
        }
        let (ca, cb) = (self.constant_term(), other.constant_term());
        for (j, a) in &self.polar {
            add_into(&mut out.polar, j.clone(), &(a * &cb));
        }
        for (k, b) in &other.polar {
            add_into(&mut out.polar, k.clone(), &(&ca * b));
        }
        for (m, a) in &self.regular {
            for (n, b) in &other.regular {
                add_into(&mut out.regular, m.times(n), &(a * b));
            }
        }
        Ok(out)
    }

    /// `T`: the polar part.
    pub fn t(&self) -> LogForm {
        LogForm { space: self.space, polar: self.polar.clone(), regular: BTreeMap::new() }
    }

    /// `η - T(η)`: the regular part.
    pub fn polar_subtract(&self) -> LogForm {
        LogForm { space: self.space, polar: BTreeMap::new(), regular: self.regular.clone() }
    }

    /// Poincaré residue along `D_j`: `Σ_{K ∋ j} ± c_K dlog_{K∖j}`, the sign
    /// moving `dlog f_j` to the front.
    pub fn residue(&self, j: u32) -> Residue {
        residue_step(&self.polar, j)
    }

    /// Iterated residue along `D_{j_1}, D_{j_2}, …` in that order.
    pub fn iterated_residue(&self, js: &[u32]) -> Residue {
        js.iter().fold(self.polar.clone(), |acc, &j| residue_step(&acc, j))
    }
}

fn residue_step(forms: &Residue, j: u32) -> Residue {
    let mut out = Residue::new();
    for (k, c) in forms {
        if let Some(pos) = k.iter().position(|&x| x == j) {
            let rest: Vec<u32> = k.iter().copied().filter(|&x| x != j).collect();
            add_into(&mut out, rest, &if pos % 2 == 1 { -c.clone() } else { c.clone() });
        }
    }
    out
}

/// Wedge of two log forms on the same space.
pub fn logform_wedge(a: &LogForm, b: &LogForm) -> Result<LogForm> {
    a.wedge(b)
}

/// `T(η) = Σ_j dlog f_j ∧ Res_{D_j}(η)` in the constant-coefficient model: the polar part.
pub fn logform_t(a: &LogForm) -> LogForm {
    a.t()
}

/// [`rb_defect`] for log forms on one space.
pub fn logform_rb_defect(x: &LogForm, y: &LogForm) -> Result<LogForm> {
    let (tx, ty) = (x.t(), y.t());
    let rhs = x.wedge(&ty)?.t().add(&tx.wedge(y)?.t())?.sub(&x.wedge(y)?.t())?;
    tx.wedge(&ty)?.sub(&rhs)
}

#[derive(Serialize, Deserialize)]
struct PolarRow {
    #[serde(rename = "J")]
    j: Vec<u32>,
    coeff: ExactScalar,
}

#[derive(Serialize, Deserialize)]
struct RegularRow {
    monomial: RegMonomial,
    coeff: ExactScalar,
}

#[derive(Serialize, Deserialize)]
struct LogFormRepr {
    space: u32,
    polar: Vec<PolarRow>,
    regular: Vec<RegularRow>,
}

impl Serialize for LogForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LogFormRepr {
            space: self.space,
            polar: self.polar.iter().map(|(j, c)| PolarRow { j: j.clone(), coeff: c.clone() }).collect(),
            regular: self.regular.iter().map(|(m, c)| RegularRow { monomial: m.clone(), coeff: c.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = LogFormRepr::deserialize(d)?;
        let mut out = LogForm::zero(raw.space);
        for row in raw.polar {
            check_polar(&row.j).map_err(serde::de::Error::custom)?;
            add_into(&mut out.polar, row.j, &row.coeff);
        }
        for row in raw.regular {
            add_into(&mut out.regular, row.monomial, &row.coeff);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Several spaces

/// Basis element of one log-form algebra.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Polar(Vec<u32>),
    Regular(RegMonomial),
}

impl Basis {
    fn is_one(&self) -> bool {
        matches!(self, Basis::Regular(m) if m.is_one())
    }

    /// Product with sign, or `None` for zero.
    fn times(&self, other: &Basis) -> Option<(Basis, bool)> {
        match (self, other) {
            (Basis::Polar(j), Basis::Polar(k)) => merge_polar(j, k).map(|(jk, odd)| (Basis::Polar(jk), odd)),
            (Basis::Regular(m), Basis::Regular(n)) => Some((Basis::Regular(m.times(n)), false)),
            (Basis::Polar(j), Basis::Regular(m)) | (Basis::Regular(m), Basis::Polar(j)) => {
                m.is_one().then(|| (Basis::Polar(j.clone()), false))
            }
        }
    }
}

/// Pure tensor: one basis element per space; absent spaces carry `1`.
pub type BasisTensor = BTreeMap<u32, Basis>;

fn tensor_times(a: &BasisTensor, b: &BasisTensor) -> Option<(BasisTensor, bool)> {
    let mut out = a.clone();
    let mut odd = false;
    for (space, y) in b {
        match out.remove(space) {
            None => {
                out.insert(*space, y.clone());
            }
            Some(x) => {
                let (xy, s) = x.times(y)?;
                odd ^= s;
                if !xy.is_one() {
                    out.insert(*space, xy);
                }
            }
        }
    }
    Some((out, odd))
}

/// Element of `⊗_n Ω^even(log D_n)`: rational-weighted pure tensors over distinct spaces.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiLogForm {
    terms: BTreeMap<BasisTensor, ExactScalar>,
}

impl MultiLogForm {
    pub fn terms(&self) -> &BTreeMap<BasisTensor, ExactScalar> {
        &self.terms
    }

    pub fn from_logform(f: &LogForm) -> Self {
        let mut out = MultiLogForm::default();
        for (j, c) in &f.polar {
            add_into(&mut out.terms, BTreeMap::from([(f.space, Basis::Polar(j.clone()))]), c);
        }
        for (m, c) in &f.regular {
            let t = if m.is_one() { BTreeMap::new() } else { BTreeMap::from([(f.space, Basis::Regular(m.clone()))]) };
            add_into(&mut out.terms, t, c);
        }
        out
    }

    /// `η_1 ∧ ⋯ ∧ η_k`, multiplying factors that share a space.
    pub fn wedge_all(forms: &[LogForm]) -> Self {
        forms.iter().fold(Self::one(), |acc, f| acc.times(&Self::from_logform(f)))
    }

    pub fn scale_exact(&self, c: &ExactScalar) -> Self {
        let mut out = MultiLogForm::default();
        for (t, a) in &self.terms {
            add_into(&mut out.terms, t.clone(), &(a * c));
        }
        out
    }

    /// The factors of one pure tensor as single-term log forms.
    fn factors(t: &BasisTensor) -> Vec<LogForm> {
        t.iter()
            .map(|(space, b)| match b {
                Basis::Polar(j) => LogForm::polar_term(*space, j.clone(), ExactScalar::one()).expect("stored polar sets are valid"),
                Basis::Regular(m) => LogForm::regular_term(*space, m.clone(), ExactScalar::one()),
            })
            .collect()
    }

    /// `T(η_1 ∧ rest) = T(η_1) ∧ rest + η_1 ∧ T(rest) - T(η_1) ∧ T(rest)`.
    fn t_factors(factors: &[LogForm]) -> MultiLogForm {
        match factors {
            [] => MultiLogForm::default(),
            [f] => MultiLogForm::from_logform(&f.t()),
            [f, rest @ ..] => {
                let tf = MultiLogForm::from_logform(&f.t());
                let ff = MultiLogForm::from_logform(f);
                let tr = Self::t_factors(rest);
                let r = MultiLogForm::wedge_all(rest);
                tf.times(&r).plus(&ff.times(&tr)).minus(&tf.times(&tr))
            }
        }
    }

    /// Pure tensors with at least one polar factor; equals `id - ⊗(id - T_n)`.
    pub fn polar_projection(&self) -> Self {
        MultiLogForm {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.values().any(|b| matches!(b, Basis::Polar(_))))
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        }
    }

    /// Residue along divisor `j` of space `space`.
    pub fn residue(&self, space: u32, j: u32) -> BTreeMap<BasisTensor, ExactScalar> {
        let mut out = BTreeMap::new();
        for (t, c) in &self.terms {
            let Some(Basis::Polar(k)) = t.get(&space) else { continue };
            let Some(pos) = k.iter().position(|&x| x == j) else { continue };
            let mut rest = t.clone();
            let k_rest: Vec<u32> = k.iter().copied().filter(|&x| x != j).collect();
            rest.insert(space, Basis::Polar(k_rest));
            add_into(&mut out, rest, &if pos % 2 == 1 { -c.clone() } else { c.clone() });
        }
        out
    }

    /// Every `(space, divisor)` pair with a nonzero residue.
    pub fn residue_support(&self) -> BTreeSet<(u32, u32)> {
        let mut out = BTreeSet::new();
        for t in self.terms.keys() {
            for (space, b) in t {
                if let Basis::Polar(k) = b {
                    for &j in k {
                        if !self.residue(*space, j).is_empty() {
                            out.insert((*space, j));
                        }
                    }
                }
            }
        }
        out
    }
}

/// `T` on a wedge over several spaces, by the two-factor recursion.
pub fn multi_t(a: &MultiLogForm) -> MultiLogForm {
    let mut out = MultiLogForm::default();
    for (t, c) in &a.terms {
        out = out.plus(&MultiLogForm::t_factors(&MultiLogForm::factors(t)).scale_exact(c));
    }
    out
}

impl CommAlgebra for MultiLogForm {
    fn zero() -> Self {
        MultiLogForm::default()
    }
    fn one() -> Self {
        MultiLogForm { terms: BTreeMap::from([(BTreeMap::new(), ExactScalar::one())]) }
    }
    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            add_into(&mut out.terms, t.clone(), c);
        }
        out
    }
    fn times(&self, other: &Self) -> Self {
        let mut out = MultiLogForm::default();
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                if let Some((ab, odd)) = tensor_times(a, b) {
                    let c = p * q;
                    add_into(&mut out.terms, ab, &if odd { -c } else { c });
                }
            }
        }
        out
    }
    fn scaled(&self, q: &BigRational) -> Self {
        self.scale_exact(&ExactScalar::rational(q.clone()))
    }
    fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }
}

impl RotaBaxter for MultiLogForm {
    fn rb_t(&self) -> Self {
        multi_t(self)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorRow {
    factors: BasisTensor,
    coeff: ExactScalar,
}

impl Serialize for MultiLogForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<TensorRow> =
            self.terms.iter().map(|(t, c)| TensorRow { factors: t.clone(), coeff: c.clone() }).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiLogForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<TensorRow>::deserialize(d)?;
        let mut out = MultiLogForm::default();
        for row in rows {
            for b in row.factors.values() {
                if let Basis::Polar(j) = b {
                    check_polar(j).map_err(serde::de::Error::custom)?;
                }
            }
            let t = row.factors.into_iter().filter(|(_, b)| !b.is_one()).collect();
            add_into(&mut out.terms, t, &row.coeff);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Random elements for property checks

/// Small nonzero rational `p/q`.
pub fn random_rational(rng: &mut impl Rng) -> BigRational {
    let p: i64 = loop {
        let p = rng.gen_range(-9..=9);
        if p != 0 {
            break p;
        }
    };
    BigRational::new(BigInt::from(p), BigInt::from(rng.gen_range(1..=6)))
}

/// Rational or rational-times-`π^{k/2}` scalar.
pub fn random_scalar(rng: &mut impl Rng) -> ExactScalar {
    let mut c = ExactScalar::rational(random_rational(rng));
    if rng.gen_bool(0.3) {
        c += &ExactScalar::monomial(random_rational(rng), HalfInt::from_twice(rng.gen_range(-3..=3)));
    }
    c
}

pub fn random_laurent(rng: &mut impl Rng) -> LaurentSeries {
    let mut s = LaurentSeries::default();
    for _ in 0..rng.gen_range(0..=5) {
        s.add_term(rng.gen_range(-4..=3), random_rational(rng));
    }
    s
}

/// Random even log form over divisors `0..divisors`.
pub fn random_logform(rng: &mut impl Rng, space: u32, divisors: u32) -> LogForm {
    let mut f = LogForm::zero(space);
    for _ in 0..rng.gen_range(0..=3) {
        let size = 2 * rng.gen_range(1..=2usize.min(divisors as usize / 2).max(1));
        let mut j: Vec<u32> = rand::seq::index::sample(rng, divisors as usize, size.min(divisors as usize))
            .into_iter()
            .map(|x| x as u32)
            .collect();
        j.sort_unstable();
        if j.len().is_multiple_of(2) && !j.is_empty() {
            add_into(&mut f.polar, j, &random_scalar(rng));
        }
    }
    for _ in 0..rng.gen_range(0..=3) {
        let mut m = RegMonomial::one();
        for _ in 0..rng.gen_range(0..=2) {
            m = m.times(&RegMonomial::var(rng.gen_range(0..divisors)));
        }
        add_into(&mut f.regular, m, &random_scalar(rng));
    }
    f
}

/// Random element over the given spaces: a sum of wedges of random log forms.
pub fn random_multi(rng: &mut impl Rng, spaces: &[u32], divisors: u32) -> MultiLogForm {
    let mut out = MultiLogForm::default();
    for _ in 0..rng.gen_range(1..=2) {
        let mut forms = Vec::new();
        for &n in spaces {
            if rng.gen_bool(0.7) {
                forms.push(random_logform(rng, n, divisors));
            }
        }
        out = out.plus(&MultiLogForm::wedge_all(&forms));
    }
    out
}
