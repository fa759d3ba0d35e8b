//! Connes–Kreimer Hopf algebra over ℚ, free commutative on 1PI graphs.
//!
//! `Δ(Γ) = Γ⊗1 + 1⊗Γ + Σ_γ γ⊗Γ/γ` over admissible `γ`, extended
//! multiplicatively, and `S(Γ) = -Γ - Σ_γ S(γ)·Γ/γ`. Graded by the number of
//! internal lines.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::feyngraph::CanonicalGraph;
use crate::rotabaxter::CommAlgebra;

/// Product of generators, sorted; the empty product is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<CanonicalGraph>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn generator(g: CanonicalGraph) -> Self {
        Monomial(vec![g])
    }

    pub fn from_factors(mut factors: Vec<CanonicalGraph>) -> Self {
        factors.sort();
        Monomial(factors)
    }

    pub fn factors(&self) -> &[CanonicalGraph] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(CanonicalGraph::degree).sum()
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        Monomial::from_factors(self.0.iter().chain(&other.0).cloned().collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), &self.0).cmp(&(other.degree(), &other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join("·"))
    }
}

fn add_rational<K: Ord>(map: &mut BTreeMap<K, BigRational>, key: K, q: BigRational) {
    if q.is_zero() {
        return;
    }
    let slot = map.entry(key).or_insert_with(<BigRational as Zero>::zero);
    *slot += q;
    if slot.is_zero() {
        map.retain(|_, v| !v.is_zero());
    }
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Element of `H`: rational combination of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HopfElement {
    terms: BTreeMap<Monomial, BigRational>,
}

impl HopfElement {
    pub fn monomial(m: Monomial) -> Self {
        let mut out = HopfElement::default();
        out.add_term(m, <BigRational as One>::one());
        out
    }

    pub fn generator(g: CanonicalGraph) -> Self {
        Self::monomial(Monomial::generator(g))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut out = HopfElement::default();
        for (m, q) in terms {
            out.add_term(m, q);
        }
        out
    }

    pub fn add_term(&mut self, m: Monomial, q: BigRational) {
        add_rational(&mut self.terms, m, q);
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(<BigRational as Zero>::zero)
    }

    /// `ε`: the coefficient of the unit.
    pub fn counit(&self) -> BigRational {
        self.coeff(&Monomial::unit())
    }

    /// Homogeneous part of degree `n`.
    pub fn degree_part(&self, n: usize) -> Self {
        HopfElement { terms: self.terms.iter().filter(|(m, _)| m.degree() == n).map(|(m, q)| (m.clone(), q.clone())).collect() }
    }
}

impl CommAlgebra for HopfElement {
    fn zero() -> Self {
        HopfElement::default()
    }
    fn one() -> Self {
        HopfElement::monomial(Monomial::unit())
    }
    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.add_term(m.clone(), q.clone());
        }
        out
    }
    fn times(&self, other: &Self) -> Self {
        let mut out = HopfElement::default();
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                out.add_term(a.times(b), p * q);
            }
        }
        out
    }
    fn scaled(&self, q: &BigRational) -> Self {
        HopfElement::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c * q)))
    }
    fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for HopfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, q)| format!("({q}) {m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRow {
    coeff: String,
    monomial: Monomial,
}

impl Serialize for HopfElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<ElementRow> =
            self.terms.iter().map(|(m, q)| ElementRow { coeff: q.to_string(), monomial: m.clone() }).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HopfElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<ElementRow>::deserialize(d)?;
        let mut out = HopfElement::default();
        for r in rows {
            let q: BigRational = r.coeff.parse().map_err(serde::de::Error::custom)?;
            out.add_term(Monomial::from_factors(r.monomial.0), q);
        }
        Ok(out)
    }
}

/// Element of `H ⊗ H`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TensorElement {
    terms: BTreeMap<(Monomial, Monomial), BigRational>,
}

impl TensorElement {
    pub fn pure(a: Monomial, b: Monomial) -> Self {
        let mut out = TensorElement::default();
        out.add_term(a, b, <BigRational as One>::one());
        out
    }

    pub fn add_term(&mut self, a: Monomial, b: Monomial, q: BigRational) {
        add_rational(&mut self.terms, (a, b), q);
    }

    pub fn terms(&self) -> &BTreeMap<(Monomial, Monomial), BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for ((a, b), q) in &other.terms {
            out.add_term(a.clone(), b.clone(), q.clone());
        }
        out
    }

    pub fn scaled(&self, q: &BigRational) -> TensorElement {
        let mut out = TensorElement::default();
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), c * q);
        }
        out
    }

    /// Componentwise product in `H ⊗ H`.
    pub fn times(&self, other: &TensorElement) -> TensorElement {
        let mut out = TensorElement::default();
        for ((a, b), p) in &self.terms {
            for ((c, d), q) in &other.terms {
                out.add_term(a.times(c), b.times(d), p * q);
            }
        }
        out
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|((a, b), q)| format!("({q}) {a} ⊗ {b}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct TensorRow {
    coeff: String,
    left: Monomial,
    right: Monomial,
}

impl Serialize for TensorElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<TensorRow> = self
            .terms
            .iter()
            .map(|((a, b), q)| TensorRow { coeff: q.to_string(), left: a.clone(), right: b.clone() })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensorElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<TensorRow>::deserialize(d)?;
        let mut out = TensorElement::default();
        for r in rows {
            let q: BigRational = r.coeff.parse().map_err(serde::de::Error::custom)?;
            out.add_term(Monomial::from_factors(r.left.0), Monomial::from_factors(r.right.0), q);
        }
        Ok(out)
    }
}

/// Element of `H ⊗ H ⊗ H`, for coassociativity checks.
pub type Tensor3 = BTreeMap<(Monomial, Monomial, Monomial), BigRational>;

/// The Hopf algebra for one theory, with memoized coproducts and antipodes.
#[derive(Debug, Default)]
pub struct HopfAlgebra {
    max_valence: Option<usize>,
    reduced: Mutex<HashMap<CanonicalGraph, Arc<TensorElement>>>,
    antipodes: Mutex<HashMap<CanonicalGraph, Arc<HopfElement>>>,
}

impl HopfAlgebra {
    pub fn new() -> Self {
        Self::default()
    }

    /// Quotients must keep every vertex within `max` lines.
    pub fn with_max_valence(max: Option<usize>) -> Self {
        HopfAlgebra { max_valence: max, ..Self::default() }
    }

    pub fn max_valence(&self) -> Option<usize> {
        self.max_valence
    }

    /// `Σ_γ γ ⊗ Γ/γ` over admissible proper `γ`.
    pub fn reduced_coproduct_generator(&self, g: &CanonicalGraph) -> Arc<TensorElement> {
        if let Some(t) = self.reduced.lock().expect("coproduct cache").get(g) {
            return t.clone();
        }
        let graph = g.to_graph().with_max_valence(self.max_valence);
        let mut out = TensorElement::default();
        for sel in graph.admissible_subgraphs() {
            let parts = sel.components.iter().map(|c| graph.component_graph(c).canonical()).collect();
            let quotient = graph.contract(&sel).expect("admissible subgraphs contract").canonical();
            out.add_term(Monomial::from_factors(parts), Monomial::generator(quotient), <BigRational as One>::one());
        }
        let out = Arc::new(out);
        self.reduced.lock().expect("coproduct cache").insert(g.clone(), out.clone());
        out
    }

    pub fn coproduct_generator(&self, g: &CanonicalGraph) -> TensorElement {
        let m = Monomial::generator(g.clone());
        let mut out = (*self.reduced_coproduct_generator(g)).clone();
        out.add_term(m.clone(), Monomial::unit(), <BigRational as One>::one());
        out.add_term(Monomial::unit(), m, <BigRational as One>::one());
        out
    }

    pub fn coproduct_monomial(&self, m: &Monomial) -> TensorElement {
        m.factors()
            .iter()
            .fold(TensorElement::pure(Monomial::unit(), Monomial::unit()), |acc, g| acc.times(&self.coproduct_generator(g)))
    }

    pub fn coproduct(&self, x: &HopfElement) -> TensorElement {
        let mut out = TensorElement::default();
        for (m, q) in x.terms() {
            out = out.plus(&self.coproduct_monomial(m).scaled(q));
        }
        out
    }

    /// `Δ(m) - m⊗1 - 1⊗m`; zero on the unit.
    pub fn reduced_coproduct_monomial(&self, m: &Monomial) -> TensorElement {
        if m.is_unit() {
            return TensorElement::default();
        }
        let mut out = self.coproduct_monomial(m);
        out.add_term(m.clone(), Monomial::unit(), -<BigRational as One>::one());
        out.add_term(Monomial::unit(), m.clone(), -<BigRational as One>::one());
        out
    }

    pub fn antipode_generator(&self, g: &CanonicalGraph) -> Arc<HopfElement> {
        if let Some(s) = self.antipodes.lock().expect("antipode cache").get(g) {
            return s.clone();
        }
        let mut out = HopfElement::generator(g.clone()).negated();
        for ((a, b), q) in self.reduced_coproduct_generator(g).terms() {
            let term = self.antipode_monomial(a).times(&HopfElement::monomial(b.clone()));
            out = out.minus(&term.scaled(q));
        }
        let out = Arc::new(out);
        self.antipodes.lock().expect("antipode cache").insert(g.clone(), out.clone());
        out
    }

    pub fn antipode_monomial(&self, m: &Monomial) -> HopfElement {
        m.factors().iter().fold(HopfElement::one(), |acc, g| acc.times(&self.antipode_generator(g)))
    }

    pub fn antipode(&self, x: &HopfElement) -> HopfElement {
        let mut out = HopfElement::default();
        for (m, q) in x.terms() {
            out = out.plus(&self.antipode_monomial(m).scaled(q));
        }
        out
    }

    /// `Y`: multiplication by the degree.
    pub fn grading(&self, x: &HopfElement) -> HopfElement {
        HopfElement::from_terms(x.terms().iter().map(|(m, q)| (m.clone(), q * rational(m.degree() as i64))))
    }

    /// `D = S ⋆ Y = m ∘ (S ⊗ Y) ∘ Δ`.
    pub fn dynkin(&self, x: &HopfElement) -> HopfElement {
        let mut out = HopfElement::default();
        for ((a, b), q) in self.coproduct(x).terms() {
            if b.degree() == 0 {
                continue;
            }
            let yb = HopfElement::monomial(b.clone()).scaled(&(q * rational(b.degree() as i64)));
            out = out.plus(&self.antipode_monomial(a).times(&yb));
        }
        out
    }

    /// `⟨f_1 ⊗ f_2, Δ(x)⟩` for linear maps given on monomials.
    pub fn convolve<A: CommAlgebra>(
        &self,
        f1: &dyn Fn(&Monomial) -> A,
        f2: &dyn Fn(&Monomial) -> A,
        x: &HopfElement,
    ) -> A {
        let mut out = A::zero();
        for ((a, b), q) in self.coproduct(x).terms() {
            out = out.plus(&f1(a).times(&f2(b)).scaled(q));
        }
        out
    }

    /// `(Δ ⊗ id) Δ x`.
    pub fn coassoc_left(&self, x: &HopfElement) -> Tensor3 {
        let mut out = Tensor3::new();
        for ((a, b), q) in self.coproduct(x).terms() {
            for ((a1, a2), p) in self.coproduct_monomial(a).terms() {
                add_rational(&mut out, (a1.clone(), a2.clone(), b.clone()), p * q);
            }
        }
        out
    }

    /// `(id ⊗ Δ) Δ x`.
    pub fn coassoc_right(&self, x: &HopfElement) -> Tensor3 {
        let mut out = Tensor3::new();
        for ((a, b), q) in self.coproduct(x).terms() {
            for ((b1, b2), p) in self.coproduct_monomial(b).terms() {
                add_rational(&mut out, (a.clone(), b1.clone(), b2.clone()), p * q);
            }
        }
        out
    }

    /// `(ε ⊗ id) Δ x` and `(id ⊗ ε) Δ x`.
    pub fn counit_sides(&self, x: &HopfElement) -> (HopfElement, HopfElement) {
        let mut left = HopfElement::default();
        let mut right = HopfElement::default();
        for ((a, b), q) in self.coproduct(x).terms() {
            if a.is_unit() {
                left.add_term(b.clone(), q.clone());
            }
            if b.is_unit() {
                right.add_term(a.clone(), q.clone());
            }
        }
        (left, right)
    }

    /// `m (S ⊗ id) Δ x` and `m (id ⊗ S) Δ x`; both equal `ε(x)·1`.
    pub fn antipode_sides(&self, x: &HopfElement) -> (HopfElement, HopfElement) {
        let mut left = HopfElement::default();
        let mut right = HopfElement::default();
        for ((a, b), q) in self.coproduct(x).terms() {
            let (ma, mb) = (HopfElement::monomial(a.clone()), HopfElement::monomial(b.clone()));
            left = left.plus(&self.antipode_monomial(a).times(&mb).scaled(q));
            right = right.plus(&ma.times(&self.antipode_monomial(b)).scaled(q));
        }
        (left, right)
    }

    /// Every generator reachable from `roots` through subgraphs and quotients.
    pub fn generator_closure(&self, roots: &[CanonicalGraph]) -> BTreeSet<CanonicalGraph> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<CanonicalGraph> = roots.to_vec();
        while let Some(g) = stack.pop() {
            if !seen.insert(g.clone()) {
                continue;
            }
            for (a, b) in self.reduced_coproduct_generator(&g).terms().keys() {
                stack.extend(a.factors().iter().chain(b.factors()).filter(|h| !seen.contains(*h)).cloned());
            }
        }
        seen
    }
}

/// All monomials in `generators` of total degree at most `max_degree`, unit included.
pub fn monomials_up_to(generators: &[CanonicalGraph], max_degree: usize) -> Vec<Monomial> {
    let mut gens: Vec<CanonicalGraph> = generators.iter().filter(|g| g.degree() > 0).cloned().collect();
    gens.sort();
    gens.dedup();
    let mut out = Vec::new();
    fn extend(gens: &[CanonicalGraph], start: usize, budget: usize, current: &mut Vec<CanonicalGraph>, out: &mut Vec<Monomial>) {
        out.push(Monomial::from_factors(current.clone()));
        for i in start..gens.len() {
            if gens[i].degree() <= budget {
                current.push(gens[i].clone());
                extend(gens, i, budget - gens[i].degree(), current, out);
                current.pop();
            }
        }
    }
    extend(&gens, 0, max_degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feyngraph::FeynmanGraph;

    fn banana() -> CanonicalGraph {
        FeynmanGraph::from_parts(2, &[(0, 1), (0, 1)], &[1, 1]).canonical()
    }

    fn doubled_triangle() -> CanonicalGraph {
        FeynmanGraph::from_parts(3, &[(0, 1), (0, 1), (1, 2), (2, 0)], &[]).canonical()
    }

    #[test]
    fn unit_and_primitive() {
        let h = HopfAlgebra::new();
        assert_eq!(h.coproduct(&HopfElement::one()), TensorElement::pure(Monomial::unit(), Monomial::unit()));
        let b = Monomial::generator(banana());
        let want = TensorElement::pure(b.clone(), Monomial::unit()).plus(&TensorElement::pure(Monomial::unit(), b.clone()));
        assert_eq!(h.coproduct_monomial(&b), want);
        assert_eq!(h.antipode(&HopfElement::one()), HopfElement::one());
        assert_eq!(h.antipode(&HopfElement::monomial(b.clone())), HopfElement::monomial(b).negated());
    }

    #[test]
    fn one_step_antipode() {
        let h = HopfAlgebra::new();
        let g = doubled_triangle();
        let red = h.reduced_coproduct_generator(&g);
        assert_eq!(red.terms().len(), 1);
        let ((sub, quo), q) = red.terms().iter().next().unwrap();
        assert!(q.is_one());
        let want = HopfElement::generator(g.clone()).negated().plus(&HopfElement::monomial(sub.times(quo)));
        assert_eq!(*h.antipode_generator(&g), want);
    }

    #[test]
    fn dynkin_on_primitives() {
        let h = HopfAlgebra::new();
        let b = HopfElement::generator(banana());
        assert_eq!(h.dynkin(&b), b.scaled(&rational(2)));
        assert!(h.dynkin(&HopfElement::one()).vanishes());
        assert!(h.grading(&HopfElement::one()).vanishes());
    }

    #[test]
    fn monomial_enumeration() {
        let ms = monomials_up_to(&[banana(), doubled_triangle()], 4);
        // 1, B, B², T
        assert_eq!(ms.len(), 4);
        assert!(ms[0].is_unit());
    }
}
