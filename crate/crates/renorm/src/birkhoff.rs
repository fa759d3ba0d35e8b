//! Birkhoff factorization `φ = (φ₋∘S) ⋆ φ₊` of characters into a weight `-1`
//! Rota–Baxter algebra.
//!
//! With the prepared value `φ̄(X) = φ(X) + Σ φ₋(X')φ(X'')` over the reduced
//! coproduct, `φ₋(X) = -T(φ̄(X))` and `φ₊(X) = (1-T)(φ̄(X))`, by induction on
//! the degree. The beta function is `β = φ₋ ∘ D` with `D = S ⋆ Y`, and the
//! universal frame rebuilds `φ₋` from the graded pieces of `β`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xfeyn_core::specfun::ExactScalar;

use crate::error::{RenormError, Result};
use crate::feyngraph::CanonicalGraph;
use crate::hopf::{HopfAlgebra, HopfElement, Monomial};
use crate::rotabaxter::{
    random_rational, random_scalar, CommAlgebra, DivisorLabel, DivisorSet, LaurentSeries, LogForm, MarkedPoint,
    MultiLogForm, RegMonomial, RotaBaxter,
};

type Rule<A> = Arc<dyn Fn(&CanonicalGraph) -> Result<A> + Send + Sync>;

/// Algebra morphism `H → A`, given on generators and extended multiplicatively.
pub struct Character<A> {
    values: Mutex<BTreeMap<CanonicalGraph, A>>,
    rule: Option<Rule<A>>,
}

impl<A: CommAlgebra> Character<A> {
    pub fn from_values(values: BTreeMap<CanonicalGraph, A>) -> Self {
        Character { values: Mutex::new(values), rule: None }
    }

    /// Values computed on demand and memoized.
    pub fn from_rule(rule: impl Fn(&CanonicalGraph) -> Result<A> + Send + Sync + 'static) -> Self {
        Character { values: Mutex::new(BTreeMap::new()), rule: Some(Arc::new(rule)) }
    }

    pub fn generator(&self, g: &CanonicalGraph) -> Result<A> {
        if let Some(v) = self.values.lock().expect("character table").get(g) {
            return Ok(v.clone());
        }
        let rule = self.rule.as_ref().ok_or_else(|| RenormError::MissingValue(g.clone()))?;
        let v = rule(g)?;
        self.values.lock().expect("character table").insert(g.clone(), v.clone());
        Ok(v)
    }

    pub fn monomial(&self, m: &Monomial) -> Result<A> {
        m.factors().iter().try_fold(A::one(), |acc, g| Ok(acc.times(&self.generator(g)?)))
    }

    pub fn eval(&self, x: &HopfElement) -> Result<A> {
        x.terms().iter().try_fold(A::zero(), |acc, (m, q)| Ok(acc.plus(&self.monomial(m)?.scaled(q))))
    }

    /// The generator values computed so far.
    pub fn table(&self) -> BTreeMap<CanonicalGraph, A> {
        self.values.lock().expect("character table").clone()
    }
}

impl<A: Clone> Clone for Character<A> {
    fn clone(&self) -> Self {
        Character { values: Mutex::new(self.values.lock().expect("character table").clone()), rule: self.rule.clone() }
    }
}

impl<A: fmt::Debug> fmt::Debug for Character<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Character")
            .field("values", &*self.values.lock().expect("character table"))
            .field("rule", &self.rule.is_some())
            .finish()
    }
}

/// Counterterm and renormalized characters.
#[derive(Clone, Debug)]
pub struct BirkhoffPair<A> {
    pub minus: Character<A>,
    pub plus: Character<A>,
    pub max_degree: usize,
}

impl<A: RotaBaxter> BirkhoffPair<A> {
    /// First generator whose `φ₋` is not fixed by `T` or whose `φ₊` is not killed by it.
    pub fn image_violation(&self) -> Option<CanonicalGraph> {
        let plus = self.plus.table();
        self.minus
            .table()
            .into_iter()
            .find(|(g, m)| m.rb_t() != *m || plus.get(g).is_none_or(|p| !p.rb_t().vanishes()))
            .map(|(g, _)| g)
    }
}

/// `φ₋`, `φ₊` on every generator reachable from `roots`, up to `up_to_degree`.
pub fn birkhoff_factorize<A: RotaBaxter>(
    hopf: &HopfAlgebra,
    phi: &Character<A>,
    roots: &[CanonicalGraph],
    up_to_degree: usize,
) -> Result<BirkhoffPair<A>> {
    let mut minus: BTreeMap<CanonicalGraph, A> = BTreeMap::new();
    let mut plus = BTreeMap::new();
    let gens = hopf.generator_closure(roots);
    for g in gens.into_iter().filter(|g| g.degree() <= up_to_degree) {
        let mut prepared = phi.generator(&g)?;
        for ((a, b), q) in hopf.reduced_coproduct_generator(&g).terms() {
            let counter = a.factors().iter().fold(A::one(), |acc, h| acc.times(&minus[h]));
            prepared = prepared.plus(&counter.times(&phi.monomial(b)?).scaled(q));
        }
        let pole = prepared.rb_t();
        minus.insert(g.clone(), pole.negated());
        plus.insert(g, prepared.minus(&pole));
    }
    Ok(BirkhoffPair { minus: Character::from_values(minus), plus: Character::from_values(plus), max_degree: up_to_degree })
}

/// The recursion run on monomials directly, without assuming `φ_±` multiplicative.
pub struct DirectBirkhoff<'a, A> {
    hopf: &'a HopfAlgebra,
    phi: &'a Character<A>,
    minus: BTreeMap<Monomial, A>,
}

impl<'a, A: RotaBaxter> DirectBirkhoff<'a, A> {
    pub fn new(hopf: &'a HopfAlgebra, phi: &'a Character<A>) -> Self {
        DirectBirkhoff { hopf, phi, minus: BTreeMap::new() }
    }

    fn prepared(&mut self, m: &Monomial) -> Result<A> {
        let mut out = self.phi.monomial(m)?;
        for ((a, b), q) in self.hopf.reduced_coproduct_monomial(m).terms() {
            let counter = self.minus(a)?;
            out = out.plus(&counter.times(&self.phi.monomial(b)?).scaled(q));
        }
        Ok(out)
    }

    pub fn minus(&mut self, m: &Monomial) -> Result<A> {
        if m.is_unit() {
            return Ok(A::one());
        }
        if let Some(v) = self.minus.get(m) {
            return Ok(v.clone());
        }
        let v = self.prepared(m)?.rb_t().negated();
        self.minus.insert(m.clone(), v.clone());
        Ok(v)
    }

    pub fn plus(&mut self, m: &Monomial) -> Result<A> {
        if m.is_unit() {
            return Ok(A::one());
        }
        let p = self.prepared(m)?;
        Ok(p.minus(&p.rb_t()))
    }
}

/// `((φ₋∘S) ⋆ φ₊)(m)` and `φ(m)`.
pub fn factorization_sides<A: RotaBaxter>(
    hopf: &HopfAlgebra,
    pair: &BirkhoffPair<A>,
    phi: &Character<A>,
    m: &Monomial,
) -> Result<(A, A)> {
    let mut lhs = A::zero();
    for ((a, b), q) in hopf.coproduct_monomial(m).terms() {
        let left = pair.minus.eval(&hopf.antipode_monomial(a))?;
        lhs = lhs.plus(&left.times(&pair.plus.monomial(b)?).scaled(q));
    }
    Ok((lhs, phi.monomial(m)?))
}

/// `φ₊(Γ)`.
pub fn renormalized_value<A: RotaBaxter>(pair: &BirkhoffPair<A>, g: &CanonicalGraph) -> Result<A> {
    pair.plus.generator(g)
}

/// `β = φ₋ ∘ D` on generators; an infinitesimal character, so zero on the
/// unit and on products of generators.
#[derive(Clone, Debug)]
pub struct Beta<A> {
    values: BTreeMap<CanonicalGraph, A>,
}

impl<A: CommAlgebra> Beta<A> {
    pub fn values(&self) -> &BTreeMap<CanonicalGraph, A> {
        &self.values
    }

    pub fn monomial(&self, m: &Monomial) -> Result<A> {
        match m.factors() {
            [g] => self.values.get(g).cloned().ok_or_else(|| RenormError::MissingValue(g.clone())),
            _ => Ok(A::zero()),
        }
    }

    /// `β_k`: the restriction to degree `k`.
    pub fn graded(&self, k: usize, m: &Monomial) -> Result<A> {
        if m.degree() == k {
            self.monomial(m)
        } else {
            Ok(A::zero())
        }
    }
}

/// `φ₋(D(x))` for any element, by direct expansion.
pub fn beta_direct<A: RotaBaxter>(hopf: &HopfAlgebra, pair: &BirkhoffPair<A>, x: &HopfElement) -> Result<A> {
    pair.minus.eval(&hopf.dynkin(x))
}

pub fn beta_function<A: RotaBaxter>(hopf: &HopfAlgebra, pair: &BirkhoffPair<A>, up_to_degree: usize) -> Result<Beta<A>> {
    let mut values = BTreeMap::new();
    for g in pair.minus.table().into_keys().filter(|g| g.degree() <= up_to_degree) {
        let v = beta_direct(hopf, pair, &HopfElement::generator(g.clone()))?;
        values.insert(g, v);
    }
    Ok(Beta { values })
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn convolution_power<A: CommAlgebra>(hopf: &HopfAlgebra, beta: &Beta<A>, m: &Monomial, ks: &[usize]) -> Result<A> {
    let Some((&last, init)) = ks.split_last() else {
        return Ok(if m.is_unit() { A::one() } else { A::zero() });
    };
    let mut out = A::zero();
    for ((a, b), q) in hopf.coproduct_monomial(m).terms() {
        if b.degree() != last {
            continue;
        }
        let right = beta.graded(last, b)?;
        if right.vanishes() {
            continue;
        }
        out = out.plus(&convolution_power(hopf, beta, a, init)?.times(&right).scaled(q));
    }
    Ok(out)
}

/// `Σ β_{k_1} ⋆ ⋯ ⋆ β_{k_n}(m) / (k_1 (k_1+k_2) ⋯ (k_1+⋯+k_n))` over compositions of `deg m`.
pub fn universal_frame_monomial<A: CommAlgebra>(hopf: &HopfAlgebra, beta: &Beta<A>, m: &Monomial) -> Result<A> {
    let mut out = A::zero();
    for ks in compositions(m.degree()) {
        let mut denom = BigInt::from(1);
        let mut partial = 0;
        for k in &ks {
            partial += k;
            denom *= partial;
        }
        let term = convolution_power(hopf, beta, m, &ks)?;
        out = out.plus(&term.scaled(&BigRational::new(BigInt::from(1), denom)));
    }
    Ok(out)
}

/// The frame as a character, on every generator `β` knows about.
pub fn universal_frame<A: CommAlgebra>(hopf: &HopfAlgebra, beta: &Beta<A>, up_to_degree: usize) -> Result<Character<A>> {
    let mut values = BTreeMap::new();
    for g in beta.values.keys().filter(|g| g.degree() <= up_to_degree) {
        values.insert(g.clone(), universal_frame_monomial(hopf, beta, &Monomial::generator(g.clone()))?);
    }
    Ok(Character::from_values(values))
}

/// FNV-1a, to derive per-graph seeds that do not depend on the platform.
fn stable_hash(seed: u64, g: &CanonicalGraph) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in g.to_string().bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn graph_rng(seed: u64, g: &CanonicalGraph) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stable_hash(seed, g))
}

/// Seeded character into Laurent series: poles up to order `deg Γ`, regular terms to `z^2`.
pub fn toy_laurent_character(seed: u64) -> Character<LaurentSeries> {
    Character::from_rule(move |g| {
        let mut rng = graph_rng(seed, g);
        let mut s = LaurentSeries::default();
        for k in -(g.degree() as i32)..=2 {
            if rng.gen_bool(0.75) {
                s = s.plus(&LaurentSeries::monomial(random_rational(&mut rng), k));
            }
        }
        Ok(s)
    })
}

/// `η_Γ` on the space labelled by the vertex count of `Γ`.
///
/// The polar part has one monomial per nested family `{Γ} ∪ {components of γ}`
/// (`γ` admissible), built from the diagonal divisors `D_I` of the vertex sets
/// (numbered from 1), padded with `D_{∞,V}` to even size. The regular part is
/// a constant plus a linear term in one restriction variable.
fn eta(g: &CanonicalGraph, set: &DivisorSet, rng: &mut ChaCha8Rng) -> Result<LogForm> {
    let n = set.space;
    let graph = g.to_graph();
    let all: Vec<u32> = (1..=n).collect();
    let mut families: Vec<BTreeSet<Vec<u32>>> = vec![BTreeSet::from([all.clone()])];
    for sel in graph.admissible_subgraphs() {
        let mut f = BTreeSet::from([all.clone()]);
        f.extend(sel.components.iter().map(|c| c.vertices.iter().map(|v| v + 1).collect::<Vec<u32>>()));
        families.push(f);
    }
    let index = |label: DivisorLabel| set.index_of(&label).expect("label of the space");
    let mut out = LogForm::zero(n);
    for f in families {
        let mut j: Vec<u32> = f.into_iter().map(|i| index(DivisorLabel::Diagonal { i })).collect();
        if j.len() % 2 == 1 {
            j.push(index(DivisorLabel::Boundary { c: MarkedPoint::Infinity, s: all.clone() }));
        }
        j.sort_unstable();
        out = out.add(&LogForm::polar_term(n, j, random_scalar(rng))?)?;
    }
    out = out.add(&LogForm::constant(n, random_scalar(rng)))?;
    let x = rng.gen_range(0..set.len() as u32);
    out.add(&LogForm::regular_term(n, RegMonomial::var(x), random_scalar(rng)))
}

/// Seeded character `Γ ↦ η_Γ` into the log-form algebras of `X[v]`, `v ≤ n_vertices`,
/// with `k_external` marked points; products map to wedges.
pub fn toy_feynman_character(n_vertices: u32, k_external: u32, seed: u64) -> Character<MultiLogForm> {
    Character::from_rule(move |g| {
        let v = g.vertex_count() as u32;
        if v > n_vertices || v < 2 {
            return Err(RenormError::DivisorSetTooSmall { n: n_vertices, k: k_external, graph: g.clone() });
        }
        let set = DivisorSet::new(v, k_external);
        let form = eta(g, &set, &mut graph_rng(seed, g))?;
        form.check_labels(&set)?;
        Ok(MultiLogForm::from_logform(&form))
    })
}

/// `c` as an exact scalar, for building characters by hand.
pub fn scalar(c: &BigRational) -> ExactScalar {
    ExactScalar::rational(c.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feyngraph::FeynmanGraph;
    use xfeyn_core::specfun::exact::rat;

    fn laurent(s: &str) -> LaurentSeries {
        s.parse().unwrap()
    }

    #[test]
    fn primitive_graph() {
        let h = HopfAlgebra::new();
        let g = FeynmanGraph::from_parts(2, &[(0, 1), (0, 1)], &[1, 1]).canonical();
        let phi = Character::from_values(BTreeMap::from([(g.clone(), laurent("z^-2+3+z"))]));
        let pair = birkhoff_factorize(&h, &phi, std::slice::from_ref(&g), 4).unwrap();
        assert_eq!(pair.minus.generator(&g).unwrap(), laurent("-z^-2"));
        assert_eq!(renormalized_value(&pair, &g).unwrap(), laurent("3+z"));
    }

    #[test]
    fn nested_graph() {
        let h = HopfAlgebra::new();
        let g2 = FeynmanGraph::from_parts(3, &[(0, 1), (0, 1), (1, 2), (2, 0)], &[]).canonical();
        let ((sub, quo), _) = h.reduced_coproduct_generator(&g2).terms().iter().next().map(|(k, v)| (k.clone(), v.clone())).unwrap();
        let (g1, gq) = (sub.factors()[0].clone(), quo.factors()[0].clone());
        let phi = Character::from_values(BTreeMap::from([
            (g1, laurent("z^-1")),
            (gq, laurent("z^-1")),
            (g2.clone(), laurent("z^-2+3+z")),
        ]));
        let pair = birkhoff_factorize(&h, &phi, std::slice::from_ref(&g2), 4).unwrap();
        assert!(pair.minus.generator(&g2).unwrap().vanishes());
        assert_eq!(pair.plus.generator(&g2).unwrap(), laurent("3+z"));
        assert!(pair.image_violation().is_none());
    }

    #[test]
    fn beta_and_frame_on_a_primitive() {
        let h = HopfAlgebra::new();
        let g = FeynmanGraph::from_parts(2, &[(0, 1), (0, 1)], &[0, 2]).canonical();
        let phi = toy_laurent_character(7);
        let pair = birkhoff_factorize(&h, &phi, std::slice::from_ref(&g), 4).unwrap();
        let beta = beta_function(&h, &pair, 4).unwrap();
        let m = pair.minus.generator(&g).unwrap();
        assert_eq!(beta.values()[&g], m.scaled(&rat(2, 1)));
        assert!(beta.monomial(&Monomial::unit()).unwrap().vanishes());
        let frame = universal_frame(&h, &beta, 4).unwrap();
        assert_eq!(frame.generator(&g).unwrap(), m);
        assert_eq!(universal_frame_monomial(&h, &beta, &Monomial::unit()).unwrap(), LaurentSeries::one());
    }

    #[test]
    fn toy_characters_are_deterministic() {
        let g = FeynmanGraph::from_parts(3, &[(0, 1), (0, 1), (1, 2), (2, 0)], &[1, 0, 1]).canonical();
        let a = toy_feynman_character(4, 1, 11).generator(&g).unwrap();
        let b = toy_feynman_character(4, 1, 11).generator(&g).unwrap();
        assert_eq!(a, b);
        assert!(matches!(toy_feynman_character(2, 1, 11).generator(&g), Err(RenormError::DivisorSetTooSmall { .. })));
    }
}
