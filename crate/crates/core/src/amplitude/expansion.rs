//! Expansion of one edge factor in `t = r/ρ` and Gegenbauer polynomials `C^{(λ)}_d(ω_s·ω_t)`.
//!
//! With `ρ = max(‖x_s‖, ‖x_t‖)`, `r = min(‖x_s‖, ‖x_t‖)` and `c = ω_s·ω_t`,
//! `‖x_s - x_t‖² = ρ² (1 - 2tc + t²)`. Then
//!
//! - `‖x_s - x_t‖^{-2k} = ρ^{-2k} Σ_n C^{(k)}_n(c) t^n`, re-projected onto weight `λ`;
//! - `‖x_s - x_t‖^{2ℓ} = ρ^{2ℓ} Σ_j binom(ℓ,j) (-2tc)^j (1+t²)^{ℓ-j}`, a polynomial;
//! - `log ‖x_s - x_t‖ = log ρ - Σ_{p≥1} T_p(c) t^p / p`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::coefficients::{taylor_term_coefficient, MassParam, TaylorBranch, TaylorTermSpec};
use crate::error::{invalid, Error, Result};
use crate::gegenbauer::{
    chebyshev_to_gegenbauer, gegenbauer_coeffs, gegenbauer_values, poly_to_gegenbauer, product_linearize,
    reproject_gegenbauer, ExactPoly, GegenCombo, PolySpec,
};
use crate::specfun::exact::{binomial, rat};
use crate::specfun::symbolic::SymbolBinding;
use crate::specfun::{ExactScalar, HalfInt, SymbolicCoeff};

/// `ρ`, `r` and the cosine of the angle between the endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeGeometry {
    pub rho: f64,
    pub r: f64,
    pub cos: f64,
}

impl EdgeGeometry {
    pub fn new(rho: f64, r: f64, cos: f64) -> Result<Self> {
        if !(rho > 0.0) || !(r >= 0.0) || r > rho {
            return Err(invalid(format!("need 0 <= r <= rho and rho > 0, got r = {r}, rho = {rho}")));
        }
        if !(-1.0..=1.0).contains(&cos) {
            return Err(invalid(format!("cosine must lie in [-1, 1], got {cos}")));
        }
        Ok(EdgeGeometry { rho, r, cos })
    }

    /// Geometry of the edge between the points `xs` and `xt`.
    pub fn from_points(xs: &[f64], xt: &[f64]) -> Result<Self> {
        if xs.len() != xt.len() {
            return Err(invalid("endpoints live in different dimensions"));
        }
        let ns = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nt = xt.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (rho, r) = if ns >= nt { (ns, nt) } else { (nt, ns) };
        if rho == 0.0 {
            return Err(Error::Diagonal);
        }
        let cos = if r == 0.0 {
            1.0
        } else {
            (xs.iter().zip(xt).map(|(a, b)| a * b).sum::<f64>() / (ns * nt)).clamp(-1.0, 1.0)
        };
        Ok(EdgeGeometry { rho, r, cos })
    }

    pub fn ratio(&self) -> f64 {
        self.r / self.rho
    }

    /// `‖x_s - x_t‖`.
    pub fn distance(&self) -> f64 {
        let t = self.ratio();
        self.rho * (1.0 - 2.0 * t * self.cos + t * t).max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionOrders {
    /// Highest power of `r/ρ` kept.
    pub radial: u32,
    /// Highest Gegenbauer degree kept; defaults to `radial`.
    pub degree: Option<u32>,
}

impl Default for ExpansionOrders {
    fn default() -> Self {
        ExpansionOrders { radial: 24, degree: None }
    }
}

impl ExpansionOrders {
    pub fn max_degree(&self) -> u32 {
        self.degree.unwrap_or(self.radial)
    }
}

/// `ρ^{rho_power} Σ_{n,d} (regular[n,d] + log(ρ) · log_rho[n,d]) (r/ρ)^n C^{(λ)}_d(cos)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GegenExpansion {
    pub lambda: HalfInt,
    pub rho_power: i64,
    pub orders: ExpansionOrders,
    regular: BTreeMap<(u32, u32), SymbolicCoeff>,
    log_rho: BTreeMap<(u32, u32), SymbolicCoeff>,
}

impl GegenExpansion {
    fn empty(lambda: HalfInt, rho_power: i64, orders: ExpansionOrders) -> Self {
        GegenExpansion { lambda, rho_power, orders, regular: BTreeMap::new(), log_rho: BTreeMap::new() }
    }

    pub fn regular(&self) -> &BTreeMap<(u32, u32), SymbolicCoeff> {
        &self.regular
    }

    pub fn log_rho(&self) -> &BTreeMap<(u32, u32), SymbolicCoeff> {
        &self.log_rho
    }

    pub fn entry(&self, radial: u32, degree: u32) -> SymbolicCoeff {
        self.regular.get(&(radial, degree)).cloned().unwrap_or_default()
    }

    pub fn log_entry(&self, radial: u32, degree: u32) -> SymbolicCoeff {
        self.log_rho.get(&(radial, degree)).cloned().unwrap_or_default()
    }

    fn insert(map: &mut BTreeMap<(u32, u32), SymbolicCoeff>, key: (u32, u32), c: &SymbolicCoeff) {
        if c.is_zero() {
            return;
        }
        let e = map.entry(key).or_default();
        *e += c;
        if e.is_zero() {
            map.remove(&key);
        }
    }

    /// Adds `c · combo` at radial order `n`, dropping degrees above the truncation.
    fn add_combo(map: &mut BTreeMap<(u32, u32), SymbolicCoeff>, n: u32, combo: &GegenCombo, c: &SymbolicCoeff, max_deg: u32) {
        for (d, a) in combo.coeffs() {
            if *d <= max_deg {
                Self::insert(map, (n, *d), &c.scale(a));
            }
        }
    }

    pub fn scale(&self, c: &SymbolicCoeff) -> Self {
        let mut out = Self::empty(self.lambda, self.rho_power, self.orders);
        for (k, v) in &self.regular {
            Self::insert(&mut out.regular, *k, &(v * c));
        }
        for (k, v) in &self.log_rho {
            Self::insert(&mut out.log_rho, *k, &(v * c));
        }
        out
    }

    /// Sum of two expansions with the same weight, `ρ` power and truncation.
    pub fn add(&self, other: &GegenExpansion) -> Result<Self> {
        if self.lambda != other.lambda || self.rho_power != other.rho_power || self.orders != other.orders {
            return Err(invalid("expansions differ in weight, rho power or truncation"));
        }
        let mut out = self.clone();
        for (k, v) in &other.regular {
            Self::insert(&mut out.regular, *k, v);
        }
        for (k, v) in &other.log_rho {
            Self::insert(&mut out.log_rho, *k, v);
        }
        Ok(out)
    }

    /// Every π exponent occurring in any entry.
    pub fn pi_exponents(&self) -> Vec<HalfInt> {
        self.regular.values().chain(self.log_rho.values()).flat_map(|c| c.pi_exponents()).collect()
    }

    /// Numeric value of the truncated series; `r/ρ` must be below 1.
    pub fn eval(&self, geom: &EdgeGeometry, m: f64) -> Result<f64> {
        let t = geom.ratio();
        if t >= 1.0 {
            return Err(Error::DivergentRatio(t));
        }
        let b = SymbolBinding::mass(m);
        let cvals = gegenbauer_values(self.lambda.to_f64(), self.orders.max_degree(), geom.cos);
        let log_rho = geom.rho.ln();
        let mut sum = 0.0;
        for ((n, d), c) in &self.regular {
            sum += c.eval(&b) * t.powi(*n as i32) * cvals[*d as usize];
        }
        for ((n, d), c) in &self.log_rho {
            sum += log_rho * c.eval(&b) * t.powi(*n as i32) * cvals[*d as usize];
        }
        Ok(geom.rho.powi(self.rho_power as i32) * sum)
    }

    /// Partial sums over radial orders `0..=n` for each `n`.
    pub fn partial_sums(&self, geom: &EdgeGeometry, m: f64) -> Result<Vec<f64>> {
        let t = geom.ratio();
        if t >= 1.0 {
            return Err(Error::DivergentRatio(t));
        }
        let b = SymbolBinding::mass(m);
        let cvals = gegenbauer_values(self.lambda.to_f64(), self.orders.max_degree(), geom.cos);
        let log_rho = geom.rho.ln();
        let mut per_order = vec![0.0; self.orders.radial as usize + 1];
        for ((n, d), c) in &self.regular {
            per_order[*n as usize] += c.eval(&b) * t.powi(*n as i32) * cvals[*d as usize];
        }
        for ((n, d), c) in &self.log_rho {
            per_order[*n as usize] += log_rho * c.eval(&b) * t.powi(*n as i32) * cvals[*d as usize];
        }
        let scale = geom.rho.powi(self.rho_power as i32);
        let mut acc = 0.0;
        Ok(per_order
            .into_iter()
            .map(|v| {
                acc += v;
                acc * scale
            })
            .collect())
    }

    /// Re-expands the Gegenbauer polynomials into powers of the cosine:
    /// `(regular, log_rho)` keyed by `(power of r/ρ, power of cos)`.
    pub fn to_bivariate(&self) -> Result<(BivariateSeries, BivariateSeries)> {
        let mut cache: HashMap<u32, ExactPoly> = HashMap::new();
        let mut convert = |map: &BTreeMap<(u32, u32), SymbolicCoeff>| -> Result<BivariateSeries> {
            let mut out = BivariateSeries::new();
            for ((n, d), c) in map {
                if !cache.contains_key(d) {
                    cache.insert(*d, gegenbauer_coeffs(PolySpec::gegenbauer(self.lambda, *d))?);
                }
                for (k, a) in cache[d].coeffs().iter().enumerate() {
                    Self::insert(&mut out, (*n, k as u32), &c.scale(a));
                }
            }
            Ok(out)
        };
        let regular = convert(&self.regular)?;
        let log_rho = convert(&self.log_rho)?;
        Ok((regular, log_rho))
    }

    /// Rows of the coefficient tensor for serialization.
    pub fn table(&self) -> Vec<ExpansionRow> {
        let rows = |part: &'static str, map: &BTreeMap<(u32, u32), SymbolicCoeff>| {
            map.iter()
                .map(move |((n, d), c)| ExpansionRow { part: part.to_string(), radial: *n, degree: *d, coeff: c.clone() })
                .collect::<Vec<_>>()
        };
        let mut out = rows("regular", &self.regular);
        out.extend(rows("log_rho", &self.log_rho));
        out
    }
}

/// Coefficients keyed by `(power of r/ρ, power of cos)`.
pub type BivariateSeries = BTreeMap<(u32, u32), SymbolicCoeff>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub part: String,
    pub radial: u32,
    pub degree: u32,
    pub coeff: SymbolicCoeff,
}

#[derive(Serialize, Deserialize)]
struct ExpansionTable {
    lambda: HalfInt,
    rho_power: i64,
    radial_order: u32,
    degree_order: u32,
    rows: Vec<ExpansionRow>,
}

impl Serialize for GegenExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExpansionTable {
            lambda: self.lambda,
            rho_power: self.rho_power,
            radial_order: self.orders.radial,
            degree_order: self.orders.max_degree(),
            rows: self.table(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GegenExpansion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = ExpansionTable::deserialize(d)?;
        let orders = ExpansionOrders { radial: t.radial_order, degree: Some(t.degree_order) };
        let mut out = GegenExpansion::empty(t.lambda, t.rho_power, orders);
        for row in t.rows {
            let map = match row.part.as_str() {
                "regular" => &mut out.regular,
                "log_rho" => &mut out.log_rho,
                other => return Err(serde::de::Error::custom(format!("unknown part {other:?}"))),
            };
            GegenExpansion::insert(map, (row.radial, row.degree), &row.coeff);
        }
        Ok(out)
    }
}

fn check_weight(lambda: HalfInt) -> Result<()> {
    if lambda < HalfInt::HALF {
        return Err(invalid(format!("Gegenbauer weight must be at least 1/2, got {lambda}")));
    }
    Ok(())
}

/// `‖x_s - x_t‖^{-2k}` for `k > 0` (half-integers allowed), or the polynomial
/// `‖x_s - x_t‖^{2|k|}` for integer `k ≤ 0`.
pub fn radial_power_expansion(k: HalfInt, lambda: HalfInt, orders: ExpansionOrders) -> Result<GegenExpansion> {
    check_weight(lambda)?;
    let mut out = GegenExpansion::empty(lambda, -k.twice(), orders);
    let max_deg = orders.max_degree();
    let one = SymbolicCoeff::one();
    if k.is_positive() {
        if k < HalfInt::HALF {
            return Err(invalid(format!("power weight must be at least 1/2, got {k}")));
        }
        for n in 0..=orders.radial {
            let combo = reproject_gegenbauer(k, n, lambda)?;
            GegenExpansion::add_combo(&mut out.regular, n, &combo, &one, max_deg);
        }
        return Ok(out);
    }
    let ell = (-k)
        .as_int()
        .ok_or_else(|| invalid(format!("non-positive power weights must be integers, got {k}")))?;
    for (n, combo) in polynomial_part(ell as u64, lambda)?.iter().enumerate() {
        if n as u32 <= orders.radial {
            GegenExpansion::add_combo(&mut out.regular, n as u32, combo, &one, max_deg);
        }
    }
    Ok(out)
}

/// `Q_n` with `(1 - 2tc + t²)^ℓ = Σ_n Q_n(c) t^n`, in the `C^{(λ)}` basis.
fn polynomial_part(ell: u64, lambda: HalfInt) -> Result<Vec<GegenCombo>> {
    let mut q: Vec<ExactPoly> = vec![ExactPoly::zero(); 2 * ell as usize + 1];
    for j in 0..=ell {
        // binom(ℓ,j) (-2c)^j t^j · Σ_i binom(ℓ-j, i) t^{2i}
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let cj = BigRational::from_integer(binomial(ell, j) * BigInt::from(sign) * BigInt::from(2).pow(j as u32));
        for i in 0..=(ell - j) {
            let c = &cj * BigRational::from_integer(binomial(ell - j, i));
            let n = (j + 2 * i) as usize;
            q[n] = &q[n] + &ExactPoly::monomial(j as usize, ExactScalar::rational(c));
        }
    }
    q.iter().map(|p| poly_to_gegenbauer(p, lambda)).collect()
}

/// `‖x_s - x_t‖^{2ℓ} log ‖x_s - x_t‖` for integer `ℓ ≥ 0`.
pub fn radial_log_expansion(ell: u32, lambda: HalfInt, orders: ExpansionOrders) -> Result<GegenExpansion> {
    check_weight(lambda)?;
    let mut out = GegenExpansion::empty(lambda, 2 * ell as i64, orders);
    let max_deg = orders.max_degree();
    let one = SymbolicCoeff::one();
    let q = polynomial_part(ell as u64, lambda)?;
    let cheb: Vec<GegenCombo> =
        (1..=orders.radial).map(|p| chebyshev_to_gegenbauer(p, lambda)).collect::<Result<_>>()?;
    let mut products: HashMap<(u32, u32), GegenCombo> = HashMap::new();
    for (n, qn) in q.iter().enumerate() {
        let n = n as u32;
        if n > orders.radial {
            break;
        }
        GegenExpansion::add_combo(&mut out.log_rho, n, qn, &one, max_deg);
        for p in 1..=(orders.radial - n) {
            let tp = &cheb[p as usize - 1];
            let mut prod = GegenCombo::zero(lambda);
            for (d1, a1) in qn.coeffs() {
                for (d2, a2) in tp.coeffs() {
                    let key = (*d1.min(d2), *d1.max(d2));
                    if let std::collections::hash_map::Entry::Vacant(e) = products.entry(key) {
                        e.insert(product_linearize(key.0, key.1, lambda)?);
                    }
                    prod.add_scaled(&products[&key], &(a1 * a2));
                }
            }
            let c = SymbolicCoeff::constant(ExactScalar::rational(rat(-1, p as i64)));
            GegenExpansion::add_combo(&mut out.regular, n + p, &prod, &c, max_deg);
        }
    }
    Ok(out)
}

/// Expansion of one small-distance term `B β` of an edge factor at weight `λ`.
pub fn edge_gegenbauer_expansion(
    term: TaylorTermSpec,
    lambda: HalfInt,
    mass: MassParam,
    orders: ExpansionOrders,
) -> Result<GegenExpansion> {
    let coeff = taylor_term_coefficient(term, lambda, mass)?;
    match term.branch {
        TaylorBranch::Pole => Ok(radial_power_expansion(-term.ell, lambda, orders)?.scale(&coeff.const_part)),
        TaylorBranch::Log => {
            let ell = term.ell.as_int().expect("validated") as u32;
            let log = radial_log_expansion(ell, lambda, orders)?.scale(&coeff.log_part);
            let pow = radial_power_expansion(-term.ell, lambda, orders)?.scale(&coeff.const_part);
            log.add(&pow)
        }
    }
}
