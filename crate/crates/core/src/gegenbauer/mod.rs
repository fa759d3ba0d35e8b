//! Exact Gegenbauer and Chebyshev polynomials.
//!
//! `C_n^{(λ)}(x) = Σ_k (-1)^k (λ)_{n-k} / (k! (n-2k)!) (2x)^{n-2k}`, so for
//! integer or half-integer `λ` every coefficient is rational. Conversions
//! between bases go through monomials.

mod poly;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use poly::ExactPoly;

use crate::error::{invalid, Result};
use crate::specfun::exact::{binomial, factorial, pochhammer, rat, rat_int};
use crate::specfun::gamma::rgamma_half;
use crate::specfun::{ExactScalar, HalfInt};

/// Selects `C_n^{(λ)}`, or `T_n` when `chebyshev` is set (the `λ → 0` limit).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolySpec {
    pub lambda: HalfInt,
    pub n: u32,
    #[serde(default)]
    pub chebyshev: bool,
}

impl PolySpec {
    pub fn gegenbauer(lambda: HalfInt, n: u32) -> Self {
        PolySpec { lambda, n, chebyshev: false }
    }

    pub fn chebyshev(n: u32) -> Self {
        PolySpec { lambda: HalfInt::ZERO, n, chebyshev: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.chebyshev && !self.lambda.is_positive() {
            return Err(invalid(format!("Gegenbauer weight must be positive, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// A finite combination `Σ_k a_k C_k^{(λ)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GegenCombo {
    pub lambda: HalfInt,
    coeffs: BTreeMap<u32, ExactScalar>,
}

impl GegenCombo {
    pub fn zero(lambda: HalfInt) -> Self {
        GegenCombo { lambda, coeffs: BTreeMap::new() }
    }

    pub fn single(lambda: HalfInt, n: u32, c: ExactScalar) -> Self {
        let mut out = Self::zero(lambda);
        out.add_term(n, &c);
        out
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, ExactScalar> {
        &self.coeffs
    }

    pub fn coeff(&self, n: u32) -> ExactScalar {
        self.coeffs.get(&n).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, n: u32, c: &ExactScalar) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(n).or_default();
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    /// `self += c · other`; both must share the weight.
    pub fn add_scaled(&mut self, other: &GegenCombo, c: &ExactScalar) {
        debug_assert_eq!(self.lambda, other.lambda);
        for (n, a) in &other.coeffs {
            self.add_term(*n, &(a * c));
        }
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        let mut out = Self::zero(self.lambda);
        out.add_scaled(self, c);
        out
    }

    /// The monomial form of the combination.
    pub fn expand(&self) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (n, a) in &self.coeffs {
            let p = gegenbauer_coeffs(PolySpec::gegenbauer(self.lambda, *n)).expect("weight validated at construction");
            out = &out + &p.scale(a);
        }
        out
    }

    /// Numeric value at `x` via the three-term recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let max = self.coeffs.keys().next_back().copied().unwrap_or(0);
        let vals = gegenbauer_values(self.lambda.to_f64(), max, x);
        self.coeffs.iter().map(|(n, a)| a.to_f64() * vals[*n as usize]).sum()
    }
}

fn require_weight(lambda: HalfInt) -> Result<BigRational> {
    if lambda < HalfInt::HALF {
        return Err(invalid(format!("weight must be at least 1/2, got {lambda}")));
    }
    Ok(lambda.to_rational())
}

/// Monomial coefficients of `C_n^{(λ)}(x)` (or `T_n(x)` for the Chebyshev flag).
pub fn gegenbauer_coeffs(spec: PolySpec) -> Result<ExactPoly> {
    spec.validate()?;
    let n = spec.n as u64;
    if spec.chebyshev {
        return Ok(chebyshev_poly(spec.n));
    }
    let lam = spec.lambda.to_rational();
    let mut coeffs = vec![ExactScalar::zero(); n as usize + 1];
    for k in 0..=n / 2 {
        let p = n - 2 * k;
        let mut q = pochhammer(&lam, n - k) * BigRational::from_integer(BigInt::from(2).pow(p as u32));
        q /= BigRational::from_integer(factorial(k) * factorial(p));
        if k % 2 == 1 {
            q = -q;
        }
        coeffs[p as usize] = ExactScalar::rational(q);
    }
    Ok(ExactPoly::from_coeffs(coeffs))
}

/// `T_n` via `T_{n+1} = 2x T_n - T_{n-1}`.
pub fn chebyshev_poly(n: u32) -> ExactPoly {
    let two_x = ExactPoly::monomial(1, ExactScalar::int(2));
    let (mut prev, mut cur) = (ExactPoly::one(), ExactPoly::x());
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = &(&two_x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `n`-th Taylor coefficient in `t` of `(1 - 2tx + t²)^{-λ}`, from the binomial series
/// `Σ_k (λ)_k/k! t^k (2x - t)^k`.
///
/// The alternating sum cancels badly near `|x| = 1`, so it is accumulated in
/// exact rationals (`λ` and `x` are taken at their binary values).
pub fn generating_series_coeff(lambda: f64, n: u32, x: f64) -> f64 {
    let (Some(lq), Some(xq)) = (BigRational::from_float(lambda), BigRational::from_float(x)) else {
        return f64::NAN;
    };
    let two_x = &xq + &xq;
    let n = n as u64;
    let mut sum = BigRational::zero();
    // (λ)_k / k!
    let mut rising = BigRational::one();
    for k in 0..=n {
        if k > 0 {
            rising = rising * (&lq + rat_int(k as i64 - 1)) / rat_int(k as i64);
        }
        let j = n - k;
        if j > k {
            continue;
        }
        let mut term = &rising * BigRational::from_integer(binomial(k, j)) * num_traits::pow(two_x.clone(), (k - j) as usize);
        if j % 2 == 1 {
            term = -term;
        }
        sum += term;
    }
    sum.to_f64().unwrap_or(f64::NAN)
}

/// `C_0^{(λ)}(x), …, C_n^{(λ)}(x)` numerically.
pub fn gegenbauer_values(lambda: f64, n: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(2.0 * lambda * x);
    }
    for k in 2..=n as usize {
        let kf = k as f64;
        let v = (2.0 * x * (kf + lambda - 1.0) * out[k - 1] - (kf + 2.0 * lambda - 2.0) * out[k - 2]) / kf;
        out.push(v);
    }
    out
}

/// `x^m = m!/2^m Σ_k (m-2k+λ) / (k! (λ)_{m-k+1}) C^{(λ)}_{m-2k}(x)`.
pub fn monomial_to_gegenbauer(m: u32, lambda: HalfInt) -> Result<GegenCombo> {
    let lam = require_weight(lambda)?;
    let m64 = m as u64;
    let pre = BigRational::new(factorial(m64), BigInt::from(2).pow(m));
    let mut out = GegenCombo::zero(lambda);
    for k in 0..=m64 / 2 {
        let deg = m64 - 2 * k;
        let num = rat_int(deg as i64) + &lam;
        let den = BigRational::from_integer(factorial(k)) * pochhammer(&lam, m64 - k + 1);
        out.add_term(deg as u32, &ExactScalar::rational(&pre * num / den));
    }
    Ok(out)
}

/// Re-expands a monomial polynomial in the `C^{(λ)}` basis.
pub fn poly_to_gegenbauer(p: &ExactPoly, lambda: HalfInt) -> Result<GegenCombo> {
    require_weight(lambda)?;
    let mut out = GegenCombo::zero(lambda);
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        out.add_scaled(&monomial_to_gegenbauer(k as u32, lambda)?, c);
    }
    Ok(out)
}

/// `T_n = Σ_m c^λ_{n,m} C^{(λ)}_m`.
pub fn chebyshev_to_gegenbauer(n: u32, lambda: HalfInt) -> Result<GegenCombo> {
    poly_to_gegenbauer(&chebyshev_poly(n), lambda)
}

/// `C^{(ℓ)}_n` in the `C^{(λ)}` basis.
pub fn reproject_gegenbauer(ell: HalfInt, n: u32, lambda: HalfInt) -> Result<GegenCombo> {
    require_weight(ell)?;
    require_weight(lambda)?;
    if ell == lambda {
        return Ok(GegenCombo::single(lambda, n, ExactScalar::one()));
    }
    poly_to_gegenbauer(&gegenbauer_coeffs(PolySpec::gegenbauer(ell, n))?, lambda)
}

/// `C_n^{(λ)} C_m^{(λ)} = Σ_k a_k C^{(λ)}_{n+m-2k}` with Dougall's coefficients
/// `a_k = (n+m+λ-2k)/(n+m+λ-k) · (λ)_k (λ)_{n-k} (λ)_{m-k} (2λ)_{n+m-k}
///        / (k! (n-k)! (m-k)! (λ)_{n+m-k}) · (n+m-2k)!/(2λ)_{n+m-2k}`.
pub fn product_linearize(n: u32, m: u32, lambda: HalfInt) -> Result<GegenCombo> {
    let lam = require_weight(lambda)?;
    let two_lam = &lam + &lam;
    let (n, m) = (n as u64, m as u64);
    let mut out = GegenCombo::zero(lambda);
    for k in 0..=n.min(m) {
        let s = n + m - 2 * k;
        let mut a = (rat_int(s as i64) + &lam) / (rat_int((n + m - k) as i64) + &lam);
        a *= pochhammer(&lam, k) * pochhammer(&lam, n - k) * pochhammer(&lam, m - k);
        a *= pochhammer(&two_lam, n + m - k);
        a /= BigRational::from_integer(factorial(k) * factorial(n - k) * factorial(m - k));
        a /= pochhammer(&lam, n + m - k);
        a *= BigRational::from_integer(factorial(s));
        a /= pochhammer(&two_lam, s);
        out.add_term(s as u32, &ExactScalar::rational(a));
    }
    Ok(out)
}

/// `c_{D,n} = Vol(S^{D-1}) (D-2)/(2n+D-2)`, `Vol(S^{D-1}) = 2π^{D/2}/Γ(D/2)`.
pub fn zonal_coefficient(dim: u32, n: u32) -> Result<ExactScalar> {
    if dim < 3 {
        return Err(invalid(format!("zonal coefficient needs D >= 3, got {dim}")));
    }
    let half_d = HalfInt::from_twice(dim as i64);
    let vol = (&ExactScalar::pi_pow(half_d) * &rgamma_half(half_d)).scale(&rat_int(2));
    Ok(vol.scale(&rat(dim as i64 - 2, 2 * n as i64 + dim as i64 - 2)))
}

/// `(T_n(x), (n/2) C_n^{(ε)}(x)/ε)`; the second tends to the first as `ε → 0`.
pub fn chebyshev_limit_check(n: u32, x: f64, eps_lambda: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(invalid("the limit formula needs n >= 1"));
    }
    if !(eps_lambda > 0.0) {
        return Err(invalid("eps_lambda must be positive"));
    }
    let t = chebyshev_poly(n).eval(x);
    let c = gegenbauer_values(eps_lambda, n, x)[n as usize];
    Ok((t, n as f64 / 2.0 * c / eps_lambda))
}

/// `∫_{-1}^{1} C_n C_m (1-x²)^{λ-1/2} dx` for `n = m`:
/// `π 2^{1-2λ} Γ(n+2λ) / (n! (n+λ) Γ(λ)²)`.
pub fn orthogonality_norm(lambda: f64, n: u32) -> f64 {
    let lg = ln_gamma_half;
    let n_f = n as f64;
    let log = std::f64::consts::PI.ln() + (1.0 - 2.0 * lambda) * std::f64::consts::LN_2 + lg(n_f + 2.0 * lambda)
        - lg(n_f + 1.0)
        - (n_f + lambda).ln()
        - 2.0 * lg(lambda);
    log.exp()
}

/// `log Γ(v)` for `v > 0`, exact at integers and half-integers.
fn ln_gamma_half(v: f64) -> f64 {
    let h = HalfInt::from_f64(v).expect("orthogonality weights are half-integers");
    crate::specfun::gamma_exact(h).expect("positive argument").to_f64().ln()
}

impl GegenCombo {
    pub fn is_one_term(&self) -> Option<(u32, &ExactScalar)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(k, v)| (*k, v))
        } else {
            None
        }
    }

    pub fn is_identity_at(&self, n: u32) -> bool {
        self.is_one_term().is_some_and(|(k, v)| k == n && v.is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn poly(c: &[(i64, i64)]) -> ExactPoly {
        ExactPoly::from_coeffs(c.iter().map(|&(n, d)| ExactScalar::ratio(n, d)).collect())
    }

    #[test]
    fn explicit_coefficients() {
        assert_eq!(gegenbauer_coeffs(PolySpec::gegenbauer(lam(3), 0)).unwrap(), ExactPoly::one());
        assert_eq!(gegenbauer_coeffs(PolySpec::gegenbauer(lam(2), 2)).unwrap(), poly(&[(-1, 1), (0, 1), (4, 1)]));
        assert_eq!(gegenbauer_coeffs(PolySpec::gegenbauer(lam(1), 2)).unwrap(), poly(&[(-1, 2), (0, 1), (3, 2)]));
        assert!(gegenbauer_coeffs(PolySpec::gegenbauer(HalfInt::ZERO, 2)).is_err());
        assert_eq!(gegenbauer_coeffs(PolySpec::chebyshev(3)).unwrap(), poly(&[(0, 1), (-3, 1), (0, 1), (4, 1)]));
    }

    #[test]
    fn generating_series_examples() {
        assert_eq!(generating_series_coeff(0.7, 0, 0.3), 1.0);
        assert!(generating_series_coeff(1.0, 2, 0.5).abs() < 1e-15);
        assert!((generating_series_coeff(0.5, 1, 0.37) - 0.37).abs() < 1e-15);
    }

    #[test]
    fn monomial_examples() {
        assert!(monomial_to_gegenbauer(0, lam(5)).unwrap().is_identity_at(0));
        let one = monomial_to_gegenbauer(1, lam(2)).unwrap();
        assert_eq!(one, GegenCombo::single(lam(2), 1, ExactScalar::ratio(1, 2)));
        let two = monomial_to_gegenbauer(2, lam(2)).unwrap();
        assert_eq!(two.coeff(2), ExactScalar::ratio(1, 4));
        assert_eq!(two.coeff(0), ExactScalar::ratio(1, 4));
        assert!(monomial_to_gegenbauer(2, lam(0)).is_err());
    }

    #[test]
    fn chebyshev_examples() {
        assert!(chebyshev_to_gegenbauer(0, lam(3)).unwrap().is_identity_at(0));
        assert_eq!(chebyshev_to_gegenbauer(1, lam(2)).unwrap(), GegenCombo::single(lam(2), 1, ExactScalar::ratio(1, 2)));
        let t2 = chebyshev_to_gegenbauer(2, lam(2)).unwrap();
        assert_eq!(t2.coeff(2), ExactScalar::ratio(1, 2));
        assert_eq!(t2.coeff(0), ExactScalar::ratio(-1, 2));
    }

    #[test]
    fn reprojection_examples() {
        assert!(reproject_gegenbauer(lam(3), 4, lam(3)).unwrap().is_identity_at(4));
        assert_eq!(reproject_gegenbauer(lam(4), 1, lam(2)).unwrap(), GegenCombo::single(lam(2), 1, ExactScalar::int(2)));
        let r = reproject_gegenbauer(lam(4), 2, lam(2)).unwrap();
        assert_eq!(r.expand(), gegenbauer_coeffs(PolySpec::gegenbauer(lam(4), 2)).unwrap());
    }

    #[test]
    fn linearization_examples() {
        assert!(product_linearize(0, 3, lam(3)).unwrap().is_identity_at(3));
        let p = product_linearize(1, 1, lam(2)).unwrap();
        assert_eq!(p.coeff(2), ExactScalar::one());
        assert_eq!(p.coeff(0), ExactScalar::one());
        let q = product_linearize(1, 1, lam(1)).unwrap();
        assert_eq!(q.coeff(2), ExactScalar::ratio(2, 3));
        assert_eq!(q.coeff(0), ExactScalar::ratio(1, 3));
    }

    #[test]
    fn zonal_examples() {
        let pi = ExactScalar::pi_pow(HalfInt::ONE);
        assert_eq!(zonal_coefficient(3, 0).unwrap(), pi.scale(&rat_int(4)));
        assert_eq!(zonal_coefficient(4, 0).unwrap(), ExactScalar::pi_pow(HalfInt::from_int(2)).scale(&rat_int(2)));
        assert_eq!(zonal_coefficient(3, 1).unwrap(), pi.scale(&rat(4, 3)));
        assert!(zonal_coefficient(2, 0).is_err());
    }

    #[test]
    fn chebyshev_limit_examples() {
        for &(n, x, want) in &[(1u32, 0.3, 0.3), (2, 1.0, 1.0), (3, 0.5, -1.0)] {
            let (t, lim) = chebyshev_limit_check(n, x, 1e-6).unwrap();
            assert!((t - want).abs() < 1e-12);
            assert!((lim - want).abs() < 1e-5);
        }
    }
}
