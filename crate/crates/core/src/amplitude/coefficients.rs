//! Per-edge coefficients of the small- and large-distance expansions of `G_{m,D}`.
//!
//! Writing `ν` for the Bessel order (`λ` in the real case, `D-1` in the complex
//! case) and `ℓ = ν + ℓ_e`:
//!
//! - pole terms, `ℓ_e ∈ {-ν, …, -1}`, multiply `‖x‖^{2ℓ_e}` with
//!   `(2π)^{-(ν+1)} (-1)^ℓ m^{2ℓ} 2^{ν-2ℓ-1} (ν-ℓ-1)!/ℓ!`;
//! - log terms, `ℓ_e ≥ 0`, are `P ‖x‖^{2ℓ_e} (log(m‖x‖/2) - (ψ(ℓ_e+1)+ψ(ν+ℓ_e+1))/2)` with
//!   `P = (-1)^{ν+1} (2π)^{-(ν+1)} m^{2(ν+ℓ_e)} / (2^{ν+2ℓ_e} ℓ_e! (ν+ℓ_e)!)`;
//! - asymptotic terms multiply `e^{-m‖x‖} ‖x‖^{-(ℓ+ν+1/2)}` with
//!   `√(π/2) (2π)^{-(ν+1)} (ν,ℓ) 2^{-ℓ} m^{ν-ℓ-1/2}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::specfun::exact::{factorial, rat};
use crate::specfun::gamma::gamma_half;
use crate::specfun::symbolic::SymbolBinding;
use crate::specfun::{asym_coeff, digamma_exact, ExactScalar, HalfInt, SymbolicCoeff};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaylorBranch {
    /// `‖x‖^{2ℓ_e}`, `ℓ_e < 0`.
    Pole,
    /// `‖x‖^{2ℓ_e}` times `log` and constant parts, `ℓ_e ≥ 0`.
    Log,
}

/// One index `ℓ_e` of the small-distance expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaylorTermSpec {
    pub ell: HalfInt,
    pub branch: TaylorBranch,
}

impl TaylorTermSpec {
    pub fn new(ell: i64) -> Self {
        let branch = if ell < 0 { TaylorBranch::Pole } else { TaylorBranch::Log };
        TaylorTermSpec { ell: HalfInt::from_int(ell), branch }
    }

    /// The single singular term `‖x‖^{-2ν}`, also available for half-integer `ν`.
    pub fn leading(order: HalfInt) -> Self {
        TaylorTermSpec { ell: -order, branch: TaylorBranch::Pole }
    }

    /// Checks the index range for Bessel order `order`.
    pub fn validate(&self, order: HalfInt) -> Result<()> {
        if !order.is_positive() {
            return Err(invalid(format!("Bessel order must be positive, got {order}")));
        }
        match self.branch {
            TaylorBranch::Pole => {
                if self.ell == -order {
                    return Ok(());
                }
                if !order.is_integer() {
                    return Err(invalid(format!(
                        "for half-integer order {order} only the leading term ℓ = {} is available",
                        -order
                    )));
                }
                if !self.ell.is_integer() || self.ell >= HalfInt::ZERO || self.ell < -order {
                    return Err(invalid(format!("pole index must lie in [-{order}, -1], got {}", self.ell)));
                }
            }
            TaylorBranch::Log => {
                if !order.is_integer() {
                    return Err(invalid(format!("the log branch needs an integer order, got {order}")));
                }
                if !self.ell.is_integer() || self.ell < HalfInt::ZERO {
                    return Err(invalid(format!("log index must be a non-negative integer, got {}", self.ell)));
                }
            }
        }
        Ok(())
    }
}

/// Whether `m` stays a symbol or is set to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassParam {
    #[default]
    Symbolic,
    Zero,
}

/// `log_part · ‖x‖^{exponent} log‖x‖ + const_part · ‖x‖^{exponent}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficient {
    pub exponent: i64,
    pub log_part: SymbolicCoeff,
    pub const_part: SymbolicCoeff,
}

impl TaylorCoefficient {
    pub fn eval(&self, m: f64, r: f64) -> f64 {
        let b = SymbolBinding::mass(m);
        let p = r.powi(self.exponent as i32);
        p * (self.const_part.eval(&b) + self.log_part.eval(&b) * r.ln())
    }
}

/// `(2π)^{-e}`.
pub(crate) fn two_pi_neg_pow(e: HalfInt) -> SymbolicCoeff {
    SymbolicCoeff::pow2(-e).scale(&ExactScalar::pi_pow(-e))
}

fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn mass_pow(e: HalfInt, mass: MassParam) -> SymbolicCoeff {
    match mass {
        MassParam::Symbolic => SymbolicCoeff::mass_pow(e),
        MassParam::Zero if e == HalfInt::ZERO => SymbolicCoeff::one(),
        MassParam::Zero => SymbolicCoeff::zero(),
    }
}

/// Exact coefficient of one small-distance term at Bessel order `order`.
pub fn taylor_term_coefficient(term: TaylorTermSpec, order: HalfInt, mass: MassParam) -> Result<TaylorCoefficient> {
    term.validate(order)?;
    let pre = two_pi_neg_pow(order + HalfInt::ONE);
    // ‖x‖^{2ℓ_e}
    let exponent = term.ell.twice();
    match term.branch {
        TaylorBranch::Pole if !order.is_integer() => {
            // Γ(ν) 2^{ν-1}
            let g = gamma_half(order).expect("positive order");
            let c = (&pre * &SymbolicCoeff::pow2(order - HalfInt::ONE)).scale(&g);
            Ok(TaylorCoefficient { exponent, log_part: SymbolicCoeff::zero(), const_part: c })
        }
        TaylorBranch::Pole => {
            let nu = order.as_int().expect("integer order");
            let ell = nu + term.ell.as_int().expect("integer index");
            let q = BigRational::new(
                BigInt::from(sign(ell)) * factorial((nu - ell - 1) as u64),
                factorial(ell as u64),
            );
            let c = (&pre * &SymbolicCoeff::pow2(HalfInt::from_int(nu - 2 * ell - 1)))
                .scale_rational(&q);
            let c = &c * &mass_pow(HalfInt::from_int(2 * ell), mass);
            Ok(TaylorCoefficient { exponent, log_part: SymbolicCoeff::zero(), const_part: c })
        }
        TaylorBranch::Log => {
            let nu = order.as_int().expect("integer order");
            let l = term.ell.as_int().expect("integer index");
            let q = BigRational::new(BigInt::from(sign(nu + 1)), factorial(l as u64) * factorial((nu + l) as u64));
            let p = (&pre * &SymbolicCoeff::pow2(HalfInt::from_int(-(nu + 2 * l)))).scale_rational(&q);
            let p = &p * &mass_pow(HalfInt::from_int(2 * (nu + l)), mass);
            let psi = &digamma_exact(HalfInt::from_int(l + 1))? + &digamma_exact(HalfInt::from_int(nu + l + 1))?;
            let bracket = &(&SymbolicCoeff::log_m() - &SymbolicCoeff::log2()) - &psi.scale_rational(&rat(1, 2));
            let const_part = &p * &bracket;
            Ok(TaylorCoefficient { exponent, log_part: p, const_part })
        }
    }
}

/// All pole terms and the first `log_terms` log terms at integer order.
pub fn taylor_terms(order: HalfInt, log_terms: u32, mass: MassParam) -> Result<Vec<(TaylorTermSpec, TaylorCoefficient)>> {
    let Some(nu) = order.as_int() else {
        let t = TaylorTermSpec::leading(order);
        return Ok(vec![(t, taylor_term_coefficient(t, order, mass)?)]);
    };
    (-nu..log_terms as i64)
        .map(|l| {
            let t = TaylorTermSpec::new(l);
            taylor_term_coefficient(t, order, mass).map(|c| (t, c))
        })
        .collect()
}

/// Truncated small-distance sum of `G` at Bessel order `order` (integer).
pub fn taylor_eval(order: HalfInt, m: f64, r: f64, log_terms: u32) -> Result<f64> {
    if !order.is_integer() {
        return Err(invalid(format!("the small-distance expansion needs an integer order, got {order}")));
    }
    if !(r > 0.0) {
        return Err(crate::Error::Diagonal);
    }
    Ok(taylor_terms(order, log_terms, MassParam::Symbolic)?
        .iter()
        .map(|(_, c)| c.eval(m, r))
        .sum())
}

/// `coeff · e^{-m‖x‖} ‖x‖^{exponent}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCoefficient {
    pub ell: u32,
    pub exponent: HalfInt,
    pub coeff: SymbolicCoeff,
}

impl AsymptoticCoefficient {
    pub fn eval(&self, m: f64, r: f64) -> f64 {
        self.coeff.eval(&SymbolBinding::mass(m)) * (-m * r).exp() * r.powf(self.exponent.to_f64())
    }
}

/// `√(π/2) (2π)^{-(ν+1)} (ν,ℓ) 2^{-ℓ} m^{ν-ℓ-1/2}` with exponent `-(ℓ+ν+1/2)`.
pub fn asymptotic_term_coefficient(ell: u32, order: HalfInt) -> Result<AsymptoticCoefficient> {
    if order < HalfInt::ZERO {
        return Err(invalid(format!("Bessel order must be non-negative, got {order}")));
    }
    let l = HalfInt::from_int(ell as i64);
    let sqrt_pi_half = SymbolicCoeff::pow2(-HalfInt::HALF).scale(&ExactScalar::pi_pow(HalfInt::HALF));
    let c = &(&sqrt_pi_half * &two_pi_neg_pow(order + HalfInt::ONE)) * &SymbolicCoeff::pow2(-l);
    let c = c.scale(&asym_coeff(order, ell)?);
    let c = &c * &SymbolicCoeff::mass_pow(order - l - HalfInt::HALF);
    Ok(AsymptoticCoefficient { ell, exponent: -(l + order + HalfInt::HALF), coeff: c })
}

/// Sum of the first `terms` large-distance terms.
pub fn asymptotic_eval(order: HalfInt, m: f64, r: f64, terms: u32) -> Result<f64> {
    if !(r > 0.0) {
        return Err(crate::Error::Diagonal);
    }
    if !(m > 0.0) {
        return Err(invalid("the large-distance expansion needs m > 0"));
    }
    let mut sum = 0.0;
    for l in 0..terms {
        sum += asymptotic_term_coefficient(l, order)?.eval(m, r);
    }
    Ok(sum)
}
