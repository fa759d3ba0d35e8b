//! Γ and ψ at integers and half-integers, in closed form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::exact::{factorial, rat, ExactScalar, HalfInt};
use super::symbolic::SymbolicCoeff;
use crate::error::{invalid, Result};

/// Γ(z) for any integer or half-integer `z`; `None` at the poles `z ∈ {0, -1, -2, …}`.
pub fn gamma_half(z: HalfInt) -> Option<ExactScalar> {
    let t = z.twice();
    if t % 2 == 0 {
        let n = t / 2;
        if n <= 0 {
            return None;
        }
        return Some(ExactScalar::rational(BigRational::from_integer(factorial(n as u64 - 1))));
    }
    // z = n + 1/2
    let n = (t - 1) / 2;
    let sqrt_pi = ExactScalar::pi_pow(HalfInt::HALF);
    let q = if n >= 0 {
        // (2n)! / (4^n n!)
        let n = n as u64;
        BigRational::new(factorial(2 * n), BigInt::from(4).pow(n as u32) * factorial(n))
    } else {
        // Γ(1/2 - k) = (-4)^k k! / (2k)!
        let k = (-n) as u64;
        BigRational::new(BigInt::from(-4).pow(k as u32) * factorial(k), factorial(2 * k))
    };
    Some(sqrt_pi.scale(&q))
}

/// 1/Γ(z), zero at the poles.
pub fn rgamma_half(z: HalfInt) -> ExactScalar {
    match gamma_half(z) {
        Some(g) => g.inv().expect("Γ at a half-integer is a monomial"),
        None => ExactScalar::zero(),
    }
}

/// Γ(z) for positive integer or half-integer `z`.
pub fn gamma_exact(z: HalfInt) -> Result<ExactScalar> {
    if !z.is_positive() {
        return Err(invalid(format!("gamma_exact needs z > 0, got {z}")));
    }
    Ok(gamma_half(z).expect("positive arguments are regular"))
}

/// Γ(a)/Γ(b) when both are regular.
pub fn gamma_ratio(a: HalfInt, b: HalfInt) -> Option<ExactScalar> {
    gamma_half(a)?.checked_div(&gamma_half(b)?)
}

/// ψ(z) for positive integer or half-integer `z`, as a polynomial in γ and log 2.
///
/// Integers: `ψ(n) = H_{n-1} - γ`. Half-integers: `ψ(n+1/2) = -γ - 2 log 2 + Σ_{k=1}^n 2/(2k-1)`.
pub fn digamma_exact(z: HalfInt) -> Result<SymbolicCoeff> {
    if !z.is_positive() {
        return Err(invalid(format!("digamma_exact needs z > 0, got {z}")));
    }
    let t = z.twice();
    let mut out = -SymbolicCoeff::euler_gamma();
    let mut harmonic = BigRational::zero();
    if t % 2 == 0 {
        for k in 1..t / 2 {
            harmonic += rat(1, k);
        }
    } else {
        let n = (t - 1) / 2;
        for k in 1..=n {
            harmonic += rat(2, 2 * k - 1);
        }
        out = &out - &SymbolicCoeff::log2().scale_rational(&rat(2, 1));
    }
    out += &SymbolicCoeff::constant(ExactScalar::rational(harmonic));
    Ok(out)
}

/// The large-argument Bessel coefficient `(ν,ℓ) = Γ(ν+ℓ+1/2) / (ℓ! Γ(ν-ℓ+1/2))`.
///
/// A pole of the denominator Γ gives a zero coefficient; this truncates the
/// series for half-integer `ν`.
pub fn asym_coeff(nu: HalfInt, ell: u32) -> Result<ExactScalar> {
    let num_arg = nu + HalfInt::from_int(ell as i64) + HalfInt::HALF;
    let den_arg = nu - HalfInt::from_int(ell as i64) + HalfInt::HALF;
    let num = gamma_half(num_arg)
        .ok_or_else(|| invalid(format!("Γ({num_arg}) is a pole in (ν,ℓ) for ν = {nu}")))?;
    let inv_fact = BigRational::new(BigInt::one(), factorial(ell as u64));
    Ok((&num * &rgamma_half(den_arg)).scale(&inv_fact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_exact(HalfInt::from_int(4)).unwrap(), ExactScalar::int(6));
        assert_eq!(gamma_exact(h(1)).unwrap(), ExactScalar::pi_pow(HalfInt::HALF));
        let five_halves = ExactScalar::pi_pow(HalfInt::HALF).scale(&rat(3, 4));
        assert_eq!(gamma_exact(h(5)).unwrap(), five_halves);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma_exact(HalfInt::ZERO).is_err());
        assert!(gamma_exact(h(-1)).is_err());
    }

    #[test]
    fn gamma_negative_half_integers() {
        // Γ(-1/2) = -2√π
        let g = gamma_half(h(-1)).unwrap();
        assert_eq!(g, ExactScalar::pi_pow(HalfInt::HALF).scale(&rat(-2, 1)));
        assert!(gamma_half(HalfInt::from_int(-2)).is_none());
        assert!(rgamma_half(HalfInt::ZERO).is_zero());
    }

    #[test]
    fn functional_equation_to_twenty() {
        for t in 1..=40 {
            let z = h(t);
            let lhs = gamma_exact(z + HalfInt::ONE).unwrap();
            let rhs = gamma_exact(z).unwrap().scale(&z.to_rational());
            assert_eq!(lhs, rhs, "z = {z}");
        }
    }

    #[test]
    fn duplication_formula() {
        // Γ(z)Γ(z+1/2) = 2^{1-2z} √π Γ(2z), z = 1..10
        for n in 1..=10i64 {
            let z = HalfInt::from_int(n);
            let lhs = &gamma_exact(z).unwrap() * &gamma_exact(z + HalfInt::HALF).unwrap();
            let two_pow = BigRational::new(BigInt::one(), BigInt::from(2).pow((2 * n - 1) as u32));
            let rhs = (&ExactScalar::pi_pow(HalfInt::HALF) * &gamma_exact(HalfInt::from_int(2 * n)).unwrap())
                .scale(&two_pow);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn digamma_examples() {
        assert_eq!(digamma_exact(HalfInt::ONE).unwrap(), -SymbolicCoeff::euler_gamma());
        let three = SymbolicCoeff::ratio(3, 2) - SymbolicCoeff::euler_gamma();
        assert_eq!(digamma_exact(HalfInt::from_int(3)).unwrap(), three);
        let half = -SymbolicCoeff::euler_gamma() - SymbolicCoeff::log2().scale_rational(&rat(2, 1));
        assert_eq!(digamma_exact(HalfInt::HALF).unwrap(), half);
    }

    #[test]
    fn digamma_recurrence() {
        for t in 1..=40 {
            let z = h(t);
            let lhs = digamma_exact(z + HalfInt::ONE).unwrap();
            let inv = SymbolicCoeff::constant(ExactScalar::rational(z.to_rational().recip()));
            assert_eq!(lhs, &digamma_exact(z).unwrap() + &inv, "z = {z}");
        }
    }

    #[test]
    fn asym_coeff_examples() {
        for t in 0..6 {
            assert!(asym_coeff(h(t), 0).unwrap().is_one());
        }
        assert_eq!(asym_coeff(HalfInt::ONE, 1).unwrap(), ExactScalar::ratio(3, 4));
        assert!(asym_coeff(HalfInt::HALF, 1).unwrap().is_zero());
        // (0,1) = Γ(3/2)/Γ(-1/2) = -1/4
        assert_eq!(asym_coeff(HalfInt::ZERO, 1).unwrap(), ExactScalar::ratio(-1, 4));
    }
}
