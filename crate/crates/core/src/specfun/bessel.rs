//! Modified Bessel function of the second kind `K_ν(z)` for real `ν ≥ 0`, `z > 0`.
//!
//! Branches, in order of precedence:
//! - `z ≥ crossover`: large-argument expansion `√(π/2z) e^{-z} Σ (ν,ℓ)/(2z)^ℓ`,
//!   truncated at its smallest term;
//! - half-integer `ν`: the terminating form of the same expansion (exact);
//! - `z ≤ 2`, integer `ν`: the convergent log series
//!   `½ Σ_{ℓ<ν} (-1)^ℓ (ν-ℓ-1)!/ℓ! (z/2)^{2ℓ-ν} + (-1)^{ν+1} Σ_ℓ (z/2)^{ν+2ℓ}/(ℓ!(ν+ℓ)!) (log(z/2) - (ψ(ℓ+1)+ψ(ν+ℓ+1))/2)`;
//! - `z ≤ 2`, other `ν`: Temme's series for `K_μ, K_{μ+1}` (`|μ| ≤ 1/2`) and upward recurrence;
//! - `2 < z < crossover`: Steed's continued fraction for `K_μ, K_{μ+1}` and upward recurrence.
//!
//! [`bessel_k_integral`] evaluates `∫_0^∞ e^{-z cosh t} cosh(νt) dt` by the
//! trapezoid rule and shares no code with the branches above.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::symbolic::EULER_GAMMA;
use crate::error::{invalid, Result};

const EPS: f64 = 1e-16;
const TEMME_CROSSOVER: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Trapezoid nodes on `[0, truncation]`.
    pub nodes: usize,
    /// Upper limit of the `t` integral; `None` picks it from the integrand decay.
    pub truncation: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 4000, truncation: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselEvalConfig {
    /// Iteration cap for the convergent series and continued fraction.
    pub series_terms: usize,
    /// Term cap for the large-argument expansion.
    pub asymptotic_terms: usize,
    /// Switch to the large-argument expansion at this `z`; `None` means `max(10, 2ν²)`.
    pub crossover_z: Option<f64>,
    pub quadrature: QuadratureConfig,
}

impl Default for BesselEvalConfig {
    fn default() -> Self {
        BesselEvalConfig {
            series_terms: 500,
            asymptotic_terms: 100,
            crossover_z: None,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl BesselEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.series_terms == 0 {
            return Err(invalid("series_terms must be at least 1"));
        }
        if let Some(c) = self.crossover_z {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid(format!("crossover_z must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn crossover(&self, nu: f64) -> f64 {
        self.crossover_z.unwrap_or_else(|| f64::max(10.0, 2.0 * nu * nu))
    }
}

fn check_args(nu: f64, z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(invalid(format!("K_nu(z) needs finite z > 0, got z = {z}")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(invalid(format!("K_nu(z) needs finite nu >= 0, got nu = {nu}")));
    }
    Ok(())
}

/// `K_ν(z)` with the branch selection described in the module docs.
pub fn bessel_k(nu: f64, z: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    check_args(nu, z)?;
    cfg.validate()?;
    if z >= cfg.crossover(nu) {
        return Ok(bessel_k_asymptotic(nu, z, cfg.asymptotic_terms));
    }
    bessel_k_convergent(nu, z, cfg)
}

/// Everything except the large-argument branch; used on both sides of the crossover.
pub fn bessel_k_convergent(nu: f64, z: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    check_args(nu, z)?;
    if is_half_odd(nu) {
        return Ok(bessel_k_half_integer(nu, z));
    }
    if z <= TEMME_CROSSOVER && nu == nu.round() {
        return Ok(bessel_k_log_series(nu as u32, z, cfg.series_terms));
    }
    Ok(bessel_k_temme(nu, z, cfg.series_terms))
}

fn is_half_odd(nu: f64) -> bool {
    let t = 2.0 * nu;
    t == t.round() && (t as i64) % 2 != 0
}

/// Partial sum of the large-argument expansion, stopping before the terms grow.
pub fn bessel_k_asymptotic(nu: f64, z: f64, max_terms: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..max_terms {
        let k = (2 * l - 1) as f64;
        let next = term * (mu - k * k) / (8.0 * z * l as f64);
        if next == 0.0 {
            break;
        }
        if next.abs() > term.abs() {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

/// Exact finite form for `ν = n + 1/2`.
fn bessel_k_half_integer(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let n = (nu - 0.5).round() as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..=n {
        let k = (2 * l - 1) as f64;
        term *= (mu - k * k) / (8.0 * z * l as f64);
        sum += term;
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

/// The convergent log series for integer order.
pub fn bessel_k_log_series(n: u32, z: f64, max_terms: usize) -> f64 {
    let half = 0.5 * z;
    let n_us = n as usize;
    let mut finite = 0.0;
    if n > 0 {
        // ½ Σ_{k<n} (-1)^k (n-k-1)!/k! (z/2)^{2k-n}
        let mut fact_a: f64 = (1..n_us).map(|i| i as f64).product(); // (n-1)!
        let mut fact_b = 1.0; // k!
        for k in 0..n_us {
            if k > 0 {
                fact_a /= (n_us - k) as f64;
                fact_b *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            finite += sign * fact_a / fact_b * half.powi(2 * k as i32 - n as i32);
        }
        finite *= 0.5;
    }
    let log_half = half.ln();
    let mut psi_a = -EULER_GAMMA; // ψ(k+1)
    let mut psi_b = -EULER_GAMMA + (1..=n_us).map(|i| 1.0 / i as f64).sum::<f64>(); // ψ(n+k+1)
    let mut pow = half.powi(n as i32) / (1..=n_us).map(|i| i as f64).product::<f64>();
    let mut series = 0.0;
    for k in 0..max_terms {
        if k > 0 {
            psi_a += 1.0 / k as f64;
            psi_b += 1.0 / (n_us + k) as f64;
            pow *= half * half / (k as f64 * (n_us + k) as f64);
        }
        let term = pow * (log_half - 0.5 * (psi_a + psi_b));
        series += term;
        if term.abs() < EPS * series.abs() && k > 2 {
            break;
        }
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    finite + sign * series
}

/// Taylor coefficients of 1/Γ(z) about 0 (c_1 … c_26).
const RGAMMA_SERIES: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `(γ1, γ2, 1/Γ(1+μ), 1/Γ(1-μ))` for `|μ| ≤ 1/2`, where
/// `γ1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / 2μ` and `γ2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+x) = Σ_k c_{k+1} x^k
    let mut even = 0.0;
    let mut odd = 0.0;
    for (k, c) in RGAMMA_SERIES.iter().enumerate().rev() {
        if k % 2 == 0 {
            even = even * mu * mu + c;
        } else {
            odd = odd * mu * mu + c;
        }
    }
    // f(x) = even(x²) + x·odd(x²)
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

/// Temme's series below `z = 2`, Steed's continued fraction above, then upward recurrence.
fn bessel_k_temme(nu: f64, z: f64, max_iter: usize) -> f64 {
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = 1.0 / z;
    let xi2 = 2.0 * xi;
    let (mut k_mu, mut k_mu1);
    if z < TEMME_CROSSOVER {
        let x2 = 0.5 * z;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..=max_iter {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        k_mu = sum;
        k_mu1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + z);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..=max_iter {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        k_mu = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
        k_mu1 = k_mu * (mu + z + 0.5 - h) * xi;
    }
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    k_mu
}

/// `K_ν(z) = ∫_0^∞ e^{-z cosh t} cosh(νt) dt` by the trapezoid rule.
pub fn bessel_k_integral(nu: f64, z: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_args(nu, z)?;
    if quad.nodes < 2 {
        return Err(invalid("quadrature needs at least two nodes"));
    }
    // Work with e^{z} K_ν(z) to keep the integrand O(1) near t = 0.
    let log_integrand = |t: f64| -z * (t.cosh() - 1.0) + nu * t;
    let upper = quad.truncation.unwrap_or_else(|| {
        let mut t = 0.0;
        while log_integrand(t) > -46.0 || t < 1.0 {
            t += 0.01;
        }
        t
    });
    let h = upper / (quad.nodes - 1) as f64;
    let f = |t: f64| 0.5 * ((log_integrand(t)).exp() + (-z * (t.cosh() - 1.0) - nu * t).exp());
    let mut sum = 0.5 * (f(0.0) + f(upper));
    for i in 1..quad.nodes - 1 {
        sum += f(i as f64 * h);
    }
    Ok(sum * h * (-z).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_form() {
        let cfg = BesselEvalConfig::default();
        let v = bessel_k(0.5, 1.0, &cfg).unwrap();
        let exact = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!(rel(v, exact) < 1e-15);
    }

    #[test]
    fn rejects_non_positive_argument() {
        let cfg = BesselEvalConfig::default();
        assert!(bessel_k(1.0, 0.0, &cfg).is_err());
        assert!(bessel_k(1.0, -2.0, &cfg).is_err());
        assert!(bessel_k(-1.0, 2.0, &cfg).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = BesselEvalConfig { series_terms: 0, ..Default::default() };
        assert!(bessel_k(1.0, 1.0, &cfg).is_err());
        let cfg = BesselEvalConfig { crossover_z: Some(-1.0), ..Default::default() };
        assert!(bessel_k(1.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn temme_and_log_series_agree_for_integer_order() {
        for n in 0..4u32 {
            for &z in &[0.05, 0.3, 1.0, 1.9] {
                let a = bessel_k_log_series(n, z, 500);
                let b = bessel_k_temme(n as f64, z, 500);
                assert!(rel(a, b) < 1e-13, "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn wronskian_like_recurrence() {
        // K_{ν+1}(z) - K_{ν-1}(z) = (2ν/z) K_ν(z)
        let cfg = BesselEvalConfig::default();
        for &nu in &[1.0, 1.3, 2.5, 3.0] {
            for &z in &[0.4, 3.0, 12.0] {
                let lhs = bessel_k(nu + 1.0, z, &cfg).unwrap() - bessel_k(nu - 1.0, z, &cfg).unwrap();
                let rhs = 2.0 * nu / z * bessel_k(nu, z, &cfg).unwrap();
                assert!(rel(lhs, rhs) < 1e-10, "nu={nu} z={z}");
            }
        }
    }
}
