//! Euclidean propagators on `R^D` and `C^D`.
//!
//! Conventions: `λ = (D-2)/2`, and the massive real propagator is
//! `G_{m,D}(x) = (2π)^{-D/2} m^{D-2} (m‖x‖)^{-λ} K_λ(m‖x‖)`, the kernel of
//! `1/(m² + ‖k‖²)`. The Dirac and vector-boson propagators use the kernel at
//! mass `√m`, i.e. the inverse of `‖k‖² + m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specfun::gamma::gamma_half;
use crate::specfun::{bessel_k, BesselEvalConfig, HalfInt};

/// Dimension, separation vector and mass.
///
/// For the complex propagators `x` is a point of `C^D` given either by its
/// `2D` real coordinates or, for real points, by `D` coordinates; only `‖x‖` enters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub dim: u32,
    pub x: Vec<f64>,
    pub mass: f64,
}

impl Kinematics {
    pub fn new(dim: u32, x: Vec<f64>, mass: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(invalid(format!("mass must be finite and non-negative, got {mass}")));
        }
        Ok(Kinematics { dim, x, mass })
    }

    /// The point `(r, 0, …, 0)` of `R^D`.
    pub fn radial(dim: u32, r: f64, mass: f64) -> Result<Self> {
        let mut x = vec![0.0; dim as usize];
        if let Some(first) = x.first_mut() {
            *first = r;
        }
        Self::new(dim, x, mass)
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn lambda(&self) -> f64 {
        (self.dim as f64 - 2.0) / 2.0
    }

    fn real_norm(&self) -> Result<f64> {
        if self.dim < 3 {
            return Err(invalid(format!("real propagators need D >= 3, got {}", self.dim)));
        }
        if self.x.len() != self.dim as usize {
            return Err(invalid(format!("expected {} coordinates, got {}", self.dim, self.x.len())));
        }
        self.off_diagonal()
    }

    fn complex_norm(&self) -> Result<f64> {
        if self.dim < 2 {
            return Err(invalid(format!("complex propagators need D >= 2, got {}", self.dim)));
        }
        let d = self.dim as usize;
        if self.x.len() != d && self.x.len() != 2 * d {
            return Err(invalid(format!("expected {d} or {} coordinates, got {}", 2 * d, self.x.len())));
        }
        self.off_diagonal()
    }

    fn off_diagonal(&self) -> Result<f64> {
        let r = self.norm();
        if r == 0.0 {
            return Err(Error::Diagonal);
        }
        Ok(r)
    }

    fn massive(&self) -> Result<f64> {
        if !(self.mass > 0.0) {
            return Err(invalid("massive propagator needs m > 0"));
        }
        Ok(self.mass)
    }
}

/// `‖x‖^{2-D}`.
pub fn g0_real(k: &Kinematics) -> Result<f64> {
    let r = k.real_norm()?;
    Ok(r.powf(2.0 - k.dim as f64))
}

/// The `m → 0` limit of `G_{m,D}` is `massless_normalization(D) · ‖x‖^{2-D}`,
/// with `massless_normalization(D) = (2π)^{-(λ+1)} Γ(λ) 2^{λ-1}`.
pub fn massless_normalization(dim: u32) -> Result<f64> {
    if dim < 3 {
        return Err(invalid(format!("need D >= 3, got {dim}")));
    }
    let lam = HalfInt::from_twice(dim as i64 - 2);
    let gamma = gamma_half(lam).expect("λ > 0").to_f64();
    let l = lam.to_f64();
    Ok((2.0 * PI).powf(-(l + 1.0)) * gamma * 2f64.powf(l - 1.0))
}

/// `G_{m,D}(x) = (2π)^{-D/2} m^{D-2} (m‖x‖)^{-λ} K_λ(m‖x‖)`.
pub fn gm_real(k: &Kinematics, cfg: &BesselEvalConfig) -> Result<f64> {
    let r = k.real_norm()?;
    let m = k.massive()?;
    radial_kernel(k.dim as f64, m, r, cfg)
}

fn radial_kernel(dim: f64, m: f64, r: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    let nu = (dim - 2.0) / 2.0;
    let z = m * r;
    Ok((2.0 * PI).powf(-dim / 2.0) * m.powf(dim - 2.0) * z.powf(-nu) * bessel_k(nu, z, cfg)?)
}

/// Trapezoid-rule settings for [`gm_integral`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralConfig {
    /// Relative change between successive halvings that counts as converged.
    pub target: f64,
    pub initial_nodes: usize,
    pub max_halvings: u32,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        IntegralConfig { target: 1e-13, initial_nodes: 64, max_halvings: 12 }
    }
}

/// `(4π)^{-D/2} ∫_0^∞ t^{-D/2} e^{-t m² - ‖x‖²/(4t)} dt`, as a trapezoid sum in `u = log t`.
pub fn gm_integral(k: &Kinematics, quad: &IntegralConfig) -> Result<f64> {
    let r = k.real_norm()?;
    let m = k.massive()?;
    if !(quad.target > 0.0) || quad.initial_nodes < 2 {
        return Err(invalid("integral config needs target > 0 and at least two nodes"));
    }
    let d = k.dim as f64;
    let (m2, q) = (m * m, r * r / 4.0);
    // log of the integrand in u, including the Jacobian e^u
    let log_f = |u: f64| (1.0 - d / 2.0) * u - m2 * u.exp() - q * (-u).exp();
    // the maximum solves (1 - D/2) = m² e^u - q e^{-u}
    let a = 1.0 - d / 2.0;
    let s = (a + (a * a + 4.0 * m2 * q).sqrt()) / (2.0 * m2);
    let u0 = s.ln();
    let peak = log_f(u0);
    let cutoff = peak - 60.0;
    let mut lo = u0 - 1.0;
    while log_f(lo) > cutoff {
        lo -= 0.5;
    }
    let mut hi = u0 + 1.0;
    while log_f(hi) > cutoff {
        hi += 0.5;
    }
    let f = |u: f64| (log_f(u) - peak).exp();
    let mut n = quad.initial_nodes;
    let mut h = (hi - lo) / n as f64;
    let mut sum = 0.5 * (f(lo) + f(hi)) + (1..n).map(|i| f(lo + i as f64 * h)).sum::<f64>();
    let mut prev = sum * h;
    let mut estimate = f64::INFINITY;
    for _ in 0..quad.max_halvings {
        // add the midpoints of the current grid
        sum += (0..n).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>();
        n *= 2;
        h /= 2.0;
        let cur = sum * h;
        estimate = ((cur - prev) / cur).abs();
        prev = cur;
        if estimate < quad.target {
            return Ok((4.0 * PI).powf(-d / 2.0) * peak.exp() * cur);
        }
    }
    Err(Error::NonConvergence { estimate, target: quad.target })
}

/// A real magnitude times the unit phase `sign · i^{i_power}`, `i_power ∈ {0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasedValue {
    pub magnitude: f64,
    pub sign: i8,
    pub i_power: u8,
}

impl PhasedValue {
    /// `sign · i^p · magnitude` with the phase folded into `{±1, ±i}`.
    pub fn new(magnitude: f64, sign: i8, i_power: u32) -> Self {
        let p = i_power % 4;
        let flip = if p >= 2 { -1 } else { 1 };
        PhasedValue { magnitude, sign: sign * flip, i_power: (p % 2) as u8 }
    }

    /// `(re, im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let v = self.sign as f64 * self.magnitude;
        if self.i_power == 0 {
            (v, 0.0)
        } else {
            (0.0, v)
        }
    }
}

/// `-(D-2)!/(2πi)^D ‖x‖^{2-2D}`, with the phase `-i^{-D}` kept exact.
pub fn g0_complex(k: &Kinematics) -> Result<PhasedValue> {
    let r = k.complex_norm()?;
    let d = k.dim;
    let fact: f64 = (1..=d.saturating_sub(2)).map(|i| i as f64).product();
    let magnitude = fact / (2.0 * PI).powi(d as i32) * r.powf(2.0 - 2.0 * d as f64);
    Ok(PhasedValue::new(magnitude, -1, (4 - d % 4) % 4))
}

/// `(2π)^{-D} m^{D-1} ‖x‖^{-(D-1)} K_{D-1}(m‖x‖)`: the real kernel at dimension `2D`.
pub fn gm_complex(k: &Kinematics, cfg: &BesselEvalConfig) -> Result<f64> {
    let r = k.complex_norm()?;
    let m = k.massive()?;
    let d = k.dim as f64;
    Ok((2.0 * PI).powf(-d) * m.powf(d - 1.0) * r.powf(-(d - 1.0)) * bessel_k(d - 1.0, m * r, cfg)?)
}

/// Value at `D = 2λ+2`, `x = 0` of the analytic continuation in `D`:
/// `(4π)^{-D/2} m^{D-2} Γ(1-D/2)`, finite for odd `D`.
pub fn diag_continuation(dim: u32, m: f64) -> Result<f64> {
    if dim.is_multiple_of(2) {
        return Err(invalid(format!("the diagonal value diverges for even D = {dim}")));
    }
    if !(m > 0.0) {
        return Err(invalid("mass must be positive"));
    }
    let g = gamma_half(HalfInt::from_twice(2 - dim as i64)).expect("half-integers are regular").to_f64();
    let d = dim as f64;
    Ok((4.0 * PI).powf(-d / 2.0) * m.powf(d - 2.0) * g)
}

/// Central-difference estimate of `ΔG - m²G` at `x`, with `Δ = Σ ∂_i²`.
///
/// With `G` the kernel of `1/(m² + ‖k‖²)` this vanishes away from the origin.
/// For `m = 0` the massless kernel `‖x‖^{2-D}` is used.
pub fn helmholtz_residual(k: &Kinematics, h: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    let r = k.real_norm()?;
    if !(h > 0.0) || h >= r / 10.0 {
        return Err(invalid(format!("step {h} must be positive and below |x|/10 = {}", r / 10.0)));
    }
    let eval = |x: &[f64]| -> Result<f64> {
        let p = Kinematics { dim: k.dim, x: x.to_vec(), mass: k.mass };
        if k.mass == 0.0 {
            g0_real(&p)
        } else {
            gm_real(&p, cfg)
        }
    };
    let g = eval(&k.x)?;
    let mut lap = 0.0;
    let mut y = k.x.clone();
    for i in 0..y.len() {
        let xi = y[i];
        y[i] = xi + h;
        let plus = eval(&y)?;
        y[i] = xi - h;
        let minus = eval(&y)?;
        y[i] = xi;
        lap += (plus - 2.0 * g + minus) / (h * h);
    }
    Ok(lap - k.mass * k.mass * g)
}

/// `(f, f', f'')` in `r` for `f = G_{M,D}` as a radial function.
pub fn radial_derivatives(dim: u32, mass: f64, r: f64, cfg: &BesselEvalConfig) -> Result<(f64, f64, f64)> {
    let nu = (dim as f64 - 2.0) / 2.0;
    let z = mass * r;
    let kk = |order: f64| bessel_k(order.abs(), z, cfg);
    let k0 = kk(nu)?;
    // K' = -(K_{ν-1} + K_{ν+1})/2,  K'' = (K_{ν-2} + 2K_ν + K_{ν+2})/4
    let k1 = -(kk(nu - 1.0)? + kk(nu + 1.0)?) / 2.0;
    let k2 = (kk(nu - 2.0)? + 2.0 * k0 + kk(nu + 2.0)?) / 4.0;
    let a = (2.0 * PI).powf(-(dim as f64) / 2.0) * mass.powf(nu);
    let f = a * r.powf(-nu) * k0;
    let f1 = a * (-nu * r.powf(-nu - 1.0) * k0 + mass * r.powf(-nu) * k1);
    let f2 = a * (nu * (nu + 1.0) * r.powf(-nu - 2.0) * k0 - 2.0 * nu * mass * r.powf(-nu - 1.0) * k1
        + mass * mass * r.powf(-nu) * k2);
    Ok((f, f1, f2))
}

/// Coefficients of `S_{m,D}(x) = a · iγ^μ x_μ + b · 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracCoeffs {
    pub a: f64,
    pub b: f64,
}

/// `S_{m,D} = (-i∂̸ + m) G_{√m,D}`, so `a = -G'(r)/r` and `b = m G`.
pub fn dirac_propagator(k: &Kinematics, cfg: &BesselEvalConfig) -> Result<DiracCoeffs> {
    let r = k.real_norm()?;
    let m = k.massive()?;
    if !k.dim.is_multiple_of(2) || k.dim < 4 {
        return Err(invalid(format!("Dirac propagator needs D = 2λ+2 with integer λ >= 1, got D = {}", k.dim)));
    }
    let (g, g1, _) = radial_derivatives(k.dim, m.sqrt(), r, cfg)?;
    Ok(DiracCoeffs { a: -g1 / r, b: m * g })
}

/// `∂_μ ∂_ν f(‖x‖) = δ_{μν} f'/r + x_μ x_ν/r² (f'' - f'/r)`.
fn hessian_entry(x: &[f64], r: f64, f1: f64, f2: f64, mu: usize, nu: usize) -> f64 {
    let delta = if mu == nu { f1 / r } else { 0.0 };
    delta + x[mu] * x[nu] / (r * r) * (f2 - f1 / r)
}

/// `Δ^{μν} = g_{μν} G_{√m,D} + m^{-2} (∂_μ∂_ν G_{√(m/α),D} - ∂_μ∂_ν G_{√m,D})`.
pub fn boson_propagator(k: &Kinematics, alpha: f64, mu: usize, nu: usize, cfg: &BesselEvalConfig) -> Result<f64> {
    let r = k.real_norm()?;
    let m = k.massive()?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("gauge parameter must be positive, got {alpha}")));
    }
    if mu >= k.x.len() || nu >= k.x.len() {
        return Err(invalid(format!("indices ({mu}, {nu}) out of range for D = {}", k.dim)));
    }
    let (g, g1, g2) = radial_derivatives(k.dim, m.sqrt(), r, cfg)?;
    let metric = if mu == nu { g } else { 0.0 };
    if alpha == 1.0 {
        return Ok(metric);
    }
    let (_, h1, h2) = radial_derivatives(k.dim, (m / alpha).sqrt(), r, cfg)?;
    let diff = hessian_entry(&k.x, r, h1, h2, mu, nu) - hessian_entry(&k.x, r, g1, g2, mu, nu);
    Ok(metric + diff / (m * m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> BesselEvalConfig {
        BesselEvalConfig::default()
    }

    #[test]
    fn massless_examples() {
        assert_eq!(g0_real(&Kinematics::radial(4, 1.0, 0.0).unwrap()).unwrap(), 1.0);
        assert_eq!(g0_real(&Kinematics::radial(4, 2.0, 0.0).unwrap()).unwrap(), 0.25);
        assert_eq!(g0_real(&Kinematics::radial(6, 2.0, 0.0).unwrap()).unwrap(), 1.0 / 16.0);
        assert_eq!(g0_real(&Kinematics::radial(4, 0.0, 0.0).unwrap()), Err(Error::Diagonal));
    }

    #[test]
    fn three_dimensional_closed_form() {
        for &(m, r) in &[(1.0, 1.0), (0.5, 3.0), (2.0, 0.25)] {
            let g = gm_real(&Kinematics::radial(3, r, m).unwrap(), &cfg()).unwrap();
            let want = (-m * r).exp() / (4.0 * PI * r);
            assert!(((g - want) / want).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_matches_closed_form() {
        let v = gm_integral(&Kinematics::radial(3, 1.0, 1.0).unwrap(), &IntegralConfig::default()).unwrap();
        let want = (-1.0f64).exp() / (4.0 * PI);
        assert!(((v - want) / want).abs() < 1e-12);
    }

    #[test]
    fn integral_reports_non_convergence() {
        let quad = IntegralConfig { target: 1e-30, initial_nodes: 4, max_halvings: 2 };
        let err = gm_integral(&Kinematics::radial(4, 1.0, 1.0).unwrap(), &quad).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn complex_phase() {
        // D = 2: -(0!)/(2πi)² = 1/(2π)²
        let v = g0_complex(&Kinematics::radial(2, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!((v.sign, v.i_power), (1, 0));
        assert!((v.magnitude - 1.0 / (4.0 * PI * PI)).abs() < 1e-16);
        // D = 3: -1/(2πi)³ = -i/(2π)³
        let v = g0_complex(&Kinematics::radial(3, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!((v.sign, v.i_power), (-1, 1));
    }

    #[test]
    fn complex_is_real_formula_in_twice_the_dimension() {
        for d in 2..5u32 {
            let c = gm_complex(&Kinematics::radial(d, 0.7, 1.3).unwrap(), &cfg()).unwrap();
            let r = gm_real(&Kinematics::radial(2 * d, 0.7, 1.3).unwrap(), &cfg()).unwrap();
            assert!(((c - r) / r).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_continuation_odd_only() {
        let v = diag_continuation(3, 2.0).unwrap();
        // (4π)^{-3/2} · 2 · Γ(-1/2) = -m/(4π)
        assert!((v + 2.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(diag_continuation(4, 1.0).is_err());
    }

    #[test]
    fn boson_rejects_bad_gauge() {
        let k = Kinematics::radial(4, 1.0, 1.0).unwrap();
        assert!(boson_propagator(&k, 0.0, 0, 0, &cfg()).is_err());
        assert!(boson_propagator(&k, 2.0, 0, 4, &cfg()).is_err());
    }
}
