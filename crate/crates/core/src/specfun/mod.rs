//! Special functions: exact Γ/ψ at half-integers and numeric `K_ν`.

pub mod bessel;
pub mod exact;
pub mod gamma;
pub mod symbolic;

pub use bessel::{bessel_k, bessel_k_integral, BesselEvalConfig, QuadratureConfig};
pub use exact::{ExactScalar, HalfInt};
pub use gamma::{asym_coeff, digamma_exact, gamma_exact};
pub use symbolic::{SymbolBinding, SymbolicCoeff};
