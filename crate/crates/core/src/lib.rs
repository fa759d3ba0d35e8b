//! Exact special-function scalars, Gegenbauer expansions and massive propagators
//! for configuration-space Feynman amplitudes.

// Input guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod amplitude;
pub mod error;
pub mod gegenbauer;
pub mod propagators;
pub mod specfun;

pub use error::{Error, Result};
