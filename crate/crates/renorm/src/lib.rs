//! Renormalization on the Connes–Kreimer Hopf algebra of Feynman graphs.
//!
//! Graphs and their subgraph combinatorics live in [`feyngraph`], the Hopf
//! algebra in [`hopf`], the weight `-1` Rota–Baxter targets in [`rotabaxter`]
//! and the factorization of characters in [`birkhoff`].

pub mod birkhoff;
pub mod error;
pub mod feyngraph;
pub mod hopf;
pub mod rotabaxter;

pub use error::{RenormError, Result};
