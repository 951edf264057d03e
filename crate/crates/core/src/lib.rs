//! Additive functionals of independent symmetric random walks.

pub mod cli;
pub mod enumeration;
pub mod error;
pub mod lattice;
pub mod model;
pub mod occupation;
pub mod poisson;
pub mod rates;
pub mod rng;
pub mod simulate;
pub mod special;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
pub use model::{ModelKind, WalkModel};
