//! Hartree-Fock for small molecules with orbitals kept as Gaussian mixtures.
//!
//! Every operator maps mixtures to mixtures: products and convolutions of
//! Gaussians stay Gaussian, and a skeleton reduction keeps the term count
//! in check after each step that would otherwise grow it.

// `!(x > 0.0)` rejects NaN on purpose; tabulated constants keep every digit.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
mod dd;
pub mod dump;
pub mod error;
pub mod gaussian;
pub mod kernel;
pub mod molecule;
pub mod operators;
pub mod reduction;
pub mod scf;

pub use error::{Error, Result};
pub use gaussian::{GaussianMixture, GaussianTerm, Point};
pub use kernel::{KernelExpansion, RadialKernel};
pub use molecule::{MoleculeSpec, Nucleus};
pub use reduction::{GroupKey, GroupingConfig, PivotRule};
