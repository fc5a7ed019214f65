//! Spectral computations for the chiral model of twisted bilayer graphene
//! with a constant in-plane magnetic field B = B₀e^{2πiθ}.
//!
//! The crate finds magic angles through the Birman-Schwinger characterization,
//! locates and tracks Dirac points of the non-normal operator D_B(α) as the
//! coupling α and the field B vary, computes Bloch bands of the chiral
//! Hamiltonian, and extracts the perturbation constants (g₀, g₁, c₁) and the
//! bifurcation laws governing how Dirac points merge at the Γ point and at
//! the Brillouin-zone edge midpoint.

pub mod analysis;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod potential;
pub mod spectral;
pub mod theta;

pub use error::{Error, Result};
