//! Non-equilibrium steady states of the driven-dissipative transverse-field
//! anisotropic XY chain.
//!
//! The chain of `N` two-level systems evolves under
//!
//! ```text
//! H = -Σ_j [ g σᶻ_j + (1+Δ)/2 σˣ_j σˣ_{j+1} + (1-Δ)/2 σʸ_j σʸ_{j+1} ]
//! dρ/dt = -i[H, ρ] + κ Σ_j ( 2σ⁻_j ρ σ⁺_j - σ⁺_j σ⁻_j ρ - ρ σ⁺_j σ⁻_j )
//! ```
//!
//! with all energies in units of the hopping `J = 1` and open boundaries.
//!
//! Modules:
//! - [`model`]: parameters, Pauli algebra, bond generators, sublattice duality.
//! - [`mpo`]: matrix-product-operator density matrix and Trotterized evolution.
//! - [`oracle`]: exact Liouvillian and steady state for short chains.
//! - [`correlations`]: negativity, geometric discord, X-state criteria,
//!   correlators and correlation-length fits.
//! - [`meanfield`]: Bloch equations, stability spectrum and phase diagram.
//! - [`spinwave`]: bosonic small-Δ theory, Gaussian covariance and negativity.
//! - [`cli`]: configuration, runs, sweeps and validation suites behind the
//!   `xyness` binary.

pub mod cli;
pub mod correlations;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod mpo;
pub mod oracle;
pub mod spinwave;

pub use nalgebra::Complex;

/// Double precision complex scalar used throughout.
pub type C64 = Complex<f64>;
