//! Model parameters, operator algebra and the bond generators of the master
//! equation.
//!
//! Conventions used everywhere in the crate:
//!
//! - Single-site computational basis: index 0 is `|↑⟩` (excited), index 1 is
//!   `|↓⟩`, so `σᶻ = diag(1, -1)` and `σ⁻ = |↓⟩⟨↑|`.
//! - Many-site states order site 0 as the most significant tensor factor.
//! - Operators are vectorized row-major, `vec(ρ)[r·d + c] = ρ[r, c]`, so that
//!   `A ρ B ↦ (A ⊗ Bᵀ) vec(ρ)`.
//! - Sites are 0-indexed in code; bond `b` couples sites `b` and `b + 1`.

mod duality;
mod generator;
pub mod pauli;

pub use duality::{apply_sublattice_duality, duality_signs};
pub use generator::{
    build_pair_generator, build_pair_generator_with_split, lindblad_superoperator, OnSiteSplit, PairGenerator,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("bond {bond} out of range for a chain of {n_sites} sites")]
    BondOutOfRange { bond: usize, n_sites: usize },
    #[error("a pair generator needs at least two sites, got {0}")]
    ChainTooShort(usize),
    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch { expected: usize, rows: usize, cols: usize },
}

/// Dimensionless couplings of the chain, in units of the hopping `J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Transverse field `g = (ω_p - ω_c) / 2J`.
    pub g: f64,
    /// Anisotropy, equal to the two-photon pump strength `Ω / J`.
    pub delta: f64,
    /// Decay rate `κ / J`.
    pub kappa: f64,
    pub n_sites: usize,
}

impl ModelParams {
    pub fn new(g: f64, delta: f64, kappa: f64, n_sites: usize) -> Result<Self, ModelError> {
        let p = Self { g, delta, kappa, n_sites };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.g.is_finite() || !self.delta.is_finite() {
            return Err(ModelError::InvalidParams("g and delta must be finite".into()));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "kappa must be finite and non-negative, got {}",
                self.kappa
            )));
        }
        if self.n_sites < 1 {
            return Err(ModelError::InvalidParams("n_sites must be at least 1".into()));
        }
        Ok(())
    }

    /// σˣσˣ coupling `(1 + Δ) / 2`.
    pub fn jx(&self) -> f64 {
        0.5 * (1.0 + self.delta)
    }

    /// σʸσʸ coupling `(1 - Δ) / 2`.
    pub fn jy(&self) -> f64 {
        0.5 * (1.0 - self.delta)
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_sites(mut self, n_sites: usize) -> Self {
        self.n_sites = n_sites;
        self
    }
}
