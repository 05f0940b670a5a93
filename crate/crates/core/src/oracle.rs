//! Exact Liouvillian and steady state for short chains.
//!
//! The density operator of `N ≤ 6` sites is vectorized row-major
//! (`A ρ B ↦ (A ⊗ Bᵀ) vec(ρ)`) and the steady state is the right singular
//! vector of the smallest singular value of `L`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::correlations::{CorrelationError, TwoSiteDensity};
use crate::linalg;
use crate::model::pauli::{sigma_minus, site_operator, Pauli};
use crate::model::{lindblad_superoperator, ModelError, ModelParams};
use crate::C64;

/// Largest chain handled densely (`4^6 = 4096`).
pub const MAX_SITES: usize = 6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("chain of {0} sites is outside the exact-diagonalization range 1..={MAX_SITES}")]
    TooManySites(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("steady state is not unique: second smallest singular value {second:.3e} below gap {gap:.1e}")]
    DegenerateNullspace { second: f64, gap: f64 },
    #[error("steady-state vector has vanishing trace")]
    ZeroTrace,
    #[error("site pair ({i}, {j}) invalid for {n} sites")]
    BadSites { i: usize, j: usize, n: usize },
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

/// Singular-value gap below which the nullspace counts as degenerate.
pub const NULLSPACE_GAP: f64 = 1e-8;

/// Full `4^N × 4^N` Liouvillian.
#[derive(Clone, Debug)]
pub struct DenseLiouvillian {
    pub params: ModelParams,
    pub matrix: DMatrix<C64>,
}

/// Steady-state density operator of a short chain.
#[derive(Clone, Debug)]
pub struct DensityVector {
    pub n_sites: usize,
    /// `2^N × 2^N` density matrix in the computational product basis.
    pub rho: DMatrix<C64>,
    /// `‖L vec(ρ)‖` of the returned state.
    pub residual: f64,
    /// Smallest and second smallest singular values of `L`.
    pub singular_values: (f64, f64),
}

/// Chain Hamiltonian `-Σ_j g σᶻ_j - Σ_bonds [(1+Δ)/2 σˣσˣ + (1-Δ)/2 σʸσʸ]`.
pub fn hamiltonian(params: &ModelParams) -> DMatrix<C64> {
    let n = params.n_sites;
    let d = 1usize << n;
    let re = |v: f64| C64::new(v, 0.0);
    let mut h = DMatrix::zeros(d, d);
    let z = Pauli::Z.matrix();
    let x = Pauli::X.matrix();
    let y = Pauli::Y.matrix();
    for j in 0..n {
        h -= site_operator(&z, j, n) * re(params.g);
    }
    for j in 0..n.saturating_sub(1) {
        h -= site_operator(&x, j, n) * site_operator(&x, j + 1, n) * re(params.jx());
        h -= site_operator(&y, j, n) * site_operator(&y, j + 1, n) * re(params.jy());
    }
    h
}

pub fn build_liouvillian(params: &ModelParams) -> Result<DenseLiouvillian, OracleError> {
    params.validate()?;
    let n = params.n_sites;
    if n == 0 || n > MAX_SITES {
        return Err(OracleError::TooManySites(n));
    }
    let h = hamiltonian(params);
    let sm = sigma_minus();
    let jumps: Vec<(f64, DMatrix<C64>)> = (0..n).map(|j| (params.kappa, site_operator(&sm, j, n))).collect();
    Ok(DenseLiouvillian {
        params: *params,
        matrix: lindblad_superoperator(&h, &jumps),
    })
}

impl DenseLiouvillian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `vec(𝟙)† L`, which vanishes for a trace-preserving generator.
    pub fn trace_functional_residual(&self) -> f64 {
        let d = 1usize << self.params.n_sites;
        let id = linalg::vec_row_major(&linalg::eye(d));
        let row = id.adjoint() * &self.matrix;
        row.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        linalg::complex_eigenvalues(&self.matrix)
    }
}

/// Null vector of `L` reshaped into a Hermitian, unit-trace density matrix.
pub fn steady_state(liouvillian: &DenseLiouvillian) -> Result<DensityVector, OracleError> {
    let n = liouvillian.params.n_sites;
    let d = 1usize << n;
    let svd = liouvillian.matrix.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smallest = svd.singular_values[order[0]];
    let second = if order.len() > 1 {
        svd.singular_values[order[1]]
    } else {
        f64::INFINITY
    };
    if second < NULLSPACE_GAP {
        return Err(OracleError::DegenerateNullspace { second, gap: NULLSPACE_GAP });
    }
    let null: DVector<C64> = v_t.row(order[0]).adjoint();
    let mut rho = linalg::unvec_row_major(&null, d);
    let tr = linalg::trace(&rho);
    if tr.norm() < 1e-300 {
        return Err(OracleError::ZeroTrace);
    }
    rho /= tr;
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = linalg::trace(&rho);
    rho /= tr;
    let residual = (&liouvillian.matrix * linalg::vec_row_major(&rho)).norm();
    Ok(DensityVector {
        n_sites: n,
        rho,
        residual,
        singular_values: (smallest, second),
    })
}

/// Convenience: Liouvillian plus steady state.
pub fn solve(params: &ModelParams) -> Result<DensityVector, OracleError> {
    steady_state(&build_liouvillian(params)?)
}

/// Partial trace onto sites `i < j`, ordered `(i, j)`.
pub fn reduce_matrix(rho: &DMatrix<C64>, n: usize, i: usize, j: usize) -> Result<DMatrix<C64>, OracleError> {
    if !(i < j && j < n) {
        return Err(OracleError::BadSites { i, j, n });
    }
    let d = 1usize << n;
    let bit = |x: usize, s: usize| (x >> (n - 1 - s)) & 1;
    let mask = (1usize << (n - 1 - i)) | (1usize << (n - 1 - j));
    let mut out = DMatrix::zeros(4, 4);
    for r in 0..d {
        let rest = r & !mask;
        let a = bit(r, i) * 2 + bit(r, j);
        for b in 0..4 {
            let c = rest | ((b >> 1) << (n - 1 - i)) | ((b & 1) << (n - 1 - j));
            out[(a, b)] += rho[(r, c)];
        }
    }
    Ok(out)
}

/// Two-site reduced density of a steady state.
pub fn reduce(rho: &DensityVector, i: usize, j: usize) -> Result<TwoSiteDensity, OracleError> {
    let m = reduce_matrix(&rho.rho, rho.n_sites, i, j)?;
    Ok(TwoSiteDensity::new(m, (i, j))?)
}

impl DensityVector {
    /// `Tr(ρ O)` for a full-chain operator.
    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        linalg::trace(&(&self.rho * op))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.rho)[0]
    }
}

impl crate::correlations::ChainState for DensityVector {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn pauli_correlator(&self, i: usize, a: Pauli, j: usize, b: Pauli) -> f64 {
        let op = crate::model::pauli::pair_operator(&a.matrix(), i, &b.matrix(), j, self.n_sites);
        self.expectation(&op).re
    }
}
