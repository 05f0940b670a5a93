//! Matrix-product-operator density matrix of the chain and its Trotterized
//! evolution to the steady state.
//!
//! The density operator is expanded in the local Pauli basis,
//! `ρ = Σ c_{i₁…i_N} σ^{i₁} ⊗ … ⊗ σ^{i_N}`, and the real coefficients are
//! factorized as
//!
//! ```text
//! c = e^{log_scale} A₁^{i₁} A₂^{i₂} … A_N^{i_N},   A_j = Γ_j λ_j
//! ```
//!
//! i.e. every site tensor carries the bond weights on its right. The weights
//! are kept separately because truncation needs them, and `Γ_j` can be
//! recovered as `A_j λ_j⁻¹` (see [`MpoState::gamma`]). Coefficients are real
//! because every Hermitian operator has real Pauli coefficients and every
//! generator here preserves Hermiticity.
//!
//! Since `Tr σ^i = 2 δ_{i0}`, traces and expectation values reduce to
//! contractions with the identity index on all untouched sites.

mod checkpoint;
mod evolve;
mod update;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use evolve::{
    evolve_steady, evolve_steady_with, monitored_observables, trotter_step, ConvergenceReport, EvolveOptions, Propagator,
};
pub use update::{pair_update, pauli_gate, UpdateInfo};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlations::{ChainState, CorrelationError, TwoSiteDensity};
use crate::linalg;
use crate::model::pauli::Pauli;
use crate::model::ModelError;
use crate::C64;

/// Relative cutoff below which singular values are dropped.
pub const SINGULAR_CUTOFF: f64 = 1e-14;

/// Tag naming the local operator basis of the coefficients.
pub const BASIS_TAG: &str = "pauli:I,X,Y,Z";

#[derive(Debug, Error)]
pub enum MpoError {
    #[error("invalid local density at site {site}: {reason}")]
    InvalidLocalDensity { site: usize, reason: String },
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("need distinct ordered sites, got ({0}, {1})")]
    BadPair(usize, usize),
    #[error("bond {bond} out of range for {n_sites} sites")]
    BondOutOfRange { bond: usize, n_sites: usize },
    #[error("gate must be 16x16, got {0}x{1}")]
    GateShape(usize, usize),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("imaginary residue {0:.3e} in an expectation value")]
    ImaginaryResidue(f64),
    #[error("state trace {0:.3e} signals a corrupted state")]
    CorruptedTrace(f64),
    #[error("reduced density has eigenvalue {0:.3e} below tolerance")]
    NegativeEigenvalue(f64),
    #[error("invalid numerics: {0}")]
    InvalidNumerics(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

/// Single-site operator entering a product observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Site { site: usize, op: Pauli },
    Pair { i: usize, a: Pauli, j: usize, b: Pauli },
}

/// Density operator of an open chain in matrix-product form.
#[derive(Clone, Debug, PartialEq)]
pub struct MpoState {
    /// `tensors[j][i]` is the `χ_{j-1} × χ_j` matrix `A_j^i = Γ_j^i λ_j`.
    tensors: Vec<[DMatrix<f64>; 4]>,
    /// `lambdas[b]`: normalized weights of bond `b`, descending.
    lambdas: Vec<Vec<f64>>,
    /// Z₂ charge of every bond index, present while the state is symmetric
    /// under conjugation by `Π σᶻ`.
    charges: Option<Vec<Vec<u8>>>,
    log_scale: f64,
    pub chi_max: usize,
    /// Discarded weight above which an update is reported as overflowing.
    pub warn_discarded: f64,
    /// Largest discarded weight of any update since the last reset.
    pub max_discarded: f64,
    /// Number of updates whose discarded weight exceeded `warn_discarded`.
    pub truncation_warnings: u64,
}

impl MpoState {
    /// Product state `⊗_j ρ_j` with every bond of dimension one.
    pub fn init_product(local_densities: &[DMatrix<C64>], chi_max: usize) -> Result<Self, MpoError> {
        if chi_max == 0 {
            return Err(MpoError::InvalidNumerics("chi_max must be positive".into()));
        }
        if local_densities.is_empty() {
            return Err(MpoError::InvalidNumerics("empty chain".into()));
        }
        let mut tensors = Vec::with_capacity(local_densities.len());
        let mut symmetric = true;
        for (site, rho) in local_densities.iter().enumerate() {
            let bad = |reason: String| MpoError::InvalidLocalDensity { site, reason };
            if rho.shape() != (2, 2) {
                return Err(bad(format!("shape {:?}", rho.shape())));
            }
            if linalg::max_abs_diff(rho, &rho.adjoint()) > 1e-12 {
                return Err(bad("not Hermitian".into()));
            }
            let tr = linalg::trace(rho).re;
            if (tr - 1.0).abs() > 1e-12 {
                return Err(bad(format!("trace {tr}")));
            }
            let min_ev = linalg::hermitian_eigenvalues(rho)[0];
            if min_ev < -1e-12 {
                return Err(bad(format!("eigenvalue {min_ev}")));
            }
            let coeff = |p: Pauli| 0.5 * linalg::trace(&(rho * p.matrix())).re;
            let c = Pauli::ALL.map(coeff);
            if c[1] != 0.0 || c[2] != 0.0 {
                symmetric = false;
            }
            tensors.push(c.map(|v| DMatrix::from_element(1, 1, v)));
        }
        let n = tensors.len();
        let mut state = Self {
            tensors,
            lambdas: vec![vec![1.0]; n - 1],
            charges: symmetric.then(|| vec![vec![0u8]; n - 1]),
            log_scale: 0.0,
            chi_max,
            warn_discarded: 1e-3,
            max_discarded: 0.0,
            truncation_warnings: 0,
        };
        state.renormalize()?;
        Ok(state)
    }

    /// Every site in the same local state.
    pub fn uniform(rho: &DMatrix<C64>, n_sites: usize, chi_max: usize) -> Result<Self, MpoError> {
        Self::init_product(&vec![rho.clone(); n_sites], chi_max)
    }

    /// All spins down, the dark state of the dissipator.
    pub fn all_down(n_sites: usize, chi_max: usize) -> Result<Self, MpoError> {
        let mut rho = DMatrix::zeros(2, 2);
        rho[(1, 1)] = C64::new(1.0, 0.0);
        Self::uniform(&rho, n_sites, chi_max)
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    /// Bond dimensions `χ_0 … χ_{N-2}`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.lambdas.iter().map(Vec::len).collect()
    }

    pub fn lambdas(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    pub fn tensors(&self) -> &[[DMatrix<f64>; 4]] {
        &self.tensors
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Whether the Z₂ block structure is being exploited.
    pub fn is_parity_symmetric(&self) -> bool {
        self.charges.is_some()
    }

    /// `Γ_j^i = A_j^i λ_j⁻¹`.
    pub fn gamma(&self, site: usize, i: usize) -> DMatrix<f64> {
        let mut g = self.tensors[site][i].clone();
        if let Some(lam) = self.lambdas.get(site) {
            for (c, l) in lam.iter().enumerate() {
                g.column_mut(c).scale_mut(1.0 / l);
            }
        }
        g
    }

    /// Contract with identity indices everywhere except `picks`, returning the
    /// natural log of the absolute value and the sign.
    fn log_contract(&self, picks: &[(usize, usize)]) -> (f64, f64) {
        let mut v = DVector::from_element(1, 1.0);
        let mut log = 0.0;
        for (site, t) in self.tensors.iter().enumerate() {
            let idx = picks.iter().find(|p| p.0 == site).map_or(0, |p| p.1);
            v = t[idx].tr_mul(&v);
            let norm = v.amax();
            if norm == 0.0 || !norm.is_finite() {
                return (f64::NEG_INFINITY, 0.0);
            }
            v /= norm;
            log += norm.ln();
        }
        (log + v[0].abs().ln(), v[0].signum())
    }

    /// `Tr ρ` including the stored scale.
    pub fn global_trace(&self) -> f64 {
        let (log, sign) = self.log_contract(&[]);
        sign * (log + self.log_scale + self.n_sites() as f64 * std::f64::consts::LN_2).exp()
    }

    /// Rescale so that `Tr ρ = 1`.
    pub fn renormalize(&mut self) -> Result<(), MpoError> {
        let (log, sign) = self.log_contract(&[]);
        if sign <= 0.0 || !log.is_finite() {
            return Err(MpoError::CorruptedTrace(sign * log.exp()));
        }
        self.log_scale = -log - self.n_sites() as f64 * std::f64::consts::LN_2;
        Ok(())
    }

    /// `Tr ρ² / (Tr ρ)²`.
    pub fn purity(&self) -> f64 {
        let mut v = DMatrix::from_element(1, 1, 1.0);
        let mut log = 0.0;
        for t in &self.tensors {
            let mut next = DMatrix::zeros(t[0].ncols(), t[0].ncols());
            for a in t {
                next += a.transpose() * &v * a;
            }
            let norm = next.amax();
            v = next / norm;
            log += norm.ln();
        }
        let (log_c0, _) = self.log_contract(&[]);
        (log + v[(0, 0)].ln() - 2.0 * log_c0 - self.n_sites() as f64 * std::f64::consts::LN_2).exp()
    }

    fn check_site(&self, site: usize) -> Result<(), MpoError> {
        if site >= self.n_sites() {
            return Err(MpoError::SiteOutOfRange { site, n_sites: self.n_sites() });
        }
        Ok(())
    }

    /// Left identity environments: `left[j]` contracts sites `0..j`.
    fn left_env(&self, upto: usize) -> DVector<f64> {
        let mut v = DVector::from_element(1, 1.0);
        for t in &self.tensors[..upto] {
            v = t[0].tr_mul(&v);
            let n = v.amax();
            v /= n;
        }
        v
    }

    /// Right identity environment contracting sites `from..N`.
    fn right_env(&self, from: usize) -> DVector<f64> {
        let mut v = DVector::from_element(1, 1.0);
        for t in self.tensors[from..].iter().rev() {
            v = &t[0] * v;
            let n = v.amax();
            v /= n;
        }
        v
    }

    /// `⟨σ^a_i⟩`.
    pub fn site_expectation(&self, site: usize, a: Pauli) -> Result<f64, MpoError> {
        self.check_site(site)?;
        let l = self.left_env(site);
        let r = self.right_env(site + 1);
        let num = l.dot(&(&self.tensors[site][a.index()] * &r));
        let den = l.dot(&(&self.tensors[site][0] * &r));
        ratio(num, den)
    }

    /// `⟨σ^a_i σ^b_j⟩` for sites `i < j`, for every `(a, b)` at once.
    pub fn pair_expectations(&self, i: usize, j: usize) -> Result<[[f64; 4]; 4], MpoError> {
        self.check_site(j)?;
        if i >= j {
            return Err(MpoError::BadPair(i, j));
        }
        let l = self.left_env(i);
        let r = self.right_env(j + 1);
        // Propagate the identity path alongside the four open paths and keep
        // all of them on a common scale.
        let mut paths: Vec<DVector<f64>> = (0..4).map(|a| self.tensors[i][a].tr_mul(&l)).collect();
        for t in &self.tensors[i + 1..j] {
            for p in paths.iter_mut() {
                *p = t[0].tr_mul(p);
            }
            let n = paths[0].amax();
            if n > 0.0 {
                for p in paths.iter_mut() {
                    *p /= n;
                }
            }
        }
        let right: Vec<DVector<f64>> = (0..4).map(|b| &self.tensors[j][b] * &r).collect();
        let den = paths[0].dot(&right[0]);
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] = ratio(paths[a].dot(&right[b]), den)?;
            }
        }
        Ok(out)
    }

    /// `Tr(ρ O)` for a product observable.
    pub fn measure(&self, obs: Observable) -> Result<f64, MpoError> {
        match obs {
            Observable::Site { site, op } => self.site_expectation(site, op),
            Observable::Pair { i, a, j, b } => {
                if i == j {
                    self.check_site(i)?;
                    // σ^a σ^b on one site is ±i^k times a single Pauli.
                    let m = a.matrix() * b.matrix();
                    let mut v = C64::new(0.0, 0.0);
                    for p in Pauli::ALL {
                        let c = linalg::trace(&(&m * p.matrix())) * 0.5;
                        if c.norm() > 0.0 {
                            v += c * self.site_expectation(i, p)?;
                        }
                    }
                    if v.im.abs() > 1e-8 {
                        return Err(MpoError::ImaginaryResidue(v.im));
                    }
                    return Ok(v.re);
                }
                let (lo, hi, pa, pb) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
                Ok(self.pair_expectations(lo, hi)?[pa.index()][pb.index()])
            }
        }
    }

    /// `⟨σᶻ_j⟩` for every site.
    pub fn magnetization_profile(&self) -> Vec<f64> {
        self.site_profile(Pauli::Z)
    }

    /// `⟨σ^a_j⟩` for every site.
    pub fn site_profile(&self, a: Pauli) -> Vec<f64> {
        let n = self.n_sites();
        let mut lefts = Vec::with_capacity(n);
        let mut v = DVector::from_element(1, 1.0);
        for t in &self.tensors {
            lefts.push(v.clone());
            v = t[0].tr_mul(&v);
            let s = v.amax();
            v /= s;
        }
        let mut out = vec![0.0; n];
        let mut r = DVector::from_element(1, 1.0);
        for site in (0..n).rev() {
            let t = &self.tensors[site];
            let num = lefts[site].dot(&(&t[a.index()] * &r));
            let den = lefts[site].dot(&(&t[0] * &r));
            out[site] = num / den;
            r = &t[0] * r;
            let s = r.amax();
            r /= s;
        }
        out
    }

    /// Nearest-neighbour `⟨σ^a_j σ^b_{j+1}⟩` for every bond.
    pub fn bond_profile(&self, a: Pauli, b: Pauli) -> Vec<f64> {
        let n = self.n_sites();
        let mut lefts = Vec::with_capacity(n);
        let mut v = DVector::from_element(1, 1.0);
        for t in &self.tensors {
            lefts.push(v.clone());
            v = t[0].tr_mul(&v);
            let s = v.amax();
            v /= s;
        }
        let mut rights = vec![DVector::from_element(1, 1.0); n + 1];
        for site in (0..n).rev() {
            let mut r = &self.tensors[site][0] * &rights[site + 1];
            let s = r.amax();
            r /= s;
            rights[site] = r;
        }
        (0..n.saturating_sub(1))
            .map(|j| {
                let l = &lefts[j];
                let r = &rights[j + 2];
                let (ta, tb) = (&self.tensors[j], &self.tensors[j + 1]);
                let num = (ta[a.index()].tr_mul(l)).dot(&(&tb[b.index()] * r));
                let den = (ta[0].tr_mul(l)).dot(&(&tb[0] * r));
                num / den
            })
            .collect()
    }

    /// Reduced density of sites `i < j`, Hermitized and normalized.
    pub fn reduced_density(&self, i: usize, j: usize) -> Result<TwoSiteDensity, MpoError> {
        let tr = self.global_trace();
        if !(tr >= 0.5) {
            return Err(MpoError::CorruptedTrace(tr));
        }
        let r = self.pair_expectations(i, j)?;
        let m = density_from_pauli(&r);
        let ev = linalg::hermitian_eigenvalues(&m);
        if ev[0] < -1e-6 {
            return Err(MpoError::NegativeEigenvalue(ev[0]));
        }
        let m = if ev[0] < -1e-8 { clip_negative(&m) } else { m };
        Ok(TwoSiteDensity::new(m, (i, j))?)
    }

    /// `ρ ↦ R_odd ρ* R_odd` applied to the coefficients: with sites counted
    /// from 0, σˣ flips sign on even sites and σʸ on odd sites.
    pub fn apply_sublattice_duality(&mut self) {
        for (site, t) in self.tensors.iter_mut().enumerate() {
            let flip = if site % 2 == 0 { 1 } else { 2 };
            t[flip].neg_mut();
        }
    }

    /// Coefficient `c_{i₁…i_N}` including the stored scale (small chains).
    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.n_sites());
        let picks: Vec<(usize, usize)> = indices.iter().copied().enumerate().collect();
        let (log, sign) = self.log_contract(&picks);
        sign * (log + self.log_scale).exp()
    }

    /// Dense `2^N × 2^N` density matrix (small chains only).
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.n_sites();
        assert!(n <= 8, "dense export limited to 8 sites");
        let d = 1usize << n;
        let paulis: Vec<DMatrix<C64>> = Pauli::ALL.iter().map(|p| p.matrix()).collect();
        let mut out = DMatrix::zeros(d, d);
        let total = 4usize.pow(n as u32);
        let mut idx = vec![0usize; n];
        for code in 0..total {
            let mut c = code;
            for s in (0..n).rev() {
                idx[s] = c % 4;
                c /= 4;
            }
            let coeff = self.coefficient(&idx);
            if coeff == 0.0 {
                continue;
            }
            let mut op = DMatrix::from_element(1, 1, C64::new(coeff, 0.0));
            for &i in &idx {
                op = linalg::kron(&op, &paulis[i]);
            }
            out += op;
        }
        out
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (&mut Vec<[DMatrix<f64>; 4]>, &mut Vec<Vec<f64>>, &mut Option<Vec<Vec<u8>>>, &mut f64) {
        (&mut self.tensors, &mut self.lambdas, &mut self.charges, &mut self.log_scale)
    }

    pub(crate) fn charges(&self) -> Option<&Vec<Vec<u8>>> {
        self.charges.as_ref()
    }

    /// Reset the truncation statistics.
    pub fn reset_truncation_stats(&mut self) {
        self.max_discarded = 0.0;
        self.truncation_warnings = 0;
    }
}

impl ChainState for MpoState {
    fn n_sites(&self) -> usize {
        MpoState::n_sites(self)
    }

    fn pauli_correlator(&self, i: usize, a: Pauli, j: usize, b: Pauli) -> f64 {
        self.measure(Observable::Pair { i, a, j, b })
            .expect("sites validated by caller")
    }
}

fn ratio(num: f64, den: f64) -> Result<f64, MpoError> {
    if !(den > 0.0) || !den.is_finite() || !num.is_finite() {
        return Err(MpoError::CorruptedTrace(den));
    }
    Ok(num / den)
}

/// `¼ Σ R_ab σ^a ⊗ σ^b`, Hermitized and normalized.
pub fn density_from_pauli(r: &[[f64; 4]; 4]) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(4, 4);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let v = r[a.index()][b.index()];
            if v != 0.0 {
                m += crate::model::pauli::pauli_pair(a, b) * C64::new(0.25 * v, 0.0);
            }
        }
    }
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = linalg::trace(&m);
    m / tr
}

fn clip_negative(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| C64::new(v.max(0.0), 0.0));
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.adjoint();
    let tr = linalg::trace(&out);
    out / tr
}
