//! Quantum-correlation measures on two-site densities and spatial correlation
//! analysis on chain states.

use nalgebra::{DMatrix, Vector3};
use thiserror::Error;

use crate::linalg;
use crate::model::pauli::{pauli_pair, Pauli};
use crate::C64;

/// Negativities at or below this value count as zero.
pub const ENTANGLEMENT_FLOOR: f64 = 1e-8;

/// Tolerance on trace, Hermiticity and positivity of a [`TwoSiteDensity`].
pub const DENSITY_TOLERANCE: f64 = 1e-8;

/// Magnitudes at or below this value are excluded from correlation-length fits.
pub const FIT_NOISE_FLOOR: f64 = 1e-10;

/// Residual above which a two-site density is not treated as an X state.
pub const X_FORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum CorrelationError {
    #[error("two-site density must be 4x4, got {0}x{1}")]
    Shape(usize, usize),
    #[error("two-site density is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("two-site density has trace {0:.12} instead of 1")]
    Trace(f64),
    #[error("two-site density has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("need at least 3 points above the noise floor, got {0}")]
    InsufficientPoints(usize),
}

/// Reduced density operator of a site pair in the basis
/// `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteDensity {
    matrix: DMatrix<C64>,
    pub sites: (usize, usize),
}

impl TwoSiteDensity {
    /// Validates and Hermitizes `matrix`.
    pub fn new(matrix: DMatrix<C64>, sites: (usize, usize)) -> Result<Self, CorrelationError> {
        if matrix.shape() != (4, 4) {
            return Err(CorrelationError::Shape(matrix.nrows(), matrix.ncols()));
        }
        let herm_dev = linalg::max_abs_diff(&matrix, &matrix.adjoint());
        if herm_dev > DENSITY_TOLERANCE {
            return Err(CorrelationError::NotHermitian(herm_dev));
        }
        let matrix = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(CorrelationError::Trace(tr));
        }
        let min_ev = linalg::hermitian_eigenvalues(&matrix)[0];
        if min_ev < -DENSITY_TOLERANCE {
            return Err(CorrelationError::NotPositive(min_ev));
        }
        Ok(Self { matrix, sites })
    }

    /// Build from Pauli expectations `R_ab = Tr[ρ σ^a ⊗ σ^b]` (`R_00 = 1`):
    /// `ρ = ¼ Σ R_ab σ^a ⊗ σ^b`.
    pub fn from_pauli_expectations(r: &[[f64; 4]; 4], sites: (usize, usize)) -> Result<Self, CorrelationError> {
        let mut m = DMatrix::zeros(4, 4);
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                m += pauli_pair(a, b) * C64::new(0.25 * r[a.index()][b.index()], 0.0);
            }
        }
        Self::new(m, sites)
    }

    /// Tensor product of two single-site densities.
    pub fn product(a: &DMatrix<C64>, b: &DMatrix<C64>, sites: (usize, usize)) -> Result<Self, CorrelationError> {
        Self::new(linalg::kron(a, b), sites)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `R_ab = Tr[ρ σ^a ⊗ σ^b]`.
    pub fn pauli_expectations(&self) -> [[f64; 4]; 4] {
        let mut r = [[0.0; 4]; 4];
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                r[a.index()][b.index()] = linalg::trace(&(&self.matrix * pauli_pair(a, b))).re;
            }
        }
        r
    }

    /// Partial transpose on the second site.
    pub fn partial_transpose(&self) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |r, c| {
            let (a, b) = (r / 2, r % 2);
            let (cc, d) = (c / 2, c % 2);
            self.matrix[(a * 2 + d, cc * 2 + b)]
        })
    }

    /// Partial transpose on the first site.
    pub fn partial_transpose_first(&self) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |r, c| {
            let (a, b) = (r / 2, r % 2);
            let (cc, d) = (c / 2, c % 2);
            self.matrix[(cc * 2 + b, a * 2 + d)]
        })
    }

    /// Apply a local unitary `u_a ⊗ u_b`.
    pub fn rotated(&self, u_a: &DMatrix<C64>, u_b: &DMatrix<C64>) -> Result<Self, CorrelationError> {
        let u = linalg::kron(u_a, u_b);
        Self::new(&u * &self.matrix * u.adjoint(), self.sites)
    }

    /// `(σᶻ ⊗ 𝟙) ρ* (σᶻ ⊗ 𝟙)`: the pair image of the sublattice duality when
    /// the two sites sit on different sublattices.
    pub fn sublattice_dual(&self) -> Self {
        let z = linalg::kron(&Pauli::Z.matrix(), &linalg::eye(2));
        Self {
            matrix: &z * self.matrix.conjugate() * &z,
            sites: self.sites,
        }
    }
}

fn negativity_of(pt: &DMatrix<C64>) -> f64 {
    let sum: f64 = linalg::hermitian_eigenvalues(pt).iter().map(|l| l.abs()).sum();
    (sum - 1.0).max(0.0)
}

/// `max(0, Σ|λ_i| - 1)` over the spectrum of the partial transpose.
pub fn negativity(rho: &TwoSiteDensity) -> f64 {
    negativity_of(&rho.partial_transpose())
}

/// Negativity with the transpose taken on the first site instead.
pub fn negativity_first(rho: &TwoSiteDensity) -> f64 {
    negativity_of(&rho.partial_transpose_first())
}

/// Bloch vectors and correlation matrix entering the discord closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscordDecomposition {
    /// First site, `x_i = R_i0`.
    pub x: Vector3<f64>,
    /// Second site, `y_j = R_0j`.
    pub y: Vector3<f64>,
    /// `t_ij = R_ij`.
    pub t: nalgebra::Matrix3<f64>,
    /// `S = (x xᵀ + t tᵀ) / 4`.
    pub s: nalgebra::Matrix3<f64>,
}

pub fn discord_decomposition(rho: &TwoSiteDensity) -> DiscordDecomposition {
    let r = rho.pauli_expectations();
    let x = Vector3::new(r[1][0], r[2][0], r[3][0]);
    let y = Vector3::new(r[0][1], r[0][2], r[0][3]);
    let t = nalgebra::Matrix3::from_fn(|i, j| r[i + 1][j + 1]);
    let s = (x * x.transpose() + t * t.transpose()) * 0.25;
    DiscordDecomposition { x, y, t, s }
}

/// Geometric discord `2 Tr S - 2 λ_max(S)`.
pub fn geometric_discord(rho: &TwoSiteDensity) -> f64 {
    let dec = discord_decomposition(rho);
    let s = (dec.s + dec.s.transpose()) * 0.5;
    let ev = s.symmetric_eigenvalues();
    let lmax = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (2.0 * s.trace() - 2.0 * lmax).max(0.0)
}

/// X-pattern entries of a two-site density.
#[derive(Clone, Debug, PartialEq)]
pub struct XStateDecomposition {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
    /// `⟨↑↑|ρ|↓↓⟩`, equal to `⟨σ⁻ σ⁻⟩`.
    pub x4: C64,
    /// `⟨↑↓|ρ|↓↑⟩`, equal to `⟨σ⁻ σ⁺⟩`.
    pub x5: C64,
    /// Largest off-pattern magnitude.
    pub residual: f64,
}

impl XStateDecomposition {
    /// `p10 p01 < |x4|²`.
    pub fn pair_coherence_criterion(&self) -> bool {
        self.p10 * self.p01 < self.x4.norm_sqr()
    }

    /// `p00 p11 < |x5|²`.
    pub fn hopping_coherence_criterion(&self) -> bool {
        self.p00 * self.p11 < self.x5.norm_sqr()
    }

    /// Whether the state is close enough to X form for the criteria to be exact.
    pub fn is_x_form(&self) -> bool {
        self.residual <= X_FORM_TOLERANCE
    }

    pub fn entangled(&self) -> bool {
        self.pair_coherence_criterion() || self.hopping_coherence_criterion()
    }
}

pub fn x_state_decompose(rho: &TwoSiteDensity) -> XStateDecomposition {
    let m = rho.matrix();
    let mut residual: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let on_pattern = r == c || r + c == 3;
            if !on_pattern {
                residual = residual.max(m[(r, c)].norm());
            }
        }
    }
    XStateDecomposition {
        p11: m[(0, 0)].re,
        p10: m[(1, 1)].re,
        p01: m[(2, 2)].re,
        p00: m[(3, 3)].re,
        x4: m[(0, 3)],
        x5: m[(1, 2)],
        residual,
    }
}

/// Spin axis of a two-point correlator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// `Tr[ρ σ^a ⊗ σ^b]`.
pub fn pair_correlator(rho: &TwoSiteDensity, a: Axis, b: Axis) -> f64 {
    let v = linalg::trace(&(rho.matrix() * pauli_pair(a.pauli(), b.pauli())));
    debug_assert!(v.im.abs() < 1e-8, "imaginary residue {}", v.im);
    v.re
}

/// Read access to Pauli-product expectations of a whole chain.
pub trait ChainState {
    fn n_sites(&self) -> usize;

    /// `⟨σ^a_i σ^b_j⟩` for distinct in-range sites.
    fn pauli_correlator(&self, i: usize, a: Pauli, j: usize, b: Pauli) -> f64;
}

/// `Σ_j ⟨σˣ_i σˣ_j⟩`, including the `j = i` term.
pub fn integrated_susceptibility<S: ChainState + ?Sized>(state: &S, i: usize) -> Result<f64, CorrelationError> {
    let n = state.n_sites();
    if i >= n {
        return Err(CorrelationError::SiteOutOfRange { site: i, n_sites: n });
    }
    let mut sum = 1.0;
    for j in (0..n).filter(|&j| j != i) {
        sum += state.pauli_correlator(i, Pauli::X, j, Pauli::X);
    }
    Ok(sum)
}

/// Result of an exponential fit `magnitude ≈ A e^{-l/ξ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationLengthFit {
    /// `f64::INFINITY` when the fitted slope vanishes.
    pub xi_c: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub fit_residual: f64,
    pub n_points: usize,
}

/// Least-squares fit of `ln|m|` against separation.
pub fn fit_correlation_length(series: &[(f64, f64)]) -> Result<CorrelationLengthFit, CorrelationError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, m)| m.abs() > FIT_NOISE_FLOOR)
        .map(|&(l, m)| (l, m.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(CorrelationError::InsufficientPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let fit_residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let xi_c = if slope.abs() < 1e-12 { f64::INFINITY } else { -1.0 / slope };
    Ok(CorrelationLengthFit {
        xi_c,
        prefactor: intercept.exp(),
        fit_residual,
        n_points: pts.len(),
    })
}
