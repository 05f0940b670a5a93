//! Pauli matrices and many-site operator construction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{linalg, C64};

/// Single-site operator basis `{𝟙, σˣ, σʸ, σᶻ}`, indexed 0..4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i]
    }

    /// Z₂ charge under conjugation by `σᶻ`: 1 for σˣ, σʸ and 0 otherwise.
    pub fn parity(self) -> u8 {
        matches!(self, Pauli::X | Pauli::Y) as u8
    }

    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let e = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &e)
    }
}

/// `σ⁻ = |↓⟩⟨↑|`.
pub fn sigma_minus() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(1, 0)] = C64::new(1.0, 0.0);
    m
}

/// `σ⁺ = |↑⟩⟨↓|`.
pub fn sigma_plus() -> DMatrix<C64> {
    sigma_minus().transpose()
}

/// Excited-state projector `σ⁺σ⁻ = |↑⟩⟨↑|`.
pub fn excitation() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m
}

/// Embed a single-site operator at `site` of an `n`-site chain.
pub fn site_operator(op: &DMatrix<C64>, site: usize, n: usize) -> DMatrix<C64> {
    assert!(site < n, "site {site} out of range for {n} sites");
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for s in 0..n {
        let f = if s == site { op.clone() } else { linalg::eye(2) };
        out = linalg::kron(&out, &f);
    }
    out
}

/// Product `op_a` at `site_a` times `op_b` at `site_b` (distinct sites).
pub fn pair_operator(op_a: &DMatrix<C64>, site_a: usize, op_b: &DMatrix<C64>, site_b: usize, n: usize) -> DMatrix<C64> {
    assert_ne!(site_a, site_b);
    site_operator(op_a, site_a, n) * site_operator(op_b, site_b, n)
}

/// Two-site Pauli product `σ^a ⊗ σ^b` as a 4×4 matrix.
pub fn pauli_pair(a: Pauli, b: Pauli) -> DMatrix<C64> {
    linalg::kron(&a.matrix(), &b.matrix())
}

/// The 16×16 change of basis whose column `4a + b` is `vec(σ^a ⊗ σ^b)` in the
/// row-major vectorization. Its inverse is `adjoint / 4`.
pub fn pauli_pair_basis() -> DMatrix<C64> {
    let mut t = DMatrix::zeros(16, 16);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let v = linalg::vec_row_major(&pauli_pair(a, b));
            t.set_column(4 * a.index() + b.index(), &v);
        }
    }
    t
}
