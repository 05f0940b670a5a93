use nalgebra::DMatrix;

use super::pauli::{sigma_minus, Pauli};
use super::{ModelError, ModelParams};
use crate::{linalg, C64};

/// How the one-site terms (field and decay) are shared among bond generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OnSiteSplit {
    /// Interior sites give half of their on-site terms to each adjacent bond;
    /// the two end sites give everything to their only bond.
    #[default]
    Balanced,
    /// Every site gives its on-site terms to the bond on its right; the last
    /// site to the bond on its left.
    Forward,
}

impl OnSiteSplit {
    /// Weights of the left and right site of `bond` in an `n`-site chain.
    pub fn weights(self, bond: usize, n: usize) -> (f64, f64) {
        let last_bond = bond + 2 == n;
        match self {
            OnSiteSplit::Balanced => {
                let left = if bond == 0 { 1.0 } else { 0.5 };
                let right = if last_bond { 1.0 } else { 0.5 };
                (left, right)
            }
            OnSiteSplit::Forward => (1.0, if last_bond { 1.0 } else { 0.0 }),
        }
    }
}

/// Generator `M_pair` of one bond, acting on the 16-dimensional space of
/// two-site operators `|ab⟩⟨cd|` (row-major vectorization).
#[derive(Clone, Debug, PartialEq)]
pub struct PairGenerator {
    pub bond: usize,
    pub matrix: DMatrix<C64>,
}

impl PairGenerator {
    /// Apply the generator to a 4×4 two-site operator.
    pub fn apply(&self, op: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(op.shape(), (4, 4));
        let v = &self.matrix * linalg::vec_row_major(op);
        linalg::unvec_row_major(&v, 4)
    }

    /// Embed into the full `4^n`-dimensional superoperator space.
    pub fn embed(&self, n_sites: usize) -> DMatrix<C64> {
        assert!(self.bond + 1 < n_sites);
        let d = 1usize << n_sites;
        let shift = n_sites - self.bond - 2;
        let pair_mask = 0b11usize << shift;
        let mut out = DMatrix::zeros(d * d, d * d);
        for r in 0..d {
            for c in 0..d {
                let ra = (r & pair_mask) >> shift;
                let ca = (c & pair_mask) >> shift;
                let row = ra * 4 + ca;
                for rb in 0..4 {
                    for cb in 0..4 {
                        let g = self.matrix[(row, rb * 4 + cb)];
                        if g == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let r2 = (r & !pair_mask) | (rb << shift);
                        let c2 = (c & !pair_mask) | (cb << shift);
                        out[(r * d + c, r2 * d + c2)] += g;
                    }
                }
            }
        }
        out
    }
}

/// Lindblad superoperator `-i[H, ·] + Σ_k γ_k (2 L ρ L† - L†L ρ - ρ L†L)` in the
/// row-major vectorization.
pub fn lindblad_superoperator(h: &DMatrix<C64>, jumps: &[(f64, DMatrix<C64>)]) -> DMatrix<C64> {
    let d = h.nrows();
    let id = linalg::eye(d);
    let mi = C64::new(0.0, -1.0);
    let mut l = (linalg::kron(h, &id) - linalg::kron(&id, &h.transpose())) * mi;
    for (rate, op) in jumps {
        if *rate == 0.0 {
            continue;
        }
        let ldl = op.adjoint() * op;
        let term = linalg::kron(op, &op.conjugate()) * C64::new(2.0, 0.0)
            - linalg::kron(&ldl, &id)
            - linalg::kron(&id, &ldl.transpose());
        l += term * C64::new(*rate, 0.0);
    }
    l
}

/// Pair generator with the default [`OnSiteSplit::Balanced`] sharing.
pub fn build_pair_generator(params: &ModelParams, bond: usize) -> Result<PairGenerator, ModelError> {
    build_pair_generator_with_split(params, bond, OnSiteSplit::Balanced)
}

/// Bond Hamiltonian `-[(1+Δ)/2 σˣσˣ + (1-Δ)/2 σʸσʸ]` plus shares of `-g σᶻ`
/// and `κ D[σ⁻]` on both sites, as a superoperator.
pub fn build_pair_generator_with_split(
    params: &ModelParams,
    bond: usize,
    split: OnSiteSplit,
) -> Result<PairGenerator, ModelError> {
    params.validate()?;
    let n = params.n_sites;
    if n < 2 {
        return Err(ModelError::ChainTooShort(n));
    }
    if bond + 1 >= n {
        return Err(ModelError::BondOutOfRange { bond, n_sites: n });
    }
    let (wl, wr) = split.weights(bond, n);
    let id = linalg::eye(2);
    let x = Pauli::X.matrix();
    let y = Pauli::Y.matrix();
    let z = Pauli::Z.matrix();
    let re = |v: f64| C64::new(v, 0.0);

    let h = -(linalg::kron(&x, &x) * re(params.jx())
        + linalg::kron(&y, &y) * re(params.jy())
        + linalg::kron(&z, &id) * re(params.g * wl)
        + linalg::kron(&id, &z) * re(params.g * wr));

    let sm = sigma_minus();
    let jumps = [
        (params.kappa * wl, linalg::kron(&sm, &id)),
        (params.kappa * wr, linalg::kron(&id, &sm)),
    ];
    Ok(PairGenerator {
        bond,
        matrix: lindblad_superoperator(&h, &jumps),
    })
}
