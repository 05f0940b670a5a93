use nalgebra::DMatrix;

use super::ModelError;
use crate::C64;

/// Diagonal of `R_odd = Π σᶻ_j` over the odd sublattice, where "odd" counts
/// sites from 1, i.e. 0-indexed sites 0, 2, 4, ...
pub fn duality_signs(n_sites: usize) -> Vec<f64> {
    let d = 1usize << n_sites;
    (0..d)
        .map(|r| {
            let flips = (0..n_sites)
                .step_by(2)
                .filter(|&s| (r >> (n_sites - 1 - s)) & 1 == 1)
                .count();
            if flips % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// `ρ ↦ R_odd ρ* R_odd`, the map relating steady states at `g` and `-g`.
pub fn apply_sublattice_duality(rho: &DMatrix<C64>, n_sites: usize) -> Result<DMatrix<C64>, ModelError> {
    let d = 1usize << n_sites;
    if rho.shape() != (d, d) {
        return Err(ModelError::ShapeMismatch {
            expected: d,
            rows: rho.nrows(),
            cols: rho.ncols(),
        });
    }
    let s = duality_signs(n_sites);
    Ok(DMatrix::from_fn(d, d, |r, c| rho[(r, c)].conj() * (s[r] * s[c])))
}
