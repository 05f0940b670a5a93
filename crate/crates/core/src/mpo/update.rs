use nalgebra::DMatrix;

use super::{MpoError, MpoState, SINGULAR_CUTOFF};
use crate::model::pauli::{pauli_pair_basis, Pauli};
use crate::C64;

/// Outcome of a single bond update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateInfo {
    /// Sum of squared dropped singular values over the total.
    pub discarded_weight: f64,
    /// New bond dimension.
    pub chi: usize,
    /// Whether `discarded_weight` exceeded the state's warn threshold.
    pub overflow: bool,
}

/// Convert a two-site superoperator from the computational basis
/// (row-major vectorization of `|ab⟩⟨cd|`) to the real Pauli-pair basis.
pub fn pauli_gate(computational: &DMatrix<C64>) -> Result<DMatrix<f64>, MpoError> {
    if computational.shape() != (16, 16) {
        return Err(MpoError::GateShape(computational.nrows(), computational.ncols()));
    }
    let t = pauli_pair_basis();
    let g = t.adjoint() * computational * &t * C64::new(0.25, 0.0);
    let imag = g.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let scale = g.iter().fold(1.0f64, |m, z| m.max(z.re.abs()));
    if imag > 1e-10 * scale {
        return Err(MpoError::InvalidNumerics(format!(
            "gate does not preserve Hermiticity (imaginary part {imag:.3e})"
        )));
    }
    Ok(g.map(|z| z.re))
}

fn pair_parity(k: usize) -> u8 {
    (Pauli::from_index(k / 4).parity() + Pauli::from_index(k % 4).parity()) % 2
}

/// Whether a Pauli-basis gate commutes with the global Z₂ parity.
pub(crate) fn preserves_parity(gate: &DMatrix<f64>) -> bool {
    (0..16).all(|r| (0..16).all(|c| gate[(r, c)] == 0.0 || pair_parity(r) == pair_parity(c)))
}

/// One SVD triplet kept for the new bond.
struct Triplet {
    s: f64,
    charge: u8,
    v: Vec<(usize, f64)>,
}

/// New tensors for one bond, computed from an immutable state.
pub(crate) struct BondResult {
    pub bond: usize,
    pub left: [DMatrix<f64>; 4],
    pub right: [DMatrix<f64>; 4],
    pub lambda: Vec<f64>,
    pub charges: Option<Vec<u8>>,
    pub log_norm: f64,
    pub discarded_weight: f64,
}

/// Apply a Pauli-basis gate to `bond` without modifying `state`.
pub(crate) fn compute_bond(
    state: &MpoState,
    bond: usize,
    gate: &DMatrix<f64>,
    symmetric_gate: bool,
) -> Result<BondResult, MpoError> {
    let tensors = state.tensors();
    let lambdas = state.lambdas();
    let (ta, tb) = (&tensors[bond], &tensors[bond + 1]);
    let cl = ta[0].nrows();
    let cm = ta[0].ncols();
    let cr = tb[0].ncols();

    // Ψ with rows (i, α) and columns (k, β).
    let mut stacked_a = DMatrix::zeros(4 * cl, cm);
    for i in 0..4 {
        stacked_a.view_mut((i * cl, 0), (cl, cm)).copy_from(&ta[i]);
    }
    let mut joined_b = DMatrix::zeros(cm, 4 * cr);
    for k in 0..4 {
        joined_b.view_mut((0, k * cr), (cm, cr)).copy_from(&tb[k]);
    }
    let psi = stacked_a * joined_b;

    let mut gpsi: DMatrix<f64> = DMatrix::zeros(4 * cl, 4 * cr);
    for out in 0..16 {
        let (io, ko) = (out / 4, out % 4);
        for inp in 0..16 {
            let g = gate[(out, inp)];
            if g == 0.0 {
                continue;
            }
            let (ii, ki) = (inp / 4, inp % 4);
            let src = psi.view((ii * cl, ki * cr), (cl, cr));
            let mut dst = gpsi.view_mut((io * cl, ko * cr), (cl, cr));
            for c in 0..cr {
                dst.column_mut(c).axpy(g, &src.column(c), 1.0);
            }
        }
    }
    if gpsi.iter().any(|v| !v.is_finite()) {
        return Err(MpoError::NonFinite(format!("bond {bond} update")));
    }

    let lam_left: Vec<f64> = if bond == 0 { vec![1.0] } else { lambdas[bond - 1].clone() };
    let mut theta = gpsi.clone();
    for i in 0..4 {
        for (a, l) in lam_left.iter().enumerate() {
            theta.row_mut(i * cl + a).scale_mut(*l);
        }
    }

    let charges = state.charges().filter(|_| symmetric_gate);
    let blocks: Vec<(u8, Vec<usize>, Vec<usize>)> = match charges {
        Some(ch) => {
            let ql: Vec<u8> = if bond == 0 { vec![0] } else { ch[bond - 1].clone() };
            let qr: Vec<u8> = if bond + 2 == tensors.len() { vec![0] } else { ch[bond + 1].clone() };
            let row_charge = |r: usize| (ql[r % cl] + Pauli::from_index(r / cl).parity()) % 2;
            let col_charge = |c: usize| (qr[c % cr] + Pauli::from_index(c / cr).parity()) % 2;
            (0..2u8)
                .map(|q| {
                    let rows = (0..4 * cl).filter(|&r| row_charge(r) == q).collect();
                    let cols = (0..4 * cr).filter(|&c| col_charge(c) == q).collect();
                    (q, rows, cols)
                })
                .collect()
        }
        None => vec![(0, (0..4 * cl).collect(), (0..4 * cr).collect())],
    };

    let mut triplets = Vec::new();
    for (q, rows, cols) in &blocks {
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| theta[(rows[r], cols[c])]);
        let svd = sub.try_svd(false, true, f64::EPSILON, 0).ok_or_else(|| {
            MpoError::NonFinite(format!("SVD did not converge on bond {bond}"))
        })?;
        let vt = svd.v_t.as_ref().expect("requested V^T");
        for (k, &s) in svd.singular_values.iter().enumerate() {
            triplets.push(Triplet {
                s,
                charge: *q,
                v: cols.iter().enumerate().map(|(c, &col)| (col, vt[(k, c)])).collect(),
            });
        }
    }
    triplets.sort_by(|a, b| b.s.total_cmp(&a.s));
    let total: f64 = triplets.iter().map(|t| t.s * t.s).sum();
    let s_max = triplets.first().map_or(0.0, |t| t.s);
    if !(s_max > 0.0) || !total.is_finite() {
        return Err(MpoError::NonFinite(format!("vanishing two-site block on bond {bond}")));
    }
    let keep = triplets
        .iter()
        .take(state.chi_max)
        .take_while(|t| t.s > SINGULAR_CUTOFF * s_max)
        .count()
        .max(1);
    let kept_weight: f64 = triplets[..keep].iter().map(|t| t.s * t.s).sum();
    let discarded_weight = ((total - kept_weight) / total).max(0.0);
    let norm = kept_weight.sqrt();

    // A_b' = Vᵀ, A_a' = (G Ψ) V / ‖s‖.
    let mut v = DMatrix::zeros(4 * cr, keep);
    for (k, t) in triplets[..keep].iter().enumerate() {
        for &(c, val) in &t.v {
            v[(c, k)] = val;
        }
    }
    let a_new = (gpsi * &v) / norm;
    let left = std::array::from_fn(|i| a_new.rows(i * cl, cl).into_owned());
    let right = std::array::from_fn(|k| v.rows(k * cr, cr).transpose());
    Ok(BondResult {
        bond,
        left,
        right,
        lambda: triplets[..keep].iter().map(|t| t.s / norm).collect(),
        charges: charges.map(|_| triplets[..keep].iter().map(|t| t.charge).collect()),
        log_norm: norm.ln(),
        discarded_weight,
    })
}

/// Write a computed bond back into the state.
pub(crate) fn commit(state: &mut MpoState, res: BondResult) -> UpdateInfo {
    let chi = res.lambda.len();
    let overflow = res.discarded_weight > state.warn_discarded;
    state.max_discarded = state.max_discarded.max(res.discarded_weight);
    if overflow {
        state.truncation_warnings += 1;
    }
    let (tensors, lambdas, charges, log_scale) = state.parts_mut();
    tensors[res.bond] = res.left;
    tensors[res.bond + 1] = res.right;
    lambdas[res.bond] = res.lambda;
    match (charges.as_mut(), res.charges) {
        (Some(ch), Some(q)) => ch[res.bond] = q,
        _ => *charges = None,
    }
    *log_scale += res.log_norm;
    UpdateInfo {
        discarded_weight: res.discarded_weight,
        chi,
        overflow,
    }
}

/// Apply a 16×16 Pauli-basis gate to `bond`, splitting back by SVD and
/// truncating to `chi_max`.
pub fn pair_update(state: &mut MpoState, bond: usize, gate: &DMatrix<f64>) -> Result<UpdateInfo, MpoError> {
    let n = state.n_sites();
    if bond + 1 >= n {
        return Err(MpoError::BondOutOfRange { bond, n_sites: n });
    }
    if gate.shape() != (16, 16) {
        return Err(MpoError::GateShape(gate.nrows(), gate.ncols()));
    }
    if gate.iter().any(|v| !v.is_finite()) {
        return Err(MpoError::NonFinite("gate".into()));
    }
    let res = compute_bond(state, bond, gate, preserves_parity(gate))?;
    Ok(commit(state, res))
}

