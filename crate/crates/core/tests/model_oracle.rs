use nalgebra::DMatrix;
use xyness::linalg;
use xyness::model::pauli::{pair_operator, sigma_minus, sigma_plus, site_operator, Pauli};
use xyness::model::{
    apply_sublattice_duality, build_pair_generator, build_pair_generator_with_split, ModelError, ModelParams,
    OnSiteSplit,
};
use xyness::oracle::{self, OracleError};
use xyness::C64;

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Right-hand side of the master equation applied to an arbitrary operator,
/// written out term by term.
fn master_rhs(p: &ModelParams, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let n = p.n_sites;
    let d = 1usize << n;
    let mut h = DMatrix::<C64>::zeros(d, d);
    for j in 0..n {
        h -= site_operator(&Pauli::Z.matrix(), j, n) * c(p.g);
    }
    for j in 0..n.saturating_sub(1) {
        h -= pair_operator(&Pauli::X.matrix(), j, &Pauli::X.matrix(), j + 1, n) * c(0.5 * (1.0 + p.delta));
        h -= pair_operator(&Pauli::Y.matrix(), j, &Pauli::Y.matrix(), j + 1, n) * c(0.5 * (1.0 - p.delta));
    }
    let i = C64::new(0.0, 1.0);
    let mut out = (&h * rho - rho * &h) * (-i);
    for j in 0..n {
        let sm = site_operator(&sigma_minus(), j, n);
        let sp = site_operator(&sigma_plus(), j, n);
        let num = &sp * &sm;
        out += (&sm * rho * &sp * c(2.0) - &num * rho - rho * &num) * c(p.kappa);
    }
    out
}

/// Liouvillian assembled column by column from `master_rhs`.
fn direct_liouvillian(p: &ModelParams) -> DMatrix<C64> {
    let d = 1usize << p.n_sites;
    let mut l = DMatrix::zeros(d * d, d * d);
    for r in 0..d {
        for s in 0..d {
            let mut e = DMatrix::zeros(d, d);
            e[(r, s)] = c(1.0);
            l.set_column(r * d + s, &linalg::vec_row_major(&master_rhs(p, &e)));
        }
    }
    l
}

fn params(g: f64, delta: f64, kappa: f64, n: usize) -> ModelParams {
    ModelParams::new(g, delta, kappa, n).unwrap()
}

#[test]
fn params_reject_invalid_values() {
    assert!(ModelParams::new(0.0, 0.0, -0.1, 2).is_err());
    assert!(ModelParams::new(f64::NAN, 0.0, 0.1, 2).is_err());
    assert!(ModelParams::new(0.0, f64::INFINITY, 0.1, 2).is_err());
    assert!(ModelParams::new(0.0, 0.0, 0.1, 0).is_err());
    assert!(ModelParams::new(0.0, 0.0, 0.0, 1).is_ok());
}

#[test]
fn pair_generator_errors() {
    assert_eq!(
        build_pair_generator(&params(0.0, 1.0, 0.5, 3), 2).unwrap_err(),
        ModelError::BondOutOfRange { bond: 2, n_sites: 3 }
    );
    assert_eq!(
        build_pair_generator(&params(0.0, 1.0, 0.5, 1), 0).unwrap_err(),
        ModelError::ChainTooShort(1)
    );
}

#[test]
fn free_generator_annihilates_identity() {
    let gen = build_pair_generator(&params(0.0, 0.0, 0.0, 2), 0).unwrap();
    assert!(linalg::max_abs(&gen.apply(&linalg::eye(4))) < 1e-15);
}

#[test]
fn generator_output_is_traceless() {
    for p in [params(-1.0, 1.0, 0.5, 4), params(0.3, 0.2, 1.7, 5)] {
        for bond in 0..p.n_sites - 1 {
            let gen = build_pair_generator(&p, bond).unwrap();
            for k in 0..16 {
                let mut e = DMatrix::zeros(4, 4);
                e[(k / 4, k % 4)] = c(1.0);
                assert!(linalg::trace(&gen.apply(&e)).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn generator_preserves_hermiticity() {
    let p = params(0.7, 0.4, 0.9, 3);
    let gen = build_pair_generator(&p, 1).unwrap();
    let a = DMatrix::from_fn(4, 4, |r, s| C64::new((r * 3 + s) as f64 * 0.1, (r as f64 - s as f64) * 0.2));
    let h = &a + a.adjoint();
    let out = gen.apply(&h);
    assert!(linalg::max_abs_diff(&out, &out.adjoint()) < 1e-14);
}

#[test]
fn embedded_generators_sum_to_direct_liouvillian() {
    let p = params(-1.0, 1.0, 0.5, 3);
    let direct = direct_liouvillian(&p);
    for split in [OnSiteSplit::Balanced, OnSiteSplit::Forward] {
        let mut sum = DMatrix::zeros(64, 64);
        for bond in 0..2 {
            sum += build_pair_generator_with_split(&p, bond, split).unwrap().embed(3);
        }
        assert!(linalg::max_abs_diff(&sum, &direct) < 1e-12, "{split:?}");
    }
}

#[test]
fn oracle_liouvillian_matches_master_equation() {
    for p in [params(-1.0, 1.0, 0.5, 3), params(0.4, 0.3, 1.2, 2), params(0.2, 0.0, 0.7, 1)] {
        let l = oracle::build_liouvillian(&p).unwrap();
        assert!(linalg::max_abs_diff(&l.matrix, &direct_liouvillian(&p)) < 1e-12);
        assert!(l.trace_functional_residual() < 1e-12);
        assert!(l.eigenvalues().iter().all(|z| z.re < 1e-10));
    }
}

#[test]
fn oracle_rejects_long_chains() {
    assert!(matches!(
        oracle::build_liouvillian(&params(0.0, 1.0, 0.5, 7)),
        Err(OracleError::TooManySites(7))
    ));
}

#[test]
fn single_spin_spectrum() {
    let (g, kappa) = (0.6, 0.5);
    let l = oracle::build_liouvillian(&params(g, 0.3, kappa, 1)).unwrap();
    let mut ev = l.eigenvalues();
    ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    // 0, -κ ± 2ig, -2κ
    let expected = [c(0.0), C64::new(-kappa, -2.0 * g), C64::new(-kappa, 2.0 * g), c(-2.0 * kappa)];
    for (a, b) in ev.iter().zip(expected) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
    let ss = oracle::solve(&params(g, 0.3, kappa, 1)).unwrap();
    assert!((ss.rho[(1, 1)] - c(1.0)).norm() < 1e-12);
}

#[test]
fn zero_anisotropy_steady_state_is_all_down() {
    for g in [-1.3, 0.0, 0.8] {
        let ss = oracle::solve(&params(g, 0.0, 0.5, 4)).unwrap();
        let last = ss.rho.nrows() - 1;
        assert!((ss.rho[(last, last)] - c(1.0)).norm() < 1e-10);
        assert!(ss.rho.iter().enumerate().all(|(k, v)| k == ss.rho.len() - 1 || v.norm() < 1e-10));
    }
}

#[test]
fn steady_state_postconditions() {
    let ss = oracle::solve(&params(-1.0, 1.0, 0.5, 4)).unwrap();
    assert!(ss.residual < 1e-10);
    assert!(ss.singular_values.1 > 1e-8);
    assert!((linalg::trace(&ss.rho) - c(1.0)).norm() < 1e-12);
    assert!(linalg::max_abs_diff(&ss.rho, &ss.rho.adjoint()) < 1e-14);
    assert!(ss.min_eigenvalue() > -1e-10);
    // L vec(ρ) = 0 against the independently assembled generator.
    let r = master_rhs(&params(-1.0, 1.0, 0.5, 4), &ss.rho);
    assert!(linalg::max_abs(&r) < 1e-10);
}

#[test]
fn reduce_of_product_is_product() {
    let a = (Pauli::I.matrix() + Pauli::X.matrix() * c(0.3) + Pauli::Z.matrix() * c(-0.5)) * c(0.5);
    let b = (Pauli::I.matrix() + Pauli::Y.matrix() * c(0.4)) * c(0.5);
    let z = (Pauli::I.matrix() - Pauli::Z.matrix()) * c(0.5);
    let rho = linalg::kron(&linalg::kron(&a, &z), &b);
    let r = oracle::reduce_matrix(&rho, 3, 0, 2).unwrap();
    assert!(linalg::max_abs_diff(&r, &linalg::kron(&a, &b)) < 1e-15);
    assert!((linalg::trace(&r) - c(1.0)).norm() < 1e-15);
    assert!(oracle::reduce_matrix(&rho, 3, 2, 1).is_err());
}

#[test]
fn duality_is_an_involution_fixing_all_down() {
    let n = 3;
    let d = 8;
    let mut down = DMatrix::zeros(d, d);
    down[(d - 1, d - 1)] = c(1.0);
    assert_eq!(apply_sublattice_duality(&down, n).unwrap(), down);
    let a = DMatrix::from_fn(d, d, |r, s| C64::new(r as f64 - 0.3 * s as f64, (r * s) as f64 * 0.01));
    let twice = apply_sublattice_duality(&apply_sublattice_duality(&a, n).unwrap(), n).unwrap();
    assert!(linalg::max_abs_diff(&twice, &a) < 1e-15);
    assert!(apply_sublattice_duality(&a, 4).is_err());
}

#[test]
fn exact_steady_states_are_dual_under_g_reflection() {
    for g in [0.4, 1.0, 1.7] {
        let plus = oracle::solve(&params(g, 1.0, 0.5, 4)).unwrap();
        let minus = oracle::solve(&params(-g, 1.0, 0.5, 4)).unwrap();
        let mapped = apply_sublattice_duality(&minus.rho, 4).unwrap();
        assert!(linalg::max_abs_diff(&mapped, &plus.rho) < 1e-8, "g = {g}");
        for i in 0..4 {
            for j in i + 1..4 {
                let a = oracle::reduce(&plus, i, j).unwrap();
                let b = oracle::reduce(&minus, i, j).unwrap();
                if (j - i) % 2 == 1 {
                    let dual = b.sublattice_dual();
                    assert!(linalg::max_abs_diff(a.matrix(), dual.matrix()) < 1e-8);
                }
                let xx = |s: &oracle::DensityVector| {
                    s.expectation(&pair_operator(&Pauli::X.matrix(), i, &Pauli::X.matrix(), j, 4)).re
                };
                let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((xx(&plus) - sign * xx(&minus)).abs() < 1e-8);
            }
        }
    }
}
