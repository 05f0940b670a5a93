use nalgebra::DMatrix;
use proptest::prelude::*;
use xyness::cli::config::{AxisName, AxisSpec, Backend, Format, InitialState, RunConfig, Scope, SweepSpec};
use xyness::correlations::{geometric_discord, negativity, negativity_first, TwoSiteDensity};
use xyness::meanfield::{self, Boundary, BlochState, Phase};
use xyness::model::pauli::Pauli;
use xyness::model::ModelParams;
use xyness::mpo::{evolve_steady, EvolveOptions, MpoState};
use xyness::spinwave::{self, MomentSource};
use xyness::C64;

fn density(re: &[f64], im: &[f64]) -> TwoSiteDensity {
    let a = DMatrix::from_fn(4, 4, |r, c| C64::new(re[4 * r + c], im[4 * r + c]));
    let m = &a * a.adjoint();
    let tr = m.trace();
    TwoSiteDensity::new(m / tr, (0, 1)).unwrap()
}

/// `exp(-i θ n·σ / 2)` for a unit axis given by spherical angles.
fn rotation(theta: f64, polar: f64, azimuth: f64) -> DMatrix<C64> {
    let n = [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()];
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut u = Pauli::I.matrix() * C64::new(c, 0.0);
    for (k, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        u -= p.matrix() * C64::new(0.0, s * n[k]);
    }
    u
}

fn entries() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0..1.0f64, 16), prop::collection::vec(-1.0..1.0f64, 16))
}

fn angles() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(0.0..std::f64::consts::TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn correlations_are_local_unitary_invariant((re, im) in entries(), a in angles()) {
        let rho = density(&re, &im);
        let u = rotation(a[0], a[1], a[2]);
        let v = rotation(a[3], a[4], a[5]);
        let rotated = rho.rotated(&u, &v).unwrap();
        prop_assert!((negativity(&rho) - negativity(&rotated)).abs() < 1e-10);
        prop_assert!((geometric_discord(&rho) - geometric_discord(&rotated)).abs() < 1e-10);
    }

    #[test]
    fn correlations_are_bounded((re, im) in entries()) {
        let rho = density(&re, &im);
        let n = negativity(&rho);
        let d = geometric_discord(&rho);
        prop_assert!((0.0..=1.0).contains(&n), "negativity {n}");
        prop_assert!((0.0..=1.0).contains(&d), "discord {d}");
        prop_assert!((n - negativity_first(&rho)).abs() < 1e-12);
    }

    #[test]
    fn negativity_is_invariant_under_sublattice_duality((re, im) in entries()) {
        let rho = density(&re, &im);
        prop_assert!((negativity(&rho) - negativity(&rho.sublattice_dual())).abs() < 1e-12);
    }
}

fn axis_name() -> impl Strategy<Value = AxisName> {
    prop_oneof![Just(AxisName::G), Just(AxisName::Delta), Just(AxisName::Kappa)]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        (-3.0..3.0f64, 0.0..1.0f64, 0.0..4.0f64, 12usize..60, 1usize..64),
        (1e-4..0.05f64, 1e-12..1e-3f64, 1.0..1e3f64, prop::sample::subsequence(vec!["sz", "xx", "negativity", "discord", "sm_sm_abs"], 1..5)),
        (prop::collection::vec(1usize..10, 1..4), any::<bool>(), any::<bool>(), 0..=i64::MAX as u64, 0usize..3),
    )
        .prop_map(|((g, delta, kappa, n, chi), (dt, tol, t_max, obs), (seps, all, json, seed, init))| {
            let mut c = RunConfig::new(g, delta, kappa, n);
            c.chi_max = chi;
            c.dt = dt;
            c.tol = tol;
            c.t_max = t_max;
            c.check_interval = 10.0 * dt;
            c.observables = obs.into_iter().map(String::from).collect();
            c.separations = seps;
            c.scope = if all { Scope::All } else { Scope::Center };
            c.format = if json { Format::Json } else { Format::Csv };
            c.seed = seed;
            if all && json {
                c.backend = Backend::Exact;
                c.n_sites = 2 + n % 5;
                c.separations = vec![1];
            }
            c.initial = [InitialState::AllDown, InitialState::MaximallyMixed, InitialState::RandomProduct][init];
            c.output = json.then(|| "out.json".to_string());
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_config_round_trips(cfg in run_config()) {
        prop_assert!(cfg.validate().is_ok());
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn sweep_grid_has_product_cardinality(
        cfg in run_config(),
        first in axis_name(),
        n1 in 1usize..8,
        second in prop::option::of((axis_name(), prop::collection::vec(0.01..1.0f64, 1..5))),
    ) {
        let mut axes = vec![AxisSpec::linear(first, 0.1, 0.9, n1)];
        let mut expected = n1;
        if let Some((name, values)) = second.filter(|(name, _)| *name != first) {
            expected *= values.len();
            axes.push(AxisSpec::list(name, &values));
        }
        let spec = SweepSpec { base: cfg, axes };
        let grid = spec.grid().unwrap();
        prop_assert_eq!(grid.len(), expected);
        let back = SweepSpec::from_toml(&spec.to_toml()).unwrap();
        prop_assert_eq!(back, spec);
    }
}

fn stable_params() -> impl Strategy<Value = ModelParams> {
    (-2.0..2.0f64, 0.001..0.9f64, 0.2..3.0f64)
        .prop_map(|(g, d, k)| ModelParams::new(g, d, k, 1).unwrap())
        .prop_filter("all modes stable", spinwave::all_modes_stable)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spin_wave_routes_agree(p in stable_params()) {
        let corr = spinwave::real_space_correlators(&p, 6).unwrap();
        let (n_cf, a_cf) = spinwave::quadrature_correlators(&p, 6, MomentSource::ClosedForm).unwrap();
        prop_assert!(corr.discrepancy < 1e-8, "{}", corr.discrepancy);
        for l in 0..=6 {
            prop_assert!((corr.normal[l].re - n_cf[l]).abs() < 1e-8);
            prop_assert!((corr.anomalous[l] - a_cf[l]).norm() < 1e-8);
        }
    }

    #[test]
    fn spin_wave_correlators_scale_with_anisotropy(g in -1.8..1.8f64, kappa in 0.3..3.0f64) {
        let p = |d: f64| ModelParams::new(g, d, kappa, 1).unwrap();
        prop_assume!(spinwave::all_modes_stable(&p(2e-3)));
        let size = |d: f64| {
            let c = spinwave::real_space_correlators(&p(d), 4).unwrap();
            let n: f64 = c.normal.iter().map(|z| z.norm()).sum();
            let a: f64 = c.anomalous.iter().map(|z| z.norm()).sum();
            (n, a)
        };
        let (n1, a1) = size(2e-3);
        let (n2, a2) = size(1e-3);
        prop_assert!((n1 / n2 - 4.0).abs() < 0.05, "normal ratio {}", n1 / n2);
        prop_assert!((a1 / a2 - 2.0).abs() < 0.02, "anomalous ratio {}", a1 / a2);
    }
}

#[test]
fn gaussian_negativity_is_linear_in_small_anisotropy() {
    let neg = |d: f64| spinwave::pair_negativity(&ModelParams::new(-1.0, d, 1.0, 1).unwrap(), 1).unwrap();
    let ratios: Vec<f64> = [4e-3, 2e-3, 1e-3, 5e-4].iter().map(|&d| neg(2.0 * d) / neg(d)).collect();
    for w in ratios.windows(2) {
        assert!((w[1] - 2.0).abs() < (w[0] - 2.0).abs(), "{ratios:?}");
    }
    assert!((ratios[3] - 2.0).abs() < 5e-3, "{ratios:?}");
}

#[test]
fn every_pair_is_entangled_at_small_anisotropy() {
    for kappa in [0.5, 1.0, 2.0] {
        for l in 1..=6 {
            for d in [1e-3, 3e-4, 1e-4] {
                let p = ModelParams::new(-1.0, d, kappa, 1).unwrap();
                let n = spinwave::pair_negativity(&p, l).unwrap();
                assert!(n > 0.0, "kappa {kappa} l {l} delta {d}");
            }
        }
    }
}

fn grid(delta: f64) -> impl Iterator<Item = ModelParams> {
    (0..50).flat_map(move |i| {
        (0..50).map(move |j| {
            let g = -2.5 + 5.0 * (i as f64 + 0.5) / 50.0;
            let kappa = 3.0 * (j as f64 + 0.5) / 50.0;
            ModelParams::new(g, delta, kappa, 1).unwrap()
        })
    })
}

#[test]
fn ordered_roots_exist_exactly_when_trivial_state_is_unstable() {
    for delta in [1.0, 0.5] {
        for p in grid(delta) {
            let label = meanfield::classify_phase(&p);
            let nontrivial = [false, true]
                .iter()
                .any(|&s| meanfield::uniform_ansatz_roots(&p, s).iter().any(|r| !r.is_trivial()));
            assert_eq!(nontrivial, label.phase != Phase::Trivial, "{p:?} {label:?}");
        }
    }
}

#[test]
fn bloch_dynamics_reach_the_predicted_root() {
    let mut checked = 0;
    for delta in [1.0, 0.5] {
        for p in grid(delta).step_by(37) {
            let label = meanfield::classify_phase(&p);
            let staggered = match label.phase {
                Phase::Trivial => continue,
                Phase::Fm => false,
                Phase::Afm => true,
            };
            // Only commensurate instabilities select a uniform or staggered root.
            if label.k.sin().abs() > 1e-9 {
                continue;
            }
            let Some(root) = meanfield::uniform_ansatz_roots(&p, staggered).into_iter().find(|r| !r.is_trivial() && r.stable)
            else {
                continue;
            };
            let s0 = BlochState::perturbed_trivial(4, 1e-3, Boundary::Periodic);
            let run = meanfield::evolve_bloch(&s0, &p, 0.01, 2000.0, 1e-12).unwrap();
            let x2 = run.state.spins[0][0].powi(2);
            assert!((x2 - root.x * root.x).abs() < 1e-6, "{p:?}: {x2} vs {}", root.x * root.x);
            checked += 1;
            if checked == 20 {
                return;
            }
        }
    }
    panic!("only {checked} ordered points sampled");
}

#[test]
fn mean_field_predicts_the_sign_of_order() {
    for g in [-1.5, -1.0, -0.5, 0.5, 1.0, 1.5] {
        let p = ModelParams::new(g, 1.0, 0.5, 10).unwrap();
        let label = meanfield::classify_phase(&p).phase;
        assert_ne!(label, Phase::Trivial, "g = {g}");
        let mut s = MpoState::all_down(10, 20).unwrap();
        evolve_steady(&mut s, &p, &EvolveOptions { t_max: 50.0, ..Default::default() }).unwrap();
        let xx = s.bond_profile(Pauli::X, Pauli::X)[4];
        let expected = if label == Phase::Fm { 1.0 } else { -1.0 };
        assert_eq!(xx.signum(), expected, "g = {g}: xx = {xx}, label {label}");
    }
}
