use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Backend, InitialState, RunConfig, Scope, SweepSpec};
use super::{CliError, Status};
use crate::correlations::{self, ChainState, TwoSiteDensity};
use crate::meanfield::{self, PhaseRow};
use crate::model::pauli::Pauli;
use crate::model::ModelParams;
use crate::mpo::{evolve_steady, MpoState};
use crate::oracle::{self, DensityVector};
use crate::{spinwave, C64};

/// One output table row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub g: f64,
    pub delta: f64,
    pub kappa: f64,
    pub n_sites: usize,
    pub chi_max: usize,
    pub site_i: usize,
    /// Absent for single-site observables.
    pub site_j: Option<usize>,
    pub observable: String,
    pub value: f64,
    pub converged: bool,
    pub discarded_weight: f64,
    pub wall_time_s: f64,
    pub status: Status,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<Row>,
    pub status: Status,
    pub converged: bool,
    pub discarded_weight: f64,
    pub wall_time_s: f64,
}

/// A solved steady state from either backend.
pub enum Solved {
    Mpo(Box<MpoState>),
    Exact(DensityVector),
}

impl Solved {
    fn chain(&self) -> &dyn ChainState {
        match self {
            Solved::Mpo(s) => s.as_ref(),
            Solved::Exact(d) => d,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.chain().n_sites()
    }

    pub fn site(&self, i: usize, p: Pauli) -> Result<f64, CliError> {
        Ok(match self {
            Solved::Mpo(s) => s.site_expectation(i, p)?,
            Solved::Exact(d) => {
                let op = crate::model::pauli::site_operator(&p.matrix(), i, d.n_sites);
                d.expectation(&op).re
            }
        })
    }

    pub fn correlator(&self, i: usize, a: Pauli, j: usize, b: Pauli) -> f64 {
        self.chain().pauli_correlator(i, a, j, b)
    }

    pub fn pair_density(&self, i: usize, j: usize) -> Result<TwoSiteDensity, CliError> {
        Ok(match self {
            Solved::Mpo(s) => s.reduced_density(i, j)?,
            Solved::Exact(d) => oracle::reduce(d, i, j)?,
        })
    }

    /// `|⟨σ⁻_i σ⁻_j⟩|`.
    pub fn sm_sm_abs(&self, i: usize, j: usize) -> f64 {
        let c = |a, b| self.correlator(i, a, j, b);
        let re = c(Pauli::X, Pauli::X) - c(Pauli::Y, Pauli::Y);
        let im = c(Pauli::X, Pauli::Y) + c(Pauli::Y, Pauli::X);
        re.hypot(im) / 4.0
    }
}

fn initial_state(cfg: &RunConfig) -> Result<MpoState, CliError> {
    let n = cfg.n_sites;
    Ok(match cfg.initial {
        InitialState::AllDown => MpoState::all_down(n, cfg.chi_max)?,
        InitialState::MaximallyMixed => {
            MpoState::uniform(&DMatrix::identity(2, 2).map(|v: C64| v * 0.5), n, cfg.chi_max)?
        }
        InitialState::RandomProduct => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let sites: Vec<DMatrix<C64>> = (0..n)
                .map(|_| {
                    let cos_t: f64 = rng.random_range(-1.0..1.0);
                    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let sin_t = (1.0 - cos_t * cos_t).sqrt();
                    let r = [sin_t * phi.cos(), sin_t * phi.sin(), cos_t];
                    let mut m = Pauli::I.matrix();
                    for (p, v) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().zip(r) {
                        m += p.matrix() * C64::new(v, 0.0);
                    }
                    let m = m * C64::new(0.5, 0.0);
                    // Exact Hermiticity after rounding.
                    (&m + m.adjoint()) * C64::new(0.5, 0.0)
                })
                .collect();
            MpoState::init_product(&sites, cfg.chi_max)?
        }
    })
}

/// Solve for the steady state. Returns the state, whether it converged and
/// the largest discarded weight.
pub fn solve(cfg: &RunConfig) -> Result<(Solved, bool, f64), CliError> {
    cfg.validate()?;
    let params = cfg.params();
    match cfg.backend {
        Backend::Exact => Ok((Solved::Exact(oracle::solve(&params)?), true, 0.0)),
        Backend::Mpo => {
            let mut state = initial_state(cfg)?;
            let report = evolve_steady(&mut state, &params, &cfg.evolve_options())?;
            Ok((Solved::Mpo(Box::new(state)), report.converged, report.max_discarded))
        }
    }
}

fn center_site(n: usize) -> usize {
    (n - 1) / 2
}

/// Pairs at separation `l` selected by `scope`.
pub fn pairs(n: usize, l: usize, scope: Scope) -> Vec<(usize, usize)> {
    match scope {
        Scope::Center => {
            let i = (n - 1 - l) / 2;
            vec![(i, i + l)]
        }
        Scope::All => (0..n - l).map(|i| (i, i + l)).collect(),
    }
}

fn sites(n: usize, scope: Scope) -> Vec<usize> {
    match scope {
        Scope::Center => vec![center_site(n)],
        Scope::All => (0..n).collect(),
    }
}

/// `(site_i, site_j, observable, value)` for every requested observable.
pub fn measure(solved: &Solved, cfg: &RunConfig) -> Result<Vec<(usize, Option<usize>, String, f64)>, CliError> {
    let n = solved.n_sites();
    let mut out = Vec::new();
    for name in &cfg.observables {
        let single = match name.as_str() {
            "sx" => Some(Pauli::X),
            "sy" => Some(Pauli::Y),
            "sz" => Some(Pauli::Z),
            _ => None,
        };
        if let Some(p) = single {
            for i in sites(n, cfg.scope) {
                out.push((i, None, name.clone(), solved.site(i, p)?));
            }
            continue;
        }
        if name == "s_int" {
            for i in sites(n, cfg.scope) {
                out.push((i, None, name.clone(), correlations::integrated_susceptibility(solved.chain(), i)?));
            }
            continue;
        }
        for &l in &cfg.separations {
            for (i, j) in pairs(n, l, cfg.scope) {
                let v = match name.as_str() {
                    "xx" => solved.correlator(i, Pauli::X, j, Pauli::X),
                    "yy" => solved.correlator(i, Pauli::Y, j, Pauli::Y),
                    "zz" => solved.correlator(i, Pauli::Z, j, Pauli::Z),
                    "sm_sm_abs" => solved.sm_sm_abs(i, j),
                    "negativity" => correlations::negativity(&solved.pair_density(i, j)?),
                    "discord" => correlations::geometric_discord(&solved.pair_density(i, j)?),
                    other => return Err(CliError::Config(format!("unknown observable {other:?}"))),
                };
                out.push((i, Some(j), name.clone(), v));
            }
        }
    }
    Ok(out)
}

/// Steady state plus one row per requested observable and pair.
pub fn run_steady(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let (solved, converged, discarded) = solve(cfg)?;
    let values = measure(&solved, cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let status = if converged { Status::Ok } else { Status::NotConverged };
    let rows = values
        .into_iter()
        .map(|(i, j, obs, value)| Row {
            g: cfg.g,
            delta: cfg.delta,
            kappa: cfg.kappa,
            n_sites: cfg.n_sites,
            chi_max: cfg.chi_max,
            site_i: i,
            site_j: j,
            observable: obs,
            value,
            converged,
            discarded_weight: discarded,
            wall_time_s: wall,
            status,
        })
        .collect();
    Ok(RunOutcome {
        rows,
        status,
        converged,
        discarded_weight: discarded,
        wall_time_s: wall,
    })
}

/// Placeholder rows of a failed grid point, one per observable.
fn failed_rows(cfg: &RunConfig) -> Vec<Row> {
    cfg.observables
        .iter()
        .map(|obs| Row {
            g: cfg.g,
            delta: cfg.delta,
            kappa: cfg.kappa,
            n_sites: cfg.n_sites,
            chi_max: cfg.chi_max,
            site_i: center_site(cfg.n_sites),
            site_j: None,
            observable: obs.clone(),
            value: f64::NAN,
            converged: false,
            discarded_weight: f64::NAN,
            wall_time_s: 0.0,
            status: Status::Failed,
        })
        .collect()
}

/// Run every grid point on a pool of `workers` threads. Rows come back in
/// grid order whatever the number of workers.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<Row>, CliError> {
    spec.validate()?;
    let grid = spec.grid()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let per_point: Vec<Vec<Row>> = pool.install(|| {
        grid.par_iter()
            .map(|cfg| match run_steady(cfg) {
                Ok(out) => out.rows,
                Err(e) => {
                    eprintln!("point g={} delta={} kappa={} failed: {e}", cfg.g, cfg.delta, cfg.kappa);
                    failed_rows(cfg)
                }
            })
            .collect()
    });
    Ok(per_point.into_iter().flatten().collect())
}

/// Mean-field labels over the sweep grid (chain length ignored).
pub fn meanfield_rows(spec: &SweepSpec) -> Result<Vec<PhaseRow>, CliError> {
    let grid = if spec.axes.is_empty() { vec![spec.base.clone()] } else { spec.grid()? };
    Ok(grid
        .par_iter()
        .map(|c| meanfield::phase_row(&ModelParams { n_sites: 1, ..c.params() }))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinWaveRow {
    pub l: usize,
    pub normal_abs: f64,
    pub anomalous_abs: f64,
    pub gaussian_negativity: f64,
}

/// Real-space spin-wave correlators for `l = 1..=l_max`.
pub fn spinwave_table(cfg: &RunConfig) -> Result<Vec<SpinWaveRow>, CliError> {
    let params = ModelParams { n_sites: 1, ..cfg.params() };
    let corr = spinwave::real_space_correlators(&params, cfg.l_max)?;
    (1..=cfg.l_max)
        .map(|l| {
            let v = spinwave::covariance_block(&corr, l)?;
            Ok(SpinWaveRow {
                l,
                normal_abs: corr.normal[l].norm(),
                anomalous_abs: corr.anomalous[l].norm(),
                gaussian_negativity: spinwave::gaussian_negativity(&v)?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLengthRow {
    pub g: f64,
    pub delta: f64,
    pub kappa: f64,
    pub xi_c: f64,
}

/// Spin-wave correlation length at every grid point.
pub fn spinwave_lengths(spec: &SweepSpec) -> Result<Vec<CorrelationLengthRow>, CliError> {
    spec.grid()?
        .iter()
        .map(|c| {
            let p = ModelParams { n_sites: 1, ..c.params() };
            Ok(CorrelationLengthRow {
                g: c.g,
                delta: c.delta,
                kappa: c.kappa,
                xi_c: spinwave::correlation_length(&p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_pairs_straddle_the_middle() {
        assert_eq!(pairs(10, 1, Scope::Center), vec![(4, 5)]);
        assert_eq!(pairs(10, 2, Scope::Center), vec![(3, 5)]);
        assert_eq!(pairs(10, 3, Scope::Center), vec![(3, 6)]);
        assert_eq!(pairs(4, 1, Scope::All), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn trivial_state_row() {
        let mut cfg = RunConfig::new(0.3, 0.0, 0.5, 10);
        cfg.observables = vec!["sz".into()];
        let out = run_steady(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.converged);
        assert!((out.rows[0].value + 1.0).abs() < 1e-8);
    }

    #[test]
    fn backends_agree_on_a_short_chain() {
        let mut cfg = RunConfig::new(0.6, 1.0, 0.5, 4);
        cfg.observables = vec!["xx".into(), "negativity".into(), "sm_sm_abs".into()];
        cfg.separations = vec![1, 2];
        cfg.tol = 1e-9;
        let mpo = run_steady(&cfg).unwrap();
        cfg.backend = Backend::Exact;
        let exact = run_steady(&cfg).unwrap();
        for (a, b) in mpo.rows.iter().zip(&exact.rows) {
            assert_eq!((a.site_i, a.site_j, &a.observable), (b.site_i, b.site_j, &b.observable));
            assert!((a.value - b.value).abs() < 1e-3, "{a:?} vs {b:?}");
        }
    }
}
