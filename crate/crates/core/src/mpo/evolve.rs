use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::update::{commit, compute_bond, pauli_gate, preserves_parity};
use super::{MpoError, MpoState};
use crate::model::pauli::{sigma_minus, Pauli};
use crate::model::{build_pair_generator_with_split, lindblad_superoperator, ModelParams, OnSiteSplit};
use crate::{linalg, C64};

/// Cached Trotter gates `exp(M_pair τ)` for one `(params, dt)`.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub params: ModelParams,
    pub dt: f64,
    /// Per bond: `(exp(M dt/2), exp(M dt), parity preserving)`.
    bond_gates: Vec<(DMatrix<f64>, DMatrix<f64>, bool)>,
    /// Single-site propagator for a one-site chain.
    site_gate: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl Propagator {
    pub fn new(params: &ModelParams, dt: f64) -> Result<Self, MpoError> {
        Self::with_split(params, dt, OnSiteSplit::Balanced)
    }

    pub fn with_split(params: &ModelParams, dt: f64, split: OnSiteSplit) -> Result<Self, MpoError> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(MpoError::InvalidNumerics(format!("dt must be positive, got {dt}")));
        }
        let n = params.n_sites;
        if n == 1 {
            return Ok(Self {
                params: *params,
                dt,
                bond_gates: Vec::new(),
                site_gate: Some(site_gates(params, dt)),
            });
        }
        // Bonds sharing the same on-site weights share gates.
        let mut cache: HashMap<(u64, u64), (DMatrix<f64>, DMatrix<f64>, bool)> = HashMap::new();
        let mut bond_gates = Vec::with_capacity(n - 1);
        for bond in 0..n - 1 {
            let (wl, wr) = split.weights(bond, n);
            let key = (wl.to_bits(), wr.to_bits());
            if !cache.contains_key(&key) {
                let generator = pauli_gate(&build_pair_generator_with_split(params, bond, split)?.matrix)?;
                let half = (&generator * (0.5 * dt)).exp();
                let full = (&generator * dt).exp();
                let sym = preserves_parity(&half) && preserves_parity(&full);
                cache.insert(key, (half, full, sym));
            }
            bond_gates.push(cache[&key].clone());
        }
        Ok(Self {
            params: *params,
            dt,
            bond_gates,
            site_gate: None,
        })
    }

    fn check(&self, state: &MpoState) -> Result<(), MpoError> {
        if state.n_sites() != self.params.n_sites {
            return Err(MpoError::InvalidNumerics(format!(
                "propagator built for {} sites, state has {}",
                self.params.n_sites,
                state.n_sites()
            )));
        }
        Ok(())
    }

    /// Apply the gates of one sublattice of bonds. `first` is 0 for the
    /// bonds (0,1), (2,3), ... and 1 for (1,2), (3,4), ...
    fn layer(&self, state: &mut MpoState, first: usize, full: bool) -> Result<(), MpoError> {
        let bonds: Vec<usize> = (first..self.bond_gates.len()).step_by(2).collect();
        let gate = |b: usize| {
            let g = &self.bond_gates[b];
            (if full { &g.1 } else { &g.0 }, g.2)
        };
        let results: Result<Vec<_>, MpoError> = if bonds.len() > 1 {
            let snapshot = &*state;
            bonds
                .par_iter()
                .map(|&b| {
                    let (g, sym) = gate(b);
                    compute_bond(snapshot, b, g, sym)
                })
                .collect()
        } else {
            bonds
                .iter()
                .map(|&b| {
                    let (g, sym) = gate(b);
                    compute_bond(state, b, g, sym)
                })
                .collect()
        };
        for res in results? {
            commit(state, res);
        }
        Ok(())
    }

    fn site_step(&self, state: &mut MpoState, steps: usize) -> Result<(), MpoError> {
        let (_, full) = self.site_gate.as_ref().expect("single-site chain");
        let (tensors, _, charges, _) = state.parts_mut();
        let c: Vec<f64> = (0..4).map(|i| tensors[0][i][(0, 0)]).collect();
        let mut v = nalgebra::DVector::from_vec(c);
        for _ in 0..steps {
            v = full * v;
        }
        if v[1] != 0.0 || v[2] != 0.0 {
            *charges = None;
        }
        for i in 0..4 {
            tensors[0][i][(0, 0)] = v[i];
        }
        Ok(())
    }

    /// `n` consecutive symmetric Trotter steps with adjacent half steps on
    /// the first sublattice fused into full steps.
    pub fn fused_steps(&self, state: &mut MpoState, n: usize, renormalize: bool) -> Result<(), MpoError> {
        self.check(state)?;
        if n == 0 {
            return Ok(());
        }
        if self.site_gate.is_some() {
            self.site_step(state, n)?;
        } else {
            self.layer(state, 0, false)?;
            for k in 0..n {
                self.layer(state, 1, true)?;
                self.layer(state, 0, k + 1 < n)?;
            }
        }
        if renormalize {
            state.renormalize()?;
        }
        Ok(())
    }
}

fn site_gates(params: &ModelParams, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = Pauli::Z.matrix() * C64::new(-params.g, 0.0);
    let l = lindblad_superoperator(&h, &[(params.kappa, sigma_minus())]);
    let mut t = DMatrix::zeros(4, 4);
    for p in Pauli::ALL {
        t.set_column(p.index(), &linalg::vec_row_major(&p.matrix()));
    }
    let g = (t.adjoint() * l * &t * C64::new(0.5, 0.0)).map(|z| z.re);
    ((&g * (0.5 * dt)).exp(), (&g * dt).exp())
}

/// One second-order step `e^{M_odd dt/2} e^{M_even dt} e^{M_odd dt/2}`
/// followed by trace renormalization. Here "odd" names the bonds
/// (0,1), (2,3), ... in 0-indexed sites.
pub fn trotter_step(state: &mut MpoState, propagator: &Propagator) -> Result<(), MpoError> {
    propagator.fused_steps(state, 1, true)
}

/// Numerical settings of a steady-state run, in units of `1/J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub check_interval: f64,
    pub tol: f64,
    pub t_max: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            check_interval: 1.0,
            tol: 1e-6,
            t_max: 500.0,
        }
    }
}

impl EvolveOptions {
    pub fn validate(&self) -> Result<(), MpoError> {
        let bad = |m: String| Err(MpoError::InvalidNumerics(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.check_interval >= self.dt) {
            return bad(format!("check_interval {} below dt {}", self.check_interval, self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive and finite, got {}", self.t_max));
        }
        Ok(())
    }

    fn steps_per_check(&self) -> usize {
        ((self.check_interval / self.dt).round() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Simulated time.
    pub elapsed: f64,
    pub steps: u64,
    /// Largest change of a monitored observable between consecutive checks.
    pub drifts: Vec<f64>,
    pub converged: bool,
    pub final_drift: f64,
    /// Largest discarded weight of any bond update during the run.
    pub max_discarded: f64,
}

/// `⟨σᶻ_j⟩` for all sites followed by `⟨σˣ_j σˣ_{j+1}⟩` for all bonds.
/// Without parity symmetry `⟨σˣ_j⟩` and `⟨σʸ_j⟩` are appended: single-site
/// coherences relax at half the rate of these, so leaving them out would
/// stop the run while they are still of order `√tol`.
pub fn monitored_observables(state: &MpoState) -> Vec<f64> {
    let mut v = state.magnetization_profile();
    v.extend(state.bond_profile(Pauli::X, Pauli::X));
    if !state.is_parity_symmetric() {
        v.extend(state.site_profile(Pauli::X));
        v.extend(state.site_profile(Pauli::Y));
    }
    v
}

/// Trotter-step until the monitored observables change by less than `tol`
/// between checks, or until `t_max`.
pub fn evolve_steady(
    state: &mut MpoState,
    params: &ModelParams,
    options: &EvolveOptions,
) -> Result<ConvergenceReport, MpoError> {
    let propagator = Propagator::new(params, options.dt)?;
    evolve_steady_with(state, &propagator, options)
}

/// [`evolve_steady`] with a prebuilt propagator.
pub fn evolve_steady_with(
    state: &mut MpoState,
    propagator: &Propagator,
    options: &EvolveOptions,
) -> Result<ConvergenceReport, MpoError> {
    options.validate()?;
    if (propagator.dt - options.dt).abs() > 1e-15 * options.dt {
        return Err(MpoError::InvalidNumerics("propagator dt differs from options".into()));
    }
    state.reset_truncation_stats();
    let per_check = options.steps_per_check();
    let max_steps = (options.t_max / options.dt).round() as u64;
    let mut prev = monitored_observables(state);
    let mut report = ConvergenceReport {
        elapsed: 0.0,
        steps: 0,
        drifts: Vec::new(),
        converged: false,
        final_drift: f64::INFINITY,
        max_discarded: 0.0,
    };
    while report.steps < max_steps {
        let n = per_check.min((max_steps - report.steps) as usize);
        propagator.fused_steps(state, n, true)?;
        report.steps += n as u64;
        report.elapsed = report.steps as f64 * options.dt;
        let obs = monitored_observables(state);
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(MpoError::NonFinite(format!("observables at t = {}", report.elapsed)));
        }
        let drift = obs.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.drifts.push(drift);
        report.final_drift = drift;
        prev = obs;
        if drift < options.tol {
            report.converged = true;
            break;
        }
    }
    report.max_discarded = state.max_discarded;
    Ok(report)
}
