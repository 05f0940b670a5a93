//! Validation suites run by `xyness validate`.

use std::fmt::Write;

use clap::ValueEnum;
use serde::Serialize;

use super::config::{Backend, RunConfig};
use super::run::{pairs, solve, Solved};
use super::CliError;
use crate::correlations;
use crate::meanfield;
use crate::model::pauli::Pauli;
use crate::model::ModelParams;
use crate::spinwave::{self, MomentSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracle,
    Duality,
    Meanfield,
    Spinwave,
    All,
}

/// One measured quantity against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

pub fn report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(
            s,
            "{} {:<32} value {:.3e} tolerance {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    s
}

fn mpo(g: f64, delta: f64, kappa: f64, n: usize) -> RunConfig {
    let mut c = RunConfig::new(g, delta, kappa, n);
    c.tol = 1e-9;
    c
}

fn nn_negativity(cfg: &RunConfig) -> Result<f64, CliError> {
    let (s, _, _) = solve(cfg)?;
    let (i, j) = pairs(cfg.n_sites, 1, cfg.scope)[0];
    Ok(correlations::negativity(&s.pair_density(i, j)?))
}

/// Short-chain MPO against exact diagonalization.
pub fn oracle_checks() -> Result<Vec<Check>, CliError> {
    let mut worst = 0.0f64;
    for k in 0..41 {
        let g = -2.0 + 0.1 * k as f64;
        let cfg = mpo(g, 1.0, 0.5, 4);
        let mut exact = cfg.clone();
        exact.backend = Backend::Exact;
        worst = worst.max((nn_negativity(&cfg)? - nn_negativity(&exact)?).abs());
    }
    let mut trivial = RunConfig::new(0.3, 0.0, 0.5, 5);
    trivial.backend = Backend::Exact;
    let (s, _, _) = solve(&trivial)?;
    let mut largest = 0.0f64;
    for i in 0..5 {
        for j in i + 1..5 {
            for a in [Pauli::X, Pauli::Y] {
                largest = largest.max(s.correlator(i, a, j, a).abs());
            }
            largest = largest.max(correlations::negativity(&s.pair_density(i, j)?));
        }
    }
    Ok(vec![
        Check::at_most("oracle.negativity_n4", worst, 1e-3),
        Check::at_most("oracle.trivial_limit", largest, 1e-8),
    ])
}

/// `⟨σˣσˣ⟩(g) = (-1)^l ⟨σˣσˣ⟩(-g)` on the central pairs of a 12-site chain.
/// The map is exact for the discretized evolution as well, so a bounded run
/// suffices even where truncation noise keeps the drift above `tol`.
pub fn duality_checks() -> Result<Vec<Check>, CliError> {
    let n = 12;
    let run = |g: f64| {
        let mut c = RunConfig::new(g, 1.0, 0.5, n);
        c.t_max = 50.0;
        solve(&c)
    };
    let (plus, _, _) = run(0.7)?;
    let (minus, _, _) = run(-0.7)?;
    let xx = |s: &Solved, i, j| s.correlator(i, Pauli::X, j, Pauli::X);
    let mut worst = 0.0f64;
    for i in 3..9 {
        for j in i + 1..9 {
            let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((xx(&plus, i, j) - sign * xx(&minus, i, j)).abs());
        }
    }
    Ok(vec![Check::at_most("duality.xx_g_to_minus_g", worst, 1e-4)])
}

/// Ising-limit solutions of `κ = 2√(1 - (g ∓ 1)²)` on `g ∈ [-2, 2]`.
fn ising_roots(kappa: f64) -> Vec<f64> {
    let s = (1.0 - kappa * kappa / 4.0).sqrt();
    vec![-1.0 - s, -1.0 + s, 1.0 - s, 1.0 + s]
}

pub fn meanfield_checks() -> Result<Vec<Check>, CliError> {
    let mut worst = 0.0f64;
    for kappa in [0.5, 1.0, 1.5] {
        let found = meanfield::phase_boundaries(1.0, kappa, -2.0, 2.0, 4001);
        let expected = ising_roots(kappa);
        if found.len() != expected.len() {
            worst = f64::INFINITY;
            continue;
        }
        for (f, e) in found.iter().zip(&expected) {
            worst = worst.max((f - e).abs());
        }
    }
    let mut residual = 0.0f64;
    for (g, delta, kappa) in [(-1.0, 1.0, 0.5), (1.0, 1.0, 0.5), (-0.8, 0.5, 0.3), (1.2, 0.7, 0.2)] {
        let p = ModelParams::new(g, delta, kappa, 1).map_err(|e| CliError::Config(e.to_string()))?;
        for staggered in [false, true] {
            for r in meanfield::uniform_ansatz_roots(&p, staggered) {
                residual = residual.max(r.residual);
            }
        }
    }
    Ok(vec![
        Check::at_most("meanfield.ising_boundary", worst, 1e-3),
        Check::at_most("meanfield.fixed_point_residual", residual, 1e-10),
    ])
}

pub fn spinwave_checks() -> Result<Vec<Check>, CliError> {
    let mut worst = 0.0f64;
    for (g, delta, kappa) in [(-1.0, 0.005, 0.5), (-1.0, 0.1, 1.0), (0.4, 0.3, 0.8), (-1.5, 0.05, 2.0)] {
        let p = ModelParams::new(g, delta, kappa, 1).map_err(|e| CliError::Config(e.to_string()))?;
        let corr = spinwave::real_space_correlators(&p, 8)?;
        let (n_cf, a_cf) = spinwave::quadrature_correlators(&p, 8, MomentSource::ClosedForm)?;
        worst = worst.max(corr.discrepancy);
        for l in 0..=8 {
            worst = worst.max((corr.normal[l].re - n_cf[l]).abs());
            worst = worst.max((corr.anomalous[l] - a_cf[l]).norm());
        }
    }
    // N(Δ)/Δ at l = 1 should settle: successive differences shrink.
    let ratio = |d: f64| -> Result<f64, CliError> {
        let p = ModelParams::new(-1.0, d, 0.5, 1).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spinwave::pair_negativity(&p, 1)? / d)
    };
    let r: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&d| ratio(d))
        .collect::<Result<_, _>>()?;
    let contraction = ((r[2] - r[1]) / (r[1] - r[0])).abs();
    Ok(vec![
        Check::at_most("spinwave.triple_agreement", worst, 1e-8),
        Check::at_most("spinwave.negativity_over_delta", contraction, 0.75),
    ])
}

pub fn run_validate(suite: Suite) -> Result<Vec<Check>, CliError> {
    Ok(match suite {
        Suite::Oracle => oracle_checks()?,
        Suite::Duality => duality_checks()?,
        Suite::Meanfield => meanfield_checks()?,
        Suite::Spinwave => spinwave_checks()?,
        Suite::All => {
            let mut v = oracle_checks()?;
            v.extend(duality_checks()?);
            v.extend(meanfield_checks()?);
            v.extend(spinwave_checks()?);
            v
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_roots_lie_on_the_boundary() {
        for kappa in [0.5, 1.0, 1.5] {
            for g in ising_roots(kappa) {
                assert!((meanfield::ising_boundary(g) - kappa).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_suites_pass() {
        for c in meanfield_checks().unwrap().into_iter().chain(spinwave_checks().unwrap()) {
            assert!(c.pass, "{c:?}");
        }
    }
}
