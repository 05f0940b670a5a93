//! Built-in parameter sets.
//!
//! Every preset spells out `dt`, `tol`, `t_max` and `check_interval` so a
//! table can be reproduced from its name alone.

use super::config::{AxisName, AxisSpec, RunConfig, SweepSpec};

pub const PRESETS: [(&str, &str); 9] = [
    ("fig2", "N=4 Ising chain: nearest-neighbour negativity vs g, compare with --backend exact"),
    ("fig3", "N=40 Ising chain: xx correlations vs g for separations 1..19"),
    ("fig4", "N=40 Ising chain: negativity, discord and integrated susceptibility vs g"),
    ("fig5", "N=40, delta=0.05: negativity, discord and xx correlations vs g"),
    ("fig6", "N=40 Ising chain: nearest-neighbour xx vs g, for comparison with meanfield"),
    ("fig7", "N=40, g=-1: negativity and discord vs anisotropy"),
    ("fig8", "N=40, g=-1: |<s-s->| vs separation over decay rate and anisotropy"),
    ("fig9", "N=40, g=-1: negativity and discord vs decay rate at delta 1 and 0.05"),
    ("phase", "mean-field phase labels over (g, kappa) at delta=1"),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

fn base(g: f64, delta: f64, kappa: f64, n: usize, obs: &[&str], seps: impl IntoIterator<Item = usize>) -> RunConfig {
    let mut c = RunConfig::new(g, delta, kappa, n);
    c.chi_max = 20;
    c.dt = 0.01;
    c.tol = 1e-6;
    c.t_max = 500.0;
    c.check_interval = 1.0;
    c.observables = obs.iter().map(|s| s.to_string()).collect();
    c.separations = seps.into_iter().collect();
    c
}

fn g_axis(count: usize) -> AxisSpec {
    AxisSpec::linear(AxisName::G, -2.0, 2.0, count)
}

pub fn preset(name: &str) -> Option<SweepSpec> {
    let (base, axes) = match name {
        "fig2" => (base(0.0, 1.0, 0.5, 4, &["negativity"], [1]), vec![g_axis(41)]),
        "fig3" => (base(0.0, 1.0, 0.5, 40, &["xx"], 1..=19), vec![g_axis(41)]),
        "fig4" => (
            base(0.0, 1.0, 0.5, 40, &["negativity", "discord", "s_int"], 1..=4),
            vec![g_axis(41)],
        ),
        "fig5" => (
            base(0.0, 0.05, 0.5, 40, &["negativity", "discord", "xx"], 1..=6),
            vec![g_axis(41)],
        ),
        "fig6" => (base(0.0, 1.0, 0.5, 40, &["xx"], [1]), vec![g_axis(41)]),
        "fig7" => (
            base(-1.0, 1.0, 0.5, 40, &["negativity", "discord"], 1..=10),
            vec![AxisSpec::list(AxisName::Delta, &[1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01])],
        ),
        "fig8" => (
            // Correlators here are of order Δ and fall off exponentially, so
            // the absolute drift threshold must be far below the default.
            RunConfig {
                tol: 1e-10,
                ..base(-1.0, 0.005, 0.5, 40, &["sm_sm_abs"], 1..=10)
            },
            vec![
                AxisSpec::list(AxisName::Kappa, &[0.5, 1.0, 2.0, 5.0]),
                AxisSpec::list(AxisName::Delta, &[0.02, 0.01, 0.005]),
            ],
        ),
        "fig9" => (
            base(-1.0, 1.0, 0.5, 40, &["negativity", "discord"], 1..=3),
            vec![
                AxisSpec::list(AxisName::Delta, &[1.0, 0.05]),
                AxisSpec::list(AxisName::Kappa, &[0.1, 0.25, 0.5, 1.0, 1.5, 2.0]),
            ],
        ),
        "phase" => (
            base(0.0, 1.0, 0.5, 1, &["sz"], []),
            vec![g_axis(81), AxisSpec::linear(AxisName::Kappa, 0.05, 3.0, 60)],
        ),
        _ => return None,
    };
    Some(SweepSpec { base, axes })
}
