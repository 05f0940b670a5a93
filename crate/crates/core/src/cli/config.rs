//! Flat TOML configuration of runs and sweeps.
//!
//! Every key of [`RunConfig`] is optional except the four model parameters.
//! A sweep file is a run file plus an `axes` array of inline tables:
//!
//! ```toml
//! g = 0.0
//! delta = 1.0
//! kappa = 0.5
//! n_sites = 20
//! observables = ["negativity", "discord"]
//! separations = [1, 2]
//! axes = [{ name = "g", start = -2.0, stop = 2.0, count = 41 }]
//! ```

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::ModelParams;
use crate::mpo::EvolveOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format {s:?} (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Matrix-product-operator evolution.
    Mpo,
    /// Exact steady state (at most six sites).
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    AllDown,
    MaximallyMixed,
    /// Independent random pure product state drawn from `seed`.
    RandomProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Only the site or pair closest to the chain centre.
    Center,
    /// Every site, or every pair at each separation.
    All,
}

/// Observable names accepted in `observables`.
pub const OBSERVABLES: [&str; 10] = [
    "sz", "sx", "sy", "xx", "yy", "zz", "negativity", "discord", "sm_sm_abs", "s_int",
];

fn d_chi() -> usize {
    20
}
fn d_dt() -> f64 {
    EvolveOptions::default().dt
}
fn d_tol() -> f64 {
    EvolveOptions::default().tol
}
fn d_tmax() -> f64 {
    EvolveOptions::default().t_max
}
fn d_check() -> f64 {
    EvolveOptions::default().check_interval
}
fn d_obs() -> Vec<String> {
    vec!["sz".into(), "xx".into(), "negativity".into()]
}
fn d_seps() -> Vec<usize> {
    vec![1]
}
fn d_format() -> Format {
    Format::Csv
}
fn d_backend() -> Backend {
    Backend::Mpo
}
fn d_initial() -> InitialState {
    InitialState::AllDown
}
fn d_scope() -> Scope {
    Scope::Center
}
fn d_lmax() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub g: f64,
    pub delta: f64,
    pub kappa: f64,
    pub n_sites: usize,
    #[serde(default = "d_chi")]
    pub chi_max: usize,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_tmax")]
    pub t_max: f64,
    #[serde(default = "d_check")]
    pub check_interval: f64,
    #[serde(default = "d_obs")]
    pub observables: Vec<String>,
    #[serde(default = "d_seps")]
    pub separations: Vec<usize>,
    #[serde(default = "d_scope")]
    pub scope: Scope,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "d_format")]
    pub format: Format,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_backend")]
    pub backend: Backend,
    #[serde(default = "d_initial")]
    pub initial: InitialState,
    /// Largest separation of spin-wave tables.
    #[serde(default = "d_lmax")]
    pub l_max: usize,
}

impl RunConfig {
    pub fn new(g: f64, delta: f64, kappa: f64, n_sites: usize) -> Self {
        Self {
            g,
            delta,
            kappa,
            n_sites,
            chi_max: d_chi(),
            dt: d_dt(),
            tol: d_tol(),
            t_max: d_tmax(),
            check_interval: d_check(),
            observables: d_obs(),
            separations: d_seps(),
            scope: d_scope(),
            output: None,
            format: d_format(),
            seed: 0,
            backend: d_backend(),
            initial: d_initial(),
            l_max: d_lmax(),
        }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            g: self.g,
            delta: self.delta,
            kappa: self.kappa,
            n_sites: self.n_sites,
        }
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            dt: self.dt,
            check_interval: self.check_interval,
            tol: self.tol,
            t_max: self.t_max,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.evolve_options()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.chi_max == 0 {
            return Err(CliError::Config("chi_max must be positive".into()));
        }
        // TOML integers are signed.
        if self.seed > i64::MAX as u64 {
            return Err(CliError::Config(format!("seed {} exceeds {}", self.seed, i64::MAX)));
        }
        if self.backend == Backend::Exact && self.n_sites > crate::oracle::MAX_SITES {
            return Err(CliError::Config(format!(
                "exact backend supports at most {} sites",
                crate::oracle::MAX_SITES
            )));
        }
        for o in &self.observables {
            if !OBSERVABLES.contains(&o.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown observable {o:?}; expected one of {}",
                    OBSERVABLES.join(", ")
                )));
            }
        }
        for &l in &self.separations {
            if l == 0 || l >= self.n_sites {
                return Err(CliError::Config(format!(
                    "separation {l} invalid for {} sites",
                    self.n_sites
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Set a model parameter by name.
    pub fn set(&mut self, name: AxisName, value: f64) {
        match name {
            AxisName::G => self.g = value,
            AxisName::Delta => self.delta = value,
            AxisName::Kappa => self.kappa = value,
            AxisName::NSites => self.n_sites = value.round() as usize,
            AxisName::ChiMax => self.chi_max = value.round() as usize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    G,
    Delta,
    Kappa,
    NSites,
    ChiMax,
}

/// One sweep axis: either `values`, or `count` points from `start` to `stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: AxisName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl AxisSpec {
    pub fn linear(name: AxisName, start: f64, stop: f64, count: usize) -> Self {
        Self {
            name,
            start: Some(start),
            stop: Some(stop),
            count: Some(count),
            values: None,
        }
    }

    pub fn list(name: AxisName, values: &[f64]) -> Self {
        Self {
            name,
            start: None,
            stop: None,
            count: None,
            values: Some(values.to_vec()),
        }
    }

    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if let Some(v) = &self.values {
            if self.start.is_some() || self.stop.is_some() || self.count.is_some() {
                return Err(CliError::Config("axis has both values and a range".into()));
            }
            if v.is_empty() {
                return Err(CliError::Config("axis values are empty".into()));
            }
            return Ok(v.clone());
        }
        match (self.start, self.stop, self.count) {
            (Some(a), Some(b), Some(n)) if n >= 1 => Ok(if n == 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }),
            (_, _, Some(0)) => Err(CliError::Config("axis count must be at least 1".into())),
            _ => Err(CliError::Config("axis needs start, stop and count, or values".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub axes: Vec<AxisSpec>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(CliError::Config(format!("a sweep needs 1 or 2 axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(CliError::Config("sweep axes must name distinct parameters".into()));
        }
        for a in &self.axes {
            a.points()?;
        }
        for cfg in self.grid()? {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Grid point configurations in lexicographic axis order.
    pub fn grid(&self) -> Result<Vec<RunConfig>, CliError> {
        let mut out = vec![self.base.clone()];
        for axis in &self.axes {
            let pts = axis.points()?;
            out = out
                .into_iter()
                .flat_map(|cfg| {
                    pts.iter().map(move |&v| {
                        let mut c = cfg.clone();
                        c.set(axis.name, v);
                        c
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// Parse a run file with an additional `axes` key. A file without axes
    /// parses to an empty axis list.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let axes = match table.remove("axes") {
            Some(v) => v
                .try_into::<Vec<AxisSpec>>()
                .map_err(|e| CliError::Config(format!("axes: {e}")))?,
            None => Vec::new(),
        };
        let base: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { base, axes })
    }

    pub fn to_toml(&self) -> String {
        let mut table = toml::Table::try_from(&self.base).expect("config serializes");
        if !self.axes.is_empty() {
            table.insert(
                "axes".into(),
                toml::Value::try_from(&self.axes).expect("axes serialize"),
            );
        }
        toml::to_string(&table).expect("table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml("g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\n").unwrap();
        assert_eq!(c, RunConfig::new(0.3, 0.0, 0.5, 10));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\nchi = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn invalid_values_are_rejected() {
        for bad in [
            "g = 0.3\ndelta = 0.0\nkappa = -0.5\nn_sites = 10\n",
            "g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\nformat = \"xml\"\n",
            "g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\nobservables = [\"sq\"]\n",
            "g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\nseparations = [10]\n",
            "g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\ncheck_interval = 0.001\n",
        ] {
            assert!(RunConfig::from_toml(bad).is_err(), "{bad}");
        }
        let mut c = RunConfig::new(0.3, 0.0, 0.5, 10);
        c.seed = u64::MAX;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_round_trips() {
        let mut c = RunConfig::new(-1.0, 0.7, 0.25, 12);
        c.output = Some("out.csv".into());
        c.observables = vec!["discord".into(), "s_int".into()];
        c.separations = vec![1, 3];
        c.format = Format::Json;
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn sweep_grid_is_lexicographic() {
        let spec = SweepSpec::from_toml(
            "g = 0.0\ndelta = 1.0\nkappa = 0.5\nn_sites = 4\n\
             axes = [{ name = \"delta\", values = [1.0, 0.5] }, { name = \"g\", start = -1.0, stop = 1.0, count = 3 }]\n",
        )
        .unwrap();
        spec.validate().unwrap();
        let grid = spec.grid().unwrap();
        let pts: Vec<(f64, f64)> = grid.iter().map(|c| (c.delta, c.g)).collect();
        assert_eq!(
            pts,
            vec![(1.0, -1.0), (1.0, 0.0), (1.0, 1.0), (0.5, -1.0), (0.5, 0.0), (0.5, 1.0)]
        );
        assert_eq!(SweepSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn sweep_rejects_repeated_axes() {
        let spec = SweepSpec::from_toml(
            "g = 0.0\ndelta = 1.0\nkappa = 0.5\nn_sites = 4\n\
             axes = [{ name = \"g\", values = [1.0] }, { name = \"g\", values = [2.0] }]\n",
        )
        .unwrap();
        assert!(spec.validate().is_err());
    }
}
