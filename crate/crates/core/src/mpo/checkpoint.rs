//! Versioned JSON dump of an [`MpoState`].
//!
//! Layout (`format_version` 1):
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "basis": "pauli:I,X,Y,Z",
//!   "params": { "g": .., "delta": .., "kappa": .., "n_sites": .. } | null,
//!   "chi_max": 20,
//!   "log_scale": -2.77,
//!   "sites": [ { "rows": χ_{j-1}, "cols": χ_j, "data": [[..]; 4] }, .. ],
//!   "lambdas": [[..], ..],
//!   "charges": [[0, 1, ..], ..] | null
//! }
//! ```
//!
//! `data[i]` holds `A_j^i = Γ_j^i λ_j` in column-major order.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{MpoError, MpoState, BASIS_TAG};
use crate::model::ModelParams;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteTensor {
    pub rows: usize,
    pub cols: usize,
    pub data: [Vec<f64>; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub basis: String,
    pub params: Option<ModelParams>,
    pub chi_max: usize,
    pub log_scale: f64,
    pub sites: Vec<SiteTensor>,
    pub lambdas: Vec<Vec<f64>>,
    pub charges: Option<Vec<Vec<u8>>>,
}

impl Checkpoint {
    pub fn from_state(state: &MpoState, params: Option<ModelParams>) -> Self {
        let sites = state
            .tensors()
            .iter()
            .map(|t| SiteTensor {
                rows: t[0].nrows(),
                cols: t[0].ncols(),
                data: std::array::from_fn(|i| t[i].as_slice().to_vec()),
            })
            .collect();
        Self {
            format_version: CHECKPOINT_VERSION,
            basis: BASIS_TAG.to_string(),
            params,
            chi_max: state.chi_max,
            log_scale: state.log_scale(),
            sites,
            lambdas: state.lambdas().to_vec(),
            charges: state.charges().cloned(),
        }
    }

    fn check_header(&self) -> Result<(), MpoError> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(MpoError::Checkpoint(format!("unsupported format_version {}", self.format_version)));
        }
        if self.basis != BASIS_TAG {
            return Err(MpoError::Checkpoint(format!("unknown basis {:?}", self.basis)));
        }
        Ok(())
    }

    pub fn into_state(self) -> Result<MpoState, MpoError> {
        let bad = |m: String| MpoError::Checkpoint(m);
        self.check_header()?;
        let n = self.sites.len();
        if n == 0 || self.lambdas.len() + 1 != n {
            return Err(bad("site and bond counts disagree".into()));
        }
        let mut tensors = Vec::with_capacity(n);
        for (j, s) in self.sites.iter().enumerate() {
            let left = if j == 0 { 1 } else { self.lambdas[j - 1].len() };
            let right = if j + 1 == n { 1 } else { self.lambdas[j].len() };
            if s.rows != left || s.cols != right || s.data.iter().any(|d| d.len() != left * right) {
                return Err(bad(format!("site {j} has inconsistent dimensions")));
            }
            tensors.push(std::array::from_fn(|i| DMatrix::from_column_slice(left, right, &s.data[i])));
        }
        if let Some(ch) = &self.charges {
            if ch.len() != self.lambdas.len() || ch.iter().zip(&self.lambdas).any(|(c, l)| c.len() != l.len()) {
                return Err(bad("charges do not match bond dimensions".into()));
            }
        }
        let mut state = MpoState::all_down(n, self.chi_max.max(1))?;
        let (t, l, c, scale) = state.parts_mut();
        *t = tensors;
        *l = self.lambdas;
        *c = self.charges;
        *scale = self.log_scale;
        Ok(state)
    }

    pub fn to_json(&self) -> Result<String, MpoError> {
        serde_json::to_string(self).map_err(|e| MpoError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, MpoError> {
        let c: Self = serde_json::from_str(text).map_err(|e| MpoError::Checkpoint(e.to_string()))?;
        c.check_header()?;
        Ok(c)
    }
}
