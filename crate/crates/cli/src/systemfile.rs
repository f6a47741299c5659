//! JSON system definitions: square matrices stored row-major, with an
//! optional default delay and scan range.

use anyhow::{bail, Context, Result};
use delay_stability::lmi::SystemModel;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanRange {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub name: String,
    pub n_x: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "A_d")]
    pub a_d: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanRange>,
}

impl SystemFile {
    pub fn load(path: &Path) -> Result<SystemFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read system file {}", path.display()))?;
        let file: SystemFile = serde_json::from_str(&text)
            .with_context(|| format!("malformed system file {}", path.display()))?;
        let want = file.n_x * file.n_x;
        if file.a.len() != want || file.a_d.len() != want {
            bail!(
                "system '{}': matrices must hold n_x^2 = {} entries, got {} and {}",
                file.name,
                want,
                file.a.len(),
                file.a_d.len()
            );
        }
        Ok(file)
    }

    pub fn model(&self, tau: usize) -> Result<SystemModel> {
        let a = DMatrix::from_row_slice(self.n_x, self.n_x, &self.a);
        let a_d = DMatrix::from_row_slice(self.n_x, self.n_x, &self.a_d);
        SystemModel::new(a, a_d, tau)
            .map_err(|e| anyhow::anyhow!("system '{}': {e}", self.name))
    }
}
