//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": {"sigma": 1.0, "p": 2, "d": 1, "resolution": 4096},
//!   "function": "cosine",
//!   "procedure": {"type": "fixed", "betas": [0.5], "C": 1.0},
//!   "kernels": ["box"],
//!   "n_grid": [1024, 4096],
//!   "replications": 2,
//!   "seed": 1,
//!   "outputs": {"dir": "out"}
//! }
//! ```
//!
//! A fixed procedure yields one experiment per entry of `betas`, paired with
//! `kernels` entry by entry (a single kernel is shared by all). A Lepski
//! procedure yields one experiment over the whole grid and needs
//! `target_beta`; `C1` is calibrated from pure noise when absent.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::fmt_num;
use crate::risk_harness::{ExperimentConfig, Procedure};

fn default_p() -> f64 {
    2.0
}

fn default_dim() -> usize {
    1
}

fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub sigma: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_dim")]
    pub d: usize,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcedureKind {
    Fixed,
    Lepski,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcedureSection {
    #[serde(rename = "type")]
    pub kind: ProcedureKind,
    pub betas: Vec<f64>,
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
    #[serde(rename = "C1", default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub function: String,
    pub procedure: ProcedureSection,
    pub kernels: Vec<String>,
    pub n_grid: Vec<u64>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputsSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("malformed config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Compact JSON with object keys sorted, independent of the key order
    /// of the source file.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// The experiments described by this config, each validated.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>> {
        let fail = |m: String| Err(Error::Validation(m));
        let p = &self.procedure;
        if p.betas.is_empty() {
            return fail("procedure.betas is empty".into());
        }
        if self.kernels.is_empty() {
            return fail("kernels is empty".into());
        }
        let base = |name: String, procedure: Procedure, target_beta: f64| ExperimentConfig {
            name,
            function: self.function.clone(),
            dim: self.model.d,
            resolution: self.model.resolution,
            sigma: self.model.sigma,
            p: self.model.p,
            c: p.c,
            n_grid: self.n_grid.clone(),
            replications: self.replications,
            seed: self.seed,
            procedure,
            target_beta,
        };
        let experiments = match p.kind {
            ProcedureKind::Fixed => {
                if p.c1.is_some() || p.target_beta.is_some() {
                    return fail("C1 and target_beta apply to the lepski procedure only".into());
                }
                if self.kernels.len() != 1 && self.kernels.len() != p.betas.len() {
                    return fail(format!(
                        "{} kernels for {} betas; give one kernel or one per beta",
                        self.kernels.len(),
                        p.betas.len()
                    ));
                }
                p.betas
                    .iter()
                    .enumerate()
                    .map(|(i, &beta)| {
                        let kernel = self.kernels[i.min(self.kernels.len() - 1)].clone();
                        base(
                            format!("fixed_beta_{}", fmt_num(beta)),
                            Procedure::Fixed { beta, kernel },
                            beta,
                        )
                    })
                    .collect::<Vec<_>>()
            }
            ProcedureKind::Lepski => {
                let Some(target) = p.target_beta else {
                    return fail("the lepski procedure needs procedure.target_beta".into());
                };
                vec![base(
                    "lepski".into(),
                    Procedure::Lepski {
                        betas: p.betas.clone(),
                        kernels: self.kernels.clone(),
                        c1: p.c1,
                    },
                    target,
                )]
            }
        };
        for e in &experiments {
            e.validate()?;
        }
        Ok(experiments)
    }
}
