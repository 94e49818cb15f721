use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversaries::AdversarySpec;
use crate::error::{Error, Result};
use crate::graph::BuildParams;
use crate::quantum::DEFAULT_ADIABATIC_STEPS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub label: String,
    pub params: BuildParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryRun {
    pub adversary: AdversarySpec,
    pub budget: u64,
    pub trials: usize,
    #[serde(default)]
    pub label_bits: Option<u32>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSettings {
    /// Adiabatic gap sweep grid size on the full instance; 0 skips it.
    #[serde(default)]
    pub s_points: usize,
    /// Projector weight of the sweep; defaults to `m`.
    #[serde(default)]
    pub endpoint_weight: Option<f64>,
    #[serde(default = "yes")]
    pub top_eigenpair: bool,
    /// Compare with the collapsed path on undecorated instances.
    #[serde(default = "yes")]
    pub collapse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    pub t_max: f64,
    pub samples: usize,
}

fn default_steps() -> usize {
    DEFAULT_ADIABATIC_STEPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticSettings {
    pub total_time: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Defaults to `m`.
    #[serde(default)]
    pub endpoint_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSettings {
    #[serde(default)]
    pub scan: Option<ScanSettings>,
    #[serde(default)]
    pub adiabatic: Option<AdiabaticSettings>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub record: Option<PathBuf>,
    /// Directory for CSV curves.
    #[serde(default)]
    pub curves_dir: Option<PathBuf>,
}

/// A complete experiment: instances, and the stages to run on each.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub adversaries: Vec<AdversaryRun>,
    #[serde(default)]
    pub spectral: Option<SpectralSettings>,
    #[serde(default)]
    pub quantum: Option<QuantumSettings>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut labels = HashSet::new();
        for inst in &self.instances {
            if !labels.insert(inst.label.as_str()) {
                return Err(Error::invalid(format!("duplicate instance label {:?}", inst.label)));
            }
            inst.params.validate()?;
            inst.params.schedule()?;
        }
        for a in &self.adversaries {
            if a.budget == 0 {
                return Err(Error::invalid("adversary budget must be at least 1"));
            }
        }
        if let Some(s) = &self.spectral {
            if s.s_points == 1 {
                return Err(Error::invalid("a gap sweep needs 0 or at least 2 points"));
            }
            if s.endpoint_weight.is_some_and(|w| !positive_finite(w)) {
                return Err(Error::invalid("endpoint weight must be positive"));
            }
        }
        if let Some(q) = &self.quantum {
            if let Some(scan) = &q.scan {
                if scan.samples < 2 || !(scan.t_max >= 0.0 && scan.t_max.is_finite()) {
                    return Err(Error::invalid("scan needs samples >= 2 and finite t_max >= 0"));
                }
            }
            if let Some(a) = &q.adiabatic {
                if a.steps == 0 || !(a.total_time >= 0.0 && a.total_time.is_finite()) {
                    return Err(Error::invalid("adiabatic run needs steps >= 1 and finite T >= 0"));
                }
                if a.endpoint_weight.is_some_and(|w| !positive_finite(w)) {
                    return Err(Error::invalid("endpoint weight must be positive"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the config (output paths excluded)
    /// and the crate version.
    pub fn hash(&self) -> String {
        let mut stripped = self.clone();
        stripped.output = OutputPaths::default();
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&stripped).expect("config serializes"));
        h.update(b"\0");
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
