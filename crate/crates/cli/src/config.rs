//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use iforge_core::json::JsonComplex;
use iforge_core::scatter::named_device;
use iforge_core::{CoefficientTensor, FockSuperposition, SetupSpec, Species, C64};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Informational; the subcommand decides what runs.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub setup: Option<SetupSpec>,
    #[serde(default)]
    pub device: Option<DeviceRef>,
    #[serde(default)]
    pub input: Option<InputState>,
    #[serde(default)]
    pub species: Option<Species>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Relative singular-value threshold for ranks.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Two-photon state shared by each source pair in the swapping
    /// experiment; defaults to `(|HH⟩ + |VV⟩)/√2`.
    #[serde(default)]
    pub pair_state: Option<CoefficientTensor>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRef {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// Input state of a simulation.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputState {
    /// One particle per spatial mode, in the given 1-based internal states.
    Basis(Vec<usize>),
    /// Product of single-particle internal states, one per spatial mode.
    Product(Vec<Vec<JsonComplex>>),
    Tensor(CoefficientTensor),
    Fock(FockSuperposition),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    /// Evenly spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        (0..self.steps)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!("field `{path}`: {inner}"))
        })?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> CliResult<()> {
        if self.setup.is_some() && self.device.is_some() {
            return Err(CliError::Config("give either `setup` or `device`, not both".into()));
        }
        if let Some(s) = &self.sweep {
            if s.steps == 0 {
                return Err(CliError::Config("field `sweep.steps`: sweep grid is empty".into()));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Config(format!("field `tolerance`: {t} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// The configured setup, resolving named devices.
    pub fn resolve_setup(&self) -> CliResult<SetupSpec> {
        match (&self.setup, &self.device) {
            (Some(s), None) => Ok(s.clone()),
            (None, Some(dev)) => Ok(named_device(&dev.name, &dev.params)?),
            _ => Err(CliError::Config("one of `setup` or `device` is required".into())),
        }
    }
}

impl InputState {
    /// Qudit tensor for the inputs that have one.
    pub fn tensor(&self, d: usize) -> CliResult<Option<CoefficientTensor>> {
        Ok(match self {
            InputState::Basis(idx) => Some(CoefficientTensor::basis(d, idx)?),
            InputState::Product(locals) => {
                let locals: Vec<Vec<C64>> = locals.iter().map(|v| v.iter().map(|&z| z.into()).collect()).collect();
                Some(CoefficientTensor::product(&locals)?)
            }
            InputState::Tensor(t) => Some(t.clone()),
            InputState::Fock(_) => None,
        })
    }
}
