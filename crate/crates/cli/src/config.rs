//! JSON model description.

use std::fs;
use std::path::Path;

use dde_lambert::{DelaySystem, InputSignal, Piece, Preshape, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub system: SystemConfig,
    pub preshape: PreshapeConfig,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub a: f64,
    pub delay_coeffs: Vec<f64>,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default = "one")]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub from: f64,
    pub to: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreshapeConfig {
    pub pieces: Vec<PieceConfig>,
    pub x0: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputConfig {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Step {
        amplitude: f64,
        #[serde(default)]
        onset: f64,
    },
    Cosine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Exponential {
        amplitude: f64,
        rate: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    Sum {
        parts: Vec<InputConfig>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub branch_depth: usize,
    pub newton_tol: f64,
    pub stability_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { branch_depth: 5, newton_tol: 1e-10, stability_tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_end: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { t_end: 10.0, points: 1001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub steps_per_delay: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { steps_per_delay: 64 }
    }
}

fn one() -> f64 {
    1.0
}

/// A config with every derived object already validated.
pub struct Model {
    pub config: ModelConfig,
    pub system: DelaySystem<f64>,
    pub preshape: Preshape<f64>,
    pub input: InputSignal<f64>,
    pub options: SolverOptions<f64>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build(self) -> Result<Model, CliError> {
        let bad = |e: dde_lambert::Error| CliError::Config(e.to_string());
        let s = &self.system;
        let system = DelaySystem::new(s.a, s.delay_coeffs.clone(), s.h, s.b).map_err(bad)?;
        let pieces = self
            .preshape
            .pieces
            .iter()
            .map(|p| Piece { from: p.from, to: p.to, coeffs: p.coeffs.clone() })
            .collect();
        let preshape = Preshape::new(pieces, self.preshape.x0).map_err(bad)?;
        preshape.check_against(&system).map_err(bad)?;
        let input = self.input.to_signal();
        input.validate().map_err(bad)?;
        if !(self.solver.newton_tol > 0.0) || !(self.solver.stability_tol >= 0.0) {
            return Err(CliError::Config("solver tolerances must be positive".into()));
        }
        if !(self.grid.t_end > 0.0) || !self.grid.t_end.is_finite() || self.grid.points < 2 {
            return Err(CliError::Config("grid needs t_end > 0 and at least 2 points".into()));
        }
        if self.oracle.steps_per_delay < 4 {
            return Err(CliError::Config("oracle.steps_per_delay must be at least 4".into()));
        }
        let options = SolverOptions { newton_tol: self.solver.newton_tol, ..SolverOptions::default() };
        Ok(Model { config: self, system, preshape, input, options })
    }
}

impl InputConfig {
    pub fn to_signal(&self) -> InputSignal<f64> {
        match self {
            InputConfig::Zero => InputSignal::Zero,
            InputConfig::Constant { value } => InputSignal::Constant(*value),
            InputConfig::Step { amplitude, onset } => {
                InputSignal::Step { amplitude: *amplitude, onset: *onset }
            }
            InputConfig::Cosine { amplitude, omega, phase } => {
                InputSignal::Cosine { amplitude: *amplitude, omega: *omega, phase: *phase }
            }
            InputConfig::Exponential { amplitude, rate } => {
                InputSignal::Exponential { amplitude: *amplitude, rate: *rate }
            }
            InputConfig::Polynomial { coeffs } => InputSignal::Polynomial(coeffs.clone()),
            InputConfig::Sampled { times, values } => {
                InputSignal::Sampled { times: times.clone(), values: values.clone() }
            }
            InputConfig::Sum { parts } => InputSignal::Sum(parts.iter().map(|p| p.to_signal()).collect()),
        }
    }
}
