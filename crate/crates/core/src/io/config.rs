use std::path::PathBuf;

use crate::error::{EllgError, Result};
use crate::sim::SimConfig;

/// Thin-film relaxation of the micromagnetic standard problem 1.
pub const MUMAG1_TOML: &str = r#"# Permalloy film relaxation, 2 x 1 x 0.02 (micrometres)
[mesh]
omega_min = [0.0, 0.0, 0.0]
omega_max = [2.0, 1.0, 0.02]
cell = [0.1, 0.1, 0.02]
pad = [0.2, 0.2, 0.04, 0.04]
layers = 1

[llg]
alpha = 0.5
ce = 5e2
theta = 1.0

[eddy]
mu0 = 1.25667e-6
sigma = 1.0
family = "first-kind"

[field]
ca = 0.0
easy_axis = [1.0, 0.0, 0.0]
h_ext = [0.0, 0.0, 0.0]

[initial]
m0 = [1.0, 0.0, 0.0]
h0_star = [0.0, 0.0, 0.0]
subtract_magnetization = true

[time]
dt = 0.01
t_end = 1.0

[solver]
tol = 1e-10
jacobi = false
eddy_precond = "cholesky"

[output]
vtk_every = 0

# documentation only
[metadata]
exchange_stiffness = 1.3e-11
saturation_magnetization = 8e5
"#;

pub const PRESETS: &[&str] = &["mumag1"];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parse and validate a TOML configuration. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| EllgError::ConfigParse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_toml(config: &SimConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

pub fn preset_mumag1() -> SimConfig {
    parse_config(MUMAG1_TOML).expect("built-in preset is valid")
}

pub fn preset(name: &str) -> Result<SimConfig> {
    match name {
        "mumag1" => Ok(preset_mumag1()),
        other => Err(EllgError::UnknownPreset(other.to_string())),
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub theta: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub vtk_every: Option<usize>,
    pub tol: Option<f64>,
}

impl Overrides {
    /// Apply and re-validate.
    pub fn apply(&self, mut cfg: SimConfig) -> Result<SimConfig> {
        if let Some(v) = self.theta {
            cfg.llg.theta = v;
        }
        if let Some(v) = self.dt {
            cfg.time.dt = v;
        }
        if let Some(v) = self.t_end {
            cfg.time.t_end = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.output.out_dir = Some(v.clone());
        }
        if let Some(v) = self.vtk_every {
            cfg.output.vtk_every = v;
        }
        if let Some(v) = self.tol {
            cfg.solver.tol = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
