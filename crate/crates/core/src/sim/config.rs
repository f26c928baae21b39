use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::eddy::{EddyParams, EddyPreconditioner};
use crate::error::{EllgError, Result};
use crate::fem::EdgeFamily;
use crate::linalg::SolverOptions;
use crate::llg::LlgParams;
use crate::mesh::{build_box_grid, build_outer_grid, tetrahedralize, uniform_lines, BoxGrid, Mesh};
use crate::vec3::{self, Vec3};

fn one() -> usize {
    1
}

fn default_theta() -> f64 {
    1.0
}

fn default_axis() -> Vec3 {
    [1.0, 0.0, 0.0]
}

fn default_true() -> bool {
    true
}

fn default_tol() -> f64 {
    1e-10
}

/// Complete run description. All numbers are dimensionless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub mesh: MeshSpec,
    pub llg: LlgSpec,
    pub eddy: EddySpec,
    #[serde(default)]
    pub field: FieldSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Metadata::is_empty")]
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub omega_min: Vec3,
    pub omega_max: Vec3,
    /// Cell size inside omega per axis.
    pub cell: Vec3,
    /// Outer padding `[x, y, z_lo, z_hi]`; absent means Omega = omega.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<[f64; 4]>,
    /// Graded outer layers per side.
    #[serde(default = "one")]
    pub layers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlgSpec {
    pub alpha: f64,
    pub ce: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EddySpec {
    pub mu0: f64,
    pub sigma: f64,
    #[serde(default)]
    pub family: EdgeFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// Anisotropy constant; 0 disables it.
    #[serde(default)]
    pub ca: f64,
    #[serde(default = "default_axis")]
    pub easy_axis: Vec3,
    #[serde(default)]
    pub h_ext: Vec3,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            ca: 0.0,
            easy_axis: default_axis(),
            h_ext: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Uniform initial magnetization (unit vector).
    pub m0: Vec3,
    #[serde(default)]
    pub h0_star: Vec3,
    /// Subtract `chi_omega m0` from `H0*` when building `H0`.
    #[serde(default = "default_true")]
    pub subtract_magnetization: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Jacobi preconditioning of the tangent-system GMRES.
    #[serde(default)]
    pub jacobi: bool,
    #[serde(default)]
    pub eddy_precond: EddyPreconditioner,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            tol: default_tol(),
            jacobi: false,
            eddy_precond: EddyPreconditioner::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// VTK snapshot interval in steps; 0 disables snapshots.
    #[serde(default)]
    pub vtk_every: usize,
}

/// Physical constants kept for reference only; the solver never reads them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchange_stiffness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_magnetization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Metadata {
    fn is_empty(&self) -> bool {
        *self == Metadata::default()
    }
}

fn value_err(key: &str, message: impl Into<String>) -> EllgError {
    EllgError::ConfigValue {
        key: key.into(),
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(value_err(key, format!("must be > 0, got {v}")))
    }
}

impl SimConfig {
    pub fn llg_params(&self) -> LlgParams {
        LlgParams {
            alpha: self.llg.alpha,
            ce: self.llg.ce,
            theta: self.llg.theta,
            k: self.time.dt,
        }
    }

    pub fn eddy_params(&self) -> EddyParams {
        EddyParams {
            mu0: self.eddy.mu0,
            sigma: self.eddy.sigma,
            k: self.time.dt,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: None,
            jacobi: self.solver.jacobi,
        }
    }

    /// Number of steps `N = T / k`, required to be an integer up to a
    /// relative 1e-9 (decimal inputs such as 1 / 0.01 are not exact).
    pub fn num_steps(&self) -> Result<usize> {
        let r = self.time.t_end / self.time.dt;
        let n = r.round();
        if n < 1.0 || (r - n).abs() > 1e-9 * n {
            return Err(value_err(
                "time.t_end",
                format!("t_end / dt = {r} must be a positive integer"),
            ));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        for a in 0..3 {
            if !(m.omega_max[a] > m.omega_min[a]) {
                return Err(value_err("mesh.omega_max", "must exceed mesh.omega_min componentwise"));
            }
            positive("mesh.cell", m.cell[a])?;
        }
        if let Some(pad) = m.pad {
            for p in pad {
                positive("mesh.pad", p)?;
            }
        }
        if m.layers < 1 {
            return Err(value_err("mesh.layers", "must be >= 1"));
        }
        self.llg_params().validate()?;
        self.eddy_params().validate()?;
        let f = &self.field;
        if !f.ca.is_finite() || f.h_ext.iter().any(|v| !v.is_finite()) {
            return Err(value_err("field", "values must be finite"));
        }
        if (vec3::norm(f.easy_axis) - 1.0).abs() > 1e-12 {
            return Err(value_err("field.easy_axis", "must be a unit vector"));
        }
        if (vec3::norm(self.initial.m0) - 1.0).abs() > 1e-12 {
            return Err(value_err("initial.m0", "must be a unit vector"));
        }
        if self.initial.h0_star.iter().any(|v| !v.is_finite()) {
            return Err(value_err("initial.h0_star", "must be finite"));
        }
        positive("time.t_end", self.time.t_end)?;
        self.num_steps()?;
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(value_err("solver.tol", format!("must lie in (0, 1), got {}", self.solver.tol)));
        }
        Ok(())
    }

    pub fn omega_lines(&self) -> Result<[Vec<f64>; 3]> {
        let m = &self.mesh;
        let mut out: [Vec<f64>; 3] = Default::default();
        for a in 0..3 {
            let cells = (m.omega_max[a] - m.omega_min[a]) / m.cell[a];
            if (cells - cells.round()).abs() > 1e-9 * cells.round().max(1.0) {
                return Err(value_err(
                    "mesh.cell",
                    format!("cell size {} does not divide the omega extent along axis {a}", m.cell[a]),
                ));
            }
            out[a] = uniform_lines(m.omega_min[a], m.omega_max[a], m.cell[a]);
        }
        Ok(out)
    }

    pub fn grid(&self) -> Result<BoxGrid> {
        let lines = self.omega_lines()?;
        match self.mesh.pad {
            Some(pad) => build_outer_grid(lines, pad, self.mesh.layers),
            None => {
                let [x, y, z] = lines;
                build_box_grid(x, y, z, (self.mesh.omega_min, self.mesh.omega_max))
            }
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Ok(tetrahedralize(&self.grid()?))
    }
}
