//! Decoupled linear finite-element integrator for the coupled
//! eddy-current / Landau-Lifshitz-Gilbert (ELLG) system.
//!
//! Each time step solves one linear system for the magnetization velocity
//! `v` in the discrete tangent space of the current magnetization, updates
//! the magnetization by nodewise normalization, and then solves one linear
//! edge-element system for the magnetic field `H`.
//!
//! The crate is organized bottom-up:
//!
//! * [`mesh`] structured Kuhn tetrahedral meshes of box domains,
//! * [`linalg`] CSR matrices plus CG / GMRES solvers,
//! * [`fem`] P1 and edge-element assembly and interpolation,
//! * [`field`] general field contributions and initial data,
//! * [`llg`] and [`eddy`] the two linear sub-steps,
//! * [`sim`] the time loop and energy monitor,
//! * [`io`] configuration, presets, CSV and VTK output.

pub mod check;
pub mod eddy;
pub mod error;
pub mod fem;
pub mod field;
pub mod io;
pub mod linalg;
pub mod llg;
pub mod mesh;
pub mod sim;
pub mod vec3;

pub use error::{EllgError, Result};
pub use fem::{EdgeField, EdgeFamily, NodalField, Operators};
pub use mesh::{BoxGrid, Mesh};
pub use sim::{run, EnergyRecord, SimConfig, Simulation, TimeSeries};
