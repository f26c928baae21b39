//! Configuration files, presets, CSV energy logs and VTK output.

mod config;
mod csv;
mod vtk;

pub use self::config::{parse_config, preset, preset_mumag1, to_toml, Overrides, MUMAG1_TOML, PRESETS};
pub use self::csv::{energy_csv_string, write_energy_csv, CSV_HEADER};
pub use self::vtk::{mesh_vtk_string, snapshot_vtk_string, write_mesh_vtk, write_vtk_snapshot};
