use std::fmt::Write as _;
use std::path::Path;

use crate::error::{EllgError, Result};
use crate::fem::{evaluate_edge_field, EdgeFamily, EdgeField, NodalField};
use crate::mesh::Mesh;

const VTK_TETRA: u8 = 10;

fn write_grid(s: &mut String, mesh: &Mesh, title: &str) {
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {} double", mesh.num_nodes()).unwrap();
    for p in mesh.nodes() {
        writeln!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).unwrap();
    }
    let nt = mesh.tets().len();
    writeln!(s, "CELLS {nt} {}", 5 * nt).unwrap();
    for t in mesh.tets() {
        writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        writeln!(s, "{VTK_TETRA}").unwrap();
    }
}

/// Mesh with an `omega` cell flag.
pub fn mesh_vtk_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    write_grid(&mut s, mesh, "ellg mesh");
    let mut flag = vec![0u8; mesh.tets().len()];
    for &t in mesh.omega_tets() {
        flag[t] = 1;
    }
    writeln!(s, "CELL_DATA {}\nSCALARS omega int 1\nLOOKUP_TABLE default", flag.len()).unwrap();
    for f in flag {
        writeln!(s, "{f}").unwrap();
    }
    s
}

/// `m` as point data (zero outside omega), `H` at tet barycenters as cell data.
pub fn snapshot_vtk_string(mesh: &Mesh, family: EdgeFamily, m: &NodalField, h: &EdgeField) -> String {
    let mut s = String::new();
    write_grid(&mut s, mesh, "ellg snapshot");
    writeln!(s, "POINT_DATA {}\nVECTORS m double", mesh.num_nodes()).unwrap();
    for g in 0..mesh.num_nodes() {
        let v = mesh.omega_local(g).map_or([0.0; 3], |l| m.0[l]);
        writeln!(s, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]).unwrap();
    }
    writeln!(s, "CELL_DATA {}\nVECTORS H double", mesh.tets().len()).unwrap();
    for t in 0..mesh.tets().len() {
        let v = evaluate_edge_field(mesh, family, h, t, &[0.25; 4]);
        writeln!(s, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]).unwrap();
    }
    s
}

pub fn write_mesh_vtk(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_vtk_string(mesh)).map_err(|e| EllgError::io(path, e))
}

pub fn write_vtk_snapshot(mesh: &Mesh, family: EdgeFamily, m: &NodalField, h: &EdgeField, path: &Path) -> Result<()> {
    std::fs::write(path, snapshot_vtk_string(mesh, family, m, h)).map_err(|e| EllgError::io(path, e))
}
