//! Finite-element spaces on the mesh: vector P1 on omega for the
//! magnetization and H(curl)-conforming edge elements on Omega for the
//! magnetic field.

mod assembly;
pub mod element;
mod interp;
pub mod quadrature;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EllgError, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;
use crate::vec3::Vec3;

pub use assembly::{
    assemble_cross_term, assemble_curl_curl, assemble_edge_mass, assemble_nodal_mass, assemble_nodal_stiffness,
    assemble_node_edge_coupling, cross_matrix, local_cross_blocks,
};
pub use interp::{
    discrete_gradient, edge_field_norms, evaluate_edge_field, evaluate_nodal_field, interpolate_edge,
    interpolate_nodal,
};

/// Edge-element family used for the magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeFamily {
    /// Lowest-order Nedelec elements of the first kind, one DOF per edge.
    #[default]
    FirstKind,
    /// Full `P1` edge elements (second kind), two DOFs per edge. DOF `e` is
    /// the Whitney coefficient and DOF `E + e` the edge-bubble gradient.
    SecondKind,
}

impl EdgeFamily {
    pub fn dofs_per_edge(self) -> usize {
        match self {
            EdgeFamily::FirstKind => 1,
            EdgeFamily::SecondKind => 2,
        }
    }

    pub fn num_dofs(self, mesh: &Mesh) -> usize {
        self.dofs_per_edge() * mesh.num_edges()
    }
}

impl fmt::Display for EdgeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeFamily::FirstKind => "first-kind",
            EdgeFamily::SecondKind => "second-kind",
        })
    }
}

/// One 3-vector per omega node (local omega numbering).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField(pub Vec<Vec3>);

impl NodalField {
    pub fn zeros(n: usize) -> Self {
        NodalField(vec![[0.0; 3]; n])
    }

    pub fn uniform(n: usize, v: Vec3) -> Self {
        NodalField(vec![v; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Vec3] {
        &self.0
    }

    /// Interleaved layout `[x0, y0, z0, x1, ...]` used by the 3V matrices.
    pub fn to_flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_flat(x: &[f64]) -> Self {
        NodalField(x.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

/// Coefficients of an edge-element field on Omega.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField(pub Vec<f64>);

impl EdgeField {
    pub fn zeros(n: usize) -> Self {
        EdgeField(vec![0.0; n])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Apply a scalar `V x V` matrix to each Cartesian component of a 3V vector.
pub fn block_matvec(a: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), 3 * a.ncols());
    let mut y = vec![0.0; 3 * a.nrows()];
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut acc = [0.0; 3];
        for (&j, &v) in cols.iter().zip(vals) {
            for c in 0..3 {
                acc[c] += v * x[3 * j + c];
            }
        }
        y[3 * i..3 * i + 3].copy_from_slice(&acc);
    }
    y
}

/// `x^T (A kron I3) x`
pub fn block_quad_form(a: &CsrMatrix, x: &[f64]) -> f64 {
    crate::linalg::dot(x, &block_matvec(a, x))
}

/// Check a quadratic form value for negativity beyond round-off.
pub(crate) fn checked_quad(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value < -1e-13 * scale.max(f64::MIN_POSITIVE) {
        return Err(EllgError::invariant(format!(
            "negative quadratic form for {what}: {value:.3e} (scale {scale:.3e})"
        )));
    }
    Ok(value.max(0.0))
}

/// Matrices shared by every time step, assembled once per mesh.
#[derive(Debug, Clone)]
pub struct Operators {
    mesh: Mesh,
    family: EdgeFamily,
    /// Scalar P1 mass on omega.
    pub nodal_mass: CsrMatrix,
    /// Scalar P1 stiffness on omega.
    pub nodal_stiffness: CsrMatrix,
    pub edge_mass: CsrMatrix,
    /// Curl-curl form without the `1/sigma` factor.
    pub curl_curl: CsrMatrix,
    /// `B[e, 3z + c] = int_omega (lambda_z e_c) . N_e`.
    pub coupling: CsrMatrix,
    coupling_t: CsrMatrix,
}

impl Operators {
    pub fn new(mesh: Mesh, family: EdgeFamily) -> Self {
        let nodal_mass = assemble_nodal_mass(&mesh);
        let nodal_stiffness = assemble_nodal_stiffness(&mesh);
        let edge_mass = assemble_edge_mass(&mesh, family);
        let curl_curl = assemble_curl_curl(&mesh, family);
        let coupling = assemble_node_edge_coupling(&mesh, family);
        let coupling_t = coupling.transpose();
        Operators {
            mesh,
            family,
            nodal_mass,
            nodal_stiffness,
            edge_mass,
            curl_curl,
            coupling,
            coupling_t,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn family(&self) -> EdgeFamily {
        self.family
    }

    pub fn num_omega_nodes(&self) -> usize {
        self.mesh.num_omega_nodes()
    }

    pub fn num_edge_dofs(&self) -> usize {
        self.edge_mass.nrows()
    }

    /// `B^T h`: the functional `phi -> (H, phi)_omega` on the 3V nodal basis.
    pub fn coupling_transpose_apply(&self, h: &EdgeField) -> Vec<f64> {
        self.coupling_t.matvec(h.coeffs())
    }

    /// Squared L2(omega) norm of a nodal field.
    pub fn nodal_l2_sq(&self, m: &NodalField) -> Result<f64> {
        let x = m.to_flat();
        let scale = self.nodal_mass.max_abs() * crate::linalg::dot(&x, &x);
        checked_quad(block_quad_form(&self.nodal_mass, &x), scale, "nodal mass")
    }

    /// Squared L2(omega) norm of the gradient of a nodal field.
    pub fn nodal_grad_sq(&self, m: &NodalField) -> Result<f64> {
        let x = m.to_flat();
        let scale = self.nodal_stiffness.max_abs() * crate::linalg::dot(&x, &x);
        checked_quad(block_quad_form(&self.nodal_stiffness, &x), scale, "nodal stiffness")
    }

    pub fn edge_l2_sq(&self, h: &[f64]) -> Result<f64> {
        let scale = self.edge_mass.max_abs() * crate::linalg::dot(h, h);
        checked_quad(self.edge_mass.quad_form(h), scale, "edge mass")
    }

    pub fn edge_curl_sq(&self, h: &[f64]) -> Result<f64> {
        let scale = self.curl_curl.max_abs() * crate::linalg::dot(h, h);
        checked_quad(self.curl_curl.quad_form(h), scale, "curl-curl")
    }
}
