use crate::error::Result;
use crate::mesh::Mesh;
use crate::vec3::{self, Vec3};

use super::element::LocalEdgeDofs;
use super::quadrature::GAUSS2_UNIT;
use super::{EdgeFamily, EdgeField, NodalField, Operators};

/// Nodal interpolant on the omega nodes.
pub fn interpolate_nodal(mesh: &Mesh, f: impl Fn(Vec3) -> Vec3) -> NodalField {
    NodalField(mesh.omega_nodes().iter().map(|&g| f(mesh.nodes()[g])).collect())
}

/// Edge interpolant: tangential moments along each edge, oriented low to high
/// node index. Exact for the 2-point rule when `f` is affine.
pub fn interpolate_edge(mesh: &Mesh, family: EdgeFamily, f: impl Fn(Vec3) -> Vec3) -> EdgeField {
    let ne = mesh.num_edges();
    let mut h = vec![0.0; family.num_dofs(mesh)];
    for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
        let a = mesh.nodes()[lo];
        let t = vec3::sub(mesh.nodes()[hi], a);
        let mut w = 0.0;
        let mut g = 0.0;
        for &(s, wt) in GAUSS2_UNIT.iter() {
            let ft = vec3::dot(f(vec3::axpy(a, s, t)), t);
            w += wt * ft;
            g += wt * ft * (1.0 - 2.0 * s);
        }
        h[e] = w;
        if family == EdgeFamily::SecondKind {
            h[ne + e] = 3.0 * g;
        }
    }
    EdgeField(h)
}

/// Edge coefficients of `grad s` for a P1 scalar `s` given on all nodes.
pub fn discrete_gradient(mesh: &Mesh, family: EdgeFamily, s: &[f64]) -> EdgeField {
    assert_eq!(s.len(), mesh.num_nodes());
    let mut h = vec![0.0; family.num_dofs(mesh)];
    for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
        h[e] = s[hi] - s[lo];
    }
    EdgeField(h)
}

/// `(||h||, ||curl h||)` over Omega, without the `1/sigma` factor.
pub fn edge_field_norms(ops: &Operators, h: &EdgeField) -> Result<(f64, f64)> {
    Ok((ops.edge_l2_sq(h.coeffs())?.sqrt(), ops.edge_curl_sq(h.coeffs())?.sqrt()))
}

/// Value of an edge field inside tet `t` at barycentric point `lambda`.
pub fn evaluate_edge_field(mesh: &Mesh, family: EdgeFamily, h: &EdgeField, t: usize, lambda: &[f64; 4]) -> Vec3 {
    let g = mesh.geometry(t);
    let d = LocalEdgeDofs::new(&mesh.tet_edges()[t], mesh.num_edges(), family);
    let phi = d.values(&g, lambda);
    (0..d.count).fold(vec3::ZERO, |acc, i| vec3::axpy(acc, h.0[d.dofs[i]], phi[i]))
}

/// Value of a nodal field inside omega tet `t` at barycentric point `lambda`.
pub fn evaluate_nodal_field(mesh: &Mesh, m: &NodalField, t: usize, lambda: &[f64; 4]) -> Vec3 {
    let nodes = mesh.omega_tet_local(t);
    (0..4).fold(vec3::ZERO, |acc, i| vec3::axpy(acc, lambda[i], m.0[nodes[i]]))
}
