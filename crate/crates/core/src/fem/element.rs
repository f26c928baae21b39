//! Per-tetrahedron geometry and local shape functions.

use crate::mesh::LOCAL_EDGES;
use crate::vec3::{self, Vec3};

use super::EdgeFamily;

#[derive(Debug, Clone, Copy)]
pub struct TetGeometry {
    pub vertices: [Vec3; 4],
    pub volume: f64,
    /// Gradients of the barycentric coordinates.
    pub grads: [Vec3; 4],
}

impl TetGeometry {
    pub fn new(vertices: [Vec3; 4]) -> Self {
        let e1 = vec3::sub(vertices[1], vertices[0]);
        let e2 = vec3::sub(vertices[2], vertices[0]);
        let e3 = vec3::sub(vertices[3], vertices[0]);
        let det = vec3::dot(e1, vec3::cross(e2, e3));
        let g1 = vec3::scale(1.0 / det, vec3::cross(e2, e3));
        let g2 = vec3::scale(1.0 / det, vec3::cross(e3, e1));
        let g3 = vec3::scale(1.0 / det, vec3::cross(e1, e2));
        let g0 = vec3::scale(-1.0, vec3::add(vec3::add(g1, g2), g3));
        TetGeometry {
            vertices,
            volume: det / 6.0,
            grads: [g0, g1, g2, g3],
        }
    }

    pub fn point(&self, lambda: &[f64; 4]) -> Vec3 {
        (0..4).fold(vec3::ZERO, |acc, i| vec3::axpy(acc, lambda[i], self.vertices[i]))
    }

    pub fn barycentric(&self, x: Vec3) -> [f64; 4] {
        let d = vec3::sub(x, self.vertices[0]);
        let l1 = vec3::dot(self.grads[1], d);
        let l2 = vec3::dot(self.grads[2], d);
        let l3 = vec3::dot(self.grads[3], d);
        [1.0 - l1 - l2 - l3, l1, l2, l3]
    }

    /// Local P1 stiffness `|T| grad(lambda_i) . grad(lambda_j)`.
    pub fn stiffness(&self) -> [[f64; 4]; 4] {
        let mut k = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                k[i][j] = self.volume * vec3::dot(self.grads[i], self.grads[j]);
            }
        }
        k
    }

    /// Quadrature scale: physical integral is `6 |T| sum_q w_q f(x_q)`.
    pub fn jacobian_scale(&self) -> f64 {
        6.0 * self.volume
    }
}

/// Local edge-element degrees of freedom of one tetrahedron.
///
/// First kind: the Whitney functions `s (lambda_a grad lambda_b - lambda_b grad lambda_a)`
/// with global orientation sign `s`. Second kind additionally carries the
/// edge-bubble gradients `grad(lambda_a lambda_b)`, which together span the
/// full `P1^3` on every tet.
#[derive(Debug, Clone, Copy)]
pub struct LocalEdgeDofs {
    pub dofs: [usize; 12],
    pub signs: [f64; 6],
    pub count: usize,
}

impl LocalEdgeDofs {
    pub fn new(tet_edges: &[(usize, f64); 6], num_edges: usize, family: EdgeFamily) -> Self {
        let mut dofs = [0usize; 12];
        let mut signs = [0.0; 6];
        for (k, &(e, s)) in tet_edges.iter().enumerate() {
            dofs[k] = e;
            dofs[k + 6] = num_edges + e;
            signs[k] = s;
        }
        LocalEdgeDofs {
            dofs,
            signs,
            count: family.dofs_per_edge() * 6,
        }
    }

    /// Basis function values at barycentric point `lambda`.
    pub fn values(&self, g: &TetGeometry, lambda: &[f64; 4]) -> [Vec3; 12] {
        let mut out = [vec3::ZERO; 12];
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            let pa = vec3::scale(lambda[a], g.grads[b]);
            let pb = vec3::scale(lambda[b], g.grads[a]);
            out[k] = vec3::scale(self.signs[k], vec3::sub(pa, pb));
            if self.count > 6 {
                out[k + 6] = vec3::add(pa, pb);
            }
        }
        out
    }

    /// Curls; constant per tet, zero for the gradient functions.
    pub fn curls(&self, g: &TetGeometry) -> [Vec3; 12] {
        let mut out = [vec3::ZERO; 12];
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            out[k] = vec3::scale(2.0 * self.signs[k], vec3::cross(g.grads[a], g.grads[b]));
        }
        out
    }
}
