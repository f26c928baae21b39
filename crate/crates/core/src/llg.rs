//! Tangent-plane velocity solve and nodewise normalization.

use crate::error::{EllgError, Result};
use crate::fem::{block_matvec, local_cross_blocks, EdgeField, NodalField, Operators};
use crate::linalg::{solve_general, CsrMatrix, SolveReport, SolverOptions, Triplets};
use crate::vec3::{self, Vec3};

const UNIT_TOL: f64 = 1e-10;
const TANGENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlgParams {
    pub alpha: f64,
    pub ce: f64,
    pub theta: f64,
    pub k: f64,
}

impl LlgParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(EllgError::ConfigValue {
                key: key.into(),
                message,
            })
        };
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("llg.alpha", format!("must be > 0, got {}", self.alpha));
        }
        if !(self.ce >= 0.0 && self.ce.is_finite()) {
            return bad("llg.ce", format!("must be >= 0, got {}", self.ce));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad("llg.theta", format!("must lie in [0, 1], got {}", self.theta));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad("time.dt", format!("must be > 0, got {}", self.k));
        }
        Ok(())
    }
}

/// Orthonormal basis `(t1, t2)` of the tangent plane at every node.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub t1: Vec<Vec3>,
    pub t2: Vec<Vec3>,
}

/// Axis of smallest `|m_j|` (first on ties), projected and normalized.
pub fn tangent_frame(m: &NodalField) -> Result<TangentFrame> {
    let mut t1 = Vec::with_capacity(m.len());
    let mut t2 = Vec::with_capacity(m.len());
    for (z, &mz) in m.0.iter().enumerate() {
        let n = vec3::norm(mz);
        if !((n - 1.0).abs() <= UNIT_TOL) {
            return Err(EllgError::invariant(format!("|m| = {n} at node {z} is not 1")));
        }
        let mut j = 0;
        for c in 1..3 {
            if mz[c].abs() < mz[j].abs() {
                j = c;
            }
        }
        let e = vec3::unit(j);
        let p = vec3::axpy(e, -vec3::dot(e, mz), mz);
        let a = vec3::scale(1.0 / vec3::norm(p), p);
        t1.push(a);
        t2.push(vec3::cross(mz, a));
    }
    Ok(TangentFrame { t1, t2 })
}

impl TangentFrame {
    pub fn len(&self) -> usize {
        self.t1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t1.is_empty()
    }

    fn basis(&self, z: usize, a: usize) -> Vec3 {
        if a == 0 {
            self.t1[z]
        } else {
            self.t2[z]
        }
    }

    /// `P y`: tangent coordinates to Cartesian nodal values.
    pub fn lift(&self, y: &[f64]) -> NodalField {
        NodalField(
            (0..self.len())
                .map(|z| vec3::add(vec3::scale(y[2 * z], self.t1[z]), vec3::scale(y[2 * z + 1], self.t2[z])))
                .collect(),
        )
    }

    /// `P^T x` for an interleaved 3V vector.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; 2 * self.len()];
        for z in 0..self.len() {
            let xz = [x[3 * z], x[3 * z + 1], x[3 * z + 2]];
            y[2 * z] = vec3::dot(self.t1[z], xz);
            y[2 * z + 1] = vec3::dot(self.t2[z], xz);
        }
        y
    }
}

/// The reduced `2V x 2V` tangent system.
#[derive(Debug, Clone)]
pub struct LlgSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub frame: TangentFrame,
}

/// `(K kron I3) m` evaluated as `sum_j K_ij (m_j - m_i)`, which equals the
/// plain product since the rows of `K` sum to zero and vanishes bitwise for
/// uniform `m`.
fn exchange_apply(k: &CsrMatrix, m: &NodalField) -> Vec<f64> {
    let mut out = vec![0.0; 3 * m.len()];
    for i in 0..k.nrows() {
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            for c in 0..3 {
                out[3 * i + c] += v * (m.0[j][c] - m.0[i][c]);
            }
        }
    }
    out
}

/// Right-hand side a 3V functional: `-Ce K m + B^T H + M pi`.
pub fn llg_rhs_full(ops: &Operators, m: &NodalField, h: &EdgeField, pi_field: &NodalField, ce: f64) -> Vec<f64> {
    let mut r = exchange_apply(&ops.nodal_stiffness, m);
    for v in &mut r {
        *v *= -ce;
    }
    let bh = ops.coupling_transpose_apply(h);
    let mp = block_matvec(&ops.nodal_mass, &pi_field.to_flat());
    for ((r, b), p) in r.iter_mut().zip(bh).zip(mp) {
        *r += b + p;
    }
    r
}

/// Assemble `A = P^T (alpha M + S(m) + Ce theta k K) P` tet by tet, directly
/// in tangent coordinates, and the reduced right-hand side.
pub fn assemble_llg_system(
    ops: &Operators,
    m: &NodalField,
    h: &EdgeField,
    pi_field: &NodalField,
    params: &LlgParams,
) -> Result<LlgSystem> {
    let nv = ops.num_omega_nodes();
    for (context, actual) in [("magnetization", m.len()), ("pi field", pi_field.len())] {
        if actual != nv {
            return Err(EllgError::Dimension {
                context,
                expected: nv,
                actual,
            });
        }
    }
    if h.len() != ops.num_edge_dofs() {
        return Err(EllgError::Dimension {
            context: "magnetic field",
            expected: ops.num_edge_dofs(),
            actual: h.len(),
        });
    }
    let frame = tangent_frame(m)?;
    let mesh = ops.mesh();
    let kk = params.ce * params.theta * params.k;
    let mut trip = Triplets::with_capacity(2 * nv, 2 * nv, 64 * mesh.omega_tets().len());
    for &t in mesh.omega_tets() {
        let g = mesh.geometry(t);
        let nodes = mesh.omega_tet_local(t);
        let stiff = g.stiffness();
        let cross = local_cross_blocks(&g, &nodes.map(|z| m.0[z]));
        for i in 0..4 {
            for j in 0..4 {
                let mass = g.volume * if i == j { 2.0 } else { 1.0 } / 20.0;
                let scalar = params.alpha * mass + kk * stiff[i][j];
                let s = &cross[i][j];
                for a in 0..2 {
                    let ta = frame.basis(nodes[i], a);
                    for b in 0..2 {
                        let tb = frame.basis(nodes[j], b);
                        let mut val = scalar * vec3::dot(ta, tb);
                        for d in 0..3 {
                            val += ta[d] * vec3::dot(s[d], tb);
                        }
                        trip.push(2 * nodes[i] + a, 2 * nodes[j] + b, val);
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(trip);
    let rhs = frame.restrict(&llg_rhs_full(ops, m, h, pi_field, params.ce));
    Ok(LlgSystem { matrix, rhs, frame })
}

/// Solve the tangent system and lift the solution to Cartesian nodal values.
pub fn solve_v(sys: &LlgSystem, opts: &SolverOptions) -> Result<(NodalField, SolveReport)> {
    let (y, report) = solve_general(&sys.matrix, &sys.rhs, opts)?;
    Ok((sys.frame.lift(&y), report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeStats {
    /// Smallest `|m + k v|` over the nodes.
    pub min_denominator: f64,
    /// `max_z ||m_next(z)| - 1|`
    pub unit_violation: f64,
    /// `max_z |v(z) . m(z)|`
    pub tangency_abs: f64,
    /// `max_z |v(z)|`
    pub v_max: f64,
}

/// `m_next(z) = (m(z) + k v(z)) / |m(z) + k v(z)|`. Nodes with `v(z) = 0` keep
/// their value bit for bit.
pub fn normalize_update(m: &NodalField, v: &NodalField, k: f64) -> Result<(NodalField, NormalizeStats)> {
    if m.len() != v.len() {
        return Err(EllgError::Dimension {
            context: "normalize_update",
            expected: m.len(),
            actual: v.len(),
        });
    }
    let mut stats = NormalizeStats {
        min_denominator: f64::INFINITY,
        unit_violation: 0.0,
        tangency_abs: 0.0,
        v_max: 0.0,
    };
    let mut out = Vec::with_capacity(m.len());
    for (z, (&mz, &vz)) in m.0.iter().zip(&v.0).enumerate() {
        let vn = vec3::norm(vz);
        let tang = vec3::dot(mz, vz).abs();
        if tang > TANGENCY_TOL * vn.max(1.0) {
            return Err(EllgError::invariant(format!("v . m = {tang:.3e} at node {z}")));
        }
        stats.tangency_abs = stats.tangency_abs.max(tang);
        stats.v_max = stats.v_max.max(vn);
        let next = if vz == vec3::ZERO {
            stats.min_denominator = stats.min_denominator.min(vec3::norm(mz));
            mz
        } else {
            let w = vec3::axpy(mz, k, vz);
            let d = vec3::norm(w);
            stats.min_denominator = stats.min_denominator.min(d);
            vec3::scale(1.0 / d, w)
        };
        stats.unit_violation = stats.unit_violation.max((vec3::norm(next) - 1.0).abs());
        out.push(next);
    }
    if stats.min_denominator < 1.0 - 1e-12 {
        return Err(EllgError::invariant(format!(
            "normalization denominator {} < 1",
            stats.min_denominator
        )));
    }
    Ok((NodalField(out), stats))
}

/// Tangential part of a nodal field and the pointwise tangent-plane solution
/// `v = (alpha w - m x w) / (1 + alpha^2)` of `alpha v + m x v = w`.
pub fn tangent_plane_velocity(m: Vec3, h: Vec3, alpha: f64) -> Vec3 {
    let w = vec3::axpy(h, -vec3::dot(m, h), m);
    vec3::scale(1.0 / (1.0 + alpha * alpha), vec3::sub(vec3::scale(alpha, w), vec3::cross(m, w)))
}
