//! General field contributions `pi(m)` and initial data.

use std::fmt::Debug;

use log::debug;
use rand::Rng;

use crate::error::{EllgError, Result};
use crate::fem::{
    evaluate_edge_field, evaluate_nodal_field, interpolate_edge, interpolate_nodal, quadrature::Quadrature, EdgeFamily,
    EdgeField, NodalField, Operators,
};
use crate::mesh::Mesh;
use crate::vec3::{self, Vec3};

/// A time-independent map between nodal fields on omega.
pub trait PiOperator: Debug + Send + Sync {
    fn eval(&self, m: &NodalField) -> NodalField;

    /// `C_pi` with `||pi(m)||^2 <= C_pi` whenever `||m||_{L2(omega)} <= 1`.
    fn bound(&self, omega_volume: f64) -> f64;
}

/// Nodewise uniaxial anisotropy `Ca <m, p> p`.
#[derive(Debug, Clone)]
pub struct Anisotropy {
    ca: f64,
    axis: Vec3,
}

impl Anisotropy {
    pub fn new(ca: f64, axis: Vec3) -> Result<Self> {
        if (vec3::norm(axis) - 1.0).abs() > 1e-12 {
            return Err(EllgError::ConfigValue {
                key: "field.easy_axis".into(),
                message: format!("easy axis must be a unit vector, |p| = {}", vec3::norm(axis)),
            });
        }
        Ok(Anisotropy { ca, axis })
    }
}

impl PiOperator for Anisotropy {
    fn eval(&self, m: &NodalField) -> NodalField {
        NodalField(
            m.0.iter()
                .map(|&mz| vec3::scale(self.ca * vec3::dot(mz, self.axis), self.axis))
                .collect(),
        )
    }

    // The map is Ca times a pointwise orthogonal projection applied to the
    // nodal values, and the blockwise mass form is invariant under a global
    // rotation, so ||pi(m)|| <= |Ca| ||m|| for every nodal m.
    fn bound(&self, _omega_volume: f64) -> f64 {
        self.ca * self.ca
    }
}

#[derive(Debug, Clone)]
pub struct AppliedField(pub Vec3);

impl PiOperator for AppliedField {
    fn eval(&self, m: &NodalField) -> NodalField {
        NodalField::uniform(m.len(), self.0)
    }

    fn bound(&self, omega_volume: f64) -> f64 {
        omega_volume * vec3::dot(self.0, self.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl PiOperator for ZeroField {
    fn eval(&self, m: &NodalField) -> NodalField {
        NodalField::zeros(m.len())
    }

    fn bound(&self, _omega_volume: f64) -> f64 {
        0.0
    }
}

/// Sum of contributions.
#[derive(Debug, Default)]
pub struct Composite(pub Vec<Box<dyn PiOperator>>);

impl PiOperator for Composite {
    fn eval(&self, m: &NodalField) -> NodalField {
        let mut out = NodalField::zeros(m.len());
        for p in &self.0 {
            for (o, v) in out.0.iter_mut().zip(p.eval(m).0) {
                *o = vec3::add(*o, v);
            }
        }
        out
    }

    fn bound(&self, omega_volume: f64) -> f64 {
        let s: f64 = self.0.iter().map(|p| p.bound(omega_volume).sqrt()).sum();
        s * s
    }
}

/// Anisotropy plus applied field, dropping terms that vanish identically.
pub fn standard_pi(ca: f64, easy_axis: Vec3, h_ext: Vec3) -> Result<Composite> {
    let mut parts: Vec<Box<dyn PiOperator>> = Vec::new();
    let aniso = Anisotropy::new(ca, easy_axis)?;
    if ca != 0.0 {
        parts.push(Box::new(aniso));
    }
    if h_ext != vec3::ZERO {
        parts.push(Box::new(AppliedField(h_ext)));
    }
    Ok(Composite(parts))
}

/// Largest observed `||pi(m)||^2 / C_pi` over random nodal fields with
/// `||m||_{L2(omega)} <= 1`. A value above 1 means the declared bound is wrong.
pub fn check_pi_bound(pi: &dyn PiOperator, ops: &Operators, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    let n = ops.num_omega_nodes();
    let c = pi.bound(ops.mesh().omega_volume());
    let mut worst: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let raw = NodalField(
            (0..n)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect(),
        );
        let norm = ops.nodal_l2_sq(&raw)?.sqrt();
        let scale = rng.gen_range(0.0..=1.0) / norm.max(f64::MIN_POSITIVE);
        let m = NodalField(raw.0.iter().map(|&v| vec3::scale(scale, v)).collect());
        let val = ops.nodal_l2_sq(&pi.eval(&m))?;
        let ratio = if c > 0.0 {
            val / c
        } else if val == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub m0: NodalField,
    pub h0: EdgeField,
    /// `||H0 + chi m0 - H0*||_{L2(Omega)}`: how far the discrete H0 is from
    /// the exact discontinuous field.
    pub consistency_residual: f64,
}

/// `m0` = nodal interpolant, `H0` = edge interpolant of `H0* - chi_omega m0`.
///
/// The `chi_omega m0` term is applied on edges with both endpoints in the
/// closed box omega (which, omega being convex, are exactly the edges
/// contained in it), using the P1 trace of `m0` along the edge. With
/// `subtract_magnetization = false` the term is dropped.
pub fn build_initial_data(
    mesh: &Mesh,
    family: EdgeFamily,
    m0_func: impl Fn(Vec3) -> Vec3,
    h0_star: Vec3,
    subtract_magnetization: bool,
) -> Result<InitialData> {
    let m0 = interpolate_nodal(mesh, m0_func);
    if let Some((z, v)) = m0.0.iter().enumerate().find(|(_, v)| (vec3::norm(**v) - 1.0).abs() > 1e-12) {
        return Err(EllgError::ConfigValue {
            key: "initial.m0".into(),
            message: format!("|m0| = {} at omega node {z}, must be 1", vec3::norm(*v)),
        });
    }
    let mut h0 = interpolate_edge(mesh, family, |_| h0_star);
    if subtract_magnetization {
        let ne = mesh.num_edges();
        for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
            let (Some(a), Some(b)) = (mesh.omega_local(lo), mesh.omega_local(hi)) else {
                continue;
            };
            let t = vec3::sub(mesh.nodes()[hi], mesh.nodes()[lo]);
            let (ma, mb) = (m0.0[a], m0.0[b]);
            h0.0[e] -= 0.5 * vec3::dot(vec3::add(ma, mb), t);
            if family == EdgeFamily::SecondKind {
                h0.0[ne + e] -= 0.5 * vec3::dot(vec3::sub(ma, mb), t);
            }
        }
    }
    let consistency_residual = consistency_residual(mesh, family, &m0, &h0, h0_star, subtract_magnetization);
    debug!("initial data: ||H0 + chi m0 - H0*|| = {consistency_residual:.6e}");
    Ok(InitialData {
        m0,
        h0,
        consistency_residual,
    })
}

fn consistency_residual(
    mesh: &Mesh,
    family: EdgeFamily,
    m0: &NodalField,
    h0: &EdgeField,
    h0_star: Vec3,
    subtract: bool,
) -> f64 {
    let q = Quadrature::degree2();
    let mut in_omega = vec![false; mesh.tets().len()];
    for &t in mesh.omega_tets() {
        in_omega[t] = subtract;
    }
    let mut acc = 0.0;
    for t in 0..mesh.tets().len() {
        let s = mesh.geometry(t).jacobian_scale();
        for (p, w) in q.iter() {
            let mut r = vec3::sub(evaluate_edge_field(mesh, family, h0, t, p), h0_star);
            if in_omega[t] {
                r = vec3::add(r, evaluate_nodal_field(mesh, m0, t, p));
            }
            acc += s * w * vec3::dot(r, r);
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_grid, tetrahedralize, unit_cube_mesh};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn anisotropy_examples() {
        let a = Anisotropy::new(2.0, [0.0, 1.0, 0.0]).unwrap();
        let m = NodalField::uniform(3, [1.0, 0.0, 0.0]);
        assert!(a.eval(&m).0.iter().all(|v| *v == [0.0; 3]));
        let m = NodalField::uniform(3, [0.0, 1.0, 0.0]);
        assert!(a.eval(&m).0.iter().all(|v| *v == [0.0, 2.0, 0.0]));
        assert!(Anisotropy::new(1.0, [1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn applied_and_composite_fields() {
        let m = NodalField::uniform(4, [0.6, 0.8, 0.0]);
        assert!(AppliedField([0.0; 3]).eval(&m).0.iter().all(|v| *v == [0.0; 3]));
        assert!(AppliedField([0.0, 0.0, 1.0]).eval(&m).0.iter().all(|v| *v == [0.0, 0.0, 1.0]));
        let a = Anisotropy::new(1.5, [1.0, 0.0, 0.0]).unwrap();
        let h = AppliedField([0.1, 0.2, 0.3]);
        let sum = Composite(vec![Box::new(a.clone()), Box::new(h.clone())]).eval(&m);
        let (pa, ph) = (a.eval(&m), h.eval(&m));
        for z in 0..4 {
            assert_eq!(sum.0[z], vec3::add(pa.0[z], ph.0[z]));
        }
    }

    #[test]
    fn declared_bounds_hold() {
        let ops = Operators::new(unit_cube_mesh(2), EdgeFamily::FirstKind);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Anisotropy::new(3.0, [0.0, 0.6, 0.8]).unwrap();
        assert!(check_pi_bound(&a, &ops, 50, &mut rng).unwrap() <= 1.0 + 1e-12);
        assert_eq!(check_pi_bound(&ZeroField, &ops, 5, &mut rng).unwrap(), 0.0);
        let h = AppliedField([0.0, 0.0, 2.0]);
        assert!(check_pi_bound(&h, &ops, 20, &mut rng).unwrap() <= 1.0 + 1e-12);
        let c = standard_pi(3.0, [1.0, 0.0, 0.0], [0.5, 0.0, 0.0]).unwrap();
        assert!(check_pi_bound(&c, &ops, 20, &mut rng).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn pi_is_time_independent() {
        let a = Anisotropy::new(1.0, [1.0, 0.0, 0.0]).unwrap();
        let m = NodalField::uniform(2, [0.6, 0.8, 0.0]);
        assert_eq!(a.eval(&m), a.eval(&m));
    }

    fn padded_mesh() -> Mesh {
        let grid = build_box_grid(
            vec![-0.5, 0.0, 0.5, 1.0, 1.5],
            vec![-0.5, 0.0, 0.5, 1.0],
            vec![-0.5, 0.0, 0.25, 0.75],
            ([0.0, 0.0, 0.0], [1.0, 0.5, 0.25]),
        )
        .unwrap();
        tetrahedralize(&grid)
    }

    #[test]
    fn initial_field_edge_values() {
        let mesh = padded_mesh();
        let d = build_initial_data(&mesh, EdgeFamily::FirstKind, |_| [1.0, 0.0, 0.0], [0.0; 3], true).unwrap();
        let mut seen_inner = false;
        for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
            let t = vec3::sub(mesh.nodes()[hi], mesh.nodes()[lo]);
            let inside = mesh.omega_local(lo).is_some() && mesh.omega_local(hi).is_some();
            if inside && t[1] == 0.0 && t[2] == 0.0 {
                assert!((d.h0.0[e] + t[0]).abs() < 1e-15);
                seen_inner = true;
            }
            if !inside {
                assert_eq!(d.h0.0[e], 0.0);
            }
        }
        assert!(seen_inner);

        let d = build_initial_data(&mesh, EdgeFamily::FirstKind, |_| [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], true).unwrap();
        for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
            let t = vec3::sub(mesh.nodes()[hi], mesh.nodes()[lo]);
            if mesh.omega_local(lo).is_none() && t[0] == 0.0 && t[1] == 0.0 {
                assert!((d.h0.0[e] - t[2]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn empty_magnetization_reproduces_h0_star() {
        let mesh = padded_mesh();
        for fam in [EdgeFamily::FirstKind, EdgeFamily::SecondKind] {
            let h = [0.3, -0.2, 1.0];
            let d = build_initial_data(&mesh, fam, |_| [1.0, 0.0, 0.0], h, false).unwrap();
            assert_eq!(d.h0, interpolate_edge(&mesh, fam, |_| h));
            assert!(d.consistency_residual < 1e-12);
        }
    }

    #[test]
    fn whole_domain_magnetized_is_exact() {
        let mesh = unit_cube_mesh(2);
        for fam in [EdgeFamily::FirstKind, EdgeFamily::SecondKind] {
            let d = build_initial_data(&mesh, fam, |_| [0.0, 0.0, 1.0], [0.0; 3], true).unwrap();
            assert!(d.consistency_residual < 1e-13);
            let ops = Operators::new(mesh.clone(), fam);
            assert!((ops.edge_l2_sq(d.h0.coeffs()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unit_m0() {
        let mesh = unit_cube_mesh(1);
        let r = build_initial_data(&mesh, EdgeFamily::FirstKind, |_| [2.0, 0.0, 0.0], [0.0; 3], true);
        assert!(matches!(r, Err(EllgError::ConfigValue { .. })));
    }
}
