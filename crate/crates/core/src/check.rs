//! Runtime invariant suite behind `ellg-sim check --suite invariants`.
//! Small configurations only; the full property tests live in the test suite.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eddy::{build_eddy_system, EddyParams, EddyPreconditioner};
use crate::error::Result;
use crate::fem::{
    assemble_cross_term, discrete_gradient, interpolate_edge, EdgeFamily, EdgeField, NodalField, Operators,
};
use crate::linalg::{dot, SolverOptions};
use crate::llg::{assemble_llg_system, normalize_update, solve_v, tangent_frame, LlgParams};
use crate::mesh::{audit_angle_condition, unit_cube_mesh};
use crate::sim::exchange_energy;
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = vec3::norm(v);
        if n > 0.1 && n <= 1.0 {
            return vec3::scale(1.0 / n, v);
        }
    }
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run_invariant_suite() -> Vec<CheckResult> {
    let mesh = unit_cube_mesh(3);
    let ops = Operators::new(mesh.clone(), EdgeFamily::FirstKind);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = ops.num_omega_nodes();
    let random_m = NodalField((0..n).map(|_| random_unit(&mut rng)).collect());
    let mut out = Vec::new();

    out.push(check("partition of unity", || {
        let ones = vec![1.0; n];
        let a = ops.nodal_mass.quad_form(&ones);
        let c = interpolate_edge(&mesh, EdgeFamily::FirstKind, |_| [1.0, 0.0, 0.0]);
        let b = ops.edge_l2_sq(c.coeffs())?;
        let err = (a - 1.0).abs().max((b - 1.0).abs());
        Ok((err <= 1e-12, format!("max volume error {err:.2e}")))
    }));

    let mut seed_rng = rng.clone();
    out.push(check("de Rham kernel", || {
        let scale = ops.curl_curl.max_abs();
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let s: Vec<f64> = (0..mesh.num_nodes()).map(|_| seed_rng.gen_range(-1.0..1.0)).collect();
            let g = discrete_gradient(&mesh, EdgeFamily::FirstKind, &s);
            worst = worst.max(ops.curl_curl.matvec(g.coeffs()).iter().fold(0.0, |a, v| a.max(v.abs())));
        }
        Ok((worst <= 1e-13 * scale, format!("max |C G s| = {worst:.2e}")))
    }));

    out.push(check("cross term skew", || {
        let s = assemble_cross_term(&mesh, &random_m);
        let scale = s.max_abs();
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let x: Vec<f64> = (0..3 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            worst = worst.max(s.quad_form(&x).abs() / (scale * dot(&x, &x)));
        }
        Ok((worst <= 1e-13, format!("max |x^T S x| / (|S| |x|^2) = {worst:.2e}")))
    }));

    out.push(check("tangent frames", || {
        let f = tangent_frame(&random_m)?;
        let mut worst: f64 = 0.0;
        for z in 0..n {
            let (a, b, m) = (f.t1[z], f.t2[z], random_m.0[z]);
            for r in [
                vec3::norm(a) - 1.0,
                vec3::norm(b) - 1.0,
                vec3::dot(a, b),
                vec3::dot(a, m),
                vec3::dot(b, m),
            ] {
                worst = worst.max(r.abs());
            }
        }
        Ok((worst <= 1e-12, format!("max orthonormality residual {worst:.2e}")))
    }));

    out.push(check("angle condition (unit cube)", || {
        let r = audit_angle_condition(&mesh, true);
        Ok((r.passed, r.to_string()))
    }));

    out.push(check("pure exchange decay", || {
        let p = LlgParams {
            alpha: 0.5,
            ce: 1.0,
            theta: 1.0,
            k: 0.01,
        };
        let h = EdgeField::zeros(ops.num_edge_dofs());
        let zero = NodalField::zeros(n);
        let mut m = random_m.clone();
        let mut e = exchange_energy(&ops.nodal_stiffness, &m)?;
        let mut worst = f64::NEG_INFINITY;
        let mut unit: f64 = 0.0;
        for _ in 0..20 {
            let sys = assemble_llg_system(&ops, &m, &h, &zero, &p)?;
            let (v, _) = solve_v(&sys, &SolverOptions::default())?;
            let (next, st) = normalize_update(&m, &v, p.k)?;
            unit = unit.max(st.unit_violation);
            let en = exchange_energy(&ops.nodal_stiffness, &next)?;
            worst = worst.max(en.sqrt() - e.sqrt());
            e = en;
            m = next;
        }
        Ok((
            worst <= 1e-10 && unit <= 1e-12,
            format!("max increase of ||grad m|| {worst:.2e}, unit violation {unit:.2e}"),
        ))
    }));

    out.push(check("unforced eddy decay", || {
        let sys = build_eddy_system(
            EddyParams {
                mu0: 1.0,
                sigma: 1.0,
                k: 0.01,
            },
            &ops,
            EddyPreconditioner::Cholesky,
        )?;
        let zero = NodalField::zeros(n);
        let mut h = EdgeField((0..ops.num_edge_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let mut prev = ops.edge_l2_sq(h.coeffs())?.sqrt();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            h = sys.step(&ops, &h, &zero, &SolverOptions::default())?.0;
            let cur = ops.edge_l2_sq(h.coeffs())?.sqrt();
            worst = worst.max((cur - prev) / prev);
            prev = cur;
        }
        Ok((worst <= 1e-10, format!("max relative increase {worst:.2e}")))
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes() {
        for r in super::run_invariant_suite() {
            assert!(r.passed, "{r}");
        }
    }
}
