use crate::error::Result;
use crate::fem::{checked_quad, EdgeField, NodalField, Operators};
use crate::linalg::CsrMatrix;
use crate::vec3;

/// Every left-hand-side term of the discrete energy estimate at one time.
/// All norms are squared.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyRecord {
    pub t: f64,
    /// `||grad m||^2`
    pub exch: f64,
    /// `k sum ||v||^2`
    pub v_accum: f64,
    /// `(theta - 1/2) k^2 sum ||grad v||^2`
    pub grad_v_accum: f64,
    pub h_l2: f64,
    pub h_curl: f64,
    /// `sum ||H^{i+1} - H^i||^2`
    pub h_jump_accum: f64,
    /// `k sum ||d_t H^{i+1}||^2`
    pub dtH_accum: f64,
    /// `k sum ||curl H^{i+1}||^2`
    pub curl_accum: f64,
    /// `sum ||curl (H^{i+1} - H^i)||^2`
    pub curl_jump_accum: f64,
    pub lhs_total: f64,
    /// `max_z ||m(z)| - 1|`
    pub unit_violation_max: f64,
    /// `max_z |v(z) . m(z)| / max_z |v(z)|` of the step that produced this state.
    pub tangency_max: f64,
    /// Smallest normalization denominator `|m + k v|` of that step.
    pub min_denominator: f64,
}

impl EnergyRecord {
    /// `exch + h_l2 + h_curl`
    pub fn total(&self) -> f64 {
        self.exch + self.h_l2 + self.h_curl
    }

    fn sum_terms(&self) -> f64 {
        self.exch
            + self.v_accum
            + self.grad_v_accum
            + self.h_l2
            + self.h_curl
            + self.h_jump_accum
            + self.dtH_accum
            + self.curl_accum
            + self.curl_jump_accum
    }

    pub fn all_finite(&self) -> bool {
        [
            self.t,
            self.exch,
            self.v_accum,
            self.grad_v_accum,
            self.h_l2,
            self.h_curl,
            self.h_jump_accum,
            self.dtH_accum,
            self.curl_accum,
            self.curl_jump_accum,
            self.lhs_total,
            self.unit_violation_max,
            self.tangency_max,
            self.min_denominator,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// `||grad m||^2` as `-1/2 sum_ij K_ij |m_i - m_j|^2`, equal to `m^T K m`
/// for a stiffness matrix with zero row sums, and exactly 0 for uniform m.
pub fn exchange_energy(k: &CsrMatrix, m: &NodalField) -> Result<f64> {
    let mut acc = 0.0;
    let mut scale = 0.0;
    for i in 0..k.nrows() {
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                let d = vec3::sub(m.0[i], m.0[j]);
                let d2 = vec3::dot(d, d);
                acc -= 0.5 * v * d2;
                scale += 0.5 * v.abs() * d2;
            }
        }
    }
    checked_quad(acc, scale, "exchange energy")
}

fn unit_violation(m: &NodalField) -> f64 {
    m.0.iter().map(|z| (vec3::norm(*z) - 1.0).abs()).fold(0.0, f64::max)
}

/// Running accumulators of the estimate.
#[derive(Debug, Clone)]
pub struct EnergyMonitor {
    theta: f64,
    k: f64,
    current: EnergyRecord,
}

impl EnergyMonitor {
    pub fn start(ops: &Operators, m0: &NodalField, h0: &EdgeField, theta: f64, k: f64) -> Result<Self> {
        let mut r = EnergyRecord {
            t: 0.0,
            exch: exchange_energy(&ops.nodal_stiffness, m0)?,
            h_l2: ops.edge_l2_sq(h0.coeffs())?,
            h_curl: ops.edge_curl_sq(h0.coeffs())?,
            unit_violation_max: unit_violation(m0),
            min_denominator: 1.0,
            ..Default::default()
        };
        r.lhs_total = r.sum_terms();
        Ok(EnergyMonitor { theta, k, current: r })
    }

    pub fn current(&self) -> &EnergyRecord {
        &self.current
    }

    /// Fold in one step `(m_i, H_i, v_i) -> (m_{i+1}, H_{i+1})`.
    #[allow(clippy::too_many_arguments)]
    pub fn advance(
        &mut self,
        ops: &Operators,
        t: f64,
        v: &NodalField,
        m_next: &NodalField,
        h_prev: &EdgeField,
        h_next: &EdgeField,
        tangency: f64,
        min_denominator: f64,
    ) -> Result<&EnergyRecord> {
        let k = self.k;
        let r = &mut self.current;
        let dh: Vec<f64> = h_next.0.iter().zip(&h_prev.0).map(|(a, b)| a - b).collect();
        let jump = ops.edge_l2_sq(&dh)?;
        let curl_next = ops.edge_curl_sq(h_next.coeffs())?;
        r.t = t;
        r.exch = exchange_energy(&ops.nodal_stiffness, m_next)?;
        r.v_accum += k * ops.nodal_l2_sq(v)?;
        r.grad_v_accum += (self.theta - 0.5) * k * k * ops.nodal_grad_sq(v)?;
        r.h_l2 = ops.edge_l2_sq(h_next.coeffs())?;
        r.h_curl = curl_next;
        r.h_jump_accum += jump;
        r.dtH_accum += jump / k;
        r.curl_accum += k * curl_next;
        r.curl_jump_accum += ops.edge_curl_sq(&dh)?;
        r.unit_violation_max = unit_violation(m_next);
        r.tangency_max = tangency;
        r.min_denominator = min_denominator;
        r.lhs_total = r.sum_terms();
        Ok(r)
    }
}
