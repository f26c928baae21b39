//! Implicit edge-element step for the magnetic field.

use serde::{Deserialize, Serialize};

use crate::error::{EllgError, Result};
use crate::fem::{EdgeField, NodalField, Operators};
use crate::linalg::{cg, norm2, CsrMatrix, EnvelopeCholesky, Preconditioner, SolveReport, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EddyParams {
    pub mu0: f64,
    pub sigma: f64,
    pub k: f64,
}

impl EddyParams {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("eddy.mu0", self.mu0), ("eddy.sigma", self.sigma), ("time.dt", self.k)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EllgError::ConfigValue {
                    key: key.into(),
                    message: format!("must be > 0, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// CG preconditioner for `A_E`. For small `mu0 / k` the mass term barely
/// controls the large gradient kernel of the curl-curl part and plain or
/// diagonally scaled CG stalls, so the default factors `A_E` once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EddyPreconditioner {
    None,
    Jacobi,
    #[default]
    Cholesky,
}

/// `A_E = (mu0 / k) M_E + C / sigma`, constant over the run.
#[derive(Debug, Clone)]
pub struct EddySystem {
    pub params: EddyParams,
    pub matrix: CsrMatrix,
    kind: EddyPreconditioner,
    factor: Option<EnvelopeCholesky>,
}

pub fn build_eddy_system(params: EddyParams, ops: &Operators, kind: EddyPreconditioner) -> Result<EddySystem> {
    params.validate()?;
    let matrix = ops
        .edge_mass
        .linear_combination(params.mu0 / params.k, &ops.curl_curl, 1.0 / params.sigma);
    let factor = match kind {
        EddyPreconditioner::Cholesky => Some(EnvelopeCholesky::factor(&matrix)?),
        _ => None,
    };
    Ok(EddySystem {
        params,
        matrix,
        kind,
        factor,
    })
}

impl EddySystem {
    /// Right-hand side `(mu0 / k) M_E H_i - mu0 B v_i`.
    pub fn rhs(&self, ops: &Operators, h: &EdgeField, v: &NodalField) -> Vec<f64> {
        let p = &self.params;
        let mh = ops.edge_mass.matvec(h.coeffs());
        let bv = ops.coupling.matvec(&v.to_flat());
        mh.iter().zip(bv).map(|(a, b)| p.mu0 / p.k * a - p.mu0 * b).collect()
    }

    /// Relative residual that rounding alone produces at `x`:
    /// `eps || |A| |x| || / ||b||`.
    pub fn roundoff_floor(&self, x: &[f64], b: &[f64]) -> f64 {
        let abs: Vec<f64> = (0..self.matrix.nrows())
            .map(|i| {
                let (cols, vals) = self.matrix.row(i);
                cols.iter().zip(vals).map(|(&j, a)| (a * x[j]).abs()).sum()
            })
            .collect();
        f64::EPSILON * norm2(&abs) / norm2(b)
    }

    /// Solve for `H_{i+1}` by CG, warm-started from `H_i`.
    ///
    /// When `mu0 / k` is tiny the requested relative residual can lie below
    /// the round-off floor of `A_E`. A CG run that stalls within 10x of that
    /// floor is accepted with `converged = false` in the report; anything
    /// else unconverged is an error.
    pub fn step(&self, ops: &Operators, h: &EdgeField, v: &NodalField, opts: &SolverOptions) -> Result<(EdgeField, SolveReport)> {
        let rhs = self.rhs(ops, h, v);
        let opts = SolverOptions {
            jacobi: self.kind == EddyPreconditioner::Jacobi,
            ..*opts
        };
        let pc = self.factor.as_ref().map(|f| f as &dyn Preconditioner);
        let (x, rep) = cg(&self.matrix, &rhs, h.0.clone(), &opts, pc)?;
        if !rep.converged && rep.residual > 10.0 * self.roundoff_floor(&x, &rhs) {
            return Err(EllgError::NotConverged { solver: "CG", report: rep });
        }
        Ok((EdgeField(x), rep))
    }
}
