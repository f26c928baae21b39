use std::fmt;

use super::{dot, lu_solve, norm2, CsrMatrix};
use crate::error::{EllgError, Result};

/// Largest system for which the general solver falls back to dense LU.
const DENSE_FALLBACK_MAX: usize = 2000;
const GMRES_RESTART: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target `||Ax - b|| / ||b||`.
    pub tol: f64,
    /// Defaults to `10 n` when unset.
    pub max_iter: Option<usize>,
    /// Diagonal (Jacobi) preconditioning.
    pub jacobi: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: None,
            jacobi: false,
        }
    }
}

impl SolverOptions {
    fn max_iter(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final true relative residual in the 2-norm.
    pub residual: f64,
    pub converged: bool,
    /// Set when the dense LU fallback produced the solution.
    pub dense_fallback: bool,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, relative residual {:.3e}{}{}",
            self.iterations,
            self.residual,
            if self.converged { "" } else { " (not converged)" },
            if self.dense_fallback { ", dense LU fallback" } else { "" }
        )
    }
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64], bnorm: f64) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum();
    r.sqrt() / bnorm
}

fn inverse_diagonal(a: &CsrMatrix, jacobi: bool) -> Option<Vec<f64>> {
    jacobi.then(|| {
        a.diagonal()
            .into_iter()
            .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect()
    })
}

fn check_square(a: &CsrMatrix, b: &[f64], context: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(EllgError::Dimension {
            context,
            expected: a.nrows(),
            actual: a.ncols(),
        });
    }
    if b.len() != a.nrows() {
        return Err(EllgError::Dimension {
            context,
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Conjugate gradients from a zero initial guess.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    solve_spd_from(a, b, vec![0.0; b.len()], opts)
}

/// Symmetric positive definite approximation of `A^{-1}` for CG.
pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// Conjugate gradients from the initial guess `x`. Non-convergence is
/// returned as [`EllgError::NotConverged`].
pub fn solve_spd_from(a: &CsrMatrix, b: &[f64], x: Vec<f64>, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    solve_spd_with(a, b, x, opts, None)
}

/// CG with an explicit preconditioner, which takes precedence over
/// `opts.jacobi`.
pub fn solve_spd_with(
    a: &CsrMatrix,
    b: &[f64],
    x: Vec<f64>,
    opts: &SolverOptions,
    pc: Option<&dyn Preconditioner>,
) -> Result<(Vec<f64>, SolveReport)> {
    let (x, report) = cg(a, b, x, opts, pc)?;
    if report.converged {
        Ok((x, report))
    } else {
        Err(EllgError::NotConverged { solver: "CG", report })
    }
}

/// CG core. Returns the last iterate even when the tolerance was not met;
/// iteration stops early once restarts from the true residual stop making
/// progress (round-off floor). Errors only on breakdown.
pub fn cg(
    a: &CsrMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    opts: &SolverOptions,
    pc: Option<&dyn Preconditioner>,
) -> Result<(Vec<f64>, SolveReport)> {
    check_square(a, b, "solve_spd")?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                residual: 0.0,
                converged: true,
                dense_fallback: false,
            },
        ));
    }
    let dinv = inverse_diagonal(a, opts.jacobi && pc.is_none());
    let precond = |r: &[f64]| -> Vec<f64> {
        match (pc, &dinv) {
            (Some(p), _) => p.apply(r),
            (None, Some(d)) => r.iter().zip(d).map(|(r, d)| r * d).collect(),
            (None, None) => r.to_vec(),
        }
    };
    let max_iter = opts.max_iter(n);
    let mut r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
    let mut iterations = 0;
    let mut residual = norm2(&r) / bnorm;
    let mut ap = vec![0.0; n];
    let mut stalls = 0;
    // outer loop restarts from the true residual when the recurrence drifts
    while residual > opts.tol && iterations < max_iter {
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            iterations += 1;
            a.matvec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(EllgError::NotConverged {
                    solver: "CG (matrix not positive definite)",
                    report: SolveReport {
                        iterations,
                        residual,
                        converged: false,
                        dense_fallback: false,
                    },
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm2(&r) / bnorm <= opts.tol {
                break;
            }
            z = precond(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        r = a.matvec(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
        let prev = residual;
        residual = norm2(&r) / bnorm;
        if residual > opts.tol && residual > 0.5 * prev {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ok((
        x,
        SolveReport {
            iterations,
            residual,
            converged: residual <= opts.tol,
            dense_fallback: false,
        },
    ))
}

/// Restarted right-preconditioned GMRES; falls back to dense LU when the
/// iteration stalls and `n <= 2000`.
pub fn solve_general(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    check_square(a, b, "solve_general")?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                residual: 0.0,
                converged: true,
                dense_fallback: false,
            },
        ));
    }
    let (x, iterations) = gmres(a, b, bnorm, opts);
    let residual = relative_residual(a, &x, b, bnorm);
    if residual <= opts.tol {
        return Ok((
            x,
            SolveReport {
                iterations,
                residual,
                converged: true,
                dense_fallback: false,
            },
        ));
    }
    if n <= DENSE_FALLBACK_MAX {
        log::debug!("GMRES stalled at residual {residual:.3e}; using dense LU");
        let x = lu_solve(a, b)?;
        let residual = relative_residual(a, &x, b, bnorm);
        let report = SolveReport {
            iterations,
            residual,
            converged: residual <= opts.tol,
            dense_fallback: true,
        };
        return if report.converged {
            Ok((x, report))
        } else {
            Err(EllgError::NotConverged {
                solver: "dense LU",
                report,
            })
        };
    }
    Err(EllgError::NotConverged {
        solver: "GMRES",
        report: SolveReport {
            iterations,
            residual,
            converged: false,
            dense_fallback: false,
        },
    })
}

fn gmres(a: &CsrMatrix, b: &[f64], bnorm: f64, opts: &SolverOptions) -> (Vec<f64>, usize) {
    let n = b.len();
    let m = GMRES_RESTART.min(n);
    let max_iter = opts.max_iter(n);
    let dinv = inverse_diagonal(a, opts.jacobi);
    let precond = |v: &[f64]| -> Vec<f64> {
        match &dinv {
            Some(d) => v.iter().zip(d).map(|(v, d)| v * d).collect(),
            None => v.to_vec(),
        }
    };
    let mut x = vec![0.0; n];
    let mut iterations = 0;
    let mut stalls = 0;
    let mut last_cycle_residual = f64::INFINITY;
    while iterations < max_iter {
        let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
        let beta = norm2(&r);
        if beta / bnorm <= opts.tol {
            break;
        }
        let res = beta / bnorm;
        if res > 0.99 * last_cycle_residual {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else if last_cycle_residual.is_finite() {
            // cycles still needed at the observed contraction rate
            let cycles = (opts.tol / res).ln() / (res / last_cycle_residual).ln();
            if iterations as f64 + cycles * m as f64 > max_iter as f64 {
                break;
            }
        }
        last_cycle_residual = res;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            iterations += 1;
            let mut w = a.matvec(&precond(&basis[k]));
            for (i, vi) in basis.iter().enumerate() {
                let h = dot(&w, vi);
                hess[i][k] = h;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= h * vj;
                }
            }
            let wn = norm2(&w);
            hess[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= 0.5 * opts.tol || wn == 0.0 || iterations >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution for the least squares coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| hess[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&basis) {
            for (u, v) in update.iter_mut().zip(vi) {
                *u += yi * v;
            }
        }
        for (xi, u) in x.iter_mut().zip(precond(&update)) {
            *xi += u;
        }
    }
    (x, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_csr(d: &[Vec<f64>]) -> CsrMatrix {
        let trip: Vec<_> = d
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)))
            .collect();
        CsrMatrix::try_from_triplets(d.len(), d.len(), &trip).unwrap()
    }

    #[test]
    fn cg_identity_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, rep) = solve_spd(&a, &b, &SolverOptions::default()).unwrap();
        assert_eq!(x, b);
        assert!(rep.iterations <= 1);
    }

    #[test]
    fn cg_diagonal() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 4.0]);
        let (x, rep) = solve_spd(&a, &[1.0, 2.0, 4.0], &SolverOptions::default()).unwrap();
        assert!(rep.converged);
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0]);
        let (x, rep) = solve_spd(&a, &[0.0, 0.0], &SolverOptions::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(rep.iterations, 0);
        let (x, rep) = solve_general(&a, &[0.0, 0.0], &SolverOptions::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn cg_reports_nonconvergence() {
        let a = CsrMatrix::from_diagonal(&[1.0, 10.0, 100.0, 1000.0]);
        let opts = SolverOptions {
            max_iter: Some(1),
            ..Default::default()
        };
        assert!(matches!(
            solve_spd(&a, &[1.0; 4], &opts),
            Err(EllgError::NotConverged { .. })
        ));
    }

    #[test]
    fn gmres_skew_plus_identity() {
        let a = dense_to_csr(&[vec![1.0, 1.0], vec![-1.0, 1.0]]);
        let b = [1.0, 1.0];
        let (x, rep) = solve_general(&a, &b, &SolverOptions::default()).unwrap();
        let ax = a.matvec(&x);
        let res = ((ax[0] - b[0]).powi(2) + (ax[1] - b[1]).powi(2)).sqrt() / 2f64.sqrt();
        assert!(res <= 1e-12, "{rep}");
        assert!((x[0] - 0.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gmres_identity() {
        let a = CsrMatrix::identity(4);
        let (x, _) = solve_general(&a, &[1.0, 2.0, 3.0, 4.0], &SolverOptions::default()).unwrap();
        for (xi, e) in x.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((xi - e).abs() < 1e-12);
        }
    }

    #[test]
    fn gmres_random_manufactured_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v: f64 = rng.gen_range(-1.0..1.0) / n as f64;
                        if i == j {
                            4.0 + v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let a = dense_to_csr(&d);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.matvec(&xs);
        for jacobi in [false, true] {
            let opts = SolverOptions {
                tol: 1e-13,
                jacobi,
                ..Default::default()
            };
            let (x, rep) = solve_general(&a, &b, &opts).unwrap();
            assert!(!rep.dense_fallback);
            for (xi, e) in x.iter().zip(&xs) {
                assert!((xi - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gmres_singular_fails_explicitly() {
        let a = dense_to_csr(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(solve_general(&a, &[1.0, 0.0], &SolverOptions::default()).is_err());
    }

    #[test]
    fn solves_are_deterministic() {
        let a = dense_to_csr(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let b = [1.0, 2.0, 3.0];
        let o = SolverOptions::default();
        assert_eq!(solve_spd(&a, &b, &o).unwrap(), solve_spd(&a, &b, &o).unwrap());
        assert_eq!(solve_general(&a, &b, &o).unwrap(), solve_general(&a, &b, &o).unwrap());
    }

    #[test]
    fn jacobi_cg_converges() {
        let a = CsrMatrix::from_diagonal(&[1.0, 1e3, 1e6]);
        let opts = SolverOptions {
            jacobi: true,
            ..Default::default()
        };
        let (x, rep) = solve_spd(&a, &[1.0, 1e3, 1e6], &opts).unwrap();
        assert!(rep.iterations <= 2);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}
