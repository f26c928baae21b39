//! Compressed sparse row matrices and the two Krylov solvers used by the
//! time stepper: conjugate gradients for the SPD eddy-current system and
//! restarted GMRES (with a dense LU fallback) for the nonsymmetric tangent
//! system. A sparse envelope Cholesky factorization serves as CG
//! preconditioner for badly scaled SPD systems.

mod cholesky;
mod dense;
mod krylov;
mod sparse;

pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use dense::{lu_solve, DenseLu};
pub use krylov::{cg, solve_general, solve_spd, solve_spd_from, solve_spd_with, Preconditioner, SolveReport, SolverOptions};
pub use sparse::{CsrMatrix, Triplets};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
