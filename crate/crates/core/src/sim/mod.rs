//! The time loop: tangent solve, normalization, field solve, energy record.

mod config;
mod energy;

use log::{debug, warn};

pub use config::{
    EddySpec, FieldSpec, InitialSpec, LlgSpec, MeshSpec, Metadata, OutputSpec, SimConfig, SolverSpec, TimeSpec,
};
pub use energy::{exchange_energy, EnergyMonitor, EnergyRecord};

use crate::eddy::{build_eddy_system, EddySystem};
use crate::error::{EllgError, Result};
use crate::fem::{EdgeField, NodalField, Operators};
use crate::field::{build_initial_data, standard_pi, InitialData, PiOperator};
use crate::linalg::{SolveReport, SolverOptions};
use crate::llg::{assemble_llg_system, normalize_update, solve_v, LlgParams};
use crate::mesh::Mesh;
use crate::vec3;

const UNIT_LIMIT: f64 = 1e-12;
const TANGENCY_LIMIT: f64 = 1e-10;

/// Which states feed the two sub-steps. Only `Decoupled` is the scheme;
/// the others exist to check that the ordering is observable.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingOrder {
    /// LLG uses `H_i`, the field step uses `v_i`.
    #[default]
    Decoupled,
    /// The field step uses `v_{i-1}`.
    LaggedVelocity,
    /// The field step runs first (with `v_{i-1}`) and LLG sees `H_{i+1}`.
    FieldFirst,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub m: NodalField,
    pub h: EdgeField,
}

#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    /// One record per time level, `t_0 = 0` included.
    pub records: Vec<EnergyRecord>,
    pub snapshots: Vec<Snapshot>,
}

/// Solver effort over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverStats {
    pub llg_iterations: usize,
    pub llg_dense_fallbacks: usize,
    pub eddy_iterations: usize,
    pub max_llg_residual: f64,
    pub max_eddy_residual: f64,
    /// Eddy solves accepted at the round-off floor above the tolerance.
    pub eddy_floor_steps: usize,
}

/// Stability warnings for the chosen `theta`, `k` and mesh size `h`.
pub fn theta_guard(params: &LlgParams, h: f64) -> Vec<String> {
    let r6 = |x: f64| (x * 1e6).round() / 1e6;
    let mut out = Vec::new();
    if params.theta < 0.5 {
        out.push(format!(
            "theta = {} < 1/2: stability needs k/h^2 -> 0, here k/h² = {}",
            params.theta,
            r6(params.k / (h * h))
        ));
    } else if params.theta == 0.5 {
        out.push(format!(
            "theta = 1/2: stability needs k/h -> 0, here k/h = {}",
            r6(params.k / h)
        ));
    }
    if params.k >= params.alpha {
        out.push(format!(
            "time step k = {} is not below alpha = {}; the energy bound is not guaranteed",
            params.k, params.alpha
        ));
    }
    out
}

pub struct Simulation {
    config: SimConfig,
    ops: Operators,
    llg: LlgParams,
    eddy: EddySystem,
    pi: Box<dyn PiOperator>,
    opts: SolverOptions,
    order: CouplingOrder,
    num_steps: usize,
    step: usize,
    m: NodalField,
    h: EdgeField,
    prev_v: NodalField,
    monitor: EnergyMonitor,
    records: Vec<EnergyRecord>,
    snapshots: Vec<Snapshot>,
    warnings: Vec<String>,
    stats: SolverStats,
    initial_consistency: f64,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("step", &self.step)
            .field("num_steps", &self.num_steps)
            .field("omega_nodes", &self.ops.num_omega_nodes())
            .field("edge_dofs", &self.ops.num_edge_dofs())
            .finish()
    }
}

impl Simulation {
    /// Build mesh, operators and initial data from a validated config.
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let mesh = config.build_mesh()?;
        let m0 = config.initial.m0;
        let initial = build_initial_data(
            &mesh,
            config.eddy.family,
            |_| m0,
            config.initial.h0_star,
            config.initial.subtract_magnetization,
        )?;
        let f = &config.field;
        let pi = standard_pi(f.ca, f.easy_axis, f.h_ext)?;
        Self::from_parts(config.clone(), mesh, initial, Box::new(pi))
    }

    /// Start from explicit mesh, initial data and field contribution. Mesh
    /// settings inside `config` are ignored.
    pub fn from_parts(config: SimConfig, mesh: Mesh, initial: InitialData, pi: Box<dyn PiOperator>) -> Result<Self> {
        let llg = config.llg_params();
        llg.validate()?;
        let num_steps = config.num_steps()?;
        let ops = Operators::new(mesh, config.eddy.family);
        let nv = ops.num_omega_nodes();
        if initial.m0.len() != nv {
            return Err(EllgError::Dimension {
                context: "initial magnetization",
                expected: nv,
                actual: initial.m0.len(),
            });
        }
        if initial.h0.len() != ops.num_edge_dofs() {
            return Err(EllgError::Dimension {
                context: "initial field",
                expected: ops.num_edge_dofs(),
                actual: initial.h0.len(),
            });
        }
        let eddy = build_eddy_system(config.eddy_params(), &ops, config.solver.eddy_precond)?;
        let warnings = theta_guard(&llg, ops.mesh().h_omega());
        for w in &warnings {
            warn!("{w}");
        }
        let monitor = EnergyMonitor::start(&ops, &initial.m0, &initial.h0, llg.theta, llg.k)?;
        let records = vec![*monitor.current()];
        let mut sim = Simulation {
            opts: config.solver_options(),
            config,
            llg,
            eddy,
            pi,
            order: CouplingOrder::Decoupled,
            num_steps,
            step: 0,
            prev_v: NodalField::zeros(nv),
            m: initial.m0,
            h: initial.h0,
            monitor,
            records,
            snapshots: Vec::new(),
            warnings,
            stats: SolverStats::default(),
            initial_consistency: initial.consistency_residual,
            ops,
        };
        sim.maybe_snapshot();
        Ok(sim)
    }

    #[doc(hidden)]
    pub fn set_coupling_order(&mut self, order: CouplingOrder) {
        self.order = order;
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn mesh(&self) -> &Mesh {
        self.ops.mesh()
    }

    pub fn magnetization(&self) -> &NodalField {
        &self.m
    }

    pub fn field(&self) -> &EdgeField {
        &self.h
    }

    pub fn current_step(&self) -> usize {
        self.step
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.llg.k
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.num_steps
    }

    pub fn records(&self) -> &[EnergyRecord] {
        &self.records
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn solver_stats(&self) -> SolverStats {
        self.stats
    }

    /// `||H0 + chi m0 - H0*||` of the initial data.
    pub fn initial_consistency(&self) -> f64 {
        self.initial_consistency
    }

    /// Size of the reduced tangent system, `2V`.
    pub fn llg_system_size(&self) -> usize {
        2 * self.ops.num_omega_nodes()
    }

    pub fn eddy_system_size(&self) -> usize {
        self.ops.num_edge_dofs()
    }

    fn maybe_snapshot(&mut self) {
        let every = self.config.output.vtk_every;
        if every > 0 && self.step % every == 0 {
            self.snapshots.push(Snapshot {
                step: self.step,
                t: self.time(),
                m: self.m.clone(),
                h: self.h.clone(),
            });
        }
    }

    fn llg_substep(&mut self, h: &EdgeField) -> Result<NodalField> {
        let pi_field = self.pi.eval(&self.m);
        let sys = assemble_llg_system(&self.ops, &self.m, h, &pi_field, &self.llg)?;
        let (v, rep) = solve_v(&sys, &self.opts)?;
        self.note_llg(&rep);
        Ok(v)
    }

    fn eddy_substep(&mut self, v: &NodalField) -> Result<EdgeField> {
        let (h, rep) = self.eddy.step(&self.ops, &self.h, v, &self.opts)?;
        self.stats.eddy_iterations += rep.iterations;
        self.stats.max_eddy_residual = self.stats.max_eddy_residual.max(rep.residual);
        if !rep.converged {
            if self.stats.eddy_floor_steps == 0 {
                let w = format!(
                    "eddy solve limited by round-off: relative residual {:.3e} above tolerance {:.1e}",
                    rep.residual, self.opts.tol
                );
                warn!("{w}");
                self.warnings.push(w);
            }
            self.stats.eddy_floor_steps += 1;
        }
        Ok(h)
    }

    fn note_llg(&mut self, rep: &SolveReport) {
        self.stats.llg_iterations += rep.iterations;
        self.stats.llg_dense_fallbacks += rep.dense_fallback as usize;
        self.stats.max_llg_residual = self.stats.max_llg_residual.max(rep.residual);
    }

    fn advance(&mut self) -> Result<()> {
        let (v, h_next) = match self.order {
            CouplingOrder::Decoupled => {
                let h = self.h.clone();
                let v = self.llg_substep(&h)?;
                let h_next = self.eddy_substep(&v)?;
                (v, h_next)
            }
            CouplingOrder::LaggedVelocity => {
                let h = self.h.clone();
                let v = self.llg_substep(&h)?;
                let lag = std::mem::replace(&mut self.prev_v, v.clone());
                let h_next = self.eddy_substep(&lag)?;
                (v, h_next)
            }
            CouplingOrder::FieldFirst => {
                let lag = self.prev_v.clone();
                let h_next = self.eddy_substep(&lag)?;
                let v = self.llg_substep(&h_next)?;
                self.prev_v = v.clone();
                (v, h_next)
            }
        };
        let (m_next, st) = normalize_update(&self.m, &v, self.llg.k)?;
        let tangency = if st.v_max > 0.0 { st.tangency_abs / st.v_max } else { 0.0 };
        if tangency > TANGENCY_LIMIT {
            return Err(EllgError::invariant(format!("relative tangency {tangency:.3e}")));
        }
        if st.unit_violation > UNIT_LIMIT {
            return Err(EllgError::invariant(format!("unit violation {:.3e}", st.unit_violation)));
        }
        let t = (self.step + 1) as f64 * self.llg.k;
        let rec = *self
            .monitor
            .advance(&self.ops, t, &v, &m_next, &self.h, &h_next, tangency, st.min_denominator)?;
        if !rec.all_finite() || !m_next.is_finite() || !h_next.is_finite() {
            return Err(EllgError::invariant("non-finite state or energy"));
        }
        self.m = m_next;
        self.h = h_next;
        self.step += 1;
        self.records.push(rec);
        debug!(
            "step {} t = {:.4} exch = {:.6e} |H|^2 = {:.6e} lhs = {:.6e}",
            self.step, rec.t, rec.exch, rec.h_l2, rec.lhs_total
        );
        Ok(())
    }

    /// One iteration of the scheme; errors carry the step index.
    pub fn step(&mut self) -> Result<&EnergyRecord> {
        if self.is_finished() {
            return Err(EllgError::invariant(format!(
                "run already finished after {} steps",
                self.num_steps
            )));
        }
        let i = self.step;
        self.advance().map_err(|e| e.at_step(i))?;
        self.maybe_snapshot();
        Ok(self.records.last().expect("records never empty"))
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_series(self) -> TimeSeries {
        TimeSeries {
            records: self.records,
            snapshots: self.snapshots,
        }
    }
}

/// Run a configuration to its final time.
pub fn run(config: &SimConfig) -> Result<TimeSeries> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end()?;
    Ok(sim.into_series())
}

/// Max of `|m_h|` at random interior points per omega tet; bounded by the
/// nodal maximum by convexity of the barycentric combination.
pub fn sampled_sup_norm(mesh: &Mesh, m: &NodalField, samples: usize, rng: &mut impl rand::Rng) -> f64 {
    let tets = mesh.omega_tets();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = tets[rng.gen_range(0..tets.len())];
        let mut l = [0.0; 4];
        for v in &mut l {
            *v = rng.gen_range(0.0..1.0f64);
        }
        let s: f64 = l.iter().sum();
        let l = l.map(|v| v / s);
        worst = worst.max(vec3::norm(crate::fem::evaluate_nodal_field(mesh, m, t, &l)));
    }
    worst
}
