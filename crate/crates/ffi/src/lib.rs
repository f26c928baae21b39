//! C ABI for the `ellg` simulator.
//!
//! Every function returns an [`EllgStatus`]; on failure the message is
//! available from [`ellg_last_error_message`] on the same thread. Handles
//! are opaque and must be released with [`ellg_simulation_free`]. Panics
//! never cross the boundary; they are reported as `ELLG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ellg::io::{parse_config, preset, write_energy_csv};
use ellg::{EllgError, EnergyRecord, Simulation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigParse = 3,
    ConfigValue = 4,
    UnknownPreset = 5,
    Mesh = 6,
    Invariant = 7,
    NotConverged = 8,
    Singular = 9,
    Dimension = 10,
    Io = 11,
    Finished = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

/// Opaque simulation handle.
pub struct EllgSimulation {
    sim: Simulation,
}

/// One energy record; all norms squared.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EllgEnergyRecord {
    pub t: f64,
    pub exch: f64,
    pub v_accum: f64,
    pub grad_v_accum: f64,
    pub h_l2: f64,
    pub h_curl: f64,
    pub h_jump_accum: f64,
    pub dth_accum: f64,
    pub curl_accum: f64,
    pub curl_jump_accum: f64,
    pub lhs_total: f64,
    pub unit_violation_max: f64,
    pub tangency_max: f64,
    pub min_denominator: f64,
}

impl From<&EnergyRecord> for EllgEnergyRecord {
    fn from(r: &EnergyRecord) -> Self {
        EllgEnergyRecord {
            t: r.t,
            exch: r.exch,
            v_accum: r.v_accum,
            grad_v_accum: r.grad_v_accum,
            h_l2: r.h_l2,
            h_curl: r.h_curl,
            h_jump_accum: r.h_jump_accum,
            dth_accum: r.dtH_accum,
            curl_accum: r.curl_accum,
            curl_jump_accum: r.curl_jump_accum,
            lhs_total: r.lhs_total,
            unit_violation_max: r.unit_violation_max,
            tangency_max: r.tangency_max,
            min_denominator: r.min_denominator,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

struct Failure(EllgStatus, String);

impl From<EllgError> for Failure {
    fn from(e: EllgError) -> Self {
        let status = match &e {
            EllgError::Mesh(_) => EllgStatus::Mesh,
            EllgError::ConfigParse { .. } => EllgStatus::ConfigParse,
            EllgError::ConfigValue { .. } => EllgStatus::ConfigValue,
            EllgError::UnknownPreset(_) => EllgStatus::UnknownPreset,
            EllgError::Dimension { .. } => EllgStatus::Dimension,
            EllgError::NotConverged { .. } => EllgStatus::NotConverged,
            EllgError::Singular(_) => EllgStatus::Singular,
            EllgError::Invariant { .. } => EllgStatus::Invariant,
            EllgError::Io { .. } => EllgStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EllgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EllgStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EllgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(EllgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(EllgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn sim_ref<'a>(p: *const EllgSimulation) -> Result<&'a Simulation, Failure> {
    p.as_ref().map(|s| &s.sim).ok_or_else(|| null("simulation"))
}

unsafe fn sim_mut<'a>(p: *mut EllgSimulation) -> Result<&'a mut Simulation, Failure> {
    p.as_mut().map(|s| &mut s.sim).ok_or_else(|| null("simulation"))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn create(out: *mut *mut EllgSimulation, cfg: impl FnOnce() -> ellg::Result<ellg::SimConfig>) -> EllgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output handle"));
        }
        out.write(ptr::null_mut());
        let sim = Simulation::new(&cfg()?)?;
        out.write(Box::into_raw(Box::new(EllgSimulation { sim })));
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ellg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ellg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a simulation from a built-in preset such as `"mumag1"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_from_preset(name: *const c_char, out: *mut *mut EllgSimulation) -> EllgStatus {
    let name = match str_arg(name, "preset name") {
        Ok(n) => n.to_string(),
        Err(Failure(s, m)) => {
            set_error(m);
            return s;
        }
    };
    create(out, || preset(&name))
}

/// Create a simulation from TOML configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_from_toml(text: *const c_char, out: *mut *mut EllgSimulation) -> EllgStatus {
    let text = match str_arg(text, "config text") {
        Ok(t) => t.to_string(),
        Err(Failure(s, m)) => {
            set_error(m);
            return s;
        }
    };
    create(out, || parse_config(&text))
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from a constructor of this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_free(sim: *mut EllgSimulation) {
    if !sim.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(sim))));
    }
}

/// Advance one time step. Returns `ELLG_STATUS_FINISHED` once the final
/// time has been reached.
///
/// # Safety
/// `sim` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_step(sim: *mut EllgSimulation) -> EllgStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if s.is_finished() {
            return Err(Failure(EllgStatus::Finished, "run already finished".into()));
        }
        s.step()?;
        Ok(())
    })
}

/// Run to the final time.
///
/// # Safety
/// `sim` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_run(sim: *mut EllgSimulation) -> EllgStatus {
    guard(|| Ok(sim_mut(sim)?.run_to_end()?))
}

/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_num_steps(sim: *const EllgSimulation, out: *mut usize) -> EllgStatus {
    guard(|| write_out(out, sim_ref(sim)?.num_steps()))
}

/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_current_step(sim: *const EllgSimulation, out: *mut usize) -> EllgStatus {
    guard(|| write_out(out, sim_ref(sim)?.current_step()))
}

/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_time(sim: *const EllgSimulation, out: *mut f64) -> EllgStatus {
    guard(|| write_out(out, sim_ref(sim)?.time()))
}

/// Number of magnetization nodes `V`; the tangent system has size `2V`.
///
/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_num_omega_nodes(sim: *const EllgSimulation, out: *mut usize) -> EllgStatus {
    guard(|| write_out(out, sim_ref(sim)?.operators().num_omega_nodes()))
}

/// Number of magnetic field degrees of freedom.
///
/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_num_field_dofs(sim: *const EllgSimulation, out: *mut usize) -> EllgStatus {
    guard(|| write_out(out, sim_ref(sim)?.eddy_system_size()))
}

unsafe fn copy_into(values: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < values.len() {
        return Err(Failure(
            EllgStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Copy the nodal magnetization as `x0 y0 z0 x1 ...` (`3 V` values).
///
/// # Safety
/// `sim` must be a valid handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_magnetization(sim: *const EllgSimulation, buf: *mut f64, len: usize) -> EllgStatus {
    guard(|| copy_into(&sim_ref(sim)?.magnetization().to_flat(), buf, len))
}

/// Copy the magnetic field coefficients.
///
/// # Safety
/// `sim` must be a valid handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_field(sim: *const EllgSimulation, buf: *mut f64, len: usize) -> EllgStatus {
    guard(|| copy_into(sim_ref(sim)?.field().coeffs(), buf, len))
}

/// Energy record of the current time level.
///
/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_last_record(sim: *const EllgSimulation, out: *mut EllgEnergyRecord) -> EllgStatus {
    guard(|| {
        let rec = sim_ref(sim)?.records().last().expect("records never empty");
        write_out(out, rec.into())
    })
}

/// Write all records so far as CSV.
///
/// # Safety
/// `sim` must be a valid handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ellg_simulation_write_energy_csv(sim: *const EllgSimulation, path: *const c_char) -> EllgStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let path = str_arg(path, "path")?;
        Ok(write_energy_csv(s.records(), Path::new(path))?)
    })
}
