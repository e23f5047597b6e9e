//! C bindings for the evograph replicator library.
//!
//! Every handle crossing the boundary is an opaque pointer produced by a
//! constructor here and released by its matching `eg_*_free`. Fallible
//! calls return an [`EgStatus`]; out-parameters are written only when the
//! status is `Ok`, and [`eg_last_error_message`] holds a description of the
//! most recent failure on the calling thread. Panics never unwind across
//! the boundary: they are caught and reported as [`EgStatus::Panic`].
//!
//! Thread safety: distinct handles may be used from distinct threads, but a
//! single handle must not be used concurrently.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use evograph::analysis::{integrate, peer_thresholds, pool_thresholds, TerminalReason, Trajectory};
use evograph::config_space::MAX_TOTAL;
use evograph::payoff::{
    load_payoff_file, peer_punishment, pgg, pool_punishment, GameParams, PayoffModel,
};
use evograph::replicator::{ReplicatorSystem, UpdateRule};
use evograph::{ErrorCategory, EvoError};

/// Outcome of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgStatus {
    /// The call succeeded and all out-parameters were written.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument failed validation; see `eg_last_error_message`.
    InvalidArgument = 2,
    /// A numerical procedure failed partway through.
    Numerical = 3,
    /// A filesystem operation failed.
    Io = 4,
    /// A caller-supplied buffer is too small for the value.
    BufferTooSmall = 5,
    /// An index lies outside the valid range for the handle.
    IndexOutOfRange = 6,
    /// A string argument is not valid UTF-8.
    InvalidUtf8 = 7,
    /// The library panicked; treat involved handles as poisoned.
    Panic = 8,
}

/// Update rule selector. Functions take these as `uint32_t` so that an
/// out-of-range value can be rejected instead of being undefined behavior.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgRule {
    /// Imitation through pairwise payoff comparison on the graph.
    PairwiseComparison = 0,
    /// Death-birth updating on the graph.
    DeathBirth = 1,
    /// Well-mixed baseline without graph structure.
    WellMixed = 2,
}

/// Why an integration run stopped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgTerminal {
    /// The field magnitude stayed below the convergence threshold away from
    /// any vertex.
    Converged = 0,
    /// Time ran out before the field slowed down.
    MaxTime = 1,
    /// The field slowed down with one strategy at fixation.
    BoundaryAbsorbed = 2,
}

/// Closed-form critical fines at one (r, cost, alpha, k) point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgThresholds {
    /// Fine below which defection is the only stable state, well-mixed.
    pub beta0_wm: f64,
    /// Fine below which defection is the only stable state, on the graph.
    pub beta0: f64,
    /// Fine at which the structured and well-mixed interior equilibria
    /// coincide.
    pub beta_eq: f64,
    /// Fine above which the defector vertex loses stability on the graph.
    pub beta_star: f64,
}

/// Opaque payoff model handle.
pub struct EgModel {
    inner: std::sync::Arc<dyn PayoffModel>,
}

/// Opaque replicator vector-field handle.
pub struct EgSystem {
    inner: ReplicatorSystem,
}

/// Opaque integration result handle.
pub struct EgTrajectory {
    inner: Trajectory,
    dimension: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: Vec<u8> = message.bytes().filter(|&b| b != 0).collect();
    let text = CString::new(sanitized).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn invalid(message: &str) -> EgStatus {
    set_error(message);
    EgStatus::InvalidArgument
}

fn failure(error: EvoError) -> EgStatus {
    let status = match error.category() {
        ErrorCategory::Validation => EgStatus::InvalidArgument,
        ErrorCategory::Numerical => EgStatus::Numerical,
        ErrorCategory::Io => EgStatus::Io,
    };
    set_error(&error.to_string());
    status
}

/// Runs `body`, converting any panic into `EgStatus::Panic` so unwinding
/// never crosses the C boundary.
fn guarded<F: FnOnce() -> EgStatus>(body: F) -> EgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(&format!("internal panic: {what}"));
            EgStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!(stringify!($ptr), " must not be null"));
            return EgStatus::NullPointer;
        }
    };
}

fn check_degree(k: u32) -> Result<(), EgStatus> {
    if k == 0 || k > MAX_TOTAL {
        Err(invalid(&format!(
            "co-player count k = {k} out of range 1..={MAX_TOTAL}"
        )))
    } else {
        Ok(())
    }
}

fn rule_from_raw(raw: u32) -> Result<UpdateRule, EgStatus> {
    match raw {
        0 => Ok(UpdateRule::PairwiseComparison),
        1 => Ok(UpdateRule::DeathBirth),
        2 => Ok(UpdateRule::WellMixed),
        other => Err(invalid(&format!(
            "rule value {other} is not one of the EgRule constants 0, 1, 2"
        ))),
    }
}

unsafe fn emit_model(model: std::sync::Arc<dyn PayoffModel>, out: *mut *mut EgModel) -> EgStatus {
    *out = Box::into_raw(Box::new(EgModel { inner: model }));
    EgStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on the calling thread.
///
/// The pointer stays valid until the next failing call on the same thread.
/// Before any failure it is the empty string, never null.
#[no_mangle]
pub extern "C" fn eg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Creates a public goods model: strategies C and D, pot factor `r`,
/// contribution `cost`, `k` co-players per game.
///
/// # Safety
/// `out` must be a valid location to store a pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_model_pgg(
    k: u32,
    r: f64,
    cost: f64,
    out: *mut *mut EgModel,
) -> EgStatus {
    guarded(|| {
        nonnull!(out);
        if let Err(status) = check_degree(k) {
            return status;
        }
        let params = match GameParams::new(r, cost, 0.0, 0.0) {
            Ok(params) => params,
            Err(error) => return failure(error),
        };
        unsafe { emit_model(std::sync::Arc::new(pgg(&params, k)), out) }
    })
}

/// Creates a peer punishment model: strategies C, D, E where punishers pay
/// `alpha` per defecting co-player to fine each defector `beta`.
///
/// # Safety
/// `out` must be a valid location to store a pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_model_peer_punishment(
    k: u32,
    r: f64,
    cost: f64,
    alpha: f64,
    beta: f64,
    out: *mut *mut EgModel,
) -> EgStatus {
    guarded(|| {
        nonnull!(out);
        if let Err(status) = check_degree(k) {
            return status;
        }
        let params = match GameParams::new(r, cost, alpha, beta) {
            Ok(params) => params,
            Err(error) => return failure(error),
        };
        unsafe { emit_model(std::sync::Arc::new(peer_punishment(&params, k)), out) }
    })
}

/// Creates a pool punishment model: strategies C, D, O where punishers pay
/// a flat `alpha` and defectors lose `beta` whenever a punisher is present.
///
/// # Safety
/// `out` must be a valid location to store a pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_model_pool_punishment(
    k: u32,
    r: f64,
    cost: f64,
    alpha: f64,
    beta: f64,
    out: *mut *mut EgModel,
) -> EgStatus {
    guarded(|| {
        nonnull!(out);
        if let Err(status) = check_degree(k) {
            return status;
        }
        let params = match GameParams::new(r, cost, alpha, beta) {
            Ok(params) => params,
            Err(error) => return failure(error),
        };
        unsafe { emit_model(std::sync::Arc::new(pool_punishment(&params, k)), out) }
    })
}

/// Loads a payoff model from a JSON document on disk.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid location
/// to store a pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_model_from_file(
    path: *const c_char,
    out: *mut *mut EgModel,
) -> EgStatus {
    guarded(|| {
        nonnull!(path);
        nonnull!(out);
        let raw = unsafe { CStr::from_ptr(path) };
        let Ok(text) = raw.to_str() else {
            set_error("path is not valid UTF-8");
            return EgStatus::InvalidUtf8;
        };
        match load_payoff_file(Path::new(text)) {
            Ok(model) => unsafe { emit_model(model, out) },
            Err(error) => failure(error),
        }
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a pointer from an `eg_model_*` constructor that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn eg_model_free(model: *mut EgModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of strategies, or 0 when `model` is null.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn eg_model_strategy_count(model: *const EgModel) -> u32 {
    match unsafe { model.as_ref() } {
        Some(model) => model.inner.n() as u32,
        None => 0,
    }
}

/// Number of co-players per game, or 0 when `model` is null.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn eg_model_degree(model: *const EgModel) -> u32 {
    match unsafe { model.as_ref() } {
        Some(model) => model.inner.k(),
        None => 0,
    }
}

/// Copies the NUL-terminated name of strategy `index` into `buffer`.
///
/// # Safety
/// `model` must be a live model handle and `buffer` must point to at least
/// `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn eg_model_strategy_name(
    model: *const EgModel,
    index: u32,
    buffer: *mut c_char,
    capacity: usize,
) -> EgStatus {
    guarded(|| {
        nonnull!(model);
        nonnull!(buffer);
        let model = unsafe { &*model };
        let names = model.inner.strategy_names();
        let Some(name) = names.get(index as usize) else {
            set_error(&format!(
                "strategy index {index} out of range for {} strategies",
                names.len()
            ));
            return EgStatus::IndexOutOfRange;
        };
        let bytes = name.as_bytes();
        if capacity < bytes.len() + 1 {
            set_error(&format!(
                "name needs {} bytes including the NUL, buffer holds {capacity}",
                bytes.len() + 1
            ));
            return EgStatus::BufferTooSmall;
        }
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer as *mut u8, bytes.len());
            *buffer.add(bytes.len()) = 0;
        }
        EgStatus::Ok
    })
}

/// Payoff of a focal player using strategy `focal` whose `counts[j]`
/// co-players use strategy j. `counts` has one entry per strategy and must
/// sum to the model degree.
///
/// # Safety
/// `model` must be a live model handle, `counts` must point to
/// `counts_len` readable entries, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eg_model_payoff(
    model: *const EgModel,
    focal: u32,
    counts: *const u32,
    counts_len: usize,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        nonnull!(model);
        nonnull!(counts);
        nonnull!(out);
        let model = unsafe { &*model };
        let n = model.inner.n();
        if focal as usize >= n {
            set_error(&format!(
                "focal strategy {focal} out of range for {n} strategies"
            ));
            return EgStatus::IndexOutOfRange;
        }
        if counts_len != n {
            return invalid(&format!("counts has {counts_len} entries, model has {n}"));
        }
        let counts = unsafe { std::slice::from_raw_parts(counts, counts_len) };
        let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if total != u64::from(model.inner.k()) {
            return invalid(&format!(
                "co-player counts sum to {total}, model degree is {}",
                model.inner.k()
            ));
        }
        unsafe { *out = model.inner.payoff(focal as usize, counts) };
        EgStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Replicator systems
// ---------------------------------------------------------------------------

/// Creates a replicator vector field over `model` with selection strength
/// `delta`. `rule` is one of the `EgRule` constants. The model handle stays
/// owned by the caller and may be freed independently.
///
/// # Safety
/// `model` must be a live model handle; `out` must be a valid location to
/// store a pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_system_new(
    model: *const EgModel,
    rule: u32,
    delta: f64,
    out: *mut *mut EgSystem,
) -> EgStatus {
    guarded(|| {
        nonnull!(model);
        nonnull!(out);
        let model = unsafe { &*model };
        let rule = match rule_from_raw(rule) {
            Ok(rule) => rule,
            Err(status) => return status,
        };
        match ReplicatorSystem::new(model.inner.clone(), rule, delta) {
            Ok(system) => {
                unsafe { *out = Box::into_raw(Box::new(EgSystem { inner: system })) };
                EgStatus::Ok
            }
            Err(error) => failure(error),
        }
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `system` must be null or a pointer from `eg_system_new` that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn eg_system_free(system: *mut EgSystem) {
    if !system.is_null() {
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Number of strategies of the underlying model, or 0 when `system` is
/// null.
///
/// # Safety
/// `system` must be null or a live system handle.
#[no_mangle]
pub unsafe extern "C" fn eg_system_strategy_count(system: *const EgSystem) -> u32 {
    match unsafe { system.as_ref() } {
        Some(system) => system.inner.model().n() as u32,
        None => 0,
    }
}

/// Evaluates dx/dt at the frequency vector `x` and writes it to `out`.
/// Both slices have `len` entries, one per strategy; `x` must lie on the
/// probability simplex.
///
/// # Safety
/// `system` must be a live system handle, `x` must point to `len` readable
/// doubles, and `out` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn eg_system_rhs(
    system: *const EgSystem,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        nonnull!(system);
        nonnull!(x);
        nonnull!(out);
        let system = unsafe { &*system };
        let n = system.inner.model().n();
        if len != n {
            return invalid(&format!("x has {len} entries, system has {n} strategies"));
        }
        let x = unsafe { std::slice::from_raw_parts(x, len) };
        match system.inner.rhs(x) {
            Ok(rhs) => {
                unsafe { std::ptr::copy_nonoverlapping(rhs.as_ptr(), out, n) };
                EgStatus::Ok
            }
            Err(error) => failure(error),
        }
    })
}

/// Integrates the system from `x0` until `t_max`, recording every accepted
/// step. `tol` is the relative local error target in (0, 1).
///
/// # Safety
/// `system` must be a live system handle, `x0` must point to `len`
/// readable doubles, and `out` must be a valid location to store a pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_system_integrate(
    system: *const EgSystem,
    x0: *const f64,
    len: usize,
    t_max: f64,
    tol: f64,
    out: *mut *mut EgTrajectory,
) -> EgStatus {
    guarded(|| {
        nonnull!(system);
        nonnull!(x0);
        nonnull!(out);
        let system = unsafe { &*system };
        let n = system.inner.model().n();
        if len != n {
            return invalid(&format!("x0 has {len} entries, system has {n} strategies"));
        }
        let x0 = unsafe { std::slice::from_raw_parts(x0, len) };
        match integrate(&system.inner, x0, t_max, tol) {
            Ok(trajectory) => {
                let handle = EgTrajectory {
                    inner: trajectory,
                    dimension: n,
                };
                unsafe { *out = Box::into_raw(Box::new(handle)) };
                EgStatus::Ok
            }
            Err(error) => failure(error),
        }
    })
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Releases a trajectory handle. Null is ignored.
///
/// # Safety
/// `trajectory` must be null or a pointer from `eg_system_integrate` that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_free(trajectory: *mut EgTrajectory) {
    if !trajectory.is_null() {
        drop(unsafe { Box::from_raw(trajectory) });
    }
}

/// Number of recorded steps, or 0 when `trajectory` is null.
///
/// # Safety
/// `trajectory` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_len(trajectory: *const EgTrajectory) -> usize {
    match unsafe { trajectory.as_ref() } {
        Some(trajectory) => trajectory.inner.len(),
        None => 0,
    }
}

/// Number of strategies per recorded state, or 0 when `trajectory` is
/// null.
///
/// # Safety
/// `trajectory` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_dimension(trajectory: *const EgTrajectory) -> u32 {
    match unsafe { trajectory.as_ref() } {
        Some(trajectory) => trajectory.dimension as u32,
        None => 0,
    }
}

/// Writes why the integration stopped to `out`.
///
/// # Safety
/// `trajectory` must be a live trajectory handle and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_terminal(
    trajectory: *const EgTrajectory,
    out: *mut EgTerminal,
) -> EgStatus {
    guarded(|| {
        nonnull!(trajectory);
        nonnull!(out);
        let trajectory = unsafe { &*trajectory };
        let terminal = match trajectory.inner.terminal_reason() {
            TerminalReason::Converged => EgTerminal::Converged,
            TerminalReason::MaxTime => EgTerminal::MaxTime,
            TerminalReason::BoundaryAbsorbed => EgTerminal::BoundaryAbsorbed,
        };
        unsafe { *out = terminal };
        EgStatus::Ok
    })
}

/// Copies recorded step `index`: its time into `time_out` and its state
/// into the `state_capacity`-entry buffer `state_out`. The state needs one
/// entry per strategy.
///
/// # Safety
/// `trajectory` must be a live trajectory handle, `time_out` must be
/// writable, and `state_out` must point to `state_capacity` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_point(
    trajectory: *const EgTrajectory,
    index: usize,
    time_out: *mut f64,
    state_out: *mut f64,
    state_capacity: usize,
) -> EgStatus {
    guarded(|| {
        nonnull!(trajectory);
        nonnull!(time_out);
        nonnull!(state_out);
        let trajectory = unsafe { &*trajectory };
        let steps = trajectory.inner.len();
        if index >= steps {
            set_error(&format!(
                "step index {index} out of range for {steps} recorded steps"
            ));
            return EgStatus::IndexOutOfRange;
        }
        if state_capacity < trajectory.dimension {
            set_error(&format!(
                "state needs {} entries, buffer holds {state_capacity}",
                trajectory.dimension
            ));
            return EgStatus::BufferTooSmall;
        }
        let state = &trajectory.inner.states()[index];
        unsafe {
            *time_out = trajectory.inner.times()[index];
            std::ptr::copy_nonoverlapping(state.as_ptr(), state_out, trajectory.dimension);
        }
        EgStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// Critical fines for peer punishment at degree `k`, written to `out`.
/// Requires the social-dilemma regime r < k + 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eg_peer_thresholds(
    k: u32,
    r: f64,
    cost: f64,
    alpha: f64,
    out: *mut EgThresholds,
) -> EgStatus {
    guarded(|| {
        nonnull!(out);
        match peer_thresholds(r, cost, alpha, k) {
            Ok(t) => {
                unsafe {
                    *out = EgThresholds {
                        beta0_wm: t.beta0_wm,
                        beta0: t.beta0,
                        beta_eq: t.beta_eq,
                        beta_star: t.beta_star,
                    };
                }
                EgStatus::Ok
            }
            Err(error) => failure(error),
        }
    })
}

/// Critical fines for pool punishment at degree `k`, written to `out`.
/// Requires the social-dilemma regime r < k + 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eg_pool_thresholds(
    k: u32,
    r: f64,
    cost: f64,
    alpha: f64,
    out: *mut EgThresholds,
) -> EgStatus {
    guarded(|| {
        nonnull!(out);
        match pool_thresholds(r, cost, alpha, k) {
            Ok(t) => {
                unsafe {
                    *out = EgThresholds {
                        beta0_wm: t.beta0_wm,
                        beta0: t.beta0,
                        beta_eq: t.beta_eq,
                        beta_star: t.beta_star,
                    };
                }
                EgStatus::Ok
            }
            Err(error) => failure(error),
        }
    })
}
