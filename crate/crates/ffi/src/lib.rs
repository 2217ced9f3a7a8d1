//! C ABI over the mvplan engine.
//!
//! Objects cross the boundary as opaque handles, each released by the
//! matching `mv_*_free`. Every fallible call
//! returns an [`MvStatus`]; on failure [`mv_last_error`] describes the cause
//! for the calling thread. Strings returned by the library are owned by the
//! caller and released with [`mv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mvplan::model::Scenario;
use mvplan::planner::WeightSet;
use mvplan::simloop::{self, compute_metrics, Mode, SimConfig, SimError, SimLog};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidInput = 4,
    InvalidConfig = 5,
    Internal = 6,
    Panic = 7,
}

/// Execution mode of a simulation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvMode {
    Full = 0,
    DecisionOnly = 1,
}

/// A parsed scenario.
pub struct MvScenario(Scenario);

/// A set of named trajectory-cost weight vectors.
pub struct MvWeights(WeightSet);

/// Engine configuration.
pub struct MvConfig(SimConfig);

/// The log of one finished simulation run.
pub struct MvLog(SimLog);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior nul bytes were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(MvStatus, String);

impl From<SimError> for Fail {
    fn from(e: SimError) -> Self {
        let status = match e {
            SimError::ScenarioInvalid(_) => MvStatus::InvalidInput,
            SimError::Config(_) => MvStatus::InvalidConfig,
            SimError::Internal(_) => MvStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MvStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MvStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(MvStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(MvStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(MvStatus::NullArgument, format!("{name} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(MvStatus::NullArgument, format!("{name} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    let slot = deref_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let slot = deref_mut(out, "out")?;
    let c = CString::new(s).map_err(|_| Fail(MvStatus::Internal, "output contains a nul byte".into()))?;
    *slot = c.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_scenario_from_toml(toml: *const c_char, out: *mut *mut MvScenario) -> MvStatus {
    guard(|| {
        let src = read_str(toml, "toml")?;
        let sc = Scenario::from_toml_str(src).map_err(|e| Fail(MvStatus::InvalidInput, e.to_string()))?;
        put(out, MvScenario(sc))
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_scenario_load(path: *const c_char, out: *mut *mut MvScenario) -> MvStatus {
    guard(|| {
        let p = read_str(path, "path")?;
        let src = std::fs::read_to_string(p).map_err(|e| Fail(MvStatus::Io, format!("{p}: {e}")))?;
        let sc = Scenario::from_toml_str(&src).map_err(|e| Fail(MvStatus::InvalidInput, format!("{p}: {e}")))?;
        put(out, MvScenario(sc))
    })
}

/// Number of vehicles in the scenario.
///
/// # Safety
/// `sc` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_scenario_vehicle_count(sc: *const MvScenario, out: *mut usize) -> MvStatus {
    guard(|| {
        let n = deref(sc, "scenario")?.0.vehicles.len();
        *deref_mut(out, "out")? = n;
        Ok(())
    })
}

/// # Safety
/// `sc` must be null or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn mv_scenario_free(sc: *mut MvScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// The built-in aggressive, normal and conservative weight vectors.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_weights_default(out: *mut *mut MvWeights) -> MvStatus {
    guard(|| put(out, MvWeights(WeightSet::default())))
}

/// Parses a weight set from TOML text.
///
/// # Safety
/// `toml` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_weights_from_toml(toml: *const c_char, out: *mut *mut MvWeights) -> MvStatus {
    guard(|| {
        let src = read_str(toml, "toml")?;
        let w = WeightSet::from_toml_str(src).map_err(|e| Fail(MvStatus::InvalidInput, e.to_string()))?;
        put(out, MvWeights(w))
    })
}

/// # Safety
/// `w` must be null or a live weights handle.
#[no_mangle]
pub unsafe extern "C" fn mv_weights_free(w: *mut MvWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// The default engine configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_config_default(out: *mut *mut MvConfig) -> MvStatus {
    guard(|| put(out, MvConfig(SimConfig::default())))
}

/// Parses an engine configuration from TOML text; omitted keys keep their defaults.
///
/// # Safety
/// `toml` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_config_from_toml(toml: *const c_char, out: *mut *mut MvConfig) -> MvStatus {
    guard(|| {
        let src = read_str(toml, "toml")?;
        let cfg = SimConfig::from_toml_str(src)?;
        cfg.validate()?;
        put(out, MvConfig(cfg))
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn mv_config_set_seed(cfg: *mut MvConfig, seed: u64) -> MvStatus {
    guard(|| {
        deref_mut(cfg, "config")?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn mv_config_set_mode(cfg: *mut MvConfig, mode: MvMode) -> MvStatus {
    guard(|| {
        deref_mut(cfg, "config")?.0.mode = match mode {
            MvMode::Full => Mode::Full,
            MvMode::DecisionOnly => Mode::DecisionOnly,
        };
        Ok(())
    })
}

/// Sets the maximum simulated time in seconds.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn mv_config_set_max_duration(cfg: *mut MvConfig, seconds: f64) -> MvStatus {
    guard(|| {
        let c = &mut deref_mut(cfg, "config")?.0;
        let mut next = *c;
        next.max_duration = seconds;
        next.validate()?;
        *c = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a live config handle.
#[no_mangle]
pub unsafe extern "C" fn mv_config_free(cfg: *mut MvConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

struct Inputs<'a> {
    scenario: &'a Scenario,
    weights: WeightSet,
    cfg: SimConfig,
}

unsafe fn inputs<'a>(sc: *const MvScenario, w: *const MvWeights, cfg: *const MvConfig) -> Result<Inputs<'a>, Fail> {
    let scenario = &deref(sc, "scenario")?.0;
    let weights = w.as_ref().map_or_else(WeightSet::default, |w| w.0.clone());
    let cfg = cfg.as_ref().map_or_else(SimConfig::default, |c| c.0);
    cfg.validate()?;
    Ok(Inputs { scenario, weights, cfg })
}

/// Runs one closed-loop simulation. Null `weights` or `cfg` select the defaults.
///
/// # Safety
/// Non-null handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_simulate(
    sc: *const MvScenario,
    weights: *const MvWeights,
    cfg: *const MvConfig,
    out: *mut *mut MvLog,
) -> MvStatus {
    guard(|| {
        let i = inputs(sc, weights, cfg)?;
        let log = simloop::run(i.scenario, &i.weights, &i.cfg)?;
        put(out, MvLog(log))
    })
}

/// Runs one search at the scenario's initial state and returns the decision as JSON.
///
/// # Safety
/// Non-null handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_decide_json(
    sc: *const MvScenario,
    weights: *const MvWeights,
    cfg: *const MvConfig,
    out: *mut *mut c_char,
) -> MvStatus {
    guard(|| {
        let i = inputs(sc, weights, cfg)?;
        let record = simloop::decide_once(i.scenario, &i.weights, &i.cfg)?;
        let json = serde_json::to_string(&record).map_err(|e| Fail(MvStatus::Internal, e.to_string()))?;
        put_string(out, json)
    })
}

/// Number of recorded ticks.
///
/// # Safety
/// `log` must be a live log handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_log_tick_count(log: *const MvLog, out: *mut usize) -> MvStatus {
    guard(|| {
        let n = deref(log, "log")?.0.ticks.len();
        *deref_mut(out, "out")? = n;
        Ok(())
    })
}

/// Whether the run ended in a collision.
///
/// # Safety
/// `log` must be a live log handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_log_collision(log: *const MvLog, out: *mut bool) -> MvStatus {
    guard(|| {
        let c = deref(log, "log")?.0.collision.is_some();
        *deref_mut(out, "out")? = c;
        Ok(())
    })
}

/// Simulated duration in seconds.
///
/// # Safety
/// `log` must be a live log handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_log_duration(log: *const MvLog, out: *mut f64) -> MvStatus {
    guard(|| {
        let d = deref(log, "log")?.0.duration();
        *deref_mut(out, "out")? = d;
        Ok(())
    })
}

/// Full log as JSON.
///
/// # Safety
/// `log` must be a live log handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_log_to_json(log: *const MvLog, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let json = deref(log, "log")?.0.to_json();
        put_string(out, json)
    })
}

/// Run metrics as JSON.
///
/// # Safety
/// `log` must be a live log handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_log_metrics_json(log: *const MvLog, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let json = compute_metrics(&deref(log, "log")?.0).to_json();
        put_string(out, json)
    })
}

/// Writes the per-tick state table as CSV.
///
/// # Safety
/// `log` must be a live log handle; `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mv_log_write_csv(log: *const MvLog, path: *const c_char) -> MvStatus {
    guard(|| {
        let log = &deref(log, "log")?.0;
        let p = read_str(path, "path")?;
        std::fs::write(Path::new(p), log.csv_string()).map_err(|e| Fail(MvStatus::Io, format!("{p}: {e}")))
    })
}

/// # Safety
/// `log` must be null or a live log handle.
#[no_mangle]
pub unsafe extern "C" fn mv_log_free(log: *mut MvLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}
