//! C ABI over `offload_core`.
//!
//! Configurations and episode results are opaque handles created and freed
//! through this interface. Every fallible call returns an [`OffloadStatus`];
//! on failure [`offload_last_error`] describes the cause for the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use offload_core::harness::run_on_scenario;
use offload_core::{run_sweep, EpisodeOutcome, Error, ExperimentConfig, PolicyKind, Scenario, TaskSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffloadStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Argument = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffloadPolicy {
    Minimum = 0,
    Deterministic = 1,
    Random = 2,
}

impl From<OffloadPolicy> for PolicyKind {
    fn from(p: OffloadPolicy) -> Self {
        match p {
            OffloadPolicy::Minimum => PolicyKind::Minimum,
            OffloadPolicy::Deterministic => PolicyKind::Deterministic,
            OffloadPolicy::Random => PolicyKind::Random,
        }
    }
}

/// Opaque experiment configuration.
pub struct OffloadConfig {
    inner: ExperimentConfig,
}

/// Opaque result of one episode.
pub struct OffloadEpisode {
    inner: EpisodeOutcome,
    tasks: Vec<TaskSpec>,
}

/// Episode-level metrics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OffloadMetrics {
    pub satisfaction_ratio: f64,
    pub jfi: f64,
    pub comm_util_mean: f64,
    pub comm_util_std: f64,
    pub comp_util_mean: f64,
    pub comp_util_std: f64,
    pub local_ratio: f64,
    pub objective: f64,
    pub task_count: usize,
}

/// Outcome of a single task. `total_s` is infinite for an unserved task.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OffloadTask {
    pub subnet: usize,
    pub source_unit: usize,
    pub unit: usize,
    pub total_s: f64,
    pub deadline_s: f64,
    pub satisfied: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: OffloadStatus, msg: impl Into<String>) -> OffloadStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> OffloadStatus {
    match e {
        _ if e.is_io() => OffloadStatus::Io,
        Error::Config { .. } | Error::Json(_) => OffloadStatus::Config,
        _ => OffloadStatus::Argument,
    }
}

fn guard(f: impl FnOnce() -> OffloadStatus) -> OffloadStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(OffloadStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, OffloadStatus> {
    if p.is_null() {
        return Err(fail(OffloadStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(OffloadStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn offload_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn offload_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn offload_config_default(out: *mut *mut OffloadConfig) -> OffloadStatus {
    guard(|| {
        if out.is_null() {
            return fail(OffloadStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(OffloadConfig {
            inner: ExperimentConfig::default(),
        }));
        OffloadStatus::Ok
    })
}

/// Parses and validates a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offload_config_from_json(json: *const c_char, out: *mut *mut OffloadConfig) -> OffloadStatus {
    guard(|| {
        if out.is_null() {
            return fail(OffloadStatus::NullPointer, "out is null");
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ExperimentConfig::from_json_str(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OffloadConfig { inner }));
                OffloadStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn offload_config_free(config: *mut OffloadConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs one episode of `policy` on the configured scenario.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offload_run_episode(
    config: *const OffloadConfig,
    policy: OffloadPolicy,
    seed: u64,
    out: *mut *mut OffloadEpisode,
) -> OffloadStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(OffloadStatus::NullPointer, "config or out is null");
        }
        let exp = &(*config).inner;
        let run = Scenario::draw(&exp.scenario, seed).and_then(|sc| {
            let inner = run_on_scenario(policy.into(), &sc, &exp.ga, exp.random_retries(), seed)?;
            Ok(OffloadEpisode { inner, tasks: sc.tasks })
        });
        match run {
            Ok(ep) => {
                *out = Box::into_raw(Box::new(ep));
                OffloadStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `episode` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offload_episode_metrics(
    episode: *const OffloadEpisode,
    out: *mut OffloadMetrics,
) -> OffloadStatus {
    guard(|| {
        if episode.is_null() || out.is_null() {
            return fail(OffloadStatus::NullPointer, "episode or out is null");
        }
        let ep = &(*episode).inner;
        let r = &ep.report;
        *out = OffloadMetrics {
            satisfaction_ratio: r.satisfaction_ratio,
            jfi: r.jfi,
            comm_util_mean: r.comm_util_mean,
            comm_util_std: r.comm_util_std,
            comp_util_mean: r.comp_util_mean,
            comp_util_std: r.comp_util_std,
            local_ratio: r.local_ratio,
            objective: ep.objective,
            task_count: ep.times.len(),
        };
        OffloadStatus::Ok
    })
}

/// Outcome of task `index` of an episode.
///
/// # Safety
/// `episode` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offload_episode_task(
    episode: *const OffloadEpisode,
    index: usize,
    out: *mut OffloadTask,
) -> OffloadStatus {
    guard(|| {
        if episode.is_null() || out.is_null() {
            return fail(OffloadStatus::NullPointer, "episode or out is null");
        }
        let ep = &*episode;
        let (Some(t), Some(spec), Some(entry)) = (
            ep.inner.times.get(index),
            ep.tasks.get(index),
            ep.inner.allocation.entries.get(index),
        ) else {
            return fail(
                OffloadStatus::OutOfRange,
                format!("task {index} out of range ({} tasks)", ep.tasks.len()),
            );
        };
        *out = OffloadTask {
            subnet: spec.id.subnet,
            source_unit: spec.source,
            unit: entry.unit,
            total_s: t.total,
            deadline_s: spec.deadline_s,
            satisfied: t.satisfied,
        };
        OffloadStatus::Ok
    })
}

/// # Safety
/// `episode` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn offload_episode_free(episode: *mut OffloadEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// Runs the configured sweep and writes the CSV to `path`.
///
/// # Safety
/// `config` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn offload_run_sweep(
    config: *const OffloadConfig,
    path: *const c_char,
    rows: *mut usize,
) -> OffloadStatus {
    guard(|| {
        if config.is_null() {
            return fail(OffloadStatus::NullPointer, "config is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match run_sweep(&(*config).inner, Path::new(path)) {
            Ok(n) => {
                if !rows.is_null() {
                    *rows = n;
                }
                OffloadStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_status_mapping() {
        let e = ExperimentConfig::from_json_str(r#"{"ga": {"population": 1}}"#).unwrap_err();
        assert_eq!(status_of(&e), OffloadStatus::Config);
        let e = Error::Io(std::io::Error::other("disk"));
        assert_eq!(status_of(&e), OffloadStatus::Io);
        let e = Error::InvalidUnit { unit: 3 };
        assert_eq!(status_of(&e), OffloadStatus::Argument);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, OffloadStatus::Panic);
        assert!(!offload_last_error().is_null());
        assert_eq!(guard(|| OffloadStatus::Ok), OffloadStatus::Ok);
        assert!(offload_last_error().is_null());
    }

    #[test]
    fn policy_conversion() {
        assert_eq!(PolicyKind::from(OffloadPolicy::Random), PolicyKind::Random);
        assert_eq!(PolicyKind::from(OffloadPolicy::Minimum), PolicyKind::Minimum);
    }
}
