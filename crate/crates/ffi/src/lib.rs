//! C ABI for goalguard.
//!
//! Problems are parsed from the JSON problem format into an opaque
//! [`GgProblem`] handle. Every fallible call returns a [`GgStatus`]; on a
//! non-`Ok` status, [`gg_last_error`] describes the failure on the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and must be released with [`gg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use goalguard::guarantee::verify;
use goalguard::report::{
    BoundPayload, CertifyPayload, GoalBound, Interpretation, Payload, ReachPayload, Report, VerifyPayload,
};
use goalguard::{
    certify_with, estimate_success, forward_reachable_set, goal_reward_lower_bound, parse_problem, serialize_problem,
    synthesize_rewards, DeterministicMdp, HorizonPolicy, PlannerConfig, PreferenceMode, TaskSpec, TieBreak, Verdict,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    AnalysisError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgVerdict {
    Certified = 0,
    Refuted = 1,
    NotApplicable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgPreferenceMode {
    Corrected = 0,
    Literal = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgHorizonPolicy {
    Shrinking = 0,
    Fixed = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgReportKind {
    Reach = 0,
    Verify = 1,
    Bound = 2,
    Certify = 3,
}

/// Opaque problem handle: a model plus its task.
pub struct GgProblem {
    mdp: DeterministicMdp,
    task: TaskSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(GgStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn problem_ref<'a>(p: *const GgProblem) -> Result<&'a GgProblem, Failure> {
    p.as_ref().ok_or_else(|| null("problem"))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn string_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(GgStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn goal_at(p: &GgProblem, index: usize) -> Result<goalguard::StateId, Failure> {
    p.task.goals.get(index).copied().ok_or_else(|| {
        Failure(
            GgStatus::InvalidArgument,
            format!("goal index {index} out of range ({} goals)", p.task.goals.len()),
        )
    })
}

fn mode(m: GgPreferenceMode) -> PreferenceMode {
    match m {
        GgPreferenceMode::Corrected => PreferenceMode::Corrected,
        GgPreferenceMode::Literal => PreferenceMode::Literal,
    }
}

fn policy(p: GgHorizonPolicy) -> HorizonPolicy {
    match p {
        GgHorizonPolicy::Shrinking => HorizonPolicy::Shrinking,
        GgHorizonPolicy::Fixed => HorizonPolicy::Fixed,
    }
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next goalguard call on the same thread.
#[no_mangle]
pub extern "C" fn gg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn gg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON problem. On success `*out` owns a handle to release with
/// [`gg_problem_free`].
///
/// # Safety
/// `json` must be null or a valid nul-terminated string; `out` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_problem_from_json(json: *const c_char, out: *mut *mut GgProblem) -> GgStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let text = string_arg(json, "json")?;
        let (mdp, task) = parse_problem(text).map_err(|e| Failure(GgStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(GgProblem { mdp, task }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `problem` must be null or a handle from [`gg_problem_from_json`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn gg_problem_free(problem: *mut GgProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gg_problem_num_states(problem: *const GgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.mdp.num_states())
}

/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gg_problem_num_actions(problem: *const GgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.mdp.num_actions())
}

/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gg_problem_num_goals(problem: *const GgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.task.goals.len())
}

/// Serializes the problem back to JSON.
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_problem_to_json(problem: *const GgProblem, out: *mut *mut c_char) -> GgStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let p = problem_ref(problem)?;
        *out = into_c_string(serialize_problem(&p.mdp, &p.task));
        Ok(())
    })
}

/// Exclusive lower bound on the reward of goal `goal_index` (preference order).
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_goal_reward_lower_bound(
    problem: *const GgProblem,
    goal_index: usize,
    out: *mut f64,
) -> GgStatus {
    guard(|| {
        let out = out_ref(out)?;
        let p = problem_ref(problem)?;
        let goal = goal_at(p, goal_index)?;
        *out = goal_reward_lower_bound(&p.mdp, &p.task, goal)
            .map_err(|e| Failure(GgStatus::AnalysisError, e.to_string()))?;
        Ok(())
    })
}

/// Whether the full condition suite holds.
///
/// # Safety
/// `problem` must be null or a live handle; `holds` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_verify(problem: *const GgProblem, preference_mode: GgPreferenceMode, holds: *mut bool) -> GgStatus {
    guard(|| {
        let holds = out_ref(holds)?;
        let p = problem_ref(problem)?;
        *holds = verify(&p.mdp, &p.task, mode(preference_mode)).holds;
        Ok(())
    })
}

/// Certifies the exhaustive planner. `explored` may be null.
///
/// # Safety
/// `problem` must be null or a live handle; `verdict` must be null or valid
/// for writes; `explored` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_certify(
    problem: *const GgProblem,
    horizon_policy: GgHorizonPolicy,
    verdict: *mut GgVerdict,
    explored: *mut usize,
) -> GgStatus {
    guard(|| {
        let verdict = out_ref(verdict)?;
        let p = problem_ref(problem)?;
        let cert = certify_with(&p.mdp, &p.task, policy(horizon_policy));
        *verdict = match cert.verdict {
            Verdict::Certified => GgVerdict::Certified,
            Verdict::Refuted => GgVerdict::Refuted,
            Verdict::NotApplicable => GgVerdict::NotApplicable,
        };
        if let Some(explored) = explored.as_mut() {
            *explored = cert.explored_configs;
        }
        Ok(())
    })
}

/// Success frequency of the exhaustive planner with random tie-breaking over
/// `trials` rollouts seeded `seed, seed + 1, ...`.
///
/// # Safety
/// `problem` must be null or a live handle; `frequency` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_estimate_success(
    problem: *const GgProblem,
    trials: usize,
    seed: u64,
    frequency: *mut f64,
) -> GgStatus {
    guard(|| {
        let frequency = out_ref(frequency)?;
        let p = problem_ref(problem)?;
        if trials == 0 {
            return Err(Failure(GgStatus::InvalidArgument, "trials must be positive".into()));
        }
        let config = PlannerConfig::exhaustive(p.task.horizon, TieBreak::Random);
        *frequency = estimate_success(&p.mdp, &p.task, &config, trials, seed).frequency;
        Ok(())
    })
}

/// Replaces goal rewards with synthesized ones (corrected mode).
///
/// # Safety
/// `problem` must be null or a live handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn gg_synthesize_rewards(problem: *mut GgProblem, margin_factor: f64) -> GgStatus {
    guard(|| {
        let p = problem.as_mut().ok_or_else(|| null("problem"))?;
        let syn = synthesize_rewards(&p.mdp, &p.task, margin_factor, PreferenceMode::Corrected)
            .map_err(|e| Failure(GgStatus::AnalysisError, e.to_string()))?;
        p.mdp = syn
            .apply(&p.mdp)
            .map_err(|e| Failure(GgStatus::AnalysisError, e.to_string()))?;
        Ok(())
    })
}

/// JSON report identical to the CLI's `--output json` report for the
/// corresponding command with default options.
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gg_report_json(
    problem: *const GgProblem,
    kind: GgReportKind,
    out: *mut *mut c_char,
) -> GgStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let p = problem_ref(problem)?;
        let (mdp, task) = (&p.mdp, &p.task);
        let report = match kind {
            GgReportKind::Reach => {
                let reach = forward_reachable_set(mdp, task.start, task.horizon);
                Report::new(
                    "reach",
                    mdp,
                    task,
                    Interpretation::new(None, None),
                    Payload::Reach(ReachPayload::new(mdp, task, &reach)),
                )
            }
            GgReportKind::Verify => {
                let v = verify(mdp, task, PreferenceMode::Corrected);
                Report::new(
                    "verify",
                    mdp,
                    task,
                    Interpretation::new(Some(PreferenceMode::Corrected), None),
                    Payload::Verify(VerifyPayload::new(mdp, &v)),
                )
            }
            GgReportKind::Bound => {
                let bounds = task
                    .goals
                    .iter()
                    .map(|&g| {
                        let b = goal_reward_lower_bound(mdp, task, g);
                        GoalBound {
                            goal: mdp.state_name(g).to_owned(),
                            bound: b.as_ref().ok().copied(),
                            error: b.err().map(|e| e.to_string()),
                        }
                    })
                    .collect();
                Report::new(
                    "bound",
                    mdp,
                    task,
                    Interpretation::new(None, None),
                    Payload::Bound(BoundPayload { bounds }),
                )
            }
            GgReportKind::Certify => {
                let cert = certify_with(mdp, task, HorizonPolicy::Shrinking);
                Report::new(
                    "certify",
                    mdp,
                    task,
                    Interpretation::new(None, Some(HorizonPolicy::Shrinking)),
                    Payload::Certify(CertifyPayload::new(mdp, &cert)),
                )
            }
        };
        *out = into_c_string(report.to_json());
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned through an out-parameter of this
/// library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
