//! Machine- and human-readable reports.
//!
//! Reports refer to states and actions by name. JSON output is produced from
//! plain structs and vectors only, so key order and content are stable
//! across runs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::certify::{Certificate, SuccessEstimate, Verdict};
use crate::guarantee::{ConditionKind, ConditionResult, PreferenceMode, SynthesisResult, Verification};
use crate::mdp::{DeterministicMdp, StateId, TaskSpec};
use crate::planner::{HorizonPolicy, PlannerConfig, RolloutRecord};
use crate::reach::ReachableSet;
use crate::trajectory::{discounted_return, Trajectory};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub problem: ProblemDigest,
    pub interpretation: Interpretation,
    pub payload: Payload,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemDigest {
    pub num_states: usize,
    pub num_actions: usize,
    pub num_goals: usize,
    pub start: String,
    pub goals: Vec<String>,
    pub gamma: f64,
    pub deadline: usize,
    pub horizon: usize,
}

impl ProblemDigest {
    pub fn new(mdp: &DeterministicMdp, task: &TaskSpec) -> Self {
        ProblemDigest {
            num_states: mdp.num_states(),
            num_actions: mdp.num_actions(),
            num_goals: task.goals.len(),
            start: mdp.state_name(task.start).to_owned(),
            goals: names(mdp, &task.goals),
            gamma: mdp.gamma(),
            deadline: task.deadline,
            horizon: task.horizon,
        }
    }
}

/// How the trajectory classes and planner were read.
#[derive(Debug, Clone, Serialize)]
pub struct Interpretation {
    /// Goal-free trajectories are those whose entered states are disjoint from every goal.
    pub goal_free_class: &'static str,
    /// The start state's reward is never counted.
    pub trajectory_excludes_start: bool,
    pub preference_mode: Option<PreferenceMode>,
    pub horizon_policy: Option<HorizonPolicy>,
}

impl Interpretation {
    pub fn new(preference_mode: Option<PreferenceMode>, horizon_policy: Option<HorizonPolicy>) -> Self {
        Interpretation {
            goal_free_class: "disjoint",
            trajectory_excludes_start: true,
            preference_mode,
            horizon_policy,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Reach(ReachPayload),
    Verify(VerifyPayload),
    Bound(BoundPayload),
    Synthesize(SynthesizePayload),
    Rollout(RolloutPayload),
    Estimate(EstimatePayload),
    Certify(CertifyPayload),
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachEntry {
    pub state: String,
    pub earliest_step: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoalReach {
    pub goal: String,
    pub reachable: bool,
    pub earliest_step: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachPayload {
    pub horizon: usize,
    pub reachable: Vec<ReachEntry>,
    pub goals: Vec<GoalReach>,
}

impl ReachPayload {
    pub fn new(mdp: &DeterministicMdp, task: &TaskSpec, reach: &ReachableSet) -> Self {
        ReachPayload {
            horizon: reach.horizon,
            reachable: reach
                .iter()
                .map(|(s, d)| ReachEntry {
                    state: mdp.state_name(s).to_owned(),
                    earliest_step: d,
                })
                .collect(),
            goals: task
                .goals
                .iter()
                .map(|&g| {
                    let step = reach.earliest_step(g).filter(|&d| d <= task.deadline);
                    GoalReach {
                        goal: mdp.state_name(g).to_owned(),
                        reachable: step.is_some(),
                        earliest_step: step,
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedTrajectory {
    pub actions: Vec<String>,
    pub states: Vec<String>,
    pub value: f64,
}

impl NamedTrajectory {
    pub fn new(mdp: &DeterministicMdp, t: &Trajectory) -> Self {
        NamedTrajectory {
            actions: t.actions.iter().map(|&a| mdp.action_name(a).to_owned()).collect(),
            states: std::iter::once(t.origin)
                .chain(t.states.iter().copied())
                .map(|s| mdp.state_name(s).to_owned())
                .collect(),
            value: discounted_return(mdp, t),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub goals: Vec<String>,
    pub holds: bool,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub earliest_step: Option<usize>,
    pub interpretation: Option<PreferenceMode>,
    pub witness: Option<NamedTrajectory>,
    pub counter_witness: Option<NamedTrajectory>,
}

impl ConditionReport {
    pub fn new(mdp: &DeterministicMdp, r: &ConditionResult) -> Self {
        ConditionReport {
            condition: r.condition,
            goals: names(mdp, &r.goals),
            holds: r.holds,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            earliest_step: r.earliest_step,
            interpretation: r.interpretation,
            witness: r.witness.as_ref().map(|t| NamedTrajectory::new(mdp, t)),
            counter_witness: r.counter_witness.as_ref().map(|t| NamedTrajectory::new(mdp, t)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyPayload {
    pub holds: bool,
    pub target: Option<String>,
    pub results: Vec<ConditionReport>,
}

impl VerifyPayload {
    pub fn new(mdp: &DeterministicMdp, v: &Verification) -> Self {
        VerifyPayload {
            holds: v.holds,
            target: v.target.map(|t| mdp.state_name(t).to_owned()),
            results: v.results.iter().map(|r| ConditionReport::new(mdp, r)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GoalBound {
    pub goal: String,
    /// Exclusive lower bound on the goal reward.
    pub bound: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundPayload {
    pub bounds: Vec<GoalBound>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assignment {
    pub goal: String,
    pub bound: f64,
    pub reward: f64,
    pub reachable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesizePayload {
    pub mode: PreferenceMode,
    pub margin_factor: f64,
    pub assignments: Vec<Assignment>,
    pub checks: Vec<ConditionReport>,
    pub written: Option<String>,
}

impl SynthesizePayload {
    pub fn new(mdp: &DeterministicMdp, syn: &SynthesisResult, checks: &[ConditionResult], written: Option<String>) -> Self {
        SynthesizePayload {
            mode: syn.mode,
            margin_factor: syn.margin_factor,
            assignments: syn
                .assignments
                .iter()
                .map(|a| Assignment {
                    goal: mdp.state_name(a.goal).to_owned(),
                    bound: a.bound,
                    reward: a.reward,
                    reachable: a.reachable,
                })
                .collect(),
            checks: checks.iter().map(|r| ConditionReport::new(mdp, r)).collect(),
            written,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedHit {
    pub goal: String,
    pub step: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RolloutPayload {
    pub config: PlannerConfig,
    pub target: Option<String>,
    pub actions: Vec<String>,
    pub visited: Vec<String>,
    pub first_goal_hit: Option<NamedHit>,
    pub success: bool,
}

impl RolloutPayload {
    pub fn new(mdp: &DeterministicMdp, config: &PlannerConfig, rec: &RolloutRecord) -> Self {
        RolloutPayload {
            config: config.clone(),
            target: rec.target.map(|t| mdp.state_name(t).to_owned()),
            actions: rec.actions.iter().map(|&a| mdp.action_name(a).to_owned()).collect(),
            visited: names(mdp, &rec.visited),
            first_goal_hit: rec.first_goal_hit.map(|h| NamedHit {
                goal: mdp.state_name(h.state).to_owned(),
                step: h.step,
            }),
            success: rec.success,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatePayload {
    pub config: PlannerConfig,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
}

impl EstimatePayload {
    pub fn new(config: &PlannerConfig, est: &SuccessEstimate) -> Self {
        EstimatePayload {
            config: config.clone(),
            trials: est.trials,
            successes: est.successes,
            frequency: est.frequency,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedStep {
    pub state: String,
    pub action: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyPayload {
    pub verdict: Verdict,
    pub target: Option<String>,
    pub explored_configs: usize,
    pub failure_path: Option<Vec<NamedStep>>,
    /// State the failing branch ends in.
    pub failure_end: Option<String>,
    pub reason: Option<String>,
}

impl CertifyPayload {
    pub fn new(mdp: &DeterministicMdp, cert: &Certificate) -> Self {
        CertifyPayload {
            verdict: cert.verdict,
            target: cert.target.map(|t| mdp.state_name(t).to_owned()),
            explored_configs: cert.explored_configs,
            failure_path: cert.failure_path.as_ref().map(|p| {
                p.iter()
                    .map(|step| NamedStep {
                        state: mdp.state_name(step.state).to_owned(),
                        action: mdp.action_name(step.action).to_owned(),
                    })
                    .collect()
            }),
            failure_end: cert
                .failure_path
                .as_ref()
                .and_then(|p| p.last())
                .map(|step| mdp.state_name(mdp.successor(step.state, step.action)).to_owned()),
            reason: cert.reason.clone(),
        }
    }
}

fn names(mdp: &DeterministicMdp, states: &[StateId]) -> Vec<String> {
    states.iter().map(|&s| mdp.state_name(s).to_owned()).collect()
}

impl Report {
    pub fn new(
        command: &str,
        mdp: &DeterministicMdp,
        task: &TaskSpec,
        interpretation: Interpretation,
        payload: Payload,
    ) -> Self {
        Report {
            tool: "goalguard",
            tool_version: TOOL_VERSION,
            command: command.to_owned(),
            problem: ProblemDigest::new(mdp, task),
            interpretation,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.problem;
        let _ = writeln!(
            out,
            "goalguard {} {}: {} states, {} actions, start {}, goals [{}], gamma {}, J {}, H {}",
            self.tool_version,
            self.command,
            p.num_states,
            p.num_actions,
            p.start,
            p.goals.join(" > "),
            p.gamma,
            p.deadline,
            p.horizon
        );
        let mut notes = vec!["goal-free = entered states disjoint from all goals".to_owned()];
        if let Some(m) = self.interpretation.preference_mode {
            notes.push(format!("preference mode {m}"));
        }
        if let Some(h) = self.interpretation.horizon_policy {
            notes.push(format!("horizon policy {}", policy_name(h)));
        }
        let _ = writeln!(out, "interpretation: {}", notes.join("; "));

        match &self.payload {
            Payload::Reach(r) => {
                let _ = writeln!(out, "forward reachable set R(start, {}):", r.horizon);
                for e in &r.reachable {
                    let _ = writeln!(out, "  {} first entered at step {}", e.state, e.earliest_step);
                }
                for g in &r.goals {
                    let _ = writeln!(
                        out,
                        "goal {}: {}",
                        g.goal,
                        match g.earliest_step {
                            Some(d) => format!("reachable at step {d} <= J [PASS]"),
                            None => format!("not reachable within J = {} [FAIL]", p.deadline),
                        }
                    );
                }
            }
            Payload::Verify(v) => {
                for r in &v.results {
                    write_condition(&mut out, r, p.deadline);
                }
                let _ = writeln!(
                    out,
                    "target: {}; overall: {}",
                    v.target.as_deref().unwrap_or("none"),
                    pass(v.holds)
                );
            }
            Payload::Bound(b) => {
                for g in &b.bounds {
                    let _ = match (g.bound, &g.error) {
                        (Some(x), _) => writeln!(out, "goal {}: reward must exceed {}", g.goal, x),
                        (None, Some(e)) => writeln!(out, "goal {}: {}", g.goal, e),
                        _ => Ok(()),
                    };
                }
            }
            Payload::Synthesize(s) => {
                let _ = writeln!(out, "synthesized goal rewards (margin factor {}):", s.margin_factor);
                for a in &s.assignments {
                    let _ = writeln!(
                        out,
                        "  r({}) = {}   (bound {}{})",
                        a.goal,
                        a.reward,
                        a.bound,
                        if a.reachable { "" } else { ", not reachable within J" }
                    );
                }
                for r in &s.checks {
                    write_condition(&mut out, r, p.deadline);
                }
                if let Some(path) = &s.written {
                    let _ = writeln!(out, "wrote {path}");
                }
            }
            Payload::Rollout(r) => {
                let mut line = p.start.clone();
                for (a, s) in r.actions.iter().zip(&r.visited) {
                    let _ = write!(line, " -{a}-> {s}");
                }
                let _ = writeln!(out, "rollout (seed {}): {}", r.config.seed, line);
                let _ = writeln!(
                    out,
                    "first goal: {}; target {}; {}",
                    r.first_goal_hit
                        .as_ref()
                        .map_or("none".to_owned(), |h| format!("{} at step {}", h.goal, h.step)),
                    r.target.as_deref().unwrap_or("none"),
                    if r.success { "SUCCESS" } else { "FAILURE" }
                );
            }
            Payload::Estimate(e) => {
                let _ = writeln!(
                    out,
                    "success frequency {} ({} / {} trials, seeds {}..{})",
                    e.frequency,
                    e.successes,
                    e.trials,
                    e.config.seed,
                    e.config.seed.wrapping_add(e.trials as u64 - 1)
                );
            }
            Payload::Certify(c) => {
                let _ = writeln!(
                    out,
                    "verdict {}; target {}; explored configurations {}",
                    serde_json::to_value(c.verdict).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                    c.target.as_deref().unwrap_or("none"),
                    c.explored_configs
                );
                if let Some(path) = &c.failure_path {
                    let mut line = String::new();
                    for step in path {
                        let _ = write!(line, "{} -{}-> ", step.state, step.action);
                    }
                    line.push_str(c.failure_end.as_deref().unwrap_or("?"));
                    let _ = writeln!(out, "failure path: {line}");
                }
                if let Some(reason) = &c.reason {
                    let _ = writeln!(out, "reason: {reason}");
                }
            }
        }
        out
    }
}

fn pass(holds: bool) -> &'static str {
    if holds {
        "PASS"
    } else {
        "FAIL"
    }
}

fn policy_name(h: HorizonPolicy) -> &'static str {
    match h {
        HorizonPolicy::Shrinking => "shrinking",
        HorizonPolicy::Fixed => "fixed",
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("(none)".to_owned(), |v| v.to_string())
}

fn write_condition(out: &mut String, r: &ConditionReport, deadline: usize) {
    let goals = r.goals.join(" > ");
    let _ = match r.condition {
        ConditionKind::Reachable => writeln!(
            out,
            "[{}] REACHABLE {}: earliest step {} <= J = {}  (margin {})",
            pass(r.holds),
            goals,
            r.earliest_step.map_or("none".to_owned(), |d| d.to_string()),
            deadline,
            fmt_opt(r.margin)
        ),
        ConditionKind::NecessaryDominance => writeln!(
            out,
            "[{}] NECESSARY_DOMINANCE {}: best goal trajectory {} > best goal-free trajectory {}  (margin {})",
            pass(r.holds),
            goals,
            fmt_opt(r.lhs),
            fmt_opt(r.rhs),
            fmt_opt(r.margin)
        ),
        ConditionKind::SufficientSingle => writeln!(
            out,
            "[{}] SUFFICIENT_SINGLE {}: gamma^J * r = {} > best goal-free trajectory {}  (margin {})",
            pass(r.holds),
            goals,
            fmt_opt(r.lhs),
            fmt_opt(r.rhs),
            fmt_opt(r.margin)
        ),
        ConditionKind::PreferencePair => writeln!(
            out,
            "[{}] PREFERENCE_PAIR {} ({}): gamma^J * r(hi) = {} > {}  (margin {})",
            pass(r.holds),
            goals,
            r.interpretation.map_or("-".to_owned(), |m| m.to_string()),
            fmt_opt(r.lhs),
            fmt_opt(r.rhs),
            fmt_opt(r.margin)
        ),
    };
    for (label, t) in [("witness", &r.witness), ("counter-witness", &r.counter_witness)] {
        if let Some(t) = t {
            let mut line = t.states[0].clone();
            for (a, s) in t.actions.iter().zip(&t.states[1..]) {
                let _ = write!(line, " -{a}-> {s}");
            }
            let _ = writeln!(out, "      {label}: {line}  (return {})", t.value);
        }
    }
}
