//! Command-line front end.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails (or the
//! certificate is refuted or not applicable), 2 on usage or input errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{certify_with, estimate_success, Verdict};
use crate::gridworld::{generate_gridworld, Cell, GridSpec};
use crate::guarantee::{goal_reward_lower_bound, synthesize_rewards, verify, PreferenceMode, DEFAULT_MARGIN_FACTOR};
use crate::mdp::{DeterministicMdp, TaskSpec};
use crate::planner::{rollout, HorizonPolicy, PlannerConfig, TieBreak};
use crate::problem::{read_problem, serialize_problem};
use crate::reach::{forward_reachable_set, highest_preference_reachable};
use crate::report::{
    BoundPayload, CertifyPayload, EstimatePayload, GoalBound, Interpretation, Payload, ReachPayload, Report,
    RolloutPayload, SynthesizePayload, VerifyPayload,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "goalguard", version, about = "Goal-reachability guarantees for receding-horizon planners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward reachable set of the start state and goal reachability.
    Reach {
        #[command(flatten)]
        common: Common,
        /// Number of steps to expand (defaults to the problem's planning horizon).
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Check the necessary and sufficient conditions.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ModeArg::Corrected)]
        mode: ModeArg,
    },
    /// Exclusive lower bound on a goal's reward.
    Bound {
        #[command(flatten)]
        common: Common,
        /// Goal name (all goals when omitted).
        #[arg(long)]
        goal: Option<String>,
    },
    /// Assign goal rewards that satisfy the sufficient conditions.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_MARGIN_FACTOR)]
        margin: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Corrected)]
        mode: ModeArg,
        /// Write the problem with synthesized rewards to this path.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Run the planning agent.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = PlannerArg::Exhaustive)]
        planner: PlannerArg,
        #[arg(long, value_enum, default_value_t = TieBreakArg::Random)]
        tie_break: TieBreakArg,
        /// Sampled action sequences per step (random shooting only).
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Seed of the first trial; required with `--output json`.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of trials; more than one reports a success frequency.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::Shrinking)]
        horizon_policy: PolicyArg,
    },
    /// Prove or refute success under every tie-breaking choice.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = PolicyArg::Shrinking)]
        horizon_policy: PolicyArg,
    },
    /// Generate a gridworld problem file.
    Gridworld(GridArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputArg::Text)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Wall cell `x,y` (repeatable).
    #[arg(long = "wall", value_parser = parse_cell)]
    walls: Vec<Cell>,
    #[arg(long, value_parser = parse_cell, default_value = "0,0")]
    start: Cell,
    /// Goal cell `x,y`, most preferred first (repeatable).
    #[arg(long = "goal", value_parser = parse_cell, required = true)]
    goals: Vec<Cell>,
    #[arg(long, default_value_t = 0.0)]
    step_reward: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long)]
    deadline: usize,
    /// Install synthesized goal rewards.
    #[arg(long)]
    synthesize: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputArg::Text)]
    output: OutputArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Corrected,
    Literal,
}

impl From<ModeArg> for PreferenceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Corrected => PreferenceMode::Corrected,
            ModeArg::Literal => PreferenceMode::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlannerArg {
    Exhaustive,
    Shooting,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieBreakArg {
    Random,
    Lowest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Shrinking,
    Fixed,
}

impl From<PolicyArg> for HorizonPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Shrinking => HorizonPolicy::Shrinking,
            PolicyArg::Fixed => HorizonPolicy::Fixed,
        }
    }
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(x)?, parse(y)?))
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn load(common: &Common) -> Result<(DeterministicMdp, TaskSpec), UsageError> {
    read_problem(&common.problem).map_err(|e| UsageError(format!("{}: {e}", common.problem.display())))
}

fn emit(out: &mut dyn Write, output: OutputArg, report: &Report) -> Result<(), UsageError> {
    match output {
        OutputArg::Text => out.write_all(report.to_text().as_bytes())?,
        OutputArg::Json => out.write_all(report.to_json().as_bytes())?,
    }
    Ok(())
}

fn code(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, UsageError> {
    match command {
        Command::Reach { common, horizon } => {
            let (mdp, task) = load(&common)?;
            let reach = forward_reachable_set(&mdp, task.start, horizon.unwrap_or(task.horizon));
            let payload = ReachPayload::new(&mdp, &task, &reach);
            let pass = payload.goals.iter().any(|g| g.reachable);
            let r = Report::new("reach", &mdp, &task, Interpretation::new(None, None), Payload::Reach(payload));
            emit(out, common.output, &r)?;
            Ok(code(pass))
        }
        Command::Verify { common, mode } => {
            let (mdp, task) = load(&common)?;
            let mode = mode.into();
            let v = verify(&mdp, &task, mode);
            let r = Report::new(
                "verify",
                &mdp,
                &task,
                Interpretation::new(Some(mode), None),
                Payload::Verify(VerifyPayload::new(&mdp, &v)),
            );
            emit(out, common.output, &r)?;
            Ok(code(v.holds))
        }
        Command::Bound { common, goal } => {
            let (mdp, task) = load(&common)?;
            let goals = match goal {
                Some(name) => {
                    let g = mdp
                        .state_by_name(&name)
                        .filter(|&g| task.is_goal(g))
                        .ok_or_else(|| UsageError(format!("{name:?} is not a goal of this problem")))?;
                    vec![g]
                }
                None => task.goals.clone(),
            };
            let bounds: Vec<GoalBound> = goals
                .iter()
                .map(|&g| {
                    let b = goal_reward_lower_bound(&mdp, &task, g);
                    GoalBound {
                        goal: mdp.state_name(g).to_owned(),
                        bound: b.as_ref().ok().copied(),
                        error: b.err().map(|e| e.to_string()),
                    }
                })
                .collect();
            let pass = bounds.iter().all(|b| b.bound.is_some());
            let r = Report::new(
                "bound",
                &mdp,
                &task,
                Interpretation::new(None, None),
                Payload::Bound(BoundPayload { bounds }),
            );
            emit(out, common.output, &r)?;
            Ok(code(pass))
        }
        Command::Synthesize {
            common,
            margin,
            mode,
            write,
        } => {
            let (mdp, task) = load(&common)?;
            let mode = mode.into();
            if !(margin > 1.0 && margin.is_finite()) {
                return Err(UsageError(format!("--margin must exceed 1 (got {margin})")));
            }
            let syn = match synthesize_rewards(&mdp, &task, margin, mode) {
                Ok(syn) => syn,
                Err(e) => {
                    writeln!(err, "synthesis failed: {e}")?;
                    return Ok(EXIT_FAIL);
                }
            };
            let applied = syn.apply(&mdp)?;
            let v = verify(&applied, &task, mode);
            let written = match &write {
                Some(path) => {
                    std::fs::write(path, serialize_problem(&applied, &task))
                        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let r = Report::new(
                "synthesize",
                &applied,
                &task,
                Interpretation::new(Some(mode), None),
                Payload::Synthesize(SynthesizePayload::new(&applied, &syn, &v.results, written)),
            );
            emit(out, common.output, &r)?;
            Ok(code(v.holds))
        }
        Command::Simulate {
            common,
            planner,
            tie_break,
            samples,
            seed,
            trials,
            horizon_policy,
        } => {
            if common.output == OutputArg::Json && seed.is_none() {
                return Err(UsageError("--seed is required with --output json".into()));
            }
            if trials == 0 {
                return Err(UsageError("--trials must be positive".into()));
            }
            let (mdp, task) = load(&common)?;
            let policy: HorizonPolicy = horizon_policy.into();
            let seed = seed.unwrap_or(0);
            let config = match planner {
                PlannerArg::Exhaustive => PlannerConfig::exhaustive(
                    task.horizon,
                    match tie_break {
                        TieBreakArg::Random => TieBreak::Random,
                        TieBreakArg::Lowest => TieBreak::LowestIndex,
                    },
                ),
                PlannerArg::Shooting => PlannerConfig::random_shooting(task.horizon, samples),
            }
            .with_seed(seed)
            .with_horizon_policy(policy);
            let interpretation = Interpretation::new(None, Some(policy));
            let (payload, pass) = if trials == 1 {
                let rec = rollout(&mdp, &task, &config);
                (Payload::Rollout(RolloutPayload::new(&mdp, &config, &rec)), rec.success)
            } else {
                let est = estimate_success(&mdp, &task, &config, trials, seed);
                (Payload::Estimate(EstimatePayload::new(&config, &est)), est.successes == est.trials)
            };
            emit(out, common.output, &Report::new("simulate", &mdp, &task, interpretation, payload))?;
            Ok(code(pass))
        }
        Command::Certify { common, horizon_policy } => {
            let (mdp, task) = load(&common)?;
            let policy: HorizonPolicy = horizon_policy.into();
            let cert = certify_with(&mdp, &task, policy);
            let r = Report::new(
                "certify",
                &mdp,
                &task,
                Interpretation::new(None, Some(policy)),
                Payload::Certify(CertifyPayload::new(&mdp, &cert)),
            );
            emit(out, common.output, &r)?;
            Ok(code(cert.verdict == Verdict::Certified))
        }
        Command::Gridworld(args) => gridworld(args, out),
    }
}

fn gridworld(args: GridArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let spec = GridSpec {
        width: args.width,
        height: args.height,
        walls: args.walls,
        start: args.start,
        goals: args.goals,
        step_reward: args.step_reward,
        gamma: args.gamma,
        deadline: args.deadline,
    };
    let (mut mdp, task) = generate_gridworld(&spec)?;
    if args.synthesize {
        mdp = synthesize_rewards(&mdp, &task, DEFAULT_MARGIN_FACTOR, PreferenceMode::Corrected)?.apply(&mdp)?;
    }
    let text = serialize_problem(&mdp, &task);
    let Some(path) = args.out else {
        out.write_all(text.as_bytes())?;
        return Ok(EXIT_PASS);
    };
    std::fs::write(&path, &text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let target = highest_preference_reachable(&mdp, &task).map(|t| mdp.state_name(t).to_owned());
    match args.output {
        OutputArg::Json => {
            let summary = serde_json::json!({
                "written": path.display().to_string(),
                "num_states": mdp.num_states(),
                "num_actions": mdp.num_actions(),
                "target": target,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
        }
        OutputArg::Text => writeln!(
            out,
            "wrote {} ({} states, {} actions, target {})",
            path.display(),
            mdp.num_states(),
            mdp.num_actions(),
            target.as_deref().unwrap_or("none")
        )?,
    }
    Ok(EXIT_PASS)
}
