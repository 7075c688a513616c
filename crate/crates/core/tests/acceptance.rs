//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use goalguard::certify::PathStep;
use goalguard::fixtures::{self, random_problem, RandomSpec};
use goalguard::guarantee::{all_hold, check_reachable, verify, Verification, DEFAULT_MARGIN_FACTOR};
use goalguard::planner::{optimal_value, HorizonPolicy};
use goalguard::trajectory::DEFAULT_ENUMERATION_CAP;
use goalguard::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("goalguard").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn json(text: &str) -> Result<serde_json::Value, String> {
    serde_json::from_str(text).map_err(|e| format!("report is not JSON: {e}"))
}

fn condition(v: &Verification, kind: ConditionKind) -> &ConditionResult {
    v.results.iter().find(|r| r.condition == kind).expect("condition reported")
}

fn exhaustive_random(task: &TaskSpec) -> PlannerConfig {
    PlannerConfig::exhaustive(task.horizon, TieBreak::Random)
}

fn bound_reproduction() -> Outcome {
    let (mdp, task) = fixtures::chain3(3.0);
    let bound = goal_reward_lower_bound(&mdp, &task, StateId(2)).map_err(|e| e.to_string())?;
    ensure!((bound - 2.345679012).abs() < 1e-9, "bound {bound}");

    let path = fixture("chain3.json");
    let (code, out) = cli(&["bound", "--problem", path.to_str().unwrap(), "--output", "json"]);
    let reported = json(&out)?["payload"]["bounds"][0]["bound"].as_f64();
    ensure!(code == 0 && reported == Some(bound), "CLI bound {reported:?}, exit {code}");

    let v3 = verify(&mdp, &task, PreferenceMode::Corrected);
    ensure!(v3.holds, "verify fails with r(G)=3");
    let (code, _) = cli(&["verify", "--problem", path.to_str().unwrap()]);
    ensure!(code == 0, "CLI verify exit {code}");

    let (mdp2, _) = fixtures::chain3(2.0);
    let v2 = verify(&mdp2, &task, PreferenceMode::Corrected);
    ensure!(
        !condition(&v2, ConditionKind::SufficientSingle).holds,
        "sufficient condition holds with r(G)=2"
    );
    ensure!(
        condition(&v2, ConditionKind::NecessaryDominance).holds,
        "dominance fails with r(G)=2"
    );
    Ok(format!("bound {bound:.9}; r=3 verifies; r=2 fails sufficiency only"))
}

fn decoy_demonstration() -> Outcome {
    let (mdp, task) = fixtures::decoy(3.0);
    let dom = check_necessary_dominance(&mdp, &task, StateId(2));
    ensure!(!dom.holds, "dominance holds on the decoy");

    let cert = certify(&mdp, &task);
    let path = cert.failure_path.clone().unwrap_or_default();
    let states: Vec<&str> = path
        .iter()
        .map(|p| mdp.state_name(p.state))
        .chain(path.last().map(|p| mdp.state_name(mdp.successor(p.state, p.action))))
        .collect();
    ensure!(
        cert.verdict == Verdict::Refuted && states == ["A", "B", "B"],
        "certificate {:?} with states {states:?}",
        cert.verdict
    );

    let file = fixture("decoy.json");
    let (code, out) = cli(&[
        "simulate", "--problem", file.to_str().unwrap(), "--trials", "1000", "--seed", "0", "--output", "json",
    ]);
    let freq = json(&out)?["payload"]["frequency"].as_f64();
    ensure!(code == 1 && freq == Some(0.0), "simulate frequency {freq:?}, exit {code}");
    let (code, _) = cli(&["certify", "--problem", file.to_str().unwrap()]);
    ensure!(code == 1, "CLI certify exit {code}");
    Ok(format!("margin {:?}; REFUTED via A->B->B; frequency 0.0", dom.margin))
}

fn single_goal_instances() -> Vec<(DeterministicMdp, TaskSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spec = RandomSpec::default();
    (0..5000).map(|_| random_problem(&mut rng, &spec)).collect()
}

fn sufficiency_suite() -> Outcome {
    let instances = single_goal_instances();
    let (mut passing, mut certified, mut unreachable) = (0, 0, 0);
    for (i, (mdp, task)) in instances.iter().enumerate() {
        let goal = task.goals[0];
        if !check_sufficient_single(mdp, task, goal).holds {
            continue;
        }
        passing += 1;
        let cert = certify(mdp, task);
        if !check_reachable(mdp, task, goal).holds {
            unreachable += 1;
            ensure!(
                cert.verdict == Verdict::NotApplicable,
                "instance {i}: unreachable goal but verdict {:?}",
                cert.verdict
            );
            continue;
        }
        ensure!(cert.is_certified(), "instance {i}: sufficient condition holds but {:?}", cert.verdict);
        let est = estimate_success(mdp, task, &exhaustive_random(task), 1000, i as u64 * 1000);
        ensure!(est.frequency == 1.0, "instance {i}: frequency {}", est.frequency);
        certified += 1;
    }
    ensure!(certified >= 500, "only {certified} reachable instances pass the sufficient condition");
    Ok(format!(
        "{} instances, {passing} pass the sufficient condition: {certified} CERTIFIED at frequency 1.0, {unreachable} NOT_APPLICABLE (goal unreachable); 0 violations",
        instances.len()
    ))
}

fn contrapositive_suite() -> Outcome {
    let instances = single_goal_instances();
    let (mut failing, mut refuted, mut unreachable) = (0, 0, 0);
    for (i, (mdp, task)) in instances.iter().enumerate() {
        let goal = task.goals[0];
        if check_necessary_dominance(mdp, task, goal).holds {
            continue;
        }
        failing += 1;
        let cert = certify(mdp, task);
        if check_reachable(mdp, task, goal).holds {
            ensure!(cert.verdict == Verdict::Refuted, "instance {i}: dominance fails but {:?}", cert.verdict);
            refuted += 1;
        } else {
            ensure!(!cert.is_certified(), "instance {i}: unreachable goal certified");
            unreachable += 1;
        }
    }
    ensure!(refuted >= 100, "only {refuted} refutable instances");
    Ok(format!(
        "{} instances, {failing} fail dominance: {refuted} REFUTED, {unreachable} NOT_APPLICABLE (goal unreachable); 0 violations",
        instances.len()
    ))
}

fn preference_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let spec = RandomSpec {
        min_goals: 2,
        max_goals: 3,
        ..RandomSpec::default()
    };
    let check = |mdp: &DeterministicMdp, task: &TaskSpec, label: &str| -> Result<bool, String> {
        let Ok(syn) = synthesize_rewards(mdp, task, DEFAULT_MARGIN_FACTOR, PreferenceMode::Corrected) else {
            return Ok(false);
        };
        let mdp = syn.apply(mdp).map_err(|e| e.to_string())?;
        ensure!(
            all_hold(&check_multi_goal(&mdp, task, PreferenceMode::Corrected)),
            "{label}: premises fail after synthesis"
        );
        let cert = certify(&mdp, task);
        let best = highest_preference_reachable(&mdp, task);
        ensure!(
            cert.is_certified() && cert.target == best,
            "{label}: {:?} with target {:?}, best reachable {best:?}",
            cert.verdict,
            cert.target
        );
        Ok(true)
    };
    let (mut synthesized, mut fallbacks) = (0, 0);
    for i in 0..1500 {
        let (mdp, task) = random_problem(&mut rng, &spec);
        if check(&mdp, &task, &format!("instance {i}"))? {
            synthesized += 1;
        }
        let short = task.clone().with_deadline(1);
        let reach = forward_reachable_set(&mdp, short.start, 1);
        let top_unreachable = !reach.contains(short.goals[0]) && short.goals.iter().any(|&g| reach.contains(g));
        if top_unreachable && check(&mdp, &short, &format!("instance {i} at J=1"))? {
            fallbacks += 1;
        }
    }
    ensure!(synthesized >= 300, "only {synthesized} synthesized instances");
    ensure!(fallbacks >= 20, "only {fallbacks} J=1 fallback instances");
    Ok(format!(
        "{synthesized} synthesized instances CERTIFIED on the best reachable goal; {fallbacks} J=1 variants certified on a lower goal; 0 violations"
    ))
}

fn literal_discrepancy() -> Outcome {
    let (mdp, task) = fixtures::twogoal(2.1, 1.0);
    let (g1, g2) = (StateId(2), StateId(3));
    let pair = check_preference_pair(&mdp, &task, g1, g2, PreferenceMode::Literal);
    let (lhs, rhs) = (pair.lhs.unwrap(), pair.rhs.unwrap());
    ensure!(
        pair.holds && (lhs - 1.701).abs() < 1e-9 && (rhs - 1.62).abs() < 1e-9,
        "literal pair {lhs} > {rhs}: {}",
        pair.holds
    );
    let cert = certify(&mdp, &task);
    ensure!(
        cert.verdict == Verdict::Refuted
            && cert.failure_path == Some(vec![PathStep { state: StateId(0), action: ActionId(0) }]),
        "certificate {:?} path {:?}",
        cert.verdict,
        cert.failure_path
    );
    let to_g1 = discounted_return(&mdp, &Trajectory::from_actions(&mdp, StateId(0), vec![ActionId(1), ActionId(1)]));
    let to_g2 = discounted_return(&mdp, &Trajectory::from_actions(&mdp, StateId(0), vec![ActionId(0), ActionId(0)]));
    ensure!(
        (to_g1 - 1.89).abs() < 1e-9 && (to_g2 - 1.9).abs() < 1e-9,
        "trajectory values {to_g1} vs {to_g2}"
    );

    let syn = synthesize_rewards(&mdp, &task, DEFAULT_MARGIN_FACTOR, PreferenceMode::Corrected)
        .map_err(|e| e.to_string())?;
    let corrected = syn.apply(&mdp).map_err(|e| e.to_string())?;
    let cert = certify(&corrected, &task);
    ensure!(cert.is_certified(), "corrected synthesis gives {:?}", cert.verdict);
    Ok(format!(
        "literal {lhs:.3} > {rhs:.2} holds, agent reaches G2 ({to_g1:.2} < {to_g2:.2}); corrected r(G1)={:.4} CERTIFIED",
        syn.reward_of(g1).unwrap()
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let spec = RandomSpec {
        max_goals: 3,
        ..RandomSpec::default()
    };
    let (mut checked, mut comparisons) = (0, 0);
    while checked < 300 {
        let (mdp, task) = random_problem(&mut rng, &spec);
        if (mdp.num_actions() as u64).pow(task.deadline as u32) > 10_000 {
            continue;
        }
        checked += 1;
        for origin in mdp.states() {
            for len in 1..=task.deadline {
                let all = enumerate_returns(&mdp, origin, len, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
                let brute = |keep: &dyn Fn(&std::collections::BTreeSet<StateId>) -> bool| {
                    all.iter().filter(|e| keep(&e.contains)).map(|e| e.value).reduce(f64::max)
                };

                let dp = optimal_value(&mdp, origin, len);
                ensure!(Some(dp) == brute(&|_| true), "optimal value differs at {origin} len {len}");

                let dp = max_avoiding_return(&mdp, origin, len, &task.goals).map(|b| b.value);
                let bf = brute(&|c| task.goals.iter().all(|g| !c.contains(g)));
                ensure!(dp == bf, "avoiding max {dp:?} vs {bf:?} at {origin} len {len}");

                for &g in &task.goals {
                    let others: Vec<StateId> = task.goals.iter().copied().filter(|&o| o != g).collect();
                    let dp = max_containing_return(&mdp, origin, len, g, &others).map(|b| b.value);
                    let bf = brute(&|c| c.contains(&g) && others.iter().all(|o| !c.contains(o)));
                    ensure!(dp == bf, "containing max {dp:?} vs {bf:?} for {g} at {origin} len {len}");
                }
                comparisons += 2 + task.goals.len();
            }
        }
    }
    Ok(format!("{checked} instances, {comparisons} exact comparisons; 0 violations"))
}

fn determinism_and_scale() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = ["chain3.json", "decoy.json", "twogoal.json"];
    let mut reports = 0;
    for name in files {
        let path = fixture(name);
        let p = path.to_str().unwrap();
        let out = dir.path().join("synth.json");
        let o = out.to_str().unwrap();
        let commands: [&[&str]; 7] = [
            &["reach", "--problem", p],
            &["verify", "--problem", p, "--mode", "literal"],
            &["bound", "--problem", p],
            &["synthesize", "--problem", p, "--write", o],
            &["simulate", "--problem", p, "--seed", "7"],
            &["simulate", "--problem", p, "--seed", "7", "--trials", "200", "--planner", "shooting", "--samples", "3"],
            &["certify", "--problem", p],
        ];
        for args in commands {
            for output in ["text", "json"] {
                let args: Vec<&str> = args.iter().copied().chain(["--output", output]).collect();
                let first = cli(&args);
                let second = cli(&args);
                ensure!(first == second, "{name}: {args:?} differs between runs");
                reports += 1;
            }
        }
    }

    let mut set: Vec<(String, DeterministicMdp, TaskSpec)> = vec![
        ("CHAIN3(3)".into(), fixtures::chain3(3.0).0, fixtures::chain3(3.0).1),
        ("CHAIN3(2)".into(), fixtures::chain3(2.0).0, fixtures::chain3(2.0).1),
        ("DECOY(3)".into(), fixtures::decoy(3.0).0, fixtures::decoy(3.0).1),
        ("TWOGOAL(2.1,1)".into(), fixtures::twogoal(2.1, 1.0).0, fixtures::twogoal(2.1, 1.0).1),
        ("TWOGOAL(2.5,1)".into(), fixtures::twogoal(2.5, 1.0).0, fixtures::twogoal(2.5, 1.0).1),
    ];
    for name in files {
        let (mdp, task) = read_problem(fixture(name)).map_err(|e| e.to_string())?;
        set.push((name.to_owned(), mdp, task));
    }
    let verdicts = |mdp: &DeterministicMdp, task: &TaskSpec| {
        let mut flags = Vec::new();
        for mode in [PreferenceMode::Literal, PreferenceMode::Corrected] {
            let v = verify(mdp, task, mode);
            flags.push(v.holds);
            flags.extend(v.results.iter().map(|r| r.holds));
        }
        let certs: Vec<Certificate> = [HorizonPolicy::Shrinking, HorizonPolicy::Fixed]
            .into_iter()
            .map(|p| certify_with(mdp, task, p))
            .collect();
        (flags, certs)
    };
    for (label, mdp, task) in &set {
        let base = verdicts(mdp, task);
        for c in [0.5, 3.0, 100.0] {
            let scaled = mdp.scaled(c).map_err(|e| e.to_string())?;
            ensure!(verdicts(&scaled, task) == base, "{label}: scaling by {c} changes a verdict");
        }
    }
    Ok(format!(
        "{reports} reports byte-identical across runs; {} problems unchanged under scaling by 0.5, 3, 100",
        set.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("bound reproduction (CHAIN3)", bound_reproduction, Duration::from_secs(1)),
        ("dominance failure (DECOY)", decoy_demonstration, Duration::from_secs(1)),
        ("sufficiency suite", sufficiency_suite, Duration::from_secs(60)),
        ("dominance contrapositive suite", contrapositive_suite, Duration::from_secs(60)),
        ("preference suite (corrected)", preference_suite, Duration::from_secs(60)),
        ("literal vs corrected (TWOGOAL)", literal_discrepancy, Duration::from_secs(60)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        ("determinism and scale invariance", determinism_and_scale, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let result = check();
        let elapsed = started.elapsed();
        let result = match result {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {:.2} s)", i + 1, elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
