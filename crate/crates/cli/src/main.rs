//! `gridgame`: payoff construction, solving, learning and Monte Carlo
//! comparison over a radial feeder.
//!
//! Every subcommand writes into `--out` only, and always writes a
//! `manifest.json` with input and output digests.

mod error;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use gridgame_core::experiments::{
    baseline, compare_strategies, scalability_probe, AttackDistribution, BaselineKind, CompareSettings,
    DefensePolicy, McConfig, StrategyMethod, Testbed,
};
use gridgame_core::gamesolve::{nash_exact, solve, stackelberg, SolveMethod, SolveParams, StackelbergSolution};
use gridgame_core::marl::{
    mdp_train, telemetry_csv, train_multi_agent, train_single_agent, LearningConfig, MdpParams, StageMdp,
};
use gridgame_core::netmodel::{load_network, IEEE33_JSON};
use gridgame_core::resilience::{ahp_weights, build_payoff_detailed, load_ahp_matrix, DEFAULT_AHP};
use gridgame_core::scenario::catalog_default;
use gridgame_core::{AhpWeights, EquilibriumReport, NetworkState, PayoffMatrix, ScenarioCatalog};

use error::{CliError, CliResult};
use manifest::Run;

#[derive(Parser)]
#[command(name = "gridgame", version, about = "Attacker-defender resilience games on radial feeders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Serialize)]
struct Inputs {
    /// Network JSON; the bundled 33-bus feeder when absent.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Attack/defense catalog JSON; the bundled catalog when absent.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// 4×4 AHP comparison matrix JSON; the bundled judgments when absent.
    #[arg(long)]
    ahp: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize)]
struct OutDir {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum LearnMode {
    /// Defender against the equilibrium attacker mix.
    Single,
    /// Simultaneous stateless learning.
    Multi,
    /// Simultaneous learning on the three-state Markov game.
    Mdp,
}

#[derive(Subcommand)]
enum Command {
    /// Build the payoff matrix.
    Payoff {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Solve a payoff matrix.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "nash")]
        method: String,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 20.0)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Trajectory sampling stride for regret matching.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Train Q-learning agents.
    Learn {
        /// Payoff CSV; built from the inputs when absent.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value_t = LearnMode::Multi)]
        mode: LearnMode,
        /// Learning configuration JSON; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Three-state MDP parameters JSON (mdp mode).
        #[arg(long)]
        mdp_config: Option<PathBuf>,
        /// Episodes.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        epsilon0: Option<f64>,
        #[arg(long)]
        decay: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        phase1: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Derive a baseline defense policy.
    Baseline {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        /// RDS, RBD or SOD.
        #[arg(long, default_value = "SOD")]
        method: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Monte Carlo comparison of defense methods.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        /// Nominal payoff CSV matching the catalog; rebuilt when absent.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Comma-separated method tags or `all`.
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value = "SOD")]
        reference: String,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "adversarial")]
        attack_dist: String,
        #[arg(long, default_value_t = 0.10)]
        perturbation: f64,
        /// Iterations for regret matching and the QRE iteration.
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 20.0)]
        beta: f64,
        /// Episodes for qlearn and maql.
        #[arg(long, default_value_t = 100_000)]
        episodes: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// State-space estimates and timing per network.
    Probe {
        /// Network JSON, repeatable; the bundled feeder when absent.
        #[arg(long = "network")]
        networks: Vec<PathBuf>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        ahp: Option<PathBuf>,
        /// Comma-separated method tags; empty for estimates only.
        #[arg(long, default_value = "")]
        methods: String,
        #[command(flatten)]
        out: OutDir,
    },
}

fn read_input(run: &mut Run, path: &Path) -> CliResult<String> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    run.input(path.display().to_string(), text.as_bytes());
    Ok(text)
}

fn network(run: &mut Run, path: Option<&Path>) -> CliResult<NetworkState> {
    match path {
        Some(p) => {
            let text = read_input(run, p)?;
            load_network(&text).map_err(|e| CliError::at(p, e))
        }
        None => {
            run.input("builtin:ieee33", IEEE33_JSON.as_bytes());
            Ok(NetworkState::ieee33())
        }
    }
}

fn catalog(run: &mut Run, path: Option<&Path>, base: &NetworkState) -> CliResult<ScenarioCatalog> {
    let cat = match path {
        Some(p) => {
            let text = read_input(run, p)?;
            ScenarioCatalog::from_json(&text).map_err(|e| CliError::at(p, e))?
        }
        None => {
            let cat = catalog_default();
            run.input("builtin:catalog", cat.to_json().as_bytes());
            cat
        }
    };
    cat.check_against(base).map_err(|e| match path {
        Some(p) => CliError::at(p, e),
        None => CliError::from(e),
    })?;
    Ok(cat)
}

fn weights(run: &mut Run, path: Option<&Path>) -> CliResult<AhpWeights> {
    match path {
        Some(p) => {
            let text = read_input(run, p)?;
            let a = load_ahp_matrix(&text).map_err(|e| CliError::at(p, e))?;
            ahp_weights(&a).map_err(|e| CliError::at(p, e))
        }
        None => {
            run.input("builtin:ahp", serde_json::to_string(&DEFAULT_AHP)?.as_bytes());
            Ok(AhpWeights::default())
        }
    }
}

fn matrix(run: &mut Run, path: &Path) -> CliResult<PayoffMatrix> {
    let text = read_input(run, path)?;
    PayoffMatrix::from_csv(&text).map_err(|e| CliError::at(path, e))
}

/// Matrix from `--matrix`, or built from the inputs.
fn matrix_or_build(run: &mut Run, path: Option<&Path>, inputs: &Inputs) -> CliResult<PayoffMatrix> {
    match path {
        Some(p) => matrix(run, p),
        None => {
            let base = network(run, inputs.network.as_deref())?;
            let cat = catalog(run, inputs.catalog.as_deref(), &base)?;
            let w = weights(run, inputs.ahp.as_deref())?;
            Ok(build_payoff_detailed(&base, &cat, &w)?.matrix)
        }
    }
}

fn finish(run: Run) -> CliResult<()> {
    run.finish().map(|_| ())
}

fn cmd_payoff(inputs: Inputs, out: OutDir) -> CliResult<()> {
    let mut run = Run::start(&out.out, json!({ "command": "payoff", "inputs": inputs }), None)?;
    let base = network(&mut run, inputs.network.as_deref())?;
    let cat = catalog(&mut run, inputs.catalog.as_deref(), &base)?;
    let w = weights(&mut run, inputs.ahp.as_deref())?;
    let build = build_payoff_detailed(&base, &cat, &w)?;
    if !build.matrix.in_unit_interval() {
        run.warn("payoff entries fall outside [0, 1]");
    }
    run.write("payoff.csv", &build.matrix.to_csv()?)?;
    run.write("payoff_long.csv", &build.matrix.to_long_csv()?)?;
    let cards: Vec<_> = build
        .cards
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            let m = &build.matrix;
            row.iter().enumerate().map(move |(j, c)| {
                json!({ "attack": m.attack_ids[i], "defense": m.defense_ids[j], "scorecard": c, "score": m.get(i, j) })
            })
        })
        .collect();
    run.write_json("scorecards.json", &cards)?;
    run.write_json("weights.json", &w)?;
    finish(run)
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    report: EquilibriumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    stackelberg: Option<StackelbergSolution>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    path: PathBuf,
    method: String,
    iters: usize,
    beta: f64,
    seed: u64,
    tol: f64,
    stride: usize,
    out: OutDir,
) -> CliResult<()> {
    let method: SolveMethod = method.parse()?;
    let params = SolveParams { iters, tol, seed, beta, stride, ..SolveParams::default() };
    let mut run = Run::start(
        &out.out,
        json!({ "command": "solve", "matrix": path, "method": method, "params": params }),
        Some(seed),
    )?;
    let m = matrix(&mut run, &path)?;
    let report = solve(&m, method, &params)?;
    if !report.converged {
        run.warn(format!("{method} did not converge; reporting the last iterate"));
    }
    if let Some(csv) = report.trajectory_csv()? {
        run.write("trajectory.csv", &csv)?;
    }
    let output = SolveOutput {
        stackelberg: (method == SolveMethod::Stackelberg).then(|| stackelberg(&m)),
        report,
    };
    run.write_json("equilibrium.json", &output)?;
    finish(run)
}

struct LearnFlags {
    iters: Option<usize>,
    epsilon0: Option<f64>,
    decay: Option<f64>,
    gamma: Option<f64>,
    seed: Option<u64>,
    horizon: Option<usize>,
    phase1: Option<usize>,
}

fn learning_config(run: &mut Run, file: Option<&Path>, flags: &LearnFlags) -> CliResult<LearningConfig> {
    let mut cfg = match file {
        Some(p) => {
            let text = read_input(run, p)?;
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
        }
        None => LearningConfig::default(),
    };
    if let Some(v) = flags.iters {
        cfg.episodes = v;
    }
    if let Some(v) = flags.epsilon0 {
        cfg.epsilon0 = v;
    }
    if let Some(v) = flags.decay {
        cfg.epsilon_decay = v;
    }
    if let Some(v) = flags.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = flags.phase1 {
        cfg.phase1_episodes = v;
    }
    Ok(cfg)
}

fn cmd_learn(
    path: Option<PathBuf>,
    inputs: Inputs,
    mode: LearnMode,
    config: Option<PathBuf>,
    mdp_config: Option<PathBuf>,
    flags: LearnFlags,
    out: OutDir,
) -> CliResult<()> {
    // The resolved configuration is only known after reading the file, so
    // the manifest records the file digest plus the overriding flags.
    let mut run = Run::start(
        &out.out,
        json!({
            "command": "learn", "matrix": path, "inputs": inputs, "mode": mode, "config": config,
            "mdp_config": mdp_config, "iters": flags.iters, "epsilon0": flags.epsilon0,
            "decay": flags.decay, "gamma": flags.gamma, "seed": flags.seed,
            "horizon": flags.horizon, "phase1": flags.phase1,
        }),
        flags.seed,
    )?;
    let cfg = learning_config(&mut run, config.as_deref(), &flags)?;
    for w in cfg.validate()? {
        run.warn(w);
    }
    let m = matrix_or_build(&mut run, path.as_deref(), &inputs)?;
    run.write_json("config.json", &cfg)?;
    match mode {
        LearnMode::Single => {
            let opponent = nash_exact(&m)?.attacker;
            let policy = train_single_agent(&m, &opponent, &cfg)?;
            run.write("telemetry.csv", &telemetry_csv(&policy.telemetry)?)?;
            let greedy = m.defense_ids[policy.greedy[0]].clone();
            run.write_json(
                "policy.json",
                &json!({ "mode": mode, "opponent": opponent, "greedy_defense": greedy, "defender": policy }),
            )?;
        }
        LearnMode::Multi => {
            let outcome = train_multi_agent(&m, &cfg)?;
            if !outcome.converged {
                run.warn("greedy pair is not a saddle point; value is the final-10% mean reward");
            }
            run.write("telemetry.csv", &telemetry_csv(&outcome.defender.telemetry)?)?;
            run.write_json("policy.json", &json!({ "mode": mode, "outcome": outcome }))?;
        }
        LearnMode::Mdp => {
            let params: MdpParams = match mdp_config.as_deref() {
                Some(p) => {
                    let text = read_input(&mut run, p)?;
                    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
                }
                None => MdpParams::default(),
            };
            let mdp = StageMdp::three_state(&m, &params)?;
            let outcome = mdp_train(&mdp, &cfg)?;
            if !outcome.converged {
                run.warn("greedy pairs are not saddle points in every state");
            }
            run.write("telemetry.csv", &telemetry_csv(&outcome.defender.telemetry)?)?;
            run.write_json(
                "policy.json",
                &json!({ "mode": mode, "states": mdp.states, "mdp": params, "outcome": outcome }),
            )?;
        }
    }
    finish(run)
}

fn describe_policy(policy: &DefensePolicy, m: &PayoffMatrix) -> serde_json::Value {
    match policy {
        DefensePolicy::Mixed { mix } => json!({
            "kind": "mixed",
            "defenses": m.defense_ids.iter().zip(&mix.probs)
                .map(|(d, p)| json!({ "defense": d, "prob": p }))
                .collect::<Vec<_>>(),
        }),
        DefensePolicy::Reactive { response } => json!({
            "kind": "reactive",
            "response": m.attack_ids.iter().zip(response)
                .map(|(a, &j)| json!({ "attack": a, "defense": m.defense_ids[j] }))
                .collect::<Vec<_>>(),
        }),
    }
}

fn cmd_baseline(path: Option<PathBuf>, inputs: Inputs, method: String, out: OutDir) -> CliResult<()> {
    let kind: BaselineKind = method.parse()?;
    let mut run = Run::start(
        &out.out,
        json!({ "command": "baseline", "matrix": path, "inputs": inputs, "method": kind.to_string() }),
        None,
    )?;
    let base = network(&mut run, inputs.network.as_deref())?;
    let cat = catalog(&mut run, inputs.catalog.as_deref(), &base)?;
    let m = match path.as_deref() {
        Some(p) => matrix(&mut run, p)?,
        None => {
            let w = weights(&mut run, inputs.ahp.as_deref())?;
            build_payoff_detailed(&base, &cat, &w)?.matrix
        }
    };
    let policy = baseline(kind, &m, &base, &cat)?;
    let worst = policy.adversarial_attack(&m)?;
    let value = policy.row_values(&m)?[worst];
    run.write_json(
        "baseline.json",
        &json!({
            "method": kind.to_string(),
            "policy": describe_policy(&policy, &m),
            "worst_attack": m.attack_ids[worst],
            "worst_case_value": value,
        }),
    )?;
    finish(run)
}

#[derive(Serialize)]
struct RunRow<'a> {
    method: &'a str,
    run: usize,
    attack: &'a str,
    defense: &'a str,
    score: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    inputs: Inputs,
    path: Option<PathBuf>,
    methods: String,
    reference: String,
    runs: usize,
    seed: u64,
    attack_dist: String,
    perturbation: f64,
    iters: usize,
    beta: f64,
    episodes: usize,
    out: OutDir,
) -> CliResult<()> {
    let methods = StrategyMethod::parse_list(&methods)?;
    let reference: StrategyMethod = reference.parse()?;
    let attack_distribution: AttackDistribution = attack_dist.parse()?;
    let mc = McConfig { runs, seed, perturbation, attack_distribution };
    let settings = CompareSettings {
        solve: SolveParams { iters, beta, seed, ..SolveParams::default() },
        learning: LearningConfig { episodes, seed, ..LearningConfig::default() },
        reference,
    };
    let mut run = Run::start(
        &out.out,
        json!({
            "command": "compare", "inputs": inputs, "matrix": path, "methods": methods,
            "mc": mc, "settings": settings,
        }),
        Some(seed),
    )?;
    let base = network(&mut run, inputs.network.as_deref())?;
    let cat = catalog(&mut run, inputs.catalog.as_deref(), &base)?;
    let w = weights(&mut run, inputs.ahp.as_deref())?;
    let tb = match path.as_deref() {
        Some(p) => {
            let m = matrix(&mut run, p)?;
            Testbed::with_matrix(base, cat, w, m).map_err(|e| CliError::at(p, e))?
        }
        None => Testbed::new(base, cat, w)?,
    };
    let cmp = compare_strategies(&tb, &methods, &mc, &settings)?;

    run.write("comparison.csv", &cmp.to_csv()?)?;
    run.write("timings.csv", &cmp.timings_csv()?)?;
    let stats: Vec<_> = cmp.stats().into_iter().map(|(m, r)| json!({ "method": m, "stats": r })).collect();
    run.write_json("stats.json", &stats)?;
    let policies: Vec<_> = cmp
        .rows
        .iter()
        .zip(&cmp.policies)
        .map(|(r, p)| json!({ "method": r.method, "policy": describe_policy(p, &tb.nominal) }))
        .collect();
    run.write_json("policies.json", &policies)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for (row, outcome) in cmp.rows.iter().zip(&cmp.outcomes) {
        for r in &outcome.runs {
            w.serialize(RunRow {
                method: row.method.name(),
                run: r.run,
                attack: &r.attack,
                defense: &r.defense,
                score: r.score,
            })
            .map_err(|e| CliError::internal(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
    run.write("runs.csv", &String::from_utf8(bytes).expect("csv output is utf-8"))?;
    run.write("payoff.csv", &tb.nominal.to_csv()?)?;
    finish(run)
}

#[derive(Serialize)]
struct ProbeEstimate<'a> {
    network: &'a str,
    method: &'a str,
    buses: usize,
    ders: usize,
    switches: usize,
    exponent: u32,
    state_space: f64,
    published: Option<f64>,
    note: &'a str,
}

fn cmd_probe(
    networks: Vec<PathBuf>,
    catalog_path: Option<PathBuf>,
    ahp: Option<PathBuf>,
    methods: String,
    out: OutDir,
) -> CliResult<()> {
    let methods = if methods.trim().is_empty() { Vec::new() } else { StrategyMethod::parse_list(&methods)? };
    let mut run = Run::start(
        &out.out,
        json!({ "command": "probe", "networks": networks, "catalog": catalog_path, "ahp": ahp, "methods": methods }),
        None,
    )?;
    let w = weights(&mut run, ahp.as_deref())?;
    let mut list = Vec::new();
    let paths: Vec<Option<PathBuf>> =
        if networks.is_empty() { vec![None] } else { networks.into_iter().map(Some).collect() };
    for p in paths {
        let net = network(&mut run, p.as_deref())?;
        let cat = catalog(&mut run, catalog_path.as_deref(), &net)?;
        let name = p.map_or_else(|| "ieee33".to_string(), |p| p.display().to_string());
        list.push((name, net, cat));
    }
    let rows = scalability_probe(&list, &w, &methods, &CompareSettings::default())?;
    let mut est = csv::Writer::from_writer(Vec::new());
    let mut times = csv::Writer::from_writer(Vec::new());
    times
        .write_record(["network", "method", "wall_time_s", "peak_memory_kb"])
        .map_err(|e| CliError::internal(e.to_string()))?;
    for r in &rows {
        est.serialize(ProbeEstimate {
            network: &r.network,
            method: &r.method,
            buses: r.buses,
            ders: r.ders,
            switches: r.switches,
            exponent: r.exponent,
            state_space: r.state_space,
            published: r.published,
            note: &r.note,
        })
        .map_err(|e| CliError::internal(e.to_string()))?;
        if !r.method.is_empty() {
            let mem = r.peak_memory_kb.map_or_else(String::new, |k| k.to_string());
            times
                .write_record([r.network.as_str(), r.method.as_str(), &format!("{:.6}", r.wall_time_s), &mem])
                .map_err(|e| CliError::internal(e.to_string()))?;
        }
    }
    let est = String::from_utf8(est.into_inner().map_err(|e| CliError::internal(e.to_string()))?).expect("utf-8");
    let times = String::from_utf8(times.into_inner().map_err(|e| CliError::internal(e.to_string()))?).expect("utf-8");
    run.write("probe.csv", &est)?;
    run.write("timings.csv", &times)?;
    finish(run)
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("GRIDGAME_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("GRIDGAME_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::internal(e.to_string()))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Payoff { inputs, out } => cmd_payoff(inputs, out),
        Command::Solve { matrix, method, iters, beta, seed, tol, stride, out } => {
            cmd_solve(matrix, method, iters, beta, seed, tol, stride, out)
        }
        Command::Learn {
            matrix,
            inputs,
            mode,
            config,
            mdp_config,
            iters,
            epsilon0,
            decay,
            gamma,
            seed,
            horizon,
            phase1,
            out,
        } => cmd_learn(
            matrix,
            inputs,
            mode,
            config,
            mdp_config,
            LearnFlags { iters, epsilon0, decay, gamma, seed, horizon, phase1 },
            out,
        ),
        Command::Baseline { matrix, inputs, method, out } => cmd_baseline(matrix, inputs, method, out),
        Command::Compare {
            inputs,
            matrix,
            methods,
            reference,
            runs,
            seed,
            attack_dist,
            perturbation,
            iters,
            beta,
            episodes,
            out,
        } => cmd_compare(
            inputs,
            matrix,
            methods,
            reference,
            runs,
            seed,
            attack_dist,
            perturbation,
            iters,
            beta,
            episodes,
            out,
        ),
        Command::Probe { networks, catalog, ahp, methods, out } => cmd_probe(networks, catalog, ahp, methods, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
