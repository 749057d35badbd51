//! `hpsro`: run population methods on two-team games, evaluate strategy
//! pairs, solve small games exactly, and generate or validate game files.

mod config;
mod failure;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use hpsro_core::eval::{exploitability_report, export_trajectory, Projection};
use hpsro_core::format::{parse_game, parse_joint_policy, serialize_game, serialize_joint_policy};
use hpsro_core::games::random_team_game;
use hpsro_core::trace::render_trace;
use hpsro_core::{run, solve_full_tmecor, JointPolicy, Team, TeamGame};

use config::{build_run_config, config_error, ExperimentConfigFile, GameSource, RunOverrides};
use failure::{Category, Failure};

#[derive(Parser)]
#[command(name = "hpsro", version, about = "Two-team zero-sum game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a population method and write a trace.
    Run(RunArgs),
    /// Exploitability of a pair of joint policies.
    Eval(EvalArgs),
    /// Exact TMECor value and equilibrium pair.
    Value(ValueArgs),
    /// Write a random game file.
    Gen(GenArgs),
    /// Check a game file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in game name or game file path.
    #[arg(long)]
    game: Option<String>,
    /// hpsro, team_psro, psro_joint, indep_psro, self_play or fsp.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    /// Required unless the config file lists seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace path. With several seeds, `.seed<N>` is inserted before the
    /// extension.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "br-gap")]
    br_gap: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// auto, uniform or shared:K.
    #[arg(long)]
    init: Option<String>,
    /// Also write the induced-pair trajectory table here.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// raw or team_rps.
    #[arg(long, default_value = "raw")]
    projection: String,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    game: String,
    /// Team 1 joint policy file.
    #[arg(long)]
    team1: PathBuf,
    /// Team 2 joint policy file.
    #[arg(long)]
    team2: PathBuf,
}

#[derive(Args)]
struct ValueArgs {
    #[arg(long)]
    game: String,
    /// Directory for `team1.policy` and `team2.policy`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Action counts of team 1's players, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    team1: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    team2: Vec<usize>,
    /// Payoff range `LO,HI`.
    #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
    range: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    name: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    path: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            return report(&Failure::new(Category::Usage, first));
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Value(a) => cmd_value(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> ExitCode {
    eprintln!("{f}");
    ExitCode::from(f.category.exit_code() as u8)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, &e))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::io(path, &e))
}

fn with_seed_suffix(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

struct RunOutcome {
    seed: u64,
    exploitability: f64,
    iterations: usize,
    termination: &'static str,
    trace_path: PathBuf,
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => ExperimentConfigFile::load(path)?,
        None => ExperimentConfigFile::default(),
    };
    let source = match &args.game {
        Some(g) => GameSource::from_flag(g),
        None => file
            .game_source()?
            .ok_or_else(|| Failure::from_core(config_error("game", "no game given (use --game)")))?,
    };
    let seeds = match args.seed {
        Some(s) => vec![s],
        None => file.checked_seeds()?,
    };
    if seeds.is_empty() {
        return Err(config_error("seed", "a seed is required (use --seed or `seeds` in the config file)").into());
    }
    let projection = match args.projection.as_str() {
        "raw" => Projection::Raw,
        "team_rps" => Projection::TeamRps,
        other => {
            return Err(config_error("projection", format!("expected raw or team_rps, got `{other}`")).into());
        }
    };
    let game = source.load()?;
    let flags = RunOverrides {
        algo: args.algo.clone(),
        iters: args.iters,
        br_gap: args.br_gap,
        restarts: args.restarts,
        init: args.init.clone(),
    };
    let configs = seeds
        .iter()
        .map(|&s| build_run_config(&file, &flags, s))
        .collect::<Result<Vec<_>, _>>()?;
    let base_out = args.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| {
        PathBuf::from(format!("{}_{}.trace", source.stem(), configs[0].algorithm.name()))
    });
    let several = seeds.len() > 1;
    let path_for = |seed: u64, base: &Path| if several { with_seed_suffix(base, seed) } else { base.to_path_buf() };

    let run_one = |config: &hpsro_core::RunConfig| -> Result<RunOutcome, Failure> {
        let trace = run(&game, config)?;
        let trace_path = path_for(config.seed, &base_out);
        write_file(&trace_path, &render_trace(&trace, Some(unix_now())))?;
        if let Some(tpath) = &args.trajectory {
            let table = export_trajectory(&trace, projection)?;
            write_file(&path_for(config.seed, tpath), &table.to_text())?;
        }
        Ok(RunOutcome {
            seed: config.seed,
            exploitability: trace.final_exploitability(),
            iterations: trace.total_iterations(),
            termination: trace.termination.name(),
            trace_path,
        })
    };
    let outcomes: Vec<Result<RunOutcome, Failure>> = if several {
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs.iter().map(|c| scope.spawn(|| run_one(c))).collect();
            handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
        })
    } else {
        vec![run_one(&configs[0])]
    };

    let mut out = std::io::stdout().lock();
    for outcome in outcomes {
        let o = outcome?;
        let _ = writeln!(out, "seed {}", o.seed);
        let _ = writeln!(out, "exploitability {:?}", o.exploitability);
        let _ = writeln!(out, "iterations {}", o.iterations);
        let _ = writeln!(out, "termination {}", o.termination);
        let _ = writeln!(out, "trace {}", o.trace_path.display());
    }
    Ok(())
}

fn load_policy(path: &Path, game: &TeamGame, team: Team) -> Result<JointPolicy, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, &e))?;
    let policy = parse_joint_policy(&text).map_err(|e| Failure::policy_file(path, e))?;
    let shape = |message: String| Failure::policy_file(path, hpsro_core::Error::Shape(message));
    if policy.team() != team {
        return Err(shape(format!("expected a team {} policy, file is for team {}", team.number(), policy.team().number())));
    }
    let expected = game.joint_action_count(team);
    if policy.len() != expected {
        return Err(shape(format!(
            "team {} has {expected} joint actions, policy has {} probabilities",
            team.number(),
            policy.len()
        )));
    }
    Ok(policy)
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let game = GameSource::from_flag(&args.game).load()?;
    let p1 = load_policy(&args.team1, &game, Team::One)?;
    let p2 = load_policy(&args.team2, &game, Team::Two)?;
    let r = exploitability_report(&game, &p1, &p2)?;
    println!("exploitability {:?}", r.exploitability);
    println!("value {:?}", r.value);
    println!("team1_br_value {:?}", r.team1_br_value);
    println!("team2_br_value {:?}", r.team2_br_value);
    Ok(())
}

fn cmd_value(args: ValueArgs) -> Result<(), Failure> {
    let game = GameSource::from_flag(&args.game).load()?;
    let sol = solve_full_tmecor(&game)?;
    let join = |p: &JointPolicy| p.probs().iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    println!("value {:?}", sol.value);
    println!("team1 {}", join(&sol.team1));
    println!("team2 {}", join(&sol.team2));
    if let Some(dir) = &args.out {
        write_file(&dir.join("team1.policy"), &serialize_joint_policy(&sol.team1))?;
        write_file(&dir.join("team2.policy"), &serialize_joint_policy(&sol.team2))?;
    }
    Ok(())
}

fn parse_range(value: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::from_core(config_error("range", format!("expected LO,HI, got `{value}`")));
    let (lo, hi) = value.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let range = parse_range(&args.range)?;
    let mut game = random_team_game(&args.team1, &args.team2, range, args.seed)?;
    if let Some(name) = &args.name {
        game = game.with_name(name.clone());
    }
    let text = serialize_game(&game);
    match &args.out {
        Some(path) => write_file(path, &text),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.path).map_err(|e| Failure::io(&args.path, &e))?;
    let game = parse_game(&text).map_err(|e| Failure::game_file(&args.path, e))?;
    println!(
        "ok team1 {:?} team2 {:?} joint {}x{}",
        game.player_action_counts(Team::One),
        game.player_action_counts(Team::Two),
        game.joint_action_count(Team::One),
        game.joint_action_count(Team::Two)
    );
    Ok(())
}
