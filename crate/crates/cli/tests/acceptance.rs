//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hpsro_core::engine::RunTrace;
use hpsro_core::eval::{project_team_rps, total_variation};
use hpsro_core::format::serialize_joint_policy;
use hpsro_core::game::{conditional_agent_advantage, multiagent_advantage};
use hpsro_core::games::{make_hetero_matrix_game, make_team_rps, random_team_game};
use hpsro_core::meta::{build_restricted_matrix, solve_zero_sum, RestrictedPayoffMatrix};
use hpsro_core::oracles::{sequential_bro, shared_bro};
use hpsro_core::*;

const UNIFORM3: [f64; 3] = [1.0 / 3.0; 3];
const TIME_LIMIT: Duration = Duration::from_secs(5);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(algorithm: Algorithm, iterations: usize, seed: u64) -> RunConfig {
    RunConfig {
        max_iterations: iterations,
        seed,
        ..RunConfig::new(algorithm)
    }
}

fn final_pair(game: &TeamGame, trace: &RunTrace) -> (JointPolicy, JointPolicy) {
    induced_joint_pair(game, trace, trace.total_iterations()).unwrap()
}

fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn decode(mut index: usize, counts: &[usize]) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for p in (0..counts.len()).rev() {
        out[p] = index % counts[p];
        index /= counts[p];
    }
    out
}

/// Joint index of a team action given by labels.
fn by_labels(game: &TeamGame, team: Team, labels: &[&str]) -> usize {
    let actions: Vec<usize> = game
        .action_labels(team)
        .iter()
        .zip(labels)
        .map(|(names, l)| names.iter().position(|n| n == l).unwrap())
        .collect();
    game.encode_joint(team, &actions).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let game = make_team_rps();
    let trace = run(&game, &config(Algorithm::HPsro, 30, 0)).unwrap();
    let elapsed = start.elapsed();
    let (p1, p2) = final_pair(&game, &trace);
    let e = trace.final_exploitability();
    let tv1 = total_variation(&project_team_rps(&p1).unwrap(), &UNIFORM3);
    let tv2 = total_variation(&project_team_rps(&p2).unwrap(), &UNIFORM3);
    outcome(
        trace.total_iterations() <= 30 && e <= 1e-3 && tv1 <= 1e-3 && tv2 <= 1e-3 && elapsed < TIME_LIMIT,
        format!(
            "Team RPS H-PSRO: {} iterations, exploitability {e:.3e}, TV to uniform {tv1:.3e}/{tv2:.3e}, {elapsed:.2?}",
            trace.total_iterations()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let game = make_team_rps();
    let trace = run(&game, &config(Algorithm::TeamPsro, 100, 0)).unwrap();
    let elapsed = start.elapsed();
    let rock = to_joint(&trace.populations[0][0], &game).unwrap() == JointPolicy::pure(&game, Team::One, 0).unwrap();
    let max_paper = trace
        .populations
        .iter()
        .flatten()
        .map(|p| project_team_rps(&to_joint(p, &game).unwrap()).unwrap()[1])
        .fold(0.0, f64::max);
    let e = trace.final_exploitability();
    outcome(
        rock && max_paper <= 0.5 && (e - 2.0).abs() <= 1e-6 && elapsed < TIME_LIMIT,
        format!(
            "Team PSRO from Rock (default start is Rock: {rock}): max Paper probability in population {max_paper}, exploitability {e}, {elapsed:.2?}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let game = make_hetero_matrix_game();
    let trace = run(&game, &config(Algorithm::HPsro, 100, 0)).unwrap();
    let elapsed = start.elapsed();
    let (p1, p2) = final_pair(&game, &trace);
    let mut t1 = vec![0.0; 4];
    t1[by_labels(&game, Team::One, &["0", "0"])] = 0.6;
    t1[by_labels(&game, Team::One, &["0", "2"])] = 0.4;
    let mut t2 = vec![0.0; 4];
    t2[by_labels(&game, Team::Two, &["0", "0"])] = 0.4;
    t2[by_labels(&game, Team::Two, &["1", "0"])] = 0.6;
    let d1 = p1.sup_distance(&JointPolicy::new(Team::One, t1).unwrap());
    let d2 = p2.sup_distance(&JointPolicy::new(Team::Two, t2).unwrap());
    let e = trace.final_exploitability();
    outcome(
        e < 1e-6 && d1 <= 1e-3 && d2 <= 1e-3 && elapsed < TIME_LIMIT,
        format!("hetero H-PSRO: exploitability {e:.3e}, mixture distances {d1:.3e}/{d2:.3e}, {elapsed:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let game = make_hetero_matrix_game();
    let zero = JointPolicy::pure(&game, Team::Two, by_labels(&game, Team::Two, &["0", "0"])).unwrap();
    let (shared, value) = shared_bro(&game, Team::One, &zero, &BroConfig::default()).unwrap();
    let x = shared.probs()[0];
    let oracle_ok = (x - 0.9).abs() <= 1e-6 && (value - 1.05).abs() <= 1e-9;

    let trace = run(&game, &config(Algorithm::TeamPsro, 100, 0)).unwrap();
    let e2e = trace.final_exploitability();
    let band_ok = (2.4..=3.5).contains(&e2e);

    let dir = std::env::temp_dir().join(format!("hpsro-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let stuck = to_joint(&SharedPolicy::new(Team::One, vec![0.9, 0.1]).unwrap().into(), &game).unwrap();
    let p1 = dir.join("stuck1.policy");
    let p2 = dir.join("stuck2.policy");
    std::fs::write(&p1, serialize_joint_policy(&stuck)).unwrap();
    std::fs::write(&p2, serialize_joint_policy(&zero)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hpsro"))
        .args(["eval", "--game", "hetero_matrix", "--team1"])
        .arg(&p1)
        .arg("--team2")
        .arg(&p2)
        .output()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    let printed = String::from_utf8_lossy(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix("exploitability ").and_then(|v| v.parse::<f64>().ok()));
    let eval_ok = out.status.success() && printed.is_some_and(|v| (v - 2.95).abs() <= 1e-9);
    outcome(
        oracle_ok && band_ok && eval_ok,
        format!(
            "hetero Team PSRO: shared BR x = {x:.9}, value {value:.12}; end-to-end exploitability {e2e:.6}; \
             eval of stuck pair {printed:?}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e02);
    let mut holds = 0;
    for seed in 0..200u64 {
        let players = rng.gen_range(1..=3);
        let actions = rng.gen_range(2..=4);
        let s2: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=3)).collect();
        let game = random_team_game(&vec![actions; players], &s2, (-1.0, 1.0), 5000 + seed).unwrap();
        let opp = JointPolicy::new(Team::Two, random_simplex(&mut rng, game.joint_action_count(Team::Two))).unwrap();
        let (_, shared) = shared_bro(&game, Team::One, &opp, &BroConfig::default()).unwrap();
        let seq = sequential_bro(&game, Team::One, &opp, &BroConfig::default()).unwrap();
        if seq.value >= shared - 1e-9 {
            holds += 1;
        }
    }
    let rps = make_team_rps();
    let rock = JointPolicy::pure(&rps, Team::Two, 0).unwrap();
    let (_, shared) = shared_bro(&rps, Team::One, &rock, &BroConfig::default()).unwrap();
    let seq = sequential_bro(&rps, Team::One, &rock, &BroConfig::default()).unwrap().value;
    outcome(
        holds == 200 && seq - shared > 0.1,
        format!("sequential >= shared in {holds}/200 games; Team RPS vs Rock: sequential {seq}, shared {shared}"),
    )
}

fn ordered_subsets(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(prefix.clone());
        for p in 0..n {
            if !prefix.contains(&p) {
                prefix.push(p);
                rec(n, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e44a1);
    let mut worst: f64 = 0.0;
    let mut cases = 0usize;
    let mut decreases = 0usize;
    let mut updates = 0usize;
    for instance in 0..200u64 {
        let s1: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=4)).collect();
        let s2: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=4)).collect();
        let game = random_team_game(&s1, &s2, (-1.0, 1.0), instance).unwrap();
        let base = ProductPolicy::new(Team::One, s1.iter().map(|&c| random_simplex(&mut rng, c)).collect()).unwrap();
        let opp = JointPolicy::new(Team::Two, random_simplex(&mut rng, game.joint_action_count(Team::Two))).unwrap();
        for agents in ordered_subsets(s1.len()) {
            let counts: Vec<usize> = agents.iter().map(|&a| s1[a]).collect();
            for combo in 0..counts.iter().product::<usize>() {
                let actions = decode(combo, &counts);
                let joint = multiagent_advantage(&game, Team::One, &base, &opp, &agents, &actions).unwrap();
                let sum: f64 = (0..agents.len())
                    .map(|l| {
                        conditional_agent_advantage(
                            &game, Team::One, &base, &opp, &agents[..l], &actions[..l], agents[l], actions[l],
                        )
                        .unwrap()
                    })
                    .sum();
                worst = worst.max((joint - sum).abs());
                cases += 1;
            }
        }
        let bro = BroConfig {
            exact_mode_threshold: 0,
            permutation_seed: instance,
            ..BroConfig::default()
        };
        for u in sequential_bro(&game, Team::One, &opp, &bro).unwrap().updates {
            updates += 1;
            if u.after < u.before {
                decreases += 1;
            }
        }
    }
    outcome(
        worst <= 1e-10 && decreases == 0,
        format!(
            "decomposition over {cases} subset/action cases, max error {worst:.3e}; \
             {decreases} decreasing updates out of {updates}"
        ),
    )
}

/// Worst duality gap and worst support regret of a pair against a matrix.
fn support_check(u: &RestrictedPayoffMatrix, row: &[f64], col: &[f64]) -> (f64, f64) {
    let row_payoffs: Vec<f64> = (0..u.num_rows())
        .map(|i| (0..u.num_cols()).map(|j| u.entry(i, j) * col[j]).sum())
        .collect();
    let col_payoffs: Vec<f64> = (0..u.num_cols())
        .map(|j| (0..u.num_rows()).map(|i| u.entry(i, j) * row[i]).sum())
        .collect();
    let best_row = row_payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_col = col_payoffs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut regret: f64 = 0.0;
    for (i, w) in row.iter().enumerate() {
        if *w > 0.0 {
            regret = regret.max(best_row - row_payoffs[i]);
        }
    }
    for (j, w) in col.iter().enumerate() {
        if *w > 0.0 {
            regret = regret.max(col_payoffs[j] - best_col);
        }
    }
    (best_row - best_col, regret)
}

fn criterion_7() -> Outcome {
    let mut solves = 0;
    let mut worst_gap: f64 = 0.0;
    let mut worst_regret: f64 = 0.0;
    let mut record = |u: &RestrictedPayoffMatrix, row: &[f64], col: &[f64]| {
        let (gap, regret) = support_check(u, row, col);
        worst_gap = worst_gap.max(gap);
        worst_regret = worst_regret.max(regret);
        solves += 1;
    };

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let (r, c) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let rows: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let u = RestrictedPayoffMatrix::from_rows(rows).unwrap();
        let s = solve_zero_sum(&u).unwrap();
        record(&u, &s.row.weights, &s.col.weights);
    }

    let mut games = vec![make_team_rps(), make_hetero_matrix_game()];
    for seed in 0..50u64 {
        let s1: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=3)).collect();
        let s2: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=3)).collect();
        games.push(random_team_game(&s1, &s2, (-1.0, 1.0), 300 + seed).unwrap());
    }
    let mut worst_oracle: f64 = 0.0;
    for (i, game) in games.iter().enumerate() {
        let sol = solve_full_tmecor(game).unwrap();
        worst_oracle = worst_oracle.max(exploitability(game, &sol.team1, &sol.team2).unwrap());
        for algorithm in [Algorithm::HPsro, Algorithm::PsroJoint, Algorithm::IndepPsro, Algorithm::TeamPsro] {
            let Ok(trace) = run(game, &config(algorithm, 40, i as u64)) else {
                continue;
            };
            for r in &trace.iterations {
                let u = build_restricted_matrix(
                    game,
                    &trace.populations[0][..r.population_sizes[0]],
                    &trace.populations[1][..r.population_sizes[1]],
                )
                .unwrap();
                record(&u, &r.meta[0], &r.meta[1]);
            }
        }
    }
    outcome(
        worst_gap <= 1e-9 && worst_regret <= 1e-8 && worst_oracle <= 1e-8,
        format!(
            "{solves} meta-solves: max duality gap {worst_gap:.3e}, max support regret {worst_regret:.3e}; \
             full-game oracle max exploitability {worst_oracle:.3e} over {} games",
            games.len()
        ),
    )
}

fn argmax3(d: [f64; 3]) -> usize {
    (0..3).fold(0, |best, i| if d[i] > d[best] { i } else { best })
}

fn criterion_8() -> Outcome {
    let game = make_team_rps();
    let sp = run(&game, &config(Algorithm::SelfPlay, 12, 0)).unwrap();
    let sequence: Vec<usize> = sp
        .iterations
        .iter()
        .map(|r| argmax3(project_team_rps(&JointPolicy::new(Team::One, r.trajectory.as_ref().unwrap()[0].clone()).unwrap()).unwrap()))
        .collect();
    let mut changes: Vec<usize> = Vec::new();
    for w in sequence.windows(2) {
        if w[0] != w[1] {
            changes.push((w[1] + 3 - w[0]) % 3);
        }
    }
    let visits_all = (0..3).all(|d| sequence.contains(&d));
    let cyclic = !changes.is_empty() && changes.iter().all(|&c| c == changes[0]);
    let names = ["R", "P", "S"];
    let shown: Vec<&str> = sequence.iter().map(|&d| names[d]).collect();

    let fsp = run(&game, &config(Algorithm::Fsp, 200, 0)).unwrap();
    let mut fsp_ok = fsp.total_iterations() == 200;
    let mut fsp_detail = Vec::new();
    for team in Team::BOTH {
        let tv: Vec<f64> = fsp
            .iterations
            .iter()
            .map(|r| {
                let p = JointPolicy::new(team, r.trajectory.as_ref().unwrap()[team.index()].clone()).unwrap();
                total_variation(&project_team_rps(&p).unwrap(), &UNIFORM3)
            })
            .collect();
        let window = &tv[150..200];
        let peaks: Vec<f64> = (0..window.len())
            .filter(|&i| {
                let left = if i == 0 { tv[149] } else { window[i - 1] };
                let right = window.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
                window[i] >= left && window[i] >= right
            })
            .map(|i| window[i])
            .collect();
        let peaks_ok = peaks.windows(2).all(|w| w[1] <= w[0] + 1e-3);
        let end_ok = tv[199] <= tv[149] + 1e-3;
        fsp_ok &= peaks_ok && end_ok;
        fsp_detail.push(format!(
            "team {} TV {:.4} -> {:.4}, {} peaks non-increasing: {peaks_ok}",
            team.number(),
            tv[149],
            tv[199],
            peaks.len()
        ));
    }
    outcome(
        visits_all && cyclic && fsp_ok,
        format!(
            "Self Play team 1 argmax {} (cyclic {cyclic}); FSP {}",
            shown.join(""),
            fsp_detail.join("; ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 Team RPS TMECor", criterion_1),
        ("2 Team PSRO Rock trap", criterion_2),
        ("3 hetero matrix H-PSRO", criterion_3),
        ("4 hetero matrix Team PSRO", criterion_4),
        ("5 sequential vs shared oracle", criterion_5),
        ("6 advantage decomposition and monotone sweeps", criterion_6),
        ("7 meta-solver certificates", criterion_7),
        ("8 Self Play and FSP dynamics", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
