//! Built-in benchmark games and a seeded random game generator.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::TeamGame;

pub const TEAM_RPS: &str = "team_rps";
pub const HETERO_MATRIX: &str = "hetero_matrix";

/// A team decision in Team Rock-Paper-Scissors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RpsDecision {
    Rock,
    Paper,
    Scissors,
}

impl RpsDecision {
    pub fn index(self) -> usize {
        match self {
            RpsDecision::Rock => 0,
            RpsDecision::Paper => 1,
            RpsDecision::Scissors => 2,
        }
    }

    /// +1 for a win, -1 for a loss, 0 for a tie.
    pub fn outcome_against(self, other: RpsDecision) -> f64 {
        use RpsDecision::*;
        match (self, other) {
            (Rock, Scissors) | (Paper, Rock) | (Scissors, Paper) => 1.0,
            (a, b) if a == b => 0.0,
            _ => -1.0,
        }
    }
}

/// Team decision for the actions `(first, second)` of a Team RPS team, with
/// action 0 = `a` and 1 = `b`. The first player alone picks Scissors with `b`;
/// otherwise `(a, a)` is Rock and `(a, b)` is Paper.
pub fn team_rps_decision(first: usize, second: usize) -> RpsDecision {
    match (first, second) {
        (1, _) => RpsDecision::Scissors,
        (0, 0) => RpsDecision::Rock,
        _ => RpsDecision::Paper,
    }
}

/// Decision of a Team RPS joint action index.
pub fn team_rps_decision_of_joint(joint: usize) -> RpsDecision {
    team_rps_decision(joint / 2, joint % 2)
}

/// The 2-vs-2 Team Rock-Paper-Scissors game. Every player chooses `a` or `b`.
pub fn make_team_rps() -> TeamGame {
    let mut payoff = Vec::with_capacity(16);
    for own in 0..4 {
        for opp in 0..4 {
            let d1 = team_rps_decision_of_joint(own);
            let d2 = team_rps_decision_of_joint(opp);
            payoff.push(d1.outcome_against(d2));
        }
    }
    let ab = || vec![vec!["a".to_string(), "b".to_string()]; 2];
    TeamGame::new(vec![2, 2], vec![2, 2], payoff)
        .and_then(|g| g.with_labels(ab(), ab()))
        .expect("team RPS is well formed")
        .with_name(TEAM_RPS)
}

/// The two-player-per-team matrix game whose players have different action
/// sets: team 1 plays `{0,1} x {0,2}` and team 2 plays `{0,1} x {0,3}`.
///
/// Pure payoff to team 1 is 4 when team 1 plays `(0,2)` against `(0,0)`, and
/// otherwise `nu2 - nu1 + 1` with `nu1 = 2[team 1 plays 1] + 2[team 1 plays 2]`
/// and `nu2 = 2[team 2 plays 1] + 3[team 2 plays 3]`.
pub fn make_hetero_matrix_game() -> TeamGame {
    let team1: [[u32; 2]; 2] = [[0, 1], [0, 2]];
    let team2: [[u32; 2]; 2] = [[0, 1], [0, 3]];
    let mut payoff = Vec::with_capacity(16);
    for a1 in 0..4 {
        let (p1, p2) = (team1[0][a1 / 2], team1[1][a1 % 2]);
        for a2 in 0..4 {
            let (o1, o2) = (team2[0][a2 / 2], team2[1][a2 % 2]);
            let value = if p1 == 0 && p2 == 2 && o1 == 0 && o2 == 0 {
                4.0
            } else {
                let nu1 = 2.0 * f64::from(p1 == 1) + 2.0 * f64::from(p2 == 2);
                let nu2 = 2.0 * f64::from(o1 == 1) + 3.0 * f64::from(o2 == 3);
                nu2 - nu1 + 1.0
            };
            payoff.push(value);
        }
    }
    let labels = |t: [[u32; 2]; 2]| -> Vec<Vec<String>> {
        t.iter()
            .map(|p| p.iter().map(|a| a.to_string()).collect())
            .collect()
    };
    TeamGame::new(vec![2, 2], vec![2, 2], payoff)
        .and_then(|g| g.with_labels(labels(team1), labels(team2)))
        .expect("hetero matrix game is well formed")
        .with_name(HETERO_MATRIX)
}

/// Looks up a built-in game by name.
pub fn builtin(name: &str) -> Option<TeamGame> {
    match name {
        TEAM_RPS => Some(make_team_rps()),
        HETERO_MATRIX => Some(make_hetero_matrix_game()),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &[TEAM_RPS, HETERO_MATRIX]
}

/// Random team game with payoffs drawn i.i.d. uniform on the closed range
/// `[low, high]`.
///
/// Entries are generated in row-major order from a ChaCha8 stream seeded with
/// `seed` (`ChaCha8Rng::seed_from_u64`), so a given `(sizes, range, seed)`
/// always yields the same game bit for bit.
pub fn random_team_game(team1_sizes: &[usize], team2_sizes: &[usize], range: (f64, f64), seed: u64) -> Result<TeamGame> {
    let (low, high) = range;
    if !low.is_finite() || !high.is_finite() || low > high {
        return Err(Error::config(
            "payoff_range",
            format!("[{low}, {high}] is not a finite non-empty range"),
        ));
    }
    for (name, sizes) in [("team1_sizes", team1_sizes), ("team2_sizes", team2_sizes)] {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::config(name, "every team needs at least one player and every player at least one action"));
        }
    }
    let n1: usize = team1_sizes.iter().product();
    let n2: usize = team2_sizes.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoff: Vec<f64> = if low == high {
        vec![low; n1 * n2]
    } else {
        let dist = Uniform::new_inclusive(low, high);
        (0..n1 * n2).map(|_| dist.sample(&mut rng)).collect()
    };
    TeamGame::new(team1_sizes.to_vec(), team2_sizes.to_vec(), payoff)
}
