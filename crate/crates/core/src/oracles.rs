//! Best-response oracles for a team facing a fixed opponent joint policy.
//!
//! * [`joint_best_response`]: exact argmax over the team's pure joint actions.
//! * [`shared_bro`]: best single distribution copied to every teammate.
//! * [`sequential_bro`]: teammates best-respond one at a time in a random
//!   order, each conditioning on the teammates already updated in the sweep.
//! * [`independent_bro`]: every teammate best-responds to the previous team
//!   policy at once.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{require_shared_compatible, JointPolicy, ProductPolicy, SharedPolicy, Team, TeamGame};

/// Upper bound on the number of simplex grid points `shared_bro` evaluates
/// before local refinement. The per-dimension resolution is reduced to fit.
pub const SHARED_GRID_BUDGET: usize = 20_000;

/// Knobs for the iterative oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct BroConfig {
    pub max_sweeps: usize,
    pub restarts: usize,
    pub improvement_tolerance: f64,
    pub permutation_seed: u64,
    pub shared_grid_points: usize,
    pub shared_refinement_tolerance: f64,
    /// Teams with at most this many joint actions are solved by enumeration.
    pub exact_mode_threshold: usize,
}

impl Default for BroConfig {
    fn default() -> Self {
        BroConfig {
            max_sweeps: 50,
            restarts: 16,
            improvement_tolerance: 1e-10,
            permutation_seed: 0,
            shared_grid_points: 1001,
            shared_refinement_tolerance: 1e-12,
            exact_mode_threshold: 4096,
        }
    }
}

impl BroConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps < 1 {
            return Err(Error::config("max_sweeps", "must be at least 1"));
        }
        if self.restarts < 1 {
            return Err(Error::config("restarts", "must be at least 1"));
        }
        if !(self.improvement_tolerance > 0.0) {
            return Err(Error::config("improvement_tolerance", "must be positive"));
        }
        if !(self.shared_refinement_tolerance > 0.0) {
            return Err(Error::config("shared_refinement_tolerance", "must be positive"));
        }
        if self.shared_grid_points < 2 {
            return Err(Error::config("shared_grid_points", "must be at least 2"));
        }
        Ok(())
    }
}

/// A pure joint best response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub joint_action: usize,
    pub value: f64,
}

/// Index of the maximum, preferring the lowest index among values within a
/// relative 1e-12 of it.
pub(crate) fn argmax_lowest(values: &[f64]) -> (usize, f64) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max.abs().max(1.0);
    let i = values.iter().position(|&v| v >= max - tol).unwrap_or(0);
    (i, values[i])
}

/// Exact best response by enumerating the team's pure joint actions. Ties go
/// to the lowest joint index.
pub fn joint_best_response(game: &TeamGame, team: Team, opponent: &JointPolicy) -> Result<BestResponse> {
    let q = game.action_values(team, opponent)?;
    let (joint_action, value) = argmax_lowest(&q);
    Ok(BestResponse { joint_action, value })
}

/// The shared objective as a polynomial: coefficient per action-count vector.
struct SharedObjective {
    monomials: Vec<(Vec<i32>, f64)>,
}

impl SharedObjective {
    fn new(game: &TeamGame, team: Team, q: &[f64], actions: usize) -> Self {
        let mut coeffs: BTreeMap<Vec<i32>, f64> = BTreeMap::new();
        for (i, &qa) in q.iter().enumerate() {
            let mut counts = vec![0i32; actions];
            for a in game.decode_joint(team, i) {
                counts[a] += 1;
            }
            *coeffs.entry(counts).or_insert(0.0) += qa;
        }
        SharedObjective {
            monomials: coeffs.into_iter().collect(),
        }
    }

    fn eval(&self, s: &[f64]) -> f64 {
        self.monomials
            .iter()
            .map(|(powers, c)| c * powers.iter().zip(s).map(|(&k, &x)| x.powi(k)).product::<f64>())
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `visit` on every composition of `total` into `parts` nonnegative parts,
/// in lexicographic order.
fn for_each_composition(total: usize, parts: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(prefix: &mut Vec<usize>, left: usize, parts: usize, visit: &mut impl FnMut(&[usize])) {
        if prefix.len() + 1 == parts {
            prefix.push(left);
            visit(prefix);
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(prefix, left - k, parts, visit);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(parts), total, parts, visit);
}

/// Best response restricted to policies where every teammate plays the same
/// distribution (teammates must have equal action counts).
///
/// Searches a regular grid on the simplex and then refines the best grid
/// point by pairwise probability transfers with a halving step, down to
/// `shared_refinement_tolerance`.
pub fn shared_bro(game: &TeamGame, team: Team, opponent: &JointPolicy, config: &BroConfig) -> Result<(SharedPolicy, f64)> {
    config.validate()?;
    let actions = require_shared_compatible(game, team)?;
    let q = game.action_values(team, opponent)?;
    let objective = SharedObjective::new(game, team, &q, actions);

    if actions == 1 {
        let value = objective.eval(&[1.0]);
        return Ok((SharedPolicy::new(team, vec![1.0])?, value));
    }

    let mut resolution = config.shared_grid_points - 1;
    while resolution > 1 && binomial(resolution + actions - 1, actions - 1) > SHARED_GRID_BUDGET as f64 {
        resolution -= 1;
    }

    let mut best = vec![0.0; actions];
    let mut best_value = f64::NEG_INFINITY;
    let mut point = vec![0.0; actions];
    for_each_composition(resolution, actions, &mut |c| {
        for (x, &k) in point.iter_mut().zip(c) {
            *x = k as f64 / resolution as f64;
        }
        let v = objective.eval(&point);
        if v > best_value {
            best_value = v;
            best.copy_from_slice(&point);
        }
    });

    let mut step = 1.0 / resolution as f64;
    let mut evaluations = 0usize;
    let mut candidate = best.clone();
    'refine: while step >= config.shared_refinement_tolerance {
        let mut improved = false;
        for to in 0..actions {
            for from in 0..actions {
                if to == from || best[from] <= 0.0 {
                    continue;
                }
                let t = step.min(best[from]);
                candidate.copy_from_slice(&best);
                candidate[from] -= t;
                candidate[to] += t;
                if candidate[from] < 0.0 {
                    candidate[from] = 0.0;
                }
                let v = objective.eval(&candidate);
                evaluations += 1;
                if v > best_value {
                    best_value = v;
                    best.copy_from_slice(&candidate);
                    improved = true;
                }
                if evaluations > 1_000_000 {
                    break 'refine;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }

    let sum: f64 = best.iter().sum();
    best.iter_mut().for_each(|x| *x /= sum);
    let value = objective.eval(&best);
    Ok((SharedPolicy::new(team, best)?, value))
}

/// Which path `sequential_bro` took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroMode {
    /// The joint action space was small enough to enumerate.
    Exact,
    CoordinateAscent,
}

/// One per-player replacement during a coordinate-ascent sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerUpdate {
    pub restart: usize,
    pub sweep: usize,
    pub player: usize,
    pub action: usize,
    /// Team value before and after the replacement.
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialBro {
    pub policy: ProductPolicy,
    pub value: f64,
    pub mode: BroMode,
    pub best_restart: usize,
    pub updates: Vec<PlayerUpdate>,
}

struct TeamView {
    joints: Vec<Vec<usize>>,
    q: Vec<f64>,
}

impl TeamView {
    fn new(game: &TeamGame, team: Team, opponent: &JointPolicy) -> Result<Self> {
        Ok(TeamView {
            joints: game.joint_actions(team),
            q: game.action_values(team, opponent)?,
        })
    }

    fn value(&self, policy: &ProductPolicy) -> f64 {
        self.joints
            .iter()
            .zip(&self.q)
            .map(|(a, q)| policy.weight(a) * q)
            .sum()
    }

    /// Team value for each action of `player`, the other players following
    /// `policy`.
    fn player_values(&self, policy: &ProductPolicy, player: usize) -> Vec<f64> {
        let mut out = vec![0.0; policy.player(player).len()];
        for (a, q) in self.joints.iter().zip(&self.q) {
            let w: f64 = a
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != player)
                .map(|(p, &k)| policy.player(p)[k])
                .product();
            out[a[player]] += w * q;
        }
        out
    }
}

/// Heterogeneous best response built by sequential per-player updates.
///
/// Each restart starts from a product policy (uniform for the first, a random
/// pure profile for the rest) and runs sweeps: a fresh random order of the
/// teammates, each replaced in turn by its exact best response given the
/// current policies of the others. A restart ends when a sweep gains less than
/// `improvement_tolerance`. Teams with at most `exact_mode_threshold` joint
/// actions skip the sweeps and return the enumerated joint best response.
pub fn sequential_bro(game: &TeamGame, team: Team, opponent: &JointPolicy, config: &BroConfig) -> Result<SequentialBro> {
    config.validate()?;
    if game.joint_action_count(team) <= config.exact_mode_threshold {
        let br = joint_best_response(game, team, opponent)?;
        let actions = game.decode_joint(team, br.joint_action);
        return Ok(SequentialBro {
            policy: ProductPolicy::deterministic(game, team, &actions)?,
            value: br.value,
            mode: BroMode::Exact,
            best_restart: 0,
            updates: Vec::new(),
        });
    }

    let view = TeamView::new(game, team, opponent)?;
    let counts = game.player_action_counts(team).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(config.permutation_seed);
    let mut order: Vec<usize> = (0..counts.len()).collect();
    let mut updates = Vec::new();
    let mut best: Option<(usize, ProductPolicy, f64)> = None;

    for restart in 0..config.restarts {
        let mut policy = if restart == 0 {
            ProductPolicy::uniform(game, team)
        } else {
            let vertex: Vec<usize> = counts.iter().map(|&c| rng.gen_range(0..c)).collect();
            ProductPolicy::deterministic(game, team, &vertex)?
        };
        let mut value = view.value(&policy);
        for sweep in 0..config.max_sweeps {
            let start = value;
            order.shuffle(&mut rng);
            for &player in &order {
                let values = view.player_values(&policy, player);
                let before: f64 = values.iter().zip(policy.player(player)).map(|(v, p)| v * p).sum();
                let (action, after) = argmax_lowest(&values);
                policy.set_pure(player, action);
                value = after;
                updates.push(PlayerUpdate {
                    restart,
                    sweep,
                    player,
                    action,
                    before,
                    after,
                });
            }
            if value - start < config.improvement_tolerance {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, _, v)| value > *v) {
            best = Some((restart, policy, value));
        }
    }

    let (best_restart, policy, value) = best.expect("at least one restart");
    Ok(SequentialBro {
        policy,
        value,
        mode: BroMode::CoordinateAscent,
        best_restart,
        updates,
    })
}

/// Every teammate best-responds to the opponent with its partners frozen at
/// `previous`; all replacements happen simultaneously. No optimality
/// guarantee.
pub fn independent_bro(
    game: &TeamGame,
    team: Team,
    opponent: &JointPolicy,
    previous: &ProductPolicy,
    config: &BroConfig,
) -> Result<(ProductPolicy, f64)> {
    config.validate()?;
    previous.check_shape(game, team)?;
    let view = TeamView::new(game, team, opponent)?;
    let actions: Vec<usize> = (0..game.num_players(team))
        .map(|p| argmax_lowest(&view.player_values(previous, p)).0)
        .collect();
    let joint = game.encode_joint(team, &actions)?;
    let policy = ProductPolicy::deterministic(game, team, &actions)?;
    Ok((policy, view.q[joint]))
}

/// Team value of a product policy against an opponent joint policy.
pub fn product_value(game: &TeamGame, team: Team, policy: &ProductPolicy, opponent: &JointPolicy) -> Result<f64> {
    policy.check_shape(game, team)?;
    Ok(TeamView::new(game, team, opponent)?.value(policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{to_joint, TeamPolicy};
    use crate::games::{make_hetero_matrix_game, make_team_rps, random_team_game};

    fn coordinate_ascent() -> BroConfig {
        BroConfig {
            exact_mode_threshold: 0,
            ..BroConfig::default()
        }
    }

    #[test]
    fn joint_br_hetero_vs_pure_zero_zero() {
        let g = make_hetero_matrix_game();
        let opp = JointPolicy::pure(&g, Team::Two, 0).unwrap();
        let br = joint_best_response(&g, Team::One, &opp).unwrap();
        assert_eq!(g.decode_joint(Team::One, br.joint_action), vec![0, 1]);
        assert_eq!(br.value, 4.0);
    }

    #[test]
    fn joint_br_rps_vs_rock_is_paper() {
        let g = make_team_rps();
        let rock = JointPolicy::pure(&g, Team::Two, 0).unwrap();
        let br = joint_best_response(&g, Team::One, &rock).unwrap();
        assert_eq!(br, BestResponse { joint_action: 1, value: 1.0 });
    }

    #[test]
    fn joint_br_team_two_breaks_ties_low() {
        let g = make_hetero_matrix_game();
        let sigma1 = JointPolicy::new(Team::One, vec![0.6, 0.4, 0.0, 0.0]).unwrap();
        let br = joint_best_response(&g, Team::Two, &sigma1).unwrap();
        assert_eq!(br.joint_action, 0);
        assert!((br.value + 2.2).abs() < 1e-12);
    }

    #[test]
    fn shared_bro_rock_trap() {
        let g = make_team_rps();
        let rock = JointPolicy::pure(&g, Team::Two, 0).unwrap();
        let (s, v) = shared_bro(&g, Team::One, &rock, &BroConfig::default()).unwrap();
        assert_eq!(s.probs(), &[1.0, 0.0]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn shared_bro_hetero_stuck_point() {
        let g = make_hetero_matrix_game();
        let opp = JointPolicy::pure(&g, Team::Two, 0).unwrap();
        let (s, v) = shared_bro(&g, Team::One, &opp, &BroConfig::default()).unwrap();
        assert!((s.probs()[0] - 0.9).abs() < 1e-6, "{:?}", s.probs());
        assert!((v - 1.05).abs() < 1e-9, "{v}");
        let joint = to_joint(&TeamPolicy::Shared(s), &g).unwrap();
        for (a, b) in joint.probs().iter().zip([0.81, 0.09, 0.09, 0.01]) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn shared_bro_matches_calculus_for_interior_optimum() {
        // f(x) = -5x^2 + 9x - 3 against (0,0); perturb the opponent and compare
        // with a fine brute-force scan.
        let g = make_hetero_matrix_game();
        let opp = JointPolicy::new(Team::Two, vec![0.7, 0.1, 0.15, 0.05]).unwrap();
        let (s, v) = shared_bro(&g, Team::One, &opp, &BroConfig::default()).unwrap();
        let q = g.action_values(Team::One, &opp).unwrap();
        let f = |x: f64| q[0] * x * x + (q[1] + q[2]) * x * (1.0 - x) + q[3] * (1.0 - x) * (1.0 - x);
        let scan = (0..=1_000_000).map(|k| f(k as f64 / 1e6)).fold(f64::NEG_INFINITY, f64::max);
        assert!(v >= scan - 1e-12);
        assert!((f(s.probs()[0]) - v).abs() < 1e-12);
    }

    #[test]
    fn shared_bro_constant_game() {
        let g = random_team_game(&[3, 3], &[2], (2.5, 2.5), 0).unwrap();
        let opp = JointPolicy::uniform(&g, Team::Two);
        let (_, v) = shared_bro(&g, Team::One, &opp, &BroConfig::default()).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn shared_bro_rejects_unequal_counts() {
        let g = random_team_game(&[2, 3], &[2], (0.0, 1.0), 0).unwrap();
        let opp = JointPolicy::uniform(&g, Team::Two);
        assert!(matches!(
            shared_bro(&g, Team::One, &opp, &BroConfig::default()),
            Err(Error::Representation(_))
        ));
    }

    #[test]
    fn sequential_bro_examples() {
        let g = make_hetero_matrix_game();
        let opp = JointPolicy::pure(&g, Team::Two, 0).unwrap();
        for config in [BroConfig::default(), coordinate_ascent()] {
            let r = sequential_bro(&g, Team::One, &opp, &config).unwrap();
            assert_eq!(r.value, 4.0);
            assert_eq!(r.policy.players(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        }
        let rps = make_team_rps();
        let rock = JointPolicy::pure(&rps, Team::Two, 0).unwrap();
        let r = sequential_bro(&rps, Team::One, &rock, &coordinate_ascent()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.mode, BroMode::CoordinateAscent);
        assert_eq!(r.policy.players(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn sequential_bro_constant_game_stops_after_one_sweep() {
        let g = random_team_game(&[2, 3], &[2], (-1.5, -1.5), 3).unwrap();
        let opp = JointPolicy::uniform(&g, Team::Two);
        let config = BroConfig {
            restarts: 1,
            ..coordinate_ascent()
        };
        let r = sequential_bro(&g, Team::One, &opp, &config).unwrap();
        assert!((r.value + 1.5).abs() < 1e-12);
        assert!(r.updates.iter().all(|u| u.sweep == 0));
        assert_eq!(r.updates.len(), 2);
    }

    #[test]
    fn sequential_bro_is_deterministic() {
        let g = random_team_game(&[3, 3, 3], &[2, 2], (-1.0, 1.0), 11).unwrap();
        let opp = JointPolicy::uniform(&g, Team::Two);
        let a = sequential_bro(&g, Team::One, &opp, &coordinate_ascent()).unwrap();
        let b = sequential_bro(&g, Team::One, &opp, &coordinate_ascent()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn independent_bro_single_player_is_joint_br() {
        let g = random_team_game(&[5], &[2, 2], (-1.0, 1.0), 4).unwrap();
        let opp = JointPolicy::new(Team::Two, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let prev = ProductPolicy::uniform(&g, Team::One);
        let (p, v) = independent_bro(&g, Team::One, &opp, &prev, &BroConfig::default()).unwrap();
        let br = joint_best_response(&g, Team::One, &opp).unwrap();
        assert_eq!(v, br.value);
        assert_eq!(p.player(0)[br.joint_action], 1.0);
    }

    #[test]
    fn independent_bro_rps_against_scissors() {
        let g = make_team_rps();
        let scissors = JointPolicy::pure(&g, Team::Two, 2).unwrap();
        let prev = ProductPolicy::deterministic(&g, Team::One, &[0, 0]).unwrap();
        let (p, v) = independent_bro(&g, Team::One, &scissors, &prev, &BroConfig::default()).unwrap();

        // Brute force: each player's best action with the partner frozen at `a`.
        let pay = |a: usize, b: usize| g.payoff1(a * 2 + b, 2);
        let p1 = if pay(1, 0) > pay(0, 0) { 1 } else { 0 };
        let p2 = if pay(0, 1) > pay(0, 0) { 1 } else { 0 };
        assert_eq!(p.players(), ProductPolicy::deterministic(&g, Team::One, &[p1, p2]).unwrap().players());
        assert_eq!(v, pay(p1, p2));
        assert_eq!(v, 1.0);
    }

    #[test]
    fn independent_bro_constant_game() {
        let g = random_team_game(&[2, 2], &[2], (0.5, 0.5), 0).unwrap();
        let opp = JointPolicy::uniform(&g, Team::Two);
        let prev = ProductPolicy::deterministic(&g, Team::One, &[0, 0]).unwrap();
        let (p, v) = independent_bro(&g, Team::One, &opp, &prev, &BroConfig::default()).unwrap();
        assert_eq!(p, prev);
        assert_eq!(v, 0.5);
    }

    #[test]
    fn config_validation() {
        let bad = BroConfig {
            restarts: 0,
            ..BroConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "restarts"));
        let bad = BroConfig {
            improvement_tolerance: 0.0,
            ..BroConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
