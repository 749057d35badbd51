//! The population loop and its baselines.
//!
//! Population methods (`hpsro`, `team_psro`, `psro_joint`, `indep_psro`)
//! repeat: build the restricted payoff matrix, solve it for a meta-policy per
//! team, compute each team's best response to the opposing meta-policy with
//! the method's oracle, and grow the populations. Self Play and FSP keep a
//! history of policies instead; their "meta-policy" is the latest policy (SP)
//! or the uniform average of the history (FSP), so every trace can be read
//! the same way.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::exploitability_report;
use crate::game::{require_shared_compatible, to_joint, JointPolicy, ProductPolicy, SharedPolicy, Team, TeamGame, TeamPolicy};
use crate::meta::{solve_zero_sum, MetaPolicy, RestrictedPayoffMatrix};
use crate::oracles::{independent_bro, joint_best_response, sequential_bro, shared_bro, BroConfig};

/// Sup-norm distance under which a best response counts as already present.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    HPsro,
    TeamPsro,
    PsroJoint,
    IndepPsro,
    SelfPlay,
    Fsp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::HPsro,
        Algorithm::TeamPsro,
        Algorithm::PsroJoint,
        Algorithm::IndepPsro,
        Algorithm::SelfPlay,
        Algorithm::Fsp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::HPsro => "hpsro",
            Algorithm::TeamPsro => "team_psro",
            Algorithm::PsroJoint => "psro_joint",
            Algorithm::IndepPsro => "indep_psro",
            Algorithm::SelfPlay => "self_play",
            Algorithm::Fsp => "fsp",
        }
    }

    pub fn is_population_method(self) -> bool {
        !matches!(self, Algorithm::SelfPlay | Algorithm::Fsp)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::config("algo", format!("unknown algorithm `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Starting population member for each team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialPolicy {
    /// Team PSRO on Team RPS starts from the all-Rock shared policy, which
    /// is the setting where shared policies get trapped; every other run
    /// starts uniform.
    #[default]
    Auto,
    /// Uniform in the algorithm's representation.
    Uniform,
    /// Team PSRO only: both teams start from the shared policy that plays the
    /// given action index with probability one (index 0 is Rock in Team RPS).
    SharedPure(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub max_iterations: usize,
    pub br_gap_tolerance: f64,
    pub seed: u64,
    pub bro: BroConfig,
    pub record_trajectories: bool,
    pub initial: InitialPolicy,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        RunConfig {
            algorithm,
            max_iterations: 100,
            br_gap_tolerance: 1e-9,
            seed: 0,
            bro: BroConfig::default(),
            record_trajectories: true,
            initial: InitialPolicy::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::config("iters", "max_iterations must be at least 1"));
        }
        if !(self.br_gap_tolerance >= 0.0) {
            return Err(Error::config("br_gap", "br_gap_tolerance must be nonnegative"));
        }
        if matches!(self.initial, InitialPolicy::SharedPure(_)) && self.algorithm != Algorithm::TeamPsro {
            return Err(Error::config("init", "a pure shared initial policy only applies to team_psro"));
        }
        self.bro.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Both teams' best-response gaps fell to `br_gap_tolerance`.
    BrGap,
    /// Every best response with a positive gap was already in its population.
    Duplicate,
    MaxIterations,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::BrGap => "br_gap",
            Termination::Duplicate => "duplicate",
            Termination::MaxIterations => "max_iterations",
        }
    }
}

/// What happened in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    /// Size of the population prefix the meta-policies range over.
    pub population_sizes: [usize; 2],
    /// Meta-policy weights per team over that prefix.
    pub meta: [Vec<f64>; 2],
    /// Team-1 payoff of the induced joint pair.
    pub restricted_value: f64,
    /// Value each team's oracle reached against the opposing meta-policy
    /// (for SP/FSP: the exact best-response value against the recorded pair).
    pub br_values: [f64; 2],
    /// `br_values` minus the restricted value from each team's point of view.
    pub br_gaps: [f64; 2],
    pub exploitability: f64,
    /// Population index of the policy appended at the end of this iteration.
    pub appended: [Option<usize>; 2],
    pub bro_seeds: [u64; 2],
    /// Induced joint pair, when trajectories are recorded.
    pub trajectory: Option<[Vec<f64>; 2]>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub config: RunConfig,
    pub game_name: Option<String>,
    /// Final populations (SP/FSP: the policy history, initial policy first).
    pub populations: [Vec<TeamPolicy>; 2],
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    pub elapsed: Duration,
}

impl RunTrace {
    pub fn total_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.iterations.last().expect("a run records at least one iteration")
    }

    pub fn final_exploitability(&self) -> f64 {
        self.final_record().exploitability
    }
}

/// Strategy pair induced by the meta-policies of a recorded iteration
/// (1-based).
pub fn induced_joint_pair(game: &TeamGame, trace: &RunTrace, iteration: usize) -> Result<(JointPolicy, JointPolicy)> {
    let available = trace.iterations.len();
    if iteration == 0 || iteration > available {
        return Err(Error::IterationOutOfRange { requested: iteration, available });
    }
    let record = &trace.iterations[iteration - 1];
    let mut pair = Vec::with_capacity(2);
    for team in Team::BOTH {
        let k = team.index();
        let pop: Vec<JointPolicy> = trace.populations[k][..record.population_sizes[k]]
            .iter()
            .map(|p| to_joint(p, game))
            .collect::<Result<_>>()?;
        let meta = MetaPolicy {
            team,
            weights: record.meta[k].clone(),
        };
        pair.push(meta.mix(&pop)?);
    }
    let p2 = pair.pop().unwrap();
    let p1 = pair.pop().unwrap();
    Ok((p1, p2))
}

/// Runs the configured algorithm on `game`.
pub fn run(game: &TeamGame, config: &RunConfig) -> Result<RunTrace> {
    config.validate()?;
    if config.algorithm == Algorithm::TeamPsro {
        for team in Team::BOTH {
            require_shared_compatible(game, team).map_err(|_| {
                Error::config(
                    "algo",
                    format!(
                        "team_psro needs every player of team {} to have the same number of actions; \
                         shared policies cannot express this team's policies",
                        team.number()
                    ),
                )
            })?;
        }
        if let InitialPolicy::SharedPure(k) = config.initial {
            for team in Team::BOTH {
                if k >= game.player_action_counts(team)[0] {
                    return Err(Error::config("init", format!("action {k} out of range for team {}", team.number())));
                }
            }
        }
    }
    let start = Instant::now();
    let mut state = RunState::new(game, config);
    let (iterations, termination) = match config.algorithm {
        Algorithm::SelfPlay => state.self_play()?,
        Algorithm::Fsp => state.fictitious_play()?,
        _ => state.population_loop()?,
    };
    Ok(RunTrace {
        config: config.clone(),
        game_name: game.name().map(str::to_string),
        populations: state.populations,
        iterations,
        termination,
        elapsed: start.elapsed(),
    })
}

struct RunState<'a> {
    game: &'a TeamGame,
    config: &'a RunConfig,
    rng: ChaCha8Rng,
    populations: [Vec<TeamPolicy>; 2],
    joints: [Vec<JointPolicy>; 2],
}

/// A best response produced by one of the oracles.
struct Response {
    policy: TeamPolicy,
    value: f64,
}

impl<'a> RunState<'a> {
    fn new(game: &'a TeamGame, config: &'a RunConfig) -> Self {
        RunState {
            game,
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            populations: [Vec::new(), Vec::new()],
            joints: [Vec::new(), Vec::new()],
        }
    }

    fn initial_policy(&self, team: Team) -> Result<TeamPolicy> {
        let game = self.game;
        Ok(match self.config.algorithm {
            Algorithm::PsroJoint => JointPolicy::uniform(game, team).into(),
            Algorithm::TeamPsro => {
                let l = game.player_action_counts(team)[0];
                let probs = match self.config.initial {
                    InitialPolicy::SharedPure(k) => {
                        let mut v = vec![0.0; l];
                        v[k] = 1.0;
                        v
                    }
                    InitialPolicy::Auto if game.name() == Some("team_rps") => {
                        let mut v = vec![0.0; l];
                        v[0] = 1.0;
                        v
                    }
                    InitialPolicy::Auto | InitialPolicy::Uniform => vec![1.0 / l as f64; l],
                };
                SharedPolicy::for_game(game, team, probs)?.into()
            }
            _ => ProductPolicy::uniform(game, team).into(),
        })
    }

    fn push(&mut self, policy: TeamPolicy) -> Result<usize> {
        let k = policy.team().index();
        let joint = to_joint(&policy, self.game)?;
        self.populations[k].push(policy);
        self.joints[k].push(joint);
        Ok(self.populations[k].len() - 1)
    }

    fn next_seeds(&mut self) -> [u64; 2] {
        let base = self.config.bro.permutation_seed;
        [self.rng.next_u64() ^ base, self.rng.next_u64() ^ base]
    }

    fn bro_config(&self, seed: u64) -> BroConfig {
        BroConfig {
            permutation_seed: seed,
            ..self.config.bro.clone()
        }
    }

    fn respond(&self, team: Team, opponent: &JointPolicy, seed: u64, previous: Option<&TeamPolicy>) -> Result<Response> {
        let game = self.game;
        let bro = self.bro_config(seed);
        Ok(match self.config.algorithm {
            Algorithm::HPsro | Algorithm::SelfPlay | Algorithm::Fsp => {
                let r = sequential_bro(game, team, opponent, &bro)?;
                Response {
                    policy: r.policy.into(),
                    value: r.value,
                }
            }
            Algorithm::TeamPsro => {
                let (policy, value) = shared_bro(game, team, opponent, &bro)?;
                Response {
                    policy: policy.into(),
                    value,
                }
            }
            Algorithm::PsroJoint => {
                let br = joint_best_response(game, team, opponent)?;
                Response {
                    policy: JointPolicy::pure(game, team, br.joint_action)?.into(),
                    value: br.value,
                }
            }
            Algorithm::IndepPsro => {
                let previous = match previous {
                    Some(TeamPolicy::Product(p)) => p.clone(),
                    _ => ProductPolicy::uniform(game, team),
                };
                let (policy, value) = independent_bro(game, team, opponent, &previous, &bro)?;
                Response {
                    policy: policy.into(),
                    value,
                }
            }
        })
    }

    fn is_duplicate(&self, team: Team, policy: &TeamPolicy) -> Result<bool> {
        let joint = to_joint(policy, self.game)?;
        Ok(self.joints[team.index()]
            .iter()
            .any(|p| p.sup_distance(&joint) <= DUPLICATE_TOLERANCE))
    }

    fn trajectory(&self, p1: &JointPolicy, p2: &JointPolicy) -> Option<[Vec<f64>; 2]> {
        self.config
            .record_trajectories
            .then(|| [p1.probs().to_vec(), p2.probs().to_vec()])
    }

    fn population_loop(&mut self) -> Result<(Vec<IterationRecord>, Termination)> {
        let game = self.game;
        let tol = self.config.br_gap_tolerance;
        for team in Team::BOTH {
            let p = self.initial_policy(team)?;
            self.push(p)?;
        }
        let mut matrix = RestrictedPayoffMatrix::from_joint(game, &self.joints[0], &self.joints[1])?;
        let mut last_br: [Option<TeamPolicy>; 2] = [self.populations[0].first().cloned(), self.populations[1].first().cloned()];
        let mut records = Vec::new();

        for iteration in 1..=self.config.max_iterations {
            let started = Instant::now();
            let solution = solve_zero_sum(&matrix)?;
            let p1 = solution.row.mix(&self.joints[0])?;
            let p2 = solution.col.mix(&self.joints[1])?;
            let report = exploitability_report(game, &p1, &p2)?;
            let seeds = self.next_seeds();

            let br1 = self.respond(Team::One, &p2, seeds[0], last_br[0].as_ref())?;
            let br2 = self.respond(Team::Two, &p1, seeds[1], last_br[1].as_ref())?;
            let gaps = [br1.value - solution.value, br2.value + solution.value];

            let mut record = IterationRecord {
                iteration,
                population_sizes: [self.populations[0].len(), self.populations[1].len()],
                meta: [solution.row.weights.clone(), solution.col.weights.clone()],
                restricted_value: solution.value,
                br_values: [br1.value, br2.value],
                br_gaps: gaps,
                exploitability: report.exploitability,
                appended: [None, None],
                bro_seeds: seeds,
                trajectory: self.trajectory(&p1, &p2),
                elapsed: Duration::ZERO,
            };

            if gaps.iter().all(|&g| g <= tol) {
                record.elapsed = started.elapsed();
                records.push(record);
                return Ok((records, Termination::BrGap));
            }
            let mut additions = Vec::new();
            for (team, br, gap) in [(Team::One, br1, gaps[0]), (Team::Two, br2, gaps[1])] {
                last_br[team.index()] = Some(br.policy.clone());
                if gap > tol && !self.is_duplicate(team, &br.policy)? {
                    additions.push(br.policy);
                }
            }
            if additions.is_empty() {
                record.elapsed = started.elapsed();
                records.push(record);
                return Ok((records, Termination::Duplicate));
            }
            if iteration == self.config.max_iterations {
                record.elapsed = started.elapsed();
                records.push(record);
                break;
            }
            for policy in additions {
                let team = policy.team();
                let joint = to_joint(&policy, game)?;
                match team {
                    Team::One => matrix.append_row(game, &joint, &self.joints[1])?,
                    Team::Two => matrix.append_col(game, &self.joints[0], &joint)?,
                }
                record.appended[team.index()] = Some(self.push(policy)?);
            }
            record.elapsed = started.elapsed();
            records.push(record);
        }
        Ok((records, Termination::MaxIterations))
    }

    /// Alternating best responses to the opponent's current policy.
    fn self_play(&mut self) -> Result<(Vec<IterationRecord>, Termination)> {
        let game = self.game;
        for team in Team::BOTH {
            let p = self.initial_policy(team)?;
            self.push(p)?;
        }
        let mut records = Vec::new();
        for iteration in 1..=self.config.max_iterations {
            let started = Instant::now();
            let seeds = self.next_seeds();
            let current2 = self.joints[1].last().unwrap().clone();
            let br1 = self.respond(Team::One, &current2, seeds[0], None)?;
            let a1 = self.push(br1.policy)?;
            let current1 = self.joints[0].last().unwrap().clone();
            let br2 = self.respond(Team::Two, &current1, seeds[1], None)?;
            let a2 = self.push(br2.policy)?;
            let current2 = self.joints[1].last().unwrap().clone();

            let sizes = [self.populations[0].len(), self.populations[1].len()];
            let one_hot = |n: usize| {
                let mut v = vec![0.0; n];
                v[n - 1] = 1.0;
                v
            };
            let report = exploitability_report(game, &current1, &current2)?;
            let gaps = report.gaps();
            records.push(IterationRecord {
                iteration,
                population_sizes: sizes,
                meta: [one_hot(sizes[0]), one_hot(sizes[1])],
                restricted_value: report.value,
                br_values: [report.team1_br_value, report.team2_br_value],
                br_gaps: gaps,
                exploitability: report.exploitability,
                appended: [Some(a1), Some(a2)],
                bro_seeds: seeds,
                trajectory: self.trajectory(&current1, &current2),
                elapsed: started.elapsed(),
            });
            if gaps.iter().all(|&g| g <= self.config.br_gap_tolerance) {
                return Ok((records, Termination::BrGap));
            }
        }
        Ok((records, Termination::MaxIterations))
    }

    /// Simultaneous best responses to the opponent's historical average.
    fn fictitious_play(&mut self) -> Result<(Vec<IterationRecord>, Termination)> {
        let game = self.game;
        for team in Team::BOTH {
            let p = self.initial_policy(team)?;
            self.push(p)?;
        }
        let mut averages = [self.joints[0][0].clone(), self.joints[1][0].clone()];
        let mut records = Vec::new();
        for iteration in 1..=self.config.max_iterations {
            let started = Instant::now();
            let seeds = self.next_seeds();
            let br1 = self.respond(Team::One, &averages[1], seeds[0], None)?;
            let br2 = self.respond(Team::Two, &averages[0], seeds[1], None)?;
            let a1 = self.push(br1.policy)?;
            let a2 = self.push(br2.policy)?;
            for team in Team::BOTH {
                let k = team.index();
                let n = self.joints[k].len() as f64;
                let current = self.joints[k].last().unwrap();
                let probs = averages[k]
                    .probs()
                    .iter()
                    .zip(current.probs())
                    .map(|(avg, cur)| ((n - 1.0) * avg + cur) / n)
                    .collect();
                averages[k] = JointPolicy::new(team, probs)?;
            }

            let sizes = [self.populations[0].len(), self.populations[1].len()];
            let report = exploitability_report(game, &averages[0], &averages[1])?;
            let gaps = report.gaps();
            records.push(IterationRecord {
                iteration,
                population_sizes: sizes,
                meta: [vec![1.0 / sizes[0] as f64; sizes[0]], vec![1.0 / sizes[1] as f64; sizes[1]]],
                restricted_value: report.value,
                br_values: [report.team1_br_value, report.team2_br_value],
                br_gaps: gaps,
                exploitability: report.exploitability,
                appended: [Some(a1), Some(a2)],
                bro_seeds: seeds,
                trajectory: self.trajectory(&averages[0], &averages[1]),
                elapsed: started.elapsed(),
            });
            if gaps.iter().all(|&g| g <= self.config.br_gap_tolerance) {
                return Ok((records, Termination::BrGap));
            }
        }
        Ok((records, Termination::MaxIterations))
    }
}
