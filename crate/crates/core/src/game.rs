//! Two-team zero-sum normal-form games and team policy representations.
//!
//! A [`TeamGame`] stores team 1's payoff for every pair of joint actions; team
//! 2 receives the negation. Joint actions are indexed in mixed radix with the
//! first player of a team as the most significant digit, so for two players
//! with two actions each the order is `(0,0), (0,1), (1,0), (1,1)`.

use crate::error::{Error, Result};

/// Tolerance on the simplex constraint when constructing policies.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// One of the two competing teams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Team {
    One,
    Two,
}

impl Team {
    pub const BOTH: [Team; 2] = [Team::One, Team::Two];

    /// Zero-based index, usable for `[T; 2]` arrays.
    pub fn index(self) -> usize {
        match self {
            Team::One => 0,
            Team::Two => 1,
        }
    }

    /// One-based team number as used in files and traces.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn opponent(self) -> Team {
        match self {
            Team::One => Team::Two,
            Team::Two => Team::One,
        }
    }

    pub fn from_number(n: usize) -> Result<Team> {
        match n {
            1 => Ok(Team::One),
            2 => Ok(Team::Two),
            _ => Err(Error::Shape(format!("team number must be 1 or 2, got {n}"))),
        }
    }

    /// Sign applied to team 1's payoff to obtain this team's payoff.
    pub fn sign(self) -> f64 {
        match self {
            Team::One => 1.0,
            Team::Two => -1.0,
        }
    }
}

/// A single-state two-team zero-sum game.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamGame {
    name: Option<String>,
    counts: [Vec<usize>; 2],
    labels: [Vec<Vec<String>>; 2],
    joint: [usize; 2],
    payoff1: Vec<f64>,
}

fn default_labels(counts: &[usize]) -> Vec<Vec<String>> {
    counts
        .iter()
        .map(|&c| (0..c).map(|k| k.to_string()).collect())
        .collect()
}

fn joint_count(counts: &[usize]) -> Result<usize> {
    counts.iter().try_fold(1usize, |acc, &c| {
        acc.checked_mul(c)
            .ok_or_else(|| Error::InvalidGame("joint action count overflows".into()))
    })
}

impl TeamGame {
    /// Builds a game from per-player action counts and team 1's payoffs laid
    /// out row-major (team 1 joint action, team 2 joint action).
    pub fn new(team1_counts: Vec<usize>, team2_counts: Vec<usize>, payoff1: Vec<f64>) -> Result<Self> {
        for (team, counts) in [(1, &team1_counts), (2, &team2_counts)] {
            if counts.is_empty() {
                return Err(Error::InvalidGame(format!("team {team} has no players")));
            }
            if let Some(p) = counts.iter().position(|&c| c == 0) {
                return Err(Error::InvalidGame(format!(
                    "player {} of team {team} has no actions",
                    p + 1
                )));
            }
        }
        let joint = [joint_count(&team1_counts)?, joint_count(&team2_counts)?];
        let expected = joint[0]
            .checked_mul(joint[1])
            .ok_or_else(|| Error::InvalidGame("payoff tensor size overflows".into()))?;
        if payoff1.len() != expected {
            return Err(Error::EntryCount {
                expected,
                found: payoff1.len(),
            });
        }
        if let Some(index) = payoff1.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let labels = [default_labels(&team1_counts), default_labels(&team2_counts)];
        Ok(TeamGame {
            name: None,
            counts: [team1_counts, team2_counts],
            labels,
            joint,
            payoff1,
        })
    }

    /// Replaces the default `0..n` action labels.
    pub fn with_labels(mut self, team1: Vec<Vec<String>>, team2: Vec<Vec<String>>) -> Result<Self> {
        for team in Team::BOTH {
            let labels = if team == Team::One { &team1 } else { &team2 };
            let counts = &self.counts[team.index()];
            if labels.len() != counts.len() {
                return Err(Error::Shape(format!(
                    "team {} has {} players but {} label lists",
                    team.number(),
                    counts.len(),
                    labels.len()
                )));
            }
            for (p, (list, &count)) in labels.iter().zip(counts).enumerate() {
                if list.len() != count {
                    return Err(Error::Shape(format!(
                        "player {} of team {} has {count} actions but {} labels",
                        p + 1,
                        team.number(),
                        list.len()
                    )));
                }
                for (k, label) in list.iter().enumerate() {
                    if label.is_empty()
                        || label == "|"
                        || label.starts_with('#')
                        || label.chars().any(char::is_whitespace)
                    {
                        return Err(Error::InvalidGame(format!(
                            "action label {label:?} must be a non-empty token without whitespace, `|` or a leading `#`"
                        )));
                    }
                    if list[..k].contains(label) {
                        return Err(Error::DuplicateLabel {
                            team: team.number(),
                            player: p + 1,
                            label: label.clone(),
                        });
                    }
                }
            }
        }
        self.labels = [team1, team2];
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn player_action_counts(&self, team: Team) -> &[usize] {
        &self.counts[team.index()]
    }

    pub fn num_players(&self, team: Team) -> usize {
        self.counts[team.index()].len()
    }

    pub fn action_labels(&self, team: Team) -> &[Vec<String>] {
        &self.labels[team.index()]
    }

    pub fn joint_action_count(&self, team: Team) -> usize {
        self.joint[team.index()]
    }

    /// Team 1's payoff for a pair of joint action indices.
    pub fn payoff1(&self, a1: usize, a2: usize) -> f64 {
        self.payoff1[a1 * self.joint[1] + a2]
    }

    /// Payoff to `team` when it plays `own` and the opponent plays `opp`.
    pub fn team_payoff(&self, team: Team, own: usize, opp: usize) -> f64 {
        match team {
            Team::One => self.payoff1(own, opp),
            Team::Two => -self.payoff1(opp, own),
        }
    }

    /// The dense payoff tensor for team 1, row-major.
    pub fn payoff_matrix(&self) -> &[f64] {
        &self.payoff1
    }

    pub fn encode_joint(&self, team: Team, actions: &[usize]) -> Result<usize> {
        let counts = &self.counts[team.index()];
        if actions.len() != counts.len() {
            return Err(Error::Shape(format!(
                "joint action for team {} needs {} entries, got {}",
                team.number(),
                counts.len(),
                actions.len()
            )));
        }
        let mut index = 0;
        for (p, (&a, &c)) in actions.iter().zip(counts).enumerate() {
            if a >= c {
                return Err(Error::Shape(format!(
                    "action {a} out of range for player {} of team {} ({c} actions)",
                    p + 1,
                    team.number()
                )));
            }
            index = index * c + a;
        }
        Ok(index)
    }

    /// Per-player actions of a joint action index. Panics if out of range.
    pub fn decode_joint(&self, team: Team, mut index: usize) -> Vec<usize> {
        assert!(index < self.joint_action_count(team), "joint index out of range");
        let counts = &self.counts[team.index()];
        let mut actions = vec![0; counts.len()];
        for (slot, &c) in actions.iter_mut().zip(counts).rev() {
            *slot = index % c;
            index /= c;
        }
        actions
    }

    /// All joint actions of a team in index order.
    pub fn joint_actions(&self, team: Team) -> Vec<Vec<usize>> {
        (0..self.joint_action_count(team))
            .map(|i| self.decode_joint(team, i))
            .collect()
    }

    /// Expected payoff to `team` for each of its pure joint actions against a
    /// fixed opponent joint policy (the single-state action value Q).
    pub fn action_values(&self, team: Team, opponent: &JointPolicy) -> Result<Vec<f64>> {
        self.check_joint(opponent, team.opponent())?;
        let n1 = self.joint[0];
        let n2 = self.joint[1];
        let q = opponent.probs();
        Ok(match team {
            Team::One => (0..n1)
                .map(|i| {
                    let row = &self.payoff1[i * n2..(i + 1) * n2];
                    row.iter().zip(q).map(|(u, p)| u * p).sum()
                })
                .collect(),
            Team::Two => {
                let mut out = vec![0.0; n2];
                for (i, &p) in q.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let row = &self.payoff1[i * n2..(i + 1) * n2];
                    for (o, u) in out.iter_mut().zip(row) {
                        *o += p * u;
                    }
                }
                out.iter_mut().for_each(|v| *v = -*v);
                out
            }
        })
    }

    pub(crate) fn check_joint(&self, policy: &JointPolicy, team: Team) -> Result<()> {
        if policy.team() != team {
            return Err(Error::Shape(format!(
                "expected a policy for team {}, got team {}",
                team.number(),
                policy.team().number()
            )));
        }
        let n = self.joint_action_count(team);
        if policy.len() != n {
            return Err(Error::Shape(format!(
                "team {} has {n} joint actions, policy has {} entries",
                team.number(),
                policy.len()
            )));
        }
        Ok(())
    }
}

/// Validates a probability vector, clamping tiny negatives and renormalizing
/// when the sum is within [`SIMPLEX_TOLERANCE`] of one.
pub(crate) fn validate_simplex(mut probs: Vec<f64>) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidPolicy("empty probability vector".into()));
    }
    for (i, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidPolicy(format!("entry {i} is not finite")));
        }
        if *p < -SIMPLEX_TOLERANCE {
            return Err(Error::InvalidPolicy(format!("entry {i} is negative ({p})")));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidPolicy(format!("entries sum to {sum}")));
    }
    if sum != 1.0 {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(probs)
}

/// A distribution over a team's joint actions (full ex ante correlation).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPolicy {
    team: Team,
    probs: Vec<f64>,
}

impl JointPolicy {
    pub fn new(team: Team, probs: Vec<f64>) -> Result<Self> {
        Ok(JointPolicy {
            team,
            probs: validate_simplex(probs)?,
        })
    }

    pub fn uniform(game: &TeamGame, team: Team) -> Self {
        let n = game.joint_action_count(team);
        JointPolicy {
            team,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn pure(game: &TeamGame, team: Team, joint_action: usize) -> Result<Self> {
        let n = game.joint_action_count(team);
        if joint_action >= n {
            return Err(Error::Shape(format!(
                "joint action {joint_action} out of range ({n} joint actions)"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[joint_action] = 1.0;
        Ok(JointPolicy { team, probs })
    }

    pub fn team(&self) -> Team {
        self.team
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Largest absolute coordinate difference to another policy.
    pub fn sup_distance(&self, other: &JointPolicy) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Independent per-player distributions (the heterogeneous representation).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPolicy {
    team: Team,
    players: Vec<Vec<f64>>,
}

impl ProductPolicy {
    pub fn new(team: Team, players: Vec<Vec<f64>>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::InvalidPolicy("product policy has no players".into()));
        }
        let players = players
            .into_iter()
            .map(validate_simplex)
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductPolicy { team, players })
    }

    pub fn uniform(game: &TeamGame, team: Team) -> Self {
        let players = game
            .player_action_counts(team)
            .iter()
            .map(|&c| vec![1.0 / c as f64; c])
            .collect();
        ProductPolicy { team, players }
    }

    /// Every player plays the listed action with probability one.
    pub fn deterministic(game: &TeamGame, team: Team, actions: &[usize]) -> Result<Self> {
        game.encode_joint(team, actions)?;
        let players = game
            .player_action_counts(team)
            .iter()
            .zip(actions)
            .map(|(&c, &a)| {
                let mut v = vec![0.0; c];
                v[a] = 1.0;
                v
            })
            .collect();
        Ok(ProductPolicy { team, players })
    }

    pub fn team(&self) -> Team {
        self.team
    }

    pub fn players(&self) -> &[Vec<f64>] {
        &self.players
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.players[i]
    }

    pub(crate) fn set_pure(&mut self, player: usize, action: usize) {
        let v = &mut self.players[player];
        v.iter_mut().for_each(|p| *p = 0.0);
        v[action] = 1.0;
    }

    pub(crate) fn check_shape(&self, game: &TeamGame, team: Team) -> Result<()> {
        if self.team != team {
            return Err(Error::Shape(format!(
                "expected a policy for team {}, got team {}",
                team.number(),
                self.team.number()
            )));
        }
        let counts = game.player_action_counts(team);
        if self.players.len() != counts.len()
            || self.players.iter().zip(counts).any(|(v, &c)| v.len() != c)
        {
            return Err(Error::Shape(format!(
                "product policy does not match the action counts {counts:?} of team {}",
                team.number()
            )));
        }
        Ok(())
    }

    /// Probability the product assigns to a decoded joint action.
    pub fn weight(&self, actions: &[usize]) -> f64 {
        self.players
            .iter()
            .zip(actions)
            .map(|(v, &a)| v[a])
            .product()
    }
}

/// One distribution shared by every teammate, applied by action index.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedPolicy {
    team: Team,
    probs: Vec<f64>,
}

impl SharedPolicy {
    pub fn new(team: Team, probs: Vec<f64>) -> Result<Self> {
        Ok(SharedPolicy {
            team,
            probs: validate_simplex(probs)?,
        })
    }

    /// Like [`SharedPolicy::new`] but also checks that every teammate in
    /// `game` has exactly `probs.len()` actions.
    pub fn for_game(game: &TeamGame, team: Team, probs: Vec<f64>) -> Result<Self> {
        let policy = SharedPolicy::new(team, probs)?;
        policy.check_shape(game, team)?;
        Ok(policy)
    }

    pub fn team(&self) -> Team {
        self.team
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub(crate) fn check_shape(&self, game: &TeamGame, team: Team) -> Result<()> {
        if self.team != team {
            return Err(Error::Shape(format!(
                "expected a policy for team {}, got team {}",
                team.number(),
                self.team.number()
            )));
        }
        require_shared_compatible(game, team)?;
        let counts = game.player_action_counts(team);
        if counts[0] != self.probs.len() {
            return Err(Error::Representation(format!(
                "shared policy has {} actions but team {} players have {}",
                self.probs.len(),
                team.number(),
                counts[0]
            )));
        }
        Ok(())
    }
}

/// Fails unless every player of `team` has the same number of actions.
pub fn require_shared_compatible(game: &TeamGame, team: Team) -> Result<usize> {
    let counts = game.player_action_counts(team);
    if counts.iter().any(|&c| c != counts[0]) {
        return Err(Error::Representation(format!(
            "team {} players have unequal action counts {counts:?}; a shared policy cannot map them",
            team.number()
        )));
    }
    Ok(counts[0])
}

/// Any of the three team policy representations.
#[derive(Debug, Clone, PartialEq)]
pub enum TeamPolicy {
    Joint(JointPolicy),
    Product(ProductPolicy),
    Shared(SharedPolicy),
}

impl TeamPolicy {
    pub fn team(&self) -> Team {
        match self {
            TeamPolicy::Joint(p) => p.team(),
            TeamPolicy::Product(p) => p.team(),
            TeamPolicy::Shared(p) => p.team(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TeamPolicy::Joint(_) => "joint",
            TeamPolicy::Product(_) => "product",
            TeamPolicy::Shared(_) => "shared",
        }
    }

    pub fn to_joint(&self, game: &TeamGame) -> Result<JointPolicy> {
        to_joint(self, game)
    }
}

impl From<JointPolicy> for TeamPolicy {
    fn from(p: JointPolicy) -> Self {
        TeamPolicy::Joint(p)
    }
}

impl From<ProductPolicy> for TeamPolicy {
    fn from(p: ProductPolicy) -> Self {
        TeamPolicy::Product(p)
    }
}

impl From<SharedPolicy> for TeamPolicy {
    fn from(p: SharedPolicy) -> Self {
        TeamPolicy::Shared(p)
    }
}

/// Flattens any team policy into a distribution over joint actions.
pub fn to_joint(policy: &TeamPolicy, game: &TeamGame) -> Result<JointPolicy> {
    let team = policy.team();
    match policy {
        TeamPolicy::Joint(p) => {
            game.check_joint(p, team)?;
            Ok(p.clone())
        }
        TeamPolicy::Product(p) => {
            p.check_shape(game, team)?;
            let probs = (0..game.joint_action_count(team))
                .map(|i| p.weight(&game.decode_joint(team, i)))
                .collect();
            Ok(JointPolicy { team, probs })
        }
        TeamPolicy::Shared(p) => {
            p.check_shape(game, team)?;
            let probs = (0..game.joint_action_count(team))
                .map(|i| {
                    game.decode_joint(team, i)
                        .iter()
                        .map(|&a| p.probs[a])
                        .product()
                })
                .collect();
            Ok(JointPolicy { team, probs })
        }
    }
}

/// Team 1's expected payoff; team 2's is the negation.
pub fn expected_payoff(game: &TeamGame, p1: &JointPolicy, p2: &JointPolicy) -> Result<f64> {
    game.check_joint(p1, Team::One)?;
    let rows = game.action_values(Team::One, p2)?;
    Ok(rows.iter().zip(p1.probs()).map(|(q, p)| q * p).sum())
}

/// Payoff to `team` when it plays `own` against `opponent`.
pub fn team_expected_payoff(game: &TeamGame, team: Team, own: &JointPolicy, opponent: &JointPolicy) -> Result<f64> {
    match team {
        Team::One => expected_payoff(game, own, opponent),
        Team::Two => expected_payoff(game, opponent, own).map(|v| -v),
    }
}

/// `Q(a) - V`: advantage of joint action `a` over the team's own policy.
pub fn team_advantage(
    game: &TeamGame,
    team: Team,
    team_policy: &JointPolicy,
    opponent: &JointPolicy,
    joint_action: usize,
) -> Result<f64> {
    game.check_joint(team_policy, team)?;
    let q = game.action_values(team, opponent)?;
    if joint_action >= q.len() {
        return Err(Error::Shape(format!(
            "joint action {joint_action} out of range ({} joint actions)",
            q.len()
        )));
    }
    let v: f64 = q.iter().zip(team_policy.probs()).map(|(a, b)| a * b).sum();
    Ok(q[joint_action] - v)
}

/// Expected team action value when the listed agents play fixed actions and
/// every other teammate samples from `base`.
pub(crate) fn conditional_value(
    game: &TeamGame,
    team: Team,
    base: &ProductPolicy,
    q: &[f64],
    agents: &[usize],
    actions: &[usize],
) -> f64 {
    let mut total = 0.0;
    for (i, &qa) in q.iter().enumerate() {
        let joint = game.decode_joint(team, i);
        if agents.iter().zip(actions).any(|(&ag, &ac)| joint[ag] != ac) {
            continue;
        }
        let w: f64 = joint
            .iter()
            .enumerate()
            .filter(|(p, _)| !agents.contains(p))
            .map(|(p, &a)| base.player(p)[a])
            .product();
        total += w * qa;
    }
    total
}

fn check_agent_subset(game: &TeamGame, team: Team, agents: &[usize], actions: &[usize]) -> Result<()> {
    if agents.len() != actions.len() {
        return Err(Error::Shape(format!(
            "{} agents but {} fixed actions",
            agents.len(),
            actions.len()
        )));
    }
    let counts = game.player_action_counts(team);
    for (k, (&ag, &ac)) in agents.iter().zip(actions).enumerate() {
        if ag >= counts.len() {
            return Err(Error::Shape(format!("agent {ag} out of range")));
        }
        if agents[..k].contains(&ag) {
            return Err(Error::Shape(format!("agent {ag} listed twice")));
        }
        if ac >= counts[ag] {
            return Err(Error::Shape(format!(
                "action {ac} out of range for agent {ag} ({} actions)",
                counts[ag]
            )));
        }
    }
    Ok(())
}

/// Multi-agent advantage of an ordered agent subset playing fixed actions:
/// the expected action value with those agents fixed and the rest drawn from
/// `base`, minus the value of `base` itself.
pub fn multiagent_advantage(
    game: &TeamGame,
    team: Team,
    base: &ProductPolicy,
    opponent: &JointPolicy,
    agents: &[usize],
    actions: &[usize],
) -> Result<f64> {
    base.check_shape(game, team)?;
    check_agent_subset(game, team, agents, actions)?;
    let q = game.action_values(team, opponent)?;
    let fixed = conditional_value(game, team, base, &q, agents, actions);
    let value = conditional_value(game, team, base, &q, &[], &[]);
    Ok(fixed - value)
}

/// Advantage of `agent` playing `action` given that the preceding agents
/// already committed to `preceding_actions`; everyone else follows `base`.
pub fn conditional_agent_advantage(
    game: &TeamGame,
    team: Team,
    base: &ProductPolicy,
    opponent: &JointPolicy,
    preceding: &[usize],
    preceding_actions: &[usize],
    agent: usize,
    action: usize,
) -> Result<f64> {
    base.check_shape(game, team)?;
    let mut agents = preceding.to_vec();
    agents.push(agent);
    let mut actions = preceding_actions.to_vec();
    actions.push(action);
    check_agent_subset(game, team, &agents, &actions)?;
    let q = game.action_values(team, opponent)?;
    let with = conditional_value(game, team, base, &q, &agents, &actions);
    let without = conditional_value(game, team, base, &q, preceding, preceding_actions);
    Ok(with - without)
}
