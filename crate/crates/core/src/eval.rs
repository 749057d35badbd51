//! Exact exploitability, the full-game equilibrium oracle and trajectory
//! export.

use crate::engine::RunTrace;
use crate::error::{Error, Result};
use crate::game::{expected_payoff, JointPolicy, Team, TeamGame};
use crate::games::team_rps_decision_of_joint;
use crate::meta::{solve_zero_sum, RestrictedPayoffMatrix};

/// Largest `|A1| * |A2|` that [`solve_full_tmecor`] will enumerate.
pub const FULL_GAME_CELL_LIMIT: usize = 1_000_000;

/// The terms of the exploitability of a joint strategy pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploitabilityReport {
    /// Team 1's payoff of the pair itself.
    pub value: f64,
    /// `R1(BR(p2), p2)`: team 1's best pure reply to `p2`.
    pub team1_br_value: f64,
    /// `R2(p1, BR(p1))`: team 2's best pure reply to `p1`.
    pub team2_br_value: f64,
    pub exploitability: f64,
}

impl ExploitabilityReport {
    /// How much each team could gain by deviating from the pair.
    pub fn gaps(&self) -> [f64; 2] {
        [self.team1_br_value - self.value, self.team2_br_value + self.value]
    }
}

/// Exploitability with both best responses found by enumeration.
pub fn exploitability_report(game: &TeamGame, p1: &JointPolicy, p2: &JointPolicy) -> Result<ExploitabilityReport> {
    let rows = game.action_values(Team::One, p2)?;
    let cols = game.action_values(Team::Two, p1)?;
    let team1_br_value = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let team2_br_value = cols.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let value = expected_payoff(game, p1, p2)?;
    Ok(ExploitabilityReport {
        value,
        team1_br_value,
        team2_br_value,
        exploitability: team2_br_value + team1_br_value,
    })
}

/// `e(p1, p2) = R2(p1, BR(p1)) + R1(BR(p2), p2)`; zero exactly at a TMECor.
pub fn exploitability(game: &TeamGame, p1: &JointPolicy, p2: &JointPolicy) -> Result<f64> {
    exploitability_report(game, p1, p2).map(|r| r.exploitability)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullSolution {
    pub team1: JointPolicy,
    pub team2: JointPolicy,
    pub value: f64,
}

/// Ground-truth TMECor: each team is treated as one player over its joint
/// actions and the resulting matrix game is solved exactly.
pub fn solve_full_tmecor(game: &TeamGame) -> Result<FullSolution> {
    let n1 = game.joint_action_count(Team::One);
    let n2 = game.joint_action_count(Team::Two);
    let cells = n1.saturating_mul(n2);
    if cells > FULL_GAME_CELL_LIMIT {
        return Err(Error::SizeGuard {
            cells,
            limit: FULL_GAME_CELL_LIMIT,
        });
    }
    let rows = game.payoff_matrix().chunks(n2).map(<[f64]>::to_vec).collect();
    let sol = solve_zero_sum(&RestrictedPayoffMatrix::from_rows(rows)?)?;
    Ok(FullSolution {
        team1: JointPolicy::new(Team::One, sol.row.weights)?,
        team2: JointPolicy::new(Team::Two, sol.col.weights)?,
        value: sol.value,
    })
}

/// Rock/Paper/Scissors decision distribution of a Team RPS joint policy.
pub fn project_team_rps(p: &JointPolicy) -> Result<[f64; 3]> {
    if p.len() != 4 {
        return Err(Error::Shape(format!(
            "Team RPS teams have 4 joint actions, policy has {}",
            p.len()
        )));
    }
    let mut out = [0.0; 3];
    for (joint, &w) in p.probs().iter().enumerate() {
        out[team_rps_decision_of_joint(joint).index()] += w;
    }
    Ok(out)
}

/// Total-variation distance between two distributions of equal length.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Full joint-action distributions.
    Raw,
    /// Team RPS decision distributions.
    TeamRps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub team: Team,
    pub coords: Vec<f64>,
}

/// One row per (iteration, team) in iteration order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub projection: Projection,
    pub rows: Vec<TrajectoryRow>,
}

pub const TRAJECTORY_HEADER: &str = "trajectory v1";

impl TrajectoryTable {
    /// Tab-separated text: a header, a `projection` line, a column line, then
    /// `iteration team coord...` rows. Floats use the shortest round-trip
    /// form, so [`TrajectoryTable::parse`] recovers identical values.
    pub fn to_text(&self) -> String {
        let mut out = format!("{TRAJECTORY_HEADER}\nprojection\t{}\n", match self.projection {
            Projection::Raw => "raw",
            Projection::TeamRps => "team_rps",
        });
        let width = self.rows.first().map_or(0, |r| r.coords.len());
        let mut columns = vec!["iteration".to_string(), "team".to_string()];
        columns.extend((0..width).map(|i| format!("c{i}")));
        out.push_str(&columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{}\t{}", row.iteration, row.team.number()));
            for c in &row.coords {
                out.push_str(&format!("\t{c:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: &str| Error::parse(line + 1, 1, msg.to_string());
        match lines.next() {
            Some((_, TRAJECTORY_HEADER)) => {}
            _ => return Err(bad(0, "expected `trajectory v1` header")),
        }
        let projection = match lines.next() {
            Some((_, "projection\traw")) => Projection::Raw,
            Some((_, "projection\tteam_rps")) => Projection::TeamRps,
            Some((n, _)) => return Err(bad(n, "expected `projection` line")),
            None => return Err(bad(1, "missing `projection` line")),
        };
        lines.next().ok_or_else(|| bad(2, "missing column line"))?;
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 {
                return Err(bad(n, "row needs an iteration and a team"));
            }
            let iteration = fields[0].parse().map_err(|_| bad(n, "bad iteration"))?;
            let team = fields[1]
                .parse()
                .ok()
                .and_then(|t| Team::from_number(t).ok())
                .ok_or_else(|| bad(n, "bad team"))?;
            let coords = fields[2..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| bad(n, "bad coordinate")))
                .collect::<Result<_>>()?;
            rows.push(TrajectoryRow { iteration, team, coords });
        }
        Ok(TrajectoryTable { projection, rows })
    }
}

/// Exports the recorded induced strategy pairs of a run.
pub fn export_trajectory(trace: &RunTrace, projection: Projection) -> Result<TrajectoryTable> {
    let mut rows = Vec::with_capacity(2 * trace.iterations.len());
    for record in &trace.iterations {
        let pair = record.trajectory.as_ref().ok_or(Error::MissingTrajectory)?;
        for team in Team::BOTH {
            let raw = &pair[team.index()];
            let coords = match projection {
                Projection::Raw => raw.clone(),
                Projection::TeamRps => project_team_rps(&JointPolicy::new(team, raw.clone())?)?.to_vec(),
            };
            rows.push(TrajectoryRow {
                iteration: record.iteration,
                team,
                coords,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::MissingTrajectory);
    }
    Ok(TrajectoryTable { projection, rows })
}
