//! Restricted (population) games and their zero-sum equilibria.

use crate::error::{Error, Result};
use crate::game::{to_joint, JointPolicy, Team, TeamGame, TeamPolicy};
use crate::lp::solve_matrix_game;

/// Largest allowed `max row payoff - min column payoff` of a solution, per
/// unit of payoff span (spans below 1 count as 1).
pub const DUALITY_GAP_TOLERANCE: f64 = 1e-9;
/// Largest allowed gain from a pure deviation, per unit of payoff span.
pub const SUPPORT_BR_TOLERANCE: f64 = 1e-8;

/// Expected team-1 payoffs between every pair of population members.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedPayoffMatrix {
    rows: Vec<Vec<f64>>,
    cols: usize,
    row_ids: Vec<usize>,
    col_ids: Vec<usize>,
}

impl RestrictedPayoffMatrix {
    /// Wraps an explicit matrix; row and column ids default to `0..n`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::Shape("restricted matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("restricted matrix rows have different lengths".into()));
        }
        if let Some(index) = rows.iter().flatten().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(RestrictedPayoffMatrix {
            row_ids: (0..rows.len()).collect(),
            col_ids: (0..cols).collect(),
            rows,
            cols,
        })
    }

    /// Builds the matrix from joint forms of both populations.
    pub fn from_joint(game: &TeamGame, pop1: &[JointPolicy], pop2: &[JointPolicy]) -> Result<Self> {
        if pop1.is_empty() || pop2.is_empty() {
            return Err(Error::Shape("populations must be non-empty".into()));
        }
        let mut m = RestrictedPayoffMatrix {
            rows: Vec::with_capacity(pop1.len()),
            cols: pop2.len(),
            row_ids: Vec::new(),
            col_ids: (0..pop2.len()).collect(),
        };
        for p in pop1 {
            m.append_row(game, p, pop2)?;
        }
        Ok(m)
    }

    /// Adds the row of a new team-1 policy against the current columns.
    pub fn append_row(&mut self, game: &TeamGame, policy: &JointPolicy, pop2: &[JointPolicy]) -> Result<()> {
        if pop2.len() != self.cols {
            return Err(Error::Shape(format!(
                "matrix has {} columns, population 2 has {} members",
                self.cols,
                pop2.len()
            )));
        }
        game.check_joint(policy, Team::One)?;
        // Column payoffs of `policy`, i.e. p' U.
        let against: Vec<f64> = game
            .action_values(Team::Two, policy)?
            .into_iter()
            .map(|v| -v)
            .collect();
        let mut row = Vec::with_capacity(pop2.len());
        for q in pop2 {
            game.check_joint(q, Team::Two)?;
            row.push(against.iter().zip(q.probs()).map(|(a, b)| a * b).sum());
        }
        self.row_ids.push(self.rows.len());
        self.rows.push(row);
        Ok(())
    }

    /// Adds the column of a new team-2 policy against the current rows.
    pub fn append_col(&mut self, game: &TeamGame, pop1: &[JointPolicy], policy: &JointPolicy) -> Result<()> {
        if pop1.len() != self.rows.len() {
            return Err(Error::Shape(format!(
                "matrix has {} rows, population 1 has {} members",
                self.rows.len(),
                pop1.len()
            )));
        }
        let against = game.action_values(Team::One, policy)?;
        for (row, p) in self.rows.iter_mut().zip(pop1) {
            game.check_joint(p, Team::One)?;
            row.push(against.iter().zip(p.probs()).map(|(a, b)| a * b).sum());
        }
        self.col_ids.push(self.cols);
        self.cols += 1;
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Population index of each row.
    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[usize] {
        &self.col_ids
    }

    /// The same game seen from team 2: `-U'`.
    pub fn negated_transpose(&self) -> Self {
        let rows = (0..self.cols)
            .map(|j| self.rows.iter().map(|r| -r[j]).collect())
            .collect();
        RestrictedPayoffMatrix {
            rows,
            cols: self.rows.len(),
            row_ids: self.col_ids.clone(),
            col_ids: self.row_ids.clone(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut m = self.clone();
        m.rows.iter_mut().flatten().for_each(|v| *v *= alpha);
        m
    }

    fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    fn span(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }
}

/// Builds the restricted matrix from populations in any representation.
pub fn build_restricted_matrix(game: &TeamGame, pop1: &[TeamPolicy], pop2: &[TeamPolicy]) -> Result<RestrictedPayoffMatrix> {
    let check_team = |pop: &[TeamPolicy], team: Team| -> Result<Vec<JointPolicy>> {
        pop.iter()
            .map(|p| {
                if p.team() != team {
                    return Err(Error::Shape(format!(
                        "population {} contains a policy for team {}",
                        team.number(),
                        p.team().number()
                    )));
                }
                to_joint(p, game)
            })
            .collect()
    };
    let j1 = check_team(pop1, Team::One)?;
    let j2 = check_team(pop2, Team::Two)?;
    RestrictedPayoffMatrix::from_joint(game, &j1, &j2)
}

/// A mixture over one team's population.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPolicy {
    pub team: Team,
    pub weights: Vec<f64>,
}

impl MetaPolicy {
    /// Mixes the joint forms of a population with these weights.
    pub fn mix(&self, population: &[JointPolicy]) -> Result<JointPolicy> {
        if population.len() != self.weights.len() {
            return Err(Error::Shape(format!(
                "meta-policy has {} weights for {} policies",
                self.weights.len(),
                population.len()
            )));
        }
        let n = population.first().map_or(0, JointPolicy::len);
        let mut probs = vec![0.0; n];
        for (w, p) in self.weights.iter().zip(population) {
            if p.len() != n || p.team() != self.team {
                return Err(Error::Shape("population members disagree on shape".into()));
            }
            for (acc, x) in probs.iter_mut().zip(p.probs()) {
                *acc += w * x;
            }
        }
        JointPolicy::new(self.team, probs)
    }
}

/// Quality measures of a computed equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Best pure row payoff against the column strategy, minus `value`.
    pub row_regret: f64,
    /// `value` minus the worst column payoff against the row strategy.
    pub col_regret: f64,
    /// Upper bound minus lower bound on the game value.
    pub duality_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumSolution {
    pub row: MetaPolicy,
    pub col: MetaPolicy,
    pub value: f64,
    pub certificate: Certificate,
}

/// Certificate of an arbitrary strategy pair against a matrix.
pub fn certify(u: &RestrictedPayoffMatrix, row: &[f64], col: &[f64], value: f64) -> Certificate {
    let upper = u
        .rows
        .iter()
        .map(|r| r.iter().zip(col).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = (0..u.cols)
        .map(|j| u.rows.iter().zip(row).map(|(r, p)| r[j] * p).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Certificate {
        row_regret: upper - value,
        col_regret: value - lower,
        duality_gap: upper - lower,
    }
}

/// Exact maximin/minimax strategies of the restricted game.
///
/// Fails with [`Error::Numerical`] if the returned pair does not meet
/// [`DUALITY_GAP_TOLERANCE`] and [`SUPPORT_BR_TOLERANCE`].
pub fn solve_zero_sum(u: &RestrictedPayoffMatrix) -> Result<ZeroSumSolution> {
    let sol = solve_matrix_game(&u.flat(), u.num_rows(), u.num_cols())?;
    let certificate = certify(u, &sol.row, &sol.col, sol.value);
    let scale = u.span().max(1.0);
    if certificate.duality_gap > DUALITY_GAP_TOLERANCE * scale
        || certificate.row_regret > SUPPORT_BR_TOLERANCE * scale
        || certificate.col_regret > SUPPORT_BR_TOLERANCE * scale
    {
        return Err(Error::Numerical(format!("meta-solver certificate failed: {certificate:?}")));
    }
    Ok(ZeroSumSolution {
        row: MetaPolicy {
            team: Team::One,
            weights: sol.row,
        },
        col: MetaPolicy {
            team: Team::Two,
            weights: sol.col,
        },
        value: sol.value,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::SharedPolicy;
    use crate::games::{make_hetero_matrix_game, make_team_rps};

    #[test]
    fn rps_is_uniform() {
        let u = RestrictedPayoffMatrix::from_rows(vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ])
        .unwrap();
        let s = solve_zero_sum(&u).unwrap();
        assert!(s.value.abs() < 1e-12);
        for w in s.row.weights.iter().chain(&s.col.weights) {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_by_one() {
        let u = RestrictedPayoffMatrix::from_rows(vec![vec![-2.5]]).unwrap();
        let s = solve_zero_sum(&u).unwrap();
        assert_eq!((s.row.weights.clone(), s.col.weights.clone(), s.value), (vec![1.0], vec![1.0], -2.5));
    }

    #[test]
    fn hetero_golden_matrix() {
        let g = make_hetero_matrix_game();
        let pop1: Vec<TeamPolicy> = (0..4).map(|i| JointPolicy::pure(&g, Team::One, i).unwrap().into()).collect();
        let pop2: Vec<TeamPolicy> = (0..4).map(|i| JointPolicy::pure(&g, Team::Two, i).unwrap().into()).collect();
        let u = build_restricted_matrix(&g, &pop1, &pop2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(u.entry(i, j), g.payoff1(i, j));
            }
        }
        let s = solve_zero_sum(&u).unwrap();
        let expect1 = [0.6, 0.4, 0.0, 0.0];
        let expect2 = [0.4, 0.0, 0.6, 0.0];
        for k in 0..4 {
            assert!((s.row.weights[k] - expect1[k]).abs() < 1e-12);
            assert!((s.col.weights[k] - expect2[k]).abs() < 1e-12);
        }
        assert!((s.value - 2.2).abs() < 1e-12);
    }

    #[test]
    fn rock_vs_rock_is_a_tie() {
        let g = make_team_rps();
        let rock1 = SharedPolicy::new(Team::One, vec![1.0, 0.0]).unwrap();
        let rock2 = SharedPolicy::new(Team::Two, vec![1.0, 0.0]).unwrap();
        let u = build_restricted_matrix(&g, &[rock1.into()], &[rock2.into()]).unwrap();
        assert_eq!(u.rows(), &[vec![0.0]]);
    }

    #[test]
    fn appending_keeps_old_entries() {
        let g = make_hetero_matrix_game();
        let p1 = vec![JointPolicy::uniform(&g, Team::One), JointPolicy::pure(&g, Team::One, 1).unwrap()];
        let mut p2 = vec![JointPolicy::uniform(&g, Team::Two)];
        let mut u = RestrictedPayoffMatrix::from_joint(&g, &p1, &p2).unwrap();
        let before = u.clone();
        let extra = JointPolicy::pure(&g, Team::Two, 2).unwrap();
        u.append_col(&g, &p1, &extra).unwrap();
        p2.push(extra);
        let new_row = JointPolicy::pure(&g, Team::One, 3).unwrap();
        u.append_row(&g, &new_row, &p2).unwrap();
        for i in 0..2 {
            assert_eq!(u.entry(i, 0).to_bits(), before.entry(i, 0).to_bits());
        }
        assert_eq!((u.num_rows(), u.num_cols()), (3, 2));
        assert_eq!(u.row_ids(), &[0, 1, 2]);
    }

    #[test]
    fn wrong_team_in_population() {
        let g = make_team_rps();
        let p = JointPolicy::uniform(&g, Team::Two);
        assert!(build_restricted_matrix(&g, &[p.clone().into()], &[p.into()]).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(RestrictedPayoffMatrix::from_rows(vec![vec![f64::INFINITY]]).is_err());
    }
}
