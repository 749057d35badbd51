//! Equilibrium computation for two-team zero-sum normal-form games.
//!
//! Teams coordinate ex ante: a team strategy is a distribution over the
//! team's joint actions, and the target solution concept is the team-maxmin
//! equilibrium with correlation (TMECor). The crate provides
//!
//! * game and policy types ([`game`]), built-in benchmarks ([`games`]) and a
//!   text file format ([`format`]);
//! * best-response oracles ([`oracles`]), including the sequential
//!   heterogeneous oracle used by H-PSRO;
//! * an exact zero-sum meta-solver ([`meta`]);
//! * the population loop with H-PSRO, Team PSRO, joint PSRO, Indep-PSRO,
//!   Self Play and FSP ([`engine`]);
//! * exact exploitability and a full-game TMECor oracle ([`eval`]);
//! * a versioned text trace format ([`trace`]).

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod eval;
pub mod format;
pub mod game;
pub mod games;
mod lp;
pub mod meta;
pub mod oracles;
pub mod trace;

pub use engine::{induced_joint_pair, run, Algorithm, InitialPolicy, RunConfig, RunTrace, Termination};
pub use error::{Error, Result};
pub use eval::{exploitability, project_team_rps, solve_full_tmecor};
pub use game::{expected_payoff, to_joint, JointPolicy, ProductPolicy, SharedPolicy, Team, TeamGame, TeamPolicy};
pub use oracles::BroConfig;
