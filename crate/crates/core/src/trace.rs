//! `trace v1`: the on-disk form of a [`RunTrace`].
//!
//! A block of `key value` header lines is followed by tab-separated tables,
//! each introduced by a `[section]` line and a column-name line:
//!
//! * `[iterations]`: one row per iteration with population sizes, restricted
//!   value, best-response values and gaps, exploitability, appended population
//!   indices (`-` for none) and oracle seeds;
//! * `[meta]`: `iteration team weight...`;
//! * `[population]`: `team index added_at kind coords...`, where product
//!   policies separate players with `|`;
//! * `[trajectory]`: `iteration team coord...` (only when recorded).
//!
//! The second line is `timestamp <unix seconds>` (or `timestamp none`). It is
//! the only line that depends on when the run happened; wall-clock durations
//! are not written.

use std::fmt::Write as _;

use crate::engine::{InitialPolicy, RunTrace};
use crate::game::{Team, TeamPolicy};

pub const TRACE_HEADER: &str = "trace v1";

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn policy_coords(policy: &TeamPolicy) -> String {
    let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join("\t");
    match policy {
        TeamPolicy::Joint(p) => join(p.probs()),
        TeamPolicy::Shared(p) => join(p.probs()),
        TeamPolicy::Product(p) => p
            .players()
            .iter()
            .map(|v| join(v))
            .collect::<Vec<_>>()
            .join("\t|\t"),
    }
}

/// Renders a trace. `timestamp` is written verbatim on the second line.
pub fn render_trace(trace: &RunTrace, timestamp: Option<u64>) -> String {
    let c = &trace.config;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} {v}");
    };
    kv("trace", "v1".into());
    kv("timestamp", timestamp.map_or("none".into(), |t| t.to_string()));
    kv("game", trace.game_name.clone().unwrap_or_else(|| "-".into()));
    kv("algorithm", c.algorithm.name().into());
    kv("seed", c.seed.to_string());
    kv("max_iterations", c.max_iterations.to_string());
    kv("br_gap_tolerance", fmt_f64(c.br_gap_tolerance));
    kv(
        "initial",
        match c.initial {
            InitialPolicy::Auto => "auto".into(),
            InitialPolicy::Uniform => "uniform".into(),
            InitialPolicy::SharedPure(k) => format!("shared:{k}"),
        },
    );
    kv("record_trajectories", c.record_trajectories.to_string());
    kv("bro.max_sweeps", c.bro.max_sweeps.to_string());
    kv("bro.restarts", c.bro.restarts.to_string());
    kv("bro.improvement_tolerance", fmt_f64(c.bro.improvement_tolerance));
    kv("bro.permutation_seed", c.bro.permutation_seed.to_string());
    kv("bro.shared_grid_points", c.bro.shared_grid_points.to_string());
    kv("bro.shared_refinement_tolerance", fmt_f64(c.bro.shared_refinement_tolerance));
    kv("bro.exact_mode_threshold", c.bro.exact_mode_threshold.to_string());
    kv("termination", trace.termination.name().into());
    kv("total_iterations", trace.total_iterations().to_string());
    kv("final_exploitability", fmt_f64(trace.final_exploitability()));

    out.push_str("[iterations]\n");
    out.push_str(
        "iteration\tpop1\tpop2\trestricted_value\tbr_value1\tbr_value2\tbr_gap1\tbr_gap2\texploitability\tappended1\tappended2\tbro_seed1\tbro_seed2\n",
    );
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |i| i.to_string());
    for r in &trace.iterations {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.iteration,
            r.population_sizes[0],
            r.population_sizes[1],
            fmt_f64(r.restricted_value),
            fmt_f64(r.br_values[0]),
            fmt_f64(r.br_values[1]),
            fmt_f64(r.br_gaps[0]),
            fmt_f64(r.br_gaps[1]),
            fmt_f64(r.exploitability),
            opt(r.appended[0]),
            opt(r.appended[1]),
            r.bro_seeds[0],
            r.bro_seeds[1],
        );
    }

    out.push_str("[meta]\niteration\tteam\tweights\n");
    for r in &trace.iterations {
        for team in Team::BOTH {
            let w: Vec<String> = r.meta[team.index()].iter().map(|x| fmt_f64(*x)).collect();
            let _ = writeln!(out, "{}\t{}\t{}", r.iteration, team.number(), w.join("\t"));
        }
    }

    out.push_str("[population]\nteam\tindex\tadded_at\tkind\tcoords\n");
    for team in Team::BOTH {
        let k = team.index();
        for (i, p) in trace.populations[k].iter().enumerate() {
            let added_at = trace
                .iterations
                .iter()
                .find(|r| r.appended[k] == Some(i))
                .map_or(0, |r| r.iteration);
            let _ = writeln!(out, "{}\t{i}\t{added_at}\t{}\t{}", team.number(), p.kind(), policy_coords(p));
        }
    }

    if trace.iterations.iter().all(|r| r.trajectory.is_some()) {
        out.push_str("[trajectory]\niteration\tteam\tcoords\n");
        for r in &trace.iterations {
            let pair = r.trajectory.as_ref().unwrap();
            for team in Team::BOTH {
                let c: Vec<String> = pair[team.index()].iter().map(|x| fmt_f64(*x)).collect();
                let _ = writeln!(out, "{}\t{}\t{}", r.iteration, team.number(), c.join("\t"));
            }
        }
    }
    out
}
