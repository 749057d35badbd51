//! Line-oriented text formats for games and joint policies.
//!
//! Game files (`teamgame v1`):
//!
//! ```text
//! teamgame v1
//! name hetero_matrix
//! team1 0 1 | 0 2
//! team2 0 1 | 0 3
//! payoff
//! 1.0 4.0 3.0 6.0
//! 4.0 2.0 1.0 4.0
//! -1.0 2.0 1.0 4.0
//! -3.0 0.0 -1.0 2.0
//! ```
//!
//! Each `teamN` line lists the action labels of every player, players
//! separated by `|`. After `payoff` come the team-1 payoffs, one row per
//! team-1 joint action in mixed-radix order (first player most significant),
//! one column per team-2 joint action. Blank lines and lines starting with `#`
//! are ignored. The `name` line is optional.
//!
//! Joint policy files (`jointpolicy v1`):
//!
//! ```text
//! jointpolicy v1
//! team 1
//! probs 0.81 0.09 0.09 0.01
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{JointPolicy, Team, TeamGame};

pub const GAME_HEADER: &str = "teamgame v1";
pub const POLICY_HEADER: &str = "jointpolicy v1";

struct Token<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

/// Meaningful lines as token lists, skipping blanks and comments.
fn tokenize(text: &str) -> Vec<Vec<Token<'_>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    tokens.push(Token {
                        line: n + 1,
                        column: line[..s].chars().count() + 1,
                        text: &line[s..i],
                    });
                    start = None;
                }
                _ => {}
            }
        }
        out.push(tokens);
    }
    out
}

fn check_header(lines: &[Vec<Token<'_>>], header: &str) -> Result<()> {
    let expected: Vec<&str> = header.split(' ').collect();
    match lines.first() {
        None => Err(Error::parse(1, 1, format!("empty input, expected `{header}`"))),
        Some(first) => {
            let words: Vec<&str> = first.iter().map(|t| t.text).collect();
            if words == expected {
                Ok(())
            } else if words.first() == Some(&expected[0]) && words.len() == 2 {
                Err(Error::parse(
                    first[1].line,
                    first[1].column,
                    format!("unsupported version `{}`", words[1]),
                ))
            } else {
                Err(Error::parse(first[0].line, first[0].column, format!("expected header `{header}`")))
            }
        }
    }
}

fn parse_float(tok: &Token<'_>) -> Result<f64> {
    tok.text
        .parse::<f64>()
        .map_err(|_| Error::parse(tok.line, tok.column, format!("`{}` is not a number", tok.text)))
}

fn parse_team_line(tokens: &[Token<'_>]) -> Result<Vec<Vec<String>>> {
    let key = &tokens[0];
    let mut players = vec![Vec::new()];
    let mut last = key;
    for tok in &tokens[1..] {
        last = tok;
        if tok.text == "|" {
            if players.last().is_some_and(Vec::is_empty) {
                return Err(Error::parse(tok.line, tok.column, "player with no actions"));
            }
            players.push(Vec::new());
        } else {
            players.last_mut().unwrap().push(tok.text.to_string());
        }
    }
    if players.last().is_some_and(Vec::is_empty) {
        return Err(Error::parse(
            last.line,
            last.column + last.text.chars().count(),
            format!("`{}` needs at least one action label per player", key.text),
        ));
    }
    Ok(players)
}

/// Parses a `teamgame v1` document.
pub fn parse_game(text: &str) -> Result<TeamGame> {
    let lines = tokenize(text);
    check_header(&lines, GAME_HEADER)?;
    let mut name: Option<String> = None;
    let mut teams: [Option<Vec<Vec<String>>>; 2] = [None, None];
    let mut payoff: Option<Vec<f64>> = None;
    let raw_lines: Vec<&str> = text.lines().collect();

    let mut idx = 1;
    while idx < lines.len() {
        let tokens = &lines[idx];
        let key = &tokens[0];
        let duplicate = || Error::parse(key.line, key.column, format!("duplicate `{}` section", key.text));
        match key.text {
            "name" => {
                if name.is_some() {
                    return Err(duplicate());
                }
                if tokens.len() < 2 {
                    return Err(Error::parse(key.line, key.column, "`name` needs a value"));
                }
                let raw = raw_lines[key.line - 1];
                let start = raw.char_indices().nth(tokens[1].column - 1).map_or(raw.len(), |(i, _)| i);
                name = Some(raw[start..].trim_end().to_string());
            }
            "team1" | "team2" => {
                let slot = &mut teams[if key.text == "team1" { 0 } else { 1 }];
                if slot.is_some() {
                    return Err(duplicate());
                }
                *slot = Some(parse_team_line(tokens)?);
            }
            "payoff" => {
                if tokens.len() > 1 {
                    return Err(Error::parse(tokens[1].line, tokens[1].column, "payoff rows start on the next line"));
                }
                let mut values = Vec::new();
                for row in &lines[idx + 1..] {
                    for tok in row {
                        values.push(parse_float(tok)?);
                    }
                }
                payoff = Some(values);
                idx = lines.len();
                continue;
            }
            other => {
                return Err(Error::parse(key.line, key.column, format!("unknown section `{other}`")));
            }
        }
        idx += 1;
    }

    let eof_line = raw_lines.len().max(1);
    let [team1, team2] = teams;
    let team1 = team1.ok_or_else(|| Error::parse(eof_line, 1, "missing `team1` line"))?;
    let team2 = team2.ok_or_else(|| Error::parse(eof_line, 1, "missing `team2` line"))?;
    let payoff = payoff.ok_or_else(|| Error::parse(eof_line, 1, "missing `payoff` section"))?;

    let counts1 = team1.iter().map(Vec::len).collect();
    let counts2 = team2.iter().map(Vec::len).collect();
    let game = TeamGame::new(counts1, counts2, payoff)?.with_labels(team1, team2)?;
    Ok(match name {
        Some(n) => game.with_name(n),
        None => game,
    })
}

fn write_team_line(out: &mut String, key: &str, labels: &[Vec<String>]) {
    out.push_str(key);
    for (p, player) in labels.iter().enumerate() {
        if p > 0 {
            out.push_str(" |");
        }
        for label in player {
            out.push(' ');
            out.push_str(label);
        }
    }
    out.push('\n');
}

/// Renders a game as a `teamgame v1` document. Floats use Rust's shortest
/// round-trip representation, so `parse_game` recovers identical bits.
pub fn serialize_game(game: &TeamGame) -> String {
    let mut out = String::new();
    out.push_str(GAME_HEADER);
    out.push('\n');
    if let Some(name) = game.name() {
        let _ = writeln!(out, "name {}", name.lines().next().unwrap_or("").trim());
    }
    write_team_line(&mut out, "team1", game.action_labels(Team::One));
    write_team_line(&mut out, "team2", game.action_labels(Team::Two));
    out.push_str("payoff\n");
    let n2 = game.joint_action_count(Team::Two);
    for row in game.payoff_matrix().chunks(n2) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a `jointpolicy v1` document.
pub fn parse_joint_policy(text: &str) -> Result<JointPolicy> {
    let lines = tokenize(text);
    check_header(&lines, POLICY_HEADER)?;
    let mut team = None;
    let mut probs: Option<Vec<f64>> = None;
    let mut idx = 1;
    while idx < lines.len() {
        let tokens = &lines[idx];
        let key = &tokens[0];
        match key.text {
            "team" => {
                if team.is_some() {
                    return Err(Error::parse(key.line, key.column, "duplicate `team` line"));
                }
                let [_, value] = tokens.as_slice() else {
                    return Err(Error::parse(key.line, key.column, "`team` takes exactly one value"));
                };
                let n = value
                    .text
                    .parse::<usize>()
                    .ok()
                    .and_then(|n| Team::from_number(n).ok())
                    .ok_or_else(|| Error::parse(value.line, value.column, "team must be 1 or 2"))?;
                team = Some(n);
            }
            "probs" => {
                let mut values = Vec::new();
                for tok in tokens[1..].iter().chain(lines[idx + 1..].iter().flatten()) {
                    values.push(parse_float(tok)?);
                }
                probs = Some(values);
                break;
            }
            other => {
                return Err(Error::parse(key.line, key.column, format!("unknown key `{other}`")));
            }
        }
        idx += 1;
    }
    let eof_line = text.lines().count().max(1);
    let team = team.ok_or_else(|| Error::parse(eof_line, 1, "missing `team` line"))?;
    let probs = probs.ok_or_else(|| Error::parse(eof_line, 1, "missing `probs` line"))?;
    JointPolicy::new(team, probs)
}

pub fn serialize_joint_policy(policy: &JointPolicy) -> String {
    let cells: Vec<String> = policy.probs().iter().map(|v| format!("{v:?}")).collect();
    format!(
        "{POLICY_HEADER}\nteam {}\nprobs {}\n",
        policy.team().number(),
        cells.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{make_hetero_matrix_game, make_team_rps};

    #[test]
    fn builtin_games_round_trip() {
        for game in [make_team_rps(), make_hetero_matrix_game()] {
            let text = serialize_game(&game);
            assert_eq!(parse_game(&text).unwrap(), game);
            assert_eq!(serialize_game(&parse_game(&text).unwrap()), text);
        }
    }

    #[test]
    fn hand_written_file_parses() {
        let text = "# a comment\nteamgame v1\n\nteam1 x y\nteam2 p | q r\npayoff\n1 2\n3 4\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.player_action_counts(Team::Two), &[1, 2]);
        assert_eq!(g.payoff1(1, 0), 3.0);
        assert_eq!(g.name(), None);
    }

    #[test]
    fn entry_count_mismatch() {
        let mut text = String::from("teamgame v1\nteam1 a b | a b\nteam2 a b | a b\npayoff\n");
        for i in 0..15 {
            text.push_str(&format!("{i} "));
        }
        assert_eq!(
            parse_game(&text).unwrap_err(),
            Error::EntryCount { expected: 16, found: 15 }
        );
    }

    #[test]
    fn non_finite_payoff() {
        let text = "teamgame v1\nteam1 a b\nteam2 a\npayoff\n1\ninf\n";
        assert_eq!(parse_game(text).unwrap_err(), Error::NonFinite { index: 1 });
    }

    #[test]
    fn malformed_number_reports_position() {
        let text = "teamgame v1\nteam1 a b\nteam2 a\npayoff\n1\n  2x\n";
        assert_eq!(
            parse_game(text).unwrap_err(),
            Error::Parse { line: 6, column: 3, message: "`2x` is not a number".into() }
        );
    }

    #[test]
    fn header_and_section_errors() {
        assert!(matches!(parse_game(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_game("teamgame v2\n"),
            Err(Error::Parse { line: 1, column: 10, .. })
        ));
        assert!(matches!(
            parse_game("teamgame v1\nteam1 a\nbogus 1\n"),
            Err(Error::Parse { line: 3, column: 1, .. })
        ));
        assert!(matches!(
            parse_game("teamgame v1\nteam1 a\nteam1 a\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_game("teamgame v1\nteam1 a | | b\nteam2 a\npayoff\n0 0\n"),
            Err(Error::Parse { line: 2, column: 11, .. })
        ));
        assert!(matches!(
            parse_game("teamgame v1\nteam1 a\npayoff\n0\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn duplicate_labels() {
        let text = "teamgame v1\nteam1 a a\nteam2 b\npayoff\n0 0\n";
        assert!(matches!(parse_game(text), Err(Error::DuplicateLabel { team: 1, player: 1, .. })));
    }

    #[test]
    fn name_keeps_inner_spaces() {
        let text = "teamgame v1\nname my  game\nteam1 a\nteam2 b\npayoff\n-0.0\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.name(), Some("my  game"));
        assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
    }

    #[test]
    fn joint_policy_round_trip_and_errors() {
        let p = JointPolicy::new(Team::Two, vec![0.81, 0.09, 0.09, 0.01]).unwrap();
        assert_eq!(parse_joint_policy(&serialize_joint_policy(&p)).unwrap(), p);
        assert!(matches!(
            parse_joint_policy("jointpolicy v1\nteam 3\nprobs 1\n"),
            Err(Error::Parse { line: 2, column: 6, .. })
        ));
        assert!(matches!(
            parse_joint_policy("jointpolicy v1\nteam 1\nprobs 0.5 0.6\n"),
            Err(Error::InvalidPolicy(_))
        ));
    }
}
