//! Text interchange format for empirical models.
//!
//! ```text
//! stochbell-model v1
//! provenance analytic                  # or: provenance sampled shots=1000 seed=7
//! setting a +1 -1
//! setting b +1 -1
//! context a b : 1/2 0 0 1/2
//! ```
//!
//! `#` starts a comment. Settings must be declared before the contexts that
//! use them. Table entries are listed in mixed-radix order over the context
//! as written (last setting fastest) and are exact decimals or `p/q`
//! rationals, so printing then parsing reproduces a model exactly.

use std::fmt::Write as _;

use super::model::{EmpiricalModel, Provenance};
use super::model::{ENTRY_TOL, SUM_TOL};
use super::rational::{format_number, parse_number, to_f64};
use super::scenario::{fmt_outcome, Scenario};
use crate::error::{Error, Result};

pub const HEADER: &str = "stochbell-model v1";

pub fn print_model(model: &EmpiricalModel) -> String {
    let scenario = model.scenario();
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    match model.provenance() {
        Provenance::Analytic => writeln!(out, "provenance analytic").unwrap(),
        Provenance::Sampled { shots, seed } => {
            writeln!(out, "provenance sampled shots={shots} seed={seed}").unwrap()
        }
    }
    for (i, name) in scenario.settings().iter().enumerate() {
        let outs: Vec<String> = scenario.outcomes(i).iter().map(|&o| fmt_outcome(o)).collect();
        writeln!(out, "setting {name} {}", outs.join(" ")).unwrap();
    }
    for (ctx, table) in scenario.contexts().iter().zip(model.exact_tables()) {
        let names: Vec<&str> = ctx.iter().map(|&s| scenario.settings()[s].as_str()).collect();
        let entries: Vec<String> = table.iter().map(format_number).collect();
        writeln!(out, "context {} : {}", names.join(" "), entries.join(" ")).unwrap();
    }
    out
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    tokens
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_key_u64(tok: &Token, key: &str, line: usize) -> Result<u64> {
    tok.text
        .strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err(line, tok.column, format!("expected {key}=<integer>")))
}

pub fn parse_model(text: &str) -> Result<EmpiricalModel> {
    let mut header_seen = false;
    let mut provenance: Option<Provenance> = None;
    let mut settings: Vec<String> = Vec::new();
    let mut outcomes: Vec<Vec<i64>> = Vec::new();
    let mut contexts: Vec<Vec<usize>> = Vec::new();
    let mut tables = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(first) = tokens.first() else {
            continue;
        };
        if !header_seen {
            if content.trim() != HEADER {
                return Err(err(line_no, first.column, format!("expected header {HEADER:?}")));
            }
            header_seen = true;
            continue;
        }
        match first.text {
            "provenance" => {
                if provenance.is_some() {
                    return Err(err(line_no, first.column, "duplicate provenance"));
                }
                let kind = tokens.get(1).ok_or_else(|| err(line_no, first.column, "missing provenance kind"))?;
                provenance = Some(match (kind.text, tokens.len()) {
                    ("analytic", 2) => Provenance::Analytic,
                    ("sampled", 4) => Provenance::Sampled {
                        shots: parse_key_u64(&tokens[2], "shots", line_no)?,
                        seed: parse_key_u64(&tokens[3], "seed", line_no)?,
                    },
                    _ => {
                        return Err(err(
                            line_no,
                            kind.column,
                            "expected `analytic` or `sampled shots=<n> seed=<n>`",
                        ))
                    }
                });
            }
            "setting" => {
                if !contexts.is_empty() {
                    return Err(err(line_no, first.column, "settings must precede contexts"));
                }
                let name = tokens.get(1).ok_or_else(|| err(line_no, first.column, "missing setting name"))?;
                if tokens.len() < 3 {
                    return Err(err(line_no, name.column, "setting needs at least one outcome"));
                }
                let outs = tokens[2..]
                    .iter()
                    .map(|t| t.text.parse::<i64>().map_err(|_| err(line_no, t.column, "outcome must be an integer")))
                    .collect::<Result<Vec<_>>>()?;
                settings.push(name.text.to_string());
                outcomes.push(outs);
            }
            "context" => {
                let colon = tokens
                    .iter()
                    .position(|t| t.text == ":")
                    .ok_or_else(|| err(line_no, first.column, "missing ':' between context and table"))?;
                let ctx = tokens[1..colon]
                    .iter()
                    .map(|t| {
                        settings
                            .iter()
                            .position(|s| s == t.text)
                            .ok_or_else(|| err(line_no, t.column, format!("unknown setting {:?}", t.text)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let expected: usize = ctx.iter().map(|&s| outcomes[s].len()).product();
                let entries = &tokens[colon + 1..];
                if entries.len() != expected {
                    let col = entries.first().map_or(tokens[colon].column, |t| t.column);
                    return Err(err(
                        line_no,
                        col,
                        format!("expected {expected} table entries, found {}", entries.len()),
                    ));
                }
                let table = entries
                    .iter()
                    .map(|t| parse_number(t.text).ok_or_else(|| err(line_no, t.column, format!("invalid number {:?}", t.text))))
                    .collect::<Result<Vec<_>>>()?;
                let floats: Vec<f64> = table.iter().map(to_f64).collect();
                let sum: f64 = floats.iter().sum();
                if (sum - 1.0).abs() > SUM_TOL {
                    return Err(err(line_no, entries[0].column, format!("table sums to {sum}, not 1")));
                }
                if let Some(pos) = floats.iter().position(|&x| x < -ENTRY_TOL) {
                    return Err(err(line_no, entries[pos].column, "negative probability"));
                }
                contexts.push(ctx);
                tables.push((line_no, table));
            }
            other => return Err(err(line_no, first.column, format!("unknown directive {other:?}"))),
        }
    }
    if !header_seen {
        return Err(err(last_line.max(1), 1, "empty document"));
    }
    let provenance = provenance.ok_or_else(|| err(last_line, 1, "missing provenance line"))?;
    let scenario = Scenario::new(settings, outcomes, contexts).map_err(|e| err(last_line, 1, e.to_string()))?;
    let first_table_line = tables.first().map_or(last_line, |t| t.0);
    let exact = tables.into_iter().map(|(_, t)| t).collect();
    EmpiricalModel::from_rationals(scenario, exact, provenance).map_err(|e| err(first_table_line, 1, e.to_string()))
}
