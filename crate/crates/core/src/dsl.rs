//! Line-based circuit text format and JSON persistence.
//!
//! ```text
//! circuit 2 -> 2
//! # comments run to the end of the line
//! ps 0 pi/2
//! bs 0 pi/4
//! ---
//! source 1 @ 2 { 1: 1.0 }
//! detector 1 { 0: 1.0 }
//! ```
//!
//! Wire numbers refer to the wires entering the current column. A statement
//! that overlaps one already in the column opens a new column; `---` opens
//! one explicitly. `source k` without `@` appends below every wire and
//! `detector k` without `@` reads the last `k` wires.

use crate::angle::Angle;
use crate::circuit::{Circuit, Column, Generator};
use crate::error::ParseError;
use crate::expr;
use crate::fock::{DualFockVector, FockVector};

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn semantic(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Semantic {
        line,
        message: message.into(),
    }
}

fn parse_angle(text: &str, line: usize) -> Result<Angle, ParseError> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        if format!("{v:?}") == text {
            return Ok(Angle::new(v));
        }
    }
    let v = expr::eval_real(text).map_err(|e| syntax(line, e))?;
    Ok(Angle::with_expr(v, text))
}

fn parse_index(text: &str, line: usize) -> Result<usize, ParseError> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| syntax(line, format!("expected a wire index, found `{}`", text.trim())))
}

/// Strip comments and join brace blocks spanning several lines.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some((start, mut acc)) = pending.take() {
            acc.push(' ');
            acc.push_str(line);
            if line.contains('}') {
                out.push((start, acc));
            } else {
                pending = Some((start, acc));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if line.contains('{') && !line.contains('}') {
            pending = Some((i + 1, line.to_string()));
        } else {
            out.push((i + 1, line.to_string()));
        }
    }
    if let Some(p) = pending {
        out.push(p);
    }
    out
}

struct Builder {
    n_in: usize,
    columns: Vec<Column>,
    current: Column,
    width: usize,
}

impl Builder {
    fn flush(&mut self) {
        if !self.current.is_identity() {
            let col = std::mem::take(&mut self.current);
            self.width = (self.width as isize + col.width_delta()) as usize;
            self.columns.push(col);
        }
    }

    fn add(&mut self, g: Generator, line: usize) -> Result<(), ParseError> {
        if !self.current.accepts(&g) {
            self.flush();
        }
        let end = match g {
            Generator::Source { .. } => g.wire(),
            _ => g.wire() + g.arity_in(),
        };
        if end > self.width {
            return Err(semantic(
                line,
                format!(
                    "{} at wire {} needs wire {} but the column has {} wires",
                    g.name(),
                    g.wire(),
                    end.max(1) - 1,
                    self.width
                ),
            ));
        }
        self.current.push(g);
        Ok(())
    }
}

/// Parse circuit text.
pub fn parse_dsl(text: &str) -> Result<Circuit, ParseError> {
    let lines = logical_lines(text);
    let mut iter = lines.into_iter();
    let (hline, header) = iter
        .next()
        .ok_or_else(|| syntax(1, "missing `circuit <n> -> <m>` header"))?;
    let rest = header
        .strip_prefix("circuit")
        .ok_or_else(|| syntax(hline, "expected `circuit <n> -> <m>`"))?;
    let (a, b) = rest
        .split_once("->")
        .ok_or_else(|| syntax(hline, "expected `circuit <n> -> <m>`"))?;
    let n_in = parse_index(a, hline)?;
    let n_out = parse_index(b, hline)?;
    let mut bld = Builder {
        n_in,
        columns: Vec::new(),
        current: Column::default(),
        width: n_in,
    };
    for (ln, line) in iter {
        if line.chars().all(|c| c == '-') {
            bld.flush();
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((&line, ""));
        let rest = rest.trim();
        let g = match kw {
            "ps" | "bs" => {
                let (w, ang) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| syntax(ln, format!("`{kw}` needs a wire and an angle")))?;
                let wire = parse_index(w, ln)?;
                let angle = parse_angle(ang, ln)?;
                if kw == "ps" {
                    Generator::PhaseShifter { wire, phi: angle }
                } else {
                    Generator::BeamSplitter { wire, theta: angle }
                }
            }
            "swap" => Generator::Swap {
                wire: parse_index(rest, ln)?,
            },
            "source" | "detector" => {
                let brace = rest
                    .find('{')
                    .ok_or_else(|| syntax(ln, format!("`{kw}` needs a `{{ ... }}` state")))?;
                let (head, body) = rest.split_at(brace);
                let (k, at) = match head.split_once('@') {
                    Some((k, at)) => (parse_index(k, ln)?, Some(parse_index(at, ln)?)),
                    None => (parse_index(head, ln)?, None),
                };
                if k == 0 {
                    return Err(semantic(ln, format!("{kw} must have at least one mode")));
                }
                let state = FockVector::parse_text(k, body).map_err(|e| syntax(ln, e))?;
                if kw == "source" {
                    if at.is_none() {
                        // A bottom insertion point follows the column that receives it.
                        let probe = Generator::Source {
                            wire: bld.width,
                            state: FockVector::zero(k),
                        };
                        if !bld.current.accepts(&probe) {
                            bld.flush();
                        }
                    }
                    Generator::Source {
                        wire: at.unwrap_or(bld.width),
                        state,
                    }
                } else {
                    let wire = match at {
                        Some(w) => w,
                        None => bld.width.checked_sub(k).ok_or_else(|| {
                            semantic(ln, format!("detector reads {k} wires but only {} exist", bld.width))
                        })?,
                    };
                    Generator::Detector {
                        wire,
                        effect: DualFockVector::from_coefficients(state),
                    }
                }
            }
            other => return Err(syntax(ln, format!("unknown statement `{other}`"))),
        };
        bld.add(g, ln)?;
    }
    bld.flush();
    let c = Circuit::new(bld.n_in, bld.columns)?;
    if c.n_out() != n_out {
        return Err(semantic(
            hline,
            format!("header declares {n_out} outputs but the circuit has {}", c.n_out()),
        ));
    }
    Ok(c)
}

/// Render circuit text. Every column is separated by `---` and every
/// placement is explicit, so parsing the result gives back the same circuit.
pub fn print_dsl(c: &Circuit) -> String {
    let mut out = format!("circuit {} -> {}\n", c.n_in(), c.n_out());
    for (i, col) in c.columns().iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        for g in col.generators() {
            let line = match g {
                Generator::PhaseShifter { wire, phi } => format!("ps {wire} {phi}"),
                Generator::BeamSplitter { wire, theta } => format!("bs {wire} {theta}"),
                Generator::Swap { wire } => format!("swap {wire}"),
                Generator::Source { wire, state } => {
                    format!("source {} @ {wire} {state}", state.modes())
                }
                Generator::Detector { wire, effect } => {
                    format!("detector {} @ {wire} {effect}", effect.modes())
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

pub fn to_json(c: &Circuit) -> String {
    serde_json::to_string_pretty(c).expect("circuits always serialize")
}

pub fn from_json(text: &str) -> Result<Circuit, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
}

/// Accept either format: JSON when the text starts with `{`.
pub fn parse_any(text: &str) -> Result<Circuit, ParseError> {
    if text.trim_start().starts_with('{') {
        from_json(text)
    } else {
        parse_dsl(text)
    }
}
