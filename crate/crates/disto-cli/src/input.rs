//! File loading with path and position in every error message.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use disto::graph::DigraphJson;
use disto::logic::{parse_formula, parse_mu, Formula, MuSystem};
use disto::{Digraph, Error};

use crate::SCHEMA;

#[derive(Debug)]
pub struct InputError(String);

impl InputError {
    pub fn at(path: &Path, e: impl fmt::Display) -> Self {
        InputError(format!("{}: {e}", path.display()))
    }

    pub fn plain(e: impl fmt::Display) -> Self {
        InputError(e.to_string())
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn read_text(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError::at(path, e))
}

/// Parses a JSON file. An optional top-level `"schema"` key must name the
/// supported format version.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| InputError::at(path, e))?;
    if let Some(s) = v.get("schema") {
        if s != SCHEMA {
            return Err(InputError::at(path, format!("format version {s} is not supported (expected \"{SCHEMA}\")")));
        }
    }
    serde_json::from_str(&text).map_err(|e| InputError::at(path, e))
}

pub fn read_digraph(path: &Path) -> Result<(Digraph, Option<usize>), InputError> {
    let j: DigraphJson = read_json(path)?;
    Digraph::from_json(&j).map_err(|e| InputError::at(path, e))
}

/// `line:column` (1-based) of a byte offset.
fn position(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn syntax(path: &Path, text: &str, e: Error) -> InputError {
    match e {
        Error::Syntax { pos, msg } => {
            let (line, col) = position(text, pos);
            InputError(format!("{}:{line}:{col}: {msg}", path.display()))
        }
        e => InputError::at(path, e),
    }
}

pub fn read_formula(path: &Path) -> Result<Formula, InputError> {
    let text = read_text(path)?;
    parse_formula(&text).map_err(|e| syntax(path, &text, e))
}

pub fn read_mu(path: &Path) -> Result<MuSystem, InputError> {
    let text = read_text(path)?;
    parse_mu(&text).map_err(|e| syntax(path, &text, e))
}
