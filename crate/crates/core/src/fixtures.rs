//! Printed formulas, transcribed as text and kept apart from the code that
//! derives the same quantities.
//!
//! ```text
//! [section]
//! id : pass := expression
//! id : finding := long expression
//!     continued on indented lines
//! ```
//!
//! The annotation records what the comparison is expected to produce: `pass`
//! for a printed form that agrees with recomputation, `finding` for one
//! that does not. Identifiers of the form `base_idx` (for example `a_jk`,
//! `sigmaup_i`) are tensor components with free indices `i`, `j`, `k`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use symcore::{parse_expr, RatExpr, Sym, SymKind, SymbolTable};

use crate::error::{CoreError, Result};

pub const BUNDLED: &str = include_str!("../fixtures/printed.fx");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Pass,
    Finding,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expect::Pass => "pass",
            Expect::Finding => "finding",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub section: String,
    pub id: String,
    pub expect: Expect,
    pub text: String,
    pub line: usize,
}

impl Fixture {
    /// `section.id`.
    pub fn key(&self) -> String {
        format!("{}.{}", self.section, self.id)
    }
}

#[derive(Clone, Debug)]
pub struct FixtureSet {
    items: Vec<Fixture>,
    index: HashMap<String, usize>,
}

/// Tensor bases accepted with an index suffix.
const INDEXED: &[&str] = &[
    "a", "ainv", "b", "bup", "sigma", "sigmaup", "cov", "r", "s", "sup", "gamma", "delta", "y",
];

/// Metric-level placeholders, replaced by the derived formulas before use.
pub const METRIC_NAMES: &[&str] = &["L", "La", "Lb", "Laa", "Laaa", "Omega", "bigA", "bigB", "Cstar", "Dstar"];

fn fixture_err(name: &str, message: impl Into<String>) -> CoreError {
    CoreError::Fixture { name: name.into(), message: message.into() }
}

fn identifiers(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        let ident = c.is_ascii_alphanumeric() || c == '_';
        match (start, ident) {
            (None, true) if c.is_ascii_alphabetic() => start = Some(i),
            (Some(s), false) => {
                out.push(&text[s..i]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

fn is_indexed(name: &str) -> bool {
    name.rsplit_once('_').is_some_and(|(base, idx)| {
        INDEXED.contains(&base) && !idx.is_empty() && idx.chars().all(|c| "ijk".contains(c))
    })
}

/// Symbol table for fixture text over an `n`-dimensional space.
pub fn table_for(text: &str, n: usize) -> Result<SymbolTable> {
    let mut t = SymbolTable::full(n);
    t.add(Sym::intern("gamma00i", SymKind::Vector, 2)?);
    for name in METRIC_NAMES {
        t.add_placeholder(name)?;
    }
    for id in identifiers(text) {
        if is_indexed(id) {
            t.add_placeholder(id)?;
        }
    }
    Ok(t)
}

impl FixtureSet {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled fixtures are well formed")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut items: Vec<Fixture> = Vec::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            if raw.starts_with([' ', '\t']) {
                let last = items
                    .last_mut()
                    .ok_or_else(|| fixture_err(&format!("line {line}"), "continuation before any entry"))?;
                last.text.push(' ');
                last.text.push_str(body.trim());
                continue;
            }
            let t = body.trim();
            if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = Some(name.trim().to_string());
                continue;
            }
            let (head, expr) = t
                .split_once(":=")
                .ok_or_else(|| fixture_err(&format!("line {line}"), "expected `id : pass|finding := expression`"))?;
            let (id, status) = head
                .split_once(':')
                .ok_or_else(|| fixture_err(&format!("line {line}"), "missing `: pass` or `: finding`"))?;
            let id = id.trim().to_string();
            let expect = match status.trim() {
                "pass" => Expect::Pass,
                "finding" => Expect::Finding,
                other => return Err(fixture_err(&id, format!("line {line}: unknown annotation `{other}`"))),
            };
            let section = section
                .clone()
                .ok_or_else(|| fixture_err(&id, format!("line {line}: entry outside a section")))?;
            items.push(Fixture { section, id, expect, text: expr.trim().to_string(), line });
        }
        let mut index = HashMap::new();
        for (k, f) in items.iter().enumerate() {
            if index.insert(f.key(), k).is_some() {
                return Err(fixture_err(&f.key(), format!("line {}: duplicate entry", f.line)));
            }
        }
        Ok(FixtureSet { items, index })
    }

    pub fn get(&self, key: &str) -> Result<&Fixture> {
        self.index
            .get(key)
            .map(|&k| &self.items[k])
            .ok_or_else(|| fixture_err(key, "missing from the fixture file"))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fixture> {
        self.items.iter()
    }

    pub fn section<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Fixture> + 'a {
        self.items.iter().filter(move |f| f.section == name)
    }

    /// Parses `key` in abstract mode over an `n`-dimensional space.
    pub fn expr(&self, key: &str, n: usize) -> Result<RatExpr> {
        let f = self.get(key)?;
        let table = table_for(&f.text, n)?;
        parse_expr(&f.text, &table).map_err(|e| fixture_err(&f.key(), e.to_string()))
    }
}

/// Replaces metric-level placeholders by the given expressions.
pub fn expand(e: &RatExpr, defs: &HashMap<&str, RatExpr>) -> Result<RatExpr> {
    let bindings: HashMap<Sym, RatExpr> = defs
        .iter()
        .filter_map(|(name, v)| Sym::lookup(name).map(|s| (s, v.clone())))
        .collect();
    Ok(e.substitute(&bindings)?)
}
