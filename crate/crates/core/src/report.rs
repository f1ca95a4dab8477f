//! Report documents: one per command invocation.
//!
//! The JSON form is the canonical one. The table form prints one
//! `path = value` line per leaf, values in JSON syntax, and parses back to
//! the same document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    /// Subcommand and the arguments that affect the result.
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub bound: Option<u64>,
    pub violations: Option<u64>,
    pub result: Value,
    /// Wall-clock milliseconds; left out unless asked for, since it is the
    /// one field that differs between otherwise identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>, result: impl Serialize) -> Result<Self> {
        Ok(ReportDocument {
            command: command.into(),
            parameters: BTreeMap::new(),
            bound: None,
            violations: None,
            result: to_value(result)?,
            timing_ms: None,
        })
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        self.parameters.insert(key.to_string(), to_value(value)?);
        Ok(self)
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_violations(mut self, n: u64) -> Self {
        self.violations = Some(n);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), reason: e.to_string() })
    }

    pub fn to_table(&self) -> String {
        let doc = serde_json::to_value(self).expect("report documents serialize");
        let mut out = String::new();
        flatten(&doc, &mut String::new(), &mut out);
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut root = Value::Object(Map::new());
        for (i, line) in text.lines().enumerate() {
            let err = |reason: String| Error::Parse { line: i + 1, reason };
            let (path, raw) = line.split_once(" = ").ok_or_else(|| err("expected `path = value`".into()))?;
            let value: Value = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            let segments = parse_path(path).ok_or_else(|| err(format!("bad path {path:?}")))?;
            insert(&mut root, &segments, value).map_err(err)?;
        }
        serde_json::from_value(root).map_err(|e| Error::Parse { line: 0, reason: e.to_string() })
    }
}

fn to_value(v: impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn flatten(v: &Value, path: &mut String, out: &mut String) {
    let len = path.len();
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, child) in m {
                if !path.is_empty() {
                    path.push('.');
                }
                path.push_str(k);
                flatten(child, path, out);
                path.truncate(len);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, child) in a.iter().enumerate() {
                let _ = write!(path, "[{i}]");
                flatten(child, path, out);
                path.truncate(len);
            }
        }
        leaf => {
            let _ = writeln!(out, "{path} = {leaf}");
        }
    }
}

enum Segment {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Option<Vec<Segment>> {
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = part.split_at(part.find('[').unwrap_or(part.len()));
        if key.is_empty() || key.contains(']') {
            return None;
        }
        out.push(Segment::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']')?;
            out.push(Segment::Index(rest.get(1..close)?.parse().ok()?));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return None;
            }
        }
    }
    Some(out)
}

fn insert(node: &mut Value, path: &[Segment], value: Value) -> std::result::Result<(), String> {
    let Some((head, rest)) = path.split_first() else {
        *node = value;
        return Ok(());
    };
    let fresh = || match rest.first() {
        Some(Segment::Index(_)) => Value::Array(Vec::new()),
        _ => Value::Object(Map::new()),
    };
    let child = match (head, node) {
        (Segment::Key(k), Value::Object(m)) => m.entry(k.clone()).or_insert_with(fresh),
        (Segment::Index(i), Value::Array(a)) => {
            if *i == a.len() {
                a.push(fresh());
            }
            a.get_mut(*i).ok_or_else(|| format!("array index {i} out of order"))?
        }
        _ => return Err("path conflicts with an earlier line".into()),
    };
    insert(child, rest, value)
}
