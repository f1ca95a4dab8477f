//! Persistent a_p cache.
//!
//! One record per line, UTF-8, LF-terminated:
//!
//! ```text
//! A,B|p|G|a_p     good reduction
//! A,B|p|B         bad reduction
//! ```
//!
//! Records are grouped by curve and sorted by p within each curve block.
//! Writing merges with whatever is already on disk; a record never
//! disappears, and two records for the same (curve, p) must agree.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::counting::FrobeniusRecord;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CachedKind {
    Good(i64),
    Bad,
}

impl CachedKind {
    pub fn from_record(r: &FrobeniusRecord) -> Self {
        match r.a_p() {
            Some(a) => CachedKind::Good(a),
            None => CachedKind::Bad,
        }
    }

    pub fn to_record(self, p: u64) -> Result<FrobeniusRecord> {
        match self {
            CachedKind::Good(a) => FrobeniusRecord::from_trace(p, a),
            CachedKind::Bad => Ok(FrobeniusRecord::bad(p)),
        }
    }

    fn describe(&self) -> String {
        match self {
            CachedKind::Good(a) => format!("G|{a}"),
            CachedKind::Bad => "B".to_string(),
        }
    }
}

/// In-memory view of a cache file, keyed by curve id then p.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApCache {
    curves: BTreeMap<String, BTreeMap<u64, CachedKind>>,
}

impl ApCache {
    pub fn get(&self, curve: &str, p: u64) -> Option<CachedKind> {
        self.curves.get(curve)?.get(&p).copied()
    }

    /// Adds a record; an existing record for the same key must agree.
    pub fn insert(&mut self, curve: &str, p: u64, kind: CachedKind) -> Result<()> {
        let block = self.curves.entry(curve.to_string()).or_default();
        match block.get(&p) {
            Some(existing) if *existing != kind => Err(Error::CacheConflict {
                curve: curve.to_string(),
                p,
                existing: existing.describe(),
                incoming: kind.describe(),
            }),
            Some(_) => Ok(()),
            None => {
                block.insert(p, kind);
                Ok(())
            }
        }
    }

    pub fn merge(&mut self, other: &ApCache) -> Result<()> {
        for (curve, block) in &other.curves {
            for (&p, &kind) in block {
                self.insert(curve, p, kind)?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.curves.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64, CachedKind)> {
        self.curves
            .iter()
            .flat_map(|(c, block)| block.iter().map(move |(&p, &k)| (c.as_str(), p, k)))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cache = ApCache::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: &str| Error::Parse { line: line_no, reason: reason.to_string() };
            let fields: Vec<&str> = line.split('|').collect();
            let (curve, p, kind) = match fields.as_slice() {
                [curve, p, "B"] => (*curve, *p, CachedKind::Bad),
                [curve, p, "G", a] => {
                    let a = a.parse::<i64>().map_err(|_| err("a_p is not an integer"))?;
                    (*curve, *p, CachedKind::Good(a))
                }
                _ => return Err(err("expected A,B|p|G|a_p or A,B|p|B")),
            };
            let canonical = curve
                .parse::<crate::curve::CurveQ>()
                .map_err(|e| err(&e.to_string()))?
                .id();
            if canonical != curve {
                return Err(err("curve id is not in canonical form"));
            }
            let p = p.parse::<u64>().map_err(|_| err("p is not an integer"))?;
            if let CachedKind::Good(_) = kind {
                kind.to_record(p).map_err(|e| err(&e.to_string()))?;
            }
            cache.insert(curve, p, kind).map_err(|e| err(&e.to_string()))?;
        }
        Ok(cache)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (curve, p, kind) in self.iter() {
            let _ = writeln!(out, "{curve}|{p}|{}", kind.describe());
        }
        out
    }
}

/// Reads a cache file. A missing file is an empty cache.
pub fn cache_read(path: &Path) -> Result<ApCache> {
    match fs::read_to_string(path) {
        Ok(text) => ApCache::parse(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ApCache::default()),
        Err(e) => Err(e.into()),
    }
}

/// Merges `records` into the file at `path`. Nothing is written on conflict.
pub fn cache_write(path: &Path, records: &ApCache) -> Result<()> {
    let mut merged = cache_read(path)?;
    merged.merge(records)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(merged.render().as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
