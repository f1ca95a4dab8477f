//! Supersingular and ordinary congruence surveys.
//!
//! Nothing here proves a statement about almost all primes. Every entry
//! carries the bound it was computed up to, and "almost all" is read as
//! "no violation above an exclusion threshold".

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cache::ApCache;
use crate::counting::{frobenius_scan, frobenius_scan_cached, FrobeniusRecord, ScanConfig};
use crate::curve::CurveQ;
use crate::error::{Error, Result};
use crate::galois::CongruencePair;
use crate::primes::PrimeRange;

pub const DEFAULT_EXCLUSION_THRESHOLD: u64 = 3;
pub const MAX_LISTED_VIOLATIONS: usize = 20;
pub const EVIDENCE_LABEL: &str = "evidence up to bound";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurveyMode {
    Supersingular,
    Ordinary,
    All,
}

impl SurveyMode {
    pub fn admits(self, r: &FrobeniusRecord) -> bool {
        match (self, r.is_supersingular()) {
            (_, Err(_)) => false,
            (SurveyMode::All, Ok(_)) => true,
            (SurveyMode::Supersingular, Ok(s)) => s,
            (SurveyMode::Ordinary, Ok(s)) => !s,
        }
    }
}

impl std::str::FromStr for SurveyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SurveyMode::All),
            "supersingular" => Ok(SurveyMode::Supersingular),
            "ordinary" => Ok(SurveyMode::Ordinary),
            _ => Err(Error::InvalidArgument(format!("mode must be all, supersingular or ordinary, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurveyConfig {
    pub scan: ScanConfig,
    /// Violations at p <= this are listed apart and do not count.
    pub exclusion_threshold: u64,
    /// Zero-violation entries need this many tested primes to make a d a candidate.
    pub min_tested: u64,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig { scan: ScanConfig::default(), exclusion_threshold: DEFAULT_EXCLUSION_THRESHOLD, min_tested: 2 }
    }
}

/// One (curve, d, alpha, mode) check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyEntry {
    pub curve: String,
    pub d: u64,
    pub alpha: u64,
    pub mode: SurveyMode,
    pub bound: u64,
    pub primes_tested: u64,
    pub matching: u64,
    pub violating: u64,
    /// Ascending, at most [`MAX_LISTED_VIOLATIONS`].
    pub violations: Vec<u64>,
    pub largest_violation: Option<u64>,
    pub excluded_violations: Vec<u64>,
    /// p mod d over the supersingular primes tested.
    pub supersingular_histogram: BTreeMap<u64, u64>,
    /// For a clean supersingular check with some tested p > d: gcd(alpha - 1, d) = 1.
    pub alpha_minus_one_coprime: Option<bool>,
}

impl SurveyEntry {
    pub fn holds(&self) -> bool {
        self.violating == 0
    }

    pub fn classes_hit(&self) -> usize {
        self.supersingular_histogram.len()
    }
}

/// Builds an entry from scanned records; records above `bound` are ignored.
pub fn entry_from_records(
    curve: &CurveQ,
    records: &[FrobeniusRecord],
    pair: CongruencePair,
    mode: SurveyMode,
    bound: u64,
    exclusion_threshold: u64,
) -> SurveyEntry {
    let d = pair.d();
    let mut tested = 0;
    let mut violations = Vec::new();
    let mut excluded = Vec::new();
    let mut ss_above_d = false;
    let mut ss_primes = Vec::new();
    for r in records.iter().filter(|r| r.p() <= bound && mode.admits(r)) {
        let count = r.count().expect("admitted records have good reduction");
        let p = r.p();
        if r.is_supersingular() == Ok(true) {
            ss_primes.push(p);
        }
        if p <= exclusion_threshold {
            if !pair.holds_for(count) {
                excluded.push(p);
            }
            continue;
        }
        tested += 1;
        if r.is_supersingular() == Ok(true) && p > d {
            ss_above_d = true;
        }
        if !pair.holds_for(count) {
            violations.push(p);
        }
    }
    let violating = violations.len() as u64;
    let largest_violation = violations.last().copied();
    violations.truncate(MAX_LISTED_VIOLATIONS);
    let coprime = (mode == SurveyMode::Supersingular && violating == 0 && ss_above_d)
        .then(|| ((pair.alpha() + d - 1) % d).gcd(&d) == 1);
    SurveyEntry {
        curve: curve.id(),
        d,
        alpha: pair.alpha(),
        mode,
        bound,
        primes_tested: tested,
        matching: tested - violating,
        violating,
        violations,
        largest_violation,
        excluded_violations: excluded,
        supersingular_histogram: residue_histogram(&ss_primes, d),
        alpha_minus_one_coprime: coprime,
    }
}

fn scan(e: &CurveQ, bound: u64, cfg: &ScanConfig, cache: Option<&mut ApCache>) -> Result<Vec<FrobeniusRecord>> {
    let range = PrimeRange::up_to(bound);
    match cache {
        Some(c) => frobenius_scan_cached(e, range, cfg, c),
        None => frobenius_scan(e, range, cfg),
    }
}

/// Good primes p <= bound with a_p = 0 mod p, ascending.
pub fn supersingular_primes(e: &CurveQ, bound: u64, cfg: &ScanConfig) -> Result<Vec<u64>> {
    Ok(scan(e, bound, cfg, None)?
        .iter()
        .filter(|r| r.is_supersingular() == Ok(true))
        .map(FrobeniusRecord::p)
        .collect())
}

pub fn condition_check(
    e: &CurveQ,
    pair: CongruencePair,
    bound: u64,
    mode: SurveyMode,
    cfg: &SurveyConfig,
    cache: Option<&mut ApCache>,
) -> Result<SurveyEntry> {
    let records = scan(e, bound, &cfg.scan, cache)?;
    Ok(entry_from_records(e, &records, pair, mode, bound, cfg.exclusion_threshold))
}

/// #E(F_p) = p + 1 = alpha (mod d) over supersingular primes.
pub fn s_condition_check(e: &CurveQ, pair: CongruencePair, bound: u64, cfg: &SurveyConfig) -> Result<SurveyEntry> {
    condition_check(e, pair, bound, SurveyMode::Supersingular, cfg, None)
}

/// #E(F_p) = alpha (mod d) over ordinary primes.
pub fn o_condition_check(e: &CurveQ, pair: CongruencePair, bound: u64, cfg: &SurveyConfig) -> Result<SurveyEntry> {
    condition_check(e, pair, bound, SurveyMode::Ordinary, cfg, None)
}

/// Counts of p mod d.
pub fn residue_histogram(primes: &[u64], d: u64) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for &p in primes {
        *h.entry(p % d).or_insert(0) += 1;
    }
    h
}

/// Euler's totient by trial division; euler_phi(0) is taken as 0.
pub fn euler_phi(mut n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut phi = n;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            while n.is_multiple_of(q) {
                n /= q;
            }
            phi -= phi / q;
        }
        q += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmLabel {
    LikelyCM,
    LikelyNonCM,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmThresholds {
    pub cm_low: f64,
    pub cm_high: f64,
    pub non_cm_below: f64,
}

impl Default for CmThresholds {
    fn default() -> Self {
        CmThresholds { cm_low: 0.4, cm_high: 0.6, non_cm_below: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmVerdict {
    pub supersingular: u64,
    pub good: u64,
    pub density: f64,
    pub verdict: CmLabel,
}

pub fn cm_verdict_from_records(records: &[FrobeniusRecord], th: &CmThresholds) -> CmVerdict {
    let good = records.iter().filter(|r| r.is_good()).count() as u64;
    let ss = records.iter().filter(|r| r.is_supersingular() == Ok(true)).count() as u64;
    if good == 0 {
        return CmVerdict { supersingular: 0, good: 0, density: 0.0, verdict: CmLabel::Inconclusive };
    }
    let density = ss as f64 / good as f64;
    let verdict = if (th.cm_low..=th.cm_high).contains(&density) {
        CmLabel::LikelyCM
    } else if density < th.non_cm_below {
        CmLabel::LikelyNonCM
    } else {
        CmLabel::Inconclusive
    };
    CmVerdict { supersingular: ss, good, density, verdict }
}

/// Supersingular density over the good primes up to `bound`.
pub fn cm_density(e: &CurveQ, bound: u64, cfg: &ScanConfig, th: &CmThresholds) -> Result<CmVerdict> {
    Ok(cm_verdict_from_records(&scan(e, bound, cfg, None)?, th))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFailure {
    pub curve: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub label: String,
    pub alpha: i64,
    pub d_max: u64,
    pub bound: u64,
    pub exclusion_threshold: u64,
    pub min_tested: u64,
    /// Sorted by d, then curve id, then mode.
    pub entries: Vec<SurveyEntry>,
    /// d with some curve clean on the supersingular side.
    pub s_candidates: Vec<u64>,
    /// d with some curve clean on the ordinary side.
    pub o_candidates: Vec<u64>,
    pub failures: Vec<CurveFailure>,
}

impl SurveyReport {
    pub fn violation_count(&self) -> u64 {
        self.entries.iter().map(|e| e.violating).sum()
    }
}

/// Runs the supersingular and ordinary checks for every d in [2, d_max] on every curve.
/// A curve whose scan fails is recorded in `failures` and the sweep goes on.
pub fn survey_sets(
    alpha: i64,
    d_max: u64,
    curves: &[CurveQ],
    bound: u64,
    cfg: &SurveyConfig,
    mut cache: Option<&mut ApCache>,
) -> Result<SurveyReport> {
    if d_max < 2 {
        return Err(Error::InvalidArgument(format!("d_max must be at least 2, got {d_max}")));
    }
    if curves.is_empty() {
        return Err(Error::InvalidArgument("survey needs at least one curve".into()));
    }
    let mut curves: Vec<&CurveQ> = curves.iter().collect();
    curves.sort_by_key(|c| c.id());
    curves.dedup_by_key(|c| c.id());

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for e in curves {
        let records = match scan(e, bound, &cfg.scan, cache.as_deref_mut()) {
            Ok(r) => r,
            Err(err) => {
                failures.push(CurveFailure { curve: e.id(), error: err.to_string() });
                continue;
            }
        };
        for d in 2..=d_max {
            let pair = CongruencePair::new(d as i64, alpha)?;
            for mode in [SurveyMode::Supersingular, SurveyMode::Ordinary] {
                entries.push(entry_from_records(e, &records, pair, mode, bound, cfg.exclusion_threshold));
            }
        }
    }
    entries.sort_by(|x, y| (x.d, &x.curve, x.mode).cmp(&(y.d, &y.curve, y.mode)));
    let candidates = |mode| {
        let mut ds: Vec<u64> = entries
            .iter()
            .filter(|e| e.mode == mode && e.holds() && e.primes_tested >= cfg.min_tested)
            .map(|e| e.d)
            .collect();
        ds.dedup();
        ds
    };
    Ok(SurveyReport {
        label: EVIDENCE_LABEL.to_string(),
        alpha,
        d_max,
        bound,
        exclusion_threshold: cfg.exclusion_threshold,
        min_tested: cfg.min_tested,
        s_candidates: candidates(SurveyMode::Supersingular),
        o_candidates: candidates(SurveyMode::Ordinary),
        entries,
        failures,
    })
}
