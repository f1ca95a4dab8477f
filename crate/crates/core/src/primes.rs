//! Prime ranges and residue-class filters over primes.

use std::fmt;
use std::str::FromStr;

use num_prime::nt_funcs::{is_prime64, primes};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIEVE_LIMIT: u64 = 100_000_000;

/// Inclusive range of candidate primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRange {
    pub lo: u64,
    pub hi: u64,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        PrimeRange { lo, hi }
    }

    /// All primes p with p <= bound.
    pub fn up_to(bound: u64) -> Self {
        PrimeRange { lo: 2, hi: bound }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo.max(2)
    }

    /// Primes in the range, ascending.
    pub fn primes(&self) -> Vec<u64> {
        if self.is_empty() {
            return Vec::new();
        }
        if self.hi <= SIEVE_LIMIT {
            let mut ps = primes(self.hi + 1);
            ps.retain(|&p| p >= self.lo && p <= self.hi);
            return ps;
        }
        (self.lo..=self.hi).filter(|&n| is_prime64(n)).collect()
    }
}

/// A set of residue classes r mod m; a prime passes if it lies in any class.
/// The empty filter admits every prime.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueFilter {
    classes: Vec<ResidueClass>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueClass {
    pub residue: u64,
    pub modulus: u64,
}

impl ResidueClass {
    pub fn new(residue: u64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("residue class modulus must be positive".into()));
        }
        Ok(ResidueClass { residue: residue % modulus, modulus })
    }

    pub fn contains(&self, n: u64) -> bool {
        n % self.modulus == self.residue
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.residue, self.modulus)
    }
}

impl FromStr for ResidueClass {
    type Err = Error;

    /// Parses "r,m".
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected \"r,m\", got {s:?}"));
        let (r, m) = s.split_once(',').ok_or_else(bad)?;
        let r: u64 = r.trim().parse().map_err(|_| bad())?;
        let m: u64 = m.trim().parse().map_err(|_| bad())?;
        ResidueClass::new(r, m)
    }
}

impl ResidueFilter {
    pub fn all() -> Self {
        ResidueFilter::default()
    }

    pub fn new(mut classes: Vec<ResidueClass>) -> Self {
        classes.sort();
        classes.dedup();
        ResidueFilter { classes }
    }

    pub fn classes(&self) -> &[ResidueClass] {
        &self.classes
    }

    pub fn admits(&self, p: u64) -> bool {
        self.classes.is_empty() || self.classes.iter().any(|c| c.contains(p))
    }
}
