//! Point counting over F_p and Frobenius scans of curves over Q.
//!
//! Small primes are counted by enumerating x against a table of square
//! multiplicities. Above the exhaustive threshold the group order is found
//! by baby-step giant-step on random points of the curve and of its
//! quadratic twist: each point order constrains #E (or #E' = 2p + 2 - #E)
//! to a residue class, and for p > 457 the Hasse interval then contains a
//! single candidate after a few points.

use std::collections::HashMap;

use num_integer::{Integer, Roots};
use num_prime::nt_funcs::factorize64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{ApCache, CachedKind};
use crate::curve::{CurveFp, CurveQ, PointFp, Reduction};
use crate::error::{Error, Result};
use crate::primes::PrimeRange;

pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 1 << 20;

/// Below this prime a group order need not be determined by point orders
/// on the curve and its twist, so BSGS counting refuses to run.
pub const BSGS_MIN_PRIME: u64 = 458;

const MAX_POINTS_PER_SIDE: usize = 64;
// stop enumerating Hasse candidates when the stride leaves more than this many
const MAX_CANDIDATE_WALK: u64 = 1 << 20;

/// Half-width floor(2 sqrt(p)) of the Hasse interval.
pub fn hasse_radius(p: u64) -> u64 {
    (4 * p as u128).sqrt() as u64
}

/// #E(F_p) by enumeration: for every x, add the number of y with y^2 = x^3 + ax + b.
pub fn count_exhaustive(e: &CurveFp) -> u64 {
    let f = e.field();
    let p = f.modulus();
    let mut roots = vec![0u8; p as usize];
    for y in 0..p {
        roots[f.square(f.elem(y)).value() as usize] += 1;
    }
    let affine: u64 = if p < 1 << 20 {
        let (a, b) = (e.a().value(), e.b().value());
        (0..p).map(|x| roots[(((x * x % p + a) * x + b) % p) as usize] as u64).sum()
    } else {
        (0..p).map(|x| roots[e.rhs(f.elem(x)).value() as usize] as u64).sum()
    };
    affine + 1
}

/// #E(F_p) by baby-step giant-step. Requires p >= [`BSGS_MIN_PRIME`].
pub fn count_bsgs(e: &CurveFp) -> Result<u64> {
    let p = e.field().modulus();
    if p < BSGS_MIN_PRIME {
        return Err(Error::InvalidArgument(format!("BSGS counting needs p >= {BSGS_MIN_PRIME}, got {p}")));
    }
    let seed = p ^ e.a().value().rotate_left(21) ^ e.b().value().rotate_left(42);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let twist = e.twist();
    let w = hasse_radius(p);
    let (lo, hi) = (p + 1 - w, p + 1 + w);

    // lcm of point orders found on E and on its twist
    let mut lcm_e = 1u64;
    let mut lcm_t = 1u64;
    for attempt in 0..2 * MAX_POINTS_PER_SIDE {
        let on_twist = attempt % 2 == 1;
        let curve = if on_twist { &twist } else { e };
        let pt = curve.random_point(&mut rng);
        let order = point_order(curve, &pt, lo, hi);
        if on_twist {
            lcm_t = lcm_t.lcm(&order);
        } else {
            lcm_e = lcm_e.lcm(&order);
        }
        if let Some(n) = unique_candidate(p, lo, hi, lcm_e, lcm_t) {
            return Ok(n);
        }
    }
    Err(Error::AmbiguousOrder { p, attempts: 2 * MAX_POINTS_PER_SIDE })
}

/// The only N in [lo, hi] with lcm_e | N and lcm_t | 2p + 2 - N, if there is exactly one.
fn unique_candidate(p: u64, lo: u64, hi: u64, lcm_e: u64, lcm_t: u64) -> Option<u64> {
    let total = 2 * p + 2;
    let stride = lcm_e.max(lcm_t);
    if (hi - lo) / stride > MAX_CANDIDATE_WALK {
        return None;
    }
    // walk the residue class of the larger modulus
    let first = if lcm_e >= lcm_t {
        lo.next_multiple_of(lcm_e)
    } else {
        let r = total % lcm_t;
        lo + (r + lcm_t - lo % lcm_t) % lcm_t
    };
    let mut found = None;
    let mut n = first;
    while n <= hi {
        if n % lcm_e == 0 && (total - n).is_multiple_of(lcm_t) {
            if found.is_some() {
                return None;
            }
            found = Some(n);
        }
        n += stride;
    }
    found
}

/// Exact order of `pt`, given that some multiple of it lies in [lo, hi].
fn point_order(e: &CurveFp, pt: &PointFp, lo: u64, hi: u64) -> u64 {
    if pt.is_infinity() {
        return 1;
    }
    let mut order = bsgs_multiple(e, pt, lo, hi);
    for (q, _) in factorize64(order) {
        while order.is_multiple_of(q) && e.mul(order / q, pt).is_infinity() {
            order /= q;
        }
    }
    order
}

/// Some M >= lo with M * pt = O, found within [lo, hi + 2m].
fn bsgs_multiple(e: &CurveFp, pt: &PointFp, lo: u64, hi: u64) -> u64 {
    let width = hi - lo + 1;
    let m = ((width / 2).sqrt() + 1).max(1);
    // baby steps j*P for 1 <= j <= m, keyed by x
    let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(m as usize);
    let mut cur = *pt;
    for j in 1..=m {
        match cur {
            PointFp::Affine { x, y } => {
                baby.entry(x.value()).or_insert((j, y.value()));
            }
            // order divides j
            PointFp::Infinity => return lo.next_multiple_of(j),
        }
        cur = e.add(&cur, pt);
    }
    let step = e.mul(2 * m + 1, pt);
    let mut center = lo + m;
    let mut giant = e.mul(center, pt);
    loop {
        match giant {
            PointFp::Infinity => return center,
            PointFp::Affine { x, y } => {
                if let Some(&(j, by)) = baby.get(&x.value()) {
                    return if by == y.value() { center - j } else { center + j };
                }
            }
        }
        // the Hasse interval always holds a multiple of the order
        assert!(center <= hi + 2 * m + 1, "no multiple of the point order in the Hasse interval");
        giant = e.add(&giant, &step);
        center += 2 * m + 1;
    }
}

/// #E(F_p), choosing the method by p.
pub fn count_points(e: &CurveFp, exhaustive_threshold: u64) -> Result<u64> {
    let p = e.field().modulus();
    if p <= exhaustive_threshold.max(BSGS_MIN_PRIME - 1) {
        Ok(count_exhaustive(e))
    } else {
        count_bsgs(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReductionKind {
    Good,
    Bad,
}

/// One prime's worth of Frobenius data for a curve over Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FrobeniusRecord {
    p: u64,
    kind: ReductionKind,
    count: Option<u64>,
    a_p: Option<i64>,
    supersingular: Option<bool>,
}

impl FrobeniusRecord {
    /// A good-reduction record. Fails if the count breaks the Hasse bound.
    pub fn good(p: u64, count: u64) -> Result<Self> {
        let a_p = p as i64 + 1 - count as i64;
        if (a_p as i128) * (a_p as i128) > 4 * p as i128 {
            return Err(Error::HasseViolation { p, a_p });
        }
        Ok(FrobeniusRecord {
            p,
            kind: ReductionKind::Good,
            count: Some(count),
            a_p: Some(a_p),
            supersingular: Some(a_p.rem_euclid(p as i64) == 0),
        })
    }

    pub fn from_trace(p: u64, a_p: i64) -> Result<Self> {
        let count = p as i64 + 1 - a_p;
        if count <= 0 {
            return Err(Error::HasseViolation { p, a_p });
        }
        Self::good(p, count as u64)
    }

    pub fn bad(p: u64) -> Self {
        FrobeniusRecord { p, kind: ReductionKind::Bad, count: None, a_p: None, supersingular: None }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> ReductionKind {
        self.kind
    }

    pub fn is_good(&self) -> bool {
        self.kind == ReductionKind::Good
    }

    pub fn count(&self) -> Option<u64> {
        self.count
    }

    pub fn a_p(&self) -> Option<i64> {
        self.a_p
    }

    /// a_p = 0 mod p. For p >= 5 the Hasse bound makes this a_p = 0.
    pub fn is_supersingular(&self) -> Result<bool> {
        self.supersingular.ok_or(Error::NotApplicable(self.p))
    }

    pub fn is_ordinary(&self) -> Result<bool> {
        self.is_supersingular().map(|s| !s)
    }
}

/// Knobs shared by every scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub exhaustive_threshold: u64,
    /// Include p = 2 and p = 3 in scans.
    pub include_small: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD, include_small: false }
    }
}

impl ScanConfig {
    pub fn scan_primes(&self, range: PrimeRange) -> Vec<u64> {
        let mut ps = range.primes();
        if !self.include_small {
            ps.retain(|&p| p >= 5);
        }
        ps
    }
}

/// The Frobenius record of `e` at a single prime.
pub fn frobenius_at(e: &CurveQ, p: u64, cfg: &ScanConfig) -> Result<FrobeniusRecord> {
    let inner = || -> Result<FrobeniusRecord> {
        match e.reduce_mod(p)? {
            Reduction::Bad => Ok(FrobeniusRecord::bad(p)),
            Reduction::Good(c) => FrobeniusRecord::good(p, count_points(&c, cfg.exhaustive_threshold)?),
        }
    };
    inner().map_err(|err| err.at_prime(p))
}

/// One record per prime of the range in increasing order. Work is spread
/// over the current rayon pool; the output order does not depend on it.
pub fn frobenius_scan(e: &CurveQ, range: PrimeRange, cfg: &ScanConfig) -> Result<Vec<FrobeniusRecord>> {
    cfg.scan_primes(range).into_par_iter().map(|p| frobenius_at(e, p, cfg)).collect()
}

/// As [`frobenius_scan`], reading and filling `cache`.
pub fn frobenius_scan_cached(
    e: &CurveQ,
    range: PrimeRange,
    cfg: &ScanConfig,
    cache: &mut ApCache,
) -> Result<Vec<FrobeniusRecord>> {
    let id = e.id();
    let primes = cfg.scan_primes(range);
    let known: Vec<Option<FrobeniusRecord>> = primes
        .iter()
        .map(|&p| cache.get(&id, p).map(|k| k.to_record(p)).transpose())
        .collect::<Result<_>>()?;
    let records: Vec<FrobeniusRecord> = primes
        .par_iter()
        .zip(known.par_iter())
        .map(|(&p, hit)| match hit {
            Some(r) => Ok(*r),
            None => frobenius_at(e, p, cfg),
        })
        .collect::<Result<_>>()?;
    for (r, hit) in records.iter().zip(&known) {
        if hit.is_none() {
            cache.insert(&id, r.p(), CachedKind::from_record(r))?;
        }
    }
    Ok(records)
}
