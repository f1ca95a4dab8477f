//! Rational torsion of y^2 = x^3 + Ax + B with integer A, B.
//!
//! Torsion injects into E(F_p) for good odd p, so the gcd of a few point
//! counts bounds the torsion order. Candidate points come from Nagell-Lutz:
//! torsion points are integral with y = 0 or y^2 | 4A^3 + 27B^2. For each
//! admissible y the x-coordinates are the integer roots of
//! x^3 + Ax + (B - y^2). When 4A^3 + 27B^2 cannot be factored the search
//! falls back to scanning |x| <= cap, which only certifies the group when
//! it reaches the reduction bound.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_prime::nt_funcs::factors;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::counting::{frobenius_at, ScanConfig};
use crate::curve::{nagell_lutz_discriminant, CurveQ};
use crate::error::{Error, Result};
use crate::primes::PrimeRange;

/// Possible orders of E(Q)_tors.
pub const MAZUR_ORDERS: [u64; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16];

/// No rational torsion point has order above this.
pub const MAX_ELEMENT_ORDER: u64 = 12;

const PREFILTER_PRIMES: [u64; 8] = [7, 11, 13, 17, 19, 23, 29, 31];
const MAX_Y_CANDIDATES: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorsionConfig {
    /// Good primes used for the reduction bound.
    pub reduction_primes: usize,
    /// Bound on |x| for the fallback integral point search.
    pub x_search_cap: u64,
}

impl Default for TorsionConfig {
    fn default() -> Self {
        TorsionConfig { reduction_primes: 8, x_search_cap: 1_000_000 }
    }
}

/// gcd of #E(F_p) over the first `k` good primes p not dividing 2 * disc.
pub fn torsion_order_bound(e: &CurveQ, k: usize) -> Result<u64> {
    let cfg = ScanConfig { include_small: true, ..ScanConfig::default() };
    let mut bound = 0u64;
    let mut seen = 0;
    let mut lo = 3;
    while seen < k {
        let hi = lo * 2 + 100;
        for p in PrimeRange::new(lo, hi).primes() {
            if seen == k {
                break;
            }
            let rec = frobenius_at(e, p, &cfg)?;
            if let Some(n) = rec.count() {
                bound = bound.gcd(&n);
                seen += 1;
                if bound == 1 {
                    return Ok(1);
                }
            }
        }
        lo = hi + 1;
    }
    Ok(bound.max(1))
}

/// An integral point on the curve, or the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum IntPoint {
    Infinity,
    Affine(BigInt, BigInt),
}

/// a + b on y^2 = x^3 + Ax + B, or None if the sum is not integral.
/// Multiples of torsion points are torsion, hence integral, so a None
/// certifies that some summand has infinite order.
fn add_integral(a_coef: &BigInt, p: &IntPoint, q: &IntPoint) -> Option<IntPoint> {
    let (x1, y1, x2, y2) = match (p, q) {
        (IntPoint::Infinity, r) | (r, IntPoint::Infinity) => return Some(r.clone()),
        (IntPoint::Affine(x1, y1), IntPoint::Affine(x2, y2)) => (x1, y1, x2, y2),
    };
    let (num, den) = if x1 == x2 {
        if (y1 + y2).is_zero() {
            return Some(IntPoint::Infinity);
        }
        (BigInt::from(3) * x1 * x1 + a_coef, BigInt::from(2) * y1)
    } else {
        (y2 - y1, x2 - x1)
    };
    let (lambda, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return None;
    }
    let x3 = &lambda * &lambda - x1 - x2;
    let y3 = &lambda * (x1 - &x3) - y1;
    Some(IntPoint::Affine(x3, y3))
}

/// Order of an integral point if it is torsion. Every multiple must stay
/// integral and satisfy the Nagell-Lutz divisibility.
fn torsion_order(a_coef: &BigInt, disc: &BigInt, pt: &IntPoint) -> Option<u64> {
    // cur = k * pt
    let mut cur = pt.clone();
    for k in 1..=MAX_ELEMENT_ORDER {
        match &cur {
            IntPoint::Infinity => return Some(k),
            IntPoint::Affine(_, y) => {
                if !y.is_zero() && !(disc % (y * y)).is_zero() {
                    return None;
                }
            }
        }
        cur = add_integral(a_coef, &cur, pt)?;
    }
    None
}

/// Integer roots of x^3 + ax + c, ascending.
pub fn cubic_integer_roots(a: &BigInt, c: &BigInt) -> Vec<BigInt> {
    let h = |x: &BigInt| x * x * x + a * x + c;
    let r = BigInt::one() + a.abs().max(c.abs());
    let mut roots = Vec::new();
    let mut search = |lo: BigInt, hi: BigInt, increasing: bool| {
        let (mut lo, mut hi) = (lo, hi);
        while lo <= hi {
            let mid = (&lo + &hi).div_floor(&BigInt::from(2));
            let v = h(&mid);
            if v.is_zero() {
                roots.push(mid);
                return;
            }
            if v.is_negative() == increasing {
                lo = mid + 1;
            } else {
                hi = mid - 1;
            }
        }
    };
    if !a.is_negative() {
        search(-r.clone(), r, true);
    } else {
        // h' vanishes at +-sqrt(-a/3); s0 = floor of that
        let s0 = (-a).div_floor(&BigInt::from(3)).sqrt();
        search(-r.clone(), -&s0 - 1, true);
        search(-s0.clone(), s0.clone(), false);
        search(s0 + 1, r, true);
    }
    roots.sort();
    roots.dedup();
    roots
}

fn residue(v: &BigInt, m: u64) -> u64 {
    v.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

/// For each small prime, the bitmask of values taken by x^3 + Ax + B.
struct CubicValueMasks {
    masks: Vec<(u64, u64)>,
}

impl CubicValueMasks {
    fn new(a: &BigInt, b: &BigInt) -> Self {
        let masks = PREFILTER_PRIMES
            .iter()
            .map(|&l| {
                let (a, b) = (residue(a, l), residue(b, l));
                let mask = (0..l).fold(0u64, |m, x| m | 1 << ((x * x * x + a * x + b) % l));
                (l, mask)
            })
            .collect();
        CubicValueMasks { masks }
    }

    /// Whether x^3 + Ax + B = y^2 is solvable mod every filter prime.
    fn admits_y(&self, y: &BigInt) -> bool {
        self.masks.iter().all(|&(l, mask)| {
            let r = residue(y, l);
            mask >> (r * r % l) & 1 == 1
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "n")]
pub enum TorsionStructure {
    /// Z/n.
    Cyclic(u64),
    /// Z/2 x Z/2m; carries 2m.
    Product2(u64),
}

impl TorsionStructure {
    pub fn order(&self) -> u64 {
        match *self {
            TorsionStructure::Cyclic(n) => n,
            TorsionStructure::Product2(m2) => 2 * m2,
        }
    }
}

/// How the candidate points were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchMethod {
    /// The reduction bound was 1.
    ReductionBound,
    /// All y with y^2 | 4A^3 + 27B^2.
    DivisorSearch,
    /// |x| up to the configured cap.
    BoundedSearch,
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionPoint {
    #[serde(serialize_with = "ser_bigint")]
    pub x: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub y: BigInt,
    pub order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionGroup {
    pub order: u64,
    pub structure: TorsionStructure,
    pub generators: Vec<TorsionPoint>,
    /// Every non-identity torsion point.
    pub points: Vec<TorsionPoint>,
    pub reduction_bound: u64,
    pub method: SearchMethod,
}

/// The torsion subgroup E(Q)_tors.
pub fn torsion_group(e: &CurveQ, cfg: &TorsionConfig) -> Result<TorsionGroup> {
    let bound = torsion_order_bound(e, cfg.reduction_primes)?;
    if bound == 1 {
        return Ok(TorsionGroup {
            order: 1,
            structure: TorsionStructure::Cyclic(1),
            generators: Vec::new(),
            points: Vec::new(),
            reduction_bound: 1,
            method: SearchMethod::ReductionBound,
        });
    }
    let (a, b) = (e.a(), e.b());
    let disc = nagell_lutz_discriminant(a, b);
    let masks = CubicValueMasks::new(a, b);

    let (candidates, method) = match y_candidates(&disc) {
        Some(ys) => {
            let mut pts = Vec::new();
            for x in cubic_integer_roots(a, b) {
                pts.push(IntPoint::Affine(x, BigInt::zero()));
            }
            for y in ys.into_iter().filter(|y| masks.admits_y(y)) {
                for x in cubic_integer_roots(a, &(b - &y * &y)) {
                    pts.push(IntPoint::Affine(x.clone(), y.clone()));
                    pts.push(IntPoint::Affine(x, -&y));
                }
            }
            (pts, SearchMethod::DivisorSearch)
        }
        None => (bounded_search(e, &disc, cfg.x_search_cap), SearchMethod::BoundedSearch),
    };

    let mut points = Vec::new();
    for pt in candidates {
        let Some(order) = torsion_order(a, &disc, &pt) else { continue };
        if bound % order != 0 {
            return Err(Error::InvalidTorsion(format!("point of order {order} but reduction bound {bound}")));
        }
        let IntPoint::Affine(x, y) = pt else { unreachable!() };
        points.push(TorsionPoint { x, y, order });
    }
    points.sort_by(|p, q| (p.order, &p.x, &p.y).cmp(&(q.order, &q.x, &q.y)));
    points.dedup();

    let order = points.len() as u64 + 1;
    if method == SearchMethod::BoundedSearch && order != bound {
        return Err(Error::FactorizationTooHard { bound, found: order });
    }
    if bound % order != 0 || !MAZUR_ORDERS.contains(&order) {
        return Err(Error::InvalidTorsion(format!("group of order {order} with reduction bound {bound}")));
    }
    let two_torsion: Vec<&TorsionPoint> = points.iter().filter(|p| p.order == 2).collect();
    let (structure, generators) = if two_torsion.len() == 3 {
        let big = points.iter().max_by_key(|p| p.order).unwrap().clone();
        let m = big.order / 2;
        let half = multiple(a, &big, m);
        let other = two_torsion
            .iter()
            .find(|p| IntPoint::Affine(p.x.clone(), p.y.clone()) != half)
            .map(|p| (*p).clone())
            .unwrap();
        if big.order * 2 != order {
            return Err(Error::InvalidTorsion(format!("no element of order {} in a group of order {order}", order / 2)));
        }
        (TorsionStructure::Product2(big.order), vec![big, other])
    } else {
        let gens: Vec<TorsionPoint> = points.iter().filter(|p| p.order == order).take(1).cloned().collect();
        if order > 1 && gens.is_empty() {
            return Err(Error::InvalidTorsion(format!("group of order {order} is not cyclic")));
        }
        (TorsionStructure::Cyclic(order), gens)
    };
    Ok(TorsionGroup { order, structure, generators, points, reduction_bound: bound, method })
}

fn multiple(a: &BigInt, p: &TorsionPoint, k: u64) -> IntPoint {
    let base = IntPoint::Affine(p.x.clone(), p.y.clone());
    let mut acc = IntPoint::Infinity;
    for _ in 0..k {
        acc = add_integral(a, &acc, &base).expect("multiples of torsion points are integral");
    }
    acc
}

/// All y > 0 with y^2 | disc, or None if |disc| resists factoring.
fn y_candidates(disc: &BigInt) -> Option<Vec<BigInt>> {
    let n: BigUint = disc.magnitude().clone();
    let (fac, unfactored) = factors(n, None);
    if unfactored.is_some() {
        return None;
    }
    let halves: Vec<(BigUint, usize)> = fac.into_iter().map(|(q, e)| (q, e / 2)).filter(|(_, e)| *e > 0).collect();
    let total: u64 = halves.iter().map(|(_, e)| *e as u64 + 1).product();
    if total > MAX_Y_CANDIDATES {
        return None;
    }
    let mut ys = vec![BigUint::one()];
    for (q, e) in halves {
        let mut next = Vec::with_capacity(ys.len() * (e + 1));
        for y in &ys {
            let mut v = y.clone();
            for _ in 0..=e {
                next.push(v.clone());
                v *= &q;
            }
        }
        ys = next;
    }
    ys.sort();
    Some(ys.into_iter().map(|y| BigInt::from_biguint(Sign::Plus, y)).collect())
}

fn bounded_search(e: &CurveQ, disc: &BigInt, cap: u64) -> Vec<IntPoint> {
    let (a, b) = (e.a(), e.b());
    // x^3 + Ax + B must be a square (or zero) mod each filter prime
    let filters: Vec<(u64, u64, u64, u64)> = PREFILTER_PRIMES
        .iter()
        .map(|&l| {
            let squares = (0..l).fold(0u64, |m, y| m | 1 << (y * y % l));
            (l, residue(a, l), residue(b, l), squares)
        })
        .collect();
    let cap = cap as i64;
    let mut pts = Vec::new();
    for x in -cap..=cap {
        let ok = filters.iter().all(|&(l, al, bl, sq)| {
            let xl = x.rem_euclid(l as i64) as u64;
            sq >> ((xl * xl * xl + al * xl + bl) % l) & 1 == 1
        });
        if !ok {
            continue;
        }
        let xb = BigInt::from(x);
        let rhs = &xb * &xb * &xb + a * &xb + b;
        if rhs.is_negative() {
            continue;
        }
        let y = rhs.sqrt();
        if &y * &y != rhs {
            continue;
        }
        if !y.is_zero() && !(disc % (&y * &y)).is_zero() {
            continue;
        }
        if !y.is_zero() {
            pts.push(IntPoint::Affine(xb.clone(), -&y));
        }
        pts.push(IntPoint::Affine(xb, y));
    }
    pts
}
