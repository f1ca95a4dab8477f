//! Congruences of point counts seen from both sides: finite subgroups G of
//! GL(2, Z/dZ), where #E(F_p) = 1 + det(g) - Tr(g) for g the Frobenius at p,
//! and Frobenius scans of actual curves.
//!
//! The mod-d Galois image of a curve is never computed here. Subgroups are
//! given by generators; curves are sampled prime by prime.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use num_prime::nt_funcs::factorize64;
use serde::{Deserialize, Serialize};

use crate::cache::ApCache;
use crate::counting::{frobenius_scan, frobenius_scan_cached, FrobeniusRecord, ScanConfig};
use crate::curve::CurveQ;
use crate::error::{Error, Result};
use crate::primes::{PrimeRange, ResidueFilter};

pub const DEFAULT_SUBGROUP_CAP: usize = 1_000_000;

/// A 2x2 matrix [[m11, m12], [m21, m22]] over Z/dZ with unit determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gl2Element {
    d: u64,
    m: [u64; 4],
}

impl Gl2Element {
    pub fn new(d: u64, entries: [i64; 4]) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModulus(d as i64));
        }
        let m = entries.map(|v| v.rem_euclid(d as i64) as u64);
        let g = Gl2Element { d, m };
        if g.det().gcd(&d) != 1 {
            return Err(Error::NonInvertibleGenerator(g.to_string()));
        }
        Ok(g)
    }

    pub fn identity(d: u64) -> Self {
        Gl2Element { d, m: [1, 0, 0, 1] }
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    pub fn entries(&self) -> [u64; 4] {
        self.m
    }

    pub fn det(&self) -> u64 {
        let [a, b, c, e] = self.m;
        (a * e % self.d + self.d - b * c % self.d) % self.d
    }

    pub fn trace(&self) -> u64 {
        (self.m[0] + self.m[3]) % self.d
    }

    /// 1 + det(g) - Tr(g) mod d, the point count a Frobenius g would give mod d.
    pub fn count_residue(&self) -> u64 {
        (1 + self.det() + self.d - self.trace()) % self.d
    }

    pub fn mul(&self, other: &Gl2Element) -> Gl2Element {
        debug_assert_eq!(self.d, other.d);
        let d = self.d;
        let [a, b, c, e] = self.m;
        let [w, x, y, z] = other.m;
        Gl2Element {
            d,
            m: [(a * w + b * y) % d, (a * x + b * z) % d, (c * w + e * y) % d, (c * x + e * z) % d],
        }
    }

    pub fn inverse(&self) -> Gl2Element {
        let d = self.d as i64;
        let det = self.det() as i64;
        let inv = det.extended_gcd(&d).x.rem_euclid(d) as u64;
        let [a, b, c, e] = self.m;
        let neg = |v: u64| (self.d - v) % self.d;
        let s = |v: u64| v * inv % self.d;
        Gl2Element { d: self.d, m: [s(e), s(neg(b)), s(neg(c)), s(a)] }
    }
}

impl fmt::Display for Gl2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, e] = self.m;
        write!(f, "{a},{b},{c},{e}")
    }
}

/// |GL(2, Z/dZ)| = d^4 * prod over primes l | d of (1 - 1/l)(1 - 1/l^2).
pub fn gl2_order(d: u64) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidModulus(d as i64));
    }
    let mut order: u128 = 1;
    for (l, k) in factorize64(d) {
        let (l, k) = (l as u128, k as u32);
        order *= l.pow(4 * (k - 1)) * (l * l - 1) * (l * l - l);
    }
    u64::try_from(order).map_err(|_| Error::InvalidArgument(format!("|GL(2, Z/{d})| overflows u64")))
}

/// Every element of GL(2, Z/dZ), by enumeration.
pub fn enumerate_gl2(d: u64) -> Result<Vec<Gl2Element>> {
    if d < 2 {
        return Err(Error::InvalidModulus(d as i64));
    }
    let d_i = d as i64;
    let mut out = Vec::new();
    for a in 0..d_i {
        for b in 0..d_i {
            for c in 0..d_i {
                for e in 0..d_i {
                    if let Ok(g) = Gl2Element::new(d, [a, b, c, e]) {
                        out.push(g);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A finite subgroup of GL(2, Z/dZ), stored as its full element set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gl2Subgroup {
    d: u64,
    elements: BTreeSet<Gl2Element>,
}

impl Gl2Subgroup {
    /// Wraps an element set after checking the group axioms.
    pub fn from_elements(d: u64, elements: impl IntoIterator<Item = Gl2Element>) -> Result<Self> {
        let g = Gl2Subgroup { d, elements: elements.into_iter().collect() };
        if !g.is_group() {
            return Err(Error::InvalidArgument(format!("element set mod {d} is not a subgroup")));
        }
        Ok(g)
    }

    pub fn full(d: u64) -> Result<Self> {
        Ok(Gl2Subgroup { d, elements: enumerate_gl2(d)?.into_iter().collect() })
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Gl2Element> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &Gl2Element) -> bool {
        self.elements.contains(g)
    }

    /// Identity, closure under products, closure under inverses.
    pub fn is_group(&self) -> bool {
        self.elements.iter().all(|g| g.modulus() == self.d)
            && self.elements.contains(&Gl2Element::identity(self.d))
            && self.elements.iter().all(|g| self.elements.contains(&g.inverse()))
            && self
                .elements
                .iter()
                .all(|g| self.elements.iter().all(|h| self.elements.contains(&g.mul(h))))
    }

    pub fn is_subgroup_of(&self, other: &Gl2Subgroup) -> bool {
        self.d == other.d && self.elements.is_subset(&other.elements)
    }
}

/// The subgroup generated by `generators`, by breadth-first closure from the identity.
pub fn generate_subgroup(generators: &[Gl2Element], d: u64, cap: usize) -> Result<Gl2Subgroup> {
    if d < 2 {
        return Err(Error::InvalidModulus(d as i64));
    }
    for g in generators {
        if g.modulus() != d {
            return Err(Error::InvalidArgument(format!("generator {g} is not a matrix mod {d}")));
        }
        if g.det().gcd(&d) != 1 {
            return Err(Error::NonInvertibleGenerator(g.to_string()));
        }
    }
    let id = Gl2Element::identity(d);
    let mut elements = BTreeSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = x.mul(g);
            if elements.insert(y) {
                if elements.len() > cap {
                    return Err(Error::SizeCapExceeded(cap));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(Gl2Subgroup { d, elements })
}

/// Residues alpha mod d with 1 + det(g) - Tr(g) = alpha for every g in G.
/// The identity contributes 0, so the result is either {0} or empty.
pub fn serre_condition(group: &Gl2Subgroup) -> BTreeSet<u64> {
    let values: BTreeSet<u64> = group.elements().map(Gl2Element::count_residue).collect();
    if values.len() == 1 {
        values
    } else {
        BTreeSet::new()
    }
}

/// Parses a generator list. Two layouts are accepted:
/// `"m11,m12,m21,m22;..."` (one quadruple per matrix), or
/// `"m11,m12;m21,m22|..."` (rows split by `;`, matrices by `|`).
pub fn parse_generators(text: &str, d: u64) -> Result<Vec<Gl2Element>> {
    let err = |why: &str| Error::MatrixParse(format!("{why} in {text:?}"));
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let nums = |s: &str| -> Result<Vec<i64>> {
        s.split(',').map(|v| v.trim().parse::<i64>().map_err(|_| err("non-integer entry"))).collect()
    };
    let chunks: Vec<&str> = text.split(';').collect();
    let row_layout = text.contains('|') || (chunks.len() == 2 && chunks.iter().all(|c| c.split(',').count() == 2));
    let matrices: Vec<Vec<i64>> = if row_layout {
        text.split('|')
            .map(|m| {
                let rows: Vec<&str> = m.split(';').collect();
                if rows.len() != 2 {
                    return Err(err("matrix needs two rows"));
                }
                let mut v = nums(rows[0])?;
                v.extend(nums(rows[1])?);
                Ok(v)
            })
            .collect::<Result<_>>()?
    } else {
        chunks.iter().map(|c| nums(c)).collect::<Result<_>>()?
    };
    matrices
        .into_iter()
        .map(|v| {
            let entries: [i64; 4] = v.try_into().map_err(|_| err("matrix needs four entries"))?;
            Gl2Element::new(d, entries)
        })
        .collect()
}

/// A modulus d > 1 and a residue alpha mod d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CongruencePair {
    d: u64,
    alpha: u64,
}

impl CongruencePair {
    pub fn new(d: i64, alpha: i64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModulus(d));
        }
        Ok(CongruencePair { d: d as u64, alpha: alpha.rem_euclid(d) as u64 })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn holds_for(&self, count: u64) -> bool {
        count % self.d == self.alpha
    }

    /// The same congruence read modulo a divisor of d.
    pub fn reduce_to(&self, divisor: u64) -> Result<Self> {
        if divisor < 2 || !self.d.is_multiple_of(divisor) {
            return Err(Error::InvalidArgument(format!("{divisor} does not divide {}", self.d)));
        }
        Ok(CongruencePair { d: divisor, alpha: self.alpha % divisor })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub p: u64,
    pub count: u64,
    pub residue: u64,
}

/// Outcome of checking #E(F_p) = alpha (mod d) over a prime range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub curve: String,
    pub d: u64,
    pub alpha: u64,
    pub bound: u64,
    pub filter: Vec<String>,
    pub primes_tested: u64,
    pub bad_primes_skipped: u64,
    pub violation_count: u64,
    pub largest_violation: Option<u64>,
    pub violations: Vec<Violation>,
}

impl CongruenceReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }
}

/// Evaluates the congruence on already computed records.
pub fn congruence_from_records(
    curve: &CurveQ,
    records: &[FrobeniusRecord],
    pair: CongruencePair,
    bound: u64,
    filter: &ResidueFilter,
) -> CongruenceReport {
    let mut tested = 0;
    let mut bad = 0;
    let mut violations = Vec::new();
    for r in records.iter().filter(|r| r.p() <= bound && filter.admits(r.p())) {
        match r.count() {
            None => bad += 1,
            Some(n) => {
                tested += 1;
                if !pair.holds_for(n) {
                    violations.push(Violation { p: r.p(), count: n, residue: n % pair.d() });
                }
            }
        }
    }
    CongruenceReport {
        curve: curve.id(),
        d: pair.d(),
        alpha: pair.alpha(),
        bound,
        filter: filter.classes().iter().map(ToString::to_string).collect(),
        primes_tested: tested,
        bad_primes_skipped: bad,
        violation_count: violations.len() as u64,
        largest_violation: violations.last().map(|v| v.p),
        violations,
    }
}

/// Checks #E(F_p) = alpha (mod d) for every good prime p <= bound admitted by `filter`.
pub fn frobenius_congruence_check(
    curve: &CurveQ,
    pair: CongruencePair,
    bound: u64,
    filter: &ResidueFilter,
    cfg: &ScanConfig,
    cache: Option<&mut ApCache>,
) -> Result<CongruenceReport> {
    if bound < 5 {
        return Err(Error::InvalidArgument(format!("bound must be at least 5, got {bound}")));
    }
    let range = PrimeRange::up_to(bound);
    let records = match cache {
        Some(c) => frobenius_scan_cached(curve, range, cfg, c)?,
        None => frobenius_scan(curve, range, cfg)?,
    };
    Ok(congruence_from_records(curve, &records, pair, bound, filter))
}

/// Observed (p mod d, a_p mod d) pairs: the (det, trace) classes of the
/// sampled Frobenius elements in GL(2, Z/dZ).
pub fn frobenius_classes(records: &[FrobeniusRecord], d: u64) -> BTreeMap<(u64, u64), u64> {
    let mut out = BTreeMap::new();
    for r in records {
        if let Some(a) = r.a_p() {
            let key = (r.p() % d, a.rem_euclid(d as i64) as u64);
            *out.entry(key).or_insert(0) += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(d: u64, e: [i64; 4]) -> Gl2Element {
        Gl2Element::new(d, e).unwrap()
    }

    #[test]
    fn gl2_orders_match_enumeration() {
        assert_eq!(gl2_order(2).unwrap(), 6);
        assert_eq!(gl2_order(3).unwrap(), 48);
        assert_eq!(gl2_order(4).unwrap(), 96);
        for d in 2..=8 {
            assert_eq!(gl2_order(d).unwrap(), enumerate_gl2(d).unwrap().len() as u64, "d={d}");
        }
        assert!(gl2_order(1).is_err());
    }

    #[test]
    fn closure_examples() {
        let triv = generate_subgroup(&[], 5, DEFAULT_SUBGROUP_CAP).unwrap();
        assert_eq!(triv.order(), 1);
        let swap = m(2, [0, 1, 1, 0]);
        assert_eq!(generate_subgroup(&[swap], 2, DEFAULT_SUBGROUP_CAP).unwrap().order(), 2);
        let full = generate_subgroup(&[swap, m(2, [1, 1, 0, 1])], 2, DEFAULT_SUBGROUP_CAP).unwrap();
        assert_eq!(full, Gl2Subgroup::full(2).unwrap());
        assert!(full.is_group());
    }

    #[test]
    fn closure_errors() {
        assert!(matches!(Gl2Element::new(4, [2, 0, 0, 1]), Err(Error::NonInvertibleGenerator(_))));
        let gens = [m(7, [1, 1, 0, 1]), m(7, [0, 1, 6, 0])];
        assert!(matches!(generate_subgroup(&gens, 7, 100), Err(Error::SizeCapExceeded(100))));
        // SL(2, F_7) has 336 elements
        assert_eq!(generate_subgroup(&gens, 7, 1000).unwrap().order(), 336);
        assert!(matches!(generate_subgroup(&gens, 5, 1000), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn serre_examples() {
        for d in 2..=16 {
            let triv = generate_subgroup(&[], d, 1).unwrap();
            assert_eq!(serre_condition(&triv), BTreeSet::from([0]));
        }
        assert!(serre_condition(&Gl2Subgroup::full(2).unwrap()).is_empty());
        let unip = generate_subgroup(&[m(2, [1, 1, 0, 1])], 2, 10).unwrap();
        assert_eq!(unip.order(), 2);
        assert_eq!(serre_condition(&unip), BTreeSet::from([0]));
    }

    #[test]
    fn full_gl2_2_values() {
        let mut vals: Vec<u64> = Gl2Subgroup::full(2).unwrap().elements().map(|g| g.count_residue()).collect();
        vals.sort();
        assert_eq!(vals, vec![0, 0, 0, 0, 1, 1]);
    }

    #[test]
    fn borel_with_trivial_character_is_admissible() {
        // matrices [[1, *], [0, *]] fix a point of order d: every count is 0 mod d
        for d in [3u64, 5, 7] {
            let gens: Vec<Gl2Element> = (1..d as i64).map(|u| m(d, [1, 1, 0, u])).collect();
            let g = generate_subgroup(&gens, d, DEFAULT_SUBGROUP_CAP).unwrap();
            assert_eq!(g.order() as u64, d * (d - 1));
            assert_eq!(serre_condition(&g), BTreeSet::from([0]));
        }
    }

    #[test]
    fn parsing() {
        let quad = parse_generators("0,1,1,0;1,1,0,1", 2).unwrap();
        let rows = parse_generators("0,1;1,0|1,1;0,1", 2).unwrap();
        assert_eq!(quad, rows);
        assert_eq!(parse_generators("0,1;1,0", 2).unwrap(), vec![m(2, [0, 1, 1, 0])]);
        assert_eq!(parse_generators(" ", 3).unwrap(), vec![]);
        assert_eq!(parse_generators("-1,0,0,1", 5).unwrap(), vec![m(5, [4, 0, 0, 1])]);
        assert!(matches!(parse_generators("1,2,3", 5), Err(Error::MatrixParse(_))));
        assert!(matches!(parse_generators("1,x,0,1", 5), Err(Error::MatrixParse(_))));
        assert!(matches!(parse_generators("0,0,0,0", 5), Err(Error::NonInvertibleGenerator(_))));
    }

    #[test]
    fn inverses() {
        for g in enumerate_gl2(6).unwrap() {
            assert_eq!(g.mul(&g.inverse()), Gl2Element::identity(6));
        }
    }

    #[test]
    fn congruence_pair() {
        let p = CongruencePair::new(7, -1).unwrap();
        assert_eq!(p.alpha(), 6);
        assert!(CongruencePair::new(1, 0).is_err());
        let q = CongruencePair::new(16, 0).unwrap().reduce_to(8).unwrap();
        assert_eq!((q.d(), q.alpha()), (8, 0));
        assert!(CongruencePair::new(16, 0).unwrap().reduce_to(3).is_err());
    }

    #[test]
    fn congruence_examples() {
        let cfg = ScanConfig::default();
        let e: CurveQ = "0,1".parse().unwrap();
        let rep =
            frobenius_congruence_check(&e, CongruencePair::new(5, 0).unwrap(), 1000, &ResidueFilter::all(), &cfg, None)
                .unwrap();
        assert!(!rep.holds());
        assert_eq!(rep.violations.iter().find(|v| v.p == 7).unwrap().count, 12);

        let a = frobenius_congruence_check(&e, CongruencePair::new(5, 2).unwrap(), 500, &ResidueFilter::all(), &cfg, None)
            .unwrap();
        let b = frobenius_congruence_check(&e, CongruencePair::new(5, 12).unwrap(), 500, &ResidueFilter::all(), &cfg, None)
            .unwrap();
        assert_eq!(a, b);

        assert!(frobenius_congruence_check(&e, CongruencePair::new(5, 0).unwrap(), 4, &ResidueFilter::all(), &cfg, None)
            .is_err());
    }

    #[test]
    fn weak_form_filter() {
        // y^2 = x^3 + 1 is supersingular at p = 2 mod 3, so there #E = p + 1 = 0 mod 3
        let e: CurveQ = "0,1".parse().unwrap();
        let filter = ResidueFilter::new(vec!["2,3".parse().unwrap()]);
        let pair = CongruencePair::new(3, 0).unwrap();
        let rep = frobenius_congruence_check(&e, pair, 2000, &filter, &ScanConfig::default(), None).unwrap();
        assert!(rep.holds());
        assert!(rep.primes_tested > 100);
        assert_eq!(rep.filter, vec!["2,3".to_string()]);
    }

    #[test]
    fn frobenius_classes_satisfy_restated_criterion() {
        let e: CurveQ = "-3483,121014".parse().unwrap();
        let recs = frobenius_scan(&e, PrimeRange::up_to(3000), &ScanConfig::default()).unwrap();
        for ((det, tr), _) in frobenius_classes(&recs, 7) {
            assert_eq!((1 + det + 7 - tr) % 7, 0);
        }
    }

    fn gens_strategy() -> impl Strategy<Value = (u64, Vec<[i64; 4]>)> {
        (2u64..=6).prop_flat_map(|d| (Just(d), prop::collection::vec(any::<[i64; 4]>(), 0..4)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn serre_condition_is_monotone((d, raw) in gens_strategy(), keep in any::<u8>()) {
            let gens: Vec<Gl2Element> = raw.into_iter().filter_map(|e| Gl2Element::new(d, e).ok()).collect();
            let g = generate_subgroup(&gens, d, DEFAULT_SUBGROUP_CAP).unwrap();
            prop_assert!(g.is_group());
            let sub: Vec<Gl2Element> = gens.iter().enumerate().filter(|(i, _)| keep >> i & 1 == 1).map(|(_, g)| *g).collect();
            let h = generate_subgroup(&sub, d, DEFAULT_SUBGROUP_CAP).unwrap();
            prop_assert!(h.is_subgroup_of(&g));
            let (sg, sh) = (serre_condition(&g), serre_condition(&h));
            prop_assert!(sg.is_subset(&sh));
            prop_assert!(sg.is_subset(&BTreeSet::from([0])));
            prop_assert_eq!(gl2_order(d).unwrap() % g.order() as u64, 0);
        }
    }
}
