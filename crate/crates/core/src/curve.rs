//! Short Weierstrass curves y^2 = x^3 + Ax + B over Q and over F_p.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField, QuadraticCharacter};

/// Discriminant -16(4A^3 + 27B^2) of the short Weierstrass model.
pub fn discriminant(a: &BigInt, b: &BigInt) -> BigInt {
    BigInt::from(-16) * nagell_lutz_discriminant(a, b)
}

/// The quantity 4A^3 + 27B^2, whose divisors bound the y-coordinates of torsion points.
pub fn nagell_lutz_discriminant(a: &BigInt, b: &BigInt) -> BigInt {
    BigInt::from(4) * a * a * a + BigInt::from(27) * b * b
}

/// A nonsingular curve over Q with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveQ {
    a: BigInt,
    b: BigInt,
}

impl CurveQ {
    pub fn new(a: BigInt, b: BigInt) -> Result<Self> {
        if nagell_lutz_discriminant(&a, &b).is_zero() {
            return Err(Error::SingularCurve { a: a.to_string(), b: b.to_string() });
        }
        Ok(CurveQ { a, b })
    }

    pub fn from_i64(a: i64, b: i64) -> Result<Self> {
        Self::new(a.into(), b.into())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn discriminant(&self) -> BigInt {
        discriminant(&self.a, &self.b)
    }

    /// Canonical "A,B" identifier, also the cache key.
    pub fn id(&self) -> String {
        format!("{},{}", self.a, self.b)
    }

    /// Reduces the given model mod p. Primes dividing the discriminant are reported as bad.
    pub fn reduce_mod(&self, p: u64) -> Result<Reduction> {
        let field = PrimeField::new(p)?;
        if self.discriminant().mod_floor(&BigInt::from(p)).is_zero() {
            return Ok(Reduction::Bad);
        }
        let a = residue(&self.a, p);
        let b = residue(&self.b, p);
        Ok(Reduction::Good(CurveFp::new(field, field.elem(a), field.elem(b))?))
    }
}

fn residue(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

impl fmt::Display for CurveQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

impl FromStr for CurveQ {
    type Err = Error;

    /// Parses "A,B" with decimal integers of any length.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::CurveParse { input: s.to_string(), reason: reason.to_string() };
        let (a, b) = s.split_once(',').ok_or_else(|| err("expected \"A,B\""))?;
        let parse = |t: &str| -> Result<BigInt> {
            let t = t.trim();
            let digits = t.strip_prefix('-').unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
                return Err(err("coefficients must be decimal integers"));
            }
            t.parse::<BigInt>().map_err(|e| err(&e.to_string()))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        CurveQ::new(a, b)
    }
}

impl Serialize for CurveQ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for CurveQ {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of reducing a model mod p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduction {
    Good(CurveFp),
    Bad,
}

/// A point on a curve over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointFp {
    Infinity,
    Affine { x: Fp, y: Fp },
}

impl PointFp {
    pub fn is_infinity(&self) -> bool {
        matches!(self, PointFp::Infinity)
    }
}

/// A nonsingular curve y^2 = x^3 + ax + b over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveFp {
    field: PrimeField,
    a: Fp,
    b: Fp,
}

impl CurveFp {
    pub fn new(field: PrimeField, a: Fp, b: Fp) -> Result<Self> {
        let f = field;
        let disc = f.add(
            f.mul(f.elem(4), f.mul(a, f.square(a))),
            f.mul(f.elem(27), f.square(b)),
        );
        // the full discriminant carries a factor 16, so characteristic 2 is always singular
        if disc.is_zero() || f.modulus() == 2 {
            return Err(Error::SingularCurve { a: a.to_string(), b: b.to_string() });
        }
        Ok(CurveFp { field, a, b })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn a(&self) -> Fp {
        self.a
    }

    pub fn b(&self) -> Fp {
        self.b
    }

    /// x^3 + ax + b.
    #[inline]
    pub fn rhs(&self, x: Fp) -> Fp {
        let f = &self.field;
        f.add(f.mul(f.add(f.square(x), self.a), x), self.b)
    }

    pub fn contains(&self, pt: &PointFp) -> bool {
        match *pt {
            PointFp::Infinity => true,
            PointFp::Affine { x, y } => self.field.square(y) == self.rhs(x),
        }
    }

    pub fn neg(&self, pt: &PointFp) -> PointFp {
        match *pt {
            PointFp::Infinity => PointFp::Infinity,
            PointFp::Affine { x, y } => PointFp::Affine { x, y: self.field.neg(y) },
        }
    }

    pub fn add(&self, p1: &PointFp, p2: &PointFp) -> PointFp {
        let f = &self.field;
        let (x1, y1, x2, y2) = match (*p1, *p2) {
            (PointFp::Infinity, q) | (q, PointFp::Infinity) => return q,
            (PointFp::Affine { x: x1, y: y1 }, PointFp::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if f.add(y1, y2).is_zero() {
                return PointFp::Infinity;
            }
            // tangent: (3x^2 + a) / 2y
            let num = f.add(f.mul(f.elem(3), f.square(x1)), self.a);
            f.div(num, f.add(y1, y1)).expect("2y is nonzero off the 2-torsion")
        } else {
            f.div(f.sub(y2, y1), f.sub(x2, x1)).expect("distinct x-coordinates")
        };
        let x3 = f.sub(f.sub(f.square(lambda), x1), x2);
        let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
        PointFp::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, pt: &PointFp) -> PointFp {
        self.add(pt, pt)
    }

    /// k * P by double-and-add.
    pub fn mul(&self, mut k: u64, pt: &PointFp) -> PointFp {
        let mut acc = PointFp::Infinity;
        let mut base = *pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// Signed scalar multiple.
    pub fn mul_signed(&self, k: i64, pt: &PointFp) -> PointFp {
        let q = self.mul(k.unsigned_abs(), pt);
        if k < 0 {
            self.neg(&q)
        } else {
            q
        }
    }

    /// The quadratic twist by the smallest non-residue c: y^2 = x^3 + c^2 a x + c^3 b.
    /// Its trace of Frobenius is the negative of this curve's. Requires odd p.
    pub fn twist(&self) -> CurveFp {
        let f = &self.field;
        let c = f.non_residue();
        let c2 = f.square(c);
        CurveFp::new(*f, f.mul(c2, self.a), f.mul(f.mul(c2, c), self.b)).expect("twist of a nonsingular curve")
    }

    /// A uniformly chosen x with a point above it; the y sign is random. Requires odd p.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PointFp {
        let f = &self.field;
        loop {
            let x = f.elem(rng.gen_range(0..f.modulus()));
            let r = self.rhs(x);
            match f.legendre(r).expect("odd characteristic") {
                QuadraticCharacter::NonResidue => continue,
                QuadraticCharacter::Zero => return PointFp::Affine { x, y: Fp::ZERO },
                QuadraticCharacter::Residue => {
                    let y = f.sqrt(r).expect("odd characteristic").expect("residue has a root");
                    let y = if rng.gen::<bool>() { y } else { f.neg(y) };
                    return PointFp::Affine { x, y };
                }
            }
        }
    }

    /// Every point of the curve, by enumeration. Only for small p.
    pub fn points(&self) -> Vec<PointFp> {
        let f = &self.field;
        let p = f.modulus();
        let mut pts = vec![PointFp::Infinity];
        for x in 0..p {
            let x = f.elem(x);
            let r = self.rhs(x);
            for y in 0..p {
                let y = f.elem(y);
                if f.square(y) == r {
                    pts.push(PointFp::Affine { x, y });
                }
            }
        }
        pts
    }
}
