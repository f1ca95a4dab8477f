//! Arithmetic in prime fields F_p for p < 2^62.
//!
//! Elements are plain canonical residues; all operations go through the
//! [`PrimeField`] handle so that the modulus is never carried per element.
//! Products use a 128-bit intermediate with a single reduction.

use std::fmt;

use num_prime::nt_funcs::is_prime64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

/// A canonical residue in `[0, p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fp(u64);

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    /// Wraps a value already known to be reduced.
    #[cfg(test)]
    pub(crate) const fn from_raw(v: u64) -> Fp {
        Fp(v)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The quadratic character of a residue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticCharacter {
    Zero,
    Residue,
    NonResidue,
}

impl QuadraticCharacter {
    pub fn as_i8(self) -> i8 {
        match self {
            QuadraticCharacter::Zero => 0,
            QuadraticCharacter::Residue => 1,
            QuadraticCharacter::NonResidue => -1,
        }
    }
}

/// Handle for the field F_p. The modulus is checked prime at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS {
            return Err(Error::ModulusOutOfRange(p));
        }
        if !is_prime64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary u64 into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> Fp {
        Fp(v % self.p)
    }

    /// Reduces a signed integer into the field.
    #[inline]
    pub fn from_i64(&self, v: i64) -> Fp {
        Fp(v.rem_euclid(self.p as i64) as u64)
    }

    #[inline]
    pub fn add(&self, x: Fp, y: Fp) -> Fp {
        // p < 2^62 so the sum cannot overflow
        let s = x.0 + y.0;
        Fp(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(&self, x: Fp, y: Fp) -> Fp {
        Fp(if x.0 >= y.0 { x.0 - y.0 } else { x.0 + self.p - y.0 })
    }

    #[inline]
    pub fn neg(&self, x: Fp) -> Fp {
        Fp(if x.0 == 0 { 0 } else { self.p - x.0 })
    }

    #[inline]
    pub fn mul(&self, x: Fp, y: Fp) -> Fp {
        Fp(((x.0 as u128 * y.0 as u128) % self.p as u128) as u64)
    }

    #[inline]
    pub fn square(&self, x: Fp) -> Fp {
        self.mul(x, x)
    }

    pub fn pow(&self, mut base: Fp, mut exp: u64) -> Fp {
        let mut acc = Fp::ONE;
        if self.p == 1 {
            return Fp::ZERO;
        }
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, x: Fp) -> Result<Fp> {
        if x.0 == 0 {
            return Err(Error::NonInvertible { value: 0, modulus: self.p });
        }
        let (mut r0, mut r1) = (self.p as i128, x.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fp(t0.rem_euclid(self.p as i128) as u64))
    }

    #[inline]
    pub fn div(&self, x: Fp, y: Fp) -> Result<Fp> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// Euler's criterion: a^((p-1)/2) mod p.
    pub fn legendre(&self, a: Fp) -> Result<QuadraticCharacter> {
        if self.p == 2 {
            return Err(Error::UnsupportedCharacteristic(2));
        }
        if a.0 == 0 {
            return Ok(QuadraticCharacter::Zero);
        }
        let e = self.pow(a, (self.p - 1) / 2);
        Ok(if e == Fp::ONE {
            QuadraticCharacter::Residue
        } else {
            QuadraticCharacter::NonResidue
        })
    }

    /// A square root of `a`, if one exists (Tonelli-Shanks). Requires odd p.
    pub fn sqrt(&self, a: Fp) -> Result<Option<Fp>> {
        match self.legendre(a)? {
            QuadraticCharacter::Zero => return Ok(Some(Fp::ZERO)),
            QuadraticCharacter::NonResidue => return Ok(None),
            QuadraticCharacter::Residue => {}
        }
        let p = self.p;
        if p % 4 == 3 {
            return Ok(Some(self.pow(a, (p + 1) / 4)));
        }
        let mut q = p - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let z = self.non_residue();
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, q.div_ceil(2));
        while t != Fp::ONE {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != Fp::ONE {
                t2 = self.square(t2);
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            m = i;
            c = self.square(b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Ok(Some(r))
    }

    /// Smallest quadratic non-residue. Requires odd p.
    pub fn non_residue(&self) -> Fp {
        assert!(self.p > 2, "no quadratic non-residue mod 2");
        (2..self.p)
            .map(Fp)
            .find(|&z| matches!(self.legendre(z), Ok(QuadraticCharacter::NonResidue)))
            .expect("odd prime field has a non-residue")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn small_examples() {
        let f5 = f(5);
        assert_eq!(f5.mul(Fp(3), Fp(4)), Fp(2));
        assert_eq!(f5.inv(Fp(4)).unwrap(), Fp(4));
        assert_eq!(f(1_000_003).inv(Fp::ONE).unwrap(), Fp::ONE);
        assert_eq!(
            f5.inv(Fp::ZERO),
            Err(Error::NonInvertible { value: 0, modulus: 5 })
        );
    }

    #[test]
    fn inverse_by_exhaustion_mod_5() {
        let f5 = f(5);
        for x in 1..5 {
            let brute = (1..5).find(|y| x * y % 5 == 1).unwrap();
            assert_eq!(f5.inv(Fp(x)).unwrap(), Fp(brute));
        }
    }

    #[test]
    fn legendre_examples() {
        let f5 = f(5);
        assert_eq!(f5.legendre(Fp(0)).unwrap(), QuadraticCharacter::Zero);
        assert_eq!(f5.legendre(Fp(4)).unwrap(), QuadraticCharacter::Residue);
        assert_eq!(f5.legendre(Fp(2)).unwrap(), QuadraticCharacter::NonResidue);
        assert_eq!(f(2).legendre(Fp(1)), Err(Error::UnsupportedCharacteristic(2)));
    }

    #[test]
    fn small_characteristic_arithmetic() {
        let f2 = f(2);
        assert_eq!(f2.add(Fp(1), Fp(1)), Fp(0));
        assert_eq!(f2.inv(Fp(1)).unwrap(), Fp(1));
        let f3 = f(3);
        assert_eq!(f3.inv(Fp(2)).unwrap(), Fp(2));
        assert!(f3.legendre(Fp(2)).is_ok());
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PrimeField::new(91), Err(Error::NotPrime(91)));
        assert!(matches!(PrimeField::new(1 << 62), Err(Error::ModulusOutOfRange(_))));
        assert!(PrimeField::new((1 << 61) - 1).is_ok());
    }

    #[test]
    fn residue_count_is_half() {
        for p in num_prime::nt_funcs::primes(1000).into_iter().filter(|&p| p > 2) {
            let fp = f(p);
            let residues = (1..p)
                .filter(|&a| fp.legendre(Fp(a)).unwrap() == QuadraticCharacter::Residue)
                .count() as u64;
            assert_eq!(residues, (p - 1) / 2, "p = {p}");
        }
    }

    #[test]
    fn sqrt_covers_all_residues() {
        for p in [3u64, 5, 13, 17, 97, 257, 7681] {
            let fp = f(p);
            for a in 0..p.min(2000) {
                let a = Fp(a);
                match fp.sqrt(a).unwrap() {
                    Some(r) => assert_eq!(fp.square(r), a),
                    None => assert_eq!(fp.legendre(a).unwrap(), QuadraticCharacter::NonResidue),
                }
            }
        }
    }

    fn prime_strategy() -> impl Strategy<Value = u64> {
        prop_oneof![3u64..10_000, 1u64 << 40..(1u64 << 40) + 100_000, (1u64 << 61)..(1u64 << 62) - 1]
            .prop_filter("prime", |&p| is_prime64(p))
    }

    proptest! {
        #[test]
        fn mul_inverse_is_one(p in prime_strategy(), x in any::<u64>()) {
            let fp = f(p);
            let x = fp.elem(x);
            prop_assume!(!x.is_zero());
            prop_assert_eq!(fp.mul(x, fp.inv(x).unwrap()), Fp::ONE);
        }

        #[test]
        fn legendre_is_multiplicative(p in prime_strategy(), a in any::<u64>(), b in any::<u64>()) {
            let fp = f(p);
            let (a, b) = (fp.elem(a), fp.elem(b));
            prop_assume!(!a.is_zero() && !b.is_zero());
            let lhs = fp.legendre(fp.mul(a, b)).unwrap().as_i8();
            let rhs = fp.legendre(a).unwrap().as_i8() * fp.legendre(b).unwrap().as_i8();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn sub_inverts_add(p in prime_strategy(), x in any::<u64>(), y in any::<u64>()) {
            let fp = f(p);
            let (x, y) = (fp.elem(x), fp.elem(y));
            prop_assert_eq!(fp.sub(fp.add(x, y), y), x);
            prop_assert!(fp.add(x, y).value() < p);
        }
    }
}
