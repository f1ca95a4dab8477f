//! The five one-parameter families y^2 = x^3 + f(t)x + g(t) whose nonsingular
//! specializations carry a rational point of order d, d in {7, 9, 10, 12, 16}.
//!
//! Each family is kept twice: as the factored expressions (evaluated factor by
//! factor) and as expanded coefficient lists. Every evaluation runs both and
//! refuses to answer if they differ.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::{nagell_lutz_discriminant, CurveQ};
use crate::error::{Error, Result};

/// Moduli with an explicit family.
pub const FAMILY_MODULI: [i64; 5] = [7, 9, 10, 12, 16];

/// Moduli reachable through a family for a multiple of them.
pub const DIVISOR_MODULI: [i64; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16];

/// Expanded integer coefficients of f(t) and g(t), constant term first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub d: i64,
    pub f_coeffs: &'static [i64],
    pub g_coeffs: &'static [i64],
}

const D16: FamilySpec = FamilySpec {
    d: 16,
    f_coeffs: &[-27, 0, 216, 0, -324, 0, -216, 0, -6210, 0, -216, 0, -324, 0, 216, 0, -27],
    g_coeffs: &[
        54, 0, -648, 0, 2268, 0, -1512, 0, -30294, 0, 112752, 0, 55944, 0, 112752, 0, -30294, 0, -1512, 0, 2268, 0,
        -648, 0, 54,
    ],
};

const D12: FamilySpec = FamilySpec {
    d: 12,
    f_coeffs: &[-27, -108, -108, 54, 135, 54, -108, -108, -27],
    g_coeffs: &[54, 324, 648, 270, -729, -972, -648, -972, -729, 270, 648, 324, 54],
};

const D10: FamilySpec = FamilySpec {
    d: 10,
    f_coeffs: &[-27, 108, 162, -540, -405, 648, 108, -648, -405, 540, 162, -108, -27],
    g_coeffs: &[
        54, -324, -162, 2808, 0, -8424, 864, 12312, 972, 0, 972, -12312, 864, 8424, 0, -2808, -162, 324, 54,
    ],
};

const D9: FamilySpec = FamilySpec {
    d: 9,
    f_coeffs: &[-27, 0, 324, -756, 486, 972, -3078, 4860, -5103, 3456, -1458, 324, -27],
    g_coeffs: &[
        54, 0, -972, 2268, 1458, -16524, 39690, -58320, 73386, -109728, 174960, -228420, 222912, -160380, 84078,
        -30780, 7290, -972, 54,
    ],
};

const D7: FamilySpec = FamilySpec {
    d: 7,
    f_coeffs: &[-27, 108, 378, 0, -945, -1512, -1134, -324, -27],
    g_coeffs: &[54, -324, -810, 2484, 9396, 11988, 14742, 26244, 30780, 19116, 6318, 972, 54],
};

pub fn family_spec(d: i64) -> Result<FamilySpec> {
    match d {
        7 => Ok(D7),
        9 => Ok(D9),
        10 => Ok(D10),
        12 => Ok(D12),
        16 => Ok(D16),
        _ => Err(Error::UnsupportedFamily(d)),
    }
}

/// Horner evaluation of a coefficient list, constant term first.
pub fn eval_poly(coeffs: &[i64], t: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, &c| acc * t + c)
}

fn pow(t: &BigInt, e: u32) -> BigInt {
    num_traits::pow(t.clone(), e as usize)
}

/// f(t), g(t) from the factored expressions.
fn eval_factored(d: i64, t: &BigInt) -> Result<(BigInt, BigInt)> {
    let one = BigInt::one();
    let p = |coeffs: &[i64]| eval_poly(coeffs, t);
    Ok(match d {
        16 => {
            let u = pow(&(t * t - &one), 4);
            let v = pow(t, 4) * 16;
            let f = (&u * (&u - &v) + pow(t, 8) * 256) * -27;
            let w = &u + &v;
            let g = &w * (&w * &w - pow(t, 4) * &u * 72) * 54;
            (f, g)
        }
        12 => {
            let f = p(&[1, 4, 4, -2, -5, -2, 4, 4, 1]) * -27;
            let g = p(&[1, 2, 0, 2, 1]) * p(&[2, 8, 8, -10, -25, -10, 8, 8, 2]) * 27;
            (f, g)
        }
        10 => {
            let q = p(&[1, -2, -6, 2, 1]);
            let s = pow(&(&one + t * t), 2) * &q * &q;
            let r = pow(t, 5) * p(&[1, 1, -1]);
            let f = (&s - &r * 48) * -27;
            let g = (&one + t * t) * &q * (&s - &r * 72) * 54;
            (f, g)
        }
        9 => {
            let f = p(&[1, 0, -3, 1]) * p(&[1, 0, -9, 27, -45, 54, -48, 27, -9, 1]) * -27;
            let g = p(&[
                1, 0, -18, 42, 27, -306, 735, -1080, 1359, -2032, 3240, -4230, 4128, -2970, 1557, -570, 135, -18, 1,
            ]) * 54;
            (f, g)
        }
        7 => {
            let f = p(&[1, 1, 1]) * p(&[1, -5, -10, 15, 30, 11, 1]) * -27;
            let g = p(&[54, -324, -810, 2484, 9396, 11988, 14742, 26244, 30780, 19116, 6318, 972, 54]);
            (f, g)
        }
        _ => return Err(Error::UnsupportedFamily(d)),
    })
}

/// (f(t), g(t)) for the family of modulus d.
pub fn family_coefficients(d: i64, t: &BigInt) -> Result<(BigInt, BigInt)> {
    let spec = family_spec(d)?;
    let expanded = (eval_poly(spec.f_coeffs, t), eval_poly(spec.g_coeffs, t));
    let factored = eval_factored(d, t)?;
    if expanded != factored {
        return Err(Error::FamilyTranscription { d, t: t.to_string() });
    }
    Ok(expanded)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Specialization {
    Nonsingular { curve: CurveQ },
    /// 4f(t)^3 + 27g(t)^2 = 0.
    Singular { d: i64, t: String },
}

impl Specialization {
    pub fn curve(&self) -> Option<&CurveQ> {
        match self {
            Specialization::Nonsingular { curve } => Some(curve),
            Specialization::Singular { .. } => None,
        }
    }
}

pub fn family_curve(d: i64, t: &BigInt) -> Result<Specialization> {
    let (f, g) = family_coefficients(d, t)?;
    if nagell_lutz_discriminant(&f, &g).is_zero() {
        return Ok(Specialization::Singular { d, t: t.to_string() });
    }
    Ok(Specialization::Nonsingular { curve: CurveQ::new(f, g)? })
}

/// The family used for a modulus dividing one of the five family moduli.
pub fn parent_family(d: i64) -> Result<i64> {
    match d {
        2 | 4 | 8 | 16 => Ok(16),
        3 | 6 | 12 => Ok(12),
        5 | 10 => Ok(10),
        9 => Ok(9),
        7 => Ok(7),
        _ => Err(Error::UnsupportedFamily(d)),
    }
}

pub fn family_for_divisor(d: i64, t: &BigInt) -> Result<Specialization> {
    family_curve(parent_family(d)?, t)
}

/// Parameters in [lo, hi] with a singular specialization.
pub fn singular_parameters(d: i64, lo: i64, hi: i64) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for t in lo..=hi {
        if let Specialization::Singular { .. } = family_curve(d, &t.into())? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Every nonsingular specialization with t in [lo, hi], as (d, t, curve).
pub fn family_corpus(lo: i64, hi: i64) -> Result<Vec<(i64, i64, CurveQ)>> {
    let mut out = Vec::new();
    for d in FAMILY_MODULI {
        for t in lo..=hi {
            if let Specialization::Nonsingular { curve } = family_curve(d, &t.into())? {
                out.push((d, t, curve));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(family_coefficients(7, &b(0)).unwrap(), (b(-27), b(54)));
        assert_eq!(family_coefficients(7, &b(1)).unwrap(), (b(-3483), b(121014)));
        assert_eq!(family_coefficients(16, &b(0)).unwrap(), (b(-27), b(54)));
        assert_eq!(family_coefficients(16, &b(1)).unwrap(), (b(-6912), b(221184)));
        assert!(matches!(family_coefficients(11, &b(0)), Err(Error::UnsupportedFamily(11))));
    }

    #[test]
    fn printed_anchors() {
        let g7 = family_spec(7).unwrap().g_coeffs;
        assert_eq!((g7[0], *g7.last().unwrap()), (54, 54));
        for d in FAMILY_MODULI {
            let s = family_spec(d).unwrap();
            assert_eq!(s.f_coeffs[0], -27, "d={d}");
            assert_eq!(s.g_coeffs[0], 54, "d={d}");
        }
    }

    #[test]
    fn specializations() {
        assert_eq!(family_curve(7, &b(0)).unwrap(), Specialization::Singular { d: 7, t: "0".into() });
        assert!(matches!(family_curve(16, &b(1)).unwrap(), Specialization::Singular { .. }));
        let c = family_curve(7, &b(1)).unwrap();
        assert_eq!(c.curve().unwrap().id(), "-3483,121014");
    }

    #[test]
    fn singular_loci_in_small_range() {
        // values from an independent symbolic evaluation
        assert_eq!(singular_parameters(16, -5, 5).unwrap(), vec![-1, 0, 1]);
        assert_eq!(singular_parameters(12, -5, 5).unwrap(), vec![-2, -1, 0, 1]);
        assert_eq!(singular_parameters(10, -5, 5).unwrap(), vec![-1, 0, 1]);
        assert_eq!(singular_parameters(9, -5, 5).unwrap(), vec![0, 1]);
        assert_eq!(singular_parameters(7, -5, 5).unwrap(), vec![-1, 0]);
    }

    #[test]
    fn t_equals_two_values() {
        // values from an independent symbolic evaluation
        let cases = [
            (16, -1386747, 368636886),
            (12, -24003, 1296702),
            (10, -58347, 3954150),
            (9, -17739, 1205766),
            (7, -182763, 31201254),
        ];
        for (d, f, g) in cases {
            assert_eq!(family_coefficients(d, &b(2)).unwrap(), (b(f), b(g)), "d={d}");
        }
    }

    #[test]
    fn divisor_delegation() {
        for (dp, parent) in [(2, 16), (4, 16), (8, 16), (3, 12), (6, 12), (5, 10), (9, 9), (7, 7)] {
            assert_eq!(family_for_divisor(dp, &b(2)).unwrap(), family_curve(parent, &b(2)).unwrap());
        }
        assert_eq!(family_for_divisor(5, &b(1)).unwrap(), family_curve(10, &b(1)).unwrap());
        for bad in [1, 11, 13, 14, 15, 17, 24] {
            assert!(matches!(family_for_divisor(bad, &b(1)), Err(Error::UnsupportedFamily(_))));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn factored_and_expanded_agree(d in prop::sample::select(FAMILY_MODULI.to_vec()), t in any::<i64>()) {
            let t = BigInt::from(t);
            let spec = family_spec(d).unwrap();
            let expanded = (eval_poly(spec.f_coeffs, &t), eval_poly(spec.g_coeffs, &t));
            prop_assert_eq!(eval_factored(d, &t).unwrap(), expanded);
        }
    }
}
