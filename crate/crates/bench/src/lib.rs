//! Benchmark fixtures shared by the criterion targets.

use ellcong_core::{CurveFp, CurveQ, PrimeField};

/// y^2 = x^3 + x + 1 over F_p.
pub fn generic_curve(p: u64) -> CurveFp {
    let f = PrimeField::new(p).expect("benchmark modulus is prime");
    CurveFp::new(f, f.elem(1), f.elem(1)).expect("nonsingular for the benchmark primes")
}

/// The d = 7 family at t = 1.
pub fn family_seven() -> CurveQ {
    "-3483,121014".parse().expect("valid curve")
}
