//! Congruences for point counts of elliptic curves over Q.
//!
//! Curves are short Weierstrass models y^2 = x^3 + Ax + B with integer
//! coefficients. The crate counts points modulo primes, finds rational
//! torsion, evaluates the parametrized families with a point of order
//! d in {7, 9, 10, 12, 16}, and checks #E(F_p) = alpha (mod d) both over
//! primes and over finite subgroups of GL(2, Z/dZ).

pub mod cache;
pub mod counting;
pub mod curve;
pub mod error;
pub mod families;
pub mod field;
pub mod galois;
pub mod primes;
pub mod report;
pub mod survey;
pub mod torsion;

pub use cache::{cache_read, cache_write, ApCache, CachedKind};
pub use counting::{
    count_bsgs, count_exhaustive, count_points, frobenius_at, frobenius_scan, frobenius_scan_cached,
    FrobeniusRecord, ReductionKind, ScanConfig,
};
pub use curve::{CurveFp, CurveQ, PointFp, Reduction};
pub use error::{Error, Result};
pub use families::{family_curve, family_for_divisor, parent_family, Specialization, FAMILY_MODULI};
pub use field::{Fp, PrimeField, QuadraticCharacter};
pub use galois::{
    frobenius_congruence_check, generate_subgroup, gl2_order, serre_condition, CongruencePair, CongruenceReport,
    Gl2Element, Gl2Subgroup,
};
pub use primes::{PrimeRange, ResidueClass, ResidueFilter};
pub use report::ReportDocument;
pub use survey::{
    cm_density, euler_phi, residue_histogram, s_condition_check, o_condition_check, supersingular_primes,
    survey_sets, CmLabel, CmVerdict, SurveyConfig, SurveyEntry, SurveyMode, SurveyReport,
};
pub use torsion::{torsion_group, TorsionConfig, TorsionGroup, TorsionStructure};
