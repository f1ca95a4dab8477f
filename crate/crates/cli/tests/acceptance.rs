//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ellcong_cli::{run_cli, EXIT_OK};
use ellcong_core::families::{family_corpus, FAMILY_MODULI};
use ellcong_core::galois::{congruence_from_records, enumerate_gl2, DEFAULT_SUBGROUP_CAP};
use ellcong_core::survey::{cm_density, CmThresholds, SurveyConfig};
use ellcong_core::torsion::MAZUR_ORDERS;
use ellcong_core::{
    count_bsgs, count_exhaustive, frobenius_scan, generate_subgroup, gl2_order, residue_histogram,
    s_condition_check, serre_condition, supersingular_primes, survey_sets, torsion_group, CmLabel,
    CongruencePair, CurveFp, CurveQ, FrobeniusRecord, Gl2Element, Gl2Subgroup, PrimeField, PrimeRange,
    ResidueFilter, ScanConfig, SurveyMode, TorsionConfig,
};

const BOUND: u64 = 10_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// (d, t, curve) for every nonsingular family curve with t in [-5, 5].
fn corpus() -> Vec<(i64, i64, CurveQ)> {
    family_corpus(-5, 5).expect("family corpus")
}

fn hasse_holds(records: &[FrobeniusRecord]) -> Result<(), String> {
    for r in records {
        if let Some(a) = r.a_p() {
            check((a as i128).pow(2) <= 4 * r.p() as i128, || format!("a_p = {a} at p = {}", r.p()))?;
        }
    }
    Ok(())
}

/// Runs the congruence command for every family curve and returns the
/// concatenated JSON documents.
fn family_reports(dir: &Path, extra: &[&str]) -> Result<String, String> {
    let mut all = String::new();
    for (i, (d, _, curve)) in corpus().iter().enumerate() {
        let json = dir.join(format!("r{i}.json"));
        let (id, d, bound) = (curve.id(), d.to_string(), BOUND.to_string());
        let mut argv = vec!["ellcong", "congruence", "--curve", &id, "--d", &d, "--alpha", "0", "--bound", &bound];
        argv.extend_from_slice(extra);
        argv.extend_from_slice(&["--json", json.to_str().unwrap()]);
        let out = run_cli(&argv);
        check(out.code == EXIT_OK, || format!("{id} (d = {d}): exit {} {}", out.code, out.stderr))?;
        let report = out.report.ok_or("no report")?;
        check(report.violations == Some(0), || format!("{id} (d = {d}): {:?} violations", report.violations))?;
        all.push_str(&fs::read_to_string(&json).map_err(|e| e.to_string())?);
    }
    Ok(all)
}

fn family_congruence() -> Outcome {
    let corpus = corpus();
    for d in FAMILY_MODULI {
        let n = corpus.iter().filter(|(dd, _, _)| *dd == d).count();
        check(n >= 2, || format!("d = {d}: only {n} nonsingular t in [-5, 5]"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    family_reports(dir.path(), &[])?;
    for (_, _, curve) in &corpus {
        hasse_holds(&frobenius_scan(curve, PrimeRange::up_to(BOUND), &ScanConfig::default()).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{} curves, zero violations up to {BOUND}", corpus.len()))
}

fn family_torsion() -> Outcome {
    let corpus = corpus();
    for (d, t, curve) in &corpus {
        let g = torsion_group(curve, &TorsionConfig::default()).map_err(|e| format!("{}: {e}", curve.id()))?;
        check(g.order % *d as u64 == 0, || format!("d = {d}, t = {t}: torsion order {}", g.order))?;
        check(MAZUR_ORDERS.contains(&g.order), || format!("d = {d}, t = {t}: order {} not in Mazur's list", g.order))?;
    }
    Ok(format!("{} curves, torsion order divisible by d", corpus.len()))
}

fn divisor_coherence() -> Outcome {
    let filter = ResidueFilter::all();
    let mut checks = 0;
    for (d, _, curve) in corpus() {
        let records = frobenius_scan(&curve, PrimeRange::up_to(BOUND), &ScanConfig::default()).map_err(|e| e.to_string())?;
        for dp in (2..d).filter(|dp| d % dp == 0) {
            let rep = congruence_from_records(&curve, &records, CongruencePair::new(dp, 0).unwrap(), BOUND, &filter);
            check(rep.holds(), || format!("{} (d = {d}) fails mod {dp}: {:?}", curve.id(), rep.largest_violation))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} (curve, proper divisor) pairs clean"))
}

fn serre_exhaustion() -> Outcome {
    for d in 2..=16u64 {
        let triv = generate_subgroup(&[], d, DEFAULT_SUBGROUP_CAP).map_err(|e| e.to_string())?;
        check(serre_condition(&triv) == BTreeSet::from([0]), || format!("identity subgroup mod {d}"))?;
    }
    let full = Gl2Subgroup::full(2).map_err(|e| e.to_string())?;
    check(serre_condition(&full).is_empty(), || "full GL(2, Z/2) admits some alpha".into())?;
    let gens = [Gl2Element::new(2, [0, 1, 1, 0]).unwrap(), Gl2Element::new(2, [1, 1, 0, 1]).unwrap()];
    check(generate_subgroup(&gens, 2, DEFAULT_SUBGROUP_CAP).map_err(|e| e.to_string())? == full, || {
        "generated GL(2, Z/2) differs from enumeration".into()
    })?;
    for (d, want) in [(2u64, 6u64), (3, 48), (4, 96), (5, 480)] {
        let formula = gl2_order(d).map_err(|e| e.to_string())?;
        let counted = enumerate_gl2(d).map_err(|e| e.to_string())?.len() as u64;
        check(formula == want && counted == want, || format!("d = {d}: formula {formula}, enumeration {counted}"))?;
    }
    Ok("identity gives {0} for d in 2..=16; GL(2, Z/2) gives {}; |GL(2, Z/d)| = 6, 48, 96, 480".into())
}

fn supersingular_structure() -> Outcome {
    let e: CurveQ = "0,1".parse().unwrap();
    let cfg = ScanConfig::default();
    let ss: BTreeSet<u64> = supersingular_primes(&e, BOUND, &cfg).map_err(|e| e.to_string())?.into_iter().collect();
    let expected: BTreeSet<u64> = PrimeRange::new(5, BOUND).primes().into_iter().filter(|p| p % 3 == 2).collect();
    let diff: Vec<u64> = ss.symmetric_difference(&expected).copied().collect();
    check(diff.is_empty(), || format!("symmetric difference {diff:?}"))?;

    let entry = s_condition_check(&e, CongruencePair::new(3, 0).unwrap(), BOUND, &SurveyConfig::default())
        .map_err(|e| e.to_string())?;
    check(entry.holds() && entry.primes_tested == ss.len() as u64, || {
        format!("s-check (3, 0): {} violations over {} primes", entry.violating, entry.primes_tested)
    })?;

    let hist = residue_histogram(&ss.iter().copied().collect::<Vec<_>>(), 4);
    check(hist.contains_key(&1) && hist.contains_key(&3), || format!("histogram mod 4: {hist:?}"))?;

    let v = cm_density(&e, BOUND, &cfg, &CmThresholds::default()).map_err(|e| e.to_string())?;
    check(v.verdict == CmLabel::LikelyCM && (0.45..=0.55).contains(&v.density), || format!("{v:?}"))?;
    Ok(format!("{} supersingular primes, density {:.4}, mod 4 histogram {hist:?}", ss.len(), v.density))
}

fn non_cm_contrast() -> Outcome {
    let e: CurveQ = "1,1".parse().unwrap();
    let v = cm_density(&e, BOUND, &ScanConfig::default(), &CmThresholds::default()).map_err(|e| e.to_string())?;
    check(v.verdict == CmLabel::LikelyNonCM && v.density < 0.1, || format!("{v:?}"))?;
    Ok(format!("{} supersingular of {} good primes, density {:.4}", v.supersingular, v.good, v.density))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut done = 0;
    while done < 200 {
        let p = rng.gen_range(1_000..=10_000u64);
        let Ok(f) = PrimeField::new(p) else { continue };
        let Ok(e) = CurveFp::new(f, f.elem(rng.gen_range(0..p)), f.elem(rng.gen_range(0..p))) else { continue };
        let slow = count_exhaustive(&e);
        let fast = count_bsgs(&e).map_err(|err| format!("p = {p}: {err}"))?;
        check(slow == fast, || format!("p = {p}, a = {}, b = {}: {slow} vs {fast}", e.a(), e.b()))?;
        FrobeniusRecord::good(p, fast).map_err(|err| err.to_string())?;
        done += 1;
    }
    Ok("200 random curves agree; Hasse bound holds".into())
}

fn s1_emptiness() -> Outcome {
    let curves: Vec<CurveQ> = corpus().into_iter().map(|(_, _, c)| c).collect();
    let rep = survey_sets(1, 16, &curves, BOUND, &SurveyConfig::default(), None).map_err(|e| e.to_string())?;
    check(rep.failures.is_empty(), || format!("failures: {:?}", rep.failures))?;
    let mut forced = 0;
    for entry in rep.entries.iter().filter(|e| e.mode == SurveyMode::Supersingular) {
        if entry.classes_hit() >= 2 {
            check(!entry.holds(), || format!("{} mod {}: no violation despite two residues", entry.curve, entry.d))?;
            forced += 1;
        }
        if entry.holds() {
            check(entry.alpha_minus_one_coprime != Some(false), || {
                format!("{} mod {}: clean but gcd(alpha - 1, d) > 1", entry.curve, entry.d)
            })?;
        }
    }
    check(rep.s_candidates.is_empty(), || format!("S(1) candidates {:?}", rep.s_candidates))?;
    Ok(format!("{forced} supersingular reports with two residues all violate; no S(1) candidate"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache = dir.path().join("ap.cache");
    let cache = cache.to_str().unwrap();
    let one = family_reports(dir.path(), &["--threads", "1"])?;
    let eight = family_reports(dir.path(), &["--threads", "8"])?;
    check(one == eight, || "--threads 1 and --threads 8 differ".into())?;
    let cold = family_reports(dir.path(), &["--threads", "8", "--cache", cache])?;
    let written = fs::read_to_string(cache).map_err(|e| e.to_string())?;
    let warm = family_reports(dir.path(), &["--threads", "1", "--cache", cache])?;
    check(cold == warm && cold == one, || "cold and warm cache runs differ".into())?;
    check(fs::read_to_string(cache).map_err(|e| e.to_string())? == written, || "warm run changed the cache".into())?;
    Ok(format!("{} report bytes identical across 4 runs", one.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("family congruence", family_congruence),
        ("family torsion", family_torsion),
        ("divisor coherence", divisor_coherence),
        ("Serre criterion exhaustion", serre_exhaustion),
        ("supersingular structure of x^3 + 1", supersingular_structure),
        ("non-CM contrast for x^3 + x + 1", non_cm_contrast),
        ("BSGS and enumeration agree", oracle_equivalence),
        ("S(1) emptiness evidence", s1_emptiness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
