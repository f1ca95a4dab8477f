use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ellcong_bench::{family_seven, generic_curve};
use ellcong_core::galois::{generate_subgroup, parse_generators, DEFAULT_SUBGROUP_CAP};
use ellcong_core::{count_bsgs, count_exhaustive, frobenius_scan, PrimeRange, ScanConfig};

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("count");
    for p in [10_007u64, 100_003] {
        let e = generic_curve(p);
        group.bench_with_input(BenchmarkId::new("exhaustive", p), &e, |b, e| b.iter(|| count_exhaustive(black_box(e))));
        group.bench_with_input(BenchmarkId::new("bsgs", p), &e, |b, e| b.iter(|| count_bsgs(black_box(e)).unwrap()));
    }
    let big = generic_curve(1_000_000_007);
    group.bench_function("bsgs/1000000007", |b| b.iter(|| count_bsgs(black_box(&big)).unwrap()));
    group.finish();
}

fn scanning(c: &mut Criterion) {
    let e = family_seven();
    let cfg = ScanConfig::default();
    c.bench_function("frobenius_scan/10^4", |b| {
        b.iter(|| frobenius_scan(black_box(&e), PrimeRange::up_to(10_000), &cfg).unwrap())
    });
}

fn closure(c: &mut Criterion) {
    let gens = parse_generators("1,1,0,1;0,1,12,0", 13).unwrap();
    c.bench_function("generate_subgroup/SL2(F_13)", |b| {
        b.iter(|| generate_subgroup(black_box(&gens), 13, DEFAULT_SUBGROUP_CAP).unwrap())
    });
}

criterion_group!(benches, counting, scanning, closure);
criterion_main!(benches);
