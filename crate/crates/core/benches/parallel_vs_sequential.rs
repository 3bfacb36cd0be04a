use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qslab_core::constructions::build_tower;
use qslab_core::exact_torus::{Angle, SpecialAngle, TorusPoint};
use qslab_core::induced::{chopping_stats, ChoppingOptions};
use qslab_core::par::Parallelism;
use qslab_core::partition::IntervalPartition;
use qslab_core::rules::Rule;

const MODES: [(Parallelism, &str); 2] = [
    (Parallelism::Sequential, "sequential"),
    (Parallelism::Parallel, "parallel"),
];

fn sturmian(a: &Angle) -> IntervalPartition {
    IntervalPartition::from_boundaries(a, 2, vec![(TorusPoint::zero(), 1), (TorusPoint::orbit(1), 0)])
        .expect("sturmian partition")
}

fn chopping(c: &mut Criterion) {
    let a = Angle::golden();
    let p = sturmian(&a);
    let rule: Rule = "lin:p=2:1+x^1".parse().unwrap();
    let mut g = c.benchmark_group("chopping_stats");
    g.sample_size(10);
    for (mode, name) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 256), &mode, |b, &mode| {
            let opts = ChoppingOptions { parallelism: mode, ..Default::default() };
            b.iter(|| chopping_stats(&rule, &p, 256, opts).unwrap())
        });
    }
    g.finish();
}

fn trajectory(c: &mut Criterion) {
    let a = Angle::golden();
    let rule: Rule = "lin:p=2:1+x^1+x^3".parse().unwrap();
    let p = qslab_core::induced::induced_iterate(
        &rule,
        &sturmian(&a),
        40,
        qslab_core::induced::Strategy::Power,
    )
    .unwrap();
    let mut g = c.benchmark_group("trajectory");
    g.sample_size(10);
    for (mode, name) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 1_000_000), &mode, |b, &mode| {
            b.iter(|| qslab_core::trajectory::trajectory(&p, &TorusPoint::zero(), 0, 1_000_000, mode).unwrap())
        });
    }
    g.finish();
}

fn tower(c: &mut Criterion) {
    let a = Angle::special(SpecialAngle::HighPartialQuotient(10_000)).unwrap();
    let mut g = c.benchmark_group("build_tower");
    g.sample_size(10);
    for (mode, name) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 5000), &mode, |b, &mode| {
            b.iter(|| build_tower(&a, 5000, 0.01, mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, chopping, trajectory, tower);
criterion_main!(benches);
