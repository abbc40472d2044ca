use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use tcer_bench::{periodic, sensor_like, PAIRS_BEFORE_B};
use tcer_core::samples::HUMIDITY_BURST;
use tcer_core::{parse_query, streamable, Evaluator};

fn update(c: &mut Criterion) {
    let a = streamable(&parse_query(HUMIDITY_BURST).unwrap()).unwrap();
    let mut group = c.benchmark_group("update");
    for n in [1_000usize, 10_000, 100_000] {
        let s = sensor_like(n, 7);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("humidity_burst", n), &s, |b, s| {
            b.iter_batched(
                || Evaluator::new(&a).unwrap(),
                |mut ev| {
                    for (e, t) in s.iter() {
                        ev.push(e, *t).unwrap();
                    }
                    ev
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let a = streamable(&parse_query(PAIRS_BEFORE_B).unwrap()).unwrap();
    let s = periodic(3000, 50);
    let mut ev = Evaluator::new(&a).unwrap();
    for (e, t) in s.iter() {
        ev.push(e, *t).unwrap();
    }
    let mut count = 0u64;
    ev.for_each_output(|_| count += 1);
    let mut group = c.benchmark_group("enumerate");
    group.throughput(Throughput::Elements(count));
    group.bench_function("pairs_before_b", |b| {
        b.iter(|| {
            let mut n = 0usize;
            ev.for_each_output(|c| n += c.size());
            n
        })
    });
    group.finish();
}

criterion_group!(benches, update, enumeration);
criterion_main!(benches);
