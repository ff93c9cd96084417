use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sysgrader_core::trace::{check_trace, parse_trace, TraceSpec};

const SPEC: &str = include_str!("../../../assignments/io-scheduler/trace.yaml");

/// A valid single-producer, single-consumer run over a ring of `size`.
fn trace(size: u64, total: u64) -> String {
    let mut rng = StdRng::seed_from_u64(total);
    let mut out = String::new();
    let (mut produced, mut consumed) = (0u64, 0u64);
    let mut ring = vec![0u32; size as usize];
    while consumed < total {
        let can_produce = produced < total && produced - consumed < size;
        if can_produce && (produced == consumed || rng.gen_bool(0.5)) {
            let v = rng.gen_range(0..100);
            ring[(produced % size) as usize] = v;
            out.push_str(&format!("[PROD] pid=1 value={v} pos={}\n", produced % size));
            produced += 1;
        } else {
            let pos = consumed % size;
            out.push_str(&format!(
                "[CONS] pid=2 value={} pos={pos}\n",
                ring[pos as usize]
            ));
            consumed += 1;
        }
    }
    out
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace");
    for total in [100u64, 10_000] {
        let mut spec = TraceSpec::from_yaml(SPEC).unwrap();
        spec.total = total;
        let text = trace(spec.size, total);
        group.bench_with_input(BenchmarkId::new("parse", total), &text, |b, t| {
            b.iter(|| parse_trace(black_box(t), &spec).unwrap())
        });
        let events = parse_trace(&text, &spec).unwrap();
        assert!(check_trace(&events, &spec).passed());
        group.bench_with_input(BenchmarkId::new("check", total), &events, |b, e| {
            b.iter(|| check_trace(black_box(e), &spec))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
