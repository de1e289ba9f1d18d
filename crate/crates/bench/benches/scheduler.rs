use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use popsched::scheduler::select_schedulable;
use popsched::{Flow, FlowId, NodeId, Packet, QueueDiscipline};
use popsched_bench::loaded_scheduler;

// Arrivals at twice the service rate keep the queue full, so every enqueue
// runs admission.
fn overloaded_cycle(c: &mut Criterion) {
    let mut group = c.benchmark_group("enqueue_dequeue");
    for flows in [8u32, 40, 200] {
        group.bench_with_input(BenchmarkId::from_parameter(flows), &flows, |b, &flows| {
            b.iter_batched(
                || loaded_scheduler(flows, 64),
                |mut s| {
                    let mut t = 1.0;
                    for k in 0..1_000u64 {
                        t += 1e-3;
                        let f = ((k * 13) % u64::from(flows)) as u32;
                        let _ = s.enqueue(Packet::new(FlowId(f), 512, t, 1_000 + k), t);
                        if k % 2 == 0 {
                            black_box(s.dequeue(t));
                        }
                    }
                    s
                },
                BatchSize::SmallInput,
            );
        });
    }
    group.finish();
}

fn greedy_selection(c: &mut Criterion) {
    let flows: Vec<Flow> = (0..1_000u32)
        .map(|i| {
            let u = 0.001 + f64::from(i % 17) / 100.0;
            Flow::new(FlowId(i), NodeId(i), 1.0, u, 0.5).unwrap()
        })
        .collect();
    c.bench_function("select_schedulable/1000", |b| {
        b.iter(|| select_schedulable(black_box(&flows)))
    });
}

criterion_group!(benches, overloaded_cycle, greedy_selection);
criterion_main!(benches);
