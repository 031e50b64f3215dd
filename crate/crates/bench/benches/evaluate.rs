use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tndp_core::evaluation::evaluate;
use tndp_core::network::BusNetwork;

fn bench_evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(20);
    for (junctions, stops, grid) in [(100, 36, 5), (200, 60, 10)] {
        let ctx = tndp_bench::city(7, junctions, stops, grid);
        let network = BusNetwork::new(ctx.pool.mutable_ids().iter().copied());
        group.bench_function(format!("{stops}_stops_grid_{grid}"), |b| {
            b.iter(|| evaluate(black_box(&network), &ctx).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_evaluate);
criterion_main!(benches);
