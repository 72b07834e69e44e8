//! Grid throughput: connection extraction over a parameter grid, rayon
//! data-parallel map against the sequential baseline.

use criterion::{criterion_group, criterion_main, Criterion};
use minitwistor::family::build_branched_cover_12;
use minitwistor::projconn::{extract_connection, PipelineOpts};
use minitwistor::report::GridSpec;

fn bench_grid(c: &mut Criterion) {
    let fam = build_branched_cover_12().expect("builder");
    let grid = GridSpec {
        n: 2,
        lo: -0.1,
        hi: 0.1,
    };
    let points = grid.points(&fam.t0);
    let opts = PipelineOpts::fast();

    let mut group = c.benchmark_group("connection_grid");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out = minitwistor::exec::seq_map(&points, |t| {
                extract_connection(&fam, t, &opts).expect("pipeline").residual
            });
            criterion::black_box(out)
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let out = minitwistor::exec::par_map(&points, |t| {
                extract_connection(&fam, t, &opts).expect("pipeline").residual
            });
            criterion::black_box(out)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_grid);
criterion_main!(benches);
