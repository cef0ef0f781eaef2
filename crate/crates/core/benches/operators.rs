use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracdual::{apply_with, parse_funcspec, ApplyOptions, Exec, FracOrder, FuncRep, Grid, Interval, OpKind, OperatorKind, PathChoice, Side};

fn bench_exec(c: &mut Criterion) {
    let interval = Interval::new(0.0, 1.0).unwrap();
    let f = FuncRep::closed(parse_funcspec("sin:omega=2,phase=0.3").unwrap(), interval).unwrap();
    let order = FracOrder::new(0.5).unwrap();
    let cases = [
        ("right-caputo/analytic", OpKind::Caputo, PathChoice::Auto),
        ("right-rl-integral/numeric", OpKind::RlIntegral, PathChoice::Numeric),
        ("right-caputo/numeric", OpKind::Caputo, PathChoice::Numeric),
    ];
    for (name, kind, path) in cases {
        let mut group = c.benchmark_group(name);
        group.sample_size(20);
        for n in [257, 2049] {
            let grid = Grid::new(interval, n).unwrap();
            let op = OperatorKind::new(Side::Right, kind);
            for exec in [Exec::Sequential, Exec::Parallel] {
                let opts = ApplyOptions { path, exec };
                group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &grid, |b, grid| {
                    b.iter(|| apply_with(op, order, &f, grid, &opts).unwrap())
                });
            }
        }
        group.finish();
    }
}

criterion_group!(benches, bench_exec);
criterion_main!(benches);
