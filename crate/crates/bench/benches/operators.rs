use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nldr::{build_graph, build_operator, embed, sample_manifold, ManifoldSpec, Method, NeighborhoodMode, OperatorParams, SolverOptions};

fn assembly(c: &mut Criterion) {
    let cloud = sample_manifold(&ManifoldSpec::swiss_roll_hole(), 1000, 0).unwrap();
    let graph = build_graph(&cloud, NeighborhoodMode::Knn { k: 10 }).unwrap();
    let params = OperatorParams::new(2);
    let mut group = c.benchmark_group("assemble_swiss_roll_1000");
    group.sample_size(10);
    for method in Method::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(method), &method, |b, &m| {
            b.iter(|| build_operator(m, &cloud, &graph, &params).unwrap())
        });
    }
    group.finish();
}

fn neighborhoods(c: &mut Criterion) {
    let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), 4000, 0).unwrap();
    c.bench_function("hball_graph_rectangle_4000", |b| {
        b.iter(|| build_graph(&cloud, NeighborhoodMode::HBall { h: 0.05 }).unwrap())
    });
}

fn embedding(c: &mut Criterion) {
    let cloud = sample_manifold(&ManifoldSpec::segment(0.0, 1.0), 1000, 0).unwrap();
    let graph = build_graph(&cloud, NeighborhoodMode::HBall { h: 0.05 }).unwrap();
    let op = build_operator(Method::LaplacianEigenmaps, &cloud, &graph, &OperatorParams::new(1)).unwrap();
    let mut group = c.benchmark_group("embed_segment_1000");
    group.sample_size(10);
    group.bench_function("auto", |b| b.iter(|| embed(&op, 5, true, &SolverOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, assembly, neighborhoods, embedding);
criterion_main!(benches);
