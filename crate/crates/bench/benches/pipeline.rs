use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use setu_bench::project;
use setu_core::corpus::ground_truth;
use setu_core::evaluation::{map_curve, threshold_grid};
use setu_core::image_features::{color_descriptor, structure_descriptor};
use setu_core::ranker::{rank_duplicates, rank_with_matrix};
use setu_core::similarity::{FeatureMask, ScoreMatrix};
use setu_core::synthgen::LayoutLibrary;
use setu_core::CombinerKind;

fn descriptors(c: &mut Criterion) {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    let mut group = c.benchmark_group("descriptors");
    for (w, h) in [(96, 160), (360, 640), (720, 1280)] {
        let mut lib = LayoutLibrary::new(w, h);
        let id = lib.add_distinct(&mut rng).unwrap();
        let img = lib.render_noisy(id, &mut rng);
        group.bench_with_input(
            BenchmarkId::new("structure", format!("{w}x{h}")),
            &img,
            |b, img| b.iter(|| structure_descriptor(black_box(img))),
        );
        group.bench_with_input(
            BenchmarkId::new("color", format!("{w}x{h}")),
            &img,
            |b, img| b.iter(|| color_descriptor(black_box(img))),
        );
    }
    group.finish();
}

fn scoring(c: &mut Criterion) {
    let mut group = c.benchmark_group("scoring");
    group.sample_size(20);
    for n in [50, 200] {
        let (_, f) = project(n, 7);
        group.bench_with_input(BenchmarkId::new("score_matrix", n), &f, |b, f| {
            b.iter(|| ScoreMatrix::compute(black_box(&f.bundles), FeatureMask::FULL).unwrap())
        });
        let query = f.report_ids[0].clone();
        group.bench_with_input(BenchmarkId::new("rank_duplicates", n), &f, |b, f| {
            b.iter(|| {
                rank_duplicates(
                    &query,
                    f,
                    CombinerKind::Hierarchical { thres: 0.94 },
                    FeatureMask::FULL,
                )
                .unwrap()
            })
        });
        let matrix = ScoreMatrix::compute(&f.bundles, FeatureMask::FULL).unwrap();
        group.bench_with_input(BenchmarkId::new("rank_with_matrix", n), &matrix, |b, m| {
            b.iter(|| rank_with_matrix(0, black_box(m), CombinerKind::Hierarchical { thres: 0.94 }))
        });
    }
    group.finish();
}

fn tuning(c: &mut Criterion) {
    let (g, f) = project(200, 11);
    let gt = ground_truth(&g.project);
    let matrix = ScoreMatrix::compute(&f.bundles, FeatureMask::FULL).unwrap();
    let grid = threshold_grid(0.01).unwrap();
    c.bench_function("map_curve/200x101", |b| {
        b.iter(|| map_curve(black_box(&matrix), &gt, &grid).unwrap())
    });
}

criterion_group!(benches, descriptors, scoring, tuning);
criterion_main!(benches);
